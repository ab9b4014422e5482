//! Binary PGM (P5, maxval 255).

use std::fs;
use std::path::Path;

use super::ImageBuffer;
use crate::error::{Error, Result};

fn parse_err<T>(offset: usize, message: impl Into<String>) -> Result<T> {
    Err(Error::Parse {
        offset,
        message: message.into(),
    })
}

struct Header<'a> {
    data: &'a [u8],
    pos: usize,
}

impl Header<'_> {
    fn skip_space_and_comments(&mut self) {
        while self.pos < self.data.len() {
            match self.data[self.pos] {
                b'#' => {
                    while self.pos < self.data.len() && self.data[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                b if b.is_ascii_whitespace() => self.pos += 1,
                _ => break,
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<usize> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.pos < self.data.len() && self.data[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return parse_err(start, format!("expected {what}"));
        }
        std::str::from_utf8(&self.data[start..self.pos])
            .expect("ascii digits")
            .parse()
            .or_else(|_| parse_err(start, format!("{what} out of range")))
    }
}

/// Parses a P5 image from memory.
pub fn decode_pgm(data: &[u8]) -> Result<ImageBuffer> {
    match data.get(..2) {
        Some(b"P5") => {}
        Some(b"P2") => return parse_err(0, "ASCII PGM (P2) is not supported"),
        _ => return parse_err(0, "missing P5 magic"),
    }
    let mut h = Header { data, pos: 2 };
    if !data
        .get(2)
        .is_some_and(|b| b.is_ascii_whitespace() || *b == b'#')
    {
        return parse_err(2, "expected whitespace after magic");
    }
    let width = h.number("width")?;
    let height = h.number("height")?;
    let maxval_at = {
        h.skip_space_and_comments();
        h.pos
    };
    let maxval = h.number("maxval")?;
    if maxval != 255 {
        return parse_err(maxval_at, format!("maxval {maxval} unsupported (need 255)"));
    }
    if width == 0 || height == 0 {
        return parse_err(maxval_at, "zero image dimension");
    }
    match data.get(h.pos) {
        Some(b) if b.is_ascii_whitespace() => h.pos += 1,
        _ => return parse_err(h.pos, "expected a single whitespace before raster"),
    }
    let need = width.checked_mul(height).ok_or_else(|| Error::Parse {
        offset: h.pos,
        message: "image too large".into(),
    })?;
    let raster = &data[h.pos..];
    if raster.len() < need {
        return parse_err(
            data.len(),
            format!("truncated raster: {} of {need} bytes", raster.len()),
        );
    }
    ImageBuffer::from_bytes(width, height, &raster[..need])
}

/// Serializes as P5 with a minimal header.
pub fn encode_pgm(img: &ImageBuffer) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend(img.to_bytes());
    out
}

pub fn pgm_read(path: impl AsRef<Path>) -> Result<ImageBuffer> {
    decode_pgm(&fs::read(path)?)
}

pub fn pgm_write(img: &ImageBuffer, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, encode_pgm(img))?;
    Ok(())
}
