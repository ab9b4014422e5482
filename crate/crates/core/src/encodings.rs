//! Binary operands, bitstreams, quantization and stream decoding.
//!
//! Unipolar words carry `raw / 2^N` in `[0, 1)`; bipolar words are
//! two's-complement fractions `raw / 2^(N-1)` in `[-1, 1)`. A bitstream of
//! length `2^N` decodes to its fraction of ones (unipolar) or to
//! `2·p − 1` (bipolar). Index 0 of a stream is cycle 0.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::{MAX_WIDTH_BITS, MIN_WIDTH_BITS};

/// Value mapping of a word or stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Unipolar,
    Bipolar,
}

impl fmt::Display for Polarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Polarity::Unipolar => "unipolar",
            Polarity::Bipolar => "bipolar",
        })
    }
}

impl FromStr for Polarity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "unipolar" => Ok(Polarity::Unipolar),
            "bipolar" => Ok(Polarity::Bipolar),
            other => domain(format!("unknown polarity `{other}`")),
        }
    }
}

/// Arrangement of ones inside a stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StreamFormat {
    /// General bitstream: any arrangement.
    GB,
    /// Regulated bitstream: ones spread according to binary weight.
    RB,
    /// Temporal bitstream: all ones first.
    TB,
}

/// An N-bit fixed-point operand.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BinaryWord {
    raw: i32,
    width_bits: u32,
    polarity: Polarity,
}

impl BinaryWord {
    pub fn new(raw: i32, width_bits: u32, polarity: Polarity) -> Result<Self> {
        if !(MIN_WIDTH_BITS..=MAX_WIDTH_BITS).contains(&width_bits) {
            return domain(format!(
                "width {width_bits} outside [{MIN_WIDTH_BITS}, {MAX_WIDTH_BITS}]"
            ));
        }
        let (lo, hi) = raw_range(width_bits, polarity);
        if raw < lo || raw > hi {
            return domain(format!(
                "raw {raw} outside [{lo}, {hi}] for {width_bits}-bit {polarity}"
            ));
        }
        Ok(Self {
            raw,
            width_bits,
            polarity,
        })
    }

    pub fn unipolar(raw: i32, width_bits: u32) -> Result<Self> {
        Self::new(raw, width_bits, Polarity::Unipolar)
    }

    pub fn bipolar(raw: i32, width_bits: u32) -> Result<Self> {
        Self::new(raw, width_bits, Polarity::Bipolar)
    }

    pub fn raw(&self) -> i32 {
        self.raw
    }

    pub fn width_bits(&self) -> u32 {
        self.width_bits
    }

    pub fn polarity(&self) -> Polarity {
        self.polarity
    }

    /// Stream length `2^N` used to carry this word.
    pub fn stream_len(&self) -> usize {
        1 << self.width_bits
    }

    /// Exact real value; same as [`dequantize`].
    pub fn value(&self) -> f64 {
        dequantize(self)
    }
}

impl fmt::Display for BinaryWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}b {}", self.raw, self.width_bits, self.polarity)
    }
}

/// Inclusive range of raw codes for a width and polarity.
pub fn raw_range(width_bits: u32, polarity: Polarity) -> (i32, i32) {
    match polarity {
        Polarity::Unipolar => (0, (1 << width_bits) - 1),
        Polarity::Bipolar => (-(1 << (width_bits - 1)), (1 << (width_bits - 1)) - 1),
    }
}

fn scale(width_bits: u32, polarity: Polarity) -> f64 {
    match polarity {
        Polarity::Unipolar => (1u64 << width_bits) as f64,
        Polarity::Bipolar => (1u64 << (width_bits - 1)) as f64,
    }
}

/// Rounds `value` to the nearest code (half away from zero), saturating at
/// the largest code since `1.0` itself is not representable.
pub fn quantize(value: f64, width_bits: u32, polarity: Polarity) -> Result<BinaryWord> {
    if !(MIN_WIDTH_BITS..=MAX_WIDTH_BITS).contains(&width_bits) {
        return domain(format!("width {width_bits} unsupported"));
    }
    let in_domain = match polarity {
        Polarity::Unipolar => (0.0..=1.0).contains(&value),
        Polarity::Bipolar => (-1.0..=1.0).contains(&value),
    };
    if !in_domain {
        return domain(format!("{value} outside the {polarity} domain"));
    }
    let (lo, hi) = raw_range(width_bits, polarity);
    let raw = (value * scale(width_bits, polarity)).round() as i64;
    let raw = raw.clamp(lo as i64, hi as i64) as i32;
    BinaryWord::new(raw, width_bits, polarity)
}

pub fn dequantize(word: &BinaryWord) -> f64 {
    word.raw as f64 / scale(word.width_bits, word.polarity)
}

/// A bit sequence of length `2^N`, packed 64 cycles per word.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Bitstream {
    words: Vec<u64>,
    width_bits: u32,
    format: StreamFormat,
    polarity: Polarity,
}

pub(crate) fn words_for(len: usize) -> usize {
    len.div_ceil(64)
}

fn check_stream_width(width_bits: u32) -> Result<()> {
    if (1..=MAX_WIDTH_BITS).contains(&width_bits) {
        Ok(())
    } else {
        domain(format!("stream width {width_bits} unsupported"))
    }
}

impl Bitstream {
    pub fn zeros(width_bits: u32, format: StreamFormat, polarity: Polarity) -> Result<Self> {
        check_stream_width(width_bits)?;
        Ok(Self {
            words: vec![0; words_for(1 << width_bits)],
            width_bits,
            format,
            polarity,
        })
    }

    /// Builds a stream from cycle-ordered bits. The length must be a power
    /// of two; a TB stream must have all of its ones first.
    pub fn from_bits(bits: &[bool], format: StreamFormat, polarity: Polarity) -> Result<Self> {
        let len = bits.len();
        if len < 2 || !len.is_power_of_two() {
            return domain(format!("stream length {len} is not a power of two >= 2"));
        }
        let width_bits = len.trailing_zeros();
        check_stream_width(width_bits)?;
        let mut words = vec![0u64; words_for(len)];
        for (i, &b) in bits.iter().enumerate() {
            if b {
                words[i >> 6] |= 1 << (i & 63);
            }
        }
        let stream = Self {
            words,
            width_bits,
            format,
            polarity,
        };
        if format == StreamFormat::TB && !stream.is_temporal() {
            return domain("TB stream has a one after a zero");
        }
        Ok(stream)
    }

    /// Parses a `'0'`/`'1'` string, cycle 0 first. Underscores and spaces
    /// are ignored.
    pub fn parse(text: &str, format: StreamFormat, polarity: Polarity) -> Result<Self> {
        let mut bits = Vec::with_capacity(text.len());
        for ch in text.chars() {
            match ch {
                '0' => bits.push(false),
                '1' => bits.push(true),
                '_' | ' ' => {}
                other => return domain(format!("invalid bit character `{other}`")),
            }
        }
        Self::from_bits(&bits, format, polarity)
    }

    /// Packs already-masked words. Bits beyond `2^width_bits` must be zero.
    pub(crate) fn from_words(
        words: Vec<u64>,
        width_bits: u32,
        format: StreamFormat,
        polarity: Polarity,
    ) -> Self {
        debug_assert_eq!(words.len(), words_for(1 << width_bits));
        Self {
            words,
            width_bits,
            format,
            polarity,
        }
    }

    pub fn len(&self) -> usize {
        1 << self.width_bits
    }

    /// Always false; streams hold at least two cycles.
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn width_bits(&self) -> u32 {
        self.width_bits
    }

    pub fn format(&self) -> StreamFormat {
        self.format
    }

    pub fn polarity(&self) -> Polarity {
        self.polarity
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn get(&self, cycle: usize) -> bool {
        assert!(cycle < self.len(), "cycle {cycle} out of range");
        (self.words[cycle >> 6] >> (cycle & 63)) & 1 == 1
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len()).map(move |c| self.get(c))
    }

    pub fn ones(&self) -> u32 {
        self.words.iter().map(|w| w.count_ones()).sum()
    }

    /// Ones among cycles `0..m`.
    pub fn ones_in_prefix(&self, m: usize) -> u32 {
        assert!(m <= self.len());
        let full = m >> 6;
        let mut n: u32 = self.words[..full].iter().map(|w| w.count_ones()).sum();
        let rest = m & 63;
        if rest > 0 {
            n += (self.words[full] & ((1u64 << rest) - 1)).count_ones();
        }
        n
    }

    /// True when no one follows a zero.
    pub fn is_temporal(&self) -> bool {
        let ones = self.ones() as usize;
        self.ones_in_prefix(ones) as usize == ones
    }

    pub fn with_format(mut self, format: StreamFormat) -> Self {
        self.format = format;
        self
    }

    pub fn with_polarity(mut self, polarity: Polarity) -> Self {
        self.polarity = polarity;
        self
    }
}

impl fmt::Display for Bitstream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

pub fn ones_count(stream: &Bitstream) -> u32 {
    stream.ones()
}

/// Unipolar: fraction of ones. Bipolar: `2·p − 1`.
pub fn decode_stream(stream: &Bitstream) -> f64 {
    let p = stream.ones() as f64 / stream.len() as f64;
    match stream.polarity {
        Polarity::Unipolar => p,
        Polarity::Bipolar => 2.0 * p - 1.0,
    }
}
