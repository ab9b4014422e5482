use crate::error::{domain, Result};

/// Row-major grayscale image with pixels in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageBuffer {
    width: usize,
    height: usize,
    pixels: Vec<f64>,
}

impl ImageBuffer {
    pub fn new(width: usize, height: usize, pixels: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return domain("image dimensions must be positive");
        }
        if width * height != pixels.len() {
            return domain(format!(
                "{}x{} image needs {} pixels, got {}",
                width,
                height,
                width * height,
                pixels.len()
            ));
        }
        if let Some(p) = pixels.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return domain(format!("pixel {p} outside [0, 1]"));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    /// Builds an image from `f(row, col)`, clamping each value into `[0, 1]`.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut pixels = Vec::with_capacity(width * height);
        for r in 0..height {
            for c in 0..width {
                pixels.push(f(r, c).clamp(0.0, 1.0));
            }
        }
        Self {
            width,
            height,
            pixels,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.pixels[row * self.width + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.pixels[row * self.width..(row + 1) * self.width]
    }

    /// 8-bit samples, `round(p · 255)` with halves rounded up.
    pub fn to_bytes(&self) -> Vec<u8> {
        self.pixels
            .iter()
            .map(|p| (p * 255.0 + 0.5).floor().clamp(0.0, 255.0) as u8)
            .collect()
    }

    pub fn from_bytes(width: usize, height: usize, bytes: &[u8]) -> Result<Self> {
        Self::new(
            width,
            height,
            bytes.iter().map(|&b| b as f64 / 255.0).collect(),
        )
    }

    /// Rounds every pixel to the nearest 8-bit level.
    pub fn to_8bit(&self) -> Self {
        Self::from_bytes(self.width, self.height, &self.to_bytes()).expect("same geometry")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn construction_checks() {
        assert!(ImageBuffer::new(2, 2, vec![0.0; 3]).is_err());
        assert!(ImageBuffer::new(0, 2, vec![]).is_err());
        assert!(ImageBuffer::new(1, 1, vec![1.5]).is_err());
        let img = ImageBuffer::new(2, 1, vec![0.0, 1.0]).unwrap();
        assert_eq!(img.to_bytes(), vec![0, 255]);
        assert_eq!(img.row(0), &[0.0, 1.0]);
    }

    #[test]
    fn byte_rounding_is_half_up() {
        let img = ImageBuffer::new(2, 1, vec![0.6 / 255.0, 1.49 / 255.0]).unwrap();
        assert_eq!(img.to_bytes(), vec![1, 1]);
    }
}
