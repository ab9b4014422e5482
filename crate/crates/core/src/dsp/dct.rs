//! 8-point DCT-II / inverse round trip on bipolar MACs.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ImageBuffer;
use crate::encodings::{quantize, BinaryWord, Polarity};
use crate::error::{domain, Error, Result};
use crate::generators::Lfsr;
use crate::mac::{mac_tiled_with_lfsr, MacConfig};
use crate::metrics::{image_metrics, ImageMetrics};

const POINTS: usize = 8;

/// Forward coefficients are divided by this before re-quantization and the
/// inverse output is multiplied by it.
pub const DCT_STAGE_SCALE: f64 = 4.0;

/// Orthonormal DCT-II matrix, rows indexed by frequency.
pub fn dct8_exact() -> [[f64; POINTS]; POINTS] {
    let mut c = [[0.0; POINTS]; POINTS];
    for (k, row) in c.iter_mut().enumerate() {
        let alpha = if k == 0 { (1.0f64 / 8.0).sqrt() } else { 0.5 };
        for (n, v) in row.iter_mut().enumerate() {
            *v = alpha * (std::f64::consts::PI * (2 * n + 1) as f64 * k as f64 / 16.0).cos();
        }
    }
    c
}

/// Quantized DCT coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct DctMatrix {
    /// `rows[k][n]`.
    pub rows: Vec<Vec<BinaryWord>>,
}

impl DctMatrix {
    pub fn quantized(width_bits: u32) -> Result<Self> {
        let rows = dct8_exact()
            .iter()
            .map(|r| {
                r.iter()
                    .map(|&v| quantize(v, width_bits, Polarity::Bipolar))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        Ok(Self { rows })
    }

    pub fn transpose(&self) -> Self {
        Self {
            rows: (0..POINTS)
                .map(|n| (0..POINTS).map(|k| self.rows[k][n]).collect())
                .collect(),
        }
    }

    pub fn raws(&self) -> Vec<Vec<i32>> {
        self.rows
            .iter()
            .map(|r| r.iter().map(|w| w.raw()).collect())
            .collect()
    }
}

/// The 8-bit coefficient matrix.
pub fn dct8_matrix() -> DctMatrix {
    DctMatrix::quantized(8).expect("8 bits is a valid width")
}

/// Which axes the transform runs along.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DctMode {
    /// 1-D transform and inverse along each row.
    Rows1d,
    /// Rows then columns forward, columns then rows inverse.
    Separable2d,
}

impl fmt::Display for DctMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DctMode::Rows1d => "rows1d",
            DctMode::Separable2d => "separable2d",
        })
    }
}

impl FromStr for DctMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rows1d" | "rows" | "1d" => Ok(DctMode::Rows1d),
            "separable2d" | "2d" => Ok(DctMode::Separable2d),
            other => domain(format!("unknown DCT mode '{other}'")),
        }
    }
}

/// Bipolar words, row-major.
#[derive(Clone)]
struct Grid {
    width: usize,
    height: usize,
    cells: Vec<BinaryWord>,
}

impl Grid {
    fn transpose(&self) -> Self {
        let mut cells = Vec::with_capacity(self.cells.len());
        for c in 0..self.width {
            for r in 0..self.height {
                cells.push(self.cells[r * self.width + c]);
            }
        }
        Grid {
            width: self.height,
            height: self.width,
            cells,
        }
    }
}

/// One transform stage along rows: every 8-sample segment is multiplied by
/// `matrix` (samples as RB operands, coefficients as TB), scaled by `gain`
/// and clamped to `[−1, 1]`. `line_mac(r)` is the dot-product engine for
/// line `r`.
fn stage<F, M>(grid: &Grid, matrix: &DctMatrix, gain: f64, line_mac: F) -> Vec<f64>
where
    F: Fn(usize) -> M + Sync,
    M: FnMut(&[BinaryWord], &[BinaryWord]) -> f64,
{
    grid.cells
        .par_chunks(grid.width)
        .enumerate()
        .flat_map_iter(|(r, line)| {
            let mut mac = line_mac(r);
            let mut out = Vec::with_capacity(line.len());
            for seg in line.chunks(POINTS) {
                for coeffs in &matrix.rows {
                    out.push((gain * mac(seg, coeffs)).clamp(-1.0, 1.0));
                }
            }
            out
        })
        .collect()
}

fn requantize(values: Vec<f64>, like: &Grid, width_bits: u32) -> Grid {
    Grid {
        width: like.width,
        height: like.height,
        cells: values
            .into_iter()
            .map(|v| quantize(v, width_bits, Polarity::Bipolar).expect("clamped value"))
            .collect(),
    }
}

/// Edge-replicates `img` up to multiples of 8 along the transformed axes.
fn padded(img: &ImageBuffer, mode: DctMode, width_bits: u32) -> Result<Grid> {
    if img.width() == 0 || img.height() == 0 {
        return domain("cannot transform an empty image");
    }
    let round_up = |n: usize| n.div_ceil(POINTS) * POINTS;
    let width = round_up(img.width());
    let height = match mode {
        DctMode::Rows1d => img.height(),
        DctMode::Separable2d => round_up(img.height()),
    };
    let mut cells = Vec::with_capacity(width * height);
    for r in 0..height {
        for c in 0..width {
            let p = img.get(r.min(img.height() - 1), c.min(img.width() - 1));
            cells.push(quantize(2.0 * p - 1.0, width_bits, Polarity::Bipolar)?);
        }
    }
    Ok(Grid {
        width,
        height,
        cells,
    })
}

/// Forward and inverse transforms with a pluggable dot-product engine.
/// `engine(stage, line)` builds the MAC for one line of one stage.
fn round_trip<F, M>(
    img: &ImageBuffer,
    mode: DctMode,
    width_bits: u32,
    engine: F,
) -> Result<ImageBuffer>
where
    F: Fn(u64, usize) -> M + Sync,
    M: FnMut(&[BinaryWord], &[BinaryWord]) -> f64,
{
    let fwd = DctMatrix::quantized(width_bits)?;
    let inv = fwd.transpose();
    let down = 1.0 / DCT_STAGE_SCALE;
    let up = DCT_STAGE_SCALE;

    let x = padded(img, mode, width_bits)?;
    let out = match mode {
        DctMode::Rows1d => {
            let y = requantize(stage(&x, &fwd, down, |r| engine(0, r)), &x, width_bits);
            stage(&y, &inv, up, |r| engine(1, r))
        }
        DctMode::Separable2d => {
            let y1 = requantize(stage(&x, &fwd, down, |r| engine(0, r)), &x, width_bits);
            let y1t = y1.transpose();
            let y2 = requantize(stage(&y1t, &fwd, down, |r| engine(1, r)), &y1t, width_bits);
            let u1 = requantize(stage(&y2, &inv, up, |r| engine(2, r)), &y2, width_bits);
            let u1 = u1.transpose();
            stage(&u1, &inv, up, |r| engine(3, r))
        }
    };
    Ok(ImageBuffer::from_fn(img.width(), img.height(), |r, c| {
        (out[r * x.width + c] + 1.0) / 2.0
    }))
}

/// DCT → quantize → inverse DCT on the MAC described by `cfg`, which must
/// be bipolar with a fan-in dividing 8 (each 8-term product is split into
/// `8 / M` blocks summed at binary readout). Returns the reconstruction
/// and its metrics against `img`.
///
/// The MUX variant gives every line of every stage its own LFSR, seeded
/// with `seed ⊕ line ⊕ (stage << 32)`.
pub fn dct_pipeline(
    img: &ImageBuffer,
    cfg: &MacConfig,
    mode: DctMode,
) -> Result<(ImageBuffer, ImageMetrics)> {
    cfg.validate()?;
    if cfg.polarity != Polarity::Bipolar {
        return domain("the DCT pipeline runs on bipolar MACs");
    }
    if !POINTS.is_multiple_of(cfg.fan_in) {
        return domain(format!("fan-in {} does not divide 8", cfg.fan_in));
    }
    let out = round_trip(img, mode, cfg.width_bits, |stage, line| {
        let mut lfsr = Lfsr::from_seed(cfg.seed ^ line as u64 ^ (stage << 32));
        move |x: &[BinaryWord], w: &[BinaryWord]| {
            mac_tiled_with_lfsr(cfg, x, w, &mut lfsr)
                .expect("validated operands")
                .value
        }
    })?;
    let metrics = image_metrics(img, &out)?;
    Ok((out, metrics))
}

/// Same quantization points as [`dct_pipeline`], exact dot products.
pub fn dct_pipeline_exact(
    img: &ImageBuffer,
    width_bits: u32,
    mode: DctMode,
) -> Result<(ImageBuffer, ImageMetrics)> {
    let out = round_trip(img, mode, width_bits, |_, _| {
        |x: &[BinaryWord], w: &[BinaryWord]| {
            x.iter().zip(w).map(|(a, b)| a.value() * b.value()).sum()
        }
    })?;
    let metrics = image_metrics(img, &out)?;
    Ok((out, metrics))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mac::Variant;

    fn cfg(v: Variant) -> MacConfig {
        MacConfig::new(v, Polarity::Bipolar)
    }

    #[test]
    fn exact_matrix_is_orthonormal() {
        let c = dct8_exact();
        for i in 0..8 {
            for j in 0..8 {
                let dot: f64 = (0..8).map(|k| c[k][i] * c[k][j]).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((dot - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn quantized_matrix_examples() {
        let m = dct8_matrix();
        let raws = m.raws();
        assert!(raws[0].iter().all(|&r| r == 45));
        let max = raws.iter().flatten().map(|r| r.abs()).max().unwrap();
        // 0.5·cos(π/16) = 0.4904 → 62.77 → 63
        assert_eq!(max, 63);
        assert_eq!(raws[1][0], 63);
        assert_eq!(m.transpose().transpose(), m);
    }

    #[test]
    fn mode_parsing() {
        assert_eq!("rows1d".parse::<DctMode>().unwrap(), DctMode::Rows1d);
        assert_eq!("2d".parse::<DctMode>().unwrap(), DctMode::Separable2d);
        assert!("zigzag".parse::<DctMode>().is_err());
        assert_eq!(DctMode::Separable2d.to_string(), "separable2d");
    }

    #[test]
    fn rejects_unipolar_and_bad_fan_in() {
        let img = ImageBuffer::filled(8, 2, 0.5).unwrap();
        let uni = MacConfig::new(Variant::Emba, Polarity::Unipolar);
        assert!(dct_pipeline(&img, &uni, DctMode::Rows1d).is_err());
        let m3 = cfg(Variant::Emba).with_fan_in(3);
        assert!(dct_pipeline(&img, &m3, DctMode::Rows1d).is_err());
    }

    #[test]
    fn exact_oracle_on_gradient() {
        let img = ImageBuffer::from_fn(64, 16, |r, c| (c as f64 + 2.0 * r as f64) / 100.0);
        for mode in [DctMode::Rows1d, DctMode::Separable2d] {
            let (_, m) = dct_pipeline_exact(&img, 8, mode).unwrap();
            assert!(m.psnr_db > 35.0, "{mode}: {}", m.psnr_db);
        }
    }

    /// Bit-level XNOR product of RB(x) and TB(w), written out cycle by
    /// cycle from the encoding definitions.
    fn oracle_product(x: i32, w: i32) -> f64 {
        let n = 8;
        let len = 1i32 << n;
        let u = x + len / 2;
        let b = w + len / 2;
        let ones = (0..len)
            .filter(|&c| {
                let k = (c as u32).trailing_ones();
                let r = k < n && (u >> (n - 1 - k)) & 1 == 1;
                let t = c < b;
                r == t
            })
            .count();
        2.0 * ones as f64 / len as f64 - 1.0
    }

    #[test]
    fn mid_gray_matches_bit_level_oracle() {
        // x' = 0 everywhere; the exact transform is zero at every stage, so
        // the reconstruction error is entirely the MAC bias, predicted here
        // from per-product bit counts.
        let c = dct8_matrix().raws();
        let q = |v: f64| {
            quantize(v.clamp(-1.0, 1.0), 8, Polarity::Bipolar)
                .unwrap()
                .raw()
        };
        let y: Vec<i32> = (0..8)
            .map(|k| q((0..8).map(|n| oracle_product(0, c[k][n])).sum::<f64>() / 4.0))
            .collect();
        let expect: Vec<f64> = (0..8)
            .map(|n| {
                let x = 4.0 * (0..8).map(|k| oracle_product(y[k], c[k][n])).sum::<f64>();
                ((x.clamp(-1.0, 1.0) + 1.0) / 2.0).clamp(0.0, 1.0)
            })
            .collect();

        let img = ImageBuffer::filled(16, 3, 0.5).unwrap();
        let (exact, m) = dct_pipeline_exact(&img, 8, DctMode::Rows1d).unwrap();
        assert_eq!(m.rmse, 0.0);
        assert_eq!(exact, img);
        for v in [Variant::Emba, Variant::Dtsa] {
            let (out, _) = dct_pipeline(&img, &cfg(v), DctMode::Rows1d).unwrap();
            for r in 0..3 {
                for col in 0..16 {
                    assert!(
                        (out.get(r, col) - expect[col % 8]).abs() < 1e-12,
                        "{v} {r},{col}"
                    );
                }
            }
        }
        // Sign-magnitude counting sees a zero magnitude and is exact.
        let (out, _) = dct_pipeline(&img, &cfg(Variant::Cbsc), DctMode::Rows1d).unwrap();
        assert_eq!(out, img);
    }

    #[test]
    fn emba_matches_dtsa_and_pads() {
        let img = crate::dsp::synthetic::scene(21, 5, 11);
        for mode in [DctMode::Rows1d, DctMode::Separable2d] {
            let (e, _) = dct_pipeline(&img, &cfg(Variant::Emba), mode).unwrap();
            let (d, _) = dct_pipeline(&img, &cfg(Variant::Dtsa), mode).unwrap();
            assert_eq!(e, d);
            assert_eq!((e.width(), e.height()), (21, 5));
        }
    }

    #[test]
    fn mux_is_deterministic() {
        let img = crate::dsp::synthetic::scene(16, 4, 2);
        let c = cfg(Variant::MuxHtc).with_seed(99);
        let a = dct_pipeline(&img, &c, DctMode::Rows1d).unwrap();
        let b = dct_pipeline(&img, &c, DctMode::Rows1d).unwrap();
        assert_eq!(a, b);
    }
}
