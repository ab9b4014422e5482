//! Horizontal Gaussian FIR blur on unipolar MACs.

use rayon::prelude::*;

use super::ImageBuffer;
use crate::encodings::{quantize, BinaryWord, Polarity};
use crate::error::{domain, Result};
use crate::generators::Lfsr;
use crate::mac::{mac_run_with_lfsr, MacConfig};

pub const FIR_TAPS: usize = 6;
pub const DEFAULT_SIGMA: f64 = 1.0;

/// Quantized unipolar filter taps.
#[derive(Debug, Clone, PartialEq)]
pub struct FirKernel {
    pub taps: Vec<BinaryWord>,
    pub sigma: f64,
}

impl FirKernel {
    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }

    pub fn raws(&self) -> Vec<i32> {
        self.taps.iter().map(|t| t.raw()).collect()
    }

    pub fn width_bits(&self) -> u32 {
        self.taps[0].width_bits()
    }

    /// Offset of tap 0 relative to the output column: taps cover
    /// `c−2 ..= c+3` for six taps.
    fn origin(&self) -> isize {
        -(((self.taps.len() - 1) / 2) as isize)
    }
}

/// Gaussian window `exp(−½((k − c)/σ)²)` centred on `c = (n−1)/2`,
/// normalized to unit sum, then quantized to unipolar words.
pub fn gaussian_taps(sigma: f64, n_taps: usize, width_bits: u32) -> Result<FirKernel> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return domain(format!("sigma must be positive and finite, got {sigma}"));
    }
    if n_taps < 2 {
        return domain("a FIR kernel needs at least two taps");
    }
    let centre = (n_taps as f64 - 1.0) / 2.0;
    let window: Vec<f64> = (0..n_taps)
        .map(|k| (-0.5 * ((k as f64 - centre) / sigma).powi(2)).exp())
        .collect();
    let total: f64 = window.iter().sum();
    let taps = window
        .iter()
        .map(|w| quantize(w / total, width_bits, Polarity::Unipolar))
        .collect::<Result<_>>()?;
    Ok(FirKernel { taps, sigma })
}

/// Applies `kernel` along every row with edge replication. `row_mac(r)`
/// returns the dot-product engine for row `r`.
fn filter_rows<F, M>(img: &ImageBuffer, kernel: &FirKernel, row_mac: F) -> ImageBuffer
where
    F: Fn(usize) -> M + Sync,
    M: FnMut(&[BinaryWord], &[BinaryWord]) -> f64,
{
    let (w, h) = (img.width(), img.height());
    let n = kernel.width_bits();
    let origin = kernel.origin();
    let rows: Vec<Vec<f64>> = (0..h)
        .into_par_iter()
        .map(|r| {
            let words: Vec<BinaryWord> = img
                .row(r)
                .iter()
                .map(|&p| quantize(p, n, Polarity::Unipolar).expect("pixel in [0, 1]"))
                .collect();
            let mut mac = row_mac(r);
            let mut window = Vec::with_capacity(kernel.len());
            (0..w)
                .map(|c| {
                    window.clear();
                    window.extend((0..kernel.len()).map(|i| {
                        let src = (c as isize + origin + i as isize).clamp(0, w as isize - 1);
                        words[src as usize]
                    }));
                    mac(&window, &kernel.taps).clamp(0.0, 1.0)
                })
                .collect()
        })
        .collect();
    ImageBuffer::new(w, h, rows.concat()).expect("clamped pixels")
}

/// FIR blur where every output pixel is one M-input MAC over the pixel
/// window (RB operands) and the taps (TB operands). The MUX variant runs
/// one LFSR per row seeded with `seed ⊕ row`.
pub fn fir_filter(img: &ImageBuffer, kernel: &FirKernel, cfg: &MacConfig) -> Result<ImageBuffer> {
    cfg.validate()?;
    if cfg.polarity != Polarity::Unipolar {
        return domain("the FIR blur runs on unipolar MACs");
    }
    if cfg.fan_in != kernel.len() || cfg.width_bits != kernel.width_bits() {
        return domain(format!(
            "MAC is {}-input {}-bit but the kernel has {} {}-bit taps",
            cfg.fan_in,
            cfg.width_bits,
            kernel.len(),
            kernel.width_bits()
        ));
    }
    Ok(filter_rows(img, kernel, |r| {
        let mut lfsr = Lfsr::from_seed(cfg.seed ^ r as u64);
        move |x: &[BinaryWord], w: &[BinaryWord]| {
            mac_run_with_lfsr(cfg, x, w, &mut lfsr)
                .expect("validated operands")
                .value
        }
    }))
}

/// Same quantization and borders as [`fir_filter`], exact arithmetic.
pub fn fir_filter_exact(img: &ImageBuffer, kernel: &FirKernel) -> ImageBuffer {
    filter_rows(img, kernel, |_| {
        |x: &[BinaryWord], w: &[BinaryWord]| {
            x.iter().zip(w).map(|(a, b)| a.value() * b.value()).sum()
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mac::Variant;

    fn fir_cfg(v: Variant) -> MacConfig {
        MacConfig::new(v, Polarity::Unipolar).with_fan_in(FIR_TAPS)
    }

    #[test]
    fn taps_are_symmetric_and_normalized() {
        let k = gaussian_taps(1.0, 6, 8).unwrap();
        let raws = k.raws();
        for i in 0..6 {
            assert_eq!(raws[i], raws[5 - i]);
        }
        let sum: f64 = k.taps.iter().map(|t| t.value()).sum();
        assert!(sum <= 1.0 + 6.0 / 256.0);
        assert!(sum >= 1.0 - 6.0 / 256.0);
    }

    #[test]
    fn sigma_one_golden_taps() {
        // 256·w/Σw = [4.495, 33.216, 90.289, 90.289, 33.216, 4.495]
        assert_eq!(
            gaussian_taps(1.0, 6, 8).unwrap().raws(),
            vec![4, 33, 90, 90, 33, 4]
        );
    }

    #[test]
    fn wide_sigma_tends_to_box() {
        let k = gaussian_taps(1e9, 6, 8).unwrap();
        assert_eq!(k.raws(), vec![43; 6]);
    }

    #[test]
    fn bad_sigma_rejected() {
        assert!(gaussian_taps(0.0, 6, 8).is_err());
        assert!(gaussian_taps(-1.0, 6, 8).is_err());
        assert!(gaussian_taps(f64::NAN, 6, 8).is_err());
    }

    #[test]
    fn config_must_match_kernel() {
        let img = ImageBuffer::filled(8, 2, 0.5).unwrap();
        let k = gaussian_taps(1.0, 6, 8).unwrap();
        let cfg = MacConfig::new(Variant::Emba, Polarity::Unipolar);
        assert!(fir_filter(&img, &k, &cfg).is_err());
        let bip = MacConfig::new(Variant::Emba, Polarity::Bipolar).with_fan_in(6);
        assert!(fir_filter(&img, &k, &bip).is_err());
    }

    #[test]
    fn constant_image_scales_by_tap_sum() {
        let k = gaussian_taps(1.0, 6, 8).unwrap();
        let s: f64 = k.taps.iter().map(|t| t.value()).sum();
        let v = 0.6;
        let img = ImageBuffer::filled(16, 4, v).unwrap();
        let bound = 6.0 * 8.0 / 256.0 + 6.0 / 256.0;
        for variant in [Variant::Emba, Variant::Dtsa, Variant::Cbsc] {
            let out = fir_filter(&img, &k, &fir_cfg(variant)).unwrap();
            for &p in out.pixels() {
                assert!((p - v * s).abs() <= bound, "{variant}: {p}");
            }
        }
    }

    #[test]
    fn black_stays_black() {
        let k = gaussian_taps(1.0, 6, 8).unwrap();
        let img = ImageBuffer::filled(12, 3, 0.0).unwrap();
        for v in Variant::ALL {
            let out = fir_filter(&img, &k, &fir_cfg(v)).unwrap();
            assert!(out.pixels().iter().all(|&p| p == 0.0), "{v}");
        }
    }

    #[test]
    fn deterministic_equivalent_variants_agree() {
        let img = crate::dsp::synthetic::texture(24, 8, 3);
        let k = gaussian_taps(1.0, 6, 8).unwrap();
        let e = fir_filter(&img, &k, &fir_cfg(Variant::Emba)).unwrap();
        let d = fir_filter(&img, &k, &fir_cfg(Variant::Dtsa)).unwrap();
        let c = fir_filter(&img, &k, &fir_cfg(Variant::Cbsc)).unwrap();
        assert_eq!(e, d);
        assert_eq!(e, c);
        let m1 = fir_filter(&img, &k, &fir_cfg(Variant::MuxHtc)).unwrap();
        let m2 = fir_filter(&img, &k, &fir_cfg(Variant::MuxHtc)).unwrap();
        assert_eq!(m1, m2);
    }
}
