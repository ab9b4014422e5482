//! Error statistics for MAC benchmarks and image comparisons.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dsp::ImageBuffer;
use crate::encodings::{raw_range, BinaryWord, Polarity};
use crate::error::{domain, Result};
use crate::mac::{mac_run, MacConfig, Variant};

/// Plain double-precision dot product.
pub fn exact_dot(x: &[f64], w: &[f64]) -> f64 {
    assert_eq!(x.len(), w.len(), "dot product of unequal lengths");
    x.iter().zip(w).map(|(a, b)| a * b).sum()
}

/// What a MAC error is divided by before it is expressed in percent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// Raw error of the dot-product value.
    Unit,
    /// Error divided by the fan-in (full scale of a unipolar MAC).
    FanIn,
}

/// Convention used by [`mac_benchmark`].
pub const REPORT_NORMALIZATION: Normalization = Normalization::Unit;

/// Operand distribution used by [`mac_benchmark`].
pub const SAMPLING_DISTRIBUTION: &str = "uniform over representable raw codes";

/// Accuracy summary of one benchmark run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub variant: Variant,
    pub polarity: Polarity,
    #[serde(rename = "bits")]
    pub width_bits: u32,
    pub fan_in: usize,
    pub samples: usize,
    pub seed: u64,
    pub rmse_pct: f64,
    pub sde_pct: f64,
}

/// Neumaier-compensated sum, evaluated in slice order.
pub fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Mean, RMS and population standard deviation of a set of errors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorStats {
    pub mean: f64,
    pub rmse: f64,
    pub sde: f64,
}

impl ErrorStats {
    pub fn from_errors(errors: &[f64]) -> Self {
        let n = errors.len() as f64;
        let mean = compensated_sum(errors.iter().copied()) / n;
        let rmse = (compensated_sum(errors.iter().map(|e| e * e)) / n).sqrt();
        let sde = (compensated_sum(errors.iter().map(|e| (e - mean) * (e - mean))) / n).sqrt();
        Self { mean, rmse, sde }
    }
}

/// Draws `samples` operand sets, cycle 0 of the RNG stream first: for each
/// sample, `M` x raws then `M` w raws, uniform over the representable codes.
pub fn draw_operands(
    cfg: &MacConfig,
    samples: usize,
    seed: u64,
) -> Vec<(Vec<BinaryWord>, Vec<BinaryWord>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = raw_range(cfg.width_bits, cfg.polarity);
    let draw = |rng: &mut ChaCha8Rng| -> Vec<BinaryWord> {
        (0..cfg.fan_in)
            .map(|_| {
                BinaryWord::new(rng.gen_range(lo..=hi), cfg.width_bits, cfg.polarity)
                    .expect("raw drawn in range")
            })
            .collect()
    };
    (0..samples)
        .map(|_| {
            let x = draw(&mut rng);
            let w = draw(&mut rng);
            (x, w)
        })
        .collect()
}

/// Per-sample MAC errors `value − exact`, in sample order. Sample `i` of a
/// MUX run seeds its LFSR with `seed + i`.
pub fn mac_errors(cfg: &MacConfig, samples: usize, seed: u64) -> Result<Vec<f64>> {
    cfg.validate()?;
    if samples == 0 {
        return domain("benchmark needs at least one sample");
    }
    let operands = draw_operands(cfg, samples, seed);
    operands
        .par_iter()
        .enumerate()
        .map(|(i, (x, w))| {
            let sample_cfg = cfg.with_seed(seed.wrapping_add(i as u64));
            mac_run(&sample_cfg, x, w).map(|r| r.error)
        })
        .collect()
}

/// Builds a report from raw errors under a normalization convention.
pub fn error_report(
    cfg: &MacConfig,
    seed: u64,
    errors: &[f64],
    normalization: Normalization,
) -> ErrorReport {
    let stats = ErrorStats::from_errors(errors);
    let scale = match normalization {
        Normalization::Unit => 100.0,
        Normalization::FanIn => 100.0 / cfg.fan_in as f64,
    };
    ErrorReport {
        variant: cfg.variant,
        polarity: cfg.polarity,
        width_bits: cfg.width_bits,
        fan_in: cfg.fan_in,
        samples: errors.len(),
        seed,
        rmse_pct: stats.rmse * scale,
        sde_pct: stats.sde * scale,
    }
}

/// RMSE% and SDE% of `samples` random dot products. Deterministic in
/// `(cfg, samples, seed)`; `cfg.seed` is replaced by the per-sample seeds.
pub fn mac_benchmark(cfg: &MacConfig, samples: usize, seed: u64) -> Result<ErrorReport> {
    let errors = mac_errors(cfg, samples, seed)?;
    Ok(error_report(cfg, seed, &errors, REPORT_NORMALIZATION))
}

/// Pixel-domain comparison of two images on the `[0, 1]` scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImageMetrics {
    pub rmse: f64,
    /// `20·log10(1 / rmse)`; `+∞` for identical images.
    pub psnr_db: f64,
}

pub fn psnr_from_rmse(rmse: f64) -> f64 {
    if rmse == 0.0 {
        f64::INFINITY
    } else {
        20.0 * (1.0 / rmse).log10()
    }
}

pub fn image_metrics(a: &ImageBuffer, b: &ImageBuffer) -> Result<ImageMetrics> {
    if a.width() != b.width() || a.height() != b.height() {
        return domain(format!(
            "image sizes differ: {}x{} vs {}x{}",
            a.width(),
            a.height(),
            b.width(),
            b.height()
        ));
    }
    let sq = compensated_sum(
        a.pixels()
            .iter()
            .zip(b.pixels())
            .map(|(p, q)| (p - q) * (p - q)),
    );
    let rmse = (sq / a.pixels().len() as f64).sqrt();
    Ok(ImageMetrics {
        rmse,
        psnr_db: psnr_from_rmse(rmse),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_dot_examples() {
        assert_eq!(exact_dot(&[1.0, 0.0, 0.0, 0.0], &[0.5, 0.3, 0.2, 0.9]), 0.5);
        assert_eq!(exact_dot(&[0.0; 4], &[0.0; 4]), 0.0);
        assert_eq!(exact_dot(&[0.75; 4], &[0.75; 4]), 2.25);
    }

    #[test]
    fn stats_identity() {
        let errors = [0.1, -0.3, 0.25, 0.0, 0.05];
        let s = ErrorStats::from_errors(&errors);
        assert!((s.rmse * s.rmse - (s.mean * s.mean + s.sde * s.sde)).abs() < 1e-15);
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let v = [1e16, 1.0, -1e16, 1.0];
        assert_eq!(compensated_sum(v), 2.0);
    }

    #[test]
    fn benchmark_is_reproducible_and_consistent() {
        for v in Variant::ALL {
            let cfg = MacConfig::new(v, Polarity::Unipolar);
            let a = mac_benchmark(&cfg, 300, 7).unwrap();
            let b = mac_benchmark(&cfg, 300, 7).unwrap();
            assert_eq!(a, b);
            assert!(a.rmse_pct >= 0.0);
            assert!(a.sde_pct <= a.rmse_pct + 1e-12);
        }
        let cbsc = mac_benchmark(&MacConfig::new(Variant::Cbsc, Polarity::Unipolar), 500, 3);
        let emba = mac_benchmark(&MacConfig::new(Variant::Emba, Polarity::Unipolar), 500, 3);
        let (cbsc, emba) = (cbsc.unwrap(), emba.unwrap());
        assert_eq!((cbsc.rmse_pct, cbsc.sde_pct), (emba.rmse_pct, emba.sde_pct));
    }

    #[test]
    fn benchmark_rejects_zero_samples() {
        let cfg = MacConfig::new(Variant::Emba, Polarity::Unipolar);
        assert!(mac_benchmark(&cfg, 0, 1).is_err());
    }

    #[test]
    fn rmse_shrinks_with_width() {
        let cfg = MacConfig::new(Variant::Emba, Polarity::Unipolar);
        let n4 = mac_benchmark(&cfg.with_width(4), 2000, 21).unwrap();
        let n8 = mac_benchmark(&cfg.with_width(8), 2000, 21).unwrap();
        assert!(n8.rmse_pct < n4.rmse_pct);
    }

    #[test]
    fn report_json_fields() {
        let cfg = MacConfig::new(Variant::Dtsa, Polarity::Bipolar);
        let r = mac_benchmark(&cfg, 10, 1).unwrap();
        let v = serde_json::to_value(&r).unwrap();
        let keys: Vec<&str> = v.as_object().unwrap().keys().map(|k| k.as_str()).collect();
        let mut want = vec![
            "variant", "polarity", "bits", "fan_in", "samples", "seed", "rmse_pct", "sde_pct",
        ];
        want.sort();
        let mut keys = keys;
        keys.sort();
        assert_eq!(keys, want);
        assert_eq!(v["variant"], "dtsa");
        assert_eq!(v["polarity"], "bipolar");
    }

    #[test]
    fn image_metric_examples() {
        let a = ImageBuffer::filled(4, 3, 0.25).unwrap();
        let m = image_metrics(&a, &a).unwrap();
        assert_eq!(m.rmse, 0.0);
        assert!(m.psnr_db.is_infinite());

        let black = ImageBuffer::filled(5, 5, 0.0).unwrap();
        let white = ImageBuffer::filled(5, 5, 1.0).unwrap();
        let m = image_metrics(&black, &white).unwrap();
        assert_eq!((m.rmse, m.psnr_db), (1.0, 0.0));

        let shifted = ImageBuffer::filled(5, 5, 0.08).unwrap();
        let m = image_metrics(&black, &shifted).unwrap();
        assert!((m.psnr_db - 21.9382).abs() < 1e-4);

        assert!(image_metrics(&a, &black).is_err());
    }

    #[test]
    fn psnr_closed_form() {
        assert!((psnr_from_rmse(0.08) - 21.94).abs() < 0.01);
        assert!((psnr_from_rmse(0.1) - 20.0).abs() < 1e-12);
    }
}
