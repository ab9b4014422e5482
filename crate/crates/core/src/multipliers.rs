//! Single-gate HTC multipliers and the counting-based (CBSC) baselines.

use crate::encodings::{BinaryWord, Bitstream, Polarity, StreamFormat};
use crate::error::{domain, Result};
use crate::generators::{ones_budget, rb_bit_unchecked, RbGenerator, TbGenerator};
use crate::tables;

fn check_pair(x: &BinaryWord, w: &BinaryWord) -> Result<()> {
    if x.width_bits() != w.width_bits() || x.polarity() != w.polarity() {
        return domain(format!("operand mismatch: {x} vs {w}"));
    }
    Ok(())
}

/// Packed product words: `rb(x) AND tb(w)` or `rb(x) XNOR tb(w)`.
pub(crate) fn htc_product_words(x: &BinaryWord, w: &BinaryWord) -> Vec<u64> {
    let n = x.width_bits();
    let rb = tables::rb(ones_budget(x), n);
    let tb = tables::tb(ones_budget(w), n);
    match x.polarity() {
        Polarity::Unipolar => rb.iter().zip(tb.iter()).map(|(a, b)| a & b).collect(),
        Polarity::Bipolar => {
            let mut words: Vec<u64> = rb.iter().zip(tb.iter()).map(|(a, b)| !(a ^ b)).collect();
            let len = 1usize << n;
            if len < 64 {
                words[0] &= (1u64 << len) - 1;
            }
            words
        }
    }
}

/// Product stream of `x` (RB operand) and `w` (TB operand).
pub fn htc_mul_stream(x: &BinaryWord, w: &BinaryWord) -> Result<Bitstream> {
    check_pair(x, w)?;
    Ok(Bitstream::from_words(
        htc_product_words(x, w),
        x.width_bits(),
        StreamFormat::GB,
        x.polarity(),
    ))
}

/// Cycle-level HTC multiplier: one RB source, one TB source, one gate.
#[derive(Debug, Clone)]
pub struct HtcMultiplier {
    rb: RbGenerator,
    tb: TbGenerator,
    polarity: Polarity,
}

impl HtcMultiplier {
    pub fn new(x: &BinaryWord, w: &BinaryWord) -> Result<Self> {
        check_pair(x, w)?;
        Ok(Self {
            rb: RbGenerator::new(x),
            tb: TbGenerator::new(w),
            polarity: x.polarity(),
        })
    }

    /// Product bit `M_i(c)` for the current cycle.
    pub fn tick(&mut self) -> bool {
        let (r, t) = (self.rb.tick(), self.tb.tick());
        match self.polarity {
            Polarity::Unipolar => r & t,
            Polarity::Bipolar => r == t,
        }
    }
}

/// Result of one counting-based multiplication.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CbscProduct {
    pub value: f64,
    /// Ones counted from the X stream.
    pub ones: u32,
    /// Cycles the counter actually ran.
    pub cycles_used: u32,
    /// Final up/down counter value (bipolar only).
    pub updown: Option<i32>,
}

/// Counts the ones of `rb(x)` over the first `|W|·2^N` cycles.
pub fn cbsc_mul_unipolar(x: &BinaryWord, w: &BinaryWord) -> Result<CbscProduct> {
    check_pair(x, w)?;
    if x.polarity() != Polarity::Unipolar {
        return domain("cbsc_mul_unipolar needs unipolar operands");
    }
    let n = x.width_bits();
    let budget = ones_budget(x);
    let cycles = ones_budget(w);
    // Down counter loaded with W·2^N; count X bits until it reaches zero.
    let mut remaining = cycles;
    let mut ones = 0u32;
    let mut cycle = 0u32;
    while remaining > 0 {
        ones += rb_bit_unchecked(budget, n, cycle) as u32;
        cycle += 1;
        remaining -= 1;
    }
    Ok(CbscProduct {
        value: ones as f64 / (1u64 << n) as f64,
        ones,
        cycles_used: cycles,
        updown: None,
    })
}

/// Sign-magnitude CBSC: the product sign is the XOR of operand signs; an
/// up/down counter runs over the first `|W|·2^(N-1)` cycles of the RB
/// stream of `|X|` (length `2^(N-1)`), counting +1 on ones and −1 on zeros.
///
/// The magnitude `2^(N-1)` of the code `-2^(N-1)` has no N-bit
/// sign-magnitude form; it is carried out-of-band as an all-ones stream.
pub fn cbsc_mul_bipolar(x: &BinaryWord, w: &BinaryWord) -> Result<CbscProduct> {
    check_pair(x, w)?;
    if x.polarity() != Polarity::Bipolar {
        return domain("cbsc_mul_bipolar needs bipolar operands");
    }
    let mag_bits = x.width_bits() - 1;
    let half = 1u32 << mag_bits;
    let negative = (x.raw() < 0) != (w.raw() < 0);
    let m_x = x.raw().unsigned_abs();
    let m_w = w.raw().unsigned_abs();

    let mut counter: i32 = 0;
    for cycle in 0..m_w {
        let bit = m_x == half || rb_bit_unchecked(m_x, mag_bits, cycle);
        counter += if bit { 1 } else { -1 };
    }
    let ones = ((counter + m_w as i32) / 2) as u32;
    let magnitude = ones as f64 / half as f64;
    Ok(CbscProduct {
        value: if negative && ones > 0 {
            -magnitude
        } else {
            magnitude
        },
        ones,
        cycles_used: m_w,
        updown: Some(counter),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encodings::{decode_stream, dequantize, raw_range};
    use crate::generators::{rb_generate, tb_generate};

    fn uni(raw: i32, n: u32) -> BinaryWord {
        BinaryWord::unipolar(raw, n).unwrap()
    }

    fn bip(raw: i32, n: u32) -> BinaryWord {
        BinaryWord::bipolar(raw, n).unwrap()
    }

    #[test]
    fn htc_unipolar_example() {
        let p = htc_mul_stream(&uni(6, 3), &uni(6, 3)).unwrap();
        // "11101110" AND "11111100"
        assert_eq!(p.to_string(), "11101100");
        assert_eq!(p.ones(), 5);
        assert_eq!(decode_stream(&p), 0.625);
    }

    #[test]
    fn htc_zero_weight_absorbs() {
        for raw in 0..8 {
            let p = htc_mul_stream(&uni(raw, 3), &uni(0, 3)).unwrap();
            assert_eq!(p.ones(), 0);
        }
    }

    #[test]
    fn htc_bipolar_minus_one_negates() {
        let x = bip(-128, 8);
        for raw in -128..128 {
            let w = bip(raw, 8);
            let p = htc_mul_stream(&x, &w).unwrap();
            let tb = tb_generate(&w);
            let complement: Vec<bool> = tb.iter().map(|b| !b).collect();
            assert_eq!(p.iter().collect::<Vec<_>>(), complement);
            assert_eq!(decode_stream(&p), -dequantize(&w));
        }
    }

    #[test]
    fn htc_rejects_mismatch() {
        assert!(htc_mul_stream(&uni(1, 3), &uni(1, 4)).is_err());
        assert!(htc_mul_stream(&uni(1, 3), &bip(1, 3)).is_err());
    }

    #[test]
    fn cycle_level_multiplier_matches_packed() {
        for (x, w) in [(uni(6, 3), uni(5, 3)), (bip(-3, 3), bip(2, 3))] {
            let mut m = HtcMultiplier::new(&x, &w).unwrap();
            let s = htc_mul_stream(&x, &w).unwrap();
            for c in 0..8 {
                assert_eq!(m.tick(), s.get(c));
            }
        }
    }

    #[test]
    fn cbsc_unipolar_examples() {
        let p = cbsc_mul_unipolar(&uni(6, 3), &uni(6, 3)).unwrap();
        assert_eq!((p.ones, p.value, p.cycles_used), (5, 0.625, 6));

        let zero = cbsc_mul_unipolar(&uni(0, 3), &uni(5, 3)).unwrap();
        assert_eq!((zero.ones, zero.value), (0, 0.0));

        for n in 2..=8 {
            let max = (1 << n) - 1;
            for raw in 0..=max {
                let x = uni(raw, n);
                let p = cbsc_mul_unipolar(&x, &uni(max, n)).unwrap();
                let last = rb_generate(&x).get(max as usize) as u32;
                assert_eq!(p.ones, raw as u32 - last);
                assert!((p.value - x.value()).abs() <= 1.0 / (1u64 << n) as f64);
            }
        }
    }

    #[test]
    fn cbsc_bipolar_examples() {
        let p = cbsc_mul_bipolar(&bip(1, 3), &bip(0, 3)).unwrap();
        assert_eq!((p.cycles_used, p.value), (0, 0.0));

        let p = cbsc_mul_bipolar(&bip(-4, 3), &bip(-4, 3)).unwrap();
        assert_eq!((p.ones, p.cycles_used, p.value), (4, 4, 1.0));

        // m_x = m_w = 2 on a 4-cycle magnitude stream: RB(2, 2 bits) = "1000".
        let p = cbsc_mul_bipolar(&bip(2, 3), &bip(-2, 3)).unwrap();
        assert_eq!((p.ones, p.value), (1, -0.25));
    }

    #[test]
    fn unipolar_cbsc_equals_htc_exhaustive() {
        for n in 2..=6 {
            for a in 0..1 << n {
                for b in 0..1 << n {
                    let (x, w) = (uni(a, n), uni(b, n));
                    let htc = htc_mul_stream(&x, &w).unwrap().ones();
                    assert_eq!(htc, cbsc_mul_unipolar(&x, &w).unwrap().ones);
                }
            }
        }
    }

    #[test]
    fn unipolar_product_error_bound() {
        let check = |n: u32, a: i32, b: i32| {
            let (x, w) = (uni(a, n), uni(b, n));
            let got = decode_stream(&htc_mul_stream(&x, &w).unwrap());
            let bound = n as f64 / (1u64 << n) as f64;
            assert!(
                (got - x.value() * w.value()).abs() <= bound,
                "n={n} {a}*{b}"
            );
        };
        for n in 2..=6 {
            for a in 0..1 << n {
                for b in 0..1 << n {
                    check(n, a, b);
                }
            }
        }
        for a in (0..256).step_by(3) {
            for b in (0..256).step_by(5) {
                check(8, a, b);
            }
        }
    }

    #[test]
    fn updown_identity_and_bipolar_bound() {
        for n in 2..=7 {
            let (lo, hi) = raw_range(n, Polarity::Bipolar);
            let half = (1u32 << (n - 1)) as f64;
            // Prefix discrepancy of an (N−1)-bit RB stream, in counts.
            let slack = ((n - 1) as f64).max(1.0);
            for a in lo..=hi {
                for b in lo..=hi {
                    let (x, w) = (bip(a, n), bip(b, n));
                    let p = cbsc_mul_bipolar(&x, &w).unwrap();
                    let m_w = b.unsigned_abs() as i32;
                    assert_eq!(p.updown.unwrap(), 2 * p.ones as i32 - m_w);
                    assert!(p.value.abs() <= 1.0);
                    assert!(p.cycles_used <= 1 << (n - 1));
                    let exact = x.value() * w.value();
                    assert!((p.value - exact).abs() <= slack / half, "n={n} {a}*{b}");
                }
            }
        }
    }

    #[test]
    fn bipolar_cbsc_pole_exactness() {
        // An all-ones magnitude stream returns |W| exactly.
        for b in -128..128 {
            let w = bip(b, 8);
            let p = cbsc_mul_bipolar(&bip(-128, 8), &w).unwrap();
            assert_eq!(p.value, -w.value());
        }
    }
}
