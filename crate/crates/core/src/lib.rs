//! Bit-true software model of hybrid temporal computing (HTC) arithmetic.
//!
//! Values travel as bitstreams of length `2^N` in one of three layouts:
//! general (GB), regulated (RB, ones spread by binary weight) and temporal
//! (TB, ones packed at the front). A multiplier is a single AND (unipolar)
//! or XNOR (bipolar) gate fed by one RB and one TB operand. The crate models
//! four ways of summing the product streams of an M-input MAC:
//!
//! * [`Variant::MuxHtc`]: LFSR-driven multiplexer, the stochastic baseline.
//! * [`Variant::Emba`]: exact per-cycle binary accumulation.
//! * [`Variant::Dtsa`]: threshold-subtract scaled adder with a residual
//!   register that is added back at binary readout.
//! * [`Variant::Cbsc`]: counting-based multipliers summed by binary adders.
//!
//! On top of the MAC sit an accuracy harness ([`metrics`]) and two image
//! kernels ([`dsp`]): a 6-tap Gaussian FIR blur and an 8-point DCT/iDCT
//! round trip.

pub mod adders;
pub mod dsp;
pub mod encodings;
mod error;
pub mod generators;
pub mod mac;
pub mod metrics;
pub mod multipliers;
mod tables;

pub use encodings::{BinaryWord, Bitstream, Polarity, StreamFormat};
pub use error::{Error, Result};
pub use generators::Lfsr;
pub use mac::{MacConfig, MacResult, Variant};

/// Smallest supported operand width.
pub const MIN_WIDTH_BITS: u32 = 2;
/// Largest supported operand width (stream length 65536).
pub const MAX_WIDTH_BITS: u32 = 16;

/// `⌈log₂ n⌉`, with `ceil_log2(1) == 0`.
pub fn ceil_log2(n: u64) -> u32 {
    assert!(n > 0, "ceil_log2 of zero");
    64 - (n - 1).leading_zeros()
}

#[cfg(test)]
mod tests {
    use super::ceil_log2;

    #[test]
    fn ceil_log2_small_values() {
        assert_eq!(ceil_log2(1), 0);
        assert_eq!(ceil_log2(2), 1);
        assert_eq!(ceil_log2(5), 3);
        assert_eq!(ceil_log2(33), 6);
        assert_eq!(ceil_log2(4), 2);
    }
}
