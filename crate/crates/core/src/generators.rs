//! Deterministic RB/TB stream generators and the LFSR used by the MUX adder.
//!
//! The RB generator is an up-counter driving a bit-select MUX: on cycle `c`
//! with `k` trailing ones, the counter selects bit `N-1-k` of the ones
//! budget, and the all-ones counter state selects a constant zero. Bit
//! `N-1-k` is therefore visited `2^(N-1-k)` times per period, which spreads
//! each bit of the word in proportion to its binary weight.

use crate::encodings::{words_for, BinaryWord, Bitstream, Polarity, StreamFormat};
use crate::error::{domain, Result};
use crate::MAX_WIDTH_BITS;

/// Number of ones a word occupies in a stream of length `2^N`.
///
/// Unipolar: `raw`. Bipolar: `raw + 2^(N-1)`, i.e. `p·2^N` with
/// `p = (X + 1) / 2`.
pub fn ones_budget(word: &BinaryWord) -> u32 {
    match word.polarity() {
        Polarity::Unipolar => word.raw() as u32,
        Polarity::Bipolar => (word.raw() + (1 << (word.width_bits() - 1))) as u32,
    }
}

#[inline]
pub(crate) fn rb_bit_unchecked(budget: u32, width_bits: u32, cycle: u32) -> bool {
    let k = cycle.trailing_ones();
    k < width_bits && (budget >> (width_bits - 1 - k)) & 1 == 1
}

/// Bit emitted by the RB generator for an unsigned N-bit budget `u` on
/// cycle `c`.
pub fn rb_bit(budget: u32, width_bits: u32, cycle: u32) -> Result<bool> {
    if !(1..=MAX_WIDTH_BITS).contains(&width_bits) {
        return domain(format!("width {width_bits} unsupported"));
    }
    let len = 1u32 << width_bits;
    if budget >= len {
        return domain(format!("budget {budget} does not fit {width_bits} bits"));
    }
    if cycle >= len {
        return domain(format!("cycle {cycle} outside [0, {len})"));
    }
    Ok(rb_bit_unchecked(budget, width_bits, cycle))
}

/// Packed RB words for an unsigned budget, without range checks.
pub(crate) fn rb_words(budget: u32, width_bits: u32) -> Vec<u64> {
    let len = 1usize << width_bits;
    let mut words = vec![0u64; words_for(len)];
    for c in 0..len {
        if rb_bit_unchecked(budget, width_bits, c as u32) {
            words[c >> 6] |= 1 << (c & 63);
        }
    }
    words
}

/// Packed words with the first `ones` cycles set.
pub(crate) fn tb_words(ones: u32, width_bits: u32) -> Vec<u64> {
    let len = 1usize << width_bits;
    let mut words = vec![0u64; words_for(len)];
    let ones = ones as usize;
    for (i, w) in words.iter_mut().enumerate() {
        let lo = i * 64;
        if ones >= lo + 64 {
            *w = u64::MAX;
        } else if ones > lo {
            *w = (1u64 << (ones - lo)) - 1;
        }
    }
    if len < 64 {
        words[0] &= (1u64 << len) - 1;
    }
    words
}

pub fn rb_generate(word: &BinaryWord) -> Bitstream {
    Bitstream::from_words(
        rb_words(ones_budget(word), word.width_bits()),
        word.width_bits(),
        StreamFormat::RB,
        word.polarity(),
    )
}

pub fn tb_generate(word: &BinaryWord) -> Bitstream {
    Bitstream::from_words(
        tb_words(ones_budget(word), word.width_bits()),
        word.width_bits(),
        StreamFormat::TB,
        word.polarity(),
    )
}

/// Repacks any stream into TB form, keeping its ones count.
pub fn gb_to_tb(stream: &Bitstream) -> Bitstream {
    Bitstream::from_words(
        tb_words(stream.ones(), stream.width_bits()),
        stream.width_bits(),
        StreamFormat::TB,
        stream.polarity(),
    )
}

/// Cycle-by-cycle RB source: an up-counter plus a bit-select MUX.
#[derive(Debug, Clone)]
pub struct RbGenerator {
    budget: u32,
    width_bits: u32,
    cycle: u32,
}

impl RbGenerator {
    pub fn new(word: &BinaryWord) -> Self {
        Self {
            budget: ones_budget(word),
            width_bits: word.width_bits(),
            cycle: 0,
        }
    }

    pub fn cycle(&self) -> u32 {
        self.cycle
    }

    /// Emits the current bit and advances, wrapping at `2^N`.
    pub fn tick(&mut self) -> bool {
        let bit = rb_bit_unchecked(self.budget, self.width_bits, self.cycle);
        self.cycle = (self.cycle + 1) & ((1 << self.width_bits) - 1);
        bit
    }
}

/// Cycle-by-cycle TB source: high until the counter reaches the budget.
#[derive(Debug, Clone)]
pub struct TbGenerator {
    budget: u32,
    width_bits: u32,
    cycle: u32,
}

impl TbGenerator {
    pub fn new(word: &BinaryWord) -> Self {
        Self {
            budget: ones_budget(word),
            width_bits: word.width_bits(),
            cycle: 0,
        }
    }

    pub fn tick(&mut self) -> bool {
        let bit = self.cycle < self.budget;
        self.cycle = (self.cycle + 1) & ((1 << self.width_bits) - 1);
        bit
    }
}

/// 16-bit Fibonacci LFSR, polynomial `x^16 + x^14 + x^13 + x^11 + 1`.
///
/// Each step outputs the LSB, then shifts right and feeds the XOR of the
/// tap bits into the MSB.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Lfsr {
    register: u16,
}

impl Lfsr {
    pub const DEFAULT_SEED: u16 = 0xACE1;
    pub const PERIOD: u32 = 65_535;

    pub fn new(seed: u16) -> Result<Self> {
        if seed == 0 {
            return domain("LFSR seed must be non-zero");
        }
        Ok(Self { register: seed })
    }

    /// Folds a 64-bit seed into a register value by XOR-ing its four
    /// 16-bit lanes. A fold of zero falls back to [`Lfsr::DEFAULT_SEED`].
    pub fn from_seed(seed: u64) -> Self {
        let folded = (seed ^ (seed >> 16) ^ (seed >> 32) ^ (seed >> 48)) as u16;
        Self {
            register: if folded == 0 {
                Self::DEFAULT_SEED
            } else {
                folded
            },
        }
    }

    pub fn register(&self) -> u16 {
        self.register
    }

    #[inline]
    pub fn step(&mut self) -> bool {
        let r = self.register;
        let out = r & 1 == 1;
        let feedback = (r ^ (r >> 2) ^ (r >> 3) ^ (r >> 5)) & 1;
        self.register = (r >> 1) | (feedback << 15);
        out
    }

    /// Draws `nbits` bits and packs them oldest-first as MSB-first.
    #[inline]
    pub fn draw(&mut self, nbits: u32) -> u32 {
        let mut v = 0;
        for _ in 0..nbits {
            v = (v << 1) | self.step() as u32;
        }
        v
    }
}

impl Default for Lfsr {
    fn default() -> Self {
        Self {
            register: Self::DEFAULT_SEED,
        }
    }
}

/// Advances `state` by `nbits` steps; returns the output bits oldest-first
/// and the new state.
pub fn lfsr_next(state: Lfsr, nbits: u32) -> Result<(Vec<bool>, Lfsr)> {
    if !(1..=16).contains(&nbits) {
        return domain(format!("nbits {nbits} outside [1, 16]"));
    }
    let mut s = state;
    let bits = (0..nbits).map(|_| s.step()).collect();
    Ok((bits, s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encodings::{decode_stream, dequantize};

    fn uni(raw: i32, n: u32) -> BinaryWord {
        BinaryWord::unipolar(raw, n).unwrap()
    }

    fn bip(raw: i32, n: u32) -> BinaryWord {
        BinaryWord::bipolar(raw, n).unwrap()
    }

    fn rb_string(u: u32, n: u32) -> String {
        (0..1u32 << n)
            .map(|c| if rb_bit(u, n, c).unwrap() { '1' } else { '0' })
            .collect()
    }

    #[test]
    fn budget_examples() {
        assert_eq!(ones_budget(&uni(6, 3)), 6);
        assert_eq!(ones_budget(&bip(-2, 3)), 2);
        assert_eq!(ones_budget(&bip(0, 3)), 4);
    }

    #[test]
    fn rb_bit_examples() {
        assert_eq!(rb_string(2, 3), "01000100");
        assert_eq!(rb_string(6, 3), "11101110");
        assert_eq!(rb_string(0, 5), "0".repeat(32));
    }

    #[test]
    fn rb_bit_rejects_out_of_range() {
        assert!(rb_bit(8, 3, 0).is_err());
        assert!(rb_bit(1, 3, 8).is_err());
        assert!(rb_bit(1, 0, 0).is_err());
    }

    #[test]
    fn rb_generate_examples() {
        let s = rb_generate(&uni(6, 3));
        assert_eq!(s.ones(), 6);
        assert_eq!(decode_stream(&s), 0.75);
        assert_eq!(s.format(), StreamFormat::RB);
        assert_eq!(rb_generate(&bip(-2, 3)).to_string(), "01000100");
        assert_eq!(rb_generate(&bip(-4, 3)).to_string(), "00000000");
    }

    #[test]
    fn tb_generate_examples() {
        assert_eq!(tb_generate(&uni(6, 3)).to_string(), "11111100");
        assert_eq!(tb_generate(&bip(-2, 3)).to_string(), "11000000");
        assert_eq!(tb_generate(&uni(0, 3)).to_string(), "00000000");
        let long = tb_generate(&uni(200, 8));
        assert_eq!(long.ones(), 200);
        assert!(long.is_temporal());
    }

    #[test]
    fn gb_to_tb_examples() {
        let gb = Bitstream::parse("10101111", StreamFormat::GB, Polarity::Unipolar).unwrap();
        assert_eq!(gb_to_tb(&gb).to_string(), "11111100");
        let tb = tb_generate(&uni(5, 3));
        assert_eq!(gb_to_tb(&tb), tb);
        let z = Bitstream::zeros(4, StreamFormat::GB, Polarity::Unipolar).unwrap();
        assert_eq!(gb_to_tb(&z).ones(), 0);
    }

    #[test]
    fn step_generators_match_packed_streams() {
        for raw in -8..8 {
            let w = bip(raw, 4);
            let mut rb = RbGenerator::new(&w);
            let mut tb = TbGenerator::new(&w);
            let rbs = rb_generate(&w);
            let tbs = tb_generate(&w);
            for c in 0..16 {
                assert_eq!(rb.tick(), rbs.get(c));
                assert_eq!(tb.tick(), tbs.get(c));
            }
            assert_eq!(rb.cycle(), 0, "counter wraps after a full period");
        }
    }

    #[test]
    fn exact_value_encoding_all_words() {
        for n in 2..=8 {
            for pol in [Polarity::Unipolar, Polarity::Bipolar] {
                let (lo, hi) = crate::encodings::raw_range(n, pol);
                for raw in lo..=hi {
                    let w = BinaryWord::new(raw, n, pol).unwrap();
                    assert_eq!(decode_stream(&tb_generate(&w)), dequantize(&w));
                    assert_eq!(decode_stream(&rb_generate(&w)), dequantize(&w));
                }
            }
        }
    }

    #[test]
    fn weight_stratification() {
        for n in 1..=10u32 {
            let mut visits = vec![0u32; n as usize];
            let mut forced = 0;
            for c in 0..1u32 << n {
                let k = c.trailing_ones();
                if k == n {
                    forced += 1;
                } else {
                    visits[(n - 1 - k) as usize] += 1;
                }
            }
            assert_eq!(forced, 1);
            for (bit, &count) in visits.iter().enumerate() {
                assert_eq!(count, 1 << bit, "n={n} bit={bit}");
            }
        }
    }

    #[test]
    fn low_discrepancy_prefix() {
        for n in 1..=8u32 {
            let len = 1u32 << n;
            for u in 0..len {
                let mut ones = 0u32;
                for m in 1..=len {
                    ones += rb_bit(u, n, m - 1).unwrap() as u32;
                    let ideal = u as f64 * m as f64 / len as f64;
                    assert!(
                        (ones as f64 - ideal).abs() <= n as f64 / 2.0,
                        "u={u} n={n} m={m}"
                    );
                }
            }
        }
    }

    #[test]
    fn lfsr_golden_single_step() {
        // seed 0x0001: output LSB 1, feedback 1^0^0^0 = 1 enters the MSB.
        let (bits, s) = lfsr_next(Lfsr::new(1).unwrap(), 1).unwrap();
        assert_eq!(bits, vec![true]);
        assert_eq!(s.register(), 0x8000);
        // 0xACE1 = 1010_1100_1110_0001: taps 0,2,3,5 give 1^0^0^1 = 0.
        let (bits, s) = lfsr_next(Lfsr::default(), 1).unwrap();
        assert_eq!(bits, vec![true]);
        assert_eq!(s.register(), 0x5670);
    }

    #[test]
    fn lfsr_composition() {
        for seed in [1u16, 0xACE1, 0x1234, 0xFFFF] {
            let s0 = Lfsr::new(seed).unwrap();
            let (a, s1) = lfsr_next(s0, 1).unwrap();
            let (b, s2) = lfsr_next(s1, 1).unwrap();
            let (ab, t) = lfsr_next(s0, 2).unwrap();
            assert_eq!([a, b].concat(), ab);
            assert_eq!(s2, t);
        }
    }

    #[test]
    fn lfsr_period_is_maximal() {
        let seed = Lfsr::new(1).unwrap();
        let mut s = seed;
        let mut steps = 0u32;
        loop {
            s.step();
            steps += 1;
            if s == seed {
                break;
            }
            assert!(steps < 70_000);
        }
        assert_eq!(steps, Lfsr::PERIOD);
    }

    #[test]
    fn lfsr_rejects_bad_inputs() {
        assert!(Lfsr::new(0).is_err());
        assert!(lfsr_next(Lfsr::default(), 0).is_err());
        assert!(lfsr_next(Lfsr::default(), 17).is_err());
        assert_eq!(Lfsr::from_seed(0).register(), Lfsr::DEFAULT_SEED);
        assert_eq!(Lfsr::from_seed(0xACE1).register(), 0xACE1);
    }

    #[test]
    fn draw_packs_msb_first() {
        let mut a = Lfsr::new(0x1234).unwrap();
        let mut b = a;
        let (bits, _) = lfsr_next(b, 2).unwrap();
        let v = a.draw(2);
        assert_eq!(v, (bits[0] as u32) << 1 | bits[1] as u32);
        b.draw(2);
        assert_eq!(a, b);
    }
}
