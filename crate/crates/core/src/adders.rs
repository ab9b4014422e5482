//! Accumulators for M parallel product streams.
//!
//! * EMBA adds every cycle's column sum into a binary register; the register
//!   ends up holding the exact number of product ones.
//! * DTSA adds each column sum into a residual register and emits a one
//!   whenever the running value reaches `M`, subtracting `M`. The output
//!   stream carries `⌊total / M⌋` ones and the register keeps `total mod M`,
//!   which the binary readout adds back.
//! * The MUX adder forwards one randomly selected input per cycle.

use crate::ceil_log2;
use crate::encodings::{words_for, Bitstream, Polarity, StreamFormat};
use crate::error::{domain, Error, Result};
use crate::generators::Lfsr;

/// Register widths an M-input, L-cycle adder needs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WidthBudget {
    /// `⌈log₂(M+1)⌉`, per-cycle column sum.
    pub cycle_sum_bits: u32,
    /// `⌈log₂(M·L+1)⌉`, EMBA accumulator.
    pub accumulator_bits: u32,
    /// `⌈log₂ M⌉`, DTSA residual register.
    pub residual_bits: u32,
    /// `⌈log₂(L+1)⌉`, counter over the DTSA output stream.
    pub output_counter_bits: u32,
}

impl WidthBudget {
    pub fn new(fan_in: usize, length: usize) -> Self {
        let (m, l) = (fan_in as u64, length as u64);
        Self {
            cycle_sum_bits: ceil_log2(m + 1),
            accumulator_bits: ceil_log2(m * l + 1),
            residual_bits: ceil_log2(m),
            output_counter_bits: ceil_log2(l + 1),
        }
    }
}

#[inline]
fn fits(value: u64, bits: u32) -> bool {
    bits >= 64 || value < (1u64 << bits)
}

/// Number of ones among one cycle's product bits.
pub fn cycle_sum(product_bits: &[bool]) -> u32 {
    product_bits.iter().map(|&b| b as u32).sum()
}

/// Checks that all streams share one length and returns it.
fn common_len(streams: &[Bitstream]) -> Result<usize> {
    let first = streams
        .first()
        .ok_or_else(|| Error::Domain("adder needs at least one input stream".into()))?;
    let len = first.len();
    for s in &streams[1..] {
        if s.len() != len {
            return Err(Error::LengthMismatch {
                expected: len,
                found: s.len(),
            });
        }
    }
    Ok(len)
}

/// Column sums, cycle 0 first.
pub fn cycle_sums(streams: &[Bitstream]) -> Result<Vec<u32>> {
    let len = common_len(streams)?;
    let mut sums = vec![0u32; len];
    for s in streams {
        for (wi, &word) in s.words().iter().enumerate() {
            let mut w = word;
            while w != 0 {
                let bit = w.trailing_zeros() as usize;
                sums[wi * 64 + bit] += 1;
                w &= w - 1;
            }
        }
    }
    Ok(sums)
}

/// Exact multiple-input binary accumulator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmbaState {
    accumulator: u64,
    fan_in: usize,
    length: usize,
    budget: WidthBudget,
}

impl EmbaState {
    pub fn new(fan_in: usize, length: usize) -> Self {
        Self {
            accumulator: 0,
            fan_in,
            length,
            budget: WidthBudget::new(fan_in, length),
        }
    }

    pub fn accumulator(&self) -> u64 {
        self.accumulator
    }

    /// Adds one cycle's column sum.
    pub fn add_cycle_sum(&mut self, sum: u32) {
        assert!(
            sum as usize <= self.fan_in,
            "cycle sum {sum} exceeds fan-in"
        );
        debug_assert!(fits(sum as u64, self.budget.cycle_sum_bits));
        self.accumulator += sum as u64;
        assert!(
            fits(self.accumulator, self.budget.accumulator_bits)
                && self.accumulator <= (self.fan_in * self.length) as u64,
            "accumulator overflowed its {}-bit budget",
            self.budget.accumulator_bits
        );
    }

    pub fn step(&mut self, product_bits: &[bool]) {
        self.add_cycle_sum(cycle_sum(product_bits));
    }
}

/// Total ones over all streams and cycles, accumulated one 64-cycle block
/// of column sums at a time.
pub fn emba_accumulate(streams: &[Bitstream]) -> Result<u64> {
    let len = common_len(streams)?;
    let mut state = EmbaState::new(streams.len(), len);
    for wi in 0..words_for(len) {
        let block: u64 = streams
            .iter()
            .map(|s| s.words()[wi].count_ones() as u64)
            .sum();
        state.accumulator += block;
    }
    assert!(fits(state.accumulator, state.budget.accumulator_bits));
    Ok(state.accumulator)
}

/// Unipolar: `total / L`. Bipolar: `2·total/L − M`.
pub fn emba_mac_out(total: u64, length: usize, fan_in: usize, polarity: Polarity) -> f64 {
    let ratio = total as f64 / length as f64;
    match polarity {
        Polarity::Unipolar => ratio,
        Polarity::Bipolar => 2.0 * ratio - fan_in as f64,
    }
}

/// Threshold-subtract scaled adder state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DtsaState {
    pub q_reg: u32,
    pub y_count: u32,
    pub fan_in: u32,
    pub length: u32,
}

/// One cycle of the DTSA, in the column order of a hand trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DtsaStep {
    pub cycle_sum: u32,
    pub q_reg: u32,
    pub a: u32,
    pub y: bool,
    pub q_next: u32,
}

impl DtsaState {
    pub fn new(fan_in: usize, length: usize) -> Self {
        Self {
            q_reg: 0,
            y_count: 0,
            fan_in: fan_in as u32,
            length: length as u32,
        }
    }

    #[inline]
    pub fn step_sum(&mut self, sum: u32) -> DtsaStep {
        assert!(sum <= self.fan_in, "cycle sum {sum} exceeds fan-in");
        let q_reg = self.q_reg;
        // q_reg < M and sum <= M, so A < 2M and one subtraction suffices.
        let a = q_reg + sum;
        let y = a >= self.fan_in;
        let q_next = if y { a - self.fan_in } else { a };
        self.q_reg = q_next;
        self.y_count += y as u32;
        debug_assert!(self.q_reg < self.fan_in);
        debug_assert!(self.y_count <= self.length);
        DtsaStep {
            cycle_sum: sum,
            q_reg,
            a,
            y,
            q_next,
        }
    }
}

pub fn dtsa_step(state: DtsaState, product_bits: &[bool]) -> (bool, DtsaState) {
    let mut s = state;
    let step = s.step_sum(cycle_sum(product_bits));
    (step.y, s)
}

/// Output of a full DTSA pass.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DtsaOutput {
    /// Scaled output stream (GB), `⌊total / M⌋` ones.
    pub y: Bitstream,
    /// Residual register after the last cycle.
    pub remainder: u32,
}

/// One row of a DTSA trace: the product bits plus the step columns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DtsaTraceRow {
    pub cycle: usize,
    pub bits: Vec<bool>,
    pub step: DtsaStep,
}

pub fn dtsa_run(streams: &[Bitstream]) -> Result<DtsaOutput> {
    let len = common_len(streams)?;
    let sums = cycle_sums(streams)?;
    let mut state = DtsaState::new(streams.len(), len);
    let mut words = vec![0u64; words_for(len)];
    for (c, &sum) in sums.iter().enumerate() {
        if state.step_sum(sum).y {
            words[c >> 6] |= 1 << (c & 63);
        }
    }
    Ok(DtsaOutput {
        y: Bitstream::from_words(
            words,
            streams[0].width_bits(),
            StreamFormat::GB,
            streams[0].polarity(),
        ),
        remainder: state.q_reg,
    })
}

/// Runs the DTSA cycle by cycle and records every row.
pub fn dtsa_trace(streams: &[Bitstream]) -> Result<Vec<DtsaTraceRow>> {
    let len = common_len(streams)?;
    let mut state = DtsaState::new(streams.len(), len);
    Ok((0..len)
        .map(|c| {
            let bits: Vec<bool> = streams.iter().map(|s| s.get(c)).collect();
            let step = state.step_sum(cycle_sum(&bits));
            DtsaTraceRow {
                cycle: c,
                bits,
                step,
            }
        })
        .collect())
}

/// Binary readout with the residual added back: `final = M·#Y + Q`.
pub fn dtsa_mac_out(
    y_ones: u32,
    remainder: u32,
    length: usize,
    fan_in: usize,
    polarity: Polarity,
) -> f64 {
    debug_assert!((remainder as usize) < fan_in.max(1));
    let total = fan_in as u64 * y_ones as u64 + remainder as u64;
    emba_mac_out(total, length, fan_in, polarity)
}

/// Scaled MUX adder. Each cycle draws `⌈log₂ M⌉` LFSR bits as a select
/// index, reduced modulo `M` when `M` is not a power of two, and forwards
/// the selected input bit.
pub fn mux_add_stream(streams: &[Bitstream], lfsr: Lfsr) -> Result<(Bitstream, Lfsr)> {
    let mut lfsr = lfsr;
    let out = mux_add_with(streams, &mut lfsr)?;
    Ok((out, lfsr))
}

pub(crate) fn mux_add_with(streams: &[Bitstream], lfsr: &mut Lfsr) -> Result<Bitstream> {
    let m = streams.len();
    if m < 2 {
        return domain(format!("MUX adder needs at least 2 inputs, got {m}"));
    }
    let len = common_len(streams)?;
    let select_bits = ceil_log2(m as u64);
    let mut words = vec![0u64; words_for(len)];
    for c in 0..len {
        let mut sel = lfsr.draw(select_bits) as usize;
        if sel >= m {
            sel %= m;
        }
        if streams[sel].get(c) {
            words[c >> 6] |= 1 << (c & 63);
        }
    }
    Ok(Bitstream::from_words(
        words,
        streams[0].width_bits(),
        StreamFormat::GB,
        streams[0].polarity(),
    ))
}
