//! M-input multiply-accumulate units: `a = Σ x_i · w_i`.
//!
//! Every HTC variant feeds `x_i` through an RB generator and `w_i` through a
//! TB generator into a single AND/XNOR gate per product and differs only in
//! how the M product streams are summed. The CBSC variant multiplies with
//! counters instead and sums the per-product binary results exactly.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::adders::{dtsa_mac_out, dtsa_run, emba_accumulate, emba_mac_out, mux_add_with};
use crate::encodings::{decode_stream, BinaryWord, Bitstream, Polarity, StreamFormat};
use crate::error::{domain, Error, Result};
use crate::generators::{gb_to_tb, ones_budget, Lfsr};
use crate::multipliers::{cbsc_mul_bipolar, cbsc_mul_unipolar, htc_product_words};
use crate::tables;
use crate::{MAX_WIDTH_BITS, MIN_WIDTH_BITS};

/// Accumulation scheme of a MAC.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    #[serde(rename = "cbsc")]
    Cbsc,
    #[serde(rename = "mux")]
    MuxHtc,
    #[serde(rename = "emba")]
    Emba,
    #[serde(rename = "dtsa")]
    Dtsa,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::Cbsc, Variant::MuxHtc, Variant::Emba, Variant::Dtsa];

    pub fn name(&self) -> &'static str {
        match self {
            Variant::Cbsc => "cbsc",
            Variant::MuxHtc => "mux",
            Variant::Emba => "emba",
            Variant::Dtsa => "dtsa",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cbsc" => Ok(Variant::Cbsc),
            "mux" | "muxhtc" | "mux-htc" => Ok(Variant::MuxHtc),
            "emba" => Ok(Variant::Emba),
            "dtsa" => Ok(Variant::Dtsa),
            other => domain(format!("unknown variant `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MacConfig {
    pub variant: Variant,
    pub polarity: Polarity,
    pub width_bits: u32,
    pub fan_in: usize,
    /// LFSR seed, used by [`Variant::MuxHtc`] only.
    pub seed: u64,
}

impl MacConfig {
    /// A 4-input, 8-bit MAC with the default LFSR seed.
    pub fn new(variant: Variant, polarity: Polarity) -> Self {
        Self {
            variant,
            polarity,
            width_bits: 8,
            fan_in: 4,
            seed: Lfsr::DEFAULT_SEED as u64,
        }
    }

    pub fn with_width(mut self, width_bits: u32) -> Self {
        self.width_bits = width_bits;
        self
    }

    pub fn with_fan_in(mut self, fan_in: usize) -> Self {
        self.fan_in = fan_in;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_variant(mut self, variant: Variant) -> Self {
        self.variant = variant;
        self
    }

    pub fn stream_len(&self) -> usize {
        1 << self.width_bits
    }

    pub fn validate(&self) -> Result<()> {
        if self.fan_in < 2 {
            return domain(format!("fan-in {} below 2", self.fan_in));
        }
        if !(MIN_WIDTH_BITS..=MAX_WIDTH_BITS).contains(&self.width_bits) {
            return domain(format!(
                "width {} outside [{MIN_WIDTH_BITS}, {MAX_WIDTH_BITS}]",
                self.width_bits
            ));
        }
        Ok(())
    }

    fn check_words(&self, words: &[BinaryWord]) -> Result<()> {
        for w in words {
            if w.width_bits() != self.width_bits || w.polarity() != self.polarity {
                return domain(format!(
                    "operand {w} does not match a {}-bit {} MAC",
                    self.width_bits, self.polarity
                ));
            }
        }
        Ok(())
    }
}

/// Variant-specific internals of a MAC run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum MacAux {
    Cbsc {
        ones: Vec<u32>,
        cycles: Vec<u32>,
    },
    Mux {
        ones: u32,
    },
    Emba {
        total: u64,
    },
    Dtsa {
        y_ones: u32,
        remainder: u32,
    },
    Tiled(Vec<MacAux>),
    Chained {
        stage1_y_ones: u32,
        stage1_remainder: u32,
        y_ones: u32,
        remainder: u32,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MacResult {
    pub value: f64,
    pub exact: f64,
    /// `value − exact`.
    pub error: f64,
    pub aux: MacAux,
}

impl MacResult {
    fn new(value: f64, exact: f64, aux: MacAux) -> Self {
        Self {
            value,
            exact,
            error: value - exact,
            aux,
        }
    }
}

fn exact_dot(x: &[BinaryWord], w: &[BinaryWord]) -> f64 {
    x.iter().zip(w).map(|(a, b)| a.value() * b.value()).sum()
}

fn product_streams(cfg: &MacConfig, x: &[BinaryWord], w: &[BinaryWord]) -> Vec<Bitstream> {
    x.iter()
        .zip(w)
        .map(|(a, b)| {
            Bitstream::from_words(
                htc_product_words(a, b),
                cfg.width_bits,
                StreamFormat::GB,
                cfg.polarity,
            )
        })
        .collect()
}

fn check_inputs(cfg: &MacConfig, x: &[BinaryWord], w: &[BinaryWord], len: usize) -> Result<()> {
    cfg.validate()?;
    if x.len() != len || w.len() != len {
        return domain(format!(
            "expected {len} operand pairs, got {} x and {} w",
            x.len(),
            w.len()
        ));
    }
    cfg.check_words(x)?;
    cfg.check_words(w)
}

/// Runs one MAC block; the MUX variant seeds its LFSR from `cfg.seed`.
pub fn mac_run(cfg: &MacConfig, x: &[BinaryWord], w: &[BinaryWord]) -> Result<MacResult> {
    let mut lfsr = Lfsr::from_seed(cfg.seed);
    mac_run_with_lfsr(cfg, x, w, &mut lfsr)
}

/// Runs one MAC block, drawing MUX selects from a caller-owned LFSR.
pub fn mac_run_with_lfsr(
    cfg: &MacConfig,
    x: &[BinaryWord],
    w: &[BinaryWord],
    lfsr: &mut Lfsr,
) -> Result<MacResult> {
    check_inputs(cfg, x, w, cfg.fan_in)?;
    Ok(run_block(cfg, x, w, lfsr))
}

fn run_block(cfg: &MacConfig, x: &[BinaryWord], w: &[BinaryWord], lfsr: &mut Lfsr) -> MacResult {
    let exact = exact_dot(x, w);
    let len = cfg.stream_len();
    let m = x.len();
    match cfg.variant {
        Variant::Cbsc => {
            let products: Vec<_> = x
                .iter()
                .zip(w)
                .map(|(a, b)| match cfg.polarity {
                    Polarity::Unipolar => cbsc_mul_unipolar(a, b),
                    Polarity::Bipolar => cbsc_mul_bipolar(a, b),
                })
                .collect::<Result<_>>()
                .expect("operands validated");
            // Exact binary adders after the counters.
            let value = products.iter().map(|p| p.value).sum();
            MacResult::new(
                value,
                exact,
                MacAux::Cbsc {
                    ones: products.iter().map(|p| p.ones).collect(),
                    cycles: products.iter().map(|p| p.cycles_used).collect(),
                },
            )
        }
        Variant::MuxHtc => {
            let streams = product_streams(cfg, x, w);
            let out = mux_add_with(&streams, lfsr).expect("validated fan-in");
            let value = m as f64 * decode_stream(&out);
            MacResult::new(value, exact, MacAux::Mux { ones: out.ones() })
        }
        Variant::Emba => {
            let streams = product_streams(cfg, x, w);
            let total = emba_accumulate(&streams).expect("equal lengths");
            let value = emba_mac_out(total, len, m, cfg.polarity);
            MacResult::new(value, exact, MacAux::Emba { total })
        }
        Variant::Dtsa => {
            let streams = product_streams(cfg, x, w);
            let out = dtsa_run(&streams).expect("equal lengths");
            let y_ones = out.y.ones();
            let value = dtsa_mac_out(y_ones, out.remainder, len, m, cfg.polarity);
            MacResult::new(
                value,
                exact,
                MacAux::Dtsa {
                    y_ones,
                    remainder: out.remainder,
                },
            )
        }
    }
}

/// `K·M` operand pairs processed as `K` identical M-input blocks whose
/// binary readouts are added exactly.
pub fn mac_tiled(cfg: &MacConfig, x: &[BinaryWord], w: &[BinaryWord]) -> Result<MacResult> {
    let mut lfsr = Lfsr::from_seed(cfg.seed);
    mac_tiled_with_lfsr(cfg, x, w, &mut lfsr)
}

/// Tiled MAC; MUX blocks draw from `lfsr` in block order.
pub fn mac_tiled_with_lfsr(
    cfg: &MacConfig,
    x: &[BinaryWord],
    w: &[BinaryWord],
    lfsr: &mut Lfsr,
) -> Result<MacResult> {
    cfg.validate()?;
    if x.is_empty() || !x.len().is_multiple_of(cfg.fan_in) {
        return domain(format!(
            "{} operands is not a positive multiple of fan-in {}",
            x.len(),
            cfg.fan_in
        ));
    }
    check_inputs(cfg, x, w, x.len())?;
    let mut value = 0.0;
    let mut aux = Vec::with_capacity(x.len() / cfg.fan_in);
    for (xs, ws) in x.chunks(cfg.fan_in).zip(w.chunks(cfg.fan_in)) {
        let block = run_block(cfg, xs, ws, lfsr);
        value += block.value;
        aux.push(block.aux);
    }
    Ok(MacResult::new(value, exact_dot(x, w), MacAux::Tiled(aux)))
}

/// Two DTSA stages chained in-stream.
///
/// Stage 1 reduces `stage1_x · stage1_w` to its scaled output stream `Y`
/// (value `≈ Σ/M`); `Y` is repacked to TB and drives the TB input of the
/// first stage-2 multiplier, paired with `stage2_x[0]`. The remaining
/// `M − 1` stage-2 multipliers take `stage2_x[1..]` and `stage2_w`. The
/// stage-1 residual is dropped; only stage 2 is read out in binary.
pub fn mac_chain_dtsa(
    cfg: &MacConfig,
    stage1_x: &[BinaryWord],
    stage1_w: &[BinaryWord],
    stage2_x: &[BinaryWord],
    stage2_w: &[BinaryWord],
) -> Result<MacResult> {
    if cfg.variant != Variant::Dtsa {
        return domain(format!(
            "chaining needs the dtsa variant, got {}",
            cfg.variant
        ));
    }
    check_inputs(cfg, stage1_x, stage1_w, cfg.fan_in)?;
    if stage2_x.len() != cfg.fan_in || stage2_w.len() + 1 != cfg.fan_in {
        return domain(format!(
            "stage 2 needs {} x operands and {} w operands",
            cfg.fan_in,
            cfg.fan_in - 1
        ));
    }
    cfg.check_words(stage2_x)?;
    cfg.check_words(stage2_w)?;

    let m = cfg.fan_in;
    let len = cfg.stream_len();
    let stage1 = dtsa_run(&product_streams(cfg, stage1_x, stage1_w))?;
    let chained = gb_to_tb(&stage1.y);

    let rb0 = tables::rb(ones_budget(&stage2_x[0]), cfg.width_bits);
    let head: Vec<u64> = match cfg.polarity {
        Polarity::Unipolar => rb0
            .iter()
            .zip(chained.words())
            .map(|(a, b)| a & b)
            .collect(),
        Polarity::Bipolar => {
            let mut v: Vec<u64> = rb0
                .iter()
                .zip(chained.words())
                .map(|(a, b)| !(a ^ b))
                .collect();
            if len < 64 {
                v[0] &= (1u64 << len) - 1;
            }
            v
        }
    };
    let mut streams = vec![Bitstream::from_words(
        head,
        cfg.width_bits,
        StreamFormat::GB,
        cfg.polarity,
    )];
    streams.extend(product_streams(cfg, &stage2_x[1..], stage2_w));
    let stage2 = dtsa_run(&streams)?;
    let y_ones = stage2.y.ones();
    let value = dtsa_mac_out(y_ones, stage2.remainder, len, m, cfg.polarity);

    let stage1_exact = exact_dot(stage1_x, stage1_w) / m as f64;
    let exact = stage2_x[0].value() * stage1_exact + exact_dot(&stage2_x[1..], stage2_w);
    Ok(MacResult::new(
        value,
        exact,
        MacAux::Chained {
            stage1_y_ones: stage1.y.ones(),
            stage1_remainder: stage1.remainder,
            y_ones,
            remainder: stage2.remainder,
        },
    ))
}
