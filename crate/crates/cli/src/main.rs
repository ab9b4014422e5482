//! `bitflux`: benchmarks, image kernels, encoders and cycle traces.

mod report;
mod trace;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::error::ErrorKind;
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use bitflux::dsp::{self, DctMode, FIR_TAPS};
use bitflux::encodings::decode_stream;
use bitflux::generators::{rb_generate, tb_generate};
use bitflux::metrics::{self, image_metrics, REPORT_NORMALIZATION, SAMPLING_DISTRIBUTION};
use bitflux::multipliers::htc_mul_stream;
use bitflux::{BinaryWord, Bitstream, MacConfig, Polarity, StreamFormat, Variant};

use report::{write_json, RunManifest};

const DEFAULT_SEED: u64 = 0xACE1;

#[derive(Parser)]
#[command(
    name = "bitflux",
    version,
    about = "Bit-true hybrid temporal computing emulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// RMSE/SDE of random dot products.
    MacBench(MacBenchArgs),
    /// 6-tap Gaussian blur of a PGM image.
    Fir(FirArgs),
    /// 8-point DCT/inverse round trip of a PGM image.
    Dct(DctArgs),
    /// Print the RB or TB stream of one operand.
    Encode(EncodeArgs),
    /// Cycle-by-cycle DTSA table for a set of product streams.
    Trace(TraceArgs),
}

#[derive(Args, Serialize)]
struct MacBenchArgs {
    #[arg(long, value_parser = parse_variant)]
    variant: Variant,
    #[arg(long, value_parser = parse_polarity, default_value = "unipolar")]
    polarity: Polarity,
    #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u32).range(2..=16))]
    bits: u32,
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u64).range(2..=64))]
    fanin: u64,
    #[arg(long, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..))]
    samples: u64,
    #[arg(long, env = "BITFLUX_SEED", default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = ReportFormat::Json)]
    format: ReportFormat,
    /// Report file; printed to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum ReportFormat {
    Csv,
    Json,
}

#[derive(Args, Serialize)]
struct FirArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, value_parser = parse_variant)]
    variant: Variant,
    #[arg(long, env = "BITFLUX_SEED", default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, default_value_t = dsp::DEFAULT_SIGMA)]
    sigma: f64,
    #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u32).range(2..=16))]
    bits: u32,
    #[arg(long)]
    out_prefix: PathBuf,
}

#[derive(Args, Serialize)]
struct DctArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, value_parser = parse_variant)]
    variant: Variant,
    #[arg(long, env = "BITFLUX_SEED", default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, value_parser = parse_mode, default_value = "1d")]
    mode: DctMode,
    #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u32).range(2..=16))]
    bits: u32,
    #[arg(long)]
    out_prefix: PathBuf,
}

#[derive(Args)]
struct EncodeArgs {
    /// Raw integer code of the operand.
    #[arg(long, allow_hyphen_values = true)]
    value: i32,
    #[arg(long, value_parser = clap::value_parser!(u32).range(2..=16))]
    bits: u32,
    #[arg(long, value_parser = parse_polarity, default_value = "unipolar")]
    polarity: Polarity,
    #[arg(long, value_enum)]
    format: EncodeFormat,
}

#[derive(Clone, Copy, ValueEnum)]
enum EncodeFormat {
    Rb,
    Tb,
}

#[derive(Args)]
struct TraceArgs {
    /// Product streams, cycle 0 first.
    #[arg(long, num_args = 1.., conflicts_with_all = ["x", "w"], required_unless_present = "x")]
    streams: Vec<String>,
    /// Raw RB operands; products are formed with `--w`.
    #[arg(
        long,
        num_args = 1,
        value_delimiter = ',',
        allow_hyphen_values = true,
        requires = "w"
    )]
    x: Vec<i32>,
    /// Raw TB operands.
    #[arg(long, num_args = 1, value_delimiter = ',', allow_hyphen_values = true)]
    w: Vec<i32>,
    #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u32).range(2..=16))]
    bits: u32,
    #[arg(long, value_parser = parse_polarity, default_value = "unipolar")]
    polarity: Polarity,
}

fn parse_variant(s: &str) -> std::result::Result<Variant, String> {
    s.parse().map_err(|e: bitflux::Error| e.to_string())
}

fn parse_polarity(s: &str) -> std::result::Result<Polarity, String> {
    s.parse().map_err(|e: bitflux::Error| e.to_string())
}

fn parse_mode(s: &str) -> std::result::Result<DctMode, String> {
    s.parse().map_err(|e: bitflux::Error| e.to_string())
}

fn usage_error(kind: ErrorKind, message: impl std::fmt::Display) -> ! {
    Cli::command().error(kind, message).exit()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::MacBench(args) => mac_bench(&args),
        Command::Fir(args) => fir(&args),
        Command::Dct(args) => dct(&args),
        Command::Encode(args) => encode(&args),
        Command::Trace(args) => run_trace(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn mac_bench(args: &MacBenchArgs) -> Result<()> {
    let cfg = MacConfig::new(args.variant, args.polarity)
        .with_width(args.bits)
        .with_fan_in(args.fanin as usize);
    let report = metrics::mac_benchmark(&cfg, args.samples as usize, args.seed)?;
    let text = match args.format {
        ReportFormat::Json => serde_json::to_string_pretty(&report)? + "\n",
        ReportFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.serialize(&report)?;
            String::from_utf8(w.into_inner()?)?
        }
    };
    match &args.out {
        None => print!("{text}"),
        Some(path) => {
            std::fs::write(path, &text).with_context(|| format!("writing {}", path.display()))?;
            RunManifest::new("mac-bench", args, args.seed)
                .output(path)
                .decision("normalization", json!(REPORT_NORMALIZATION))
                .decision("sampling", json!(SAMPLING_DISTRIBUTION))
                .write(&path.with_extension("manifest.json"))?;
        }
    }
    Ok(())
}

fn prefixed(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn fir(args: &FirArgs) -> Result<()> {
    if !(args.sigma > 0.0 && args.sigma.is_finite()) {
        usage_error(
            ErrorKind::ValueValidation,
            format!("--sigma must be positive, got {}", args.sigma),
        );
    }
    let img =
        dsp::pgm_read(&args.input).with_context(|| format!("reading {}", args.input.display()))?;
    let kernel = dsp::gaussian_taps(args.sigma, FIR_TAPS, args.bits)?;
    let cfg = MacConfig::new(args.variant, Polarity::Unipolar)
        .with_width(args.bits)
        .with_fan_in(FIR_TAPS)
        .with_seed(args.seed);
    let out = dsp::fir_filter(&img, &kernel, &cfg)?;
    let m = image_metrics(&img, &out)?;
    let manifest = RunManifest::new("fir", args, args.seed)
        .input(&args.input)
        .decision("sigma", json!(args.sigma))
        .decision("taps", json!(kernel.raws()))
        .decision("operands", json!("pixels RB, taps TB"))
        .decision("psnr_reference", json!("original image"));
    write_image_outputs(&out, &m, &args.out_prefix, manifest)
}

fn dct(args: &DctArgs) -> Result<()> {
    let img =
        dsp::pgm_read(&args.input).with_context(|| format!("reading {}", args.input.display()))?;
    let cfg = MacConfig::new(args.variant, Polarity::Bipolar)
        .with_width(args.bits)
        .with_seed(args.seed);
    let (out, m) = dsp::dct_pipeline(&img, &cfg, args.mode)?;
    let manifest = RunManifest::new("dct", args, args.seed)
        .input(&args.input)
        .decision("dct_mode", json!(args.mode))
        .decision("stage_scale", json!(dsp::DCT_STAGE_SCALE))
        .decision("operands", json!("samples RB, coefficients TB"))
        .decision("psnr_reference", json!("original image"));
    write_image_outputs(&out, &m, &args.out_prefix, manifest)
}

fn write_image_outputs(
    img: &dsp::ImageBuffer,
    m: &metrics::ImageMetrics,
    prefix: &Path,
    manifest: RunManifest,
) -> Result<()> {
    let pgm = prefixed(prefix, ".pgm");
    let metrics_path = prefixed(prefix, ".metrics.json");
    dsp::pgm_write(img, &pgm).with_context(|| format!("writing {}", pgm.display()))?;
    write_json(&metrics_path, m)?;
    println!("rmse {:.6}  psnr {:.2} dB", m.rmse, m.psnr_db);
    manifest
        .output(&pgm)
        .output(&metrics_path)
        .write(&prefixed(prefix, ".manifest.json"))
}

fn encode(args: &EncodeArgs) -> Result<()> {
    let word = BinaryWord::new(args.value, args.bits, args.polarity)
        .unwrap_or_else(|e| usage_error(ErrorKind::ValueValidation, e));
    let stream = match args.format {
        EncodeFormat::Rb => rb_generate(&word),
        EncodeFormat::Tb => tb_generate(&word),
    };
    println!("{stream}");
    println!("value {:?}", decode_stream(&stream));
    Ok(())
}

fn run_trace(args: &TraceArgs) -> Result<()> {
    let streams: Vec<Bitstream> = if args.streams.is_empty() {
        if args.x.len() != args.w.len() {
            usage_error(
                ErrorKind::WrongNumberOfValues,
                format!(
                    "{} x operands but {} w operands",
                    args.x.len(),
                    args.w.len()
                ),
            );
        }
        args.x
            .iter()
            .zip(&args.w)
            .map(|(&x, &w)| {
                let x = BinaryWord::new(x, args.bits, args.polarity)?;
                let w = BinaryWord::new(w, args.bits, args.polarity)?;
                htc_mul_stream(&x, &w)
            })
            .collect::<bitflux::Result<_>>()
            .unwrap_or_else(|e| usage_error(ErrorKind::ValueValidation, e))
    } else {
        let lens: Vec<usize> = args.streams.iter().map(|s| s.len()).collect();
        if lens.iter().any(|&l| l != lens[0]) {
            usage_error(
                ErrorKind::ValueValidation,
                format!("ragged stream lengths {lens:?}"),
            );
        }
        args.streams
            .iter()
            .map(|s| Bitstream::parse(s, StreamFormat::GB, args.polarity))
            .collect::<bitflux::Result<_>>()
            .unwrap_or_else(|e| usage_error(ErrorKind::ValueValidation, e))
    };
    if streams.len() < 2 {
        usage_error(
            ErrorKind::TooFewValues,
            "a trace needs at least two streams",
        );
    }
    print!("{}", trace::render(&streams, args.polarity)?);
    Ok(())
}
