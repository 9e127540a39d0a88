//! pixelproof command-line interface.
//!
//! Machine-readable JSON goes to stdout (or `--out`), human diagnostics to
//! stderr only. Exit codes are stable (0 success, 1 divergence found,
//! 2 usage/config error, 3 runtime error) so CI can gate on silent-error
//! detection with a plain shell check.

mod commands;
mod output;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use pixelproof_core::diff::ExtremeThresholds;

pub const EXIT_SUCCESS: i32 = 0;
pub const EXIT_DIVERGENCE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Parser)]
#[command(
    name = "pixelproof",
    version,
    about = "Pin, execute, diff, and benchmark ML preprocessing pipelines"
)]
struct Cli {
    /// Treat validation warnings as errors.
    #[arg(long, global = true)]
    strict: bool,

    /// Write the JSON report to this path instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Write a difference visualization (PPM) to this path.
    #[arg(long, global = true, value_name = "PATH")]
    viz: Option<PathBuf>,

    /// Extreme-intensity thresholds as `low,high` (default 25,230).
    #[arg(long, global = true, value_name = "LOW,HIGH", value_parser = parse_thresholds)]
    thresholds: Option<ExtremeThresholds>,

    #[command(subcommand)]
    command: Command,
}

fn parse_thresholds(raw: &str) -> Result<ExtremeThresholds, String> {
    let (low, high) = raw
        .split_once(',')
        .ok_or_else(|| "expected `low,high`".to_string())?;
    let low: u8 = low
        .trim()
        .parse()
        .map_err(|_| format!("`{low}` is not a byte value"))?;
    let high: u8 = high
        .trim()
        .parse()
        .map_err(|_| format!("`{high}` is not a byte value"))?;
    ExtremeThresholds::new(low, high).map_err(|e| e.to_string())
}

#[derive(Subcommand)]
enum Command {
    /// Parse a manifest and report semantic issues.
    Validate {
        /// Manifest file (.mfst).
        manifest: PathBuf,
    },
    /// Execute a manifest over an input image and write the output tensor.
    Run {
        manifest: PathBuf,
        /// Input image in a container the manifest's decoder accepts.
        input: PathBuf,
        /// Output tensor path (RTEN v1).
        output: PathBuf,
    },
    /// Run two manifests over one input and compare the output tensors.
    Diff {
        manifest_a: PathBuf,
        manifest_b: PathBuf,
        input: PathBuf,
    },
    /// Decode one input with two adapters and compare the images.
    DecodeDiff {
        adapter_a: String,
        adapter_b: String,
        input: PathBuf,
    },
    /// Sweep batch sizes and worker counts over a corpus.
    Bench(BenchArgs),
    /// Pack a directory of files into an RPAK record file.
    Pack {
        /// Directory whose regular files are packed in sorted name order.
        dir: PathBuf,
        output: PathBuf,
    },
    /// Print the digest of an RTEN tensor file.
    Digest { tensor: PathBuf },
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, value_name = "PATH")]
    manifest: PathBuf,

    /// Read the corpus from a directory of files.
    #[arg(
        long,
        value_name = "DIR",
        conflicts_with = "pack",
        required_unless_present = "pack"
    )]
    source_dir: Option<PathBuf>,

    /// Read the corpus from an RPAK pack.
    #[arg(long, value_name = "FILE")]
    pack: Option<PathBuf>,

    #[arg(long, value_name = "LIST", value_delimiter = ',', default_value = "1")]
    batch_sizes: Vec<u32>,

    #[arg(long, value_name = "LIST", value_delimiter = ',', default_value = "1")]
    workers: Vec<u32>,

    /// Measured iterations per cell.
    #[arg(long, default_value_t = 10)]
    iters: u32,

    /// Warmup iterations discarded before measuring.
    #[arg(long, default_value_t = 3)]
    warmup: u32,

    /// Corpus shuffle seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn main() {
    let cli = Cli::parse();
    let ctx = commands::Context {
        strict: cli.strict,
        out: cli.out,
        viz: cli.viz,
        thresholds: cli.thresholds.unwrap_or_default(),
    };
    let code = match cli.command {
        Command::Validate { manifest } => commands::validate(&ctx, &manifest),
        Command::Run {
            manifest,
            input,
            output,
        } => commands::run(&ctx, &manifest, &input, &output),
        Command::Diff {
            manifest_a,
            manifest_b,
            input,
        } => commands::diff(&ctx, &manifest_a, &manifest_b, &input),
        Command::DecodeDiff {
            adapter_a,
            adapter_b,
            input,
        } => commands::decode_diff(&ctx, &adapter_a, &adapter_b, &input),
        Command::Bench(args) => commands::bench(&ctx, &args.into_config()),
        Command::Pack { dir, output } => commands::pack(&ctx, &dir, &output),
        Command::Digest { tensor } => commands::digest(&ctx, &tensor),
    };
    std::process::exit(code);
}

impl BenchArgs {
    fn into_config(self) -> pixelproof_core::bench::BenchConfig {
        use pixelproof_core::bench::{BenchConfig, InputSource};
        // clap guarantees exactly one source is present
        let source = match (self.source_dir, self.pack) {
            (Some(dir), None) => InputSource::Directory(dir),
            (None, Some(pack)) => InputSource::Pack(pack),
            _ => unreachable!("clap enforces the source group"),
        };
        BenchConfig {
            manifest_path: self.manifest,
            source,
            batch_sizes: self.batch_sizes,
            worker_counts: self.workers,
            warmup_iterations: self.warmup,
            measured_iterations: self.iters,
            seed: self.seed,
        }
    }
}
