//! Command-line front end for `shearseg`.
//!
//! [`run`] parses arguments, executes one command and maps the outcome to
//! an exit code: 0 on success, 1 on usage or input errors, 2 when the
//! numerics fail (divergence, frame validation).

use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub mod codebook;
pub mod commands;
pub mod dump;
pub mod netpbm;

#[derive(Debug, Parser)]
#[command(name = "shearseg", version, about = "Shearlet transform and multi-label segmentation")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalOpts {
    /// Directory for all outputs (created if missing).
    #[arg(long, global = true, default_value = ".")]
    pub output_dir: PathBuf,
    /// Noise seed; required whenever noise is added.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long, global = true, default_value = "warn")]
    pub log_level: log::LevelFilter,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the coefficient dump and per-subband previews of a gray image.
    Transform(TransformArgs),
    /// Synthesize an image from a coefficient dump.
    Reconstruct(ReconstructArgs),
    /// Segment an image against a codebook.
    Segment(SegmentArgs),
    /// Generate a synthetic test image with its ground truth.
    Synth(SynthArgs),
    /// Mislabel rates of label maps against a ground truth.
    Compare(CompareArgs),
}

#[derive(Debug, Args)]
pub struct TransformArgs {
    pub input: PathBuf,
    /// Also dump the subband spectra (DFT order) to `spectra.shc`.
    #[arg(long)]
    pub dump_spectra: bool,
    /// Skip the preview images.
    #[arg(long)]
    pub no_previews: bool,
}

#[derive(Debug, Args)]
pub struct ReconstructArgs {
    pub dump: PathBuf,
    /// Output image; `.pfm` is written as float, anything else as PGM.
    pub output: PathBuf,
    /// PGM bit depth.
    #[arg(long, default_value_t = 8, value_parser = parse_bits)]
    pub bits: u8,
    /// Crop to `WIDTHxHEIGHT` (undoes the padding of a non-square input).
    #[arg(long, value_parser = parse_size)]
    pub crop: Option<(usize, usize)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Regularizer {
    Shearlet,
    Tv,
    Nl,
}

#[derive(Debug, Args)]
pub struct SegmentArgs {
    pub input: PathBuf,
    /// Codebook file, or inline: `0,1` (gray) or `1,0,0;0,0,1` (one label per `;`).
    #[arg(long)]
    pub codebook: String,
    #[arg(long, value_enum, default_value = "shearlet")]
    pub regularizer: Regularizer,
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Regularization weight; for shearlet a comma list `l0,l1,...` gives one weight per scale.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub lambda: Option<Vec<f64>>,
    #[arg(long)]
    pub iterations: Option<usize>,
    /// Data-term exponent.
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub p: u8,
    /// Stop early once the relative change of `u` falls below this.
    #[arg(long, default_value_t = 0.0)]
    pub tol: f64,
    /// Add Gaussian noise of this standard deviation before segmenting (needs --seed).
    #[arg(long)]
    pub noise: Option<f64>,
    #[arg(long, default_value_t = 5)]
    pub nl_patch: usize,
    #[arg(long, default_value_t = 15)]
    pub nl_window: usize,
    #[arg(long, default_value_t = 2.0)]
    pub nl_sigma: f64,
    #[arg(long, default_value_t = 5)]
    pub nl_neighbors: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SynthKindArg {
    Grid,
    Cartoon,
    Stripes,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(value_enum)]
    pub kind: SynthKindArg,
    /// Side length N (at least 16).
    #[arg(long, default_value_t = 256)]
    pub size: usize,
    /// Gaussian noise standard deviation (needs --seed).
    #[arg(long)]
    pub noise: Option<f64>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Ground-truth label map.
    #[arg(long)]
    pub truth: PathBuf,
    /// Label maps to score.
    #[arg(required = true)]
    pub maps: Vec<PathBuf>,
}

fn parse_bits(s: &str) -> Result<u8, String> {
    match s {
        "8" => Ok(8),
        "16" => Ok(16),
        _ => Err(format!("bit depth must be 8 or 16, got {s:?}")),
    }
}

fn parse_size(s: &str) -> Result<(usize, usize), String> {
    let (w, h) = s.split_once(['x', 'X']).ok_or_else(|| format!("expected WIDTHxHEIGHT, got {s:?}"))?;
    let w = w.parse().map_err(|_| format!("bad width {w:?}"))?;
    let h = h.parse().map_err(|_| format!("bad height {h:?}"))?;
    Ok((w, h))
}

/// Exit code for a failed command.
pub fn exit_code_for(err: &anyhow::Error) -> u8 {
    let numerical = err.chain().any(|e| e.downcast_ref::<shearseg::Error>().is_some_and(|e| e.is_numerical()));
    if numerical {
        2
    } else {
        1
    }
}

pub fn run<I, S>(args: I) -> ExitCode
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let _ = env_logger::Builder::new().filter_level(cli.global.log_level).try_init();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

/// Run a parsed command on a dedicated thread pool.
pub fn execute(cli: &Cli) -> anyhow::Result<()> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cli.global.threads {
        anyhow::ensure!(t > 0, "--threads must be positive");
        builder = builder.num_threads(t);
    }
    let pool = builder.build()?;
    pool.install(|| commands::dispatch(cli))
}
