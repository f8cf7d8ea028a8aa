use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gftsvd::framing::{FramingConfig, WindowKind};

use crate::error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(
    name = "gftsvd",
    version,
    about = "GFT-SVD speech enhancement experiments"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decompose A_k and write the canonical basis file.
    Basis(BasisArgs),
    /// Enhance one noisy WAV with an oracle, trained or unity mask.
    Enhance(EnhanceArgs),
    /// Oracle-mask sweep over k and transforms for every manifest entry.
    Compare(CompareArgs),
    /// Export a spectrogram as CSV and a PGM heatmap.
    Render(RenderArgs),
    /// Train the mask estimator on a manifest.
    Train(TrainArgs),
    /// Generate the synthetic fixture set.
    Fixtures(FixturesArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, ValueEnum)]
pub enum Transform {
    GftSvd,
    GftEvd,
    Stft,
}

impl Transform {
    pub const ALL: [Transform; 3] = [Transform::GftSvd, Transform::GftEvd, Transform::Stft];

    pub fn name(self) -> &'static str {
        match self {
            Transform::GftSvd => "gft-svd",
            Transform::GftEvd => "gft-evd",
            Transform::Stft => "stft",
        }
    }
}

impl fmt::Display for Transform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Mask clip bound: a positive number or `none`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Clip(pub Option<f64>);

impl FromStr for Clip {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("none") {
            return Ok(Clip(None));
        }
        match s.parse::<f64>() {
            Ok(v) if v > 0.0 && v.is_finite() => Ok(Clip(Some(v))),
            _ => Err(format!("expected a positive number or `none`, got `{s}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, Args)]
pub struct FramingArgs {
    /// Analysis window length in milliseconds.
    #[arg(long, default_value_t = 25.0)]
    pub win_ms: f64,
    /// Hop size in milliseconds.
    #[arg(long, default_value_t = 6.25)]
    pub hop_ms: f64,
    #[arg(long, default_value_t = 16_000)]
    pub sample_rate: u32,
    #[arg(long, value_enum, default_value_t = Window::Hann)]
    pub window: Window,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Window {
    /// Periodic Hann.
    Hann,
    /// No tapering.
    Rect,
}

impl FramingArgs {
    pub fn config(&self, transform_len: usize) -> CliResult<FramingConfig> {
        Ok(FramingConfig::from_millis(
            self.sample_rate,
            self.win_ms,
            self.hop_ms,
            transform_len,
            match self.window {
                Window::Hann => WindowKind::HannPeriodic,
                Window::Rect => WindowKind::Rectangular,
            },
        )?)
    }
}

#[derive(Debug, Clone, Args)]
pub struct BasisArgs {
    #[arg(long, default_value_t = 512)]
    pub n: usize,
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EnhanceMode {
    /// Ratio mask against `--clean`.
    Oracle,
    /// Trained estimator from `--checkpoint`.
    Model,
    /// All-ones mask.
    Unity,
}

#[derive(Debug, Clone, Args)]
pub struct EnhanceArgs {
    #[arg(long)]
    pub noisy: PathBuf,
    /// Clean reference: the oracle target, and enables metrics in every mode.
    #[arg(long)]
    pub clean: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = EnhanceMode::Oracle)]
    pub mode: EnhanceMode,
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    /// Basis file (required for gft-svd).
    #[arg(long)]
    pub basis: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Transform::GftSvd)]
    pub transform: Transform,
    /// Transform length for gft-evd and stft.
    #[arg(long, default_value_t = 512)]
    pub n: usize,
    /// Neighbourhood size for gft-evd.
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    #[arg(long, default_value = "2")]
    pub clip: Clip,
    #[command(flatten)]
    pub framing: FramingArgs,
    /// Enhanced WAV (float32).
    #[arg(long)]
    pub out: PathBuf,
    /// Metrics CSV; printed to stdout when omitted.
    #[arg(long)]
    pub metrics: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Directory holding `basis_n{N}_k{K}.gftb` files.
    #[arg(long)]
    pub basis: PathBuf,
    #[arg(long, default_value_t = 512)]
    pub n: usize,
    #[arg(long, value_delimiter = ',', default_values_t = [1, 3, 5, 7])]
    pub k: Vec<usize>,
    #[arg(long, value_delimiter = ',', value_enum, default_values_t = Transform::ALL)]
    pub transform: Vec<Transform>,
    #[arg(long, default_value = "2")]
    pub clip: Clip,
    /// Mixing seed; entry `i` is mixed with `seed + i`.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub framing: FramingArgs,
    /// Worker threads (defaults to all cores).
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Results CSV; timings go to `<out stem>.timing.csv`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct RenderArgs {
    /// WAV file, or a spectrogram CSV previously written by this tool.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub basis: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Transform::GftSvd)]
    pub transform: Transform,
    #[arg(long, default_value_t = 512)]
    pub n: usize,
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    #[command(flatten)]
    pub framing: FramingArgs,
    /// Output prefix: writes `<out>.csv` and `<out>.pgm` (`.real.pgm`/`.imag.pgm` for complex spectra).
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub basis: PathBuf,
    #[arg(long, default_value_t = 200)]
    pub steps: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub lr: f64,
    #[arg(long, default_value_t = 1)]
    pub batch_size: usize,
    #[arg(long, default_value_t = 256)]
    pub hidden: usize,
    /// Output scale of the estimator's `c·tanh`.
    #[arg(long, default_value = "2")]
    pub clip: Clip,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub framing: FramingArgs,
    /// Checkpoint path.
    #[arg(long)]
    pub out: PathBuf,
    /// Per-step loss CSV; defaults to `<out stem>.loss.csv`.
    #[arg(long)]
    pub loss_log: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct FixturesArgs {
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 10)]
    pub count: usize,
    #[arg(long, default_value_t = 2024)]
    pub seed: u64,
    #[arg(long, default_value_t = 1.0)]
    pub clean_secs: f64,
    #[arg(long, default_value_t = 3.0)]
    pub noise_secs: f64,
    #[arg(long, default_value_t = 0.0)]
    pub snr: f64,
}

pub(crate) fn require<T: Clone>(v: &Option<T>, flag: &str, why: &str) -> CliResult<T> {
    v.clone()
        .ok_or_else(|| CliError::Usage(format!("{flag} is required {why}")))
}
