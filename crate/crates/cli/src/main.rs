//! `siftsvc`: detect keypoints, match image pairs, or run the HTTP service.
//!
//! Exit codes: 0 success, 1 unreadable input or I/O failure, 2 bad flags or
//! parameters.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "siftsvc",
    version,
    about = "Scale-invariant keypoint detection and matching"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Detect keypoints and descriptors in one image.
    Detect(DetectArgs),
    /// Detect in two images and match their descriptors.
    Match(MatchArgs),
    /// Run the HTTP service.
    Serve(ServeArgs),
}

/// Detector overrides, spelled like the JSON `parameters` fields.
#[derive(Args, Clone, Default)]
pub struct DetectorFlags {
    #[arg(
        long = "scales_per_octave",
        visible_alias = "scales-per-octave",
        value_name = "N"
    )]
    scales_per_octave: Option<String>,
    #[arg(long = "sigma0", value_name = "SIGMA")]
    sigma0: Option<String>,
    #[arg(
        long = "assumed_blur",
        visible_alias = "assumed-blur",
        value_name = "SIGMA"
    )]
    assumed_blur: Option<String>,
    #[arg(long = "upsample", value_name = "BOOL")]
    upsample: Option<String>,
    /// Octave count, or "auto".
    #[arg(long = "num_octaves", visible_alias = "num-octaves", value_name = "N")]
    num_octaves: Option<String>,
    #[arg(
        long = "contrast_threshold",
        visible_alias = "contrast-threshold",
        value_name = "T"
    )]
    contrast_threshold: Option<String>,
    #[arg(long = "edge_ratio", visible_alias = "edge-ratio", value_name = "R")]
    edge_ratio: Option<String>,
    #[arg(long = "border", value_name = "PX")]
    border: Option<String>,
    #[arg(
        long = "max_refine_steps",
        visible_alias = "max-refine-steps",
        value_name = "N"
    )]
    max_refine_steps: Option<String>,
}

impl DetectorFlags {
    fn fields(&self) -> Vec<(&'static str, &str)> {
        [
            ("scales_per_octave", &self.scales_per_octave),
            ("sigma0", &self.sigma0),
            ("assumed_blur", &self.assumed_blur),
            ("upsample", &self.upsample),
            ("num_octaves", &self.num_octaves),
            ("contrast_threshold", &self.contrast_threshold),
            ("edge_ratio", &self.edge_ratio),
            ("border", &self.border),
            ("max_refine_steps", &self.max_refine_steps),
        ]
        .into_iter()
        .filter_map(|(name, v)| v.as_deref().map(|v| (name, v)))
        .collect()
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DetectFormat {
    Json,
    /// Classic keypoint text file: "N 128" header, then per keypoint
    /// "y x sigma orientation" and the descriptor bytes.
    Lowe,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MatchFormat {
    Tsv,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PrecisionArg {
    Six,
    Full,
}

impl From<PrecisionArg> for siftsvc_core::report::Precision {
    fn from(p: PrecisionArg) -> Self {
        match p {
            PrecisionArg::Six => Self::Six,
            PrecisionArg::Full => Self::Full,
        }
    }
}

#[derive(Args)]
pub struct DetectArgs {
    image: PathBuf,
    #[arg(long, value_enum, default_value = "json")]
    format: DetectFormat,
    /// Write the result here instead of stdout.
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Also write a PPM with keypoint circles and orientation ticks.
    #[arg(long, value_name = "PATH")]
    overlay: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "six")]
    precision: PrecisionArg,
    #[command(flatten)]
    detector: DetectorFlags,
}

#[derive(Args)]
pub struct MatchArgs {
    image_a: PathBuf,
    image_b: PathBuf,
    #[arg(long, visible_alias = "ratio_threshold", value_name = "R")]
    ratio: Option<String>,
    #[arg(long = "cross_check", visible_alias = "cross-check")]
    cross_check: bool,
    #[arg(long, value_enum, default_value = "tsv")]
    format: MatchFormat,
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Also write a side-by-side PPM with match lines.
    #[arg(long, value_name = "PATH")]
    overlay: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "six")]
    precision: PrecisionArg,
    #[command(flatten)]
    detector: DetectorFlags,
}

#[derive(Args)]
pub struct ServeArgs {
    /// Port to listen on; 0 picks a free one. Defaults to SIFTSVC_PORT or 8080.
    #[arg(long)]
    port: Option<u16>,
    #[arg(long, default_value = "0.0.0.0")]
    host: std::net::IpAddr,
    /// Concurrent detections; defaults to SIFTSVC_WORKERS or the CPU count.
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long = "max_upload_bytes", visible_alias = "max-upload-bytes")]
    max_upload_bytes: Option<usize>,
    /// Directory with the web client; defaults to SIFTSVC_STATIC_DIR.
    #[arg(long = "static_dir", visible_alias = "static-dir")]
    static_dir: Option<PathBuf>,
}

/// A failure with its exit code.
pub enum Failure {
    Input(String),
    Usage(String),
}

impl Failure {
    fn report(self) -> ExitCode {
        let (code, message) = match self {
            Failure::Input(m) => (1, m),
            Failure::Usage(m) => (2, m),
        };
        eprintln!("siftsvc: {message}");
        ExitCode::from(code)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Detect(args) => commands::detect(args),
        Command::Match(args) => commands::match_images(args),
        Command::Serve(args) => commands::serve(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => f.report(),
    }
}
