use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use epi_core::{Angle, EstimatorKind};

#[derive(Debug, Parser)]
#[command(
    name = "epr-epi",
    version,
    about = "EPI amplitudes, Fisher geometry and estimation bounds for EPR-Bohm spin pairs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Joint probabilities P(ab|θ) at one angle or on a grid over [0, 2π].
    Probabilities(ProbabilitiesArgs),
    /// Amplitude constants, generating equation and principle residuals.
    Solve(SolveArgs),
    /// Constancy scan of the induced Fisher metric along θ.
    Metric(MetricArgs),
    /// Draw one outer sample of M joint outcomes.
    Simulate(SimulateArgs),
    /// Estimate θ from a simulated sample, optionally over replications.
    Estimate(EstimateArgs),
    /// Run the acceptance suite; exits nonzero if any criterion fails.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EstimatorChoice {
    Mle,
    Pp,
    Mm,
    Pm,
    Mp,
    All,
}

impl EstimatorChoice {
    pub fn kinds(self) -> Vec<EstimatorKind> {
        match self {
            EstimatorChoice::Mle => vec![EstimatorKind::PooledMle],
            EstimatorChoice::Pp => vec![EstimatorKind::CellPp],
            EstimatorChoice::Mm => vec![EstimatorKind::CellMm],
            EstimatorChoice::Pm => vec![EstimatorKind::CellPm],
            EstimatorChoice::Mp => vec![EstimatorKind::CellMp],
            EstimatorChoice::All => EstimatorKind::ALL.to_vec(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            EstimatorChoice::Mle => "mle",
            EstimatorChoice::Pp => "pp",
            EstimatorChoice::Mm => "mm",
            EstimatorChoice::Pm => "pm",
            EstimatorChoice::Mp => "mp",
            EstimatorChoice::All => "all",
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    /// Write the report to this file instead of stdout.
    #[arg(long, value_name = "PATH")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ModelArg {
    /// Model index: ±1 (spin ½) or ±2 (photons); the sign is the handedness.
    #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
    pub n: i32,
}

#[derive(Debug, Clone, Args)]
pub struct ThetaArg {
    /// Analyzer angle in radians (degrees with --degrees); simulate and estimate default to 1.0.
    #[arg(long, value_parser = finite_f64, allow_negative_numbers = true)]
    pub theta: Option<f64>,
    /// Read --theta in degrees.
    #[arg(long)]
    pub degrees: bool,
}

impl ThetaArg {
    pub fn angle(&self) -> Option<Angle> {
        self.theta.map(|t| if self.degrees { Angle::from_degrees(t) } else { Angle::new(t) })
    }

    pub fn angle_or(&self, default: f64) -> Angle {
        self.angle().unwrap_or(Angle::new(default))
    }
}

#[derive(Debug, Clone, Args)]
pub struct ProbabilitiesArgs {
    #[command(flatten)]
    pub model: ModelArg,
    #[command(flatten)]
    pub theta: ThetaArg,
    /// Grid intervals over [0, 2π] when no angle is given; N + 1 rows.
    #[arg(long, default_value_t = 360)]
    pub grid_points: usize,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub model: ModelArg,
    /// Grid used for the residual maxima.
    #[arg(long, default_value_t = 512)]
    pub grid_points: usize,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct MetricArgs {
    #[command(flatten)]
    pub model: ModelArg,
    /// Number of midpoints in the scan.
    #[arg(long, default_value_t = 512)]
    pub grid_points: usize,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub model: ModelArg,
    #[command(flatten)]
    pub theta: ThetaArg,
    /// Outer sample size M.
    #[arg(long, default_value_t = 10_000)]
    pub samples: u64,
    /// Master seed of the sampling stream (required).
    #[arg(long)]
    pub seed: u64,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub model: ModelArg,
    #[command(flatten)]
    pub theta: ThetaArg,
    #[arg(long, default_value_t = 10_000)]
    pub samples: u64,
    /// Master seed of the sampling stream (required).
    #[arg(long)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "all")]
    pub estimator: EstimatorChoice,
    /// Also summarize bias and variance over this many replicated samples.
    #[arg(long)]
    pub replications: Option<u64>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    /// Run only these criteria (repeatable).
    #[arg(long = "criterion", value_name = "ID", value_parser = clap::value_parser!(u8).range(1..=9))]
    pub criteria: Vec<u8>,
    /// Report format; plain pass/fail lines when omitted.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long, value_name = "PATH")]
    pub output: Option<PathBuf>,
}

fn finite_f64(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err("angle must be finite".into())
    }
}
