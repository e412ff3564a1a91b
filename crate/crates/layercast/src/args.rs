//! Command-line grammar.

use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "layercast",
    version,
    about = "Optimal layered power distribution over slow fading"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one configuration and write its profiles.
    #[command(after_help = SOLVE_COLUMNS)]
    Solve(SolveArgs),
    /// Tabulate minimum expected distortion and bounds over an SNR range.
    #[command(after_help = SWEEP_COLUMNS)]
    Sweep(SweepArgs),
    /// Write the optimal power density and cumulative power over gain.
    #[command(name = "power-dist", after_help = POWER_DIST_COLUMNS)]
    PowerDist(PowerDistArgs),
    /// Cross-check the continuum, discrete, brute-force and Monte Carlo
    /// solvers on one configuration. Exits with 4 if a check fails.
    #[command(after_help = COMPARE_COLUMNS)]
    Compare(CompareArgs),
}

const SOLVE_COLUMNS: &str = "\
Tables (CSV column order):
  summary  snr_db,power,bandwidth_ratio,diversity,mean,gamma_o,gamma_p,expected_distortion,csit,infinite_diversity,flags
  profile  gamma,cumulative_power,power_density,distortion,weight
With a discrete distribution the tables are instead:
  summary  snr_db,power,bandwidth_ratio,states,expected_distortion,csit,flags
  layers   gamma,probability,cumulative_power,layer_power,rate_bits,weight";

const SWEEP_COLUMNS: &str = "\
Tables (CSV column order):
  sweep     diversity,snr_db,power,expected_distortion,csit,infinite_diversity,gamma_o,gamma_p[,mc_mean,mc_std_error]
  exponent  diversity,exponent";

const POWER_DIST_COLUMNS: &str = "\
Tables (CSV column order):
  profile  gamma,cumulative_power,power_density[,capacity_max_cumulative_power,capacity_max_power_density]
  summary  snr_db,power,bandwidth_ratio,gamma_o,gamma_p,expected_distortion";

const COMPARE_COLUMNS: &str = "\
Tables (CSV column order):
  legs    method,expected_distortion,std_error,relative_deviation,detail
  checks  check,value,tolerance,pass
Checks: discrete vs continuum relative deviation < 1e-3; recursion vs brute force
absolute deviation < 1e-5 (with --layers); |Monte Carlo - continuum| < 3 standard
errors (with --mc-samples).";

/// Flags shared by every subcommand.
#[derive(Debug, Args)]
pub struct Common {
    /// Fading law: `erlang:L=<int>,mean=<float>` or `discrete:@<path>` (CSV
    /// with header `gamma,probability`).
    #[arg(long, value_name = "SPEC")]
    pub dist: DistSpec,
    /// Channel uses per source symbol, b > 0.
    #[arg(long, value_name = "B")]
    pub bandwidth_ratio: f64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Output file. Secondary tables go beside it as `<stem>.<table>.csv`
    /// and the manifest with a timestamp as `<stem>.manifest.json`.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub common: Common,
    /// Transmit SNR in dB; P = 10^(dB/10).
    #[arg(long, allow_negative_numbers = true, value_name = "DB")]
    pub snr_db: f64,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: Common,
    /// SNR grid `lo:hi:step` in dB, endpoints included.
    #[arg(long, allow_hyphen_values = true, value_name = "LO:HI:STEP")]
    pub snr_db_range: SnrRange,
    /// Comma-separated diversity orders L; defaults to the order in `--dist`.
    #[arg(long, value_delimiter = ',', value_name = "L,...")]
    pub diversity: Vec<u32>,
    /// Add a Monte Carlo estimate with this many samples at every point.
    #[arg(long, value_name = "N")]
    pub mc_samples: Option<u64>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct PowerDistArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, allow_negative_numbers = true, value_name = "DB")]
    pub snr_db: f64,
    /// Add the capacity-maximizing allocation for comparison.
    #[arg(long)]
    pub capacity_max: bool,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, allow_negative_numbers = true, value_name = "DB")]
    pub snr_db: f64,
    /// Also solve an M-layer stack (M ≤ 4) at the fading quantiles k/M and
    /// check the recursion against brute force.
    #[arg(long, value_name = "M")]
    pub layers: Option<usize>,
    /// State spacing of the fine discretization.
    #[arg(long, default_value_t = 1e-3, value_name = "STEP")]
    pub delta_gamma: f64,
    /// Largest discretized gain; defaults to 12 times the mean gain.
    #[arg(long, value_name = "GAIN")]
    pub gamma_max: Option<f64>,
    #[arg(long, value_name = "N")]
    pub mc_samples: Option<u64>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DistSpec {
    Erlang { order: u32, mean: f64 },
    Discrete { path: PathBuf },
}

impl FromStr for DistSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (kind, rest) = s
            .split_once(':')
            .ok_or_else(|| format!("`{s}`: expected `erlang:...` or `discrete:@path`"))?;
        match kind {
            "erlang" => {
                let (mut order, mut mean) = (None, None);
                for item in rest.split(',') {
                    let (key, value) = item
                        .split_once('=')
                        .ok_or_else(|| format!("`{item}`: expected key=value"))?;
                    match key.trim() {
                        "L" => order = Some(value.trim().parse::<u32>().map_err(|e| format!("L: {e}"))?),
                        "mean" => mean = Some(value.trim().parse::<f64>().map_err(|e| format!("mean: {e}"))?),
                        other => return Err(format!("unknown erlang parameter `{other}`")),
                    }
                }
                Ok(DistSpec::Erlang {
                    order: order.ok_or("erlang: L is required")?,
                    mean: mean.unwrap_or(1.0),
                })
            }
            "discrete" => {
                let path = rest
                    .strip_prefix('@')
                    .filter(|p| !p.is_empty())
                    .ok_or("discrete: expected `discrete:@<path>`")?;
                Ok(DistSpec::Discrete { path: path.into() })
            }
            other => Err(format!("unknown distribution `{other}`")),
        }
    }
}

/// Inclusive SNR grid in dB.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnrRange {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl SnrRange {
    /// `lo + k·step` for every `k` that stays within `hi` (with a small
    /// allowance for rounding in the step).
    pub fn points(&self) -> Vec<f64> {
        let n = ((self.hi - self.lo) / self.step + 1e-9).floor() as usize;
        (0..=n).map(|k| self.lo + k as f64 * self.step).collect()
    }
}

impl FromStr for SnrRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [lo, hi, step] = parts.as_slice() else {
            return Err(format!("`{s}`: expected lo:hi:step"));
        };
        let num = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("`{v}`: {e}"));
        let r = SnrRange {
            lo: num(lo)?,
            hi: num(hi)?,
            step: num(step)?,
        };
        if !(r.lo.is_finite() && r.hi.is_finite()) || !(r.step > 0.0 && r.step.is_finite()) || r.hi < r.lo {
            return Err(format!("`{s}`: need finite lo ≤ hi and step > 0"));
        }
        Ok(r)
    }
}
