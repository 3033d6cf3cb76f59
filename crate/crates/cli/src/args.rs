use std::path::PathBuf;

use clap::{Args, Subcommand, ValueEnum};
use qsk_core::Error;
use serde::{Deserialize, Serialize};

/// Clause ratios: a single value, a comma list, or a range `a..b`.
///
/// Ranges use `step` when given, otherwise `points` values (spaced
/// geometrically with `log`); a bare linear range steps by 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Args)]
pub struct MuSpec {
    /// e.g. `4`, `1,2,4`, `1..6`, `0.1..1000`
    #[arg(long)]
    pub mu: String,
    #[arg(long)]
    pub step: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long)]
    pub log: bool,
}

impl MuSpec {
    pub fn values(&self) -> Result<Vec<f64>, Error> {
        let num = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::usage(format!("bad mu value `{s}`")))
        };
        let out: Vec<f64> = if let Some((a, b)) = self.mu.split_once("..") {
            let (a, b) = (num(a)?, num(b)?);
            if !(a <= b) {
                return Err(Error::usage(format!("empty mu range {a}..{b}")));
            }
            let step = match (self.step, self.points, self.log) {
                (Some(s), _, _) => Some(s),
                (None, None, false) => Some(1.0),
                _ => None,
            };
            if let Some(step) = step {
                if !(step > 0.0) {
                    return Err(Error::usage("--step must be positive"));
                }
                let count = ((b - a) / step + 1e-9).floor() as usize;
                (0..=count).map(|i| a + i as f64 * step).collect()
            } else {
                let p = self.points.unwrap_or(21).max(2);
                if self.log && a <= 0.0 {
                    return Err(Error::usage("--log needs a positive range"));
                }
                (0..p)
                    .map(|i| {
                        let t = i as f64 / (p - 1) as f64;
                        if self.log {
                            (a.ln() + t * (b.ln() - a.ln())).exp()
                        } else {
                            a + t * (b - a)
                        }
                    })
                    .collect()
            }
        } else {
            self.mu.split(',').map(num).collect::<Result<_, _>>()?
        };
        if out.iter().any(|&m| !(m >= 0.0) || !m.is_finite()) {
            return Err(Error::usage("mu values must be finite and non-negative"));
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum EnsembleArg {
    Random,
    Prespecified,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ProblemFormat {
    Dimacs,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum TableFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ExponentArg {
    #[default]
    Random,
    PrespecifiedBound,
}

impl From<ExponentArg> for qsk_core::asymptotics::ExponentKind {
    fn from(e: ExponentArg) -> Self {
        match e {
            ExponentArg::Random => Self::Random,
            ExponentArg::PrespecifiedBound => Self::PrespecifiedBound,
        }
    }
}

/// Rates optimized in a sweep. `envelope` keeps the lower of the random
/// rate and the prespecified-solution bound at each clause ratio.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum, Default)]
#[serde(rename_all = "kebab-case")]
pub enum SweepExponent {
    #[default]
    Random,
    PrespecifiedBound,
    Envelope,
}

/// Problem ensemble selection shared by sampling commands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Args)]
pub struct EnsembleArgs {
    #[arg(long)]
    pub n: u32,
    #[arg(long, default_value_t = 3)]
    pub k: u32,
    #[arg(long)]
    pub m: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = EnsembleArg::Random)]
    pub ensemble: EnsembleArg,
    /// Stored solution for the prespecified ensemble, as an integer whose
    /// bit i is the value of variable i+1.
    #[arg(long, default_value_t = 0)]
    pub solution: u64,
}

/// One step `(rho, tau)`, or the linear rule over several steps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Args)]
pub struct ScheduleArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub rho: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub tau: Option<f64>,
    /// Steps of the linear rule rho_h = rho_a + h rho_b, tau_h = tau_a + h tau_b.
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub rho_a: Option<f64>,
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    pub rho_b: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub tau_a: Option<f64>,
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    pub tau_b: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Args)]
pub struct GenArgs {
    #[command(flatten)]
    pub ensemble: EnsembleArgs,
    #[arg(long, default_value_t = 1)]
    pub count: usize,
    #[arg(long, value_enum, default_value_t = ProblemFormat::Dimacs)]
    pub format: ProblemFormat,
    /// Directory receiving the instance files.
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Args)]
pub struct SimulateArgs {
    /// Instance files (DIMACS or JSON); otherwise instances are sampled.
    #[arg(long = "input", num_args = 1..)]
    pub inputs: Vec<PathBuf>,
    #[arg(long)]
    pub n: Option<u32>,
    #[arg(long, default_value_t = 3)]
    pub k: u32,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = EnsembleArg::Random)]
    pub ensemble: EnsembleArg,
    #[arg(long, default_value_t = 0)]
    pub solution: u64,
    #[arg(long, default_value_t = 1)]
    pub samples: usize,
    /// Reject insoluble draws.
    #[arg(long)]
    pub soluble_only: bool,
    #[command(flatten)]
    pub schedule: ScheduleArgs,
    /// Search over partial assignments with this phase per unique variable.
    #[arg(long, allow_hyphen_values = true)]
    pub sigma: Option<f64>,
    /// Write the final state of the first instance (little-endian f64 pairs).
    #[arg(long)]
    pub dump_state: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = TableFormat::Csv)]
    pub format: TableFormat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Args)]
pub struct ExactArgs {
    #[arg(long)]
    pub n: u32,
    #[arg(long, default_value_t = 3)]
    pub k: u32,
    #[arg(long)]
    pub m: usize,
    #[arg(long, allow_hyphen_values = true)]
    pub rho: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub tau: f64,
    /// Probability of reaching a prespecified solution instead.
    #[arg(long)]
    pub prespecified_bound: bool,
    /// Per-(x, y, z) terms as CSV.
    #[arg(long)]
    pub dump_terms: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Args)]
pub struct DecayArgs {
    #[arg(long, default_value_t = 3)]
    pub k: u32,
    #[command(flatten)]
    pub mu: MuSpec,
    #[arg(long, allow_hyphen_values = true)]
    pub rho: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub tau: f64,
    #[arg(long, value_enum, default_value_t = ExponentArg::Random)]
    pub exponent: ExponentArg,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Args)]
pub struct OptimizeArgs {
    #[arg(long, default_value_t = 3)]
    pub k: u32,
    #[command(flatten)]
    pub mu: MuSpec,
    #[arg(long, value_enum, default_value_t = ExponentArg::Random)]
    pub exponent: ExponentArg,
    #[arg(long, default_value_t = 21)]
    pub grid: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Args)]
pub struct LimitsArgs {
    #[arg(long, default_value_t = 3)]
    pub k: u32,
    /// Clause ratios at which the strong-limit forms are checked.
    #[arg(long, value_delimiter = ',', default_value = "1000")]
    pub strong_mu: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub ensemble: EnsembleArgs,
    /// Soluble instances to evaluate.
    #[arg(long, default_value_t = 100)]
    pub count: usize,
    #[arg(long, default_value_t = 1000)]
    pub gsat_trials: usize,
    #[command(flatten)]
    pub schedule: ScheduleArgs,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Args)]
pub struct SweepArgs {
    #[arg(long, default_value_t = 3)]
    pub k: u32,
    #[command(flatten)]
    pub mu: MuSpec,
    #[arg(long, value_enum, default_value_t = SweepExponent::Random)]
    pub exponent: SweepExponent,
    /// Per-mu results are appended here as JSON lines.
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    /// Skip mu values already in the checkpoint.
    #[arg(long)]
    pub resume: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Args)]
pub struct ReplayArgs {
    /// Manifest written by an earlier run.
    pub manifest: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Subcommand)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Sample instances and write them as DIMACS or JSON files.
    Gen(GenArgs),
    /// Run the phase-and-mix search on instances and report Psoln.
    Simulate(SimulateArgs),
    /// Exact ensemble average of Psoln.
    Exact(ExactArgs),
    /// Asymptotic decay rate and prefactor at fixed parameters.
    Decay(DecayArgs),
    /// Optimize phase parameters for each clause ratio.
    Optimize(OptimizeArgs),
    /// Weak- and strong-constraint limits.
    Limits(LimitsArgs),
    /// Per-instance costs of the quantum, GSAT and unstructured methods.
    Compare(CompareArgs),
    /// Optimized rates over a grid of clause ratios, with checkpointing.
    Sweep(SweepArgs),
    /// Re-run the configuration recorded in a manifest.
    Replay(ReplayArgs),
}
