use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use prodspec::kernel::RadialWeight;
use prodspec::limits::{
    corollary1_limit, corollary2_limit, corollary3_limit, corollary4_limit, ginibre_limit,
    LimitProfile, QProfile,
};
use prodspec::{EnsembleSpec, ScalingRule};

use crate::CliError;

#[derive(Parser, Debug)]
#[command(
    name = "prodspec",
    version,
    about = "Eigenvalue moduli of random matrix products",
    args_override_self = true
)]
pub struct Cli {
    /// Master seed; required by sample, validate and kstest.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Worker threads (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,

    /// Output file (a directory for `kernel --format csv`). Defaults to stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Flat key=value file; command-line flags override its entries.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Draw eigenvalue moduli through the Gamma/Beta product representation.
    #[command(args_override_self = true)]
    Sample(SampleArgs),
    /// Export a limiting radial law on a grid.
    #[command(args_override_self = true)]
    Limit(LimitCmdArgs),
    /// Two-sample KS test of the structural sampler against dense matrices.
    #[command(args_override_self = true)]
    Validate(ValidateArgs),
    /// One-sample KS test of scaled radii against a limiting law.
    #[command(args_override_self = true)]
    Kstest(KsArgs),
    /// Kernel constants, normalizing constant and the radial density grid.
    #[command(args_override_self = true)]
    Kernel(KernelArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EnsembleArg {
    Ginibre,
    Truncated,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct EnsembleArgs {
    #[arg(long, value_enum)]
    pub ensemble: EnsembleArg,
    /// Matrix size n.
    #[arg(long)]
    pub n: usize,
    /// Number of factors.
    #[arg(long)]
    pub m: Option<usize>,
    /// Comma-separated truncation gaps l_j = n_j - n.
    #[arg(long)]
    pub gaps: Option<String>,
    /// A single gap shared by all m factors.
    #[arg(long)]
    pub gap: Option<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScalingArg {
    None,
    GinibrePower,
    TruncatedPower,
    Linear,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct ScalingArgs {
    #[arg(long, value_enum, default_value = "none")]
    pub scaling: ScalingArg,
    /// Exponent gamma_n for truncated-power scaling.
    #[arg(long)]
    pub gamma: Option<f64>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SampleArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub ensemble: EnsembleArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub scaling: ScalingArgs,
    /// Independent replicates, one random stream each.
    #[arg(long, default_value_t = 1)]
    pub reps: usize,
    /// Attach uniform angles.
    #[arg(long)]
    pub angles: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RegimeArg {
    Ginibre,
    Cor1,
    Cor2,
    Cor3,
    Cor4,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct LimitArgs {
    #[arg(long, value_enum)]
    pub regime: RegimeArg,
    /// cor1: comma-separated limits of n / n_j.
    #[arg(long)]
    pub alphas: Option<String>,
    /// cor2: constant q.
    #[arg(long)]
    pub q_const: Option<f64>,
    /// cor2: `intercept,slope` of a linear q.
    #[arg(long)]
    pub q_linear: Option<String>,
    /// cor2: CSV file with `t,q` rows.
    #[arg(long)]
    pub q_table: Option<PathBuf>,
    /// cor3: limit of the total gap mass; `inf` allowed.
    #[arg(long)]
    pub beta: Option<String>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct LimitCmdArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub limit: LimitArgs,
    /// Number of factors for the ginibre regime.
    #[arg(long)]
    pub m: Option<usize>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct ValidateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub ensemble: EnsembleArgs,
    /// Ensemble for the dense-matrix side; defaults to the structural one.
    #[arg(long, value_enum)]
    pub oracle_ensemble: Option<EnsembleArg>,
    #[arg(long)]
    pub oracle_m: Option<usize>,
    #[arg(long)]
    pub oracle_gaps: Option<String>,
    #[arg(long)]
    pub oracle_gap: Option<u64>,
    /// Draws per side.
    #[arg(long, default_value_t = 4000)]
    pub draws: usize,
    #[arg(long, default_value_t = 0.03)]
    pub threshold: f64,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct KsArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub ensemble: EnsembleArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub scaling: ScalingArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub limit: LimitArgs,
    /// Independent draws pooled into the empirical measure.
    #[arg(long, default_value_t = 1)]
    pub draws: usize,
    #[arg(long, default_value_t = 0.05)]
    pub threshold: f64,
    /// Threshold for the angular test; defaults to `threshold`.
    #[arg(long)]
    pub angular_threshold: Option<f64>,
    /// Arc law only: required mass of scaled radii in [0.9, 1.1].
    #[arg(long, default_value_t = 0.95)]
    pub arc_mass: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightArg {
    Ginibre,
    Truncated,
    Table,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct KernelArgs {
    #[arg(long, value_enum)]
    pub weight: WeightArg,
    /// Gap l of the truncated weight.
    #[arg(long)]
    pub l: Option<u64>,
    /// CSV file with `x,phi` rows.
    #[arg(long)]
    pub weight_table: Option<PathBuf>,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 2001)]
    pub grid_points: usize,
    /// Right end of the P_n grid; defaults to the support bound, or
    /// sqrt(n) + 8 for the Gaussian weight.
    #[arg(long)]
    pub r_max: Option<f64>,
}

pub fn parse_list<T: std::str::FromStr>(name: &str, text: &str) -> Result<Vec<T>, CliError>
where
    T::Err: std::fmt::Display,
{
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<T>()
                .map_err(|e| CliError::Usage(format!("--{name}: cannot parse `{}`: {e}", s.trim())))
        })
        .collect()
}

fn build_spec(
    kind: EnsembleArg,
    n: usize,
    m: Option<usize>,
    gaps: Option<&str>,
    gap: Option<u64>,
    prefix: &str,
) -> Result<EnsembleSpec, CliError> {
    let spec = match kind {
        EnsembleArg::Ginibre => {
            if gaps.is_some() || gap.is_some() {
                return Err(CliError::Usage(format!(
                    "--{prefix}gaps/--{prefix}gap apply to truncated ensembles only"
                )));
            }
            EnsembleSpec::ginibre(n, m.unwrap_or(1))?
        }
        EnsembleArg::Truncated => match (gaps, gap) {
            (Some(list), None) => {
                let gaps: Vec<u64> = parse_list(&format!("{prefix}gaps"), list)?;
                if let Some(m) = m {
                    if m != gaps.len() {
                        return Err(CliError::Usage(format!(
                            "--{prefix}m={m} disagrees with {} entries in --{prefix}gaps",
                            gaps.len()
                        )));
                    }
                }
                EnsembleSpec::truncated(n, gaps)?
            }
            (None, Some(l)) => EnsembleSpec::truncated_uniform(n, m.unwrap_or(1), l)?,
            (Some(_), Some(_)) => {
                return Err(CliError::Usage(format!(
                    "give either --{prefix}gaps or --{prefix}gap, not both"
                )))
            }
            (None, None) => {
                return Err(CliError::Usage(format!(
                    "truncated ensembles need --{prefix}gaps or --{prefix}gap"
                )))
            }
        },
    };
    Ok(spec)
}

impl EnsembleArgs {
    pub fn spec(&self) -> Result<EnsembleSpec, CliError> {
        build_spec(
            self.ensemble,
            self.n,
            self.m,
            self.gaps.as_deref(),
            self.gap,
            "",
        )
    }
}

impl ValidateArgs {
    pub fn oracle_spec(&self, structural: &EnsembleSpec) -> Result<EnsembleSpec, CliError> {
        match self.oracle_ensemble {
            None => {
                if self.oracle_m.is_some()
                    || self.oracle_gaps.is_some()
                    || self.oracle_gap.is_some()
                {
                    return Err(CliError::Usage(
                        "--oracle-* parameters need --oracle-ensemble".into(),
                    ));
                }
                Ok(structural.clone())
            }
            Some(kind) => build_spec(
                kind,
                self.ensemble.n,
                self.oracle_m,
                self.oracle_gaps.as_deref(),
                self.oracle_gap,
                "oracle-",
            ),
        }
    }
}

impl ScalingArgs {
    pub fn rule(&self, spec: &EnsembleSpec) -> Result<Option<ScalingRule>, CliError> {
        if self.gamma.is_some() && self.scaling != ScalingArg::TruncatedPower {
            return Err(CliError::Usage(
                "--gamma applies to truncated-power scaling only".into(),
            ));
        }
        Ok(match self.scaling {
            ScalingArg::None => None,
            ScalingArg::GinibrePower => Some(ScalingRule::ginibre_power(spec)?),
            ScalingArg::TruncatedPower => {
                let gamma = self.gamma.ok_or_else(|| {
                    CliError::Usage("truncated-power scaling needs --gamma".into())
                })?;
                Some(ScalingRule::truncated_power(spec, gamma)?)
            }
            ScalingArg::Linear => Some(ScalingRule::linear_for(spec)),
        })
    }
}

impl LimitArgs {
    /// `m` is only read by the ginibre regime.
    pub fn profile(&self, m: Option<usize>) -> Result<LimitProfile, CliError> {
        let unused = |flag: &str, present: bool| -> Result<(), CliError> {
            if present {
                Err(CliError::Usage(
                    format!("--{flag} does not apply to regime {:?}", self.regime).to_lowercase(),
                ))
            } else {
                Ok(())
            }
        };
        let has_q = self.q_const.is_some() || self.q_linear.is_some() || self.q_table.is_some();
        if self.regime != RegimeArg::Cor1 {
            unused("alphas", self.alphas.is_some())?;
        }
        if self.regime != RegimeArg::Cor2 {
            unused("q-const/q-linear/q-table", has_q)?;
        }
        if self.regime != RegimeArg::Cor3 {
            unused("beta", self.beta.is_some())?;
        }
        let profile = match self.regime {
            RegimeArg::Ginibre => {
                ginibre_limit(m.ok_or_else(|| CliError::Usage("regime ginibre needs --m".into()))?)?
            }
            RegimeArg::Cor1 => {
                let text = self
                    .alphas
                    .as_deref()
                    .ok_or_else(|| CliError::Usage("regime cor1 needs --alphas".into()))?;
                corollary1_limit(&parse_list::<f64>("alphas", text)?)?
            }
            RegimeArg::Cor2 => corollary2_limit(self.q_profile()?)?,
            RegimeArg::Cor3 => {
                let text = self
                    .beta
                    .as_deref()
                    .ok_or_else(|| CliError::Usage("regime cor3 needs --beta".into()))?;
                let beta = match text.trim() {
                    "inf" | "infinity" | "+inf" => f64::INFINITY,
                    t => t
                        .parse::<f64>()
                        .map_err(|e| CliError::Usage(format!("--beta: cannot parse `{t}`: {e}")))?,
                };
                if beta.is_nan() || (beta.is_infinite() && beta < 0.0) {
                    return Err(CliError::Usage(format!(
                        "--beta must be >= 0 or inf, got {text}"
                    )));
                }
                corollary3_limit(beta)?
            }
            RegimeArg::Cor4 => corollary4_limit(),
        };
        Ok(profile)
    }

    fn q_profile(&self) -> Result<QProfile, CliError> {
        match (self.q_const, &self.q_linear, &self.q_table) {
            (Some(c), None, None) => Ok(QProfile::constant(c)?),
            (None, Some(text), None) => {
                let v: Vec<f64> = parse_list("q-linear", text)?;
                if v.len() != 2 {
                    return Err(CliError::Usage(
                        "--q-linear expects `intercept,slope`".into(),
                    ));
                }
                Ok(QProfile::linear(v[0], v[1])?)
            }
            (None, None, Some(path)) => {
                let text = fs::read_to_string(path).map_err(|e| {
                    CliError::Usage(format!("cannot read q table {}: {e}", path.display()))
                })?;
                Ok(QProfile::from_csv(&text)?)
            }
            (None, None, None) => Err(CliError::Usage(
                "regime cor2 needs one of --q-const, --q-linear, --q-table".into(),
            )),
            _ => Err(CliError::Usage(
                "give only one of --q-const, --q-linear, --q-table".into(),
            )),
        }
    }
}

impl KernelArgs {
    pub fn weight(&self) -> Result<RadialWeight, CliError> {
        match self.weight {
            WeightArg::Ginibre => Ok(RadialWeight::GinibreM1),
            WeightArg::Truncated => {
                let l = self
                    .l
                    .ok_or_else(|| CliError::Usage("--weight truncated needs --l".into()))?;
                Ok(RadialWeight::truncated(l)?)
            }
            WeightArg::Table => {
                let path = self
                    .weight_table
                    .as_ref()
                    .ok_or_else(|| CliError::Usage("--weight table needs --weight-table".into()))?;
                let text = fs::read_to_string(path).map_err(|e| {
                    CliError::Usage(format!("cannot read weight table {}: {e}", path.display()))
                })?;
                Ok(RadialWeight::from_csv(&text)?)
            }
        }
    }
}
