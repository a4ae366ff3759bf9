//! Run configuration: one JSON document, with command-line flags layered on top.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use gammareg::bayes::{McmcConfig, ProposalMode};
use gammareg::estimators::RidgePenalty;
use gammareg::restrictions::{LinearRestrictions, Sense};
use gammareg::simulation::ScenarioGrid;
use gammareg::{Estimator, MleMode};
use serde::{Deserialize, Serialize};

use crate::data::INTERCEPT;
use crate::error::CliError;

pub const DEFAULT_SEED: u64 = 20_240_601;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Fit,
    Simulate,
    Diagnose,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Fit => "fit",
            Command::Simulate => "simulate",
            Command::Diagnose => "diagnose",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    /// Directory that receives every output file.
    pub path: PathBuf,
    pub format: Format,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self { path: PathBuf::from("gammareg-out"), format: Format::Csv }
    }
}

/// Known precision, or `"pearson"` for the moment estimate from the MLE fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ZetaSpec {
    Value(f64),
    Method(String),
}

/// Restriction coefficients, either dense (length p, intercept first when
/// present) or keyed by coefficient name with zeros elsewhere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Coeffs {
    Dense(Vec<f64>),
    Named(BTreeMap<String, f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RestrictionRow {
    pub coeffs: Coeffs,
    #[serde(default)]
    pub bound: f64,
    #[serde(default = "default_sense")]
    pub sense: Sense,
}

fn default_sense() -> Sense {
    Sense::Le
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub command: Option<Command>,
    pub data: Option<PathBuf>,
    pub response: Option<String>,
    /// `None` means every column except the response.
    pub covariates: Option<Vec<String>>,
    pub intercept: bool,
    pub zeta: Option<ZetaSpec>,
    pub estimators: Option<Vec<Estimator>>,
    pub restrictions: Vec<RestrictionRow>,
    /// Penalty for the `custom-ridge` estimator.
    pub ridge_k: Option<RidgePenalty>,
    pub mcmc: Option<McmcConfig>,
    pub mle_mode: Option<MleMode>,
    pub seed: Option<u64>,
    pub output: OutputSpec,
    pub threads: Option<usize>,
    pub standardize: bool,
    /// Bootstrap replicates for the goodness-of-fit p-value.
    pub bootstrap: usize,
    /// Study grid for `simulate`.
    pub grid: Option<ScenarioGrid>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            command: None,
            data: None,
            response: None,
            covariates: None,
            intercept: true,
            zeta: None,
            estimators: None,
            restrictions: Vec::new(),
            ridge_k: None,
            mcmc: None,
            mle_mode: None,
            seed: None,
            output: OutputSpec::default(),
            threads: None,
            standardize: false,
            bootstrap: gammareg::diagnostics::DEFAULT_BOOTSTRAP,
            grid: None,
        }
    }
}

/// Flags shared by every subcommand; each one overrides the matching config key.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct Overrides {
    /// JSON configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Input CSV.
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub response: Option<String>,
    /// Comma-separated covariate columns.
    #[arg(long, value_delimiter = ',')]
    pub covariates: Option<Vec<String>>,
    /// Leave out the intercept column.
    #[arg(long)]
    pub no_intercept: bool,
    /// Precision ζ, or `pearson`.
    #[arg(long)]
    pub zeta: Option<String>,
    /// Comma-separated estimators (MLE, GRE1, GRE2, custom-ridge, BEUGRC, BEGRC).
    #[arg(long, value_delimiter = ',')]
    pub estimators: Option<Vec<String>>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// paper-faithful or likelihood-consistent.
    #[arg(long)]
    pub mle_mode: Option<String>,
    /// paper-faithful-tn or exact-indicator-rw.
    #[arg(long)]
    pub proposal_mode: Option<String>,
    #[arg(long)]
    pub n_iter: Option<usize>,
    #[arg(long)]
    pub burn_in: Option<usize>,
    #[arg(long)]
    pub proposal_scale: Option<f64>,
    #[arg(long)]
    pub threads: Option<usize>,
    /// Centre and scale covariates before fitting.
    #[arg(long)]
    pub standardize: bool,
    #[arg(long)]
    pub bootstrap: Option<usize>,
    /// Replications per grid cell (simulate).
    #[arg(long)]
    pub replications: Option<usize>,
}

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| bad(format!("{}: {e}", path.display())))
    }

    /// Config file (if any) with `flags` applied, checked against `command`.
    pub fn resolve(command: Command, flags: &Overrides) -> Result<Self, CliError> {
        let mut cfg = match &flags.config {
            Some(p) => Self::from_file(p)?,
            None => Self::default(),
        };
        if let Some(c) = cfg.command {
            if c != command {
                return Err(bad(format!("config is for `{}`, not `{}`", c.name(), command.name())));
            }
        }
        cfg.command = Some(command);
        cfg.apply(flags)?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn apply(&mut self, f: &Overrides) -> Result<(), CliError> {
        if let Some(v) = &f.data {
            self.data = Some(v.clone());
        }
        if let Some(v) = &f.response {
            self.response = Some(v.clone());
        }
        if let Some(v) = &f.covariates {
            self.covariates = Some(v.clone());
        }
        if f.no_intercept {
            self.intercept = false;
        }
        if let Some(v) = &f.zeta {
            self.zeta = Some(match v.parse::<f64>() {
                Ok(z) => ZetaSpec::Value(z),
                Err(_) => ZetaSpec::Method(v.clone()),
            });
        }
        if let Some(v) = &f.estimators {
            let parsed = v
                .iter()
                .map(|s| s.parse::<Estimator>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| bad(e.to_string()))?;
            self.estimators = Some(parsed);
        }
        if let Some(v) = f.seed {
            self.seed = Some(v);
        }
        if let Some(v) = &f.output {
            self.output.path = v.clone();
        }
        if let Some(v) = f.format {
            self.output.format = v;
        }
        if let Some(v) = &f.mle_mode {
            self.mle_mode = Some(v.parse().map_err(|e: gammareg::Error| bad(e.to_string()))?);
        }
        if f.proposal_mode.is_some() || f.n_iter.is_some() || f.burn_in.is_some() || f.proposal_scale.is_some() {
            let base = match self.command {
                Some(Command::Simulate) => self.grid.as_ref().map(|g| g.mcmc),
                _ => None,
            };
            let mut m = self.mcmc.or(base).unwrap_or_default();
            if let Some(v) = &f.proposal_mode {
                m.proposal_mode = v.parse::<ProposalMode>().map_err(|e| bad(e.to_string()))?;
            }
            if let Some(v) = f.n_iter {
                m.n_iter = v;
            }
            if let Some(v) = f.burn_in {
                m.burn_in = v;
            }
            if let Some(v) = f.proposal_scale {
                m.proposal_scale = v;
            }
            self.mcmc = Some(m);
        }
        if let Some(v) = f.threads {
            self.threads = Some(v);
        }
        if f.standardize {
            self.standardize = true;
        }
        if let Some(v) = f.bootstrap {
            self.bootstrap = v;
        }
        if let Some(v) = f.replications {
            self.grid.get_or_insert_with(ScenarioGrid::default).replications = v;
        }
        Ok(())
    }

    fn validate(&self) -> Result<(), CliError> {
        if let Some(ZetaSpec::Value(z)) = &self.zeta {
            if !(*z > 0.0) || !z.is_finite() {
                return Err(bad(format!("zeta must be positive, got {z}")));
            }
        }
        if let Some(ZetaSpec::Method(m)) = &self.zeta {
            if m != "pearson" {
                return Err(bad(format!("zeta must be a number or \"pearson\", got \"{m}\"")));
            }
        }
        if let Some(m) = &self.mcmc {
            m.validate().map_err(|e| bad(e.to_string()))?;
        }
        if self.threads == Some(0) {
            return Err(bad("threads must be at least 1"));
        }
        match self.command {
            Some(Command::Fit) | Some(Command::Diagnose) => {
                if self.data.is_none() {
                    return Err(bad("`data` is required"));
                }
                if self.response.is_none() {
                    return Err(bad("`response` is required"));
                }
            }
            _ => {}
        }
        if self.command == Some(Command::Diagnose) && self.bootstrap < 200 {
            return Err(bad(format!("bootstrap must be at least 200, got {}", self.bootstrap)));
        }
        Ok(())
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }

    /// The study grid with top-level seed, estimator, MLE and MCMC settings folded in.
    pub fn effective_grid(&self) -> ScenarioGrid {
        let mut g = self.grid.clone().unwrap_or_default();
        if let Some(s) = self.seed {
            g.base_seed = s;
        }
        if let Some(e) = &self.estimators {
            g.estimators = e.clone();
        }
        if let Some(m) = self.mle_mode {
            g.mle.mode = m;
        }
        if let Some(m) = self.mcmc {
            g.mcmc = m;
        }
        g
    }

    /// Builds `Rβ ≤ r` over the coefficient `names` (intercept first when present).
    pub fn restriction_system(&self, names: &[String]) -> Result<Option<LinearRestrictions>, CliError> {
        if self.restrictions.is_empty() {
            return Ok(None);
        }
        let p = names.len();
        let mut rows = Vec::with_capacity(self.restrictions.len());
        for (i, row) in self.restrictions.iter().enumerate() {
            let coeffs = match &row.coeffs {
                Coeffs::Dense(v) if v.len() == p => v.clone(),
                Coeffs::Dense(v) => {
                    return Err(bad(format!("restriction {i} has {} coefficients, expected {p}", v.len())))
                }
                Coeffs::Named(map) => {
                    let mut v = vec![0.0; p];
                    for (name, c) in map {
                        let j = names
                            .iter()
                            .position(|n| n == name || (name == "(intercept)" && n == INTERCEPT))
                            .ok_or_else(|| bad(format!("restriction {i} names unknown coefficient `{name}`")))?;
                        v[j] = *c;
                    }
                    v
                }
            };
            rows.push((coeffs, row.bound, row.sense));
        }
        LinearRestrictions::from_rows(p, &rows)
            .map(Some)
            .map_err(|e| bad(e.to_string()))
    }
}
