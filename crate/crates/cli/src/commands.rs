//! The three workflows and their report files.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use gammareg::bayes::{run_begrc, run_beugrc, summarize, McmcConfig, PriorSpec, Proposal};
use gammareg::diagnostics::{correlation_matrix, gamma_gof, multicollinearity_condition_number, ConditionNumbers, GofReport};
use gammareg::estimators::{fit_gre, fit_mle, fit_ridge, AlphaConvention, PenaltyRule};
use gammareg::simulation::{run_grid, ScenarioReport};
use gammareg::{Dataset, Estimator, FitResult, MleOptions, RngStream};
use serde::Serialize;
use serde_json::json;

use crate::config::{Command, Format, RunConfig, ZetaSpec};
use crate::data::{load_csv, Table};
use crate::error::CliError;

const TAG_BEUGRC: u64 = 2;
const TAG_BEGRC: u64 = 3;
const TAG_BOOTSTRAP: u64 = 4;

/// Per-estimator result of `fit`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateRow {
    pub estimator: Estimator,
    pub estimate: Vec<f64>,
    /// Sandwich / information SEs for classical fits, posterior SD for Bayesian ones.
    pub std_error: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub penalty: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub acceptance_rate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitReport {
    pub coefficients: Vec<String>,
    pub n: usize,
    pub zeta: f64,
    pub zeta_source: String,
    pub seed: u64,
    pub mle_mode: gammareg::MleMode,
    pub mle_converged: bool,
    pub estimates: Vec<EstimateRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnoseReport {
    pub n: usize,
    pub covariates: Vec<String>,
    pub goodness_of_fit: GofReport,
    pub condition_numbers: ConditionNumbers,
    pub seed: u64,
}

fn load_table(cfg: &RunConfig) -> Result<Table, CliError> {
    let path = cfg.data.as_deref().expect("validated");
    let resp = cfg.response.as_deref().expect("validated");
    let t = load_csv(path, resp, cfg.covariates.as_deref(), cfg.intercept)?;
    if cfg.standardize {
        t.standardized()
    } else {
        Ok(t)
    }
}

fn mle_options(cfg: &RunConfig) -> MleOptions {
    let mut o = MleOptions::default();
    if let Some(m) = cfg.mle_mode {
        o.mode = m;
    }
    o
}

/// `Σ ((y − μ̂)/μ̂)² / (n − p)`.
pub fn pearson_zeta(y: &[f64], mu: &[f64], p: usize) -> f64 {
    let ss: f64 = y.iter().zip(mu).map(|(y, m)| ((y - m) / m).powi(2)).sum();
    ss / (y.len() as f64 - p as f64)
}

fn converged_mle(data: &Dataset, opts: &MleOptions) -> Result<FitResult, CliError> {
    let fit = fit_mle(data, opts).map_err(|e| CliError::compute("maximum likelihood", e))?;
    if !fit.converged {
        return Err(CliError::compute(
            "maximum likelihood",
            gammareg::Error::Contract(format!(
                "{:?} iteration did not converge in {} iterations",
                opts.mode, fit.iterations
            )),
        ));
    }
    Ok(fit)
}

/// Resolves ζ and returns the dataset together with its converged MLE fit.
fn data_and_mle(cfg: &RunConfig, table: &Table, default_zeta: Option<f64>) -> Result<(Dataset, FitResult, String), CliError> {
    let opts = mle_options(cfg);
    match &cfg.zeta {
        Some(ZetaSpec::Value(z)) => {
            let data = table.dataset(*z)?;
            let fit = converged_mle(&data, &opts)?;
            Ok((data, fit, "config".into()))
        }
        // β̂ does not depend on ζ, so fit once at ζ = 1 and refit the SEs.
        Some(ZetaSpec::Method(_)) | None => {
            let probe = table.dataset(1.0)?;
            let fit = converged_mle(&probe, &opts)?;
            let (zeta, source) = match (&cfg.zeta, default_zeta) {
                (None, Some(z)) => (z, "default"),
                (None, None) => return Err(CliError::Config("`zeta` is required (a number or \"pearson\")".into())),
                _ => (pearson_zeta(&table.y, &fit.mu_hat, table.p()), "pearson"),
            };
            let data = table.dataset(zeta)?;
            let fit = converged_mle(&data, &opts)?;
            Ok((data, fit, source.into()))
        }
    }
}

pub fn cmd_fit(cfg: &RunConfig) -> Result<FitReport, CliError> {
    let table = load_table(cfg)?;
    let (data, mle, zeta_source) = data_and_mle(cfg, &table, None)?;
    let restrictions = cfg.restriction_system(&table.names)?;
    let estimators = cfg.estimators.clone().unwrap_or_else(|| {
        let mut e = vec![Estimator::Mle, Estimator::Gre1, Estimator::Gre2, Estimator::Beugrc];
        if restrictions.is_some() {
            e.push(Estimator::Begrc);
        }
        e
    });
    let mcmc: McmcConfig = cfg.mcmc.unwrap_or_default();
    let seed = cfg.seed();
    let mut estimates = Vec::with_capacity(estimators.len());
    for est in &estimators {
        let row = match est {
            Estimator::Mle => classical_row(&mle),
            Estimator::Gre1 | Estimator::Gre2 => {
                let rule = if *est == Estimator::Gre1 { PenaltyRule::K1 } else { PenaltyRule::K2 };
                let f = fit_gre(&data, &mle, rule, AlphaConvention::default())
                    .map_err(|e| CliError::compute(format!("{est} fit"), e))?;
                classical_row(&f)
            }
            Estimator::CustomRidge => {
                let k = cfg
                    .ridge_k
                    .as_ref()
                    .ok_or_else(|| CliError::Config("custom-ridge needs `ridge_k`".into()))?;
                let f = fit_ridge(&data, &mle, k).map_err(|e| CliError::compute("custom-ridge fit", e))?;
                classical_row(&f)
            }
            Estimator::Beugrc | Estimator::Begrc => {
                let res = if *est == Estimator::Begrc {
                    Some(restrictions.clone().ok_or_else(|| {
                        CliError::Config("BEGRC needs at least one restriction row".into())
                    })?)
                } else {
                    None
                };
                let ctx = format!("{est} sampler");
                let prior = PriorSpec::default_for(data.x(), res).map_err(|e| CliError::compute(&ctx, e))?;
                let prop = Proposal::from_fit(&data, &mle.mu_hat, mcmc.proposal_scale)
                    .map_err(|e| CliError::compute(&ctx, e))?;
                let chain = if *est == Estimator::Begrc {
                    run_begrc(&data, &prior, &mcmc, &prop, &mle.beta_hat, &mut RngStream::new(seed, TAG_BEGRC))
                } else {
                    run_beugrc(&data, &prior, &mcmc, &prop, &mle.beta_hat, &mut RngStream::new(seed, TAG_BEUGRC))
                }
                .map_err(|e| CliError::compute(&ctx, e))?;
                let s = summarize(&chain).map_err(|e| CliError::compute(&ctx, e))?;
                EstimateRow {
                    estimator: *est,
                    estimate: s.posterior_mean,
                    std_error: s.posterior_sd,
                    iterations: Some(mcmc.n_iter),
                    penalty: None,
                    acceptance_rate: Some(chain.acceptance_rate),
                }
            }
        };
        estimates.push(row);
    }
    Ok(FitReport {
        coefficients: table.names.clone(),
        n: table.n(),
        zeta: data.zeta(),
        zeta_source,
        seed,
        mle_mode: mle_options(cfg).mode,
        mle_converged: mle.converged,
        estimates,
    })
}

fn classical_row(f: &FitResult) -> EstimateRow {
    EstimateRow {
        estimator: f.estimator,
        estimate: f.beta_hat.clone(),
        std_error: f.std_errors.clone(),
        iterations: Some(f.iterations),
        penalty: f.penalty.clone(),
        acceptance_rate: None,
    }
}

pub fn cmd_simulate(cfg: &RunConfig) -> Result<ScenarioReport, CliError> {
    let grid = cfg.effective_grid();
    let report = run_grid(&grid).map_err(|e| CliError::Config(e.to_string()))?;
    if let Some(c) = report.cells.iter().find(|c| c.failures == c.replications) {
        return Err(CliError::compute(
            "simulation",
            gammareg::Error::Degenerate(format!(
                "every replication failed for {} at zeta={}, n={}, rho={}",
                c.estimator, c.zeta, c.n, c.rho
            )),
        ));
    }
    Ok(report)
}

pub fn cmd_diagnose(cfg: &RunConfig) -> Result<(DiagnoseReport, gammareg::Matrix, Vec<String>), CliError> {
    let table = load_table(cfg)?;
    let (cov, names) = table.covariates();
    let corr = correlation_matrix(&cov).map_err(|e| CliError::compute("correlation matrix", e))?;
    // Condition numbers depend on μ̂ only, so ζ defaults to 1 here.
    let (data, mle, _) = data_and_mle(cfg, &table, Some(1.0))?;
    let cond = multicollinearity_condition_number(&data, &mle).map_err(|e| CliError::compute("condition number", e))?;
    let gof = gamma_gof(&RngStream::new(cfg.seed(), TAG_BOOTSTRAP), &table.y, cfg.bootstrap)
        .map_err(|e| CliError::compute("goodness of fit", e))?;
    Ok((
        DiagnoseReport {
            n: table.n(),
            covariates: names.clone(),
            goodness_of_fit: gof,
            condition_numbers: cond,
            seed: cfg.seed(),
        },
        corr,
        names,
    ))
}

fn write(dir: &Path, name: &str, content: &str, written: &mut Vec<String>) -> Result<(), CliError> {
    let path = dir.join(name);
    fs::write(&path, content).map_err(|e| CliError::io(&path, e))?;
    written.push(name.to_owned());
    Ok(())
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

pub fn fit_long_csv(r: &FitReport) -> String {
    let mut out = String::from("estimator,coefficient,estimate,std_error\n");
    for e in &r.estimates {
        for (j, name) in r.coefficients.iter().enumerate() {
            writeln!(out, "{},{},{},{}", e.estimator, name, e.estimate[j], e.std_error[j]).unwrap();
        }
    }
    out
}

/// Wide `estimate (SE)` table, four decimals.
pub fn fit_table_csv(r: &FitReport) -> String {
    let mut out = String::from("coefficient");
    for e in &r.estimates {
        write!(out, ",{}", e.estimator).unwrap();
    }
    out.push('\n');
    for (j, name) in r.coefficients.iter().enumerate() {
        out.push_str(name);
        for e in &r.estimates {
            write!(out, ",{:.4} ({:.4})", e.estimate[j], e.std_error[j]).unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn correlation_csv(corr: &gammareg::Matrix, names: &[String]) -> String {
    let mut out = String::new();
    for n in names {
        write!(out, ",{n}").unwrap();
    }
    out.push('\n');
    for (i, n) in names.iter().enumerate() {
        out.push_str(n);
        for v in corr.row(i) {
            write!(out, ",{v}").unwrap();
        }
        out.push('\n');
    }
    out
}

/// Runs `command` and writes its outputs plus `manifest.json` into the output directory.
pub fn execute(command: Command, cfg: &RunConfig) -> Result<Vec<String>, CliError> {
    let dir = cfg.output.path.as_path();
    let json_out = cfg.output.format == Format::Json;
    let mut written = Vec::new();
    let mut extra = serde_json::Map::new();
    match command {
        Command::Fit => {
            let r = cmd_fit(cfg)?;
            fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
            if json_out {
                write(dir, "fit.json", &to_json(&r), &mut written)?;
            } else {
                write(dir, "fit.csv", &fit_long_csv(&r), &mut written)?;
                write(dir, "fit_table.csv", &fit_table_csv(&r), &mut written)?;
            }
            extra.insert("mle_mode".into(), json!(r.mle_mode));
            extra.insert("zeta".into(), json!(r.zeta));
        }
        Command::Simulate => {
            let r = cmd_simulate(cfg)?;
            fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
            if json_out {
                write(dir, "report.json", &to_json(&r), &mut written)?;
            } else {
                write(dir, "report.csv", &r.to_csv(), &mut written)?;
                write(dir, "mse_table.csv", &r.mse_table_csv(), &mut written)?;
                write(dir, "sd_bias_table.csv", &r.sd_bias_table_csv(), &mut written)?;
            }
            extra.insert("grid".into(), json!(cfg.effective_grid()));
        }
        Command::Diagnose => {
            let (r, corr, names) = cmd_diagnose(cfg)?;
            fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
            write(dir, "correlation.csv", &correlation_csv(&corr, &names), &mut written)?;
            if json_out {
                write(dir, "diagnostics.json", &to_json(&r), &mut written)?;
            } else {
                let g = &r.goodness_of_fit;
                let c = &r.condition_numbers;
                let csv = format!(
                    "quantity,value\nad_statistic,{}\nad_p_value,{}\nfitted_shape,{}\nfitted_scale,{}\n\
                     bootstrap_replicates,{}\ncondition_number_weighted,{}\ncondition_number_unweighted,{}\n",
                    g.ad_statistic, g.p_value, g.fitted_shape, g.fitted_scale, g.bootstrap_replicates, c.weighted, c.unweighted
                );
                write(dir, "diagnostics.csv", &csv, &mut written)?;
            }
        }
    }
    let mut manifest = serde_json::Map::new();
    manifest.insert("tool".into(), json!("gammareg"));
    manifest.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
    manifest.insert("command".into(), json!(command.name()));
    manifest.insert("seed".into(), json!(match command {
        Command::Simulate => cfg.effective_grid().base_seed,
        _ => cfg.seed(),
    }));
    manifest.insert("config".into(), json!(cfg));
    manifest.extend(extra);
    manifest.insert("outputs".into(), json!(written));
    write(dir, "manifest.json", &to_json(&manifest), &mut written)?;
    Ok(written)
}
