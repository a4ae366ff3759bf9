//! Monte Carlo study: correlated designs, gamma responses, replication sweeps
//! over a `(ζ, n, ρ)` grid and MSE / bias / SD aggregation.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bayes::{run_begrc, run_beugrc, summarize, McmcConfig, PriorSpec, Proposal};
use crate::error::{Error, Result};
use crate::estimators::{fit_gre, fit_mle, AlphaConvention, Estimator, MleOptions, PenaltyRule};
use crate::model::{mean_response, Dataset};
use crate::numerics::rng::mix64;
use crate::numerics::{Matrix, RngStream};
use crate::restrictions::LinearRestrictions;

/// `x_ij = √(1−ρ²) w_ij + ρ w_{i,p+1}` with `w` standard normal.
pub fn gen_design(rng: &mut RngStream, n: usize, p: usize, rho: f64) -> Result<Matrix> {
    if !(0.0..1.0).contains(&rho) {
        return Err(Error::Domain {
            op: "gen_design",
            detail: format!("rho must lie in [0, 1), got {rho}"),
        });
    }
    let a = (1.0 - rho * rho).sqrt();
    let mut data = Vec::with_capacity(n * p);
    let mut w = vec![0.0; p + 1];
    for _ in 0..n {
        w.iter_mut().for_each(|v| *v = rng.standard_normal());
        data.extend(w[..p].iter().map(|v| a * v + rho * w[p]));
    }
    Matrix::from_row_major(n, p, data)
}

/// `y_i ~ Gamma(shape 1/ζ, scale μ_i ζ)` with `μ = exp(Xβ)`.
pub fn gen_response(rng: &mut RngStream, x: &Matrix, beta: &[f64], zeta: f64) -> Result<Vec<f64>> {
    let mu = mean_response(x, beta)?;
    mu.iter().map(|m| rng.gamma(1.0 / zeta, m * zeta)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioGrid {
    pub zetas: Vec<f64>,
    pub ns: Vec<usize>,
    pub rhos: Vec<f64>,
    pub beta_true: Vec<f64>,
    pub replications: usize,
    pub base_seed: u64,
    pub estimators: Vec<Estimator>,
    pub restriction_bound: f64,
    pub mle: MleOptions,
    pub mcmc: McmcConfig,
    pub alpha_convention: AlphaConvention,
}

impl Default for ScenarioGrid {
    fn default() -> Self {
        Self {
            zetas: vec![0.25, 0.5],
            ns: vec![25, 50, 100, 200],
            rhos: vec![0.8, 0.9, 0.95, 0.99],
            beta_true: vec![1.0; 4],
            replications: 100,
            base_seed: 20_240_601,
            estimators: Estimator::STUDY.to_vec(),
            restriction_bound: 0.8,
            mle: MleOptions::default(),
            mcmc: McmcConfig::default(),
            alpha_convention: AlphaConvention::default(),
        }
    }
}

impl ScenarioGrid {
    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(Error::Contract("replications must be at least 1".into()));
        }
        if self.beta_true.is_empty() {
            return Err(Error::Contract("beta_true must be non-empty".into()));
        }
        if let Some(r) = self.rhos.iter().find(|r| !(0.0..1.0).contains(*r)) {
            return Err(Error::Contract(format!("rho {r} outside [0, 1)")));
        }
        if let Some(z) = self.zetas.iter().find(|z| !(**z > 0.0)) {
            return Err(Error::Contract(format!("zeta {z} is not positive")));
        }
        if let Some(n) = self.ns.iter().find(|n| **n <= self.beta_true.len()) {
            return Err(Error::Contract(format!("n = {n} does not exceed p")));
        }
        if self.estimators.contains(&Estimator::CustomRidge) {
            return Err(Error::Contract("custom-ridge is not part of the study".into()));
        }
        if self
            .estimators
            .iter()
            .any(|e| matches!(e, Estimator::Beugrc | Estimator::Begrc))
        {
            self.mcmc.validate()?;
        }
        Ok(())
    }
}

/// One `(ζ, n, ρ)` cell of a grid, with its indices for stream derivation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub zeta: f64,
    pub n: usize,
    pub rho: f64,
    pub index: (usize, usize, usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellReport {
    pub zeta: f64,
    pub n: usize,
    pub rho: f64,
    pub estimator: Estimator,
    pub mse: f64,
    pub bias: Vec<f64>,
    pub sd: Vec<f64>,
    pub failures: usize,
    pub replications: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub cells: Vec<CellReport>,
}

/// MSE, bias and SD (divisor `k − 1`) of the estimates around `truth`.
pub fn aggregate(estimates: &[Vec<f64>], truth: &[f64]) -> (f64, Vec<f64>, Vec<f64>) {
    let p = truth.len();
    let k = estimates.len();
    if k == 0 {
        return (f64::NAN, vec![f64::NAN; p], vec![f64::NAN; p]);
    }
    let kf = k as f64;
    let mut mse = 0.0;
    let mut mean = vec![0.0; p];
    for b in estimates {
        mse += b.iter().zip(truth).map(|(e, t)| (e - t) * (e - t)).sum::<f64>();
        mean.iter_mut().zip(b).for_each(|(m, e)| *m += e);
    }
    mse /= kf;
    mean.iter_mut().for_each(|m| *m /= kf);
    let bias = mean.iter().zip(truth).map(|(m, t)| m - t).collect();
    let sd = (0..p)
        .map(|j| {
            if k < 2 {
                return f64::NAN;
            }
            let ss: f64 = estimates.iter().map(|b| (b[j] - mean[j]) * (b[j] - mean[j])).sum();
            (ss / (kf - 1.0)).sqrt()
        })
        .collect();
    (mse, bias, sd)
}

const TAG_DATA: u64 = 1;
const TAG_BEUGRC: u64 = 2;
const TAG_BEGRC: u64 = 3;

fn replication_stream(base_seed: u64, cell: &Cell, rep: usize) -> RngStream {
    let (zi, ni, ri) = cell.index;
    let id = [zi as u64, ni as u64, ri as u64, rep as u64]
        .iter()
        .fold(0x5EED_u64, |h, v| mix64(h ^ mix64(*v)));
    RngStream::new(base_seed, id)
}

/// Estimates from one replication, one slot per requested estimator (`None` = failed).
fn replicate(grid: &ScenarioGrid, cell: &Cell, rep: usize) -> Vec<Option<Vec<f64>>> {
    let stream = replication_stream(grid.base_seed, cell, rep);
    let mut out = vec![None; grid.estimators.len()];
    let mut data_rng = stream.derive(TAG_DATA);
    let p = grid.beta_true.len();
    let data = match gen_design(&mut data_rng, cell.n, p, cell.rho)
        .and_then(|x| {
            let y = gen_response(&mut data_rng, &x, &grid.beta_true, cell.zeta)?;
            Dataset::new(x, y, cell.zeta)
        }) {
        Ok(d) => d,
        Err(_) => return out,
    };
    let mle = match fit_mle(&data, &grid.mle) {
        Ok(f) if f.converged => f,
        _ => return out,
    };
    let needs_mcmc = grid
        .estimators
        .iter()
        .any(|e| matches!(e, Estimator::Beugrc | Estimator::Begrc));
    let bayes_setup = if needs_mcmc {
        PriorSpec::default_for(data.x(), None)
            .and_then(|prior| Ok((prior, Proposal::from_fit(&data, &mle.mu_hat, grid.mcmc.proposal_scale)?)))
            .ok()
    } else {
        None
    };
    for (slot, est) in grid.estimators.iter().enumerate() {
        out[slot] = match est {
            Estimator::Mle => Some(mle.beta_hat.clone()),
            Estimator::Gre1 => fit_gre(&data, &mle, PenaltyRule::K1, grid.alpha_convention)
                .ok()
                .map(|f| f.beta_hat),
            Estimator::Gre2 => fit_gre(&data, &mle, PenaltyRule::K2, grid.alpha_convention)
                .ok()
                .map(|f| f.beta_hat),
            Estimator::Beugrc => bayes_setup.as_ref().and_then(|(prior, prop)| {
                let mut rng = stream.derive(TAG_BEUGRC);
                run_beugrc(&data, prior, &grid.mcmc, prop, &mle.beta_hat, &mut rng)
                    .and_then(|c| summarize(&c))
                    .ok()
                    .map(|s| s.posterior_mean)
            }),
            Estimator::Begrc => bayes_setup.as_ref().and_then(|(prior, prop)| {
                let mut rng = stream.derive(TAG_BEGRC);
                let res = LinearRestrictions::lower_bounds(p, grid.restriction_bound).ok()?;
                let restricted = prior.with_restrictions(res).ok()?;
                run_begrc(&data, &restricted, &grid.mcmc, prop, &mle.beta_hat, &mut rng)
                    .and_then(|c| summarize(&c))
                    .ok()
                    .map(|s| s.posterior_mean)
            }),
            Estimator::CustomRidge => None,
        };
    }
    out
}

/// All requested estimators on one cell.
pub fn run_scenario(grid: &ScenarioGrid, cell: &Cell) -> Vec<CellReport> {
    let per_rep: Vec<Vec<Option<Vec<f64>>>> = (0..grid.replications)
        .into_par_iter()
        .map(|rep| replicate(grid, cell, rep))
        .collect();
    grid.estimators
        .iter()
        .enumerate()
        .map(|(slot, est)| {
            let ok: Vec<Vec<f64>> = per_rep.iter().filter_map(|r| r[slot].clone()).collect();
            let (mse, bias, sd) = aggregate(&ok, &grid.beta_true);
            CellReport {
                zeta: cell.zeta,
                n: cell.n,
                rho: cell.rho,
                estimator: *est,
                mse,
                bias,
                sd,
                failures: grid.replications - ok.len(),
                replications: grid.replications,
            }
        })
        .collect()
}

/// Cells in `ζ`-major, then `n`, then `ρ` order.
pub fn grid_cells(grid: &ScenarioGrid) -> Vec<Cell> {
    let mut cells = Vec::new();
    for (zi, &zeta) in grid.zetas.iter().enumerate() {
        for (ni, &n) in grid.ns.iter().enumerate() {
            for (ri, &rho) in grid.rhos.iter().enumerate() {
                cells.push(Cell {
                    zeta,
                    n,
                    rho,
                    index: (zi, ni, ri),
                });
            }
        }
    }
    cells
}

/// Every cell of the grid. The result depends only on the grid, never on
/// the number of worker threads.
pub fn run_grid(grid: &ScenarioGrid) -> Result<ScenarioReport> {
    grid.validate()?;
    let cells = grid_cells(grid)
        .iter()
        .flat_map(|cell| run_scenario(grid, cell))
        .collect();
    Ok(ScenarioReport { cells })
}

fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else {
        format!("{v}")
    }
}

impl ScenarioReport {
    fn p(&self) -> usize {
        self.cells.first().map_or(0, |c| c.bias.len())
    }

    /// Long format: `zeta,n,rho,estimator,mse,bias_1..p,sd_1..p,failures`.
    pub fn to_csv(&self) -> String {
        let p = self.p();
        let mut out = String::from("zeta,n,rho,estimator,mse");
        for j in 1..=p {
            write!(out, ",bias_{j}").unwrap();
        }
        for j in 1..=p {
            write!(out, ",sd_{j}").unwrap();
        }
        out.push_str(",failures\n");
        for c in &self.cells {
            write!(out, "{},{},{},{},{}", c.zeta, c.n, c.rho, c.estimator, fmt_f64(c.mse)).unwrap();
            for v in c.bias.iter().chain(&c.sd) {
                write!(out, ",{}", fmt_f64(*v)).unwrap();
            }
            writeln!(out, ",{}", c.failures).unwrap();
        }
        out
    }

    fn estimators(&self) -> Vec<Estimator> {
        let mut seen = Vec::new();
        for c in &self.cells {
            if !seen.contains(&c.estimator) {
                seen.push(c.estimator);
            }
        }
        seen
    }

    fn rows(&self) -> Vec<(f64, usize, f64)> {
        let mut keys: Vec<(f64, usize, f64)> = Vec::new();
        for c in &self.cells {
            let k = (c.zeta, c.n, c.rho);
            if !keys.contains(&k) {
                keys.push(k);
            }
        }
        keys
    }

    fn find(&self, key: (f64, usize, f64), est: Estimator) -> Option<&CellReport> {
        self.cells
            .iter()
            .find(|c| (c.zeta, c.n, c.rho) == key && c.estimator == est)
    }

    /// Wide MSE table: one row per cell, one column per estimator.
    pub fn mse_table_csv(&self) -> String {
        let ests = self.estimators();
        let mut out = String::from("zeta,n,rho");
        for e in &ests {
            write!(out, ",{e}").unwrap();
        }
        out.push('\n');
        for key in self.rows() {
            write!(out, "{},{},{}", key.0, key.1, key.2).unwrap();
            for e in &ests {
                let v = self.find(key, *e).map_or(f64::NAN, |c| c.mse);
                write!(out, ",{}", fmt_f64(v)).unwrap();
            }
            out.push('\n');
        }
        out
    }

    /// One row per cell and estimator, with `sd (bias)` per coefficient.
    pub fn sd_bias_table_csv(&self) -> String {
        let p = self.p();
        let mut out = String::from("zeta,n,rho,estimator");
        for j in 1..=p {
            write!(out, ",beta_{j}").unwrap();
        }
        out.push('\n');
        for c in &self.cells {
            write!(out, "{},{},{},{}", c.zeta, c.n, c.rho, c.estimator).unwrap();
            for (s, b) in c.sd.iter().zip(&c.bias) {
                write!(out, ",{} ({})", fmt_f64(*s), fmt_f64(*b)).unwrap();
            }
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_estimates_aggregate_to_zero() {
        let truth = vec![1.0, 2.0];
        let (mse, bias, sd) = aggregate(&vec![truth.clone(); 5], &truth);
        assert_eq!(mse, 0.0);
        assert_eq!(bias, vec![0.0, 0.0]);
        assert_eq!(sd, vec![0.0, 0.0]);
    }

    #[test]
    fn hand_computed_aggregate() {
        // Errors (1, 0), (−1, 2) → squared norms 1 and 5, MSE = 3.
        let truth = vec![0.0, 0.0];
        let est = vec![vec![1.0, 0.0], vec![-1.0, 2.0]];
        let (mse, bias, sd) = aggregate(&est, &truth);
        assert_eq!(mse, 3.0);
        assert_eq!(bias, vec![0.0, 1.0]);
        assert!((sd[0] - 2f64.sqrt()).abs() < 1e-15);
        assert!((sd[1] - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn rho_zero_design_is_the_auxiliary_block() {
        let mut a = RngStream::new(2, 0);
        let mut b = RngStream::new(2, 0);
        let x = gen_design(&mut a, 3, 2, 0.0).unwrap();
        for i in 0..3 {
            let w: Vec<f64> = (0..3).map(|_| b.standard_normal()).collect();
            assert_eq!(x.row(i), &w[..2]);
        }
        assert!(gen_design(&mut a, 3, 2, 1.0).is_err());
    }

    #[test]
    fn responses_are_positive() {
        let mut rng = RngStream::new(3, 0);
        let x = gen_design(&mut rng, 200, 4, 0.9).unwrap();
        let y = gen_response(&mut rng, &x, &[1.0; 4], 0.5).unwrap();
        assert!(y.iter().all(|v| *v > 0.0));
    }

    #[test]
    fn csv_shape() {
        let grid = ScenarioGrid {
            zetas: vec![0.25],
            ns: vec![25],
            rhos: vec![0.8],
            replications: 3,
            estimators: vec![Estimator::Mle, Estimator::Gre1],
            ..ScenarioGrid::default()
        };
        let rep = run_grid(&grid).unwrap();
        let csv = rep.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "zeta,n,rho,estimator,mse,bias_1,bias_2,bias_3,bias_4,sd_1,sd_2,sd_3,sd_4,failures");
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("0.25,25,0.8,MLE,"));
        assert_eq!(rep.mse_table_csv().lines().next().unwrap(), "zeta,n,rho,MLE,GRE1");
    }
}
