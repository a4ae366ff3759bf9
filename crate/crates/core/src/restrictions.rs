//! Linear inequality systems `Rβ ≤ r`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::Matrix;

/// Slack allowed when checking `R_i·β ≤ r_i` at the boundary.
pub const BOUNDARY_TOL: f64 = 1e-12;
/// How far `feasible_start` moves a clamped coordinate into the interior.
pub const INTERIOR_NUDGE: f64 = 1e-6;
/// Crossing of a coordinate interval tolerated before the state is declared infeasible.
pub const INTERVAL_SLACK: f64 = 1e-10;
pub const DEFAULT_MAX_PASSES: usize = 1000;

/// Direction of a user-facing restriction row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Le,
    Ge,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearRestrictions {
    r_mat: Matrix,
    r: Vec<f64>,
}

impl LinearRestrictions {
    pub fn new(r_mat: Matrix, r: Vec<f64>) -> Result<Self> {
        if r_mat.rows() != r.len() {
            return Err(Error::Contract(format!(
                "R has {} rows but r has {} entries",
                r_mat.rows(),
                r.len()
            )));
        }
        if r_mat.cols() == 0 {
            return Err(Error::Contract("restrictions need p >= 1".into()));
        }
        if r_mat.as_slice().iter().chain(&r).any(|v| !v.is_finite()) {
            return Err(Error::Domain {
                op: "LinearRestrictions::new",
                detail: "restriction system contains non-finite entries".into(),
            });
        }
        for (i, bound) in r.iter().enumerate() {
            if *bound < 0.0 && r_mat.row(i).iter().all(|v| *v == 0.0) {
                return Err(Error::Contract(format!("row {i} reads 0 <= {bound}, which never holds")));
            }
        }
        Ok(Self { r_mat, r })
    }

    /// The empty system on `p` coordinates.
    pub fn unrestricted(p: usize) -> Self {
        Self {
            r_mat: Matrix::zeros(0, p),
            r: Vec::new(),
        }
    }

    /// `β_j ≥ bound` for every coordinate.
    pub fn lower_bounds(p: usize, bound: f64) -> Result<Self> {
        Self::new(Matrix::identity(p).scale(-1.0), vec![-bound; p])
    }

    /// Builds `≤` form from rows `(coeffs, bound, sense)`; `≥` rows are negated.
    pub fn from_rows(p: usize, rows: &[(Vec<f64>, f64, Sense)]) -> Result<Self> {
        let mut data = Vec::with_capacity(rows.len() * p);
        let mut r = Vec::with_capacity(rows.len());
        for (i, (coeffs, bound, sense)) in rows.iter().enumerate() {
            if coeffs.len() != p {
                return Err(Error::Contract(format!(
                    "restriction row {i} has {} coefficients, expected {p}",
                    coeffs.len()
                )));
            }
            let s = match sense {
                Sense::Le => 1.0,
                Sense::Ge => -1.0,
            };
            data.extend(coeffs.iter().map(|c| s * c));
            r.push(s * bound);
        }
        Self::new(Matrix::from_row_major(rows.len(), p, data)?, r)
    }

    pub fn m(&self) -> usize {
        self.r_mat.rows()
    }

    pub fn p(&self) -> usize {
        self.r_mat.cols()
    }

    pub fn is_empty(&self) -> bool {
        self.m() == 0
    }

    pub fn matrix(&self) -> &Matrix {
        &self.r_mat
    }

    pub fn bounds(&self) -> &[f64] {
        &self.r
    }

    fn check_dim(&self, beta: &[f64]) -> Result<()> {
        if beta.len() != self.p() {
            return Err(Error::Contract(format!(
                "restrictions act on {} coefficients, got {}",
                self.p(),
                beta.len()
            )));
        }
        Ok(())
    }

    /// Whether every row holds to within [`BOUNDARY_TOL`].
    pub fn satisfies(&self, beta: &[f64]) -> Result<bool> {
        self.check_dim(beta)?;
        Ok(self.satisfied_unchecked(beta))
    }

    pub(crate) fn satisfied_unchecked(&self, beta: &[f64]) -> bool {
        (0..self.m()).all(|i| {
            let lhs: f64 = self.r_mat.row(i).iter().zip(beta).map(|(a, b)| a * b).sum();
            lhs <= self.r[i] + BOUNDARY_TOL
        })
    }

    /// Interval of values coordinate `j` can take with the others held at `beta`.
    pub fn coordinate_interval(&self, j: usize, beta: &[f64]) -> Result<(f64, f64)> {
        self.check_dim(beta)?;
        if j >= self.p() {
            return Err(Error::Contract(format!("coordinate {j} out of range for p = {}", self.p())));
        }
        let (lo, hi) = self.raw_interval(j, beta);
        if lo > hi + INTERVAL_SLACK {
            return Err(Error::InfeasibleState { coord: j, lo, hi });
        }
        Ok((lo, hi))
    }

    pub(crate) fn raw_interval(&self, j: usize, beta: &[f64]) -> (f64, f64) {
        let mut lo = f64::NEG_INFINITY;
        let mut hi = f64::INFINITY;
        for i in 0..self.m() {
            let row = self.r_mat.row(i);
            let rij = row[j];
            if rij == 0.0 {
                continue;
            }
            let rest: f64 = row
                .iter()
                .zip(beta)
                .enumerate()
                .filter(|(k, _)| *k != j)
                .map(|(_, (a, b))| a * b)
                .sum();
            let q = (self.r[i] - rest) / rij;
            if rij > 0.0 {
                hi = hi.min(q);
            } else {
                lo = lo.max(q);
            }
        }
        (lo, hi)
    }

    /// Rows involving a single coordinate, collapsed into per-coordinate bounds.
    /// Returns `true` if those bounds already contradict each other.
    fn single_coordinate_bounds_conflict(&self) -> bool {
        let p = self.p();
        let mut lo = vec![f64::NEG_INFINITY; p];
        let mut hi = vec![f64::INFINITY; p];
        for i in 0..self.m() {
            let row = self.r_mat.row(i);
            let mut nz = row.iter().enumerate().filter(|(_, v)| **v != 0.0);
            if let (Some((j, &c)), None) = (nz.next(), nz.next()) {
                let q = self.r[i] / c;
                if c > 0.0 {
                    hi[j] = hi[j].min(q);
                } else {
                    lo[j] = lo[j].max(q);
                }
            }
        }
        lo.iter().zip(&hi).any(|(l, h)| *l > *h + INTERVAL_SLACK)
    }

    /// A feasible point near `hint`: up to `max_passes` cyclic coordinate
    /// projections, then an exact phase-one simplex.
    ///
    /// Returns `hint` unchanged when it is already feasible. Clamped coordinates
    /// are moved [`INTERIOR_NUDGE`] inside their interval when it is wide enough.
    /// `proved_empty` in the error means the simplex found no feasible point.
    pub fn feasible_start(&self, hint: &[f64], max_passes: usize) -> Result<Vec<f64>> {
        self.check_dim(hint)?;
        if self.satisfied_unchecked(hint) {
            return Ok(hint.to_vec());
        }
        if self.single_coordinate_bounds_conflict() {
            return Err(Error::FeasibilityUnresolved {
                passes: 0,
                proved_empty: true,
            });
        }
        let mut beta = hint.to_vec();
        // Coordinate projections keep most coordinates at the hint; when they
        // stall, a phase-one simplex on the slightly tightened system decides.
        for _ in 0..max_passes {
            for j in 0..self.p() {
                let (lo, hi) = self.raw_interval(j, &beta);
                beta[j] = project(beta[j], lo, hi);
            }
            if self.satisfied_unchecked(&beta) {
                return Ok(beta);
            }
        }
        let mut proved_empty = true;
        for margin in [INTERIOR_NUDGE, 0.0] {
            let lhs = self.r_mat.matvec(hint)?;
            let b: Vec<f64> = (0..self.m())
                .map(|i| {
                    let norm = self.r_mat.row(i).iter().map(|v| v * v).sum::<f64>().sqrt();
                    self.r[i] - margin * norm - lhs[i]
                })
                .collect();
            if let Some(step) = phase_one(&self.r_mat, &b) {
                proved_empty = false;
                let cand: Vec<f64> = hint.iter().zip(&step).map(|(h, d)| h + d).collect();
                if self.satisfied_unchecked(&cand) {
                    return Ok(cand);
                }
            }
        }
        Err(Error::FeasibilityUnresolved {
            passes: max_passes,
            proved_empty,
        })
    }
}

/// Some `x` with `a x ≤ b`, by phase-one simplex with Bland's rule, or `None`
/// when the system is infeasible.
fn phase_one(a: &Matrix, b: &[f64]) -> Option<Vec<f64>> {
    const EPS: f64 = 1e-11;
    let (m, p) = (a.rows(), a.cols());
    // Columns: u (p), v (p), slacks (m), artificials (m); x = u − v.
    let cols = 2 * p + 2 * m;
    let width = cols + 1;
    let mut t = vec![0.0; (m + 1) * width];
    let mut basis = vec![0usize; m];
    for i in 0..m {
        let sigma = if b[i] < 0.0 { -1.0 } else { 1.0 };
        let row = &mut t[i * width..(i + 1) * width];
        for j in 0..p {
            row[j] = sigma * a[(i, j)];
            row[p + j] = -sigma * a[(i, j)];
        }
        row[2 * p + i] = sigma;
        row[cols] = sigma * b[i];
        if sigma < 0.0 {
            row[2 * p + m + i] = 1.0;
            basis[i] = 2 * p + m + i;
        } else {
            basis[i] = 2 * p + i;
        }
    }
    // Objective row: minimise the artificial sum, kept in reduced-cost form.
    for i in 0..m {
        if basis[i] >= 2 * p + m {
            for j in 0..width {
                t[m * width + j] -= t[i * width + j];
            }
        }
    }
    for j in 2 * p + m..cols {
        t[m * width + j] = 0.0;
    }
    let scale = 1.0 + b.iter().fold(0.0f64, |s, v| s.max(v.abs()));
    for _ in 0..50 * (m + cols) {
        let Some(enter) = (0..cols).find(|&j| t[m * width + j] < -EPS) else {
            break;
        };
        let mut leave: Option<usize> = None;
        let mut best = f64::INFINITY;
        for i in 0..m {
            let coef = t[i * width + enter];
            if coef > EPS {
                let ratio = t[i * width + cols] / coef;
                let better = match leave {
                    None => true,
                    Some(l) => ratio < best - EPS || (ratio <= best + EPS && basis[i] < basis[l]),
                };
                if better {
                    best = ratio;
                    leave = Some(i);
                }
            }
        }
        let r = leave?;
        let piv = t[r * width + enter];
        for j in 0..width {
            t[r * width + j] /= piv;
        }
        for i in 0..=m {
            if i != r {
                let f = t[i * width + enter];
                if f != 0.0 {
                    for j in 0..width {
                        t[i * width + j] -= f * t[r * width + j];
                    }
                }
            }
        }
        basis[r] = enter;
    }
    let infeasibility = -t[m * width + cols];
    if infeasibility > 1e-9 * scale {
        return None;
    }
    let mut x = vec![0.0; p];
    for (i, &bv) in basis.iter().enumerate() {
        let v = t[i * width + cols];
        if bv < p {
            x[bv] += v;
        } else if bv < 2 * p {
            x[bv - p] -= v;
        }
    }
    Some(x)
}

fn project(v: f64, lo: f64, hi: f64) -> f64 {
    if lo > hi {
        // Empty given the other coordinates; the half-space sweeps handle it.
        return v;
    }
    let nudge = if hi - lo > 2.0 * INTERIOR_NUDGE {
        INTERIOR_NUDGE
    } else {
        0.5 * (hi - lo)
    };
    if v < lo {
        lo + nudge
    } else if v > hi {
        hi - nudge
    } else {
        v
    }
}
