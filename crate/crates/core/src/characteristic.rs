//! The characteristic matrix `M(L, B) = [B Y_1 | ... | B Y_r]` and the
//! Fredholm numbers it determines.
//!
//! With `rho` the numerical rank of the `q x rm` matrix `M`:
//! `dim ker = rm - rho`, `dim coker = q - rho`, `index = rm - q`.

use rayon::prelude::*;
use serde::Serialize;

use crate::boundary::{Diagnostic, DiagnosticKind};
use crate::grid::Grid;
use crate::ode::{fundamental_set, FundamentalSet};
use crate::problem::ProblemSpec;
use crate::{BvpError, CMatrix, CVector, Result};

/// Default relative factor in the rank cutoff `sigma_max * max(q, rm) * factor`.
pub const DEFAULT_RANK_FACTOR: f64 = 1e-10;
/// A rank decision is flagged when `sigma_rank / sigma_{rank+1}` is below this.
pub const FRAGILE_GAP: f64 = 1e3;
/// Condition numbers above this trigger a warning.
pub const ILL_CONDITIONED: f64 = 1e12;

/// How the numerical rank is cut off.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RankPolicy {
    /// Absolute cutoff; `None` uses `sigma_max * max(q, rm) * 1e-10`.
    pub tolerance: Option<f64>,
}

impl RankPolicy {
    pub fn absolute(tolerance: f64) -> Self {
        Self { tolerance: Some(tolerance) }
    }

    fn cutoff(&self, sigma_max: f64, q: usize, rm: usize) -> f64 {
        self.tolerance.unwrap_or(sigma_max * q.max(rm) as f64 * DEFAULT_RANK_FACTOR)
    }
}

#[derive(Debug, Clone)]
pub struct CharacteristicMatrix {
    entries: CMatrix,
    r: usize,
    m: usize,
    singular_values: Vec<f64>,
    rank_tolerance: f64,
    numerical_rank: usize,
    /// Columns are right singular vectors, ordered like `singular_values`
    /// and completed to a basis of `C^{rm}`.
    right_vectors: CMatrix,
    diagnostics: Vec<Diagnostic>,
    fundamental: Option<FundamentalSet>,
}

impl CharacteristicMatrix {
    /// Rank analysis of a given `q x rm` matrix with `r` blocks of width `m`.
    pub fn from_entries(entries: CMatrix, r: usize, m: usize, policy: &RankPolicy) -> Result<Self> {
        if entries.ncols() != r * m || r == 0 || m == 0 {
            return Err(BvpError::Dimension(format!("{} columns for r = {r}, m = {m}", entries.ncols())));
        }
        if !entries.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(BvpError::Invalid("characteristic matrix has non-finite entries".into()));
        }
        let (q, rm) = (entries.nrows(), entries.ncols());
        // pad with zero rows so the SVD returns a full set of right vectors
        let mut padded = CMatrix::zeros(q.max(rm), rm);
        padded.rows_mut(0, q).copy_from(&entries);
        let svd = padded.svd(false, true);
        let v_t = svd.v_t.ok_or_else(|| BvpError::Invalid("SVD did not return right vectors".into()))?;
        let mut order: Vec<usize> = (0..rm).collect();
        order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
        let mut right_vectors = CMatrix::zeros(rm, rm);
        for (col, &k) in order.iter().enumerate() {
            right_vectors.set_column(col, &v_t.row(k).adjoint());
        }
        let singular_values: Vec<f64> = order.iter().take(q.min(rm)).map(|&k| svd.singular_values[k]).collect();
        let sigma_max = singular_values.first().copied().unwrap_or(0.0);
        let rank_tolerance = policy.cutoff(sigma_max, q, rm);
        let numerical_rank = singular_values.iter().filter(|&&s| s > rank_tolerance).count();

        let mut diagnostics = Vec::new();
        if numerical_rank > 0 && numerical_rank < singular_values.len() {
            let gap = singular_values[numerical_rank - 1] / singular_values[numerical_rank];
            if gap < FRAGILE_GAP {
                diagnostics.push(Diagnostic::new(
                    DiagnosticKind::RankFragile,
                    format!(
                        "rank-fragile: sigma_{numerical_rank} / sigma_{} = {gap:.3e} is below {FRAGILE_GAP:.0e}",
                        numerical_rank + 1
                    ),
                ));
            }
        }
        let cond = if numerical_rank == q && q == rm && q > 0 { sigma_max / singular_values[q - 1] } else { f64::INFINITY };
        if numerical_rank == q && q == rm && cond > ILL_CONDITIONED {
            diagnostics.push(Diagnostic::new(
                DiagnosticKind::IllConditioned,
                format!("ill-conditioned: condition number {cond:.3e} exceeds {ILL_CONDITIONED:.0e}"),
            ));
        }
        Ok(Self {
            entries,
            r,
            m,
            singular_values,
            rank_tolerance,
            numerical_rank,
            right_vectors,
            diagnostics,
            fundamental: None,
        })
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    /// Block `[B Y_i]` for `i` in `1..=r`.
    pub fn block(&self, i: usize) -> CMatrix {
        self.entries.columns((i - 1) * self.m, self.m).into_owned()
    }

    pub fn q(&self) -> usize {
        self.entries.nrows()
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Non-increasing; `min(q, rm)` values.
    pub fn singular_values(&self) -> &[f64] {
        &self.singular_values
    }

    pub fn rank_tolerance(&self) -> f64 {
        self.rank_tolerance
    }

    pub fn numerical_rank(&self) -> usize {
        self.numerical_rank
    }

    /// `sigma_max / sigma_min` for square full-rank matrices, otherwise infinite.
    pub fn condition_number(&self) -> f64 {
        let q = self.q();
        if q == self.r * self.m && self.numerical_rank == q && q > 0 {
            self.singular_values[0] / self.singular_values[q - 1]
        } else {
            f64::INFINITY
        }
    }

    pub fn diagnostics(&self) -> &[Diagnostic] {
        &self.diagnostics
    }

    /// Fundamental set the matrix was built from, when built from a problem.
    pub fn fundamental(&self) -> Option<&FundamentalSet> {
        self.fundamental.as_ref()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolvabilityReport {
    pub index: i64,
    pub dim_ker: usize,
    pub dim_coker: usize,
    pub well_posed: bool,
    pub numerical_rank: usize,
    pub rank_tolerance: f64,
    pub singular_values: Vec<f64>,
    pub diagnostics: Vec<Diagnostic>,
}

/// Assembles `M(L, B)` on `grid`, which must span the problem interval.
pub fn build_characteristic_matrix(spec: &ProblemSpec, grid: &Grid, policy: &RankPolicy) -> Result<CharacteristicMatrix> {
    if grid.interval() != spec.interval() {
        return Err(BvpError::IntervalMismatch);
    }
    let fundamental = fundamental_set(spec.coeffs(), grid)?;
    let blocks: Vec<CMatrix> = fundamental
        .members()
        .par_iter()
        .map(|y| spec.boundary().apply_to_matrix(y))
        .collect::<Result<_>>()?;
    let (q, m, r) = (spec.q(), spec.m(), spec.r());
    let mut entries = CMatrix::zeros(q, r * m);
    for (i, b) in blocks.iter().enumerate() {
        entries.columns_mut(i * m, m).copy_from(b);
    }
    let mut out = CharacteristicMatrix::from_entries(entries, r, m, policy)?;
    let mut diags = spec.boundary().validate(spec);
    diags.append(&mut out.diagnostics);
    out.diagnostics = diags;
    out.fundamental = Some(fundamental);
    Ok(out)
}

/// Fredholm numbers of the problem from its characteristic matrix.
pub fn solvability_report(m: &CharacteristicMatrix, spec: &ProblemSpec) -> SolvabilityReport {
    let rm = spec.r() * spec.m();
    let q = spec.q();
    let rank = m.numerical_rank();
    let dim_ker = rm - rank;
    let dim_coker = q - rank;
    let well_posed = q == rm && rank == rm;
    let mut diagnostics = m.diagnostics().to_vec();
    if !well_posed {
        diagnostics.push(Diagnostic::new(
            DiagnosticKind::NotWellPosed,
            format!("not well posed: dim ker = {dim_ker}, dim coker = {dim_coker}"),
        ));
    }
    SolvabilityReport {
        index: rm as i64 - q as i64,
        dim_ker,
        dim_coker,
        well_posed,
        numerical_rank: rank,
        rank_tolerance: m.rank_tolerance(),
        singular_values: m.singular_values().to_vec(),
        diagnostics,
    }
}

/// Orthonormal basis of the numerical null space of `M`; `rm - rank` vectors.
pub fn kernel_directions(m: &CharacteristicMatrix) -> Vec<CVector> {
    (m.numerical_rank()..m.right_vectors.ncols()).map(|j| m.right_vectors.column(j).into_owned()).collect()
}

/// `sum_i Y_i xi_i` for a kernel direction `xi`: a homogeneous solution
/// satisfying the homogeneous boundary conditions up to the rank cutoff.
pub fn realize(m: &CharacteristicMatrix, xi: &CVector) -> Result<crate::grid::DerivativeStack> {
    let fs = m.fundamental().ok_or_else(|| BvpError::Invalid("matrix was not built from a problem".into()))?;
    fs.combine(xi)
}
