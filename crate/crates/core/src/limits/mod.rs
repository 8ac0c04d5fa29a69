//! Parameter-dependent families of problems and limit experiments.
//!
//! A [`ProblemFamily`] yields a problem for every `eps` of a decreasing
//! schedule plus the limit problem at `eps = 0`. Sequences indexed by
//! `k -> inf` map onto the same abstraction with `eps = 1/k`.
//!
//! Trend verdicts on finite schedules use [`tends_to_zero`]: the last value
//! must be below [`TREND_ABS_TOL`] or below one hundredth of the first.

pub mod multipoint;

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::characteristic::{build_characteristic_matrix, solvability_report, CharacteristicMatrix, RankPolicy};
use crate::function::MatrixFunction;
use crate::grid::{sobolev_norm, DerivativeStack, Grid, LebesgueExponent, MatrixTrajectory, Trajectory, DEFAULT_NODES};
use crate::linalg::{max_abs_diff, vector_norm};
use crate::problem::ProblemSpec;
use crate::solver::{discrepancy, solve_with_matrix};
use crate::{BvpError, CMatrix, CVector, Complex64, Result};

pub use multipoint::{check_multipoint_assumptions, AssumptionReport, AssumptionRow, MultipointFamily, MultipointMember, SeriesLimit, SeriesPoint};

/// Default schedule `{1e-1, 1e-2, 1e-3, 1e-4}`.
pub const DEFAULT_SCHEDULE: [f64; 4] = [1e-1, 1e-2, 1e-3, 1e-4];
/// Absolute threshold of the vanishing-trend rule.
pub const TREND_ABS_TOL: f64 = 1e-6;
/// Largest accepted ratio `max / min` of the error/discrepancy bracket.
pub const RATIO_BRACKET_LIMIT: f64 = 1e3;
/// Discrepancies below this make the error/discrepancy ratio undefined.
const DEGENERATE: f64 = 1e-12;

/// `true` when a finite sequence looks like it tends to zero.
pub fn tends_to_zero(values: &[f64]) -> bool {
    match (values.first(), values.last()) {
        (Some(&first), Some(&last)) if values.iter().all(|v| v.is_finite()) => {
            last <= TREND_ABS_TOL || last < first / 100.0
        }
        _ => false,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    EpsilonToZero,
    /// Sequences `k -> inf`, scheduled as `eps = 1/k`.
    IndexToInfinity,
}

pub type SpecGenerator = Arc<dyn Fn(f64) -> Result<ProblemSpec> + Send + Sync>;

#[derive(Clone)]
pub struct ProblemFamily {
    schedule: Vec<f64>,
    direction: Direction,
    at_zero: ProblemSpec,
    generator: SpecGenerator,
}

impl fmt::Debug for ProblemFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemFamily")
            .field("schedule", &self.schedule)
            .field("direction", &self.direction)
            .field("at_zero", &self.at_zero)
            .finish_non_exhaustive()
    }
}

fn check_schedule(schedule: &[f64]) -> Result<()> {
    if schedule.is_empty() {
        return Err(BvpError::Invalid("empty parameter schedule".into()));
    }
    if schedule.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
        return Err(BvpError::Invalid("schedule values must be positive and finite".into()));
    }
    if schedule.windows(2).any(|w| w[1] >= w[0]) {
        return Err(BvpError::Invalid("schedule must be strictly decreasing".into()));
    }
    Ok(())
}

impl ProblemFamily {
    pub fn new(
        at_zero: ProblemSpec,
        schedule: Vec<f64>,
        generator: impl Fn(f64) -> Result<ProblemSpec> + Send + Sync + 'static,
    ) -> Result<Self> {
        check_schedule(&schedule)?;
        Ok(Self { schedule, direction: Direction::EpsilonToZero, at_zero, generator: Arc::new(generator) })
    }

    /// Sequence of problems `k = indices[0], indices[1], ...` tending to `at_limit`.
    pub fn sequence(
        at_limit: ProblemSpec,
        indices: Vec<usize>,
        generator: impl Fn(usize) -> Result<ProblemSpec> + Send + Sync + 'static,
    ) -> Result<Self> {
        if indices.contains(&0) {
            return Err(BvpError::Invalid("sequence indices start at 1".into()));
        }
        let schedule: Vec<f64> = indices.iter().map(|&k| 1.0 / k as f64).collect();
        check_schedule(&schedule)?;
        let generator = move |eps: f64| generator((1.0 / eps).round() as usize);
        Ok(Self { schedule, direction: Direction::IndexToInfinity, at_zero: at_limit, generator: Arc::new(generator) })
    }

    pub fn with_schedule(mut self, schedule: Vec<f64>) -> Result<Self> {
        check_schedule(&schedule)?;
        self.schedule = schedule;
        Ok(self)
    }

    pub fn schedule(&self) -> &[f64] {
        &self.schedule
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn at_zero(&self) -> &ProblemSpec {
        &self.at_zero
    }

    /// The problem at `eps`, checked against the shared structure.
    pub fn member(&self, eps: f64) -> Result<ProblemSpec> {
        let spec = (self.generator)(eps)?;
        let z = &self.at_zero;
        if spec.interval() != z.interval() {
            return Err(BvpError::IntervalMismatch);
        }
        if (spec.m(), spec.r(), spec.n()) != (z.m(), z.r(), z.n()) || spec.p() != z.p() {
            return Err(BvpError::Dimension(format!("family member at eps = {eps} changes m, r, n or p")));
        }
        Ok(spec)
    }
}

/// Grid resolution and rank policy shared by all experiments.
#[derive(Debug, Clone, Copy)]
pub struct ExperimentConfig {
    pub nodes: usize,
    pub policy: RankPolicy,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self { nodes: DEFAULT_NODES, policy: RankPolicy::default() }
    }
}

impl ExperimentConfig {
    fn grid(&self, spec: &ProblemSpec) -> Result<Grid> {
        Grid::uniform(spec.interval(), self.nodes)
    }
}

/// One scheduled column with its vanishing-trend verdict.
#[derive(Debug, Clone, Serialize)]
pub struct TrendTable {
    pub label: String,
    pub schedule: Vec<f64>,
    pub values: Vec<f64>,
    pub pass: bool,
}

impl TrendTable {
    fn new(label: impl Into<String>, schedule: &[f64], values: Vec<f64>) -> Self {
        let pass = tends_to_zero(&values);
        Self { label: label.into(), schedule: schedule.to_vec(), values, pass }
    }
}

/// Condition (0): the limit problem is well posed.
pub fn check_condition_0(at_zero: &ProblemSpec, cfg: &ExperimentConfig) -> Result<bool> {
    let cm = build_characteristic_matrix(at_zero, &cfg.grid(at_zero)?, &cfg.policy)?;
    let rm = at_zero.r() * at_zero.m();
    Ok(at_zero.q() == rm && cm.numerical_rank() == rm)
}

fn sample_derivatives(a: &MatrixFunction, grid: &Grid, n: usize) -> Result<MatrixTrajectory> {
    let samples = (0..=n)
        .map(|k| (0..grid.len()).map(|i| a.derivative_at(grid.node(i), k)).collect())
        .collect::<Result<Vec<Vec<CMatrix>>>>()?;
    Trajectory::new(*grid, samples)
}

/// `||A(.) - B(.)||_{n,p}` on `grid`.
pub fn coefficient_distance(a: &MatrixFunction, b: &MatrixFunction, grid: &Grid, n: usize, p: LebesgueExponent) -> Result<f64> {
    let diff = sample_derivatives(a, grid, n)?.sub(&sample_derivatives(b, grid, n)?)?;
    Ok(sobolev_norm(&diff, p))
}

fn coefficient_distances(spec: &ProblemSpec, at_zero: &ProblemSpec, grid: &Grid) -> Result<Vec<f64>> {
    spec.coeffs()
        .coefficients()
        .iter()
        .zip(at_zero.coeffs().coefficients())
        .map(|(a, b)| coefficient_distance(a, b, grid, spec.n(), spec.p()))
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct ConditionReport {
    pub columns: Vec<TrendTable>,
    pub pass: bool,
}

impl ConditionReport {
    fn new(columns: Vec<TrendTable>) -> Self {
        let pass = columns.iter().all(|c| c.pass);
        Self { columns, pass }
    }
}

/// Condition (I): `A_k(eps) -> A_k(0)` in the order-`n` Sobolev norm, per `k`.
pub fn check_condition_i(family: &ProblemFamily, cfg: &ExperimentConfig) -> Result<ConditionReport> {
    let z = family.at_zero();
    let grid = cfg.grid(z)?;
    let rows = family
        .schedule()
        .iter()
        .map(|&eps| coefficient_distances(&family.member(eps)?, z, &grid))
        .collect::<Result<Vec<_>>>()?;
    let columns = (0..z.r())
        .map(|k| TrendTable::new(format!("A_{k}"), family.schedule(), rows.iter().map(|r| r[k]).collect()))
        .collect();
    Ok(ConditionReport::new(columns))
}

/// `{1, t, t^2, sin t, cos t}` times each coordinate vector, with exact
/// derivatives up to `top`.
pub fn default_probes(grid: &Grid, m: usize, top: usize) -> Vec<(String, DerivativeStack)> {
    type Scalar = fn(usize, f64) -> f64;
    let shapes: [(&str, Scalar); 5] = [
        ("1", |k, _| if k == 0 { 1.0 } else { 0.0 }),
        ("t", |k, t| match k {
            0 => t,
            1 => 1.0,
            _ => 0.0,
        }),
        ("t^2", |k, t| match k {
            0 => t * t,
            1 => 2.0 * t,
            2 => 2.0,
            _ => 0.0,
        }),
        ("sin t", |k, t| (t + k as f64 * std::f64::consts::FRAC_PI_2).sin()),
        ("cos t", |k, t| (t + k as f64 * std::f64::consts::FRAC_PI_2).cos()),
    ];
    let mut out = Vec::with_capacity(5 * m);
    for (name, g) in shapes {
        for i in 0..m {
            let stack = Trajectory::from_fn(*grid, top, |k, t| {
                let mut v = CVector::zeros(m);
                v[i] = Complex64::new(g(k, t), 0.0);
                v
            })
            .expect("probe grid is valid");
            out.push((format!("({name}) e_{}", i + 1), stack));
        }
    }
    out
}

/// Condition (II) on a finite probe set: `|B(eps) y - B(0) y|_1` per probe.
pub fn check_condition_ii(family: &ProblemFamily, probes: &[(String, DerivativeStack)]) -> Result<ConditionReport> {
    if probes.is_empty() {
        return Err(BvpError::Invalid("condition (II) needs at least one probe".into()));
    }
    let z = family.at_zero();
    let members = family.schedule().iter().map(|&eps| family.member(eps)).collect::<Result<Vec<_>>>()?;
    let mut columns = Vec::with_capacity(probes.len());
    for (name, y) in probes {
        let limit = z.boundary().apply(y)?;
        let values = members
            .iter()
            .map(|s| {
                let v = s.boundary().apply(y)?;
                if v.len() != limit.len() {
                    return Err(BvpError::Dimension("boundary operators of the family differ in rows".into()));
                }
                Ok(vector_norm(&(v - &limit)))
            })
            .collect::<Result<Vec<_>>>()?;
        columns.push(TrendTable::new(name.clone(), family.schedule(), values));
    }
    Ok(ConditionReport::new(columns))
}

/// Condition (II) with [`default_probes`].
pub fn check_condition_ii_default(family: &ProblemFamily, cfg: &ExperimentConfig) -> Result<ConditionReport> {
    let z = family.at_zero();
    let probes = default_probes(&cfg.grid(z)?, z.m(), z.top_order());
    check_condition_ii(family, &probes)
}

fn matrix_distance(a: &CharacteristicMatrix, b: &CharacteristicMatrix) -> Result<f64> {
    if a.entries().shape() != b.entries().shape() {
        return Err(BvpError::Dimension("characteristic matrices of the family differ in shape".into()));
    }
    Ok(max_abs_diff(a.entries(), b.entries()))
}

/// Entrywise max `|M(eps) - M(0)|` per scheduled `eps`.
pub fn characteristic_convergence(family: &ProblemFamily, cfg: &ExperimentConfig) -> Result<TrendTable> {
    let z = family.at_zero();
    let grid = cfg.grid(z)?;
    let m0 = build_characteristic_matrix(z, &grid, &cfg.policy)?;
    let values = family
        .schedule()
        .par_iter()
        .map(|&eps| matrix_distance(&build_characteristic_matrix(&family.member(eps)?, &grid, &cfg.policy)?, &m0))
        .collect::<Result<Vec<_>>>()?;
    Ok(TrendTable::new("|M(eps) - M(0)|", family.schedule(), values))
}

#[derive(Debug, Clone, Serialize)]
pub struct SemicontinuityRow {
    pub eps: f64,
    pub dim_ker: usize,
    pub dim_coker: usize,
    pub holds: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SemicontinuityReport {
    pub dim_ker_0: usize,
    pub dim_coker_0: usize,
    pub rows: Vec<SemicontinuityRow>,
    /// Largest scheduled `eps` from which on both inequalities hold at every
    /// smaller scheduled value; `None` if they fail at the smallest one.
    pub threshold: Option<f64>,
    pub violations: Vec<f64>,
}

impl SemicontinuityReport {
    fn new(dim_ker_0: usize, dim_coker_0: usize, rows: Vec<SemicontinuityRow>) -> Self {
        let violations = rows.iter().filter(|r| !r.holds).map(|r| r.eps).collect();
        let mut threshold = None;
        for row in rows.iter().rev() {
            if !row.holds {
                break;
            }
            threshold = Some(row.eps);
        }
        Self { dim_ker_0, dim_coker_0, rows, threshold, violations }
    }

    /// Inequalities hold at the smallest scheduled parameter.
    pub fn pass(&self) -> bool {
        self.threshold.is_some()
    }
}

/// `dim ker(eps) <= dim ker(0)` and `dim coker(eps) <= dim coker(0)`.
pub fn semicontinuity_check(family: &ProblemFamily, cfg: &ExperimentConfig) -> Result<SemicontinuityReport> {
    let z = family.at_zero();
    let grid = cfg.grid(z)?;
    let r0 = solvability_report(&build_characteristic_matrix(z, &grid, &cfg.policy)?, z);
    let rows = family
        .schedule()
        .par_iter()
        .map(|&eps| {
            let spec = family.member(eps)?;
            let rep = solvability_report(&build_characteristic_matrix(&spec, &grid, &cfg.policy)?, &spec);
            Ok(SemicontinuityRow {
                eps,
                dim_ker: rep.dim_ker,
                dim_coker: rep.dim_coker,
                holds: rep.dim_ker <= r0.dim_ker && rep.dim_coker <= r0.dim_coker,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SemicontinuityReport::new(r0.dim_ker, r0.dim_coker, rows))
}

#[derive(Debug, Clone, Serialize)]
pub struct LimitRow {
    pub eps: f64,
    /// `||A_k(eps) - A_k(0)||_{n,p}` for `k = 0..r-1`.
    pub coefficient_distances: Vec<f64>,
    pub characteristic_distance: f64,
    pub dim_ker: usize,
    pub dim_coker: usize,
    pub well_posed: bool,
    /// `||y(eps) - y(0)||_{n+r,p}`.
    pub solution_error: Option<f64>,
    /// Discrepancy of `y(0)` in the `eps` problem.
    pub discrepancy: Option<f64>,
    pub ratio: Option<f64>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Verdict {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Verdict {
    fn new(name: &str, pass: bool, detail: impl Into<String>) -> Self {
        Self { name: name.into(), pass, detail: detail.into() }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LimitReport {
    pub direction: Direction,
    pub schedule: Vec<f64>,
    pub rows: Vec<LimitRow>,
    pub verdicts: Vec<Verdict>,
    /// `[min, max]` of the defined error/discrepancy ratios.
    pub ratio_bracket: Option<[f64; 2]>,
}

impl LimitReport {
    pub fn verdict(&self, name: &str) -> Option<bool> {
        self.verdicts.iter().find(|v| v.name == name).map(|v| v.pass)
    }

    pub fn solution_errors(&self) -> Vec<Option<f64>> {
        self.rows.iter().map(|r| r.solution_error).collect()
    }
}

fn limit_row(
    family: &ProblemFamily,
    eps: f64,
    grid: &Grid,
    cfg: &ExperimentConfig,
    m0: &CharacteristicMatrix,
    y0: &DerivativeStack,
) -> Result<LimitRow> {
    let z = family.at_zero();
    let spec = family.member(eps)?;
    let coefficient_distances = coefficient_distances(&spec, z, grid)?;
    let cm = build_characteristic_matrix(&spec, grid, &cfg.policy)?;
    let characteristic_distance = matrix_distance(&cm, m0)?;
    let rep = solvability_report(&cm, &spec);
    let mut row = LimitRow {
        eps,
        coefficient_distances,
        characteristic_distance,
        dim_ker: rep.dim_ker,
        dim_coker: rep.dim_coker,
        well_posed: rep.well_posed,
        solution_error: None,
        discrepancy: None,
        ratio: None,
        note: None,
    };
    if !rep.well_posed {
        row.note = Some(format!("not well posed (dim ker {}, dim coker {})", rep.dim_ker, rep.dim_coker));
        return Ok(row);
    }
    let init = CVector::zeros(spec.r() * spec.m());
    match solve_with_matrix(&spec, &cm, &init) {
        Ok(sol) => {
            let err = sobolev_norm(&sol.stack.sub(y0)?, spec.p());
            let disc = discrepancy(&spec, y0)?;
            row.solution_error = Some(err);
            row.discrepancy = Some(disc);
            if disc > DEGENERATE {
                row.ratio = Some(err / disc);
            } else {
                row.note = Some("degenerate ratio: discrepancy vanishes".into());
            }
        }
        Err(e) => row.note = Some(e.to_string()),
    }
    Ok(row)
}

/// Solves the limit problem and every scheduled problem, tabulating
/// coefficient, matrix and solution convergence together with the
/// discrepancy of the limit solution and the error/discrepancy ratio.
///
/// Fails when the limit problem is not well posed. Scheduled problems that
/// are not well posed are flagged in their row.
pub fn convergence_experiment(family: &ProblemFamily, cfg: &ExperimentConfig) -> Result<LimitReport> {
    let z = family.at_zero();
    let grid = cfg.grid(z)?;
    let m0 = build_characteristic_matrix(z, &grid, &cfg.policy)?;
    let r0 = solvability_report(&m0, z);
    if !r0.well_posed {
        return Err(BvpError::NotWellPosed(Box::new(r0)));
    }
    let y0 = solve_with_matrix(z, &m0, &CVector::zeros(z.r() * z.m()))?.stack;
    let rows = family
        .schedule()
        .par_iter()
        .map(|&eps| limit_row(family, eps, &grid, cfg, &m0, &y0))
        .collect::<Result<Vec<_>>>()?;
    let schedule = family.schedule();

    let mut verdicts = vec![Verdict::new("condition-0", true, "limit problem is well posed")];
    let cond_i: Vec<TrendTable> = (0..z.r())
        .map(|k| TrendTable::new(format!("A_{k}"), schedule, rows.iter().map(|r| r.coefficient_distances[k]).collect()))
        .collect();
    let cond_i = ConditionReport::new(cond_i);
    verdicts.push(Verdict::new("condition-I", cond_i.pass, "coefficients converge in the order-n Sobolev norm"));
    let cond_ii = check_condition_ii(family, &default_probes(&grid, z.m(), z.top_order()))?;
    let failing: Vec<&str> = cond_ii.columns.iter().filter(|c| !c.pass).map(|c| c.label.as_str()).collect();
    verdicts.push(Verdict::new(
        "condition-II",
        cond_ii.pass,
        if failing.is_empty() { "all probes converge".to_string() } else { format!("failing probes: {}", failing.join(", ")) },
    ));
    let chars = TrendTable::new("M", schedule, rows.iter().map(|r| r.characteristic_distance).collect());
    verdicts.push(Verdict::new("characteristic", chars.pass, "entrywise |M(eps) - M(0)| tends to zero"));
    let semi = SemicontinuityReport::new(
        r0.dim_ker,
        r0.dim_coker,
        rows.iter()
            .map(|r| SemicontinuityRow { eps: r.eps, dim_ker: r.dim_ker, dim_coker: r.dim_coker, holds: r.dim_ker <= r0.dim_ker && r.dim_coker <= r0.dim_coker })
            .collect(),
    );
    verdicts.push(Verdict::new("semicontinuity", semi.pass(), match semi.threshold {
            Some(t) => format!("inequalities hold for eps <= {t:e}"),
            None => "inequalities fail at the smallest scheduled eps".to_string(),
        }));

    let errors: Option<Vec<f64>> = rows.iter().map(|r| r.solution_error).collect();
    let solution_pass = errors.as_deref().is_some_and(tends_to_zero);
    verdicts.push(Verdict::new(
        "solution",
        solution_pass,
        if errors.is_some() { "||y(eps) - y(0)||_{n+r,p} trend" } else { "some scheduled problems could not be solved" },
    ));

    let ratios: Vec<f64> = rows.iter().filter_map(|r| r.ratio).collect();
    let ratio_bracket = if ratios.is_empty() {
        None
    } else {
        Some([ratios.iter().copied().fold(f64::INFINITY, f64::min), ratios.iter().copied().fold(0.0, f64::max)])
    };
    let (bracket_pass, detail) = match ratio_bracket {
        Some([lo, hi]) if lo > 0.0 => (hi / lo < RATIO_BRACKET_LIMIT, format!("max/min = {:.3e}", hi / lo)),
        Some(_) => (false, "zero ratio".to_string()),
        None => (false, "ratio undefined on every row".to_string()),
    };
    verdicts.push(Verdict::new("ratio-bracket", bracket_pass, detail));

    Ok(LimitReport { direction: family.direction(), schedule: schedule.to_vec(), rows, verdicts, ratio_bracket })
}
