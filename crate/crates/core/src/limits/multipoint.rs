//! Multipoint boundary operators gathered into series,
//!
//! ```text
//! B(eps) y = sum_d sum_j sum_k beta_{j,k}^(d)(eps) y^(d)(t_{j,k}(eps))
//! ```
//!
//! Series `j >= 1` have limit points `t_j` and limit matrices `beta_j^(d)`;
//! series `0` has no limit and should vanish. The limit operator is
//! `sum_d sum_j beta_j^(d) y^(d)(t_j)`.
//!
//! Matrix sizes are measured by the entrywise absolute-value sum.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use super::{tends_to_zero, ProblemFamily};
use crate::boundary::{BoundaryOperator, PointTerm};
use crate::function::MatrixFunction;
use crate::grid::{Interval, LebesgueExponent};
use crate::linalg::entrywise_norm;
use crate::ode::CoefficientSet;
use crate::problem::{ProblemSpec, RightHandSide};
use crate::{BvpError, CMatrix, CVector, Result};

/// Default cap on the size of one series.
pub const DEFAULT_SERIES_CAP: usize = 64;

/// One point of a series with its matrices `beta^(d)`, `d = 0..n+r-1`.
#[derive(Debug, Clone)]
pub struct SeriesPoint {
    pub t: f64,
    pub beta: Vec<CMatrix>,
}

/// Limit point `t_j` and matrices `beta_j^(d)` of series `j >= 1`.
#[derive(Debug, Clone)]
pub struct SeriesLimit {
    pub t: f64,
    pub beta: Vec<CMatrix>,
}

/// Family member at one `eps`: `series[0]` is the zero series (possibly
/// empty), `series[j]` converges to limit `j`.
#[derive(Debug, Clone)]
pub struct MultipointMember {
    pub series: Vec<Vec<SeriesPoint>>,
    pub c: CVector,
}

pub type MemberGenerator = Arc<dyn Fn(f64) -> Result<MultipointMember> + Send + Sync>;

#[derive(Clone)]
pub struct MultipointFamily {
    q: usize,
    m: usize,
    top: usize,
    limits: Vec<SeriesLimit>,
    c0: CVector,
    generator: MemberGenerator,
    series_cap: usize,
}

impl fmt::Debug for MultipointFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MultipointFamily")
            .field("q", &self.q)
            .field("m", &self.m)
            .field("top", &self.top)
            .field("limits", &self.limits)
            .field("series_cap", &self.series_cap)
            .finish_non_exhaustive()
    }
}

fn check_betas(beta: &[CMatrix], q: usize, m: usize, top: usize, what: &str) -> Result<()> {
    if beta.len() != top {
        return Err(BvpError::Invalid(format!("{what}: {} matrices, expected one per order 0..{top}", beta.len())));
    }
    if beta.iter().any(|b| b.shape() != (q, m)) {
        return Err(BvpError::Dimension(format!("{what}: matrices must be {q}x{m}")));
    }
    Ok(())
}

impl MultipointFamily {
    /// `top` is `n + r`; every point carries `top` matrices of shape `q x m`.
    pub fn new(
        q: usize,
        m: usize,
        top: usize,
        limits: Vec<SeriesLimit>,
        c0: CVector,
        generator: impl Fn(f64) -> Result<MultipointMember> + Send + Sync + 'static,
    ) -> Result<Self> {
        if top == 0 {
            return Err(BvpError::Invalid("n + r must be positive".into()));
        }
        for (j, lim) in limits.iter().enumerate() {
            check_betas(&lim.beta, q, m, top, &format!("limit of series {}", j + 1))?;
        }
        if c0.len() != q {
            return Err(BvpError::Dimension(format!("limit c has length {}, expected {q}", c0.len())));
        }
        Ok(Self { q, m, top, limits, c0, generator: Arc::new(generator), series_cap: DEFAULT_SERIES_CAP })
    }

    pub fn with_series_cap(mut self, cap: usize) -> Self {
        self.series_cap = cap;
        self
    }

    pub fn limits(&self) -> &[SeriesLimit] {
        &self.limits
    }

    pub fn series_cap(&self) -> usize {
        self.series_cap
    }

    /// The member at `eps`, checked for well-formed series.
    pub fn member(&self, eps: f64) -> Result<MultipointMember> {
        let member = (self.generator)(eps)?;
        if member.series.len() != self.limits.len() + 1 {
            return Err(BvpError::Invalid(format!(
                "member at eps = {eps} has {} series, expected {} (zero series first)",
                member.series.len(),
                self.limits.len() + 1
            )));
        }
        for (j, series) in member.series.iter().enumerate() {
            if j > 0 && series.is_empty() {
                return Err(BvpError::Invalid(format!("series {j} is empty at eps = {eps}")));
            }
            if series.len() > self.series_cap {
                return Err(BvpError::Invalid(format!(
                    "series {j} has {} points at eps = {eps}, above the cap {}",
                    series.len(),
                    self.series_cap
                )));
            }
            for pt in series {
                check_betas(&pt.beta, self.q, self.m, self.top, &format!("series {j} at eps = {eps}"))?;
            }
        }
        if member.c.len() != self.q {
            return Err(BvpError::Dimension(format!("c has length {}, expected {}", member.c.len(), self.q)));
        }
        Ok(member)
    }

    fn operator_from<'a>(&self, points: impl Iterator<Item = (f64, &'a [CMatrix])>) -> BoundaryOperator {
        let mut terms = Vec::new();
        for (t, beta) in points {
            for (d, b) in beta.iter().enumerate() {
                if b.iter().any(|z| z.norm() != 0.0) {
                    terms.push(PointTerm::new(t, d, b.clone()));
                }
            }
        }
        BoundaryOperator::new(self.q, terms, None)
    }

    pub fn operator_at(&self, eps: f64) -> Result<BoundaryOperator> {
        let member = self.member(eps)?;
        Ok(self.operator_from(member.series.iter().flatten().map(|p| (p.t, p.beta.as_slice()))))
    }

    pub fn limit_operator(&self) -> BoundaryOperator {
        self.operator_from(self.limits.iter().map(|l| (l.t, l.beta.as_slice())))
    }

    /// The problem family `L y = f`, `B(eps) y = c(eps)` with fixed
    /// coefficients and right-hand side `f`.
    pub fn problem_family(
        &self,
        interval: Interval,
        coeffs: CoefficientSet,
        p: LebesgueExponent,
        f: MatrixFunction,
        schedule: Vec<f64>,
    ) -> Result<ProblemFamily> {
        if coeffs.m() != self.m || coeffs.n() + coeffs.r() != self.top {
            return Err(BvpError::Dimension("coefficients do not match the family's m and n + r".into()));
        }
        let at_zero = ProblemSpec::new(
            interval,
            coeffs.clone(),
            self.limit_operator(),
            p,
            Some(RightHandSide::new(f.clone(), self.c0.clone())),
        )?;
        let fam = self.clone();
        ProblemFamily::new(at_zero, schedule, move |eps| {
            let member = fam.member(eps)?;
            let op = fam.operator_from(member.series.iter().flatten().map(|p| (p.t, p.beta.as_slice())));
            ProblemSpec::new(interval, coeffs.clone(), op, p, Some(RightHandSide::new(f.clone(), member.c)))
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AssumptionKind {
    /// The quantity must tend to zero.
    ToZero,
    /// The quantity must stay bounded.
    Bounded,
}

#[derive(Debug, Clone, Serialize)]
pub struct AssumptionRow {
    pub name: &'static str,
    pub kind: AssumptionKind,
    /// Largest value over series and orders, per scheduled `eps`.
    pub values: Vec<f64>,
    pub pass: bool,
    /// Whether the assumption belongs to the set required for this `p`.
    pub required: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct AssumptionReport {
    pub p: LebesgueExponent,
    pub schedule: Vec<f64>,
    pub rows: Vec<AssumptionRow>,
    /// All required assumptions pass.
    pub pass: bool,
}

impl AssumptionReport {
    pub fn row(&self, name: &str) -> Option<&AssumptionRow> {
        self.rows.iter().find(|r| r.name == name)
    }
}

/// Per-member values of every assumption quantity, in the order
/// alpha, beta, gamma, delta, gamma_p, gamma'.
fn assumption_values(family: &MultipointFamily, member: &MultipointMember, p: LebesgueExponent) -> [f64; 6] {
    let top = family.top;
    let exponent = p.conjugate().reciprocal();
    let (mut alpha, mut beta, mut gamma, mut gamma_p, mut gamma_prime) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for (lim, series) in family.limits.iter().zip(&member.series[1..]) {
        for pt in series {
            alpha = alpha.max((pt.t - lim.t).abs());
        }
        for d in 0..top {
            let mut sum = CMatrix::zeros(family.q, family.m);
            let mut weighted = 0.0;
            for pt in series {
                sum += &pt.beta[d];
                weighted += entrywise_norm(&pt.beta[d]) * (pt.t - lim.t).abs();
            }
            beta = beta.max(entrywise_norm(&(sum - &lim.beta[d])));
            gamma = gamma.max(weighted);
            if d + 2 <= top {
                gamma_prime = gamma_prime.max(weighted);
            }
            if d + 1 == top {
                let held: f64 = series.iter().map(|pt| entrywise_norm(&pt.beta[d]) * (pt.t - lim.t).abs().powf(exponent)).fold(0.0, |acc, x| acc + x);
                gamma_p = gamma_p.max(held);
            }
        }
    }
    let delta = (0..top)
        .map(|d| member.series[0].iter().map(|pt| entrywise_norm(&pt.beta[d])).fold(0.0, |acc, x| acc + x))
        .fold(0.0, f64::max);
    [alpha, beta, gamma, delta, gamma_p, gamma_prime]
}

/// Evaluates the multipoint assumptions on `schedule`.
///
/// Required sets: `p = inf` needs alpha, beta, gamma, delta; finite `p`
/// needs alpha, beta, gamma_p, gamma', delta. The bounded assumption
/// gamma_p passes when no value exceeds ten times the first one.
pub fn check_multipoint_assumptions(family: &MultipointFamily, p: LebesgueExponent, schedule: &[f64]) -> Result<AssumptionReport> {
    super::check_schedule(schedule)?;
    let values = schedule
        .iter()
        .map(|&eps| Ok(assumption_values(family, &family.member(eps)?, p)))
        .collect::<Result<Vec<_>>>()?;
    let names = ["alpha", "beta", "gamma", "delta", "gamma_p", "gamma'"];
    let required: [bool; 6] = if p.is_infinite() { [true, true, true, true, false, false] } else { [true, true, false, true, true, true] };
    let rows: Vec<AssumptionRow> = names
        .iter()
        .enumerate()
        .map(|(i, &name)| {
            let column: Vec<f64> = values.iter().map(|v| v[i]).collect();
            let (kind, pass) = if name == "gamma_p" {
                let first = column[0];
                (AssumptionKind::Bounded, column.iter().all(|v| v.is_finite() && *v <= 10.0 * first + 1e-12))
            } else {
                (AssumptionKind::ToZero, tends_to_zero(&column))
            };
            AssumptionRow { name, kind, values: column, pass, required: required[i] }
        })
        .collect();
    let pass = rows.iter().filter(|r| r.required).all(|r| r.pass);
    Ok(AssumptionReport { p, schedule: schedule.to_vec(), rows, pass })
}
