//! Problem documents: JSON schema and conversion to the numerical model.
//!
//! Every entry that may vary along a family is either a literal or an
//! expression string in `eps`; a document describes the whole family and the
//! plain problem is its member at `eps = 0`.

use bvpkit::boundary::IntegralTerm;
use bvpkit::expr::{parse_expression, Expr, Var};
use bvpkit::function::ExprMatrix;
use bvpkit::grid::Trajectory;
use bvpkit::limits::multipoint::DEFAULT_SERIES_CAP;
use bvpkit::limits::{MultipointFamily, MultipointMember, ProblemFamily, SeriesLimit, SeriesPoint, DEFAULT_SCHEDULE};
use bvpkit::prelude::*;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// A complex scalar as `[re, im]`, or an expression string.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Pair([f64; 2]),
    Expr(String),
}

/// A real number, or an expression string in `eps`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Real {
    Number(f64),
    Expr(String),
}

/// Rows of entries.
pub type MatrixDoc = Vec<Vec<Entry>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntervalDoc {
    pub a: f64,
    pub b: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrdersDoc {
    pub r: usize,
    pub m: usize,
    pub n: usize,
}

/// Lebesgue exponent: a number `>= 1` or `"inf"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ExponentDoc {
    Finite(f64),
    Named(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TableDerivatives {
    /// `samples[k]` holds order `k` explicitly.
    #[default]
    Stored,
    /// Only `samples[0]` is given; higher orders by finite differences.
    FiniteDifference,
}

/// A matrix-valued function of `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FunctionDoc {
    /// Entries may use `eps` but not `t`.
    Constant { matrix: MatrixDoc },
    /// `sum_k terms[k] t^k`.
    Polynomial { terms: Vec<MatrixDoc> },
    /// Entries are expressions in `t` and `eps`.
    Expression { matrix: MatrixDoc },
    /// `samples[k][i]` is order `k` at node `i` of a uniform grid over the interval.
    Table {
        samples: Vec<Vec<MatrixDoc>>,
        #[serde(default)]
        derivatives: TableDerivatives,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointDoc {
    pub t: Real,
    /// Derivative order; only integers are supported.
    pub order: f64,
    pub matrix: MatrixDoc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegralDoc {
    pub phi: FunctionDoc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundaryDoc {
    pub q: usize,
    #[serde(default)]
    pub points: Vec<PointDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub integral: Option<IntegralDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RhsDoc {
    pub f: FunctionDoc,
    pub c: Vec<Entry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LimitPointDoc {
    pub t: f64,
    /// One `q x m` matrix per order `0..n+r-1`.
    pub beta: Vec<MatrixDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesPointDoc {
    pub t: Real,
    pub beta: Vec<MatrixDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MultipointDoc {
    pub q: usize,
    pub limits: Vec<LimitPointDoc>,
    /// `series[0]` is the zero series; `series[j]` converges to `limits[j-1]`.
    pub series: Vec<Vec<SeriesPointDoc>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<Vec<f64>>,
    /// Indices `k` of a sequence; member `k` is the document at `eps = 1/k`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sequence: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub multipoint: Option<MultipointDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemDocument {
    pub interval: IntervalDoc,
    pub orders: OrdersDoc,
    pub p: ExponentDoc,
    /// `coefficients[k]` multiplies `y^(k)`, `k = 0..r-1`.
    pub coefficients: Vec<FunctionDoc>,
    /// Omitted when `family.multipoint` supplies the boundary operator.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary: Option<BoundaryDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rhs: Option<RhsDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<FamilyDoc>,
}

fn invalid(msg: impl Into<String>) -> BvpError {
    BvpError::Invalid(msg.into())
}

fn parse(src: &str, allow_t: bool, what: &str) -> Result<Expr> {
    let e = parse_expression(src)?;
    if !allow_t && e.uses(Var::T) {
        return Err(invalid(format!("{what}: '{src}' may not depend on t")));
    }
    Ok(e)
}

fn scalar(e: &Entry, eps: f64, what: &str) -> Result<Complex64> {
    let z = match e {
        Entry::Pair([re, im]) => Complex64::new(*re, *im),
        Entry::Expr(s) => parse(s, false, what)?.eval(0.0, eps),
    };
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(BvpError::NonFinite(if z.re.is_finite() { z.im } else { z.re }));
    }
    Ok(z)
}

fn real(x: &Real, eps: f64, what: &str) -> Result<f64> {
    match x {
        Real::Number(v) => Ok(*v),
        Real::Expr(s) => {
            let z = parse(s, false, what)?.eval(0.0, eps);
            if z.im != 0.0 || !z.re.is_finite() {
                return Err(invalid(format!("{what}: '{s}' is not a finite real number")));
            }
            Ok(z.re)
        }
    }
}

fn check_shape(m: &MatrixDoc, shape: (usize, usize), what: &str) -> Result<()> {
    if m.len() != shape.0 || m.iter().any(|row| row.len() != shape.1) {
        return Err(BvpError::Dimension(format!("{what} must be {}x{}", shape.0, shape.1)));
    }
    Ok(())
}

fn matrix(m: &MatrixDoc, shape: (usize, usize), eps: f64, what: &str) -> Result<CMatrix> {
    check_shape(m, shape, what)?;
    let mut out = CMatrix::zeros(shape.0, shape.1);
    for (i, row) in m.iter().enumerate() {
        for (j, e) in row.iter().enumerate() {
            out[(i, j)] = scalar(e, eps, what)?;
        }
    }
    Ok(out)
}

fn vector(v: &[Entry], len: usize, eps: f64, what: &str) -> Result<CVector> {
    if v.len() != len {
        return Err(BvpError::Dimension(format!("{what} has length {}, expected {len}", v.len())));
    }
    let vals = v.iter().map(|e| scalar(e, eps, what)).collect::<Result<Vec<_>>>()?;
    Ok(CVector::from_vec(vals))
}

impl FunctionDoc {
    /// Evaluates the description at `eps`; `orders` is how many derivatives
    /// the problem will request.
    pub fn build(&self, shape: (usize, usize), interval: Interval, orders: usize, eps: f64, what: &str) -> Result<MatrixFunction> {
        match self {
            FunctionDoc::Constant { matrix: m } => Ok(MatrixFunction::Constant(matrix(m, shape, eps, what)?)),
            FunctionDoc::Polynomial { terms } => {
                if terms.is_empty() {
                    return Err(invalid(format!("{what}: polynomial without terms")));
                }
                let terms = terms.iter().map(|m| matrix(m, shape, eps, what)).collect::<Result<Vec<_>>>()?;
                Ok(MatrixFunction::Polynomial(terms))
            }
            FunctionDoc::Expression { matrix: m } => {
                check_shape(m, shape, what)?;
                let entries = m
                    .iter()
                    .flatten()
                    .map(|e| match e {
                        Entry::Pair([re, im]) => Ok(Expr::constant(Complex64::new(*re, *im))),
                        Entry::Expr(s) => parse(s, true, what),
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(MatrixFunction::Expression(ExprMatrix::new(shape.0, shape.1, entries, eps, orders)?))
            }
            FunctionDoc::Table { samples, derivatives } => {
                let first = samples.first().ok_or_else(|| invalid(format!("{what}: empty table")))?;
                let grid = Grid::uniform(interval, first.len())?;
                let rows = samples
                    .iter()
                    .map(|order| order.iter().map(|m| matrix(m, shape, eps, what)).collect::<Result<Vec<_>>>())
                    .collect::<Result<Vec<_>>>()?;
                let traj = match derivatives {
                    TableDerivatives::Stored => Trajectory::new(grid, rows)?,
                    TableDerivatives::FiniteDifference => {
                        if rows.len() != 1 {
                            return Err(invalid(format!("{what}: finite-difference tables carry order 0 only")));
                        }
                        MatrixTrajectory::with_fd_derivatives(grid, rows.into_iter().next().unwrap_or_default(), orders)?
                    }
                };
                Ok(MatrixFunction::Table(traj))
            }
        }
    }
}

impl ProblemDocument {
    pub fn from_json(text: &str) -> std::result::Result<Self, CliError> {
        let doc: ProblemDocument = serde_json::from_str(text)?;
        doc.check()?;
        Ok(doc)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("documents always serialize")
    }

    /// Structural checks that do not need evaluation.
    pub fn check(&self) -> std::result::Result<(), CliError> {
        let fractional = self
            .boundary
            .iter()
            .flat_map(|b| b.points.iter())
            .enumerate()
            .find(|(_, p)| p.order.fract() != 0.0 || p.order < 0.0);
        if let Some((i, p)) = fractional {
            if p.order < 0.0 {
                return Err(CliError::Schema(format!("boundary point {i}: negative order {}", p.order)));
            }
            return Err(CliError::Diagnostic(Diagnostic::new(
                DiagnosticKind::FractionalOrder,
                format!(
                    "boundary point {i}: order {} is fractional; Caputo derivative terms are not supported, only integer orders",
                    p.order
                ),
            )));
        }
        if self.coefficients.len() != self.orders.r {
            return Err(CliError::Schema(format!("{} coefficients given, r = {}", self.coefficients.len(), self.orders.r)));
        }
        let multipoint = self.family.as_ref().and_then(|f| f.multipoint.as_ref());
        if self.boundary.is_none() && multipoint.is_none() {
            return Err(CliError::Schema("a boundary section is required unless family.multipoint is given".into()));
        }
        if let Some(f) = &self.family {
            if f.schedule.is_some() && f.sequence.is_some() {
                return Err(CliError::Schema("family: give either schedule or sequence, not both".into()));
            }
        }
        Ok(())
    }

    pub fn interval(&self) -> Result<Interval> {
        Interval::new(self.interval.a, self.interval.b)
    }

    pub fn exponent(&self) -> Result<LebesgueExponent> {
        match &self.p {
            ExponentDoc::Finite(p) => LebesgueExponent::new(*p),
            ExponentDoc::Named(s) if matches!(s.as_str(), "inf" | "infinity") => Ok(LebesgueExponent::infinity()),
            ExponentDoc::Named(s) => Err(invalid(format!("exponent '{s}' is neither a number nor \"inf\""))),
        }
    }

    fn multipoint(&self) -> Option<&MultipointDoc> {
        self.family.as_ref().and_then(|f| f.multipoint.as_ref())
    }

    fn q(&self) -> usize {
        match (&self.boundary, self.multipoint()) {
            (Some(b), _) => b.q,
            (None, Some(mp)) => mp.q,
            (None, None) => 0,
        }
    }

    pub fn coefficients_at(&self, eps: f64) -> Result<CoefficientSet> {
        let OrdersDoc { m, n, .. } = self.orders;
        let interval = self.interval()?;
        let by_order = self
            .coefficients
            .iter()
            .enumerate()
            .map(|(k, c)| c.build((m, m), interval, n, eps, &format!("coefficient A_{k}")))
            .collect::<Result<Vec<_>>>()?;
        CoefficientSet::new(m, n, by_order)
    }

    fn boundary_at(&self, eps: f64) -> Result<BoundaryOperator> {
        let Some(b) = &self.boundary else {
            let mp = self.multipoint().expect("checked in check()");
            let limits = self.multipoint_limits(mp)?;
            return Ok(self.multipoint_family(mp, limits, DEFAULT_SERIES_CAP)?.limit_operator());
        };
        let (q, m) = (b.q, self.orders.m);
        let points = b
            .points
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let what = format!("boundary point {i}");
                Ok(PointTerm::new(real(&p.t, eps, &what)?, p.order as usize, matrix(&p.matrix, (q, m), eps, &what)?))
            })
            .collect::<Result<Vec<_>>>()?;
        let integral = match &b.integral {
            Some(i) => Some(IntegralTerm::new(i.phi.build((q, m), self.interval()?, 0, eps, "integral kernel")?)),
            None => None,
        };
        Ok(BoundaryOperator::new(q, points, integral))
    }

    fn rhs_at(&self, eps: f64) -> Result<Option<RightHandSide>> {
        let Some(rhs) = &self.rhs else { return Ok(None) };
        let f = rhs.f.build((self.orders.m, 1), self.interval()?, self.orders.n, eps, "rhs f")?;
        Ok(Some(RightHandSide::new(f, vector(&rhs.c, self.q(), eps, "rhs c")?)))
    }

    /// The problem at parameter `eps`; `spec_at(0.0)` is the plain problem.
    pub fn spec_at(&self, eps: f64) -> Result<ProblemSpec> {
        ProblemSpec::new(self.interval()?, self.coefficients_at(eps)?, self.boundary_at(eps)?, self.exponent()?, self.rhs_at(eps)?)
    }

    /// The problem family of the `family` section; `schedule` overrides the
    /// document's schedule.
    pub fn problem_family(&self, schedule: Option<Vec<f64>>, series_cap: usize) -> std::result::Result<ProblemFamily, CliError> {
        let fam = self.family.as_ref().ok_or_else(|| CliError::Usage("the family command needs a family section".into()))?;
        if self.rhs.is_none() {
            return Err(CliError::Usage("the family command needs an rhs section".into()));
        }
        let explicit = schedule.is_some();
        let schedule = schedule
            .or_else(|| fam.schedule.clone())
            .or_else(|| fam.sequence.as_ref().map(|ks| ks.iter().map(|&k| 1.0 / k as f64).collect()))
            .unwrap_or_else(|| DEFAULT_SCHEDULE.to_vec());
        if let Some(mp) = &fam.multipoint {
            let limits = self.multipoint_limits(mp)?;
            let mf = self.multipoint_family(mp, limits, series_cap)?;
            let rhs = self.rhs_at(0.0)?.expect("checked above");
            return Ok(mf.problem_family(self.interval()?, self.coefficients_at(0.0)?, self.exponent()?, rhs.f, schedule)?);
        }
        let at_zero = self.spec_at(0.0)?;
        let doc = self.clone();
        match (&fam.sequence, explicit) {
            (Some(ks), false) => Ok(ProblemFamily::sequence(at_zero, ks.clone(), move |k| doc.spec_at(1.0 / k as f64))?),
            _ => Ok(ProblemFamily::new(at_zero, schedule, move |eps| doc.spec_at(eps))?),
        }
    }

    fn multipoint_limits(&self, mp: &MultipointDoc) -> Result<Vec<SeriesLimit>> {
        let shape = (mp.q, self.orders.m);
        mp.limits
            .iter()
            .enumerate()
            .map(|(j, l)| {
                let what = format!("multipoint limit {j}");
                let beta = l.beta.iter().map(|b| matrix(b, shape, 0.0, &what)).collect::<Result<Vec<_>>>()?;
                Ok(SeriesLimit { t: l.t, beta })
            })
            .collect()
    }

    /// The multipoint family; `None` when the document has no multipoint section.
    pub fn multipoint_family_of(&self, series_cap: usize) -> Result<Option<MultipointFamily>> {
        match self.multipoint() {
            Some(mp) => {
                let limits = self.multipoint_limits(mp)?;
                Ok(Some(self.multipoint_family(mp, limits, series_cap)?))
            }
            None => Ok(None),
        }
    }

    fn multipoint_family(&self, mp: &MultipointDoc, limits: Vec<SeriesLimit>, series_cap: usize) -> Result<MultipointFamily> {
        let (q, m) = (mp.q, self.orders.m);
        let top = self.orders.n + self.orders.r;
        let c_doc = self.rhs.as_ref().map(|r| r.c.clone());
        let c_at = move |eps: f64| match &c_doc {
            Some(c) => vector(c, q, eps, "rhs c"),
            None => Ok(CVector::zeros(q)),
        };
        let c0 = c_at(0.0)?;
        let series = mp.series.clone();
        let gen = move |eps: f64| {
            let series = series
                .iter()
                .enumerate()
                .map(|(j, s)| {
                    s.iter()
                        .enumerate()
                        .map(|(i, p)| {
                            let what = format!("multipoint series {j} point {i}");
                            let beta = p.beta.iter().map(|b| matrix(b, (q, m), eps, &what)).collect::<Result<Vec<_>>>()?;
                            Ok(SeriesPoint { t: real(&p.t, eps, &what)?, beta })
                        })
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(MultipointMember { series, c: c_at(eps)? })
        };
        Ok(MultipointFamily::new(q, m, top, limits, c0, gen)?.with_series_cap(series_cap))
    }
}
