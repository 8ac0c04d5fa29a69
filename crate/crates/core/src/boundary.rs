//! Boundary operators: finite sums of point evaluations of derivatives plus an
//! optional integral against the top derivative,
//!
//! ```text
//! B y = sum_k M_k y^(d_k)(t_k) + integral_a^b Phi(t) y^(n+r)(t) dt
//! ```
//!
//! Point orders must stay below `n + r`: evaluating the top derivative at a
//! point is not continuous on the solution space.

use serde::Serialize;

use crate::function::MatrixFunction;
use crate::grid::{DerivativeStack, Grid, Interval, LebesgueExponent, MatrixTrajectory};
use crate::linalg::entrywise_norm;
use crate::problem::ProblemSpec;
use crate::{BvpError, CMatrix, CVector, Complex64, Result};

/// Largest Lebesgue constant of the cubic interpolation used between nodes.
const INTERPOLATION_CONSTANT: f64 = 1.7;

/// `matrix * y^(order)(t)`.
#[derive(Debug, Clone)]
pub struct PointTerm {
    pub t: f64,
    pub order: usize,
    pub matrix: CMatrix,
}

impl PointTerm {
    pub fn new(t: f64, order: usize, matrix: CMatrix) -> Self {
        Self { t, order, matrix }
    }
}

/// `integral Phi(t) y^(n+r)(t) dt` with `Phi` of shape `q x m`.
#[derive(Debug, Clone)]
pub struct IntegralTerm {
    pub phi: MatrixFunction,
}

impl IntegralTerm {
    pub fn new(phi: MatrixFunction) -> Self {
        Self { phi }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiagnosticKind {
    Underdetermined,
    Overdetermined,
    OrderOutOfRange,
    TopDerivativePoint,
    PointOutOfInterval,
    FractionalOrder,
    RankFragile,
    IllConditioned,
    IntegrationDefect,
    NotWellPosed,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    pub message: String,
}

impl Diagnostic {
    pub fn new(kind: DiagnosticKind, message: impl Into<String>) -> Self {
        Self { kind, message: message.into() }
    }
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

#[derive(Debug, Clone)]
pub struct BoundaryOperator {
    q: usize,
    points: Vec<PointTerm>,
    integral: Option<IntegralTerm>,
}

impl BoundaryOperator {
    pub fn new(q: usize, points: Vec<PointTerm>, integral: Option<IntegralTerm>) -> Self {
        Self { q, points, integral }
    }

    /// Number of scalar conditions.
    pub fn q(&self) -> usize {
        self.q
    }

    pub fn points(&self) -> &[PointTerm] {
        &self.points
    }

    pub fn integral(&self) -> Option<&IntegralTerm> {
        self.integral.as_ref()
    }

    pub(crate) fn check_shapes(&self, m: usize) -> Result<()> {
        for (k, term) in self.points.iter().enumerate() {
            if term.matrix.shape() != (self.q, m) {
                return Err(BvpError::Dimension(format!(
                    "point term {k} has shape {:?}, expected {}x{m}",
                    term.matrix.shape(),
                    self.q
                )));
            }
        }
        if let Some(int) = &self.integral {
            if int.phi.shape() != (self.q, m) {
                return Err(BvpError::Dimension(format!(
                    "integral kernel has shape {:?}, expected {}x{m}",
                    int.phi.shape(),
                    self.q
                )));
            }
        }
        Ok(())
    }

    fn check_point(&self, term: &PointTerm, interval: Interval, top: usize) -> Result<()> {
        if term.order == top {
            return Err(BvpError::TopDerivativePoint(top));
        }
        if term.order > top {
            return Err(BvpError::OrderOutOfRange { order: term.order, max: top.saturating_sub(1) });
        }
        if !point_inside(interval, term.t) {
            return Err(BvpError::PointOutsideInterval { point: term.t, a: interval.a(), b: interval.b() });
        }
        Ok(())
    }

    /// `B y`; the top order of `y` plays the role of `n + r`.
    pub fn apply(&self, y: &DerivativeStack) -> Result<CVector> {
        self.check_shapes(y.dim())?;
        let top = y.max_order();
        let grid = y.grid();
        let mut out = CVector::zeros(self.q);
        for term in &self.points {
            self.check_point(term, grid.interval(), top)?;
            out += &term.matrix * y.value_at(term.order, clamp_point(grid.interval(), term.t));
        }
        if let Some(int) = &self.integral {
            for (i, yi) in y.order(top).iter().enumerate() {
                let w = Complex64::new(grid.trapezoid_weight(i), 0.0);
                out += int.phi.value_at(grid.node(i))? * yi * w;
            }
        }
        Ok(out)
    }

    /// `[B Y]`: column `j` is `B` applied to column `j` of `Y`.
    pub fn apply_to_matrix(&self, y: &MatrixTrajectory) -> Result<CMatrix> {
        let cols = y.shape().1;
        let mut out = CMatrix::zeros(self.q, cols);
        for j in 0..cols {
            out.set_column(j, &self.apply(&y.column(j))?);
        }
        Ok(out)
    }

    /// Structural diagnostics against a problem; never fails.
    pub fn validate(&self, spec: &ProblemSpec) -> Vec<Diagnostic> {
        self.validate_for(spec.interval(), spec.r(), spec.m(), spec.n())
    }

    pub fn validate_for(&self, interval: Interval, r: usize, m: usize, n: usize) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        let rm = r * m;
        if self.q < rm {
            out.push(Diagnostic::new(
                DiagnosticKind::Underdetermined,
                format!("underdetermined: {} conditions for rm = {rm}", self.q),
            ));
        } else if self.q > rm {
            out.push(Diagnostic::new(
                DiagnosticKind::Overdetermined,
                format!("overdetermined: {} conditions for rm = {rm}", self.q),
            ));
        }
        let top = n + r;
        for (k, term) in self.points.iter().enumerate() {
            if term.order == top {
                out.push(Diagnostic::new(
                    DiagnosticKind::TopDerivativePoint,
                    format!("point term {k} evaluates the top derivative y^({top}) at t = {}", term.t),
                ));
            } else if term.order > top {
                out.push(Diagnostic::new(
                    DiagnosticKind::OrderOutOfRange,
                    format!("point term {k} has order {}, allowed 0..={}", term.order, top - 1),
                ));
            }
            if !point_inside(interval, term.t) {
                out.push(Diagnostic::new(
                    DiagnosticKind::PointOutOfInterval,
                    format!("point term {k} at t = {} lies outside [{}, {}]", term.t, interval.a(), interval.b()),
                ));
            }
            if term.matrix.shape() != (self.q, m) {
                out.push(Diagnostic::new(
                    DiagnosticKind::OrderOutOfRange,
                    format!("point term {k} has shape {:?}, expected {}x{m}", term.matrix.shape(), self.q),
                ));
            }
        }
        out
    }

    /// A constant `C` with `|B y|_1 <= C ||y||_{n+r,p}` for smooth `y`.
    ///
    /// Each point term contributes its entrywise norm times the cubic
    /// interpolation constant times the embedding constant of
    /// `|g(t)| <= L^(-1/p) ||g||_p + L^(1/p') ||g'||_p`; the integral term
    /// contributes `||Phi||_{p'}` on the grid (Hölder).
    pub fn continuity_constant(&self, grid: &Grid, p: LebesgueExponent) -> Result<f64> {
        let len = grid.interval().length();
        let embed = len.powf(-p.reciprocal()).max(len.powf(1.0 - p.reciprocal()));
        let mut c: f64 = self.points.iter().map(|t| entrywise_norm(&t.matrix)).sum::<f64>() * INTERPOLATION_CONSTANT * embed;
        if let Some(int) = &self.integral {
            let values: Vec<CMatrix> = (0..grid.len()).map(|i| int.phi.value_at(grid.node(i))).collect::<Result<_>>()?;
            c += crate::grid::lp_norm(grid, &values, p.conjugate())?;
        }
        Ok(c)
    }
}

fn point_inside(interval: Interval, t: f64) -> bool {
    let slack = 1e-12 * interval.length();
    t.is_finite() && t >= interval.a() - slack && t <= interval.b() + slack
}

fn clamp_point(interval: Interval, t: f64) -> f64 {
    t.clamp(interval.a(), interval.b())
}
