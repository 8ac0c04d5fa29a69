//! The full boundary-value problem `(L, B) y = (f, c)`.

use crate::boundary::BoundaryOperator;
use crate::function::MatrixFunction;
use crate::grid::{Interval, LebesgueExponent};
use crate::ode::CoefficientSet;
use crate::{BvpError, CVector, Result};

/// Right-hand sides: `f` is an `m x 1` function, `c` has one entry per boundary row.
#[derive(Debug, Clone)]
pub struct RightHandSide {
    pub f: MatrixFunction,
    pub c: CVector,
}

impl RightHandSide {
    pub fn new(f: MatrixFunction, c: CVector) -> Self {
        Self { f, c }
    }
}

#[derive(Debug, Clone)]
pub struct ProblemSpec {
    interval: Interval,
    coeffs: CoefficientSet,
    boundary: BoundaryOperator,
    p: LebesgueExponent,
    rhs: Option<RightHandSide>,
}

impl ProblemSpec {
    /// Checks that every component agrees on `m`, `n` and `q`.
    ///
    /// Point terms with out-of-range orders or points are accepted here and
    /// surface through [`BoundaryOperator::validate`]; building the
    /// characteristic matrix rejects them.
    pub fn new(
        interval: Interval,
        coeffs: CoefficientSet,
        boundary: BoundaryOperator,
        p: LebesgueExponent,
        rhs: Option<RightHandSide>,
    ) -> Result<Self> {
        let (m, n) = (coeffs.m(), coeffs.n());
        boundary.check_shapes(m)?;
        if let Some(phi) = boundary.integral() {
            phi.phi.supports_order(0)?;
        }
        if let Some(rhs) = &rhs {
            if rhs.f.shape() != (m, 1) {
                return Err(BvpError::Dimension(format!("f has shape {:?}, expected {m}x1", rhs.f.shape())));
            }
            rhs.f.supports_order(n)?;
            if rhs.c.len() != boundary.q() {
                return Err(BvpError::Dimension(format!(
                    "c has length {}, boundary operator has {} rows",
                    rhs.c.len(),
                    boundary.q()
                )));
            }
        }
        Ok(Self { interval, coeffs, boundary, p, rhs })
    }

    pub fn interval(&self) -> Interval {
        self.interval
    }

    pub fn coeffs(&self) -> &CoefficientSet {
        &self.coeffs
    }

    pub fn boundary(&self) -> &BoundaryOperator {
        &self.boundary
    }

    pub fn p(&self) -> LebesgueExponent {
        self.p
    }

    pub fn rhs(&self) -> Option<&RightHandSide> {
        self.rhs.as_ref()
    }

    pub fn r(&self) -> usize {
        self.coeffs.r()
    }

    pub fn m(&self) -> usize {
        self.coeffs.m()
    }

    pub fn n(&self) -> usize {
        self.coeffs.n()
    }

    /// Number of scalar boundary conditions.
    pub fn q(&self) -> usize {
        self.boundary.q()
    }

    /// Highest derivative order carried by solutions, `n + r`.
    pub fn top_order(&self) -> usize {
        self.n() + self.r()
    }

    pub fn with_rhs(mut self, rhs: RightHandSide) -> Result<Self> {
        self.rhs = None;
        Self::new(self.interval, self.coeffs, self.boundary, self.p, Some(rhs))
    }

    pub fn with_boundary(self, boundary: BoundaryOperator) -> Result<Self> {
        Self::new(self.interval, self.coeffs, boundary, self.p, self.rhs)
    }
}
