//! Matrix-valued functions of `t` with derivative access.

use crate::expr::{Expr, Var};
use crate::grid::MatrixTrajectory;
use crate::{BvpError, CMatrix, Complex64, Result};

/// Matrix of expressions with symbolic derivatives precomputed up to a fixed order.
#[derive(Debug, Clone, PartialEq)]
pub struct ExprMatrix {
    rows: usize,
    cols: usize,
    /// `derivatives[k]` holds the row-major entries of the order-`k` derivative.
    derivatives: Vec<Vec<Expr>>,
}

impl ExprMatrix {
    /// `entries` is row-major `rows x cols`; `eps` is substituted before
    /// differentiation in `t`.
    pub fn new(rows: usize, cols: usize, entries: Vec<Expr>, eps: f64, max_order: usize) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(BvpError::Dimension(format!(
                "{} expressions for a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        let mut level: Vec<Expr> = entries.iter().map(|e| e.bind_eps(eps)).collect();
        let mut derivatives = Vec::with_capacity(max_order + 1);
        for _ in 0..max_order {
            let next = level.iter().map(|e| e.derivative(Var::T)).collect();
            derivatives.push(std::mem::replace(&mut level, next));
        }
        derivatives.push(level);
        Ok(Self { rows, cols, derivatives })
    }

    fn eval(&self, t: f64, order: usize) -> CMatrix {
        let d = &self.derivatives[order];
        CMatrix::from_fn(self.rows, self.cols, |i, j| d[i * self.cols + j].eval(t, 0.0))
    }
}

/// A matrix-valued function on the problem interval.
#[derive(Debug, Clone)]
pub enum MatrixFunction {
    Constant(CMatrix),
    /// `sum_k P_k t^k`; all `P_k` share one shape.
    Polynomial(Vec<CMatrix>),
    /// Samples with explicitly stored derivatives, interpolated between nodes.
    Table(MatrixTrajectory),
    Expression(ExprMatrix),
}

impl MatrixFunction {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        MatrixFunction::Constant(CMatrix::zeros(rows, cols))
    }

    pub fn shape(&self) -> (usize, usize) {
        match self {
            MatrixFunction::Constant(m) => m.shape(),
            MatrixFunction::Polynomial(ps) => ps.first().map_or((0, 0), |p| p.shape()),
            MatrixFunction::Table(t) => t.shape(),
            MatrixFunction::Expression(e) => (e.rows, e.cols),
        }
    }

    /// Highest available derivative order; `None` when unlimited.
    pub fn max_derivative(&self) -> Option<usize> {
        match self {
            MatrixFunction::Constant(_) | MatrixFunction::Polynomial(_) => None,
            MatrixFunction::Table(t) => Some(t.max_order()),
            MatrixFunction::Expression(e) => Some(e.derivatives.len() - 1),
        }
    }

    pub fn supports_order(&self, order: usize) -> Result<()> {
        match self.max_derivative() {
            Some(have) if have < order => Err(BvpError::MissingDerivatives { have, need: order }),
            _ => Ok(()),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            MatrixFunction::Constant(m) => m.iter().all(|z| *z == Complex64::new(0.0, 0.0)),
            MatrixFunction::Polynomial(ps) => ps.iter().all(|m| m.iter().all(|z| *z == Complex64::new(0.0, 0.0))),
            _ => false,
        }
    }

    /// Order-`order` derivative at `t`.
    pub fn derivative_at(&self, t: f64, order: usize) -> Result<CMatrix> {
        self.supports_order(order)?;
        let (r, c) = self.shape();
        Ok(match self {
            MatrixFunction::Constant(m) => {
                if order == 0 {
                    m.clone()
                } else {
                    CMatrix::zeros(r, c)
                }
            }
            MatrixFunction::Polynomial(ps) => {
                // Horner on the differentiated coefficients
                let mut acc = CMatrix::zeros(r, c);
                for k in (order..ps.len()).rev() {
                    let falling: f64 = ((k - order + 1)..=k).map(|x| x as f64).product();
                    acc = acc * Complex64::new(t, 0.0) + &ps[k] * Complex64::new(falling, 0.0);
                }
                acc
            }
            MatrixFunction::Table(traj) => traj.value_at(order, t),
            MatrixFunction::Expression(e) => e.eval(t, order),
        })
    }

    pub fn value_at(&self, t: f64) -> Result<CMatrix> {
        self.derivative_at(t, 0)
    }
}
