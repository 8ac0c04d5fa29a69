//! Fundamental matrices and particular solutions of
//! `y^(r) + A_{r-1} y^(r-1) + ... + A_0 y = f`.
//!
//! Orders `0..r-1` come from classical RK4 on the companion system with the
//! state `(y, y', ..., y^(r-1))` and the step equal to the grid step. Order `r`
//! follows from the equation itself, and orders `r+1..=n+r` from the
//! differentiated equation
//!
//! ```text
//! y^(r+s) = f^(s) - sum_k sum_{q<=s} C(s,q) A_k^(q) y^(k+s-q)
//! ```
//!
//! which only needs coefficient derivatives up to order `n`.

use nalgebra::DVector;

use crate::function::MatrixFunction;
use crate::grid::{DerivativeStack, Grid, MatrixTrajectory, Trajectory};
use crate::linalg::{binomial, fd4_stencil};
use crate::{BvpError, CMatrix, CVector, Complex64, Result};

/// Coefficients `A_0, ..., A_{r-1}` of the differential expression.
#[derive(Debug, Clone)]
pub struct CoefficientSet {
    m: usize,
    n: usize,
    /// `by_order[k]` multiplies `y^(k)`.
    by_order: Vec<MatrixFunction>,
}

impl CoefficientSet {
    /// `by_order[k]` is the coefficient of `y^(k)`; its length is the order `r`.
    /// `n` is the smoothness index: coefficients must provide `n` derivatives.
    pub fn new(m: usize, n: usize, by_order: Vec<MatrixFunction>) -> Result<Self> {
        if by_order.is_empty() || m == 0 {
            return Err(BvpError::Dimension("need r >= 1 and m >= 1".into()));
        }
        for (k, a) in by_order.iter().enumerate() {
            if a.shape() != (m, m) {
                return Err(BvpError::Dimension(format!(
                    "coefficient of order {k} has shape {:?}, expected {m}x{m}",
                    a.shape()
                )));
            }
            a.supports_order(n)?;
        }
        Ok(Self { m, n, by_order })
    }

    pub fn r(&self) -> usize {
        self.by_order.len()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Coefficient multiplying `y^(k)`.
    pub fn coefficient(&self, k: usize) -> &MatrixFunction {
        &self.by_order[k]
    }

    pub fn coefficients(&self) -> &[MatrixFunction] {
        &self.by_order
    }

    fn values_at(&self, t: f64) -> Result<Vec<CMatrix>> {
        self.by_order.iter().map(|a| a.value_at(t)).collect()
    }

    /// `out[q][k]` = `A_k^(q)(t)` for `q <= upto`.
    fn derivatives_at(&self, t: f64, upto: usize) -> Result<Vec<Vec<CMatrix>>> {
        (0..=upto)
            .map(|q| self.by_order.iter().map(|a| a.derivative_at(t, q)).collect())
            .collect()
    }
}

/// Fundamental set `Y_1, ..., Y_r` with `Y_i^(j-1)(a) = delta_ij I`.
#[derive(Debug, Clone)]
pub struct FundamentalSet {
    members: Vec<MatrixTrajectory>,
}

impl FundamentalSet {
    pub fn members(&self) -> &[MatrixTrajectory] {
        &self.members
    }

    pub fn r(&self) -> usize {
        self.members.len()
    }

    pub fn grid(&self) -> &Grid {
        self.members[0].grid()
    }

    /// Block matrix `[Y_i^(j-1)(a)]`, rows indexed by `j`, columns by `i`.
    pub fn initial_matrix(&self) -> CMatrix {
        let r = self.r();
        let m = self.members[0].shape().0;
        let mut out = CMatrix::zeros(r * m, r * m);
        for (i, y) in self.members.iter().enumerate() {
            for j in 0..r {
                out.view_mut((j * m, i * m), (m, m)).copy_from(y.at(j, 0));
            }
        }
        out
    }

    /// `sum_i Y_i xi_i` where `xi` is split into `r` blocks of length `m`.
    pub fn combine(&self, xi: &CVector) -> Result<DerivativeStack> {
        let m = self.members[0].shape().0;
        if xi.len() != self.r() * m {
            return Err(BvpError::Dimension(format!("coefficient vector has length {}, expected {}", xi.len(), self.r() * m)));
        }
        let grid = *self.grid();
        let max_order = self.members[0].max_order();
        let samples = (0..=max_order)
            .map(|k| {
                (0..grid.len())
                    .map(|node| {
                        let mut acc = CVector::zeros(m);
                        for (i, y) in self.members.iter().enumerate() {
                            acc += y.at(k, node) * xi.rows(i * m, m);
                        }
                        acc
                    })
                    .collect()
            })
            .collect();
        Trajectory::new(grid, samples)
    }

    /// Largest finite-difference inconsistency between stored orders
    /// `0..=r` over all members; the reported integration tolerance.
    pub fn integration_defect(&self) -> f64 {
        self.members.iter().map(|y| order_defect(y, self.r())).fold(0.0, f64::max)
    }
}

fn companion_rhs(a: &[CMatrix], forcing: Option<&CMatrix>, x: &CMatrix, m: usize) -> CMatrix {
    let r = a.len();
    let mut out = CMatrix::zeros(x.nrows(), x.ncols());
    for k in 0..r - 1 {
        out.rows_mut(k * m, m).copy_from(&x.rows((k + 1) * m, m));
    }
    let mut last = match forcing {
        Some(f) => {
            let mut base = CMatrix::zeros(m, x.ncols());
            for j in 0..x.ncols() {
                base.set_column(j, &f.column(0));
            }
            base
        }
        None => CMatrix::zeros(m, x.ncols()),
    };
    for (k, ak) in a.iter().enumerate() {
        last -= ak * x.rows(k * m, m);
    }
    out.rows_mut((r - 1) * m, m).copy_from(&last);
    out
}

/// Integrates the companion system from `init` at `a`; returns the state at
/// every node.
fn integrate(
    coeffs: &CoefficientSet,
    forcing: Option<&MatrixFunction>,
    grid: &Grid,
    init: CMatrix,
) -> Result<Vec<CMatrix>> {
    let m = coeffs.m();
    let h = grid.step();
    let hc = Complex64::new(h, 0.0);
    let half = Complex64::new(0.5 * h, 0.0);
    let sixth = Complex64::new(h / 6.0, 0.0);
    let two = Complex64::new(2.0, 0.0);
    let forcing_at = |t: f64| -> Result<Option<CMatrix>> { forcing.map(|f| f.value_at(t)).transpose() };

    let mut states = Vec::with_capacity(grid.len());
    let mut x = init;
    let mut a_left = coeffs.values_at(grid.node(0))?;
    let mut f_left = forcing_at(grid.node(0))?;
    states.push(x.clone());
    for i in 0..grid.len() - 1 {
        let t = grid.node(i);
        let t_right = grid.node(i + 1);
        let t_mid = t + 0.5 * h;
        let a_mid = coeffs.values_at(t_mid)?;
        let f_mid = forcing_at(t_mid)?;
        let a_right = coeffs.values_at(t_right)?;
        let f_right = forcing_at(t_right)?;

        let k1 = companion_rhs(&a_left, f_left.as_ref(), &x, m);
        let k2 = companion_rhs(&a_mid, f_mid.as_ref(), &(&x + &k1 * half), m);
        let k3 = companion_rhs(&a_mid, f_mid.as_ref(), &(&x + &k2 * half), m);
        let k4 = companion_rhs(&a_right, f_right.as_ref(), &(&x + &k3 * hc), m);
        x += (k1 + k2 * two + k3 * two + k4) * sixth;

        if !x.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(BvpError::NonFinite(t_right));
        }
        states.push(x.clone());
        a_left = a_right;
        f_left = f_right;
    }
    Ok(states)
}

/// Orders `0..=n+r` at every node from the companion states.
/// `samples[order][node]` has shape `m x cols`.
fn complete_orders(
    coeffs: &CoefficientSet,
    forcing: Option<&MatrixFunction>,
    grid: &Grid,
    states: &[CMatrix],
) -> Result<Vec<Vec<CMatrix>>> {
    let (m, r, n) = (coeffs.m(), coeffs.r(), coeffs.n());
    let cols = states[0].ncols();
    let mut samples: Vec<Vec<CMatrix>> = (0..=n + r).map(|_| Vec::with_capacity(grid.len())).collect();
    for (node, state) in states.iter().enumerate() {
        let t = grid.node(node);
        let a = coeffs.derivatives_at(t, n)?;
        let mut orders: Vec<CMatrix> = (0..r).map(|k| state.rows(k * m, m).into_owned()).collect();
        for s in 0..=n {
            let mut next = match forcing {
                Some(f) => {
                    let fs = f.derivative_at(t, s)?;
                    CMatrix::from_fn(m, cols, |i, _| fs[(i, 0)])
                }
                None => CMatrix::zeros(m, cols),
            };
            for (k, _) in coeffs.by_order.iter().enumerate() {
                for q in 0..=s {
                    let w = Complex64::new(binomial(s, q), 0.0);
                    next -= &a[q][k] * &orders[k + s - q] * w;
                }
            }
            orders.push(next);
        }
        for (k, o) in orders.into_iter().enumerate() {
            samples[k].push(o);
        }
    }
    Ok(samples)
}

/// Solves the `r` matrix Cauchy problems `L Y_i = 0`, `Y_i^(j-1)(a) = delta_ij I`.
pub fn fundamental_set(coeffs: &CoefficientSet, grid: &Grid) -> Result<FundamentalSet> {
    let (m, r) = (coeffs.m(), coeffs.r());
    let states = integrate(coeffs, None, grid, CMatrix::identity(r * m, r * m))?;
    let samples = complete_orders(coeffs, None, grid, &states)?;
    let members = (0..r)
        .map(|i| {
            let block: Vec<Vec<CMatrix>> = samples
                .iter()
                .map(|row| row.iter().map(|s| s.columns(i * m, m).into_owned()).collect())
                .collect();
            Trajectory::new(*grid, block)
        })
        .collect::<Result<_>>()?;
    Ok(FundamentalSet { members })
}

/// Particular solution of `L y = f` with `y^(j)(a) = 0` for `j < r`.
pub fn particular_solution(coeffs: &CoefficientSet, f: &MatrixFunction, grid: &Grid) -> Result<DerivativeStack> {
    particular_solution_from(coeffs, f, grid, &CVector::zeros(coeffs.r() * coeffs.m()))
}

/// Solution of `L y = f` with initial data `(y(a), ..., y^(r-1)(a))` stacked in `init`.
pub fn particular_solution_from(
    coeffs: &CoefficientSet,
    f: &MatrixFunction,
    grid: &Grid,
    init: &CVector,
) -> Result<DerivativeStack> {
    let (m, r, n) = (coeffs.m(), coeffs.r(), coeffs.n());
    if f.shape() != (m, 1) {
        return Err(BvpError::Dimension(format!("right-hand side has shape {:?}, expected {m}x1", f.shape())));
    }
    if init.len() != r * m {
        return Err(BvpError::Dimension(format!("initial data has length {}, expected {}", init.len(), r * m)));
    }
    f.supports_order(n)?;
    let init = CMatrix::from_column_slice(r * m, 1, init.as_slice());
    let states = integrate(coeffs, Some(f), grid, init)?;
    let samples = complete_orders(coeffs, Some(f), grid, &states)?;
    let samples = samples
        .into_iter()
        .map(|row| row.into_iter().map(|s| DVector::from_column_slice(s.as_slice())).collect())
        .collect();
    Trajectory::new(*grid, samples)
}

/// Derivatives `0..=order` of `L y` computed from the stored orders of `y`.
///
/// Needs `y.max_order() >= r + order` and coefficient derivatives up to `order`.
pub fn apply_operator(coeffs: &CoefficientSet, y: &DerivativeStack, order: usize) -> Result<DerivativeStack> {
    let r = coeffs.r();
    if y.max_order() < r + order {
        return Err(BvpError::MissingDerivatives { have: y.max_order(), need: r + order });
    }
    if y.dim() != coeffs.m() {
        return Err(BvpError::Dimension(format!("stack dimension {} vs system size {}", y.dim(), coeffs.m())));
    }
    for a in coeffs.coefficients() {
        a.supports_order(order)?;
    }
    let grid = *y.grid();
    let mut samples: Vec<Vec<CVector>> = vec![Vec::with_capacity(grid.len()); order + 1];
    for node in 0..grid.len() {
        let a = coeffs.derivatives_at(grid.node(node), order)?;
        for s in 0..=order {
            let mut acc = y.at(r + s, node).clone();
            for k in 0..r {
                for q in 0..=s {
                    acc += &a[q][k] * y.at(k + s - q, node) * Complex64::new(binomial(s, q), 0.0);
                }
            }
            samples[s].push(acc);
        }
    }
    Trajectory::new(grid, samples)
}

fn order_defect(y: &MatrixTrajectory, upto: usize) -> f64 {
    let grid = y.grid();
    if grid.len() < 5 {
        return 0.0;
    }
    let mut worst: f64 = 0.0;
    for k in 0..upto.min(y.max_order()) {
        let row = y.order(k);
        for i in 0..grid.len() {
            let mut d = -y.at(k + 1, i).clone();
            for (j, w) in fd4_stencil(i, grid.len(), grid.step()) {
                d += &row[j] * Complex64::new(w, 0.0);
            }
            worst = worst.max(d.iter().map(|z| z.norm()).sum());
        }
    }
    worst
}

/// Max-node magnitude of `D(y^(r-1)) + sum_k A_k y^(k) - f`, where `D` is the
/// fourth-order finite-difference derivative of the stored order `r-1`.
///
/// This checks the integrated orders against the equation without using the
/// algebraically completed order `r`.
pub fn equation_defect(coeffs: &CoefficientSet, y: &DerivativeStack, f: Option<&MatrixFunction>) -> Result<f64> {
    let r = coeffs.r();
    let grid = *y.grid();
    if grid.len() < 5 {
        return Err(BvpError::GridTooSmall { min: 5, got: grid.len() });
    }
    let top = y.order(r - 1);
    let mut worst: f64 = 0.0;
    for i in 0..grid.len() {
        let t = grid.node(i);
        let mut acc = CVector::zeros(y.dim());
        for (j, w) in fd4_stencil(i, grid.len(), grid.step()) {
            acc += &top[j] * Complex64::new(w, 0.0);
        }
        for k in 0..r {
            acc += coeffs.coefficient(k).value_at(t)? * y.at(k, i);
        }
        if let Some(f) = f {
            acc -= f.value_at(t)?.column(0);
        }
        worst = worst.max(acc.iter().map(|z| z.norm()).sum());
    }
    Ok(worst)
}
