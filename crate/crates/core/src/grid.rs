//! Uniform grids, sampled derivative stacks, and Lebesgue/Sobolev norms.
//!
//! A [`DerivativeStack`] stores every derivative order `0..=max_order` of a
//! vector-valued function at every grid node; a [`MatrixTrajectory`] does the
//! same for matrix-valued functions. Derivatives are stored rather than
//! recomputed, so producers can fill them exactly.
//!
//! All norms use the entrywise absolute-value sum as the pointwise magnitude.

use std::fmt;

use nalgebra::{Dim, Matrix, Owned};
use serde::{Serialize, Serializer};

use crate::linalg::{cubic_weights, fd4_derivative};
use crate::{BvpError, CMatrix, CVector, Complex64, Result};

/// Default number of grid nodes.
pub const DEFAULT_NODES: usize = 1001;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    a: f64,
    b: f64,
}

impl Interval {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(BvpError::InvalidInterval { a, b });
        }
        Ok(Self { a, b })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn length(&self) -> f64 {
        self.b - self.a
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.a && t <= self.b
    }
}

/// Uniform grid on an interval, both endpoints included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    interval: Interval,
    count: usize,
    step: f64,
}

/// Location of a point relative to the grid nodes.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Locator {
    Node(usize),
    Stencil { start: usize, weights: [f64; 4], len: usize },
}

impl Grid {
    pub fn uniform(interval: Interval, count: usize) -> Result<Self> {
        if count < 2 {
            return Err(BvpError::GridTooSmall { min: 2, got: count });
        }
        Ok(Self { interval, count, step: interval.length() / (count - 1) as f64 })
    }

    pub fn interval(&self) -> Interval {
        self.interval
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    /// Node `i`; the last node is exactly `b`.
    pub fn node(&self, i: usize) -> f64 {
        if i + 1 == self.count {
            self.interval.b
        } else {
            self.interval.a + i as f64 * self.step
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.count).map(|i| self.node(i)).collect()
    }

    /// Trapezoid weights.
    pub fn trapezoid_weight(&self, i: usize) -> f64 {
        if i == 0 || i + 1 == self.count {
            0.5 * self.step
        } else {
            self.step
        }
    }

    pub(crate) fn locate(&self, t: f64) -> Locator {
        let u = (t - self.interval.a) / self.step;
        let nearest = u.round().clamp(0.0, (self.count - 1) as f64) as usize;
        if (t - self.node(nearest)).abs() <= 1e-12 * self.step {
            return Locator::Node(nearest);
        }
        if self.count < 4 {
            // linear between neighbours
            let i = (u.floor().max(0.0) as usize).min(self.count - 2);
            let s = (t - self.node(i)) / self.step;
            return Locator::Stencil { start: i, weights: [1.0 - s, s, 0.0, 0.0], len: 2 };
        }
        let cell = (u.floor().max(0.0) as usize).min(self.count - 2);
        let start = cell.saturating_sub(1).min(self.count - 4);
        let local = (t - self.node(start)) / self.step;
        Locator::Stencil { start, weights: cubic_weights(local), len: 4 }
    }
}

/// Lebesgue exponent `p` in `[1, inf]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LebesgueExponent(f64);

impl LebesgueExponent {
    pub fn new(p: f64) -> Result<Self> {
        if p.is_nan() || p < 1.0 {
            return Err(BvpError::InvalidExponent(p));
        }
        Ok(Self(p))
    }

    pub fn infinity() -> Self {
        Self(f64::INFINITY)
    }

    pub fn value(&self) -> f64 {
        self.0
    }

    pub fn is_infinite(&self) -> bool {
        self.0.is_infinite()
    }

    /// Conjugate exponent `p'` with `1/p + 1/p' = 1`.
    pub fn conjugate(&self) -> Self {
        if self.0 == 1.0 {
            Self(f64::INFINITY)
        } else if self.0.is_infinite() {
            Self(1.0)
        } else {
            Self(self.0 / (self.0 - 1.0))
        }
    }

    /// `1/p`, zero for `p = inf`.
    pub fn reciprocal(&self) -> f64 {
        if self.is_infinite() {
            0.0
        } else {
            1.0 / self.0
        }
    }
}

impl fmt::Display for LebesgueExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_infinite() {
            f.write_str("inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl Serialize for LebesgueExponent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

/// Pointwise values a [`Trajectory`] can hold.
pub trait Sample: Clone + fmt::Debug + Send + Sync {
    fn zeros_like(&self) -> Self;
    /// `self += w * x`
    fn add_scaled(&mut self, w: Complex64, x: &Self);
    fn entries(&self) -> &[Complex64];
    fn shape(&self) -> (usize, usize);

    fn magnitude(&self) -> f64 {
        self.entries().iter().map(|z| z.norm()).sum()
    }

    fn is_finite(&self) -> bool {
        self.entries().iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

impl<R: Dim, C: Dim> Sample for Matrix<Complex64, R, C, Owned<Complex64, R, C>>
where
    nalgebra::DefaultAllocator: nalgebra::allocator::Allocator<R, C>,
    Owned<Complex64, R, C>: Clone + Send + Sync,
{
    fn zeros_like(&self) -> Self {
        let (r, c) = self.shape_generic();
        Self::zeros_generic(r, c)
    }

    fn add_scaled(&mut self, w: Complex64, x: &Self) {
        for (a, b) in self.as_mut_slice().iter_mut().zip(x.as_slice()) {
            *a += w * b;
        }
    }

    fn entries(&self) -> &[Complex64] {
        self.as_slice()
    }

    fn shape(&self) -> (usize, usize) {
        (self.nrows(), self.ncols())
    }
}

/// Samples of a function and its derivatives `0..=max_order` on a grid.
#[derive(Debug, Clone)]
pub struct Trajectory<T> {
    grid: Grid,
    samples: Vec<Vec<T>>,
}

/// Vector-valued function with its derivative stack.
pub type DerivativeStack = Trajectory<CVector>;
/// Matrix-valued function with its derivative stack.
pub type MatrixTrajectory = Trajectory<CMatrix>;

impl<T: Sample> Trajectory<T> {
    /// `samples[k][i]` is the order-`k` derivative at node `i`.
    pub fn new(grid: Grid, samples: Vec<Vec<T>>) -> Result<Self> {
        if samples.is_empty() {
            return Err(BvpError::Dimension("stack needs at least order 0".into()));
        }
        let shape = samples[0]
            .first()
            .map(Sample::shape)
            .ok_or_else(|| BvpError::Dimension("empty sample list".into()))?;
        for (k, order) in samples.iter().enumerate() {
            if order.len() != grid.len() {
                return Err(BvpError::Dimension(format!(
                    "order {k} has {} samples for {} nodes",
                    order.len(),
                    grid.len()
                )));
            }
            if order.iter().any(|s| s.shape() != shape) {
                return Err(BvpError::Dimension(format!("order {k} has inconsistent sample shapes")));
            }
        }
        Ok(Self { grid, samples })
    }

    /// Builds a stack from `f(order, t)`.
    pub fn from_fn(grid: Grid, max_order: usize, mut f: impl FnMut(usize, f64) -> T) -> Result<Self> {
        let samples = (0..=max_order)
            .map(|k| (0..grid.len()).map(|i| f(k, grid.node(i))).collect())
            .collect();
        Self::new(grid, samples)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn max_order(&self) -> usize {
        self.samples.len() - 1
    }

    pub fn shape(&self) -> (usize, usize) {
        self.samples[0][0].shape()
    }

    pub fn order(&self, k: usize) -> &[T] {
        &self.samples[k]
    }

    pub fn at(&self, order: usize, node: usize) -> &T {
        &self.samples[order][node]
    }

    pub fn samples(&self) -> &[Vec<T>] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<Vec<T>> {
        self.samples
    }

    /// Value of the order-`k` derivative at `t`, by cubic interpolation
    /// between nodes (exact at nodes).
    pub fn value_at(&self, order: usize, t: f64) -> T {
        let row = &self.samples[order];
        match self.grid.locate(t) {
            Locator::Node(i) => row[i].clone(),
            Locator::Stencil { start, weights, len } => {
                let mut acc = row[start].zeros_like();
                for j in 0..len {
                    acc.add_scaled(Complex64::from(weights[j]), &row[start + j]);
                }
                acc
            }
        }
    }

    /// Keeps orders `0..=max_order`.
    pub fn truncated(&self, max_order: usize) -> Result<Self> {
        if max_order > self.max_order() {
            return Err(BvpError::MissingDerivatives { have: self.max_order(), need: max_order });
        }
        Ok(Self { grid: self.grid, samples: self.samples[..=max_order].to_vec() })
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(BvpError::Dimension("stacks live on different grids".into()));
        }
        if self.max_order() != other.max_order() || self.shape() != other.shape() {
            return Err(BvpError::Dimension("stacks differ in order or shape".into()));
        }
        Ok(())
    }

    /// `self + w * other`, order by order.
    pub fn add_scaled(&self, w: Complex64, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (row, orow) in out.samples.iter_mut().zip(&other.samples) {
            for (s, o) in row.iter_mut().zip(orow) {
                s.add_scaled(w, o);
            }
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add_scaled(Complex64::new(-1.0, 0.0), other)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let mut out = self.clone();
        for row in &mut out.samples {
            for s in row.iter_mut() {
                let copy = s.clone();
                *s = copy.zeros_like();
                s.add_scaled(c, &copy);
            }
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        self.samples.iter().flatten().all(Sample::is_finite)
    }

    /// Cubic interpolation of every order onto `grid`; values at nodes shared
    /// with the old grid, including both endpoints, are copied exactly.
    pub fn resample(&self, grid: Grid) -> Result<Self> {
        if grid.interval() != self.grid.interval() {
            return Err(BvpError::IntervalMismatch);
        }
        let samples = self
            .samples
            .iter()
            .enumerate()
            .map(|(k, _)| (0..grid.len()).map(|i| self.value_at(k, grid.node(i))).collect())
            .collect();
        Ok(Self { grid, samples })
    }
}

impl MatrixTrajectory {
    /// Column `j` as a vector stack.
    pub fn column(&self, j: usize) -> DerivativeStack {
        let samples = self
            .samples
            .iter()
            .map(|row| row.iter().map(|m| m.column(j).into_owned()).collect())
            .collect();
        DerivativeStack { grid: self.grid, samples }
    }

    /// Tabulates `values` and fills orders `1..=max_order` by repeated
    /// fourth-order finite differences. Needs at least five nodes.
    pub fn with_fd_derivatives(grid: Grid, values: Vec<CMatrix>, max_order: usize) -> Result<Self> {
        if grid.len() < 5 {
            return Err(BvpError::GridTooSmall { min: 5, got: grid.len() });
        }
        let mut samples = vec![values];
        for k in 0..max_order {
            let next = fd4_derivative(&samples[k], grid.step());
            samples.push(next);
        }
        Self::new(grid, samples)
    }
}

impl DerivativeStack {
    pub fn dim(&self) -> usize {
        self.shape().0
    }

    pub fn zeros(grid: Grid, dim: usize, max_order: usize) -> Self {
        let samples = vec![vec![CVector::zeros(dim); grid.len()]; max_order + 1];
        Self { grid, samples }
    }
}

fn magnitude_norm(grid: &Grid, mags: impl Iterator<Item = f64>, p: LebesgueExponent) -> f64 {
    if p.is_infinite() {
        return mags.fold(0.0, f64::max);
    }
    let pv = p.value();
    let integral: f64 = mags
        .enumerate()
        .map(|(i, m)| grid.trapezoid_weight(i) * if pv == 1.0 { m } else { m.powf(pv) })
        .sum();
    if pv == 1.0 {
        integral
    } else {
        integral.powf(1.0 / pv)
    }
}

/// `L_p` norm of sampled values with pointwise entrywise-sum magnitude:
/// composite trapezoid for finite `p`, node maximum for `p = inf`.
pub fn lp_norm<T: Sample>(grid: &Grid, values: &[T], p: LebesgueExponent) -> Result<f64> {
    if values.len() != grid.len() {
        return Err(BvpError::Dimension(format!(
            "{} values for {} grid nodes",
            values.len(),
            grid.len()
        )));
    }
    Ok(magnitude_norm(grid, values.iter().map(Sample::magnitude), p))
}

/// Sobolev norm: sum of the `L_p` norms of every stored derivative.
pub fn sobolev_norm<T: Sample>(stack: &Trajectory<T>, p: LebesgueExponent) -> f64 {
    sobolev_norm_to(stack, stack.max_order(), p)
}

/// Sobolev norm using derivative orders `0..=order` only.
pub fn sobolev_norm_to<T: Sample>(stack: &Trajectory<T>, order: usize, p: LebesgueExponent) -> f64 {
    stack.samples[..=order.min(stack.max_order())]
        .iter()
        .map(|row| magnitude_norm(&stack.grid, row.iter().map(Sample::magnitude), p))
        .sum()
}
