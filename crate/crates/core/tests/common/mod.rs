#![allow(dead_code)]

use bvpkit::boundary::IntegralTerm;
use bvpkit::prelude::*;
use rand::Rng;

pub fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

pub fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize, scale: f64) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| Complex64::new(rng.gen_range(-scale..scale), rng.gen_range(-scale..scale)))
}

/// Random complex matrix rescaled to entrywise-sum norm `norm`.
pub fn random_with_norm(rng: &mut impl Rng, n: usize, norm: f64) -> CMatrix {
    let a = random_matrix(rng, n, n, 1.0);
    let s = bvpkit::entrywise_norm(&a);
    a * c(norm / s)
}

pub fn relative_deviation(got: &CMatrix, want: &CMatrix) -> f64 {
    let scale = want.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1e-300);
    got.iter().zip(want.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max) / scale
}

pub fn unit() -> Interval {
    Interval::new(0.0, 1.0).unwrap()
}

/// `y' + A y = f`, `B y = sum_k alpha_k y^(k)(a)` with `n = alpha.len() - 1`.
pub fn example_one(a: &CMatrix, alpha: &[CMatrix], interval: Interval) -> ProblemSpec {
    let coeffs = CoefficientSet::new(a.nrows(), alpha.len() - 1, vec![MatrixFunction::Constant(a.clone())]).unwrap();
    let points = alpha.iter().enumerate().map(|(k, al)| PointTerm::new(interval.a(), k, al.clone())).collect();
    let b = BoundaryOperator::new(alpha[0].nrows(), points, None);
    ProblemSpec::new(interval, coeffs, b, LebesgueExponent::new(2.0).unwrap(), None).unwrap()
}

/// Second-order constant-coefficient problem with the two-point operator
/// `sum_k alpha_k y^(k)(a) + beta_k y^(k)(b)`, `n = alpha.len() - 2`.
///
/// `first_order = true` gives `y'' + A y'`, otherwise `y'' + A y`.
pub fn two_point_second_order(a: &CMatrix, alpha: &[CMatrix], beta: &[CMatrix], interval: Interval, first_order: bool) -> ProblemSpec {
    let m = a.nrows();
    let by_order = if first_order {
        vec![MatrixFunction::zeros(m, m), MatrixFunction::Constant(a.clone())]
    } else {
        vec![MatrixFunction::Constant(a.clone()), MatrixFunction::zeros(m, m)]
    };
    let coeffs = CoefficientSet::new(m, alpha.len() - 2, by_order).unwrap();
    let mut points = Vec::new();
    for (k, al) in alpha.iter().enumerate() {
        points.push(PointTerm::new(interval.a(), k, al.clone()));
    }
    for (k, be) in beta.iter().enumerate() {
        points.push(PointTerm::new(interval.b(), k, be.clone()));
    }
    let b = BoundaryOperator::new(alpha[0].nrows(), points, None);
    ProblemSpec::new(interval, coeffs, b, LebesgueExponent::new(2.0).unwrap(), None).unwrap()
}

/// `y' = f` with point terms `(t, order, matrix)` and optional integral kernel.
pub fn derivative_only(m: usize, n: usize, q: usize, terms: Vec<(f64, usize, CMatrix)>, phi: Option<CMatrix>) -> ProblemSpec {
    let coeffs = CoefficientSet::new(m, n, vec![MatrixFunction::zeros(m, m)]).unwrap();
    let points = terms.into_iter().map(|(t, d, mat)| PointTerm::new(t, d, mat)).collect();
    let integral = phi.map(|p| IntegralTerm::new(MatrixFunction::Constant(p)));
    let b = BoundaryOperator::new(q, points, integral);
    ProblemSpec::new(unit(), coeffs, b, LebesgueExponent::new(2.0).unwrap(), None).unwrap()
}

/// Random problem of order `r`, size `m`, `q` conditions; the boundary
/// operator is `G B_base` with `G` of rank at most `rank_cap` (when given).
pub fn random_problem(rng: &mut impl Rng, r: usize, m: usize, q: usize, rank_cap: Option<usize>) -> ProblemSpec {
    let by_order = (0..r).map(|_| MatrixFunction::Constant(random_matrix(rng, m, m, 0.5))).collect();
    let coeffs = CoefficientSet::new(m, 0, by_order).unwrap();
    // base operator: every derivative below r at a and at b
    let mut base: Vec<PointTerm> = Vec::new();
    for d in 0..r {
        base.push(PointTerm::new(0.0, d, random_matrix(rng, q, m, 1.0)));
        base.push(PointTerm::new(1.0, d, random_matrix(rng, q, m, 1.0)));
    }
    if let Some(rho) = rank_cap {
        let g = random_matrix(rng, q, rho, 1.0) * random_matrix(rng, rho, q, 1.0);
        for t in &mut base {
            t.matrix = &g * &t.matrix;
        }
    }
    let b = BoundaryOperator::new(q, base, None);
    ProblemSpec::new(unit(), coeffs, b, LebesgueExponent::new(2.0).unwrap(), None).unwrap()
}

/// Eigendecomposition oracle `V f(D) V^{-1}`.
pub fn via_eigen(v: &CMatrix, d: &[Complex64], f: impl Fn(Complex64) -> Complex64) -> CMatrix {
    let fd = CMatrix::from_diagonal(&CVector::from_iterator(d.len(), d.iter().map(|&x| f(x))));
    let vinv = v.clone().try_inverse().unwrap();
    v * fd * vinv
}

use bvpkit::limits::{MultipointFamily, MultipointMember, SeriesLimit, SeriesPoint};

/// Scalar second-order limits `y(0.3)` and `y'(0.7) + y(0.7)` (`q = 2`).
pub fn splitting_limits() -> Vec<SeriesLimit> {
    let row = |i: usize, x: f64| CMatrix::from_fn(2, 1, |k, _| if k == i { c(x) } else { c(0.0) });
    vec![
        SeriesLimit { t: 0.3, beta: vec![row(0, 1.0), CMatrix::zeros(2, 1)] },
        SeriesLimit { t: 0.7, beta: vec![row(1, 1.0), row(1, 1.0)] },
    ]
}

/// Each limit point split into halves at `t -+ eps`; with `zero_series`
/// a fixed term `0.5 y(0.9)` is added that never fades.
pub fn splitting_family(zero_series: bool) -> MultipointFamily {
    let lims = splitting_limits();
    let c0 = CVector::from_vec(vec![c(1.0), c(-1.0)]);
    let gen_lims = lims.clone();
    let c_gen = c0.clone();
    MultipointFamily::new(2, 1, 2, lims, c0, move |eps| {
        let zero = if zero_series {
            vec![SeriesPoint { t: 0.9, beta: vec![CMatrix::from_element(2, 1, c(0.5)), CMatrix::zeros(2, 1)] }]
        } else {
            vec![]
        };
        let mut series = vec![zero];
        for l in &gen_lims {
            let half: Vec<CMatrix> = l.beta.iter().map(|b| b * c(0.5)).collect();
            series.push(vec![SeriesPoint { t: l.t - eps, beta: half.clone() }, SeriesPoint { t: l.t + eps, beta: half }]);
        }
        Ok(MultipointMember { series, c: c_gen.clone() })
    })
    .unwrap()
}

/// `y'' + y = 1` on `[0, 1]`, the equation shared by the splitting families.
pub fn splitting_equation() -> (CoefficientSet, MatrixFunction) {
    let one = CMatrix::from_element(1, 1, c(1.0));
    let coeffs = CoefficientSet::new(1, 0, vec![MatrixFunction::Constant(one.clone()), MatrixFunction::zeros(1, 1)]).unwrap();
    (coeffs, MatrixFunction::Constant(one))
}

/// `y'' + K1 y' + (K0 + eps E) y = f` on `[0, 1]` with Dirichlet conditions
/// at both ends; `m = 2`, `n = 1`, `p = 2`.
pub fn perturbed_dirichlet(eps: f64) -> bvpkit::Result<ProblemSpec> {
    let m = |v: [f64; 4]| CMatrix::from_row_slice(2, 2, &v.map(c));
    let k0 = m([1.0, 0.3, -0.2, 2.0]);
    let k1 = m([0.2, 0.0, 0.1, -0.1]);
    let e = m([0.5, 1.0, -1.0, 0.5]);
    let coeffs = CoefficientSet::new(2, 1, vec![MatrixFunction::Constant(k0 + e * c(eps)), MatrixFunction::Constant(k1)])?;
    let rows = |top: bool| CMatrix::from_fn(4, 2, |i, j| if (top && i == j) || (!top && i == j + 2) { c(1.0) } else { c(0.0) });
    let b = BoundaryOperator::new(4, vec![PointTerm::new(0.0, 0, rows(true)), PointTerm::new(1.0, 0, rows(false))], None);
    let f = MatrixFunction::Polynomial(vec![CMatrix::from_column_slice(2, 1, &[c(1.0), c(0.5)]), CMatrix::from_column_slice(2, 1, &[c(0.0), c(1.0)])]);
    let rhs = RightHandSide::new(f, CVector::from_vec(vec![c(0.0), c(0.0), c(1.0), c(-1.0)]));
    ProblemSpec::new(unit(), coeffs, b, LebesgueExponent::new(2.0)?, Some(rhs))
}
