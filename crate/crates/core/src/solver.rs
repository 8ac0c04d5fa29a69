//! Superposition solver for well-posed problems and the discrepancy of
//! approximate solutions.
//!
//! `y = y_p + sum_i Y_i xi_i` where `M(L, B) xi = c - B y_p`.

use serde::Serialize;

use crate::boundary::{Diagnostic, DiagnosticKind};
use crate::characteristic::{build_characteristic_matrix, solvability_report, CharacteristicMatrix, RankPolicy, SolvabilityReport, ILL_CONDITIONED};
use crate::grid::{sobolev_norm, DerivativeStack, Grid, Trajectory};
use crate::linalg::vector_norm;
use crate::ode::{apply_operator, equation_defect, particular_solution_from};
use crate::problem::ProblemSpec;
use crate::{BvpError, CVector, Complex64, Result};

/// Residuals of a computed solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Residuals {
    /// Max-node magnitude of `L y - f` with `y^(r)` from finite differences
    /// of the integrated order `r - 1`.
    pub equation: f64,
    /// `|B y - c|_1`.
    pub boundary: f64,
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub stack: DerivativeStack,
    /// Coefficients of the fundamental set in the superposition.
    pub xi: CVector,
    pub report: SolvabilityReport,
    pub condition_number: f64,
    pub residuals: Residuals,
    pub diagnostics: Vec<Diagnostic>,
}

/// Solves `(L, B) y = (f, c)` on `grid`.
///
/// Refuses problems that are not well posed with the report attached.
pub fn solve(spec: &ProblemSpec, grid: &Grid, policy: &RankPolicy) -> Result<Solution> {
    solve_with_initial(spec, grid, policy, &CVector::zeros(spec.r() * spec.m()))
}

/// Like [`solve`], but the particular solution starts from the initial data
/// `init = (y(a), ..., y^(r-1)(a))`; the result does not depend on it.
pub fn solve_with_initial(spec: &ProblemSpec, grid: &Grid, policy: &RankPolicy, init: &CVector) -> Result<Solution> {
    let cm = build_characteristic_matrix(spec, grid, policy)?;
    solve_with_matrix(spec, &cm, init)
}

/// Solves using an already assembled characteristic matrix.
pub fn solve_with_matrix(spec: &ProblemSpec, cm: &CharacteristicMatrix, init: &CVector) -> Result<Solution> {
    let report = solvability_report(cm, spec);
    if !report.well_posed {
        return Err(BvpError::NotWellPosed(Box::new(report)));
    }
    let rhs = spec.rhs().ok_or(BvpError::MissingRhs)?;
    let fs = cm.fundamental().ok_or_else(|| BvpError::Invalid("characteristic matrix was not built from a problem".into()))?;
    let grid = *fs.grid();
    let particular = particular_solution_from(spec.coeffs(), &rhs.f, &grid, init)?;
    let target = &rhs.c - spec.boundary().apply(&particular)?;
    let xi = cm
        .entries()
        .clone()
        .lu()
        .solve(&target)
        .ok_or_else(|| BvpError::Invalid("characteristic matrix is singular to working precision".into()))?;
    let stack = particular.add_scaled(Complex64::new(1.0, 0.0), &fs.combine(&xi)?)?;

    let mut diagnostics = Vec::new();
    let condition_number = cm.condition_number();
    if condition_number > ILL_CONDITIONED && !report.diagnostics.iter().any(|d| d.kind == DiagnosticKind::IllConditioned) {
        diagnostics.push(Diagnostic::new(
            DiagnosticKind::IllConditioned,
            format!("ill-conditioned: condition number {condition_number:.3e}"),
        ));
    }
    let equation = if grid.len() >= 5 { equation_defect(spec.coeffs(), &stack, Some(&rhs.f))? } else { 0.0 };
    let boundary = vector_norm(&(spec.boundary().apply(&stack)? - &rhs.c));
    Ok(Solution { stack, xi, report, condition_number, residuals: Residuals { equation, boundary }, diagnostics })
}

/// Discrepancy of `y0` in the problem `spec`:
/// `||L y0 - f||_{n,p} + |B y0 - c|_1`.
///
/// The first term uses orders `0..=n` of `L y0`, computed from the stored
/// derivatives of `y0`; `y0` must carry exactly `n + r` orders.
pub fn discrepancy(spec: &ProblemSpec, y0: &DerivativeStack) -> Result<f64> {
    let rhs = spec.rhs().ok_or(BvpError::MissingRhs)?;
    if y0.max_order() != spec.top_order() {
        return Err(BvpError::Dimension(format!(
            "stack carries {} orders, the problem needs {}",
            y0.max_order(),
            spec.top_order()
        )));
    }
    if y0.grid().interval() != spec.interval() {
        return Err(BvpError::IntervalMismatch);
    }
    let n = spec.n();
    let ly = apply_operator(spec.coeffs(), y0, n)?;
    let grid = *y0.grid();
    let f_samples = (0..=n)
        .map(|k| (0..grid.len()).map(|i| Ok(rhs.f.derivative_at(grid.node(i), k)?.column(0).into_owned())).collect())
        .collect::<Result<Vec<Vec<CVector>>>>()?;
    let f = Trajectory::new(grid, f_samples)?;
    let equation = sobolev_norm(&ly.sub(&f)?, spec.p());
    let boundary = vector_norm(&(spec.boundary().apply(y0)? - &rhs.c));
    Ok(equation + boundary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::{BoundaryOperator, PointTerm};
    use crate::characteristic::kernel_directions;
    use crate::function::MatrixFunction;
    use crate::grid::{Interval, LebesgueExponent};
    use crate::ode::CoefficientSet;
    use crate::problem::RightHandSide;
    use crate::CMatrix;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn unit() -> Interval {
        Interval::new(0.0, 1.0).unwrap()
    }

    fn scalar(x: f64) -> CMatrix {
        CMatrix::from_element(1, 1, c(x))
    }

    fn first_order(a0: f64, f: f64, c0: f64) -> ProblemSpec {
        let coeffs = CoefficientSet::new(1, 0, vec![MatrixFunction::Constant(scalar(a0))]).unwrap();
        let b = BoundaryOperator::new(1, vec![PointTerm::new(0.0, 0, scalar(1.0))], None);
        let rhs = RightHandSide::new(MatrixFunction::Constant(scalar(f)), CVector::from_element(1, c(c0)));
        ProblemSpec::new(unit(), coeffs, b, LebesgueExponent::new(2.0).unwrap(), Some(rhs)).unwrap()
    }

    #[test]
    fn constant_solution() {
        let coeffs = CoefficientSet::new(2, 0, vec![MatrixFunction::zeros(2, 2)]).unwrap();
        let b = BoundaryOperator::new(2, vec![PointTerm::new(0.0, 0, CMatrix::identity(2, 2))], None);
        let v = CVector::from_vec(vec![c(1.5), Complex64::new(-2.0, 1.0)]);
        let rhs = RightHandSide::new(MatrixFunction::zeros(2, 1), v.clone());
        let spec = ProblemSpec::new(unit(), coeffs, b, LebesgueExponent::infinity(), Some(rhs)).unwrap();
        let grid = Grid::uniform(unit(), 51).unwrap();
        let sol = solve(&spec, &grid, &RankPolicy::default()).unwrap();
        for y in sol.stack.order(0) {
            assert!((y - &v).norm() < 1e-14);
        }
    }

    #[test]
    fn antiderivative() {
        let spec = first_order(0.0, 1.0, 0.0);
        let grid = Grid::uniform(unit(), 1001).unwrap();
        let sol = solve(&spec, &grid, &RankPolicy::default()).unwrap();
        for (i, y) in sol.stack.order(0).iter().enumerate() {
            assert!((y[0].re - grid.node(i)).abs() <= 1e-9);
        }
    }

    #[test]
    fn relaxation_matches_exponential() {
        let spec = first_order(1.0, 1.0, 0.0);
        let grid = Grid::uniform(unit(), 1001).unwrap();
        let sol = solve(&spec, &grid, &RankPolicy::default()).unwrap();
        let err = sol.stack.order(0).iter().enumerate().map(|(i, y)| (y[0].re - (1.0 - (-grid.node(i)).exp())).abs()).fold(0.0, f64::max);
        assert!(err <= 1e-8, "{err}");
        assert!(sol.residuals.boundary < 1e-12);
        assert!(sol.residuals.equation < 1e-8);
    }

    #[test]
    fn uniqueness_under_different_seeds() {
        let coeffs = CoefficientSet::new(
            2,
            1,
            vec![
                MatrixFunction::Polynomial(vec![CMatrix::identity(2, 2), CMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(-1.0), c(0.0)])]),
                MatrixFunction::Constant(CMatrix::from_row_slice(2, 2, &[c(0.2), c(0.0), c(0.1), c(-0.3)])),
            ],
        )
        .unwrap();
        let e = CMatrix::identity(2, 2);
        let b = BoundaryOperator::new(4, vec![], None);
        let mut points = vec![];
        let mut top = CMatrix::zeros(4, 2);
        top.view_mut((0, 0), (2, 2)).copy_from(&e);
        points.push(PointTerm::new(0.0, 0, top));
        let mut bottom = CMatrix::zeros(4, 2);
        bottom.view_mut((2, 0), (2, 2)).copy_from(&e);
        points.push(PointTerm::new(1.0, 0, bottom));
        let b = BoundaryOperator::new(b.q(), points, None);
        let rhs = RightHandSide::new(
            MatrixFunction::Polynomial(vec![CMatrix::from_column_slice(2, 1, &[c(1.0), c(0.0)]), CMatrix::from_column_slice(2, 1, &[c(0.0), c(2.0)])]),
            CVector::from_vec(vec![c(1.0), c(0.0), c(-1.0), c(0.5)]),
        );
        let spec = ProblemSpec::new(unit(), coeffs, b, LebesgueExponent::new(2.0).unwrap(), Some(rhs)).unwrap();
        let grid = Grid::uniform(unit(), 801).unwrap();
        let policy = RankPolicy::default();
        let a = solve(&spec, &grid, &policy).unwrap();
        let seed = CVector::from_vec(vec![c(0.3), c(-1.0), Complex64::new(0.0, 2.0), c(0.7)]);
        let b = solve_with_initial(&spec, &grid, &policy, &seed).unwrap();
        let diff = sobolev_norm(&a.stack.sub(&b.stack).unwrap(), spec.p());
        assert!(diff < 1e-8, "{diff}");
        assert!(a.residuals.boundary <= 1e-8 * (1.0 + vector_norm(&spec.rhs().unwrap().c)));
    }

    #[test]
    fn second_order_line() {
        let coeffs = CoefficientSet::new(1, 0, vec![MatrixFunction::zeros(1, 1), MatrixFunction::zeros(1, 1)]).unwrap();
        let row = |i: usize| CMatrix::from_fn(2, 1, |k, _| if k == i { c(1.0) } else { c(0.0) });
        let b = BoundaryOperator::new(2, vec![PointTerm::new(0.0, 0, row(0)), PointTerm::new(1.0, 0, row(1))], None);
        let rhs = RightHandSide::new(MatrixFunction::zeros(1, 1), CVector::from_vec(vec![c(0.0), c(1.0)]));
        let spec = ProblemSpec::new(unit(), coeffs, b, LebesgueExponent::new(2.0).unwrap(), Some(rhs)).unwrap();
        let grid = Grid::uniform(unit(), 1001).unwrap();
        let sol = solve(&spec, &grid, &RankPolicy::default()).unwrap();
        for (i, y) in sol.stack.order(0).iter().enumerate() {
            assert!((y[0] - c(grid.node(i))).norm() <= 1e-10);
        }
    }

    #[test]
    fn refusal_carries_report() {
        let coeffs = CoefficientSet::new(1, 0, vec![MatrixFunction::zeros(1, 1)]).unwrap();
        let b = BoundaryOperator::new(1, vec![PointTerm::new(0.0, 0, scalar(1.0)), PointTerm::new(1.0, 0, scalar(-1.0))], None);
        let rhs = RightHandSide::new(MatrixFunction::Constant(scalar(1.0)), CVector::from_element(1, c(0.0)));
        let spec = ProblemSpec::new(unit(), coeffs, b, LebesgueExponent::new(2.0).unwrap(), Some(rhs)).unwrap();
        let grid = Grid::uniform(unit(), 101).unwrap();
        match solve(&spec, &grid, &RankPolicy::default()) {
            Err(BvpError::NotWellPosed(rep)) => assert_eq!((rep.dim_ker, rep.dim_coker), (1, 1)),
            other => panic!("expected refusal, got {other:?}"),
        }
        let cm = build_characteristic_matrix(&spec, &grid, &RankPolicy::default()).unwrap();
        assert_eq!(kernel_directions(&cm).len(), 1);
    }

    #[test]
    fn discrepancy_of_exact_and_shifted() {
        let spec = first_order(1.0, 1.0, 0.0);
        let grid = Grid::uniform(unit(), 1001).unwrap();
        let sol = solve(&spec, &grid, &RankPolicy::default()).unwrap();
        assert!(discrepancy(&spec, &sol.stack).unwrap() < 1e-12);
        // shift f by v = 0.25: only the equation term changes, by ||v||_{0,2} = 0.25
        let shifted = first_order(1.0, 1.25, 0.0);
        let d = discrepancy(&shifted, &sol.stack).unwrap();
        assert!((d - 0.25).abs() < 1e-12, "{d}");
    }

    #[test]
    fn missing_rhs() {
        let spec = first_order(1.0, 1.0, 0.0);
        let bare = ProblemSpec::new(spec.interval(), spec.coeffs().clone(), spec.boundary().clone(), spec.p(), None).unwrap();
        let grid = Grid::uniform(unit(), 11).unwrap();
        assert!(matches!(solve(&bare, &grid, &RankPolicy::default()), Err(BvpError::MissingRhs)));
    }
}
