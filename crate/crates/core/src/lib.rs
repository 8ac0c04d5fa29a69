//! Solvability analysis for linear systems of ordinary differential equations
//!
//! ```text
//! y^(r)(t) + A_{r-1}(t) y^(r-1)(t) + ... + A_0(t) y(t) = f(t),   t in (a, b)
//! B y = c
//! ```
//!
//! posed in Sobolev spaces `(W_p^{n+r})^m` with a generic continuous boundary
//! operator `B` taking values in `C^q`.
//!
//! The central object is the characteristic matrix `M(L, B)`: the boundary
//! operator applied column-wise to the fundamental matrices `Y_1, ..., Y_r`
//! of the homogeneous equation. Its numerical rank gives the kernel and
//! cokernel dimensions of the whole problem, whose index is always `rm - q`.
//!
//! Modules:
//! - [`grid`]: uniform grids, derivative stacks, Lebesgue and Sobolev norms
//! - [`function`]: matrix-valued coefficient representations
//! - [`expr`]: arithmetic expressions with exact symbolic derivatives
//! - [`ode`]: fundamental set and particular solutions (RK4 on the companion system)
//! - [`boundary`]: point/integral boundary operators
//! - [`characteristic`]: the characteristic matrix, rank and Fredholm numbers
//! - [`closed_forms`]: matrix-function series and closed-form reference matrices
//! - [`solver`]: superposition solver and discrepancy
//! - [`limits`]: parameter-dependent families and limit experiments
//!
//! ```
//! use bvpkit::prelude::*;
//!
//! // y' = f on [0, 1] with y(0) = c
//! let interval = Interval::new(0.0, 1.0).unwrap();
//! let coeffs = CoefficientSet::new(1, 0, vec![MatrixFunction::zeros(1, 1)]).unwrap();
//! let boundary = BoundaryOperator::new(1, vec![PointTerm::new(0.0, 0, CMatrix::identity(1, 1))], None);
//! let spec = ProblemSpec::new(interval, coeffs, boundary, LebesgueExponent::new(2.0).unwrap(), None).unwrap();
//! let grid = Grid::uniform(interval, 101).unwrap();
//! let m = build_characteristic_matrix(&spec, &grid, &RankPolicy::default()).unwrap();
//! let report = solvability_report(&m, &spec);
//! assert!(report.well_posed);
//! assert_eq!(report.index, 0);
//! ```
#![allow(clippy::needless_range_loop)] // index-heavy numerics read better with explicit loops

pub mod boundary;
pub mod characteristic;
pub mod closed_forms;
mod error;
pub mod expr;
pub mod function;
pub mod grid;
pub mod limits;
mod linalg;
pub mod ode;
pub mod problem;
pub mod solver;

pub use error::{BvpError, Result};
pub use num_complex::Complex64;

/// Dense complex matrix used throughout.
pub type CMatrix = nalgebra::DMatrix<Complex64>;
/// Dense complex column vector.
pub type CVector = nalgebra::DVector<Complex64>;

pub use linalg::{entrywise_norm, vector_norm};

pub mod prelude {
    pub use crate::boundary::{BoundaryOperator, Diagnostic, DiagnosticKind, IntegralTerm, PointTerm};
    pub use crate::characteristic::{
        build_characteristic_matrix, kernel_directions, solvability_report, CharacteristicMatrix,
        RankPolicy, SolvabilityReport,
    };
    pub use crate::function::MatrixFunction;
    pub use crate::grid::{DerivativeStack, Grid, Interval, LebesgueExponent, MatrixTrajectory};
    pub use crate::ode::{fundamental_set, particular_solution, CoefficientSet, FundamentalSet};
    pub use crate::problem::{ProblemSpec, RightHandSide};
    pub use crate::solver::{discrepancy, solve, Solution};
    pub use crate::{BvpError, CMatrix, CVector, Complex64, Result};
}
