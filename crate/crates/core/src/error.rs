use thiserror::Error;

use crate::characteristic::SolvabilityReport;
use crate::expr::ExprError;

pub type Result<T, E = BvpError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum BvpError {
    #[error("invalid interval [{a}, {b}]: endpoints must be finite with a < b")]
    InvalidInterval { a: f64, b: f64 },

    #[error("grid needs at least {min} nodes, got {got}")]
    GridTooSmall { min: usize, got: usize },

    #[error("Lebesgue exponent must lie in [1, inf], got {0}")]
    InvalidExponent(f64),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("grids span different intervals")]
    IntervalMismatch,

    #[error("boundary term uses derivative order {order}, allowed orders are 0..={max}")]
    OrderOutOfRange { order: usize, max: usize },

    #[error(
        "boundary term evaluates the top derivative (order {0}) at a point, \
         which is not continuous on the solution space"
    )]
    TopDerivativePoint(usize),

    #[error("boundary point {point} lies outside [{a}, {b}]")]
    PointOutsideInterval { point: f64, a: f64, b: f64 },

    #[error("function provides derivatives up to order {have}, order {need} is required")]
    MissingDerivatives { have: usize, need: usize },

    #[error("non-finite value during integration near t = {0}")]
    NonFinite(f64),

    #[error("matrix function series did not converge (argument norm {0:.3e})")]
    Overflow(f64),

    #[error("problem is not well posed (index {}, dim ker {}, dim coker {})", .0.index, .0.dim_ker, .0.dim_coker)]
    NotWellPosed(Box<SolvabilityReport>),

    #[error("problem has no right-hand side")]
    MissingRhs,

    #[error(transparent)]
    Expression(#[from] ExprError),

    #[error("{0}")]
    Invalid(String),
}
