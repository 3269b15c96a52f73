//! Forward-mode differentiation and dense linear algebra.
//!
//! Nothing here knows about legged robots: the solvers above only need
//! Jacobians, per-output Hessians, least-squares solves, null-space tangents
//! and smallest eigenvalues.

mod diff;
mod dual;
mod dual2;
mod linalg;
mod scalar;

pub use diff::{
    fd_jacobian, hessian_stack, jacobian, jacobian_and_values, second_order, values_only, SecondOrder, VectorFn,
    DEFAULT_STRIP_WIDTH, MAX_DUAL2_WIDTH, MAX_DUAL_WIDTH,
};
pub use dual::Dual;
pub use dual2::Dual2;
pub use linalg::{
    min_eig_pair, min_eig_symmetric, null_space_basis, null_tangent, solve_least_squares, solve_square, HouseholderQr,
    Ldl, LeastSquares, SmallMat, RANK_RTOL,
};
pub use scalar::{dot, lift, values, Scalar};

/// Dense column-major matrix used across the crate.
pub type DenseMatrix = nalgebra::DMatrix<f64>;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum NumericsError {
    #[error("differentiation failed at output component {component}: {detail}")]
    DifferentiationFailure { component: usize, detail: String },
    #[error("matrix is rank deficient (effective rank {rank})")]
    RankDeficient { rank: usize },
    #[error("matrix is singular")]
    Singular,
    #[error("non-finite input")]
    NonFinite,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}
