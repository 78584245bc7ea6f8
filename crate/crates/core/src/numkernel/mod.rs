//! Deterministic numerical foundation: dense matrices, seeded sampling, SVD and
//! minimum-norm least squares.

mod matrix;
mod pinv;
mod rng;
mod svd;

pub use matrix::{dot, norm, ComplexMatrix, Matrix};
pub use pinv::{
    check_rel_tol, min_norm_lstsq, min_norm_lstsq_with_tol, pseudoinverse, residual_norm,
    singular_cutoff, DEFAULT_REL_TOL,
};
pub use rng::{sample_complex_gaussian, sample_gaussian, RngStream};
pub use svd::{svd, Svd};
