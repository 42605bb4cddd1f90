//! Sparse and dense real linear algebra.

mod csr;
mod eig;
mod lu;

pub use csr::CsrMatrix;
pub use eig::{cholesky_lower, dense_generalized_eig, EigenPair};
pub use lu::{lu_factorize, lu_solve, rcm_ordering, LuFactorization};

pub type DenseMatrix = nalgebra::DMatrix<f64>;
pub type Complex = nalgebra::Complex<f64>;

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}
