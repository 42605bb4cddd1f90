//! Finite elements on intervals and triangles, with quadrature.

mod interval;
mod poly;
mod quadrature;
mod triangle;

pub use interval::{dg1d_eval, hermite_eval};
pub use quadrature::{gauss_legendre, quadrature, QuadratureDomain, QuadratureRule};
pub use triangle::{
    dg_eval, lagrange_eval, ned_eval, rt_eval, DofFunctional, LocalBasis, TriangleElement,
    TriangleFamily, REFERENCE_TRIANGLE,
};

/// Legendre polynomial `P_n` on `[-1, 1]`.
pub fn legendre(n: usize, x: f64) -> f64 {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return p0;
    }
    for k in 1..n {
        let kf = k as f64;
        let p2 = ((2.0 * kf + 1.0) * x * p1 - kf * p0) / (kf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    p1
}
