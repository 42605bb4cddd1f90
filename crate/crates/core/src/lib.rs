//! Structure-preserving mixed finite elements for linear port-Hamiltonian
//! wave systems under mixed boundary conditions.
//!
//! The domain is split into two subdomains. One carries the Dirichlet part of
//! the boundary and is discretized so that Dirichlet data enter as a natural
//! input; the other carries the Neumann part with the dual formulation. The
//! two discrete port-Hamiltonian systems are joined through a power-conserving
//! gyrator interconnection on the interface and advanced in time with a
//! staggered implicit-midpoint scheme.
//!
//! Two model problems are provided: the Euler-Bernoulli beam (cubic Hermite /
//! DG1 spaces in 1D) and the 2D wave equation (RT/DG on one side, CG/NED on
//! the other).

pub mod assembly;
pub mod diagnostics;
pub mod elements;
pub mod error;
pub mod linalg;
pub mod mesh;
pub mod models;
pub mod phcore;
pub mod spectral;
pub mod timeint;

pub use error::{Error, Result};
