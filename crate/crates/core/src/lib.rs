//! Numerical core for time-fractional diffusion on truncated lattices.
//!
//! The library solves the Cauchy problem
//!
//! ```text
//! D_(g) u(t,k) + a(t) H u(t,k) = f(t,k),   u(0,k) = u0(k),
//! ```
//!
//! where `D_(g)` is a generalized Caputo-type derivative with kernel `g`,
//! and `H = -h⁻²L + V` is the discrete Schrödinger operator on a truncated
//! lattice `hZⁿ` with nearest-neighbor Laplacian `L` and confining potential
//! `V ≥ V0 > 0`. Everything is spectral: `H` is diagonalized once, each
//! eigenmode solves a scalar fractional relaxation equation, and Sobolev
//! norms are weighted mode sums.
//!
//! Module map:
//!
//! * [`lattice`] — lattice geometry, potentials, operator assembly;
//! * [`spectral`] — eigendecomposition, mode transforms, Sobolev norms;
//! * [`kernels`] — Caputo-type kernels, Laplace transforms, admissibility;
//! * [`special`] — gamma and Mittag-Leffler evaluation;
//! * [`relaxation`] — the scalar relaxation function by three methods;
//! * [`solver`] — mode-wise time stepping, reconstruction, estimate checks;
//! * [`veryweak`] — mollifiers, distributional coefficients, ε-sweeps;
//! * [`semiclassical`] — h→0 defect bounds and self-convergence sweeps.

pub mod error;
pub mod grid;
pub mod kernels;
pub mod lattice;
pub mod quad;
pub mod relaxation;
pub mod semiclassical;
pub mod solver;
pub mod special;
pub mod spectral;
pub mod talbot;
pub mod veryweak;

pub use error::{Error, Result};
