//! Numerical workbench for Hermitian geometry.
//!
//! The crate evaluates the Chern connection, torsion, Lee form, Chern
//! curvature and Chern-scalar curvature of closed-form Hermitian metrics on
//! a small zoo of manifolds, together with the first and second variations
//! of the Chern-scalar curvature along metric paths `g_t = g((Id + t h)·,··)`,
//! the linearized operator `γ_g` and its formal adjoint `γ_g*`, and the
//! integral obstruction that witnesses linearization instability at positive
//! Kähler–Einstein metrics with isometries.
//!
//! Every analytic formula is cross-checked against an independent oracle:
//! spatial derivatives come from forward-mode jet arithmetic (exact to
//! roundoff), variational derivatives are compared against Richardson-
//! extrapolated finite differences in the path parameter, and integrals use
//! quadrature rules that are exact on band-limited integrands.

pub mod algebra;
pub mod chern;
pub mod error;
pub mod fields;
pub mod jets;
pub mod manifolds;
pub mod obstruction;
pub mod quadrature;
pub mod riemannian;
pub mod variation;
pub mod rng;

pub use error::{ChernError, Result};
