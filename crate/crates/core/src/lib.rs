//! Finite volume laboratory for hyperbolic balance laws.
//!
//! Two families of solvers live here:
//!
//! * late-time / stiff-relaxation systems `ε∂tU + ∂xF(U) = −R(U)/ε^q` together with
//!   Chapman–Enskog effective equations, an HLL baseline, an asymptotic-preserving
//!   scheme and explicit parabolic reference solvers;
//! * a geometry-preserving finite volume method for `d(ω(u)) = 0` on the spacetime
//!   `[0,T]×S¹`, with Kruzkov entropy and contraction diagnostics.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ap_scheme;
pub mod chapman_enskog;
pub mod error;
pub mod hyperbolic_fv;
pub mod linalg;
pub mod models;
pub mod parabolic;
pub mod quadrature;
pub mod roots;
pub mod spacetime;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
