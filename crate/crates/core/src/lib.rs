//! Carré du champ (Malliavin) matrices of Poisson functionals and of
//! jump-SDE solutions, computed with the lent particle formula
//! Γ[F] = ∫∫ ε⁻γ[ε⁺F] dN and checked against per-jump finite differences.
//!
//! All numerical code is generic over [`Scalar`] (`f32` or `f64`); the
//! `*64` aliases below fix the common `f64` instantiation.

// `!(x > 0.0)` is used deliberately so NaN lands on the rejecting branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bottom_structure;
pub mod csv_util;
pub mod density_diagnostics;
pub mod error;
pub mod functional_calculus;
pub mod jump_sde;
pub mod levy_sim;
mod scalar;

pub use error::{Error, ErrorCategory, Result};
pub use scalar::Scalar;

pub type LevyMeasureSpec64 = levy_sim::LevyMeasureSpec<f64>;
pub type JumpConfiguration64 = levy_sim::JumpConfiguration<f64>;
pub type CadlagPath64 = levy_sim::CadlagPath<f64>;
pub type GammaMatrix64 = functional_calculus::GammaMatrix<f64>;
pub type Trajectory64 = jump_sde::Trajectory<f64>;
pub type FlowState64 = jump_sde::FlowState<f64>;
