//! Lent particle calculus on configurations: ε⁺/ε⁻, Γ[F] as a per-jump
//! sum, a catalog of functionals and the finite-difference oracle.

pub mod catalog;
mod engine;
mod gamma;
mod operators;

pub use catalog::{
    Composed, DegenerateSdeZ, DoleansPair, RunningSup, ScalarFn, StochasticIntegralPhi, SupSide, TerminalValue,
    VectorFn, SINGULAR_JUMP_TOL,
};
pub use engine::{lent_particle_gamma, lent_particle_gamma_with, mark_derivative_fd, oracle_gamma, FdRule, Functional};
pub use gamma::{
    compare_gammas, compare_matrices, gamma_csv_header, gamma_csv_row, write_contributions_csv, write_gamma_csv,
    GammaDiscrepancy, GammaMatrix, JumpContribution, Provenance,
};
pub use operators::{add_particle, remove_particle};
