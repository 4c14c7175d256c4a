//! Poisson random measures on `[0, T] × ℝʳ`, their driving paths, and
//! stochastic integrals against them.

mod config;
mod csv_io;
mod path;
pub mod quadrature;
mod spec;

pub use config::{
    path_rng, sample_configuration, sample_configuration_for_path, sample_configuration_with, JumpConfiguration,
    JumpPoint,
};
pub use csv_io::{write_configuration_csv, write_path_grid_csv};
pub use path::{build_path, stochastic_integral, stochastic_integral_scalar, CadlagPath, DRIFT_QUADRATURE_TOL};
pub use spec::{coefficient, LevyMeasureSpec, MarkFn, MarkSampler, TotalMass};
