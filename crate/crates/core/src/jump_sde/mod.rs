//! SDEs driven by a compensated Poisson measure and an auxiliary
//! semimartingale Z, the derivative of their flow K_t, its inverse K̄_t,
//! and the carré du champ Γ[X_t] built from them.

mod csv_io;
mod driver;
mod gamma;
mod model;
mod solver;

pub use csv_io::write_trajectory_csv;
pub use driver::ZPath;
pub use gamma::{sde_gamma, sde_gamma_oracle, solve_and_gamma};
pub use model::{
    check_model_jacobians, DegenerateZModel, FnModel, LinearModel, LinearScalarModel, ModelProbe, SdeModel,
};
pub use solver::{
    flow_derivative, inverse_flow, solve_sde, solve_sde_from, DriftHandling, EventKind, FlowRecord, FlowState,
    StepControl, Trajectory, TrajectoryEvent, SINGULAR_CONDITION,
};
