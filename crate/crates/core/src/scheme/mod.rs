//! Convex-splitting time stepping with a fixed-point linearization.

mod block;
mod discretization;
mod energy;
mod initial;
mod params;
mod run;
mod step;

pub use block::{BlockForm, BlockOperator};
pub use discretization::Discretization;
pub use energy::{bulk_potential, discrete_energy, inverse_laplacian_zero_mean};
pub use initial::initial_condition;
pub use params::Params;
pub use run::{initial_potential, run_simulation, RunOptions, RunSummary, Snapshot, Termination, Trajectory};
pub use step::{fixed_point_step, StepOutcome, StepStats};
