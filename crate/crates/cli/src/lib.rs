//! Scenario files, the planning pipeline, sweeps and table exports behind
//! the `cpd` binary.

pub mod error;
pub mod export;
pub mod pipeline;
pub mod scenario;
pub mod sweep;

pub use error::CliError;
pub use pipeline::{prepare, run, Prepared, RunOutput};
pub use scenario::{PhasedPlanner, ReflectorPlanner, Scenario, Scheme};
pub use sweep::{run_sweep, run_sweep_with, Cell, SweepAxes};
