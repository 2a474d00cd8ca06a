//! Detection and estimation metrics, and the simulation and AFR-sweep harnesses.

pub mod metrics;
pub mod simulation;
pub mod sweep;

pub use metrics::{auc_roc, mad, median};
pub use simulation::{run_simulation, simulate_dataset, MadTable, ParamMads, SimConfig, SimulatedData, SimulationReport};
pub use sweep::{run_sensitivity_sweep, SweepConfig, SweepPoint};
