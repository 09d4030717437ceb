//! Deterministic closed-loop simulation of robot + controller + virtual
//! fixture + scripted human, with passivity monitoring, metrics and
//! parameter sweeps.

mod energy;
mod human;
mod metrics;
pub mod presets;
mod scenario;
mod session;
mod sweep;
mod trace;

pub use energy::{passivity_report, EnergyReport};
pub use human::{human_force, HumanModel, HumanState};
pub use metrics::{compute_metrics, Distribution, Metrics};
pub use scenario::{FixtureParams, GainsConfig, Scenario, ScenarioError};
pub use session::simulate_session;
pub use sweep::{aggregate_mean, run_sweep, write_results_csv, RunRecord, SweepCell, SweepResults};
pub use trace::{SimEvent, SimFault, SimTrace, TraceRow};
