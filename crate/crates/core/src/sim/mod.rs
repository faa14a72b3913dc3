//! Discrete-event simulation of vehicles driving past a line of RSUs.
//!
//! Vehicles enter the street at staggered times, drive at a constant speed
//! in their lane's direction and wrap around at the end. Each RSU serves
//! the stretch of street nearest to it. Crossing into a new zone ends the
//! old session; the vehicle waits for the next beacon and authenticates.
//! Vehicles near a configured incident periodically report it over their
//! current session, and final reports flow through the cloud store to the
//! authority.
//!
//! The radio is abstract: latency grows with the number of vehicles in
//! range of the RSU, and the loss probability follows a configurable
//! curve over the same count. All randomness comes from the scenario seed.

mod engine;
mod log;
mod metrics;
mod scenario;
mod sweep;

pub use engine::{run, SimOutput};
pub use log::{EventKind, EventLog, Node, PacketKind, SimEvent};
pub use metrics::{compute_metrics, steps, Metrics, SubtaskCost, UnitCosts};
pub use scenario::{
    load_scenario, BackboneConfig, BeaconConfig, Incident, LossConfig, ProtocolConfig, RadioConfig,
    ReportConfig, RsuConfig, RunConfig, Scenario, ScenarioError, StreetConfig, VehicleConfig,
    CONFIG_ENV,
};
pub use sweep::{summarize, sweep, write_csv, RunRecord, SweepPoint, SWEEP_COUNTS};
