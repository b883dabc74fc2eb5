//! Configuration, scene catalog, the step loop and run orchestration.

pub mod config;
pub mod run;
pub mod scenario;
pub mod sim;

pub use config::{Backend, Method, SimConfig};
pub use run::{run, RunSummary};
pub use scenario::{Scene, SceneSolid, ScenarioConfig, CATALOG};
pub use sim::{compute_dt, Simulation, StepReport};
