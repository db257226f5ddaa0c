//! Continuous-time distributed optimization of time-varying convex costs for
//! single- and double-integrator agent teams.

pub mod controllers;
pub mod costs;
pub mod error;
pub mod graph;
pub mod linalg;
pub mod output;
pub mod scenario;
pub mod sim;
pub mod swarm;
pub mod switching;

pub use costs::{team_optimum, CostModel, CostPreset, DerivativeBundle, TimeSignal};
pub use error::{Error, Result};
pub use graph::{EdgeGains, Graph};
pub use switching::{boundary_layer, sig_alpha, LayerSpec};
pub use controllers::{GainParams, TeamState};
pub use scenario::{parse_scenario, parse_scenario_str, preset, Algorithm, Method, ScenarioConfig};
pub use sim::{check_scenario, integrate, summarize, CheckReport, Metrics, Summary, TrajectoryLog};
