//! Scenario files, result envelopes and figure reproduction for the
//! `atomirror` command-line tool.

pub mod config;
pub mod output;
pub mod reproduce;
pub mod run;

pub use config::{parse_config, ConfigError, ScenarioConfig};
pub use reproduce::{reproduce, FIGURES};
pub use run::{run_plan, run_scenario, Plan, ResultEnvelope, RunError, RunOutput};
