//! Model-free control against integral control on a two-area
//! load-frequency-control network under cyberattacks.
//!
//! * [`mfc`] - ultra-local model, sliding-window estimator of `F`, iP law.
//! * [`integrator`] - the `K / s` baseline.
//! * [`plant`] - two-area LFC plant, RK4 integrator, ACE outputs.
//! * [`attack`] - load-altering and bias attacks, lossy DoS channels.
//! * [`sim`] - the closed loop, single runs and Monte Carlo batches.
//! * [`metrics`], [`report`], [`config`] - tracking-error sums, CSV/JSON
//!   output, JSON scenario files.

pub mod attack;
pub mod config;
pub mod integrator;
pub mod metrics;
pub mod mfc;
pub mod plant;
pub mod report;
pub mod scenario;
pub mod sim;

pub use attack::{AttackKind, AttackSchedule, HoldPolicy, LossyChannel};
pub use config::{parse_config, ConfigError};
pub use integrator::IntegratorController;
pub use metrics::{compute_metrics, MeanMetrics, MetricsReport, MonteCarloReport};
pub use mfc::{estimate_f, ip_control_step, MfcController, SlidingWindow, UltraLocalModel};
pub use plant::{measured_outputs, plant_derivative, rk4_step, AreaParams, LoadProfile, PlantParams, PlantState};
pub use scenario::{ControllerKind, Preset, Scenario, ScenarioError};
pub use sim::{run_monte_carlo, run_scenario, TimeSeries};
