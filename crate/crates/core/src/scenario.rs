//! Declarative experiment description and the four shipped presets.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::attack::{AttackError, AttackKind, AttackSchedule};
use crate::integrator::{Feedback, IntegratorController, IntegratorError};
use crate::mfc::{MfcController, MfcError, UltraLocalModel, WarmupPolicy};
use crate::plant::{LoadProfile, PlantError, PlantParams};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Plant(#[from] PlantError),
    #[error(transparent)]
    Attack(#[from] AttackError),
    #[error(transparent)]
    Mfc(#[from] MfcError),
    #[error(transparent)]
    Integrator(#[from] IntegratorError),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControllerKind {
    Integrator,
    #[default]
    Mfc,
}

impl ControllerKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ControllerKind::Integrator => "integrator",
            ControllerKind::Mfc => "mfc",
        }
    }
}

impl std::str::FromStr for ControllerKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "integrator" => Ok(ControllerKind::Integrator),
            "mfc" => Ok(ControllerKind::Mfc),
            other => Err(format!("unknown controller `{other}` (expected mfc or integrator)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MfcParams {
    pub alpha: f64,
    /// 1/s.
    pub kp: f64,
    /// Estimator window, s.
    pub tau: f64,
    pub warmup: WarmupPolicy,
}

impl Default for MfcParams {
    fn default() -> Self {
        Self {
            alpha: 10.0,
            kp: 0.3,
            tau: 0.5,
            warmup: WarmupPolicy::Zero,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegratorParams {
    /// `K_1`, `K_2`, 1/s.
    pub gains: [f64; 2],
    pub feedback: Feedback,
}

impl Default for IntegratorParams {
    fn default() -> Self {
        Self {
            gains: [1.0, 1.0],
            feedback: Feedback::Negative,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Scenario {
    pub name: String,
    pub controller: ControllerKind,
    pub mfc: MfcParams,
    pub integrator: IntegratorParams,
    pub plant: PlantParams,
    pub load_profile: LoadProfile,
    pub attack: AttackSchedule,
    /// s.
    pub horizon: f64,
    /// Plant step and controller sample period, s.
    pub dt: f64,
    /// Run `k` of a batch uses seed `base_seed + k`.
    pub base_seed: u64,
    /// Monte Carlo batch size.
    pub runs: usize,
}

impl Default for Scenario {
    fn default() -> Self {
        Self::preset(Preset::NoAttack)
    }
}

/// Shipped experiment set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// scenario1: nominal load steps, no attack.
    NoAttack,
    /// scenario2: +0.1 pu on area 1 for 2 s from t = 20 s.
    LoadAltering,
    /// scenario3: 90 % drops on the area-2 control link, 100 runs.
    DosActuation,
    /// scenario4: 95 % drops on the area-2 measurement link, 100 runs.
    DosMeasurement,
}

impl Preset {
    pub const ALL: [Preset; 4] = [
        Preset::NoAttack,
        Preset::LoadAltering,
        Preset::DosActuation,
        Preset::DosMeasurement,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::NoAttack => "scenario1",
            Preset::LoadAltering => "scenario2",
            Preset::DosActuation => "scenario3",
            Preset::DosMeasurement => "scenario4",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.name() == name)
    }
}

impl Scenario {
    pub fn preset(p: Preset) -> Self {
        let (attack, runs) = match p {
            Preset::NoAttack => (AttackSchedule::none(), 1),
            Preset::LoadAltering => (AttackSchedule::load_altering(1, 20.0, 22.0, 0.1), 1),
            Preset::DosActuation => (AttackSchedule::dos(AttackKind::DosActuation, 2, 0.9), 100),
            Preset::DosMeasurement => (AttackSchedule::dos(AttackKind::DosMeasurement, 2, 0.95), 100),
        };
        Self {
            name: p.name().to_string(),
            controller: ControllerKind::Mfc,
            mfc: MfcParams::default(),
            integrator: IntegratorParams::default(),
            plant: PlantParams::default(),
            load_profile: LoadProfile::default(),
            attack,
            horizon: 100.0,
            dt: 0.01,
            base_seed: 0,
            runs,
        }
    }

    pub fn with_controller(mut self, kind: ControllerKind) -> Self {
        self.controller = kind;
        self
    }

    /// Number of loop samples over the horizon.
    pub fn samples(&self) -> usize {
        (self.horizon / self.dt).round() as usize
    }

    pub fn ultra_local_model(&self) -> Result<UltraLocalModel, MfcError> {
        UltraLocalModel::new(self.mfc.alpha, self.mfc.kp, self.mfc.tau, self.dt)
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        let invalid = |m: String| Err(ScenarioError::Invalid(m));
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return invalid(format!("horizon must be finite and > 0, got {}", self.horizon));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return invalid(format!("dt must be finite and > 0, got {}", self.dt));
        }
        if self.dt > self.horizon {
            return invalid(format!("dt ({}) exceeds horizon ({})", self.dt, self.horizon));
        }
        if self.runs == 0 {
            return invalid("runs must be >= 1".into());
        }
        self.plant.validate()?;
        let max = self.plant.max_step();
        if self.dt > max * (1.0 + 1e-12) {
            return Err(PlantError::StepTooLarge { dt: self.dt, max }.into());
        }
        self.load_profile.validate()?;
        self.attack.validate(self.horizon)?;
        self.ultra_local_model()?;
        for &g in &self.integrator.gains {
            IntegratorController::new(g, self.dt)?;
        }
        Ok(())
    }

    /// Fresh per-area controllers for one run.
    pub fn build_controllers(&self) -> Result<[AreaController; 2], ScenarioError> {
        let integrator = |i: usize| {
            IntegratorController::with_feedback(self.integrator.gains[i], self.dt, self.integrator.feedback)
        };
        let build = |i: usize| -> Result<AreaController, ScenarioError> {
            Ok(match self.controller {
                ControllerKind::Integrator => AreaController::Integrator(integrator(i)?),
                ControllerKind::Mfc => {
                    let model = self.ultra_local_model()?;
                    AreaController::Mfc(match self.mfc.warmup {
                        WarmupPolicy::Zero => MfcController::new(model),
                        WarmupPolicy::HoldBaseline => {
                            MfcController::with_baseline_warmup(model, integrator(i)?)
                        }
                    })
                }
            })
        };
        Ok([build(0)?, build(1)?])
    }
}

/// Secondary controller of one area.
#[derive(Debug, Clone, PartialEq)]
pub enum AreaController {
    Integrator(IntegratorController),
    Mfc(MfcController),
}

impl AreaController {
    pub fn step(&mut self, y_measured: f64, y_ref: f64) -> Result<f64, ScenarioError> {
        Ok(match self {
            AreaController::Integrator(c) => c.step(y_measured - y_ref)?,
            AreaController::Mfc(c) => c.step(y_measured, y_ref)?,
        })
    }
}
