//! Two-area load-frequency-control plant.
//!
//! Each area is a non-reheat thermal unit: governor and turbine first-order
//! lags feeding a generator/load block, with primary droop feedback. The
//! areas exchange power over a tie line whose deviation obeys
//! `d(dp_tie)/dt = 2*pi*t12*(df_1 - df_2)`. Tie power is counted positive
//! leaving area 1; it enters area 2 with the opposite sign.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlantError {
    #[error("step {dt} s violates 0 < dt <= {max} s (min time constant / 5)")]
    StepTooLarge { dt: f64, max: f64 },
    #[error("invalid plant parameters: {0}")]
    InvalidParams(String),
    #[error("invalid load profile: {0}")]
    InvalidLoadProfile(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AreaParams {
    /// Governor time constant, s.
    pub t_gov: f64,
    /// Turbine time constant, s.
    pub t_turb: f64,
    /// Power-system gain, Hz/pu.
    pub k_ps: f64,
    /// Power-system time constant, s.
    pub t_ps: f64,
    /// Speed droop, Hz/pu.
    pub r_droop: f64,
    /// Frequency bias, pu/Hz.
    pub bias_b: f64,
}

impl Default for AreaParams {
    fn default() -> Self {
        Self {
            t_gov: 0.08,
            t_turb: 0.3,
            k_ps: 120.0,
            t_ps: 20.0,
            r_droop: 2.4,
            bias_b: 0.425,
        }
    }
}

impl AreaParams {
    pub fn validate(&self) -> Result<(), PlantError> {
        let checks = [
            ("t_gov", self.t_gov),
            ("t_turb", self.t_turb),
            ("k_ps", self.k_ps),
            ("t_ps", self.t_ps),
            ("r_droop", self.r_droop),
            ("bias_b", self.bias_b),
        ];
        for (name, v) in checks {
            if !v.is_finite() || v <= 0.0 {
                return Err(PlantError::InvalidParams(format!(
                    "{name} must be finite and > 0, got {v}"
                )));
            }
        }
        Ok(())
    }

    fn min_time_constant(&self) -> f64 {
        self.t_gov.min(self.t_turb).min(self.t_ps)
    }
}

/// Signal each area's secondary controller regulates to zero.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputSignal {
    /// Area control error, `bias_b * df +/- dp_tie`.
    #[default]
    Ace,
    /// Frequency deviation alone.
    Frequency,
}

/// Default synchronizing coefficient: `2*pi*t12 = 0.545` pu/Hz.
pub const DEFAULT_T12: f64 = 0.545 / (2.0 * PI);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlantParams {
    pub areas: [AreaParams; 2],
    /// Tie-line synchronizing coefficient, pu/Hz. Zero decouples the areas.
    pub t12: f64,
    pub output: OutputSignal,
}

impl Default for PlantParams {
    fn default() -> Self {
        Self {
            areas: [AreaParams::default(); 2],
            t12: DEFAULT_T12,
            output: OutputSignal::Ace,
        }
    }
}

impl PlantParams {
    pub fn validate(&self) -> Result<(), PlantError> {
        for a in &self.areas {
            a.validate()?;
        }
        if !self.t12.is_finite() || self.t12 < 0.0 {
            return Err(PlantError::InvalidParams(format!(
                "t12 must be finite and >= 0, got {}",
                self.t12
            )));
        }
        Ok(())
    }

    /// Largest step `rk4_step` accepts.
    pub fn max_step(&self) -> f64 {
        self.areas
            .iter()
            .map(AreaParams::min_time_constant)
            .fold(f64::INFINITY, f64::min)
            / 5.0
    }
}

/// Deviations from the operating point. All quantities in pu or Hz.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PlantState {
    pub dp_gov: [f64; 2],
    pub dp_turb: [f64; 2],
    pub df: [f64; 2],
    pub dp_tie: f64,
}

impl PlantState {
    pub const DIM: usize = 7;

    pub fn to_array(&self) -> [f64; 7] {
        [
            self.dp_gov[0],
            self.dp_turb[0],
            self.df[0],
            self.dp_gov[1],
            self.dp_turb[1],
            self.df[1],
            self.dp_tie,
        ]
    }

    pub fn from_array(x: [f64; 7]) -> Self {
        Self {
            dp_gov: [x[0], x[3]],
            dp_turb: [x[1], x[4]],
            df: [x[2], x[5]],
            dp_tie: x[6],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.to_array().iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    fn axpy(&self, a: f64, d: &PlantState) -> PlantState {
        let x = self.to_array();
        let dx = d.to_array();
        PlantState::from_array(std::array::from_fn(|i| x[i] + a * dx[i]))
    }
}

/// Exogenous inputs held constant over a step.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PlantInputs {
    /// Secondary control set-point delivered to each governor, pu.
    pub u: [f64; 2],
    /// Load deviation in each area, pu.
    pub load: [f64; 2],
}

/// Tie-line sign as seen from area `i`: leaving area 1, entering area 2.
fn tie_sign(area: usize) -> f64 {
    if area == 0 {
        1.0
    } else {
        -1.0
    }
}

pub fn plant_derivative(params: &PlantParams, x: &PlantState, inputs: &PlantInputs) -> PlantState {
    let mut d = PlantState::default();
    for i in 0..2 {
        let a = &params.areas[i];
        d.dp_gov[i] = (inputs.u[i] - x.df[i] / a.r_droop - x.dp_gov[i]) / a.t_gov;
        d.dp_turb[i] = (x.dp_gov[i] - x.dp_turb[i]) / a.t_turb;
        d.df[i] = (a.k_ps / a.t_ps) * (x.dp_turb[i] - inputs.load[i] - tie_sign(i) * x.dp_tie)
            - x.df[i] / a.t_ps;
    }
    d.dp_tie = 2.0 * PI * params.t12 * (x.df[0] - x.df[1]);
    d
}

/// Classical fourth-order Runge-Kutta step with inputs held constant.
pub fn rk4_step(
    params: &PlantParams,
    x: &PlantState,
    inputs: &PlantInputs,
    dt: f64,
) -> Result<PlantState, PlantError> {
    let max = params.max_step();
    if !(dt > 0.0 && dt <= max * (1.0 + 1e-12)) {
        return Err(PlantError::StepTooLarge { dt, max });
    }
    let f = |s: &PlantState| plant_derivative(params, s, inputs);
    let k1 = f(x);
    let k2 = f(&x.axpy(0.5 * dt, &k1));
    let k3 = f(&x.axpy(0.5 * dt, &k2));
    let k4 = f(&x.axpy(dt, &k3));
    let (x0, k1, k2, k3, k4) = (
        x.to_array(),
        k1.to_array(),
        k2.to_array(),
        k3.to_array(),
        k4.to_array(),
    );
    Ok(PlantState::from_array(std::array::from_fn(|i| {
        x0[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
    })))
}

/// Area control errors `ACE_i = bias_b_i * df_i +/- dp_tie`.
pub fn area_control_errors(params: &PlantParams, x: &PlantState) -> [f64; 2] {
    std::array::from_fn(|i| params.areas[i].bias_b * x.df[i] + tie_sign(i) * x.dp_tie)
}

/// Regulated outputs `(y_1, y_2)`; the reference is zero for both.
pub fn measured_outputs(params: &PlantParams, x: &PlantState) -> [f64; 2] {
    match params.output {
        OutputSignal::Ace => area_control_errors(params, x),
        OutputSignal::Frequency => x.df,
    }
}

/// One breakpoint of a piecewise-constant load schedule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoadStep {
    pub t: f64,
    pub area1: f64,
    pub area2: f64,
}

/// Piecewise-constant load deviations per area.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LoadProfile(Vec<LoadStep>);

impl Default for LoadProfile {
    /// Steps at 1 s (+0.01 pu area 1), 40 s (+0.005 pu area 2) and
    /// 70 s (area 1 back to zero).
    fn default() -> Self {
        Self(vec![
            LoadStep { t: 0.0, area1: 0.0, area2: 0.0 },
            LoadStep { t: 1.0, area1: 0.01, area2: 0.0 },
            LoadStep { t: 40.0, area1: 0.01, area2: 0.005 },
            LoadStep { t: 70.0, area1: 0.0, area2: 0.005 },
        ])
    }
}

impl LoadProfile {
    pub fn new(steps: Vec<LoadStep>) -> Result<Self, PlantError> {
        let p = Self(steps);
        p.validate()?;
        Ok(p)
    }

    pub fn zero() -> Self {
        Self(vec![LoadStep { t: 0.0, area1: 0.0, area2: 0.0 }])
    }

    pub fn steps(&self) -> &[LoadStep] {
        &self.0
    }

    pub fn validate(&self) -> Result<(), PlantError> {
        let bad = |m: String| Err(PlantError::InvalidLoadProfile(m));
        match self.0.first() {
            None => return bad("at least one breakpoint is required".into()),
            Some(s) if s.t != 0.0 => return bad(format!("first breakpoint must be at t = 0, got {}", s.t)),
            _ => {}
        }
        for s in &self.0 {
            if !(s.t.is_finite() && s.area1.is_finite() && s.area2.is_finite()) {
                return bad(format!("non-finite breakpoint {s:?}"));
            }
        }
        if let Some(w) = self.0.windows(2).find(|w| w[1].t <= w[0].t) {
            return bad(format!("times must be strictly increasing ({} then {})", w[0].t, w[1].t));
        }
        Ok(())
    }

    /// Load deviation in force at time `t` (right-continuous).
    pub fn load_at(&self, t: f64) -> [f64; 2] {
        let idx = self.0.partition_point(|s| s.t <= t);
        match idx {
            0 => [0.0, 0.0],
            i => [self.0[i - 1].area1, self.0[i - 1].area2],
        }
    }
}
