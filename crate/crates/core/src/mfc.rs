//! Model-free control: first-order ultra-local model, sliding-window
//! estimator of the lumped dynamics `F`, and the intelligent proportional
//! (iP) control law.
//!
//! The ultra-local model replaces the unknown plant with
//!
//! ```text
//! dy/dt = F + alpha * u
//! ```
//!
//! where `F` is re-estimated every sample from the last `tau` seconds of
//! `(y, u)` history. The iP law then cancels `F_est` and adds proportional
//! feedback on the tracking error, so the closed loop obeys
//! `de/dt + kp * e = F - F_est`.
//!
//! The window always stores the *commanded* control. When an attacker adds
//! a signal to the delivered control, the estimator therefore sees the
//! attack as part of `F` and the loop absorbs it without a separate code
//! path.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::integrator::IntegratorController;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MfcError {
    #[error("estimator window is warming up ({filled} of {needed} samples)")]
    WarmingUp { filled: usize, needed: usize },
    #[error("non-finite input `{name}` = {value}")]
    NonFinite { name: &'static str, value: f64 },
    #[error("invalid ultra-local model: {0}")]
    InvalidModel(String),
}

/// Parameters of the first-order ultra-local model and its estimator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UltraLocalModel {
    alpha: f64,
    kp: f64,
    tau: f64,
    sample_period: f64,
}

impl UltraLocalModel {
    pub fn new(alpha: f64, kp: f64, tau: f64, sample_period: f64) -> Result<Self, MfcError> {
        let bad = |msg: String| Err(MfcError::InvalidModel(msg));
        if !alpha.is_finite() || alpha == 0.0 {
            return bad(format!("alpha must be finite and non-zero, got {alpha}"));
        }
        if !kp.is_finite() || kp <= 0.0 {
            return bad(format!("kp must be finite and > 0, got {kp}"));
        }
        if !sample_period.is_finite() || sample_period <= 0.0 {
            return bad(format!("sample_period must be finite and > 0, got {sample_period}"));
        }
        if !tau.is_finite() || tau <= 0.0 {
            return bad(format!("tau must be finite and > 0, got {tau}"));
        }
        if tau < 2.0 * sample_period * (1.0 - 1e-9) {
            return bad(format!(
                "tau ({tau}) must span at least two sample periods ({sample_period})"
            ));
        }
        Ok(Self {
            alpha,
            kp,
            tau,
            sample_period,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn kp(&self) -> f64 {
        self.kp
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn sample_period(&self) -> f64 {
        self.sample_period
    }

    /// Number of samples held by the estimator window: `ceil(tau / h) + 1`.
    pub fn window_len(&self) -> usize {
        // Guard against 0.5 / 0.01 = 50.000000000000007.
        let ratio = self.tau / self.sample_period;
        (ratio - 1e-9).ceil() as usize + 1
    }

    /// Time spanned by the window, `(window_len - 1) * h`. Equals `tau`
    /// whenever `tau` is a multiple of the sample period.
    pub fn window_span(&self) -> f64 {
        (self.window_len() - 1) as f64 * self.sample_period
    }

    /// Quadrature weights for the estimator.
    pub fn weights(&self) -> EstimatorWeights {
        EstimatorWeights::new(self)
    }
}

/// Precomputed discrete kernel of the `F` estimator.
///
/// Continuous form, with `s` the window coordinate running from the oldest
/// sample (`s = 0`) to the newest (`s = T`):
///
/// ```text
/// F_est = -(6 / T^3) * integral_0^T [ (T - 2s) y(s) + alpha * s (T - s) u(s) ] ds
/// ```
///
/// Each of the two integrals is discretized with the trapezoidal rule and
/// normalized by the trapezoidal moment it is meant to reproduce
/// (`-T^3/6` for the `y` kernel against a unit ramp, `T^3/6` for the `u`
/// kernel against a unit constant). The result is exact for affine `y` and
/// constant `u` and second-order accurate otherwise.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorWeights {
    /// Applied to `y`, oldest first.
    pub y: Vec<f64>,
    /// Applied to `alpha * u`, oldest first. Sums to one.
    pub u: Vec<f64>,
}

impl EstimatorWeights {
    fn new(model: &UltraLocalModel) -> Self {
        let n = model.window_len();
        let h = model.sample_period;
        let span = model.window_span();
        let trap = |j: usize| if j == 0 || j == n - 1 { 0.5 * h } else { h };
        let sigma = |j: usize| j as f64 * h;

        let y_raw: Vec<f64> = (0..n).map(|j| trap(j) * (span - 2.0 * sigma(j))).collect();
        let u_raw: Vec<f64> = (0..n)
            .map(|j| trap(j) * sigma(j) * (span - sigma(j)))
            .collect();

        let ramp_moment: f64 = y_raw.iter().enumerate().map(|(j, w)| w * sigma(j)).sum();
        let u_mass: f64 = u_raw.iter().sum();

        // F_est = y_raw.y / ramp_moment - alpha * u_raw.u / u_mass
        Self {
            y: y_raw.iter().map(|w| w / ramp_moment).collect(),
            u: u_raw.iter().map(|w| w / u_mass).collect(),
        }
    }
}

/// Fixed-length history of `(y, u)` pairs, oldest first.
#[derive(Debug, Clone, PartialEq)]
pub struct SlidingWindow {
    capacity: usize,
    samples: VecDeque<(f64, f64)>,
}

impl SlidingWindow {
    pub fn new(capacity: usize) -> Self {
        Self {
            capacity,
            samples: VecDeque::with_capacity(capacity),
        }
    }

    pub fn for_model(model: &UltraLocalModel) -> Self {
        Self::new(model.window_len())
    }

    pub fn push(&mut self, y: f64, u: f64) {
        if self.samples.len() == self.capacity {
            self.samples.pop_front();
        }
        self.samples.push_back((y, u));
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn is_full(&self) -> bool {
        self.samples.len() == self.capacity
    }

    pub fn iter(&self) -> impl Iterator<Item = &(f64, f64)> {
        self.samples.iter()
    }

    pub fn clear(&mut self) {
        self.samples.clear();
    }
}

/// Estimate `F` from a full window of uniformly spaced `(y, u)` samples.
pub fn estimate_f(model: &UltraLocalModel, window: &SlidingWindow) -> Result<f64, MfcError> {
    estimate_f_with(model, &model.weights(), window)
}

fn estimate_f_with(
    model: &UltraLocalModel,
    weights: &EstimatorWeights,
    window: &SlidingWindow,
) -> Result<f64, MfcError> {
    let needed = model.window_len();
    if window.len() < needed {
        return Err(MfcError::WarmingUp {
            filled: window.len(),
            needed,
        });
    }
    let (mut y_term, mut u_term) = (0.0, 0.0);
    for ((&(y, u), wy), wu) in window.iter().zip(&weights.y).zip(&weights.u) {
        y_term += wy * y;
        u_term += wu * u;
    }
    Ok(y_term - model.alpha * u_term)
}

fn check_finite(name: &'static str, value: f64) -> Result<f64, MfcError> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(MfcError::NonFinite { name, value })
    }
}

/// Intelligent proportional control law:
/// `u = -(f_est - y_ref_rate + kp * (y - y_ref)) / alpha`.
pub fn ip_control_step(
    model: &UltraLocalModel,
    f_est: f64,
    y: f64,
    y_ref: f64,
    y_ref_rate: f64,
) -> Result<f64, MfcError> {
    let f_est = check_finite("f_est", f_est)?;
    let y = check_finite("y", y)?;
    let y_ref = check_finite("y_ref", y_ref)?;
    let y_ref_rate = check_finite("y_ref_rate", y_ref_rate)?;
    Ok(-(f_est - y_ref_rate + model.kp * (y - y_ref)) / model.alpha)
}

/// What the controller outputs while the estimator window is filling.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WarmupPolicy {
    #[default]
    Zero,
    HoldBaseline,
}

#[derive(Debug, Clone, PartialEq)]
enum Warmup {
    Zero,
    Baseline(IntegratorController),
}

/// Per-sample model-free controller for one loop.
#[derive(Debug, Clone, PartialEq)]
pub struct MfcController {
    model: UltraLocalModel,
    weights: EstimatorWeights,
    window: SlidingWindow,
    warmup: Warmup,
    /// Command issued at the previous sample; held over the interval that
    /// ends at the next measurement.
    last_command: f64,
    last_f_est: Option<f64>,
}

impl MfcController {
    pub fn new(model: UltraLocalModel) -> Self {
        Self {
            weights: model.weights(),
            window: SlidingWindow::for_model(&model),
            warmup: Warmup::Zero,
            model,
            last_command: 0.0,
            last_f_est: None,
        }
    }

    /// Use `baseline` to produce commands until the window is full.
    pub fn with_baseline_warmup(model: UltraLocalModel, baseline: IntegratorController) -> Self {
        Self {
            warmup: Warmup::Baseline(baseline),
            ..Self::new(model)
        }
    }

    pub fn model(&self) -> &UltraLocalModel {
        &self.model
    }

    pub fn window(&self) -> &SlidingWindow {
        &self.window
    }

    pub fn is_warming_up(&self) -> bool {
        !self.window.is_full()
    }

    /// Most recent estimate of `F`, `None` during warm-up.
    pub fn last_f_est(&self) -> Option<f64> {
        self.last_f_est
    }

    /// Push the latest measurement, estimate `F`, and return this period's
    /// command. Uses `y_ref_rate = 0` (constant reference).
    pub fn step(&mut self, y_measured: f64, y_ref: f64) -> Result<f64, MfcError> {
        self.step_tracking(y_measured, y_ref, 0.0)
    }

    pub fn step_tracking(
        &mut self,
        y_measured: f64,
        y_ref: f64,
        y_ref_rate: f64,
    ) -> Result<f64, MfcError> {
        check_finite("y_measured", y_measured)?;
        check_finite("y_ref", y_ref)?;
        self.window.push(y_measured, self.last_command);

        let command = match estimate_f_with(&self.model, &self.weights, &self.window) {
            Ok(f_est) => {
                self.last_f_est = Some(f_est);
                ip_control_step(&self.model, f_est, y_measured, y_ref, y_ref_rate)?
            }
            Err(MfcError::WarmingUp { .. }) => match &mut self.warmup {
                Warmup::Zero => 0.0,
                Warmup::Baseline(ctrl) => ctrl
                    .step(y_measured - y_ref)
                    .map_err(|_| MfcError::NonFinite {
                        name: "y_measured",
                        value: y_measured,
                    })?,
            },
            Err(e) => return Err(e),
        };
        self.last_command = command;
        Ok(command)
    }

    pub fn reset(&mut self) {
        self.window.clear();
        self.last_command = 0.0;
        self.last_f_est = None;
        if let Warmup::Baseline(ctrl) = &mut self.warmup {
            ctrl.reset();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn default_model(tau: f64, h: f64) -> UltraLocalModel {
        UltraLocalModel::new(10.0, 0.3, tau, h).unwrap()
    }

    fn fill(model: &UltraLocalModel, y: impl Fn(f64) -> f64, u: impl Fn(f64) -> f64) -> SlidingWindow {
        let mut w = SlidingWindow::for_model(model);
        for j in 0..w.capacity() {
            let t = 3.0 + j as f64 * model.sample_period();
            w.push(y(t), u(t));
        }
        w
    }

    #[test]
    fn rejects_invalid_models() {
        assert!(UltraLocalModel::new(0.0, 0.3, 0.5, 0.01).is_err());
        assert!(UltraLocalModel::new(10.0, 0.0, 0.5, 0.01).is_err());
        assert!(UltraLocalModel::new(10.0, -1.0, 0.5, 0.01).is_err());
        assert!(UltraLocalModel::new(10.0, 0.3, 0.0, 0.01).is_err());
        assert!(UltraLocalModel::new(10.0, 0.3, 0.5, 0.0).is_err());
        assert!(UltraLocalModel::new(10.0, 0.3, 0.015, 0.01).is_err());
        assert!(UltraLocalModel::new(f64::NAN, 0.3, 0.5, 0.01).is_err());
        assert!(UltraLocalModel::new(-10.0, 0.3, 0.02, 0.01).is_ok());
    }

    #[test]
    fn window_length_matches_tau() {
        assert_eq!(default_model(0.5, 0.01).window_len(), 51);
        assert_eq!(default_model(0.02, 0.01).window_len(), 3);
        let odd = default_model(0.055, 0.01);
        assert_eq!(odd.window_len(), 7);
        assert!((odd.window_span() - 0.06).abs() < 1e-15);
    }

    #[test]
    fn weights_normalize() {
        let w = default_model(0.5, 0.01).weights();
        let u_sum: f64 = w.u.iter().sum();
        let y_sum: f64 = w.y.iter().sum();
        assert!((u_sum - 1.0).abs() < 1e-14);
        assert!(y_sum.abs() < 1e-12);
        // Both kernels vanish at the window ends.
        assert_eq!(w.u[0], 0.0);
        assert!(w.u[w.u.len() - 1].abs() < 1e-18);
    }

    #[test]
    fn constant_output_gives_zero() {
        let m = default_model(0.5, 0.01);
        let w = fill(&m, |_| 4.0, |_| 0.0);
        assert!(estimate_f(&m, &w).unwrap().abs() < 1e-12);
    }

    #[test]
    fn ramp_gives_slope() {
        let m = default_model(0.5, 0.01);
        let w = fill(&m, |t| 3.0 * t, |_| 0.0);
        assert!((estimate_f(&m, &w).unwrap() - 3.0).abs() < 1e-10);
    }

    #[test]
    fn constant_control_gives_minus_alpha_u() {
        let m = default_model(0.5, 0.01);
        let w = fill(&m, |_| 0.0, |_| 0.5);
        assert!((estimate_f(&m, &w).unwrap() + 5.0).abs() < 1e-12);
    }

    #[test]
    fn partial_window_is_warming_up() {
        let m = default_model(0.5, 0.01);
        let mut w = SlidingWindow::for_model(&m);
        for _ in 0..50 {
            w.push(1.0, 0.0);
        }
        assert_eq!(
            estimate_f(&m, &w),
            Err(MfcError::WarmingUp {
                filled: 50,
                needed: 51
            })
        );
        w.push(1.0, 0.0);
        assert!(estimate_f(&m, &w).is_ok());
    }

    #[test]
    fn ip_law_examples() {
        let m = default_model(0.5, 0.01);
        assert_eq!(ip_control_step(&m, 0.0, 1.5, 1.5, 0.0).unwrap(), 0.0);
        let u = ip_control_step(&m, 2.0, 1.0, 0.0, 0.0).unwrap();
        assert!((u + 0.23).abs() < 1e-15);
        let u = ip_control_step(&m, -5.0, 0.0, 0.0, 0.0).unwrap();
        assert!((u - 0.5).abs() < 1e-15);
        // Feed-forward of the reference rate.
        let u = ip_control_step(&m, 0.0, 0.0, 0.0, 2.0).unwrap();
        assert!((u - 0.2).abs() < 1e-15);
    }

    #[test]
    fn ip_law_rejects_non_finite() {
        let m = default_model(0.5, 0.01);
        assert!(matches!(
            ip_control_step(&m, f64::NAN, 0.0, 0.0, 0.0),
            Err(MfcError::NonFinite { name: "f_est", .. })
        ));
        assert!(ip_control_step(&m, 0.0, f64::INFINITY, 0.0, 0.0).is_err());
        let mut c = MfcController::new(m);
        assert!(c.step(f64::NAN, 0.0).is_err());
    }

    #[test]
    fn first_call_outputs_zero() {
        let mut c = MfcController::new(default_model(0.5, 0.01));
        assert_eq!(c.step(3.0, 0.0).unwrap(), 0.0);
        assert!(c.is_warming_up());
        assert_eq!(c.last_f_est(), None);
    }

    #[test]
    fn baseline_warmup_tracks_integrator() {
        let m = default_model(0.5, 0.01);
        let mut base = IntegratorController::new(1.0, 0.01).unwrap();
        let mut c = MfcController::with_baseline_warmup(m, base.clone());
        for _ in 0..50 {
            let expected = base.step(0.2).unwrap();
            assert_eq!(c.step(0.2, 0.0).unwrap(), expected);
        }
        c.step(0.2, 0.0).unwrap();
        assert!(!c.is_warming_up());
    }

    #[test]
    fn deterministic_and_resettable() {
        let m = default_model(0.3, 0.01);
        let mut a = MfcController::new(m);
        let mut b = MfcController::new(m);
        let ys: Vec<f64> = (0..200).map(|k| (k as f64 * 0.07).sin()).collect();
        let ua: Vec<f64> = ys.iter().map(|&y| a.step(y, 0.1).unwrap()).collect();
        let ub: Vec<f64> = ys.iter().map(|&y| b.step(y, 0.1).unwrap()).collect();
        assert_eq!(
            ua.iter().map(|x| x.to_bits()).collect::<Vec<_>>(),
            ub.iter().map(|x| x.to_bits()).collect::<Vec<_>>()
        );
        a.reset();
        let again: Vec<f64> = ys.iter().map(|&y| a.step(y, 0.1).unwrap()).collect();
        assert_eq!(ua, again);
    }

    #[test]
    fn window_records_commanded_control() {
        let m = default_model(0.02, 0.01);
        let mut c = MfcController::new(m);
        let u0 = c.step(1.0, 0.0).unwrap();
        let u1 = c.step(1.0, 0.0).unwrap();
        let u2 = c.step(1.0, 0.0).unwrap();
        let _ = c.step(1.0, 0.0).unwrap();
        let logged: Vec<f64> = c.window().iter().map(|&(_, u)| u).collect();
        assert_eq!(logged, vec![u0, u1, u2]);
    }
}
