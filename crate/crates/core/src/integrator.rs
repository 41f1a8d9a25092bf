//! Baseline secondary controller: a pure integrator `K / s` per area,
//! discretized with forward Euler at the loop sample period.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IntegratorError {
    #[error("non-finite tracking error {0}")]
    NonFiniteError(f64),
    #[error("invalid integrator: {0}")]
    Invalid(String),
}

/// Sign applied to the accumulator when forming the command.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Feedback {
    /// `u = -accumulator`. Correct for the LFC loop: a positive ACE means
    /// surplus generation, so the set-point must come down.
    #[default]
    Negative,
    Positive,
}

impl Feedback {
    fn sign(self) -> f64 {
        match self {
            Feedback::Negative => -1.0,
            Feedback::Positive => 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegratorController {
    gain: f64,
    accumulator: f64,
    sample_period: f64,
    feedback: Feedback,
}

impl IntegratorController {
    pub fn new(gain: f64, sample_period: f64) -> Result<Self, IntegratorError> {
        Self::with_feedback(gain, sample_period, Feedback::Negative)
    }

    pub fn with_feedback(
        gain: f64,
        sample_period: f64,
        feedback: Feedback,
    ) -> Result<Self, IntegratorError> {
        if !gain.is_finite() {
            return Err(IntegratorError::Invalid(format!("gain must be finite, got {gain}")));
        }
        if !sample_period.is_finite() || sample_period <= 0.0 {
            return Err(IntegratorError::Invalid(format!(
                "sample_period must be finite and > 0, got {sample_period}"
            )));
        }
        Ok(Self {
            gain,
            accumulator: 0.0,
            sample_period,
            feedback,
        })
    }

    pub fn gain(&self) -> f64 {
        self.gain
    }

    pub fn accumulator(&self) -> f64 {
        self.accumulator
    }

    pub fn output(&self) -> f64 {
        self.feedback.sign() * self.accumulator
    }

    /// Integrate the tracking error `e = y - y_ref` over one period and
    /// return the new command.
    pub fn step(&mut self, e: f64) -> Result<f64, IntegratorError> {
        if !e.is_finite() {
            return Err(IntegratorError::NonFiniteError(e));
        }
        self.accumulator += self.gain * e * self.sample_period;
        Ok(self.output())
    }

    pub fn reset(&mut self) {
        self.accumulator = 0.0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn zero_input_holds_output() {
        let mut c = IntegratorController::new(1.0, 0.01).unwrap();
        for _ in 0..10 {
            c.step(0.5).unwrap();
        }
        let held = c.output();
        for _ in 0..1000 {
            assert_eq!(c.step(0.0).unwrap(), held);
        }
    }

    #[test]
    fn euler_sum() {
        let mut c = IntegratorController::new(1.0, 0.01).unwrap();
        for _ in 0..200 {
            c.step(1.0).unwrap();
        }
        assert!((c.accumulator().abs() - 2.0).abs() < 1e-12);
        assert!((c.output() + 2.0).abs() < 1e-12);
    }

    #[test]
    fn positive_feedback_flips_sign() {
        let mut c = IntegratorController::with_feedback(2.0, 0.1, Feedback::Positive).unwrap();
        assert!((c.step(1.0).unwrap() - 0.2).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(IntegratorController::new(f64::NAN, 0.01).is_err());
        assert!(IntegratorController::new(1.0, 0.0).is_err());
        let mut c = IntegratorController::new(1.0, 0.01).unwrap();
        assert_eq!(
            c.step(f64::INFINITY),
            Err(IntegratorError::NonFiniteError(f64::INFINITY))
        );
        assert_eq!(c.accumulator(), 0.0);
    }

    proptest! {
        #[test]
        fn linear_in_error(
            a in prop::collection::vec(-10.0f64..10.0, 1..50),
            b in prop::collection::vec(-10.0f64..10.0, 1..50),
        ) {
            let n = a.len().min(b.len());
            let mut ca = IntegratorController::new(1.0, 0.01).unwrap();
            let mut cb = ca.clone();
            let mut cs = ca.clone();
            for k in 0..n {
                let ua = ca.step(a[k]).unwrap();
                let ub = cb.step(b[k]).unwrap();
                let us = cs.step(a[k] + b[k]).unwrap();
                prop_assert!((us - (ua + ub)).abs() < 1e-9);
            }
        }
    }
}
