//! Attack models: additive load-altering attacks, constant actuation bias,
//! and denial of service on the actuation or measurement path of one area.
//!
//! DoS is a per-sample Bernoulli packet drop. The receiver sees either the
//! last delivered value (zero-order hold) or zero.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AttackError {
    #[error("loss probability must lie in [0, 1], got {0}")]
    LossProbability(f64),
    #[error("invalid attack schedule: {0}")]
    Schedule(String),
}

/// What the receiver gets when a packet is dropped.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HoldPolicy {
    #[default]
    HoldLast,
    Zero,
}

/// Which link of a loop a channel models.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelKind {
    Measurement,
    Actuation,
}

/// Stream id for the channel of `kind` serving `area` (0-based). Every
/// channel of a run draws from its own ChaCha stream under the run seed.
pub fn stream_id(kind: ChannelKind, area: usize) -> u64 {
    let k = match kind {
        ChannelKind::Measurement => 0,
        ChannelKind::Actuation => 1,
    };
    2 * area as u64 + k + 1
}

/// Seeded lossy link with hold semantics.
#[derive(Debug, Clone)]
pub struct LossyChannel {
    loss_prob: f64,
    hold: HoldPolicy,
    last_delivered: f64,
    rng: ChaCha8Rng,
    drops: u64,
    calls: u64,
}

impl LossyChannel {
    pub fn new(loss_prob: f64, hold: HoldPolicy, seed: u64, stream: u64) -> Result<Self, AttackError> {
        if !(0.0..=1.0).contains(&loss_prob) {
            return Err(AttackError::LossProbability(loss_prob));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Ok(Self {
            loss_prob,
            hold,
            last_delivered: 0.0,
            rng,
            drops: 0,
            calls: 0,
        })
    }

    pub fn loss_prob(&self) -> f64 {
        self.loss_prob
    }

    pub fn last_delivered(&self) -> f64 {
        self.last_delivered
    }

    /// Packets dropped so far (only counted while active).
    pub fn drops(&self) -> u64 {
        self.drops
    }

    pub fn calls(&self) -> u64 {
        self.calls
    }

    /// Send `value` through the link. Exactly one uniform draw is consumed
    /// per call whether or not the attack is active, so toggling the attack
    /// window never shifts later draws.
    pub fn transmit(&mut self, value: f64, active: bool) -> f64 {
        self.calls += 1;
        let draw: f64 = self.rng.random();
        if active && draw < self.loss_prob {
            self.drops += 1;
            match self.hold {
                HoldPolicy::HoldLast => self.last_delivered,
                HoldPolicy::Zero => 0.0,
            }
        } else {
            self.last_delivered = value;
            value
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttackKind {
    #[default]
    None,
    /// Additive load on the target area.
    LoadAltering,
    /// Constant signal added to the control delivered to the target area.
    ActuationBias,
    /// Packet drops on controller -> generator.
    DosActuation,
    /// Packet drops on generator -> controller.
    DosMeasurement,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AttackSchedule {
    pub kind: AttackKind,
    /// Attack window start, s.
    pub start: f64,
    /// Attack window end, s. `None` runs to the end of the horizon.
    pub end: Option<f64>,
    /// Injected magnitude in pu (load altering and actuation bias).
    pub magnitude: f64,
    /// Per-sample drop probability (DoS).
    pub loss_prob: f64,
    /// 1 or 2.
    pub target_area: u8,
    pub hold: HoldPolicy,
}

impl Default for AttackSchedule {
    fn default() -> Self {
        Self::none()
    }
}

impl AttackSchedule {
    pub fn none() -> Self {
        Self {
            kind: AttackKind::None,
            start: 0.0,
            end: None,
            magnitude: 0.0,
            loss_prob: 0.0,
            target_area: 1,
            hold: HoldPolicy::HoldLast,
        }
    }

    pub fn load_altering(area: u8, start: f64, end: f64, magnitude: f64) -> Self {
        Self {
            kind: AttackKind::LoadAltering,
            start,
            end: Some(end),
            magnitude,
            target_area: area,
            ..Self::none()
        }
    }

    pub fn actuation_bias(area: u8, start: f64, magnitude: f64) -> Self {
        Self {
            kind: AttackKind::ActuationBias,
            start,
            magnitude,
            target_area: area,
            ..Self::none()
        }
    }

    pub fn dos(kind: AttackKind, area: u8, loss_prob: f64) -> Self {
        Self {
            kind,
            loss_prob,
            target_area: area,
            ..Self::none()
        }
    }

    pub fn validate(&self, horizon: f64) -> Result<(), AttackError> {
        let bad = |m: String| Err(AttackError::Schedule(m));
        if !(0.0..=1.0).contains(&self.loss_prob) {
            return Err(AttackError::LossProbability(self.loss_prob));
        }
        if !(self.target_area == 1 || self.target_area == 2) {
            return bad(format!("target_area must be 1 or 2, got {}", self.target_area));
        }
        if !self.magnitude.is_finite() {
            return bad(format!("magnitude must be finite, got {}", self.magnitude));
        }
        let end = self.end.unwrap_or(horizon);
        if !(self.start.is_finite() && self.start >= 0.0 && self.start < end && end <= horizon) {
            return bad(format!(
                "need 0 <= start < end <= horizon, got start {}, end {end}, horizon {horizon}",
                self.start
            ));
        }
        Ok(())
    }

    pub fn is_active(&self, t: f64) -> bool {
        self.kind != AttackKind::None && self.start <= t && self.end.is_none_or(|e| t < e)
    }

    /// Whether `kind` on the 0-based `area` is under attack at `t`.
    pub fn targets(&self, kind: AttackKind, area: usize, t: f64) -> bool {
        self.kind == kind && usize::from(self.target_area) == area + 1 && self.is_active(t)
    }

    /// Additive load on each area at `t`.
    pub fn load_attack(&self, t: f64) -> [f64; 2] {
        self.additive(AttackKind::LoadAltering, t)
    }

    /// Additive signal on each area's delivered control at `t`.
    pub fn bias_attack(&self, t: f64) -> [f64; 2] {
        self.additive(AttackKind::ActuationBias, t)
    }

    fn additive(&self, kind: AttackKind, t: f64) -> [f64; 2] {
        std::array::from_fn(|i| {
            if self.targets(kind, i, t) {
                self.magnitude
            } else {
                0.0
            }
        })
    }
}
