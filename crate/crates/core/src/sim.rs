//! Closed-loop simulation of the two-area network and Monte Carlo batches.
//!
//! Loop order per sample:
//! 1. read the true plant outputs (these feed the metrics);
//! 2. pass them through the measurement channels;
//! 3. controllers compute commands from what was delivered;
//! 4. commands pass through the actuation channels (plus any bias attack);
//! 5. load = profile + load-altering attack;
//! 6. advance the plant one RK4 step.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::attack::{stream_id, AttackKind, ChannelKind, LossyChannel};
use crate::metrics::{MetricsAccumulator, MetricsReport, MonteCarloReport};
use crate::plant::{measured_outputs, rk4_step, PlantInputs, PlantState};
use crate::scenario::{Scenario, ScenarioError};

/// A run is flagged diverged and truncated once any state magnitude
/// exceeds this or turns non-finite.
pub const DIVERGENCE_LIMIT: f64 = 1e9;

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    /// True plant outputs.
    pub y: [f64; 2],
    /// Outputs as delivered to the controllers.
    pub y_meas: [f64; 2],
    /// Commanded controls.
    pub u: [f64; 2],
    /// Controls as delivered to the governors.
    pub u_del: [f64; 2],
    /// Total load deviation including attacks.
    pub load: [f64; 2],
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    pub samples: Vec<Sample>,
}

impl TimeSeries {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

struct Channels {
    measurement: [LossyChannel; 2],
    actuation: [LossyChannel; 2],
}

impl Channels {
    fn new(s: &Scenario, seed: u64) -> Result<Self, ScenarioError> {
        let a = &s.attack;
        let mk = |kind: ChannelKind, area: usize| LossyChannel::new(a.loss_prob, a.hold, seed, stream_id(kind, area));
        Ok(Self {
            measurement: [mk(ChannelKind::Measurement, 0)?, mk(ChannelKind::Measurement, 1)?],
            actuation: [mk(ChannelKind::Actuation, 0)?, mk(ChannelKind::Actuation, 1)?],
        })
    }
}

/// Run one realization with `seed`. The time series is only kept when
/// `record` is set.
pub fn run_with_seed(
    s: &Scenario,
    seed: u64,
    record: bool,
) -> Result<(MetricsReport, Option<TimeSeries>), ScenarioError> {
    s.validate()?;
    let mut controllers = s.build_controllers()?;
    let mut channels = Channels::new(s, seed)?;
    let mut metrics = MetricsAccumulator::new(s.dt, seed);
    let mut series = record.then(TimeSeries::default);
    let mut x = PlantState::default();
    let attack = &s.attack;

    for k in 0..s.samples() {
        if !x.is_finite() || x.max_abs() > DIVERGENCE_LIMIT {
            metrics.mark_diverged();
            break;
        }
        let t = k as f64 * s.dt;
        let y = measured_outputs(&s.plant, &x);
        metrics.push(y);

        let mut y_meas = [0.0; 2];
        let mut u = [0.0; 2];
        let mut u_del = [0.0; 2];
        let bias = attack.bias_attack(t);
        let mut failed = false;
        for i in 0..2 {
            let drop_meas = attack.targets(AttackKind::DosMeasurement, i, t);
            y_meas[i] = channels.measurement[i].transmit(y[i], drop_meas);
            match controllers[i].step(y_meas[i], 0.0) {
                Ok(v) => u[i] = v,
                Err(_) => failed = true,
            }
            let drop_act = attack.targets(AttackKind::DosActuation, i, t);
            u_del[i] = channels.actuation[i].transmit(u[i], drop_act) + bias[i];
        }
        if failed {
            metrics.mark_diverged();
            break;
        }

        let profile = s.load_profile.load_at(t);
        let extra = attack.load_attack(t);
        let load = [profile[0] + extra[0], profile[1] + extra[1]];

        if let Some(ts) = series.as_mut() {
            ts.samples.push(Sample {
                t,
                y,
                y_meas,
                u,
                u_del,
                load,
            });
        }
        x = rk4_step(&s.plant, &x, &PlantInputs { u: u_del, load }, s.dt)?;
    }
    Ok((metrics.finish(), series))
}

/// Single run at `base_seed` with the full time series.
pub fn run_scenario(s: &Scenario) -> Result<(MetricsReport, TimeSeries), ScenarioError> {
    let (report, series) = run_with_seed(s, s.base_seed, true)?;
    Ok((report, series.unwrap_or_default()))
}

/// Run `n_runs` realizations with seeds `base_seed + k` in parallel.
pub fn run_monte_carlo(s: &Scenario, n_runs: usize) -> Result<MonteCarloReport, ScenarioError> {
    if n_runs == 0 {
        return Err(ScenarioError::Invalid("n_runs must be >= 1".into()));
    }
    s.validate()?;
    let runs = (0..n_runs as u64)
        .into_par_iter()
        .map(|k| run_with_seed(s, s.base_seed.wrapping_add(k), false).map(|(r, _)| r))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(MonteCarloReport::from_runs(runs))
}

/// Sequential variant running seeds in the given order; used to check that
/// aggregates do not depend on execution order.
pub fn run_monte_carlo_ordered(
    s: &Scenario,
    offsets: impl IntoIterator<Item = u64>,
) -> Result<MonteCarloReport, ScenarioError> {
    s.validate()?;
    let runs = offsets
        .into_iter()
        .map(|k| run_with_seed(s, s.base_seed.wrapping_add(k), false).map(|(r, _)| r))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(MonteCarloReport::from_runs(runs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attack::AttackSchedule;
    use crate::plant::LoadProfile;
    use crate::scenario::{ControllerKind, Preset};

    #[test]
    fn quiet_network_stays_at_zero() {
        for kind in [ControllerKind::Mfc, ControllerKind::Integrator] {
            let mut s = Scenario::default().with_controller(kind);
            s.load_profile = LoadProfile::zero();
            s.horizon = 5.0;
            let (r, ts) = run_scenario(&s).unwrap();
            assert_eq!(r.sum_abs_e, [0.0, 0.0]);
            assert_eq!(r.sum_sq_e, [0.0, 0.0]);
            assert!(!r.diverged);
            assert_eq!(ts.len(), 500);
            assert!(ts.samples.iter().all(|s| s.u == [0.0, 0.0]));
        }
    }

    #[test]
    fn repeated_runs_are_bit_identical() {
        let mut s = Scenario::preset(Preset::DosMeasurement);
        s.horizon = 10.0;
        let a = run_scenario(&s).unwrap();
        let b = run_scenario(&s).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn seeds_change_dos_realizations() {
        let mut s = Scenario::preset(Preset::DosActuation);
        s.horizon = 10.0;
        let (a, _) = run_with_seed(&s, 1, false).unwrap();
        let (b, _) = run_with_seed(&s, 2, false).unwrap();
        assert_ne!(a.sum_abs_e, b.sum_abs_e);
    }

    #[test]
    fn actuation_dos_holds_delivered_control() {
        let mut s = Scenario::preset(Preset::DosActuation);
        s.attack.loss_prob = 1.0;
        s.horizon = 5.0;
        let (_, ts) = run_scenario(&s).unwrap();
        assert!(ts.samples.iter().all(|x| x.u_del[1] == 0.0));
        assert!(ts.samples.iter().any(|x| x.u[1] != 0.0));
        assert!(ts.samples.iter().all(|x| x.u_del[0] == x.u[0]));
    }

    #[test]
    fn measurement_dos_only_touches_target() {
        let mut s = Scenario::preset(Preset::DosMeasurement);
        s.attack.loss_prob = 1.0;
        s.horizon = 5.0;
        let (_, ts) = run_scenario(&s).unwrap();
        assert!(ts.samples.iter().all(|x| x.y_meas[1] == 0.0));
        assert!(ts.samples.iter().all(|x| x.y_meas[0] == x.y[0]));
    }

    #[test]
    fn load_attack_shows_in_series() {
        let s = Scenario::preset(Preset::LoadAltering);
        let (_, ts) = run_scenario(&s).unwrap();
        let at = |t: f64| ts.samples[(t / s.dt).round() as usize].load;
        assert!((at(21.0)[0] - 0.11).abs() < 1e-15);
        assert!((at(25.0)[0] - 0.01).abs() < 1e-15);
    }

    #[test]
    fn divergence_is_flagged_not_fatal() {
        let mut s = Scenario::default().with_controller(ControllerKind::Integrator);
        s.integrator.gains = [20.0, 20.0];
        s.horizon = 200.0;
        let (r, ts) = run_scenario(&s).unwrap();
        assert!(r.diverged);
        assert!(r.samples < s.samples());
        assert_eq!(ts.len(), r.samples);
        assert!(r.sum_abs_e.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn monte_carlo_single_run_matches() {
        let mut s = Scenario::preset(Preset::DosActuation);
        s.horizon = 5.0;
        s.base_seed = 11;
        let mc = run_monte_carlo(&s, 1).unwrap();
        let (r, _) = run_scenario(&s).unwrap();
        assert_eq!(mc.runs, vec![r]);
        assert_eq!(mc.mean.sum_abs_e, r.sum_abs_e);
    }

    #[test]
    fn deterministic_batch_has_no_spread() {
        let mut s = Scenario::preset(Preset::NoAttack);
        s.horizon = 5.0;
        let mc = run_monte_carlo(&s, 4).unwrap();
        assert!(mc.runs.windows(2).all(|w| w[0].sum_abs_e == w[1].sum_abs_e));
    }

    #[test]
    fn zero_runs_rejected() {
        assert!(run_monte_carlo(&Scenario::default(), 0).is_err());
    }

    #[test]
    fn bias_attack_adds_to_delivered() {
        let mut s = Scenario::default();
        s.attack = AttackSchedule::actuation_bias(1, 0.0, 0.05);
        s.load_profile = LoadProfile::zero();
        s.horizon = 1.0;
        let (_, ts) = run_scenario(&s).unwrap();
        assert!(ts.samples.iter().all(|x| (x.u_del[0] - x.u[0] - 0.05).abs() < 1e-15));
    }
}
