//! Event-triggered feedback: history windows, the transition detector,
//! ramp controllers, trigger-time alignment and the closed-loop simulator.
//!
//! A policy watches an indicator over the last `tau + 1` days. The NPI is
//! released while the indicator is at most `theta` and applied otherwise.
//! After each switch the regime is kept for at least `Delta` days, during
//! which the control ramps linearly towards `0` (release) or `1 - delta_hat`
//! (apply).

mod closed_loop;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::indicator::{IndicatorError, IndicatorSpec};
use crate::model::{Day, DynamicsError, StateVec, Trajectory};

pub use closed_loop::{simulate_closed_loop, ClosedLoop, ClosedLoopRun, TriggerOutcome};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TriggerError {
    #[error("day {t} is outside the trajectory [{t0}, {end}]")]
    OutOfRange { t: Day, t0: Day, end: Day },
    #[error("invalid policy: {0}")]
    InvalidPolicy(String),
    #[error("horizon {horizon} precedes the initial day {t0}")]
    Horizon { t0: Day, horizon: Day },
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error("day {day}: {source}")]
    Indicator {
        day: Day,
        #[source]
        source: IndicatorError,
    },
}

/// The states `x(t - tau), ..., x(t)`, oldest first.
#[derive(Debug, Clone, PartialEq)]
pub struct HistoryWindow<'a> {
    anchor: Day,
    entries: Vec<&'a StateVec>,
}

impl<'a> HistoryWindow<'a> {
    pub fn anchor(&self) -> Day {
        self.anchor
    }

    pub fn entries(&self) -> &[&'a StateVec] {
        &self.entries
    }

    pub fn tau(&self) -> usize {
        self.entries.len() - 1
    }
}

/// Window ending at `t`; days before `t0` repeat the initial state.
pub fn history_at(traj: &Trajectory, t: Day, tau: usize) -> Result<HistoryWindow<'_>, TriggerError> {
    let t0 = traj.t0();
    if t < t0 || t > traj.end() {
        return Err(TriggerError::OutOfRange { t, t0, end: traj.end() });
    }
    let states = traj.states();
    let entries = (0..=tau)
        .map(|k| {
            let day = (t + k).saturating_sub(tau).max(t0);
            &states[day - t0]
        })
        .collect();
    Ok(HistoryWindow { anchor: t, entries })
}

/// 1 when the two windows lie on opposite sides of the event set.
pub fn xor_transition(a_in_set: bool, b_in_set: bool) -> u8 {
    u8::from(a_in_set != b_in_set)
}

/// Max-linear release/apply profiles reaching saturation in `Delta` days.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RampPair {
    /// Minimum interevent time, also the ramp duration (days).
    pub min_interevent: usize,
    pub delta_hat: f64,
}

impl RampPair {
    pub fn control_max(&self) -> f64 {
        1.0 - self.delta_hat
    }

    /// `max{0, u (1 - s / Delta)}`
    pub fn release(&self, since: usize, u: f64) -> f64 {
        if since >= self.min_interevent {
            return 0.0;
        }
        let frac = since as f64 / self.min_interevent as f64;
        (u * (1.0 - frac)).max(0.0)
    }

    /// `min{1 - delta_hat, u (1 - s / Delta) + (1 - delta_hat) s / Delta}`,
    /// evaluated as `u + (1 - delta_hat - u) s / Delta` so that a saturated
    /// control stays exactly at its maximum.
    pub fn apply(&self, since: usize, u: f64) -> f64 {
        let max = self.control_max();
        if since >= self.min_interevent {
            return max;
        }
        let frac = since as f64 / self.min_interevent as f64;
        (u + (max - u) * frac).min(max)
    }
}

/// Control `since` days after the last trigger, given which side of the
/// event set that trigger's window was on.
pub fn controller_eval(since: usize, window_in_set: bool, u_k: f64, ramps: &RampPair) -> f64 {
    if window_in_set {
        ramps.release(since, u_k)
    } else {
        ramps.apply(since, u_k)
    }
}

/// `7 * ceil(t / 7)`
pub fn align_weekly(t: Day) -> Day {
    t.div_ceil(7) * 7
}

/// Maps the first crossing offset (days after the dwell) to the switch offset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Alignment {
    #[default]
    Identity,
    Weekly,
}

impl Alignment {
    pub fn apply(self, offset: Day) -> Day {
        match self {
            Alignment::Identity => offset,
            Alignment::Weekly => align_weekly(offset),
        }
    }
}

/// Complete event-triggered mechanism.
#[derive(Debug, Clone, PartialEq)]
pub struct TriggerPolicy {
    pub indicator: IndicatorSpec,
    pub theta: f64,
    pub u_ref: f64,
    pub ramps: RampPair,
    pub alignment: Alignment,
}

impl TriggerPolicy {
    pub fn tau(&self) -> usize {
        self.indicator.tau
    }

    pub fn min_interevent(&self) -> usize {
        self.ramps.min_interevent
    }

    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.ramps.min_interevent == 0 {
            out.push("Δ must be at least 1 day".to_string());
        }
        if self.ramps.min_interevent < self.tau() {
            out.push(format!(
                "minimum interevent time must satisfy Δ ≥ τ (Δ = {}, τ = {})",
                self.ramps.min_interevent,
                self.tau()
            ));
        }
        if !(self.ramps.delta_hat > 0.0 && self.ramps.delta_hat < 1.0) {
            out.push(format!("delta_hat must lie in (0, 1) (got {})", self.ramps.delta_hat));
        }
        if !(self.u_ref >= 0.0 && self.u_ref <= self.ramps.control_max()) {
            out.push(format!(
                "u_ref must lie in [0, 1 - delta_hat] = [0, {}] (got {})",
                self.ramps.control_max(),
                self.u_ref
            ));
        }
        if self.theta.is_nan() {
            out.push("theta must not be NaN".to_string());
        }
        if let Err(e) = self.indicator.validate() {
            out.push(e.to_string());
        }
        out
    }

    pub fn validate(&self) -> Result<(), TriggerError> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(TriggerError::InvalidPolicy(v.join("; ")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    /// The indicator window is outside the event set: NPI ramps up.
    Applied,
    /// The window is inside the event set: NPI ramps down.
    Released,
}

impl Regime {
    pub fn flip(self) -> Self {
        match self {
            Regime::Applied => Regime::Released,
            Regime::Released => Regime::Applied,
        }
    }

    pub fn from_membership(in_set: bool) -> Self {
        if in_set {
            Regime::Released
        } else {
            Regime::Applied
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Applied => "applied",
            Regime::Released => "released",
        }
    }
}

/// Trigger times `t0 < t1 < ...` with alternating regimes, starting with
/// `initial_regime` on `[t0, t1)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SwitchLog {
    pub trigger_times: Vec<Day>,
    pub initial_regime: Regime,
}

impl SwitchLog {
    pub fn new(t0: Day, initial_regime: Regime) -> Self {
        SwitchLog { trigger_times: vec![t0], initial_regime }
    }

    /// Number of switches after the initial decision.
    pub fn switches(&self) -> usize {
        self.trigger_times.len().saturating_sub(1)
    }

    pub fn regime(&self, k: usize) -> Regime {
        if k % 2 == 0 {
            self.initial_regime
        } else {
            self.initial_regime.flip()
        }
    }

    pub fn last_regime(&self) -> Regime {
        self.regime(self.trigger_times.len() - 1)
    }

    /// Regime governing the control on day `t` (trigger days keep the
    /// outgoing regime, matching `t_k < t <= t_{k+1}`).
    pub fn regime_on(&self, t: Day) -> Regime {
        let k = match self.trigger_times.binary_search(&t) {
            Ok(0) => 0,
            Ok(k) => k - 1,
            Err(0) => 0,
            Err(k) => k - 1,
        };
        self.regime(k)
    }

    /// `(start, end, regime)` for every interval, the last one closed at `horizon`.
    pub fn intervals(&self, horizon: Day) -> Vec<(Day, Day, Regime)> {
        let n = self.trigger_times.len();
        (0..n)
            .map(|k| {
                let start = self.trigger_times[k];
                let end = if k + 1 < n { self.trigger_times[k + 1] } else { horizon };
                (start, end, self.regime(k))
            })
            .collect()
    }

    pub fn min_gap(&self) -> Option<Day> {
        self.trigger_times.windows(2).map(|w| w[1] - w[0]).min()
    }
}
