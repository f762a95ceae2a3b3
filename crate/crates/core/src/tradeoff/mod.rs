//! Outcome functionals, threshold sweeps and comparison of trade-off curves.
//!
//! Every outcome is "lower is better". For `m` outcomes the first `m - 1`
//! act as objectives (upper bounds) and the last is the compared quantity;
//! with the built-in pair this is (peak demand, % of days in lockdown).

mod csv_io;
mod lookup;

use std::fmt;

use rayon::prelude::*;
use thiserror::Error;

use crate::indicator::{observe, IndicatorError, IndicatorSpec, ObservationKind};
use crate::model::{Day, Trajectory};
use crate::scenario::Scenario;
use crate::trigger::{simulate_closed_loop, ClosedLoopRun, Regime, SwitchLog, TriggerError};

pub use csv_io::{read_curve_csv, write_curve_csv};
pub use lookup::{
    dominance, objective_lookup, ComparisonReport, ComparisonRow, IncomparableReason, Lookup,
    Verdict,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("theta = {theta}: {source}")]
    Evaluation {
        theta: f64,
        #[source]
        source: TriggerError,
    },
    #[error(transparent)]
    Indicator(#[from] IndicatorError),
    #[error("invalid switch log: {0}")]
    InvalidLog(String),
    #[error("invalid threshold domain: {0}")]
    Domain(String),
    #[error("objective infeasible: best achievable {label} is {best}, target is {target}")]
    Infeasible { label: String, best: f64, target: f64 },
    #[error("curve has no successfully evaluated points")]
    EmptyCurve,
    #[error("expected {expected} objective bounds, got {found}")]
    ObjectiveArity { expected: usize, found: usize },
    #[error("curve CSV: {0}")]
    Csv(String),
}

/// A scalar outcome of one closed-loop run.
#[derive(Debug, Clone, PartialEq)]
pub enum OutcomeKind {
    /// Maximum of an observation over `t0..=horizon+1`.
    Peak(ObservationKind),
    /// Observation on the final day `horizon + 1`.
    Final(ObservationKind),
    /// Cumulative deaths (last compartment) on the final day.
    FinalDeaths,
    /// Percentage of `[t0, horizon]` spent with the NPI applied.
    LockdownPct,
}

impl OutcomeKind {
    pub fn label(&self) -> String {
        match self {
            OutcomeKind::Peak(o) => format!("peak_{}", o.tag()),
            OutcomeKind::Final(o) => format!("final_{}", o.tag()),
            OutcomeKind::FinalDeaths => "final_deaths".into(),
            OutcomeKind::LockdownPct => "lockdown_pct".into(),
        }
    }

    /// Parses `peak:<obs>`, `final:<obs>`, `final_deaths` or `lockdown_pct`.
    pub fn from_tag(tag: &str) -> Option<Self> {
        match tag {
            "lockdown_pct" => Some(OutcomeKind::LockdownPct),
            "final_deaths" => Some(OutcomeKind::FinalDeaths),
            _ => {
                let (kind, obs) = tag.split_once(':')?;
                let obs = ObservationKind::from_tag(obs)?;
                match kind {
                    "peak" => Some(OutcomeKind::Peak(obs)),
                    "final" => Some(OutcomeKind::Final(obs)),
                    _ => None,
                }
            }
        }
    }

    pub fn tag(&self) -> String {
        match self {
            OutcomeKind::Peak(o) => format!("peak:{}", o.tag()),
            OutcomeKind::Final(o) => format!("final:{}", o.tag()),
            _ => self.label(),
        }
    }

    pub fn evaluate(&self, run: &ClosedLoopRun, t0: Day, horizon: Day) -> Result<f64, AnalysisError> {
        match self {
            OutcomeKind::Peak(o) => Ok(outcome_peak(&run.trajectory, o)?),
            OutcomeKind::Final(o) => {
                let last = run.trajectory.states().last().expect("nonempty trajectory");
                Ok(observe(o, last)?)
            }
            OutcomeKind::FinalDeaths => {
                let last = run.trajectory.states().last().expect("nonempty trajectory");
                Ok(*last.values().last().unwrap_or(&0.0))
            }
            OutcomeKind::LockdownPct => outcome_lockdown_pct(&run.log, t0, horizon),
        }
    }
}

/// Labeled outcome values of one policy.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeVec {
    pub labels: Vec<String>,
    pub values: Vec<f64>,
}

impl OutcomeVec {
    pub fn get(&self, label: &str) -> Option<f64> {
        self.labels.iter().position(|l| l == label).map(|i| self.values[i])
    }
}

impl fmt::Display for OutcomeVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (l, v)) in self.labels.iter().zip(&self.values).enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{l} = {v:.4}")?;
        }
        Ok(())
    }
}

pub fn outcome_peak(traj: &Trajectory, obs: &ObservationKind) -> Result<f64, IndicatorError> {
    traj.states()
        .iter()
        .map(|x| observe(obs, x))
        .try_fold(f64::NEG_INFINITY, |acc, v| v.map(|v| acc.max(v)))
}

/// `100 / (T - t0)` times the days spent in the applied regime, the last
/// interval being closed at the horizon.
pub fn outcome_lockdown_pct(log: &SwitchLog, t0: Day, horizon: Day) -> Result<f64, AnalysisError> {
    if horizon <= t0 {
        return Err(AnalysisError::InvalidLog(format!(
            "horizon {horizon} must be after t0 {t0}"
        )));
    }
    match log.trigger_times.first() {
        Some(&first) if first == t0 => {}
        _ => return Err(AnalysisError::InvalidLog("first trigger time must be t0".into())),
    }
    if log.trigger_times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(AnalysisError::InvalidLog("trigger times must increase strictly".into()));
    }
    if log.trigger_times.iter().any(|&t| t > horizon) {
        return Err(AnalysisError::InvalidLog("trigger time beyond the horizon".into()));
    }
    let applied: Day = log
        .intervals(horizon)
        .into_iter()
        .filter(|(_, _, r)| *r == Regime::Applied)
        .map(|(s, e, _)| e - s)
        .sum();
    Ok(100.0 * applied as f64 / (horizon - t0) as f64)
}

/// Runs the scenario under the policy with threshold `theta` and returns
/// its outcome vector.
pub fn evaluate_policy(
    scenario: &Scenario,
    indicator: &IndicatorSpec,
    theta: f64,
) -> Result<OutcomeVec, AnalysisError> {
    let run = run_policy(scenario, indicator, theta)?;
    outcomes_of(scenario, &run)
}

pub fn run_policy(
    scenario: &Scenario,
    indicator: &IndicatorSpec,
    theta: f64,
) -> Result<ClosedLoopRun, AnalysisError> {
    let policy = scenario.policy(indicator, theta);
    simulate_closed_loop(&scenario.model, &scenario.x0, &policy, scenario.t0, scenario.horizon)
        .map_err(|source| AnalysisError::Evaluation { theta, source })
}

pub fn outcomes_of(scenario: &Scenario, run: &ClosedLoopRun) -> Result<OutcomeVec, AnalysisError> {
    let values = scenario
        .outcomes
        .iter()
        .map(|o| o.evaluate(run, scenario.t0, scenario.horizon))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(OutcomeVec { labels: scenario.outcome_labels(), values })
}

/// Finite, strictly increasing grid of thresholds.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdDomain {
    values: Vec<f64>,
}

impl ThresholdDomain {
    pub fn new(values: Vec<f64>) -> Result<Self, AnalysisError> {
        if values.is_empty() {
            return Err(AnalysisError::Domain("no thresholds".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(AnalysisError::Domain("thresholds must be finite".into()));
        }
        if values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(AnalysisError::Domain("thresholds must increase strictly".into()));
        }
        Ok(ThresholdDomain { values })
    }

    pub fn linear(min: f64, max: f64, points: usize) -> Result<Self, AnalysisError> {
        if points == 1 {
            return Self::new(vec![min]);
        }
        if points == 0 || !(max > min) {
            return Err(AnalysisError::Domain(format!(
                "linear grid needs min < max and at least one point (min {min}, max {max}, {points} points)"
            )));
        }
        let step = (max - min) / (points - 1) as f64;
        let mut v: Vec<f64> = (0..points).map(|k| min + step * k as f64).collect();
        v[points - 1] = max;
        Self::new(v)
    }

    pub fn log(min: f64, max: f64, points: usize) -> Result<Self, AnalysisError> {
        if !(min > 0.0) {
            return Err(AnalysisError::Domain(format!("log grid needs min > 0 (got {min})")));
        }
        if points == 1 {
            return Self::new(vec![min]);
        }
        if points == 0 || !(max > min) {
            return Err(AnalysisError::Domain(format!(
                "log grid needs min < max and at least one point (min {min}, max {max}, {points} points)"
            )));
        }
        let (a, b) = (min.ln(), max.ln());
        let step = (b - a) / (points - 1) as f64;
        let mut v: Vec<f64> = (0..points).map(|k| (a + step * k as f64).exp()).collect();
        v[0] = min;
        v[points - 1] = max;
        Self::new(v)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// One threshold of a sweep; failures are kept, not dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub theta: f64,
    pub outcome: Result<Vec<f64>, String>,
}

impl CurvePoint {
    pub fn values(&self) -> Option<&[f64]> {
        self.outcome.as_deref().ok()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TradeOffCurve {
    pub indicator_id: String,
    pub scenario_id: String,
    pub tau: usize,
    pub min_interevent: usize,
    pub labels: Vec<String>,
    pub points: Vec<CurvePoint>,
}

impl TradeOffCurve {
    pub fn ok_points(&self) -> impl Iterator<Item = (f64, &[f64])> {
        self.points.iter().filter_map(|p| p.values().map(|v| (p.theta, v)))
    }

    pub fn failures(&self) -> usize {
        self.points.iter().filter(|p| p.outcome.is_err()).count()
    }

    /// Number of outcomes per point.
    pub fn arity(&self) -> usize {
        self.labels.len()
    }
}

/// Evaluates the policy on every threshold of the domain. Points run in
/// parallel on the current rayon pool and are assembled in grid order.
pub fn sweep(
    scenario: &Scenario,
    indicator_id: &str,
    indicator: &IndicatorSpec,
    domain: &ThresholdDomain,
) -> TradeOffCurve {
    let points = domain
        .values()
        .par_iter()
        .map(|&theta| CurvePoint {
            theta,
            outcome: evaluate_policy(scenario, indicator, theta)
                .map(|o| o.values)
                .map_err(|e| e.to_string()),
        })
        .collect();
    TradeOffCurve {
        indicator_id: indicator_id.to_string(),
        scenario_id: scenario.id.clone(),
        tau: indicator.tau,
        min_interevent: scenario.policy.min_interevent,
        labels: scenario.outcome_labels(),
        points,
    }
}
