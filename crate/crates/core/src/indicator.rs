//! Instantaneous observations and the window aggregators that turn a
//! recent history of states into a scalar trigger indicator.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{ModelKind, StateVec};
use crate::trigger::HistoryWindow;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IndicatorError {
    #[error("observation {observation} does not apply to model {model}")]
    ModelMismatch { observation: String, model: &'static str },
    #[error("linear observation has {weights} weights but the state has {dim} compartments")]
    WeightDimension { weights: usize, dim: usize },
    #[error("zero denominator in {aggregator} at window position {position}")]
    ZeroDenominator { aggregator: Aggregator, position: usize },
    #[error("window has {found} observations, indicator expects tau + 1 = {expected}")]
    WindowLength { expected: usize, found: usize },
    #[error("{0} requires an observation window tau >= 1")]
    WindowTooShort(Aggregator),
}

/// What is observed on a single state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObservationKind {
    /// Patients in ICU beds, `Hc`.
    ChileIcu,
    /// Active (detected) cases, `I + H + Hc`.
    ChileActive,
    /// Hospitalized, `HR + HD`.
    ChinaHospitalized,
    /// Detected infectious, `I`.
    ChinaDetected,
    /// Dot product with the given weights.
    CustomLinear(Vec<f64>),
}

impl ObservationKind {
    pub fn tag(&self) -> String {
        match self {
            ObservationKind::ChileIcu => "chile_icu".into(),
            ObservationKind::ChileActive => "chile_active".into(),
            ObservationKind::ChinaHospitalized => "china_hospitalized".into(),
            ObservationKind::ChinaDetected => "china_detected".into(),
            ObservationKind::CustomLinear(_) => "custom_linear".into(),
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        Some(match tag {
            "chile_icu" => ObservationKind::ChileIcu,
            "chile_active" => ObservationKind::ChileActive,
            "china_hospitalized" => ObservationKind::ChinaHospitalized,
            "china_detected" => ObservationKind::ChinaDetected,
            _ => return None,
        })
    }

    /// Model the observation is defined on; `None` for linear observations.
    pub fn model(&self) -> Option<ModelKind> {
        match self {
            ObservationKind::ChileIcu | ObservationKind::ChileActive => Some(ModelKind::Chile8),
            ObservationKind::ChinaHospitalized | ObservationKind::ChinaDetected => {
                Some(ModelKind::China9)
            }
            ObservationKind::CustomLinear(_) => None,
        }
    }
}

impl fmt::Display for ObservationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.tag())
    }
}

/// Evaluates an observation on one state (persons, unscaled).
pub fn observe(kind: &ObservationKind, x: &StateVec) -> Result<f64, IndicatorError> {
    if let Some(model) = kind.model() {
        if model != x.kind() {
            return Err(IndicatorError::ModelMismatch {
                observation: kind.tag(),
                model: x.kind().as_str(),
            });
        }
    }
    let v = x.values();
    Ok(match kind {
        ObservationKind::ChileIcu => v[6],
        ObservationKind::ChileActive => v[3] + v[5] + v[6],
        ObservationKind::ChinaHospitalized => v[4] + v[5],
        ObservationKind::ChinaDetected => v[2],
        ObservationKind::CustomLinear(w) => {
            if w.len() != v.len() {
                return Err(IndicatorError::WeightDimension { weights: w.len(), dim: v.len() });
            }
            w.iter().zip(v).map(|(a, b)| a * b).sum()
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregator {
    Mean,
    MeanDiff,
    VariationRate,
    VariationRateDiff,
}

impl Aggregator {
    pub fn tag(self) -> &'static str {
        match self {
            Aggregator::Mean => "mean",
            Aggregator::MeanDiff => "mean_diff",
            Aggregator::VariationRate => "variation_rate",
            Aggregator::VariationRateDiff => "variation_rate_diff",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        Some(match tag {
            "mean" => Aggregator::Mean,
            "mean_diff" => Aggregator::MeanDiff,
            "variation_rate" => Aggregator::VariationRate,
            "variation_rate_diff" => Aggregator::VariationRateDiff,
            _ => return None,
        })
    }

    /// Level indicators are positive-valued; the others are signed.
    pub fn is_level(self) -> bool {
        matches!(self, Aggregator::Mean)
    }

    fn needs_history(self) -> bool {
        matches!(self, Aggregator::VariationRate | Aggregator::VariationRateDiff)
    }
}

impl fmt::Display for Aggregator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// Mean of the observations in the window.
pub fn mean(obs: &[f64]) -> f64 {
    obs.iter().sum::<f64>() / obs.len() as f64
}

/// Mean of day-to-day differences, telescoped: `(O(t) - O(t-tau)) / (tau + 1)`.
pub fn mean_diff(obs: &[f64]) -> f64 {
    (obs[obs.len() - 1] - obs[0]) / obs.len() as f64
}

/// Relative change over the window: `(O(t) - O(t-tau)) / O(t-tau)`.
pub fn variation_rate(obs: &[f64]) -> Result<f64, IndicatorError> {
    let first = obs[0];
    if first == 0.0 {
        return Err(IndicatorError::ZeroDenominator {
            aggregator: Aggregator::VariationRate,
            position: 0,
        });
    }
    Ok((obs[obs.len() - 1] - first) / first)
}

/// Average of the day-by-day relative changes available in the window.
pub fn variation_rate_diff(obs: &[f64]) -> Result<f64, IndicatorError> {
    let mut total = 0.0;
    for (k, pair) in obs.windows(2).enumerate() {
        if pair[0] == 0.0 {
            return Err(IndicatorError::ZeroDenominator {
                aggregator: Aggregator::VariationRateDiff,
                position: k,
            });
        }
        total += (pair[1] - pair[0]) / pair[0];
    }
    if obs.len() < 2 {
        return Ok(0.0);
    }
    Ok(total / (obs.len() - 1) as f64)
}

/// An observation aggregated over a window of `tau + 1` days.
#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorSpec {
    pub observation: ObservationKind,
    pub aggregator: Aggregator,
    pub tau: usize,
    /// Multiplies every observation, e.g. `1e5 / N` for per-100k indicators.
    pub scale: f64,
}

impl IndicatorSpec {
    pub fn new(observation: ObservationKind, aggregator: Aggregator, tau: usize) -> Self {
        IndicatorSpec { observation, aggregator, tau, scale: 1.0 }
    }

    pub fn with_scale(mut self, scale: f64) -> Self {
        self.scale = scale;
        self
    }

    pub fn validate(&self) -> Result<(), IndicatorError> {
        if self.aggregator.needs_history() && self.tau == 0 {
            return Err(IndicatorError::WindowTooShort(self.aggregator));
        }
        if let ObservationKind::CustomLinear(w) = &self.observation {
            if w.iter().any(|v| !v.is_finite()) {
                return Err(IndicatorError::WeightDimension { weights: w.len(), dim: w.len() });
            }
        }
        Ok(())
    }

    /// Scaled instantaneous observation.
    pub fn observe(&self, x: &StateVec) -> Result<f64, IndicatorError> {
        Ok(self.scale * observe(&self.observation, x)?)
    }

    /// Aggregates a window of `tau + 1` (already scaled) observations.
    pub fn aggregate(&self, obs: &[f64]) -> Result<f64, IndicatorError> {
        if obs.len() != self.tau + 1 {
            return Err(IndicatorError::WindowLength { expected: self.tau + 1, found: obs.len() });
        }
        match self.aggregator {
            Aggregator::Mean => Ok(mean(obs)),
            Aggregator::MeanDiff => Ok(mean_diff(obs)),
            Aggregator::VariationRate | Aggregator::VariationRateDiff if obs.len() < 2 => {
                Err(IndicatorError::WindowTooShort(self.aggregator))
            }
            Aggregator::VariationRate => variation_rate(obs),
            Aggregator::VariationRateDiff => variation_rate_diff(obs),
        }
    }

    pub fn evaluate(&self, window: &HistoryWindow<'_>) -> Result<f64, IndicatorError> {
        let obs = window
            .entries()
            .iter()
            .map(|x| self.observe(x))
            .collect::<Result<Vec<_>, _>>()?;
        self.aggregate(&obs)
    }

    pub fn id(&self) -> String {
        format!("{}_{}", self.aggregator, self.observation)
    }
}

/// Windows whose indicator is at most `theta`: the NPI-released side.
#[derive(Debug, Clone, PartialEq)]
pub struct EventSet {
    pub indicator: IndicatorSpec,
    pub theta: f64,
}

impl EventSet {
    pub fn contains_value(&self, value: f64) -> bool {
        value <= self.theta
    }
}

pub fn in_event_set(es: &EventSet, window: &HistoryWindow<'_>) -> Result<bool, IndicatorError> {
    Ok(es.contains_value(es.indicator.evaluate(window)?))
}
