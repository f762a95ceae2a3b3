//! Compartmental dynamics as pure one-day transition maps.
//!
//! A model advances a [`StateVec`] by one calendar day under a scalar
//! control `u`, the fraction by which the NPI reduces contact rates.
//! Two built-in models are provided: the eight-compartment model of the
//! Metropolitan Region of Chile ([`chile`]) and the nine-compartment model
//! of China ([`china`]), which integrates hourly Euler sub-steps.

pub mod chile;
pub mod china;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use chile::{chile_contagion_rate, chile_step, ChileParams, ChileState};
pub use china::{china_contagion_rate, china_step_day, ChinaParams, ChinaState};

/// Day index on the simulation clock.
pub type Day = usize;

/// Relative tolerance below which negative compartments are treated as
/// floating-point noise and clamped to zero.
pub const NEGATIVITY_TOLERANCE: f64 = 1e-9;

/// Tolerance on control admissibility checks.
const CONTROL_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Chile8,
    China9,
    /// User-defined dynamics, e.g. small test models.
    Custom,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Chile8 => "chile8",
            ModelKind::China9 => "china9",
            ModelKind::Custom => "custom",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error("degenerate population: N - D = {0} is not positive")]
    DegeneratePopulation(f64),
    #[error("compartment {compartment} became negative ({value:e}); parameters are outside the model's valid regime")]
    Negative { compartment: &'static str, value: f64 },
    #[error("control {u} is outside the admissible set [0, {max}]")]
    InadmissibleControl { u: f64, max: f64 },
    #[error("state has {found} compartments, model expects {expected}")]
    Dimension { expected: usize, found: usize },
    #[error("state belongs to model {found}, expected {expected}")]
    ModelMismatch { expected: &'static str, found: &'static str },
    #[error("an open-loop run needs at least one control")]
    NoControls,
    #[error("day {day}: {source}")]
    AtDay {
        day: Day,
        #[source]
        source: Box<DynamicsError>,
    },
}

impl DynamicsError {
    pub fn at_day(self, day: Day) -> Self {
        match self {
            e @ DynamicsError::AtDay { .. } => e,
            e => DynamicsError::AtDay { day, source: Box::new(e) },
        }
    }
}

/// Labeled compartment vector (persons) of one model.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVec {
    kind: ModelKind,
    values: Vec<f64>,
}

impl StateVec {
    pub fn new(kind: ModelKind, values: Vec<f64>) -> Self {
        StateVec { kind, values }
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn is_nonnegative(&self) -> bool {
        self.values.iter().all(|v| *v >= 0.0)
    }
}

/// A discrete-time control system `x(t+1) = f(x(t), u(t))` with a scalar
/// control in `[0, control_max]`.
pub trait Dynamics: Send + Sync {
    fn kind(&self) -> ModelKind;

    /// Compartment labels in state order.
    fn labels(&self) -> &[&'static str];

    /// Upper end of the admissible control set.
    fn control_max(&self) -> f64;

    /// Advances one calendar day.
    fn step(&self, x: &StateVec, u: f64) -> Result<StateVec, DynamicsError>;

    fn check_control(&self, u: f64) -> Result<(), DynamicsError> {
        let max = self.control_max();
        if !(u >= -CONTROL_EPS && u <= max + CONTROL_EPS) {
            return Err(DynamicsError::InadmissibleControl { u, max });
        }
        Ok(())
    }
}

/// Dynamics of one of the built-in models together with its parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelSpec {
    Chile(ChileParams),
    China(ChinaParams),
}

impl ModelSpec {
    pub fn population(&self) -> f64 {
        match self {
            ModelSpec::Chile(p) => p.population,
            ModelSpec::China(p) => p.population,
        }
    }

    pub fn delta_hat(&self) -> f64 {
        match self {
            ModelSpec::Chile(p) => p.delta_hat,
            ModelSpec::China(p) => p.delta_hat,
        }
    }
}

impl Dynamics for ModelSpec {
    fn kind(&self) -> ModelKind {
        match self {
            ModelSpec::Chile(_) => ModelKind::Chile8,
            ModelSpec::China(_) => ModelKind::China9,
        }
    }

    fn labels(&self) -> &[&'static str] {
        match self {
            ModelSpec::Chile(_) => &ChileState::LABELS,
            ModelSpec::China(_) => &ChinaState::LABELS,
        }
    }

    fn control_max(&self) -> f64 {
        1.0 - self.delta_hat()
    }

    fn step(&self, x: &StateVec, u: f64) -> Result<StateVec, DynamicsError> {
        self.check_control(u)?;
        match self {
            ModelSpec::Chile(p) => {
                let s = ChileState::try_from(x)?;
                Ok(chile_step(&s, u, p)?.into())
            }
            ModelSpec::China(p) => {
                let s = ChinaState::try_from(x)?;
                Ok(china_step_day(&s, u, p)?.into())
            }
        }
    }
}

/// Clamps floating-point noise below zero, rejects genuine negativity.
pub(crate) fn clamp_small_negative(
    compartment: &'static str,
    value: f64,
    population: f64,
) -> Result<f64, DynamicsError> {
    if value >= 0.0 {
        Ok(value)
    } else if value >= -NEGATIVITY_TOLERANCE * population {
        Ok(0.0)
    } else {
        Err(DynamicsError::Negative { compartment, value })
    }
}

pub(crate) fn check_shape(
    x: &StateVec,
    kind: ModelKind,
    dim: usize,
) -> Result<(), DynamicsError> {
    if x.kind() != kind {
        return Err(DynamicsError::ModelMismatch {
            expected: kind.as_str(),
            found: x.kind().as_str(),
        });
    }
    if x.dim() != dim {
        return Err(DynamicsError::Dimension { expected: dim, found: x.dim() });
    }
    Ok(())
}

/// States `x(t0..=horizon+1)` and controls `u(t0..=horizon)` of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    t0: Day,
    states: Vec<StateVec>,
    controls: Vec<f64>,
}

impl Trajectory {
    /// Assembles a trajectory; `states` must be one longer than `controls`.
    pub fn new(t0: Day, states: Vec<StateVec>, controls: Vec<f64>) -> Self {
        assert_eq!(
            states.len(),
            controls.len() + 1,
            "a trajectory has exactly one more state than controls"
        );
        Trajectory { t0, states, controls }
    }

    pub fn t0(&self) -> Day {
        self.t0
    }

    /// Last day with a control, `T`.
    pub fn horizon(&self) -> Day {
        self.t0 + self.controls.len() - 1
    }

    /// Last day with a state, `T + 1`.
    pub fn end(&self) -> Day {
        self.t0 + self.states.len() - 1
    }

    pub fn states(&self) -> &[StateVec] {
        &self.states
    }

    pub fn controls(&self) -> &[f64] {
        &self.controls
    }

    pub fn state_at(&self, t: Day) -> Option<&StateVec> {
        t.checked_sub(self.t0).and_then(|i| self.states.get(i))
    }

    pub fn control_at(&self, t: Day) -> Option<f64> {
        t.checked_sub(self.t0).and_then(|i| self.controls.get(i).copied())
    }

    pub fn initial_state(&self) -> &StateVec {
        &self.states[0]
    }
}

/// Applies the model's day step once per control, starting from `x0` at `t0`.
pub fn simulate_open_loop<M: Dynamics + ?Sized>(
    model: &M,
    x0: &StateVec,
    t0: Day,
    controls: &[f64],
) -> Result<Trajectory, DynamicsError> {
    if controls.is_empty() {
        return Err(DynamicsError::NoControls);
    }
    let mut states = Vec::with_capacity(controls.len() + 1);
    states.push(x0.clone());
    for (i, &u) in controls.iter().enumerate() {
        let next = model
            .step(&states[i], u)
            .map_err(|e| e.at_day(t0 + i))?;
        states.push(next);
    }
    Ok(Trajectory::new(t0, states, controls.to_vec()))
}
