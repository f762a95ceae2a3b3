//! Simulation and analysis engine for event-triggered lockdown policies on
//! discrete-time compartmental epidemic models.
//!
//! The pieces, bottom up:
//!
//! * [`model`]: the Chile (8 compartments) and China (9 compartments)
//!   one-day transition maps and open-loop simulation.
//! * [`indicator`]: observations of a state and window aggregators.
//! * [`trigger`]: the event-triggered feedback and closed-loop simulation.
//! * [`tradeoff`]: outcomes, threshold sweeps, objective lookup and
//!   dominance between trade-off curves.
//! * [`scenario`]: the TOML scenario format and the bundled scenarios.

pub mod indicator;
pub mod model;
pub mod scenario;
pub mod tradeoff;
pub mod trigger;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use indicator::{Aggregator, EventSet, IndicatorError, IndicatorSpec, ObservationKind};
pub use model::{
    simulate_open_loop, ChileParams, ChileState, ChinaParams, ChinaState, Day, Dynamics,
    DynamicsError, ModelKind, ModelSpec, StateVec, Trajectory,
};
pub use scenario::{load_scenario, ConfigError, RunManifest, Scenario, ScenarioConfig};
pub use tradeoff::{
    dominance, evaluate_policy, objective_lookup, sweep, AnalysisError, ComparisonReport,
    CurvePoint, Lookup, OutcomeKind, OutcomeVec, ThresholdDomain, TradeOffCurve, Verdict,
};
pub use trigger::{
    simulate_closed_loop, Alignment, ClosedLoopRun, RampPair, Regime, SwitchLog, TriggerError,
    TriggerPolicy,
};
