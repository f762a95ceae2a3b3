//! Scenario configuration, validation and the bundled Chile and China
//! scenarios.

mod bundled;
mod config;
mod manifest;

use std::path::{Path, PathBuf};

use chrono::{Duration, NaiveDate};
use thiserror::Error;

use crate::indicator::{Aggregator, IndicatorSpec, ObservationKind};
use crate::model::{ChileParams, ChileState, ChinaParams, ChinaState, Day, ModelKind, ModelSpec, StateVec};
use crate::tradeoff::{OutcomeKind, ThresholdDomain};
use crate::trigger::{Alignment, RampPair, TriggerPolicy};

pub use bundled::{chile_config, china_config, CHILE_SCENARIO, CHINA_SCENARIO};
pub use manifest::RunManifest;
pub use config::{
    DomainBlock, IndicatorBlock, ObservationBlock, ParamValue, PolicyBlock, ScenarioConfig,
    EXTERNAL_REQUIRED,
};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid scenario:\n  - {}", .0.join("\n  - "))]
    Invalid(Vec<String>),
}

impl ConfigError {
    pub fn violations(&self) -> &[String] {
        match self {
            ConfigError::Invalid(v) => v,
            _ => &[],
        }
    }
}

/// Reads and validates a scenario file.
pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario, ConfigError> {
    let (_, scenario) = load_config(path)?;
    Ok(scenario)
}

/// Like [`load_scenario`] but also returns the parsed config.
pub fn load_config(path: impl AsRef<Path>) -> Result<(ScenarioConfig, Scenario), ConfigError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
    let config = ScenarioConfig::parse(&text)?;
    let scenario = config.build()?;
    Ok((config, scenario))
}

const CHILE_KEYS: [&str; 13] = [
    "beta_E", "beta_Im", "beta_I", "gamma_E", "gamma_Im", "gamma_I", "gamma_H", "gamma_Hc",
    "phi_EI", "phi_IR", "phi_HR", "phi_HD", "phi_HcD",
];

const CHINA_KEYS: [&str; 12] = [
    "beta_E", "beta_I", "beta_Iu", "beta_HR", "beta_HD", "gamma_E", "gamma_I", "gamma_Iu",
    "gamma_HR", "gamma_HD", "phi_IHR", "phi_IHD",
];

/// An indicator of a scenario with its threshold grid.
#[derive(Debug, Clone, PartialEq)]
pub struct NamedIndicator {
    pub id: String,
    pub spec: IndicatorSpec,
    pub domain: ThresholdDomain,
}

/// Policy parameters shared by every indicator of a scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolicyTemplate {
    pub min_interevent: usize,
    pub u_ref: f64,
    pub delta_hat: f64,
    pub alignment: Alignment,
}

/// A validated, runnable scenario. Days are counted from `start_date`.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub id: String,
    pub model: ModelSpec,
    pub x0: StateVec,
    pub start_date: NaiveDate,
    pub t0: Day,
    pub horizon: Day,
    pub policy: PolicyTemplate,
    pub indicators: Vec<NamedIndicator>,
    pub outcomes: Vec<OutcomeKind>,
}

impl Scenario {
    pub fn policy(&self, indicator: &IndicatorSpec, theta: f64) -> TriggerPolicy {
        TriggerPolicy {
            indicator: indicator.clone(),
            theta,
            u_ref: self.policy.u_ref,
            ramps: RampPair {
                min_interevent: self.policy.min_interevent,
                delta_hat: self.policy.delta_hat,
            },
            alignment: self.policy.alignment,
        }
    }

    pub fn indicator(&self, id: &str) -> Option<&NamedIndicator> {
        self.indicators.iter().find(|i| i.id == id)
    }

    pub fn indicator_ids(&self) -> Vec<&str> {
        self.indicators.iter().map(|i| i.id.as_str()).collect()
    }

    pub fn outcome_labels(&self) -> Vec<String> {
        self.outcomes.iter().map(OutcomeKind::label).collect()
    }

    pub fn population(&self) -> f64 {
        self.model.population()
    }

    pub fn date_of(&self, t: Day) -> NaiveDate {
        self.start_date + Duration::days((t - self.t0) as i64)
    }

    pub fn compartment_labels(&self) -> &'static [&'static str] {
        match self.model {
            ModelSpec::Chile(_) => &ChileState::LABELS,
            ModelSpec::China(_) => &ChinaState::LABELS,
        }
    }
}

struct Violations(Vec<String>);

impl Violations {
    fn push(&mut self, msg: impl Into<String>) {
        self.0.push(msg.into());
    }
}

fn number(
    params: &std::collections::BTreeMap<String, ParamValue>,
    key: &str,
    errs: &mut Violations,
) -> f64 {
    match params.get(key) {
        Some(ParamValue::Number(v)) => *v,
        Some(ParamValue::Text(t)) => {
            errs.push(format!("params.{key}: expected a number, found \"{t}\""));
            f64::NAN
        }
        None => {
            errs.push(format!("params.{key} is missing"));
            f64::NAN
        }
    }
}

impl ScenarioConfig {
    fn model_kind(&self) -> Option<ModelKind> {
        match self.model.as_str() {
            "chile8" => Some(ModelKind::Chile8),
            "china9" => Some(ModelKind::China9),
            _ => None,
        }
    }

    /// Validates the config and assembles the runtime scenario.
    pub fn build(&self) -> Result<Scenario, ConfigError> {
        let mut errs = Violations(Vec::new());
        let kind = self.model_kind();
        if kind.is_none() {
            errs.push(format!("model \"{}\" is not one of chile8, china9", self.model));
        }
        if self.id.trim().is_empty() {
            errs.push("id must not be empty");
        }
        if self.horizon_days == 0 {
            errs.push("horizon_days must be at least 1");
        }

        let x0 = kind.and_then(|k| self.initial_state(k, &mut errs));
        let ic_total = x0.as_ref().map(StateVec::total);
        let model = match (kind, ic_total) {
            (Some(k), Some(total)) => self.model_spec(k, total, &mut errs),
            _ => None,
        };

        let policy = self.policy_template(&mut errs);
        let population = model.as_ref().map(ModelSpec::population);
        let indicators: Vec<NamedIndicator> = self
            .indicators
            .iter()
            .filter_map(|b| self.named_indicator(b, kind, population, policy, &mut errs))
            .collect();
        if self.indicators.is_empty() {
            errs.push("at least one indicator is required");
        }
        let mut seen = std::collections::BTreeSet::new();
        for b in &self.indicators {
            if !seen.insert(b.id.as_str()) {
                errs.push(format!("indicator id \"{}\" is used twice", b.id));
            }
        }

        let outcomes = self.outcome_kinds(kind, &mut errs);

        if !errs.0.is_empty() {
            return Err(ConfigError::Invalid(errs.0));
        }
        Ok(Scenario {
            id: self.id.clone(),
            model: model.expect("validated"),
            x0: x0.expect("validated"),
            start_date: self.start_date,
            t0: 0,
            horizon: self.horizon_days as Day,
            policy: policy.expect("validated"),
            indicators,
            outcomes,
        })
    }

    fn initial_state(&self, kind: ModelKind, errs: &mut Violations) -> Option<StateVec> {
        let labels: &[&str] = match kind {
            ModelKind::Chile8 => &ChileState::LABELS,
            _ => &ChinaState::LABELS,
        };
        let before = errs.0.len();
        for key in self.initial.keys() {
            if !labels.contains(&key.as_str()) {
                errs.push(format!(
                    "initial.{key} is not a compartment of {} (expected {})",
                    self.model,
                    labels.join(", ")
                ));
            }
        }
        let mut values = Vec::with_capacity(labels.len());
        for label in labels {
            match self.initial.get(*label) {
                Some(v) if v.is_finite() && *v >= 0.0 => values.push(*v),
                Some(v) => errs.push(format!("initial.{label} must be nonnegative (got {v})")),
                None => errs.push(format!("initial.{label} is missing")),
            }
        }
        (errs.0.len() == before).then(|| StateVec::new(kind, values))
    }

    fn model_spec(&self, kind: ModelKind, ic_total: f64, errs: &mut Violations) -> Option<ModelSpec> {
        let keys: &[&str] = match kind {
            ModelKind::Chile8 => &CHILE_KEYS,
            _ => &CHINA_KEYS,
        };
        let optional: &[&str] = match kind {
            ModelKind::Chile8 => &["population", "status"],
            _ => &["population", "substeps", "status"],
        };

        let placeholder: Vec<&str> = self
            .params
            .iter()
            .filter(|(_, v)| matches!(v, ParamValue::Text(t) if t == EXTERNAL_REQUIRED))
            .map(|(k, _)| k.as_str())
            .collect();
        if !placeholder.is_empty() {
            errs.push(format!(
                "parameters are marked {EXTERNAL_REQUIRED} ({}): the {} rates beta/gamma/phi are not \
                 published with this scenario and must be supplied from the external calibration of \
                 the model (Ivorra et al. 2020, experiment EXP_29M); replace every placeholder with a number",
                placeholder.join(", "),
                self.model
            ));
            return None;
        }
        for key in self.params.keys() {
            if !keys.contains(&key.as_str()) && !optional.contains(&key.as_str()) {
                errs.push(format!("params.{key} is not a parameter of {}", self.model));
            }
        }
        if let Some(v) = self.params.get("status") {
            errs.push(format!("params.status = {v} is not a recognized marker"));
        }

        let before = errs.0.len();
        let population = match self.params.get("population") {
            None => ic_total,
            Some(ParamValue::Number(n)) => {
                if (n - ic_total).abs() > 1e-9 * n.abs().max(1.0) {
                    errs.push(format!(
                        "params.population = {n} differs from the sum of the initial conditions ({ic_total})"
                    ));
                }
                *n
            }
            Some(v) => {
                errs.push(format!("params.population: expected a number, found {v}"));
                f64::NAN
            }
        };
        let delta_hat = self.policy.delta_hat;
        let mut num = |k: &str| number(&self.params, k, errs);

        let spec = match kind {
            ModelKind::Chile8 => ModelSpec::Chile(ChileParams {
                beta_e: num("beta_E"),
                beta_im: num("beta_Im"),
                beta_i: num("beta_I"),
                gamma_e: num("gamma_E"),
                gamma_im: num("gamma_Im"),
                gamma_i: num("gamma_I"),
                gamma_h: num("gamma_H"),
                gamma_hc: num("gamma_Hc"),
                phi_ei: num("phi_EI"),
                phi_ir: num("phi_IR"),
                phi_hr: num("phi_HR"),
                phi_hd: num("phi_HD"),
                phi_hcd: num("phi_HcD"),
                delta_hat,
                population,
            }),
            _ => {
                let substeps = match self.params.get("substeps") {
                    None => ChinaParams::DEFAULT_SUBSTEPS,
                    Some(ParamValue::Number(s)) if s.fract() == 0.0 && *s >= 1.0 && *s <= 1e6 => {
                        *s as u32
                    }
                    Some(v) => {
                        errs.push(format!("params.substeps must be a positive integer (got {v})"));
                        ChinaParams::DEFAULT_SUBSTEPS
                    }
                };
                let mut num = |k: &str| number(&self.params, k, errs);
                ModelSpec::China(ChinaParams {
                    beta_e: num("beta_E"),
                    beta_i: num("beta_I"),
                    beta_iu: num("beta_Iu"),
                    beta_hr: num("beta_HR"),
                    beta_hd: num("beta_HD"),
                    gamma_e: num("gamma_E"),
                    gamma_i: num("gamma_I"),
                    gamma_iu: num("gamma_Iu"),
                    gamma_hr: num("gamma_HR"),
                    gamma_hd: num("gamma_HD"),
                    phi_ihr: num("phi_IHR"),
                    phi_ihd: num("phi_IHD"),
                    delta_hat,
                    population,
                    substeps,
                })
            }
        };
        if errs.0.len() != before {
            return None;
        }
        let violations = match &spec {
            ModelSpec::Chile(p) => p.violations(),
            ModelSpec::China(p) => p.violations(),
        };
        if !violations.is_empty() {
            errs.0.extend(violations.into_iter().map(|v| format!("params: {v}")));
            return None;
        }
        Some(spec)
    }

    fn policy_template(&self, errs: &mut Violations) -> Option<PolicyTemplate> {
        let p = &self.policy;
        let before = errs.0.len();
        if p.min_interevent < 1 {
            errs.push("policy.min_interevent must be at least 1");
        }
        if p.min_interevent < p.tau {
            errs.push(format!(
                "minimum interevent time must satisfy Δ ≥ τ (policy.min_interevent = {} < policy.tau = {})",
                p.min_interevent, p.tau
            ));
        }
        for b in &self.indicators {
            if let Some(tau) = b.tau {
                if p.min_interevent < tau {
                    errs.push(format!(
                        "indicator {}: minimum interevent time must satisfy Δ ≥ τ (Δ = {} < τ = {tau})",
                        b.id, p.min_interevent
                    ));
                }
            }
        }
        if !(p.delta_hat > 0.0 && p.delta_hat < 1.0) {
            errs.push(format!("policy.delta_hat must lie in (0, 1) (got {})", p.delta_hat));
        }
        let u_ref = p.u_ref.unwrap_or(1.0 - p.delta_hat);
        if !(0.0..=1.0 - p.delta_hat + 1e-12).contains(&u_ref) {
            errs.push(format!(
                "policy.u_ref must lie in [0, 1 - delta_hat] = [0, {}] (got {u_ref})",
                1.0 - p.delta_hat
            ));
        }
        let alignment = match p.alignment.as_deref() {
            None | Some("identity") => Alignment::Identity,
            Some("weekly") => Alignment::Weekly,
            Some(other) => {
                errs.push(format!("policy.alignment \"{other}\" is not one of identity, weekly"));
                Alignment::Identity
            }
        };
        (errs.0.len() == before).then_some(PolicyTemplate {
            min_interevent: p.min_interevent as usize,
            u_ref: u_ref.min(1.0 - p.delta_hat),
            delta_hat: p.delta_hat,
            alignment,
        })
    }

    fn named_indicator(
        &self,
        b: &IndicatorBlock,
        kind: Option<ModelKind>,
        population: Option<f64>,
        policy: Option<PolicyTemplate>,
        errs: &mut Violations,
    ) -> Option<NamedIndicator> {
        let before = errs.0.len();
        let observation = match &b.observation {
            ObservationBlock::Tag(tag) => match ObservationKind::from_tag(tag) {
                Some(o) => Some(o),
                None => {
                    errs.push(format!("indicator {}: unknown observation \"{tag}\"", b.id));
                    None
                }
            },
            ObservationBlock::Linear { custom_linear } => {
                Some(ObservationKind::CustomLinear(custom_linear.clone()))
            }
        };
        if let (Some(o), Some(k)) = (&observation, kind) {
            match o {
                ObservationKind::CustomLinear(w) => {
                    let dim = if k == ModelKind::Chile8 { 8 } else { 9 };
                    if w.len() != dim {
                        errs.push(format!(
                            "indicator {}: custom_linear has {} weights, {} has {dim} compartments",
                            b.id,
                            w.len(),
                            self.model
                        ));
                    }
                }
                o if o.model() != Some(k) => errs.push(format!(
                    "indicator {}: observation {o} does not apply to model {}",
                    b.id, self.model
                )),
                _ => {}
            }
        }
        let aggregator = Aggregator::from_tag(&b.aggregator);
        if aggregator.is_none() {
            errs.push(format!(
                "indicator {}: unknown aggregator \"{}\" (expected mean, mean_diff, variation_rate, variation_rate_diff)",
                b.id, b.aggregator
            ));
        }
        let tau = b.tau.unwrap_or(self.policy.tau) as usize;
        let scale = match (b.per_capita, population) {
            (Some(true), Some(n)) => 1e5 / n,
            _ => 1.0,
        };
        let domain = match (&b.domain, aggregator) {
            (Some(d), _) => match d {
                DomainBlock::Log { min, max, points } => {
                    ThresholdDomain::log(*min, *max, *points as usize)
                }
                DomainBlock::Linear { min, max, points } => {
                    ThresholdDomain::linear(*min, *max, *points as usize)
                }
                DomainBlock::Explicit { values } => ThresholdDomain::new(values.clone()),
            }
            .map_err(|e| errs.push(format!("indicator {}: {e}", b.id)))
            .ok(),
            (None, Some(agg)) => population.and_then(|n| default_domain(agg, n, scale, DEFAULT_GRID_POINTS).ok()),
            (None, None) => None,
        };
        if errs.0.len() != before {
            return None;
        }
        let spec = IndicatorSpec::new(observation?, aggregator?, tau).with_scale(scale);
        if let Err(e) = spec.validate() {
            errs.push(format!("indicator {}: {e}", b.id));
            return None;
        }
        policy?;
        Some(NamedIndicator { id: b.id.clone(), spec, domain: domain? })
    }

    fn outcome_kinds(&self, kind: Option<ModelKind>, errs: &mut Violations) -> Vec<OutcomeKind> {
        if self.outcomes.len() < 2 {
            errs.push(format!("at least two outcomes are required (got {})", self.outcomes.len()));
        }
        let mut out = Vec::new();
        for tag in &self.outcomes {
            match OutcomeKind::from_tag(tag) {
                None => errs.push(format!(
                    "outcome \"{tag}\" is not one of peak:<observation>, final:<observation>, final_deaths, lockdown_pct"
                )),
                Some(o) => {
                    if let (OutcomeKind::Peak(obs) | OutcomeKind::Final(obs), Some(k)) = (&o, kind) {
                        if obs.model().is_some_and(|m| m != k) {
                            errs.push(format!(
                                "outcome {tag}: observation does not apply to model {}",
                                self.model
                            ));
                        }
                    }
                    out.push(o);
                }
            }
        }
        out
    }
}

/// Default threshold grid when a scenario does not give one.
///
/// Level indicators get log-spaced points over `[1, N/100]`, differences
/// linear points over `±N/10^4` and variation rates `[-1, 1]`; all in the
/// indicator's (possibly per-capita) units.
pub fn default_domain(
    agg: Aggregator,
    population: f64,
    scale: f64,
    points: usize,
) -> Result<ThresholdDomain, crate::tradeoff::AnalysisError> {
    match agg {
        Aggregator::Mean => ThresholdDomain::log(scale, population / 100.0 * scale, points),
        Aggregator::MeanDiff => {
            let r = population / 1e4 * scale;
            ThresholdDomain::linear(-r, r, points)
        }
        Aggregator::VariationRate | Aggregator::VariationRateDiff => {
            ThresholdDomain::linear(-1.0, 1.0, points)
        }
    }
}

/// Points in a default threshold grid.
pub const DEFAULT_GRID_POINTS: usize = 64;
