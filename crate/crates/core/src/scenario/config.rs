//! The on-disk scenario format (TOML). Parsing is structural only; all
//! semantic checks happen in [`ScenarioConfig::build`], which reports every
//! violation at once.

use std::collections::BTreeMap;
use std::fmt;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// A parameter entry: a number, or a text marker such as `external-required`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Number(f64),
    Text(String),
}

impl fmt::Display for ParamValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamValue::Number(v) => write!(f, "{v}"),
            ParamValue::Text(s) => write!(f, "\"{s}\""),
        }
    }
}

pub const EXTERNAL_REQUIRED: &str = "external-required";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyBlock {
    pub tau: u32,
    pub min_interevent: u32,
    pub delta_hat: f64,
    /// Defaults to `1 - delta_hat`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u_ref: Option<f64>,
    /// `identity` (default) or `weekly`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alignment: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ObservationBlock {
    Tag(String),
    Linear { custom_linear: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DomainBlock {
    Log { min: f64, max: f64, points: u32 },
    Linear { min: f64, max: f64, points: u32 },
    Explicit { values: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IndicatorBlock {
    pub id: String,
    pub aggregator: String,
    /// Overrides the policy window length for this indicator.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<u32>,
    /// Observe per 100,000 inhabitants instead of persons.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_capita: Option<bool>,
    pub observation: ObservationBlock,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<DomainBlock>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub id: String,
    /// `chile8` or `china9`.
    pub model: String,
    pub start_date: NaiveDate,
    pub horizon_days: u32,
    /// Outcome tags; the last one is the compared quantity.
    pub outcomes: Vec<String>,
    pub params: BTreeMap<String, ParamValue>,
    pub initial: BTreeMap<String, f64>,
    pub policy: PolicyBlock,
    pub indicators: Vec<IndicatorBlock>,
}

impl ScenarioConfig {
    /// Structural parse; see [`ScenarioConfig::build`] for validation.
    pub fn parse(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario configs always serialize")
    }

    /// SHA-256 of the canonical serialization. Formatting, comments and
    /// key order in the source file do not affect it.
    pub fn config_hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_toml().as_bytes()))
    }

    pub fn indicator(&self, id: &str) -> Option<&IndicatorBlock> {
        self.indicators.iter().find(|i| i.id == id)
    }
}
