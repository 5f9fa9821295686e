//! Environment context: layered scene inventory, rule set and driver channel.

use crate::vocab::{ElementClass, Quantity, RuleKind, Unit};
use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

/// One entry of a context layer (layer ids run 1..=6: road network, roadside
/// structures, temporary changes, dynamic objects, environment conditions,
/// digital information).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerEntry {
    pub id: String,
    pub kind: String,
    pub label: String,
}

/// A typed rule parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Quantity(Quantity),
    Text(String),
}

impl ParamValue {
    pub fn as_quantity(&self) -> Option<&Quantity> {
        match self {
            ParamValue::Quantity(q) => Some(q),
            ParamValue::Text(_) => None,
        }
    }

    pub fn as_text(&self) -> Option<&str> {
        match self {
            ParamValue::Text(t) => Some(t),
            ParamValue::Quantity(_) => None,
        }
    }
}

/// A context rule. The semantic rule type lives in `params["type"]`; see
/// docs/schema.md for the recognised parameter conventions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rule {
    pub id: String,
    pub kind: RuleKind,
    #[serde(default)]
    pub params: BTreeMap<String, ParamValue>,
}

impl Rule {
    pub fn new(id: impl Into<String>, kind: RuleKind) -> Self {
        Rule {
            id: id.into(),
            kind,
            params: BTreeMap::new(),
        }
    }

    pub fn with_text(mut self, key: &str, value: impl Into<String>) -> Self {
        self.params
            .insert(String::from(key), ParamValue::Text(value.into()));
        self
    }

    pub fn with_quantity(mut self, key: &str, value: f64, unit: Unit) -> Self {
        self.params.insert(
            String::from(key),
            ParamValue::Quantity(Quantity::new(value, unit)),
        );
        self
    }

    pub fn rule_type(&self) -> Option<&str> {
        self.params.get("type").and_then(ParamValue::as_text)
    }

    /// Element id holding crossing priority, when this is a priority rule.
    pub fn crossing_priority_holder(&self) -> Option<&str> {
        if self.rule_type() == Some("crossing_priority") {
            self.params.get("holder").and_then(ParamValue::as_text)
        } else {
            None
        }
    }

    /// Speed limit in m/s plus an optional class restriction.
    pub fn speed_limit(&self) -> Option<(f64, Option<ElementClass>)> {
        if self.rule_type() != Some("max_speed") {
            return None;
        }
        let q = self.params.get("limit").and_then(ParamValue::as_quantity)?;
        if q.unit != Unit::MetersPerSecond {
            return None;
        }
        Some((q.value, self.class_restriction()))
    }

    /// Acceleration limit in m/s² plus an optional class restriction.
    pub fn accel_limit(&self) -> Option<(f64, Option<ElementClass>)> {
        if self.rule_type() != Some("max_accel") {
            return None;
        }
        let q = self.params.get("limit").and_then(ParamValue::as_quantity)?;
        if q.unit != Unit::MetersPerSecondSquared {
            return None;
        }
        Some((q.value, self.class_restriction()))
    }

    pub fn is_rss_gap(&self) -> bool {
        self.rule_type() == Some("min_gap_rss")
    }

    fn class_restriction(&self) -> Option<ElementClass> {
        self.params
            .get("class")
            .and_then(ParamValue::as_text)
            .map(ElementClass::from_token)
    }
}

/// A timestamped driver utterance. Shared verbatim between the context view
/// and the linguistic modality stream; the model keeps both views.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Utterance {
    pub t: f64,
    pub text: String,
}

/// Everything the agent knows about the environment beyond raw signals.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Context {
    /// Layer id (1..=6) to entries.
    #[serde(default)]
    pub layers: BTreeMap<u8, Vec<LayerEntry>>,
    #[serde(default)]
    pub rules: Vec<Rule>,
    #[serde(default)]
    pub driver_channel: Option<Vec<Utterance>>,
}

impl Context {
    /// All rules that grant crossing priority, as (rule id, holder id).
    pub fn priority_rules(&self) -> impl Iterator<Item = (&str, &str)> {
        self.rules
            .iter()
            .filter_map(|r| r.crossing_priority_holder().map(|h| (r.id.as_str(), h)))
    }
}
