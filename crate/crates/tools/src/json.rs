//! The canonical scenario file format: a JSON tree with normative key names
//! (see docs/schema.md).
//!
//! Loading is two-phase: the raw tree is screened for annotation objects that
//! smuggle keys from a different dimension schema — the dimension-partition
//! property at file level — and only then decoded into the typed model, with
//! unknown keys ignored for forward compatibility. Loading never fails:
//! malformed input turns into structural violations.

use scenarium_core::model::validate::{
    Violation, ViolationCode, PHYSICAL_KEYS, SEMANTIC_KEYS, SPATIAL_KEYS, TEMPORAL_KEYS,
};
use scenarium_core::{ScenarioAnticipation, ScenarioDescription};
use serde_json::Value;

/// Outcome of loading a canonical scenario file.
#[derive(Debug)]
pub struct LoadedDescription {
    /// `None` when the tree does not decode into the model at all.
    pub description: Option<ScenarioDescription>,
    /// File-level violations found before/while decoding.
    pub violations: Vec<Violation>,
}

const COMMON_KEYS: [&str; 2] = ["element_id", "t"];

fn foreign_key_violations(tree: &Value) -> Vec<Violation> {
    let mut violations = Vec::new();
    let Some(root) = tree.as_object() else {
        return violations;
    };
    let dims: [(&str, &[&str]); 4] = [
        ("semantic", SEMANTIC_KEYS),
        ("spatial", SPATIAL_KEYS),
        ("temporal", TEMPORAL_KEYS),
        ("physical", PHYSICAL_KEYS),
    ];
    for (dim, own_keys) in dims {
        let Some(list) = root.get(dim).and_then(Value::as_array) else {
            continue;
        };
        for (i, ann) in list.iter().enumerate() {
            let Some(obj) = ann.as_object() else { continue };
            for key in obj.keys() {
                if COMMON_KEYS.contains(&key.as_str()) || own_keys.contains(&key.as_str()) {
                    continue;
                }
                let foreign_owner = dims
                    .iter()
                    .find(|(other, keys)| *other != dim && keys.contains(&key.as_str()));
                if let Some((owner, _)) = foreign_owner {
                    violations.push(Violation::new(
                        ViolationCode::DimPartition,
                        format!("{dim}[{i}].{key}"),
                        format!("key `{key}` belongs to the {owner} schema"),
                    ));
                }
            }
        }
    }
    // The same annotation object registered under two dimension lists.
    for (i, (dim_a, _)) in dims.iter().enumerate() {
        for (dim_b, _) in dims.iter().skip(i + 1) {
            let (Some(list_a), Some(list_b)) = (
                root.get(*dim_a).and_then(Value::as_array),
                root.get(*dim_b).and_then(Value::as_array),
            ) else {
                continue;
            };
            for (ia, a) in list_a.iter().enumerate() {
                for (ib, b) in list_b.iter().enumerate() {
                    if a == b {
                        violations.push(Violation::new(
                            ViolationCode::DimPartition,
                            format!("{dim_a}[{ia}]"),
                            format!("annotation object also registered under {dim_b}[{ib}]"),
                        ));
                    }
                }
            }
        }
    }
    violations
}

/// Parses a canonical scenario file. Total: structural problems become
/// violations rather than errors.
pub fn load_description(text: &str) -> LoadedDescription {
    let tree: Value = match serde_json::from_str(text) {
        Ok(v) => v,
        Err(e) => {
            return LoadedDescription {
                description: None,
                violations: vec![Violation::new(
                    ViolationCode::Structural,
                    "$",
                    format!("invalid json: {e}"),
                )],
            }
        }
    };
    if !tree.is_object() {
        return LoadedDescription {
            description: None,
            violations: vec![Violation::new(
                ViolationCode::Structural,
                "$",
                "canonical file must hold a json object",
            )],
        };
    }
    let mut violations = foreign_key_violations(&tree);
    match serde_json::from_value::<ScenarioDescription>(tree) {
        Ok(desc) => LoadedDescription {
            description: Some(desc),
            violations,
        },
        Err(e) => {
            violations.push(Violation::new(
                ViolationCode::Structural,
                "$",
                format!("does not decode into a scenario description: {e}"),
            ));
            LoadedDescription {
                description: None,
                violations,
            }
        }
    }
}

/// Serialises a description deterministically (pretty, stable key order).
pub fn description_to_string(desc: &ScenarioDescription) -> String {
    let mut s = serde_json::to_string_pretty(desc).expect("model types serialise");
    s.push('\n');
    s
}

pub fn load_anticipation(text: &str) -> Result<ScenarioAnticipation, serde_json::Error> {
    serde_json::from_str(text)
}

pub fn anticipation_to_string(ant: &ScenarioAnticipation) -> String {
    let mut s = serde_json::to_string_pretty(ant).expect("model types serialise");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use scenarium_core::params::EngineParams;
    use scenarium_core::synth::random_description;

    #[test]
    fn round_trip_preserves_description_and_verdict() {
        let params = EngineParams::default();
        for seed in 0..25u64 {
            let desc = random_description(seed, &params);
            let text = description_to_string(&desc);
            let loaded = load_description(&text);
            assert!(loaded.violations.is_empty());
            let back = loaded.description.expect("decodes");
            assert_eq!(desc, back, "seed {seed}");
            assert_eq!(
                scenarium_core::validate_description(&desc),
                scenarium_core::validate_description(&back)
            );
        }
    }

    #[test]
    fn foreign_key_is_flagged_as_partition_violation() {
        let params = EngineParams::default();
        let desc = random_description(3, &params);
        assert!(!desc.spatial.is_empty());
        let mut tree: Value = serde_json::from_str(&description_to_string(&desc)).unwrap();
        // Smuggle a semantic payload key into a spatial annotation.
        tree["spatial"][0]["state"] = Value::String("moving".into());
        let text = serde_json::to_string(&tree).unwrap();
        let loaded = load_description(&text);
        assert!(
            loaded
                .violations
                .iter()
                .any(|v| v.code == ViolationCode::DimPartition),
            "got {:?}",
            loaded.violations
        );
        // Still decodes: the foreign key is reported, not fatal.
        assert!(loaded.description.is_some());
    }

    #[test]
    fn double_registration_is_flagged() {
        let text = r#"{
            "id": "x", "window": [-6.0, 0.0], "ego_id": "ego",
            "elements": [{"id": "a", "trajectory": []}],
            "semantic": [{"element_id": "a", "t": 0.0, "class": "vehicle", "state": "moving"}],
            "spatial": [{"element_id": "a", "t": 0.0, "class": "vehicle", "state": "moving"}]
        }"#;
        let loaded = load_description(text);
        assert!(loaded
            .violations
            .iter()
            .any(|v| v.code == ViolationCode::DimPartition));
    }

    #[test]
    fn garbage_becomes_structural_violation() {
        let loaded = load_description("not json at all {");
        assert!(loaded.description.is_none());
        assert_eq!(loaded.violations.len(), 1);
        assert_eq!(loaded.violations[0].code, ViolationCode::Structural);
    }

    #[test]
    fn unknown_keys_are_tolerated() {
        let text = r#"{
            "id": "x", "window": [-6.0, 0.0], "ego_id": "ego",
            "future_field": 42
        }"#;
        let loaded = load_description(text);
        assert_eq!(loaded.description.unwrap().id, "x");
        assert!(loaded.violations.is_empty());
    }
}
