//! Scene files: the derive-side companion of a trajectory log, carrying the
//! environment context plus per-element perception metadata (class,
//! attributes, affordances, materials, extents, constraints) that raw tracks
//! cannot provide.

use scenarium_core::describe::{DeriveInput, ElementMeta};
use scenarium_core::model::{Context, ElementId, ModalityStream, TimeInterval};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::config::RunConfig;
use crate::trajlog::TrajectoryLog;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct SceneFile {
    pub scenario_id: Option<String>,
    /// `[start, end]`; when absent the window comes from the log span or the
    /// configured default length.
    pub window: Option<(f64, f64)>,
    pub context: Context,
    pub modalities: Vec<ModalityStream>,
    pub elements: BTreeMap<ElementId, ElementMeta>,
}

impl SceneFile {
    pub fn from_json(text: &str) -> Result<SceneFile, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("scene serialises");
        s.push('\n');
        s
    }

    /// Combines this scene with a trajectory log into derive-ready input.
    /// Elements without metadata fall back to the log's class hint with the
    /// class-default extent.
    pub fn derive_input(&self, log: &TrajectoryLog, config: &RunConfig) -> DeriveInput {
        let elements = log.to_elements();
        let hints = log.class_hints();
        let mut meta = self.elements.clone();
        for (id, class) in hints {
            meta.entry(id).or_insert_with(|| ElementMeta::new(class));
        }
        let window = self
            .window
            .map(|(a, b)| TimeInterval::new(a, b))
            .unwrap_or_else(|| match (log.rows.first(), log.rows.last()) {
                (Some(first), Some(last)) => TimeInterval::new(first.t, last.t),
                _ => TimeInterval::new(-config.derive.window_seconds, 0.0),
            });
        DeriveInput {
            scenario_id: self
                .scenario_id
                .clone()
                .unwrap_or_else(|| String::from("derived")),
            window,
            context: self.context.clone(),
            modalities: self.modalities.clone(),
            elements,
            meta,
            ego_id: log.ego_id.clone(),
        }
    }
}
