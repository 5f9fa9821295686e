//! Rendering of score and validation reports: human-readable text, a JSON
//! tree, and a flat CSV for aggregation (columns in docs/metrics.md).

use scenarium_core::evaluation::{Dimension, UnderstandingScore};
use scenarium_core::model::validate::ValidationReport;
use serde::Serialize;
use std::fmt::Write as _;

/// A scored (ground truth, candidate) pair ready for rendering.
#[derive(Debug, Clone, Serialize)]
pub struct ScoreReport {
    pub gt_id: String,
    pub candidate_id: String,
    pub config_hash: String,
    pub score: UnderstandingScore,
}

pub const CSV_HEADER: &str =
    "gt,candidate,dimension,precision,recall,f1,gt_items,cand_items,event_time_mae,ade,fde";

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_default()
}

impl ScoreReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialises");
        s.push('\n');
        s
    }

    /// Flat rows, one per dimension plus anticipation and the aggregate.
    pub fn csv_rows(&self) -> String {
        let mut out = String::new();
        for dim in Dimension::ALL {
            let d = self.score.dimension(dim);
            let _ = writeln!(
                out,
                "{},{},{},{:.6},{:.6},{:.6},{},{},,,",
                self.gt_id,
                self.candidate_id,
                dim.token(),
                d.precision,
                d.recall,
                d.f1,
                d.gt_items,
                d.cand_items,
            );
        }
        let a = &self.score.anticipation;
        let _ = writeln!(
            out,
            "{},{},anticipation,{:.6},{:.6},{:.6},{},{},{},{},{}",
            self.gt_id,
            self.candidate_id,
            a.events.precision,
            a.events.recall,
            a.events.f1,
            a.events.gt_items,
            a.events.cand_items,
            opt(a.event_time_mae),
            opt(a.ade),
            opt(a.fde),
        );
        let _ = writeln!(
            out,
            "{},{},aggregate,,,{:.6},,,,,",
            self.gt_id, self.candidate_id, self.score.aggregate,
        );
        out
    }

    pub fn to_csv(&self) -> String {
        format!("{CSV_HEADER}\n{}", self.csv_rows())
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "score report: {} vs {}", self.gt_id, self.candidate_id);
        let _ = writeln!(out, "config: {}", self.config_hash);
        let _ = writeln!(out, "{:<12} {:>9} {:>9} {:>9}", "dimension", "precision", "recall", "f1");
        for dim in Dimension::ALL {
            let d = self.score.dimension(dim);
            let _ = writeln!(
                out,
                "{:<12} {:>9.4} {:>9.4} {:>9.4}",
                dim.token(),
                d.precision,
                d.recall,
                d.f1
            );
        }
        let a = &self.score.anticipation;
        let _ = writeln!(
            out,
            "{:<12} {:>9.4} {:>9.4} {:>9.4}",
            "anticipation", a.events.precision, a.events.recall, a.events.f1
        );
        let _ = writeln!(out, "aggregate    {:>29.4}", self.score.aggregate);
        if let Some(e) = self.score.spatial_mean_abs_distance_error {
            let _ = writeln!(out, "mean |Δ distance_to_ego|: {e:.4} m");
        }
        if let Some(mae) = a.event_time_mae {
            let _ = writeln!(out, "event time MAE: {mae:.4} s");
        }
        if let (Some(ade), Some(fde)) = (a.ade, a.fde) {
            let _ = writeln!(out, "trajectory ADE/FDE: {ade:.4} / {fde:.4} m");
        }
        if !self.score.matching.unmatched_gt.is_empty() {
            let ids: Vec<&str> = self
                .score
                .matching
                .unmatched_gt
                .iter()
                .map(|i| i.as_str())
                .collect();
            let _ = writeln!(out, "unmatched ground truth: {}", ids.join(", "));
        }
        if !self.score.matching.unmatched_candidate.is_empty() {
            let ids: Vec<&str> = self
                .score
                .matching
                .unmatched_candidate
                .iter()
                .map(|i| i.as_str())
                .collect();
            let _ = writeln!(out, "unmatched candidate: {}", ids.join(", "));
        }
        for note in &self.score.notes {
            match &note.element_id {
                Some(id) => {
                    let _ = writeln!(out, "note [{id}]: {}", note.note);
                }
                None => {
                    let _ = writeln!(out, "note: {}", note.note);
                }
            }
        }
        out
    }
}

/// Renders a validation report as text, one line per violation.
pub fn validation_text(report: &ValidationReport) -> String {
    if report.is_empty() {
        return String::from("valid: no violations\n");
    }
    let mut out = String::new();
    let _ = writeln!(out, "invalid: {} violation(s)", report.violations.len());
    for v in &report.violations {
        let _ = writeln!(out, "{} {}: {}", v.code, v.path, v.message);
    }
    out
}

pub fn validation_json(report: &ValidationReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serialises");
    s.push('\n');
    s
}
