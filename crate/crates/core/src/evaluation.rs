//! Scoring of candidate descriptions against ground truth, and the
//! task-dependent decision rules.
//!
//! Scoring conventions: items are compared per matched element (and snapshot
//! time, for the discrete dimensions) with micro-averaged precision/recall.
//! An empty prediction has precision 1.0 by convention, so "said nothing" is
//! never punished as wrong, only as missing. Attribute strings compare
//! case-insensitively after whitespace normalisation; no fuzzy matching.

use crate::geometry::{footprint_distance, Footprint};
use crate::math::{Vec2, Vec3};
use crate::model::{
    Action, AnnotationRef, ElementId, ScenarioAnticipation, ScenarioDescription,
    SpatialAnnotation, TaskSpec, TemporalAnnotation,
};
use crate::params::EngineParams;
use crate::vocab::{ActionVerb, Affordance, EventKind, TaskKind, Visibility};
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("decision task requires an anticipation")]
    MissingAnticipation,
    #[error("unknown dimension `{0}`")]
    UnknownDimension(String),
}

/// The four descriptive dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dimension {
    Semantic,
    Spatial,
    Temporal,
    Physical,
}

impl Dimension {
    pub const ALL: [Dimension; 4] = [
        Dimension::Semantic,
        Dimension::Spatial,
        Dimension::Temporal,
        Dimension::Physical,
    ];

    pub fn token(&self) -> &'static str {
        match self {
            Dimension::Semantic => "semantic",
            Dimension::Spatial => "spatial",
            Dimension::Temporal => "temporal",
            Dimension::Physical => "physical",
        }
    }

    pub fn from_token(token: &str) -> Option<Dimension> {
        match token {
            "semantic" => Some(Dimension::Semantic),
            "spatial" => Some(Dimension::Spatial),
            "temporal" => Some(Dimension::Temporal),
            "physical" => Some(Dimension::Physical),
            _ => None,
        }
    }
}

/// Element correspondence between ground truth and candidate.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Matching {
    /// Pairs (ground-truth id, candidate id).
    pub pairs: Vec<(ElementId, ElementId)>,
    pub unmatched_gt: Vec<ElementId>,
    pub unmatched_candidate: Vec<ElementId>,
}

impl Matching {
    /// Candidate id → ground-truth id.
    pub fn to_gt(&self) -> BTreeMap<&ElementId, &ElementId> {
        self.pairs.iter().map(|(g, c)| (c, g)).collect()
    }

    pub fn gt_of(&self, candidate: &ElementId) -> Option<&ElementId> {
        self.pairs
            .iter()
            .find(|(_, c)| c == candidate)
            .map(|(g, _)| g)
    }
}

fn positions_of(desc: &ScenarioDescription, id: &ElementId) -> Vec<(f64, Vec3)> {
    let mut out: Vec<(f64, Vec3)> = desc
        .spatial
        .iter()
        .filter(|a| &a.element_id == id)
        .map(|a| (a.t, a.position))
        .collect();
    if out.is_empty() {
        if let Some(e) = desc.element(id) {
            out = e.trajectory.iter().map(|s| (s.t, s.position)).collect();
        }
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

/// Matches candidate elements onto ground truth: exact ids first, the rest
/// greedily by same class and nearest position at the latest shared snapshot,
/// capped by the configured distance. Ties break lexicographically.
pub fn match_elements(
    gt: &ScenarioDescription,
    cand: &ScenarioDescription,
    params: &EngineParams,
) -> Matching {
    let gt_ids: BTreeSet<&ElementId> = gt.elements.iter().map(|e| &e.id).collect();
    let cand_ids: BTreeSet<&ElementId> = cand.elements.iter().map(|e| &e.id).collect();

    let mut pairs: Vec<(ElementId, ElementId)> = Vec::new();
    let mut gt_left: Vec<&ElementId> = Vec::new();
    let mut cand_left: BTreeSet<&ElementId> = BTreeSet::new();

    for id in &gt_ids {
        if cand_ids.contains(*id) {
            pairs.push(((*id).clone(), (*id).clone()));
        } else {
            gt_left.push(id);
        }
    }
    for id in &cand_ids {
        if !gt_ids.contains(*id) {
            cand_left.insert(id);
        }
    }

    for gt_id in gt_left.iter() {
        let gt_class = gt.class_of(gt_id);
        let gt_positions = positions_of(gt, gt_id);
        let mut best: Option<(f64, &ElementId)> = None;
        for cand_id in &cand_left {
            if cand.class_of(cand_id) != gt_class || gt_class.is_none() {
                continue;
            }
            let cand_positions = positions_of(cand, cand_id);
            // Latest shared snapshot within the time tolerance.
            let mut shared: Option<(f64, f64)> = None;
            for (tg, pg) in gt_positions.iter().rev() {
                if let Some((_, pc)) = cand_positions
                    .iter()
                    .rev()
                    .find(|(tc, _)| libm::fabs(tc - tg) <= params.scoring.time_tol)
                {
                    shared = Some((*tg, pg.sub(pc).norm()));
                    break;
                }
            }
            let Some((_, distance)) = shared else { continue };
            if distance > params.scoring.match_max_distance {
                continue;
            }
            let better = match &best {
                None => true,
                Some((d, id)) => {
                    distance < *d - 1e-12 || (libm::fabs(distance - d) <= 1e-12 && cand_id < id)
                }
            };
            if better {
                best = Some((distance, cand_id));
            }
        }
        if let Some((_, cand_id)) = best {
            cand_left.remove(cand_id);
            pairs.push(((*gt_id).clone(), cand_id.clone()));
        }
    }

    let matched_gt: BTreeSet<&ElementId> = pairs.iter().map(|(g, _)| g).collect();
    let unmatched_gt = gt_ids
        .iter()
        .filter(|id| !matched_gt.contains(*id))
        .map(|id| (*id).clone())
        .collect();
    let unmatched_candidate = cand_left.into_iter().cloned().collect();
    pairs.sort();
    Matching {
        pairs,
        unmatched_gt,
        unmatched_candidate,
    }
}

/// Micro-averaged precision/recall/F1 over counted items.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimensionScore {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub gt_items: f64,
    pub cand_items: f64,
}

impl DimensionScore {
    fn from_counts(matched: f64, gt_items: f64, cand_items: f64) -> DimensionScore {
        let precision = if cand_items <= 0.0 {
            1.0
        } else {
            matched / cand_items
        };
        let recall = if gt_items <= 0.0 { 1.0 } else { matched / gt_items };
        DimensionScore {
            precision,
            recall,
            f1: f1(precision, recall),
            gt_items,
            cand_items,
        }
    }

    fn from_rates(precision: f64, recall: f64, gt_items: f64, cand_items: f64) -> DimensionScore {
        DimensionScore {
            precision,
            recall,
            f1: f1(precision, recall),
            gt_items,
            cand_items,
        }
    }
}

fn f1(p: f64, r: f64) -> f64 {
    if p + r <= 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

/// Lower-cases and collapses whitespace: `" Green  T-Shirt "` → `"green t-shirt"`.
pub fn normalize_label(label: &str) -> String {
    let mut out = String::new();
    let mut pending_space = false;
    for token in label.split_whitespace() {
        if pending_space {
            out.push(' ');
        }
        for c in token.chars() {
            out.extend(c.to_lowercase());
        }
        pending_space = true;
    }
    out
}

/// A comparable item bucket: discrete items plus an optional ego distance.
#[derive(Debug, Clone, Default)]
struct Bucket {
    items: Vec<String>,
    distance: Option<f64>,
}

fn intersection_size(a: &[String], b: &[String]) -> usize {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort();
    b.sort();
    let (mut i, mut j, mut n) = (0usize, 0usize, 0usize);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            core::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
            core::cmp::Ordering::Less => i += 1,
            core::cmp::Ordering::Greater => j += 1,
        }
    }
    n
}

/// Buckets keyed by (ground-truth-side element id, snapshot time).
type Buckets = BTreeMap<ElementId, Vec<(f64, Bucket)>>;

fn semantic_buckets(
    desc: &ScenarioDescription,
    rename: &BTreeMap<&ElementId, &ElementId>,
) -> Buckets {
    let mut out: Buckets = BTreeMap::new();
    for a in &desc.semantic {
        let key = rename
            .get(&a.element_id)
            .map(|id| (*id).clone())
            .unwrap_or_else(|| a.element_id.clone());
        let mut items = Vec::new();
        items.push(format!("class:{}", a.class.token()));
        items.push(format!("state:{}", a.state.token()));
        for attr in &a.attributes {
            items.push(format!("attr:{}", normalize_label(attr)));
        }
        for aff in &a.affordances {
            items.push(format!("afford:{}", aff.token()));
        }
        out.entry(key).or_default().push((
            a.t,
            Bucket {
                items,
                distance: None,
            },
        ));
    }
    out
}

fn spatial_buckets(
    desc: &ScenarioDescription,
    rename: &BTreeMap<&ElementId, &ElementId>,
) -> Buckets {
    let mut out: Buckets = BTreeMap::new();
    for a in &desc.spatial {
        let key = rename
            .get(&a.element_id)
            .map(|id| (*id).clone())
            .unwrap_or_else(|| a.element_id.clone());
        let mut items = Vec::new();
        for (other, rel) in &a.topology {
            let other_key = rename
                .get(other)
                .map(|id| (*id).clone())
                .unwrap_or_else(|| other.clone());
            items.push(format!("rel:{}:{}", other_key, rel.token()));
        }
        out.entry(key).or_default().push((
            a.t,
            Bucket {
                items,
                distance: Some(a.distance_to_ego),
            },
        ));
    }
    out
}

struct BucketComparison {
    matched: f64,
    gt_items: f64,
    cand_items: f64,
    abs_distance_errors: Vec<f64>,
    misses: Vec<(ElementId, String)>,
}

fn compare_buckets(
    gt: &Buckets,
    cand: &Buckets,
    distance_tol: f64,
    time_tol: f64,
) -> BucketComparison {
    let mut matched = 0.0;
    let mut gt_items = 0.0;
    let mut cand_items = 0.0;
    let mut abs_errors = Vec::new();
    let mut misses = Vec::new();

    let count = |bucket: &Bucket| bucket.items.len() as f64 + bucket.distance.map_or(0.0, |_| 1.0);

    let mut consumed: BTreeMap<&ElementId, Vec<bool>> = cand
        .iter()
        .map(|(id, v)| (id, alloc::vec![false; v.len()]))
        .collect();

    for (id, gt_snaps) in gt {
        for (tg, gb) in gt_snaps {
            gt_items += count(gb);
            let Some(cand_snaps) = cand.get(id) else { continue };
            let flags = consumed.get_mut(id).expect("flag row exists");
            let mut pick: Option<(usize, f64)> = None;
            for (i, (tc, _)) in cand_snaps.iter().enumerate() {
                if flags[i] {
                    continue;
                }
                let dt = libm::fabs(tc - tg);
                if dt <= time_tol && pick.map(|(_, d)| dt < d).unwrap_or(true) {
                    pick = Some((i, dt));
                }
            }
            let Some((i, _)) = pick else { continue };
            flags[i] = true;
            let cb = &cand_snaps[i].1;
            matched += intersection_size(&gb.items, &cb.items) as f64;
            if let (Some(dg), Some(dc)) = (gb.distance, cb.distance) {
                let err = libm::fabs(dg - dc);
                abs_errors.push(err);
                if err <= distance_tol {
                    matched += 1.0;
                } else {
                    misses.push((
                        id.clone(),
                        format!("distance off by {err:.3} m at t={tg} (tolerance {distance_tol})"),
                    ));
                }
            }
        }
    }
    for cand_snaps in cand.values() {
        for (_, cb) in cand_snaps {
            cand_items += count(cb);
        }
    }
    BucketComparison {
        matched,
        gt_items,
        cand_items,
        abs_distance_errors: abs_errors,
        misses,
    }
}

fn interval_agreement(
    gt: &[(String, f64, f64)],
    cand: &[(String, f64, f64)],
) -> (f64, f64, f64) {
    let dur = |v: &[(String, f64, f64)]| v.iter().map(|(_, a, b)| b - a).sum::<f64>();
    let mut agree = 0.0;
    for (sg, ag, bg) in gt {
        for (sc, ac, bc) in cand {
            if sg == sc {
                let lo = ag.max(*ac);
                let hi = bg.min(*bc);
                if hi > lo {
                    agree += hi - lo;
                }
            }
        }
    }
    (agree, dur(gt), dur(cand))
}

fn temporal_sequences(
    ann: &TemporalAnnotation,
) -> (Vec<(String, f64, f64)>, Vec<(String, f64, f64)>) {
    let states = ann
        .state_sequence
        .iter()
        .map(|s| {
            (
                String::from(s.state.token()),
                s.interval.start,
                s.interval.end,
            )
        })
        .collect();
    let vis = ann
        .visibility_sequence
        .iter()
        .map(|s| {
            (
                String::from(s.visibility.token()),
                s.interval.start,
                s.interval.end,
            )
        })
        .collect();
    (states, vis)
}

fn score_temporal(
    gt: &ScenarioDescription,
    cand: &ScenarioDescription,
    matching: &Matching,
) -> DimensionScore {
    let rename = matching.to_gt();
    let gt_by_id: BTreeMap<&ElementId, &TemporalAnnotation> =
        gt.temporal.iter().map(|a| (&a.element_id, a)).collect();
    let cand_by_id: BTreeMap<ElementId, &TemporalAnnotation> = cand
        .temporal
        .iter()
        .map(|a| {
            let key = rename
                .get(&a.element_id)
                .map(|id| (*id).clone())
                .unwrap_or_else(|| a.element_id.clone());
            (key, a)
        })
        .collect();

    // Continuous components: state and visibility agreement durations.
    let mut seq = (0.0, 0.0, 0.0);
    let mut vis = (0.0, 0.0, 0.0);
    // Discrete component: ordering tuples.
    let mut ord = (0.0, 0.0, 0.0);

    let mut all_keys: BTreeSet<&ElementId> = gt_by_id.keys().copied().collect();
    all_keys.extend(cand_by_id.keys());

    for key in all_keys {
        let g = gt_by_id.get(key);
        let c = cand_by_id.get(key);
        let (g_states, g_vis) = g.map(|a| temporal_sequences(a)).unwrap_or_default();
        let (c_states, c_vis) = c.map(|a| temporal_sequences(a)).unwrap_or_default();
        let (a, dg, dc) = interval_agreement(&g_states, &c_states);
        seq.0 += a;
        seq.1 += dg;
        seq.2 += dc;
        let (a, dg, dc) = interval_agreement(&g_vis, &c_vis);
        vis.0 += a;
        vis.1 += dg;
        vis.2 += dc;

        let mapped_orderings = |ann: &TemporalAnnotation| -> BTreeSet<(ElementId, String)> {
            ann.orderings
                .iter()
                .map(|(other, rel)| {
                    let other_key = rename
                        .get(other)
                        .map(|id| (*id).clone())
                        .unwrap_or_else(|| other.clone());
                    (other_key, String::from(rel.token()))
                })
                .collect()
        };
        let go = g.map(|a| mapped_orderings(a)).unwrap_or_default();
        let co = c.map(|a| mapped_orderings(a)).unwrap_or_default();
        ord.0 += go.intersection(&co).count() as f64;
        ord.1 += go.len() as f64;
        ord.2 += co.len() as f64;
    }

    let mut precisions = Vec::new();
    let mut recalls = Vec::new();
    for (matched, gt_total, cand_total) in [seq, vis, ord] {
        if gt_total <= 0.0 && cand_total <= 0.0 {
            continue;
        }
        precisions.push(if cand_total <= 0.0 {
            1.0
        } else {
            matched / cand_total
        });
        recalls.push(if gt_total <= 0.0 { 1.0 } else { matched / gt_total });
    }
    if precisions.is_empty() {
        return DimensionScore::from_rates(1.0, 1.0, 0.0, 0.0);
    }
    let p = precisions.iter().sum::<f64>() / precisions.len() as f64;
    let r = recalls.iter().sum::<f64>() / recalls.len() as f64;
    DimensionScore::from_rates(p, r, seq.1 + vis.1 + ord.1, seq.2 + vis.2 + ord.2)
}

fn score_physical(
    gt: &ScenarioDescription,
    cand: &ScenarioDescription,
    matching: &Matching,
) -> DimensionScore {
    let rename = matching.to_gt();
    let items_of = |ann: &crate::model::PhysicalAnnotation| -> Vec<String> {
        let mut items = Vec::new();
        items.push(format!("model:{}", ann.model.token()));
        for tag in &ann.material_tags {
            items.push(format!("material:{}", normalize_label(tag)));
        }
        for c in &ann.constraint_set {
            items.push(format!("constraint:{}", c.kind.token()));
        }
        for v in &ann.violations {
            items.push(format!("violation:{}", v.constraint_id));
        }
        items
    };

    let mut gt_map: BTreeMap<ElementId, Vec<String>> = BTreeMap::new();
    for a in &gt.physical {
        gt_map.insert(a.element_id.clone(), items_of(a));
    }
    let mut cand_map: BTreeMap<ElementId, Vec<String>> = BTreeMap::new();
    for a in &cand.physical {
        let key = rename
            .get(&a.element_id)
            .map(|id| (*id).clone())
            .unwrap_or_else(|| a.element_id.clone());
        cand_map.insert(key, items_of(a));
    }

    let mut matched = 0.0;
    let mut gt_items = 0.0;
    let mut cand_items = 0.0;
    for (id, items) in &gt_map {
        gt_items += items.len() as f64;
        if let Some(c) = cand_map.get(id) {
            matched += intersection_size(items, c) as f64;
        }
    }
    for items in cand_map.values() {
        cand_items += items.len() as f64;
    }
    DimensionScore::from_counts(matched, gt_items, cand_items)
}

/// Scores one dimension of a candidate against ground truth.
pub fn score_dimension(
    gt: &ScenarioDescription,
    cand: &ScenarioDescription,
    matching: &Matching,
    dim: Dimension,
    params: &EngineParams,
) -> DimensionScore {
    let rename = matching.to_gt();
    match dim {
        Dimension::Semantic => {
            let g = semantic_buckets(gt, &BTreeMap::new());
            let c = semantic_buckets(cand, &rename);
            let cmp = compare_buckets(&g, &c, params.scoring.distance_tol, params.scoring.time_tol);
            DimensionScore::from_counts(cmp.matched, cmp.gt_items, cmp.cand_items)
        }
        Dimension::Spatial => {
            let g = spatial_buckets(gt, &BTreeMap::new());
            let c = spatial_buckets(cand, &rename);
            let cmp = compare_buckets(&g, &c, params.scoring.distance_tol, params.scoring.time_tol);
            DimensionScore::from_counts(cmp.matched, cmp.gt_items, cmp.cand_items)
        }
        Dimension::Temporal => score_temporal(gt, cand, matching),
        Dimension::Physical => score_physical(gt, cand, matching),
    }
}

/// String-keyed entry point, for callers that take the dimension by name.
pub fn score_dimension_named(
    gt: &ScenarioDescription,
    cand: &ScenarioDescription,
    matching: &Matching,
    dim: &str,
    params: &EngineParams,
) -> Result<DimensionScore, EvalError> {
    let dim = Dimension::from_token(dim).ok_or_else(|| EvalError::UnknownDimension(dim.into()))?;
    Ok(score_dimension(gt, cand, matching, dim, params))
}

/// Anticipation sub-scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnticipationScore {
    pub events: DimensionScore,
    pub event_time_mae: Option<f64>,
    pub ade: Option<f64>,
    pub fde: Option<f64>,
}

/// One drill-down note tied to an element or event.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreNote {
    pub element_id: Option<ElementId>,
    pub note: String,
}

/// The full understanding score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnderstandingScore {
    pub semantic: DimensionScore,
    pub spatial: DimensionScore,
    pub temporal: DimensionScore,
    pub physical: DimensionScore,
    /// Mean |Δ distance-to-ego| over compared spatial snapshots, metres.
    pub spatial_mean_abs_distance_error: Option<f64>,
    pub anticipation: AnticipationScore,
    /// Weighted mean of the four dimension F1 scores.
    pub aggregate: f64,
    pub matching: Matching,
    pub notes: Vec<ScoreNote>,
}

impl UnderstandingScore {
    pub fn dimension(&self, dim: Dimension) -> &DimensionScore {
        match dim {
            Dimension::Semantic => &self.semantic,
            Dimension::Spatial => &self.spatial,
            Dimension::Temporal => &self.temporal,
            Dimension::Physical => &self.physical,
        }
    }
}

fn score_events(
    gt_ant: Option<&ScenarioAnticipation>,
    cand_ant: Option<&ScenarioAnticipation>,
    matching: &Matching,
    params: &EngineParams,
    notes: &mut Vec<ScoreNote>,
) -> (DimensionScore, Option<f64>) {
    let rename = matching.to_gt();
    let mapped = |ant: &ScenarioAnticipation, remap: bool| -> Vec<(EventKind, Vec<ElementId>, f64)> {
        ant.predicted_events
            .iter()
            .map(|e| {
                let mut ids: Vec<ElementId> = e
                    .elements
                    .iter()
                    .map(|id| {
                        if remap {
                            rename.get(id).map(|g| (*g).clone()).unwrap_or_else(|| id.clone())
                        } else {
                            id.clone()
                        }
                    })
                    .collect();
                ids.sort();
                (e.kind.clone(), ids, e.t)
            })
            .collect()
    };
    let gt_events = gt_ant.map(|a| mapped(a, false)).unwrap_or_default();
    let cand_events = cand_ant.map(|a| mapped(a, true)).unwrap_or_default();

    let mut consumed = alloc::vec![false; cand_events.len()];
    let mut matched = 0usize;
    let mut dt_sum = 0.0;
    for (kind, ids, tg) in &gt_events {
        let mut pick: Option<(usize, f64)> = None;
        for (i, (ck, cids, tc)) in cand_events.iter().enumerate() {
            if consumed[i] || ck != kind || cids != ids {
                continue;
            }
            let dt = libm::fabs(tc - tg);
            if dt <= params.scoring.event_time_tol && pick.map(|(_, d)| dt < d).unwrap_or(true) {
                pick = Some((i, dt));
            }
        }
        match pick {
            Some((i, dt)) => {
                consumed[i] = true;
                matched += 1;
                dt_sum += dt;
            }
            None => notes.push(ScoreNote {
                element_id: ids.first().cloned(),
                note: format!(
                    "missed predicted event `{}` for [{}] at t={tg}",
                    kind.token(),
                    ids.iter()
                        .map(|i| i.as_str())
                        .collect::<Vec<_>>()
                        .join(", ")
                ),
            }),
        }
    }
    let score = DimensionScore::from_counts(
        matched as f64,
        gt_events.len() as f64,
        cand_events.len() as f64,
    );
    let mae = if matched > 0 {
        Some(dt_sum / matched as f64)
    } else if gt_events.is_empty() && cand_events.is_empty() {
        Some(0.0)
    } else {
        None
    };
    (score, mae)
}

fn interp_position(samples: &[(f64, Vec3)], t: f64) -> Option<Vec3> {
    if samples.is_empty() {
        return None;
    }
    if t < samples[0].0 - 1e-9 || t > samples[samples.len() - 1].0 + 1e-9 {
        return None;
    }
    if let Some((_, p)) = samples.iter().find(|(ts, _)| libm::fabs(ts - t) <= 1e-9) {
        return Some(*p);
    }
    let hi = samples.partition_point(|(ts, _)| *ts < t);
    if hi == 0 || hi >= samples.len() {
        return None;
    }
    let (t0, p0) = samples[hi - 1];
    let (t1, p1) = samples[hi];
    Some(p0.lerp(&p1, (t - t0) / (t1 - t0)))
}

fn score_trajectories(
    gt_ant: Option<&ScenarioAnticipation>,
    cand_ant: Option<&ScenarioAnticipation>,
    matching: &Matching,
) -> (Option<f64>, Option<f64>) {
    let (Some(gt_ant), Some(cand_ant)) = (gt_ant, cand_ant) else {
        return (None, None);
    };
    let mut displacement_sum = 0.0;
    let mut displacement_n = 0usize;
    let mut final_sum = 0.0;
    let mut final_n = 0usize;
    for (gt_id, cand_id) in &matching.pairs {
        let Some(gt_traj) = gt_ant.predicted_trajectories.get(gt_id) else {
            continue;
        };
        let Some(cand_traj) = cand_ant.predicted_trajectories.get(cand_id) else {
            continue;
        };
        let cand_points: Vec<(f64, Vec3)> =
            cand_traj.iter().map(|s| (s.t, s.position)).collect();
        let mut last_err = None;
        for s in gt_traj {
            if let Some(p) = interp_position(&cand_points, s.t) {
                let err = p.sub(&s.position).norm();
                displacement_sum += err;
                displacement_n += 1;
                last_err = Some(err);
            }
        }
        if let Some(err) = last_err {
            final_sum += err;
            final_n += 1;
        }
    }
    (
        (displacement_n > 0).then(|| displacement_sum / displacement_n as f64),
        (final_n > 0).then(|| final_sum / final_n as f64),
    )
}

/// Scores a candidate understanding (description plus optional anticipation)
/// against ground truth. Annotation list order never affects the result.
pub fn score_understanding(
    gt: &ScenarioDescription,
    gt_ant: Option<&ScenarioAnticipation>,
    cand: &ScenarioDescription,
    cand_ant: Option<&ScenarioAnticipation>,
    params: &EngineParams,
) -> UnderstandingScore {
    let matching = match_elements(gt, cand, params);
    let mut notes: Vec<ScoreNote> = Vec::new();

    for id in &matching.unmatched_gt {
        notes.push(ScoreNote {
            element_id: Some(id.clone()),
            note: String::from("ground-truth element has no candidate counterpart"),
        });
    }
    for id in &matching.unmatched_candidate {
        notes.push(ScoreNote {
            element_id: Some(id.clone()),
            note: String::from("candidate element matches nothing in ground truth"),
        });
    }

    let semantic = score_dimension(gt, cand, &matching, Dimension::Semantic, params);
    let rename = matching.to_gt();
    let g = spatial_buckets(gt, &BTreeMap::new());
    let c = spatial_buckets(cand, &rename);
    let spatial_cmp = compare_buckets(&g, &c, params.scoring.distance_tol, params.scoring.time_tol);
    let spatial =
        DimensionScore::from_counts(spatial_cmp.matched, spatial_cmp.gt_items, spatial_cmp.cand_items);
    for (id, miss) in &spatial_cmp.misses {
        notes.push(ScoreNote {
            element_id: Some(id.clone()),
            note: miss.clone(),
        });
    }
    let temporal = score_temporal(gt, cand, &matching);
    let physical = score_physical(gt, cand, &matching);

    let (events, event_time_mae) = score_events(gt_ant, cand_ant, &matching, params, &mut notes);
    let (ade, fde) = score_trajectories(gt_ant, cand_ant, &matching);

    let weights = params.scoring.dimension_weights;
    let weight_sum: f64 = weights.iter().sum();
    let aggregate = (semantic.f1 * weights[0]
        + spatial.f1 * weights[1]
        + temporal.f1 * weights[2]
        + physical.f1 * weights[3])
        / if weight_sum > 0.0 { weight_sum } else { 1.0 };

    let spatial_mean_abs_distance_error = if spatial_cmp.abs_distance_errors.is_empty() {
        None
    } else {
        Some(
            spatial_cmp.abs_distance_errors.iter().sum::<f64>()
                / spatial_cmp.abs_distance_errors.len() as f64,
        )
    };

    UnderstandingScore {
        semantic,
        spatial,
        temporal,
        physical,
        spatial_mean_abs_distance_error,
        anticipation: AnticipationScore {
            events,
            event_time_mae,
            ade,
            fde,
        },
        aggregate,
        matching,
        notes,
    }
}

/// Elements whose current or predicted footprint enters the ego corridor.
struct ConflictSet {
    vulnerable: Vec<ElementId>,
    occluded_vulnerable: Vec<ElementId>,
    runnable: Vec<ElementId>,
    solid: Vec<ElementId>,
}

fn latest_spatial<'a>(
    desc: &'a ScenarioDescription,
    id: &ElementId,
) -> Option<&'a SpatialAnnotation> {
    desc.spatial
        .iter()
        .filter(|a| &a.element_id == id)
        .max_by(|a, b| a.t.total_cmp(&b.t))
}

fn ego_corridor(desc: &ScenarioDescription, params: &EngineParams) -> Option<Footprint> {
    let ego = latest_spatial(desc, &desc.ego_id)?;
    let heading = ego.orientation.yaw();
    let forward = Vec2::new(libm::cos(heading), libm::sin(heading));
    let len = params.decision.corridor_length;
    let center = Vec2::new(ego.position.x(), ego.position.y())
        .add(&forward.scale(ego.occupancy.length * 0.5 + len * 0.5));
    Some(Footprint::new(
        center,
        len * 0.5,
        ego.occupancy.width * 0.5 + params.decision.corridor_margin,
        heading,
    ))
}

fn occluded_at_present(desc: &ScenarioDescription, id: &ElementId) -> bool {
    desc.temporal_for(id)
        .map(|ann| {
            ann.visibility_sequence
                .last()
                .map(|v| v.visibility == Visibility::Occluded)
                .unwrap_or(false)
        })
        .unwrap_or(false)
}

fn conflicts(
    desc: &ScenarioDescription,
    ant: Option<&ScenarioAnticipation>,
    params: &EngineParams,
) -> ConflictSet {
    let mut set = ConflictSet {
        vulnerable: Vec::new(),
        occluded_vulnerable: Vec::new(),
        runnable: Vec::new(),
        solid: Vec::new(),
    };
    let Some(corridor) = ego_corridor(desc, params) else {
        return set;
    };
    for element in &desc.elements {
        if element.id == desc.ego_id {
            continue;
        }
        let Some(spatial) = latest_spatial(desc, &element.id) else {
            continue;
        };
        let mut hit = footprint_distance(
            &corridor,
            &Footprint::from_pose(&spatial.position, &spatial.orientation, &spatial.occupancy),
        ) == 0.0;
        if !hit {
            if let Some(ant) = ant {
                if let Some(samples) = ant.predicted_trajectories.get(&element.id) {
                    hit = samples.iter().any(|s| {
                        footprint_distance(
                            &corridor,
                            &Footprint::from_pose(&s.position, &s.orientation, &spatial.occupancy),
                        ) == 0.0
                    });
                }
            }
        }
        if !hit {
            continue;
        }
        let class = desc.class_of(&element.id);
        let vulnerable = class.map(|c| c.is_vulnerable()).unwrap_or(false);
        if vulnerable {
            if occluded_at_present(desc, &element.id) {
                set.occluded_vulnerable.push(element.id.clone());
            }
            set.vulnerable.push(element.id.clone());
            continue;
        }
        let runnable = desc
            .semantic
            .iter()
            .filter(|a| a.element_id == element.id)
            .max_by(|a, b| a.t.total_cmp(&b.t))
            .map(|a| a.affordances.contains(&Affordance::CanBeRunOver))
            .unwrap_or(false);
        if runnable {
            set.runnable.push(element.id.clone());
        } else {
            set.solid.push(element.id.clone());
        }
    }
    set
}

fn spatial_ref(desc: &ScenarioDescription, id: &ElementId) -> Option<AnnotationRef> {
    latest_spatial(desc, id).map(|a| AnnotationRef::Spatial {
        element_id: id.clone(),
        t: a.t,
    })
}

fn semantic_ref(desc: &ScenarioDescription, id: &ElementId) -> Option<AnnotationRef> {
    desc.semantic
        .iter()
        .filter(|a| &a.element_id == id)
        .max_by(|a, b| a.t.total_cmp(&b.t))
        .map(|a| AnnotationRef::Semantic {
            element_id: id.clone(),
            t: a.t,
        })
}

fn reappear_refs(ant: Option<&ScenarioAnticipation>, id: &ElementId) -> Vec<AnnotationRef> {
    ant.map(|a| {
        a.predicted_events
            .iter()
            .filter(|e| e.kind == EventKind::Reappears && e.elements.contains(id))
            .map(|e| AnnotationRef::Event {
                kind: e.kind.clone(),
                t: e.t,
            })
            .collect()
    })
    .unwrap_or_default()
}

/// Task-dependent decision function. Deterministic rule priority:
/// yield on any vulnerable or solid conflict, proceed slowly when every
/// conflict can be run over, otherwise proceed.
pub fn decide(
    desc: &ScenarioDescription,
    ant: Option<&ScenarioAnticipation>,
    task: &TaskSpec,
    params: &EngineParams,
) -> Result<Action, EvalError> {
    match task.kind {
        TaskKind::Decision => {
            let ant = ant.ok_or(EvalError::MissingAnticipation)?;
            let set = conflicts(desc, Some(ant), params);
            if !set.vulnerable.is_empty() || !set.occluded_vulnerable.is_empty() {
                let mut justification = Vec::new();
                for id in &set.vulnerable {
                    justification.extend(spatial_ref(desc, id));
                }
                for id in &set.occluded_vulnerable {
                    justification.push(AnnotationRef::Temporal {
                        element_id: id.clone(),
                    });
                    justification.extend(reappear_refs(Some(ant), id));
                }
                return Ok(Action {
                    verb: ActionVerb::Yield,
                    justification,
                });
            }
            if !set.solid.is_empty() {
                let justification = set
                    .solid
                    .iter()
                    .filter_map(|id| spatial_ref(desc, id))
                    .collect();
                return Ok(Action {
                    verb: ActionVerb::Yield,
                    justification,
                });
            }
            if !set.runnable.is_empty() {
                let justification = set
                    .runnable
                    .iter()
                    .filter_map(|id| semantic_ref(desc, id))
                    .collect();
                return Ok(Action {
                    verb: ActionVerb::ProceedSlow,
                    justification,
                });
            }
            Ok(Action {
                verb: ActionVerb::Proceed,
                justification: Vec::new(),
            })
        }
        TaskKind::Interaction => {
            let set = conflicts(desc, ant, params);
            if set.occluded_vulnerable.is_empty() && set.vulnerable.is_empty() {
                return Ok(Action {
                    verb: ActionVerb::Proceed,
                    justification: Vec::new(),
                });
            }
            let mut justification = Vec::new();
            for id in &set.occluded_vulnerable {
                justification.push(AnnotationRef::Temporal {
                    element_id: id.clone(),
                });
                justification.extend(reappear_refs(ant, id));
            }
            for id in &set.vulnerable {
                if !set.occluded_vulnerable.contains(id) {
                    justification.extend(spatial_ref(desc, id));
                }
            }
            Ok(Action {
                verb: ActionVerb::InformDriver,
                justification,
            })
        }
        TaskKind::Learning => {
            // Yielding elements are behavioural cues worth remembering.
            let mut justification = Vec::new();
            let mut seen = BTreeSet::new();
            for a in &desc.semantic {
                if a.state == crate::vocab::MotionState::Yielding
                    && a.element_id != desc.ego_id
                    && seen.insert(a.element_id.clone())
                {
                    justification.extend(semantic_ref(desc, &a.element_id));
                }
            }
            Ok(Action {
                verb: ActionVerb::StoreObservation,
                justification,
            })
        }
        TaskKind::Perception => {
            let mut justification = Vec::new();
            for element in &desc.elements {
                if element.id != desc.ego_id {
                    justification.extend(semantic_ref(desc, &element.id));
                }
            }
            Ok(Action {
                verb: ActionVerb::StoreObservation,
                justification,
            })
        }
    }
}
