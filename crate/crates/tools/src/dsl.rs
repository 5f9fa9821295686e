//! The annotation DSL: a line-oriented block grammar for candidate
//! descriptions (structured model output) and for exporting derived ground
//! truth. Grammar reference in docs/dsl.md.
//!
//! Parsing is total: arbitrary input yields a list of located errors, never a
//! crash. Unknown keys inside known blocks warn instead of failing and never
//! reach scoring. Serialisation is deterministic — blocks emit in canonical
//! order and numbers print in shortest exact decimal form — so serialising a
//! canonically ordered description and parsing it back is the identity.

use scenarium_core::math::{Mat3, Vec3};
use scenarium_core::model::{
    Action, AnnotationRef, Constraint, Context, DeltaChange, Element, ElementId, Extent,
    LayerEntry, ModalitySample, ModalityStream, ParamValue, PhysicalAnnotation, PredictedEvent,
    Rule, ScenarioAnticipation, ScenarioDescription, SemanticAnnotation, SpatialAnnotation,
    StateInterval, StateSample, TemporalAnnotation, TimeInterval, TopologyDelta,
    Utterance, ViolationRecord, VisibilityInterval,
};
use scenarium_core::vocab::{
    ActionVerb, Affordance, ConstraintKind, ElementClass, EventKind, IntervalOrder, ModalityKind,
    ModelKind, MotionState, Quantity, RuleKind, SpatialRelation, TaskKind, Unit, Visibility,
};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use crate::{ParseError, ParseWarning};

/// Result of parsing an annotation document.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedDocument {
    pub description: ScenarioDescription,
    pub anticipation: Option<ScenarioAnticipation>,
    pub actions: Vec<(TaskKind, Action)>,
    pub warnings: Vec<ParseWarning>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Tag {
    Sem,
    Spat,
    Temp,
    Phys,
    Anticipate,
    Action,
    Traj,
    Layer,
    Rule,
    Modality,
    Driver,
}

impl Tag {
    fn parse(s: &str) -> Option<Tag> {
        match s {
            "SEM" => Some(Tag::Sem),
            "SPAT" => Some(Tag::Spat),
            "TEMP" => Some(Tag::Temp),
            "PHYS" => Some(Tag::Phys),
            "ANTICIPATE" => Some(Tag::Anticipate),
            "ACTION" => Some(Tag::Action),
            "TRAJ" => Some(Tag::Traj),
            "LAYER" => Some(Tag::Layer),
            "RULE" => Some(Tag::Rule),
            "MODALITY" => Some(Tag::Modality),
            "DRIVER" => Some(Tag::Driver),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum HeaderTime {
    None,
    At(f64),
    Interval(f64, f64),
}

/// One whitespace- or quote-delimited token with its column.
#[derive(Debug, Clone, PartialEq)]
struct Token {
    column: usize,
    text: String,
    quoted: bool,
}

fn tokenize(line: &str, line_no: usize, errors: &mut Vec<ParseError>) -> Vec<Token> {
    let mut tokens = Vec::new();
    let mut chars = line.char_indices().peekable();
    while let Some((start, c)) = chars.next() {
        if c.is_whitespace() {
            continue;
        }
        if c == '"' {
            let mut text = String::new();
            let mut closed = false;
            while let Some((_, c)) = chars.next() {
                match c {
                    '"' => {
                        closed = true;
                        break;
                    }
                    '\\' => match chars.next() {
                        Some((_, escaped)) => text.push(escaped),
                        None => break,
                    },
                    other => text.push(other),
                }
            }
            if !closed {
                errors.push(ParseError::new(line_no, start + 1, "unterminated string"));
            }
            tokens.push(Token {
                column: start + 1,
                text,
                quoted: true,
            });
        } else {
            let mut text = String::new();
            text.push(c);
            while let Some((_, next)) = chars.peek() {
                if next.is_whitespace() || *next == '"' {
                    break;
                }
                text.push(*next);
                chars.next();
            }
            tokens.push(Token {
                column: start + 1,
                text,
                quoted: false,
            });
        }
    }
    tokens
}

struct LineCtx<'a> {
    line_no: usize,
    tokens: &'a [Token],
}

impl<'a> LineCtx<'a> {
    fn err(&self, idx: usize, message: impl Into<String>) -> ParseError {
        let column = self
            .tokens
            .get(idx)
            .map(|t| t.column)
            .or_else(|| self.tokens.last().map(|t| t.column + t.text.len()))
            .unwrap_or(1);
        ParseError::new(self.line_no, column, message)
    }

    fn number(&self, idx: usize, what: &str) -> Result<f64, ParseError> {
        let token = self
            .tokens
            .get(idx)
            .ok_or_else(|| self.err(idx, format!("missing {what}")))?;
        let v: f64 = token
            .text
            .parse()
            .map_err(|_| self.err(idx, format!("{what} is not a number: `{}`", token.text)))?;
        if !v.is_finite() {
            return Err(self.err(idx, format!("{what} must be finite")));
        }
        Ok(v)
    }

    fn unit(&self, idx: usize, expected: Unit) -> Result<(), ParseError> {
        match self.tokens.get(idx) {
            Some(t) if Unit::from_token(&t.text) == Some(expected) => Ok(()),
            Some(t) => Err(self.err(
                idx,
                format!("expected unit `{}`, got `{}`", expected.token(), t.text),
            )),
            None => Err(self.err(
                idx,
                format!("quantity requires unit `{}`", expected.token()),
            )),
        }
    }

    fn word(&self, idx: usize, what: &str) -> Result<&'a str, ParseError> {
        self.tokens
            .get(idx)
            .map(|t| t.text.as_str())
            .ok_or_else(|| self.err(idx, format!("missing {what}")))
    }

    /// Remaining tokens joined with single spaces (free-text values).
    fn rest_text(&self, idx: usize) -> String {
        self.tokens[idx..]
            .iter()
            .map(|t| t.text.as_str())
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// Finds `@ t=<num>` starting at idx; returns (t, tokens consumed from idx).
    fn at_time(&self, idx: usize) -> Result<f64, ParseError> {
        match self.tokens.get(idx).map(|t| t.text.as_str()) {
            Some("@") => {}
            _ => return Err(self.err(idx, "expected `@ t=<seconds>`")),
        }
        let spec = self.word(idx + 1, "`t=<seconds>`")?;
        let Some(v) = spec.strip_prefix("t=") else {
            return Err(self.err(idx + 1, "expected `t=<seconds>`"));
        };
        v.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| self.err(idx + 1, format!("time is not a number: `{v}`")))
    }
}

/// Reference to another element, remembered for the dangling-id pass.
struct PendingRef {
    line: usize,
    column: usize,
    id: ElementId,
}

#[derive(Default)]
struct DocBuilder {
    scenario_id: Option<String>,
    window: Option<(f64, f64)>,
    ego: Option<ElementId>,
    horizon: Option<f64>,
    dt: Option<f64>,
    base: Option<String>,
    element_order: Vec<ElementId>,
    trajectories: BTreeMap<ElementId, Vec<StateSample>>,
    semantic: Vec<SemanticAnnotation>,
    spatial: Vec<SpatialAnnotation>,
    temporal: Vec<TemporalAnnotation>,
    physical: Vec<PhysicalAnnotation>,
    layers: BTreeMap<u8, Vec<LayerEntry>>,
    rules: Vec<Rule>,
    driver_channel: Option<Vec<Utterance>>,
    modalities: Vec<ModalityStream>,
    predicted: BTreeMap<ElementId, Vec<StateSample>>,
    events: Vec<PredictedEvent>,
    deltas: Vec<TopologyDelta>,
    actions: Vec<(TaskKind, Action)>,
    refs: Vec<PendingRef>,
    seen_blocks: BTreeSet<String>,
    has_anticipation_block: bool,
}

impl DocBuilder {
    fn register_element(&mut self, id: &ElementId) {
        if !self.element_order.contains(id) {
            self.element_order.push(id.clone());
        }
    }

    fn reference(&mut self, line: usize, column: usize, id: &ElementId) {
        self.refs.push(PendingRef {
            line,
            column,
            id: id.clone(),
        });
    }
}

/// Open block being filled.
enum Block {
    Sem(SemanticAnnotation),
    Spat(SpatialAnnotation),
    Temp(TemporalAnnotation),
    Phys(PhysicalAnnotation),
    Traj(ElementId),
    Anticipate(Option<ElementId>),
    Action(TaskKind, Action),
    Layer(u8),
    Rule(Rule),
    Modality(ModalityStream),
    Driver,
}

impl Block {
    fn close(self, doc: &mut DocBuilder) {
        match self {
            Block::Sem(a) => doc.semantic.push(a),
            Block::Spat(a) => doc.spatial.push(a),
            Block::Temp(a) => doc.temporal.push(a),
            Block::Phys(a) => doc.physical.push(a),
            Block::Rule(r) => doc.rules.push(r),
            Block::Modality(m) => doc.modalities.push(m),
            Block::Action(kind, action) => doc.actions.push((kind, action)),
            Block::Traj(_) | Block::Anticipate(_) | Block::Layer(_) | Block::Driver => {}
        }
    }
}

/// Parses an annotation document. All errors are collected; any error makes
/// the whole parse fail with the full list.
pub fn parse_annotation_text(text: &str) -> Result<ParsedDocument, Vec<ParseError>> {
    let mut errors: Vec<ParseError> = Vec::new();
    let mut warnings: Vec<ParseWarning> = Vec::new();
    let mut doc = DocBuilder::default();
    let mut block: Option<Block> = None;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let tokens = tokenize(raw, line_no, &mut errors);
        if tokens.is_empty() {
            continue;
        }
        let ctx = LineCtx {
            line_no,
            tokens: &tokens,
        };

        if tokens[0].text.starts_with('@') && !tokens[0].quoted {
            if let Some(b) = block.take() {
                b.close(&mut doc);
            }
            parse_directive(&ctx, &mut doc, &mut errors);
            continue;
        }

        if tokens[0].text.starts_with('[') && !tokens[0].quoted {
            if let Some(b) = block.take() {
                b.close(&mut doc);
            }
            block = parse_header(&ctx, &mut doc, &mut errors, &mut warnings);
            continue;
        }

        // key: value line.
        let Some(current) = block.as_mut() else {
            errors.push(ctx.err(0, "expected a block header or directive"));
            continue;
        };
        let key_token = &tokens[0].text;
        let Some(key) = key_token.strip_suffix(':') else {
            errors.push(ctx.err(0, format!("expected `key:`, got `{key_token}`")));
            continue;
        };
        if let Err(e) = parse_kv(key, &ctx, current, &mut doc, &mut warnings) {
            errors.push(e);
        }
    }
    if let Some(b) = block.take() {
        b.close(&mut doc);
    }

    // Ego is always a known element, declared or not.
    let ego = doc.ego.clone().unwrap_or_else(|| ElementId::from("ego"));
    doc.register_element(&ego);

    // Dangling references.
    let known: BTreeSet<&ElementId> = doc.element_order.iter().collect();
    for r in &doc.refs {
        if !known.contains(&r.id) {
            errors.push(ParseError::new(
                r.line,
                r.column,
                format!("dangling element reference `{}`", r.id),
            ));
        }
    }

    if !errors.is_empty() {
        return Err(errors);
    }
    Ok(assemble(doc, warnings))
}

fn parse_directive(ctx: &LineCtx<'_>, doc: &mut DocBuilder, errors: &mut Vec<ParseError>) {
    let name = ctx.tokens[0].text.as_str();
    let mut take = || -> Result<(), ParseError> {
        match name {
            "@scenario" => {
                doc.scenario_id = Some(ctx.word(1, "scenario id")?.to_string());
            }
            "@window" => {
                let a = ctx.number(1, "window start")?;
                let b = ctx.number(2, "window end")?;
                doc.window = Some((a, b));
            }
            "@ego" => {
                doc.ego = Some(ElementId::from(ctx.word(1, "ego id")?));
            }
            "@element" => {
                let id = ElementId::from(ctx.word(1, "element id")?);
                doc.register_element(&id);
            }
            "@horizon" => {
                doc.horizon = Some(ctx.number(1, "horizon")?);
            }
            "@dt" => {
                doc.dt = Some(ctx.number(1, "dt")?);
            }
            "@base" => {
                doc.base = Some(ctx.word(1, "base id")?.to_string());
            }
            other => {
                return Err(ctx.err(0, format!("unknown directive `{other}`")));
            }
        }
        Ok(())
    };
    if let Err(e) = take() {
        errors.push(e);
    }
}

fn header_time(ctx: &LineCtx<'_>, idx: usize) -> Result<HeaderTime, ParseError> {
    let Some(at) = ctx.tokens.get(idx) else {
        return Ok(HeaderTime::None);
    };
    if at.text != "@" {
        return Err(ctx.err(idx, "expected `@ t=<s>` or `@ [<a>, <b>]`"));
    }
    let spec = ctx.word(idx + 1, "time specification")?;
    if let Some(v) = spec.strip_prefix("t=") {
        let t: f64 = v
            .parse()
            .map_err(|_| ctx.err(idx + 1, format!("time is not a number: `{v}`")))?;
        return Ok(HeaderTime::At(t));
    }
    if spec.starts_with('[') {
        // Accept `[a, b]`, `[a,b]`, `[a , b ]` split across tokens.
        let joined = ctx.rest_text(idx + 1);
        let inner = joined
            .trim_start_matches('[')
            .trim_end_matches(']')
            .replace(',', " ");
        let parts: Vec<&str> = inner.split_whitespace().collect();
        if parts.len() != 2 {
            return Err(ctx.err(idx + 1, "interval must be `[<start>, <end>]`"));
        }
        let a: f64 = parts[0]
            .parse()
            .map_err(|_| ctx.err(idx + 1, format!("interval start is not a number: `{}`", parts[0])))?;
        let b: f64 = parts[1]
            .parse()
            .map_err(|_| ctx.err(idx + 1, format!("interval end is not a number: `{}`", parts[1])))?;
        return Ok(HeaderTime::Interval(a, b));
    }
    Err(ctx.err(idx + 1, "expected `t=<s>` or `[<a>, <b>]`"))
}

fn dedupe_block(
    doc: &mut DocBuilder,
    ctx: &LineCtx<'_>,
    errors: &mut Vec<ParseError>,
    key: String,
) -> bool {
    if doc.seen_blocks.insert(key.clone()) {
        true
    } else {
        errors.push(ctx.err(0, format!("duplicate block `{key}`")));
        false
    }
}

fn parse_header(
    ctx: &LineCtx<'_>,
    doc: &mut DocBuilder,
    errors: &mut Vec<ParseError>,
    warnings: &mut Vec<ParseWarning>,
) -> Option<Block> {
    let raw_tag = ctx.tokens[0].text.trim_start_matches('[').trim_end_matches(']');
    let Some(tag) = Tag::parse(raw_tag) else {
        errors.push(ctx.err(0, format!("unknown dimension tag `{raw_tag}`")));
        return None;
    };
    let subject = match ctx.word(1, "block subject") {
        Ok(s) => s.to_string(),
        Err(e) => {
            errors.push(e);
            return None;
        }
    };
    let time = match header_time(ctx, 2) {
        Ok(t) => t,
        Err(e) => {
            errors.push(e);
            return None;
        }
    };


    match tag {
        Tag::Sem | Tag::Spat => {
            let HeaderTime::At(t) = time else {
                errors.push(ctx.err(2, "snapshot block needs `@ t=<seconds>`"));
                return None;
            };
            let id = ElementId::from(subject.as_str());
            doc.register_element(&id);
            if !dedupe_block(doc, ctx, errors, format!("{raw_tag} {subject} t={t}")) {
                return None;
            }
            if tag == Tag::Sem {
                Some(Block::Sem(SemanticAnnotation {
                    element_id: id,
                    t,
                    class: ElementClass::Other(String::from("unspecified")),
                    attributes: Vec::new(),
                    state: MotionState::Other(String::from("unspecified")),
                    affordances: Vec::new(),
                }))
            } else {
                Some(Block::Spat(SpatialAnnotation {
                    element_id: id,
                    t,
                    position: Vec3::ZERO,
                    orientation: Mat3::IDENTITY,
                    distance_to_ego: 0.0,
                    occupancy: Extent::new(1.0, 1.0, 1.0),
                    topology: BTreeSet::new(),
                }))
            }
        }
        Tag::Temp => {
            let HeaderTime::Interval(a, b) = time else {
                errors.push(ctx.err(2, "temporal block needs `@ [<start>, <end>]`"));
                return None;
            };
            let id = ElementId::from(subject.as_str());
            doc.register_element(&id);
            if !dedupe_block(doc, ctx, errors, format!("TEMP {subject} [{a},{b}]")) {
                return None;
            }
            Some(Block::Temp(TemporalAnnotation {
                element_id: id,
                interval: TimeInterval::new(a, b),
                velocity_samples: Vec::new(),
                acceleration_samples: Vec::new(),
                state_sequence: Vec::new(),
                visibility_sequence: Vec::new(),
                orderings: BTreeSet::new(),
                periodicity: None,
            }))
        }
        Tag::Phys => {
            if time != HeaderTime::None {
                warnings.push(ParseWarning {
                    line: ctx.line_no,
                    message: String::from("physical blocks carry no time; ignored"),
                });
            }
            let id = ElementId::from(subject.as_str());
            doc.register_element(&id);
            if !dedupe_block(doc, ctx, errors, format!("PHYS {subject}")) {
                return None;
            }
            Some(Block::Phys(PhysicalAnnotation {
                element_id: id,
                model: ModelKind::Other(String::from("unspecified")),
                material_tags: Vec::new(),
                constraint_set: Vec::new(),
                violations: Vec::new(),
            }))
        }
        Tag::Traj => {
            let id = ElementId::from(subject.as_str());
            doc.register_element(&id);
            if !dedupe_block(doc, ctx, errors, format!("TRAJ {subject}")) {
                return None;
            }
            Some(Block::Traj(id))
        }
        Tag::Anticipate => {
            doc.has_anticipation_block = true;
            let id = if subject == "-" {
                None
            } else {
                let id = ElementId::from(subject.as_str());
                doc.reference(ctx.line_no, ctx.tokens[1].column, &id);
                Some(id)
            };
            Some(Block::Anticipate(id))
        }
        Tag::Action => {
            let Some(kind) = TaskKind::from_token(&subject) else {
                errors.push(ctx.err(1, format!("unknown task kind `{subject}`")));
                return None;
            };
            if !dedupe_block(doc, ctx, errors, format!("ACTION {subject}")) {
                return None;
            }
            Some(Block::Action(
                kind,
                Action {
                    verb: ActionVerb::Proceed,
                    justification: Vec::new(),
                },
            ))
        }
        Tag::Layer => {
            let layer: u8 = match subject.parse() {
                Ok(n) => n,
                Err(_) => {
                    errors.push(ctx.err(1, format!("layer id must be a number, got `{subject}`")));
                    return None;
                }
            };
            if !dedupe_block(doc, ctx, errors, format!("LAYER {layer}")) {
                return None;
            }
            doc.layers.entry(layer).or_default();
            Some(Block::Layer(layer))
        }
        Tag::Rule => {
            if !dedupe_block(doc, ctx, errors, format!("RULE {subject}")) {
                return None;
            }
            Some(Block::Rule(Rule::new(subject, RuleKind::Traffic)))
        }
        Tag::Modality => {
            if !dedupe_block(doc, ctx, errors, format!("MODALITY {subject}")) {
                return None;
            }
            Some(Block::Modality(ModalityStream {
                kind: ModalityKind::Visual,
                source: subject,
                samples: Vec::new(),
            }))
        }
        Tag::Driver => {
            if !dedupe_block(doc, ctx, errors, String::from("DRIVER")) {
                return None;
            }
            doc.driver_channel = Some(Vec::new());
            Some(Block::Driver)
        }
    }
}

fn parse_vec3_with_unit(ctx: &LineCtx<'_>, idx: usize, unit: Unit) -> Result<Vec3, ParseError> {
    let x = ctx.number(idx, "x")?;
    let y = ctx.number(idx + 1, "y")?;
    let z = ctx.number(idx + 2, "z")?;
    ctx.unit(idx + 3, unit)?;
    Ok(Vec3(x, y, z))
}

fn parse_interval_tail(ctx: &LineCtx<'_>, idx: usize) -> Result<TimeInterval, ParseError> {
    let joined = ctx.tokens[idx..]
        .iter()
        .map(|t| t.text.as_str())
        .collect::<Vec<_>>()
        .join(" ");
    let inner = joined
        .trim_start_matches('[')
        .split(']')
        .next()
        .unwrap_or("")
        .replace(',', " ");
    let parts: Vec<&str> = inner.split_whitespace().collect();
    if parts.len() != 2 {
        return Err(ctx.err(idx, "expected `[<start>, <end>]`"));
    }
    let a: f64 = parts[0]
        .parse()
        .map_err(|_| ctx.err(idx, format!("interval start is not a number: `{}`", parts[0])))?;
    let b: f64 = parts[1]
        .parse()
        .map_err(|_| ctx.err(idx, format!("interval end is not a number: `{}`", parts[1])))?;
    Ok(TimeInterval::new(a, b))
}

fn parse_orient9(ctx: &LineCtx<'_>, idx: usize, token: &str) -> Result<Mat3, ParseError> {
    let parts: Vec<&str> = token.split(',').collect();
    if parts.len() != 9 {
        return Err(ctx.err(idx, "orientation needs 9 comma-joined numbers"));
    }
    let mut m = [[0.0f64; 3]; 3];
    for (i, p) in parts.iter().enumerate() {
        let v: f64 = p
            .parse()
            .map_err(|_| ctx.err(idx, format!("orientation entry is not a number: `{p}`")))?;
        m[i / 3][i % 3] = v;
    }
    Ok(Mat3(m))
}

/// `key=value` pairs in the tail of a line, e.g. `speed=2.5`.
fn tail_value<'a>(ctx: &LineCtx<'a>, key: &str) -> Option<(usize, &'a str)> {
    let prefix = format!("{key}=");
    ctx.tokens
        .iter()
        .enumerate()
        .find_map(|(i, t)| t.text.strip_prefix(prefix.as_str()).map(|v| (i, v)))
}

fn tail_number(ctx: &LineCtx<'_>, key: &str) -> Result<Option<f64>, ParseError> {
    let Some((idx, raw)) = tail_value(ctx, key) else {
        return Ok(None);
    };
    raw.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .map(Some)
        .ok_or_else(|| ctx.err(idx, format!("`{key}` is not a number: `{raw}`")))
}

fn parse_kv(
    key: &str,
    ctx: &LineCtx<'_>,
    block: &mut Block,
    doc: &mut DocBuilder,
    warnings: &mut Vec<ParseWarning>,
) -> Result<(), ParseError> {
    let unknown = |warnings: &mut Vec<ParseWarning>| {
        warnings.push(ParseWarning {
            line: ctx.line_no,
            message: format!("unknown key `{key}` ignored"),
        });
        Ok(())
    };
    match block {
        Block::Sem(ann) => match key {
            "class" => {
                ann.class = ElementClass::from_token(ctx.word(1, "class")?);
                Ok(())
            }
            "state" => {
                ann.state = MotionState::from_token(ctx.word(1, "state")?);
                Ok(())
            }
            "attribute" => {
                ann.attributes.push(ctx.rest_text(1));
                Ok(())
            }
            "affordance" => {
                ann.affordances
                    .push(Affordance::from_token(ctx.word(1, "affordance")?));
                Ok(())
            }
            _ => unknown(warnings),
        },
        Block::Spat(ann) => match key {
            "position" => {
                ann.position = parse_vec3_with_unit(ctx, 1, Unit::Meters)?;
                Ok(())
            }
            "orientation" => {
                ann.orientation = parse_orient9(ctx, 1, ctx.word(1, "orientation")?)?;
                Ok(())
            }
            "orientation_yaw" => {
                let yaw = ctx.number(1, "yaw")?;
                ctx.unit(2, Unit::Radians)?;
                ann.orientation = Mat3::from_yaw(yaw);
                Ok(())
            }
            "distance_to_ego" => {
                ann.distance_to_ego = ctx.number(1, "distance")?;
                ctx.unit(2, Unit::Meters)?;
                Ok(())
            }
            "extent" => {
                let v = parse_vec3_with_unit(ctx, 1, Unit::Meters)?;
                ann.occupancy = Extent::new(v.0, v.1, v.2);
                Ok(())
            }
            "relation" => {
                let rel = SpatialRelation::from_token(ctx.word(1, "relation")?);
                let other = ElementId::from(ctx.word(2, "related element")?);
                doc.reference(ctx.line_no, ctx.tokens[2].column, &other);
                ann.topology.insert((other, rel));
                Ok(())
            }
            _ => unknown(warnings),
        },
        Block::Temp(ann) => match key {
            "velocity" | "accel" => {
                let unit = if key == "velocity" {
                    Unit::MetersPerSecond
                } else {
                    Unit::MetersPerSecondSquared
                };
                let v = parse_vec3_with_unit(ctx, 1, unit)?;
                let t = ctx.at_time(5)?;
                if key == "velocity" {
                    ann.velocity_samples.push((t, v));
                } else {
                    ann.acceleration_samples.push((t, v));
                }
                Ok(())
            }
            "state_seq" => {
                let state = MotionState::from_token(ctx.word(1, "state")?);
                let interval = parse_interval_tail(ctx, 2)?;
                ann.state_sequence.push(StateInterval { state, interval });
                Ok(())
            }
            "visibility" => {
                let visibility = Visibility::from_token(ctx.word(1, "visibility")?);
                let interval = parse_interval_tail(ctx, 2)?;
                let passive = ctx
                    .tokens
                    .last()
                    .map(|t| t.text == "passive")
                    .unwrap_or(false);
                ann.visibility_sequence.push(VisibilityInterval {
                    visibility,
                    interval,
                    passive,
                });
                Ok(())
            }
            "ordering" => {
                let rel = IntervalOrder::from_token(ctx.word(1, "ordering")?);
                let other = ElementId::from(ctx.word(2, "related element")?);
                doc.reference(ctx.line_no, ctx.tokens[2].column, &other);
                ann.orderings.insert((other, rel));
                Ok(())
            }
            "periodicity" => {
                let word = ctx.word(1, "period")?;
                if word == "none" {
                    ann.periodicity = None;
                } else {
                    let p = ctx.number(1, "period")?;
                    ctx.unit(2, Unit::Seconds)?;
                    ann.periodicity = Some(p);
                }
                Ok(())
            }
            _ => unknown(warnings),
        },
        Block::Phys(ann) => match key {
            "model" => {
                ann.model = ModelKind::from_token(ctx.word(1, "model")?);
                Ok(())
            }
            "material" => {
                ann.material_tags.push(ctx.rest_text(1));
                Ok(())
            }
            "constraint" => {
                let id = ctx.word(1, "constraint id")?.to_string();
                let kind_token = ctx.word(2, "constraint kind")?;
                let Some(kind) = ConstraintKind::from_token(kind_token) else {
                    return Err(ctx.err(2, format!("unknown constraint kind `{kind_token}`")));
                };
                let mut constraint = Constraint::new(id, kind);
                // Optional inline limit: `<value> <unit>`.
                if ctx.tokens.len() >= 5 && !ctx.tokens[3].text.contains('=') {
                    let value = ctx.number(3, "limit")?;
                    let unit_token = ctx.word(4, "unit")?;
                    let Some(unit) = Unit::from_token(unit_token) else {
                        return Err(ctx.err(4, format!("unknown unit `{unit_token}`")));
                    };
                    constraint = constraint.with_quantity("limit", value, unit);
                }
                if let Some((idx, raw)) = tail_value(ctx, "holder") {
                    let holder = ElementId::from(raw);
                    doc.reference(ctx.line_no, ctx.tokens[idx].column, &holder);
                    constraint = constraint.with_text("holder", raw);
                }
                ann.constraint_set.push(constraint);
                Ok(())
            }
            "violation" => {
                let id = ctx.word(1, "constraint id")?.to_string();
                let t = ctx.at_time(2)?;
                let measured = tail_number(ctx, "value")?
                    .ok_or_else(|| ctx.err(3, "violation needs `value=<num>`"))?;
                ann.violations.push(ViolationRecord {
                    constraint_id: id,
                    t,
                    measured,
                });
                Ok(())
            }
            _ => unknown(warnings),
        },
        Block::Traj(id) => match key {
            "sample" => {
                let t = ctx.number(1, "t")?;
                ctx.unit(2, Unit::Seconds)?;
                let position = parse_vec3_with_unit(ctx, 3, Unit::Meters)?;
                let speed = tail_number(ctx, "speed")?
                    .ok_or_else(|| ctx.err(7, "sample needs `speed=<m/s>`"))?;
                let orientation = match tail_value(ctx, "orient") {
                    Some((idx, raw)) => parse_orient9(ctx, idx, raw)?,
                    None => match tail_number(ctx, "yaw")? {
                        Some(yaw) => Mat3::from_yaw(yaw),
                        None => Mat3::IDENTITY,
                    },
                };
                let yaw_rate = tail_number(ctx, "yaw_rate")?;
                doc.trajectories.entry(id.clone()).or_default().push(StateSample {
                    t,
                    position,
                    orientation,
                    speed,
                    yaw_rate,
                });
                Ok(())
            }
            _ => unknown(warnings),
        },
        Block::Anticipate(subject) => match key {
            "event" => {
                let kind = EventKind::from_token(ctx.word(1, "event kind")?);
                let t = ctx.at_time(2)?;
                let mut elements: Vec<ElementId> = subject.iter().cloned().collect();
                for (i, token) in ctx.tokens.iter().enumerate().skip(4) {
                    if let Some(extra) = token.text.strip_prefix('+') {
                        let id = ElementId::from(extra);
                        doc.reference(ctx.line_no, ctx.tokens[i].column, &id);
                        elements.push(id);
                    }
                }
                let detail = tail_value(ctx, "detail").map(|(_, v)| v.to_string());
                doc.events.push(PredictedEvent {
                    t,
                    kind,
                    elements,
                    detail,
                });
                Ok(())
            }
            "relation+" | "relation-" => {
                let Some(element_id) = subject.clone() else {
                    return Err(ctx.err(0, "relation deltas need an element subject"));
                };
                let rel = SpatialRelation::from_token(ctx.word(1, "relation")?);
                let other = ElementId::from(ctx.word(2, "related element")?);
                doc.reference(ctx.line_no, ctx.tokens[2].column, &other);
                let t = ctx.at_time(3)?;
                doc.deltas.push(TopologyDelta {
                    t,
                    element_id,
                    other,
                    relation: rel,
                    change: if key == "relation+" {
                        DeltaChange::Added
                    } else {
                        DeltaChange::Removed
                    },
                });
                Ok(())
            }
            "predict" => {
                let Some(element_id) = subject.clone() else {
                    return Err(ctx.err(0, "predictions need an element subject"));
                };
                let position = parse_vec3_with_unit(ctx, 1, Unit::Meters)?;
                let t = ctx.at_time(5)?;
                let speed = tail_number(ctx, "speed")?.unwrap_or(0.0);
                let orientation = match tail_value(ctx, "orient") {
                    Some((idx, raw)) => parse_orient9(ctx, idx, raw)?,
                    None => match tail_number(ctx, "yaw")? {
                        Some(yaw) => Mat3::from_yaw(yaw),
                        None => Mat3::IDENTITY,
                    },
                };
                let yaw_rate = tail_number(ctx, "yaw_rate")?;
                doc.predicted.entry(element_id).or_default().push(StateSample {
                    t,
                    position,
                    orientation,
                    speed,
                    yaw_rate,
                });
                Ok(())
            }
            _ => unknown(warnings),
        },
        Block::Action(_, action) => match key {
            "verb" => {
                let token = ctx.word(1, "verb")?;
                action.verb = ActionVerb::from_token(token)
                    .ok_or_else(|| ctx.err(1, format!("unknown verb `{token}`")))?;
                Ok(())
            }
            "justify" => {
                let dim = ctx.word(1, "dimension")?;
                match dim {
                    "semantic" | "spatial" => {
                        let id = ElementId::from(ctx.word(2, "element id")?);
                        doc.reference(ctx.line_no, ctx.tokens[2].column, &id);
                        let t = ctx.at_time(3)?;
                        action.justification.push(if dim == "semantic" {
                            AnnotationRef::Semantic { element_id: id, t }
                        } else {
                            AnnotationRef::Spatial { element_id: id, t }
                        });
                    }
                    "temporal" | "physical" => {
                        let id = ElementId::from(ctx.word(2, "element id")?);
                        doc.reference(ctx.line_no, ctx.tokens[2].column, &id);
                        action.justification.push(if dim == "temporal" {
                            AnnotationRef::Temporal { element_id: id }
                        } else {
                            AnnotationRef::Physical { element_id: id }
                        });
                    }
                    "event" => {
                        let kind = EventKind::from_token(ctx.word(2, "event kind")?);
                        let t = ctx.at_time(3)?;
                        action.justification.push(AnnotationRef::Event { kind, t });
                    }
                    other => {
                        return Err(ctx.err(1, format!("unknown justification kind `{other}`")))
                    }
                }
                Ok(())
            }
            _ => unknown(warnings),
        },
        Block::Layer(layer) => match key {
            "entry" => {
                let id = ctx.word(1, "entry id")?.to_string();
                let kind = ctx.word(2, "entry kind")?.to_string();
                let label = ctx.rest_text(3);
                doc.layers.entry(*layer).or_default().push(LayerEntry {
                    id,
                    kind,
                    label,
                });
                Ok(())
            }
            _ => unknown(warnings),
        },
        Block::Rule(rule) => match key {
            "kind" => {
                let token = ctx.word(1, "rule kind")?;
                rule.kind = match token {
                    "traffic" => RuleKind::Traffic,
                    "safety" => RuleKind::Safety,
                    "value" => RuleKind::Value,
                    other => return Err(ctx.err(1, format!("unknown rule kind `{other}`"))),
                };
                Ok(())
            }
            "param" => {
                let name = ctx.word(1, "parameter name")?.to_string();
                // Either `<num> <unit>` or a (possibly quoted) text value.
                let value = if ctx.tokens.len() >= 4 && !ctx.tokens[2].quoted {
                    if let (Ok(num), Some(unit)) = (
                        ctx.tokens[2].text.parse::<f64>(),
                        ctx.tokens
                            .get(3)
                            .and_then(|t| Unit::from_token(&t.text)),
                    ) {
                        ParamValue::Quantity(Quantity::new(num, unit))
                    } else {
                        ParamValue::Text(ctx.rest_text(2))
                    }
                } else {
                    ParamValue::Text(ctx.rest_text(2))
                };
                rule.params.insert(name, value);
                Ok(())
            }
            _ => unknown(warnings),
        },
        Block::Modality(stream) => match key {
            "kind" => {
                let token = ctx.word(1, "modality kind")?;
                stream.kind = match token {
                    "visual" => ModalityKind::Visual,
                    "spatial" => ModalityKind::Spatial,
                    "acoustic" => ModalityKind::Acoustic,
                    "kinematic" => ModalityKind::Kinematic,
                    "geospatial" => ModalityKind::Geospatial,
                    "linguistic" => ModalityKind::Linguistic,
                    "memory" => ModalityKind::Memory,
                    other => return Err(ctx.err(1, format!("unknown modality kind `{other}`"))),
                };
                Ok(())
            }
            "sample" => {
                let t = ctx.number(1, "t")?;
                ctx.unit(2, Unit::Seconds)?;
                let payload = ctx.rest_text(3);
                stream.samples.push(ModalitySample { t, payload });
                Ok(())
            }
            _ => unknown(warnings),
        },
        Block::Driver => match key {
            "say" => {
                let t = ctx.number(1, "t")?;
                ctx.unit(2, Unit::Seconds)?;
                let text = ctx.rest_text(3);
                doc.driver_channel
                    .get_or_insert_with(Vec::new)
                    .push(Utterance { t, text });
                Ok(())
            }
            _ => unknown(warnings),
        },
    }
}

fn assemble(doc: DocBuilder, warnings: Vec<ParseWarning>) -> ParsedDocument {
    let scenario_id = doc.scenario_id.unwrap_or_else(|| String::from("candidate"));
    let window = doc.window.unwrap_or((-6.0, 0.0));
    let ego_id = doc.ego.unwrap_or_else(|| ElementId::from("ego"));
    let mut description = ScenarioDescription::empty(
        scenario_id.clone(),
        TimeInterval::new(window.0, window.1),
        ego_id,
    );
    description.context = Context {
        layers: doc.layers,
        rules: doc.rules,
        driver_channel: doc.driver_channel,
    };
    description.modalities = doc.modalities;
    description.elements = doc
        .element_order
        .iter()
        .map(|id| Element {
            id: id.clone(),
            trajectory: doc.trajectories.get(id).cloned().unwrap_or_default(),
        })
        .collect();
    description.semantic = doc.semantic;
    description.spatial = doc.spatial;
    description.temporal = doc.temporal;
    description.physical = doc.physical;

    let has_anticipation = doc.has_anticipation_block || doc.horizon.is_some();
    let anticipation = has_anticipation.then(|| {
        let max_t = doc
            .events
            .iter()
            .map(|e| e.t)
            .chain(doc.deltas.iter().map(|d| d.t))
            .chain(doc.predicted.values().flatten().map(|s| s.t))
            .fold(0.0f64, f64::max);
        let mut ant = ScenarioAnticipation {
            base: doc.base.unwrap_or(scenario_id),
            horizon: doc.horizon.unwrap_or(if max_t > 0.0 { max_t } else { 1.0 }),
            dt: doc.dt.unwrap_or(0.5),
            predicted_trajectories: doc.predicted,
            predicted_events: doc.events,
            predicted_relations: doc.deltas,
        };
        scenarium_core::physics::sort_anticipation(&mut ant);
        ant
    });

    ParsedDocument {
        description,
        anticipation,
        actions: doc.actions,
        warnings,
    }
}

// ---------------------------------------------------------------------------
// Serialisation
// ---------------------------------------------------------------------------

fn quote(text: &str) -> String {
    let mut out = String::with_capacity(text.len() + 2);
    out.push('"');
    for c in text.chars() {
        if c == '"' || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('"');
    out
}

fn orient9(m: &Mat3) -> String {
    let f = &m.0;
    format!(
        "{},{},{},{},{},{},{},{},{}",
        f[0][0], f[0][1], f[0][2], f[1][0], f[1][1], f[1][2], f[2][0], f[2][1], f[2][2]
    )
}

fn write_sample(out: &mut String, key: &str, s: &StateSample) {
    let _ = write!(
        out,
        "{key}: {} s {} {} {} m speed={} orient={}",
        s.t,
        s.position.x(),
        s.position.y(),
        s.position.z(),
        s.speed,
        orient9(&s.orientation)
    );
    if let Some(w) = s.yaw_rate {
        let _ = write!(out, " yaw_rate={w}");
    }
    out.push('\n');
}

fn write_predict(out: &mut String, s: &StateSample) {
    let _ = write!(
        out,
        "predict: {} {} {} m @ t={} speed={} orient={}",
        s.position.x(),
        s.position.y(),
        s.position.z(),
        s.t,
        s.speed,
        orient9(&s.orientation)
    );
    if let Some(w) = s.yaw_rate {
        let _ = write!(out, " yaw_rate={w}");
    }
    out.push('\n');
}

/// Serialises a description deterministically. Annotation blocks are emitted
/// in canonical order (element id, then time); on descriptions already in
/// canonical order — everything the derive pipeline produces — parsing the
/// output reproduces the input structurally.
pub fn serialize(desc: &ScenarioDescription) -> String {
    serialize_bundle(desc, None, &[])
}

/// Serialises a description plus optional anticipation and actions.
pub fn serialize_bundle(
    desc: &ScenarioDescription,
    anticipation: Option<&ScenarioAnticipation>,
    actions: &[(TaskKind, Action)],
) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "@scenario {}", desc.id);
    let _ = writeln!(out, "@window {} {}", desc.window.start, desc.window.end);
    let _ = writeln!(out, "@ego {}", desc.ego_id);
    for e in &desc.elements {
        let _ = writeln!(out, "@element {}", e.id);
    }
    if let Some(ant) = anticipation {
        let _ = writeln!(out, "@base {}", ant.base);
        let _ = writeln!(out, "@horizon {}", ant.horizon);
        let _ = writeln!(out, "@dt {}", ant.dt);
    }

    for (layer, entries) in &desc.context.layers {
        let _ = writeln!(out, "\n[LAYER] {layer}");
        for e in entries {
            let _ = writeln!(out, "entry: {} {} {}", e.id, e.kind, quote(&e.label));
        }
    }
    for rule in &desc.context.rules {
        let _ = writeln!(out, "\n[RULE] {}", rule.id);
        let kind = match rule.kind {
            RuleKind::Traffic => "traffic",
            RuleKind::Safety => "safety",
            RuleKind::Value => "value",
        };
        let _ = writeln!(out, "kind: {kind}");
        for (name, value) in &rule.params {
            match value {
                ParamValue::Quantity(q) => {
                    let _ = writeln!(out, "param: {name} {} {}", q.value, q.unit.token());
                }
                ParamValue::Text(t) => {
                    let _ = writeln!(out, "param: {name} {}", quote(t));
                }
            }
        }
    }
    if let Some(utterances) = &desc.context.driver_channel {
        let _ = writeln!(out, "\n[DRIVER] channel");
        for u in utterances {
            let _ = writeln!(out, "say: {} s {}", u.t, quote(&u.text));
        }
    }
    for stream in &desc.modalities {
        let _ = writeln!(out, "\n[MODALITY] {}", stream.source);
        let _ = writeln!(out, "kind: {}", stream.kind.token());
        for s in &stream.samples {
            let _ = writeln!(out, "sample: {} s {}", s.t, quote(&s.payload));
        }
    }

    for element in &desc.elements {
        if element.trajectory.is_empty() {
            continue;
        }
        let _ = writeln!(out, "\n[TRAJ] {}", element.id);
        for s in &element.trajectory {
            write_sample(&mut out, "sample", s);
        }
    }

    let mut semantic: Vec<&SemanticAnnotation> = desc.semantic.iter().collect();
    semantic.sort_by(|a, b| (&a.element_id, a.t).partial_cmp(&(&b.element_id, b.t)).unwrap());
    for a in semantic {
        let _ = writeln!(out, "\n[SEM] {} @ t={}", a.element_id, a.t);
        let _ = writeln!(out, "class: {}", a.class.token());
        let _ = writeln!(out, "state: {}", a.state.token());
        for attr in &a.attributes {
            let _ = writeln!(out, "attribute: {attr}");
        }
        for aff in &a.affordances {
            let _ = writeln!(out, "affordance: {}", aff.token());
        }
    }

    let mut spatial: Vec<&SpatialAnnotation> = desc.spatial.iter().collect();
    spatial.sort_by(|a, b| (&a.element_id, a.t).partial_cmp(&(&b.element_id, b.t)).unwrap());
    for a in spatial {
        let _ = writeln!(out, "\n[SPAT] {} @ t={}", a.element_id, a.t);
        let _ = writeln!(
            out,
            "position: {} {} {} m",
            a.position.x(),
            a.position.y(),
            a.position.z()
        );
        let _ = writeln!(out, "orientation: {}", orient9(&a.orientation));
        let _ = writeln!(out, "distance_to_ego: {} m", a.distance_to_ego);
        let _ = writeln!(
            out,
            "extent: {} {} {} m",
            a.occupancy.length, a.occupancy.width, a.occupancy.height
        );
        for (other, rel) in &a.topology {
            let _ = writeln!(out, "relation: {} {}", rel.token(), other);
        }
    }

    let mut temporal: Vec<&TemporalAnnotation> = desc.temporal.iter().collect();
    temporal.sort_by(|a, b| {
        (&a.element_id, a.interval.start)
            .partial_cmp(&(&b.element_id, b.interval.start))
            .unwrap()
    });
    for a in temporal {
        let _ = writeln!(
            out,
            "\n[TEMP] {} @ [{}, {}]",
            a.element_id, a.interval.start, a.interval.end
        );
        for (t, v) in &a.velocity_samples {
            let _ = writeln!(out, "velocity: {} {} {} m/s @ t={t}", v.x(), v.y(), v.z());
        }
        for (t, v) in &a.acceleration_samples {
            let _ = writeln!(out, "accel: {} {} {} m/s2 @ t={t}", v.x(), v.y(), v.z());
        }
        for s in &a.state_sequence {
            let _ = writeln!(
                out,
                "state_seq: {} [{}, {}]",
                s.state.token(),
                s.interval.start,
                s.interval.end
            );
        }
        for s in &a.visibility_sequence {
            let _ = write!(
                out,
                "visibility: {} [{}, {}]",
                s.visibility.token(),
                s.interval.start,
                s.interval.end
            );
            if s.passive {
                out.push_str(" passive");
            }
            out.push('\n');
        }
        for (other, rel) in &a.orderings {
            let _ = writeln!(out, "ordering: {} {}", rel.token(), other);
        }
        if let Some(p) = a.periodicity {
            let _ = writeln!(out, "periodicity: {p} s");
        }
    }

    let mut physical: Vec<&PhysicalAnnotation> = desc.physical.iter().collect();
    physical.sort_by(|a, b| a.element_id.cmp(&b.element_id));
    for a in physical {
        let _ = writeln!(out, "\n[PHYS] {}", a.element_id);
        let _ = writeln!(out, "model: {}", a.model.token());
        for tag in &a.material_tags {
            let _ = writeln!(out, "material: {tag}");
        }
        for c in &a.constraint_set {
            let _ = write!(out, "constraint: {} {}", c.id, c.kind.token());
            if let Some(q) = c.quantity("limit") {
                let _ = write!(out, " {} {}", q.value, q.unit.token());
            }
            if let Some(holder) = c.text("holder") {
                let _ = write!(out, " holder={holder}");
            }
            out.push('\n');
        }
        for v in &a.violations {
            let _ = writeln!(
                out,
                "violation: {} @ t={} value={}",
                v.constraint_id, v.t, v.measured
            );
        }
    }

    if let Some(ant) = anticipation {
        for (id, samples) in &ant.predicted_trajectories {
            let _ = writeln!(out, "\n[ANTICIPATE] {id}");
            for s in samples {
                write_predict(&mut out, s);
            }
        }
        let mut by_subject: BTreeMap<Option<&ElementId>, Vec<String>> = BTreeMap::new();
        for e in &ant.predicted_events {
            let mut line = format!("event: {} @ t={}", e.kind.token(), e.t);
            for extra in e.elements.iter().skip(1) {
                let _ = write!(line, " +{extra}");
            }
            if let Some(d) = &e.detail {
                let _ = write!(line, " detail={d}");
            }
            by_subject.entry(e.elements.first()).or_default().push(line);
        }
        for d in &ant.predicted_relations {
            let sign = match d.change {
                DeltaChange::Added => "+",
                DeltaChange::Removed => "-",
            };
            by_subject.entry(Some(&d.element_id)).or_default().push(format!(
                "relation{sign}: {} {} @ t={}",
                d.relation.token(),
                d.other,
                d.t
            ));
        }
        for (subject, lines) in by_subject {
            let name = subject.map(|s| s.as_str()).unwrap_or("-");
            let _ = writeln!(out, "\n[ANTICIPATE] {name}");
            for line in lines {
                let _ = writeln!(out, "{line}");
            }
        }
    }

    for (kind, action) in actions {
        let _ = writeln!(out, "\n[ACTION] {}", kind.token());
        let _ = writeln!(out, "verb: {}", action.verb.token());
        for j in &action.justification {
            match j {
                AnnotationRef::Semantic { element_id, t } => {
                    let _ = writeln!(out, "justify: semantic {element_id} @ t={t}");
                }
                AnnotationRef::Spatial { element_id, t } => {
                    let _ = writeln!(out, "justify: spatial {element_id} @ t={t}");
                }
                AnnotationRef::Temporal { element_id } => {
                    let _ = writeln!(out, "justify: temporal {element_id}");
                }
                AnnotationRef::Physical { element_id } => {
                    let _ = writeln!(out, "justify: physical {element_id}");
                }
                AnnotationRef::Event { kind, t } => {
                    let _ = writeln!(out, "justify: event {} @ t={}", kind.token(), t);
                }
            }
        }
    }

    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use scenarium_core::params::EngineParams;
    use scenarium_core::synth::{random_description, SplitMix64};

    #[test]
    fn spec_style_spatial_block_parses() {
        let text = "[SPAT] pedestrian_1 @ t=0.0\n\
                    distance_to_ego: 3.42 m\n\
                    relation: front_of ego\n";
        let parsed = parse_annotation_text(text).unwrap();
        let desc = parsed.description;
        let ann = &desc.spatial[0];
        assert_eq!(ann.element_id, ElementId::from("pedestrian_1"));
        assert_eq!(ann.t, 0.0);
        assert!((ann.distance_to_ego - 3.42).abs() < 1e-12);
        assert!(ann
            .topology
            .contains(&(ElementId::from("ego"), SpatialRelation::FrontOf)));
        // ego is implicitly known (default ego id).
        assert!(desc.element(&ElementId::from("ego")).is_some());
    }

    #[test]
    fn empty_document_is_an_empty_candidate() {
        let parsed = parse_annotation_text("").unwrap();
        assert!(parsed.description.semantic.is_empty());
        assert!(parsed.description.elements.len() <= 1);
        assert!(parsed.anticipation.is_none());
        assert!(parsed.warnings.is_empty());
        assert!(scenarium_core::validate_description(&parsed.description).is_empty());
    }

    #[test]
    fn missing_unit_is_an_error() {
        let text = "[SPAT] a @ t=0.0\ndistance_to_ego: 3.42\n";
        let errs = parse_annotation_text(text).unwrap_err();
        assert!(errs.iter().any(|e| e.message.contains("unit `m`")), "{errs:?}");
        assert!(errs[0].line >= 1 && errs[0].column >= 1);
    }

    #[test]
    fn unknown_tag_and_duplicate_block_are_errors() {
        let text = "[WEATHER] sky @ t=0.0\n";
        let errs = parse_annotation_text(text).unwrap_err();
        assert!(errs[0].message.contains("unknown dimension tag"));

        let text = "[SEM] a @ t=0.0\nclass: vehicle\n[SEM] a @ t=0.0\nclass: vehicle\n";
        let errs = parse_annotation_text(text).unwrap_err();
        assert!(errs.iter().any(|e| e.message.contains("duplicate block")));
    }

    #[test]
    fn dangling_reference_is_an_error() {
        let text = "[SPAT] a @ t=0.0\nrelation: near phantom_7\n";
        let errs = parse_annotation_text(text).unwrap_err();
        assert!(errs
            .iter()
            .any(|e| e.message.contains("dangling element reference")));
    }

    #[test]
    fn unknown_keys_warn_but_do_not_fail() {
        let text = "[SEM] a @ t=0.0\nclass: vehicle\nstate: moving\nmood: cheerful\n";
        let parsed = parse_annotation_text(text).unwrap();
        assert_eq!(parsed.warnings.len(), 1);
        assert!(parsed.warnings[0].message.contains("mood"));
    }

    #[test]
    fn parser_is_total_on_fuzzed_input() {
        let mut rng = SplitMix64::new(0xf022);
        let alphabet: Vec<char> =
            "[]@:.,=-+ \"\\\nabz019 SEMSPATTEMP t=xyz m/s #".chars().collect();
        for _ in 0..20_000 {
            let len = rng.below(160);
            let mut s = String::new();
            for _ in 0..len {
                s.push(alphabet[rng.below(alphabet.len())]);
            }
            let _ = parse_annotation_text(&s);
        }
    }

    #[test]
    fn fuzzed_errors_carry_positions_in_bounds() {
        let mut rng = SplitMix64::new(0x9057);
        for _ in 0..2_000 {
            let mut s = String::new();
            for _ in 0..rng.below(120) {
                s.push((32 + rng.below(95) as u8) as char);
                if rng.chance(0.1) {
                    s.push('\n');
                }
            }
            if let Err(errs) = parse_annotation_text(&s) {
                let lines: Vec<&str> = s.lines().collect();
                for e in errs {
                    assert!(e.line >= 1 && e.line <= lines.len().max(1));
                    assert!(e.column >= 1);
                }
            }
        }
    }

    #[test]
    fn serialize_parse_identity_on_derived_descriptions() {
        let params = EngineParams::default();
        for seed in 0..40u64 {
            let desc = random_description(seed, &params);
            let text = serialize(&desc);
            let parsed = parse_annotation_text(&text)
                .unwrap_or_else(|e| panic!("seed {seed} failed to reparse: {e:?}"));
            assert_eq!(parsed.description, desc, "seed {seed}");
        }
    }

    #[test]
    fn serialize_parse_serialize_is_idempotent() {
        let mut rng = SplitMix64::new(0x1de3);
        let params = EngineParams::default();
        for case in 0..1_000u64 {
            // Mix structured documents with synthetic ones.
            let text = if case % 2 == 0 {
                serialize(&random_description(rng.next_u64(), &params))
            } else {
                format!(
                    "[SEM] e{} @ t=0.0\nclass: {}\nstate: moving\n",
                    case % 7,
                    if case % 3 == 0 { "vehicle" } else { "cyclist" }
                )
            };
            let Ok(first) = parse_annotation_text(&text) else {
                panic!("case {case} failed to parse");
            };
            let once = serialize(&first.description);
            let twice = serialize(&parse_annotation_text(&once).unwrap().description);
            assert_eq!(once, twice, "case {case}");
        }
    }

    #[test]
    fn lone_element_serialises_to_declarations_only() {
        let mut desc = ScenarioDescription::empty(
            "minimal",
            TimeInterval::new(-6.0, 0.0),
            ElementId::from("ego"),
        );
        desc.elements.push(Element::new("crate_1"));
        let text = serialize(&desc);
        assert_eq!(
            text,
            "@scenario minimal
@window -6 0
@ego ego
@element crate_1
"
        );
        let back = parse_annotation_text(&text).unwrap().description;
        assert_eq!(back.elements.len(), 2, "ego joins the element list");
        assert!(back.semantic.is_empty());
    }

    #[test]
    fn canonical_output_ignores_list_order() {
        let params = EngineParams::default();
        let desc = random_description(9, &params);
        let mut shuffled = desc.clone();
        shuffled.semantic.reverse();
        shuffled.spatial.reverse();
        shuffled.temporal.reverse();
        shuffled.physical.reverse();
        assert_eq!(serialize(&desc), serialize(&shuffled));
    }

    #[test]
    fn bundle_round_trips_anticipation_and_actions() {
        let params = EngineParams::default();
        let desc = random_description(4, &params);
        let ant = scenarium_core::physics::anticipate(&desc, 3.0, 0.5, &params).unwrap();
        let actions = vec![(
            TaskKind::Decision,
            Action {
                verb: ActionVerb::Yield,
                justification: vec![AnnotationRef::Temporal {
                    element_id: desc.elements[0].id.clone(),
                }],
            },
        )];
        let text = serialize_bundle(&desc, Some(&ant), &actions);
        let parsed = parse_annotation_text(&text).unwrap();
        let got = parsed.anticipation.expect("anticipation present");
        assert_eq!(got.horizon, ant.horizon);
        assert_eq!(got.dt, ant.dt);
        assert_eq!(got.predicted_events, ant.predicted_events);
        assert_eq!(got.predicted_relations, ant.predicted_relations);
        assert_eq!(got.predicted_trajectories, ant.predicted_trajectories);
        assert_eq!(parsed.actions, actions);
    }
}
