//! Closed vocabularies of the scenario model.
//!
//! Every enumeration carries an `Other(label)` escape hatch so that candidate
//! descriptions with out-of-vocabulary tokens still parse and score; scoring
//! treats `Other` labels as plain string comparisons.

use alloc::string::String;
use serde::{Deserialize, Serialize};

macro_rules! vocabulary {
    ($(#[$meta:meta])* $name:ident { $($variant:ident => $token:literal),+ $(,)? }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(rename_all = "snake_case")]
        pub enum $name {
            $($variant,)+
            Other(String),
        }

        impl $name {
            pub fn token(&self) -> &str {
                match self {
                    $(Self::$variant => $token,)+
                    Self::Other(label) => label.as_str(),
                }
            }

            /// Parses a token, falling back to `Other` for unknown labels.
            pub fn from_token(token: &str) -> Self {
                match token {
                    $($token => Self::$variant,)+
                    other => Self::Other(String::from(other)),
                }
            }

            pub fn is_other(&self) -> bool {
                matches!(self, Self::Other(_))
            }
        }

        impl core::fmt::Display for $name {
            fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
                f.write_str(self.token())
            }
        }
    };
}

vocabulary! {
    /// Element classes.
    ElementClass {
        Vehicle => "vehicle",
        Pedestrian => "pedestrian",
        Cyclist => "cyclist",
        PublicTransport => "public_transport",
        StaticObject => "static_object",
        Infrastructure => "infrastructure",
    }
}

impl ElementClass {
    /// Pedestrians and cyclists get priority treatment in the decision rules.
    pub fn is_vulnerable(&self) -> bool {
        matches!(self, ElementClass::Pedestrian | ElementClass::Cyclist)
    }

    /// Classes that drive: eligible for `parked`/`yielding` states.
    pub fn is_driving(&self) -> bool {
        matches!(
            self,
            ElementClass::Vehicle | ElementClass::PublicTransport | ElementClass::Cyclist
        )
    }
}

vocabulary! {
    /// Motion states shared by the semantic snapshot and the temporal sequence.
    MotionState {
        Parked => "parked",
        Stopped => "stopped",
        Moving => "moving",
        Walking => "walking",
        Yielding => "yielding",
    }
}

impl MotionState {
    pub fn is_in_motion(&self) -> bool {
        matches!(self, MotionState::Moving | MotionState::Walking)
    }
}

vocabulary! {
    /// Action possibilities an element offers.
    Affordance {
        CanOcclude => "can_occlude",
        CanBeRunOver => "can_be_run_over",
        CanSignal => "can_signal",
        CanEnterVehicle => "can_enter_vehicle",
        CanCross => "can_cross",
    }
}

vocabulary! {
    /// Qualitative spatial relations between two elements.
    SpatialRelation {
        LeftOf => "left_of",
        RightOf => "right_of",
        FrontOf => "front_of",
        Behind => "behind",
        Above => "above",
        Below => "below",
        Touching => "touching",
        Contains => "contains",
        ContainedBy => "contained_by",
        Near => "near",
    }
}

impl SpatialRelation {
    pub fn is_directional(&self) -> bool {
        matches!(
            self,
            SpatialRelation::LeftOf
                | SpatialRelation::RightOf
                | SpatialRelation::FrontOf
                | SpatialRelation::Behind
        )
    }

    /// Relation seen from the other endpoint of the pair, if defined.
    pub fn inverse(&self) -> Option<SpatialRelation> {
        match self {
            SpatialRelation::LeftOf => Some(SpatialRelation::RightOf),
            SpatialRelation::RightOf => Some(SpatialRelation::LeftOf),
            SpatialRelation::FrontOf => Some(SpatialRelation::Behind),
            SpatialRelation::Behind => Some(SpatialRelation::FrontOf),
            SpatialRelation::Above => Some(SpatialRelation::Below),
            SpatialRelation::Below => Some(SpatialRelation::Above),
            SpatialRelation::Touching => Some(SpatialRelation::Touching),
            SpatialRelation::Contains => Some(SpatialRelation::ContainedBy),
            SpatialRelation::ContainedBy => Some(SpatialRelation::Contains),
            SpatialRelation::Near => Some(SpatialRelation::Near),
            SpatialRelation::Other(_) => None,
        }
    }
}

vocabulary! {
    /// Qualitative orderings between two time intervals.
    IntervalOrder {
        Before => "before",
        After => "after",
        Simultaneous => "simultaneous",
    }
}

vocabulary! {
    /// Motion models assignable to an element for prediction.
    ModelKind {
        Static => "static",
        ConstantVelocity => "constant_velocity",
        ConstantAcceleration => "constant_acceleration",
        KinematicBicycle => "kinematic_bicycle",
        RigidBody => "rigid_body",
        HumanBody => "human_body",
    }
}

vocabulary! {
    /// Visibility of an element from the ego viewpoint.
    Visibility {
        Visible => "visible",
        Partial => "partial",
        Occluded => "occluded",
    }
}

vocabulary! {
    /// Kinds of predicted events emitted by anticipation.
    EventKind {
        Occluded => "occluded",
        Reappears => "reappears",
        ConstraintViolation => "constraint_violation",
    }
}

/// Sensor modality kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModalityKind {
    Visual,
    Spatial,
    Acoustic,
    Kinematic,
    Geospatial,
    Linguistic,
    Memory,
}

impl ModalityKind {
    pub fn token(&self) -> &'static str {
        match self {
            ModalityKind::Visual => "visual",
            ModalityKind::Spatial => "spatial",
            ModalityKind::Acoustic => "acoustic",
            ModalityKind::Kinematic => "kinematic",
            ModalityKind::Geospatial => "geospatial",
            ModalityKind::Linguistic => "linguistic",
            ModalityKind::Memory => "memory",
        }
    }
}

/// Rule categories in the environment context.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleKind {
    Traffic,
    Safety,
    Value,
}

/// Constraint categories checked by the physics engine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintKind {
    MaxSpeed,
    MaxAccel,
    MinGapRss,
    TrafficRule,
}

impl ConstraintKind {
    pub fn token(&self) -> &'static str {
        match self {
            ConstraintKind::MaxSpeed => "max_speed",
            ConstraintKind::MaxAccel => "max_accel",
            ConstraintKind::MinGapRss => "min_gap_rss",
            ConstraintKind::TrafficRule => "traffic_rule",
        }
    }

    pub fn from_token(token: &str) -> Option<Self> {
        match token {
            "max_speed" => Some(ConstraintKind::MaxSpeed),
            "max_accel" => Some(ConstraintKind::MaxAccel),
            "min_gap_rss" => Some(ConstraintKind::MinGapRss),
            "traffic_rule" => Some(ConstraintKind::TrafficRule),
            _ => None,
        }
    }
}

/// Downstream task categories.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    Perception,
    Decision,
    Interaction,
    Learning,
}

impl TaskKind {
    pub fn token(&self) -> &'static str {
        match self {
            TaskKind::Perception => "perception",
            TaskKind::Decision => "decision",
            TaskKind::Interaction => "interaction",
            TaskKind::Learning => "learning",
        }
    }

    pub fn from_token(token: &str) -> Option<Self> {
        match token {
            "perception" => Some(TaskKind::Perception),
            "decision" => Some(TaskKind::Decision),
            "interaction" => Some(TaskKind::Interaction),
            "learning" => Some(TaskKind::Learning),
            _ => None,
        }
    }
}

/// Verbs an action can carry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionVerb {
    Yield,
    Proceed,
    ProceedSlow,
    InformDriver,
    StoreObservation,
}

impl ActionVerb {
    pub fn token(&self) -> &'static str {
        match self {
            ActionVerb::Yield => "yield",
            ActionVerb::Proceed => "proceed",
            ActionVerb::ProceedSlow => "proceed_slow",
            ActionVerb::InformDriver => "inform_driver",
            ActionVerb::StoreObservation => "store_observation",
        }
    }

    pub fn from_token(token: &str) -> Option<Self> {
        match token {
            "yield" => Some(ActionVerb::Yield),
            "proceed" => Some(ActionVerb::Proceed),
            "proceed_slow" => Some(ActionVerb::ProceedSlow),
            "inform_driver" => Some(ActionVerb::InformDriver),
            "store_observation" => Some(ActionVerb::StoreObservation),
            _ => None,
        }
    }
}

/// Units accepted on physical quantities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Unit {
    #[serde(rename = "m")]
    Meters,
    #[serde(rename = "m/s")]
    MetersPerSecond,
    #[serde(rename = "m/s2")]
    MetersPerSecondSquared,
    #[serde(rename = "s")]
    Seconds,
    #[serde(rename = "rad")]
    Radians,
    #[serde(rename = "rad/s")]
    RadiansPerSecond,
    #[serde(rename = "m3")]
    CubicMeters,
}

impl Unit {
    pub fn token(&self) -> &'static str {
        match self {
            Unit::Meters => "m",
            Unit::MetersPerSecond => "m/s",
            Unit::MetersPerSecondSquared => "m/s2",
            Unit::Seconds => "s",
            Unit::Radians => "rad",
            Unit::RadiansPerSecond => "rad/s",
            Unit::CubicMeters => "m3",
        }
    }

    pub fn from_token(token: &str) -> Option<Self> {
        match token {
            "m" => Some(Unit::Meters),
            "m/s" => Some(Unit::MetersPerSecond),
            "m/s2" | "m/s^2" | "m/s²" => Some(Unit::MetersPerSecondSquared),
            "s" => Some(Unit::Seconds),
            "rad" => Some(Unit::Radians),
            "rad/s" => Some(Unit::RadiansPerSecond),
            "m3" | "m^3" | "m³" => Some(Unit::CubicMeters),
            _ => None,
        }
    }
}

/// A number tagged with its unit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quantity {
    pub value: f64,
    pub unit: Unit,
}

impl Quantity {
    pub fn new(value: f64, unit: Unit) -> Self {
        Quantity { value, unit }
    }

    pub fn meters(value: f64) -> Self {
        Quantity::new(value, Unit::Meters)
    }

    pub fn meters_per_second(value: f64) -> Self {
        Quantity::new(value, Unit::MetersPerSecond)
    }

    pub fn meters_per_second_squared(value: f64) -> Self {
        Quantity::new(value, Unit::MetersPerSecondSquared)
    }

    pub fn seconds(value: f64) -> Self {
        Quantity::new(value, Unit::Seconds)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vocabulary_token_round_trip() {
        for token in [
            "vehicle",
            "pedestrian",
            "cyclist",
            "public_transport",
            "static_object",
            "infrastructure",
        ] {
            assert_eq!(ElementClass::from_token(token).token(), token);
        }
        let odd = ElementClass::from_token("hovercraft");
        assert!(odd.is_other());
        assert_eq!(odd.token(), "hovercraft");
    }

    #[test]
    fn directional_inverse_pairs() {
        let pairs = [
            (SpatialRelation::LeftOf, SpatialRelation::RightOf),
            (SpatialRelation::FrontOf, SpatialRelation::Behind),
            (SpatialRelation::Contains, SpatialRelation::ContainedBy),
        ];
        for (a, b) in pairs {
            assert_eq!(a.inverse(), Some(b.clone()));
            assert_eq!(b.inverse(), Some(a));
        }
        assert_eq!(
            SpatialRelation::Touching.inverse(),
            Some(SpatialRelation::Touching)
        );
    }

    #[test]
    fn unit_aliases() {
        assert_eq!(Unit::from_token("m/s^2"), Some(Unit::MetersPerSecondSquared));
        assert_eq!(Unit::from_token("furlong"), None);
    }
}
