//! Scenario-understanding core: a typed model of traffic scenarios across the
//! semantic, spatial, temporal and physical dimensions, derivation engines
//! that compute ground-truth annotations from element trajectories, trajectory
//! prediction and anticipation, and scoring of candidate descriptions against
//! ground truth.
//!
//! The crate is `no_std` (alloc required) and fully deterministic: every
//! operation is a pure function of its inputs, so descriptions can be derived
//! and scored in parallel without shared state.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod describe;
pub mod evaluation;
pub mod geometry;
pub mod math;
pub mod model;
pub mod params;
pub mod physics;
pub mod synth;
pub mod temporal;
pub mod vocab;

pub use model::validate::{
    dimension_partition_check, validate_anticipation, validate_description, ValidationReport,
    Violation, ViolationCode,
};
pub use model::{
    Action, AnnotationRef, Element, ElementId, ScenarioAnticipation, ScenarioDescription,
    StateSample, TaskSpec, TimeInterval,
};
pub use params::EngineParams;
