//! Deterministic synthetic scenario generation.
//!
//! Everything here is seeded and platform-independent, which makes it usable
//! both for benchmarking and for reproducible property suites: the same seed
//! always yields the same scenario on every run and machine.

use crate::describe::{derive_description, DeriveInput, ElementMeta};
use crate::math::{Mat3, Vec3, PI};
use crate::model::{Context, Element, ElementId, ScenarioDescription, StateSample, TimeInterval};
use crate::params::EngineParams;
use crate::vocab::ElementClass;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

/// SplitMix64: tiny, seedable, good-enough mixing for test-case generation.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    /// Uniform f64 in [0, 1).
    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    /// Uniform f64 in [lo, hi).
    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.unit()
    }

    /// Uniform usize in [0, n).
    pub fn below(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }

    pub fn chance(&mut self, p: f64) -> bool {
        self.unit() < p
    }

    pub fn pick<'a, T>(&mut self, items: &'a [T]) -> &'a T {
        &items[self.below(items.len())]
    }
}

/// Shape of one generated element's motion.
#[derive(Debug, Clone, Copy)]
enum MotionShape {
    Stationary,
    Straight,
    Arc,
    StopAndGo,
}

/// Generates a random but well-formed scenario: elements with trajectories on
/// a shared 2 Hz grid over `[-6, 0]`, plus metadata, then runs the standard
/// derivation pipeline so every annotation is consistent by construction.
pub fn random_description(seed: u64, params: &EngineParams) -> ScenarioDescription {
    let mut rng = SplitMix64::new(seed);
    let window = TimeInterval::new(-6.0, 0.0);
    let dt = 0.5;
    let steps = (window.duration() / dt) as usize;

    let classes = [
        ElementClass::Vehicle,
        ElementClass::Pedestrian,
        ElementClass::Cyclist,
        ElementClass::PublicTransport,
        ElementClass::StaticObject,
    ];

    let n = 1 + rng.below(5);
    let mut elements = Vec::new();
    let mut meta = BTreeMap::new();

    for i in 0..n {
        let id = if i == 0 {
            ElementId::from("ego")
        } else {
            ElementId::new(format!("e{i}"))
        };
        let class = if i == 0 {
            ElementClass::Vehicle
        } else {
            rng.pick(&classes).clone()
        };
        let shape = match rng.below(4) {
            0 => MotionShape::Stationary,
            1 => MotionShape::Straight,
            2 => MotionShape::Arc,
            _ => MotionShape::StopAndGo,
        };
        let origin = Vec3(rng.range(-25.0, 25.0), rng.range(-25.0, 25.0), 0.0);
        let heading = rng.range(-PI, PI);
        let speed = match class {
            ElementClass::Pedestrian => rng.range(0.5, 2.0),
            ElementClass::Cyclist => rng.range(1.0, 5.0),
            ElementClass::StaticObject => 0.0,
            _ => rng.range(1.0, 12.0),
        };
        let yaw_rate = rng.range(-0.4, 0.4);

        let mut trajectory = Vec::new();
        for k in 0..=steps {
            let t = window.start + k as f64 * dt;
            let elapsed = t - window.start;
            let sample = match shape {
                MotionShape::Stationary => StateSample {
                    t,
                    position: origin,
                    orientation: Mat3::from_yaw(heading),
                    speed: 0.0,
                    yaw_rate: None,
                },
                MotionShape::Straight => StateSample {
                    t,
                    position: origin.add(&Vec3(
                        libm::cos(heading) * speed * elapsed,
                        libm::sin(heading) * speed * elapsed,
                        0.0,
                    )),
                    orientation: Mat3::from_yaw(heading),
                    speed,
                    yaw_rate: Some(0.0),
                },
                MotionShape::Arc => {
                    if libm::fabs(yaw_rate) < 1e-3 || speed < 1e-6 {
                        StateSample {
                            t,
                            position: origin,
                            orientation: Mat3::from_yaw(heading),
                            speed: 0.0,
                            yaw_rate: None,
                        }
                    } else {
                        let r = speed / yaw_rate;
                        let phi0 = heading - PI / 2.0;
                        let phi = phi0 + yaw_rate * elapsed;
                        let center = origin.sub(&Vec3(
                            r * libm::cos(phi0),
                            r * libm::sin(phi0),
                            0.0,
                        ));
                        StateSample {
                            t,
                            position: center.add(&Vec3(
                                r * libm::cos(phi),
                                r * libm::sin(phi),
                                0.0,
                            )),
                            orientation: Mat3::from_yaw(heading + yaw_rate * elapsed),
                            speed,
                            yaw_rate: Some(yaw_rate),
                        }
                    }
                }
                MotionShape::StopAndGo => {
                    // 2 s moving, 2 s stopped, repeating.
                    let phase = libm::fmod(elapsed, 4.0);
                    let cycles = libm::floor(elapsed / 4.0);
                    let moved = cycles * 2.0 * speed + phase.min(2.0) * speed;
                    let moving = phase < 2.0;
                    StateSample {
                        t,
                        position: origin.add(&Vec3(
                            libm::cos(heading) * moved,
                            libm::sin(heading) * moved,
                            0.0,
                        )),
                        orientation: Mat3::from_yaw(heading),
                        speed: if moving { speed } else { 0.0 },
                        yaw_rate: Some(0.0),
                    }
                }
            };
            trajectory.push(sample);
        }

        let extent = match class {
            ElementClass::Pedestrian => (0.5, 0.5, 1.8),
            ElementClass::Cyclist => (1.8, 0.6, 1.8),
            ElementClass::PublicTransport => (12.0, 2.5, 3.2),
            ElementClass::StaticObject => (0.4, 0.4, 0.6),
            _ => (4.5, 1.8, 1.5),
        };
        let mut m = ElementMeta::new(class).with_extent(extent.0, extent.1, extent.2);
        if rng.chance(0.5) {
            m = m.with_attribute(String::from(*rng.pick(&["red", "green", "blue", "yellow"])));
        }
        meta.insert(id.clone(), m);
        elements.push(Element { id, trajectory });
    }

    let input = DeriveInput {
        scenario_id: format!("synthetic_{seed:016x}"),
        window,
        context: Context::default(),
        modalities: Vec::new(),
        elements,
        meta,
        ego_id: ElementId::from("ego"),
    };
    derive_description(&input, params).expect("synthetic inputs are well-formed")
}
