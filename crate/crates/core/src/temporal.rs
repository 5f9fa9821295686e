//! Temporal derivation: motion-state classification, state sequences,
//! pairwise interval orderings and periodicity detection.
//!
//! Stillness is measured on the trajectory sample grid. `parked` needs
//! sustained stillness looking backwards from the query time; `yielding`
//! needs a crossing-priority holder that is itself in motion, because pure
//! kinematics cannot tell yielding apart from plain stopping.

use crate::math::Vec3;
use crate::model::{Element, ElementId, StateInterval, StateSample, TimeInterval};
use crate::params::TemporalParams;
use crate::vocab::{ElementClass, IntervalOrder, MotionState};
use alloc::vec::Vec;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TemporalError {
    #[error("time {0} outside the trajectory span")]
    OutOfSpan(f64),
}

/// Classifies the motion state of an element at time `t`.
///
/// `priority_mover_present` says whether some other element holds a
/// crossing-priority rule and is in motion at `t`; the caller derives it from
/// the context rule set.
pub fn classify_state(
    element: &Element,
    class: &ElementClass,
    t: f64,
    priority_mover_present: bool,
    params: &TemporalParams,
) -> Result<MotionState, TemporalError> {
    let span = element.span().ok_or(TemporalError::OutOfSpan(t))?;
    if !span.contains(t) {
        return Err(TemporalError::OutOfSpan(t));
    }
    let speed = element.speed_at(t).ok_or(TemporalError::OutOfSpan(t))?;
    if speed >= params.still_speed {
        return Ok(match class {
            ElementClass::Pedestrian => MotionState::Walking,
            _ => MotionState::Moving,
        });
    }
    if class.is_driving() {
        if still_duration_until(element, t, params) >= params.park_after {
            return Ok(MotionState::Parked);
        }
        if priority_mover_present {
            return Ok(MotionState::Yielding);
        }
    }
    Ok(MotionState::Stopped)
}

/// Length of the maximal still run ending at `t`, measured on the sample grid.
fn still_duration_until(element: &Element, t: f64, params: &TemporalParams) -> f64 {
    let mut start = t;
    for s in element.trajectory.iter().rev() {
        if s.t > t {
            continue;
        }
        if s.speed < params.still_speed {
            start = s.t;
        } else {
            break;
        }
    }
    t - start
}

/// Splits the trajectory span into maximal constant-state intervals.
///
/// `priority_mover_at` reports, per sample time, whether a moving
/// crossing-priority holder exists. Fewer than two samples yield no sequence.
pub fn extract_state_sequence<F>(
    element: &Element,
    class: &ElementClass,
    params: &TemporalParams,
    priority_mover_at: F,
) -> Vec<StateInterval>
where
    F: Fn(f64) -> bool,
{
    if element.trajectory.len() < 2 {
        return Vec::new();
    }
    // Runs switch at the first sample evidencing the new state.
    let mut starts: Vec<(MotionState, f64)> = Vec::new();
    for sample in &element.trajectory {
        let state = classify_state(element, class, sample.t, priority_mover_at(sample.t), params)
            .expect("sample time lies in span");
        if starts.last().map(|(s, _)| s) != Some(&state) {
            starts.push((state, sample.t));
        }
    }
    let span_end = element.trajectory.last().expect("non-empty").t;
    let mut runs = Vec::with_capacity(starts.len());
    for (i, (state, start)) in starts.iter().enumerate() {
        let end = starts.get(i + 1).map(|(_, s)| *s).unwrap_or(span_end);
        let interval = TimeInterval::new(*start, end);
        if interval.is_ordered() {
            runs.push(StateInterval {
                state: state.clone(),
                interval,
            });
        }
    }
    runs
}

/// Orders two intervals: `before` when `a` ends more than `eps` ahead of `b`,
/// `after` mirrored, `simultaneous` otherwise. Exactly one relation holds.
pub fn order_relation(a: &TimeInterval, b: &TimeInterval, eps: f64) -> IntervalOrder {
    if a.end < b.start - eps {
        IntervalOrder::Before
    } else if b.end < a.start - eps {
        IntervalOrder::After
    } else {
        IntervalOrder::Simultaneous
    }
}

/// Finds the smallest period with which the state sequence repeats, comparing
/// states exactly and durations within the configured relative tolerance. The
/// final interval may be truncated by the window. Needs at least four
/// intervals and two full cycles.
pub fn detect_periodicity(seq: &[StateInterval], params: &TemporalParams) -> Option<f64> {
    let n = seq.len();
    if n < 4 {
        return None;
    }
    let tol = params.period_duration_tol;
    for k in 1..=n / 2 {
        if n < 2 * k {
            break;
        }
        let mut ok = true;
        for i in 0..n - k {
            let a = &seq[i];
            let b = &seq[i + k];
            if a.state != b.state {
                ok = false;
                break;
            }
            let da = a.interval.duration();
            let db = b.interval.duration();
            let truncated_tail = i + k == n - 1;
            let within = libm::fabs(da - db) <= tol * da.max(db);
            if !(within || (truncated_tail && db <= da * (1.0 + tol))) {
                ok = false;
                break;
            }
        }
        if ok {
            return Some(seq[..k].iter().map(|s| s.interval.duration()).sum());
        }
    }
    None
}

/// Central finite differences of positions; one-sided at the endpoints.
pub fn derive_velocities(trajectory: &[StateSample]) -> Vec<(f64, Vec3)> {
    differentiate(trajectory.iter().map(|s| (s.t, s.position)))
}

/// Central finite differences of a velocity series.
pub fn derive_accelerations(velocities: &[(f64, Vec3)]) -> Vec<(f64, Vec3)> {
    differentiate(velocities.iter().copied())
}

fn differentiate(series: impl Iterator<Item = (f64, Vec3)>) -> Vec<(f64, Vec3)> {
    let points: Vec<(f64, Vec3)> = series.collect();
    let n = points.len();
    if n < 2 {
        return Vec::new();
    }
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let (lo, hi) = if i == 0 {
            (0, 1)
        } else if i == n - 1 {
            (n - 2, n - 1)
        } else {
            (i - 1, i + 1)
        };
        let dt = points[hi].0 - points[lo].0;
        let dv = points[hi].1.sub(&points[lo].1).scale(1.0 / dt);
        out.push((points[i].0, dv));
    }
    out
}

/// Convenience: orderings of one element's interval against all others.
pub fn derive_orderings(
    subject: &ElementId,
    subject_interval: &TimeInterval,
    others: &[(ElementId, TimeInterval)],
    params: &TemporalParams,
) -> alloc::collections::BTreeSet<(ElementId, IntervalOrder)> {
    others
        .iter()
        .filter(|(id, _)| id != subject)
        .map(|(id, interval)| {
            (
                id.clone(),
                order_relation(subject_interval, interval, params.order_eps),
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::Mat3;
    use crate::synth::SplitMix64;

    fn still_vehicle(duration: f64, dt: f64) -> Element {
        let mut e = Element::new("car");
        let steps = (duration / dt) as usize;
        for k in 0..=steps {
            e.trajectory.push(StateSample {
                t: k as f64 * dt,
                position: Vec3(3.0, 1.0, 0.0),
                orientation: Mat3::IDENTITY,
                speed: 0.0,
                yaw_rate: None,
            });
        }
        e
    }

    fn mover(speed: f64, duration: f64, dt: f64) -> Element {
        let mut e = Element::new("m");
        let steps = (duration / dt) as usize;
        for k in 0..=steps {
            let t = k as f64 * dt;
            e.trajectory.push(StateSample {
                t,
                position: Vec3(speed * t, 0.0, 0.0),
                orientation: Mat3::IDENTITY,
                speed,
                yaw_rate: None,
            });
        }
        e
    }

    #[test]
    fn stationary_vehicle_parks_after_threshold() {
        let p = TemporalParams::default();
        let e = still_vehicle(10.0, 0.5);
        let state = classify_state(&e, &ElementClass::Vehicle, 6.0, false, &p).unwrap();
        assert_eq!(state, MotionState::Parked);
        // Too early for parked.
        let state = classify_state(&e, &ElementClass::Vehicle, 2.0, false, &p).unwrap();
        assert_eq!(state, MotionState::Stopped);
        assert!(classify_state(&e, &ElementClass::Vehicle, 11.0, false, &p).is_err());
    }

    #[test]
    fn pedestrians_walk_and_objects_stop() {
        let p = TemporalParams::default();
        let walker = mover(1.4, 4.0, 0.5);
        assert_eq!(
            classify_state(&walker, &ElementClass::Pedestrian, 2.0, false, &p).unwrap(),
            MotionState::Walking
        );
        let bottle = still_vehicle(10.0, 0.5);
        assert_eq!(
            classify_state(&bottle, &ElementClass::StaticObject, 8.0, true, &p).unwrap(),
            MotionState::Stopped,
            "non-driving classes never park or yield"
        );
    }

    #[test]
    fn yielding_needs_a_moving_priority_holder() {
        let p = TemporalParams::default();
        let e = still_vehicle(3.0, 0.5);
        assert_eq!(
            classify_state(&e, &ElementClass::Vehicle, 3.0, true, &p).unwrap(),
            MotionState::Yielding
        );
        assert_eq!(
            classify_state(&e, &ElementClass::Vehicle, 3.0, false, &p).unwrap(),
            MotionState::Stopped
        );
        // Sustained stillness wins over yielding.
        let parked = still_vehicle(10.0, 0.5);
        assert_eq!(
            classify_state(&parked, &ElementClass::Vehicle, 9.0, true, &p).unwrap(),
            MotionState::Parked
        );
    }

    #[test]
    fn sequence_of_constant_mover_is_single_interval() {
        let p = TemporalParams::default();
        let e = mover(5.0, 6.0, 0.5);
        let seq = extract_state_sequence(&e, &ElementClass::Vehicle, &p, |_| false);
        assert_eq!(seq.len(), 1);
        assert_eq!(seq[0].state, MotionState::Moving);
        assert_eq!(seq[0].interval, TimeInterval::new(0.0, 6.0));
    }

    fn stop_and_go(move_s: f64, stop_s: f64, cycles: usize, dt: f64) -> Element {
        let mut e = Element::new("sg");
        let mut t = 0.0;
        let mut x = 0.0;
        let total = (move_s + stop_s) * cycles as f64;
        while t <= total + 1e-9 {
            let phase = libm::fmod(t, move_s + stop_s);
            let moving = phase < move_s;
            if moving {
                x += 2.0 * dt;
            }
            e.trajectory.push(StateSample {
                t,
                position: Vec3(x, 0.0, 0.0),
                orientation: Mat3::IDENTITY,
                speed: if moving { 2.0 } else { 0.0 },
                yaw_rate: None,
            });
            t += dt;
        }
        e
    }

    #[test]
    fn stop_and_go_square_wave_yields_six_intervals() {
        let p = TemporalParams::default();
        let e = stop_and_go(5.0, 5.0, 3, 0.5);
        let seq = extract_state_sequence(&e, &ElementClass::Vehicle, &p, |_| false);
        assert_eq!(seq.len(), 6, "sequence: {seq:?}");
        assert_eq!(seq[0].state, MotionState::Moving);
        assert_eq!(seq[1].state, MotionState::Stopped);
        // Partition: contiguous cover of the span.
        for w in seq.windows(2) {
            assert_eq!(w[0].interval.end, w[1].interval.start);
        }
        assert_eq!(seq.first().unwrap().interval.start, 0.0);
        assert_eq!(seq.last().unwrap().interval.end, e.span().unwrap().end);
    }

    #[test]
    fn order_relation_cases() {
        let eps = 0.1;
        let a = TimeInterval::new(0.0, 1.0);
        let b = TimeInterval::new(2.0, 3.0);
        assert_eq!(order_relation(&a, &b, eps), IntervalOrder::Before);
        assert_eq!(order_relation(&b, &a, eps), IntervalOrder::After);
        let c = TimeInterval::new(0.0, 2.0);
        let d = TimeInterval::new(1.0, 3.0);
        assert_eq!(order_relation(&c, &d, eps), IntervalOrder::Simultaneous);
        assert_eq!(order_relation(&c, &c, eps), IntervalOrder::Simultaneous);
    }

    #[test]
    fn order_relation_trichotomy_and_duality() {
        let mut rng = SplitMix64::new(0x0bde);
        for _ in 0..5_000 {
            let mk = |rng: &mut SplitMix64| {
                let s = rng.range(-10.0, 10.0);
                TimeInterval::new(s, s + rng.range(0.01, 5.0))
            };
            let a = mk(&mut rng);
            let b = mk(&mut rng);
            let ab = order_relation(&a, &b, 0.1);
            let ba = order_relation(&b, &a, 0.1);
            match ab {
                IntervalOrder::Before => assert_eq!(ba, IntervalOrder::After),
                IntervalOrder::After => assert_eq!(ba, IntervalOrder::Before),
                IntervalOrder::Simultaneous => assert_eq!(ba, IntervalOrder::Simultaneous),
                IntervalOrder::Other(_) => unreachable!(),
            }
        }
    }

    #[test]
    fn periodicity_of_constructed_waves() {
        let p = TemporalParams::default();
        let sg = stop_and_go(5.0, 5.0, 3, 0.5);
        let seq = extract_state_sequence(&sg, &ElementClass::Vehicle, &p, |_| false);
        let period = detect_periodicity(&seq, &p);
        assert!(period.is_some());
        assert!((period.unwrap() - 10.0).abs() <= 1.0, "got {period:?}");

        let light = stop_and_go(30.0, 30.0, 3, 0.5);
        let seq = extract_state_sequence(&light, &ElementClass::Vehicle, &p, |_| false);
        let period = detect_periodicity(&seq, &p).unwrap();
        assert!((period - 60.0).abs() <= 3.0, "got {period}");

        let mono = mover(3.0, 20.0, 0.5);
        let seq = extract_state_sequence(&mono, &ElementClass::Vehicle, &p, |_| false);
        assert_eq!(detect_periodicity(&seq, &p), None);
    }

    #[test]
    fn classification_stable_under_resampling() {
        let p = TemporalParams::default();
        let coarse = stop_and_go(5.0, 5.0, 2, 0.5);
        let fine = stop_and_go(5.0, 5.0, 2, 0.25);
        for sample in &coarse.trajectory {
            let a = classify_state(&coarse, &ElementClass::Vehicle, sample.t, false, &p).unwrap();
            let b = classify_state(&fine, &ElementClass::Vehicle, sample.t, false, &p).unwrap();
            assert_eq!(a, b, "diverged at t={}", sample.t);
        }
    }

    #[test]
    fn finite_differences_recover_linear_motion() {
        let e = mover(3.0, 4.0, 0.5);
        let v = derive_velocities(&e.trajectory);
        for (_, vel) in &v {
            assert!((vel.x() - 3.0).abs() < 1e-9);
            assert!(vel.y().abs() < 1e-12);
        }
        let a = derive_accelerations(&v);
        for (_, acc) in &a {
            assert!(acc.norm() < 1e-9);
        }
    }
}
