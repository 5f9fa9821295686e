//! The staged decision sequence around the taxi pick-up: yield while the
//! pedestrian crosses, keep yielding while the open door blocks the lane,
//! proceed slowly once the door closes and only the harmless bottle remains.

use scenarium_core::evaluation::decide;
use scenarium_core::math::Vec3;
use scenarium_core::model::TaskSpec;
use scenarium_core::physics::anticipate;
use scenarium_core::vocab::{ActionVerb, MotionState, TaskKind};
use scenarium_core::{ElementId, ScenarioDescription};
use scenarium_tools::config::RunConfig;
use scenarium_tools::fixtures::build_fixture;

/// Moves the pedestrian into the taxi and marks it stopped.
fn seat_pedestrian(desc: &mut ScenarioDescription) {
    let ped = ElementId::from("pedestrian_1");
    let seat = Vec3(9.5, -2.5, 0.0);
    for e in &mut desc.elements {
        if e.id == ped {
            for s in &mut e.trajectory {
                s.position = seat;
                s.speed = 0.0;
            }
        }
    }
    for a in &mut desc.spatial {
        if a.element_id == ped {
            a.position = seat;
        }
    }
    for a in &mut desc.semantic {
        if a.element_id == ped {
            a.state = MotionState::Stopped;
        }
    }
}

/// Closes the taxi door: occupancy back to the plain body, attribute gone.
fn close_taxi_door(desc: &mut ScenarioDescription) {
    let taxi = ElementId::from("taxi_1");
    for a in &mut desc.spatial {
        if a.element_id == taxi {
            a.occupancy = scenarium_core::model::Extent::new(4.5, 1.8, 1.5);
        }
    }
    for a in &mut desc.semantic {
        if a.element_id == taxi {
            a.attributes.retain(|attr| attr != "back door open");
        }
    }
}

#[test]
fn taxi_pickup_decision_sequence() {
    let config = RunConfig::default();
    let bundle = build_fixture("scenario1", &config).unwrap();
    let task = TaskSpec::new(TaskKind::Decision);

    // Phase 1: pedestrian crossing in front → yield, justified by it.
    let phase1 = decide(
        &bundle.description,
        Some(&bundle.anticipation),
        &task,
        &config.engine,
    )
    .unwrap();
    assert_eq!(phase1.verb, ActionVerb::Yield);
    assert!(phase1
        .justification
        .iter()
        .any(|j| format!("{j}").contains("pedestrian_1")));

    // Phase 2: pedestrian seated but the door still sticks into the lane.
    let mut seated = bundle.description.clone();
    seat_pedestrian(&mut seated);
    let ant2 = anticipate(&seated, bundle.horizon, bundle.dt, &config.engine).unwrap();
    let phase2 = decide(&seated, Some(&ant2), &task, &config.engine).unwrap();
    assert_eq!(phase2.verb, ActionVerb::Yield);
    assert!(phase2
        .justification
        .iter()
        .any(|j| format!("{j}").contains("taxi_1")));

    // Phase 3: door closed; only the runnable bottle remains in the lane.
    let mut cleared = seated.clone();
    close_taxi_door(&mut cleared);
    let ant3 = anticipate(&cleared, bundle.horizon, bundle.dt, &config.engine).unwrap();
    let phase3 = decide(&cleared, Some(&ant3), &task, &config.engine).unwrap();
    assert_eq!(phase3.verb, ActionVerb::ProceedSlow);
    assert!(phase3
        .justification
        .iter()
        .any(|j| format!("{j}").contains("bottle_1")));
}

#[test]
fn learning_task_records_the_yielding_cue() {
    let config = RunConfig::default();
    let bundle = build_fixture("scenario2", &config).unwrap();
    let action = decide(
        &bundle.description,
        Some(&bundle.anticipation),
        &TaskSpec::new(TaskKind::Learning),
        &config.engine,
    )
    .unwrap();
    assert_eq!(action.verb, ActionVerb::StoreObservation);
    assert!(action
        .justification
        .iter()
        .any(|j| format!("{j}").contains("car_1")));
    // The ego's own yielding state is not a cue.
    assert!(!action.justification.iter().any(|j| format!("{j}").contains("ego")));
}

#[test]
fn scenario2_constraints_all_satisfied() {
    let config = RunConfig::default();
    let bundle = build_fixture("scenario2", &config).unwrap();
    let verdicts =
        scenarium_core::physics::check_constraints(&bundle.description, &config.engine);
    // Priority + speed limit + safe gap from the rules, plus the car's
    // acceleration bound.
    assert_eq!(verdicts.len(), 4);
    for v in &verdicts {
        assert!(
            v.satisfied(),
            "constraint `{}` not satisfied: {v:?}",
            v.constraint_id
        );
    }
}

#[test]
fn scenario1_taxi_stays_put_over_the_horizon() {
    let config = RunConfig::default();
    let bundle = build_fixture("scenario1", &config).unwrap();
    let taxi = bundle
        .anticipation
        .predicted_trajectories
        .get(&ElementId::from("taxi_1"))
        .expect("taxi prediction");
    let anchor = bundle
        .description
        .element(&ElementId::from("taxi_1"))
        .unwrap()
        .last_state()
        .unwrap()
        .position;
    assert_eq!(taxi.len(), 10);
    for s in taxi {
        assert_eq!(s.position, anchor);
        assert_eq!(s.speed, 0.0);
    }
}

#[test]
fn missing_reappearance_is_named_in_the_drilldown() {
    let config = RunConfig::default();
    let bundle = build_fixture("scenario2", &config).unwrap();
    // Candidate knows the description but anticipates nothing.
    let empty_ant = scenarium_core::ScenarioAnticipation::empty(
        bundle.description.id.clone(),
        bundle.horizon,
        bundle.dt,
    );
    let score = scenarium_core::evaluation::score_understanding(
        &bundle.description,
        Some(&bundle.anticipation),
        &bundle.description,
        Some(&empty_ant),
        &config.engine,
    );
    assert_eq!(score.anticipation.events.recall, 0.0);
    assert_eq!(score.anticipation.events.precision, 1.0);
    assert!(score
        .notes
        .iter()
        .any(|n| n.note.contains("reappears") && n.note.contains("cyclist_1")));
    // The descriptive dimensions stay perfect.
    assert!((score.aggregate - 1.0).abs() < 1e-12);
}

#[test]
fn action_justifications_resolve() {
    let config = RunConfig::default();
    for id in ["scenario1", "scenario2"] {
        let bundle = build_fixture(id, &config).unwrap();
        for (kind, action) in &bundle.actions {
            let report = scenarium_core::model::validate::validate_action(
                action,
                &bundle.description,
                Some(&bundle.anticipation),
            );
            assert!(
                report.is_empty(),
                "{id}/{kind:?}: {:?}",
                report.violations
            );
        }
    }
}
