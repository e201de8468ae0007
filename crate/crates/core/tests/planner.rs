mod common;

use std::collections::BTreeSet;

use common::{check_plan, costs, fixture, random_planner_case, PlannerCase};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use squatguard_core::graph::build_graph;
use squatguard_core::planner::{plan_actions, SkillState, StateMap};
use squatguard_core::Error;

fn set(ids: &[&str]) -> BTreeSet<String> {
    ids.iter().map(|s| s.to_string()).collect()
}

#[test]
fn six_skill_plan() {
    let g = build_graph(&fixture("six_skills.jsonl"), costs(), 200.0).unwrap();
    let plan = plan_actions(&set(&["fitbit", "lyft"]), &g, &StateMap::new()).unwrap();
    assert_eq!(plan.enable, set(&["fitbit", "lyft"]));
    assert_eq!(plan.disable, set(&["fit-bid", "phitbit"]));
    assert_eq!(plan.est_setup_seconds, 2.0 * 2.5 + 2.0 * 3.08);
    assert_eq!(
        plan.to_json(),
        r#"{"disable":["fit-bid","phitbit"],"enable":["fitbit","lyft"],"est_setup_seconds":11.16}"#
    );
}

#[test]
fn user_choices_are_respected() {
    let g = build_graph(&fixture("six_skills.jsonl"), costs(), 200.0).unwrap();
    let mut current = StateMap::new();
    current.insert("fitbit".into(), SkillState::Enabled);
    current.insert("phitbit".into(), SkillState::Enabled);
    current.insert("fit-bid".into(), SkillState::Disabled);
    let plan = plan_actions(&set(&["fitbit"]), &g, &current).unwrap();
    assert!(plan.is_empty());
    assert_eq!(plan.est_setup_seconds, 0.0);
}

#[test]
fn empty_match_is_empty_plan() {
    let g = build_graph(&fixture("six_skills.jsonl"), costs(), 200.0).unwrap();
    let plan = plan_actions(&BTreeSet::new(), &g, &StateMap::new()).unwrap();
    assert_eq!(plan.to_json(), r#"{"disable":[],"enable":[],"est_setup_seconds":0.0}"#);
}

#[test]
fn unknown_matched_skill() {
    let g = build_graph(&fixture("six_skills.jsonl"), costs(), 200.0).unwrap();
    let err = plan_actions(&set(&["nope"]), &g, &StateMap::new()).unwrap_err();
    assert!(matches!(err, Error::UnknownSkill(id) if id == "nope"));
}

#[test]
fn randomized_instances_satisfy_invariants() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for i in 0..300 {
        let case = random_planner_case(&mut rng);
        let plan = plan_actions(&case.matched, &case.graph, &case.current).unwrap();
        if let Err(e) = check_plan(&case, &plan) {
            panic!("instance {i}: {e}");
        }
    }
}

proptest! {
    #[test]
    fn growing_the_graph_never_shrinks_disables(seed in any::<u64>()) {
        // Adding edges (a lower-threshold graph is a subgraph) can only add
        // disable actions when matched set and prior state are fixed.
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let PlannerCase { graph, matched, current } = random_planner_case(&mut rng);
        let file = graph.export();
        let mut sub = file.clone();
        sub.edges.retain(|e| e.d <= 200.0);
        sub.threshold = 200.0;
        let small = squatguard_core::graph::PhoneticGraph::from_export(&sub, graph.skill_ids().iter().cloned()).unwrap();
        let a = plan_actions(&matched, &small, &current).unwrap();
        let b = plan_actions(&matched, &graph, &current).unwrap();
        prop_assert!(a.disable.is_subset(&b.disable));
        prop_assert_eq!(a.enable, b.enable);
        prop_assert!(a.est_setup_seconds <= b.est_setup_seconds);
    }
}
