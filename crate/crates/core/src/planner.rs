//! Enable/disable planning.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::PhoneticGraph;

pub const ENABLE_SECONDS: f64 = 2.5;
pub const DISABLE_SECONDS: f64 = 3.08;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum SkillState {
    #[default]
    Default,
    Enabled,
    Disabled,
}

pub type StateMap = BTreeMap<String, SkillState>;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ActionPlan {
    pub enable: BTreeSet<String>,
    pub disable: BTreeSet<String>,
    pub est_setup_seconds: f64,
}

impl ActionPlan {
    pub fn is_empty(&self) -> bool {
        self.enable.is_empty() && self.disable.is_empty()
    }

    pub fn to_json(&self) -> String {
        crate::canonical::to_canonical_string(self)
    }
}

/// `2.5 s` per enable plus `3.08 s` per disable.
pub fn estimate_setup_time(plan: &ActionPlan) -> f64 {
    setup_seconds(plan.enable.len(), plan.disable.len())
}

pub fn setup_seconds(enables: usize, disables: usize) -> f64 {
    ENABLE_SECONDS * enables as f64 + DISABLE_SECONDS * disables as f64
}

fn state_of(current: &StateMap, id: &str) -> SkillState {
    current.get(id).copied().unwrap_or_default()
}

/// Enables the matched skills and disables their graph neighbors.
///
/// Matched skills are never disabled. Neighbors the user already disabled
/// need no action, and neighbors the user enabled on their own are left
/// alone (logged as a conflict).
pub fn plan_actions(
    matched: &BTreeSet<String>,
    graph: &PhoneticGraph,
    current: &StateMap,
) -> Result<ActionPlan> {
    if let Some(id) = matched.iter().find(|id| !graph.contains(id)) {
        return Err(Error::UnknownSkill(id.clone()));
    }
    let enable: BTreeSet<String> = matched
        .iter()
        .filter(|id| state_of(current, id) != SkillState::Enabled)
        .cloned()
        .collect();

    let mut disable = BTreeSet::new();
    for m in matched {
        for n in graph.neighbor_ids(m)? {
            if matched.contains(n) {
                continue;
            }
            match state_of(current, n) {
                SkillState::Default => {
                    disable.insert(n.to_string());
                }
                SkillState::Disabled => {}
                SkillState::Enabled => {
                    log::warn!("{n} is a phonetic neighbor of matched {m} but was enabled by the user; leaving it enabled")
                }
            }
        }
    }
    let est_setup_seconds = setup_seconds(enable.len(), disable.len());
    Ok(ActionPlan {
        enable,
        disable,
        est_setup_seconds,
    })
}

/// Applies a plan to an in-memory state map.
pub fn apply_plan(current: &StateMap, plan: &ActionPlan) -> StateMap {
    let mut next = current.clone();
    for id in &plan.enable {
        next.insert(id.clone(), SkillState::Enabled);
    }
    for id in &plan.disable {
        next.insert(id.clone(), SkillState::Disabled);
    }
    next
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Edge, GraphFile};

    fn graph(edges: &[(&str, &str, f64)], nodes: &[&str]) -> PhoneticGraph {
        let file = GraphFile {
            threshold: 200.0,
            edges: edges
                .iter()
                .map(|(a, b, d)| Edge {
                    a: a.to_string(),
                    b: b.to_string(),
                    d: *d,
                })
                .collect(),
        };
        PhoneticGraph::from_export(&file, nodes.iter().map(|s| s.to_string())).unwrap()
    }

    fn set(ids: &[&str]) -> BTreeSet<String> {
        ids.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn fitbit_phitbit() {
        let g = graph(&[("fitbit", "phitbit", 0.0)], &["fitbit", "phitbit", "lyft"]);
        let plan = plan_actions(&set(&["fitbit"]), &g, &StateMap::new()).unwrap();
        assert_eq!(plan.enable, set(&["fitbit"]));
        assert_eq!(plan.disable, set(&["phitbit"]));
        assert_eq!(plan.est_setup_seconds, 2.5 + 3.08);
    }

    #[test]
    fn empty_match_empty_plan() {
        let g = graph(&[("a", "b", 1.0)], &["a", "b"]);
        let plan = plan_actions(&BTreeSet::new(), &g, &StateMap::new()).unwrap();
        assert!(plan.is_empty());
        assert_eq!(plan.est_setup_seconds, 0.0);
    }

    #[test]
    fn matched_neighbors_both_enabled() {
        let g = graph(&[("a", "b", 1.0), ("b", "c", 1.0)], &["a", "b", "c"]);
        let plan = plan_actions(&set(&["a", "b"]), &g, &StateMap::new()).unwrap();
        assert_eq!(plan.enable, set(&["a", "b"]));
        assert_eq!(plan.disable, set(&["c"]));
    }

    #[test]
    fn unknown_match_is_an_error() {
        let g = graph(&[], &["a"]);
        assert!(matches!(
            plan_actions(&set(&["zz"]), &g, &StateMap::new()),
            Err(Error::UnknownSkill(_))
        ));
    }

    #[test]
    fn respects_prior_state() {
        let g = graph(&[("a", "b", 1.0), ("a", "c", 1.0), ("a", "d", 1.0)], &["a", "b", "c", "d"]);
        let current = StateMap::from([
            ("a".to_string(), SkillState::Enabled),
            ("b".to_string(), SkillState::Enabled),
            ("c".to_string(), SkillState::Disabled),
        ]);
        let plan = plan_actions(&set(&["a"]), &g, &current).unwrap();
        assert!(plan.enable.is_empty());
        assert_eq!(plan.disable, set(&["d"]));
    }

    #[test]
    fn replanning_after_apply_is_empty() {
        let g = graph(&[("a", "b", 1.0), ("c", "b", 1.0)], &["a", "b", "c"]);
        let plan = plan_actions(&set(&["a", "c"]), &g, &StateMap::new()).unwrap();
        let state = apply_plan(&StateMap::new(), &plan);
        assert!(plan_actions(&set(&["a", "c"]), &g, &state).unwrap().is_empty());
    }

    #[test]
    fn setup_time_rates() {
        assert_eq!(setup_seconds(0, 0), 0.0);
        assert_eq!(setup_seconds(1, 0), 2.5);
        assert!((setup_seconds(10, 20) - 86.6).abs() < 1e-9);
    }

    #[test]
    fn plan_json_shape() {
        let plan = ActionPlan::default();
        assert_eq!(plan.to_json(), r#"{"disable":[],"enable":[],"est_setup_seconds":0.0}"#);
        let s: SkillState = serde_json::from_str("\"DISABLED\"").unwrap();
        assert_eq!(s, SkillState::Disabled);
    }
}
