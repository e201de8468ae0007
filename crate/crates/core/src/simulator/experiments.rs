//! Replays of the identical- and similar-invocation experiments.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::routing::{simulate_invocation, ConfusionModel, InvocationOutcome};
use crate::catalog::Catalog;
use crate::error::{Error, Result};
use crate::graph::{DistanceTable, PhoneticGraph};
use crate::phonetics::normalize_phrase;
use crate::planner::{apply_plan, plan_actions, StateMap};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    /// Sets of skills sharing one invocation phrase.
    Identical,
    /// A dense cluster of distinct but similar-sounding phrases.
    Similar,
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "identical" => Ok(Scenario::Identical),
            "similar" => Ok(Scenario::Similar),
            other => Err(Error::invalid(format!("unknown scenario `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutcomeCounts {
    pub trials: usize,
    pub correct: usize,
    pub incorrect: usize,
    pub none: usize,
}

impl OutcomeCounts {
    fn record(&mut self, o: &InvocationOutcome) {
        self.trials += 1;
        match o {
            InvocationOutcome::Correct => self.correct += 1,
            InvocationOutcome::Incorrect(_) => self.incorrect += 1,
            InvocationOutcome::None => self.none += 1,
        }
    }
}

impl fmt::Display for OutcomeCounts {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "trials: {} correct: {} incorrect: {} none: {}",
            self.trials, self.correct, self.incorrect, self.none
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Misroute {
    pub defended: bool,
    pub target: String,
    pub winner: String,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub scenario: Scenario,
    pub baseline: OutcomeCounts,
    pub defended: OutcomeCounts,
    pub misroutes: Vec<Misroute>,
}

impl fmt::Display for ExperimentReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "baseline: {}", self.baseline)?;
        writeln!(f, "defended: {}", self.defended)
    }
}

/// Skills grouped by normalized invocation phrase, groups of two or more,
/// in order of first appearance.
pub fn identical_sets(catalog: &Catalog) -> Vec<Vec<String>> {
    let mut order: Vec<String> = Vec::new();
    let mut groups: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for s in catalog.skills() {
        let key = normalize_phrase(&s.invocation);
        if !groups.contains_key(&key) {
            order.push(key.clone());
        }
        groups.entry(key).or_default().push(s.id.clone());
    }
    order
        .into_iter()
        .filter_map(|k| groups.remove(&k))
        .filter(|g| g.len() >= 2)
        .collect()
}

/// The skill a user most plausibly means: most reviews, earliest listed
/// on ties.
fn intended_target<'a>(catalog: &Catalog, members: &'a [String]) -> &'a str {
    let mut best = &members[0];
    for m in &members[1..] {
        let reviews = |id: &str| catalog.get(id).map_or(0, |s| s.reviews);
        if reviews(m) > reviews(best) {
            best = m;
        }
    }
    best
}

/// Runs the baseline (everything in default state) and defended (target
/// enabled, its graph neighbors disabled) configurations.
///
/// * identical: one baseline trial per set aimed at the set's intended
///   target, and one defended trial per member;
/// * similar: every skill is a target once in each configuration.
pub fn run_experiment(
    scenario: Scenario,
    catalog: &Catalog,
    distances: &DistanceTable,
    graph: &PhoneticGraph,
    model: &ConfusionModel,
) -> Result<ExperimentReport> {
    model.validate()?;
    let (baseline_targets, defended_targets): (Vec<String>, Vec<String>) = match scenario {
        Scenario::Identical => {
            let sets = identical_sets(catalog);
            if sets.is_empty() {
                return Err(Error::invalid("fixture has no identical-invocation sets"));
            }
            (
                sets.iter().map(|s| intended_target(catalog, s).to_string()).collect(),
                sets.into_iter().flatten().collect(),
            )
        }
        Scenario::Similar => {
            let all: Vec<String> = catalog.skills().iter().map(|s| s.id.clone()).collect();
            (all.clone(), all)
        }
    };

    let mut report = ExperimentReport {
        scenario,
        baseline: OutcomeCounts::default(),
        defended: OutcomeCounts::default(),
        misroutes: vec![],
    };
    let mut trial = 0u64;
    let default_state = StateMap::new();

    for target in &baseline_targets {
        let o = simulate_invocation(target, catalog, distances, &default_state, model, trial)?;
        trial += 1;
        report.baseline.record(&o);
        if let InvocationOutcome::Incorrect(w) = &o {
            report.misroutes.push(misroute(false, target, w, distances));
        }
    }
    for target in &defended_targets {
        let matched = BTreeSet::from([target.clone()]);
        let plan = plan_actions(&matched, graph, &default_state)?;
        let state = apply_plan(&default_state, &plan);
        let o = simulate_invocation(target, catalog, distances, &state, model, trial)?;
        trial += 1;
        report.defended.record(&o);
        if let InvocationOutcome::Incorrect(w) = &o {
            report.misroutes.push(misroute(true, target, w, distances));
        }
    }
    Ok(report)
}

fn misroute(defended: bool, target: &str, winner: &str, distances: &DistanceTable) -> Misroute {
    Misroute {
        defended,
        target: target.to_string(),
        winner: winner.to_string(),
        distance: distances.get(target, winner).unwrap_or(f64::NAN),
    }
}
