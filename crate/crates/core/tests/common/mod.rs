#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::sync::OnceLock;

use rand::Rng;
use squatguard_core::catalog::{Catalog, Skill};
use squatguard_core::graph::{DistanceTable, PhoneticGraph};
use squatguard_core::planner::{apply_plan, plan_actions, ActionPlan, SkillState, StateMap};
use squatguard_core::phonetics::{learn_cost_matrix, CostMatrix, Overrides, Phoneme, PronunciationDict};

pub fn data(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(rel)
}

pub fn cmu() -> &'static PronunciationDict {
    static DICT: OnceLock<PronunciationDict> = OnceLock::new();
    DICT.get_or_init(|| PronunciationDict::load(data("cmudict.dict")).unwrap())
}

pub fn costs() -> &'static CostMatrix {
    static COSTS: OnceLock<CostMatrix> = OnceLock::new();
    COSTS.get_or_init(|| learn_cost_matrix(cmu()).unwrap())
}

pub fn overrides() -> Overrides {
    Overrides::load(data("fixtures/overrides.json")).unwrap()
}

/// Fixture catalog with phonemes resolved against the full dictionary.
pub fn fixture(name: &str) -> Catalog {
    let mut c = Catalog::load(data(&format!("fixtures/{name}"))).unwrap();
    c.resolve_phonemes(cmu(), &overrides()).unwrap();
    c
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Step {
    Pair,
    Delete,
    Insert,
}

/// Every alignment path of an n×m grid.
pub fn all_paths(n: usize, m: usize) -> Vec<Vec<Step>> {
    if n == 0 && m == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    if n > 0 && m > 0 {
        for mut p in all_paths(n - 1, m - 1) {
            p.push(Step::Pair);
            out.push(p);
        }
    }
    if n > 0 {
        for mut p in all_paths(n - 1, m) {
            p.push(Step::Delete);
            out.push(p);
        }
    }
    if m > 0 {
        for mut p in all_paths(n, m - 1) {
            p.push(Step::Insert);
            out.push(p);
        }
    }
    out
}

/// Cost of the edit script described by `path`, with substitution costs
/// looked up one cell at a time.
pub fn path_cost(path: &[Step], a: &[u16], b: &[u16], sub: impl Fn(u16, u16) -> f64, indel: f64) -> f64 {
    let (mut i, mut j, mut total) = (0, 0, 0.0);
    for s in path {
        match s {
            Step::Pair => {
                if a[i] != b[j] {
                    total += sub(a[i], b[j]);
                }
                i += 1;
                j += 1;
            }
            Step::Delete => {
                total += indel;
                i += 1;
            }
            Step::Insert => {
                total += indel;
                j += 1;
            }
        }
    }
    total
}

/// All sequences over `0..k` with length up to `max_len`.
pub fn all_sequences(k: u16, max_len: usize) -> Vec<Vec<u16>> {
    let mut out = vec![vec![]];
    let mut frontier = vec![vec![]];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for s in &frontier {
            for p in 0..k {
                let mut t: Vec<u16> = s.clone();
                t.push(p);
                next.push(t);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

pub struct PlannerCase {
    pub graph: PhoneticGraph,
    pub matched: BTreeSet<String>,
    pub current: StateMap,
}

/// Random catalog of up to 30 skills, its graph at a random threshold, a
/// random matched subset and random prior states.
pub fn random_planner_case(rng: &mut impl Rng) -> PlannerCase {
    let catalog = random_catalog(rng, 30);
    let table = DistanceTable::compute(&catalog, costs()).unwrap();
    let graph = PhoneticGraph::from_distances(&table, rng.gen_range(0.0..=600.0)).unwrap();
    let ids: Vec<String> = catalog.skills().iter().map(|s| s.id.clone()).collect();
    let p_match = rng.gen_range(0.0..0.5);
    let matched = ids.iter().filter(|_| rng.gen_bool(p_match)).cloned().collect();
    let mut current = StateMap::new();
    for id in &ids {
        match rng.gen_range(0..4) {
            0 => {
                current.insert(id.clone(), SkillState::Enabled);
            }
            1 => {
                current.insert(id.clone(), SkillState::Disabled);
            }
            2 => {
                current.insert(id.clone(), SkillState::Default);
            }
            _ => {}
        }
    }
    PlannerCase { graph, matched, current }
}

/// Every property a plan must satisfy, checked against the inputs directly.
pub fn check_plan(case: &PlannerCase, plan: &ActionPlan) -> Result<(), String> {
    let state = |id: &str| case.current.get(id).copied().unwrap_or_default();
    if !plan.enable.is_disjoint(&plan.disable) {
        return Err("enable and disable overlap".into());
    }
    if !plan.disable.is_disjoint(&case.matched) {
        return Err("a matched skill is disabled".into());
    }
    let want_enable: BTreeSet<String> = case
        .matched
        .iter()
        .filter(|m| state(m) != SkillState::Enabled)
        .cloned()
        .collect();
    if plan.enable != want_enable {
        return Err(format!("enable {:?} != {:?}", plan.enable, want_enable));
    }
    let mut want_disable = BTreeSet::new();
    for m in &case.matched {
        for (n, _) in case.graph.neighbors(m).unwrap() {
            if !case.matched.contains(&n) && state(&n) == SkillState::Default {
                want_disable.insert(n);
            }
        }
    }
    if plan.disable != want_disable {
        return Err(format!("disable {:?} != {:?}", plan.disable, want_disable));
    }
    let expected = 2.5 * plan.enable.len() as f64 + 3.08 * plan.disable.len() as f64;
    if plan.est_setup_seconds != expected {
        return Err(format!("setup {} != {expected}", plan.est_setup_seconds));
    }
    for x in &plan.disable {
        let near = case
            .matched
            .iter()
            .any(|m| case.graph.distance(m, x).is_some_and(|d| d <= case.graph.threshold()));
        if !near {
            return Err(format!("{x} disabled without a matched skill within threshold"));
        }
    }
    let after = apply_plan(&case.current, plan);
    for id in case.graph.skill_ids() {
        let touched = case.matched.contains(id)
            || case.matched.iter().any(|m| case.graph.distance(m, id).is_some());
        if !touched && after.get(id) != case.current.get(id) {
            return Err(format!("unrelated skill {id} changed state"));
        }
    }
    for m in &case.matched {
        if after.get(m) != Some(&SkillState::Enabled) {
            return Err(format!("{m} not enabled after apply"));
        }
        for (n, _) in case.graph.neighbors(m).unwrap() {
            if case.matched.contains(&n) {
                continue;
            }
            let s = after.get(&n).copied().unwrap_or_default();
            // a neighbor may stay enabled only if the user enabled it
            if s == SkillState::Default || (s == SkillState::Enabled && state(&n) != SkillState::Enabled) {
                return Err(format!("neighbor {n} of {m} left {s:?}"));
            }
        }
    }
    let again = plan_actions(&case.matched, &case.graph, &after).map_err(|e| e.to_string())?;
    if !again.is_empty() {
        return Err("replanning after apply is not a no-op".into());
    }
    Ok(())
}

pub fn bare_skill(id: String, phonemes: Vec<Phoneme>, reviews: u64) -> Skill {
    Skill {
        name: id.clone(),
        invocation: id.clone(),
        amazon_url: format!("https://www.amazon.com/dp/{id}"),
        id,
        phonemes,
        metadata_urls: vec![],
        reviews,
        account_linking: false,
        pronunciation_override: None,
    }
}

/// Small catalog over the first eight phonemes of the learned inventory.
/// About a third of the skills copy an earlier skill's pronunciation so
/// zero-distance collisions are common.
pub fn random_catalog(rng: &mut impl Rng, max_skills: usize) -> Catalog {
    let inv: Vec<Phoneme> = costs().inventory()[..8].to_vec();
    let n = rng.gen_range(2..=max_skills);
    let mut skills: Vec<Skill> = Vec::with_capacity(n);
    for i in 0..n {
        let phonemes = if i > 0 && rng.gen_bool(0.3) {
            skills[rng.gen_range(0..i)].phonemes.clone()
        } else {
            let len = rng.gen_range(1..=5);
            (0..len).map(|_| inv[rng.gen_range(0..inv.len())].clone()).collect()
        };
        skills.push(bare_skill(format!("s{i:03}"), phonemes, rng.gen_range(0..5)));
    }
    Catalog::new(skills).unwrap()
}
