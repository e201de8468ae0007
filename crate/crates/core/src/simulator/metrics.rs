//! Per-user error rates and threshold sweeps.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::canonical::to_canonical_string;
use crate::catalog::Catalog;
use crate::counterpart::{
    match_skills, AppRecord, Evidence, HistoryFilter, HistoryRecord, SkillPageRules,
};
use crate::error::{Error, Result};
use crate::graph::{DistanceTable, PhoneticGraph};
use crate::identity::{assemble_table, MapperTable};
use crate::planner::{plan_actions, ActionPlan, StateMap};

/// Unused skills closer than this to a used skill count as malicious.
pub const MALICIOUS_CUTOFF: f64 = 400.0;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistoryRow {
    pub timestamp_ms: u64,
    pub url: String,
}

/// One line of a traces JSONL file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceFile {
    pub user_id: String,
    pub history: Vec<HistoryRow>,
    #[serde(default)]
    pub apps: Vec<AppRecord>,
    pub used_skills: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UserTrace {
    pub user_id: String,
    pub history: Vec<HistoryRecord>,
    pub apps: Vec<AppRecord>,
    pub used_skills: BTreeSet<String>,
}

impl UserTrace {
    pub fn from_file(t: TraceFile, rules: &SkillPageRules) -> Self {
        let history = t
            .history
            .iter()
            .filter_map(|r| {
                let rec = HistoryRecord::new(r.timestamp_ms, &r.url, rules);
                if rec.is_none() {
                    log::warn!("user {}: skipping unparseable URL {:?}", t.user_id, r.url);
                }
                rec
            })
            .collect();
        UserTrace {
            user_id: t.user_id,
            history,
            apps: t.apps,
            used_skills: t.used_skills,
        }
    }

    pub fn to_file(&self) -> TraceFile {
        TraceFile {
            user_id: self.user_id.clone(),
            history: self
                .history
                .iter()
                .map(|r| HistoryRow {
                    timestamp_ms: r.timestamp,
                    url: r.url.clone(),
                })
                .collect(),
            apps: self.apps.clone(),
            used_skills: self.used_skills.clone(),
        }
    }

    pub fn validate(&self, catalog: &Catalog) -> Result<()> {
        match self.used_skills.iter().find(|id| !catalog.contains(id)) {
            Some(id) => Err(Error::UnknownSkill(id.clone())),
            None => Ok(()),
        }
    }
}

pub fn parse_traces(text: &str, rules: &SkillPageRules) -> Result<Vec<UserTrace>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let t: TraceFile = serde_json::from_str(line).map_err(|e| Error::Parse {
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push(UserTrace::from_file(t, rules));
    }
    Ok(out)
}

pub fn load_traces(path: impl AsRef<Path>, rules: &SkillPageRules) -> Result<Vec<UserTrace>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_traces(&text, rules)
}

pub fn traces_to_jsonl(traces: &[UserTrace]) -> String {
    let mut out = String::new();
    for t in traces {
        out.push_str(&to_canonical_string(&t.to_file()));
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorRates {
    pub threshold: f64,
    pub frr: f64,
    pub far: f64,
}

/// Unused skills within [`MALICIOUS_CUTOFF`] of some used skill.
pub fn malicious_skills(used: &BTreeSet<String>, distances: &DistanceTable) -> Result<BTreeSet<String>> {
    let mut idx = Vec::with_capacity(used.len());
    for u in used {
        idx.push(distances.position(u).ok_or_else(|| Error::UnknownSkill(u.clone()))?);
    }
    Ok((0..distances.len())
        .filter(|&j| !used.contains(&distances.ids()[j]))
        .filter(|&j| idx.iter().any(|&i| distances.at(i, j) < MALICIOUS_CUTOFF))
        .map(|j| distances.ids()[j].clone())
        .collect())
}

/// FRR and FAR for one plan.
pub fn rates_for_plan(
    threshold: f64,
    used: &BTreeSet<String>,
    malicious: &BTreeSet<String>,
    plan: &ActionPlan,
) -> ErrorRates {
    let frr = match used.len() {
        0 => 0.0,
        n => used.intersection(&plan.disable).count() as f64 / n as f64,
    };
    let far = match malicious.len() {
        0 => 0.0,
        n => malicious.difference(&plan.disable).count() as f64 / n as f64,
    };
    ErrorRates { threshold, frr, far }
}

/// Filters the user's history, matches against the table, plans from a
/// clean state and scores the plan.
pub fn evaluate_user(
    trace: &UserTrace,
    table: &MapperTable,
    domain_certs: &BTreeMap<String, String>,
    graph: &PhoneticGraph,
    distances: &DistanceTable,
    filter: &HistoryFilter,
) -> Result<(ErrorRates, ActionPlan)> {
    let evidence = Evidence::collect(&trace.history, &trace.apps, filter);
    let matched = match_skills(&evidence, table, domain_certs);
    let plan = plan_actions(&matched, graph, &StateMap::new())?;
    let malicious = malicious_skills(&trace.used_skills, distances)?;
    Ok((rates_for_plan(graph.threshold(), &trace.used_skills, &malicious, &plan), plan))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub threshold: f64,
    pub far: f64,
    pub frr: f64,
    pub setup_seconds: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EerPoint {
    pub threshold: f64,
    pub far: f64,
    pub frr: f64,
    pub eer: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub eer: EerPoint,
}

impl SweepResult {
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.rows {
            w.serialize(r)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::invalid(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn summary_json(&self) -> String {
        #[derive(Serialize)]
        struct Summary<'a> {
            eer: &'a EerPoint,
            grid: Vec<f64>,
        }
        to_canonical_string(&Summary {
            eer: &self.eer,
            grid: self.rows.iter().map(|r| r.threshold).collect(),
        })
    }
}

/// Grid point minimizing `|FAR - FRR|`; the first one on ties.
pub fn equal_error_point(rows: &[SweepRow]) -> Result<EerPoint> {
    let best = rows
        .iter()
        .min_by(|a, b| (a.far - a.frr).abs().total_cmp(&(b.far - b.frr).abs()))
        .ok_or(Error::EmptyGrid)?;
    Ok(EerPoint {
        threshold: best.threshold,
        far: best.far,
        frr: best.frr,
        eer: (best.far + best.frr) / 2.0,
    })
}

/// `start, start + step, …` up to and including `end`.
pub fn threshold_grid(start: f64, end: f64, step: f64) -> Result<Vec<f64>> {
    if step.is_nan() || step <= 0.0 || !start.is_finite() || !end.is_finite() || end < start || start < 0.0 {
        return Err(Error::invalid("grid needs 0 <= start <= end and step > 0"));
    }
    let n = ((end - start) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|k| start + k as f64 * step).collect())
}

/// Everything a sweep needs that does not depend on the threshold.
pub struct SweepInputs<'a> {
    pub catalog: &'a Catalog,
    pub distances: &'a DistanceTable,
    pub identities: &'a BTreeMap<String, crate::identity::Identity>,
    pub domain_certs: &'a BTreeMap<String, String>,
    pub filter: HistoryFilter,
}

/// Per-threshold error rates and setup time, averaged over traces.
///
/// Evidence and matches do not depend on the threshold and are computed
/// once per trace; the graph and table neighbors are rebuilt per threshold.
pub fn sweep_thresholds(inputs: &SweepInputs<'_>, traces: &[UserTrace], grid: &[f64]) -> Result<SweepResult> {
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    if grid.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::invalid("threshold grid must be sorted ascending"));
    }
    let mut per_user = Vec::with_capacity(traces.len());
    for t in traces {
        t.validate(inputs.catalog)?;
        let evidence = Evidence::collect(&t.history, &t.apps, &inputs.filter);
        let malicious = malicious_skills(&t.used_skills, inputs.distances)?;
        per_user.push((evidence, malicious));
    }

    let mut rows = Vec::with_capacity(grid.len());
    for &threshold in grid {
        let graph = PhoneticGraph::from_distances(inputs.distances, threshold)?;
        let table = assemble_table(inputs.catalog, inputs.identities, &graph, 1)?;
        let (mut far, mut frr, mut setup) = (0.0, 0.0, 0.0);
        for (t, (evidence, malicious)) in traces.iter().zip(&per_user) {
            let matched = match_skills(evidence, &table, inputs.domain_certs);
            let plan = plan_actions(&matched, &graph, &StateMap::new())?;
            let r = rates_for_plan(threshold, &t.used_skills, malicious, &plan);
            far += r.far;
            frr += r.frr;
            setup += plan.est_setup_seconds;
        }
        let n = traces.len().max(1) as f64;
        rows.push(SweepRow {
            threshold,
            far: far / n,
            frr: frr / n,
            setup_seconds: setup / n,
        });
    }
    let eer = equal_error_point(&rows)?;
    Ok(SweepResult { rows, eer })
}
