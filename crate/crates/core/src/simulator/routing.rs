//! Invocation routing model.
//!
//! The assistant's real routing is opaque; this model encodes only the
//! observed behaviour:
//!
//! * skills further than `confusion_radius` from the spoken phrase are never
//!   confused with it;
//! * a disabled skill cannot be invoked;
//! * an enabled candidate always wins over default-state candidates;
//! * otherwise the closest candidate wins, popularity (reviews) breaking
//!   ties, which also models auto-enabling of default-state skills.
//!
//! Two seeded coin flips per trial add optional noise: `fail_prob` makes
//! the trial produce no invocation, and `mishear_prob` makes the recognizer
//! pick the most popular default-state candidate inside the radius instead
//! of the closest one.

use std::cmp::Reverse;
use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::catalog::Catalog;
use crate::error::{Error, Result};
use crate::graph::DistanceTable;
use crate::planner::SkillState;

pub const DEFAULT_CONFUSION_RADIUS: f64 = 400.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfusionModel {
    pub confusion_radius: f64,
    pub fail_prob: f64,
    pub mishear_prob: f64,
    pub rng_seed: u64,
}

impl Default for ConfusionModel {
    fn default() -> Self {
        ConfusionModel {
            confusion_radius: DEFAULT_CONFUSION_RADIUS,
            fail_prob: 0.0,
            mishear_prob: 0.0,
            rng_seed: 0,
        }
    }
}

impl ConfusionModel {
    pub fn validate(&self) -> Result<()> {
        if self.confusion_radius.is_nan() || self.confusion_radius < 0.0 {
            return Err(Error::invalid("confusion radius must be >= 0"));
        }
        for (name, p) in [("fail", self.fail_prob), ("mishear", self.mishear_prob)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::invalid(format!("{name} probability must be in [0, 1]")));
            }
        }
        Ok(())
    }

    /// Per-trial generator; serial and parallel runs see the same draws.
    pub fn trial_rng(&self, trial: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.rng_seed ^ trial)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", content = "winner", rename_all = "UPPERCASE")]
pub enum InvocationOutcome {
    Correct,
    Incorrect(String),
    None,
}

/// Routes one spoken invocation of `target`.
pub fn simulate_invocation(
    target: &str,
    catalog: &Catalog,
    distances: &DistanceTable,
    states: &BTreeMap<String, SkillState>,
    model: &ConfusionModel,
    trial: u64,
) -> Result<InvocationOutcome> {
    let t = catalog
        .position(target)
        .ok_or_else(|| Error::UnknownSkill(target.to_string()))?;
    if distances.ids().get(t).map(String::as_str) != Some(target) {
        return Err(Error::invalid("distance table does not match the catalog"));
    }

    let mut rng = model.trial_rng(trial);
    let fails = rng.gen::<f64>() < model.fail_prob;
    let mishears = rng.gen::<f64>() < model.mishear_prob;
    if fails {
        return Ok(InvocationOutcome::None);
    }

    let state = |id: &str| states.get(id).copied().unwrap_or_default();
    let skills = catalog.skills();
    let candidates: Vec<(usize, f64, SkillState)> = (0..skills.len())
        .filter_map(|j| {
            let st = state(&skills[j].id);
            let d = distances.at(t, j);
            (st != SkillState::Disabled && d <= model.confusion_radius).then_some((j, d, st))
        })
        .collect();

    let closest = |pool: &mut dyn Iterator<Item = &(usize, f64, SkillState)>| {
        pool.min_by(|a, b| {
            a.1.total_cmp(&b.1)
                .then_with(|| Reverse(skills[a.0].reviews).cmp(&Reverse(skills[b.0].reviews)))
                .then_with(|| skills[a.0].id.cmp(&skills[b.0].id))
        })
        .map(|c| c.0)
    };
    let most_popular = |pool: &mut dyn Iterator<Item = &(usize, f64, SkillState)>| {
        pool.min_by(|a, b| {
            Reverse(skills[a.0].reviews)
                .cmp(&Reverse(skills[b.0].reviews))
                .then_with(|| skills[a.0].id.cmp(&skills[b.0].id))
        })
        .map(|c| c.0)
    };

    let enabled_winner = closest(&mut candidates.iter().filter(|c| c.2 == SkillState::Enabled));
    let winner = match enabled_winner {
        Some(w) => Some(w),
        None if mishears => most_popular(&mut candidates.iter()),
        None => closest(&mut candidates.iter()),
    };

    Ok(match winner {
        None => InvocationOutcome::None,
        Some(w) if w == t => InvocationOutcome::Correct,
        Some(w) => InvocationOutcome::Incorrect(skills[w].id.clone()),
    })
}
