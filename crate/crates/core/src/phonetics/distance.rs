use serde::Serialize;

use super::costs::CostMatrix;
use super::dict::{Phoneme, PhonemeSeq};
use crate::error::{Error, Result};

/// Distances are reported on a 0..=1000 scale.
pub const DISTANCE_SCALE: f64 = 1000.0;

/// Weighted Levenshtein distance between two encoded sequences.
pub fn weighted_levenshtein(a: &[u16], b: &[u16], costs: &CostMatrix) -> f64 {
    let indel = costs.indel_cost();
    let mut prev: Vec<f64> = (0..=b.len()).map(|j| j as f64 * indel).collect();
    let mut cur = vec![0.0; b.len() + 1];
    for (i, &x) in a.iter().enumerate() {
        cur[0] = (i + 1) as f64 * indel;
        for (j, &y) in b.iter().enumerate() {
            let sub = prev[j] + costs.sub_by_index(x, y);
            let del = prev[j + 1] + indel;
            let ins = cur[j] + indel;
            cur[j + 1] = sub.min(del).min(ins);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Length-normalized distance between two encoded, non-empty sequences.
pub fn normalized_distance(a: &[u16], b: &[u16], costs: &CostMatrix) -> f64 {
    let longest = a.len().max(b.len());
    DISTANCE_SCALE * weighted_levenshtein(a, b, costs) / longest as f64
}

/// `1000 * WL(a, b) / max(|a|, |b|)`.
pub fn phonetic_distance(a: &PhonemeSeq, b: &PhonemeSeq, costs: &CostMatrix) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySequence);
    }
    Ok(normalized_distance(&costs.encode(a)?, &costs.encode(b)?, costs))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "op", rename_all = "lowercase")]
pub enum EditOp {
    Keep { phoneme: Phoneme },
    Substitute { from: Phoneme, to: Phoneme, cost: f64 },
    Delete { phoneme: Phoneme, cost: f64 },
    Insert { phoneme: Phoneme, cost: f64 },
}

/// One minimal edit script turning `a` into `b`, for display.
pub fn edit_script(a: &PhonemeSeq, b: &PhonemeSeq, costs: &CostMatrix) -> Result<Vec<EditOp>> {
    let ea = costs.encode(a)?;
    let eb = costs.encode(b)?;
    let (n, m) = (ea.len(), eb.len());
    let w = m + 1;
    let indel = costs.indel_cost();
    let mut d = vec![0.0f64; (n + 1) * w];
    for i in 0..=n {
        d[i * w] = i as f64 * indel;
    }
    for (j, x) in d.iter_mut().enumerate().take(w) {
        *x = j as f64 * indel;
    }
    for i in 1..=n {
        for j in 1..=m {
            let sub = d[(i - 1) * w + j - 1] + costs.sub_by_index(ea[i - 1], eb[j - 1]);
            let del = d[(i - 1) * w + j] + indel;
            let ins = d[i * w + j - 1] + indel;
            d[i * w + j] = sub.min(del).min(ins);
        }
    }
    let mut ops = Vec::new();
    let (mut i, mut j) = (n, m);
    while i > 0 || j > 0 {
        let here = d[i * w + j];
        if i > 0 && j > 0 {
            let c = costs.sub_by_index(ea[i - 1], eb[j - 1]);
            if here == d[(i - 1) * w + j - 1] + c {
                let (x, y) = (&a.phonemes[i - 1], &b.phonemes[j - 1]);
                ops.push(if x == y {
                    EditOp::Keep { phoneme: x.clone() }
                } else {
                    EditOp::Substitute {
                        from: x.clone(),
                        to: y.clone(),
                        cost: c,
                    }
                });
                i -= 1;
                j -= 1;
                continue;
            }
        }
        if i > 0 && here == d[(i - 1) * w + j] + indel {
            ops.push(EditOp::Delete {
                phoneme: a.phonemes[i - 1].clone(),
                cost: indel,
            });
            i -= 1;
        } else {
            ops.push(EditOp::Insert {
                phoneme: b.phonemes[j - 1].clone(),
                cost: indel,
            });
            j -= 1;
        }
    }
    ops.reverse();
    Ok(ops)
}
