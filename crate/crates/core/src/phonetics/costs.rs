//! Phoneme substitution costs learned from alternate pronunciations.
//!
//! Every alternate-pronunciation pair is globally aligned; each mismatch
//! column where the first variant has `a` and the second has `b` adds one
//! to the substitution count `SF(a, b)`, counted once per aligned pair in
//! the direction of the alignment. `F(a)` counts every occurrence of `a`
//! on either side of every pair. The cost is then
//!
//! ```text
//! cost(a, b) = clamp(1 - (SF(a, b) + SF(b, a)) / (F(a) + F(b)), 0, 1)
//! ```
//!
//! It is symmetric and zero on the diagonal. Pairs never seen cost 1.
//! For the single pair `R IY D` / `R EH D` this gives `cost(IY, EH) = 0.5`.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::align::{needleman_wunsch, AlignScoring, Column};
use super::dict::{Phoneme, PhonemeSeq, PronunciationDict};
use crate::error::{Error, Result};

/// Insertion and deletion cost used by [`learn_cost_matrix`].
pub const DEFAULT_INDEL_COST: f64 = 1.0;

#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    inventory: Vec<Phoneme>,
    index: HashMap<Phoneme, u16>,
    sub: Vec<f64>,
    indel: f64,
    freq: Vec<u64>,
    subst: Vec<u64>,
}

impl CostMatrix {
    /// Every substitution costs 1, as does every insertion and deletion.
    pub fn uniform(inventory: impl IntoIterator<Item = Phoneme>) -> Self {
        let mut inv: Vec<Phoneme> = inventory.into_iter().collect();
        inv.sort();
        inv.dedup();
        let n = inv.len();
        let mut m = CostMatrix::empty(inv);
        for i in 0..n {
            for j in 0..n {
                m.sub[i * n + j] = if i == j { 0.0 } else { 1.0 };
            }
        }
        m
    }

    fn empty(inventory: Vec<Phoneme>) -> Self {
        let n = inventory.len();
        assert!(n <= u16::MAX as usize, "phoneme inventory too large");
        let index = inventory
            .iter()
            .enumerate()
            .map(|(i, p)| (p.clone(), i as u16))
            .collect();
        CostMatrix {
            inventory,
            index,
            sub: vec![0.0; n * n],
            indel: DEFAULT_INDEL_COST,
            freq: vec![0; n],
            subst: vec![0; n * n],
        }
    }

    pub fn inventory(&self) -> &[Phoneme] {
        &self.inventory
    }

    pub fn indel_cost(&self) -> f64 {
        self.indel
    }

    pub fn index_of(&self, p: &Phoneme) -> Option<u16> {
        self.index.get(p).copied()
    }

    #[inline]
    pub(crate) fn sub_by_index(&self, a: u16, b: u16) -> f64 {
        self.sub[a as usize * self.inventory.len() + b as usize]
    }

    pub fn sub_cost(&self, a: &Phoneme, b: &Phoneme) -> Option<f64> {
        Some(self.sub_by_index(self.index_of(a)?, self.index_of(b)?))
    }

    /// `F(p)`: occurrences of `p` across the alignment corpus.
    pub fn frequency(&self, p: &Phoneme) -> u64 {
        self.index_of(p).map_or(0, |i| self.freq[i as usize])
    }

    /// `SF(a, b)`: times `a` (first variant) aligned against `b` (second).
    pub fn substitutions(&self, a: &Phoneme, b: &Phoneme) -> u64 {
        match (self.index_of(a), self.index_of(b)) {
            (Some(i), Some(j)) => self.subst[i as usize * self.inventory.len() + j as usize],
            _ => 0,
        }
    }

    /// Maps a sequence to inventory indices for the distance kernel.
    pub fn encode(&self, seq: &PhonemeSeq) -> Result<Vec<u16>> {
        seq.phonemes
            .iter()
            .map(|p| {
                self.index_of(p)
                    .ok_or_else(|| Error::UnknownPhoneme(p.to_string()))
            })
            .collect()
    }

    /// Largest off-diagonal or indel cost.
    pub fn max_cost(&self) -> f64 {
        self.sub.iter().copied().fold(self.indel, f64::max)
    }

    fn recompute_costs(&mut self) {
        let n = self.inventory.len();
        for i in 0..n {
            for j in 0..n {
                self.sub[i * n + j] = if i == j {
                    0.0
                } else {
                    let denom = self.freq[i] + self.freq[j];
                    if denom == 0 {
                        1.0
                    } else {
                        let num = self.subst[i * n + j] + self.subst[j * n + i];
                        (1.0 - num as f64 / denom as f64).clamp(0.0, 1.0)
                    }
                };
            }
        }
    }

    pub fn to_json(&self) -> String {
        crate::canonical::to_canonical_string(&self.to_file())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: CostMatrixFile = serde_json::from_str(text)?;
        Self::from_file(file)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    fn to_file(&self) -> CostMatrixFile {
        let n = self.inventory.len();
        let mut sub_cost = BTreeMap::new();
        let mut sf = BTreeMap::new();
        for (i, a) in self.inventory.iter().enumerate() {
            let row: BTreeMap<String, f64> = self
                .inventory
                .iter()
                .enumerate()
                .map(|(j, b)| (b.to_string(), self.sub[i * n + j]))
                .collect();
            sub_cost.insert(a.to_string(), row);
            let counts: BTreeMap<String, u64> = self
                .inventory
                .iter()
                .enumerate()
                .filter(|(j, _)| self.subst[i * n + j] > 0)
                .map(|(j, b)| (b.to_string(), self.subst[i * n + j]))
                .collect();
            if !counts.is_empty() {
                sf.insert(a.to_string(), counts);
            }
        }
        CostMatrixFile {
            inventory: self.inventory.clone(),
            indel_cost: self.indel,
            sub_cost,
            counts: Counts {
                f: self
                    .inventory
                    .iter()
                    .zip(&self.freq)
                    .map(|(p, &c)| (p.to_string(), c))
                    .collect(),
                sf,
            },
        }
    }

    fn from_file(file: CostMatrixFile) -> Result<Self> {
        let mut m = CostMatrix::empty(file.inventory);
        if m.index.len() != m.inventory.len() {
            return Err(Error::invalid("duplicate phoneme in inventory"));
        }
        if !(0.0..=1.0).contains(&file.indel_cost) {
            return Err(Error::invalid("indel cost outside [0, 1]"));
        }
        m.indel = file.indel_cost;
        let n = m.inventory.len();
        let lookup = |m: &CostMatrix, s: &str| -> Result<usize> {
            let p = Phoneme::parse(s)?;
            m.index_of(&p)
                .map(usize::from)
                .ok_or_else(|| Error::UnknownPhoneme(s.to_string()))
        };
        for (a, row) in &file.sub_cost {
            let i = lookup(&m, a)?;
            for (b, &c) in row {
                let j = lookup(&m, b)?;
                m.sub[i * n + j] = c;
            }
        }
        for (a, &c) in &file.counts.f {
            let i = lookup(&m, a)?;
            m.freq[i] = c;
        }
        for (a, row) in &file.counts.sf {
            let i = lookup(&m, a)?;
            for (b, &c) in row {
                let j = lookup(&m, b)?;
                m.subst[i * n + j] = c;
            }
        }
        for i in 0..n {
            if m.sub[i * n + i] != 0.0 {
                return Err(Error::invalid("non-zero diagonal substitution cost"));
            }
            for j in 0..n {
                let c = m.sub[i * n + j];
                if !(0.0..=1.0).contains(&c) || c != m.sub[j * n + i] {
                    return Err(Error::invalid(format!(
                        "substitution cost {}/{} must be symmetric and in [0, 1]",
                        m.inventory[i], m.inventory[j]
                    )));
                }
            }
        }
        Ok(m)
    }
}

#[derive(Serialize, Deserialize)]
struct CostMatrixFile {
    inventory: Vec<Phoneme>,
    indel_cost: f64,
    sub_cost: BTreeMap<String, BTreeMap<String, f64>>,
    counts: Counts,
}

#[derive(Serialize, Deserialize)]
struct Counts {
    #[serde(rename = "F")]
    f: BTreeMap<String, u64>,
    #[serde(rename = "SF")]
    sf: BTreeMap<String, BTreeMap<String, u64>>,
}

/// Learns the cost matrix from the dictionary's alternate-pronunciation pairs.
/// The inventory is every phoneme seen in the dictionary.
pub fn learn_cost_matrix(dict: &PronunciationDict) -> Result<CostMatrix> {
    learn_from_pairs(dict.inventory().iter().cloned(), dict.alt_pairs())
}

pub fn learn_from_pairs(
    inventory: impl IntoIterator<Item = Phoneme>,
    pairs: &[(PhonemeSeq, PhonemeSeq)],
) -> Result<CostMatrix> {
    if pairs.is_empty() {
        return Err(Error::NoAlternatePronunciations);
    }
    let mut inv: Vec<Phoneme> = inventory.into_iter().collect();
    for (a, b) in pairs {
        inv.extend(a.phonemes.iter().cloned());
        inv.extend(b.phonemes.iter().cloned());
    }
    inv.sort();
    inv.dedup();
    let mut m = CostMatrix::empty(inv);
    let n = m.inventory.len();

    for (a, b) in pairs {
        let ea = m.encode(a)?;
        let eb = m.encode(b)?;
        for &p in ea.iter().chain(&eb) {
            m.freq[p as usize] += 1;
        }
        let al = needleman_wunsch(&ea, &eb, AlignScoring::default());
        for col in al.columns {
            if let Column::Pair(i, j) = col {
                if ea[i] != eb[j] {
                    m.subst[ea[i] as usize * n + eb[j] as usize] += 1;
                }
            }
        }
    }
    m.recompute_costs();
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ph(s: &str) -> Phoneme {
        Phoneme::parse(s).unwrap()
    }

    fn seq(s: &str) -> PhonemeSeq {
        PhonemeSeq::from_symbols("", s).unwrap()
    }

    #[test]
    fn identical_variants_leave_all_costs_at_one() {
        let d = PronunciationDict::parse("A  K AE T\nA(2)  K AE T\n").unwrap();
        let m = learn_cost_matrix(&d).unwrap();
        for a in m.inventory() {
            for b in m.inventory() {
                let want = if a == b { 0.0 } else { 1.0 };
                assert_eq!(m.sub_cost(a, b), Some(want));
            }
        }
    }

    #[test]
    fn single_pair_counts_once_in_alignment_direction() {
        let d = PronunciationDict::parse("READ  R IY1 D\nREAD(2)  R EH1 D\nT  T IY1\n").unwrap();
        let m = learn_cost_matrix(&d).unwrap();
        assert_eq!(m.substitutions(&ph("IY"), &ph("EH")), 1);
        assert_eq!(m.substitutions(&ph("EH"), &ph("IY")), 0);
        assert_eq!(m.frequency(&ph("IY")), 1);
        assert_eq!(m.frequency(&ph("EH")), 1);
        assert_eq!(m.frequency(&ph("R")), 2);
        assert_eq!(m.sub_cost(&ph("IY"), &ph("EH")), Some(0.5));
        assert_eq!(m.sub_cost(&ph("EH"), &ph("IY")), Some(0.5));
        // T only occurs outside the pair corpus: no evidence, full cost.
        assert_eq!(m.sub_cost(&ph("IY"), &ph("T")), Some(1.0));
        assert!(m.sub_cost(&ph("IY"), &ph("EH")) < m.sub_cost(&ph("IY"), &ph("T")));
    }

    #[test]
    fn empty_corpus_is_an_error() {
        let d = PronunciationDict::parse("CAT  K AE T\n").unwrap();
        assert!(matches!(
            learn_cost_matrix(&d),
            Err(Error::NoAlternatePronunciations)
        ));
    }

    #[test]
    fn counts_accumulate_over_pairs() {
        let pairs = vec![
            (seq("R IY D"), seq("R EH D")),
            (seq("R EH D"), seq("R IY D")),
            (seq("IY"), seq("IY")),
        ];
        let m = learn_from_pairs([], &pairs).unwrap();
        assert_eq!(m.frequency(&ph("IY")), 4);
        assert_eq!(m.frequency(&ph("EH")), 2);
        // (1 + 1) / (4 + 2)
        let c = m.sub_cost(&ph("IY"), &ph("EH")).unwrap();
        assert!((c - (1.0 - 2.0 / 6.0)).abs() < 1e-12);
    }

    #[test]
    fn json_round_trip() {
        let d = PronunciationDict::parse("READ  R IY1 D\nREAD(2)  R EH1 D\n").unwrap();
        let m = learn_cost_matrix(&d).unwrap();
        let text = m.to_json();
        let back = CostMatrix::from_json(&text).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.to_json(), text);
    }

    #[test]
    fn rejects_asymmetric_file() {
        let text = r#"{"counts":{"F":{},"SF":{}},"indel_cost":1.0,"inventory":["A","B"],
            "sub_cost":{"A":{"A":0.0,"B":0.2},"B":{"A":0.3,"B":0.0}}}"#;
        assert!(CostMatrix::from_json(text).is_err());
    }
}
