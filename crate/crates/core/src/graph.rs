//! Phonetic skill graph.
//!
//! All pairwise distances are computed exhaustively; edges with distance
//! greater than the threshold are dropped (an edge exactly at the threshold
//! is kept).

use std::collections::{BTreeSet, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::catalog::Catalog;
use crate::error::{Error, Result};
use crate::phonetics::{normalized_distance, CostMatrix};

/// Every pairwise distance of a catalog, upper triangle only.
#[derive(Debug, Clone)]
pub struct DistanceTable {
    ids: Vec<String>,
    index: HashMap<String, usize>,
    upper: Vec<f64>,
}

impl DistanceTable {
    pub fn compute(catalog: &Catalog, costs: &CostMatrix) -> Result<Self> {
        catalog.ensure_resolved()?;
        let encoded = catalog
            .skills()
            .iter()
            .map(|s| costs.encode(&s.phoneme_seq()))
            .collect::<Result<Vec<_>>>()?;
        let n = encoded.len();
        let mut upper = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for i in 0..n {
            for j in i + 1..n {
                upper.push(normalized_distance(&encoded[i], &encoded[j], costs));
            }
        }
        let ids: Vec<String> = catalog.skills().iter().map(|s| s.id.clone()).collect();
        let index = ids.iter().enumerate().map(|(i, id)| (id.clone(), i)).collect();
        Ok(DistanceTable { ids, index, upper })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    /// Distance between positions `i` and `j`; zero on the diagonal.
    pub fn at(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return 0.0;
        }
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        let n = self.ids.len();
        // Row i of the upper triangle starts after i rows of decreasing width.
        let row_start = i * (2 * n - i - 1) / 2;
        self.upper[row_start + (j - i - 1)]
    }

    pub fn get(&self, a: &str, b: &str) -> Option<f64> {
        Some(self.at(self.position(a)?, self.position(b)?))
    }

    pub fn values(&self) -> &[f64] {
        &self.upper
    }

    pub fn max(&self) -> f64 {
        self.upper.iter().copied().fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone)]
pub struct PhoneticGraph {
    threshold: f64,
    ids: Vec<String>,
    index: HashMap<String, usize>,
    /// Per node, neighbors sorted by (distance, id).
    adjacency: Vec<Vec<(usize, f64)>>,
}

impl PhoneticGraph {
    pub fn from_distances(table: &DistanceTable, threshold: f64) -> Result<Self> {
        if threshold.is_nan() || threshold < 0.0 {
            return Err(Error::invalid("threshold must be >= 0"));
        }
        let n = table.len();
        let mut adjacency = vec![Vec::new(); n];
        for i in 0..n {
            for j in i + 1..n {
                let d = table.at(i, j);
                if d <= threshold {
                    adjacency[i].push((j, d));
                    adjacency[j].push((i, d));
                }
            }
        }
        let mut g = PhoneticGraph {
            threshold,
            ids: table.ids.clone(),
            index: table.index.clone(),
            adjacency,
        };
        g.sort_adjacency();
        Ok(g)
    }

    fn sort_adjacency(&mut self) {
        let ids = &self.ids;
        for adj in &mut self.adjacency {
            adj.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| ids[a.0].cmp(&ids[b.0])));
        }
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn skill_ids(&self) -> &[String] {
        &self.ids
    }

    pub fn contains(&self, id: &str) -> bool {
        self.index.contains_key(id)
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Neighbors of `id`, ascending by distance then id.
    pub fn neighbors(&self, id: &str) -> Result<Vec<(String, f64)>> {
        let &i = self
            .index
            .get(id)
            .ok_or_else(|| Error::UnknownSkill(id.to_string()))?;
        Ok(self.adjacency[i]
            .iter()
            .map(|&(j, d)| (self.ids[j].clone(), d))
            .collect())
    }

    pub fn neighbor_ids(&self, id: &str) -> Result<impl Iterator<Item = &str>> {
        let &i = self
            .index
            .get(id)
            .ok_or_else(|| Error::UnknownSkill(id.to_string()))?;
        Ok(self.adjacency[i].iter().map(|&(j, _)| self.ids[j].as_str()))
    }

    pub fn distance(&self, a: &str, b: &str) -> Option<f64> {
        let i = *self.index.get(a)?;
        let j = *self.index.get(b)?;
        self.adjacency[i].iter().find(|&&(k, _)| k == j).map(|&(_, d)| d)
    }

    /// Edges with `a < b`, sorted by (a, b).
    pub fn edges(&self) -> Vec<Edge> {
        let mut out = Vec::with_capacity(self.edge_count());
        for (i, adj) in self.adjacency.iter().enumerate() {
            for &(j, d) in adj {
                if self.ids[i] < self.ids[j] {
                    out.push(Edge {
                        a: self.ids[i].clone(),
                        b: self.ids[j].clone(),
                        d,
                    });
                }
            }
        }
        out.sort_by(|x, y| (&x.a, &x.b).cmp(&(&y.a, &y.b)));
        out
    }

    pub fn export(&self) -> GraphFile {
        GraphFile {
            threshold: self.threshold,
            edges: self.edges(),
        }
    }

    pub fn to_json(&self) -> String {
        crate::canonical::to_canonical_string(&self.export())
    }

    /// Rebuilds a graph from its export. The export only lists edges, so
    /// the full skill set comes from `skill_ids`.
    pub fn from_export(file: &GraphFile, skill_ids: impl IntoIterator<Item = String>) -> Result<Self> {
        let mut ids: Vec<String> = skill_ids.into_iter().collect();
        let mut seen = BTreeSet::new();
        for id in &ids {
            if !seen.insert(id.clone()) {
                return Err(Error::DuplicateSkill(id.clone()));
            }
        }
        for e in &file.edges {
            for id in [&e.a, &e.b] {
                if seen.insert(id.clone()) {
                    ids.push(id.clone());
                }
            }
        }
        let index: HashMap<String, usize> =
            ids.iter().enumerate().map(|(i, id)| (id.clone(), i)).collect();
        let mut adjacency = vec![Vec::new(); ids.len()];
        for e in &file.edges {
            if e.a == e.b {
                return Err(Error::invalid(format!("self-edge on `{}`", e.a)));
            }
            if e.d.is_nan() || e.d > file.threshold || e.d < 0.0 {
                return Err(Error::invalid(format!(
                    "edge {}-{} has distance {} beyond threshold {}",
                    e.a, e.b, e.d, file.threshold
                )));
            }
            let (i, j) = (index[&e.a], index[&e.b]);
            adjacency[i].push((j, e.d));
            adjacency[j].push((i, e.d));
        }
        let mut g = PhoneticGraph {
            threshold: file.threshold,
            ids,
            index,
            adjacency,
        };
        g.sort_adjacency();
        Ok(g)
    }
}

/// Computes all pairwise distances and prunes at `threshold`.
pub fn build_graph(catalog: &Catalog, costs: &CostMatrix, threshold: f64) -> Result<PhoneticGraph> {
    let table = DistanceTable::compute(catalog, costs)?;
    PhoneticGraph::from_distances(&table, threshold)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub a: String,
    pub b: String,
    pub d: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphFile {
    #[serde(with = "crate::canonical::threshold")]
    pub threshold: f64,
    pub edges: Vec<Edge>,
}

impl GraphFile {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::Skill;
    use crate::phonetics::{Phoneme, PhonemeSeq};

    fn skill(id: &str, phonemes: &str) -> Skill {
        Skill {
            id: id.into(),
            name: id.into(),
            invocation: id.into(),
            phonemes: PhonemeSeq::from_symbols("", phonemes).unwrap().phonemes,
            amazon_url: String::new(),
            metadata_urls: vec![],
            reviews: 0,
            account_linking: false,
            pronunciation_override: None,
        }
    }

    fn costs() -> CostMatrix {
        CostMatrix::uniform(["A", "B", "C", "D"].iter().map(|s| Phoneme::parse(s).unwrap()))
    }

    #[test]
    fn triangle_indexing() {
        let c = Catalog::new(
            ["A", "B A", "C C C", "D", "A B C D"]
                .iter()
                .enumerate()
                .map(|(i, p)| skill(&format!("s{i}"), p))
                .collect(),
        )
        .unwrap();
        let t = DistanceTable::compute(&c, &costs()).unwrap();
        let encoded: Vec<_> = c
            .skills()
            .iter()
            .map(|s| costs().encode(&s.phoneme_seq()).unwrap())
            .collect();
        for i in 0..5 {
            for j in 0..5 {
                let want = if i == j {
                    0.0
                } else {
                    normalized_distance(&encoded[i], &encoded[j], &costs())
                };
                assert_eq!(t.at(i, j), want, "{i} {j}");
            }
        }
    }

    #[test]
    fn zero_threshold_keeps_identical_pair() {
        let c = Catalog::new(vec![skill("x", "A B"), skill("y", "A B"), skill("z", "C")]).unwrap();
        let g = build_graph(&c, &costs(), 0.0).unwrap();
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.neighbors("x").unwrap(), vec![("y".to_string(), 0.0)]);
        assert!(g.neighbors("z").unwrap().is_empty());
    }

    #[test]
    fn infinite_threshold_is_complete() {
        let c = Catalog::new((0..6).map(|i| skill(&format!("s{i}"), "A B C")).collect()).unwrap();
        let g = build_graph(&c, &costs(), f64::INFINITY).unwrap();
        assert_eq!(g.edge_count(), 15);
    }

    #[test]
    fn unknown_id_is_an_error() {
        let c = Catalog::new(vec![skill("x", "A")]).unwrap();
        let g = build_graph(&c, &costs(), 100.0).unwrap();
        assert!(matches!(g.neighbors("nope"), Err(Error::UnknownSkill(_))));
    }

    #[test]
    fn neighbors_sorted_by_distance_then_id() {
        let c = Catalog::new(vec![
            skill("m", "A B C D"),
            skill("b", "A B C A"),
            skill("a", "A B C B"),
            skill("c", "A B A A"),
        ])
        .unwrap();
        let g = build_graph(&c, &costs(), 1000.0).unwrap();
        let n: Vec<String> = g.neighbors("m").unwrap().into_iter().map(|x| x.0).collect();
        assert_eq!(n, vec!["a", "b", "c"]);
    }

    #[test]
    fn export_round_trip() {
        let c = Catalog::new(vec![skill("x", "A B"), skill("y", "A C"), skill("z", "D")]).unwrap();
        let g = build_graph(&c, &costs(), 600.0).unwrap();
        let file: GraphFile = serde_json::from_str(&g.to_json()).unwrap();
        assert_eq!(g.to_json(), r#"{"edges":[{"a":"x","b":"y","d":500.0}],"threshold":600.0}"#);
        let back = PhoneticGraph::from_export(&file, ["x", "y", "z"].map(String::from)).unwrap();
        assert_eq!(back.to_json(), g.to_json());
        assert!(back.contains("z"));
    }

    #[test]
    fn infinite_threshold_exports_as_null() {
        let c = Catalog::new(vec![skill("x", "A"), skill("y", "B")]).unwrap();
        let g = build_graph(&c, &costs(), f64::INFINITY).unwrap();
        let json = g.to_json();
        assert!(json.ends_with(r#""threshold":null}"#), "{json}");
        let file: GraphFile = serde_json::from_str(&json).unwrap();
        assert!(file.threshold.is_infinite());
    }
}
