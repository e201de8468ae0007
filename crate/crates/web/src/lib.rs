//! Browser demo. The page hands over dictionary text once; everything else
//! goes back and forth as JSON strings.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use squatguard_core::catalog::{Catalog, Skill};
use squatguard_core::counterpart::HistoryFilter;
use squatguard_core::graph::{DistanceTable, PhoneticGraph};
use squatguard_core::identity::{resolve_identities, DomainPolicy};
use squatguard_core::phonetics::{
    edit_script, learn_cost_matrix, phonetic_distance, phrase_to_phonemes, CostMatrix, EditOp,
    Overrides, PronunciationDict,
};
use squatguard_core::simulator::synth::{SynthConfig, SynthWorld, VOCAB_DICT};
use squatguard_core::simulator::{sweep_thresholds, threshold_grid, SweepInputs, SweepResult};

#[derive(Serialize)]
struct DistanceView {
    distance: f64,
    a: Vec<String>,
    b: Vec<String>,
    script: Vec<EditOp>,
}

#[derive(Serialize)]
struct Node {
    id: String,
    phonemes: Vec<String>,
}

#[derive(Serialize)]
struct Pair {
    a: String,
    b: String,
    d: f64,
    kept: bool,
}

#[derive(Serialize)]
struct GraphView {
    threshold: f64,
    nodes: Vec<Node>,
    pairs: Vec<Pair>,
}

/// Native core of the demo.
pub struct Engine {
    dict: PronunciationDict,
    overrides: Overrides,
    costs: CostMatrix,
}

fn msg(e: impl std::fmt::Display) -> String {
    e.to_string()
}

impl Engine {
    pub fn new(dict_text: &str, overrides_json: &str) -> Result<Engine, String> {
        let dict = PronunciationDict::parse(dict_text).map_err(msg)?;
        let overrides = if overrides_json.trim().is_empty() {
            Overrides::default()
        } else {
            Overrides::from_json(overrides_json).map_err(msg)?
        };
        let costs = learn_cost_matrix(&dict).map_err(msg)?;
        Ok(Engine { dict, overrides, costs })
    }

    pub fn pair_count(&self) -> usize {
        self.dict.alt_pairs().len()
    }

    pub fn distance(&self, a: &str, b: &str) -> Result<String, String> {
        let pa = phrase_to_phonemes(a, &self.dict, &self.overrides).map_err(msg)?;
        let pb = phrase_to_phonemes(b, &self.dict, &self.overrides).map_err(msg)?;
        let view = DistanceView {
            distance: phonetic_distance(&pa, &pb, &self.costs).map_err(msg)?,
            a: pa.symbols(),
            b: pb.symbols(),
            script: edit_script(&pa, &pb, &self.costs).map_err(msg)?,
        };
        serde_json::to_string(&view).map_err(msg)
    }

    /// One skill per non-empty line; every pair is reported, `kept` marks
    /// the ones that survive pruning.
    pub fn graph(&self, phrases: &str, threshold: f64) -> Result<String, String> {
        let mut skills = Vec::new();
        for line in phrases.lines().map(str::trim).filter(|l| !l.is_empty()) {
            let seq = phrase_to_phonemes(line, &self.dict, &self.overrides).map_err(msg)?;
            if skills.iter().any(|s: &Skill| s.id == line) {
                continue;
            }
            skills.push(Skill {
                id: line.to_string(),
                name: line.to_string(),
                invocation: line.to_string(),
                phonemes: seq.phonemes,
                amazon_url: String::new(),
                metadata_urls: vec![],
                reviews: 0,
                account_linking: false,
                pronunciation_override: None,
            });
        }
        let catalog = Catalog::new(skills).map_err(msg)?;
        let table = DistanceTable::compute(&catalog, &self.costs).map_err(msg)?;
        let graph = PhoneticGraph::from_distances(&table, threshold).map_err(msg)?;
        let n = catalog.len();
        let mut pairs = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                let d = table.at(i, j);
                pairs.push(Pair {
                    a: table.ids()[i].clone(),
                    b: table.ids()[j].clone(),
                    d,
                    kept: graph.distance(&table.ids()[i], &table.ids()[j]).is_some(),
                });
            }
        }
        let view = GraphView {
            threshold,
            nodes: catalog
                .skills()
                .iter()
                .map(|s| Node {
                    id: s.id.clone(),
                    phonemes: s.phoneme_seq().symbols(),
                })
                .collect(),
            pairs,
        };
        serde_json::to_string(&view).map_err(msg)
    }

    /// Synthetic world from the bundled vocabulary, swept over 0..=1000.
    pub fn tradeoff(&self, seed: u64, skills: usize, users: usize) -> Result<String, String> {
        let vocab = PronunciationDict::parse(VOCAB_DICT).map_err(msg)?;
        let cfg = SynthConfig {
            seed,
            skills,
            users,
            ..SynthConfig::default()
        };
        let world = SynthWorld::generate(&cfg, &vocab).map_err(msg)?;
        let distances = DistanceTable::compute(&world.catalog, &self.costs).map_err(msg)?;
        let identities = resolve_identities(&world.catalog, &world.corpus, &DomainPolicy::default());
        let inputs = SweepInputs {
            catalog: &world.catalog,
            distances: &distances,
            identities: &identities,
            domain_certs: &world.corpus.domain_certs(),
            filter: HistoryFilter::default(),
        };
        let grid = threshold_grid(0.0, 1000.0, 50.0).map_err(msg)?;
        let result: SweepResult = sweep_thresholds(&inputs, &world.traces, &grid).map_err(msg)?;
        serde_json::to_string(&result).map_err(msg)
    }
}

#[wasm_bindgen]
pub struct Demo {
    engine: Engine,
}

#[wasm_bindgen]
impl Demo {
    #[wasm_bindgen(constructor)]
    pub fn new(dict_text: &str, overrides_json: &str) -> Result<Demo, JsError> {
        Engine::new(dict_text, overrides_json)
            .map(|engine| Demo { engine })
            .map_err(|e| JsError::new(&e))
    }

    #[wasm_bindgen(js_name = pairCount)]
    pub fn pair_count(&self) -> usize {
        self.engine.pair_count()
    }

    pub fn distance(&self, a: &str, b: &str) -> Result<String, JsError> {
        self.engine.distance(a, b).map_err(|e| JsError::new(&e))
    }

    pub fn graph(&self, phrases: &str, threshold: f64) -> Result<String, JsError> {
        self.engine.graph(phrases, threshold).map_err(|e| JsError::new(&e))
    }

    pub fn tradeoff(&self, seed: u32, skills: usize, users: usize) -> Result<String, JsError> {
        self.engine
            .tradeoff(seed as u64, skills, users)
            .map_err(|e| JsError::new(&e))
    }
}
