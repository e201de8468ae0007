//! `squatguard` command line.

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::canonical::{to_canonical_string, write_canonical};
use crate::catalog::Catalog;
use crate::counterpart::{load_apps, load_history, Evidence, HistoryFilter, SkillPageRules, MINUTE_MS};
use crate::error::{Error, Result};
use crate::graph::{DistanceTable, GraphFile, PhoneticGraph};
use crate::identity::{
    apply_delta, assemble_table, diff_tables, resolve_identities, Corpus, Delta, DomainPolicy, MapperTable,
};
use crate::phonetics::{learn_cost_matrix, phonetic_distance, phrase_to_phonemes, CostMatrix, Overrides, PronunciationDict};
use crate::planner::{plan_actions, StateMap};
use crate::simulator::synth::{SynthConfig, SynthWorld, VOCAB_DICT};
use crate::simulator::{
    load_traces, run_experiment, sweep_thresholds, threshold_grid, ConfusionModel, Scenario, SweepInputs,
    DEFAULT_CONFUSION_RADIUS,
};

const EXIT_CODES: &str = "\
Exit codes:
  0  success
  1  other failure
  2  unreadable or malformed input (missing file, parse error, bad usage)
  3  dictionary has no alternate pronunciations
  4  out-of-vocabulary words (listed on stderr)
  5  invalid input (unknown skill, version mismatch, bad parameter)";

#[derive(Debug, Parser)]
#[command(name = "squatguard", version, about = "Offline skill-squatting defense toolkit", after_help = EXIT_CODES)]
pub struct Cli {
    #[command(flatten)]
    pub config: RunConfig,
    #[command(subcommand)]
    pub command: Command,
}

/// Shared settings. Any of them can also come from `--config <json>`;
/// flags win over the file.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// JSON file with any of these settings (snake_case keys)
    #[arg(long, global = true)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Pronunciation dictionary in CMU format
    #[arg(long, global = true)]
    pub dict: Option<PathBuf>,
    /// Learned cost matrix (learned from --dict when absent)
    #[arg(long, global = true)]
    pub costs: Option<PathBuf>,
    /// Pronunciation overrides JSON ({"phrase": ["PH", ...]})
    #[arg(long, global = true)]
    pub overrides: Option<PathBuf>,
    /// Skill catalog, JSON Lines
    #[arg(long, global = true)]
    pub catalog: Option<PathBuf>,
    /// Page corpus manifest
    #[arg(long, global = true)]
    pub corpus: Option<PathBuf>,
    /// Browsing history CSV (timestamp_ms,url)
    #[arg(long, global = true)]
    pub history: Option<PathBuf>,
    /// Installed apps JSON
    #[arg(long, global = true)]
    pub apps: Option<PathBuf>,
    /// User traces, JSON Lines
    #[arg(long, global = true)]
    pub traces: Option<PathBuf>,
    /// Phonetic-distance threshold for graph edges
    #[arg(long, global = true)]
    pub threshold: Option<f64>,
    /// Session gap in minutes [default: 30]
    #[arg(long, global = true)]
    pub session_gap_min: Option<u64>,
    /// Window after a skill-page visit in minutes [default: 5]
    #[arg(long, global = true)]
    pub precede_window_min: Option<u64>,
    /// Routing confusion radius [default: 400]
    #[arg(long, global = true)]
    pub confusion_radius: Option<f64>,
    /// Probability a trial produces no invocation [default: 0]
    #[arg(long, global = true)]
    pub fail_prob: Option<f64>,
    /// Probability the router favors popularity over distance [default: 0]
    #[arg(long, global = true)]
    pub mishear_prob: Option<f64>,
    /// Seed for randomized commands
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output file or directory
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

impl RunConfig {
    fn merged(self) -> Result<RunConfig> {
        let Some(path) = &self.config else {
            return Ok(self);
        };
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let file: RunConfig = serde_json::from_str(&text)?;
        Ok(RunConfig {
            config: self.config,
            dict: self.dict.or(file.dict),
            costs: self.costs.or(file.costs),
            overrides: self.overrides.or(file.overrides),
            catalog: self.catalog.or(file.catalog),
            corpus: self.corpus.or(file.corpus),
            history: self.history.or(file.history),
            apps: self.apps.or(file.apps),
            traces: self.traces.or(file.traces),
            threshold: self.threshold.or(file.threshold),
            session_gap_min: self.session_gap_min.or(file.session_gap_min),
            precede_window_min: self.precede_window_min.or(file.precede_window_min),
            confusion_radius: self.confusion_radius.or(file.confusion_radius),
            fail_prob: self.fail_prob.or(file.fail_prob),
            mishear_prob: self.mishear_prob.or(file.mishear_prob),
            seed: self.seed.or(file.seed),
            out: self.out.or(file.out),
        })
    }

    fn need<'a, T>(value: &'a Option<T>, flag: &str) -> Result<&'a T> {
        value
            .as_ref()
            .ok_or_else(|| Error::invalid(format!("--{flag} is required for this command")))
    }

    fn threshold(&self) -> Result<f64> {
        let t = *Self::need(&self.threshold, "threshold")?;
        if t.is_nan() || t < 0.0 {
            return Err(Error::invalid("--threshold must be >= 0"));
        }
        Ok(t)
    }

    fn filter(&self) -> HistoryFilter {
        let d = HistoryFilter::default();
        HistoryFilter {
            session_gap_ms: self.session_gap_min.map_or(d.session_gap_ms, |m| m * MINUTE_MS),
            precede_window_ms: self.precede_window_min.map_or(d.precede_window_ms, |m| m * MINUTE_MS),
            ..d
        }
    }

    fn model(&self) -> Result<ConfusionModel> {
        let m = ConfusionModel {
            confusion_radius: self.confusion_radius.unwrap_or(DEFAULT_CONFUSION_RADIUS),
            fail_prob: self.fail_prob.unwrap_or(0.0),
            mishear_prob: self.mishear_prob.unwrap_or(0.0),
            rng_seed: *Self::need(&self.seed, "seed")?,
        };
        m.validate()?;
        Ok(m)
    }

    fn dict(&self) -> Result<PronunciationDict> {
        PronunciationDict::load(Self::need(&self.dict, "dict")?)
    }

    fn overrides(&self) -> Result<Overrides> {
        match &self.overrides {
            Some(p) => Overrides::load(p),
            None => Ok(Overrides::default()),
        }
    }

    fn costs(&self, dict: Option<&PronunciationDict>) -> Result<CostMatrix> {
        if let Some(p) = &self.costs {
            return CostMatrix::load(p);
        }
        match dict {
            Some(d) => learn_cost_matrix(d),
            None => learn_cost_matrix(&self.dict()?),
        }
    }

    /// Catalog with phonemes filled in. The dictionary is only needed when
    /// some skill lacks phonemes or carries an override.
    fn catalog(&self, dict: Option<&PronunciationDict>) -> Result<Catalog> {
        let mut catalog = Catalog::load(Self::need(&self.catalog, "catalog")?)?;
        let needs_dict = catalog
            .skills()
            .iter()
            .any(|s| s.phonemes.is_empty() || s.pronunciation_override.is_some());
        if needs_dict || self.overrides.is_some() {
            let owned;
            let d = match dict {
                Some(d) => d,
                None => {
                    owned = self.dict()?;
                    &owned
                }
            };
            catalog.resolve_phonemes(d, &self.overrides()?)?;
        }
        catalog.ensure_resolved()?;
        Ok(catalog)
    }

    fn corpus(&self) -> Result<Corpus> {
        Corpus::load_manifest(Self::need(&self.corpus, "corpus")?)
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Learn phoneme substitution costs from a dictionary's alternate pronunciations
    LearnCosts,
    /// Phonetic distance (0-1000) between two phrases
    Distance { phrase_a: String, phrase_b: String },
    /// Pairwise distances pruned at --threshold
    BuildGraph,
    /// Mapper table: verified identities plus graph neighbors
    BuildTable {
        /// Version number of the new table
        #[arg(long, default_value_t = 1)]
        version: u64,
    },
    /// Delta between two consecutive mapper tables
    Delta { old: PathBuf, new: PathBuf },
    /// Apply a delta to a mapper table
    ApplyDelta { table: PathBuf, delta: PathBuf },
    /// Domains in --history that pass the poisoning-resistant filter
    Filter,
    /// Skills whose identity matches the user's qualified domains or apps
    Match {
        /// Mapper table
        #[arg(long)]
        table: PathBuf,
    },
    /// Enable/disable plan for matched skills
    Plan {
        /// JSON array of matched skill ids
        #[arg(long)]
        matched: PathBuf,
        /// Graph file from build-graph
        #[arg(long)]
        graph: PathBuf,
        /// Current states, JSON object id -> DEFAULT|ENABLED|DISABLED
        #[arg(long)]
        state: Option<PathBuf>,
    },
    /// Replay an invocation experiment on a fixture catalog
    Simulate {
        #[arg(long, value_enum)]
        scenario: ScenarioArg,
    },
    /// FAR/FRR/setup time over a grid of thresholds
    Sweep {
        #[arg(long, default_value_t = 0.0)]
        grid_start: f64,
        #[arg(long, default_value_t = 1000.0)]
        grid_end: f64,
        #[arg(long, default_value_t = 50.0)]
        grid_step: f64,
    },
    /// Generate a seeded synthetic world under --out
    Synth {
        #[arg(long, default_value_t = 1000)]
        skills: usize,
        #[arg(long, default_value_t = 50)]
        users: usize,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ScenarioArg {
    Identical,
    Similar,
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse { .. } | Error::Io { .. } | Error::Json(_) | Error::Csv(_) => 2,
        Error::NoAlternatePronunciations => 3,
        Error::OutOfVocabulary { .. } => 4,
        Error::EmptySequence
        | Error::UnknownPhoneme(_)
        | Error::InvalidPhoneme(_)
        | Error::DuplicateSkill(_)
        | Error::UnknownSkill(_)
        | Error::VersionMismatch { .. }
        | Error::ThresholdMismatch { .. }
        | Error::EmptyGrid
        | Error::Invalid(_) => 5,
        #[allow(unreachable_patterns)]
        _ => 1,
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = cli.config.merged().and_then(|cfg| execute(&cfg, &cli.command));
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => {
            let mut body = text.to_string();
            if !body.ends_with('\n') {
                body.push('\n');
            }
            std::fs::write(p, body).map_err(|e| Error::io(p, e))
        }
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

fn execute(cfg: &RunConfig, cmd: &Command) -> Result<()> {
    match cmd {
        Command::LearnCosts => {
            let dict = cfg.dict()?;
            let costs = learn_cost_matrix(&dict)?;
            let out = RunConfig::need(&cfg.out, "out")?;
            std::fs::write(out, costs.to_json() + "\n").map_err(|e| Error::io(out, e))?;
            println!("pairs: {}", dict.alt_pairs().len());
            Ok(())
        }
        Command::Distance { phrase_a, phrase_b } => {
            let dict = cfg.dict()?;
            let overrides = cfg.overrides()?;
            let a = phrase_to_phonemes(phrase_a, &dict, &overrides);
            let b = phrase_to_phonemes(phrase_b, &dict, &overrides);
            let (a, b) = match (a, b) {
                (Ok(a), Ok(b)) => (a, b),
                (Err(Error::OutOfVocabulary { words: mut w1 }), Err(Error::OutOfVocabulary { words: w2 })) => {
                    w1.extend(w2);
                    w1.sort();
                    w1.dedup();
                    return Err(Error::OutOfVocabulary { words: w1 });
                }
                (Err(e), _) | (_, Err(e)) => return Err(e),
            };
            let costs = cfg.costs(Some(&dict))?;
            println!("{:.2}", phonetic_distance(&a, &b, &costs)?);
            Ok(())
        }
        Command::BuildGraph => {
            let threshold = cfg.threshold()?;
            let dict = cfg.dict.as_ref().map(PronunciationDict::load).transpose()?;
            let catalog = cfg.catalog(dict.as_ref())?;
            let costs = cfg.costs(dict.as_ref())?;
            let table = DistanceTable::compute(&catalog, &costs)?;
            let graph = PhoneticGraph::from_distances(&table, threshold)?;
            log::info!("{} skills, {} edges", catalog.len(), graph.edge_count());
            emit(cfg.out.as_deref(), &graph.to_json())
        }
        Command::BuildTable { version } => {
            let threshold = cfg.threshold()?;
            let dict = cfg.dict.as_ref().map(PronunciationDict::load).transpose()?;
            let catalog = cfg.catalog(dict.as_ref())?;
            let costs = cfg.costs(dict.as_ref())?;
            let corpus = cfg.corpus()?;
            let table = DistanceTable::compute(&catalog, &costs)?;
            let graph = PhoneticGraph::from_distances(&table, threshold)?;
            let identities = resolve_identities(&catalog, &corpus, &DomainPolicy::default());
            let mapper = assemble_table(&catalog, &identities, &graph, *version)?;
            log::info!("{} of {} skills verified", mapper.entries.len(), catalog.len());
            emit(cfg.out.as_deref(), &mapper.to_json())
        }
        Command::Delta { old, new } => {
            let delta = diff_tables(&MapperTable::load(old)?, &MapperTable::load(new)?)?;
            emit(cfg.out.as_deref(), &delta.to_json())
        }
        Command::ApplyDelta { table, delta } => {
            let next = apply_delta(&MapperTable::load(table)?, &Delta::load(delta)?)?;
            emit(cfg.out.as_deref(), &next.to_json())
        }
        Command::Filter => {
            let history = load_history(RunConfig::need(&cfg.history, "history")?, &SkillPageRules::default())?;
            let domains = cfg.filter().qualified_domains(&history);
            emit(cfg.out.as_deref(), &to_canonical_string(&domains))
        }
        Command::Match { table } => {
            let table = MapperTable::load(table)?;
            let history = match &cfg.history {
                Some(p) => load_history(p, &SkillPageRules::default())?,
                None => vec![],
            };
            let apps = match &cfg.apps {
                Some(p) => load_apps(p)?,
                None => vec![],
            };
            let certs = cfg.corpus()?.domain_certs();
            let evidence = Evidence::collect(&history, &apps, &cfg.filter());
            let matched = crate::counterpart::match_skills(&evidence, &table, &certs);
            emit(cfg.out.as_deref(), &to_canonical_string(&matched))
        }
        Command::Plan { matched, graph, state } => {
            let matched: BTreeSet<String> = read_json(matched)?;
            let file = GraphFile::load(graph)?;
            let catalog = Catalog::load(RunConfig::need(&cfg.catalog, "catalog")?)?;
            let graph = PhoneticGraph::from_export(&file, catalog.skills().iter().map(|s| s.id.clone()))?;
            let current: StateMap = match state {
                Some(p) => read_json(p)?,
                None => StateMap::new(),
            };
            let plan = plan_actions(&matched, &graph, &current)?;
            emit(cfg.out.as_deref(), &plan.to_json())
        }
        Command::Simulate { scenario } => {
            let model = cfg.model()?;
            let dict = cfg.dict.as_ref().map(PronunciationDict::load).transpose()?;
            let catalog = cfg.catalog(dict.as_ref())?;
            let costs = cfg.costs(dict.as_ref())?;
            let threshold = cfg.threshold.unwrap_or(DEFAULT_CONFUSION_RADIUS);
            let table = DistanceTable::compute(&catalog, &costs)?;
            let graph = PhoneticGraph::from_distances(&table, threshold)?;
            let scenario = match scenario {
                ScenarioArg::Identical => Scenario::Identical,
                ScenarioArg::Similar => Scenario::Similar,
            };
            let report = run_experiment(scenario, &catalog, &table, &graph, &model)?;
            print!("{report}");
            if let Some(out) = &cfg.out {
                write_canonical(out, &report)?;
            }
            Ok(())
        }
        Command::Sweep {
            grid_start,
            grid_end,
            grid_step,
        } => {
            let grid = threshold_grid(*grid_start, *grid_end, *grid_step)?;
            let dict = cfg.dict.as_ref().map(PronunciationDict::load).transpose()?;
            let catalog = cfg.catalog(dict.as_ref())?;
            let costs = cfg.costs(dict.as_ref())?;
            let corpus = cfg.corpus()?;
            let traces = load_traces(RunConfig::need(&cfg.traces, "traces")?, &SkillPageRules::default())?;
            let distances = DistanceTable::compute(&catalog, &costs)?;
            let identities = resolve_identities(&catalog, &corpus, &DomainPolicy::default());
            let inputs = SweepInputs {
                catalog: &catalog,
                distances: &distances,
                identities: &identities,
                domain_certs: &corpus.domain_certs(),
                filter: cfg.filter(),
            };
            let result = sweep_thresholds(&inputs, &traces, &grid)?;
            let csv = result.to_csv()?;
            match &cfg.out {
                Some(dir) => {
                    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
                    let csv_path = dir.join("sweep.csv");
                    std::fs::write(&csv_path, &csv).map_err(|e| Error::io(&csv_path, e))?;
                    emit(Some(&dir.join("eer.json")), &result.summary_json())?;
                }
                None => print!("{csv}"),
            }
            let e = result.eer;
            println!("eer: {:.4} at threshold {} (far {:.4}, frr {:.4})", e.eer, e.threshold, e.far, e.frr);
            Ok(())
        }
        Command::Synth { skills, users } => {
            let seed = *RunConfig::need(&cfg.seed, "seed")?;
            let out = RunConfig::need(&cfg.out, "out")?;
            let vocab = match &cfg.dict {
                Some(p) => PronunciationDict::load(p)?,
                None => PronunciationDict::parse(VOCAB_DICT)?,
            };
            let synth = SynthConfig {
                seed,
                skills: *skills,
                users: *users,
                ..SynthConfig::default()
            };
            let world = SynthWorld::generate(&synth, &vocab)?;
            for p in world.write_to(out)? {
                println!("wrote {}", p.display());
            }
            Ok(())
        }
    }
}
