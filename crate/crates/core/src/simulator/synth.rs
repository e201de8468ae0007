//! Seeded synthetic worlds for sweeps and demos.
//!
//! Nothing here is measured data. The generator exists so sweeps and
//! adversarial tests can run without private user traces.
//!
//! Catalog
//! * base skills: one to three random vocabulary words;
//! * squats (`squat_fraction`): a base skill's pronunciation with one phoneme
//!   substituted or dropped, stored as a `pronunciation_override`, with a
//!   misspelled invocation;
//! * duplicates (`duplicate_fraction`): same invocation as a base skill.
//!
//! Squats and duplicates copy their victim's metadata URLs (fake URL
//! injection) and plant a user-generated page on the victim's domain
//! linking to their own listing. Base skills get a developer domain with a
//! page linking back to the listing, except `no_site_fraction` of them.
//!
//! Traces: each user has `used_min..=used_max` used skills. A used skill
//! leaves app evidence with `app_prob`, otherwise repeated browsing with
//! `browse_prob`, otherwise a single visit session. Every trace also gets
//! background browsing and, with `lure_prob`, a lure: visits to a promo
//! domain right after a skill listing.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::metrics::{traces_to_jsonl, UserTrace};
use crate::catalog::{Catalog, Skill};
use crate::counterpart::{AppRecord, HistoryRecord, SkillPageRules, MINUTE_MS};
use crate::error::{Error, Result};
use crate::identity::{Corpus, ManifestEntry, PageRecord};
use crate::phonetics::{Phoneme, PronunciationDict};

/// Small bundled vocabulary (uppercase CMU format).
pub const VOCAB_DICT: &str = include_str!("../../data/vocab.dict");

const DAY_MS: u64 = 24 * 60 * MINUTE_MS;
const EPOCH_MS: u64 = 1_700_000_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub seed: u64,
    pub skills: usize,
    pub users: usize,
    pub squat_fraction: f64,
    pub duplicate_fraction: f64,
    pub no_site_fraction: f64,
    pub used_min: usize,
    pub used_max: usize,
    pub app_prob: f64,
    pub browse_prob: f64,
    pub lure_prob: f64,
    pub noise_domains: usize,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            seed: 0,
            skills: 1000,
            users: 50,
            squat_fraction: 0.15,
            duplicate_fraction: 0.03,
            no_site_fraction: 0.1,
            used_min: 2,
            used_max: 6,
            app_prob: 0.4,
            browse_prob: 0.7,
            lure_prob: 0.3,
            noise_domains: 6,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SquatPair {
    pub squat: String,
    pub victim: String,
}

pub struct SynthWorld {
    pub catalog: Catalog,
    pub corpus: Corpus,
    pub traces: Vec<UserTrace>,
    pub squats: Vec<SquatPair>,
}

struct Site {
    domain: String,
    cert: String,
    package: String,
}

fn hex(rng: &mut ChaCha8Rng, n: usize) -> String {
    (0..n).map(|_| char::from_digit(rng.gen_range(0..16), 16).unwrap()).collect()
}

fn skill_id(rng: &mut ChaCha8Rng) -> String {
    format!(
        "amzn1.ask.skill.{}-{}-{}-{}-{}",
        hex(rng, 8),
        hex(rng, 4),
        hex(rng, 4),
        hex(rng, 4),
        hex(rng, 12)
    )
}

fn asin(rng: &mut ChaCha8Rng) -> String {
    const ALNUM: &[u8] = b"ABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789";
    let tail: String = (0..8).map(|_| ALNUM[rng.gen_range(0..ALNUM.len())] as char).collect();
    format!("B0{tail}")
}

fn reviews(rng: &mut ChaCha8Rng) -> u64 {
    if rng.gen_bool(0.2) {
        0
    } else {
        // heavy tail: a few popular skills, many small ones
        let x: f64 = rng.gen();
        (x.powi(4) * 20_000.0) as u64
    }
}

fn title_case(phrase: &str) -> String {
    phrase
        .split(' ')
        .map(|w| {
            let mut c = w.chars();
            match c.next() {
                Some(f) => f.to_ascii_uppercase().to_string() + c.as_str(),
                None => String::new(),
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}

const SPELLINGS: &[(&str, &str)] = &[
    ("ph", "f"),
    ("f", "ph"),
    ("c", "k"),
    ("k", "c"),
    ("s", "z"),
    ("ee", "ea"),
    ("oo", "u"),
    ("i", "y"),
    ("y", "i"),
    ("er", "ur"),
];

fn misspell(rng: &mut ChaCha8Rng, phrase: &str) -> String {
    let start = rng.gen_range(0..SPELLINGS.len());
    for k in 0..SPELLINGS.len() {
        let (from, to) = SPELLINGS[(start + k) % SPELLINGS.len()];
        if let Some(pos) = phrase.find(from) {
            return format!("{}{}{}", &phrase[..pos], to, &phrase[pos + from.len()..]);
        }
    }
    format!("{phrase}z")
}

fn squat_phonemes(rng: &mut ChaCha8Rng, victim: &[Phoneme], inventory: &[Phoneme]) -> Vec<Phoneme> {
    let mut out = victim.to_vec();
    let i = rng.gen_range(0..out.len());
    if out.len() > 3 && rng.gen_bool(0.3) {
        out.remove(i);
    } else {
        let choices: Vec<&Phoneme> = inventory.iter().filter(|p| **p != out[i]).collect();
        out[i] = (*choices.choose(rng).expect("inventory has several phonemes")).clone();
    }
    out
}

fn listing_page(site: &Site, slug: &str, amazon_url: &str) -> Result<PageRecord> {
    PageRecord::new(
        format!("https://www.{}/{slug}", site.domain),
        format!(
            "<html><body><h1>{slug}</h1><p>Use our voice app.</p>\
             <a href=\"{amazon_url}\">Enable on Alexa</a></body></html>"
        ),
        false,
        &site.cert,
    )
}

fn visit(ts: u64, url: String) -> HistoryRecord {
    HistoryRecord::new(ts, &url, &SkillPageRules::default()).expect("generated URLs parse")
}

/// One session of `pages` distinct pages on `domain`, a minute apart.
fn session(ts: u64, domain: &str, pages: usize, tag: &str) -> Vec<HistoryRecord> {
    (0..pages)
        .map(|p| visit(ts + p as u64 * MINUTE_MS, format!("https://www.{domain}/{tag}/{p}")))
        .collect()
}

impl SynthWorld {
    pub fn generate(cfg: &SynthConfig, vocab: &PronunciationDict) -> Result<SynthWorld> {
        if cfg.skills == 0 || cfg.used_min > cfg.used_max {
            return Err(Error::invalid("synthetic config needs skills > 0 and used_min <= used_max"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let words: Vec<&str> = vocab.words().collect();
        if words.len() < 20 {
            return Err(Error::invalid("vocabulary is too small"));
        }
        let inventory: Vec<Phoneme> = vocab.inventory().iter().cloned().collect();

        let n_squat = (cfg.skills as f64 * cfg.squat_fraction).round() as usize;
        let n_dup = (cfg.skills as f64 * cfg.duplicate_fraction).round() as usize;
        let n_base = cfg.skills.saturating_sub(n_squat + n_dup).max(1);

        let mut skills: Vec<Skill> = Vec::with_capacity(cfg.skills);
        let mut sites: BTreeMap<String, Site> = BTreeMap::new();
        let mut pages: Vec<PageRecord> = Vec::new();
        let mut phrases = BTreeSet::new();

        while skills.len() < n_base {
            let k = rng.gen_range(1..=3);
            let picked: Vec<&str> = (0..k).map(|_| *words.choose(&mut rng).unwrap()).collect();
            let phrase = picked.join(" ");
            if !phrases.insert(phrase.clone()) {
                continue;
            }
            let phonemes: Vec<Phoneme> = picked
                .iter()
                .flat_map(|w| vocab.pronunciations(w).expect("vocab word")[0].phonemes.clone())
                .collect();
            let id = skill_id(&mut rng);
            let amazon_url = format!("https://www.amazon.com/dp/{}", asin(&mut rng));
            let mut metadata_urls = vec![];
            if !rng.gen_bool(cfg.no_site_fraction) {
                let domain = format!("{}{}.com", picked.concat(), skills.len());
                let site = Site {
                    cert: hex(&mut rng, 64),
                    package: format!("com.{}", picked.concat()),
                    domain: domain.clone(),
                };
                pages.push(PageRecord::new(
                    format!("https://www.{domain}/"),
                    "<html><body><a href=\"/about\">About</a></body></html>",
                    false,
                    &site.cert,
                )?);
                pages.push(listing_page(&site, "alexa", &amazon_url)?);
                metadata_urls.push(format!("https://www.{domain}/privacy"));
                sites.insert(id.clone(), site);
            }
            skills.push(Skill {
                id,
                name: title_case(&phrase),
                invocation: phrase,
                phonemes,
                amazon_url,
                metadata_urls,
                reviews: reviews(&mut rng),
                account_linking: rng.gen_bool(0.3),
                pronunciation_override: None,
            });
        }

        let mut squats = Vec::new();
        for k in 0..(n_squat + n_dup) {
            let victim = skills[rng.gen_range(0..n_base)].clone();
            let id = skill_id(&mut rng);
            let amazon_url = format!("https://www.amazon.com/dp/{}", asin(&mut rng));
            let (invocation, phonemes, pronunciation_override) = if k < n_squat {
                let p = squat_phonemes(&mut rng, &victim.phonemes, &inventory);
                (misspell(&mut rng, &victim.invocation), p.clone(), Some(p))
            } else {
                (victim.invocation.clone(), victim.phonemes.clone(), None)
            };
            if let Some(site) = sites.get(&victim.id) {
                pages.push(PageRecord::new(
                    format!("https://forum.{}/t/{}", site.domain, k),
                    format!("<p>try this one instead: <a href=\"{amazon_url}\">{invocation}</a></p>"),
                    true,
                    &site.cert,
                )?);
            }
            squats.push(SquatPair {
                squat: id.clone(),
                victim: victim.id.clone(),
            });
            skills.push(Skill {
                id,
                name: title_case(&invocation),
                invocation,
                phonemes,
                amazon_url,
                metadata_urls: victim.metadata_urls.clone(),
                reviews: reviews(&mut rng),
                account_linking: false,
                pronunciation_override,
            });
        }

        let catalog = Catalog::new(skills)?;
        let corpus = Corpus::new(pages)?;

        let mut traces = Vec::with_capacity(cfg.users);
        for u in 0..cfg.users {
            traces.push(user_trace(&mut rng, cfg, u, &catalog, &sites));
        }
        Ok(SynthWorld {
            catalog,
            corpus,
            traces,
            squats,
        })
    }

    /// Writes `catalog.jsonl`, `corpus/manifest.json` (+ page bodies) and
    /// `traces.jsonl` under `dir`.
    pub fn write_to(&self, dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
        let dir = dir.as_ref();
        let pages_dir = dir.join("corpus").join("pages");
        std::fs::create_dir_all(&pages_dir).map_err(|e| Error::io(&pages_dir, e))?;

        let catalog_path = dir.join("catalog.jsonl");
        self.catalog.save(&catalog_path)?;

        let mut manifest = Vec::with_capacity(self.corpus.len());
        for (i, p) in self.corpus.pages().iter().enumerate() {
            let rel = format!("pages/{i:05}.html");
            let path = dir.join("corpus").join(&rel);
            std::fs::write(&path, &p.body).map_err(|e| Error::io(&path, e))?;
            manifest.push(ManifestEntry {
                url: p.url.clone(),
                domain: p.domain.clone(),
                path: rel,
                user_generated: p.user_generated,
                cert_sha256: p.cert_sha256.clone(),
            });
        }
        let manifest_path = dir.join("corpus").join("manifest.json");
        crate::canonical::write_canonical(&manifest_path, &manifest)?;

        let traces_path = dir.join("traces.jsonl");
        std::fs::write(&traces_path, traces_to_jsonl(&self.traces)).map_err(|e| Error::io(&traces_path, e))?;
        Ok(vec![catalog_path, manifest_path, traces_path])
    }
}

fn user_trace(
    rng: &mut ChaCha8Rng,
    cfg: &SynthConfig,
    user: usize,
    catalog: &Catalog,
    sites: &BTreeMap<String, Site>,
) -> UserTrace {
    let skills = catalog.skills();
    let n_used = rng.gen_range(cfg.used_min..=cfg.used_max).min(skills.len());
    let used: BTreeSet<String> = skills
        .choose_multiple(rng, n_used)
        .map(|s| s.id.clone())
        .collect();

    let mut history = Vec::new();
    let mut apps = Vec::new();
    let day = |d: u64| EPOCH_MS + d * DAY_MS;
    for id in &used {
        let Some(site) = sites.get(id) else { continue };
        if rng.gen_bool(cfg.app_prob) {
            apps.push(AppRecord {
                package: site.package.clone(),
                cert_sha256: site.cert.clone(),
            });
        } else if rng.gen_bool(cfg.browse_prob) {
            let sessions = rng.gen_range(2..=4);
            for s in 0..sessions {
                let ts = day(rng.gen_range(0..30)) + rng.gen_range(0..8) * 60 * MINUTE_MS + s as u64 * 7 * MINUTE_MS;
                let n = rng.gen_range(3..=6);
                history.extend(session(ts, &site.domain, n, &format!("s{s}")));
            }
        } else {
            let ts = day(rng.gen_range(0..30));
            history.extend(session(ts, &site.domain, rng.gen_range(1..=3), "once"));
        }
    }
    for n in 0..cfg.noise_domains {
        let domain = format!("news{}.org", rng.gen_range(0..200));
        for s in 0..rng.gen_range(1..=3) {
            let ts = day(rng.gen_range(0..30)) + n as u64 * 13 * MINUTE_MS;
            history.extend(session(ts, &domain, rng.gen_range(1..=5), &format!("n{s}")));
        }
    }
    if rng.gen_bool(cfg.lure_prob) {
        let domain = format!("promo{}.net", rng.gen_range(0..50));
        history.extend(adversarial_visits(rng, &domain, LureKind::SkillPagePreceded));
    }
    history.sort_by(|a, b| (a.timestamp, &a.url).cmp(&(b.timestamp, &b.url)));
    UserTrace {
        user_id: format!("user{user:03}"),
        history,
        apps,
        used_skills: used,
    }
}

/// Shapes of attacker-planted browsing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LureKind {
    /// One session with any number of pages.
    SingleSession,
    /// Many sessions, each touching at most two distinct pages.
    ThinSessions,
    /// Full-looking sessions, each opened right after a skill listing.
    SkillPagePreceded,
}

/// Visits an attacker can make a victim's browser record on `domain`.
pub fn adversarial_visits(rng: &mut ChaCha8Rng, domain: &str, kind: LureKind) -> Vec<HistoryRecord> {
    let start = EPOCH_MS + rng.gen_range(0..30) * DAY_MS;
    match kind {
        LureKind::SingleSession => {
            let n = rng.gen_range(1..=20);
            let mut out = Vec::new();
            let mut ts = start;
            for p in 0..n {
                out.push(visit(ts, format!("https://www.{domain}/p/{p}")));
                // stay inside one session
                ts += rng.gen_range(1..=29) * MINUTE_MS;
            }
            out
        }
        LureKind::ThinSessions => {
            let sessions = rng.gen_range(2..=10);
            let mut out = Vec::new();
            for s in 0..sessions {
                let ts = start + s * (2 * 60 * MINUTE_MS);
                let repeats = rng.gen_range(1..=6);
                for r in 0..repeats {
                    let page = rng.gen_range(0..2);
                    out.push(visit(ts + r * MINUTE_MS, format!("https://www.{domain}/p/{page}")));
                }
            }
            out
        }
        LureKind::SkillPagePreceded => {
            let sessions = rng.gen_range(2..=6);
            let mut out = Vec::new();
            for s in 0..sessions {
                let ts = start + s * (3 * 60 * MINUTE_MS);
                out.push(visit(ts, format!("https://www.amazon.com/dp/{}", asin(rng))));
                let n = rng.gen_range(3..=8);
                for p in 0..n {
                    let dt = rng.gen_range(0..=5 * MINUTE_MS);
                    out.push(visit(ts + dt, format!("https://www.{domain}/s{s}/{p}")));
                }
            }
            out
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SynthWorld {
        let vocab = PronunciationDict::parse(VOCAB_DICT).unwrap();
        let cfg = SynthConfig {
            seed: 7,
            skills: 60,
            users: 5,
            ..SynthConfig::default()
        };
        SynthWorld::generate(&cfg, &vocab).unwrap()
    }

    #[test]
    fn deterministic() {
        let a = small();
        let b = small();
        assert_eq!(a.catalog.to_jsonl(), b.catalog.to_jsonl());
        assert_eq!(traces_to_jsonl(&a.traces), traces_to_jsonl(&b.traces));
    }

    #[test]
    fn shape() {
        let w = small();
        assert_eq!(w.catalog.len(), 60);
        assert_eq!(w.traces.len(), 5);
        assert!(!w.squats.is_empty());
        assert!(w.catalog.skills().iter().all(|s| !s.phonemes.is_empty()));
        assert!(w.corpus.pages().iter().any(|p| p.user_generated));
        for t in &w.traces {
            t.validate(&w.catalog).unwrap();
        }
    }

    #[test]
    fn misspelling_changes_text() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for p in ["cat facts", "sunrise", "abc"] {
            assert_ne!(misspell(&mut rng, p), p);
        }
    }
}
