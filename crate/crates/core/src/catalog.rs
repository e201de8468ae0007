//! Skill catalog (JSON Lines) and phoneme resolution.

use std::collections::{BTreeSet, HashMap};
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phonetics::{phrase_to_phonemes, Overrides, Phoneme, PhonemeSeq, PronunciationDict};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Skill {
    pub id: String,
    pub name: String,
    pub invocation: String,
    #[serde(default)]
    pub phonemes: Vec<Phoneme>,
    pub amazon_url: String,
    #[serde(default)]
    pub metadata_urls: Vec<String>,
    #[serde(default)]
    pub reviews: u64,
    #[serde(default)]
    pub account_linking: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pronunciation_override: Option<Vec<Phoneme>>,
}

impl Skill {
    pub fn phoneme_seq(&self) -> PhonemeSeq {
        PhonemeSeq::new(self.invocation.clone(), self.phonemes.clone())
    }
}

/// Skills with unique ids, in input order.
#[derive(Debug, Clone, Default)]
pub struct Catalog {
    skills: Vec<Skill>,
    index: HashMap<String, usize>,
}

impl Catalog {
    pub fn new(skills: Vec<Skill>) -> Result<Self> {
        let mut index = HashMap::with_capacity(skills.len());
        for (i, s) in skills.iter().enumerate() {
            if s.invocation.trim().is_empty() {
                return Err(Error::invalid(format!("skill `{}` has an empty invocation", s.id)));
            }
            if index.insert(s.id.clone(), i).is_some() {
                return Err(Error::DuplicateSkill(s.id.clone()));
            }
        }
        Ok(Catalog { skills, index })
    }

    pub fn from_jsonl(text: &str) -> Result<Self> {
        let mut skills = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let skill: Skill = serde_json::from_str(line).map_err(|e| Error::Parse {
                line: i + 1,
                message: e.to_string(),
            })?;
            skills.push(skill);
        }
        Catalog::new(skills)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_jsonl(&text)
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for s in &self.skills {
            out.push_str(&crate::canonical::to_canonical_string(s));
            out.push('\n');
        }
        out
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        f.write_all(self.to_jsonl().as_bytes())
            .map_err(|e| Error::io(path, e))
    }

    pub fn skills(&self) -> &[Skill] {
        &self.skills
    }

    pub fn len(&self) -> usize {
        self.skills.len()
    }

    pub fn is_empty(&self) -> bool {
        self.skills.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&Skill> {
        self.index.get(id).map(|&i| &self.skills[i])
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn contains(&self, id: &str) -> bool {
        self.index.contains_key(id)
    }

    /// Fills in phonemes for every skill: the skill's own override wins,
    /// then any phonemes already present, then dictionary conversion.
    /// All unknown words across the catalog are reported together.
    pub fn resolve_phonemes(&mut self, dict: &PronunciationDict, overrides: &Overrides) -> Result<()> {
        let mut missing = BTreeSet::new();
        for skill in &mut self.skills {
            if let Some(ov) = &skill.pronunciation_override {
                if ov.is_empty() {
                    return Err(Error::invalid(format!("skill `{}` has an empty override", skill.id)));
                }
                if let Some(p) = ov.iter().find(|p| !dict.inventory().contains(*p)) {
                    return Err(Error::UnknownPhoneme(p.to_string()));
                }
                skill.phonemes = ov.clone();
                continue;
            }
            if !skill.phonemes.is_empty() {
                continue;
            }
            match phrase_to_phonemes(&skill.invocation, dict, overrides) {
                Ok(seq) => skill.phonemes = seq.phonemes,
                Err(Error::OutOfVocabulary { words }) => missing.extend(words),
                Err(e) => return Err(e),
            }
        }
        if !missing.is_empty() {
            return Err(Error::OutOfVocabulary {
                words: missing.into_iter().collect(),
            });
        }
        Ok(())
    }

    /// Errors unless every skill has phonemes.
    pub fn ensure_resolved(&self) -> Result<()> {
        match self.skills.iter().find(|s| s.phonemes.is_empty()) {
            Some(s) => Err(Error::invalid(format!(
                "skill `{}` has no phonemes; resolve the catalog against a dictionary first",
                s.id
            ))),
            None => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn skill(id: &str, inv: &str) -> Skill {
        Skill {
            id: id.into(),
            name: inv.into(),
            invocation: inv.into(),
            phonemes: vec![],
            amazon_url: format!("https://www.amazon.com/dp/{id}"),
            metadata_urls: vec![],
            reviews: 0,
            account_linking: false,
            pronunciation_override: None,
        }
    }

    #[test]
    fn duplicate_ids_rejected() {
        let err = Catalog::new(vec![skill("a", "x"), skill("a", "y")]).unwrap_err();
        assert!(matches!(err, Error::DuplicateSkill(id) if id == "a"));
    }

    #[test]
    fn jsonl_round_trip() {
        let mut s = skill("a", "fit bit");
        s.pronunciation_override = Some(vec![Phoneme::parse("F").unwrap()]);
        let c = Catalog::new(vec![s, skill("b", "cat facts")]).unwrap();
        let text = c.to_jsonl();
        let back = Catalog::from_jsonl(&text).unwrap();
        assert_eq!(back.skills(), c.skills());
    }

    #[test]
    fn resolve_reports_all_missing_words() {
        let dict = PronunciationDict::parse("FIT  F IH1 T\nBIT  B IH1 T\n").unwrap();
        let mut c = Catalog::new(vec![skill("a", "fit qux"), skill("b", "zed bit")]).unwrap();
        match c.resolve_phonemes(&dict, &Overrides::new()) {
            Err(Error::OutOfVocabulary { words }) => assert_eq!(words, vec!["qux", "zed"]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn skill_override_wins() {
        let dict = PronunciationDict::parse("FIT  F IH1 T\nBIT  B IH1 T\n").unwrap();
        let mut s = skill("a", "phit bit");
        s.pronunciation_override = Some(PhonemeSeq::from_symbols("", "F IH T B IH T").unwrap().phonemes);
        let mut c = Catalog::new(vec![s, skill("b", "fit bit")]).unwrap();
        c.resolve_phonemes(&dict, &Overrides::new()).unwrap();
        assert_eq!(c.skills()[0].phonemes, c.skills()[1].phonemes);
    }
}
