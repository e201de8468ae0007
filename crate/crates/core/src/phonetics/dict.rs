//! CMU pronouncing dictionary parsing and phrase-to-phoneme conversion.
//!
//! Both dictionary flavours in circulation are accepted: the classic
//! `cmudict-0.7b` layout (uppercase words, `;;;` comment lines) and the
//! newer lowercase `cmudict.dict` layout, which may carry a trailing
//! `# comment` after the phonemes. Stress digits are always stripped.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One ARPABET symbol without its stress digit (`IH1` becomes `IH`).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Phoneme(String);

impl Phoneme {
    /// Parses a dictionary token, dropping any trailing stress digits.
    pub fn parse(token: &str) -> Result<Self> {
        let symbol = token.trim_end_matches(|c: char| c.is_ascii_digit());
        if symbol.is_empty() || !symbol.bytes().all(|b| b.is_ascii_uppercase()) {
            return Err(Error::InvalidPhoneme(token.to_string()));
        }
        Ok(Phoneme(symbol.to_string()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for Phoneme {
    type Error = Error;

    fn try_from(value: String) -> Result<Self> {
        Phoneme::parse(&value)
    }
}

impl From<Phoneme> for String {
    fn from(p: Phoneme) -> String {
        p.0
    }
}

impl fmt::Display for Phoneme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A phrase rendered as phonemes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhonemeSeq {
    pub phonemes: Vec<Phoneme>,
    pub source_phrase: String,
}

impl PhonemeSeq {
    pub fn new(source_phrase: impl Into<String>, phonemes: Vec<Phoneme>) -> Self {
        PhonemeSeq {
            phonemes,
            source_phrase: source_phrase.into(),
        }
    }

    /// Builds a sequence from whitespace-separated symbols, e.g. `"F IH1 T"`.
    pub fn from_symbols(source_phrase: impl Into<String>, symbols: &str) -> Result<Self> {
        let phonemes = symbols
            .split_whitespace()
            .map(Phoneme::parse)
            .collect::<Result<Vec<_>>>()?;
        Ok(PhonemeSeq::new(source_phrase, phonemes))
    }

    pub fn len(&self) -> usize {
        self.phonemes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phonemes.is_empty()
    }

    pub fn symbols(&self) -> Vec<String> {
        self.phonemes.iter().map(|p| p.0.clone()).collect()
    }
}

impl fmt::Display for PhonemeSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for p in &self.phonemes {
            if !first {
                f.write_str(" ")?;
            }
            first = false;
            f.write_str(&p.0)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default)]
pub struct PronunciationDict {
    entries: BTreeMap<String, Vec<PhonemeSeq>>,
    alt_pairs: Vec<(PhonemeSeq, PhonemeSeq)>,
    inventory: BTreeSet<Phoneme>,
}

impl PronunciationDict {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries: BTreeMap<String, Vec<PhonemeSeq>> = BTreeMap::new();
        let mut inventory = BTreeSet::new();

        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with(";;;") {
                continue;
            }
            let mut tokens = line.split_whitespace();
            let head = tokens.next().unwrap_or_default();
            let word = parse_word_token(head).map_err(|message| Error::Parse {
                line: line_no,
                message,
            })?;

            let mut phonemes = Vec::new();
            for tok in tokens {
                if tok.starts_with('#') {
                    break;
                }
                let ph = Phoneme::parse(tok).map_err(|_| Error::Parse {
                    line: line_no,
                    message: format!("invalid phoneme `{tok}`"),
                })?;
                inventory.insert(ph.clone());
                phonemes.push(ph);
            }
            if phonemes.is_empty() {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("no phonemes for `{head}`"),
                });
            }
            entries
                .entry(word.clone())
                .or_default()
                .push(PhonemeSeq::new(word, phonemes));
        }

        let mut alt_pairs = Vec::new();
        for variants in entries.values() {
            for i in 0..variants.len() {
                for j in i + 1..variants.len() {
                    alt_pairs.push((variants[i].clone(), variants[j].clone()));
                }
            }
        }

        Ok(PronunciationDict {
            entries,
            alt_pairs,
            inventory,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    /// Number of distinct words.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// All pronunciations of `word` in file order. Lookup is case-insensitive.
    pub fn pronunciations(&self, word: &str) -> Option<&[PhonemeSeq]> {
        self.entries
            .get(&word.to_lowercase())
            .map(|v| v.as_slice())
    }

    pub fn alt_pairs(&self) -> &[(PhonemeSeq, PhonemeSeq)] {
        &self.alt_pairs
    }

    pub fn inventory(&self) -> &BTreeSet<Phoneme> {
        &self.inventory
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(|k| k.as_str())
    }
}

/// Splits `WORD(2)` into its base word; rejects malformed variant suffixes.
fn parse_word_token(token: &str) -> std::result::Result<String, String> {
    // Punctuation entries such as `(PAREN` or `)CLOSE-PAREN` start with a
    // parenthesis, so only a parenthesis after the first character can open
    // a variant suffix.
    let lead = token.chars().next().map_or(0, char::len_utf8);
    match token[lead..].find('(').map(|i| i + lead) {
        Some(open) => {
            let suffix = &token[open + 1..];
            let digits = suffix
                .strip_suffix(')')
                .ok_or_else(|| format!("unbalanced parenthesis in `{token}`"))?;
            if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
                return Err(format!("bad variant suffix in `{token}`"));
            }
            Ok(token[..open].to_lowercase())
        }
        None if token.len() > 1 && token.ends_with(')') && !token.starts_with(')') => {
            Err(format!("unbalanced parenthesis in `{token}`"))
        }
        None => Ok(token.to_lowercase()),
    }
}

/// Explicit pronunciations for phrases or single words, keyed by lowercase text.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Overrides {
    map: BTreeMap<String, Vec<Phoneme>>,
}

impl Overrides {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, key: &str, phonemes: Vec<Phoneme>) {
        self.map.insert(normalize_phrase(key), phonemes);
    }

    pub fn get(&self, key: &str) -> Option<&[Phoneme]> {
        self.map.get(key).map(|v| v.as_slice())
    }

    /// Reads the JSON object form: `{"phit": ["F", "IH", "T"]}`.
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: BTreeMap<String, Vec<Phoneme>> = serde_json::from_str(text)?;
        let mut out = Overrides::new();
        for (k, v) in raw {
            if v.is_empty() {
                return Err(Error::invalid(format!("override `{k}` has no phonemes")));
            }
            out.insert(&k, v);
        }
        Ok(out)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

/// Lowercases and collapses whitespace runs.
pub fn normalize_phrase(phrase: &str) -> String {
    phrase
        .split_whitespace()
        .map(|w| w.to_lowercase())
        .collect::<Vec<_>>()
        .join(" ")
}

fn trim_word(word: &str) -> &str {
    word.trim_matches(|c: char| !(c.is_alphanumeric() || c == '\''))
}

/// Converts a phrase to phonemes: whole-phrase override, then per word an
/// override or the first dictionary pronunciation. Unknown words are an
/// error; nothing is guessed.
pub fn phrase_to_phonemes(
    phrase: &str,
    dict: &PronunciationDict,
    overrides: &Overrides,
) -> Result<PhonemeSeq> {
    let normalized = normalize_phrase(phrase);
    if normalized.is_empty() {
        return Err(Error::invalid("empty phrase"));
    }
    let check = |phonemes: &[Phoneme]| -> Result<()> {
        match phonemes.iter().find(|p| !dict.inventory.contains(*p)) {
            Some(p) => Err(Error::UnknownPhoneme(p.to_string())),
            None => Ok(()),
        }
    };

    if let Some(ph) = overrides.get(&normalized) {
        check(ph)?;
        return Ok(PhonemeSeq::new(normalized, ph.to_vec()));
    }

    let mut phonemes = Vec::new();
    let mut missing = Vec::new();
    for raw in normalized.split(' ') {
        let word = trim_word(raw);
        if word.is_empty() {
            continue;
        }
        if let Some(ph) = overrides.get(word) {
            check(ph)?;
            phonemes.extend_from_slice(ph);
        } else if let Some(prons) = dict.entries.get(word) {
            phonemes.extend_from_slice(&prons[0].phonemes);
        } else {
            missing.push(word.to_string());
        }
    }
    if !missing.is_empty() {
        return Err(Error::OutOfVocabulary { words: missing });
    }
    if phonemes.is_empty() {
        return Err(Error::invalid(format!("no words in phrase `{phrase}`")));
    }
    Ok(PhonemeSeq::new(normalized, phonemes))
}
