//! Phonetic distance over a pronunciation dictionary with learned phoneme costs.

mod align;
mod costs;
mod dict;
mod distance;

pub use align::{needleman_wunsch, AlignScoring, Alignment, Column};
pub use costs::{learn_cost_matrix, learn_from_pairs, CostMatrix, DEFAULT_INDEL_COST};
pub use dict::{normalize_phrase, phrase_to_phonemes, Overrides, Phoneme, PhonemeSeq, PronunciationDict};
pub use distance::{
    edit_script, normalized_distance, phonetic_distance, weighted_levenshtein, EditOp,
    DISTANCE_SCALE,
};
