mod common;

use common::{all_paths, cmu, costs, overrides, path_cost, Step};
use proptest::prelude::*;
use squatguard_core::phonetics::{
    edit_script, learn_from_pairs, needleman_wunsch, normalized_distance, phonetic_distance,
    phrase_to_phonemes, weighted_levenshtein, AlignScoring, Column, CostMatrix, EditOp, Phoneme,
    PhonemeSeq, PronunciationDict,
};
use squatguard_core::Error;

fn seq(s: &str) -> PhonemeSeq {
    PhonemeSeq::from_symbols(s, s).unwrap()
}

fn ph(s: &str) -> Phoneme {
    Phoneme::parse(s).unwrap()
}

fn nw_score_oracle(a: &[u8], b: &[u8]) -> i32 {
    all_paths(a.len(), b.len())
        .iter()
        .map(|p| {
            let (mut i, mut j, mut s) = (0, 0, 0);
            for st in p {
                match st {
                    Step::Pair => {
                        s += if a[i] == b[j] { 1 } else { -1 };
                        i += 1;
                        j += 1;
                    }
                    Step::Delete => {
                        s -= 1;
                        i += 1;
                    }
                    Step::Insert => {
                        s -= 1;
                        j += 1;
                    }
                }
            }
            s
        })
        .max()
        .unwrap()
}

#[test]
fn read_pair_alignment_is_optimal_and_diagonal() {
    let a = ["R", "IY", "D"];
    let b = ["R", "EH", "D"];
    let al = needleman_wunsch(&a, &b, AlignScoring::default());
    let oracle = nw_score_oracle(&[0, 1, 2], &[0, 3, 2]);
    assert_eq!(al.score, oracle);
    assert_eq!(al.score, 1);
    assert_eq!(al.columns, vec![Column::Pair(0, 0), Column::Pair(1, 1), Column::Pair(2, 2)]);
}

#[test]
fn read_pair_learns_half_cost() {
    let dict = PronunciationDict::parse("READ  R IY1 D\nREAD(2)  R EH1 D\n").unwrap();
    assert_eq!(dict.alt_pairs().len(), 1);
    let m = learn_from_pairs(dict.inventory().iter().cloned(), dict.alt_pairs()).unwrap();
    // F(IY) = F(EH) = 1, one IY/EH substitution: 1 - 1/2
    assert_eq!(m.sub_cost(&ph("IY"), &ph("EH")), Some(0.5));
    assert_eq!(m.sub_cost(&ph("R"), &ph("D")), Some(1.0));
    assert_eq!(m.sub_cost(&ph("R"), &ph("R")), Some(0.0));
}

#[test]
fn learned_costs_match_counting_oracle() {
    // Recount F and SF by hand from the alignments and compare every cell.
    let text = "A  K AE1 T\nA(2)  K AH0 T\nB  T AH0 M EY1 T OW2\nB(2)  T AH0 M AA1 T OW2\nC  P IY1\nC(2)  P EH1\nC(3)  P IH1\n";
    let dict = PronunciationDict::parse(text).unwrap();
    let m = learn_from_pairs(dict.inventory().iter().cloned(), dict.alt_pairs()).unwrap();
    let inv = m.inventory().to_vec();
    let mut f = vec![0u64; inv.len()];
    let mut sf = vec![vec![0u64; inv.len()]; inv.len()];
    let pos = |p: &Phoneme| inv.iter().position(|q| q == p).unwrap();
    for (a, b) in dict.alt_pairs() {
        for p in a.phonemes.iter().chain(&b.phonemes) {
            f[pos(p)] += 1;
        }
        // all alt pairs here have equal lengths, so the optimal alignment is
        // the diagonal
        for (x, y) in a.phonemes.iter().zip(&b.phonemes) {
            if x != y {
                sf[pos(x)][pos(y)] += 1;
            }
        }
    }
    for i in 0..inv.len() {
        for j in 0..inv.len() {
            let expected = if i == j {
                0.0
            } else if f[i] + f[j] == 0 {
                1.0
            } else {
                (1.0 - (sf[i][j] + sf[j][i]) as f64 / (f[i] + f[j]) as f64).clamp(0.0, 1.0)
            };
            let got = m.sub_cost(&inv[i], &inv[j]).unwrap();
            assert!((got - expected).abs() < 1e-12, "{}/{}: {got} vs {expected}", inv[i], inv[j]);
        }
    }
}

#[test]
fn read_pair_distance_examples() {
    let m = learn_from_pairs([], &[(seq("R IY D"), seq("R EH D"))]).unwrap();
    let d = phonetic_distance(&seq("R IY D"), &seq("R EH D"), &m).unwrap();
    assert!((d - 500.0 / 3.0).abs() < 1e-9);
    let d = phonetic_distance(&seq("R IY D"), &seq("R IY D"), &m).unwrap();
    assert_eq!(d, 0.0);
    assert!(matches!(
        phonetic_distance(&PhonemeSeq::new("", vec![]), &seq("R"), &m),
        Err(Error::EmptySequence)
    ));
}

#[test]
fn oov_words_are_listed() {
    match phrase_to_phonemes("fitbit zqzqzq", cmu(), &Default::default()) {
        Err(Error::OutOfVocabulary { words }) => assert_eq!(words, vec!["fitbit", "zqzqzq"]),
        other => panic!("{other:?}"),
    }
    assert!(phrase_to_phonemes("fitbit", cmu(), &overrides()).is_ok());
}

#[test]
fn edit_script_cost_equals_distance() {
    let c = costs();
    for (a, b) in [("cat facts", "cat fax"), ("full moon", "four moon"), ("daily horoscope", "lyft")] {
        let pa = phrase_to_phonemes(a, cmu(), &overrides()).unwrap();
        let pb = phrase_to_phonemes(b, cmu(), &overrides()).unwrap();
        let script = edit_script(&pa, &pb, c).unwrap();
        let total: f64 = script
            .iter()
            .map(|op| match op {
                EditOp::Keep { .. } => 0.0,
                EditOp::Substitute { cost, .. } | EditOp::Delete { cost, .. } | EditOp::Insert { cost, .. } => *cost,
            })
            .sum();
        let wl = weighted_levenshtein(&c.encode(&pa).unwrap(), &c.encode(&pb).unwrap(), c);
        assert!((total - wl).abs() < 1e-9, "{a}/{b}");
    }
}

#[test]
fn malformed_cost_file_rejected() {
    let asym = r#"{"counts":{"F":{},"SF":{}},"indel_cost":1.0,"inventory":["A","B"],"sub_cost":{"A":{"A":0.0,"B":0.2},"B":{"A":0.3,"B":0.0}}}"#;
    assert!(CostMatrix::from_json(asym).is_err());
}

fn cmu_symbols() -> Vec<String> {
    costs().inventory().iter().map(|p| p.to_string()).collect()
}

fn arb_seq(max: usize) -> impl Strategy<Value = PhonemeSeq> {
    let inv = cmu_symbols();
    prop::collection::vec(prop::sample::select(inv), 1..=max)
        .prop_map(|v| PhonemeSeq::from_symbols("", &v.join(" ")).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn distance_is_symmetric_and_bounded(a in arb_seq(10), b in arb_seq(10)) {
        let c = costs();
        let ab = phonetic_distance(&a, &b, c).unwrap();
        let ba = phonetic_distance(&b, &a, c).unwrap();
        prop_assert!((ab - ba).abs() < 1e-9);
        prop_assert!((0.0..=1000.0).contains(&ab));
        prop_assert_eq!(phonetic_distance(&a, &a, c).unwrap(), 0.0);
    }

    #[test]
    fn dp_matches_path_enumeration(a in prop::collection::vec(0u16..5, 0..=5), b in prop::collection::vec(0u16..5, 0..=5)) {
        let c = costs();
        let sub = |x: u16, y: u16| c.sub_cost(&c.inventory()[x as usize], &c.inventory()[y as usize]).unwrap();
        let best = all_paths(a.len(), b.len())
            .iter()
            .map(|p| path_cost(p, &a, &b, sub, c.indel_cost()))
            .fold(f64::INFINITY, f64::min);
        prop_assert!((weighted_levenshtein(&a, &b, c) - best).abs() < 1e-9);
        if !a.is_empty() || !b.is_empty() {
            let norm = normalized_distance(&a, &b, c);
            prop_assert!((norm - 1000.0 * best / a.len().max(b.len()) as f64).abs() < 1e-9);
        }
    }

    #[test]
    fn nw_score_is_maximal(a in prop::collection::vec(0u8..3, 0..=5), b in prop::collection::vec(0u8..3, 0..=5)) {
        let al = needleman_wunsch(&a, &b, AlignScoring::default());
        prop_assert_eq!(al.score, nw_score_oracle(&a, &b));
    }
}
