//! Needleman-Wunsch global alignment.

/// Scoring for global alignment. The defaults are the classic
/// match +1 / mismatch -1 / gap -1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AlignScoring {
    pub matched: i32,
    pub mismatch: i32,
    pub gap: i32,
}

impl Default for AlignScoring {
    fn default() -> Self {
        AlignScoring {
            matched: 1,
            mismatch: -1,
            gap: -1,
        }
    }
}

/// One column of an alignment, holding indices into the two inputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Column {
    /// Both sides consume a symbol (match or mismatch).
    Pair(usize, usize),
    /// Symbol from the first sequence against a gap.
    Delete(usize),
    /// Gap against a symbol from the second sequence.
    Insert(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alignment {
    pub score: i32,
    pub columns: Vec<Column>,
}

/// Global alignment of `a` against `b`.
///
/// Traceback ties prefer the diagonal, then a deletion from `a` (up), then
/// an insertion from `b` (left), so the result is fully deterministic.
pub fn needleman_wunsch<T: PartialEq>(a: &[T], b: &[T], scoring: AlignScoring) -> Alignment {
    let (n, m) = (a.len(), b.len());
    let w = m + 1;
    let mut score = vec![0i32; (n + 1) * w];
    for i in 1..=n {
        score[i * w] = i as i32 * scoring.gap;
    }
    for (j, s) in score.iter_mut().enumerate().take(w) {
        *s = j as i32 * scoring.gap;
    }
    let pair = |i: usize, j: usize| {
        if a[i] == b[j] {
            scoring.matched
        } else {
            scoring.mismatch
        }
    };
    for i in 1..=n {
        for j in 1..=m {
            let diag = score[(i - 1) * w + j - 1] + pair(i - 1, j - 1);
            let up = score[(i - 1) * w + j] + scoring.gap;
            let left = score[i * w + j - 1] + scoring.gap;
            score[i * w + j] = diag.max(up).max(left);
        }
    }

    let mut columns = Vec::with_capacity(n + m);
    let (mut i, mut j) = (n, m);
    while i > 0 || j > 0 {
        let here = score[i * w + j];
        if i > 0 && j > 0 && here == score[(i - 1) * w + j - 1] + pair(i - 1, j - 1) {
            columns.push(Column::Pair(i - 1, j - 1));
            i -= 1;
            j -= 1;
        } else if i > 0 && here == score[(i - 1) * w + j] + scoring.gap {
            columns.push(Column::Delete(i - 1));
            i -= 1;
        } else {
            columns.push(Column::Insert(j - 1));
            j -= 1;
        }
    }
    columns.reverse();
    Alignment {
        score: score[n * w + m],
        columns,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Scores every alignment of `a` and `b` by exhaustive recursion.
    fn brute_best(a: &[u8], b: &[u8], s: AlignScoring) -> i32 {
        if a.is_empty() {
            return b.len() as i32 * s.gap;
        }
        if b.is_empty() {
            return a.len() as i32 * s.gap;
        }
        let p = if a[0] == b[0] { s.matched } else { s.mismatch };
        let diag = p + brute_best(&a[1..], &b[1..], s);
        let del = s.gap + brute_best(&a[1..], b, s);
        let ins = s.gap + brute_best(a, &b[1..], s);
        diag.max(del).max(ins)
    }

    fn column_score(a: &[u8], b: &[u8], al: &Alignment, s: AlignScoring) -> i32 {
        al.columns
            .iter()
            .map(|c| match *c {
                Column::Pair(i, j) if a[i] == b[j] => s.matched,
                Column::Pair(..) => s.mismatch,
                _ => s.gap,
            })
            .sum()
    }

    #[test]
    fn single_substitution() {
        let al = needleman_wunsch(b"RID", b"RED", AlignScoring::default());
        assert_eq!(al.score, 1);
        assert_eq!(
            al.columns,
            vec![Column::Pair(0, 0), Column::Pair(1, 1), Column::Pair(2, 2)]
        );
    }

    #[test]
    fn empty_sides() {
        let al = needleman_wunsch(b"", b"AB", AlignScoring::default());
        assert_eq!(al.score, -2);
        assert_eq!(al.columns, vec![Column::Insert(0), Column::Insert(1)]);
        let al = needleman_wunsch::<u8>(b"", b"", AlignScoring::default());
        assert!(al.columns.is_empty());
    }

    #[test]
    fn matches_exhaustive_search() {
        let alphabet = b"ABC";
        let s = AlignScoring::default();
        let mut seqs: Vec<Vec<u8>> = vec![vec![]];
        for len in 1..=4 {
            let mut frontier = vec![vec![]];
            for _ in 0..len {
                frontier = frontier
                    .into_iter()
                    .flat_map(|p: Vec<u8>| {
                        alphabet.iter().map(move |&c| {
                            let mut q = p.clone();
                            q.push(c);
                            q
                        })
                    })
                    .collect();
            }
            seqs.extend(frontier);
        }
        for a in &seqs {
            for b in seqs.iter().step_by(3) {
                let al = needleman_wunsch(a, b, s);
                assert_eq!(al.score, brute_best(a, b, s), "{a:?} {b:?}");
                assert_eq!(column_score(a, b, &al, s), al.score);
            }
        }
    }
}
