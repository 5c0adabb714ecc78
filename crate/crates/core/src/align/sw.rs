//! Smith-Waterman local alignment over token sequences.
//!
//! Memory stays affine in the reference length: the forward sweep keeps two
//! score rows plus periodic checkpoint rows, and the traceback reconstructs
//! one block of direction bytes at a time from the nearest checkpoint.

use super::{intern_pair, AlignmentOp, SWParams};

const DIR_STOP: u8 = 0;
const DIR_DIAG: u8 = 1;
const DIR_UP: u8 = 2;
const DIR_LEFT: u8 = 3;

// Cap on the transient direction-block buffer (bytes).
const BLOCK_BUFFER_BYTES: usize = 32 << 20;

/// Returns the optimal-score local alignment between `hyp` and `ref_tokens`.
///
/// The best-scoring DP cell wins; ties prefer the earlier reference end,
/// then the earlier hypothesis end. The traceback runs to the first
/// zero-score cell, preferring diagonal moves, then hypothesis-only, then
/// reference-only, which keeps tied alignments as short as possible. Returns
/// an empty list when the best score is not positive.
pub fn smith_waterman<A: AsRef<str>, B: AsRef<str>>(
    hyp: &[A],
    ref_tokens: &[B],
    params: &SWParams,
) -> Vec<AlignmentOp> {
    let (hyp_ids, ref_ids) = intern_pair(hyp, ref_tokens);
    align_ids(&hyp_ids, &ref_ids, params)
}

fn align_ids(hyp: &[u32], refs: &[u32], params: &SWParams) -> Vec<AlignmentOp> {
    let n = hyp.len();
    let m = refs.len();
    if n == 0 || m == 0 {
        return Vec::new();
    }

    let stride = (BLOCK_BUFFER_BYTES / (m + 1)).clamp(1, n);

    // Forward sweep: track the best cell and checkpoint every `stride` rows.
    // checkpoints[k] holds the scores of row k * stride (row 0 is all zeros).
    let mut checkpoints: Vec<Vec<f64>> = Vec::with_capacity(n / stride + 1);
    checkpoints.push(vec![0.0; m + 1]);

    let mut prev = vec![0.0f64; m + 1];
    let mut cur = vec![0.0f64; m + 1];
    let mut best = 0.0f64;
    let mut best_i = 0usize;
    let mut best_j = 0usize;

    for i in 1..=n {
        let a = hyp[i - 1];
        cur[0] = 0.0;
        for j in 1..=m {
            let (score, _) = cell(prev[j - 1], prev[j], cur[j - 1], a, refs[j - 1], params);
            cur[j] = score;
            if score > best || (score == best && score > 0.0 && (j, i) < (best_j, best_i)) {
                best = score;
                best_i = i;
                best_j = j;
            }
        }
        std::mem::swap(&mut prev, &mut cur);
        if i % stride == 0 {
            checkpoints.push(prev.clone());
        }
    }

    if best <= 0.0 {
        return Vec::new();
    }

    // Traceback with block reconstruction.
    let mut ops_rev: Vec<AlignmentOp> = Vec::new();
    let mut i = best_i;
    let mut j = best_j;
    let mut block_lo = usize::MAX; // first row index held in `dirs`
    let mut dirs: Vec<u8> = Vec::new();
    let mut rows_in_block = 0usize;

    while i > 0 && j > 0 {
        if i < block_lo || i >= block_lo + rows_in_block {
            let k = (i - 1) / stride;
            block_lo = k * stride + 1;
            rows_in_block = stride.min(n - block_lo + 1);
            rebuild_block(
                hyp,
                refs,
                params,
                &checkpoints[k],
                block_lo,
                rows_in_block,
                &mut dirs,
            );
        }
        let dir = dirs[(i - block_lo) * (m + 1) + j];
        match dir {
            DIR_DIAG => {
                let op = if hyp[i - 1] == refs[j - 1] {
                    AlignmentOp::Match {
                        hyp_idx: i - 1,
                        ref_idx: j - 1,
                    }
                } else {
                    AlignmentOp::Substitute {
                        hyp_idx: i - 1,
                        ref_idx: j - 1,
                    }
                };
                ops_rev.push(op);
                i -= 1;
                j -= 1;
            }
            DIR_UP => {
                ops_rev.push(AlignmentOp::Insert { hyp_idx: i - 1 });
                i -= 1;
            }
            DIR_LEFT => {
                ops_rev.push(AlignmentOp::Delete { ref_idx: j - 1 });
                j -= 1;
            }
            _ => break, // zero cell: local alignment start
        }
    }

    ops_rev.reverse();
    ops_rev
}

#[inline]
fn cell(diag: f64, up: f64, left: f64, a: u32, b: u32, params: &SWParams) -> (f64, u8) {
    let mut score = 0.0f64;
    let mut dir = DIR_STOP;
    let d = diag
        + if a == b {
            params.match_score
        } else {
            params.mismatch_penalty
        };
    if d > score {
        score = d;
        dir = DIR_DIAG;
    }
    let u = up + params.gap_penalty;
    if u > score {
        score = u;
        dir = DIR_UP;
    }
    let l = left + params.gap_penalty;
    if l > score {
        score = l;
        dir = DIR_LEFT;
    }
    (score, dir)
}

/// Recomputes direction bytes for rows `[block_lo, block_lo + rows)` from the
/// checkpointed scores of row `block_lo - 1`.
fn rebuild_block(
    hyp: &[u32],
    refs: &[u32],
    params: &SWParams,
    checkpoint: &[f64],
    block_lo: usize,
    rows: usize,
    dirs: &mut Vec<u8>,
) {
    let m = refs.len();
    dirs.clear();
    dirs.resize(rows * (m + 1), DIR_STOP);
    let mut prev = checkpoint.to_vec();
    let mut cur = vec![0.0f64; m + 1];
    for r in 0..rows {
        let i = block_lo + r;
        let a = hyp[i - 1];
        cur[0] = 0.0;
        let row_dirs = &mut dirs[r * (m + 1)..(r + 1) * (m + 1)];
        for j in 1..=m {
            let (score, dir) = cell(prev[j - 1], prev[j], cur[j - 1], a, refs[j - 1], params);
            cur[j] = score;
            row_dirs[j] = dir;
        }
        std::mem::swap(&mut prev, &mut cur);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sw(hyp: &[&str], refs: &[&str]) -> Vec<AlignmentOp> {
        smith_waterman(hyp, refs, &SWParams::default())
    }

    fn score_of(ops: &[AlignmentOp], params: &SWParams) -> f64 {
        ops.iter()
            .map(|op| match op {
                AlignmentOp::Match { .. } => params.match_score,
                AlignmentOp::Substitute { .. } => params.mismatch_penalty,
                _ => params.gap_penalty,
            })
            .sum()
    }

    #[test]
    fn identity_alignment() {
        let ops = sw(&["a", "b", "c"], &["a", "b", "c"]);
        assert_eq!(
            ops,
            vec![
                AlignmentOp::Match { hyp_idx: 0, ref_idx: 0 },
                AlignmentOp::Match { hyp_idx: 1, ref_idx: 1 },
                AlignmentOp::Match { hyp_idx: 2, ref_idx: 2 },
            ]
        );
    }

    #[test]
    fn local_island_in_noise() {
        // 4x2 DP table worked by hand: the "a b" island scores 4.
        let ops = sw(&["x", "a", "b", "y"], &["a", "b"]);
        assert_eq!(
            ops,
            vec![
                AlignmentOp::Match { hyp_idx: 1, ref_idx: 0 },
                AlignmentOp::Match { hyp_idx: 2, ref_idx: 1 },
            ]
        );
        assert_eq!(score_of(&ops, &SWParams::default()), 4.0);
    }

    #[test]
    fn disjoint_alphabets_align_to_nothing() {
        assert!(sw(&["a", "b"], &["x", "y"]).is_empty());
        assert!(sw(&[], &["x"]).is_empty());
        assert!(sw(&["x"], &[]).is_empty());
    }

    #[test]
    fn tolerates_interior_noise() {
        let hyp = ["a", "b", "QQ", "d", "e"];
        let refs = ["a", "b", "c", "d", "e"];
        let ops = sw(&hyp, &refs);
        assert_eq!(ops.iter().filter(|o| o.is_match()).count(), 4);
        assert_eq!(
            ops.iter().filter(|o| !o.is_match()).count(),
            1,
            "one substitution bridges the island: {ops:?}"
        );
    }

    #[test]
    fn indices_strictly_increase() {
        let hyp = ["u", "a", "b", "c", "v", "c", "d"];
        let refs = ["a", "b", "z", "c", "d"];
        let ops = sw(&hyp, &refs);
        let hyps: Vec<usize> = ops.iter().filter_map(|o| o.hyp_index()).collect();
        let refs_idx: Vec<usize> = ops.iter().filter_map(|o| o.ref_index()).collect();
        assert!(hyps.windows(2).all(|w| w[0] < w[1]), "{ops:?}");
        assert!(refs_idx.windows(2).all(|w| w[0] < w[1]), "{ops:?}");
    }

    #[test]
    fn checkpointed_traceback_matches_small_stride_expectations() {
        // Long enough to cross several checkpoint blocks when stride is
        // forced small by a wide reference; here we simply verify a long
        // self-alignment is all matches.
        let toks: Vec<String> = (0..5000).map(|i| format!("t{}", i % 97)).collect();
        let ops = smith_waterman(&toks, &toks, &SWParams::default());
        assert_eq!(ops.len(), 5000);
        assert!(ops.iter().all(AlignmentOp::is_match));
    }
}
