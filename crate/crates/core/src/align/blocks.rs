//! Recursive longest-matching-block alignment and bidirectional validation.
//!
//! `matching_blocks` reproduces the classic gestalt pattern-matching scheme:
//! find the longest common contiguous block (ties resolved toward the
//! smallest `a` start, then the smallest `b` start), then recurse into the
//! regions to its left and right. No junk heuristic: every token counts.

use std::collections::HashMap;

use super::{intern_pair, MatchingBlock};

/// All maximal matching blocks between `a` and `b`, ordered in both
/// sequences, with adjacent blocks merged.
pub fn matching_blocks<A: AsRef<str>, B: AsRef<str>>(a: &[A], b: &[B]) -> Vec<MatchingBlock> {
    let (a_ids, b_ids) = intern_pair(a, b);
    matching_blocks_ids(&a_ids, &b_ids)
}

pub(crate) fn matching_blocks_ids(a: &[u32], b: &[u32]) -> Vec<MatchingBlock> {
    let mut b2j: HashMap<u32, Vec<usize>> = HashMap::new();
    for (j, id) in b.iter().enumerate() {
        b2j.entry(*id).or_default().push(j);
    }

    let mut blocks = Vec::new();
    // Worklist of (alo, ahi, blo, bhi) regions still to be matched.
    let mut queue = vec![(0usize, a.len(), 0usize, b.len())];
    while let Some((alo, ahi, blo, bhi)) = queue.pop() {
        let (i, j, k) = find_longest_match(a, &b2j, alo, ahi, blo, bhi);
        if k == 0 {
            continue;
        }
        blocks.push(MatchingBlock {
            a_start: i,
            b_start: j,
            length: k,
        });
        if alo < i && blo < j {
            queue.push((alo, i, blo, j));
        }
        if i + k < ahi && j + k < bhi {
            queue.push((i + k, ahi, j + k, bhi));
        }
    }

    blocks.sort_by_key(|blk| (blk.a_start, blk.b_start));

    // Merge adjacent blocks that touch in both sequences.
    let mut merged: Vec<MatchingBlock> = Vec::with_capacity(blocks.len());
    for blk in blocks {
        match merged.last_mut() {
            Some(last)
                if last.a_start + last.length == blk.a_start
                    && last.b_start + last.length == blk.b_start =>
            {
                last.length += blk.length;
            }
            _ => merged.push(blk),
        }
    }
    merged
}

/// Longest block of `a[alo..ahi]` matching within `b[blo..bhi]`.
fn find_longest_match(
    a: &[u32],
    b2j: &HashMap<u32, Vec<usize>>,
    alo: usize,
    ahi: usize,
    blo: usize,
    bhi: usize,
) -> (usize, usize, usize) {
    let mut best_i = alo;
    let mut best_j = blo;
    let mut best_size = 0usize;
    // j2len maps a position j in b to the length of the longest block
    // ending at (i, j); rebuilt row by row.
    let mut j2len: HashMap<usize, usize> = HashMap::new();
    let mut new_j2len: HashMap<usize, usize> = HashMap::new();

    for i in alo..ahi {
        new_j2len.clear();
        if let Some(js) = b2j.get(&a[i]) {
            let start = js.partition_point(|&j| j < blo);
            for &j in &js[start..] {
                if j >= bhi {
                    break;
                }
                let k = if j > 0 {
                    j2len.get(&(j - 1)).copied().unwrap_or(0) + 1
                } else {
                    1
                };
                new_j2len.insert(j, k);
                if k > best_size {
                    best_i = i + 1 - k;
                    best_j = j + 1 - k;
                    best_size = k;
                }
            }
        }
        std::mem::swap(&mut j2len, &mut new_j2len);
    }

    (best_i, best_j, best_size)
}

/// Token pairs aligned identically by both the forward pass and the pass
/// over the reversed sequences. Ambiguous repeats disagree between the two
/// passes and are rejected. The result is strictly increasing in both
/// coordinates.
pub fn bidirectional_valid_pairs<A: AsRef<str>, B: AsRef<str>>(
    hyp: &[A],
    ref_tokens: &[B],
) -> Vec<(usize, usize)> {
    let (hyp_ids, ref_ids) = intern_pair(hyp, ref_tokens);
    bidirectional_valid_pairs_ids(&hyp_ids, &ref_ids)
}

pub(crate) fn bidirectional_valid_pairs_ids(hyp: &[u32], refs: &[u32]) -> Vec<(usize, usize)> {
    let forward = pair_set(&matching_blocks_ids(hyp, refs));

    let hyp_rev: Vec<u32> = hyp.iter().rev().copied().collect();
    let ref_rev: Vec<u32> = refs.iter().rev().copied().collect();
    let backward_raw = pair_set(&matching_blocks_ids(&hyp_rev, &ref_rev));
    let backward: std::collections::HashSet<(usize, usize)> = backward_raw
        .into_iter()
        .map(|(h, r)| (hyp.len() - 1 - h, refs.len() - 1 - r))
        .collect();

    let mut pairs: Vec<(usize, usize)> = forward
        .into_iter()
        .filter(|p| backward.contains(p))
        .collect();
    pairs.sort_unstable();
    debug_assert!(pairs
        .windows(2)
        .all(|w| w[0].0 < w[1].0 && w[0].1 < w[1].1));
    pairs
}

fn pair_set(blocks: &[MatchingBlock]) -> Vec<(usize, usize)> {
    blocks
        .iter()
        .flat_map(|blk| (0..blk.length).map(move |k| (blk.a_start + k, blk.b_start + k)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_sequences_give_one_block() {
        let toks = ["a", "b", "c", "b"];
        assert_eq!(
            matching_blocks(&toks, &toks),
            vec![MatchingBlock {
                a_start: 0,
                b_start: 0,
                length: 4
            }]
        );
    }

    #[test]
    fn two_blocks_across_an_edit() {
        let a = ["q", "a", "b", "x", "c", "d"];
        let b = ["a", "b", "y", "c", "d"];
        assert_eq!(
            matching_blocks(&a, &b),
            vec![
                MatchingBlock { a_start: 1, b_start: 0, length: 2 },
                MatchingBlock { a_start: 4, b_start: 3, length: 2 },
            ]
        );
    }

    #[test]
    fn disjoint_sequences_share_nothing() {
        let a = ["a", "b"];
        let b = ["x", "y"];
        assert!(matching_blocks(&a, &b).is_empty());
        assert!(bidirectional_valid_pairs(&a, &b).is_empty());
    }

    #[test]
    fn blocks_contain_equal_tokens() {
        let a = ["s", "a", "b", "a", "t", "c"];
        let b = ["a", "b", "a", "c", "u"];
        for blk in matching_blocks(&a, &b) {
            for k in 0..blk.length {
                assert_eq!(a[blk.a_start + k], b[blk.b_start + k]);
            }
        }
    }

    #[test]
    fn tie_breaks_prefer_earliest_block() {
        // Both "a b" occurrences in `b` are equally long; the earliest wins.
        let a = ["a", "b"];
        let b = ["a", "b", "z", "a", "b"];
        assert_eq!(
            matching_blocks(&a, &b)[0],
            MatchingBlock { a_start: 0, b_start: 0, length: 2 }
        );
    }

    #[test]
    fn identity_gives_full_diagonal() {
        let toks = ["x", "y", "z", "w"];
        let pairs = bidirectional_valid_pairs(&toks, &toks);
        assert_eq!(pairs, vec![(0, 0), (1, 1), (2, 2), (3, 3)]);
    }

    #[test]
    fn ambiguous_repeat_is_rejected() {
        // Forward matches the first "a", backward matches the last: the
        // intersection is empty, which is the point of the two passes.
        let pairs = bidirectional_valid_pairs(&["a"], &["a", "b", "a"]);
        assert!(pairs.is_empty());
    }

    #[test]
    fn unique_block_survives_both_directions() {
        let pairs = bidirectional_valid_pairs(&["a", "b"], &["x", "a", "b", "y"]);
        assert_eq!(pairs, vec![(0, 1), (1, 2)]);
    }

    #[test]
    fn reversal_symmetry() {
        let hyp = ["a", "b", "c", "a", "d", "e", "b"];
        let refs = ["z", "a", "b", "d", "e", "c", "b"];
        let pairs = bidirectional_valid_pairs(&hyp, &refs);
        let hyp_rev: Vec<&str> = hyp.iter().rev().copied().collect();
        let ref_rev: Vec<&str> = refs.iter().rev().copied().collect();
        let mut reversed: Vec<(usize, usize)> = bidirectional_valid_pairs(&hyp_rev, &ref_rev)
            .into_iter()
            .map(|(h, r)| (hyp.len() - 1 - h, refs.len() - 1 - r))
            .collect();
        reversed.sort_unstable();
        assert_eq!(pairs, reversed);
    }
}
