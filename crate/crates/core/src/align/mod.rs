//! Token-sequence alignment primitives.
//!
//! Three building blocks used by the extraction pipeline:
//! * [`smith_waterman`] — best-scoring local alignment between a decoded
//!   hypothesis and reference tokens,
//! * [`matching_blocks`] / [`bidirectional_valid_pairs`] — recursive
//!   longest-matching-block alignment with forward/backward agreement,
//! * [`transfer_timestamps`] — turning validated token pairs into padded,
//!   non-overlapping time spans.
//!
//! Tokens compare by surface only.

mod blocks;
mod sw;
mod transfer;

pub use blocks::{bidirectional_valid_pairs, matching_blocks};
pub use sw::smith_waterman;
pub use transfer::{transfer_timestamps, AlignedSpan};

use crate::error::{Error, Result};

/// One edit operation relating a hypothesis position to a reference position.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlignmentOp {
    Match { hyp_idx: usize, ref_idx: usize },
    Substitute { hyp_idx: usize, ref_idx: usize },
    Insert { hyp_idx: usize },
    Delete { ref_idx: usize },
}

impl AlignmentOp {
    pub fn hyp_index(&self) -> Option<usize> {
        match *self {
            AlignmentOp::Match { hyp_idx, .. }
            | AlignmentOp::Substitute { hyp_idx, .. }
            | AlignmentOp::Insert { hyp_idx } => Some(hyp_idx),
            AlignmentOp::Delete { .. } => None,
        }
    }

    pub fn ref_index(&self) -> Option<usize> {
        match *self {
            AlignmentOp::Match { ref_idx, .. }
            | AlignmentOp::Substitute { ref_idx, .. }
            | AlignmentOp::Delete { ref_idx } => Some(ref_idx),
            AlignmentOp::Insert { .. } => None,
        }
    }

    pub fn is_match(&self) -> bool {
        matches!(self, AlignmentOp::Match { .. })
    }

    /// Both-sided anchor (match or substitute) as a pair.
    pub fn anchor(&self) -> Option<(usize, usize)> {
        match *self {
            AlignmentOp::Match { hyp_idx, ref_idx }
            | AlignmentOp::Substitute { hyp_idx, ref_idx } => Some((hyp_idx, ref_idx)),
            _ => None,
        }
    }
}

/// Scoring parameters for local alignment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SWParams {
    pub match_score: f64,
    pub mismatch_penalty: f64,
    pub gap_penalty: f64,
}

impl SWParams {
    pub fn new(match_score: f64, mismatch_penalty: f64, gap_penalty: f64) -> Result<SWParams> {
        if !(match_score > 0.0) {
            return Err(Error::invalid("match_score must be positive"));
        }
        if !(mismatch_penalty <= 0.0) || !(gap_penalty <= 0.0) {
            return Err(Error::invalid("penalties must be non-positive"));
        }
        Ok(SWParams {
            match_score,
            mismatch_penalty,
            gap_penalty,
        })
    }
}

impl Default for SWParams {
    fn default() -> Self {
        SWParams {
            match_score: 2.0,
            mismatch_penalty: -1.0,
            gap_penalty: -1.0,
        }
    }
}

/// A run of identical tokens shared by two sequences:
/// `a[a_start + k] == b[b_start + k]` for all `k < length`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MatchingBlock {
    pub a_start: usize,
    pub b_start: usize,
    pub length: usize,
}

/// Interns token surfaces from both sequences into shared integer ids so the
/// DP inner loops compare ints rather than strings. Linear scan below a small
/// threshold: the island loop hits this with short sequences very often.
pub(crate) fn intern_pair<A: AsRef<str>, B: AsRef<str>>(a: &[A], b: &[B]) -> (Vec<u32>, Vec<u32>) {
    fn run<'s>(strs: impl Iterator<Item = &'s str>, total: usize) -> Vec<u32> {
        let mut ids = Vec::with_capacity(total);
        if total <= 32 {
            let mut seen: Vec<&str> = Vec::with_capacity(total);
            for s in strs {
                let id = match seen.iter().position(|t| *t == s) {
                    Some(i) => i as u32,
                    None => {
                        seen.push(s);
                        (seen.len() - 1) as u32
                    }
                };
                ids.push(id);
            }
        } else {
            let mut map: std::collections::HashMap<&str, u32> =
                std::collections::HashMap::with_capacity(total);
            for s in strs {
                let next = map.len() as u32;
                ids.push(*map.entry(s).or_insert(next));
            }
        }
        ids
    }
    let total = a.len() + b.len();
    let all = run(
        a.iter()
            .map(AsRef::as_ref)
            .chain(b.iter().map(AsRef::as_ref)),
        total,
    );
    let (a_ids, b_ids) = all.split_at(a.len());
    (a_ids.to_vec(), b_ids.to_vec())
}
