//! Turning validated token pairs into padded, non-overlapping time spans.

use std::ops::Range;

use crate::error::{Error, Result};

/// A maximal aligned run with hypothesis-derived timing.
///
/// `hyp_range` covers every hypothesis token from the run's first valid pair
/// to its last, and `ref_range` likewise covers the reference side, including
/// reference tokens sitting strictly between the run's valid pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlignedSpan {
    pub start_ms: u64,
    pub end_ms: u64,
    pub hyp_range: Range<usize>,
    pub ref_range: Range<usize>,
}

/// Groups valid pairs into maximal runs and assigns padded time spans.
///
/// A run ends where the pair sequence jumps in both coordinates at once
/// (a substituted or corrupted region); a jump on only one side keeps the
/// run going, so reference-only extras stay inside the run and enter
/// `ref_range`. Span boundaries are the run's first hypothesis start minus
/// `pad_ms` and last hypothesis end plus `pad_ms`, clamped at zero and at
/// the midpoint between neighbouring runs so spans never overlap.
pub fn transfer_timestamps(
    pairs: &[(usize, usize)],
    hyp_times: &[(u64, u64)],
    ref_len: usize,
    pad_ms: u64,
) -> Result<Vec<AlignedSpan>> {
    for w in pairs.windows(2) {
        if w[1].0 <= w[0].0 || w[1].1 <= w[0].1 {
            return Err(Error::invalid(format!(
                "pairs must be strictly increasing in both coordinates: {:?} then {:?}",
                w[0], w[1]
            )));
        }
    }
    if let Some(&(h, r)) = pairs.last() {
        if h >= hyp_times.len() || r >= ref_len {
            return Err(Error::invalid(format!(
                "pair ({h}, {r}) out of range for {} hyp / {ref_len} ref tokens",
                hyp_times.len()
            )));
        }
    }

    let mut runs: Vec<(usize, usize)> = Vec::new(); // (first, last) pair indices
    for (idx, pair) in pairs.iter().enumerate() {
        match runs.last_mut() {
            Some((_, last)) => {
                let prev = pairs[*last];
                let hyp_gap = pair.0 > prev.0 + 1;
                let ref_gap = pair.1 > prev.1 + 1;
                if hyp_gap && ref_gap {
                    runs.push((idx, idx));
                } else {
                    *last = idx;
                }
            }
            None => runs.push((idx, idx)),
        }
    }

    let mut spans: Vec<AlignedSpan> = runs
        .iter()
        .map(|&(first, last)| {
            let (h0, r0) = pairs[first];
            let (h1, r1) = pairs[last];
            AlignedSpan {
                start_ms: hyp_times[h0].0.saturating_sub(pad_ms),
                end_ms: hyp_times[h1].1 + pad_ms,
                hyp_range: h0..h1 + 1,
                ref_range: r0..r1 + 1,
            }
        })
        .collect();

    // Clamp padding at the midpoint of the gap between adjacent runs.
    for i in 1..spans.len() {
        let prev_raw_end = hyp_times[spans[i - 1].hyp_range.end - 1].1;
        let next_raw_start = hyp_times[spans[i].hyp_range.start].0;
        if spans[i].start_ms < spans[i - 1].end_ms {
            let meet = prev_raw_end + (next_raw_start.saturating_sub(prev_raw_end)) / 2;
            spans[i - 1].end_ms = spans[i - 1].end_ms.min(meet);
            spans[i].start_ms = spans[i].start_ms.max(meet);
        }
    }

    debug_assert!(spans.windows(2).all(|w| w[0].end_ms <= w[1].start_ms));
    Ok(spans)
}
