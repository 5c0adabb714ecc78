//! The iterative extraction workflow.
//!
//! Step 1 decodes the whole recording with a program-level biased LM and
//! harvests Smith-Waterman islands against the concatenated subtitles.
//! Step 2 re-decodes each island with a segment-level biased LM and keeps
//! the validated runs (decoded transcripts). Steps 3-5 then loop: re-align
//! decoded transcripts against the subtitle stream, re-clean whatever did
//! not align, and merge. A final Step 3 validates the last merged data, and
//! segments shorter than the configured minimum are dropped.
//!
//! One pipeline instance per program; instances share nothing.

use std::collections::BTreeSet;

use crate::align::{
    bidirectional_valid_pairs, smith_waterman, transfer_timestamps, AlignmentOp, SWParams,
};
use crate::corpusio::ProgramRecording;
use crate::decoder::{remonotonize, Decoder, HypToken};
use crate::error::{Error, Result};
use crate::ngram::build_biased_lm;
use crate::textnorm::{PosTag, Token};

/// Which pipeline stage produced a segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Provenance {
    /// 1..=5 per the workflow stage.
    pub step: u8,
    /// 0 for the initial pass, then the 3-4-5 loop index.
    pub iteration: u32,
}

/// An extracted (audio span, transcript) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub segment_id: String,
    pub program_id: String,
    pub start_ms: u64,
    pub end_ms: u64,
    pub tokens: Vec<Token>,
    /// Per-token time spans parallel to `tokens`. Decoder word times for
    /// decoded transcripts; anchor-transferred (and gap-interpolated) times
    /// for subtitle transcripts. Empty only on segments loaded back from
    /// manifests.
    pub token_times: Vec<(u64, u64)>,
    /// Covered positions in the program's concatenated subtitle stream,
    /// when the transcript is subtitle text.
    pub subtitle_range: Option<(usize, usize)>,
    pub provenance: Provenance,
}

impl Segment {
    pub fn duration_ms(&self) -> u64 {
        self.end_ms.saturating_sub(self.start_ms)
    }

    pub fn word_count(&self) -> usize {
        self.tokens.len()
    }
}

/// Knobs of the whole workflow.
#[derive(Debug, Clone)]
pub struct PipelineConfig {
    /// Step-2 outputs with fewer decoded words than this are dropped.
    pub min_words_step2: usize,
    /// Final segments shorter than this are dropped.
    pub min_final_ms: u64,
    /// How many times the 3-4-5 loop runs.
    pub max_repetitions: u32,
    pub sw_params: SWParams,
    /// Padding applied to span boundaries, clamped against neighbours.
    pub pad_ms: u64,
    /// Order of every biased LM.
    pub lm_order: usize,
    /// Step-1 decoding window and overlap.
    pub window_ms: u64,
    pub window_overlap_ms: u64,
    /// Step-1 islands with fewer matches than this stop the harvest.
    pub min_island_matches: usize,
    /// A Step-1 alignment splits into separate islands where more than this
    /// many consecutive non-match ops accumulate (long insert runs are
    /// unsubtitled audio; long delete runs are unspoken subtitle text).
    pub max_island_gap: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            min_words_step2: 10,
            min_final_ms: 1000,
            max_repetitions: 2,
            sw_params: SWParams::default(),
            pad_ms: 200,
            lm_order: 3,
            window_ms: 30_000,
            window_overlap_ms: 5_000,
            min_island_matches: 5,
            max_island_gap: 10,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.min_words_step2 < 1 {
            return Err(Error::invalid("min_words_step2 must be at least 1"));
        }
        if self.lm_order < 1 {
            return Err(Error::invalid("lm_order must be at least 1"));
        }
        if self.window_ms <= self.window_overlap_ms {
            return Err(Error::invalid("window_ms must exceed window_overlap_ms"));
        }
        if self.min_island_matches < 1 {
            return Err(Error::invalid("min_island_matches must be at least 1"));
        }
        if self.max_island_gap < 1 {
            return Err(Error::invalid("max_island_gap must be at least 1"));
        }
        Ok(())
    }
}

/// Per-program outcome numbers.
#[derive(Debug, Clone)]
pub struct ProgramStats {
    pub program_id: String,
    pub genre: String,
    pub duration_ms: u64,
    pub raw_words: usize,
    /// Decoded words surviving Step 2, before any iteration.
    pub step2_words: usize,
    pub extracted_words: usize,
    pub extracted_ms: u64,
    pub segment_count: usize,
    /// Distinct subtitle positions covered by the merged data after each
    /// Step 5 of the loop.
    pub merged_coverage: Vec<usize>,
}

/// Which cleanup stage [`clean_segment`] is running as.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CleanStep {
    /// Drops outputs below the word minimum.
    Two,
    /// Keeps everything.
    Four,
}

impl CleanStep {
    fn number(self) -> u8 {
        match self {
            CleanStep::Two => 2,
            CleanStep::Four => 4,
        }
    }
}

/// Step 1: decode the full recording in overlapping windows with a
/// program-level biased LM, then repeatedly take the best Smith-Waterman
/// island between the stitched hypothesis and the concatenated subtitles,
/// masking each island before re-aligning the remainder. Every island
/// becomes a segment carrying the covered subtitle tokens.
pub fn segment_long_recording(
    program: &ProgramRecording,
    dec: &dyn Decoder,
    cfg: &PipelineConfig,
) -> Result<Vec<Segment>> {
    cfg.validate()?;
    let subtitle = program.subtitle_tokens();
    if subtitle.is_empty() {
        return Err(Error::invalid(format!(
            "program {:?} has no usable cues",
            program.program_id
        )));
    }
    let lm = build_biased_lm(&program.cue_surfaces(), cfg.lm_order)?;
    let hyp = decode_windowed(program, dec, &lm, cfg)?;
    if hyp.is_empty() {
        return Ok(Vec::new());
    }
    let hyp_times: Vec<(u64, u64)> = hyp.iter().map(HypToken::span).collect();

    // Island harvest. Aligned tokens are masked with sentinels that can
    // never match, then the remainder is re-aligned. A cheap local
    // alignment happily bridges a long unmatched stretch (commercials, text
    // shown only on screen) when enough matches flank it, so each alignment
    // splits into islands at such stretches.
    let mut hyp_masked: Vec<String> = hyp.iter().map(|t| t.surface.clone()).collect();
    let mut ref_masked: Vec<String> = subtitle.iter().map(|t| t.surface().to_string()).collect();
    let mut islands: Vec<Vec<AlignmentOp>> = Vec::new();
    loop {
        let ops = smith_waterman(&hyp_masked, &ref_masked, &cfg.sw_params);
        if ops.is_empty() {
            break;
        }
        if ops.iter().filter(|o| o.is_match()).count() < cfg.min_island_matches {
            break;
        }
        for op in &ops {
            if let Some(h) = op.hyp_index() {
                hyp_masked[h] = format!("\u{1}h{h}");
            }
            if let Some(r) = op.ref_index() {
                ref_masked[r] = format!("\u{1}r{r}");
            }
        }
        islands.extend(split_alignment_into_islands(
            &ops,
            cfg.max_island_gap,
            cfg.min_island_matches,
        ));
    }

    islands.sort_by_key(|ops| ops.iter().filter_map(AlignmentOp::hyp_index).next());

    let mut segments = Vec::with_capacity(islands.len());
    for ops in &islands {
        let anchors: Vec<(usize, usize)> = ops.iter().filter_map(AlignmentOp::anchor).collect();
        let (h0, h1) = (anchors[0].0, anchors[anchors.len() - 1].0);
        let (r0, r1) = (anchors[0].1, anchors[anchors.len() - 1].1);
        let token_times = anchored_token_times(&anchors, &hyp_times, r0, r1 - r0 + 1);
        segments.push(Segment {
            segment_id: String::new(),
            program_id: program.program_id.clone(),
            start_ms: hyp_times[h0].0,
            end_ms: hyp_times[h1].1,
            tokens: subtitle[r0..=r1].to_vec(),
            token_times,
            subtitle_range: Some((r0, r1 + 1)),
            provenance: Provenance {
                step: 1,
                iteration: 0,
            },
        });
    }

    pad_and_clamp(&mut segments, cfg.pad_ms);
    for (idx, seg) in segments.iter_mut().enumerate() {
        seg.segment_id = format!("{}:s1:{idx}", program.program_id);
    }
    Ok(segments)
}

/// Steps 2 and 4: re-decode a segment's span with a biased LM trained only
/// on the segment's own tokens, keep the bidirectionally validated runs,
/// and emit them with decoded transcripts and per-word timing. Output spans
/// stay inside the input span. Step-2 invocations drop outputs below the
/// word minimum; Step-4 invocations keep everything.
pub fn clean_segment(
    seg: &Segment,
    dec: &dyn Decoder,
    cfg: &PipelineConfig,
    step: CleanStep,
    iteration: u32,
) -> Result<Vec<Segment>> {
    if seg.tokens.is_empty() {
        return Err(Error::invalid("clean_segment needs a non-empty transcript"));
    }
    let texts: Vec<Vec<&str>> = vec![seg.tokens.iter().map(Token::surface).collect()];
    let lm = match build_biased_lm(&texts, cfg.lm_order) {
        Ok(lm) => lm,
        Err(Error::InvalidArgument(msg)) => {
            // A transcript with a single distinct token cannot train a
            // usable biased LM; such a segment yields nothing.
            log::warn!("segment {}: {msg}; dropped", seg.segment_id);
            return Ok(Vec::new());
        }
        Err(e) => return Err(e),
    };
    let hyp = dec.decode(&seg.program_id, seg.start_ms, seg.end_ms, &lm)?;
    let hyp_surfaces: Vec<&str> = hyp.iter().map(|t| t.surface.as_str()).collect();
    let ref_surfaces: Vec<&str> = seg.tokens.iter().map(Token::surface).collect();
    let pairs = bidirectional_valid_pairs(&hyp_surfaces, &ref_surfaces);
    let hyp_times: Vec<(u64, u64)> = hyp.iter().map(HypToken::span).collect();
    let spans = transfer_timestamps(&pairs, &hyp_times, seg.tokens.len(), cfg.pad_ms)?;

    let mut out = Vec::new();
    for span in spans {
        let tokens: Vec<Token> = hyp[span.hyp_range.clone()]
            .iter()
            .map(|t| Token::new(&t.surface, PosTag::Other))
            .collect::<Result<_>>()?;
        if step == CleanStep::Two && tokens.len() < cfg.min_words_step2 {
            continue;
        }
        let start_ms = span.start_ms.max(seg.start_ms);
        let end_ms = span.end_ms.min(seg.end_ms).max(start_ms + 1);
        out.push(Segment {
            segment_id: format!(
                "{}:s{}i{iteration}:{start_ms}",
                seg.program_id,
                step.number()
            ),
            program_id: seg.program_id.clone(),
            start_ms,
            end_ms,
            tokens,
            token_times: hyp_times[span.hyp_range].to_vec(),
            subtitle_range: None,
            provenance: Provenance {
                step: step.number(),
                iteration,
            },
        });
    }
    Ok(out)
}

/// Step 3: align the concatenated decoded transcripts against the program's
/// subtitle stream. Validated runs come back as subtitle-token segments with
/// transferred timestamps; decoded tokens participating in no valid pair
/// come back as unaligned residue (input for Step 4).
pub fn realign_unmatched(
    decoded: &[Segment],
    program: &ProgramRecording,
    cfg: &PipelineConfig,
    iteration: u32,
) -> Result<(Vec<Segment>, Vec<Segment>)> {
    let subtitle = program.subtitle_tokens();
    let mut order: Vec<usize> = (0..decoded.len()).collect();
    order.sort_by_key(|&i| (decoded[i].start_ms, decoded[i].end_ms));

    // The concatenated stream, each token tagged with its source segment.
    struct StreamTok<'a> {
        surface: &'a str,
        time: (u64, u64),
        source: usize,
        token: &'a Token,
    }
    let mut stream: Vec<StreamTok> = Vec::new();
    for &si in &order {
        let seg = &decoded[si];
        if seg.token_times.len() != seg.tokens.len() {
            return Err(Error::invalid(format!(
                "segment {} lacks per-token timing",
                seg.segment_id
            )));
        }
        for (tok, &time) in seg.tokens.iter().zip(&seg.token_times) {
            stream.push(StreamTok {
                surface: tok.surface(),
                time,
                source: si,
                token: tok,
            });
        }
    }

    let stream_surfaces: Vec<&str> = stream.iter().map(|t| t.surface).collect();
    let ref_surfaces: Vec<&str> = subtitle.iter().map(Token::surface).collect();
    let pairs = bidirectional_valid_pairs(&stream_surfaces, &ref_surfaces);

    // Maximal runs: a gap in both coordinates at once ends a run, and runs
    // never bridge source segments (their audio is not contiguous).
    let mut runs: Vec<(usize, usize)> = Vec::new();
    for (idx, &(h, r)) in pairs.iter().enumerate() {
        let split = match runs.last() {
            Some(&(_, last)) => {
                let (ph, pr) = pairs[last];
                (h > ph + 1 && r > pr + 1) || stream[h].source != stream[ph].source
            }
            None => true,
        };
        if split {
            runs.push((idx, idx));
        } else {
            runs.last_mut().unwrap().1 = idx;
        }
    }

    let stream_times: Vec<(u64, u64)> = stream.iter().map(|t| t.time).collect();
    let mut aligned: Vec<Segment> = Vec::with_capacity(runs.len());
    for &(first, last) in &runs {
        let run_pairs = &pairs[first..=last];
        let (h0, r0) = run_pairs[0];
        let (h1, r1) = run_pairs[run_pairs.len() - 1];
        let token_times = anchored_token_times(run_pairs, &stream_times, r0, r1 - r0 + 1);
        aligned.push(Segment {
            segment_id: String::new(),
            program_id: program.program_id.clone(),
            start_ms: stream_times[h0].0,
            end_ms: stream_times[h1].1,
            tokens: subtitle[r0..=r1].to_vec(),
            token_times,
            subtitle_range: Some((r0, r1 + 1)),
            provenance: Provenance {
                step: 3,
                iteration,
            },
        });
    }
    pad_and_clamp(&mut aligned, cfg.pad_ms);
    for (idx, seg) in aligned.iter_mut().enumerate() {
        seg.segment_id = format!("{}:s3i{iteration}:{idx}", program.program_id);
    }

    // Residue: maximal runs of stream tokens in no valid pair, kept with
    // their decoded timing.
    let mut in_pair = vec![false; stream.len()];
    for &(h, _) in &pairs {
        in_pair[h] = true;
    }
    let mut unaligned: Vec<Segment> = Vec::new();
    let mut open: Option<(usize, usize)> = None;
    for idx in 0..=stream.len() {
        let continues = idx < stream.len()
            && !in_pair[idx]
            && match open {
                Some((_, last)) => stream[idx].source == stream[last].source,
                None => true,
            };
        if continues {
            open = Some((open.map(|(f, _)| f).unwrap_or(idx), idx));
            continue;
        }
        if let Some((f, l)) = open.take() {
            let start_ms = stream[f].time.0;
            let end_ms = stream[l].time.1.max(start_ms + 1);
            unaligned.push(Segment {
                segment_id: format!(
                    "{}:s3i{iteration}:residue{}",
                    program.program_id,
                    unaligned.len()
                ),
                program_id: program.program_id.clone(),
                start_ms,
                end_ms,
                tokens: stream[f..=l].iter().map(|t| t.token.clone()).collect(),
                token_times: stream[f..=l].iter().map(|t| t.time).collect(),
                subtitle_range: None,
                provenance: Provenance {
                    step: 3,
                    iteration,
                },
            });
        }
        if idx < stream.len() && !in_pair[idx] {
            open = Some((idx, idx));
        }
    }

    Ok((aligned, unaligned))
}

/// Step 5: union of two segment lists with overlaps resolved by keeping the
/// longer segment (ties prefer the Step-3 aligned one). The result is
/// non-overlapping and sorted by start time.
pub fn merge_segments(a: Vec<Segment>, b: Vec<Segment>) -> Vec<Segment> {
    let mut candidates: Vec<Segment> = a.into_iter().chain(b).collect();
    candidates.sort_by(|x, y| {
        y.duration_ms()
            .cmp(&x.duration_ms())
            .then_with(|| (x.provenance.step != 3).cmp(&(y.provenance.step != 3)))
            .then_with(|| x.start_ms.cmp(&y.start_ms))
            .then_with(|| x.end_ms.cmp(&y.end_ms))
            .then_with(|| x.segment_id.cmp(&y.segment_id))
    });

    let mut intervals: Vec<(u64, u64)> = Vec::new();
    let mut accepted: Vec<Segment> = Vec::new();
    for seg in candidates {
        let idx = intervals.partition_point(|iv| iv.1 <= seg.start_ms);
        if idx < intervals.len() && intervals[idx].0 < seg.end_ms {
            continue; // overlaps a longer (or preferred) survivor
        }
        intervals.insert(idx, (seg.start_ms, seg.end_ms));
        accepted.push(seg);
    }
    accepted.sort_by_key(|s| (s.start_ms, s.end_ms));
    accepted
}

/// Steps 1 and 2 only: the non-iterative baseline.
pub fn single_pass(
    program: &ProgramRecording,
    dec: &dyn Decoder,
    cfg: &PipelineConfig,
) -> Result<Vec<Segment>> {
    let mut out = Vec::new();
    for island in segment_long_recording(program, dec, cfg)? {
        out.extend(clean_segment(&island, dec, cfg, CleanStep::Two, 0)?);
    }
    Ok(out)
}

/// The full workflow: Step 1, Step 2, `max_repetitions` rounds of 3-4-5,
/// one final validating Step 3 (its residue is discarded), then the final
/// duration filter. Returns the program's segments (subtitle transcripts)
/// and stats.
pub fn run_pipeline(
    program: &ProgramRecording,
    dec: &dyn Decoder,
    cfg: &PipelineConfig,
) -> Result<(Vec<Segment>, ProgramStats)> {
    cfg.validate()?;
    let raw_words = program.subtitle_word_count();

    let mut merged = single_pass(program, dec, cfg)?;
    let step2_words: usize = merged.iter().map(Segment::word_count).sum();

    let mut merged_coverage = Vec::new();
    for iteration in 1..=cfg.max_repetitions {
        let (aligned, residue) = realign_unmatched(&merged, program, cfg, iteration)?;
        let mut cleaned = Vec::new();
        for seg in &residue {
            cleaned.extend(clean_segment(seg, dec, cfg, CleanStep::Four, iteration)?);
        }
        merged = merge_segments(aligned, cleaned);
        merged_coverage.push(subtitle_coverage(&merged));
    }

    let (validated, _residue) = realign_unmatched(&merged, program, cfg, cfg.max_repetitions + 1)?;
    let mut finals: Vec<Segment> = validated
        .into_iter()
        .filter(|s| s.duration_ms() >= cfg.min_final_ms)
        .collect();
    finals.sort_by_key(|s| (s.start_ms, s.end_ms));
    for seg in &mut finals {
        seg.segment_id = format!("{}-{:010}", seg.program_id, seg.start_ms);
    }
    debug_assert!(finals.windows(2).all(|w| w[0].end_ms <= w[1].start_ms));

    let stats = ProgramStats {
        program_id: program.program_id.clone(),
        genre: program.primary_genre().to_string(),
        duration_ms: program.audio.duration_ms,
        raw_words,
        step2_words,
        extracted_words: finals.iter().map(Segment::word_count).sum(),
        extracted_ms: finals.iter().map(Segment::duration_ms).sum(),
        segment_count: finals.len(),
        merged_coverage,
    };
    Ok((finals, stats))
}

/// Distinct subtitle positions covered by the aligned part of a dataset.
fn subtitle_coverage(segments: &[Segment]) -> usize {
    let mut covered: BTreeSet<usize> = BTreeSet::new();
    for seg in segments {
        if let Some((lo, hi)) = seg.subtitle_range {
            covered.extend(lo..hi);
        }
    }
    covered.len()
}

/// Decodes the recording in overlapping windows and stitches the results:
/// each window keeps the tokens starting inside its responsibility region
/// (the overlap is split at its midpoint).
fn decode_windowed(
    program: &ProgramRecording,
    dec: &dyn Decoder,
    lm: &crate::ngram::NGramModel,
    cfg: &PipelineConfig,
) -> Result<Vec<HypToken>> {
    let duration = program.audio.duration_ms;
    if duration == 0 {
        return Ok(Vec::new());
    }
    let step = cfg.window_ms - cfg.window_overlap_ms;
    let half_overlap = cfg.window_overlap_ms / 2;
    let mut tokens: Vec<HypToken> = Vec::new();
    let mut window_start = 0u64;
    loop {
        let window_end = (window_start + cfg.window_ms).min(duration);
        let mut chunk = dec.decode(&program.program_id, window_start, window_end, lm)?;
        let resp_lo = if window_start == 0 {
            0
        } else {
            window_start + half_overlap
        };
        let resp_hi = if window_end >= duration {
            u64::MAX
        } else {
            window_start + step + half_overlap
        };
        chunk.retain(|t| t.start_ms >= resp_lo && t.start_ms < resp_hi);
        tokens.extend(chunk);
        if window_end >= duration {
            break;
        }
        window_start += step;
    }
    remonotonize(&mut tokens);
    Ok(tokens)
}

/// Splits one Smith-Waterman result into islands: groups of match ops with
/// at most `max_gap` non-match ops between consecutive matches. Each island
/// is trimmed to start and end on a match; groups with fewer than
/// `min_matches` matches are dropped.
fn split_alignment_into_islands(
    ops: &[AlignmentOp],
    max_gap: usize,
    min_matches: usize,
) -> Vec<Vec<AlignmentOp>> {
    let match_pos: Vec<usize> = ops
        .iter()
        .enumerate()
        .filter(|(_, op)| op.is_match())
        .map(|(i, _)| i)
        .collect();

    let mut islands = Vec::new();
    let mut group_start = 0usize; // index into match_pos
    for i in 0..match_pos.len() {
        let last_in_group = i + 1 == match_pos.len()
            || match_pos[i + 1] - match_pos[i] - 1 > max_gap;
        if last_in_group {
            let matches = i - group_start + 1;
            if matches >= min_matches {
                islands.push(ops[match_pos[group_start]..=match_pos[i]].to_vec());
            }
            group_start = i + 1;
        }
    }
    islands
}

/// Per-reference-token times from anchor pairs. Anchored positions take the
/// paired hypothesis token's span; positions between two anchors share the
/// gap between the anchor times evenly. The first and last positions of the
/// range are always anchored.
fn anchored_token_times(
    anchors: &[(usize, usize)],
    hyp_times: &[(u64, u64)],
    ref_start: usize,
    ref_len: usize,
) -> Vec<(u64, u64)> {
    debug_assert!(!anchors.is_empty());
    debug_assert_eq!(anchors[0].1, ref_start);
    debug_assert_eq!(anchors[anchors.len() - 1].1, ref_start + ref_len - 1);

    let mut out = vec![(0u64, 0u64); ref_len];
    out[0] = hyp_times[anchors[0].0];
    for pair in anchors.windows(2) {
        let (ha, ra) = pair[0];
        let (hb, rb) = pair[1];
        out[rb - ref_start] = hyp_times[hb];
        let extras = rb - ra - 1;
        if extras == 0 {
            continue;
        }
        let gap_start = hyp_times[ha].1;
        let gap_end = hyp_times[hb].0.max(gap_start);
        let slot = (gap_end - gap_start) / extras as u64;
        for k in 0..extras {
            let s = gap_start + slot * k as u64;
            let e = if k + 1 == extras {
                gap_end
            } else {
                gap_start + slot * (k as u64 + 1)
            };
            out[ra - ref_start + 1 + k] = (s, e);
        }
    }
    out
}

/// Applies `pad_ms` to raw segment boundaries, clamping at zero and at the
/// midpoint of the gap between neighbours so segments never overlap.
fn pad_and_clamp(segments: &mut [Segment], pad_ms: u64) {
    let raw: Vec<(u64, u64)> = segments.iter().map(|s| (s.start_ms, s.end_ms)).collect();
    for seg in segments.iter_mut() {
        seg.start_ms = seg.start_ms.saturating_sub(pad_ms);
        seg.end_ms += pad_ms;
    }
    for i in 1..segments.len() {
        if segments[i].start_ms < segments[i - 1].end_ms {
            let meet = raw[i - 1].1 + (raw[i].0.saturating_sub(raw[i - 1].1)) / 2;
            segments[i - 1].end_ms = segments[i - 1].end_ms.min(meet);
            segments[i].start_ms = segments[i].start_ms.max(meet);
        }
    }
}
