//! ASR decoder contract and a deterministic simulated decoder.
//!
//! The pipeline only ever talks to [`Decoder`]; a production deployment
//! would back it with a real recognizer. [`SimulatedDecoder`] replays a
//! [`GroundTruthTrack`] through a seeded error channel so every pipeline
//! stage is testable without acoustic models, bit-identically across runs.

use std::collections::HashMap;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::ngram::NGramModel;

/// One decoded word with program-relative timestamps.
#[derive(Debug, Clone, PartialEq)]
pub struct HypToken {
    pub surface: String,
    pub start_ms: u64,
    pub end_ms: u64,
    pub confidence: Option<f64>,
}

impl HypToken {
    pub fn new(surface: impl Into<String>, start_ms: u64, end_ms: u64) -> Result<HypToken> {
        if end_ms <= start_ms {
            return Err(Error::invalid(format!(
                "hyp token must end after it starts ({start_ms}..{end_ms})"
            )));
        }
        Ok(HypToken {
            surface: surface.into(),
            start_ms,
            end_ms,
            confidence: None,
        })
    }

    pub fn span(&self) -> (u64, u64) {
        (self.start_ms, self.end_ms)
    }
}

/// One spoken word of the synthetic ground truth. `subtitled: false` marks
/// speech that has no subtitle counterpart (commercials and the like).
#[derive(Debug, Clone, PartialEq)]
pub struct TrackWord {
    pub surface: String,
    pub start_ms: u64,
    pub end_ms: u64,
    pub subtitled: bool,
}

/// The full spoken content of one program: sorted, non-overlapping words
/// with gaps allowed for silence and music.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GroundTruthTrack {
    words: Vec<TrackWord>,
}

impl GroundTruthTrack {
    pub fn new(words: Vec<TrackWord>) -> Result<GroundTruthTrack> {
        for w in &words {
            if w.end_ms <= w.start_ms {
                return Err(Error::invalid(format!(
                    "track word {:?} must end after it starts",
                    w.surface
                )));
            }
        }
        for pair in words.windows(2) {
            if pair[1].start_ms < pair[0].end_ms {
                return Err(Error::invalid(format!(
                    "track words {:?} and {:?} overlap",
                    pair[0].surface, pair[1].surface
                )));
            }
        }
        Ok(GroundTruthTrack { words })
    }

    pub fn words(&self) -> &[TrackWord] {
        &self.words
    }

    pub fn duration_ms(&self) -> u64 {
        self.words.last().map(|w| w.end_ms).unwrap_or(0)
    }

    /// Maximal regions of consecutive unsubtitled words.
    pub fn unsubtitled_regions(&self) -> Vec<(u64, u64)> {
        let mut regions: Vec<(u64, u64)> = Vec::new();
        let mut open: Option<(u64, u64)> = None;
        for w in &self.words {
            if w.subtitled {
                if let Some(r) = open.take() {
                    regions.push(r);
                }
            } else {
                open = match open {
                    Some((s, _)) => Some((s, w.end_ms)),
                    None => Some((w.start_ms, w.end_ms)),
                };
            }
        }
        if let Some(r) = open {
            regions.push(r);
        }
        regions
    }

    /// Serialization: one word per line,
    /// `surface<TAB>start_ms<TAB>end_ms<TAB>0|1` (subtitled flag), UTF-8.
    pub fn write_to(&self, out: &mut impl Write) -> Result<()> {
        for w in &self.words {
            writeln!(
                out,
                "{}\t{}\t{}\t{}",
                w.surface,
                w.start_ms,
                w.end_ms,
                if w.subtitled { 1 } else { 0 }
            )?;
        }
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut file = BufWriter::new(std::fs::File::create(path.as_ref())?);
        self.write_to(&mut file)
    }

    pub fn read_from(reader: impl BufRead, name: &Path) -> Result<GroundTruthTrack> {
        let mut words = Vec::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 4 {
                return Err(Error::parse(name, idx + 1, "expected 4 tab-separated fields"));
            }
            let start_ms: u64 = fields[1]
                .parse()
                .map_err(|_| Error::parse(name, idx + 1, "bad start_ms"))?;
            let end_ms: u64 = fields[2]
                .parse()
                .map_err(|_| Error::parse(name, idx + 1, "bad end_ms"))?;
            let subtitled = match fields[3] {
                "0" => false,
                "1" => true,
                other => {
                    return Err(Error::parse(
                        name,
                        idx + 1,
                        format!("bad subtitled flag {other:?}"),
                    ));
                }
            };
            words.push(TrackWord {
                surface: fields[0].to_string(),
                start_ms,
                end_ms,
                subtitled,
            });
        }
        GroundTruthTrack::new(words)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<GroundTruthTrack> {
        let file = BufReader::new(std::fs::File::open(path.as_ref())?);
        GroundTruthTrack::read_from(file, path.as_ref())
    }
}

/// Error channel of the simulated decoder. Rates are per-word event
/// probabilities and must sum below one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorConfig {
    pub sub_rate: f64,
    pub del_rate: f64,
    pub ins_rate: f64,
    pub jitter_ms: u64,
    pub seed: u64,
}

impl ErrorConfig {
    pub fn new(
        sub_rate: f64,
        del_rate: f64,
        ins_rate: f64,
        jitter_ms: u64,
        seed: u64,
    ) -> Result<ErrorConfig> {
        for (name, rate) in [("sub", sub_rate), ("del", del_rate), ("ins", ins_rate)] {
            if !(0.0..=1.0).contains(&rate) {
                return Err(Error::invalid(format!("{name}_rate {rate} not in [0, 1]")));
            }
        }
        if sub_rate + del_rate + ins_rate >= 1.0 {
            return Err(Error::invalid("error rates must sum below 1"));
        }
        Ok(ErrorConfig {
            sub_rate,
            del_rate,
            ins_rate,
            jitter_ms,
            seed,
        })
    }

    pub fn noise_free(seed: u64) -> ErrorConfig {
        ErrorConfig {
            sub_rate: 0.0,
            del_rate: 0.0,
            ins_rate: 0.0,
            jitter_ms: 0,
            seed,
        }
    }
}

impl Default for ErrorConfig {
    fn default() -> Self {
        ErrorConfig::noise_free(0)
    }
}

/// The decoding contract used by every pipeline step.
///
/// Implementations return tokens fully inside the span, sorted and
/// non-overlapping, with timestamps relative to the program origin. They
/// must be safe to call concurrently for different spans.
pub trait Decoder: Sync {
    fn decode(
        &self,
        program_id: &str,
        start_ms: u64,
        end_ms: u64,
        lm: &NGramModel,
    ) -> Result<Vec<HypToken>>;
}

pub(crate) fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

fn span_rng(seed: u64, program_id: &str, start_ms: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[0..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&fnv1a64(program_id.as_bytes()).to_le_bytes());
    key[16..24].copy_from_slice(&start_ms.to_le_bytes());
    key[24..32].copy_from_slice(b"spanstrm");
    ChaCha8Rng::from_seed(key)
}

/// Replays the track words inside the span through the error channel:
/// each word is independently deleted, substituted with an in-vocabulary
/// word of the biased LM, kept with an extra insertion after it, or kept
/// verbatim. Timestamps get uniform jitter in ±`jitter_ms` and are then
/// re-monotonized. The stream is a pure function of
/// `(cfg.seed, program_id, start_ms)`, so identical calls are bit-identical.
pub fn simulated_decode(
    track: &GroundTruthTrack,
    program_id: &str,
    start_ms: u64,
    end_ms: u64,
    cfg: &ErrorConfig,
    lm: &NGramModel,
) -> Vec<HypToken> {
    let mut rng = span_rng(cfg.seed, program_id, start_ms);
    let vocab = lm.content_vocab();
    let mut out: Vec<HypToken> = Vec::new();

    for word in track.words() {
        if word.start_ms < start_ms || word.end_ms > end_ms {
            continue;
        }
        let draw: f64 = rng.random();
        let make = |surface: &str, s: u64, e: u64| HypToken {
            surface: surface.to_string(),
            start_ms: s,
            end_ms: e,
            confidence: None,
        };
        if draw < cfg.del_rate {
            continue;
        } else if draw < cfg.del_rate + cfg.sub_rate {
            let substitute = pick_other(&vocab, &word.surface, &mut rng);
            out.push(make(&substitute, word.start_ms, word.end_ms));
        } else if draw < cfg.del_rate + cfg.sub_rate + cfg.ins_rate {
            out.push(make(&word.surface, word.start_ms, word.end_ms));
            let inserted = pick_any(&vocab, &mut rng);
            out.push(make(&inserted, word.end_ms, word.end_ms + 150));
        } else {
            out.push(make(&word.surface, word.start_ms, word.end_ms));
        }
    }

    if cfg.jitter_ms > 0 {
        let j = cfg.jitter_ms as i64;
        for token in &mut out {
            let ds: i64 = rng.random_range(-j..=j);
            let de: i64 = rng.random_range(-j..=j);
            token.start_ms = token.start_ms.saturating_add_signed(ds);
            token.end_ms = token.end_ms.saturating_add_signed(de);
        }
    }

    remonotonize(&mut out);
    out
}

/// In-vocabulary substitution that differs from the original word.
fn pick_other(vocab: &[&str], original: &str, rng: &mut ChaCha8Rng) -> String {
    let candidates: Vec<&&str> = vocab.iter().filter(|w| **w != original).collect();
    if candidates.is_empty() {
        let mut s = original.to_string();
        s.push('※');
        return s;
    }
    candidates[rng.random_range(0..candidates.len())].to_string()
}

fn pick_any(vocab: &[&str], rng: &mut ChaCha8Rng) -> String {
    if vocab.is_empty() {
        return "※".to_string();
    }
    vocab[rng.random_range(0..vocab.len())].to_string()
}

/// Forces sortedness and non-overlap after jitter, preserving order.
pub(crate) fn remonotonize(tokens: &mut [HypToken]) {
    let mut prev_end = 0u64;
    for t in tokens {
        if t.start_ms < prev_end {
            t.start_ms = prev_end;
        }
        if t.end_ms <= t.start_ms {
            t.end_ms = t.start_ms + 1;
        }
        prev_end = t.end_ms;
    }
}

/// A [`Decoder`] backed by ground-truth tracks, one per program.
pub struct SimulatedDecoder {
    programs: HashMap<String, (GroundTruthTrack, u64)>,
    cfg: ErrorConfig,
}

impl SimulatedDecoder {
    pub fn new(cfg: ErrorConfig) -> SimulatedDecoder {
        SimulatedDecoder {
            programs: HashMap::new(),
            cfg,
        }
    }

    pub fn insert_program(
        &mut self,
        program_id: impl Into<String>,
        track: GroundTruthTrack,
        duration_ms: u64,
    ) {
        self.programs
            .insert(program_id.into(), (track, duration_ms));
    }

    pub fn config(&self) -> &ErrorConfig {
        &self.cfg
    }

    pub fn track(&self, program_id: &str) -> Option<&GroundTruthTrack> {
        self.programs.get(program_id).map(|(t, _)| t)
    }
}

impl Decoder for SimulatedDecoder {
    fn decode(
        &self,
        program_id: &str,
        start_ms: u64,
        end_ms: u64,
        lm: &NGramModel,
    ) -> Result<Vec<HypToken>> {
        let (track, duration) = self
            .programs
            .get(program_id)
            .ok_or_else(|| Error::NotFound(format!("program {program_id:?}")))?;
        if start_ms > end_ms {
            return Err(Error::invalid(format!(
                "span {start_ms}..{end_ms} is reversed"
            )));
        }
        if end_ms > *duration {
            return Err(Error::invalid(format!(
                "span {start_ms}..{end_ms} exceeds program duration {duration}"
            )));
        }
        if start_ms == end_ms {
            return Ok(Vec::new());
        }
        Ok(simulated_decode(
            track, program_id, start_ms, end_ms, &self.cfg, lm,
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ngram::build_biased_lm;

    fn test_lm(words: &[&str]) -> NGramModel {
        let corpus: Vec<Vec<String>> = vec![words.iter().map(|w| w.to_string()).collect()];
        build_biased_lm(&corpus, 2).unwrap()
    }

    fn uniform_track(n: usize, subtitled: bool) -> GroundTruthTrack {
        let words = (0..n)
            .map(|i| TrackWord {
                surface: format!("w{}", i % 37),
                start_ms: i as u64 * 400,
                end_ms: i as u64 * 400 + 350,
                subtitled,
            })
            .collect();
        GroundTruthTrack::new(words).unwrap()
    }

    #[test]
    fn noise_free_decode_is_identity() {
        let track = uniform_track(50, true);
        let lm = test_lm(&["w0", "w1", "w2"]);
        let cfg = ErrorConfig::noise_free(1);
        let hyp = simulated_decode(&track, "p", 0, track.duration_ms(), &cfg, &lm);
        assert_eq!(hyp.len(), 50);
        for (h, w) in hyp.iter().zip(track.words()) {
            assert_eq!(h.surface, w.surface);
            assert_eq!((h.start_ms, h.end_ms), (w.start_ms, w.end_ms));
        }
    }

    #[test]
    fn total_deletion_gives_empty_output() {
        let track = uniform_track(30, true);
        let lm = test_lm(&["w0"]);
        let cfg = ErrorConfig::new(0.0, 1.0, 0.0, 0, 7);
        // del_rate = 1 makes the rates sum to 1, which new() rejects; build
        // the config directly for this boundary case.
        assert!(cfg.is_err());
        let cfg = ErrorConfig {
            sub_rate: 0.0,
            del_rate: 1.0,
            ins_rate: 0.0,
            jitter_ms: 0,
            seed: 7,
        };
        let hyp = simulated_decode(&track, "p", 0, track.duration_ms(), &cfg, &lm);
        assert!(hyp.is_empty());
    }

    #[test]
    fn substitution_count_within_binomial_bounds() {
        let track = uniform_track(1000, true);
        let lm = test_lm(&["aka", "ao", "kiiro", "midori"]);
        let cfg = ErrorConfig::new(0.1, 0.0, 0.0, 0, 9001).unwrap();
        let hyp = simulated_decode(&track, "p", 0, track.duration_ms(), &cfg, &lm);
        assert_eq!(hyp.len(), 1000);
        let substituted = hyp
            .iter()
            .zip(track.words())
            .filter(|(h, w)| h.surface != w.surface)
            .count();
        // Binomial(1000, 0.1): mean 100, 3 sigma ≈ 28.5.
        assert!(
            (60..=140).contains(&substituted),
            "{substituted} substitutions"
        );
        // Substitutions come from the biased LM's vocabulary.
        for (h, w) in hyp.iter().zip(track.words()) {
            if h.surface != w.surface {
                assert!(["aka", "ao", "kiiro", "midori"].contains(&h.surface.as_str()));
            }
        }
    }

    #[test]
    fn identical_inputs_are_bit_identical() {
        let track = uniform_track(200, true);
        let lm = test_lm(&["w0", "w1", "w5"]);
        let cfg = ErrorConfig::new(0.05, 0.05, 0.05, 120, 33).unwrap();
        let a = simulated_decode(&track, "prog-1", 0, track.duration_ms(), &cfg, &lm);
        let b = simulated_decode(&track, "prog-1", 0, track.duration_ms(), &cfg, &lm);
        assert_eq!(a, b);
        let c = simulated_decode(&track, "prog-2", 0, track.duration_ms(), &cfg, &lm);
        assert_ne!(a, c, "different programs draw different streams");
    }

    #[test]
    fn jittered_output_stays_monotonic() {
        let track = uniform_track(300, true);
        let lm = test_lm(&["w0", "w1"]);
        let cfg = ErrorConfig::new(0.02, 0.02, 0.02, 500, 5).unwrap();
        let hyp = simulated_decode(&track, "p", 0, track.duration_ms(), &cfg, &lm);
        for pair in hyp.windows(2) {
            assert!(pair[0].end_ms <= pair[1].start_ms);
        }
        for t in &hyp {
            assert!(t.end_ms > t.start_ms);
        }
    }

    #[test]
    fn decoder_trait_validates_spans() {
        let mut dec = SimulatedDecoder::new(ErrorConfig::noise_free(0));
        let track = uniform_track(10, true);
        let duration = track.duration_ms();
        dec.insert_program("p1", track, duration);
        let lm = test_lm(&["w0"]);

        assert!(matches!(
            dec.decode("nope", 0, 100, &lm),
            Err(Error::NotFound(_))
        ));
        assert!(dec.decode("p1", 0, duration + 1, &lm).is_err());
        assert!(dec.decode("p1", 500, 100, &lm).is_err());
        assert!(dec.decode("p1", 100, 100, &lm).unwrap().is_empty());
    }

    #[test]
    fn expected_wer_matches_configured_rates() {
        let track = uniform_track(10_000, true);
        let lm = test_lm(&["e0", "e1", "e2", "e3", "e4", "e5"]);
        let cfg = ErrorConfig::new(0.05, 0.05, 0.05, 0, 271828).unwrap();
        let hyp = simulated_decode(&track, "p", 0, track.duration_ms(), &cfg, &lm);

        // Token-level Levenshtein distance against the track.
        let reference: Vec<&str> = track.words().iter().map(|w| w.surface.as_str()).collect();
        let hypothesis: Vec<&str> = hyp.iter().map(|t| t.surface.as_str()).collect();
        let mut prev: Vec<usize> = (0..=hypothesis.len()).collect();
        let mut cur = vec![0usize; hypothesis.len() + 1];
        for (i, r) in reference.iter().enumerate() {
            cur[0] = i + 1;
            for (j, h) in hypothesis.iter().enumerate() {
                let sub = prev[j] + usize::from(r != h);
                cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
            }
            std::mem::swap(&mut prev, &mut cur);
        }
        let wer = prev[hypothesis.len()] as f64 / reference.len() as f64;
        assert!((wer - 0.15).abs() < 0.02, "wer {wer}");
    }

    #[test]
    fn track_round_trip_and_regions() {
        let mut words = Vec::new();
        for i in 0..6 {
            words.push(TrackWord {
                surface: format!("w{i}"),
                start_ms: i * 1000,
                end_ms: i * 1000 + 800,
                subtitled: !(2..4).contains(&i),
            });
        }
        let track = GroundTruthTrack::new(words).unwrap();
        assert_eq!(track.unsubtitled_regions(), vec![(2000, 3800)]);

        let mut buf = Vec::new();
        track.write_to(&mut buf).unwrap();
        let parsed =
            GroundTruthTrack::read_from(std::io::Cursor::new(&buf), Path::new("t")).unwrap();
        assert_eq!(parsed, track);
    }

    #[test]
    fn track_rejects_overlaps() {
        let words = vec![
            TrackWord {
                surface: "a".into(),
                start_ms: 0,
                end_ms: 500,
                subtitled: true,
            },
            TrackWord {
                surface: "b".into(),
                start_ms: 400,
                end_ms: 900,
                subtitled: true,
            },
        ];
        assert!(GroundTruthTrack::new(words).is_err());
    }
}
