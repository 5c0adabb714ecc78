//! Synthetic program generation for simulation-backed runs and tests.
//!
//! Programs alternate subtitled speech blocks with optional unsubtitled
//! blocks (commercial breaks). Subtitled words come from one shared
//! vocabulary and are grouped into cues; unsubtitled words use a disjoint
//! vocabulary, like jingles and brand names that never show up in
//! subtitles. Everything is a pure function of the seed.

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::decoder::{GroundTruthTrack, TrackWord};
use crate::error::Result;
use crate::textnorm::{PosTag, Token};

use super::bundle::{write_program_bundle, AudioRef, ProgramRecording, SubtitleCue};

/// Genre labels used by generated corpora.
pub fn default_genre_names() -> Vec<String> {
    [
        "News report",
        "Variety show",
        "Information tabloid show",
        "Drama",
        "Documentary culture",
        "Hobby education",
        "Sports",
        "Animation special effect movies",
        "Music",
        "Welfare",
        "Movies",
        "Theatre public performance",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect()
}

#[derive(Debug, Clone)]
pub struct SynthConfig {
    pub programs: usize,
    /// Approximate length of each program.
    pub duration_ms: u64,
    /// Cycled across programs.
    pub genres: Vec<String>,
    pub vocab_size: usize,
    /// Fraction of speech time in unsubtitled blocks (0 disables them).
    pub unsubtitled_fraction: f64,
    pub subtitled_block_ms: u64,
    pub mean_word_ms: u64,
    pub word_gap_ms: u64,
    /// Target cue length.
    pub cue_ms: u64,
    /// Upper bound on the per-program constant subtitle delay.
    pub subtitle_delay_ms: u64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            programs: 20,
            duration_ms: 600_000,
            genres: default_genre_names(),
            vocab_size: 400,
            unsubtitled_fraction: 0.0,
            subtitled_block_ms: 120_000,
            mean_word_ms: 350,
            word_gap_ms: 50,
            cue_ms: 4000,
            subtitle_delay_ms: 1500,
            seed: 7,
        }
    }
}

const SYLLABLES: [&str; 45] = [
    "あ", "い", "う", "え", "お", "か", "き", "く", "け", "こ", "さ", "し", "す", "せ", "そ",
    "た", "ち", "つ", "て", "と", "な", "に", "ぬ", "ね", "の", "は", "ひ", "ふ", "へ", "ほ",
    "ま", "み", "む", "め", "も", "や", "ゆ", "よ", "ら", "り", "る", "れ", "ろ", "わ", "ん",
];

const WORD_POS: [PosTag; 5] = [
    PosTag::Noun,
    PosTag::Verb,
    PosTag::Particle,
    PosTag::Adverb,
    PosTag::Adjective,
];

fn random_word(rng: &mut ChaCha8Rng) -> String {
    let len = rng.random_range(2..=4);
    (0..len)
        .map(|_| SYLLABLES[rng.random_range(0..SYLLABLES.len())])
        .collect()
}

/// `count` distinct words, avoiding everything in `taken`.
fn make_vocab(rng: &mut ChaCha8Rng, count: usize, taken: &[String]) -> Vec<String> {
    let mut vocab: Vec<String> = Vec::with_capacity(count);
    while vocab.len() < count {
        let w = random_word(rng);
        if !vocab.contains(&w) && !taken.contains(&w) {
            vocab.push(w);
        }
    }
    vocab
}

struct ProgramBuilder<'a> {
    cfg: &'a SynthConfig,
    rng: ChaCha8Rng,
    vocab: &'a [String],
    commercial_vocab: &'a [String],
    words: Vec<TrackWord>,
    cues: Vec<SubtitleCue>,
    cue_tokens: Vec<Token>,
    cue_start: u64,
    t: u64,
}

impl ProgramBuilder<'_> {
    fn emit_word(&mut self, subtitled: bool) {
        let spread = self.cfg.mean_word_ms / 3;
        let dur = self.cfg.mean_word_ms - spread + self.rng.random_range(0..=2 * spread);
        let pool = if subtitled {
            self.vocab
        } else {
            self.commercial_vocab
        };
        let surface = pool[self.rng.random_range(0..pool.len())].clone();
        self.words.push(TrackWord {
            surface: surface.clone(),
            start_ms: self.t,
            end_ms: self.t + dur,
            subtitled,
        });
        if subtitled {
            if self.cue_tokens.is_empty() {
                self.cue_start = self.t;
            }
            let pos = WORD_POS[self.rng.random_range(0..WORD_POS.len())];
            self.cue_tokens
                .push(Token::new(surface, pos).expect("generated surfaces are valid"));
        }
        self.t += dur + self.rng.random_range(1..=self.cfg.word_gap_ms.max(1) * 2);
        if subtitled && self.t.saturating_sub(self.cue_start) >= self.cfg.cue_ms {
            self.flush_cue();
        }
    }

    fn flush_cue(&mut self) {
        if self.cue_tokens.is_empty() {
            return;
        }
        self.cues.push(SubtitleCue {
            start_ms: self.cue_start,
            end_ms: self.t,
            tokens: std::mem::take(&mut self.cue_tokens),
        });
    }

    fn emit_block(&mut self, target_ms: u64, subtitled: bool) {
        let block_end = self.t + target_ms;
        while self.t < block_end {
            self.emit_word(subtitled);
        }
        if subtitled {
            self.flush_cue();
        }
        self.t += 600 + self.rng.random_range(0..600); // block boundary pause
    }
}

/// Generates one program and its ground-truth track.
pub fn generate_program(
    cfg: &SynthConfig,
    index: usize,
    vocab: &[String],
    commercial_vocab: &[String],
) -> (ProgramRecording, GroundTruthTrack) {
    let mut key = [0u8; 32];
    key[0..8].copy_from_slice(&cfg.seed.to_le_bytes());
    key[8..16].copy_from_slice(&(index as u64).to_le_bytes());
    key[16..24].copy_from_slice(b"synthpro");
    let rng = ChaCha8Rng::from_seed(key);

    let mut builder = ProgramBuilder {
        cfg,
        rng,
        vocab,
        commercial_vocab,
        words: Vec::new(),
        cues: Vec::new(),
        cue_tokens: Vec::new(),
        cue_start: 0,
        t: 0,
    };

    let f = cfg.unsubtitled_fraction;
    while builder.t < cfg.duration_ms {
        let jitter = builder.rng.random_range(75..=125);
        let block = cfg.subtitled_block_ms * jitter / 100;
        builder.emit_block(block, true);
        if f > 0.0 && builder.t < cfg.duration_ms {
            let commercial = (block as f64 * f / (1.0 - f)) as u64;
            builder.emit_block(commercial, false);
        }
    }

    let track = GroundTruthTrack::new(builder.words).expect("generated words are ordered");
    let duration_ms = track.duration_ms() + 500;

    let delay = if cfg.subtitle_delay_ms > 0 {
        builder.rng.random_range(0..=cfg.subtitle_delay_ms)
    } else {
        0
    };
    let mut cues = builder.cues;
    for cue in &mut cues {
        cue.start_ms += delay;
        cue.end_ms += delay;
    }

    let program_id = format!("prog{index:03}");
    let genre = cfg.genres[index % cfg.genres.len()].clone();
    let program = ProgramRecording {
        program_id: program_id.clone(),
        title: format!("Synthetic program {index}"),
        genre_tags: vec![genre],
        audio: AudioRef {
            path: PathBuf::from("track.tsv"),
            duration_ms,
            sample_rate_hz: 16_000,
        },
        cues,
    };
    (program, track)
}

/// Generates the full corpus described by the config.
pub fn generate_corpus(cfg: &SynthConfig) -> Vec<(ProgramRecording, GroundTruthTrack)> {
    let mut key = [0u8; 32];
    key[0..8].copy_from_slice(&cfg.seed.to_le_bytes());
    key[16..24].copy_from_slice(b"synthvoc");
    let mut vocab_rng = ChaCha8Rng::from_seed(key);
    let vocab = make_vocab(&mut vocab_rng, cfg.vocab_size, &[]);
    let commercial_vocab = make_vocab(&mut vocab_rng, (cfg.vocab_size / 4).max(8), &vocab);

    (0..cfg.programs)
        .map(|i| generate_program(cfg, i, &vocab, &commercial_vocab))
        .collect()
}

/// Generates the corpus and writes one bundle directory per program.
pub fn write_bundles(cfg: &SynthConfig, root: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let mut paths = Vec::new();
    for (program, track) in generate_corpus(cfg) {
        paths.push(write_program_bundle(&program, root.as_ref(), Some(&track))?);
    }
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpusio::{load_bundle_track, parse_program_bundle};

    #[test]
    fn generation_is_deterministic() {
        let cfg = SynthConfig {
            programs: 2,
            duration_ms: 30_000,
            ..SynthConfig::default()
        };
        let a = generate_corpus(&cfg);
        let b = generate_corpus(&cfg);
        assert_eq!(a.len(), 2);
        for ((pa, ta), (pb, tb)) in a.iter().zip(&b) {
            assert_eq!(pa, pb);
            assert_eq!(ta, tb);
        }
    }

    #[test]
    fn subtitled_words_match_cue_tokens() {
        let cfg = SynthConfig {
            programs: 1,
            duration_ms: 60_000,
            unsubtitled_fraction: 0.3,
            ..SynthConfig::default()
        };
        let (program, track) = &generate_corpus(&cfg)[0];
        let spoken: Vec<&str> = track
            .words()
            .iter()
            .filter(|w| w.subtitled)
            .map(|w| w.surface.as_str())
            .collect();
        let subtitled: Vec<&str> = program
            .cues
            .iter()
            .flat_map(|c| c.tokens.iter().map(Token::surface))
            .collect();
        assert_eq!(spoken, subtitled);

        // Commercial words never collide with subtitle vocabulary.
        let commercial: Vec<&str> = track
            .words()
            .iter()
            .filter(|w| !w.subtitled)
            .map(|w| w.surface.as_str())
            .collect();
        assert!(!commercial.is_empty());
        for word in commercial {
            assert!(!subtitled.contains(&word));
        }
    }

    #[test]
    fn unsubtitled_fraction_is_respected() {
        let cfg = SynthConfig {
            programs: 1,
            duration_ms: 600_000,
            unsubtitled_fraction: 0.3,
            ..SynthConfig::default()
        };
        let (_, track) = &generate_corpus(&cfg)[0];
        let unsub: u64 = track
            .words()
            .iter()
            .filter(|w| !w.subtitled)
            .map(|w| w.end_ms - w.start_ms)
            .sum();
        let total: u64 = track.words().iter().map(|w| w.end_ms - w.start_ms).sum();
        let fraction = unsub as f64 / total as f64;
        assert!((fraction - 0.3).abs() < 0.06, "fraction {fraction}");
    }

    #[test]
    fn bundles_round_trip_through_disk() {
        let cfg = SynthConfig {
            programs: 2,
            duration_ms: 20_000,
            ..SynthConfig::default()
        };
        let dir = tempfile::tempdir().unwrap();
        let paths = write_bundles(&cfg, dir.path()).unwrap();
        assert_eq!(paths.len(), 2);
        let originals = generate_corpus(&cfg);
        for (path, (program, track)) in paths.iter().zip(&originals) {
            let parsed = parse_program_bundle(path).unwrap();
            assert_eq!(&parsed, program);
            let loaded = load_bundle_track(path, &parsed).unwrap();
            assert_eq!(&loaded, track);
        }
    }
}
