//! Extraction of time-aligned speech-training segments from long
//! recordings paired with inaccurate, non-verbatim subtitles.
//!
//! The workflow decodes audio with subtitle-biased n-gram language models,
//! aligns the decoded text back against the subtitles, and iterates over
//! the unmatched remainder until it converges on a clean set of
//! (audio span, transcript) segments. Decoding is behind the [`Decoder`]
//! trait; the bundled [`SimulatedDecoder`] replays ground-truth tracks
//! through a seeded error channel so the whole pipeline runs and tests
//! without acoustic models.
//!
//! Module map:
//! * [`textnorm`] — token normalization, Kanji numeral conversion
//! * [`ngram`] — modified Kneser-Ney LMs, ARPA I/O, EM interpolation
//! * [`decoder`] — decoder contract and the deterministic simulator
//! * [`align`] — Smith-Waterman, matching blocks, timestamp transfer
//! * [`extract`] — the five-step iterative pipeline
//! * [`metrics`] — CER, extraction rates, genre statistics
//! * [`corpusio`] — bundles, packaging, splits, synthetic corpora

pub mod align;
pub mod corpusio;
pub mod decoder;
mod error;
pub mod extract;
pub mod metrics;
pub mod ngram;
pub mod textnorm;

pub use align::{AlignedSpan, AlignmentOp, MatchingBlock, SWParams};
pub use corpusio::{CorpusSplit, ProgramRecording, SubtitleCue};
pub use decoder::{Decoder, ErrorConfig, GroundTruthTrack, HypToken, SimulatedDecoder, TrackWord};
pub use error::{Error, Result};
pub use extract::{PipelineConfig, ProgramStats, Provenance, Segment};
pub use metrics::ExtractionStats;
pub use ngram::{CountTable, InterpolationResult, NGramModel};
pub use textnorm::{NormalizationConfig, PosTag, Token};
