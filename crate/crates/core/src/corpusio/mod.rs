//! Data ingestion and corpus packaging.
//!
//! A program bundle is a directory:
//!
//! ```text
//! <program_id>/
//!   meta.tsv    key<TAB>value: title, genres (comma-separated),
//!               duration_ms, sample_rate
//!   cues.tsv    start_ms<TAB>end_ms<TAB>space-separated surface/pos tokens
//!   audio.ref   one line: relative path to the audio (or ground-truth
//!               track file when running the simulated decoder)
//! ```
//!
//! Packaging writes `segments.tsv`, `text.tsv` and `stats.tsv` manifests,
//! all UTF-8 with LF endings and deterministic ordering.

mod bundle;
mod package;
pub mod synth;

pub use bundle::{
    discover_bundles, load_bundle_track, parse_program_bundle, parse_program_bundle_with,
    write_program_bundle, AudioRef, ProgramRecording, SubtitleCue,
};
pub use package::{
    load_segment_manifests, make_dev_split, write_corpus, write_segment_manifests, CorpusSplit,
    DEV_SEGMENTS_PER_GENRE,
};

/// Audio sample rate every bundle must declare.
pub const REQUIRED_SAMPLE_RATE_HZ: u32 = 16_000;
