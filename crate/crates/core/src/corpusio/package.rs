//! Corpus packaging: seeded shuffling, the dev split, and manifest files.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::decoder::fnv1a64;
use crate::error::{Error, Result};
use crate::extract::{Provenance, Segment};
use crate::textnorm::Token;

use super::bundle::ProgramRecording;

/// Dev-split size per genre (all segments when a genre has fewer).
pub const DEV_SEGMENTS_PER_GENRE: usize = 1000;

/// A train/dev partition of the final segments.
#[derive(Debug, Clone)]
pub struct CorpusSplit {
    pub train: Vec<Segment>,
    pub dev: Vec<Segment>,
    pub shuffle_seed: u64,
}

impl CorpusSplit {
    pub fn total_segments(&self) -> usize {
        self.train.len() + self.dev.len()
    }
}

fn genre_key(seed: u64, genre: &str) -> [u8; 32] {
    let mut key = [0u8; 32];
    key[0..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&fnv1a64(genre.as_bytes()).to_le_bytes());
    key[16..24].copy_from_slice(b"devsplit");
    key
}

/// Samples up to [`DEV_SEGMENTS_PER_GENRE`] segments per genre (seeded,
/// without replacement) into the dev set; everything else is train.
/// Genre comes from each segment's program's first genre tag.
pub fn make_dev_split(
    segments: Vec<Segment>,
    programs: &[ProgramRecording],
    seed: u64,
) -> Result<CorpusSplit> {
    let genre_of: HashMap<&str, &str> = programs
        .iter()
        .map(|p| (p.program_id.as_str(), p.primary_genre()))
        .collect();

    let mut by_genre: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (idx, seg) in segments.iter().enumerate() {
        let genre = genre_of.get(seg.program_id.as_str()).ok_or_else(|| {
            Error::NotFound(format!(
                "segment {} references unknown program {}",
                seg.segment_id, seg.program_id
            ))
        })?;
        by_genre.entry(genre).or_default().push(idx);
    }

    let mut dev_indices: HashSet<usize> = HashSet::new();
    for (genre, mut indices) in by_genre {
        // Canonical order before sampling so the draw is a function of the
        // segment set, not of input order.
        indices.sort_by(|&a, &b| segments[a].segment_id.cmp(&segments[b].segment_id));
        let mut rng = ChaCha8Rng::from_seed(genre_key(seed, genre));
        indices.shuffle(&mut rng);
        dev_indices.extend(indices.into_iter().take(DEV_SEGMENTS_PER_GENRE));
    }

    let mut train = Vec::with_capacity(segments.len() - dev_indices.len());
    let mut dev = Vec::with_capacity(dev_indices.len());
    for (idx, seg) in segments.into_iter().enumerate() {
        if dev_indices.contains(&idx) {
            dev.push(seg);
        } else {
            train.push(seg);
        }
    }
    Ok(CorpusSplit {
        train,
        dev,
        shuffle_seed: seed,
    })
}

/// Writes `segments.tsv` and `text.tsv` for a segment list, in the given
/// order. Returns the two paths.
pub fn write_segment_manifests(
    segments: &[&Segment],
    dir: impl AsRef<Path>,
) -> Result<(PathBuf, PathBuf)> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;

    let seg_path = dir.join("segments.tsv");
    let mut seg_file = BufWriter::new(fs::File::create(&seg_path)?);
    writeln!(seg_file, "segment_id\tprogram_id\tstart_ms\tend_ms")?;
    for seg in segments {
        writeln!(
            seg_file,
            "{}\t{}\t{}\t{}",
            seg.segment_id, seg.program_id, seg.start_ms, seg.end_ms
        )?;
    }
    drop(seg_file);

    let text_path = dir.join("text.tsv");
    let mut text_file = BufWriter::new(fs::File::create(&text_path)?);
    writeln!(text_file, "segment_id\ttext")?;
    for seg in segments {
        let words: Vec<String> = seg.tokens.iter().map(Token::tagged).collect();
        writeln!(text_file, "{}\t{}", seg.segment_id, words.join(" "))?;
    }
    drop(text_file);

    Ok((seg_path, text_path))
}

/// Reads manifests written by [`write_segment_manifests`] back into
/// segments. Token times and provenance are not serialized; loaded segments
/// carry empty timing and a step-3 marker.
pub fn load_segment_manifests(dir: impl AsRef<Path>) -> Result<Vec<Segment>> {
    let dir = dir.as_ref();
    let seg_path = dir.join("segments.tsv");
    let text_path = dir.join("text.tsv");

    let mut texts: HashMap<String, Vec<Token>> = HashMap::new();
    let text_raw = fs::read_to_string(&text_path)?;
    for (idx, line) in text_raw.lines().enumerate().skip(1) {
        let (id, text) = line
            .split_once('\t')
            .ok_or_else(|| Error::parse(&text_path, idx + 1, "expected id<TAB>text"))?;
        let tokens: Result<Vec<Token>> = text
            .split(' ')
            .filter(|s| !s.is_empty())
            .map(Token::parse)
            .collect();
        texts.insert(id.to_string(), tokens?);
    }

    let mut segments = Vec::new();
    let seg_raw = fs::read_to_string(&seg_path)?;
    for (idx, line) in seg_raw.lines().enumerate().skip(1) {
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 4 {
            return Err(Error::parse(&seg_path, idx + 1, "expected 4 fields"));
        }
        let start_ms: u64 = fields[2]
            .parse()
            .map_err(|_| Error::parse(&seg_path, idx + 1, "bad start_ms"))?;
        let end_ms: u64 = fields[3]
            .parse()
            .map_err(|_| Error::parse(&seg_path, idx + 1, "bad end_ms"))?;
        let tokens = texts.remove(fields[0]).ok_or_else(|| {
            Error::Integrity(format!("segment {} missing from text.tsv", fields[0]))
        })?;
        segments.push(Segment {
            segment_id: fields[0].to_string(),
            program_id: fields[1].to_string(),
            start_ms,
            end_ms,
            tokens,
            token_times: Vec::new(),
            subtitle_range: None,
            provenance: Provenance {
                step: 3,
                iteration: 0,
            },
        });
    }
    Ok(segments)
}

/// Writes the packaged corpus: a seeded global shuffle of all segments
/// (regardless of program), partitioned into `train/` and `dev/` manifest
/// directories. Identical inputs and seed give byte-identical files.
pub fn write_corpus(split: &CorpusSplit, out_dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let out_dir = out_dir.as_ref();

    let mut ids: Vec<&str> = split
        .train
        .iter()
        .chain(&split.dev)
        .map(|s| s.segment_id.as_str())
        .collect();
    ids.sort_unstable();
    for pair in ids.windows(2) {
        if pair[0] == pair[1] {
            return Err(Error::Integrity(format!(
                "duplicate segment_id {:?}",
                pair[0]
            )));
        }
    }

    let mut key = [0u8; 32];
    key[0..8].copy_from_slice(&split.shuffle_seed.to_le_bytes());
    key[16..24].copy_from_slice(b"shuffles");
    let mut rng = ChaCha8Rng::from_seed(key);
    ids.shuffle(&mut rng);
    let rank: HashMap<&str, usize> = ids.iter().enumerate().map(|(i, id)| (*id, i)).collect();

    let mut paths = Vec::new();
    for (name, segments) in [("train", &split.train), ("dev", &split.dev)] {
        let mut ordered: Vec<&Segment> = segments.iter().collect();
        ordered.sort_by_key(|s| rank[s.segment_id.as_str()]);
        let (a, b) = write_segment_manifests(&ordered, out_dir.join(name))?;
        paths.push(a);
        paths.push(b);
    }
    Ok(paths)
}
