//! Program bundle parsing and writing.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::decoder::GroundTruthTrack;
use crate::error::{Error, Result};
use crate::textnorm::{normalize_tokens, NormalizationConfig, Token};

use super::REQUIRED_SAMPLE_RATE_HZ;

/// Reference to the recording's audio. The tool never touches samples; it
/// trusts the declared duration and validates span bounds against it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AudioRef {
    /// Relative to the bundle directory.
    pub path: PathBuf,
    pub duration_ms: u64,
    pub sample_rate_hz: u32,
}

/// One timed unit of subtitle text. Timestamps are carried but treated as
/// unreliable; alignment never trusts them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubtitleCue {
    pub start_ms: u64,
    pub end_ms: u64,
    pub tokens: Vec<Token>,
}

/// A long recording with its subtitles and genre metadata.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProgramRecording {
    pub program_id: String,
    pub title: String,
    /// Ordered; the first tag is the program's primary genre.
    pub genre_tags: Vec<String>,
    pub audio: AudioRef,
    /// Sorted by start_ms; overlaps permitted (realtime subtitles).
    pub cues: Vec<SubtitleCue>,
}

impl ProgramRecording {
    pub fn primary_genre(&self) -> &str {
        &self.genre_tags[0]
    }

    /// All cue tokens concatenated in cue order: the reference stream every
    /// alignment step works against.
    pub fn subtitle_tokens(&self) -> Vec<Token> {
        self.cues
            .iter()
            .flat_map(|c| c.tokens.iter().cloned())
            .collect()
    }

    /// Per-cue surfaces, the training texts of the program-level biased LM.
    pub fn cue_surfaces(&self) -> Vec<Vec<&str>> {
        self.cues
            .iter()
            .map(|c| c.tokens.iter().map(Token::surface).collect())
            .collect()
    }

    pub fn subtitle_word_count(&self) -> usize {
        self.cues.iter().map(|c| c.tokens.len()).sum()
    }
}

/// Parses a bundle directory with the default normalization config.
pub fn parse_program_bundle(dir: impl AsRef<Path>) -> Result<ProgramRecording> {
    parse_program_bundle_with(dir, &NormalizationConfig::default())
}

/// Parses and validates a bundle directory; cue tokens are normalized, cues
/// re-sorted if needed (with a warning), and empty cues dropped.
pub fn parse_program_bundle_with(
    dir: impl AsRef<Path>,
    cfg: &NormalizationConfig,
) -> Result<ProgramRecording> {
    let dir = dir.as_ref();
    let program_id = dir
        .file_name()
        .and_then(|n| n.to_str())
        .ok_or_else(|| Error::invalid(format!("bundle path {dir:?} has no directory name")))?
        .to_string();

    let meta_path = dir.join("meta.tsv");
    let meta = fs::read_to_string(&meta_path)
        .map_err(|e| Error::parse(&meta_path, 0, format!("cannot read: {e}")))?;
    let mut title = None;
    let mut genres: Option<Vec<String>> = None;
    let mut duration_ms = None;
    let mut sample_rate = None;
    for (idx, line) in meta.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('\t')
            .ok_or_else(|| Error::parse(&meta_path, idx + 1, "expected key<TAB>value"))?;
        match key {
            "title" => title = Some(value.to_string()),
            "genres" => {
                let tags: Vec<String> = value
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(String::from)
                    .collect();
                genres = Some(tags);
            }
            "duration_ms" => {
                duration_ms = Some(value.parse::<u64>().map_err(|_| {
                    Error::parse(&meta_path, idx + 1, format!("bad duration_ms {value:?}"))
                })?);
            }
            "sample_rate" => {
                sample_rate = Some(value.parse::<u32>().map_err(|_| {
                    Error::parse(&meta_path, idx + 1, format!("bad sample_rate {value:?}"))
                })?);
            }
            other => {
                return Err(Error::parse(
                    &meta_path,
                    idx + 1,
                    format!("unknown key {other:?}"),
                ));
            }
        }
    }
    let title = title.ok_or_else(|| Error::parse(&meta_path, 0, "missing title"))?;
    let genre_tags = genres.ok_or_else(|| Error::parse(&meta_path, 0, "missing genres"))?;
    if genre_tags.is_empty() {
        return Err(Error::parse(&meta_path, 0, "genres must be non-empty"));
    }
    let duration_ms =
        duration_ms.ok_or_else(|| Error::parse(&meta_path, 0, "missing duration_ms"))?;
    let sample_rate =
        sample_rate.ok_or_else(|| Error::parse(&meta_path, 0, "missing sample_rate"))?;
    if sample_rate != REQUIRED_SAMPLE_RATE_HZ {
        return Err(Error::Format(format!(
            "{}: sample rate {sample_rate} Hz, expected {REQUIRED_SAMPLE_RATE_HZ}",
            meta_path.display()
        )));
    }

    let ref_path = dir.join("audio.ref");
    let audio_rel = fs::read_to_string(&ref_path)
        .map_err(|e| Error::parse(&ref_path, 0, format!("cannot read: {e}")))?;
    let audio_rel = audio_rel.trim();
    if audio_rel.is_empty() {
        return Err(Error::parse(&ref_path, 1, "empty audio reference"));
    }

    let cues_path = dir.join("cues.tsv");
    let cues_text = fs::read_to_string(&cues_path)
        .map_err(|e| Error::parse(&cues_path, 0, format!("cannot read: {e}")))?;
    let mut cues: Vec<SubtitleCue> = Vec::new();
    for (idx, line) in cues_text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(Error::parse(
                &cues_path,
                idx + 1,
                "expected start_ms<TAB>end_ms<TAB>tokens",
            ));
        }
        let start_ms: u64 = fields[0]
            .parse()
            .map_err(|_| Error::parse(&cues_path, idx + 1, format!("bad start_ms {:?}", fields[0])))?;
        let end_ms: u64 = fields[1]
            .parse()
            .map_err(|_| Error::parse(&cues_path, idx + 1, format!("bad end_ms {:?}", fields[1])))?;
        if end_ms <= start_ms {
            return Err(Error::parse(
                &cues_path,
                idx + 1,
                format!("cue must end after it starts ({start_ms}..{end_ms})"),
            ));
        }
        let mut raw = Vec::new();
        for spec in fields[2].split(' ').filter(|s| !s.is_empty()) {
            raw.push(
                Token::parse(spec)
                    .map_err(|e| Error::parse(&cues_path, idx + 1, e.to_string()))?,
            );
        }
        let tokens = normalize_tokens(&raw, cfg);
        if tokens.is_empty() {
            log::warn!(
                "{}:{}: cue empty after normalization, dropped",
                cues_path.display(),
                idx + 1
            );
            continue;
        }
        cues.push(SubtitleCue {
            start_ms,
            end_ms,
            tokens,
        });
    }

    if !cues.windows(2).all(|w| w[0].start_ms <= w[1].start_ms) {
        log::warn!("{}: cues out of order, re-sorting", cues_path.display());
        cues.sort_by_key(|c| (c.start_ms, c.end_ms));
    }

    Ok(ProgramRecording {
        program_id,
        title,
        genre_tags,
        audio: AudioRef {
            path: PathBuf::from(audio_rel),
            duration_ms,
            sample_rate_hz: sample_rate,
        },
        cues,
    })
}

/// Writes a bundle directory; the inverse of [`parse_program_bundle`].
/// When a track is given it is stored at the audio reference path.
pub fn write_program_bundle(
    program: &ProgramRecording,
    root: impl AsRef<Path>,
    track: Option<&GroundTruthTrack>,
) -> Result<PathBuf> {
    let dir = root.as_ref().join(&program.program_id);
    fs::create_dir_all(&dir)?;

    let mut meta = BufWriter::new(fs::File::create(dir.join("meta.tsv"))?);
    writeln!(meta, "title\t{}", program.title)?;
    writeln!(meta, "genres\t{}", program.genre_tags.join(","))?;
    writeln!(meta, "duration_ms\t{}", program.audio.duration_ms)?;
    writeln!(meta, "sample_rate\t{}", program.audio.sample_rate_hz)?;
    drop(meta);

    let mut cues = BufWriter::new(fs::File::create(dir.join("cues.tsv"))?);
    for cue in &program.cues {
        let tokens: Vec<String> = cue.tokens.iter().map(Token::tagged).collect();
        writeln!(cues, "{}\t{}\t{}", cue.start_ms, cue.end_ms, tokens.join(" "))?;
    }
    drop(cues);

    fs::write(
        dir.join("audio.ref"),
        format!("{}\n", program.audio.path.display()),
    )?;

    if let Some(track) = track {
        track.save(dir.join(&program.audio.path))?;
    }

    Ok(dir)
}

/// Loads the ground-truth track a bundle's audio reference points to.
pub fn load_bundle_track(bundle_dir: impl AsRef<Path>, program: &ProgramRecording) -> Result<GroundTruthTrack> {
    GroundTruthTrack::load(bundle_dir.as_ref().join(&program.audio.path))
}

/// Bundle subdirectories under `root` (those containing meta.tsv), sorted.
pub fn discover_bundles(root: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let mut dirs = Vec::new();
    for entry in fs::read_dir(root.as_ref())? {
        let entry = entry?;
        let path = entry.path();
        if path.is_dir() && path.join("meta.tsv").is_file() {
            dirs.push(path);
        }
    }
    dirs.sort();
    Ok(dirs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textnorm::PosTag;

    fn sample_program() -> ProgramRecording {
        let tok = |s: &str, p: PosTag| Token::new(s, p).unwrap();
        ProgramRecording {
            program_id: "prog-001".into(),
            title: "テスト番組".into(),
            genre_tags: vec!["News report".into(), "Variety show".into()],
            audio: AudioRef {
                path: PathBuf::from("track.tsv"),
                duration_ms: 60_000,
                sample_rate_hz: 16_000,
            },
            cues: vec![
                SubtitleCue {
                    start_ms: 0,
                    end_ms: 3000,
                    tokens: vec![tok("今日", PosTag::Noun), tok("は", PosTag::Particle)],
                },
                SubtitleCue {
                    start_ms: 3000,
                    end_ms: 6500,
                    tokens: vec![tok("晴れ", PosTag::Noun)],
                },
            ],
        }
    }

    #[test]
    fn bundle_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let prog = sample_program();
        write_program_bundle(&prog, dir.path(), None).unwrap();
        let parsed = parse_program_bundle(dir.path().join("prog-001")).unwrap();
        assert_eq!(parsed, prog);
    }

    #[test]
    fn genres_split_on_commas() {
        // The genres line is comma-separated, so tags themselves cannot
        // contain commas; a tag written with one splits on read.
        let dir = tempfile::tempdir().unwrap();
        let mut prog = sample_program();
        prog.genre_tags = vec!["News, report".into()];
        write_program_bundle(&prog, dir.path(), None).unwrap();
        let parsed = parse_program_bundle(dir.path().join("prog-001")).unwrap();
        assert_eq!(parsed.genre_tags, vec!["News".to_string(), "report".to_string()]);
    }

    #[test]
    fn unsorted_cues_are_resorted() {
        let dir = tempfile::tempdir().unwrap();
        let bundle = dir.path().join("p1");
        fs::create_dir_all(&bundle).unwrap();
        fs::write(
            bundle.join("meta.tsv"),
            "title\tt
genres\tNews
duration_ms\t10000
sample_rate\t16000
",
        )
        .unwrap();
        fs::write(
            bundle.join("cues.tsv"),
            "5000\t6000\tb/noun\n1000\t2000\ta/noun\n",
        )
        .unwrap();
        fs::write(bundle.join("audio.ref"), "track.tsv\n").unwrap();
        let parsed = parse_program_bundle(&bundle).unwrap();
        assert_eq!(parsed.cues[0].tokens[0].surface(), "a");
        assert_eq!(parsed.cues[1].tokens[0].surface(), "b");
    }

    #[test]
    fn wrong_sample_rate_is_a_format_error() {
        let dir = tempfile::tempdir().unwrap();
        let bundle = dir.path().join("p1");
        fs::create_dir_all(&bundle).unwrap();
        fs::write(
            bundle.join("meta.tsv"),
            "title\tt\ngenres\tNews\nduration_ms\t10000\nsample_rate\t48000\n",
        )
        .unwrap();
        fs::write(bundle.join("cues.tsv"), "0\t1000\ta/noun\n").unwrap();
        fs::write(bundle.join("audio.ref"), "track.tsv\n").unwrap();
        assert!(matches!(
            parse_program_bundle(&bundle),
            Err(Error::Format(_))
        ));
    }

    #[test]
    fn parse_errors_carry_file_and_line() {
        let dir = tempfile::tempdir().unwrap();
        let bundle = dir.path().join("p1");
        fs::create_dir_all(&bundle).unwrap();
        fs::write(
            bundle.join("meta.tsv"),
            "title\tt\ngenres\tNews\nduration_ms\t10000\nsample_rate\t16000\n",
        )
        .unwrap();
        fs::write(bundle.join("cues.tsv"), "0\t1000\ta/noun\nnot-a-cue\n").unwrap();
        fs::write(bundle.join("audio.ref"), "track.tsv\n").unwrap();
        match parse_program_bundle(&bundle) {
            Err(Error::Parse { line, file, .. }) => {
                assert_eq!(line, 2);
                assert!(file.ends_with("cues.tsv"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn cue_numerals_are_normalized() {
        let dir = tempfile::tempdir().unwrap();
        let bundle = dir.path().join("p1");
        fs::create_dir_all(&bundle).unwrap();
        fs::write(
            bundle.join("meta.tsv"),
            "title\tt\ngenres\tNews\nduration_ms\t10000\nsample_rate\t16000\n",
        )
        .unwrap();
        fs::write(bundle.join("cues.tsv"), "0\t1000\t売上/noun 120/number 円/noun\n").unwrap();
        fs::write(bundle.join("audio.ref"), "track.tsv\n").unwrap();
        let parsed = parse_program_bundle(&bundle).unwrap();
        let surfaces: Vec<&str> = parsed.cues[0].tokens.iter().map(Token::surface).collect();
        assert_eq!(surfaces, ["売上", "百二十", "円"]);
    }

    #[test]
    fn discover_bundles_sorted() {
        let dir = tempfile::tempdir().unwrap();
        for id in ["b", "a", "c"] {
            let sub = dir.path().join(id);
            fs::create_dir_all(&sub).unwrap();
            fs::write(sub.join("meta.tsv"), "").unwrap();
        }
        fs::create_dir_all(dir.path().join("not-a-bundle")).unwrap();
        let found = discover_bundles(dir.path()).unwrap();
        let names: Vec<_> = found
            .iter()
            .map(|p| p.file_name().unwrap().to_str().unwrap())
            .collect();
        assert_eq!(names, ["a", "b", "c"]);
    }
}
