//! Quantitative evaluation: character error rate, extraction rates, and
//! per-genre corpus statistics.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::corpusio::ProgramRecording;
use crate::error::{Error, Result};
use crate::extract::Segment;

/// Character error rate: Levenshtein distance over Unicode scalar values
/// divided by the reference length. All whitespace is stripped first; no
/// other normalization is applied, so fillers and disfluencies count.
pub fn cer(reference: &str, hypothesis: &str) -> Result<f64> {
    let r: Vec<char> = reference.chars().filter(|c| !c.is_whitespace()).collect();
    let h: Vec<char> = hypothesis.chars().filter(|c| !c.is_whitespace()).collect();
    if r.is_empty() {
        return Err(Error::UndefinedRate(
            "CER needs a non-empty reference".into(),
        ));
    }
    Ok(char_edit_distance(&r, &h) as f64 / r.len() as f64)
}

/// Edit distance over chars with two rolling rows.
pub(crate) fn char_edit_distance(r: &[char], h: &[char]) -> usize {
    if h.is_empty() {
        return r.len();
    }
    let mut prev: Vec<usize> = (0..=h.len()).collect();
    let mut cur = vec![0usize; h.len() + 1];
    for (i, rc) in r.iter().enumerate() {
        cur[0] = i + 1;
        for (j, hc) in h.iter().enumerate() {
            let sub = prev[j] + usize::from(rc != hc);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[h.len()]
}

/// Word extraction rate: extracted words over raw subtitle words.
pub fn extraction_rate(raw_words: u64, extracted_words: u64) -> Result<f64> {
    if raw_words == 0 {
        return Err(Error::invalid("raw_words must be positive"));
    }
    if extracted_words > raw_words {
        return Err(Error::invalid(format!(
            "extracted_words {extracted_words} exceeds raw_words {raw_words}"
        )));
    }
    Ok(extracted_words as f64 / raw_words as f64)
}

/// One genre's aggregate row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenreRow {
    pub genre: String,
    pub raw_ms: u64,
    pub extracted_ms: u64,
    pub raw_words: u64,
    pub extracted_words: u64,
}

impl GenreRow {
    pub fn extraction_rate(&self) -> f64 {
        if self.raw_words == 0 {
            0.0
        } else {
            self.extracted_words as f64 / self.raw_words as f64
        }
    }

    fn add(&mut self, other: &GenreRow) {
        self.raw_ms += other.raw_ms;
        self.extracted_ms += other.extracted_ms;
        self.raw_words += other.raw_words;
        self.extracted_words += other.extracted_words;
    }
}

/// Per-genre extraction statistics with a totals row, sorted by raw audio
/// length descending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtractionStats {
    pub rows: Vec<GenreRow>,
    pub totals: GenreRow,
}

const MS_PER_HOUR: f64 = 3_600_000.0;

impl ExtractionStats {
    /// TSV rendering: genre, raw_hours, extracted_hours, extracted_pct,
    /// raw_words, extracted_words, extraction_rate_pct. extracted_pct is
    /// each genre's share of the total extracted audio.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        out.push_str(
            "genre\traw_hours\textracted_hours\textracted_pct\traw_words\textracted_words\textraction_rate_pct\n",
        );
        let total_extracted = self.totals.extracted_ms as f64;
        for row in self.rows.iter().chain(std::iter::once(&self.totals)) {
            let share = if total_extracted > 0.0 {
                100.0 * row.extracted_ms as f64 / total_extracted
            } else {
                0.0
            };
            writeln!(
                out,
                "{}\t{:.1}\t{:.1}\t{:.1}\t{}\t{}\t{:.1}",
                row.genre,
                row.raw_ms as f64 / MS_PER_HOUR,
                row.extracted_ms as f64 / MS_PER_HOUR,
                share,
                row.raw_words,
                row.extracted_words,
                100.0 * row.extraction_rate()
            )
            .expect("string writes cannot fail");
        }
        out
    }
}

/// Aggregates raw and extracted word counts by each program's first genre
/// tag. Every segment's program_id must resolve.
pub fn genre_stats(programs: &[ProgramRecording], segments: &[Segment]) -> Result<ExtractionStats> {
    let mut by_program: HashMap<&str, &ProgramRecording> = HashMap::new();
    for p in programs {
        by_program.insert(p.program_id.as_str(), p);
    }

    let mut rows: HashMap<&str, GenreRow> = HashMap::new();
    for p in programs {
        let row = rows.entry(p.primary_genre()).or_insert_with(|| GenreRow {
            genre: p.primary_genre().to_string(),
            raw_ms: 0,
            extracted_ms: 0,
            raw_words: 0,
            extracted_words: 0,
        });
        row.raw_ms += p.audio.duration_ms;
        row.raw_words += p.subtitle_word_count() as u64;
    }

    for seg in segments {
        let program = by_program.get(seg.program_id.as_str()).ok_or_else(|| {
            Error::NotFound(format!(
                "segment {} references unknown program {}",
                seg.segment_id, seg.program_id
            ))
        })?;
        let row = rows
            .get_mut(program.primary_genre())
            .expect("program genres are pre-seeded");
        row.extracted_ms += seg.duration_ms();
        row.extracted_words += seg.word_count() as u64;
    }

    let mut rows: Vec<GenreRow> = rows.into_values().collect();
    rows.sort_by(|a, b| b.raw_ms.cmp(&a.raw_ms).then_with(|| a.genre.cmp(&b.genre)));

    let mut totals = GenreRow {
        genre: "Total".into(),
        raw_ms: 0,
        extracted_ms: 0,
        raw_words: 0,
        extracted_words: 0,
    };
    for row in &rows {
        totals.add(row);
    }

    Ok(ExtractionStats { rows, totals })
}
