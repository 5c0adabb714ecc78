//! Subtitle text normalization.
//!
//! Turns raw subtitle tokens into the normalized form used everywhere else:
//! multi-digit Arabic numerals are rewritten as positional Kanji numerals,
//! configured symbol characters are stripped, and Latin letters can be
//! case-folded. All functions here are pure.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Coarse part-of-speech tag carried by every token.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PosTag {
    Noun,
    Verb,
    Adjective,
    Adverb,
    Particle,
    Auxiliary,
    Symbol,
    Interjection,
    Number,
    Other,
}

impl PosTag {
    pub const ALL: [PosTag; 10] = [
        PosTag::Noun,
        PosTag::Verb,
        PosTag::Adjective,
        PosTag::Adverb,
        PosTag::Particle,
        PosTag::Auxiliary,
        PosTag::Symbol,
        PosTag::Interjection,
        PosTag::Number,
        PosTag::Other,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PosTag::Noun => "noun",
            PosTag::Verb => "verb",
            PosTag::Adjective => "adjective",
            PosTag::Adverb => "adverb",
            PosTag::Particle => "particle",
            PosTag::Auxiliary => "auxiliary",
            PosTag::Symbol => "symbol",
            PosTag::Interjection => "interjection",
            PosTag::Number => "number",
            PosTag::Other => "other",
        }
    }
}

impl fmt::Display for PosTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PosTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PosTag::ALL
            .iter()
            .copied()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| Error::invalid(format!("unknown pos tag {s:?}")))
    }
}

/// A normalized text unit: the atom of alignment and LM training.
///
/// The surface is never empty and never contains whitespace; the optional
/// reading is a kana pronunciation when one is known.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Token {
    surface: String,
    reading: Option<String>,
    pos: PosTag,
}

impl Token {
    pub fn new(surface: impl Into<String>, pos: PosTag) -> Result<Token> {
        let surface = surface.into();
        if surface.is_empty() {
            return Err(Error::invalid("token surface must be non-empty"));
        }
        if surface.chars().any(char::is_whitespace) {
            return Err(Error::invalid(format!(
                "token surface {surface:?} contains whitespace"
            )));
        }
        Ok(Token {
            surface,
            reading: None,
            pos,
        })
    }

    pub fn with_reading(mut self, reading: impl Into<String>) -> Token {
        self.reading = Some(reading.into());
        self
    }

    /// Parses the `surface/pos` form used in cue and transcript files.
    /// A bare surface (or a trailing component that is not a known tag)
    /// defaults to [`PosTag::Other`].
    pub fn parse(spec: &str) -> Result<Token> {
        if let Some((surface, tag)) = spec.rsplit_once('/') {
            if let Ok(pos) = tag.parse::<PosTag>() {
                if !surface.is_empty() {
                    return Token::new(surface, pos);
                }
            }
        }
        Token::new(spec, PosTag::Other)
    }

    pub fn surface(&self) -> &str {
        &self.surface
    }

    pub fn reading(&self) -> Option<&str> {
        self.reading.as_deref()
    }

    pub fn pos(&self) -> PosTag {
        self.pos
    }

    /// The `surface/pos` form written to transcript files.
    pub fn tagged(&self) -> String {
        format!("{}/{}", self.surface, self.pos)
    }
}

/// Characters that may never appear in `strip_symbols`: stripping them
/// would corrupt numeral handling.
fn is_numeral_char(c: char) -> bool {
    c.is_ascii_digit()
        || ('０'..='９').contains(&c)
        || matches!(
            c,
            '〇' | '一'
                | '二'
                | '三'
                | '四'
                | '五'
                | '六'
                | '七'
                | '八'
                | '九'
                | '十'
                | '百'
                | '千'
                | '万'
                | '億'
                | '兆'
        )
}

/// Controls for [`normalize_tokens`].
#[derive(Debug, Clone)]
pub struct NormalizationConfig {
    convert_numerals: bool,
    strip_symbols: BTreeSet<char>,
    lowercase_latin: bool,
}

impl NormalizationConfig {
    pub fn new(
        convert_numerals: bool,
        strip_symbols: impl IntoIterator<Item = char>,
        lowercase_latin: bool,
    ) -> Result<NormalizationConfig> {
        let strip_symbols: BTreeSet<char> = strip_symbols.into_iter().collect();
        if let Some(c) = strip_symbols.iter().find(|c| is_numeral_char(**c)) {
            return Err(Error::invalid(format!(
                "strip_symbols may not contain numeral character {c:?}"
            )));
        }
        Ok(NormalizationConfig {
            convert_numerals,
            strip_symbols,
            lowercase_latin,
        })
    }

    pub fn convert_numerals(&self) -> bool {
        self.convert_numerals
    }

    pub fn strip_symbols(&self) -> &BTreeSet<char> {
        &self.strip_symbols
    }

    pub fn lowercase_latin(&self) -> bool {
        self.lowercase_latin
    }
}

impl Default for NormalizationConfig {
    fn default() -> Self {
        NormalizationConfig {
            convert_numerals: true,
            strip_symbols: BTreeSet::new(),
            lowercase_latin: false,
        }
    }
}

/// Hook for re-inferring a reading after normalization changed a surface.
/// The default implementation infers nothing, so rewritten tokens simply
/// lose their stale reading.
pub trait ReadingInference {
    fn infer(&self, token: &Token) -> Option<String>;
}

/// Default hook: never infers a reading.
pub struct NoReadingInference;

impl ReadingInference for NoReadingInference {
    fn infer(&self, _token: &Token) -> Option<String> {
        None
    }
}

/// Exclusive upper bound accepted by [`arabic_to_kanji`]: 10^16.
pub const KANJI_NUMERAL_LIMIT: u64 = 10_000_000_000_000_000;

const KANJI_DIGITS: [char; 10] = ['〇', '一', '二', '三', '四', '五', '六', '七', '八', '九'];
const MYRIAD_UNITS: [&str; 4] = ["", "万", "億", "兆"];

fn render_group(group: u64, out: &mut String) {
    debug_assert!((1..=9999).contains(&group));
    let units = [(1000, '千'), (100, '百'), (10, '十')];
    let mut rest = group;
    for (value, unit) in units {
        let digit = rest / value;
        rest %= value;
        if digit == 0 {
            continue;
        }
        // 十/百/千 omit a leading 一.
        if digit > 1 {
            out.push(KANJI_DIGITS[digit as usize]);
        }
        out.push(unit);
    }
    if rest > 0 {
        out.push(KANJI_DIGITS[rest as usize]);
    }
}

/// Renders a non-negative integer below 10^16 as a positional Kanji numeral
/// with myriad grouping (万/億/兆). Zero is 〇.
pub fn arabic_to_kanji(n: u64) -> Result<String> {
    if n >= KANJI_NUMERAL_LIMIT {
        return Err(Error::OutOfRange(format!(
            "{n} is not below {KANJI_NUMERAL_LIMIT}"
        )));
    }
    if n == 0 {
        return Ok(KANJI_DIGITS[0].to_string());
    }
    let mut groups = [0u64; 4];
    let mut rest = n;
    for g in groups.iter_mut() {
        *g = rest % 10_000;
        rest /= 10_000;
    }
    let mut out = String::new();
    for idx in (0..4).rev() {
        if groups[idx] == 0 {
            continue;
        }
        render_group(groups[idx], &mut out);
        out.push_str(MYRIAD_UNITS[idx]);
    }
    Ok(out)
}

fn kanji_digit_value(c: char) -> Option<u64> {
    KANJI_DIGITS.iter().position(|d| *d == c).map(|v| v as u64)
}

fn numeral_err(text: &str, reason: impl Into<String>) -> Error {
    Error::Numeral {
        text: text.to_string(),
        reason: reason.into(),
    }
}

/// Parses a well-formed positional Kanji numeral back to its integer value.
/// This is the inverse of [`arabic_to_kanji`] and doubles as its test oracle.
pub fn kanji_to_int(s: &str) -> Result<u64> {
    if s.is_empty() {
        return Err(numeral_err(s, "empty string"));
    }
    if s == "〇" {
        return Ok(0);
    }

    let mut total: u64 = 0;
    let mut section: u64 = 0;
    let mut pending: Option<u64> = None;
    // Positions must strictly descend inside a section and across myriads.
    let mut last_sub_unit: u64 = u64::MAX;
    let mut last_myriad: u64 = u64::MAX;

    for c in s.chars() {
        if c == '〇' {
            return Err(numeral_err(s, "〇 only denotes a standalone zero"));
        }
        if let Some(d) = kanji_digit_value(c) {
            if pending.is_some() {
                return Err(numeral_err(s, "two consecutive digit characters"));
            }
            pending = Some(d);
        } else if let Some(unit) = match c {
            '十' => Some(10),
            '百' => Some(100),
            '千' => Some(1000),
            _ => None,
        } {
            if unit >= last_sub_unit {
                return Err(numeral_err(s, format!("unit {c} out of order")));
            }
            let digit = pending.take().unwrap_or(1);
            if digit == 0 {
                return Err(numeral_err(s, "zero digit before unit"));
            }
            section += digit * unit;
            last_sub_unit = unit;
        } else if let Some(myriad) = match c {
            '万' => Some(10_000u64),
            '億' => Some(100_000_000),
            '兆' => Some(1_000_000_000_000),
            _ => None,
        } {
            if myriad >= last_myriad {
                return Err(numeral_err(s, format!("myriad {c} out of order")));
            }
            section += pending.take().unwrap_or(0);
            if section == 0 {
                return Err(numeral_err(s, format!("myriad {c} with empty section")));
            }
            total += section * myriad;
            section = 0;
            last_sub_unit = u64::MAX;
            last_myriad = myriad;
        } else {
            return Err(numeral_err(s, format!("unexpected character {c:?}")));
        }
    }

    total += section + pending.unwrap_or(0);
    Ok(total)
}

/// Interprets a token surface as a decimal number if it consists solely of
/// ASCII or full-width digits. Returns (value, digit count).
fn parse_decimal_surface(surface: &str) -> Option<(u64, usize)> {
    let mut value: u64 = 0;
    let mut digits = 0usize;
    for c in surface.chars() {
        let d = if c.is_ascii_digit() {
            c as u64 - '0' as u64
        } else if ('０'..='９').contains(&c) {
            c as u64 - '０' as u64
        } else {
            return None;
        };
        digits += 1;
        if digits > 16 {
            // Would be ≥ 10^16; leave such tokens unconverted.
            return None;
        }
        value = value * 10 + d;
    }
    if digits == 0 {
        None
    } else {
        Some((value, digits))
    }
}

/// Normalizes a token sequence with the default reading hook.
pub fn normalize_tokens(raw: &[Token], cfg: &NormalizationConfig) -> Vec<Token> {
    normalize_tokens_with(raw, cfg, &NoReadingInference)
}

/// Normalizes a token sequence:
/// * symbols listed in the config are deleted; tokens that become empty are
///   dropped,
/// * multi-digit Arabic-numeral tokens become Kanji numerals with
///   pos=number,
/// * Latin letters are optionally lowercased.
///
/// Surviving tokens keep their input order. Readings are kept only when the
/// surface is unchanged; otherwise the hook decides.
pub fn normalize_tokens_with(
    raw: &[Token],
    cfg: &NormalizationConfig,
    hook: &dyn ReadingInference,
) -> Vec<Token> {
    let mut out = Vec::with_capacity(raw.len());
    for token in raw {
        let stripped: String = token
            .surface()
            .chars()
            .filter(|c| !cfg.strip_symbols.contains(c))
            .collect();
        if stripped.is_empty() {
            continue;
        }

        if cfg.convert_numerals {
            if let Some((value, digits)) = parse_decimal_surface(&stripped) {
                if digits >= 2 {
                    let kanji = arabic_to_kanji(value).expect("digit guard keeps value in range");
                    let mut converted =
                        Token::new(kanji, PosTag::Number).expect("kanji surface is valid");
                    converted.reading = hook.infer(&converted);
                    out.push(converted);
                    continue;
                }
            }
        }

        let folded: String = if cfg.lowercase_latin {
            stripped
                .chars()
                .map(|c| {
                    if c.is_ascii_uppercase() {
                        c.to_ascii_lowercase()
                    } else {
                        c
                    }
                })
                .collect()
        } else {
            stripped
        };

        let mut kept = Token {
            surface: folded,
            reading: None,
            pos: token.pos,
        };
        kept.reading = if kept.surface == token.surface {
            token.reading.clone()
        } else {
            hook.infer(&kept)
        };
        out.push(kept);
    }
    out
}
