//! ARPA backoff text format.
//!
//! Layout written here (and expected back by the parser):
//!
//! ```text
//! \data\
//! ngram 1=<count>
//! ...
//!
//! \1-grams:
//! <log10 prob>\t<w1 ... wn>\t<log10 backoff>
//! ...
//!
//! \<order>-grams:
//! <log10 prob>\t<w1 ... wn>
//!
//! \end\
//! ```
//!
//! Probabilities print with six decimals; the backoff field appears on every
//! entry below the top order. Writing is deterministic (entries sorted by
//! surface), so write -> read -> write is byte-identical.

use std::collections::HashMap;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

use super::{Entry, NGramModel, Vocab};

pub fn write_arpa(model: &NGramModel, out: &mut impl Write) -> io::Result<()> {
    writeln!(out, "\\data\\")?;
    for n in 1..=model.order() {
        writeln!(out, "ngram {n}={}", model.entry_count(n))?;
    }
    for n in 1..=model.order() {
        writeln!(out, "\n\\{n}-grams:")?;
        for (words, logp, bow) in model.grams_sorted(n) {
            let gram = words.join(" ");
            if n < model.order() {
                writeln!(out, "{logp:.6}\t{gram}\t{:.6}", bow.unwrap_or(0.0))?;
            } else {
                writeln!(out, "{logp:.6}\t{gram}")?;
            }
        }
    }
    writeln!(out, "\n\\end\\")?;
    Ok(())
}

pub fn to_arpa_string(model: &NGramModel) -> String {
    let mut buf = Vec::new();
    write_arpa(model, &mut buf).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("ARPA output is UTF-8")
}

pub fn save_arpa(model: &NGramModel, path: impl AsRef<Path>) -> Result<()> {
    let mut file = BufWriter::new(File::create(path.as_ref())?);
    write_arpa(model, &mut file)?;
    Ok(())
}

pub fn load_arpa(path: impl AsRef<Path>) -> Result<NGramModel> {
    let file = BufReader::new(File::open(path.as_ref())?);
    read_arpa_named(file, &path.as_ref().display().to_string())
}

pub fn read_arpa(reader: impl BufRead) -> Result<NGramModel> {
    read_arpa_named(reader, "<arpa>")
}

fn read_arpa_named(reader: impl BufRead, name: &str) -> Result<NGramModel> {
    let fail = |line: usize, msg: String| Error::parse(name, line, msg);

    let mut lines = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        lines.push((idx + 1, line.map_err(Error::Io)?));
    }
    let mut it = lines.iter().filter(|(_, l)| !l.trim().is_empty());

    match it.next() {
        Some((_, l)) if l.trim() == "\\data\\" => {}
        other => {
            let line = other.map(|(n, _)| *n).unwrap_or(0);
            return Err(fail(line, "expected \\data\\ header".into()));
        }
    }

    // ngram N=count declarations.
    let mut declared: Vec<(usize, usize)> = Vec::new();
    let mut cursor = it.next();
    while let Some((lineno, line)) = cursor {
        let line = line.trim();
        if !line.starts_with("ngram ") {
            break;
        }
        let rest = &line["ngram ".len()..];
        let (n, count) = rest
            .split_once('=')
            .ok_or_else(|| fail(*lineno, format!("malformed declaration {line:?}")))?;
        let n: usize = n
            .trim()
            .parse()
            .map_err(|_| fail(*lineno, format!("bad order in {line:?}")))?;
        let count: usize = count
            .trim()
            .parse()
            .map_err(|_| fail(*lineno, format!("bad count in {line:?}")))?;
        declared.push((n, count));
        cursor = it.next();
    }
    if declared.is_empty() {
        return Err(fail(0, "no ngram declarations".into()));
    }
    let order = declared.len();
    for (idx, (n, _)) in declared.iter().enumerate() {
        if *n != idx + 1 {
            return Err(fail(0, format!("orders must be 1..{order} in sequence")));
        }
    }

    let mut vocab = Vocab::new();
    let mut entries: Vec<HashMap<Box<[u32]>, Entry>> = vec![HashMap::new(); order];
    let mut current: Option<usize> = None;

    loop {
        let Some((lineno, raw)) = cursor else {
            return Err(fail(lines.len(), "missing \\end\\".into()));
        };
        let line = raw.trim();
        if line == "\\end\\" {
            break;
        }
        if let Some(section) = line.strip_prefix('\\').and_then(|s| s.strip_suffix("-grams:")) {
            let n: usize = section
                .parse()
                .map_err(|_| fail(*lineno, format!("bad section header {line:?}")))?;
            if n == 0 || n > order {
                return Err(fail(*lineno, format!("section {n} out of declared range")));
            }
            current = Some(n);
            cursor = it.next();
            continue;
        }
        let n =
            current.ok_or_else(|| fail(*lineno, format!("entry {line:?} outside a section")))?;
        let mut fields = line.split('\t');
        let logp: f64 = fields
            .next()
            .and_then(|f| f.parse().ok())
            .ok_or_else(|| fail(*lineno, "missing log10 probability".into()))?;
        let words = fields
            .next()
            .ok_or_else(|| fail(*lineno, "missing n-gram tokens".into()))?;
        let bow: Option<f64> = match fields.next() {
            Some(f) => Some(
                f.parse()
                    .map_err(|_| fail(*lineno, format!("bad backoff {f:?}")))?,
            ),
            None => None,
        };
        if n == order && bow.is_some() {
            return Err(fail(*lineno, "top-order entries carry no backoff".into()));
        }
        let ids: Vec<u32> = words.split(' ').map(|w| vocab.intern(w)).collect();
        if ids.len() != n {
            return Err(fail(
                *lineno,
                format!("expected {n} tokens, found {}", ids.len()),
            ));
        }
        let bow = if n < order { Some(bow.unwrap_or(0.0)) } else { None };
        entries[n - 1].insert(ids.into(), Entry { logp, bow });
        cursor = it.next();
    }

    for (n, count) in &declared {
        if entries[n - 1].len() != *count {
            return Err(Error::Format(format!(
                "{name}: declared {count} {n}-grams, found {}",
                entries[n - 1].len()
            )));
        }
    }

    Ok(NGramModel {
        order,
        vocab,
        entries,
        discounts: Vec::new(),
    })
}
