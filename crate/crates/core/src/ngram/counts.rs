//! N-gram counting with sentence-boundary padding.

use std::collections::HashMap;

use crate::error::{Error, Result};

use super::{Vocab, BOS, EOS};

/// Raw n-gram counts for every order up to `order`, over sentences padded
/// with `<s>` and `</s>`.
#[derive(Debug, Clone)]
pub struct CountTable {
    pub(super) order: usize,
    pub(super) vocab: Vocab,
    /// `tables[k]` holds the (k+1)-gram counts.
    pub(super) tables: Vec<HashMap<Box<[u32]>, u64>>,
}

impl CountTable {
    pub fn order(&self) -> usize {
        self.order
    }

    /// Count of one n-gram, addressed by surfaces. Unknown surfaces have
    /// count zero everywhere.
    pub fn count(&self, gram: &[&str]) -> u64 {
        if gram.is_empty() || gram.len() > self.order {
            return 0;
        }
        let mut ids = Vec::with_capacity(gram.len());
        for w in gram {
            match self.vocab.lookup(w) {
                Some(id) => ids.push(id),
                None => return 0,
            }
        }
        self.tables[gram.len() - 1]
            .get(ids.as_slice())
            .copied()
            .unwrap_or(0)
    }

    /// Number of distinct n-grams of the given order.
    pub fn distinct(&self, order: usize) -> usize {
        if order == 0 || order > self.order {
            0
        } else {
            self.tables[order - 1].len()
        }
    }

    /// Distinct non-reserved token types seen in the corpus.
    pub fn content_types(&self) -> usize {
        self.vocab.len().saturating_sub(3)
    }
}

/// Counts all n-grams of length 1..=order with `<s>`/`</s>` padding.
///
/// For every n-gram of length k < order, its count equals the sum of the
/// counts of its (k+1)-token extensions plus its occurrences at sentence
/// end; the padding makes that identity hold everywhere.
pub fn count_ngrams<S: AsRef<str>>(corpus: &[Vec<S>], order: usize) -> Result<CountTable> {
    if order < 1 {
        return Err(Error::invalid("n-gram order must be at least 1"));
    }
    if corpus.is_empty() {
        return Err(Error::invalid("corpus must contain at least one sentence"));
    }

    let mut vocab = Vocab::new();
    let mut tables: Vec<HashMap<Box<[u32]>, u64>> = vec![HashMap::new(); order];

    let mut padded: Vec<u32> = Vec::new();
    for sentence in corpus {
        padded.clear();
        padded.push(BOS);
        for token in sentence {
            padded.push(vocab.intern(token.as_ref()));
        }
        padded.push(EOS);

        for k in 1..=order {
            for window in padded.windows(k) {
                *tables[k - 1].entry(window.into()).or_insert(0) += 1;
            }
        }
    }

    Ok(CountTable {
        order,
        vocab,
        tables,
    })
}
