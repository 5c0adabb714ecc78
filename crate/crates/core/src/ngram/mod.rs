//! Backoff n-gram language models with modified Kneser-Ney smoothing.
//!
//! The models here are the "biased LM" building block of the extraction
//! pipeline: small closed-vocabulary models trained on exactly the subtitle
//! text they will decode against. Probabilities and backoff weights are
//! stored in log10, matching the ARPA interchange format in [`arpa`].

mod arpa;
mod counts;
mod interp;

pub use arpa::{load_arpa, read_arpa, save_arpa, to_arpa_string, write_arpa};
pub use counts::{count_ngrams, CountTable};
pub use interp::{interpolate_em, InterpolationResult, EM_DEFAULT_MAX_ITER, EM_DEFAULT_TOL};

use std::collections::{HashMap, HashSet};

use crate::error::{Error, Result};

pub const BOS_TOKEN: &str = "<s>";
pub const EOS_TOKEN: &str = "</s>";
pub const UNK_TOKEN: &str = "<unk>";

pub(crate) const BOS: u32 = 0;
pub(crate) const EOS: u32 = 1;
pub(crate) const UNK: u32 = 2;

/// Probabilities of zero are stored as this log10 sentinel.
const LOG10_SENTINEL: f64 = -99.0;

#[derive(Debug, Clone)]
pub(crate) struct Vocab {
    words: Vec<String>,
    index: HashMap<String, u32>,
}

impl Vocab {
    fn new() -> Vocab {
        let mut v = Vocab {
            words: Vec::new(),
            index: HashMap::new(),
        };
        for reserved in [BOS_TOKEN, EOS_TOKEN, UNK_TOKEN] {
            v.intern(reserved);
        }
        v
    }

    fn intern(&mut self, s: &str) -> u32 {
        if let Some(&id) = self.index.get(s) {
            return id;
        }
        let id = self.words.len() as u32;
        self.words.push(s.to_string());
        self.index.insert(s.to_string(), id);
        id
    }

    fn lookup(&self, s: &str) -> Option<u32> {
        self.index.get(s).copied()
    }

    fn surface(&self, id: u32) -> &str {
        &self.words[id as usize]
    }

    fn len(&self) -> usize {
        self.words.len()
    }
}

/// The three count-dependent discounts of one order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscountSet {
    pub d1: f64,
    pub d2: f64,
    pub d3plus: f64,
    /// True when degenerate count-of-counts forced the absolute-discount
    /// fallback (D = 0.5 for every count).
    pub fallback: bool,
}

impl DiscountSet {
    /// Closed-form discounts from the count-of-counts. The full formulas
    /// need n1..n4 all positive; any zero among them would push a discount
    /// to (or past) the count it applies to and zero out probabilities, so
    /// such orders fall back to absolute discounting with D = 0.5.
    fn from_count_of_counts(order: usize, n1: u64, n2: u64, n3: u64, n4: u64) -> DiscountSet {
        if n1 == 0 || n2 == 0 || n3 == 0 || n4 == 0 {
            if n1 + n2 + n3 + n4 > 0 {
                log::warn!(
                    "order-{order} count-of-counts degenerate \
                     (n1={n1} n2={n2} n3={n3} n4={n4}); using absolute discount 0.5"
                );
            }
            return DiscountSet {
                d1: 0.5,
                d2: 0.5,
                d3plus: 0.5,
                fallback: true,
            };
        }
        let y = n1 as f64 / (n1 as f64 + 2.0 * n2 as f64);
        DiscountSet {
            d1: 1.0 - 2.0 * y * n2 as f64 / n1 as f64,
            d2: (2.0 - 3.0 * y * n3 as f64 / n2 as f64).max(0.0),
            d3plus: (3.0 - 4.0 * y * n4 as f64 / n3 as f64).max(0.0),
            fallback: false,
        }
    }

    pub fn for_count(&self, count: u64) -> f64 {
        if self.fallback {
            return 0.5;
        }
        match count {
            0 => 0.0,
            1 => self.d1,
            2 => self.d2,
            _ => self.d3plus,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Entry {
    logp: f64,
    bow: Option<f64>,
}

/// A backoff n-gram model over log10 probabilities.
#[derive(Debug, Clone)]
pub struct NGramModel {
    order: usize,
    vocab: Vocab,
    /// `entries[k]` holds the (k+1)-gram entries.
    entries: Vec<HashMap<Box<[u32]>, Entry>>,
    /// Populated by estimation; empty for models parsed from ARPA.
    discounts: Vec<DiscountSet>,
}

fn log10_floor(p: f64) -> f64 {
    if p > 0.0 {
        let l = p.log10().max(LOG10_SENTINEL);
        if l == 0.0 {
            0.0
        } else {
            l
        }
    } else {
        LOG10_SENTINEL
    }
}

impl NGramModel {
    pub fn order(&self) -> usize {
        self.order
    }

    /// Distinct entries at the given n-gram order.
    pub fn entry_count(&self, order: usize) -> usize {
        if order == 0 || order > self.order {
            0
        } else {
            self.entries[order - 1].len()
        }
    }

    /// Non-reserved vocabulary, sorted.
    pub fn content_vocab(&self) -> Vec<&str> {
        let mut words: Vec<&str> = self
            .vocab
            .words
            .iter()
            .skip(3)
            .map(String::as_str)
            .collect();
        words.sort_unstable();
        words
    }

    /// (log10 prob, log10 backoff) of one stored n-gram, by surfaces.
    pub fn entry(&self, gram: &[&str]) -> Option<(f64, Option<f64>)> {
        if gram.is_empty() || gram.len() > self.order {
            return None;
        }
        let ids: Option<Vec<u32>> = gram.iter().map(|w| self.vocab.lookup(w)).collect();
        let ids = ids?;
        self.entries[gram.len() - 1]
            .get(ids.as_slice())
            .map(|e| (e.logp, e.bow))
    }

    /// All stored n-grams of one order, sorted by surface strings — the
    /// serialization order.
    pub fn grams_sorted(&self, order: usize) -> Vec<(Vec<&str>, f64, Option<f64>)> {
        if order == 0 || order > self.order {
            return Vec::new();
        }
        let mut grams: Vec<(Vec<&str>, f64, Option<f64>)> = self.entries[order - 1]
            .iter()
            .map(|(g, e)| {
                let words: Vec<&str> = g.iter().map(|&id| self.vocab.surface(id)).collect();
                (words, e.logp, e.bow)
            })
            .collect();
        grams.sort_unstable_by(|a, b| a.0.cmp(&b.0));
        grams
    }

    pub fn discounts(&self, order: usize) -> Option<DiscountSet> {
        self.discounts.get(order.wrapping_sub(1)).copied()
    }

    fn word_id(&self, s: &str) -> u32 {
        self.vocab.lookup(s).unwrap_or(UNK)
    }

    fn resolve_log10(&self, context: &[u32], word: u32) -> f64 {
        let start = context.len().saturating_sub(self.order - 1);
        let mut ctx = &context[start..];
        let mut bows = 0.0;
        let mut key: Vec<u32> = Vec::with_capacity(ctx.len() + 1);
        loop {
            key.clear();
            key.extend_from_slice(ctx);
            key.push(word);
            if let Some(e) = self.entries[key.len() - 1].get(key.as_slice()) {
                return bows + e.logp;
            }
            if ctx.is_empty() {
                // Unknown word: the <unk> unigram always exists in models
                // built here; a parsed model without one scores the sentinel.
                let unk = self.entries[0]
                    .get(&[UNK][..])
                    .map(|e| e.logp)
                    .unwrap_or(LOG10_SENTINEL);
                return bows + unk;
            }
            bows += self.entries[ctx.len() - 1]
                .get(ctx)
                .and_then(|e| e.bow)
                .unwrap_or(0.0);
            ctx = &ctx[1..];
        }
    }

    /// log10 P(word | context) with backoff; OOV tokens map to `<unk>`.
    pub fn cond_log10p(&self, context: &[&str], word: &str) -> f64 {
        let ctx: Vec<u32> = context.iter().map(|w| self.word_id(w)).collect();
        self.resolve_log10(&ctx, self.word_id(word))
    }

    /// Linear-probability variant of [`Self::cond_log10p`].
    pub fn cond_prob(&self, context: &[&str], word: &str) -> f64 {
        10f64.powf(self.cond_log10p(context, word))
    }

    /// Sum of backoff-resolved log10 conditional probabilities of the
    /// sequence, including the `</s>` transition. The empty sequence scores
    /// log10 P(`</s>` | `<s>`).
    pub fn sequence_log10prob<S: AsRef<str>>(&self, tokens: &[S]) -> f64 {
        let mut hist: Vec<u32> = vec![BOS];
        let mut total = 0.0;
        for t in tokens {
            let id = self.word_id(t.as_ref());
            total += self.resolve_log10(&hist, id);
            hist.push(id);
        }
        total += self.resolve_log10(&hist, EOS);
        total
    }

    /// Corpus perplexity: 10^(-LL / transitions), `</s>` included.
    pub fn perplexity<S: AsRef<str>>(&self, corpus: &[Vec<S>]) -> f64 {
        let mut ll = 0.0;
        let mut transitions = 0usize;
        for sentence in corpus {
            ll += self.sequence_log10prob(sentence);
            transitions += sentence.len() + 1;
        }
        if transitions == 0 {
            return f64::INFINITY;
        }
        10f64.powf(-ll / transitions as f64)
    }

    /// Every surface in the model's vocabulary, reserved tokens included.
    pub fn vocab_surfaces(&self) -> impl Iterator<Item = &str> {
        self.vocab.words.iter().map(String::as_str)
    }

    /// Checks that for every stored context the conditional distribution
    /// over the full vocabulary sums to 1 within `tol`.
    pub fn validate_normalization(&self, tol: f64) -> Result<()> {
        for ctx_len in 0..self.order {
            let mut contexts: HashSet<&[u32]> = HashSet::new();
            if ctx_len == 0 {
                contexts.insert(&[]);
            } else {
                for g in self.entries[ctx_len].keys() {
                    contexts.insert(&g[..ctx_len]);
                }
            }
            for ctx in contexts {
                let mut sum = 0.0;
                for id in 0..self.vocab.len() as u32 {
                    sum += 10f64.powf(self.resolve_log10(ctx, id));
                }
                if (sum - 1.0).abs() > tol {
                    let words: Vec<&str> = ctx.iter().map(|&id| self.vocab.surface(id)).collect();
                    return Err(Error::Integrity(format!(
                        "context {words:?} sums to {sum} (|delta| > {tol})"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Removes higher-order entries with probability below `threshold`,
    /// keeping unigrams and any n-gram that is the context of a surviving
    /// longer entry. Backoff weights of contexts that lost children are
    /// recomputed so normalization still holds; surviving probabilities are
    /// untouched.
    pub fn prune(&self, threshold: f64) -> Result<NGramModel> {
        if !(threshold > 0.0 && threshold < 1.0) {
            return Err(Error::invalid(format!(
                "prune threshold must be in (0, 1), got {threshold}"
            )));
        }
        let log_thr = threshold.log10();
        let mut pruned = self.clone();

        // Decide removals from the top order down; contexts of survivors are
        // preserved regardless of their own probability.
        let mut dirty: Vec<HashSet<Box<[u32]>>> = vec![HashSet::new(); self.order];
        for n in (2..=self.order).rev() {
            let needed: HashSet<Box<[u32]>> = if n < self.order {
                pruned.entries[n].keys().map(|g| g[..n].into()).collect()
            } else {
                HashSet::new()
            };
            let before: Vec<Box<[u32]>> = pruned.entries[n - 1].keys().cloned().collect();
            for gram in before {
                let e = pruned.entries[n - 1][&gram];
                if e.logp < log_thr && !needed.contains(&gram) {
                    pruned.entries[n - 1].remove(&gram);
                    dirty[n - 2].insert(gram[..n - 1].into());
                }
            }
        }

        // Recompute backoff weights bottom-up for contexts that lost
        // children. num/den keeps the distribution summing to one exactly.
        for ctx_len in 1..self.order {
            let dirty_ctxs: Vec<Box<[u32]>> = dirty[ctx_len - 1].iter().cloned().collect();
            for ctx in dirty_ctxs {
                if !pruned.entries[ctx_len - 1].contains_key(&ctx) {
                    continue; // context itself pruned along with all children
                }
                let children: Vec<(u32, f64)> = pruned.entries[ctx_len]
                    .iter()
                    .filter(|(g, _)| g[..ctx_len] == ctx[..])
                    .map(|(g, e)| (g[ctx_len], e.logp))
                    .collect();
                let bow = if children.is_empty() {
                    None
                } else {
                    let mut num = 1.0;
                    let mut den = 1.0;
                    for (w, logp) in &children {
                        num -= 10f64.powf(*logp);
                        den -= 10f64.powf(pruned.resolve_log10(&ctx[1..], *w));
                    }
                    if num <= 0.0 || den <= 0.0 {
                        log::warn!("pruned context leaves no backoff mass; pinning bow to 1");
                        Some(0.0)
                    } else {
                        Some(log10_floor(num / den))
                    }
                };
                pruned
                    .entries[ctx_len - 1]
                    .get_mut(&ctx)
                    .expect("checked above")
                    .bow = bow;
            }
        }

        Ok(pruned)
    }
}

/// Trains a modified Kneser-Ney model from a count table.
///
/// Lower orders use continuation counts (n-grams starting with `<s>` keep
/// raw counts), discounts come from the Chen-Goodman closed forms per order,
/// and the leftover unigram mass goes to `<unk>`. The result is a closed
/// vocabulary built from the counts themselves.
pub fn estimate_mkn(counts: &CountTable) -> Result<NGramModel> {
    if counts.content_types() < 2 {
        return Err(Error::invalid(
            "estimate_mkn needs at least 2 distinct tokens",
        ));
    }
    let order = counts.order;

    // Adjusted counts: raw at the top order, continuation counts below.
    let mut adjusted: Vec<HashMap<Box<[u32]>, u64>> = Vec::with_capacity(order);
    for n in 1..=order {
        if n == order {
            let mut table = counts.tables[n - 1].clone();
            if n == 1 {
                table.remove(&[BOS][..]);
            }
            adjusted.push(table);
            continue;
        }
        let mut table: HashMap<Box<[u32]>, u64> = HashMap::new();
        for gram in counts.tables[n].keys() {
            let suffix = &gram[1..];
            debug_assert_ne!(suffix[0], BOS, "<s> cannot be a continuation");
            *table.entry(suffix.into()).or_insert(0) += 1;
        }
        for (gram, &c) in &counts.tables[n - 1] {
            if gram[0] == BOS && !(n == 1) {
                table.insert(gram.clone(), c);
            }
        }
        debug_assert_eq!(
            table.len(),
            counts.tables[n - 1].len() - if n == 1 { 1 } else { 0 },
            "adjusted counts must cover the raw support"
        );
        adjusted.push(table);
    }

    let mut discounts: Vec<DiscountSet> = Vec::with_capacity(order);
    for (idx, table) in adjusted.iter().enumerate() {
        let (mut n1, mut n2, mut n3, mut n4) = (0u64, 0u64, 0u64, 0u64);
        for &c in table.values() {
            match c {
                1 => n1 += 1,
                2 => n2 += 1,
                3 => n3 += 1,
                4 => n4 += 1,
                _ => {}
            }
        }
        discounts.push(DiscountSet::from_count_of_counts(idx + 1, n1, n2, n3, n4));
    }

    let mut model = NGramModel {
        order,
        vocab: counts.vocab.clone(),
        entries: vec![HashMap::new(); order],
        discounts,
    };

    // Unigram distribution; leftover discount mass goes to <unk>. A linear
    // shadow of the previous order keeps interpolation free of log/pow
    // round-trips during construction.
    let mut linear_prev: HashMap<Box<[u32]>, f64> = HashMap::new();
    {
        let d = model.discounts[0];
        let total: u64 = adjusted[0].values().sum();
        let total = total as f64;
        let mut leftover = 0.0;
        let mut unk_base = 0.0;
        for (gram, &c) in &adjusted[0] {
            let disc = d.for_count(c);
            leftover += disc / total;
            let p = (c as f64 - disc) / total;
            if gram[0] == UNK {
                unk_base = p;
                continue;
            }
            model.entries[0].insert(
                gram.clone(),
                Entry {
                    logp: log10_floor(p),
                    bow: None,
                },
            );
            linear_prev.insert(gram.clone(), p);
        }
        let unk_p = unk_base + leftover;
        model.entries[0].insert(
            Box::from([UNK]),
            Entry {
                logp: log10_floor(unk_p),
                bow: None,
            },
        );
        linear_prev.insert(Box::from([UNK]), unk_p);
        model.entries[0].insert(
            Box::from([BOS]),
            Entry {
                logp: LOG10_SENTINEL,
                bow: None,
            },
        );
        linear_prev.insert(Box::from([BOS]), 10f64.powf(LOG10_SENTINEL));
    }

    for n in 2..=order {
        let d = model.discounts[n - 1];
        let mut ctx_totals: HashMap<&[u32], u64> = HashMap::new();
        let mut gamma_mass: HashMap<&[u32], f64> = HashMap::new();
        for (gram, &c) in &adjusted[n - 1] {
            let ctx = &gram[..n - 1];
            *ctx_totals.entry(ctx).or_insert(0) += c;
            *gamma_mass.entry(ctx).or_insert(0.0) += d.for_count(c);
        }

        let mut linear_cur: HashMap<Box<[u32]>, f64> = HashMap::with_capacity(adjusted[n - 1].len());
        for (gram, &c) in &adjusted[n - 1] {
            let ctx = &gram[..n - 1];
            let total = ctx_totals[ctx] as f64;
            let gamma = gamma_mass[ctx] / total;
            // The suffix of an observed n-gram is always an observed
            // (n-1)-gram, so the linear shadow has it.
            let lower = linear_prev
                .get(&gram[1..])
                .copied()
                .expect("suffix must be a lower-order entry");
            let p = (c as f64 - d.for_count(c)) / total + gamma * lower;
            model.entries[n - 1].insert(
                gram.clone(),
                Entry {
                    logp: log10_floor(p),
                    bow: None,
                },
            );
            linear_cur.insert(gram.clone(), p);
        }

        for (ctx, mass) in gamma_mass {
            let gamma = mass / ctx_totals[ctx] as f64;
            model
                .entries[n - 2]
                .get_mut(ctx)
                .expect("context of an observed n-gram must be an entry")
                .bow = Some(log10_floor(gamma));
        }

        // Backoff-resolved linear shadow for the next order: only direct
        // entries are ever needed (suffix closure), so reuse linear_cur.
        linear_prev = linear_cur;
    }

    Ok(model)
}

/// Composes counting and estimation over exactly the provided texts: the
/// "biased LM" used to decode the audio those texts belong to.
pub fn build_biased_lm<S: AsRef<str>>(texts: &[Vec<S>], order: usize) -> Result<NGramModel> {
    if texts.is_empty() {
        return Err(Error::invalid("biased LM needs at least one text"));
    }
    estimate_mkn(&count_ngrams(texts, order)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sents(raw: &[&str]) -> Vec<Vec<String>> {
        raw.iter()
            .map(|s| s.split_whitespace().map(String::from).collect())
            .collect()
    }

    #[test]
    fn unigram_abab_matches_hand_computed_values() {
        // Counts {a:2, b:2, </s>:1}: count-of-counts n3 = 0 forces the
        // absolute-discount fallback, so with T = 5 and D = 0.5:
        //   P(a) = P(b) = 1.5/5, P(</s>) = 0.5/5, P(<unk>) = 3*0.5/5.
        let counts = count_ngrams(&sents(&["a b a b"]), 1).unwrap();
        let model = estimate_mkn(&counts).unwrap();
        assert!(model.discounts(1).unwrap().fallback);
        let p = |w: &str| model.cond_prob(&[], w);
        assert!((p("a") - 0.3).abs() < 1e-12);
        assert!((p("b") - 0.3).abs() < 1e-12);
        assert!((p("</s>") - 0.1).abs() < 1e-12);
        assert!((p("<unk>") - 0.3).abs() < 1e-12);
        model.validate_normalization(1e-9).unwrap();
    }

    #[test]
    fn trigram_model_normalizes_and_beats_uniform() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let vocab = ["ao", "ike", "umi", "sora", "kaze"];
        let corpus: Vec<Vec<String>> = (0..100)
            .map(|_| {
                (0..rng.random_range(3..9))
                    .map(|_| vocab[rng.random_range(0..vocab.len())].to_string())
                    .collect()
            })
            .collect();
        let model = build_biased_lm(&corpus, 3).unwrap();
        model.validate_normalization(1e-9).unwrap();

        let trained_ppl = model.perplexity(&corpus);
        // Uniform over the 5 content types plus </s> and <unk>.
        let uniform_ppl = 7.0;
        assert!(
            trained_ppl < uniform_ppl,
            "trained {trained_ppl} vs uniform {uniform_ppl}"
        );
    }

    #[test]
    fn discounts_stay_below_the_counts_they_apply_to() {
        let corpus = sents(&[
            "a b c a b",
            "b c a a a b",
            "c c b a b a",
            "a b a b c c c a",
        ]);
        let model = estimate_mkn(&count_ngrams(&corpus, 3).unwrap()).unwrap();
        for n in 1..=3usize {
            let d = model.discounts(n).unwrap();
            for c in 1..=20u64 {
                assert!(
                    d.for_count(c) < c as f64,
                    "order {n} discount {} for count {c}",
                    d.for_count(c)
                );
            }
        }
    }

    #[test]
    fn sequence_scoring_boundary_cases() {
        let model = build_biased_lm(&sents(&["a b", "b a"]), 2).unwrap();
        let empty: [&str; 0] = [];
        let expected = model.cond_log10p(&["<s>"], "</s>");
        assert!((model.sequence_log10prob(&empty) - expected).abs() < 1e-12);

        let training = ["a", "b"];
        let lp = model.sequence_log10prob(&training);
        assert!(lp.is_finite() && lp < 0.0);
        let chained = model.cond_log10p(&["<s>"], "a")
            + model.cond_log10p(&["<s>", "a"], "b")
            + model.cond_log10p(&["a", "b"], "</s>");
        assert!((lp - chained).abs() < 1e-12);
    }

    #[test]
    fn oov_tokens_score_through_unk() {
        let model = build_biased_lm(&sents(&["a b", "a c"]), 2).unwrap();
        let seq = ["zzz", "qqq"];
        let lp = model.sequence_log10prob(&seq);
        let manual = model.cond_log10p(&["<s>"], "<unk>")
            + model.cond_log10p(&["<unk>"], "<unk>")
            + model.cond_log10p(&["<unk>"], "</s>");
        assert!((lp - manual).abs() < 1e-12);
        assert!(lp.is_finite());
    }

    #[test]
    fn biased_lm_prefers_its_own_text() {
        let segment = sents(&["kyo wa ii tenki desu"]);
        let program = sents(&[
            "kyo wa ii tenki desu",
            "ashita wa ame ga furu",
            "kion wa nijuu do desu",
            "kaze ga tsuyoi ichinichi",
        ]);
        let seg_lm = build_biased_lm(&segment, 3).unwrap();
        let prog_lm = build_biased_lm(&program, 3).unwrap();
        let text = &segment[0];
        let per_token_seg = seg_lm.sequence_log10prob(text) / (text.len() + 1) as f64;
        let per_token_prog = prog_lm.sequence_log10prob(text) / (text.len() + 1) as f64;
        assert!(per_token_seg >= per_token_prog);
    }

    #[test]
    fn biased_lm_tiny_cue_top_continuation() {
        let cue = sents(&["kon nichi wa"]);
        let model = build_biased_lm(&cue, 3).unwrap();
        let (best, _) = model
            .vocab_surfaces()
            .map(|w| (w, model.cond_log10p(&["kon", "nichi"], w)))
            .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
            .unwrap();
        assert_eq!(best, "wa");
    }

    #[test]
    fn empty_texts_rejected() {
        assert!(build_biased_lm::<&str>(&[], 3).is_err());
    }

    #[test]
    fn prune_noop_below_all_probabilities() {
        let model = build_biased_lm(&sents(&["a b c", "c b a", "a c b"]), 3).unwrap();
        let pruned = model.prune(1e-30).unwrap();
        assert_eq!(to_arpa_string(&model), to_arpa_string(&pruned));
    }

    #[test]
    fn prune_to_unigrams_keeps_normalization() {
        let model = build_biased_lm(&sents(&["a b c d", "d c b a"]), 3).unwrap();
        let pruned = model.prune(1.0 - 1e-9).unwrap();
        assert_eq!(pruned.entry_count(2), 0);
        assert_eq!(pruned.entry_count(3), 0);
        assert_eq!(pruned.entry_count(1), model.entry_count(1));
        pruned.validate_normalization(1e-9).unwrap();
    }

    #[test]
    fn prune_removes_subthreshold_entry() {
        // Hand-written bigram model with P(b|a) = 1e-9; all other mass is
        // arranged so every context normalizes exactly.
        let arpa = "\\data\\\nngram 1=6\nngram 2=2\n\n\\1-grams:\n-99.000000\t<s>\t0.000000\n\
                    -0.698970\t</s>\t0.000000\n-0.698970\t<unk>\t0.000000\n-0.698970\ta\t-0.176091\n\
                    -0.698970\tb\t0.000000\n-0.698970\tc\t0.000000\n\n\\2-grams:\n\
                    -9.000000\ta b\n-0.221849\ta c\n\n\\end\\\n";
        let model = read_arpa(std::io::Cursor::new(arpa)).unwrap();
        assert!(model.entry(&["a", "b"]).is_some());
        let pruned = model.prune(1e-8).unwrap();
        assert!(pruned.entry(&["a", "b"]).is_none(), "1e-9 entry must go");
        assert!(pruned.entry(&["a", "c"]).is_some());

        // Surviving probabilities are untouched.
        assert_eq!(
            model.entry(&["a", "c"]).unwrap().0,
            pruned.entry(&["a", "c"]).unwrap().0
        );

        // The recomputed backoff keeps "a" normalized up to the fixture's
        // own 6-decimal quantization (trained models are checked at 1e-9 in
        // prune_to_unigrams_keeps_normalization).
        let sum: f64 = ["<s>", "</s>", "<unk>", "a", "b", "c"]
            .iter()
            .map(|w| pruned.cond_prob(&["a"], w))
            .sum();
        assert!((sum - 1.0).abs() < 1e-6, "sum {sum}");
    }

    #[test]
    fn prune_rejects_bad_threshold() {
        let model = build_biased_lm(&sents(&["a b"]), 2).unwrap();
        assert!(model.prune(0.0).is_err());
        assert!(model.prune(1.0).is_err());
        assert!(model.prune(-0.5).is_err());
    }

    #[test]
    fn normalization_holds_on_random_corpora() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for trial in 0..20 {
            let vocab_size = rng.random_range(2..7);
            let n_sents = rng.random_range(1..12);
            let corpus: Vec<Vec<String>> = (0..n_sents)
                .map(|_| {
                    (0..rng.random_range(1..10))
                        .map(|_| format!("w{}", rng.random_range(0..vocab_size)))
                        .collect()
                })
                .collect();
            let order = rng.random_range(1..4);
            match build_biased_lm(&corpus, order) {
                Ok(model) => model
                    .validate_normalization(1e-9)
                    .unwrap_or_else(|e| panic!("trial {trial}: {e}")),
                Err(_) => {
                    // Only possible when the corpus had fewer than 2 types.
                    let mut types: Vec<&String> = corpus.iter().flatten().collect();
                    types.sort();
                    types.dedup();
                    assert!(types.len() < 2);
                }
            }
        }
    }
}
