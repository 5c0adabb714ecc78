//! EM estimation of a two-model interpolation weight on held-out text.

use crate::error::{Error, Result};

use super::NGramModel;

pub const EM_DEFAULT_TOL: f64 = 1e-6;
pub const EM_DEFAULT_MAX_ITER: usize = 100;

/// Result of [`interpolate_em`]: the mixture weight of the first model and
/// the held-out log10-likelihood observed at the start of each iteration.
#[derive(Debug, Clone)]
pub struct InterpolationResult {
    pub lambda: f64,
    pub heldout_ll_trace: Vec<f64>,
}

/// Fits λ in λ·P1 + (1-λ)·P2 by EM on the per-transition probabilities of
/// the held-out sentences (`</s>` included). Starts at λ = 0.5 and stops
/// when the update moves less than `tol` or after `max_iter` iterations.
/// The trace is non-decreasing up to floating-point noise.
pub fn interpolate_em<S: AsRef<str>>(
    m1: &NGramModel,
    m2: &NGramModel,
    heldout: &[Vec<S>],
    tol: f64,
    max_iter: usize,
) -> Result<InterpolationResult> {
    if heldout.is_empty() {
        return Err(Error::invalid("held-out set must be non-empty"));
    }
    if !(tol > 0.0) {
        return Err(Error::invalid("tol must be positive"));
    }

    // Per-transition linear probabilities under both models.
    let mut events: Vec<(f64, f64)> = Vec::new();
    for sentence in heldout {
        collect_events(m1, m2, sentence, &mut events);
    }

    let mut lambda = 0.5f64;
    let mut trace = Vec::new();
    for _ in 0..max_iter {
        let mut ll = 0.0;
        let mut responsibility = 0.0;
        for &(p1, p2) in &events {
            let mix = lambda * p1 + (1.0 - lambda) * p2;
            ll += mix.log10();
            responsibility += lambda * p1 / mix;
        }
        trace.push(ll);
        let next = responsibility / events.len() as f64;
        let moved = (next - lambda).abs();
        lambda = next;
        if moved < tol {
            break;
        }
    }

    debug_assert!(
        trace.windows(2).all(|w| w[1] >= w[0] - 1e-9),
        "EM trace must be non-decreasing: {trace:?}"
    );
    Ok(InterpolationResult {
        lambda,
        heldout_ll_trace: trace,
    })
}

fn collect_events<S: AsRef<str>>(
    m1: &NGramModel,
    m2: &NGramModel,
    sentence: &[S],
    events: &mut Vec<(f64, f64)>,
) {
    let mut context: Vec<&str> = vec![super::BOS_TOKEN];
    for token in sentence
        .iter()
        .map(AsRef::as_ref)
        .chain(std::iter::once(super::EOS_TOKEN))
    {
        let p1 = 10f64.powf(m1.cond_log10p(&context, token));
        let p2 = 10f64.powf(m2.cond_log10p(&context, token));
        events.push((p1, p2));
        context.push(token);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ngram::build_biased_lm;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sents(raw: &[&str]) -> Vec<Vec<String>> {
        raw.iter()
            .map(|s| s.split_whitespace().map(String::from).collect())
            .collect()
    }

    #[test]
    fn identical_models_keep_the_initial_lambda() {
        let m = build_biased_lm(&sents(&["a b a", "b a b"]), 2).unwrap();
        let result = interpolate_em(&m, &m, &sents(&["a b"]), 1e-6, 100).unwrap();
        assert!((result.lambda - 0.5).abs() < 1e-12);
        assert_eq!(result.heldout_ll_trace.len(), 1);
    }

    #[test]
    fn one_sided_heldout_drives_lambda_to_one() {
        // m1 strongly favors "a", m2 strongly favors "b"; held-out text is
        // all "a", so the mixture weight converges to m1.
        let m1 = build_biased_lm(&sents(&["a a a a a a a a a b"]), 1).unwrap();
        let m2 = build_biased_lm(&sents(&["b b b b b b b b b a"]), 1).unwrap();
        let heldout = sents(&["a a a a a", "a a a a a"]);
        let result = interpolate_em(&m1, &m2, &heldout, 1e-6, 100).unwrap();
        assert!(result.lambda >= 0.999, "lambda {}", result.lambda);
    }

    #[test]
    fn symmetric_setup_converges_to_half() {
        let m1 = build_biased_lm(&sents(&["a a a a a a a a a b"]), 1).unwrap();
        let m2 = build_biased_lm(&sents(&["b b b b b b b b b a"]), 1).unwrap();
        let heldout = sents(&["a b", "b a"]);
        let result = interpolate_em(&m1, &m2, &heldout, 1e-8, 200).unwrap();
        assert!((result.lambda - 0.5).abs() < 1e-4, "lambda {}", result.lambda);
    }

    #[test]
    fn trace_is_non_decreasing_on_random_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(5150);
        for _ in 0..20 {
            let mk_corpus = |rng: &mut ChaCha8Rng| -> Vec<Vec<String>> {
                (0..rng.random_range(2..8))
                    .map(|_| {
                        (0..rng.random_range(1..9))
                            .map(|_| format!("w{}", rng.random_range(0..5)))
                            .collect()
                    })
                    .collect()
            };
            let c1 = mk_corpus(&mut rng);
            let c2 = mk_corpus(&mut rng);
            let heldout = mk_corpus(&mut rng);
            let (Ok(m1), Ok(m2)) = (build_biased_lm(&c1, 2), build_biased_lm(&c2, 2)) else {
                continue;
            };
            let result = interpolate_em(&m1, &m2, &heldout, 1e-7, 50).unwrap();
            for w in result.heldout_ll_trace.windows(2) {
                assert!(w[1] >= w[0] - 1e-9, "trace dipped: {:?}", result.heldout_ll_trace);
            }
            assert!((0.0..=1.0).contains(&result.lambda));
        }
    }

    #[test]
    fn empty_heldout_is_rejected() {
        let m = build_biased_lm(&sents(&["a b"]), 1).unwrap();
        assert!(interpolate_em::<String>(&m, &m, &[], 1e-6, 10).is_err());
    }
}
