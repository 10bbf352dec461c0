//! Character n-gram models and averaged-KL textual divergence.
//!
//! A corpus is a list of already-normalised lines. n-grams never span line
//! boundaries. Both distributions of a KL term are additively smoothed over
//! the union of the n-grams either model observed:
//!
//! ```text
//! p(j) = (c_P(j) + α) / (N_P + α·|U|)
//! ```
//!
//! and the divergence of two corpora is the mean of `KL(P_n ‖ Q_n)` over
//! orders `n = 1..=nmax`, in nats.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::linalg::Matrix;
use crate::scalar::Scalar;

pub const MAX_ORDER: usize = 5;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum TextDivError {
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("n-gram order {0} outside 1..={MAX_ORDER}")]
    InvalidOrder(usize),
    #[error("n-gram orders differ: {0} vs {1}")]
    OrderMismatch(usize, usize),
    #[error("smoothing masses differ: {0} vs {1}")]
    AlphaMismatch(f64, f64),
    #[error("smoothing mass must be finite and nonnegative, got {0}")]
    InvalidAlpha(f64),
    #[error("divergence is unbounded: target assigns zero probability to {0:?}")]
    Unbounded(String),
    #[error("at least two corpora are required, got {0}")]
    TooFewCorpora(usize),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NgramModel {
    order: usize,
    counts: BTreeMap<String, u64>,
    total: u64,
    alpha: f64,
}

impl NgramModel {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn counts(&self) -> &BTreeMap<String, u64> {
        &self.counts
    }

    pub fn count(&self, gram: &str) -> u64 {
        self.counts.get(gram).copied().unwrap_or(0)
    }

    /// Total number of n-gram occurrences.
    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Returns the model with a different smoothing mass.
    pub fn with_alpha(mut self, alpha: f64) -> Result<Self, TextDivError> {
        if !(alpha.is_finite() && alpha >= 0.0) {
            return Err(TextDivError::InvalidAlpha(alpha));
        }
        self.alpha = alpha;
        Ok(self)
    }

    /// Smoothed probability of `gram` over a support of `support` n-grams.
    pub fn probability<T: Scalar>(&self, gram: &str, support: usize) -> T {
        let alpha = T::lit(self.alpha);
        let denom = T::lit(self.total as f64) + alpha * T::from_count(support);
        (T::lit(self.count(gram) as f64) + alpha) / denom
    }
}

/// Counts every contiguous length-`n` character window of every line.
pub fn fit_ngrams<S: AsRef<str>>(corpus: &[S], n: usize) -> Result<NgramModel, TextDivError> {
    if corpus.is_empty() {
        return Err(TextDivError::EmptyCorpus);
    }
    if n == 0 || n > MAX_ORDER {
        return Err(TextDivError::InvalidOrder(n));
    }
    let mut counts = BTreeMap::new();
    let mut total = 0u64;
    let mut chars = Vec::new();
    for line in corpus {
        chars.clear();
        chars.extend(line.as_ref().chars());
        for window in chars.windows(n) {
            *counts.entry(window.iter().collect::<String>()).or_insert(0u64) += 1;
            total += 1;
        }
    }
    Ok(NgramModel {
        order: n,
        counts,
        total,
        alpha: 1.0,
    })
}

/// Union of both models' observed n-grams, in sorted order.
fn union_support<'a>(p: &'a NgramModel, q: &'a NgramModel) -> Vec<&'a str> {
    let mut a = p.counts.keys().peekable();
    let mut b = q.counts.keys().peekable();
    let mut out = Vec::with_capacity(p.counts.len().max(q.counts.len()));
    loop {
        let next = match (a.peek(), b.peek()) {
            (None, None) => break,
            (Some(_), None) => a.next(),
            (None, Some(_)) => b.next(),
            (Some(x), Some(y)) => match x.cmp(y) {
                Ordering::Less => a.next(),
                Ordering::Greater => b.next(),
                Ordering::Equal => {
                    b.next();
                    a.next()
                }
            },
        };
        out.push(next.expect("peeked").as_str());
    }
    out
}

/// `Σ_j p(j)·ln(p(j)/q(j))` over the union support with the shared
/// smoothing mass of both models.
pub fn kl_divergence<T: Scalar>(p: &NgramModel, q: &NgramModel) -> Result<T, TextDivError> {
    if p.order != q.order {
        return Err(TextDivError::OrderMismatch(p.order, q.order));
    }
    if p.alpha != q.alpha {
        return Err(TextDivError::AlphaMismatch(p.alpha, q.alpha));
    }
    let support = union_support(p, q);
    if support.is_empty() {
        return Ok(T::zero());
    }
    let size = support.len();
    let mut kl = T::zero();
    for gram in support {
        let pj: T = p.probability(gram, size);
        if pj == T::zero() {
            continue;
        }
        let qj: T = q.probability(gram, size);
        if qj == T::zero() {
            return Err(TextDivError::Unbounded(gram.to_string()));
        }
        kl += pj * (pj / qj).ln();
    }
    // Rounding can leave a tiny negative residue for near-identical inputs.
    Ok(kl.max(T::zero()))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TextDivergence {
    /// Highest n-gram order averaged over.
    pub nmax: usize,
    /// Additive smoothing mass per n-gram.
    pub alpha: f64,
}

impl Default for TextDivergence {
    fn default() -> Self {
        Self {
            nmax: MAX_ORDER,
            alpha: 1.0,
        }
    }
}

impl TextDivergence {
    fn validate(&self) -> Result<(), TextDivError> {
        if self.nmax == 0 || self.nmax > MAX_ORDER {
            return Err(TextDivError::InvalidOrder(self.nmax));
        }
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return Err(TextDivError::InvalidAlpha(self.alpha));
        }
        Ok(())
    }

    /// Fitted models for orders `1..=nmax`.
    pub fn fit_all<S: AsRef<str>>(&self, corpus: &[S]) -> Result<Vec<NgramModel>, TextDivError> {
        self.validate()?;
        (1..=self.nmax)
            .map(|n| fit_ngrams(corpus, n)?.with_alpha(self.alpha))
            .collect()
    }

    /// Divergence between two pre-fitted model stacks.
    pub fn between_models<T: Scalar>(&self, src: &[NgramModel], tgt: &[NgramModel]) -> Result<T, TextDivError> {
        let mut sum = T::zero();
        for (p, q) in src.iter().zip(tgt) {
            sum += kl_divergence::<T>(p, q)?;
        }
        Ok(sum / T::from_count(self.nmax))
    }
}

/// Directional divergence of `tgt` from `src`.
pub fn textual_divergence<T: Scalar, S: AsRef<str>>(
    src: &[S],
    tgt: &[S],
    config: &TextDivergence,
) -> Result<T, TextDivError> {
    let p = config.fit_all(src)?;
    let q = config.fit_all(tgt)?;
    config.between_models(&p, &q)
}

/// Pairwise divergences, rows are sources and columns targets. With
/// `normalize`, off-diagonal entries are mapped affinely onto `[0, 100]`.
pub fn divergence_matrix<T: Scalar, S: AsRef<str>>(
    corpora: &[Vec<S>],
    config: &TextDivergence,
    normalize: bool,
) -> Result<Matrix<T>, TextDivError> {
    if corpora.len() < 2 {
        return Err(TextDivError::TooFewCorpora(corpora.len()));
    }
    let models = corpora
        .iter()
        .map(|c| config.fit_all(c))
        .collect::<Result<Vec<_>, _>>()?;
    let n = corpora.len();
    let mut m = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if i != j {
                m[(i, j)] = config.between_models(&models[i], &models[j])?;
            }
        }
    }
    Ok(if normalize {
        crate::heatmap::normalize_off_diagonal(&m)
    } else {
        m
    })
}
