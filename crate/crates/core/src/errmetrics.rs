//! Character/word error rates and expected calibration error computed from
//! recogniser prediction logs.

use std::fs;
use std::path::Path;

use crate::scalar::Scalar;

#[derive(Debug, thiserror::Error)]
pub enum MetricsError {
    #[error("no prediction records")]
    NoRecords,
    #[error("every reference is empty")]
    EmptyReferences,
    #[error("record {0:?} has no confidences")]
    MissingConfidences(String),
    #[error("record {id:?}: {reason}")]
    InvalidRecord { id: String, reason: String },
    #[error("bin count must be at least 1")]
    InvalidBins,
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

#[derive(Clone, Debug, PartialEq)]
pub struct PredictionRecord<T> {
    pub sample_id: String,
    pub reference: String,
    pub hypothesis: String,
    /// One probability per hypothesis character.
    pub confidences: Option<Vec<T>>,
}

impl<T: Scalar> PredictionRecord<T> {
    pub fn new(sample_id: impl Into<String>, reference: impl Into<String>, hypothesis: impl Into<String>) -> Self {
        Self {
            sample_id: sample_id.into(),
            reference: reference.into(),
            hypothesis: hypothesis.into(),
            confidences: None,
        }
    }

    pub fn with_confidences(mut self, c: Vec<T>) -> Result<Self, MetricsError> {
        self.confidences = Some(c);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<(), MetricsError> {
        if let Some(c) = &self.confidences {
            let n = self.hypothesis.chars().count();
            if c.len() != n {
                return Err(MetricsError::InvalidRecord {
                    id: self.sample_id.clone(),
                    reason: format!("{} confidences for {n} hypothesis characters", c.len()),
                });
            }
            if let Some(v) = c.iter().find(|v| !(**v >= T::zero() && **v <= T::one())) {
                return Err(MetricsError::InvalidRecord {
                    id: self.sample_id.clone(),
                    reason: format!("confidence {v} outside [0,1]"),
                });
            }
        }
        Ok(())
    }
}

/// Unit-cost edit distance.
pub fn levenshtein<E: PartialEq>(a: &[E], b: &[E]) -> usize {
    if a.is_empty() {
        return b.len();
    }
    if b.is_empty() {
        return a.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, ac) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, bc) in b.iter().enumerate() {
            let cost = usize::from(ac != bc);
            cur[j + 1] = (prev[j] + cost).min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// One step of an optimal alignment of reference `a` against hypothesis `b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AlignOp {
    Match {
        ref_idx: usize,
        hyp_idx: usize,
    },
    Substitute {
        ref_idx: usize,
        hyp_idx: usize,
    },
    /// Hypothesis element with no reference counterpart.
    Insert {
        hyp_idx: usize,
    },
    /// Reference element missing from the hypothesis.
    Delete {
        ref_idx: usize,
    },
}

/// Minimal-cost alignment, in order. Traceback prefers match/substitute,
/// then insertion, then deletion.
pub fn align<E: PartialEq>(a: &[E], b: &[E]) -> Vec<AlignOp> {
    let (n, m) = (a.len(), b.len());
    let w = m + 1;
    let mut dp = vec![0usize; (n + 1) * w];
    for j in 0..=m {
        dp[j] = j;
    }
    for i in 1..=n {
        dp[i * w] = i;
        for j in 1..=m {
            let cost = usize::from(a[i - 1] != b[j - 1]);
            dp[i * w + j] = (dp[(i - 1) * w + j - 1] + cost)
                .min(dp[(i - 1) * w + j] + 1)
                .min(dp[i * w + j - 1] + 1);
        }
    }
    let mut ops = Vec::with_capacity(n.max(m));
    let (mut i, mut j) = (n, m);
    while i > 0 || j > 0 {
        let here = dp[i * w + j];
        if i > 0 && j > 0 {
            let same = a[i - 1] == b[j - 1];
            if dp[(i - 1) * w + j - 1] + usize::from(!same) == here {
                ops.push(if same {
                    AlignOp::Match {
                        ref_idx: i - 1,
                        hyp_idx: j - 1,
                    }
                } else {
                    AlignOp::Substitute {
                        ref_idx: i - 1,
                        hyp_idx: j - 1,
                    }
                });
                i -= 1;
                j -= 1;
                continue;
            }
        }
        if j > 0 && dp[i * w + j - 1] + 1 == here {
            ops.push(AlignOp::Insert { hyp_idx: j - 1 });
            j -= 1;
        } else {
            ops.push(AlignOp::Delete { ref_idx: i - 1 });
            i -= 1;
        }
    }
    ops.reverse();
    ops
}

/// Correctness of each hypothesis character: `true` only when aligned to an
/// equal reference character.
pub fn hypothesis_correctness(reference: &str, hypothesis: &str) -> Vec<bool> {
    let r: Vec<char> = reference.chars().collect();
    let h: Vec<char> = hypothesis.chars().collect();
    let mut correct = vec![false; h.len()];
    for op in align(&r, &h) {
        if let AlignOp::Match { hyp_idx, .. } = op {
            correct[hyp_idx] = true;
        }
    }
    correct
}

fn pooled_rate<T: Scalar, E: PartialEq>(pairs: impl Iterator<Item = (Vec<E>, Vec<E>)>) -> Result<T, MetricsError> {
    let mut edits = 0usize;
    let mut total = 0usize;
    let mut any = false;
    for (r, h) in pairs {
        any = true;
        edits += levenshtein(&r, &h);
        total += r.len();
    }
    if !any {
        return Err(MetricsError::NoRecords);
    }
    if total == 0 {
        return Err(MetricsError::EmptyReferences);
    }
    Ok(T::lit(100.0) * T::from_count(edits) / T::from_count(total))
}

/// Pooled character error rate in percent.
pub fn corpus_cer<T: Scalar>(records: &[PredictionRecord<T>]) -> Result<T, MetricsError> {
    pooled_rate(
        records
            .iter()
            .map(|r| (r.reference.chars().collect::<Vec<_>>(), r.hypothesis.chars().collect())),
    )
}

/// Pooled word error rate in percent over whitespace-separated tokens. Can
/// exceed 100 when hypotheses insert words.
pub fn corpus_wer<T: Scalar>(records: &[PredictionRecord<T>]) -> Result<T, MetricsError> {
    pooled_rate(records.iter().map(|r| {
        (
            r.reference.split_whitespace().collect::<Vec<_>>(),
            r.hypothesis.split_whitespace().collect(),
        )
    }))
}

/// Binned expected calibration error over hypothesis characters.
pub fn ece<T: Scalar>(records: &[PredictionRecord<T>], bins: usize) -> Result<T, MetricsError> {
    if bins == 0 {
        return Err(MetricsError::InvalidBins);
    }
    if records.is_empty() {
        return Err(MetricsError::NoRecords);
    }
    let mut count = vec![0usize; bins];
    let mut conf_sum = vec![T::zero(); bins];
    let mut hits = vec![0usize; bins];
    let b = T::from_count(bins);
    for r in records {
        r.validate()?;
        let conf = r
            .confidences
            .as_ref()
            .ok_or_else(|| MetricsError::MissingConfidences(r.sample_id.clone()))?;
        for (&c, ok) in conf.iter().zip(hypothesis_correctness(&r.reference, &r.hypothesis)) {
            let k = (c * b).floor().to_usize().unwrap_or(0).min(bins - 1);
            count[k] += 1;
            conf_sum[k] += c;
            hits[k] += usize::from(ok);
        }
    }
    let total: usize = count.iter().sum();
    if total == 0 {
        return Ok(T::zero());
    }
    let n = T::from_count(total);
    let mut e = T::zero();
    for k in 0..bins {
        if count[k] == 0 {
            continue;
        }
        let size = T::from_count(count[k]);
        let acc = T::from_count(hits[k]) / size;
        let avg = conf_sum[k] / size;
        e += size / n * (acc - avg).abs();
    }
    Ok(e)
}

/// Parses a prediction log: tab-separated `sample_id, reference, hypothesis`
/// and an optional comma-separated `confidences` column. A first line
/// starting with `sample_id` is treated as a header.
pub fn parse_predictions<T: Scalar>(text: &str) -> Result<Vec<PredictionRecord<T>>, MetricsError> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let raw = raw.strip_suffix('\r').unwrap_or(raw);
        if raw.trim().is_empty() || (idx == 0 && raw.starts_with("sample_id\t")) {
            continue;
        }
        let cols: Vec<&str> = raw.split('\t').collect();
        if !(3..=4).contains(&cols.len()) {
            return Err(MetricsError::Parse {
                line,
                reason: format!("expected 3 or 4 tab-separated columns, found {}", cols.len()),
            });
        }
        let mut rec = PredictionRecord::new(cols[0], cols[1], cols[2]);
        if let Some(c) = cols.get(3) {
            let conf = if c.trim().is_empty() {
                Vec::new()
            } else {
                c.split(',')
                    .map(|v| {
                        v.trim().parse::<f64>().map(T::lit).map_err(|e| MetricsError::Parse {
                            line,
                            reason: format!("confidence {v:?}: {e}"),
                        })
                    })
                    .collect::<Result<Vec<_>, _>>()?
            };
            rec.confidences = Some(conf);
        }
        rec.validate().map_err(|e| MetricsError::Parse {
            line,
            reason: e.to_string(),
        })?;
        out.push(rec);
    }
    Ok(out)
}

pub fn load_predictions<T: Scalar>(path: &Path) -> Result<Vec<PredictionRecord<T>>, MetricsError> {
    let text = fs::read_to_string(path).map_err(|source| MetricsError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_predictions(&text)
}
