//! Checkpoint selection from per-domain validation error.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

use super::AnalysisError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationRecord<T> {
    pub checkpoint: String,
    pub domain: String,
    pub val_cer: T,
}

impl<T> ValidationRecord<T> {
    pub fn new(checkpoint: impl Into<String>, domain: impl Into<String>, val_cer: T) -> Self {
        Self {
            checkpoint: checkpoint.into(),
            domain: domain.into(),
            val_cer,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "strategy", rename_all = "kebab-case")]
pub enum SelectionStrategy {
    /// Validation error on the training domain only.
    NoSelection { source: String },
    /// Mean validation error over every domain except the target.
    Heldout { target: String },
    /// Validation error on the target itself.
    Oracle { target: String },
}

impl fmt::Display for SelectionStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SelectionStrategy::NoSelection { source } => write!(f, "no-selection(source={source})"),
            SelectionStrategy::Heldout { target } => write!(f, "heldout(target={target})"),
            SelectionStrategy::Oracle { target } => write!(f, "oracle(target={target})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Selection<T> {
    pub checkpoint: String,
    /// The score the strategy minimised.
    pub score: T,
}

/// Checkpoints in order of first appearance; earlier wins ties.
fn checkpoints<T>(records: &[ValidationRecord<T>]) -> Vec<&str> {
    let mut out: Vec<&str> = Vec::new();
    for r in records {
        if !out.contains(&r.checkpoint.as_str()) {
            out.push(&r.checkpoint);
        }
    }
    out
}

fn lookup<T: Scalar>(records: &[ValidationRecord<T>], checkpoint: &str, domain: &str) -> Result<T, AnalysisError> {
    records
        .iter()
        .find(|r| r.checkpoint == checkpoint && r.domain == domain)
        .map(|r| r.val_cer)
        .ok_or_else(|| AnalysisError::MissingRecord {
            checkpoint: checkpoint.to_string(),
            domain: domain.to_string(),
        })
}

pub fn select_model<T: Scalar>(
    records: &[ValidationRecord<T>],
    strategy: &SelectionStrategy,
) -> Result<Selection<T>, AnalysisError> {
    if records.is_empty() {
        return Err(AnalysisError::NoRecords);
    }
    let has_domain = |d: &str| records.iter().any(|r| r.domain == d);
    let domains: Vec<&str> = match strategy {
        SelectionStrategy::NoSelection { source: d } | SelectionStrategy::Oracle { target: d } => {
            if !has_domain(d) {
                return Err(AnalysisError::UnknownDomain(d.clone()));
            }
            vec![d.as_str()]
        }
        SelectionStrategy::Heldout { target } => {
            if !has_domain(target) {
                return Err(AnalysisError::UnknownDomain(target.clone()));
            }
            let mut others: Vec<&str> = Vec::new();
            for r in records {
                if r.domain != *target && !others.contains(&r.domain.as_str()) {
                    others.push(&r.domain);
                }
            }
            if others.is_empty() {
                return Err(AnalysisError::NoHeldoutDomains(target.clone()));
            }
            others
        }
    };

    let mut best: Option<Selection<T>> = None;
    for ckpt in checkpoints(records) {
        let mut sum = T::zero();
        for d in &domains {
            sum += lookup(records, ckpt, d)?;
        }
        let score = sum / T::from_count(domains.len());
        if best.as_ref().is_none_or(|b| score < b.score) {
            best = Some(Selection {
                checkpoint: ckpt.to_string(),
                score,
            });
        }
    }
    Ok(best.expect("records are non-empty"))
}

/// Reads `checkpoint,domain,val_cer` CSV.
pub fn parse_validation_csv<T: Scalar>(text: &str) -> Result<Vec<ValidationRecord<T>>, AnalysisError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| AnalysisError::parse(1, e))?.clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h.eq_ignore_ascii_case(name))
            .ok_or_else(|| AnalysisError::MissingColumn(name.to_string()))
    };
    let (ci, di, vi) = (find("checkpoint")?, find("domain")?, find("val_cer")?);
    let mut out = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| AnalysisError::parse(line, e))?;
        let raw = rec.get(vi).unwrap_or("");
        let v: f64 = raw
            .parse()
            .map_err(|_| AnalysisError::parse(line, format!("val_cer {raw:?} is not a number")))?;
        if !v.is_finite() || v < 0.0 {
            return Err(AnalysisError::InvalidValue {
                column: "val_cer".into(),
                value: v,
            });
        }
        out.push(ValidationRecord::new(
            rec.get(ci).unwrap_or(""),
            rec.get(di).unwrap_or(""),
            T::lit(v),
        ));
    }
    Ok(out)
}

pub fn load_validation_csv<T: Scalar>(path: &Path) -> Result<Vec<ValidationRecord<T>>, AnalysisError> {
    let text = std::fs::read_to_string(path).map_err(|e| AnalysisError::io(path, e))?;
    parse_validation_csv(&text)
}
