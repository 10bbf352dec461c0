//! Cross-domain CER tables: best-source lookup and per-model averages.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

use super::AnalysisError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossEntry<T> {
    pub model: String,
    pub source: String,
    pub target: String,
    pub cer: T,
}

/// CER for every trained `(model, source)` evaluated on every `target`;
/// `source == target` is the in-distribution result.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CrossTable<T> {
    entries: Vec<CrossEntry<T>>,
}

fn push_unique(seen: &mut Vec<String>, s: &str) {
    if !seen.iter().any(|x| x == s) {
        seen.push(s.to_string());
    }
}

impl<T: Scalar> CrossTable<T> {
    pub fn new(entries: Vec<CrossEntry<T>>) -> Result<Self, AnalysisError> {
        let mut keys = BTreeSet::new();
        for e in &entries {
            if !keys.insert((e.model.as_str(), e.source.as_str(), e.target.as_str())) {
                return Err(AnalysisError::DuplicateKey(format!(
                    "{}/{}/{}",
                    e.model, e.source, e.target
                )));
            }
            if !e.cer.is_finite() || e.cer < T::zero() {
                return Err(AnalysisError::InvalidValue {
                    column: "cer".into(),
                    value: e.cer.as_f64(),
                });
            }
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[CrossEntry<T>] {
        &self.entries
    }

    /// Models in order of first appearance.
    pub fn models(&self) -> Vec<String> {
        let mut out = Vec::new();
        for e in &self.entries {
            push_unique(&mut out, &e.model);
        }
        out
    }

    /// Targets evaluated for `model`, in order of first appearance.
    pub fn targets(&self, model: &str) -> Vec<String> {
        let mut out = Vec::new();
        for e in self.entries.iter().filter(|e| e.model == model) {
            push_unique(&mut out, &e.target);
        }
        out
    }

    pub fn get(&self, model: &str, source: &str, target: &str) -> Option<T> {
        self.entries
            .iter()
            .find(|e| e.model == model && e.source == source && e.target == target)
            .map(|e| e.cer)
    }

    /// Reads `model,source,target,cer` CSV.
    pub fn from_csv(text: &str) -> Result<Self, AnalysisError> {
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
        let idx = [find("model")?, find("source")?, find("target")?, find("cer")?];
        let mut entries = Vec::new();
        for (i, rec) in reader.records().enumerate() {
            let line = i + 2;
            let rec = rec.map_err(|e| AnalysisError::parse(line, e))?;
            let field = |k: usize| rec.get(idx[k]).unwrap_or("");
            let cer: f64 = field(3)
                .parse()
                .map_err(|_| AnalysisError::parse(line, format!("cer {:?} is not a number", field(3))))?;
            entries.push(CrossEntry {
                model: field(0).to_string(),
                source: field(1).to_string(),
                target: field(2).to_string(),
                cer: T::lit(cer),
            });
        }
        Self::new(entries)
    }

    pub fn load(path: &Path) -> Result<Self, AnalysisError> {
        let text = std::fs::read_to_string(path).map_err(|e| AnalysisError::io(path, e))?;
        Self::from_csv(&text)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("model,source,target,cer\n");
        for e in &self.entries {
            out.push_str(&format!("{},{},{},{:?}\n", e.model, e.source, e.target, e.cer.as_f64()));
        }
        out
    }
}

/// Lowest off-diagonal CER into `target`; the earliest source wins ties.
pub fn best_source<T: Scalar>(table: &CrossTable<T>, model: &str, target: &str) -> Result<(String, T), AnalysisError> {
    if !table.entries.iter().any(|e| e.model == model) {
        return Err(AnalysisError::UnknownModel(model.to_string()));
    }
    let mut best: Option<(&str, T)> = None;
    for e in table
        .entries
        .iter()
        .filter(|e| e.model == model && e.target == target && e.source != target)
    {
        if best.is_none_or(|(_, c)| e.cer < c) {
            best = Some((&e.source, e.cer));
        }
    }
    best.map(|(s, c)| (s.to_string(), c))
        .ok_or_else(|| AnalysisError::NoOffDiagonal {
            model: model.to_string(),
            target: target.to_string(),
        })
}

/// Which averages drop `(model, target)` pairs marked as outliers.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutlierScope {
    /// Outlier targets leave the ID mean only; their OOD cell still counts.
    IdOnly,
    /// Outlier targets leave both means.
    #[default]
    IdAndOod,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TargetSummary<T> {
    pub target: String,
    pub id_cer: T,
    pub best_source: String,
    pub ood_cer: T,
    /// `ood_cer − id_cer`.
    pub gap: T,
    pub outlier: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSummary<T> {
    pub model: String,
    pub targets: Vec<TargetSummary<T>>,
    pub mean_id: T,
    pub mean_ood: T,
    /// `mean_ood − mean_id`.
    pub mean_gap: T,
}

pub type OutlierSet = BTreeSet<(String, String)>;

pub fn aggregate_summary<T: Scalar>(
    table: &CrossTable<T>,
    outliers: &OutlierSet,
    scope: OutlierScope,
) -> Result<Vec<ModelSummary<T>>, AnalysisError> {
    let mut out = Vec::new();
    for model in table.models() {
        let mut targets = Vec::new();
        for target in table.targets(&model) {
            let id_cer = table
                .get(&model, &target, &target)
                .ok_or_else(|| AnalysisError::MissingId {
                    model: model.clone(),
                    target: target.clone(),
                })?;
            let (source, ood_cer) = best_source(table, &model, &target)?;
            targets.push(TargetSummary {
                outlier: outliers.contains(&(model.clone(), target.clone())),
                target,
                id_cer,
                best_source: source,
                ood_cer,
                gap: ood_cer - id_cer,
            });
        }
        let mean = |vals: Vec<T>| -> Result<T, AnalysisError> {
            if vals.is_empty() {
                return Err(AnalysisError::AllExcluded(model.clone()));
            }
            Ok(vals.iter().copied().sum::<T>() / T::from_count(vals.len()))
        };
        let mean_id = mean(targets.iter().filter(|t| !t.outlier).map(|t| t.id_cer).collect())?;
        let mean_ood = mean(
            targets
                .iter()
                .filter(|t| scope == OutlierScope::IdOnly || !t.outlier)
                .map(|t| t.ood_cer)
                .collect(),
        )?;
        out.push(ModelSummary {
            model,
            targets,
            mean_id,
            mean_ood,
            mean_gap: mean_ood - mean_id,
        });
    }
    Ok(out)
}
