use std::collections::HashSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::linalg::Matrix;
use crate::scalar::Scalar;

use super::AnalysisError;

/// Metric columns of the metrics table, in CSV order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Metric {
    #[serde(rename = "params_millions")]
    ParamsMillions,
    #[serde(rename = "cer_id")]
    CerId,
    #[serde(rename = "cer_ood")]
    CerOod,
    #[serde(rename = "ece_id")]
    EceId,
    #[serde(rename = "ece_ood")]
    EceOod,
    /// Reconstruction error on the source's own test split.
    #[serde(rename = "delta_S")]
    DeltaS,
    /// Reconstruction error on the target's test split.
    #[serde(rename = "delta_T")]
    DeltaT,
    /// Text divergence to a synthetic corpus in the target language.
    #[serde(rename = "delta_L")]
    DeltaL,
    /// Text divergence to the target's ground truth.
    #[serde(rename = "delta_GT")]
    DeltaGt,
}

impl Metric {
    pub const ALL: [Metric; 9] = [
        Metric::ParamsMillions,
        Metric::CerId,
        Metric::CerOod,
        Metric::EceId,
        Metric::EceOod,
        Metric::DeltaS,
        Metric::DeltaT,
        Metric::DeltaL,
        Metric::DeltaGt,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::ParamsMillions => "params_millions",
            Metric::CerId => "cer_id",
            Metric::CerOod => "cer_ood",
            Metric::EceId => "ece_id",
            Metric::EceOod => "ece_ood",
            Metric::DeltaS => "delta_S",
            Metric::DeltaT => "delta_T",
            Metric::DeltaL => "delta_L",
            Metric::DeltaGt => "delta_GT",
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = AnalysisError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Metric::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| AnalysisError::UnknownColumn(s.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MetricsRow<T> {
    pub model: String,
    pub source: String,
    pub target: String,
    values: [T; 9],
}

impl<T: Scalar> MetricsRow<T> {
    pub fn new(model: impl Into<String>, source: impl Into<String>, target: impl Into<String>) -> Self {
        Self {
            model: model.into(),
            source: source.into(),
            target: target.into(),
            values: [T::zero(); 9],
        }
    }

    pub fn get(&self, m: Metric) -> T {
        self.values[m.index()]
    }

    pub fn set(&mut self, m: Metric, v: T) {
        self.values[m.index()] = v;
    }

    pub fn with(mut self, m: Metric, v: T) -> Self {
        self.set(m, v);
        self
    }
}

/// One row per `(model, source, target)`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct MetricsTable<T> {
    rows: Vec<MetricsRow<T>>,
}

impl<T: Scalar> MetricsTable<T> {
    pub fn new(rows: Vec<MetricsRow<T>>) -> Result<Self, AnalysisError> {
        let mut keys = HashSet::new();
        for r in &rows {
            if !keys.insert((r.model.as_str(), r.source.as_str(), r.target.as_str())) {
                return Err(AnalysisError::DuplicateKey(format!(
                    "{}/{}/{}",
                    r.model, r.source, r.target
                )));
            }
            for m in Metric::ALL {
                let v = r.get(m);
                if !v.is_finite() || v < T::zero() {
                    return Err(AnalysisError::InvalidValue {
                        column: m.name().into(),
                        value: v.as_f64(),
                    });
                }
            }
        }
        Ok(Self { rows })
    }

    pub fn rows(&self) -> &[MetricsRow<T>] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column(&self, m: Metric) -> Vec<T> {
        self.rows.iter().map(|r| r.get(m)).collect()
    }

    /// `n × columns.len()` data matrix.
    pub fn matrix(&self, columns: &[Metric]) -> Matrix<T> {
        Matrix::from_fn(self.rows.len(), columns.len(), |i, j| self.rows[i].get(columns[j]))
    }

    /// Distinct target domains in order of first appearance.
    pub fn targets(&self) -> Vec<String> {
        let mut seen = Vec::<String>::new();
        for r in &self.rows {
            if !seen.contains(&r.target) {
                seen.push(r.target.clone());
            }
        }
        seen
    }

    pub fn filter(&self, keep: impl Fn(&MetricsRow<T>) -> bool) -> Self {
        Self {
            rows: self.rows.iter().filter(|r| keep(r)).cloned().collect(),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("model,source,target");
        for m in Metric::ALL {
            out.push(',');
            out.push_str(m.name());
        }
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!("{},{},{}", r.model, r.source, r.target));
            for m in Metric::ALL {
                out.push_str(&format!(",{:?}", r.get(m).as_f64()));
            }
            out.push('\n');
        }
        out
    }

    /// Parses CSV with the three key columns and all nine metric columns,
    /// in any order.
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
        let key_idx = [find("model")?, find("source")?, find("target")?];
        let metric_idx = Metric::ALL.map(|m| find(m.name()));
        let metric_idx: Vec<usize> = metric_idx.into_iter().collect::<Result<_, _>>()?;
        let mut rows = Vec::new();
        for (i, rec) in reader.records().enumerate() {
            let line = i + 2;
            let rec = rec.map_err(|e| AnalysisError::parse(line, e))?;
            let field = |k: usize| rec.get(k).unwrap_or("");
            let mut row = MetricsRow::new(field(key_idx[0]), field(key_idx[1]), field(key_idx[2]));
            for (m, &k) in Metric::ALL.iter().zip(&metric_idx) {
                let raw = field(k);
                let v: f64 = raw
                    .parse()
                    .map_err(|_| AnalysisError::parse(line, format!("column {}: {raw:?} is not a number", m.name())))?;
                row.set(*m, T::lit(v));
            }
            rows.push(row);
        }
        Self::new(rows)
    }

    pub fn load(path: &Path) -> Result<Self, AnalysisError> {
        let text = std::fs::read_to_string(path).map_err(|e| AnalysisError::io(path, e))?;
        Self::from_csv(&text)
    }
}
