//! Label-free OOD error regression and its leave-one-domain-out evaluation.

use serde::{Deserialize, Serialize};

use crate::linalg::Matrix;
use crate::scalar::Scalar;

use super::factor::{column_stats, eigendecompose};
use super::table::{Metric, MetricsRow, MetricsTable};
use super::AnalysisError;

/// Proxies available without target labels.
pub const LABEL_FREE_FEATURES: [Metric; 6] = [
    Metric::CerId,
    Metric::EceId,
    Metric::ParamsMillions,
    Metric::DeltaS,
    Metric::DeltaT,
    Metric::DeltaL,
];

/// Ordinary least squares on z-scored features predicting `cer_ood`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegressionModel<T> {
    pub features: Vec<Metric>,
    /// One coefficient per standardised feature.
    pub coefficients: Vec<T>,
    pub intercept: T,
    pub feature_means: Vec<T>,
    /// Scale applied to each centred feature; 1 for constant features.
    pub feature_scales: Vec<T>,
    /// Set when the normal equations were singular and the pseudo-inverse
    /// dropped directions (constant features included).
    pub rank_deficient: bool,
}

impl<T: Scalar> RegressionModel<T> {
    pub fn predict(&self, row: &MetricsRow<T>) -> T {
        self.intercept
            + self
                .features
                .iter()
                .zip(&self.coefficients)
                .zip(self.feature_means.iter().zip(&self.feature_scales))
                .map(|((&f, &b), (&m, &s))| b * (row.get(f) - m) / s)
                .sum::<T>()
    }
}

/// Fits `cer_ood ~ features` by solving the normal equations through the
/// Jacobi eigendecomposition of `ZᵀZ` (pseudo-inverse when singular).
pub fn fit_ood_regressor<T: Scalar>(
    table: &MetricsTable<T>,
    features: &[Metric],
) -> Result<RegressionModel<T>, AnalysisError> {
    if features.is_empty() {
        return Err(AnalysisError::NoFeatures);
    }
    if features.contains(&Metric::CerOod) {
        return Err(AnalysisError::LabelLeak);
    }
    let n = table.len();
    if n < features.len() + 1 {
        return Err(AnalysisError::TooFewRows {
            need: features.len() + 1,
            got: n,
        });
    }
    let x = table.matrix(features);
    let y = table.column(Metric::CerOod);
    let y_mean = y.iter().copied().sum::<T>() / T::from_count(n);

    let p = features.len();
    let mut means = Vec::with_capacity(p);
    let mut scales = Vec::with_capacity(p);
    let mut degenerate = false;
    for j in 0..p {
        let (m, sd) = column_stats(&x, j);
        means.push(m);
        if sd > T::epsilon() * m.abs().max(T::one()) {
            scales.push(sd);
        } else {
            degenerate = true;
            scales.push(T::one());
        }
    }
    let z = Matrix::from_fn(n, p, |i, j| {
        if scales[j] == T::one() && degenerate && is_constant(&x, j) {
            T::zero()
        } else {
            (x[(i, j)] - means[j]) / scales[j]
        }
    });

    let gram = z.gram();
    let yc: Vec<T> = y.iter().map(|&v| v - y_mean).collect();
    let rhs = z.transpose().mul_vec(&yc);
    let eigen = eigendecompose(&gram)?;
    let top = eigen.values.first().copied().unwrap_or(T::zero()).abs();
    let cutoff = top * T::epsilon() * T::from_count(p.max(n)) * T::lit(10.0);
    let mut coefficients = vec![T::zero(); p];
    let mut dropped = false;
    for (i, &lambda) in eigen.values.iter().enumerate() {
        if lambda <= cutoff {
            dropped = true;
            continue;
        }
        let v = eigen.vectors.column(i);
        let proj: T = v.iter().zip(&rhs).map(|(&a, &b)| a * b).sum::<T>() / lambda;
        for (c, &vi) in coefficients.iter_mut().zip(&v) {
            *c += proj * vi;
        }
    }

    Ok(RegressionModel {
        features: features.to_vec(),
        coefficients,
        intercept: y_mean,
        feature_means: means,
        feature_scales: scales,
        rank_deficient: dropped || degenerate,
    })
}

fn is_constant<T: Scalar>(x: &Matrix<T>, j: usize) -> bool {
    (1..x.rows()).all(|i| x[(i, j)] == x[(0, j)])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Protocol {
    /// Refit with every row of one target domain held out, for each domain.
    LeaveOneDomainOut,
    /// Predict the rows the model was fitted on.
    InSample,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evaluation<T> {
    pub predictions: Vec<T>,
    pub actual: Vec<T>,
    /// `|predicted − actual|`, in table row order.
    pub residuals: Vec<T>,
    pub mae: T,
    pub mse: T,
    /// Any fold hit a rank-deficient design.
    pub rank_deficient: bool,
}

fn summarize<T: Scalar>(predictions: Vec<T>, actual: Vec<T>, rank_deficient: bool) -> Evaluation<T> {
    let residuals: Vec<T> = predictions.iter().zip(&actual).map(|(&p, &a)| (p - a).abs()).collect();
    let n = T::from_count(residuals.len().max(1));
    let mae = residuals.iter().copied().sum::<T>() / n;
    let mse = residuals.iter().map(|&r| r * r).sum::<T>() / n;
    Evaluation {
        predictions,
        actual,
        residuals,
        mae,
        mse,
        rank_deficient,
    }
}

/// Scores `model`'s feature set on `table` under `protocol`.
pub fn evaluate_regressor<T: Scalar>(
    model: &RegressionModel<T>,
    table: &MetricsTable<T>,
    protocol: Protocol,
) -> Result<Evaluation<T>, AnalysisError> {
    let actual = table.column(Metric::CerOod);
    match protocol {
        Protocol::InSample => {
            let preds = table.rows().iter().map(|r| model.predict(r)).collect();
            Ok(summarize(preds, actual, model.rank_deficient))
        }
        Protocol::LeaveOneDomainOut => {
            let domains = table.targets();
            if domains.len() < 2 {
                return Err(AnalysisError::TooFewDomains(domains.len()));
            }
            let mut preds = vec![T::zero(); table.len()];
            let mut deficient = false;
            for d in &domains {
                let train = table.filter(|r| &r.target != d);
                let fold = fit_ood_regressor(&train, &model.features)?;
                deficient |= fold.rank_deficient;
                for (i, r) in table.rows().iter().enumerate() {
                    if &r.target == d {
                        preds[i] = fold.predict(r);
                    }
                }
            }
            Ok(summarize(preds, actual, deficient))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualBucket<T> {
    pub lower: T,
    pub upper: T,
    pub count: usize,
    /// Percentage of residuals below `upper`.
    pub cumulative_pct: T,
}

/// Cumulative share of residuals per `[k·w, (k+1)·w)` bucket, up to the
/// bucket holding the largest residual.
pub fn residual_distribution<T: Scalar>(
    residuals: &[T],
    bucket_width: T,
) -> Result<Vec<ResidualBucket<T>>, AnalysisError> {
    if residuals.is_empty() {
        return Err(AnalysisError::EmptyResiduals);
    }
    if !(bucket_width > T::zero()) {
        return Err(AnalysisError::InvalidBucketWidth(bucket_width.as_f64()));
    }
    if let Some(&r) = residuals.iter().find(|&&r| !(r >= T::zero()) || !r.is_finite()) {
        return Err(AnalysisError::NegativeResidual(r.as_f64()));
    }
    let index = |r: T| (r / bucket_width).floor().to_usize().unwrap_or(0);
    let buckets = residuals.iter().map(|&r| index(r)).max().unwrap_or(0) + 1;
    let mut counts = vec![0usize; buckets];
    for &r in residuals {
        counts[index(r)] += 1;
    }
    let total = T::from_count(residuals.len());
    let mut running = 0;
    Ok(counts
        .into_iter()
        .enumerate()
        .map(|(k, count)| {
            running += count;
            ResidualBucket {
                lower: bucket_width * T::from_count(k),
                upper: bucket_width * T::from_count(k + 1),
                count,
                cumulative_pct: T::lit(100.0) * T::from_count(running) / total,
            }
        })
        .collect())
}
