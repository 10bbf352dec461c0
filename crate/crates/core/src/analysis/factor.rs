//! Standardisation, correlation, Jacobi eigendecomposition and principal
//! loadings.

use serde::{Deserialize, Serialize};

use crate::linalg::Matrix;
use crate::scalar::Scalar;

use super::rotation::{oblimax_rotate, RotationResult};
use super::table::{Metric, MetricsTable};
use super::AnalysisError;

/// Column-standardised data plus the statistics used.
#[derive(Clone, Debug, PartialEq)]
pub struct Standardized<T> {
    pub z: Matrix<T>,
    pub means: Vec<T>,
    /// Sample (n − 1) standard deviations.
    pub stds: Vec<T>,
}

impl<T: Scalar> Standardized<T> {
    /// Maps z-scores back to the original units.
    pub fn inverse(&self) -> Matrix<T> {
        Matrix::from_fn(self.z.rows(), self.z.cols(), |i, j| {
            self.z[(i, j)] * self.stds[j] + self.means[j]
        })
    }
}

pub(crate) fn column_stats<T: Scalar>(x: &Matrix<T>, j: usize) -> (T, T) {
    let n = T::from_count(x.rows());
    let mean = (0..x.rows()).map(|i| x[(i, j)]).sum::<T>() / n;
    let ss: T = (0..x.rows()).map(|i| (x[(i, j)] - mean).powi(2)).sum();
    (mean, (ss / (n - T::one())).sqrt())
}

/// z-scores every column. `names` label columns in errors.
pub fn standardize<T: Scalar>(x: &Matrix<T>, names: &[String]) -> Result<Standardized<T>, AnalysisError> {
    if x.rows() < 2 {
        return Err(AnalysisError::TooFewRows { need: 2, got: x.rows() });
    }
    let mut means = Vec::with_capacity(x.cols());
    let mut stds = Vec::with_capacity(x.cols());
    for j in 0..x.cols() {
        let (mean, sd) = column_stats(x, j);
        if !sd.is_finite() {
            return Err(AnalysisError::NonFinite(column_name(names, j)));
        }
        if sd <= T::epsilon() * mean.abs().max(T::one()) {
            return Err(AnalysisError::ZeroVariance(column_name(names, j)));
        }
        means.push(mean);
        stds.push(sd);
    }
    let z = Matrix::from_fn(x.rows(), x.cols(), |i, j| (x[(i, j)] - means[j]) / stds[j]);
    Ok(Standardized { z, means, stds })
}

fn column_name(names: &[String], j: usize) -> String {
    names.get(j).cloned().unwrap_or_else(|| format!("column {j}"))
}

/// Pearson correlation of already-standardised columns: `zᵀz / (n − 1)`
/// with an exact unit diagonal.
pub fn correlation_matrix<T: Scalar>(z: &Matrix<T>) -> Result<Matrix<T>, AnalysisError> {
    if z.rows() < 2 {
        return Err(AnalysisError::TooFewRows { need: 2, got: z.rows() });
    }
    let scale = T::from_count(z.rows() - 1);
    let g = z.gram();
    Ok(Matrix::from_fn(g.rows(), g.cols(), |i, j| {
        if i == j {
            T::one()
        } else {
            (g[(i, j)] / scale).max(-T::one()).min(T::one())
        }
    }))
}

/// Eigenvalues in descending order with matching unit eigenvectors stored as
/// matrix columns.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Eigen<T> {
    pub values: Vec<T>,
    pub vectors: Matrix<T>,
}

const MAX_SWEEPS: usize = 100;

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
///
/// Each eigenvector is sign-normalised so its largest-magnitude entry is
/// positive (first one wins ties).
pub fn eigendecompose<T: Scalar>(r: &Matrix<T>) -> Result<Eigen<T>, AnalysisError> {
    if !r.is_square() {
        return Err(AnalysisError::NotSquare(r.rows(), r.cols()));
    }
    if r.as_slice().iter().any(|v| !v.is_finite()) {
        return Err(AnalysisError::NonFinite("matrix".into()));
    }
    let sym_tol = T::tolerance().max(T::epsilon() * T::lit(100.0)) * r.max_abs().max(T::one());
    if !r.is_symmetric(sym_tol) {
        return Err(AnalysisError::Asymmetric);
    }
    let n = r.rows();
    let mut a = r.clone();
    // enforce exact symmetry so both triangles evolve identically
    for i in 0..n {
        for j in (i + 1)..n {
            let m = (a[(i, j)] + a[(j, i)]) / T::lit(2.0);
            a[(i, j)] = m;
            a[(j, i)] = m;
        }
    }
    let mut v = Matrix::identity(n);
    let scale = a.frobenius_sq().max(T::min_positive_value());

    for _ in 0..MAX_SWEEPS {
        let off: T = (0..n)
            .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)].powi(2))
            .sum();
        if off <= scale * T::epsilon() * T::epsilon() {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == T::zero() {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (T::lit(2.0) * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                let tau = s / (T::one() + c);
                a[(p, p)] -= t * apq;
                a[(q, q)] += t * apq;
                a[(p, q)] = T::zero();
                a[(q, p)] = T::zero();
                for k in 0..n {
                    if k != p && k != q {
                        let akp = a[(k, p)];
                        let akq = a[(k, q)];
                        let nkp = akp - s * (akq + tau * akp);
                        let nkq = akq + s * (akp - tau * akq);
                        a[(k, p)] = nkp;
                        a[(p, k)] = nkp;
                        a[(k, q)] = nkq;
                        a[(q, k)] = nkq;
                    }
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp - s * (vkq + tau * vkp);
                    v[(k, q)] = vkq + s * (vkp - tau * vkq);
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].partial_cmp(&a[(i, i)]).unwrap_or(std::cmp::Ordering::Equal));
    let values: Vec<T> = order.iter().map(|&i| a[(i, i)]).collect();
    let mut vectors = Matrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = v.column(src);
        let lead = col
            .iter()
            .copied()
            .fold(T::zero(), |best, x| if x.abs() > best.abs() { x } else { best });
        if lead < T::zero() {
            col.iter_mut().for_each(|x| *x = -*x);
        }
        vectors.set_column(dst, &col);
    }
    Ok(Eigen { values, vectors })
}

/// Number of eigenvalues ≥ 1.
pub fn retain_factors<T: Scalar>(eigenvalues: &[T]) -> usize {
    eigenvalues.iter().filter(|&&v| v >= T::one()).count()
}

/// Principal loadings: column `i` is `v_i·√λ_i` for the first `k` pairs.
pub fn loadings<T: Scalar>(eigen: &Eigen<T>, k: usize) -> Result<Matrix<T>, AnalysisError> {
    let p = eigen.values.len();
    if k > p {
        return Err(AnalysisError::FactorCount { k, p });
    }
    Ok(Matrix::from_fn(p, k, |i, j| {
        eigen.vectors[(i, j)] * eigen.values[j].max(T::zero()).sqrt()
    }))
}

/// Result of a full factor analysis run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactorModel<T> {
    pub columns: Vec<String>,
    pub eigenvalues: Vec<T>,
    pub retained_k: usize,
    pub loadings_unrotated: Matrix<T>,
    pub loadings_rotated: Matrix<T>,
    pub rotation: Matrix<T>,
    pub rotation_converged: bool,
    pub criterion_history: Vec<T>,
}

impl<T: Scalar> FactorModel<T> {
    /// Row sums of squared loadings.
    pub fn communalities(&self) -> Vec<T> {
        (0..self.loadings_unrotated.rows())
            .map(|i| self.loadings_unrotated.row(i).iter().map(|&v| v * v).sum())
            .collect()
    }
}

/// Standardise → correlate → eigendecompose → retain (≥ 1) → load → rotate.
pub fn factor_analysis<T: Scalar>(
    table: &MetricsTable<T>,
    columns: &[Metric],
) -> Result<FactorModel<T>, AnalysisError> {
    let names: Vec<String> = columns.iter().map(|m| m.name().to_string()).collect();
    let z = standardize(&table.matrix(columns), &names)?;
    let r = correlation_matrix(&z.z)?;
    let eigen = eigendecompose(&r)?;
    let k = retain_factors(&eigen.values);
    let unrotated = loadings(&eigen, k)?;
    let RotationResult {
        loadings: rotated,
        rotation,
        criterion_history,
        converged,
    } = oblimax_rotate(&unrotated);
    Ok(FactorModel {
        columns: names,
        eigenvalues: eigen.values,
        retained_k: k,
        loadings_unrotated: unrotated,
        loadings_rotated: rotated,
        rotation,
        rotation_converged: converged,
        criterion_history,
    })
}
