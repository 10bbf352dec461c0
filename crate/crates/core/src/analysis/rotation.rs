//! Orthogonal rotation of a loading matrix maximising the oblimax criterion
//!
//! ```text
//! Q(Λ) = ln Σ λᵢⱼ⁴ − 2 ln Σ λᵢⱼ²
//! ```
//!
//! by gradient projection on the orthogonal group: the Euclidean gradient
//! with respect to the rotation is projected onto the tangent space, a step
//! is taken, and the result is pulled back onto the group with the polar
//! decomposition. Steps are only accepted when they increase `Q`.

use serde::{Deserialize, Serialize};

use crate::linalg::Matrix;
use crate::scalar::Scalar;

use super::factor::eigendecompose;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RotationResult<T> {
    /// `L · rotation`.
    pub loadings: Matrix<T>,
    /// Orthogonal `k × k` matrix.
    pub rotation: Matrix<T>,
    /// Criterion value at the start and after every accepted step.
    pub criterion_history: Vec<T>,
    pub converged: bool,
}

#[derive(Clone, Copy, Debug)]
pub struct RotationOptions {
    pub max_iter: usize,
    /// Stop once the projected gradient's Frobenius norm falls below this.
    pub tol: f64,
}

impl Default for RotationOptions {
    fn default() -> Self {
        Self {
            max_iter: 10_000,
            tol: 1e-12,
        }
    }
}

/// Oblimax criterion of a loading matrix; `-∞` for an all-zero matrix.
pub fn oblimax_criterion<T: Scalar>(l: &Matrix<T>) -> T {
    let (s2, s4) = moments(l);
    s4.ln() - T::lit(2.0) * s2.ln()
}

fn moments<T: Scalar>(l: &Matrix<T>) -> (T, T) {
    l.as_slice().iter().fold((T::zero(), T::zero()), |(s2, s4), &v| {
        let v2 = v * v;
        (s2 + v2, s4 + v2 * v2)
    })
}

/// dQ/dΛ.
fn criterion_gradient<T: Scalar>(l: &Matrix<T>) -> Matrix<T> {
    let (s2, s4) = moments(l);
    let four = T::lit(4.0);
    l.map(|v| four * v * v * v / s4 - four * v / s2)
}

/// Orthogonal factor of the polar decomposition `X = U·P`.
fn polar<T: Scalar>(x: &Matrix<T>) -> Option<Matrix<T>> {
    let e = eigendecompose(&x.gram()).ok()?;
    let k = x.cols();
    let floor = T::epsilon() * e.values[0].abs().max(T::one());
    if e.values.iter().any(|&v| v <= floor) {
        return None;
    }
    let inv_sqrt = Matrix::from_fn(k, k, |i, j| {
        if i == j {
            T::one() / e.values[i].sqrt()
        } else {
            T::zero()
        }
    });
    let p_inv = e.vectors.matmul(&inv_sqrt).matmul(&e.vectors.transpose());
    Some(x.matmul(&p_inv))
}

pub fn oblimax_rotate<T: Scalar>(l: &Matrix<T>) -> RotationResult<T> {
    oblimax_rotate_with(l, RotationOptions::default())
}

pub fn oblimax_rotate_with<T: Scalar>(l: &Matrix<T>, opts: RotationOptions) -> RotationResult<T> {
    let k = l.cols();
    let mut rot = Matrix::identity(k);
    let mut current = l.clone();
    let mut q = oblimax_criterion(&current);
    let mut history = vec![q];
    if k < 2 || !q.is_finite() {
        return RotationResult {
            loadings: current,
            rotation: rot,
            criterion_history: history,
            converged: true,
        };
    }

    let tol = T::lit(opts.tol);
    let half = T::lit(0.5);
    let mut alpha = T::one();
    let mut converged = false;
    for _ in 0..opts.max_iter {
        let g = l.transpose().matmul(&criterion_gradient(&current));
        let m = rot.transpose().matmul(&g);
        let sym = Matrix::from_fn(k, k, |i, j| (m[(i, j)] + m[(j, i)]) * half);
        let gp = g.sub(&rot.matmul(&sym));
        let norm_sq = gp.frobenius_sq();
        if norm_sq.sqrt() < tol {
            converged = true;
            break;
        }

        let mut accepted = None;
        for _ in 0..40 {
            let step = Matrix::from_fn(k, k, |i, j| rot[(i, j)] + alpha * gp[(i, j)]);
            if let Some(candidate) = polar(&step) {
                let lc = l.matmul(&candidate);
                let qc = oblimax_criterion(&lc);
                if qc > q + half * alpha * norm_sq * T::lit(1e-4) {
                    accepted = Some((candidate, lc, qc));
                    break;
                }
            }
            alpha *= half;
        }
        match accepted {
            Some((candidate, lc, qc)) => {
                rot = candidate;
                current = lc;
                q = qc;
                history.push(q);
                alpha = (alpha * T::lit(2.0)).min(T::lit(1e6));
            }
            None => {
                // no ascent direction left at working precision
                converged = true;
                break;
            }
        }
    }

    RotationResult {
        loadings: current,
        rotation: rot,
        criterion_history: history,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn givens(theta: f64) -> Matrix<f64> {
        let (s, c) = theta.sin_cos();
        Matrix::from_rows(&[vec![c, -s], vec![s, c]])
    }

    fn simple_structure() -> Matrix<f64> {
        Matrix::from_rows(&[
            vec![0.9, 0.0],
            vec![0.8, 0.0],
            vec![0.7, 0.0],
            vec![0.0, 0.85],
            vec![0.0, 0.6],
            vec![0.0, 0.75],
        ])
    }

    #[test]
    fn axis_aligned_is_a_fixed_point() {
        let l = simple_structure();
        let r = oblimax_rotate(&l);
        assert!(r.rotation.max_abs_diff(&Matrix::identity(2)) < 1e-10);
        let q0 = oblimax_criterion(&l);
        assert!((oblimax_criterion(&r.loadings) - q0).abs() < 1e-10);
    }

    #[test]
    fn undoes_a_thirty_degree_rotation() {
        let l0 = simple_structure();
        let mixed = l0.matmul(&givens(std::f64::consts::PI / 6.0));
        let r = oblimax_rotate(&mixed);
        assert!(r.converged);
        // match each recovered column to a reference column up to sign
        for j in 0..2 {
            let col = r.loadings.column(j);
            let best = (0..2)
                .map(|t| {
                    let reference = l0.column(t);
                    let dot: f64 = col.iter().zip(&reference).map(|(a, b)| a * b).sum();
                    let sign = dot.signum();
                    col.iter()
                        .zip(&reference)
                        .map(|(a, b)| (a * sign - b).abs())
                        .fold(0.0, f64::max)
                })
                .fold(f64::INFINITY, f64::min);
            assert!(best < 1e-4, "column {j} error {best}");
        }
    }

    #[test]
    fn criterion_never_decreases_and_rotation_is_orthogonal() {
        let l = Matrix::from_rows(&[
            vec![0.6, 0.5, 0.1],
            vec![0.7, -0.2, 0.3],
            vec![0.2, 0.8, -0.1],
            vec![0.4, 0.4, 0.6],
            vec![-0.3, 0.2, 0.7],
        ]);
        let r = oblimax_rotate(&l);
        assert!(r.criterion_history.windows(2).all(|w| w[1] >= w[0]));
        let t = &r.rotation;
        assert!(t.transpose().matmul(t).max_abs_diff(&Matrix::identity(3)) < 1e-10);
        assert!(r.loadings.max_abs_diff(&l.matmul(t)) < 1e-12);
        // communalities and ΛΛᵀ preserved
        let before = l.matmul(&l.transpose());
        let after = r.loadings.matmul(&r.loadings.transpose());
        assert!(before.max_abs_diff(&after) < 1e-8);
        assert!(oblimax_criterion(&r.loadings) >= oblimax_criterion(&l));
    }

    #[test]
    fn single_factor_is_identity() {
        let l = Matrix::from_rows(&[vec![0.5], vec![0.7]]);
        let r = oblimax_rotate(&l);
        assert_eq!(r.rotation, Matrix::identity(1));
        assert_eq!(r.loadings, l);
    }
}
