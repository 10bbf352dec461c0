//! Labelled square matrices: normalisation, CSV and PGM heatmaps.

use crate::corpus::GrayImage;
use crate::linalg::Matrix;
use crate::scalar::Scalar;

/// Maps off-diagonal entries affinely onto `[0, 100]` (min → 0, max → 100).
/// The diagonal is left at zero. When every off-diagonal entry is equal the
/// result is all zeros.
pub fn normalize_off_diagonal<T: Scalar>(m: &Matrix<T>) -> Matrix<T> {
    let n = m.rows();
    let mut lo = T::infinity();
    let mut hi = T::neg_infinity();
    for i in 0..n {
        for j in 0..m.cols() {
            if i != j {
                lo = lo.min(m[(i, j)]);
                hi = hi.max(m[(i, j)]);
            }
        }
    }
    let span = hi - lo;
    let hundred = T::lit(100.0);
    Matrix::from_fn(n, m.cols(), |i, j| {
        if i == j || !(span > T::zero()) {
            T::zero()
        } else if m[(i, j)] == hi {
            hundred
        } else {
            ((m[(i, j)] - lo) / span * hundred).max(T::zero()).min(hundred)
        }
    })
}

/// CSV with a header row and a leading label column.
pub fn matrix_to_csv<T: Scalar>(names: &[String], m: &Matrix<T>) -> String {
    let mut out = String::from("source");
    for n in names {
        out.push(',');
        out.push_str(&csv_field(n));
    }
    out.push('\n');
    for (i, n) in names.iter().enumerate() {
        out.push_str(&csv_field(n));
        for j in 0..m.cols() {
            out.push(',');
            out.push_str(&format!("{:?}", m[(i, j)].as_f64()));
        }
        out.push('\n');
    }
    out
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Parses the output of [`matrix_to_csv`].
pub fn matrix_from_csv(text: &str) -> Result<(Vec<String>, Matrix<f64>), String> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let names: Vec<String> = reader
        .headers()
        .map_err(|e| e.to_string())?
        .iter()
        .skip(1)
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| e.to_string())?;
        let row = rec
            .iter()
            .skip(1)
            .map(|v| v.parse::<f64>().map_err(|e| format!("{v:?}: {e}")))
            .collect::<Result<Vec<_>, _>>()?;
        if row.len() != names.len() {
            return Err("ragged matrix row".into());
        }
        rows.push(row);
    }
    if rows.len() != names.len() {
        return Err("matrix is not square".into());
    }
    Ok((names, Matrix::from_rows(&rows)))
}

/// Renders values in `[0, 100]` as square cells: 0 → white, 100 → black.
pub fn heatmap_image<T: Scalar>(m: &Matrix<T>, cell: usize) -> GrayImage<T> {
    let cell = cell.max(1);
    let (h, w) = (m.rows() * cell, m.cols() * cell);
    let mut img = GrayImage::filled(h, w, T::one());
    let hundred = T::lit(100.0);
    for y in 0..h {
        for x in 0..w {
            let v = m[(y / cell, x / cell)].max(T::zero()).min(hundred);
            img.set(y, x, T::one() - v / hundred);
        }
    }
    img
}
