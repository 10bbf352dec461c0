use std::io::Write;
use std::path::Path;

use oodlab_core::corpus::save_image;
use oodlab_core::heatmap::{heatmap_image, normalize_off_diagonal};
use oodlab_core::linalg::Matrix;

use crate::error::CliError;

/// Writes to `path`, creating parent directories, or to stdout when absent.
pub fn emit(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => write_file(p, text),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| CliError::Data(format!("stdout: {e}")))
        }
    }
}

pub fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn write_json<S: serde::Serialize>(path: &Path, value: &S) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Data(e.to_string()))?;
    write_file(path, &(text + "\n"))
}

/// Builds CSV text from string records.
pub fn csv_text<I, R>(header: &[&str], rows: I) -> Result<String, CliError>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r.into_iter().collect::<Vec<_>>())?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Data(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Shortest round-tripping form, or fixed decimals when requested.
pub fn num(v: f64, decimals: Option<usize>) -> String {
    match decimals {
        Some(d) => format!("{v:.d$}"),
        None => format!("{v:?}"),
    }
}

/// Square-cell PGM of a divergence matrix. Entries are normalised onto
/// `[0, 100]` unless they already are.
pub fn save_heatmap(path: &Path, m: &Matrix<f64>, already_normalized: bool) -> Result<(), CliError> {
    let scaled = if already_normalized {
        m.clone()
    } else {
        normalize_off_diagonal(m)
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    save_image(&heatmap_image(&scaled, 16), path)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip_or_round() {
        assert_eq!(num(0.1 + 0.2, None).parse::<f64>().unwrap(), 0.1 + 0.2);
        assert_eq!(num(28.499999999999996, Some(1)), "28.5");
        assert_eq!(num(3.0, None), "3.0");
    }

    #[test]
    fn csv_quotes_fields() {
        let t = csv_text(&["a", "b"], [vec!["x,y".to_string(), "z".to_string()]]).unwrap();
        assert_eq!(t, "a,b\n\"x,y\",z\n");
    }
}
