//! Deterministic text-line rendering for building synthetic domains.

use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use crate::corpus::{save_image, transliterate, CorpusError, DatasetManifest, SampleRef, Split};

mod font;
mod render;
mod text;

pub use font::{BitmapFont, Glyph};
pub use render::{render_line, StyleParams};
pub use text::{generate_lines, Language};

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("{}: no glyph for {ch:?}", line.map_or("text".to_string(), |l| format!("line {l}")))]
    UnmappedChar { ch: char, line: Option<usize> },
    #[error("invalid style: {0}")]
    InvalidStyle(String),
    #[error("empty corpus")]
    EmptyCorpus,
    #[error("unknown language {0:?}")]
    UnknownLanguage(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Corpus(#[from] CorpusError),
}

/// Stable 8/1/1 assignment: every block of ten consecutive indices has
/// exactly eight train, one val and one test line.
pub fn split_for_index(i: usize) -> Split {
    match (i * 7 + 3) % 10 {
        8 => Split::Val,
        9 => Split::Test,
        _ => Split::Train,
    }
}

#[derive(Serialize)]
struct StyleSidecar<'a> {
    name: &'a str,
    language: &'a str,
    lines: usize,
    style: &'a StyleParams,
}

/// Renders every line into `dir/images/` and writes `dir/manifest.jsonl`
/// and `dir/style.json`. Lines are ASCII-folded first; the folded text is
/// the transcript.
pub fn make_domain(
    lines: &[String],
    font: &BitmapFont,
    style: &StyleParams,
    dir: &Path,
    name: &str,
    language: &str,
) -> Result<DatasetManifest, SynthError> {
    if lines.is_empty() {
        return Err(SynthError::EmptyCorpus);
    }
    style.validate()?;
    let images = dir.join("images");
    std::fs::create_dir_all(&images).map_err(|e| SynthError::Io {
        path: images.clone(),
        source: e,
    })?;
    let mut manifest = DatasetManifest::new(name, language, dir);
    for (i, raw) in lines.iter().enumerate() {
        let text = transliterate(raw.trim());
        if text.is_empty() {
            continue;
        }
        let img = render_line::<f32>(&text, font, &style.for_line(i)).map_err(|e| match e {
            SynthError::UnmappedChar { ch, .. } => SynthError::UnmappedChar { ch, line: Some(i + 1) },
            other => other,
        })?;
        let rel = PathBuf::from("images").join(format!("{i:06}.pgm"));
        save_image(&img, &dir.join(&rel))?;
        manifest
            .splits
            .entry(split_for_index(i))
            .or_default()
            .push(SampleRef { image: rel, text });
    }
    manifest.save(&dir.join("manifest.jsonl"))?;
    let sidecar = StyleSidecar {
        name,
        language,
        lines: lines.len(),
        style,
    };
    let path = dir.join("style.json");
    let json = serde_json::to_string_pretty(&sidecar).expect("style serialises");
    std::fs::write(&path, json).map_err(|e| SynthError::Io { path, source: e })?;
    Ok(manifest)
}
