//! Dataset manifests, the unified alphabet and grayscale image I/O.

mod alphabet;
mod image;
mod manifest;

use std::path::{Path, PathBuf};

pub use alphabet::{build_alphabet, fold_char, normalize_text, transliterate, Alphabet, Special, UNK_CHAR};
pub use image::{decode_pgm, encode_pgm, load_image, resize_image, save_image, GrayImage};
pub use manifest::{load_manifest, parse_manifest, DatasetManifest, SampleRef, Split};

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("manifest has no header line")]
    MissingHeader,
    #[error("line {line}: malformed record: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("line {line}: empty transcript")]
    EmptyTranscript { line: usize },
    #[error("line {line}: duplicate image path {path:?} within split")]
    DuplicateImage { line: usize, path: String },
    #[error("line {line}: unknown split {split:?} (expected train, val or test)")]
    UnknownSplit { line: usize, split: String },
    #[error("invalid alphabet: {0}")]
    InvalidAlphabet(String),
    #[error("at least one corpus is required")]
    NoCorpora,
    #[error("unsupported image magic {0:?}, expected binary PGM (P5)")]
    UnsupportedMagic(String),
    #[error("truncated image: {0}")]
    TruncatedImage(String),
    #[error("invalid image: {0}")]
    InvalidImage(String),
}

impl CorpusError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        CorpusError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

/// Loads every image of one split, resized to `(h, w)`.
pub fn load_split_images<T: crate::Scalar>(
    manifest: &DatasetManifest,
    split: Split,
    h: usize,
    w: usize,
) -> Result<Vec<GrayImage<T>>, CorpusError> {
    manifest
        .split(split)
        .iter()
        .map(|s| {
            let img = load_image::<T>(&manifest.image_path(s))?;
            resize_image(&img, h, w)
        })
        .collect()
}
