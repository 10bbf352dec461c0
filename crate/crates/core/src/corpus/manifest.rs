//! JSON-lines dataset manifests.
//!
//! The first line is a header `{"name": ..., "language": ...}`; every
//! following non-blank line is one sample
//! `{"split": "train|val|test", "image": "<relative path>", "text": "..."}`.
//! Image paths are resolved relative to the manifest's directory.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::CorpusError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Val, Split::Test];

    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Split {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "train" => Ok(Split::Train),
            "val" => Ok(Split::Val),
            "test" => Ok(Split::Test),
            other => Err(other.to_string()),
        }
    }
}

/// One `(image, transcript)` pair. `image` is stored as written in the
/// manifest (relative to the manifest directory).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SampleRef {
    pub image: PathBuf,
    pub text: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DatasetManifest {
    pub name: String,
    pub language: String,
    pub splits: BTreeMap<Split, Vec<SampleRef>>,
    /// Directory image paths are relative to.
    pub root: PathBuf,
}

#[derive(Serialize, Deserialize)]
struct HeaderLine {
    name: String,
    language: String,
}

#[derive(Serialize, Deserialize)]
struct RecordLine {
    split: String,
    image: String,
    text: String,
}

impl DatasetManifest {
    pub fn new(name: impl Into<String>, language: impl Into<String>, root: impl Into<PathBuf>) -> Self {
        Self {
            name: name.into(),
            language: language.into(),
            splits: BTreeMap::new(),
            root: root.into(),
        }
    }

    pub fn split(&self, split: Split) -> &[SampleRef] {
        self.splits.get(&split).map_or(&[], Vec::as_slice)
    }

    pub fn split_len(&self, split: Split) -> usize {
        self.split(split).len()
    }

    /// Transcripts of one split, in manifest order.
    pub fn texts(&self, split: Split) -> Vec<String> {
        self.split(split).iter().map(|s| s.text.clone()).collect()
    }

    /// Every transcript in the manifest regardless of split.
    pub fn all_texts(&self) -> impl Iterator<Item = &str> {
        self.splits.values().flatten().map(|s| s.text.as_str())
    }

    pub fn image_path(&self, sample: &SampleRef) -> PathBuf {
        self.root.join(&sample.image)
    }

    /// Serialises the manifest in the JSON-lines format, splits in
    /// train/val/test order and samples in insertion order.
    pub fn to_jsonl(&self) -> String {
        let mut out = serde_json::to_string(&HeaderLine {
            name: self.name.clone(),
            language: self.language.clone(),
        })
        .expect("header serialises");
        out.push('\n');
        for (split, samples) in &self.splits {
            for s in samples {
                let line = RecordLine {
                    split: split.as_str().to_string(),
                    image: s.image.to_string_lossy().replace('\\', "/"),
                    text: s.text.clone(),
                };
                out.push_str(&serde_json::to_string(&line).expect("record serialises"));
                out.push('\n');
            }
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<(), CorpusError> {
        let mut f = fs::File::create(path).map_err(|e| CorpusError::io(path, e))?;
        f.write_all(self.to_jsonl().as_bytes())
            .map_err(|e| CorpusError::io(path, e))
    }
}

/// Reads and validates a manifest file.
pub fn load_manifest(path: &Path) -> Result<DatasetManifest, CorpusError> {
    let content = fs::read_to_string(path).map_err(|e| CorpusError::io(path, e))?;
    let root = path.parent().map(Path::to_path_buf).unwrap_or_default();
    parse_manifest(&content, root)
}

/// Parses manifest text. Line numbers in errors are 1-based.
pub fn parse_manifest(content: &str, root: PathBuf) -> Result<DatasetManifest, CorpusError> {
    let mut lines = content
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| !l.trim().is_empty());

    let (hline, header) = lines.next().ok_or(CorpusError::MissingHeader)?;
    let header: HeaderLine = serde_json::from_str(header).map_err(|e| CorpusError::Malformed {
        line: hline,
        reason: format!("bad header: {e}"),
    })?;
    if header.name.trim().is_empty() {
        return Err(CorpusError::Malformed {
            line: hline,
            reason: "empty dataset name".into(),
        });
    }

    let mut manifest = DatasetManifest::new(header.name, header.language, root);
    let mut seen: BTreeMap<Split, HashSet<String>> = BTreeMap::new();

    for (line, raw) in lines {
        let rec: RecordLine = serde_json::from_str(raw).map_err(|e| CorpusError::Malformed {
            line,
            reason: e.to_string(),
        })?;
        let split: Split = rec
            .split
            .parse()
            .map_err(|split| CorpusError::UnknownSplit { line, split })?;
        if rec.text.is_empty() {
            return Err(CorpusError::EmptyTranscript { line });
        }
        if rec.image.is_empty() {
            return Err(CorpusError::Malformed {
                line,
                reason: "empty image path".into(),
            });
        }
        if !seen.entry(split).or_default().insert(rec.image.clone()) {
            return Err(CorpusError::DuplicateImage { line, path: rec.image });
        }
        manifest.splits.entry(split).or_default().push(SampleRef {
            image: PathBuf::from(rec.image),
            text: rec.text,
        });
    }
    Ok(manifest)
}
