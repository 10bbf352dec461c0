use std::collections::HashSet;
use std::path::{Path, PathBuf};

use oodlab_core::corpus::{load_manifest, DatasetManifest, Split};

use crate::error::CliError;
use crate::SplitArg;

mod data;
mod divergence;
mod tables;

pub use data::{eval, ingest, synth};
pub use divergence::{textdiv, visdiv_score, visdiv_train};
pub use tables::{analyze, report, select};

/// Loads manifests and insists on distinct domain names, since names key
/// every output.
fn load_domains(paths: &[PathBuf]) -> Result<Vec<DatasetManifest>, CliError> {
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(paths.len());
    for p in paths {
        let m = load_manifest(p).map_err(|e| CliError::from(e).context(p.display()))?;
        if !seen.insert(m.name.clone()) {
            return Err(CliError::Data(format!("domain name {:?} appears twice", m.name)));
        }
        out.push(m);
    }
    Ok(out)
}

fn split_texts(m: &DatasetManifest, split: SplitArg) -> Vec<String> {
    match split {
        SplitArg::All => m.all_texts().map(str::to_string).collect(),
        SplitArg::Train => m.texts(Split::Train),
        SplitArg::Val => m.texts(Split::Val),
        SplitArg::Test => m.texts(Split::Test),
    }
}

fn single_split(split: SplitArg) -> Result<Split, CliError> {
    match split {
        SplitArg::Train => Ok(Split::Train),
        SplitArg::Val => Ok(Split::Val),
        SplitArg::Test => Ok(Split::Test),
        SplitArg::All => Err(CliError::Usage("this command needs a single split".into())),
    }
}

fn names(domains: &[DatasetManifest]) -> Vec<String> {
    domains.iter().map(|d| d.name.clone()).collect()
}

/// Heatmap target: the explicit flag, or next to `out` when the config
/// asks for heatmaps.
fn heatmap_path(flag: Option<PathBuf>, out: Option<&Path>, config_pgm: bool) -> Option<PathBuf> {
    flag.or_else(|| out.filter(|_| config_pgm).map(|o| o.with_extension("pgm")))
}
