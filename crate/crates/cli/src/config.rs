use std::path::{Path, PathBuf};

use oodlab_core::analysis::{Metric, LABEL_FREE_FEATURES};
use oodlab_core::textdiv::MAX_ORDER;
use serde::Deserialize;

use crate::error::CliError;

pub const DEFAULT_SEED: u64 = 42;
pub const SEED_ENV: &str = "OODLAB_SEED";

/// Autoencoder overrides; unset fields keep the built-in defaults.
#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct AeSection {
    pub height: Option<usize>,
    pub width: Option<usize>,
    pub channels: Option<Vec<usize>>,
    pub latent: Option<usize>,
    pub slope: Option<f64>,
    pub epochs: Option<usize>,
    pub batch_size: Option<usize>,
    pub lr: Option<f64>,
}

/// Contents of a `--config` file. Relative paths are resolved against the
/// file's directory.
#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub workspace: Option<PathBuf>,
    #[serde(default)]
    pub manifests: Vec<PathBuf>,
    pub nmax: Option<usize>,
    pub ece_bins: Option<usize>,
    pub features: Option<Vec<String>>,
    pub jobs: Option<usize>,
    #[serde(default)]
    pub pgm: bool,
    #[serde(default)]
    pub autoencoder: AeSection,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut cfg: RunConfig =
            toml::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let resolve = |p: &PathBuf| if p.is_relative() { base.join(p) } else { p.clone() };
        cfg.manifests = cfg.manifests.iter().map(resolve).collect();
        cfg.workspace = cfg.workspace.as_ref().map(resolve);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if let Some(n) = self.nmax {
            check_nmax(n)?;
        }
        if self.ece_bins == Some(0) {
            return Err(CliError::Usage("ece_bins must be at least 1".into()));
        }
        if let Some(f) = &self.features {
            parse_metrics(f)?;
        }
        for m in &self.manifests {
            if !m.exists() {
                return Err(CliError::Data(format!("manifest {} does not exist", m.display())));
            }
        }
        Ok(())
    }

    /// Environment beats the flag, the flag beats the file.
    pub fn seed(&self, flag: Option<u64>) -> Result<u64, CliError> {
        resolve_seed(std::env::var(SEED_ENV).ok().as_deref(), flag, self.seed)
    }

    /// Manifests named on the command line, or else those in the file.
    pub fn manifests(&self, cli: &[PathBuf]) -> Result<Vec<PathBuf>, CliError> {
        let list = if cli.is_empty() {
            self.manifests.clone()
        } else {
            cli.to_vec()
        };
        if list.is_empty() {
            return Err(CliError::Usage("no manifests given".into()));
        }
        Ok(list)
    }

    pub fn features(&self, cli: Option<&[String]>) -> Result<Vec<Metric>, CliError> {
        match cli.or(self.features.as_deref()) {
            Some(names) => parse_metrics(names),
            None => Ok(LABEL_FREE_FEATURES.to_vec()),
        }
    }
}

pub fn resolve_seed(env: Option<&str>, flag: Option<u64>, file: Option<u64>) -> Result<u64, CliError> {
    if let Some(raw) = env.filter(|s| !s.trim().is_empty()) {
        return raw
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("{SEED_ENV}={raw:?} is not an unsigned integer")));
    }
    Ok(flag.or(file).unwrap_or(DEFAULT_SEED))
}

pub fn check_nmax(n: usize) -> Result<usize, CliError> {
    if (1..=MAX_ORDER).contains(&n) {
        Ok(n)
    } else {
        Err(CliError::Usage(format!("nmax must be in 1..={MAX_ORDER}, got {n}")))
    }
}

pub fn parse_metrics(names: &[String]) -> Result<Vec<Metric>, CliError> {
    names
        .iter()
        .map(|n| n.parse::<Metric>().map_err(CliError::from))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_precedence() {
        assert_eq!(resolve_seed(None, None, None).unwrap(), 42);
        assert_eq!(resolve_seed(None, None, Some(7)).unwrap(), 7);
        assert_eq!(resolve_seed(None, Some(3), Some(7)).unwrap(), 3);
        assert_eq!(resolve_seed(Some("11"), Some(3), Some(7)).unwrap(), 11);
        assert_eq!(resolve_seed(Some(" "), Some(3), None).unwrap(), 3);
        assert!(matches!(resolve_seed(Some("x"), None, None), Err(CliError::Usage(_))));
    }

    #[test]
    fn parses_full_file() {
        let cfg: RunConfig = toml::from_str(
            r#"
            seed = 9
            nmax = 3
            features = ["cer_id", "delta_T"]
            pgm = true
            [autoencoder]
            channels = [1, 4]
            epochs = 2
            "#,
        )
        .unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.seed, Some(9));
        assert_eq!(cfg.autoencoder.channels, Some(vec![1, 4]));
        assert_eq!(cfg.features(None).unwrap(), vec![Metric::CerId, Metric::DeltaT]);
    }

    #[test]
    fn rejects_bad_values() {
        let cfg = RunConfig {
            nmax: Some(6),
            ..RunConfig::default()
        };
        assert!(matches!(cfg.validate(), Err(CliError::Usage(_))));
        assert!(toml::from_str::<RunConfig>("colour = 1").is_err());
        let cfg = RunConfig {
            manifests: vec!["/nonexistent/m.jsonl".into()],
            ..RunConfig::default()
        };
        assert!(matches!(cfg.validate(), Err(CliError::Data(_))));
    }
}
