use std::path::Path;

use oodlab_core::analysis::AnalysisError;
use oodlab_core::corpus::CorpusError;
use oodlab_core::errmetrics::MetricsError;
use oodlab_core::synthgen::SynthError;
use oodlab_core::textdiv::TextDivError;
use oodlab_core::visdiv::VisDivError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }

    pub fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::Data(format!("{}: {e}", path.display()))
    }

    /// Prefixes the message with where it came from.
    pub fn context(self, what: impl std::fmt::Display) -> Self {
        match self {
            CliError::Usage(m) => CliError::Usage(format!("{what}: {m}")),
            CliError::Data(m) => CliError::Data(format!("{what}: {m}")),
            CliError::Numerical(m) => CliError::Numerical(format!("{what}: {m}")),
        }
    }
}

impl From<CorpusError> for CliError {
    fn from(e: CorpusError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<MetricsError> for CliError {
    fn from(e: MetricsError) -> Self {
        match e {
            MetricsError::InvalidBins => CliError::Usage(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<TextDivError> for CliError {
    fn from(e: TextDivError) -> Self {
        match e {
            TextDivError::InvalidOrder(_) | TextDivError::InvalidAlpha(_) => CliError::Usage(e.to_string()),
            TextDivError::Unbounded(_) => CliError::Numerical(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<VisDivError> for CliError {
    fn from(e: VisDivError) -> Self {
        match e {
            VisDivError::InvalidConfig(_) => CliError::Usage(e.to_string()),
            VisDivError::NonFiniteGradient { .. } | VisDivError::Diverged { .. } => CliError::Numerical(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<AnalysisError> for CliError {
    fn from(e: AnalysisError) -> Self {
        match e {
            AnalysisError::NonFinite(_) | AnalysisError::Asymmetric => CliError::Numerical(e.to_string()),
            AnalysisError::UnknownColumn(_)
            | AnalysisError::NoFeatures
            | AnalysisError::LabelLeak
            | AnalysisError::InvalidBucketWidth(_) => CliError::Usage(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<SynthError> for CliError {
    fn from(e: SynthError) -> Self {
        match e {
            SynthError::InvalidStyle(_) | SynthError::UnknownLanguage(_) => CliError::Usage(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Data(e.to_string())
    }
}
