//! Convolutional autoencoder trained from scratch, and the reconstruction
//! error it assigns to another domain's images.
//!
//! Encoder: per stage a 3×3 conv, leaky ReLU and 2×2 max-pool, then a
//! linear map to the latent vector. Decoder: a linear expansion followed by
//! stride-2 transposed convs that double the spatial size, ending in a
//! sigmoid.

use std::path::{Path, PathBuf};

use thiserror::Error;

mod io;
mod layers;
mod model;
mod train;

pub use io::{decode_params, encode_params, load_params, save_params};
pub use model::{ae_backward, ae_forward, ae_loss, visual_divergence, AeConfig, AeParams, Layer};
pub use train::{adam_step, train_autoencoder, AdamConfig, AdamState, TrainOptions, TrainReport};

#[derive(Debug, Error)]
pub enum VisDivError {
    #[error("invalid autoencoder config: {0}")]
    InvalidConfig(String),
    #[error("image is {got:?}, expected {expected:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        got: (usize, usize),
    },
    #[error("empty image set")]
    EmptySet,
    #[error("gradient does not match the parameter layout")]
    GradientShape,
    #[error("non-finite gradient {value} in {tensor}[{index}]")]
    NonFiniteGradient { tensor: String, index: usize, value: f64 },
    #[error("training diverged at epoch {epoch}")]
    Diverged { epoch: usize },
    #[error("bad parameter file: {0}")]
    Format(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl VisDivError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        VisDivError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}
