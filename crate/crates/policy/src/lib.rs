//! Hierarchical policy networks: a shared state encoder (message-passing
//! graph network or graph-convolution variant, lattice encoder, space-group
//! embedding) with forward and backward distribution heads for space group,
//! lattice parameters, atom coordinates, and atom type.

mod distributions;
mod encoder;
mod heads;
mod params;

pub use distributions::{
    beta_log_prob, categorical_log_prob, sample_beta, sample_categorical, BETA_CONCENTRATION_FLOOR,
};
pub use encoder::{lattice_feature_vector, StateEmbedding, StateInput};
pub use heads::{ActionDistributions, BackwardDistributions};
pub use params::{BoundPolicy, EncoderKind, PolicyConfig, PolicyParameters};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum PolicyError {
    #[error("all elements are masked; the composition constraint is unsatisfiable")]
    AllElementsMasked,
    #[error("element index {0} is masked or out of range")]
    BadElementChoice(usize),
    #[error("checkpoint is missing parameter `{0}`")]
    MissingParameter(String),
    #[error("parameter `{name}` has shape {found:?}, expected {expected:?}")]
    ParameterShape { name: String, found: Vec<usize>, expected: Vec<usize> },
    #[error(transparent)]
    Tensor(#[from] crysflow_tensor::TensorError),
}

pub type Result<T> = std::result::Result<T, PolicyError>;
