//! Dense 64-bit float tensors with a reverse-mode autodiff tape, an Adam
//! optimizer, and a named-tensor checkpoint container.
//!
//! The tape records a DAG of operations; [`Tape::backward`] walks it once in
//! reverse to produce exact gradients of a scalar output with respect to every
//! leaf. Everything is f64: the training objective involves log-ratios of
//! long products, where single precision loses too many digits.

mod checkpoint;
mod gradcheck;
mod optim;
mod special;
mod tape;
mod tensor;

pub use checkpoint::{load_checkpoint, save_checkpoint, Checkpoint};
pub use gradcheck::{grad_check, GradCheckReport};
pub use optim::Adam;
pub use special::{digamma, ln_gamma};
pub use tape::{Gradients, Tape, Var};
pub use tensor::Tensor;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum TensorError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("backward requires a scalar output, got shape {0:?}")]
    NonScalarOutput(Vec<usize>),
    #[error("non-finite value produced by op `{op}` (node {node})")]
    NonFinite { op: &'static str, node: usize },
    #[error("checkpoint i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed checkpoint: {0}")]
    BadCheckpoint(String),
}

pub type Result<T> = std::result::Result<T, TensorError>;
