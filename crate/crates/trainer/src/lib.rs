//! Hierarchical trajectory sampling, the trajectory-balance objective, and
//! the training loop, plus a small enumerable grid environment used to
//! validate the objective end to end.

mod loss;
mod sampler;
mod state;
pub mod toy;
mod train;

pub use loss::tb_loss;
pub use sampler::{
    sample_trajectory, sample_trajectory_on, ActionSource, StepAction, TrajectoryLogProb,
    TrajectoryRecord, TrajectoryStep,
};
pub use state::{CompositionConstraint, CrystalState, PolicyMode, SamplerConfig};
pub use train::{rollout_seed, EpochLog, TrainConfig, Trainer};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum TrainerError {
    #[error("trajectory rejected: {0}")]
    Rejected(String),
    #[error("trajectory kept being rejected after {0} attempts")]
    RetriesExhausted(usize),
    #[error("sampler config: {0}")]
    BadConfig(String),
    #[error("non-finite loss at epoch {epoch}: {detail}")]
    Diverged { epoch: usize, detail: String },
    #[error(transparent)]
    Policy(#[from] crysflow_policy::PolicyError),
    #[error(transparent)]
    Tensor(#[from] crysflow_tensor::TensorError),
    #[error(transparent)]
    Spacegroup(#[from] crysflow_spacegroup::SpacegroupError),
    #[error(transparent)]
    Reward(#[from] crysflow_reward::RewardError),
    #[error(transparent)]
    Xtal(#[from] crysflow_xtal::XtalError),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, TrainerError>;
