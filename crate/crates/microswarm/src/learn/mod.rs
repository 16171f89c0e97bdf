//! Actor-critic learning: policy networks, return and advantage estimators,
//! policy-gradient losses, action samplers, the optimizer, random network
//! distillation, and the exploration schedule.

pub mod checkpoint;
pub mod losses;
pub mod mlp;
pub mod optimizer;
pub mod policy;
pub mod returns;
pub mod rnd;
pub mod sampler;
pub mod schedule;
pub mod update;

pub use checkpoint::PolicyCheckpoint;
pub use losses::{critic_loss, entropy_mean, log_softmax, ppo_loss, softmax, vpg_loss};
pub use mlp::{Dense, Mlp, MlpGrads};
pub use optimizer::{gradient_ascent_update, OptimizerKind, OptimizerState};
pub use policy::{Architecture, PolicyGrads, PolicyNetwork};
pub use returns::{advantages_expected, advantages_gae, expected_returns, normalize_in_place};
pub use rnd::RndState;
pub use sampler::{sample_from_logits, sample_from_probs, SamplerKind};
pub use schedule::{exploration_schedule, ExplorationState};
pub use update::{update_policy, Algorithm, Bootstrap, ReturnsMode, UpdateConfig, UpdateDiagnostics};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum LearnError {
    #[error("input width mismatch: expected {expected}, got {got}")]
    WidthMismatch { expected: usize, got: usize },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("non-finite {0}")]
    NonFinite(&'static str),
    #[error("empty batch")]
    EmptyBatch,
    #[error("parameter count mismatch")]
    ParamCountMismatch,
    #[error("checkpoint shape mismatch: expected {expected}, found {found}")]
    ShapeMismatch { expected: String, found: String },
    #[error("unsupported checkpoint version {0}")]
    CheckpointVersion(u32),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("buffer misaligned: {0}")]
    Misaligned(String),
}
