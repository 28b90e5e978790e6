//! A desk-scale video denoiser with hand-written gradients, low-rank
//! appearance/camera adapters and the two-step adaptation procedure.
//!
//! Everything here is `f64`: gradient checks and bit-exact checkpoints rely
//! on it.

pub mod checkpoint;
pub mod data;
pub mod experiment;
mod gradcheck;
mod model;
mod sample;
mod schedule;
mod train;
pub mod world;

use thiserror::Error;

pub use gradcheck::{grad_check, GradCheckReport, Probe, PROBE_MAX_SCALARS};
pub use model::{
    checksum, pose_features, Activation, Adapter, AdapterRole, Affine, Condition, Denoiser, LoraFactors, ModelConfig,
    MotionInput, Stack, TrajectoryEncoder,
};
pub use sample::{ancestral, sample, SAMPLE_FPS};
pub use schedule::{forward_noise, predict_x0, NoiseSchedule};
pub use train::{
    loss_and_grad, pretrain_base, train_appearance, train_camera, train_camera_unadapted, CameraModule, Example, Grads,
    LossParts, Optimizer, Paradigm, StepLog, TrainConfig, Trainable, TrainingCurve,
};

#[derive(Debug, Error)]
pub enum ToyError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("diffusion step {t} outside 0..{steps}")]
    Step { t: usize, steps: usize },
    #[error("adapter does not fit the model: {0}")]
    RankMismatch(String),
    #[error("training set is empty")]
    EmptyDataset,
    #[error("camera training needs a frozen appearance adapter")]
    MissingAppearanceAdapter,
    #[error("invalid training example: {0}")]
    Example(String),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error("{path}: {source}")]
    Io { path: std::path::PathBuf, source: std::io::Error },
    #[error(transparent)]
    Geometry(#[from] crate::geometry::GeometryError),
    #[error(transparent)]
    Metrics(#[from] crate::metrics::MetricsError),
    #[error(transparent)]
    Dataset(#[from] crate::dataset::DatasetError),
}
