//! Synthetic camera-motion video corpora and a toy two-step adaptation
//! trainer: procedural scenes, camera trajectories, a software rasterizer,
//! dataset building, evaluation metrics and a small manual-gradient denoiser.
//!
//! Geometry, video tensors and metrics are generic over the scalar type;
//! the aliases below fix it for the common cases.

pub mod dataset;
pub mod geometry;
pub mod metrics;
pub mod renderer;
pub mod scalar;
pub mod scene;
pub mod seed;
pub mod toytrain;
pub mod trajectory;
pub mod video;

pub use scalar::Real;

pub type Vec3F64 = geometry::Vec3<f64>;
pub type Vec3F32 = geometry::Vec3<f32>;
pub type Mat3F64 = geometry::Mat3<f64>;
pub type Mat3F32 = geometry::Mat3<f32>;
pub type CameraPoseF64 = geometry::CameraPose<f64>;
pub type CameraPoseF32 = geometry::CameraPose<f32>;
pub type IntrinsicsF64 = geometry::Intrinsics<f64>;
pub type IntrinsicsF32 = geometry::Intrinsics<f32>;
pub type VideoF64 = video::VideoTensor<f64>;
pub type VideoF32 = video::VideoTensor<f32>;
