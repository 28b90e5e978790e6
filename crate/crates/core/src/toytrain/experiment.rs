//! The full two-step procedure on the toy world, with its ablation.

use serde::{Deserialize, Serialize};

use super::world::{ToyWorld, WorldConfig, N_MOTIONS};
use super::{
    pretrain_base, sample, train_appearance, train_camera, train_camera_unadapted, Adapter, CameraModule, Denoiser,
    NoiseSchedule, Paradigm, Stack, ToyError, TrainConfig, TrainingCurve,
};
use crate::metrics::{motion_correlation, style_score};
use crate::seed::mix;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub world: WorldConfig,
    pub hidden: usize,
    pub base: TrainConfig,
    pub appearance: TrainConfig,
    pub camera: TrainConfig,
    /// Also train camera control without the appearance stage.
    pub ablation: bool,
    pub sample_seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            world: WorldConfig::default(),
            hidden: 256,
            base: TrainConfig::base(),
            appearance: TrainConfig::appearance(),
            camera: TrainConfig::camera(),
            ablation: true,
            sample_seed: 99,
        }
    }
}

/// Scores of one sampled clip per `(content, motion)` pair.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SampleScores {
    pub motion_correlation: Vec<f64>,
    pub style_score: Vec<f64>,
}

impl SampleScores {
    pub fn mean_motion(&self) -> f64 {
        mean(&self.motion_correlation)
    }

    pub fn mean_style(&self) -> f64 {
        mean(&self.style_score)
    }
}

fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.iter().sum::<f64>() / v.len() as f64
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    /// `Δθ_cd` only, virtual bit cleared.
    pub dropped: SampleScores,
    /// `Δθ_a + Δθ_cd`, virtual bit cleared.
    pub kept: SampleScores,
    /// Camera adapter trained without step 1, sampled alone.
    pub ablation_dropped: Option<SampleScores>,
    pub base_curve: TrainingCurve,
    pub appearance_curve: TrainingCurve,
    pub camera_curve: TrainingCurve,
}

/// Samples every `(content, moving motion)` pair and scores it against
/// the neutral render of the same pair.
pub fn evaluate(
    world: &ToyWorld,
    stack: &Stack<'_>,
    seed: u64,
    sched: &NoiseSchedule,
) -> Result<SampleScores, ToyError> {
    let mut out = SampleScores::default();
    for motion in 1..N_MOTIONS {
        for content in 0..world.config.n_content {
            let cond = world.condition(motion, content, false, Paradigm::Text);
            let video = sample(stack, &cond, mix(seed, &[motion as u64, content as u64]), sched)?;
            let mc = motion_correlation(&video, &world.displacements(motion))?;
            out.motion_correlation.push(mc.value);
            out.style_score.push(style_score(&video, &world.neutral_reference(content, motion))?);
        }
    }
    Ok(out)
}

fn camera_adapter(m: CameraModule) -> Adapter {
    match m {
        CameraModule::Adapter(a) => a,
        CameraModule::EncoderDelta(_) => unreachable!("text paradigm yields an adapter"),
    }
}

pub struct Trained {
    pub world: ToyWorld,
    pub base: Denoiser,
    pub appearance: Adapter,
    pub camera: Adapter,
    pub report: ExperimentReport,
}

pub fn run(cfg: &ExperimentConfig) -> Result<Trained, ToyError> {
    let sched = NoiseSchedule::default();
    let world = ToyWorld::new(cfg.world.clone())?;
    let model_cfg = super::ModelConfig { hidden: cfg.hidden, ..world.model_config() };
    let (base, encoder, base_curve) = pretrain_base(model_cfg, &world.base_set(Paradigm::Text), &cfg.base, &sched)?;
    let (appearance, appearance_curve) =
        train_appearance(&base, &encoder, &world.appearance_set(Paradigm::Text), &cfg.appearance, &sched)?;
    let x_c = world.camera_set(Paradigm::Text);
    let (camera, camera_curve) =
        train_camera(&base, &encoder, Some(&appearance), &x_c, &cfg.camera, Paradigm::Text, &sched)?;
    let camera = camera_adapter(camera);

    let dropped = evaluate(&world, &Stack::base(&base).with_camera(Some(&camera)), cfg.sample_seed, &sched)?;
    let kept = evaluate(
        &world,
        &Stack::base(&base).with_appearance(Some(&appearance)).with_camera(Some(&camera)),
        cfg.sample_seed,
        &sched,
    )?;
    let ablation_dropped = if cfg.ablation {
        let (alone, _) = train_camera_unadapted(&base, &encoder, &x_c, &cfg.camera, Paradigm::Text, &sched)?;
        let alone = camera_adapter(alone);
        Some(evaluate(&world, &Stack::base(&base).with_camera(Some(&alone)), cfg.sample_seed, &sched)?)
    } else {
        None
    };
    let report = ExperimentReport { dropped, kept, ablation_dropped, base_curve, appearance_curve, camera_curve };
    Ok(Trained { world, base, appearance, camera, report })
}
