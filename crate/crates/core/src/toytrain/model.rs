use std::collections::hash_map::DefaultHasher;
use std::hash::Hasher;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{NoiseSchedule, ToyError};
use crate::geometry::{relative_pose, CameraPose};

pub const CHANNELS: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Silu,
    Identity,
}

impl Activation {
    #[inline]
    pub fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Silu => z / (1.0 + (-z).exp()),
            Activation::Identity => z,
        }
    }

    #[inline]
    pub fn derivative(self, z: f64) -> f64 {
        match self {
            Activation::Silu => {
                let s = 1.0 / (1.0 + (-z).exp());
                s * (1.0 + z * (1.0 - s))
            }
            Activation::Identity => 1.0,
        }
    }
}

/// Shape of the denoiser and of its condition vector.
///
/// Condition layout: `[motion slot (n_motion) | content one-hot (n_content) | virtual bit]`.
/// In the text paradigm the motion slot is a one-hot instruction id (id 0 is
/// "static"); in the trajectory paradigm it holds the encoder output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub frames: usize,
    pub height: usize,
    pub width: usize,
    pub hidden: usize,
    pub time_dim: usize,
    pub n_motion: usize,
    pub n_content: usize,
    pub activation: Activation,
    /// Per-element data scale used to precondition the network output.
    pub sigma_data: f64,
    /// Give the first layer (and its adapters) dense trainable weights on
    /// the noisy video. When off, those weights are held at zero and `x_t`
    /// reaches the output only through the preconditioning skip; a dense
    /// 6K-wide video pathway makes ancestral sampling unstable at this scale.
    #[serde(default)]
    pub video_input: bool,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            frames: 8,
            height: 16,
            width: 16,
            hidden: 256,
            time_dim: 16,
            n_motion: 3,
            n_content: 4,
            activation: Activation::Silu,
            sigma_data: 0.05,
            video_input: false,
        }
    }
}

impl ModelConfig {
    pub fn video_len(&self) -> usize {
        self.frames * self.height * self.width * CHANNELS
    }

    pub fn cond_dim(&self) -> usize {
        self.n_motion + self.n_content + 1
    }

    pub fn input_dim(&self) -> usize {
        self.video_len() + self.time_dim + self.cond_dim()
    }

    /// First input column the first layer actually reads.
    pub fn input_start(&self) -> usize {
        if self.video_input {
            0
        } else {
            self.video_len()
        }
    }

    pub fn feature_dim(&self) -> usize {
        6 * self.frames
    }

    pub fn validate(&self) -> Result<(), ToyError> {
        let bad = |m: &str| Err(ToyError::Config(m.into()));
        if self.frames < 2 || self.height == 0 || self.width == 0 {
            return bad("video needs at least 2 frames and a non-empty frame");
        }
        if self.hidden == 0 {
            return bad("hidden width must be positive");
        }
        if self.time_dim == 0 || self.time_dim % 2 != 0 {
            return bad("time embedding width must be even and positive");
        }
        if self.n_motion == 0 || self.n_content == 0 {
            return bad("motion and content vocabularies must be non-empty");
        }
        if !(self.sigma_data > 0.0 && self.sigma_data.is_finite()) {
            return bad("sigma_data must be positive");
        }
        Ok(())
    }

    /// Sinusoidal embedding of the diffusion step.
    pub fn time_embedding(&self, t: usize) -> Vec<f64> {
        let half = self.time_dim / 2;
        let mut out = Vec::with_capacity(self.time_dim);
        for i in 0..half {
            let w = 1000f64.powf(-(i as f64) / half as f64);
            let a = t as f64 * w;
            out.push(a.sin());
            out.push(a.cos());
        }
        out
    }

    /// `(a_t, b_t)` with `ε̂ = a_t·x_t + b_t·n`, where `n` is the raw network output.
    ///
    /// Equivalent to predicting `x̂0 = c_skip·x_t + c_out·n` and inverting the
    /// noising step; keeps the training target near unit scale at every `t`.
    pub fn output_coefficients(&self, t: usize, sched: &NoiseSchedule) -> (f64, f64) {
        let ab = sched.alpha_bar(t);
        let sd = self.sigma_data;
        let denom = ab * sd * sd + 1.0 - ab;
        ((1.0 - ab).sqrt() / denom, -sd * ab.sqrt() / denom.sqrt())
    }
}

pub fn checksum(parts: &[&[f64]]) -> u64 {
    let mut h = DefaultHasher::new();
    for p in parts {
        h.write_usize(p.len());
        for v in *p {
            h.write_u64(v.to_bits());
        }
    }
    h.finish()
}

fn gaussian(rng: &mut ChaCha8Rng, n: usize, std: f64) -> Vec<f64> {
    (0..n)
        .map(|_| {
            let z: f64 = StandardNormal.sample(rng);
            std * z
        })
        .collect()
}

/// Row-major `rows × cols` weight plus bias.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Affine {
    pub rows: usize,
    pub cols: usize,
    pub w: Vec<f64>,
    pub b: Vec<f64>,
}

impl Affine {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, w: vec![0.0; rows * cols], b: vec![0.0; rows] }
    }

    fn random(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Self {
        Self { rows, cols, w: gaussian(rng, rows * cols, 1.0 / (cols as f64).sqrt()), b: vec![0.0; rows] }
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.w[i * self.cols..(i + 1) * self.cols]
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.cols);
        (0..self.rows).map(|i| self.b[i] + dot(self.row(i), x)).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.w.iter().chain(&self.b).all(|v| v.is_finite())
    }

    pub fn checksum(&self) -> u64 {
        checksum(&[&self.w, &self.b])
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub(crate) fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Low-rank delta `(α/r)·B·A` for one affine layer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LoraFactors {
    pub rows: usize,
    pub cols: usize,
    pub rank: usize,
    pub alpha: f64,
    /// `rank × cols`.
    pub a: Vec<f64>,
    /// `rows × rank`.
    pub b: Vec<f64>,
}

impl LoraFactors {
    pub fn scale(&self) -> f64 {
        self.alpha / self.rank as f64
    }

    /// `A·x`.
    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        self.project_from(x, 0)
    }

    /// `A·x` over columns `start..` only.
    pub(crate) fn project_from(&self, x: &[f64], start: usize) -> Vec<f64> {
        (0..self.rank).map(|k| dot(&self.a[k * self.cols + start..(k + 1) * self.cols], &x[start..])).collect()
    }

    /// `out += (α/r)·B·v` for `v = A·x`.
    pub fn add_to(&self, v: &[f64], out: &mut [f64]) {
        let s = self.scale();
        for (i, o) in out.iter_mut().enumerate() {
            *o += s * dot(&self.b[i * self.rank..(i + 1) * self.rank], v);
        }
    }

    /// Materialised `(α/r)·B·A`, row-major `rows × cols`.
    pub fn delta(&self) -> Vec<f64> {
        let s = self.scale();
        let mut out = vec![0.0; self.rows * self.cols];
        for i in 0..self.rows {
            let row = &mut out[i * self.cols..(i + 1) * self.cols];
            for k in 0..self.rank {
                let bik = s * self.b[i * self.rank + k];
                if bik != 0.0 {
                    axpy(bik, &self.a[k * self.cols..(k + 1) * self.cols], row);
                }
            }
        }
        out
    }

    fn zeros_like(&self) -> Self {
        Self { a: vec![0.0; self.a.len()], b: vec![0.0; self.b.len()], ..self.clone() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdapterRole {
    Appearance,
    Camera,
}

/// One low-rank delta per affine layer of the denoiser.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Adapter {
    pub role: AdapterRole,
    pub layers: Vec<LoraFactors>,
}

impl Adapter {
    /// `A` is Gaussian, `B` is zero, so a fresh adapter changes nothing.
    /// `alpha` defaults to the rank (unit scale).
    pub fn new(
        role: AdapterRole,
        cfg: &ModelConfig,
        rank: usize,
        alpha: Option<f64>,
        seed: u64,
    ) -> Result<Self, ToyError> {
        if rank == 0 {
            return Err(ToyError::RankMismatch("rank must be at least 1".into()));
        }
        let alpha = alpha.unwrap_or(rank as f64);
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(ToyError::Config(format!("adapter alpha must be positive, got {alpha}")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let shapes = [(cfg.hidden, cfg.input_dim()), (cfg.video_len(), cfg.hidden)];
        let mut layers: Vec<LoraFactors> = shapes
            .iter()
            .map(|&(rows, cols)| LoraFactors {
                rows,
                cols,
                rank,
                alpha,
                a: gaussian(&mut rng, rank * cols, 1.0 / (cols as f64).sqrt()),
                b: vec![0.0; rows * rank],
            })
            .collect();
        let start = cfg.input_start();
        let first = &mut layers[0];
        for row in first.a.chunks_mut(first.cols) {
            row[..start].iter_mut().for_each(|v| *v = 0.0);
        }
        Ok(Self { role, layers })
    }

    pub fn rank(&self) -> usize {
        self.layers.first().map_or(0, |l| l.rank)
    }

    pub fn fits(&self, model: &Denoiser) -> Result<(), ToyError> {
        let want = [(model.l1.rows, model.l1.cols), (model.l2.rows, model.l2.cols)];
        if self.layers.len() != want.len() {
            return Err(ToyError::RankMismatch(format!("{} adapter layers for a 2-layer model", self.layers.len())));
        }
        for (l, &(rows, cols)) in self.layers.iter().zip(&want) {
            if l.rank == 0
                || l.rows != rows
                || l.cols != cols
                || l.a.len() != l.rank * cols
                || l.b.len() != rows * l.rank
            {
                return Err(ToyError::RankMismatch(format!(
                    "factors B {}×{}, A {}×{} do not fit a {rows}×{cols} layer",
                    l.rows, l.rank, l.rank, l.cols
                )));
            }
        }
        Ok(())
    }

    pub fn zeros_like(&self) -> Self {
        Self { role: self.role, layers: self.layers.iter().map(LoraFactors::zeros_like).collect() }
    }

    pub fn checksum(&self) -> u64 {
        let parts: Vec<&[f64]> = self.layers.iter().flat_map(|l| [l.a.as_slice(), l.b.as_slice()]).collect();
        checksum(&parts)
    }
}

/// Maps per-frame relative-pose features to the motion slot. `delta` is
/// the fine-tune offset trained in the trajectory paradigm.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryEncoder {
    pub base: Affine,
    pub delta: Affine,
}

impl TrajectoryEncoder {
    pub fn new(cfg: &ModelConfig, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let base = Affine::random(cfg.n_motion, cfg.feature_dim(), &mut rng);
        Self { delta: Affine::zeros(base.rows, base.cols), base }
    }

    pub fn encode(&self, features: &[f64], with_delta: bool) -> Result<Vec<f64>, ToyError> {
        if features.len() != self.base.cols {
            return Err(ToyError::Shape(format!(
                "{} trajectory features, encoder expects {}",
                features.len(),
                self.base.cols
            )));
        }
        let mut out = self.base.forward(features);
        if with_delta {
            for (o, d) in out.iter_mut().zip(self.delta.forward(features)) {
                *o += d;
            }
        }
        Ok(out)
    }

    pub fn base_checksum(&self) -> u64 {
        self.base.checksum()
    }
}

/// Axis-angle and translation of each frame relative to frame 0, flattened `K×6`.
pub fn pose_features(poses: &[CameraPose]) -> Vec<f64> {
    let Some(first) = poses.first() else { return Vec::new() };
    let mut out = Vec::with_capacity(6 * poses.len());
    for p in poses {
        let rel = relative_pose(first, p);
        out.extend(rel.rotation.log().to_array());
        out.extend(rel.translation.to_array());
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MotionInput {
    /// Text paradigm: index into the motion vocabulary.
    Instruction(usize),
    /// Trajectory paradigm: `K×6` features from [`pose_features`].
    Trajectory(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub motion: MotionInput,
    pub content: usize,
    pub virtual_bit: bool,
}

impl Condition {
    pub fn instruction(motion: usize, content: usize, virtual_bit: bool) -> Self {
        Self { motion: MotionInput::Instruction(motion), content, virtual_bit }
    }

    pub fn with_virtual_bit(&self, on: bool) -> Self {
        Self { virtual_bit: on, ..self.clone() }
    }

    /// Motion-slot values, given an encoder for trajectory inputs.
    fn motion_slot(
        &self,
        cfg: &ModelConfig,
        encoder: Option<(&TrajectoryEncoder, bool)>,
    ) -> Result<Vec<f64>, ToyError> {
        match &self.motion {
            MotionInput::Instruction(id) => {
                if *id >= cfg.n_motion {
                    return Err(ToyError::Example(format!("motion id {id} outside vocabulary of {}", cfg.n_motion)));
                }
                let mut v = vec![0.0; cfg.n_motion];
                v[*id] = 1.0;
                Ok(v)
            }
            MotionInput::Trajectory(f) => {
                let (enc, with_delta) =
                    encoder.ok_or_else(|| ToyError::Config("trajectory condition without an encoder".into()))?;
                enc.encode(f, with_delta)
            }
        }
    }

    fn vector(&self, cfg: &ModelConfig, encoder: Option<(&TrajectoryEncoder, bool)>) -> Result<Vec<f64>, ToyError> {
        if self.content >= cfg.n_content {
            return Err(ToyError::Example(format!("content id {} outside 0..{}", self.content, cfg.n_content)));
        }
        let mut v = self.motion_slot(cfg, encoder)?;
        v.extend((0..cfg.n_content).map(|i| if i == self.content { 1.0 } else { 0.0 }));
        v.push(if self.virtual_bit { 1.0 } else { 0.0 });
        Ok(v)
    }
}

/// Base weights: `input → hidden → video`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Denoiser {
    pub config: ModelConfig,
    pub l1: Affine,
    pub l2: Affine,
}

impl Denoiser {
    pub fn new(config: ModelConfig, seed: u64) -> Result<Self, ToyError> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut l1 = Affine::random(config.hidden, config.input_dim(), &mut rng);
        // Fan-in per input group, so the short time/condition block is not
        // drowned out by the long noisy-video block.
        let (video, side) = (config.video_len(), config.time_dim + config.cond_dim());
        let (sv, ss) = (1.0 / (video as f64).sqrt(), 1.0 / (side as f64).sqrt());
        let full = 1.0 / (l1.cols as f64).sqrt();
        let sv = if config.video_input { sv } else { 0.0 };
        for row in l1.w.chunks_mut(l1.cols) {
            row[..video].iter_mut().for_each(|w| *w *= sv / full);
            row[video..].iter_mut().for_each(|w| *w *= ss / full);
        }
        let l2 = Affine::random(config.video_len(), config.hidden, &mut rng);
        Ok(Self { config, l1, l2 })
    }

    pub fn checksum(&self) -> u64 {
        checksum(&[&self.l1.w, &self.l1.b, &self.l2.w, &self.l2.b])
    }

    pub fn is_finite(&self) -> bool {
        self.l1.is_finite() && self.l2.is_finite()
    }
}

/// Intermediate values of one forward pass, kept for backprop.
#[derive(Clone, Debug)]
pub(crate) struct Forward {
    pub input: Vec<f64>,
    pub z1: Vec<f64>,
    pub h: Vec<f64>,
    /// `A·input` per active adapter (layer 1), then `A·h` (layer 2).
    pub proj1: Vec<Vec<f64>>,
    pub proj2: Vec<Vec<f64>>,
    pub eps_hat: Vec<f64>,
    pub coef: (f64, f64),
}

/// A denoiser with an active adapter set. Order of adapters is irrelevant
/// to the result up to rounding.
#[derive(Clone, Copy, Debug)]
pub struct Stack<'a> {
    pub model: &'a Denoiser,
    pub encoder: Option<&'a TrajectoryEncoder>,
    /// Whether the encoder's fine-tune delta is applied.
    pub encoder_delta: bool,
    pub appearance: Option<&'a Adapter>,
    pub camera: Option<&'a Adapter>,
}

impl<'a> Stack<'a> {
    pub fn base(model: &'a Denoiser) -> Self {
        Self { model, encoder: None, encoder_delta: false, appearance: None, camera: None }
    }

    pub fn with_encoder(self, encoder: &'a TrajectoryEncoder, delta: bool) -> Self {
        Self { encoder: Some(encoder), encoder_delta: delta, ..self }
    }

    pub fn with_appearance(self, a: Option<&'a Adapter>) -> Self {
        Self { appearance: a, ..self }
    }

    pub fn with_camera(self, c: Option<&'a Adapter>) -> Self {
        Self { camera: c, ..self }
    }

    pub(crate) fn adapters(&self) -> impl Iterator<Item = &'a Adapter> {
        self.appearance.into_iter().chain(self.camera)
    }

    pub fn check(&self) -> Result<(), ToyError> {
        for a in self.adapters() {
            a.fits(self.model)?;
        }
        Ok(())
    }

    pub fn condition_vector(&self, cond: &Condition) -> Result<Vec<f64>, ToyError> {
        cond.vector(&self.model.config, self.encoder.map(|e| (e, self.encoder_delta)))
    }

    pub fn predict_eps(
        &self,
        cond: &Condition,
        x_t: &[f64],
        t: usize,
        sched: &NoiseSchedule,
    ) -> Result<Vec<f64>, ToyError> {
        self.check()?;
        let c = self.condition_vector(cond)?;
        Ok(self.forward(&c, x_t, t, sched)?.eps_hat)
    }

    pub(crate) fn forward(
        &self,
        cond: &[f64],
        x_t: &[f64],
        t: usize,
        sched: &NoiseSchedule,
    ) -> Result<Forward, ToyError> {
        let cfg = &self.model.config;
        if x_t.len() != cfg.video_len() {
            return Err(ToyError::Shape(format!(
                "noisy video has {} values, model expects {}",
                x_t.len(),
                cfg.video_len()
            )));
        }
        if t >= sched.steps() {
            return Err(ToyError::Step { t, steps: sched.steps() });
        }
        let mut input = Vec::with_capacity(cfg.input_dim());
        input.extend_from_slice(x_t);
        input.extend(cfg.time_embedding(t));
        input.extend_from_slice(cond);

        let (l1, start) = (&self.model.l1, cfg.input_start());
        let mut z1: Vec<f64> = (0..l1.rows).map(|i| l1.b[i] + dot(&l1.row(i)[start..], &input[start..])).collect();
        let mut proj1 = Vec::new();
        for a in self.adapters() {
            let v = a.layers[0].project_from(&input, start);
            a.layers[0].add_to(&v, &mut z1);
            proj1.push(v);
        }
        let act = cfg.activation;
        let h: Vec<f64> = z1.iter().map(|&z| act.apply(z)).collect();

        let mut n = self.model.l2.forward(&h);
        let mut proj2 = Vec::new();
        for a in self.adapters() {
            let v = a.layers[1].project(&h);
            a.layers[1].add_to(&v, &mut n);
            proj2.push(v);
        }
        let coef = cfg.output_coefficients(t, sched);
        let eps_hat = x_t.iter().zip(&n).map(|(x, o)| coef.0 * x + coef.1 * o).collect();
        Ok(Forward { input, z1, h, proj1, proj2, eps_hat, coef })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> ModelConfig {
        ModelConfig {
            frames: 2,
            height: 3,
            width: 4,
            hidden: 10,
            n_motion: 3,
            n_content: 2,
            video_input: true,
            ..ModelConfig::default()
        }
    }

    fn randomize_b(a: &mut Adapter, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for l in &mut a.layers {
            l.b = gaussian(&mut rng, l.b.len(), 0.3);
        }
    }

    #[test]
    fn fresh_adapter_is_a_bitwise_no_op() {
        let cfg = small();
        let m = Denoiser::new(cfg.clone(), 1).unwrap();
        let a = Adapter::new(AdapterRole::Appearance, &cfg, 4, None, 2).unwrap();
        let sched = NoiseSchedule::default();
        let x: Vec<f64> = (0..cfg.video_len()).map(|i| (i as f64 * 0.37).sin()).collect();
        let c = Condition::instruction(1, 0, true);
        let base = Stack::base(&m).predict_eps(&c, &x, 12, &sched).unwrap();
        let with = Stack::base(&m).with_appearance(Some(&a)).predict_eps(&c, &x, 12, &sched).unwrap();
        assert_eq!(base, with);
        assert_eq!(base.len(), cfg.video_len());
    }

    #[test]
    fn rank_shapes_and_mismatch() {
        let cfg = small();
        let m = Denoiser::new(cfg.clone(), 1).unwrap();
        let a = Adapter::new(AdapterRole::Appearance, &cfg, 4, None, 2).unwrap();
        for l in &a.layers {
            assert_eq!(l.b.len(), l.rows * 4);
            assert_eq!(l.a.len(), 4 * l.cols);
        }
        assert!(a.fits(&m).is_ok());
        let other = ModelConfig { hidden: 11, ..cfg.clone() };
        let b = Adapter::new(AdapterRole::Camera, &other, 8, None, 3).unwrap();
        let sched = NoiseSchedule::default();
        let x = vec![0.0; cfg.video_len()];
        let err =
            Stack::base(&m).with_camera(Some(&b)).predict_eps(&Condition::instruction(0, 0, false), &x, 0, &sched);
        assert!(matches!(err, Err(ToyError::RankMismatch(_))));
        assert!(Adapter::new(AdapterRole::Camera, &cfg, 0, None, 3).is_err());
    }

    #[test]
    fn stacked_adapters_match_materialized_weights() {
        let cfg = small();
        let m = Denoiser::new(cfg.clone(), 5).unwrap();
        let mut a = Adapter::new(AdapterRole::Appearance, &cfg, 4, Some(2.0), 6).unwrap();
        let mut c = Adapter::new(AdapterRole::Camera, &cfg, 8, None, 7).unwrap();
        randomize_b(&mut a, 8);
        randomize_b(&mut c, 9);
        let sched = NoiseSchedule::default();
        let x: Vec<f64> = (0..cfg.video_len()).map(|i| (i as f64 * 0.11).cos()).collect();
        let cond = Condition::instruction(2, 1, false);
        let t = 33;
        let got =
            Stack::base(&m).with_appearance(Some(&a)).with_camera(Some(&c)).predict_eps(&cond, &x, t, &sched).unwrap();

        // Oracle: explicit W + δa + δc, plain loops.
        let merged = |w: &[f64], k: usize| -> Vec<f64> {
            let (da, dc) = (a.layers[k].delta(), c.layers[k].delta());
            w.iter().zip(da).zip(dc).map(|((w, x), y)| w + x + y).collect()
        };
        let (w1, w2) = (merged(&m.l1.w, 0), merged(&m.l2.w, 1));
        let mut input = x.clone();
        input.extend(cfg.time_embedding(t));
        input.extend([0.0, 0.0, 1.0, 0.0, 1.0, 0.0]);
        let mut h = vec![0.0; cfg.hidden];
        for i in 0..cfg.hidden {
            let mut s = m.l1.b[i];
            for j in 0..input.len() {
                s += w1[i * input.len() + j] * input[j];
            }
            h[i] = s / (1.0 + (-s).exp());
        }
        let ab = sched.alpha_bar(t);
        let sd = cfg.sigma_data;
        let c_skip = ab.sqrt() * sd * sd / (ab * sd * sd + 1.0 - ab);
        let c_out = ((1.0 - ab) * sd * sd / (ab * sd * sd + 1.0 - ab)).sqrt();
        for r in 0..cfg.video_len() {
            let mut o = m.l2.b[r];
            for i in 0..cfg.hidden {
                o += w2[r * cfg.hidden + i] * h[i];
            }
            let x0_hat = c_skip * x[r] + c_out * o;
            let eps = (x[r] - ab.sqrt() * x0_hat) / (1.0 - ab).sqrt();
            assert!((eps - got[r]).abs() < 1e-10, "{r}: {eps} vs {}", got[r]);
        }
    }

    #[test]
    fn condition_layout() {
        let cfg = small();
        let m = Denoiser::new(cfg.clone(), 1).unwrap();
        let s = Stack::base(&m);
        assert_eq!(
            s.condition_vector(&Condition::instruction(1, 1, true)).unwrap(),
            vec![0.0, 1.0, 0.0, 0.0, 1.0, 1.0]
        );
        assert!(s.condition_vector(&Condition::instruction(3, 0, true)).is_err());
        assert!(s.condition_vector(&Condition::instruction(0, 2, true)).is_err());
        let traj = Condition { motion: MotionInput::Trajectory(vec![0.0; 12]), content: 0, virtual_bit: false };
        assert!(s.condition_vector(&traj).is_err());
        let enc = TrajectoryEncoder::new(&cfg, 4);
        let v = s.with_encoder(&enc, true).condition_vector(&traj).unwrap();
        assert_eq!(v.len(), cfg.cond_dim());
        // Static trajectory features are zero, so the slot is the bias.
        assert_eq!(&v[..3], &enc.base.b[..]);
    }

    #[test]
    fn pose_features_of_static_path_are_zero() {
        let p = crate::geometry::look_at(
            crate::geometry::Vec3::new(1.0, 2.0, 3.0),
            crate::geometry::Vec3::zero(),
            crate::geometry::Vec3::new(0.0, 1.0, 0.0),
        )
        .unwrap();
        let f = pose_features(&[p, p, p]);
        assert_eq!(f.len(), 18);
        assert!(f.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn silu_derivative_matches_difference() {
        for z in [-3.0, -0.2, 0.0, 0.7, 4.0] {
            let h = 1e-6;
            let fd = (Activation::Silu.apply(z + h) - Activation::Silu.apply(z - h)) / (2.0 * h);
            assert!((fd - Activation::Silu.derivative(z)).abs() < 1e-8);
        }
    }
}
