use std::borrow::Cow;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::model::{axpy, Forward};
use super::{
    forward_noise, predict_x0, Adapter, AdapterRole, Affine, Condition, Denoiser, MotionInput, NoiseSchedule, Stack,
    ToyError, TrajectoryEncoder,
};
use crate::metrics::flow_loss;
use crate::video::VideoTensor;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Paradigm {
    Text,
    Trajectory,
}

/// One clean clip (`K·H·W·3` values in `[-1, 1]`) and its condition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Example {
    pub video: Vec<f64>,
    pub condition: Condition,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    /// Weight of the flow term in step 2.
    pub lambda: f64,
    pub lr: f64,
    /// Fraction of steps over which the rate ramps up linearly.
    pub warmup_frac: f64,
    pub steps: usize,
    pub batch_size: usize,
    pub rank: usize,
    /// Adapter scale numerator; `None` means `alpha = rank`.
    pub alpha: Option<f64>,
    pub seed: u64,
    pub optimizer: Optimizer,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Optimizer {
    /// Plain gradient descent.
    Gd,
    /// Adam with bias correction.
    Adam { beta1: f64, beta2: f64, eps: f64 },
}

impl Optimizer {
    pub const ADAM: Optimizer = Optimizer::Adam { beta1: 0.9, beta2: 0.999, eps: 1e-8 };
}

/// Per-tensor optimizer memory, indexed by a fixed visiting order.
struct OptimizerState {
    kind: Optimizer,
    t: i32,
    moments: Vec<(Vec<f64>, Vec<f64>)>,
}

impl OptimizerState {
    fn new(kind: Optimizer) -> Self {
        Self { kind, t: 0, moments: Vec::new() }
    }

    fn begin_step(&mut self) {
        self.t += 1;
    }

    fn update(&mut self, slot: usize, p: &mut [f64], g: &[f64], lr: f64) {
        match self.kind {
            Optimizer::Gd => axpy(-lr, g, p),
            Optimizer::Adam { beta1, beta2, eps } => {
                if self.moments.len() <= slot {
                    self.moments.resize_with(slot + 1, || (Vec::new(), Vec::new()));
                }
                let (m, v) = &mut self.moments[slot];
                if m.is_empty() {
                    *m = vec![0.0; p.len()];
                    *v = vec![0.0; p.len()];
                }
                let (c1, c2) = (1.0 - beta1.powi(self.t), 1.0 - beta2.powi(self.t));
                for i in 0..p.len() {
                    m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
                    v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
                    p[i] -= lr * (m[i] / c1) / ((v[i] / c2).sqrt() + eps);
                }
            }
        }
    }
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            lambda: 0.1,
            lr: 3e-3,
            warmup_frac: 0.05,
            steps: 600,
            batch_size: 8,
            rank: 4,
            alpha: None,
            seed: 0,
            optimizer: Optimizer::ADAM,
        }
    }
}

impl TrainConfig {
    pub fn base() -> Self {
        Self::default()
    }

    pub fn appearance() -> Self {
        Self { rank: 4, steps: 400, ..Self::default() }
    }

    /// The camera stage has to learn a large change (content motion), so
    /// it runs longer with a larger batch and rate.
    pub fn camera() -> Self {
        Self { rank: 8, lr: 1e-2, steps: 1500, batch_size: 16, ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), ToyError> {
        let bad = |m: String| Err(ToyError::Config(m));
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return bad(format!("lambda must be ≥ 0, got {}", self.lambda));
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return bad(format!("learning rate must be > 0, got {}", self.lr));
        }
        if !(0.0..=1.0).contains(&self.warmup_frac) {
            return bad(format!("warmup_frac must lie in [0, 1], got {}", self.warmup_frac));
        }
        if self.steps == 0 || self.batch_size == 0 {
            return bad("steps and batch_size must be positive".into());
        }
        if self.rank == 0 {
            return bad("rank must be at least 1".into());
        }
        if let Optimizer::Adam { beta1, beta2, eps } = self.optimizer {
            if !((0.0..1.0).contains(&beta1) && (0.0..1.0).contains(&beta2) && eps > 0.0) {
                return bad(format!("invalid Adam settings {beta1}, {beta2}, {eps}"));
            }
        }
        Ok(())
    }

    pub fn lr_at(&self, step: usize) -> f64 {
        let warm = ((self.warmup_frac * self.steps as f64).ceil() as usize).max(1);
        self.lr * ((step + 1) as f64 / warm as f64).min(1.0)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LossParts {
    pub diffusion: f64,
    pub flow: f64,
    pub total: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepLog {
    pub step: usize,
    pub lr: f64,
    pub diffusion: f64,
    pub flow: f64,
    pub total: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainingCurve {
    pub steps: Vec<StepLog>,
}

impl TrainingCurve {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("step,lr,diffusion,flow,total\n");
        for l in &self.steps {
            s.push_str(&format!("{},{},{},{},{}\n", l.step, l.lr, l.diffusion, l.flow, l.total));
        }
        s
    }

    /// Mean of `f` over the `window` steps ending at `step` (inclusive).
    pub fn running_mean(&self, step: usize, window: usize, f: impl Fn(&StepLog) -> f64) -> f64 {
        let end = (step + 1).min(self.steps.len());
        let start = end.saturating_sub(window.max(1));
        let s = &self.steps[start..end];
        s.iter().map(f).sum::<f64>() / s.len() as f64
    }
}

/// Which parameter groups receive gradients.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Trainable {
    pub base: bool,
    pub appearance: bool,
    pub camera: bool,
    pub encoder_delta: bool,
}

/// Gradient buffers for the trainable groups only.
#[derive(Clone, Debug, PartialEq)]
pub struct Grads {
    pub l1: Option<Affine>,
    pub l2: Option<Affine>,
    pub appearance: Option<Adapter>,
    pub camera: Option<Adapter>,
    pub encoder_delta: Option<Affine>,
}

impl Grads {
    pub fn zeros(stack: &Stack<'_>, trainable: Trainable) -> Self {
        let m = stack.model;
        Self {
            l1: trainable.base.then(|| Affine::zeros(m.l1.rows, m.l1.cols)),
            l2: trainable.base.then(|| Affine::zeros(m.l2.rows, m.l2.cols)),
            appearance: stack.appearance.filter(|_| trainable.appearance).map(Adapter::zeros_like),
            camera: stack.camera.filter(|_| trainable.camera).map(Adapter::zeros_like),
            encoder_delta: stack
                .encoder
                .filter(|_| trainable.encoder_delta)
                .map(|e| Affine::zeros(e.delta.rows, e.delta.cols)),
        }
    }

    /// Every gradient value, in a fixed order.
    pub fn flat(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for a in self.l1.iter().chain(&self.l2) {
            out.extend(&a.w);
            out.extend(&a.b);
        }
        for ad in self.appearance.iter().chain(&self.camera) {
            for l in &ad.layers {
                out.extend(&l.a);
                out.extend(&l.b);
            }
        }
        if let Some(e) = &self.encoder_delta {
            out.extend(&e.w);
            out.extend(&e.b);
        }
        out
    }
}

fn check_example(stack: &Stack<'_>, ex: &Example) -> Result<(), ToyError> {
    let want = stack.model.config.video_len();
    if ex.video.len() != want {
        return Err(ToyError::Example(format!("clip has {} values, model expects {want}", ex.video.len())));
    }
    stack.condition_vector(&ex.condition).map(|_| ())
}

fn video(cfg: &super::ModelConfig, data: Vec<f64>) -> VideoTensor {
    VideoTensor::from_data(cfg.frames, cfg.height, cfg.width, 1.0, data).expect("length checked by caller")
}

/// Loss `‖ε − ε̂‖²/N + λ·flow(x̂0, x0)` at one `(t, ε)` and its gradient,
/// accumulated into `grads` with the given weight.
pub fn loss_and_grad(
    stack: &Stack<'_>,
    ex: &Example,
    t: usize,
    eps: &[f64],
    lambda: f64,
    sched: &NoiseSchedule,
    grads: &mut Grads,
    weight: f64,
) -> Result<LossParts, ToyError> {
    check_example(stack, ex)?;
    let cfg = &stack.model.config;
    let x_t = forward_noise(&ex.video, t, eps, sched)?;
    let cond = stack.condition_vector(&ex.condition)?;
    let fwd = stack.forward(&cond, &x_t, t, sched)?;
    let n = x_t.len() as f64;

    let diffusion = fwd.eps_hat.iter().zip(eps).map(|(e, t)| (e - t) * (e - t)).sum::<f64>() / n;
    let x0_hat = predict_x0(&x_t, &fwd.eps_hat, t, sched);
    let (pred, gt) = (video(cfg, x0_hat), video(cfg, ex.video.clone()));
    let flow = flow_loss(&pred, &gt)?;
    let parts = LossParts { diffusion, flow, total: diffusion + lambda * flow };

    let mut g_eps: Vec<f64> = fwd.eps_hat.iter().zip(eps).map(|(e, t)| weight * 2.0 * (e - t) / n).collect();
    if lambda != 0.0 {
        // d flow / d x̂0, then through x̂0 = (x_t − √(1−ᾱ)·ε̂)/√ᾱ.
        let ab = sched.alpha_bar(t);
        let dx0_deps = -(1.0 - ab).sqrt() / ab.sqrt();
        let (k, p) = (cfg.frames, pred.frame_len());
        let c = weight * lambda * dx0_deps / ((k - 1) as f64 * p as f64);
        for gap in 0..k - 1 {
            let (p0, p1) = (pred.frame(gap), pred.frame(gap + 1));
            let (q0, q1) = (gt.frame(gap), gt.frame(gap + 1));
            for i in 0..p {
                let r = (p1[i] - p0[i]) - (q1[i] - q0[i]);
                let s = if r > 0.0 {
                    1.0
                } else if r < 0.0 {
                    -1.0
                } else {
                    0.0
                };
                g_eps[(gap + 1) * p + i] += c * s;
                g_eps[gap * p + i] -= c * s;
            }
        }
    }
    backward(stack, &fwd, &g_eps, ex, grads)?;
    Ok(parts)
}

fn backward(stack: &Stack<'_>, fwd: &Forward, g_eps: &[f64], ex: &Example, grads: &mut Grads) -> Result<(), ToyError> {
    let m = stack.model;
    let cfg = &m.config;
    let adapters: Vec<&Adapter> = stack.adapters().collect();
    let g_n: Vec<f64> = g_eps.iter().map(|g| fwd.coef.1 * g).collect();

    // Layer 2.
    if let Some(l2) = &mut grads.l2 {
        for (r, &g) in g_n.iter().enumerate() {
            if g != 0.0 {
                axpy(g, &fwd.h, &mut l2.w[r * l2.cols..(r + 1) * l2.cols]);
            }
            l2.b[r] += g;
        }
    }
    let mut g_h = vec![0.0; cfg.hidden];
    for (r, &g) in g_n.iter().enumerate() {
        if g != 0.0 {
            axpy(g, m.l2.row(r), &mut g_h);
        }
    }
    for (j, a) in adapters.iter().enumerate() {
        let lf = &a.layers[1];
        let s = lf.scale();
        let bt_g = bt_times(lf, &g_n);
        for (k, &u) in bt_g.iter().enumerate() {
            axpy(s * u, &lf.a[k * lf.cols..(k + 1) * lf.cols], &mut g_h);
        }
        if let Some(ga) = adapter_grad(grads, a.role) {
            let gl = &mut ga.layers[1];
            for (i, &g) in g_n.iter().enumerate() {
                axpy(s * g, &fwd.proj2[j], &mut gl.b[i * lf.rank..(i + 1) * lf.rank]);
            }
            for (k, &u) in bt_g.iter().enumerate() {
                axpy(s * u, &fwd.h, &mut gl.a[k * lf.cols..(k + 1) * lf.cols]);
            }
        }
    }

    // Layer 1; columns before `start` are held fixed.
    let start = cfg.input_start();
    let g_z1: Vec<f64> = g_h.iter().zip(&fwd.z1).map(|(g, &z)| g * cfg.activation.derivative(z)).collect();
    if let Some(l1) = &mut grads.l1 {
        for (i, &g) in g_z1.iter().enumerate() {
            axpy(g, &fwd.input[start..], &mut l1.w[i * l1.cols + start..(i + 1) * l1.cols]);
            l1.b[i] += g;
        }
    }
    let mut bt_g1 = Vec::with_capacity(adapters.len());
    for (j, a) in adapters.iter().enumerate() {
        let lf = &a.layers[0];
        let s = lf.scale();
        let bt_g = bt_times(lf, &g_z1);
        if let Some(ga) = adapter_grad(grads, a.role) {
            let gl = &mut ga.layers[0];
            for (i, &g) in g_z1.iter().enumerate() {
                axpy(s * g, &fwd.proj1[j], &mut gl.b[i * lf.rank..(i + 1) * lf.rank]);
            }
            for (k, &u) in bt_g.iter().enumerate() {
                axpy(s * u, &fwd.input[start..], &mut gl.a[k * lf.cols + start..(k + 1) * lf.cols]);
            }
        }
        bt_g1.push(bt_g);
    }

    // Encoder delta, through the motion slot of the input.
    if let Some(ge) = &mut grads.encoder_delta {
        let MotionInput::Trajectory(features) = &ex.condition.motion else {
            return Err(ToyError::Example("encoder training needs trajectory conditions".into()));
        };
        let off = cfg.video_len() + cfg.time_dim;
        for j in 0..cfg.n_motion {
            let col = off + j;
            let mut g = 0.0;
            for (i, &gz) in g_z1.iter().enumerate() {
                g += m.l1.w[i * m.l1.cols + col] * gz;
            }
            for (a, bt_g) in adapters.iter().zip(&bt_g1) {
                let lf = &a.layers[0];
                for (k, &u) in bt_g.iter().enumerate() {
                    g += lf.scale() * lf.a[k * lf.cols + col] * u;
                }
            }
            axpy(g, features, &mut ge.w[j * ge.cols..(j + 1) * ge.cols]);
            ge.b[j] += g;
        }
    }
    Ok(())
}

/// `Bᵀ·g` (length `rank`).
fn bt_times(lf: &super::LoraFactors, g: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; lf.rank];
    for (i, &gi) in g.iter().enumerate() {
        if gi != 0.0 {
            axpy(gi, &lf.b[i * lf.rank..(i + 1) * lf.rank], &mut out);
        }
    }
    out
}

fn adapter_grad(grads: &mut Grads, role: AdapterRole) -> Option<&mut Adapter> {
    match role {
        AdapterRole::Appearance => grads.appearance.as_mut(),
        AdapterRole::Camera => grads.camera.as_mut(),
    }
}

/// Mutable training state; frozen parts stay borrowed.
struct Session<'a> {
    model: Cow<'a, Denoiser>,
    encoder: Cow<'a, TrajectoryEncoder>,
    encoder_delta: bool,
    appearance: Option<Cow<'a, Adapter>>,
    camera: Option<Adapter>,
    trainable: Trainable,
}

impl Session<'_> {
    fn stack(&self) -> Stack<'_> {
        Stack::base(&self.model)
            .with_encoder(&self.encoder, self.encoder_delta)
            .with_appearance(self.appearance.as_deref())
            .with_camera(self.camera.as_ref())
    }

    fn apply(&mut self, g: &Grads, lr: f64, opt: &mut OptimizerState) {
        opt.begin_step();
        let mut slot = 0;
        let mut step = |p: &mut [f64], g: &[f64]| {
            opt.update(slot, p, g, lr);
            slot += 1;
        };
        if let (Some(g1), Some(g2)) = (&g.l1, &g.l2) {
            let m = self.model.to_mut();
            step(&mut m.l1.w, &g1.w);
            step(&mut m.l1.b, &g1.b);
            step(&mut m.l2.w, &g2.w);
            step(&mut m.l2.b, &g2.b);
        }
        let pairs = [(g.appearance.as_ref(), AdapterRole::Appearance), (g.camera.as_ref(), AdapterRole::Camera)];
        for (ga, role) in pairs {
            let Some(ga) = ga else { continue };
            let target = match role {
                AdapterRole::Appearance => self.appearance.as_mut().map(Cow::to_mut),
                AdapterRole::Camera => self.camera.as_mut(),
            };
            if let Some(a) = target {
                for (l, gl) in a.layers.iter_mut().zip(&ga.layers) {
                    step(&mut l.a, &gl.a);
                    step(&mut l.b, &gl.b);
                }
            }
        }
        if let Some(ge) = &g.encoder_delta {
            let d = &mut self.encoder.to_mut().delta;
            step(&mut d.w, &ge.w);
            step(&mut d.b, &ge.b);
        }
    }

    fn optimize(
        &mut self,
        data: &[Example],
        cfg: &TrainConfig,
        lambda: f64,
        sched: &NoiseSchedule,
    ) -> Result<TrainingCurve, ToyError> {
        cfg.validate()?;
        if data.is_empty() {
            return Err(ToyError::EmptyDataset);
        }
        {
            let stack = self.stack();
            stack.check()?;
            for ex in data {
                check_example(&stack, ex)?;
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(crate::seed::mix(cfg.seed, &[0x7a11]));
        let mut curve = TrainingCurve::default();
        let len = self.model.config.video_len();
        let w = 1.0 / cfg.batch_size as f64;
        let mut opt = OptimizerState::new(cfg.optimizer);
        for step in 0..cfg.steps {
            let stack = self.stack();
            let mut grads = Grads::zeros(&stack, self.trainable);
            let mut acc = LossParts::default();
            for _ in 0..cfg.batch_size {
                let ex = &data[rng.random_range(0..data.len())];
                let t = rng.random_range(0..sched.steps());
                let eps: Vec<f64> = (0..len).map(|_| StandardNormal.sample(&mut rng)).collect();
                let p = loss_and_grad(&stack, ex, t, &eps, lambda, sched, &mut grads, w)?;
                acc.diffusion += w * p.diffusion;
                acc.flow += w * p.flow;
                acc.total += w * p.total;
            }
            let lr = cfg.lr_at(step);
            self.apply(&grads, lr, &mut opt);
            curve.steps.push(StepLog { step, lr, diffusion: acc.diffusion, flow: acc.flow, total: acc.total });
        }
        Ok(curve)
    }
}

/// Step 0: fits fresh base weights on realistic clips (diffusion loss only).
/// The encoder is randomly initialised and stays fixed.
pub fn pretrain_base(
    config: super::ModelConfig,
    data: &[Example],
    cfg: &TrainConfig,
    sched: &NoiseSchedule,
) -> Result<(Denoiser, TrajectoryEncoder, TrainingCurve), ToyError> {
    let model = Denoiser::new(config, crate::seed::mix(cfg.seed, &[1]))?;
    let encoder = TrajectoryEncoder::new(&model.config, crate::seed::mix(cfg.seed, &[2]));
    let mut s = Session {
        model: Cow::Owned(model),
        encoder: Cow::Borrowed(&encoder),
        encoder_delta: false,
        appearance: None,
        camera: None,
        trainable: Trainable { base: true, ..Trainable::default() },
    };
    let curve = s.optimize(data, cfg, 0.0, sched)?;
    let model = s.model.into_owned();
    Ok((model, encoder, curve))
}

fn is_static(c: &Condition) -> bool {
    match &c.motion {
        MotionInput::Instruction(id) => *id == 0,
        MotionInput::Trajectory(f) => f.iter().all(|v| v.abs() < 1e-9),
    }
}

/// Step 1: learns `Δθ_a` on static, virtual-style clips. Base and encoder
/// are only borrowed.
pub fn train_appearance(
    base: &Denoiser,
    encoder: &TrajectoryEncoder,
    data: &[Example],
    cfg: &TrainConfig,
    sched: &NoiseSchedule,
) -> Result<(Adapter, TrainingCurve), ToyError> {
    if let Some(ex) = data.iter().find(|e| !is_static(&e.condition) || !e.condition.virtual_bit) {
        return Err(ToyError::Example(format!(
            "appearance data must be static and carry the virtual bit: {:?}",
            ex.condition.motion
        )));
    }
    let adapter =
        Adapter::new(AdapterRole::Appearance, &base.config, cfg.rank, cfg.alpha, crate::seed::mix(cfg.seed, &[3]))?;
    let mut s = Session {
        model: Cow::Borrowed(base),
        encoder: Cow::Borrowed(encoder),
        encoder_delta: false,
        appearance: Some(Cow::Owned(adapter)),
        camera: None,
        trainable: Trainable { appearance: true, ..Trainable::default() },
    };
    let curve = s.optimize(data, cfg, 0.0, sched)?;
    Ok((s.appearance.expect("set above").into_owned(), curve))
}

/// What step 2 produces.
#[derive(Clone, Debug, PartialEq)]
pub enum CameraModule {
    /// `Δθ_cd`, stacked on the denoiser.
    Adapter(Adapter),
    /// `Δθ_ce`, the encoder fine-tune delta.
    EncoderDelta(Affine),
}

/// Step 2: learns camera control on top of the frozen `θ_d + Δθ_a` with
/// `L₂ + λ·L_flow`.
pub fn train_camera(
    base: &Denoiser,
    encoder: &TrajectoryEncoder,
    appearance: Option<&Adapter>,
    data: &[Example],
    cfg: &TrainConfig,
    paradigm: Paradigm,
    sched: &NoiseSchedule,
) -> Result<(CameraModule, TrainingCurve), ToyError> {
    let app = appearance.ok_or(ToyError::MissingAppearanceAdapter)?;
    camera_stage(base, encoder, Some(app), data, cfg, paradigm, sched)
}

/// Step 2 without a preceding appearance stage (ablation).
pub fn train_camera_unadapted(
    base: &Denoiser,
    encoder: &TrajectoryEncoder,
    data: &[Example],
    cfg: &TrainConfig,
    paradigm: Paradigm,
    sched: &NoiseSchedule,
) -> Result<(CameraModule, TrainingCurve), ToyError> {
    camera_stage(base, encoder, None, data, cfg, paradigm, sched)
}

fn camera_stage(
    base: &Denoiser,
    encoder: &TrajectoryEncoder,
    appearance: Option<&Adapter>,
    data: &[Example],
    cfg: &TrainConfig,
    paradigm: Paradigm,
    sched: &NoiseSchedule,
) -> Result<(CameraModule, TrainingCurve), ToyError> {
    let wrong = data
        .iter()
        .any(|e| matches!(e.condition.motion, MotionInput::Trajectory(_)) != (paradigm == Paradigm::Trajectory));
    if wrong {
        return Err(ToyError::Example(format!("{paradigm:?} paradigm got a condition of the other paradigm")));
    }
    let camera = match paradigm {
        Paradigm::Text => Some(Adapter::new(
            AdapterRole::Camera,
            &base.config,
            cfg.rank,
            cfg.alpha,
            crate::seed::mix(cfg.seed, &[4]),
        )?),
        Paradigm::Trajectory => None,
    };
    let mut s = Session {
        model: Cow::Borrowed(base),
        encoder: Cow::Borrowed(encoder),
        encoder_delta: paradigm == Paradigm::Trajectory,
        appearance: appearance.map(Cow::Borrowed),
        camera,
        trainable: Trainable {
            camera: paradigm == Paradigm::Text,
            encoder_delta: paradigm == Paradigm::Trajectory,
            ..Trainable::default()
        },
    };
    let curve = s.optimize(data, cfg, cfg.lambda, sched)?;
    let module = match paradigm {
        Paradigm::Text => CameraModule::Adapter(s.camera.expect("text paradigm has an adapter")),
        Paradigm::Trajectory => CameraModule::EncoderDelta(s.encoder.into_owned().delta),
    };
    Ok((module, curve))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::toytrain::ModelConfig;

    fn tiny() -> ModelConfig {
        ModelConfig { frames: 3, height: 4, width: 4, hidden: 12, n_motion: 2, n_content: 2, ..ModelConfig::default() }
    }

    fn clip(cfg: &ModelConfig, phase: f64) -> Vec<f64> {
        (0..cfg.video_len()).map(|i| 0.6 * ((i as f64) * 0.3 + phase).sin()).collect()
    }

    #[test]
    fn lambda_splits_loss_additively() {
        let cfg = tiny();
        let model = Denoiser::new(cfg.clone(), 1).unwrap();
        let sched = NoiseSchedule::default();
        let ex = Example { video: clip(&cfg, 0.4), condition: Condition::instruction(1, 0, true) };
        let eps: Vec<f64> = clip(&cfg, 2.0).iter().map(|v| v * 1.5).collect();
        let stack = Stack::base(&model);
        let mut g = Grads::zeros(&stack, Trainable { base: true, ..Trainable::default() });
        let zero = loss_and_grad(&stack, &ex, 20, &eps, 0.0, &sched, &mut g, 1.0).unwrap();
        assert_eq!(zero.total, zero.diffusion);
        let on = loss_and_grad(&stack, &ex, 20, &eps, 0.1, &sched, &mut g, 1.0).unwrap();
        assert_eq!(on.diffusion, zero.diffusion);
        assert_eq!(on.total, zero.diffusion + 0.1 * on.flow);
        assert!(on.flow > 0.0);
    }

    #[test]
    fn warmup_ramps_linearly() {
        let c = TrainConfig { lr: 1.0, steps: 100, warmup_frac: 0.05, ..TrainConfig::default() };
        assert_eq!(c.lr_at(0), 0.2);
        assert_eq!(c.lr_at(4), 1.0);
        assert_eq!(c.lr_at(50), 1.0);
        assert!(TrainConfig { lambda: -1.0, ..c.clone() }.validate().is_err());
        assert!(TrainConfig { lr: 0.0, ..c }.validate().is_err());
    }

    #[test]
    fn stage_preconditions() {
        let cfg = tiny();
        let sched = NoiseSchedule::default();
        let model = Denoiser::new(cfg.clone(), 1).unwrap();
        let enc = TrajectoryEncoder::new(&cfg, 2);
        let tc = TrainConfig { steps: 2, batch_size: 1, ..TrainConfig::appearance() };
        assert!(matches!(train_appearance(&model, &enc, &[], &tc, &sched), Err(ToyError::EmptyDataset)));
        let moving = Example { video: clip(&cfg, 0.0), condition: Condition::instruction(1, 0, true) };
        assert!(train_appearance(&model, &enc, &[moving.clone()], &tc, &sched).is_err());
        let r = train_camera(&model, &enc, None, &[moving], &tc, Paradigm::Text, &sched);
        assert!(matches!(r, Err(ToyError::MissingAppearanceAdapter)));
    }

    #[test]
    fn frozen_groups_are_untouched_and_training_is_deterministic() {
        let cfg = tiny();
        let sched = NoiseSchedule::default();
        let stat: Vec<Example> = (0..2)
            .map(|c| Example { video: clip(&cfg, c as f64), condition: Condition::instruction(0, c, true) })
            .collect();
        let moving: Vec<Example> = (0..2)
            .map(|c| Example { video: clip(&cfg, 3.0 + c as f64), condition: Condition::instruction(1, c, true) })
            .collect();
        let base_cfg = TrainConfig { steps: 5, batch_size: 2, ..TrainConfig::base() };
        let (model, enc, _) = pretrain_base(cfg.clone(), &stat, &base_cfg, &sched).unwrap();
        let (before_m, before_e) = (model.checksum(), enc.base_checksum());
        let tc = TrainConfig { steps: 5, batch_size: 2, ..TrainConfig::appearance() };
        let (app, _) = train_appearance(&model, &enc, &stat, &tc, &sched).unwrap();
        assert_eq!(model.checksum(), before_m);
        let (app2, _) = train_appearance(&model, &enc, &stat, &tc, &sched).unwrap();
        assert_eq!(app, app2);
        let before_a = app.checksum();
        let cc = TrainConfig { steps: 5, batch_size: 2, ..TrainConfig::camera() };
        let (cam, curve) = train_camera(&model, &enc, Some(&app), &moving, &cc, Paradigm::Text, &sched).unwrap();
        assert_eq!((model.checksum(), app.checksum(), enc.base_checksum()), (before_m, before_a, before_e));
        assert!(matches!(cam, CameraModule::Adapter(ref a) if a.rank() == 8));
        assert_eq!(curve.steps.len(), 5);
    }

    #[test]
    fn video_columns_stay_fixed_without_video_input() {
        let cfg = tiny();
        assert!(!cfg.video_input);
        let sched = NoiseSchedule::default();
        let model = Denoiser::new(cfg.clone(), 3).unwrap();
        let app = Adapter::new(AdapterRole::Appearance, &cfg, 2, None, 4).unwrap();
        let v = cfg.video_len();
        let stack = Stack::base(&model).with_appearance(Some(&app));
        let mut g = Grads::zeros(&stack, Trainable { base: true, appearance: true, ..Trainable::default() });
        let ex = Example { video: clip(&cfg, 0.4), condition: Condition::instruction(1, 0, true) };
        loss_and_grad(&stack, &ex, 30, &clip(&cfg, 1.0), 0.1, &sched, &mut g, 1.0).unwrap();
        let cols = model.l1.cols;
        let l1 = g.l1.as_ref().unwrap();
        let a = &g.appearance.as_ref().unwrap().layers[0];
        assert!(l1.w.chunks(cols).all(|r| r[..v].iter().all(|&x| x == 0.0)));
        assert!(l1.w.chunks(cols).any(|r| r[v..].iter().any(|&x| x != 0.0)));
        assert!(a.a.chunks(cols).all(|r| r[..v].iter().all(|&x| x == 0.0)));
        assert!(model.l1.w.chunks(cols).all(|r| r[..v].iter().all(|&x| x == 0.0)));
    }
}
