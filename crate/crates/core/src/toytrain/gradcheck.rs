use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::train::Grads;
use super::{
    loss_and_grad, pose_features, Activation, Adapter, AdapterRole, Condition, Denoiser, Example, ModelConfig,
    MotionInput, NoiseSchedule, Stack, ToyError, Trainable, TrajectoryEncoder,
};
use crate::geometry::{CameraPose, Mat3, Vec3};

/// Largest probe (in trainable scalars) that [`grad_check`] accepts.
pub const PROBE_MAX_SCALARS: usize = 20_000;
const H: f64 = 1e-5;

#[derive(Clone, Debug, PartialEq)]
pub struct GradCheckReport {
    /// `max |analytic − numeric| / max(|analytic|, |numeric|, 1)`.
    pub max_rel_err: f64,
    pub worst_index: usize,
    pub scalars: usize,
}

/// A complete small training state: both adapters (with non-zero `B`) and
/// a trajectory condition so every parameter group is exercised.
#[derive(Clone, Debug)]
pub struct Probe {
    pub model: Denoiser,
    pub encoder: TrajectoryEncoder,
    pub appearance: Adapter,
    pub camera: Adapter,
    pub example: Example,
    pub t: usize,
    pub eps: Vec<f64>,
    pub lambda: f64,
}

impl Probe {
    /// Two 4×4 RGB frames, hidden width 8, every input pathway live.
    pub fn small(activation: Activation, lambda: f64, seed: u64) -> Result<Self, ToyError> {
        let cfg = ModelConfig {
            frames: 2,
            height: 4,
            width: 4,
            hidden: 8,
            n_motion: 3,
            n_content: 2,
            activation,
            video_input: true,
            ..ModelConfig::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut gauss = |n: usize, s: f64| -> Vec<f64> {
            (0..n)
                .map(|_| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    s * z
                })
                .collect()
        };
        let model = Denoiser::new(cfg.clone(), seed ^ 1)?;
        let mut encoder = TrajectoryEncoder::new(&cfg, seed ^ 2);
        encoder.delta.w = gauss(encoder.delta.w.len(), 0.1);
        encoder.delta.b = gauss(encoder.delta.b.len(), 0.1);
        let mut appearance = Adapter::new(AdapterRole::Appearance, &cfg, 4, Some(2.0), seed ^ 3)?;
        let mut camera = Adapter::new(AdapterRole::Camera, &cfg, 8, None, seed ^ 4)?;
        for l in appearance.layers.iter_mut().chain(camera.layers.iter_mut()) {
            l.b = gauss(l.b.len(), 0.2);
        }
        let video = gauss(cfg.video_len(), 0.5);
        let second = CameraPose::from_center(Mat3::exp(Vec3::new(0.02, -0.05, 0.01)), Vec3::new(0.3, 0.1, -0.2));
        let features = pose_features(&[CameraPose::identity(), second]);
        let eps = gauss(cfg.video_len(), 1.0);
        let t = ChaCha8Rng::seed_from_u64(seed ^ 5).random_range(20..80);
        let example = Example {
            video,
            condition: Condition { motion: MotionInput::Trajectory(features), content: 1, virtual_bit: true },
        };
        Ok(Self { model, encoder, appearance, camera, example, t, eps, lambda })
    }

    fn stack(&self) -> Stack<'_> {
        Stack::base(&self.model)
            .with_encoder(&self.encoder, true)
            .with_appearance(Some(&self.appearance))
            .with_camera(Some(&self.camera))
    }

    /// Mutable views of the parameters in the order of `Grads::flat`.
    fn params_mut(&mut self) -> Vec<&mut Vec<f64>> {
        let mut v: Vec<&mut Vec<f64>> = Vec::new();
        let (l1, l2) = (&mut self.model.l1, &mut self.model.l2);
        v.extend([&mut l1.w, &mut l1.b, &mut l2.w, &mut l2.b]);
        for l in self.appearance.layers.iter_mut().chain(self.camera.layers.iter_mut()) {
            v.push(&mut l.a);
            v.push(&mut l.b);
        }
        v.extend([&mut self.encoder.delta.w, &mut self.encoder.delta.b]);
        v
    }

    fn loss(&self, sched: &NoiseSchedule) -> Result<f64, ToyError> {
        let stack = self.stack();
        let mut none = Grads::zeros(&stack, Trainable::default());
        Ok(loss_and_grad(&stack, &self.example, self.t, &self.eps, self.lambda, sched, &mut none, 1.0)?.total)
    }
}

const ALL: Trainable = Trainable { base: true, appearance: true, camera: true, encoder_delta: true };

/// Central-difference check of the analytic gradient for every trainable
/// scalar of the probe.
pub fn grad_check(probe: &Probe, sched: &NoiseSchedule) -> Result<GradCheckReport, ToyError> {
    let analytic = {
        let stack = probe.stack();
        let mut g = Grads::zeros(&stack, ALL);
        loss_and_grad(&stack, &probe.example, probe.t, &probe.eps, probe.lambda, sched, &mut g, 1.0)?;
        g.flat()
    };
    if analytic.len() > PROBE_MAX_SCALARS {
        return Err(ToyError::Config(format!("probe has {} scalars, cap is {PROBE_MAX_SCALARS}", analytic.len())));
    }
    let mut p = probe.clone();
    let sizes: Vec<usize> = p.params_mut().iter().map(|v| v.len()).collect();
    debug_assert_eq!(sizes.iter().sum::<usize>(), analytic.len());
    let mut report = GradCheckReport { max_rel_err: 0.0, worst_index: 0, scalars: analytic.len() };
    let mut flat = 0;
    for (group, &n) in sizes.iter().enumerate() {
        for i in 0..n {
            let orig = p.params_mut()[group][i];
            p.params_mut()[group][i] = orig + H;
            let up = p.loss(sched)?;
            p.params_mut()[group][i] = orig - H;
            let down = p.loss(sched)?;
            p.params_mut()[group][i] = orig;
            let numeric = (up - down) / (2.0 * H);
            let a = analytic[flat];
            let err = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1.0);
            if err > report.max_rel_err {
                report.max_rel_err = err;
                report.worst_index = flat;
            }
            flat += 1;
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_model_is_exact() {
        let p = Probe::small(Activation::Identity, 0.0, 11).unwrap();
        let r = grad_check(&p, &NoiseSchedule::default()).unwrap();
        assert!(r.max_rel_err < 1e-9, "{r:?}");
        assert!(r.scalars > 3000);
    }

    #[test]
    fn silu_model_with_flow_term() {
        let sched = NoiseSchedule::default();
        for lambda in [0.0, 0.1] {
            let p = Probe::small(Activation::Silu, lambda, 12).unwrap();
            let r = grad_check(&p, &sched).unwrap();
            assert!(r.max_rel_err < 1e-4, "λ={lambda}: {r:?}");
        }
    }
}
