use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{predict_x0, Condition, NoiseSchedule, Stack, ToyError};
use crate::video::VideoTensor;

/// Frame rate stamped on sampled clips.
pub const SAMPLE_FPS: f64 = 8.0;

/// Ancestral sampling from `x_{T-1} ~ N(0, I)` down to `t = 0`.
///
/// Each step predicts `x̂0` (clipped to `[-1, 1]`) and draws from the
/// Gaussian posterior `q(x_{t-1} | x_t, x̂0)`. The result is a pure function
/// of the weights, the adapter set, the condition and the seed.
pub fn sample(stack: &Stack<'_>, cond: &Condition, seed: u64, sched: &NoiseSchedule) -> Result<VideoTensor, ToyError> {
    stack.check()?;
    let cfg = &stack.model.config;
    let c = stack.condition_vector(cond)?;
    let x = ancestral(cfg.video_len(), seed, sched, |x, t| Ok(stack.forward(&c, x, t, sched)?.eps_hat))?;
    VideoTensor::from_data(cfg.frames, cfg.height, cfg.width, SAMPLE_FPS, x).map_err(|e| ToyError::Shape(e.to_string()))
}

/// The sampling loop for any noise predictor `eps(x_t, t)`.
pub fn ancestral(
    len: usize,
    seed: u64,
    sched: &NoiseSchedule,
    mut eps: impl FnMut(&[f64], usize) -> Result<Vec<f64>, ToyError>,
) -> Result<Vec<f64>, ToyError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut normal = move || -> f64 { StandardNormal.sample(&mut rng) };
    let mut x: Vec<f64> = (0..len).map(|_| normal()).collect();
    for t in (0..sched.steps()).rev() {
        let e = eps(&x, t)?;
        let x0: Vec<f64> = predict_x0(&x, &e, t, sched).into_iter().map(|v| v.clamp(-1.0, 1.0)).collect();
        if t == 0 {
            return Ok(x0);
        }
        let (ab, ab_prev, beta) = (sched.alpha_bar(t), sched.alpha_bar_prev(t), sched.betas[t]);
        let c0 = ab_prev.sqrt() * beta / (1.0 - ab);
        let ct = sched.alphas[t].sqrt() * (1.0 - ab_prev) / (1.0 - ab);
        let sigma = ((1.0 - ab_prev) / (1.0 - ab) * beta).sqrt();
        for (xi, x0i) in x.iter_mut().zip(&x0) {
            *xi = c0 * x0i + ct * *xi + sigma * normal();
        }
    }
    Ok(x)
}
