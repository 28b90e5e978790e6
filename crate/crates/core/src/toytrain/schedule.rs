use serde::{Deserialize, Serialize};

use super::ToyError;

/// Variance-preserving diffusion schedule, indexed `t = 0..T`.
///
/// `ᾱ_t = Π_{s≤t} (1 − β_s)`, so `t = 0` is already one (small) noising step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseSchedule {
    pub betas: Vec<f64>,
    pub alphas: Vec<f64>,
    pub alpha_bars: Vec<f64>,
}

pub const DEFAULT_STEPS: usize = 100;
pub const DEFAULT_BETA_START: f64 = 1e-4;
/// Large enough that `ᾱ_{T−1} ≈ 0.005`, so sampling can start from pure noise.
pub const DEFAULT_BETA_END: f64 = 0.1;

impl Default for NoiseSchedule {
    fn default() -> Self {
        Self::linear(DEFAULT_STEPS, DEFAULT_BETA_START, DEFAULT_BETA_END).expect("default schedule is valid")
    }
}

impl NoiseSchedule {
    pub fn linear(steps: usize, beta_start: f64, beta_end: f64) -> Result<Self, ToyError> {
        if steps == 0 {
            return Err(ToyError::Config("schedule needs at least one step".into()));
        }
        if !(beta_start > 0.0 && beta_end < 1.0 && beta_start <= beta_end) {
            return Err(ToyError::Config(format!("betas must satisfy 0 < {beta_start} ≤ {beta_end} < 1")));
        }
        let betas: Vec<f64> = (0..steps)
            .map(|i| {
                if steps == 1 {
                    beta_start
                } else {
                    beta_start + (beta_end - beta_start) * i as f64 / (steps - 1) as f64
                }
            })
            .collect();
        let alphas: Vec<f64> = betas.iter().map(|b| 1.0 - b).collect();
        let mut alpha_bars = Vec::with_capacity(steps);
        let mut acc = 1.0;
        for a in &alphas {
            acc *= a;
            alpha_bars.push(acc);
        }
        Ok(Self { betas, alphas, alpha_bars })
    }

    pub fn steps(&self) -> usize {
        self.betas.len()
    }

    pub fn alpha_bar(&self, t: usize) -> f64 {
        self.alpha_bars[t]
    }

    /// `ᾱ_{t−1}`, with `ᾱ_{−1} = 1`.
    pub fn alpha_bar_prev(&self, t: usize) -> f64 {
        if t == 0 {
            1.0
        } else {
            self.alpha_bars[t - 1]
        }
    }

    fn check_t(&self, t: usize) -> Result<(), ToyError> {
        if t >= self.steps() {
            return Err(ToyError::Step { t, steps: self.steps() });
        }
        Ok(())
    }
}

/// `x_t = √ᾱ_t·x0 + √(1−ᾱ_t)·ε`.
pub fn forward_noise(x0: &[f64], t: usize, eps: &[f64], sched: &NoiseSchedule) -> Result<Vec<f64>, ToyError> {
    sched.check_t(t)?;
    if x0.len() != eps.len() {
        return Err(ToyError::Shape(format!("x0 has {} values, eps {}", x0.len(), eps.len())));
    }
    let ab = sched.alpha_bar(t);
    let (s, n) = (ab.sqrt(), (1.0 - ab).sqrt());
    Ok(x0.iter().zip(eps).map(|(x, e)| s * x + n * e).collect())
}

/// Closed-form inverse: `x̂0 = (x_t − √(1−ᾱ_t)·ε̂) / √ᾱ_t`.
pub fn predict_x0(x_t: &[f64], eps_hat: &[f64], t: usize, sched: &NoiseSchedule) -> Vec<f64> {
    let ab = sched.alpha_bar(t);
    let (s, n) = (ab.sqrt(), (1.0 - ab).sqrt());
    x_t.iter().zip(eps_hat).map(|(x, e)| (x - n * e) / s).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn schedule_invariants() {
        let s = NoiseSchedule::default();
        assert_eq!(s.steps(), 100);
        assert!(s.betas.iter().all(|&b| b > 0.0 && b < 1.0));
        assert!(s.alpha_bars.windows(2).all(|w| w[1] < w[0]));
        assert!(s.alpha_bar(0) > 0.99);
        assert!(s.alpha_bar(99) < 0.01);
        assert!(NoiseSchedule::linear(10, 0.5, 0.1).is_err());
        assert!(NoiseSchedule::linear(0, 1e-4, 0.1).is_err());
    }

    #[test]
    fn forward_noise_examples() {
        let s = NoiseSchedule::default();
        let x0 = vec![0.5, -1.0, 0.25, 1.0];
        let zero = forward_noise(&x0, 40, &[0.0; 4], &s).unwrap();
        let k = s.alpha_bar(40).sqrt();
        for (a, b) in zero.iter().zip(&x0) {
            assert_eq!(*a, k * b);
        }
        // One step of noise barely moves the clip.
        let xt = forward_noise(&x0, 0, &[1.0, -1.0, 1.0, -1.0], &s).unwrap();
        let (sa, sn) = (s.alpha_bar(0).sqrt(), (1.0 - s.alpha_bar(0)).sqrt());
        let bound = x0.iter().map(|x| (x * (sa - 1.0)).abs()).fold(0.0, f64::max) + sn;
        let dev = xt.iter().zip(&x0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(dev <= bound + 1e-15 && dev < 0.02, "{dev}");
        assert!(forward_noise(&x0, 100, &[0.0; 4], &s).is_err());
        assert!(forward_noise(&x0, 3, &[0.0; 3], &s).is_err());
    }

    #[test]
    fn forward_noise_variance_monte_carlo() {
        let s = NoiseSchedule::default();
        let t = 30;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 10_000;
        let mut xs = Vec::with_capacity(n);
        let mut x0s = Vec::with_capacity(n);
        for _ in 0..n {
            let z: f64 = StandardNormal.sample(&mut rng);
            let x0 = 0.6 * z;
            let e: f64 = StandardNormal.sample(&mut rng);
            xs.push(forward_noise(&[x0], t, &[e], &s).unwrap()[0]);
            x0s.push(x0);
        }
        let var = |v: &[f64]| {
            let m = v.iter().sum::<f64>() / v.len() as f64;
            v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / v.len() as f64
        };
        let ab = s.alpha_bar(t);
        let expect = ab * var(&x0s) + (1.0 - ab);
        assert!((var(&xs) / expect - 1.0).abs() < 0.05);
    }

    #[test]
    fn predict_x0_inverts_forward_noise() {
        let s = NoiseSchedule::default();
        let x0 = vec![0.3, -0.7, 0.9];
        let eps = vec![1.2, -0.4, 0.05];
        for t in [0, 17, 99] {
            let xt = forward_noise(&x0, t, &eps, &s).unwrap();
            let back = predict_x0(&xt, &eps, t, &s);
            for (a, b) in back.iter().zip(&x0) {
                assert!((a - b).abs() < 1e-12);
            }
            let z = predict_x0(&xt, &[0.0; 3], t, &s);
            for (a, b) in z.iter().zip(&xt) {
                assert_eq!(*a, b / s.alpha_bar(t).sqrt());
            }
        }
    }
}
