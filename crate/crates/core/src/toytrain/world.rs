//! A small synthetic world where appearance and motion are separately
//! measurable.
//!
//! Each content id is a fixed canvas of coloured Gaussian blobs; a clip is a
//! window sliding over the canvas, so "motion" is a global translation of
//! the content. The virtual style adds a strong colour tint and a
//! screen-space checkerboard; the neutral style is the bare canvas.
//!
//! Motion vocabulary: 0 = static, 1 = right-then-down, 2 = left-then-up
//! (content displacement; the turn happens at the composed-motion handoff).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{pose_features, Condition, Example, ModelConfig, MotionInput, Paradigm, ToyError};
use crate::geometry::{CameraPose, Mat3, Vec3};
use crate::metrics::StyleStats;
use crate::seed::mix;
use crate::trajectory::handoff_frame;
use crate::video::VideoTensor;

pub const N_MOTIONS: usize = 3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WorldConfig {
    pub frames: usize,
    pub size: usize,
    pub n_content: usize,
    pub blobs: usize,
    pub tint: [f64; 3],
    pub checker_amplitude: f64,
    pub checker_cell: usize,
    /// Per-sample pixel noise, so repeated clips are not identical.
    pub noise: f64,
    pub samples_per_set: usize,
    /// Metres of camera travel per pixel of content shift (trajectory paradigm).
    pub metres_per_pixel: f64,
    pub seed: u64,
}

impl Default for WorldConfig {
    fn default() -> Self {
        Self {
            frames: 8,
            size: 16,
            n_content: 4,
            blobs: 24,
            tint: [0.35, -0.3, 0.3],
            checker_amplitude: 0.12,
            checker_cell: 4,
            noise: 0.02,
            samples_per_set: 40,
            metres_per_pixel: 0.1,
            seed: 7,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ToyWorld {
    pub config: WorldConfig,
    canvas_size: usize,
    margin: usize,
    canvases: Vec<Vec<f64>>,
}

impl ToyWorld {
    pub fn new(config: WorldConfig) -> Result<Self, ToyError> {
        if config.frames < 2 || config.size < 4 || config.n_content == 0 || config.checker_cell == 0 {
            return Err(ToyError::Config("toy world needs ≥ 2 frames, size ≥ 4, contents and a checker cell".into()));
        }
        let margin = config.frames / 2 + 1;
        let canvas_size = config.size + 2 * margin;
        let canvases =
            (0..config.n_content).map(|c| canvas(canvas_size, config.blobs, mix(config.seed, &[c as u64]))).collect();
        Ok(Self { config, canvas_size, margin, canvases })
    }

    pub fn model_config(&self) -> ModelConfig {
        ModelConfig {
            frames: self.config.frames,
            height: self.config.size,
            width: self.config.size,
            n_motion: N_MOTIONS,
            n_content: self.config.n_content,
            ..ModelConfig::default()
        }
    }

    /// Content displacement `(dx, dy)` in pixels for each of the `K−1` gaps.
    pub fn displacements(&self, motion: usize) -> Vec<[f64; 2]> {
        let k = self.config.frames;
        let turn = handoff_frame(k);
        (0..k - 1)
            .map(|gap| match (motion, gap < turn) {
                (1, true) => [1.0, 0.0],
                (1, false) => [0.0, 1.0],
                (2, true) => [-1.0, 0.0],
                (2, false) => [0.0, -1.0],
                _ => [0.0, 0.0],
            })
            .collect()
    }

    /// Window origin on the canvas per frame.
    fn offsets(&self, motion: usize) -> Vec<(usize, usize)> {
        let mut pos = (self.margin as i64, self.margin as i64);
        let mut out = vec![(pos.0 as usize, pos.1 as usize)];
        for d in self.displacements(motion) {
            // Content moving by +d means the window moves by −d.
            pos = (pos.0 - d[0] as i64, pos.1 - d[1] as i64);
            out.push((pos.0 as usize, pos.1 as usize));
        }
        out
    }

    /// Clean clip, `K·H·W·3` values in `[-1, 1]`.
    pub fn render(&self, content: usize, motion: usize, virtual_style: bool) -> Vec<f64> {
        let (s, cs) = (self.config.size, self.canvas_size);
        let canvas = &self.canvases[content];
        let mut out = Vec::with_capacity(self.config.frames * s * s * 3);
        for (ox, oy) in self.offsets(motion) {
            for y in 0..s {
                for x in 0..s {
                    let src = &canvas[3 * ((oy + y) * cs + ox + x)..][..3];
                    for c in 0..3 {
                        let mut v = src[c];
                        if virtual_style {
                            let cell = self.config.checker_cell;
                            let sign = if (x / cell + y / cell) % 2 == 0 { 1.0 } else { -1.0 };
                            v = (v + self.config.tint[c] + sign * self.config.checker_amplitude).clamp(-1.0, 1.0);
                        }
                        out.push(v);
                    }
                }
            }
        }
        out
    }

    pub fn video(&self, content: usize, motion: usize, virtual_style: bool) -> VideoTensor {
        let s = self.config.size;
        VideoTensor::from_data(self.config.frames, s, s, 8.0, self.render(content, motion, virtual_style))
            .expect("render produces a full clip")
    }

    /// Style statistics of the neutral render of `(content, motion)`.
    pub fn neutral_reference(&self, content: usize, motion: usize) -> StyleStats {
        StyleStats::of(&self.video(content, motion, false))
    }

    /// A camera path consistent with the content motion: the camera slides
    /// opposite to the content in its image plane.
    pub fn trajectory(&self, motion: usize) -> Vec<CameraPose> {
        let m = self.config.metres_per_pixel;
        let mut c = Vec3::zero();
        let mut out = vec![CameraPose::from_center(Mat3::identity(), c)];
        for d in self.displacements(motion) {
            // Image y points down, world y up.
            c = c + Vec3::new(-d[0] * m, d[1] * m, 0.0);
            out.push(CameraPose::from_center(Mat3::identity(), c));
        }
        out
    }

    pub fn condition(&self, motion: usize, content: usize, virtual_bit: bool, paradigm: Paradigm) -> Condition {
        let motion = match paradigm {
            Paradigm::Text => MotionInput::Instruction(motion),
            Paradigm::Trajectory => MotionInput::Trajectory(pose_features(&self.trajectory(motion))),
        };
        Condition { motion, content, virtual_bit }
    }

    fn set(&self, tag: u64, virtual_style: bool, motions: &[usize], paradigm: Paradigm) -> Vec<Example> {
        let n = self.config.samples_per_set;
        (0..n)
            .map(|i| {
                let content = i % self.config.n_content;
                let motion = motions[(i / self.config.n_content) % motions.len()];
                let mut rng = ChaCha8Rng::seed_from_u64(mix(self.config.seed, &[tag, i as u64]));
                let video = self
                    .render(content, motion, virtual_style)
                    .into_iter()
                    .map(|v| {
                        let z: f64 = StandardNormal.sample(&mut rng);
                        (v + self.config.noise * z).clamp(-1.0, 1.0)
                    })
                    .collect();
                Example { video, condition: self.condition(motion, content, virtual_style, paradigm) }
            })
            .collect()
    }

    /// Realistic static clips for pre-training the base model.
    pub fn base_set(&self, paradigm: Paradigm) -> Vec<Example> {
        self.set(0xba5e, false, &[0], paradigm)
    }

    /// `X_a`: virtual-style static clips.
    pub fn appearance_set(&self, paradigm: Paradigm) -> Vec<Example> {
        self.set(0xa, true, &[0], paradigm)
    }

    /// `X_c`: virtual-style clips with motion 1 or 2.
    pub fn camera_set(&self, paradigm: Paradigm) -> Vec<Example> {
        self.set(0xc, true, &[1, 2], paradigm)
    }
}

fn canvas(size: usize, blobs: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base: [f64; 3] = std::array::from_fn(|_| rng.random_range(-0.3..0.3));
    let spots: Vec<([f64; 2], f64, [f64; 3])> = (0..blobs)
        .map(|_| {
            let c = [rng.random_range(0.0..size as f64), rng.random_range(0.0..size as f64)];
            let sigma = rng.random_range(1.2..3.0);
            let col: [f64; 3] = std::array::from_fn(|_| rng.random_range(-0.8..0.8));
            (c, sigma, col)
        })
        .collect();
    let mut out = Vec::with_capacity(size * size * 3);
    for y in 0..size {
        for x in 0..size {
            let mut v = base;
            for (c, sigma, col) in &spots {
                let d2 = (x as f64 - c[0]).powi(2) + (y as f64 - c[1]).powi(2);
                let w = (-d2 / (2.0 * sigma * sigma)).exp();
                for k in 0..3 {
                    v[k] += w * col[k];
                }
            }
            out.extend(v.iter().map(|a| a.clamp(-0.7, 0.7)));
        }
    }
    out
}
