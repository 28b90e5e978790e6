//! Turns a rendered corpus into training examples at model resolution.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{pose_features, Condition, Example, ModelConfig, MotionInput, Paradigm, ToyError};
use crate::dataset::{DatasetError, DatasetManifest, ManifestEntry, SetKind};
use crate::renderer::io::read_frames;
use crate::scene::{FloorTexture, SceneSpec};
use crate::trajectory::{io as traj_io, MotionKind};
use crate::video::{u8_to_unit, Image};

/// Motion id 0 is "static"; id `i + 1` is `motions[i]`. Content ids are
/// floor-texture indices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Vocabulary {
    pub motions: Vec<MotionKind>,
    pub n_content: usize,
}

impl Vocabulary {
    pub fn from_manifest(m: &DatasetManifest) -> Self {
        Self { motions: m.config.motions.clone(), n_content: FloorTexture::ALL.len() }
    }

    pub fn n_motion(&self) -> usize {
        self.motions.len() + 1
    }

    pub fn motion_id(&self, m: &MotionKind) -> Option<usize> {
        self.motions.iter().position(|k| k == m).map(|i| i + 1)
    }

    /// A model shape matching this vocabulary.
    pub fn model_config(&self, base: &ModelConfig) -> ModelConfig {
        ModelConfig { n_motion: self.n_motion(), n_content: self.n_content, ..base.clone() }
    }
}

/// Frame indices picked when shortening `n` frames to `k`.
pub fn frame_indices(n: usize, k: usize) -> Vec<usize> {
    if k <= 1 || n <= 1 {
        return vec![0; k];
    }
    (0..k).map(|i| ((i * (n - 1)) as f64 / (k - 1) as f64).round() as usize).collect()
}

/// Box-filters each picked frame down to `height × width`, values in `[-1, 1]`.
pub fn resample_video(images: &[Image], frames: usize, height: usize, width: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(frames * height * width * 3);
    for idx in frame_indices(images.len(), frames) {
        let img = &images[idx];
        let (sw, sh) = (img.width as usize, img.height as usize);
        for y in 0..height {
            let (y0, y1) = (y * sh / height, ((y + 1) * sh / height).max(y * sh / height + 1));
            for x in 0..width {
                let (x0, x1) = (x * sw / width, ((x + 1) * sw / width).max(x * sw / width + 1));
                let mut acc = [0.0f64; 3];
                for v in y0..y1.min(sh) {
                    for u in x0..x1.min(sw) {
                        let p = img.pixel(u as u32, v as u32);
                        for c in 0..3 {
                            acc[c] += u8_to_unit::<f64>(p[c]);
                        }
                    }
                }
                let n = ((y1.min(sh) - y0) * (x1.min(sw) - x0)) as f64;
                out.extend(acc.iter().map(|a| a / n));
            }
        }
    }
    out
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, ToyError> {
    let text = std::fs::read_to_string(path).map_err(|source| ToyError::Io { path: path.to_path_buf(), source })?;
    serde_json::from_str(&text).map_err(|e| ToyError::Dataset(DatasetError::Parse(format!("{}: {e}", path.display()))))
}

/// One manifest entry as a training example at `cfg` resolution.
pub fn load_example(
    root: &Path,
    e: &ManifestEntry,
    vocab: &Vocabulary,
    paradigm: Paradigm,
    cfg: &ModelConfig,
) -> Result<Example, ToyError> {
    let dir = root.join(&e.video_dir);
    let images = read_frames(&dir).map_err(|source| ToyError::Io { path: dir.clone(), source })?;
    let scene: SceneSpec = read_json(&dir.join("scene.json"))?;
    let motion = match (e.set, paradigm) {
        (SetKind::Appearance, Paradigm::Text) => MotionInput::Instruction(0),
        (SetKind::Camera, Paradigm::Text) => MotionInput::Instruction(
            vocab
                .motion_id(&e.motion)
                .ok_or_else(|| ToyError::Example(format!("motion {:?} not in vocabulary", e.motion)))?,
        ),
        (_, Paradigm::Trajectory) => {
            let path = root.join(&e.trajectory_file);
            let traj = traj_io::load(&path).map_err(|err| ToyError::Example(format!("{}: {err}", path.display())))?;
            let poses: Vec<_> = traj.poses().copied().collect();
            let picked: Vec<_> = frame_indices(poses.len(), cfg.frames).into_iter().map(|i| poses[i]).collect();
            MotionInput::Trajectory(pose_features(&picked))
        }
    };
    Ok(Example {
        video: resample_video(&images, cfg.frames, cfg.height, cfg.width),
        condition: Condition { motion, content: scene.floor.index(), virtual_bit: e.prompt.virtual_indicator },
    })
}

/// Loads every entry of `set` in manifest order.
pub fn load_examples(
    root: &Path,
    manifest: &DatasetManifest,
    set: SetKind,
    paradigm: Paradigm,
    cfg: &ModelConfig,
) -> Result<Vec<Example>, ToyError> {
    let vocab = Vocabulary::from_manifest(manifest);
    manifest.entries_in(set).map(|e| load_example(root, e, &vocab, paradigm, cfg)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn indices_cover_both_ends() {
        assert_eq!(frame_indices(49, 8), vec![0, 7, 14, 21, 27, 34, 41, 48]);
        assert_eq!(frame_indices(8, 8), (0..8).collect::<Vec<_>>());
    }

    #[test]
    fn box_filter_averages() {
        let mut img = Image::filled(4, 2, [0, 0, 0]);
        img.set(0, 0, [255, 255, 255]);
        img.set(1, 0, [255, 255, 255]);
        let v = resample_video(&[img], 1, 1, 2);
        assert_eq!(v.len(), 6);
        let (w, b) = (u8_to_unit::<f64>(255), u8_to_unit::<f64>(0));
        assert!((v[0] - 0.5 * (w + b)).abs() < 1e-12);
        assert!((v[3] - b).abs() < 1e-12);
    }
}
