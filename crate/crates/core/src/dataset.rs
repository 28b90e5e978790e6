//! Paired training corpora: static-camera clips (`X_a`) and moving-camera
//! clips (`X_c`) rendered from the same scenes, with their prompts.
//!
//! Layout on disk:
//!
//! ```text
//! root/manifest.json
//! root/{X_a,X_c}/<motion>/<index>/frame_0000.ppm …
//!                                 poses.jsonl prompt.txt meta.json scene.json
//! ```
//!
//! Sample `i` of motion `m` (position in the motion list) uses the scene seed
//! `seed::mix(base_seed, [m, i])`; both clips of a pair share it.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{look_at, relative_pose, CameraPose, GeometryError, Intrinsics, Mat3, Vec3};
use crate::renderer::{self, io as rio};
use crate::scene::{content_text, sample_scene, SceneConfig, SceneError, SceneSpec, VIRTUAL_TOKEN};
use crate::seed::mix;
use crate::trajectory::{self, build_default, camera_instruction, MotionKind, TimedTrajectory, TrajectoryError};

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("invalid dataset config: {0}")]
    Config(String),
    #[error("manifest parse error: {0}")]
    Parse(String),
    #[error("missing asset {0}")]
    MissingAsset(PathBuf),
    #[error("manifest invariant violated: {0}")]
    Invalid(String),
    #[error(transparent)]
    Scene(#[from] SceneError),
    #[error(transparent)]
    Trajectory(#[from] TrajectoryError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> DatasetError + '_ {
    move |source| DatasetError::Io { path: path.to_path_buf(), source }
}

/// Camera instruction `c_m`, content text `c` and the style flag.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PromptPair {
    /// Without the `"Camera: "` prefix; empty for a static camera.
    pub camera_text: String,
    /// Without the `"Content: "` prefix.
    pub content_text: String,
    pub virtual_indicator: bool,
}

impl PromptPair {
    pub fn new(traj: &TimedTrajectory, scene: &SceneSpec, virtual_indicator: bool) -> Self {
        Self {
            camera_text: camera_instruction(traj, scene),
            content_text: content_text(scene, virtual_indicator),
            virtual_indicator,
        }
    }

    /// `"Camera: <c_m> | Content: <c>"`, or `"Content: <c>"` without camera text.
    pub fn composite(&self) -> String {
        if self.camera_text.is_empty() {
            format!("Content: {}", self.content_text)
        } else {
            format!("Camera: {} | Content: {}", self.camera_text, self.content_text)
        }
    }

    /// Content-only prompt, used by the trajectory-conditioned paradigm.
    pub fn content_only(&self) -> String {
        format!("Content: {}", self.content_text)
    }

    /// Same prompt with the style indicator removed, as used at inference.
    pub fn without_indicator(&self, scene: &SceneSpec) -> Self {
        Self { content_text: content_text(scene, false), virtual_indicator: false, ..self.clone() }
    }

    pub fn is_consistent(&self) -> bool {
        self.content_text.contains(VIRTUAL_TOKEN) == self.virtual_indicator
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SetKind {
    #[serde(rename = "X_a")]
    Appearance,
    #[serde(rename = "X_c")]
    Camera,
}

impl SetKind {
    pub fn dir_name(self) -> &'static str {
        match self {
            SetKind::Appearance => "X_a",
            SetKind::Camera => "X_c",
        }
    }
}

impl fmt::Display for SetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.dir_name())
    }
}

/// Where sampled cameras stand: a ring around the arena centre.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CameraSampling {
    pub min_radius: f64,
    pub max_radius: f64,
    pub min_height: f64,
    pub max_height: f64,
    /// Look-at points are jittered by up to this much horizontally (m).
    pub target_jitter: f64,
}

impl Default for CameraSampling {
    fn default() -> Self {
        Self { min_radius: 9.0, max_radius: 13.0, min_height: 1.2, max_height: 2.2, target_jitter: 2.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DatasetConfig {
    pub width: u32,
    pub height: u32,
    pub frames: usize,
    pub fps: f64,
    pub hfov_deg: f64,
    pub n_per_motion: usize,
    pub motions: Vec<MotionKind>,
    pub base_seed: u64,
    pub virtual_indicator: bool,
    pub write_depth: bool,
    pub scene: SceneConfig,
    pub camera: CameraSampling,
}

impl Default for DatasetConfig {
    /// Desk-scale corpus: 128×96, 49 frames, 4 pairs per motion.
    fn default() -> Self {
        Self {
            width: 128,
            height: 96,
            frames: 49,
            fps: 8.0,
            hfov_deg: 60.0,
            n_per_motion: 4,
            motions: MotionKind::catalogue(),
            base_seed: 0,
            virtual_indicator: true,
            write_depth: false,
            scene: SceneConfig::default(),
            camera: CameraSampling::default(),
        }
    }
}

impl DatasetConfig {
    /// Full-size setting: 720×480, 49 frames, 500 pairs per motion.
    pub fn full_scale() -> Self {
        Self { width: 720, height: 480, n_per_motion: 500, ..Self::default() }
    }

    pub fn intrinsics(&self) -> Result<Intrinsics, GeometryError> {
        Intrinsics::from_hfov(self.width, self.height, self.hfov_deg)
    }

    pub fn validate(&self) -> Result<(), DatasetError> {
        let bad = |m: String| Err(DatasetError::Config(m));
        if self.width == 0 || self.height == 0 || self.width > 8192 || self.height > 8192 {
            return bad(format!("resolution {}×{} outside 1..=8192", self.width, self.height));
        }
        if self.frames < 2 {
            return bad(format!("frames must be at least 2, got {}", self.frames));
        }
        if !(self.fps > 0.0 && self.fps.is_finite()) {
            return bad(format!("fps must be positive, got {}", self.fps));
        }
        if !(self.hfov_deg > 0.0 && self.hfov_deg < 180.0) {
            return bad(format!("hfov_deg must lie in (0, 180), got {}", self.hfov_deg));
        }
        if self.n_per_motion == 0 {
            return bad("n_per_motion must be at least 1".into());
        }
        if self.motions.is_empty() {
            return bad("motions must not be empty".into());
        }
        for m in &self.motions {
            if m.is_static() {
                return bad("the static camera is not a motion; X_a clips are produced automatically".into());
            }
            if let MotionKind::RollRotation(d) = m {
                if *d != 90 && *d != 180 {
                    return bad(format!("roll_rotation_{d}: only 90 and 180 are supported"));
                }
            }
        }
        let mut seen = self.motions.clone();
        seen.sort_by_key(|m| m.to_string());
        seen.dedup();
        if seen.len() != self.motions.len() {
            return bad("motions contain duplicates".into());
        }
        let c = &self.camera;
        if !(c.min_radius > 0.0
            && c.min_radius <= c.max_radius
            && c.min_height <= c.max_height
            && c.target_jitter >= 0.0)
        {
            return bad("camera sampling ranges are inconsistent".into());
        }
        if c.max_radius >= self.scene.arena_half_extent {
            return bad(format!(
                "camera radius {} reaches the arena edge {}",
                c.max_radius, self.scene.arena_half_extent
            ));
        }
        self.scene.validate()?;
        Ok(())
    }
}

/// Per-sample scene seed.
pub fn sample_seed(base_seed: u64, motion_index: usize, sample_index: usize) -> u64 {
    mix(base_seed, &[motion_index as u64, sample_index as u64])
}

fn range(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    if hi > lo {
        rng.random_range(lo..hi)
    } else {
        lo
    }
}

/// Random camera standing on the sampling ring, aimed near the arena centre.
pub fn sample_camera(rng: &mut ChaCha8Rng, c: &CameraSampling) -> Result<CameraPose, GeometryError> {
    let az = rng.random_range(0.0..std::f64::consts::TAU);
    let r = range(rng, c.min_radius, c.max_radius);
    let h = range(rng, c.min_height, c.max_height);
    let eye = Vec3::new(r * az.sin(), h, r * az.cos());
    let target = Vec3::new(
        range(rng, -c.target_jitter, c.target_jitter),
        range(rng, 0.3, 1.0),
        range(rng, -c.target_jitter, c.target_jitter),
    );
    look_at(eye, target, Vec3::new(0.0, 1.0, 0.0))
}

/// One clip before rendering.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleSpec {
    pub set: SetKind,
    pub motion: MotionKind,
    pub seed: u64,
    pub scene: SceneSpec,
    pub trajectory: TimedTrajectory,
    pub prompt: PromptPair,
}

/// Builds the `(X_a, X_c)` pair for one scene seed. Both share the scene; `X_a`
/// stands still at a random pose, `X_c` performs `motion` from its own random
/// start pose.
pub fn build_pair(
    scene_seed: u64,
    motion: MotionKind,
    cfg: &DatasetConfig,
) -> Result<(SampleSpec, SampleSpec), DatasetError> {
    let scene = sample_scene(scene_seed, &cfg.scene)?;
    let intr = cfg.intrinsics()?;
    let mut rng = ChaCha8Rng::seed_from_u64(mix(scene_seed, &[0x00ca_3e7a]));
    let still_pose = sample_camera(&mut rng, &cfg.camera)?;
    let start = sample_camera(&mut rng, &cfg.camera)?;
    let traj_seed = rng.random::<u64>();

    let still = trajectory::static_trajectory(&still_pose, &intr, cfg.frames, cfg.fps)?;
    let moving = build_default(motion, &scene, &start, &intr, cfg.frames, cfg.fps, traj_seed)?;
    let a = SampleSpec {
        set: SetKind::Appearance,
        motion: MotionKind::Simple(trajectory::SimpleKind::Static),
        seed: scene_seed,
        prompt: PromptPair::new(&still, &scene, cfg.virtual_indicator),
        scene: scene.clone(),
        trajectory: still,
    };
    let c = SampleSpec {
        set: SetKind::Camera,
        motion,
        seed: scene_seed,
        prompt: PromptPair::new(&moving, &scene, cfg.virtual_indicator),
        scene,
        trajectory: moving,
    };
    Ok((a, c))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    /// Relative to the dataset root.
    pub video_dir: String,
    pub set: SetKind,
    /// Motion of the pair this clip belongs to (the `X_a` clip itself is static).
    pub motion: MotionKind,
    pub index: usize,
    pub seed: u64,
    pub prompt: PromptPair,
    /// Relative to the dataset root.
    pub trajectory_file: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetManifest {
    pub version: u32,
    pub config: DatasetConfig,
    pub entries: Vec<ManifestEntry>,
}

pub const MANIFEST_FILE: &str = "manifest.json";
pub const MANIFEST_VERSION: u32 = 1;

#[derive(Serialize)]
struct Meta<'a> {
    set: SetKind,
    motion: MotionKind,
    trajectory_kind: MotionKind,
    seed: u64,
    width: u32,
    height: u32,
    frames: usize,
    fps: f64,
    prompt: &'a str,
}

fn entry_dir(set: SetKind, motion: MotionKind, index: usize) -> String {
    format!("{}/{}/{:04}", set.dir_name(), motion, index)
}

fn write_sample(
    root: &Path,
    spec: &SampleSpec,
    pair_motion: MotionKind,
    index: usize,
    depth: bool,
) -> Result<ManifestEntry, DatasetError> {
    let rel = entry_dir(spec.set, pair_motion, index);
    let dir = root.join(&rel);
    fs::create_dir_all(&dir).map_err(io_err(&dir))?;
    let frames = renderer::render_frames(&spec.scene, &spec.trajectory);
    rio::write_frames(&dir, &frames, depth).map_err(io_err(&dir))?;
    let poses = dir.join("poses.jsonl");
    trajectory::io::save(&spec.trajectory, &poses)?;
    let prompt = spec.prompt.composite();
    let write = |name: &str, text: String| {
        let p = dir.join(name);
        fs::write(&p, text).map_err(io_err(&p))
    };
    write("prompt.txt", format!("{prompt}\n"))?;
    let intr = &spec.trajectory.frames[0].intrinsics;
    let meta = Meta {
        set: spec.set,
        motion: pair_motion,
        trajectory_kind: spec.trajectory.kind,
        seed: spec.seed,
        width: intr.width,
        height: intr.height,
        frames: spec.trajectory.len(),
        fps: spec.trajectory.fps,
        prompt: &prompt,
    };
    write("meta.json", serde_json::to_string_pretty(&meta).expect("meta serializes"))?;
    write("scene.json", serde_json::to_string_pretty(&spec.scene).expect("scene serializes"))?;
    Ok(ManifestEntry {
        video_dir: rel.clone(),
        set: spec.set,
        motion: pair_motion,
        index,
        seed: spec.seed,
        prompt: spec.prompt.clone(),
        trajectory_file: format!("{rel}/poses.jsonl"),
    })
}

/// Renders `n_per_motion` pairs for every configured motion into `root` and
/// writes the manifest. Pairs render in parallel; entry order is fixed
/// (motion, index, `X_a` before `X_c`).
pub fn build_corpus(root: &Path, cfg: &DatasetConfig) -> Result<DatasetManifest, DatasetError> {
    cfg.validate()?;
    fs::create_dir_all(root).map_err(io_err(root))?;
    let jobs: Vec<(usize, MotionKind, usize)> =
        cfg.motions.iter().enumerate().flat_map(|(mi, &m)| (0..cfg.n_per_motion).map(move |i| (mi, m, i))).collect();
    let pairs: Vec<Result<[ManifestEntry; 2], DatasetError>> = jobs
        .par_iter()
        .map(|&(mi, motion, i)| {
            let (a, c) = build_pair(sample_seed(cfg.base_seed, mi, i), motion, cfg)?;
            Ok([
                write_sample(root, &a, motion, i, cfg.write_depth)?,
                write_sample(root, &c, motion, i, cfg.write_depth)?,
            ])
        })
        .collect();
    let mut entries = Vec::with_capacity(2 * jobs.len());
    for p in pairs {
        entries.extend(p?);
    }
    let manifest = DatasetManifest { version: MANIFEST_VERSION, config: cfg.clone(), entries };
    let path = root.join(MANIFEST_FILE);
    fs::write(&path, serde_json::to_string_pretty(&manifest).expect("manifest serializes")).map_err(io_err(&path))?;
    Ok(manifest)
}

impl DatasetManifest {
    /// Structural invariants that do not touch the file system.
    pub fn check(&self) -> Result<(), DatasetError> {
        let bad = |m: String| Err(DatasetError::Invalid(m));
        if self.version != MANIFEST_VERSION {
            return bad(format!("unsupported manifest version {}", self.version));
        }
        let expected = 2 * self.config.n_per_motion * self.config.motions.len();
        if self.entries.len() != expected {
            return bad(format!("{} entries, expected {expected}", self.entries.len()));
        }
        for e in &self.entries {
            if !e.prompt.is_consistent() {
                return bad(format!("{}: indicator flag disagrees with prompt text", e.video_dir));
            }
            if e.set == SetKind::Appearance && !e.prompt.camera_text.is_empty() {
                return bad(format!("{}: X_a prompt carries camera text", e.video_dir));
            }
        }
        for e in self.entries.iter().filter(|e| e.set == SetKind::Camera) {
            let partners = self
                .entries
                .iter()
                .filter(|o| {
                    o.set == SetKind::Appearance && o.motion == e.motion && o.index == e.index && o.seed == e.seed
                })
                .count();
            if partners != 1 {
                return bad(format!("{}: {partners} X_a partners", e.video_dir));
            }
        }
        Ok(())
    }

    pub fn entries_in(&self, set: SetKind) -> impl Iterator<Item = &ManifestEntry> {
        self.entries.iter().filter(move |e| e.set == set)
    }
}

/// Parses and validates a manifest: structure, then that every referenced
/// directory and trajectory file exists next to it.
pub fn load_manifest(path: &Path) -> Result<DatasetManifest, DatasetError> {
    let text = fs::read_to_string(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => DatasetError::MissingAsset(path.to_path_buf()),
        _ => DatasetError::Io { path: path.to_path_buf(), source: e },
    })?;
    let manifest: DatasetManifest = serde_json::from_str(&text).map_err(|e| DatasetError::Parse(e.to_string()))?;
    manifest.check()?;
    let root = path.parent().unwrap_or(Path::new("."));
    for e in &manifest.entries {
        for rel in [&e.video_dir, &e.trajectory_file] {
            let p = root.join(rel);
            if !p.exists() {
                return Err(DatasetError::MissingAsset(p));
            }
        }
    }
    Ok(manifest)
}

/// Re-derives an entry's prompt from its stored scene and trajectory and
/// compares it with the manifest and `prompt.txt`. Also checks that `X_a`
/// clips never move.
pub fn verify_entry(root: &Path, e: &ManifestEntry) -> Result<(), DatasetError> {
    let dir = root.join(&e.video_dir);
    let scene_path = dir.join("scene.json");
    let scene_text = fs::read_to_string(&scene_path).map_err(io_err(&scene_path))?;
    let scene: SceneSpec = serde_json::from_str(&scene_text).map_err(|err| DatasetError::Parse(err.to_string()))?;
    let traj = trajectory::io::load(&root.join(&e.trajectory_file))?;
    let regen = PromptPair::new(&traj, &scene, e.prompt.virtual_indicator);
    if regen != e.prompt {
        return Err(DatasetError::Invalid(format!("{}: prompt does not regenerate", e.video_dir)));
    }
    let prompt_path = dir.join("prompt.txt");
    let stored = fs::read_to_string(&prompt_path).map_err(io_err(&prompt_path))?;
    if stored.trim_end_matches('\n') != regen.composite() {
        return Err(DatasetError::Invalid(format!("{}: prompt.txt differs", e.video_dir)));
    }
    if e.set == SetKind::Appearance {
        let f0 = &traj.frames[0].pose;
        for f in &traj.frames {
            let rel = relative_pose(f0, &f.pose);
            if rel.rotation.max_abs_diff(&Mat3::identity()) > 1e-12 || rel.translation.norm() > 1e-12 {
                return Err(DatasetError::Invalid(format!("{}: X_a camera moves", e.video_dir)));
            }
        }
    }
    Ok(())
}
