//! Scene, trajectory, render and corpus commands.

use std::path::PathBuf;

use anyhow::Context;
use clap::Args;
use serde::{Deserialize, Serialize};

use camsynth::dataset::{build_corpus, DatasetConfig, MANIFEST_FILE};
use camsynth::geometry::{look_at, Intrinsics, Vec3};
use camsynth::renderer::{io as rio, render_frames};
use camsynth::scene::{sample_scene, Background, FloorTexture, SceneConfig, SceneSpec};
use camsynth::trajectory::{self, build_default, MotionKind, SimpleKind};

use crate::config::{read_json, resolve, write_json, write_resolved};
use crate::{CliResult, ConfigArgs, Failure};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SceneRun {
    pub seed: u64,
    pub scene: SceneConfig,
}

#[derive(Args, Debug)]
pub struct SceneGenArgs {
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Scene seed (overrides the config's `seed`).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory; receives `scene.json`.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn scene_gen(a: SceneGenArgs) -> CliResult {
    let mut run: SceneRun = resolve(&SceneRun::default(), a.config.config.as_deref(), &a.config.sets)?;
    if let Some(s) = a.seed {
        run.seed = s;
    }
    run.scene.validate().map_err(|e| Failure::Config(e.into()))?;
    let scene = sample_scene(run.seed, &run.scene).context("sampling scene")?;
    write_resolved(&a.out, &run)?;
    let path = a.out.join("scene.json");
    write_json(&path, &scene)?;
    println!("{}", path.display());
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrajectoryRun {
    pub motion: MotionKind,
    pub width: u32,
    pub height: u32,
    pub hfov_deg: f64,
    pub frames: usize,
    pub fps: f64,
    /// Shake motions draw their noise from this seed.
    pub seed: u64,
    /// Start camera centre and look-at point (world units, y up).
    pub eye: [f64; 3],
    pub target: [f64; 3],
    /// Scene used by object-centred motions; an empty scene otherwise.
    pub scene: Option<PathBuf>,
}

impl Default for TrajectoryRun {
    fn default() -> Self {
        Self {
            motion: MotionKind::Simple(SimpleKind::PushIn),
            width: 128,
            height: 96,
            hfov_deg: 60.0,
            frames: 49,
            fps: 8.0,
            seed: 0,
            eye: [0.0, 1.6, 8.0],
            target: [0.0, 1.0, 0.0],
            scene: None,
        }
    }
}

#[derive(Args, Debug)]
pub struct TrajectoryGenArgs {
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Motion name, e.g. `push_in`, `push_in+truck_left`, `orbit`, `roll_rotation_90`.
    #[arg(long)]
    pub motion: Option<MotionKind>,
    /// Scene for object-centred motions.
    #[arg(long)]
    pub scene: Option<PathBuf>,
    /// Output directory; receives `poses.jsonl`.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn trajectory_gen(a: TrajectoryGenArgs) -> CliResult {
    let mut run: TrajectoryRun = resolve(&TrajectoryRun::default(), a.config.config.as_deref(), &a.config.sets)?;
    if let Some(m) = a.motion {
        run.motion = m;
    }
    if a.scene.is_some() {
        run.scene = a.scene;
    }
    let intr = Intrinsics::from_hfov(run.width, run.height, run.hfov_deg).map_err(|e| Failure::Config(e.into()))?;
    let start = look_at(Vec3::from_array(run.eye), Vec3::from_array(run.target), Vec3::new(0.0, 1.0, 0.0))
        .map_err(|e| Failure::Config(e.into()))?;
    let scene: SceneSpec = match &run.scene {
        Some(p) => read_json(p)?,
        None => SceneSpec::empty(Background::Sky, FloorTexture::BlackSand),
    };
    let traj = build_default(run.motion, &scene, &start, &intr, run.frames, run.fps, run.seed)
        .with_context(|| format!("building {}", run.motion))?;
    write_resolved(&a.out, &run)?;
    let path = a.out.join("poses.jsonl");
    trajectory::io::save(&traj, &path)?;
    println!("{}", path.display());
    Ok(())
}

#[derive(Args, Debug)]
pub struct RenderArgs {
    /// Scene JSON.
    #[arg(long)]
    pub scene: PathBuf,
    /// Trajectory JSONL.
    #[arg(long)]
    pub trajectory: PathBuf,
    /// Also write `depth_XXXX.pfm`.
    #[arg(long)]
    pub depth: bool,
    /// Output directory for frames and `poses.jsonl`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Serialize)]
struct RenderRun<'a> {
    scene: &'a SceneSpec,
    trajectory: &'a PathBuf,
    depth: bool,
}

pub fn render(a: RenderArgs) -> CliResult {
    let scene: SceneSpec = read_json(&a.scene)?;
    let traj = trajectory::io::load(&a.trajectory).with_context(|| format!("loading {}", a.trajectory.display()))?;
    let frames = render_frames(&scene, &traj);
    let dir = a.out.join("frames");
    rio::write_frames(&dir, &frames, a.depth).with_context(|| format!("writing {}", dir.display()))?;
    trajectory::io::save(&traj, &a.out.join("poses.jsonl"))?;
    write_resolved(&a.out, &RenderRun { scene: &scene, trajectory: &a.trajectory, depth: a.depth })?;
    println!("{} frames -> {}", frames.len(), dir.display());
    Ok(())
}

#[derive(Args, Debug)]
pub struct DatasetBuildArgs {
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Dataset root; receives the corpus and `manifest.json`.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn dataset_build(a: DatasetBuildArgs) -> CliResult {
    let cfg: DatasetConfig = resolve(&DatasetConfig::default(), a.config.config.as_deref(), &a.config.sets)?;
    cfg.validate().map_err(|e| Failure::Config(e.into()))?;
    build_corpus(&a.out, &cfg).context("building corpus")?;
    write_resolved(&a.out, &cfg)?;
    println!("{}", a.out.join(MANIFEST_FILE).display());
    Ok(())
}
