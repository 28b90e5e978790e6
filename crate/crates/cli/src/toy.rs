//! `train` and `sample` on a rendered corpus.
//!
//! Each stage writes its own checkpoint so that inference can load exactly
//! the modules it deploys: `base.ckpt` (denoiser + frozen encoder, with the
//! corpus vocabulary), `appearance.ckpt`, and `camera.ckpt` (a LoRA adapter
//! in the text paradigm, the encoder delta in the trajectory paradigm).

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use camsynth::dataset::{load_manifest, DatasetManifest, SetKind, MANIFEST_FILE};
use camsynth::metrics::{estimate_shifts, motion_correlation, style_score, StyleStats};
use camsynth::renderer::io::{frame_name, write_ppm};
use camsynth::toytrain::checkpoint::{
    adapter_checkpoint, adapter_from_checkpoint, base_checkpoint, base_from_checkpoint, encoder_delta_checkpoint,
    encoder_delta_from_checkpoint, Checkpoint,
};
use camsynth::toytrain::data::{load_example, load_examples, Vocabulary};
use camsynth::toytrain::{
    pretrain_base, sample as draw, train_appearance, train_camera, Adapter, CameraModule, Denoiser, ModelConfig,
    NoiseSchedule, Paradigm, Stack, TrainConfig, TrainingCurve, TrajectoryEncoder, SAMPLE_FPS,
};
use camsynth::video::VideoTensor;

use crate::config::{resolve, write_json, write_resolved, RESOLVED};
use crate::{CliResult, ConfigArgs, Failure};

pub const BASE_FILE: &str = "base.ckpt";
pub const APPEARANCE_FILE: &str = "appearance.ckpt";
pub const CAMERA_FILE: &str = "camera.ckpt";

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    /// Pretrain the stand-in base model on the whole corpus.
    Base,
    /// Step 1: appearance adapter on the static set.
    Appearance,
    /// Step 2: camera module on the moving set.
    Camera,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Base => "base",
            Stage::Appearance => "appearance",
            Stage::Camera => "camera",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ParadigmArg {
    Text,
    Trajectory,
}

impl From<ParadigmArg> for Paradigm {
    fn from(p: ParadigmArg) -> Self {
        match p {
            ParadigmArg::Text => Paradigm::Text,
            ParadigmArg::Trajectory => Paradigm::Trajectory,
        }
    }
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    #[arg(long, value_enum)]
    pub stage: Stage,
    #[arg(long, value_enum, default_value = "text")]
    pub paradigm: ParadigmArg,
    /// Corpus root (contains `manifest.json`).
    #[arg(long)]
    pub dataset: PathBuf,
    /// Base checkpoint; required by the appearance and camera stages.
    #[arg(long)]
    pub base: Option<PathBuf>,
    /// Appearance checkpoint; required by the camera stage.
    #[arg(long)]
    pub appearance: Option<PathBuf>,
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Training seed (overrides `train.seed`).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory for the checkpoint, curve CSV and resolved config.
    #[arg(long)]
    pub out: PathBuf,
}

/// Everything a `train` run depends on. `model` only shapes the base stage:
/// later stages take the shape from the base checkpoint.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainRun {
    pub stage: Stage,
    pub paradigm: Paradigm,
    pub dataset: PathBuf,
    pub base: Option<PathBuf>,
    pub appearance: Option<PathBuf>,
    pub model: ModelConfig,
    pub train: TrainConfig,
}

/// The part of a train run a config file may set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainSettings {
    pub model: ModelConfig,
    pub train: TrainConfig,
}

impl TrainSettings {
    pub fn for_stage(stage: Stage) -> Self {
        let train = match stage {
            Stage::Base => TrainConfig::base(),
            Stage::Appearance => TrainConfig::appearance(),
            Stage::Camera => TrainConfig::camera(),
        };
        Self { model: ModelConfig::default(), train }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BaseExtra {
    vocabulary: Vocabulary,
    paradigm: Paradigm,
}

fn open_manifest(root: &Path) -> anyhow::Result<DatasetManifest> {
    let path = root.join(MANIFEST_FILE);
    load_manifest(&path).with_context(|| format!("loading {}", path.display()))
}

fn load_ckpt(path: &Path) -> anyhow::Result<Checkpoint> {
    // The error already names the path.
    Ok(Checkpoint::load(path)?)
}

fn load_base(path: &Path, vocab: &Vocabulary) -> anyhow::Result<(Denoiser, TrajectoryEncoder)> {
    let (model, encoder, extra) = base_from_checkpoint(&load_ckpt(path)?)?;
    let extra: BaseExtra = serde_json::from_value(extra).context("base checkpoint metadata")?;
    if &extra.vocabulary != vocab {
        bail!("base checkpoint {} was trained on a corpus with a different motion vocabulary", path.display());
    }
    Ok((model, encoder))
}

fn save(dir: &Path, name: &str, ckpt: &Checkpoint, curve: &TrainingCurve) -> anyhow::Result<PathBuf> {
    let path = dir.join(name);
    ckpt.save(&path).with_context(|| format!("writing {}", path.display()))?;
    let stem = name.trim_end_matches(".ckpt");
    let csv = dir.join(format!("{stem}_curve.csv"));
    fs::write(&csv, curve.to_csv()).with_context(|| format!("writing {}", csv.display()))?;
    Ok(path)
}

pub fn train(a: TrainArgs) -> CliResult {
    let settings: TrainSettings =
        resolve(&TrainSettings::for_stage(a.stage), a.config.config.as_deref(), &a.config.sets)?;
    let mut run = TrainRun {
        stage: a.stage,
        paradigm: a.paradigm.into(),
        dataset: a.dataset,
        base: a.base,
        appearance: a.appearance,
        model: settings.model,
        train: settings.train,
    };
    if let Some(s) = a.seed {
        run.train.seed = s;
    }
    if run.stage != Stage::Base && run.base.is_none() {
        return Err(Failure::Config(anyhow!("--base is required for the {:?} stage", run.stage)));
    }

    let sched = NoiseSchedule::default();
    let manifest = open_manifest(&run.dataset)?;
    let vocab = Vocabulary::from_manifest(&manifest);
    let root = run.dataset.clone();
    fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;

    let (path, curve) = match run.stage {
        Stage::Base => {
            let cfg = vocab.model_config(&run.model);
            cfg.validate().map_err(|e| Failure::Config(e.into()))?;
            run.model = cfg.clone();
            let mut data = load_examples(&root, &manifest, SetKind::Appearance, run.paradigm, &cfg)?;
            data.extend(load_examples(&root, &manifest, SetKind::Camera, run.paradigm, &cfg)?);
            let (model, encoder, curve) = pretrain_base(cfg, &data, &run.train, &sched)?;
            let extra =
                serde_json::to_value(BaseExtra { vocabulary: vocab, paradigm: run.paradigm }).context("metadata")?;
            (save(&a.out, BASE_FILE, &base_checkpoint(&model, &encoder, extra), &curve)?, curve)
        }
        Stage::Appearance => {
            let (model, encoder) = load_base(run.base.as_deref().expect("checked"), &vocab)?;
            run.model = model.config.clone();
            let data = load_examples(&root, &manifest, SetKind::Appearance, run.paradigm, &model.config)?;
            let (adapter, curve) = train_appearance(&model, &encoder, &data, &run.train, &sched)?;
            (save(&a.out, APPEARANCE_FILE, &adapter_checkpoint(&adapter), &curve)?, curve)
        }
        Stage::Camera => {
            let (model, encoder) = load_base(run.base.as_deref().expect("checked"), &vocab)?;
            run.model = model.config.clone();
            let appearance = match &run.appearance {
                Some(p) => Some(adapter_from_checkpoint(&load_ckpt(p)?)?),
                None => None,
            };
            let data = load_examples(&root, &manifest, SetKind::Camera, run.paradigm, &model.config)?;
            let (module, curve) =
                train_camera(&model, &encoder, appearance.as_ref(), &data, &run.train, run.paradigm, &sched)?;
            let ckpt = match module {
                CameraModule::Adapter(ad) => adapter_checkpoint(&ad),
                CameraModule::EncoderDelta(d) => encoder_delta_checkpoint(&d),
            };
            (save(&a.out, CAMERA_FILE, &ckpt, &curve)?, curve)
        }
    };
    // Stages usually share an output directory, so each keeps its own record.
    write_json(&a.out.join(format!("{}_{RESOLVED}", run.stage.name())), &run)?;
    let n = curve.steps.len();
    if n > 0 {
        let window = 10.min(n);
        let (start, end) =
            (curve.running_mean(window - 1, window, |l| l.total), curve.running_mean(n - 1, window, |l| l.total));
        println!("{} (mean loss over {window} steps: {start:.6} -> {end:.6}; {n} steps)", path.display());
    }
    Ok(())
}

#[derive(Args, Debug)]
pub struct SampleArgs {
    /// Base checkpoint.
    #[arg(long)]
    pub base: PathBuf,
    /// Camera checkpoint (adapter: text paradigm; encoder delta: trajectory paradigm).
    #[arg(long)]
    pub camera: PathBuf,
    /// Appearance checkpoint to stack under the camera module.
    #[arg(long)]
    pub appearance: Option<PathBuf>,
    /// Discard the appearance adapter; its file is never opened.
    #[arg(long)]
    pub drop_appearance: bool,
    /// Corpus root; the entry supplies the condition and the reference clip.
    #[arg(long)]
    pub dataset: PathBuf,
    /// `video_dir` of an `X_c` entry; defaults to the first one.
    #[arg(long)]
    pub entry: Option<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Keep the virtual-style bit set in the condition.
    #[arg(long = "virtual")]
    pub virtual_bit: bool,
    /// Output directory for `frames/`, `report.json` and the resolved config.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Serialize)]
struct SampleRun<'a> {
    base: &'a Path,
    camera: &'a Path,
    appearance: Option<&'a Path>,
    drop_appearance: bool,
    dataset: &'a Path,
    entry: &'a str,
    seed: u64,
    virtual_bit: bool,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SampleReport {
    pub entry: String,
    pub seed: u64,
    pub paradigm: Paradigm,
    pub appearance_active: bool,
    pub virtual_bit: bool,
    /// Colour-statistics distance to the entry's ground-truth clip.
    pub style_score: f64,
    /// Correlation of estimated global shifts with those of the ground-truth clip.
    pub motion_correlation: f64,
    pub motion_flat: bool,
    pub estimated_shifts: Vec<[i32; 2]>,
    pub reference_shifts: Vec<[i32; 2]>,
}

pub fn sample(a: SampleArgs) -> CliResult {
    let sched = NoiseSchedule::default();
    let manifest = open_manifest(&a.dataset)?;
    let vocab = Vocabulary::from_manifest(&manifest);
    let entry = match &a.entry {
        Some(dir) => {
            manifest.entries.iter().find(|e| &e.video_dir == dir).ok_or_else(|| anyhow!("no entry `{dir}`"))?
        }
        None => manifest.entries_in(SetKind::Camera).next().ok_or_else(|| anyhow!("corpus has no X_c entries"))?,
    };

    let (model, mut encoder) = load_base(&a.base, &vocab)?;
    let camera_ckpt = load_ckpt(&a.camera)?;
    let (paradigm, camera) = match camera_ckpt.kind.as_str() {
        "adapter" => (Paradigm::Text, Some(adapter_from_checkpoint(&camera_ckpt)?)),
        "encoder_delta" => {
            encoder.delta = encoder_delta_from_checkpoint(&camera_ckpt, &encoder)?;
            (Paradigm::Trajectory, None)
        }
        other => return Err(anyhow!("{}: `{other}` is not a camera module", a.camera.display()).into()),
    };
    let appearance: Option<Adapter> = match (&a.appearance, a.drop_appearance) {
        (Some(p), false) => Some(adapter_from_checkpoint(&load_ckpt(p)?)?),
        _ => None,
    };

    let example = load_example(&a.dataset, entry, &vocab, paradigm, &model.config)?;
    let cond = example.condition.with_virtual_bit(a.virtual_bit);
    let stack = Stack::base(&model)
        .with_encoder(&encoder, paradigm == Paradigm::Trajectory)
        .with_appearance(appearance.as_ref())
        .with_camera(camera.as_ref());
    let video = draw(&stack, &cond, a.seed, &sched)?;

    let cfg = &model.config;
    let reference = VideoTensor::from_data(cfg.frames, cfg.height, cfg.width, SAMPLE_FPS, example.video)
        .map_err(|e| anyhow!("reference clip: {e}"))?;
    let (ref_shifts, _) = estimate_shifts(&reference);
    let target: Vec<[f64; 2]> = ref_shifts.iter().map(|s| [f64::from(s[0]), f64::from(s[1])]).collect();
    let motion = motion_correlation(&video, &target).context("motion correlation")?;
    let style = style_score(&video, &StyleStats::of(&reference)).context("style score")?;

    let frames = a.out.join("frames");
    fs::create_dir_all(&frames).with_context(|| format!("creating {}", frames.display()))?;
    for (k, img) in video.to_images().iter().enumerate() {
        let p = frames.join(frame_name(k));
        write_ppm(&p, img).with_context(|| format!("writing {}", p.display()))?;
    }
    let report = SampleReport {
        entry: entry.video_dir.clone(),
        seed: a.seed,
        paradigm,
        appearance_active: appearance.is_some(),
        virtual_bit: a.virtual_bit,
        style_score: style,
        motion_correlation: motion.value,
        motion_flat: motion.flat,
        estimated_shifts: motion.estimated,
        reference_shifts: ref_shifts,
    };
    write_json(&a.out.join("report.json"), &report)?;
    write_resolved(
        &a.out,
        &SampleRun {
            base: &a.base,
            camera: &a.camera,
            appearance: a.appearance.as_deref(),
            drop_appearance: a.drop_appearance,
            dataset: &a.dataset,
            entry: &entry.video_dir,
            seed: a.seed,
            virtual_bit: a.virtual_bit,
        },
    )?;
    println!(
        "{}",
        serde_json::to_string(&json!({
            "style_score": report.style_score,
            "motion_correlation": report.motion_correlation,
        }))
        .context("serializing summary")?
    );
    Ok(())
}
