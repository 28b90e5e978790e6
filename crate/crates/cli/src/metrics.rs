//! `metrics traj|flow`: JSON reports on stdout.

use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::Args;

use camsynth::metrics::{flow_report, trajectory_report};
use camsynth::renderer::io::read_frames;
use camsynth::trajectory;
use camsynth::video::VideoTensor;

use crate::CliResult;

#[derive(Args, Debug)]
pub struct TrajArgs {
    /// Ground-truth trajectory JSONL.
    #[arg(long)]
    pub gt: PathBuf,
    /// Estimated trajectory JSONL.
    #[arg(long)]
    pub est: PathBuf,
}

pub fn traj(a: TrajArgs) -> CliResult {
    let load = |p: &PathBuf| trajectory::io::load(p).with_context(|| format!("loading {}", p.display()));
    let report = trajectory_report(&load(&a.gt)?, &load(&a.est)?).context("trajectory metrics")?;
    println!("{}", serde_json::to_string(&report).context("serializing report")?);
    Ok(())
}

#[derive(Args, Debug)]
pub struct FlowArgs {
    /// Directory of predicted `frame_XXXX.ppm`.
    #[arg(long)]
    pub pred: PathBuf,
    /// Directory of ground-truth `frame_XXXX.ppm`.
    #[arg(long)]
    pub gt: PathBuf,
}

fn video(dir: &Path) -> anyhow::Result<VideoTensor> {
    let frames = read_frames(dir).with_context(|| format!("reading frames in {}", dir.display()))?;
    // The frame rate does not enter the loss.
    VideoTensor::from_images(&frames, 1.0).with_context(|| format!("frames in {}", dir.display()))
}

pub fn flow(a: FlowArgs) -> CliResult {
    let report = flow_report(&video(&a.pred)?, &video(&a.gt)?).context("flow metrics")?;
    println!("{}", serde_json::to_string(&report).context("serializing report")?);
    Ok(())
}
