//! `camsynth`: scene and trajectory generation, rendering, corpus building,
//! metric reports, toy training and sampling.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.

mod config;
mod docs;
mod gen;
mod metrics;
mod toy;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

/// Error classes mapped onto the process exit code.
#[derive(Debug)]
pub enum Failure {
    /// Exit 2.
    Config(anyhow::Error),
    /// Exit 1.
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

macro_rules! runtime_from {
    ($($t:ty),*) => {$(
        impl From<$t> for Failure {
            fn from(e: $t) -> Self {
                Failure::Runtime(e.into())
            }
        }
    )*};
}

runtime_from!(
    camsynth::toytrain::ToyError,
    camsynth::trajectory::TrajectoryError,
    camsynth::dataset::DatasetError,
    camsynth::metrics::MetricsError
);

pub type CliResult<T = ()> = Result<T, Failure>;

#[derive(Parser, Debug)]
#[command(name = "camsynth", version, about = "Synthetic camera-motion video corpora and a toy dual-adapter trainer")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Scene specifications.
    #[command(subcommand)]
    Scene(SceneCmd),
    /// Camera trajectories.
    #[command(subcommand)]
    Trajectory(TrajectoryCmd),
    /// Render a scene along a trajectory into PPM frames and pose records.
    Render(gen::RenderArgs),
    /// Paired static / moving corpora.
    #[command(subcommand)]
    Dataset(DatasetCmd),
    /// Trajectory and flow metrics; the JSON report goes to stdout.
    #[command(subcommand)]
    Metrics(MetricsCmd),
    /// Train one stage of the toy denoiser on a corpus.
    Train(toy::TrainArgs),
    /// Sample a clip from trained checkpoints and score it.
    Sample(toy::SampleArgs),
    /// Write the flag and config-key reference page.
    Docs(docs::DocsArgs),
}

#[derive(Subcommand, Debug)]
enum SceneCmd {
    /// Sample a random scene.
    Gen(gen::SceneGenArgs),
}

#[derive(Subcommand, Debug)]
enum TrajectoryCmd {
    /// Build a catalogue motion.
    Gen(gen::TrajectoryGenArgs),
}

#[derive(Subcommand, Debug)]
enum DatasetCmd {
    /// Render a full corpus and its manifest.
    Build(gen::DatasetBuildArgs),
}

#[derive(Subcommand, Debug)]
enum MetricsCmd {
    /// Translation / rotation error between two trajectory files.
    Traj(metrics::TrajArgs),
    /// Frame-difference flow loss between two frame directories.
    Flow(metrics::FlowArgs),
}

/// Config file plus dotted-key overrides, shared by configurable commands.
#[derive(Args, Debug, Clone, Default)]
pub struct ConfigArgs {
    /// JSON config; keys not given keep their defaults.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Override a config key, e.g. `--set scene.moving_count.max=2`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub sets: Vec<String>,
}

fn run(cli: Cli) -> CliResult {
    match cli.command {
        Command::Scene(SceneCmd::Gen(a)) => gen::scene_gen(a),
        Command::Trajectory(TrajectoryCmd::Gen(a)) => gen::trajectory_gen(a),
        Command::Render(a) => gen::render(a),
        Command::Dataset(DatasetCmd::Build(a)) => gen::dataset_build(a),
        Command::Metrics(MetricsCmd::Traj(a)) => metrics::traj(a),
        Command::Metrics(MetricsCmd::Flow(a)) => metrics::flow(a),
        Command::Train(a) => toy::train(a),
        Command::Sample(a) => toy::sample(a),
        Command::Docs(a) => docs::write(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(e)) => {
            eprintln!("config error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
