//! Generated reference page: every subcommand's help plus the default
//! config of each configurable command.

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use anyhow::Context;
use clap::{Args, Command, CommandFactory};

use camsynth::dataset::DatasetConfig;

use crate::gen::{SceneRun, TrajectoryRun};
use crate::toy::{Stage, TrainSettings};
use crate::{Cli, CliResult};

#[derive(Args, Debug)]
pub struct DocsArgs {
    /// Markdown file to write.
    #[arg(long, default_value = "docs/cli.md")]
    pub out: PathBuf,
}

fn walk(cmd: &mut Command, path: &str, out: &mut String) {
    let name = if path.is_empty() { cmd.get_name().to_owned() } else { format!("{path} {}", cmd.get_name()) };
    let help = cmd.render_long_help().to_string();
    let _ = write!(out, "## `{name}`\n\n```text\n{}\n```\n\n", help.trim_end());
    let mut subs: Vec<Command> = cmd.get_subcommands().filter(|s| s.get_name() != "help").cloned().collect();
    for s in &mut subs {
        walk(s, &name, out);
    }
}

fn config_block<T: serde::Serialize>(title: &str, v: &T, out: &mut String) {
    let json = serde_json::to_string_pretty(v).expect("defaults serialize");
    let _ = write!(out, "### {title}\n\n```json\n{json}\n```\n\n");
}

pub fn render() -> String {
    let mut out = String::from(
        "# camsynth command reference\n\n\
         Generated by `camsynth docs`. Exit codes: 0 success, 1 runtime failure, 2 usage or config error.\n\
         Config files are JSON objects merged over the defaults below; `--set a.b=value` overrides one key.\n\
         Unknown keys are rejected. Every run writes `resolved_config.json` next to its outputs\n\
         (`train` writes `<stage>_resolved_config.json`).\n\n",
    );
    walk(&mut Cli::command(), "", &mut out);
    out.push_str("# Config keys and defaults\n\n");
    config_block("`scene gen`", &SceneRun::default(), &mut out);
    config_block("`trajectory gen`", &TrajectoryRun::default(), &mut out);
    config_block("`dataset build`", &DatasetConfig::default(), &mut out);
    for stage in [Stage::Base, Stage::Appearance, Stage::Camera] {
        config_block(&format!("`train --stage {}`", stage.name()), &TrainSettings::for_stage(stage), &mut out);
    }
    out
}

pub fn write(a: DocsArgs) -> CliResult {
    if let Some(dir) = a.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(&a.out, render()).with_context(|| format!("writing {}", a.out.display()))?;
    println!("{}", a.out.display());
    Ok(())
}
