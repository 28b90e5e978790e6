//! JSON-lines trajectory files: one header line followed by one pose record per frame.
//!
//! ```text
//! {"kind":"push_in","params":{...},"seed":0,"fps":8.0,"frames":49}
//! {"R":[...],"t":[...],"f_px":...,"cx":...,"cy":...,"w":...,"h":...}
//! ...
//! ```

use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{MotionKind, MotionParams, Result, TimedTrajectory, TrajectoryError, TrajectoryFrame};
use crate::geometry::record::PoseRecord;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectoryHeader {
    pub kind: MotionKind,
    pub params: MotionParams,
    pub seed: u64,
    pub fps: f64,
    pub frames: usize,
}

pub fn write_jsonl<W: Write>(traj: &TimedTrajectory, mut w: W) -> Result<()> {
    let header = TrajectoryHeader {
        kind: traj.kind,
        params: traj.params.clone(),
        seed: traj.seed,
        fps: traj.fps,
        frames: traj.len(),
    };
    let line =
        |v: serde_json::Result<String>| v.map_err(|e| TrajectoryError::Parse { line: 0, message: e.to_string() });
    writeln!(w, "{}", line(serde_json::to_string(&header))?)?;
    for f in &traj.frames {
        writeln!(w, "{}", line(serde_json::to_string(&PoseRecord::new(&f.pose, &f.intrinsics)))?)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_jsonl<R: BufRead>(r: R) -> Result<TimedTrajectory> {
    let mut lines = r.lines().enumerate().filter(|(_, l)| !matches!(l, Ok(s) if s.trim().is_empty()));
    let parse_err =
        |line: usize, e: &dyn std::fmt::Display| TrajectoryError::Parse { line: line + 1, message: e.to_string() };

    let (n, first) = lines.next().ok_or(TrajectoryError::Parse { line: 1, message: "empty file".into() })?;
    let header: TrajectoryHeader = serde_json::from_str(&first?).map_err(|e| parse_err(n, &e))?;
    let mut frames = Vec::with_capacity(header.frames);
    for (n, l) in lines {
        let rec: PoseRecord = serde_json::from_str(&l?).map_err(|e| parse_err(n, &e))?;
        let pose = rec.pose().map_err(|e| parse_err(n, &e))?;
        let intrinsics = rec.intrinsics().map_err(|e| parse_err(n, &e))?;
        frames.push(TrajectoryFrame { pose, intrinsics });
    }
    if frames.len() != header.frames {
        return Err(TrajectoryError::Parse {
            line: 1,
            message: format!("header declares {} frames, file has {}", header.frames, frames.len()),
        });
    }
    let traj = TimedTrajectory { kind: header.kind, params: header.params, seed: header.seed, fps: header.fps, frames };
    traj.validate()?;
    Ok(traj)
}

pub fn save(traj: &TimedTrajectory, path: &Path) -> Result<()> {
    let f = std::fs::File::create(path)?;
    write_jsonl(traj, std::io::BufWriter::new(f))
}

pub fn load(path: &Path) -> Result<TimedTrajectory> {
    let f = std::fs::File::open(path)?;
    read_jsonl(std::io::BufReader::new(f))
}

/// Per-frame records only, for external consumers.
pub fn records(traj: &TimedTrajectory) -> Vec<PoseRecord> {
    traj.frames.iter().map(|f| PoseRecord::new(&f.pose, &f.intrinsics)).collect()
}
