//! Scripted camera trajectories for every motion in the taxonomy, plus their
//! natural-language camera instructions.
//!
//! Angles are degrees at API boundaries and radians internally. Frame `k` of a
//! trajectory sits at time `k / fps` seconds.

mod describe;
pub mod io;
mod kind;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use describe::{camera_instruction, describe};
pub use kind::{MotionKind, SimpleKind};

use crate::geometry::{interpolate_pose, look_at, CameraPose, GeometryError, Intrinsics, Mat3, Vec3};
use crate::scene::{ObjectRef, SceneError, SceneSpec};

#[derive(Debug, Error)]
pub enum TrajectoryError {
    #[error("{0} is not a simple motion")]
    WrongKind(MotionKind),
    #[error("unknown target {0}")]
    UnknownTarget(ObjectRef),
    #[error("roll angle must be 90 or 180 degrees, got {0}")]
    BadAngle(f64),
    #[error("invalid trajectory parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Scene(#[from] SceneError),
    #[error("trajectory file: {0}")]
    Io(#[from] std::io::Error),
    #[error("trajectory file line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T, E = TrajectoryError> = std::result::Result<T, E>;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimpleMotion {
    pub kind: SimpleKind,
    /// m/s for translations, deg/s for pans and tilts.
    pub speed: f64,
}

impl SimpleMotion {
    pub fn new(kind: SimpleKind, speed: f64) -> Self {
        Self { kind, speed }
    }

    pub fn with_default_speed(kind: SimpleKind) -> Self {
        Self { kind, speed: kind.default_speed() }
    }
}

/// Generating parameters, stored with every trajectory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum MotionParams {
    Static,
    Simple {
        motion: SimpleMotion,
    },
    Composed {
        first: SimpleMotion,
        second: SimpleMotion,
        handoff_frame: usize,
    },
    Orbit {
        center: [f64; 3],
        radius: f64,
        height: f64,
        degrees: f64,
        target: Option<ObjectRef>,
    },
    DollyZoom {
        target: [f64; 3],
        f0: f64,
        d0: f64,
        d1: f64,
        approach: [f64; 3],
        focus: Option<ObjectRef>,
    },
    HandheldShake {
        base_kind: MotionKind,
        base: Box<MotionParams>,
        amp_rot_deg: f64,
        amp_trans: f64,
        smoothness: f64,
    },
    ExplosiveShake {
        base_kind: MotionKind,
        base: Box<MotionParams>,
        t0: usize,
        amplitude_deg: f64,
        omega: f64,
        decay: f64,
        axis: [f64; 3],
    },
    SeekThenFocus {
        target: ObjectRef,
        sweep_amp_deg: f64,
        n_sweeps: u32,
        lock_frame: usize,
        transition_frames: usize,
        push_ratio: f64,
    },
    SwitchFocus {
        first: ObjectRef,
        second: ObjectRef,
    },
    Roll {
        degrees: u32,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryFrame {
    pub pose: CameraPose,
    pub intrinsics: Intrinsics,
}

/// Per-frame poses and intrinsics plus the parameters that generated them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimedTrajectory {
    pub kind: MotionKind,
    pub params: MotionParams,
    pub seed: u64,
    pub fps: f64,
    pub frames: Vec<TrajectoryFrame>,
}

impl TimedTrajectory {
    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn poses(&self) -> impl Iterator<Item = &CameraPose> {
        self.frames.iter().map(|f| &f.pose)
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 / self.fps
    }

    /// Checks length, pose validity and the constant-intrinsics rule.
    pub fn validate(&self) -> Result<()> {
        if self.frames.is_empty() {
            return Err(TrajectoryError::InvalidParams("empty trajectory".into()));
        }
        if !(self.fps > 0.0) {
            return Err(TrajectoryError::InvalidParams(format!("fps {}", self.fps)));
        }
        for f in &self.frames {
            f.pose.validate()?;
            f.intrinsics.validate()?;
        }
        if self.kind != MotionKind::DollyZoom {
            let i0 = self.frames[0].intrinsics;
            if self.frames.iter().any(|f| f.intrinsics != i0) {
                return Err(TrajectoryError::InvalidParams(
                    "intrinsics vary but the motion is not a dolly zoom".into(),
                ));
            }
        }
        Ok(())
    }

    fn from_poses(
        kind: MotionKind,
        params: MotionParams,
        seed: u64,
        fps: f64,
        intr: &Intrinsics,
        poses: Vec<CameraPose>,
    ) -> Self {
        let frames = poses.into_iter().map(|pose| TrajectoryFrame { pose, intrinsics: *intr }).collect();
        Self { kind, params, seed, fps, frames }
    }
}

fn check_common(frames: usize, fps: f64, min_frames: usize) -> Result<()> {
    if frames < min_frames {
        return Err(TrajectoryError::InvalidParams(format!("need at least {min_frames} frames, got {frames}")));
    }
    if !(fps > 0.0 && fps.is_finite()) {
        return Err(TrajectoryError::InvalidParams(format!("fps must be positive, got {fps}")));
    }
    Ok(())
}

/// Pose after `tau` seconds of a one-axis move from `start`.
fn simple_pose(motion: SimpleMotion, start: &CameraPose, tau: f64) -> CameraPose {
    let dist = motion.speed * tau;
    let angle = (motion.speed * tau).to_radians();
    let translate = |axis: Vec3| CameraPose {
        rotation: start.rotation,
        translation: start.translation - start.rotation * (axis * dist),
    };
    // Body rotation Q turns camera→world by R_wc·Q, i.e. world→camera by Qᵀ·R.
    let turn = |axis: Vec3, a: f64| start.rotated_in_place(&Mat3::from_axis_angle(axis, a).transpose());
    let x = Vec3::new(1.0, 0.0, 0.0);
    let y = Vec3::new(0.0, 1.0, 0.0);
    match motion.kind {
        SimpleKind::PushIn => translate(start.forward()),
        SimpleKind::PullOut => translate(-start.forward()),
        SimpleKind::TruckLeft => translate(-start.right()),
        SimpleKind::TruckRight => translate(start.right()),
        SimpleKind::PedestalUp => translate(start.up()),
        SimpleKind::PedestalDown => translate(-start.up()),
        SimpleKind::PanLeft => turn(y, angle),
        SimpleKind::PanRight => turn(y, -angle),
        SimpleKind::TiltUp => turn(x, angle),
        SimpleKind::TiltDown => turn(x, -angle),
        SimpleKind::Static => *start,
    }
}

fn simple_poses(motion: SimpleMotion, start: &CameraPose, frames: usize, fps: f64) -> Vec<CameraPose> {
    (0..frames).map(|k| if k == 0 { *start } else { simple_pose(motion, start, k as f64 / fps) }).collect()
}

/// Constant-speed one-axis move. Translations follow the start pose's
/// forward/right/up axes; pans and tilts rotate about its up/right axes.
pub fn make_simple(
    kind: MotionKind,
    start: &CameraPose,
    speed: f64,
    intr: &Intrinsics,
    frames: usize,
    fps: f64,
) -> Result<TimedTrajectory> {
    let MotionKind::Simple(simple) = kind else {
        return Err(TrajectoryError::WrongKind(kind));
    };
    check_common(frames, fps, 2)?;
    start.validate()?;
    let motion = SimpleMotion::new(simple, speed);
    let poses = simple_poses(motion, start, frames, fps);
    let params = if simple == SimpleKind::Static { MotionParams::Static } else { MotionParams::Simple { motion } };
    Ok(TimedTrajectory::from_poses(kind, params, 0, fps, intr, poses))
}

/// `frames` identical copies of `(pose, intr)`.
pub fn static_trajectory(pose: &CameraPose, intr: &Intrinsics, frames: usize, fps: f64) -> Result<TimedTrajectory> {
    check_common(frames, fps, 1)?;
    pose.validate()?;
    Ok(TimedTrajectory::from_poses(
        MotionKind::Simple(SimpleKind::Static),
        MotionParams::Static,
        0,
        fps,
        intr,
        vec![*pose; frames],
    ))
}

/// Index of the last frame of the first motion in a composed clip.
pub fn handoff_frame(frames: usize) -> usize {
    frames.div_ceil(2) - 1
}

/// First half (`⌈K/2⌉` frames) follows `first`; `second` then starts from the
/// handoff pose, so the clip is continuous.
pub fn compose(
    first: SimpleMotion,
    second: SimpleMotion,
    start: &CameraPose,
    intr: &Intrinsics,
    frames: usize,
    fps: f64,
) -> Result<TimedTrajectory> {
    check_common(frames, fps, 2)?;
    start.validate()?;
    let n1 = frames.div_ceil(2);
    let mut poses = simple_poses(first, start, n1, fps);
    let handoff = poses[n1 - 1];
    let tail = simple_poses(second, &handoff, frames - n1 + 1, fps);
    poses.extend_from_slice(&tail[1..]);
    Ok(TimedTrajectory::from_poses(
        MotionKind::Composed(first.kind, second.kind),
        MotionParams::Composed { first, second, handoff_frame: n1 - 1 },
        0,
        fps,
        intr,
        poses,
    ))
}

/// Circle of `radius` at `height` above `center`, sweeping `degrees`
/// uniformly from azimuth 0 (the `+z` side), always aimed at `center`.
#[allow(clippy::too_many_arguments)]
pub fn orbit(
    center: Vec3,
    radius: f64,
    height: f64,
    degrees: f64,
    intr: &Intrinsics,
    frames: usize,
    fps: f64,
    target: Option<ObjectRef>,
) -> Result<TimedTrajectory> {
    check_common(frames, fps, 1)?;
    if !(radius > 0.0) {
        return Err(TrajectoryError::InvalidParams(format!("orbit radius must be positive, got {radius}")));
    }
    let up = Vec3::new(0.0, 1.0, 0.0);
    let denom = (frames.max(2) - 1) as f64;
    let poses = (0..frames)
        .map(|k| {
            let phi = (degrees * k as f64 / denom).to_radians();
            let eye = center + Vec3::new(radius * phi.sin(), height, radius * phi.cos());
            look_at(eye, center, up)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(TimedTrajectory::from_poses(
        MotionKind::Orbit,
        MotionParams::Orbit { center: center.to_array(), radius, height, degrees, target },
        0,
        fps,
        intr,
        poses,
    ))
}

/// Moves along the view axis from distance `d0` to `d1` (linear in time) while
/// scaling the focal length by `d(t)/d0`, so the subject keeps its size.
/// `approach` is the direction from the target towards the camera.
#[allow(clippy::too_many_arguments)]
pub fn dolly_zoom(
    target: Vec3,
    base_intr: &Intrinsics,
    d0: f64,
    d1: f64,
    approach: Vec3,
    frames: usize,
    fps: f64,
    focus: Option<ObjectRef>,
) -> Result<TimedTrajectory> {
    check_common(frames, fps, 1)?;
    if !(d0 > 0.0 && d1 > 0.0) {
        return Err(TrajectoryError::InvalidParams(format!("distances must be positive: {d0}, {d1}")));
    }
    let dir = approach.normalized().ok_or_else(|| TrajectoryError::InvalidParams("zero approach direction".into()))?;
    let f0 = base_intr.focal_px;
    let denom = (frames.max(2) - 1) as f64;
    let up = Vec3::new(0.0, 1.0, 0.0);
    let mut out = Vec::with_capacity(frames);
    for k in 0..frames {
        let d = d0 + (d1 - d0) * (k as f64 / denom);
        let pose = look_at(target + dir * d, target, up)?;
        out.push(TrajectoryFrame { pose, intrinsics: base_intr.with_focal(f0 * (d / d0)) });
    }
    Ok(TimedTrajectory {
        kind: MotionKind::DollyZoom,
        params: MotionParams::DollyZoom { target: target.to_array(), f0, d0, d1, approach: dir.to_array(), focus },
        seed: 0,
        fps,
        frames: out,
    })
}

/// Adds band-limited jitter: seeded Gaussian steps smoothed by an exponential
/// moving average (`e_k = s·e_{k−1} + (1−s)·g_k`), then rescaled so the largest
/// deviation over the clip equals the requested amplitude. The rotational part
/// is a body-frame rotation vector, so its angle is exactly its norm.
pub fn handheld_shake(
    base: &TimedTrajectory,
    amp_rot_deg: f64,
    amp_trans: f64,
    smoothness: f64,
    seed: u64,
) -> Result<TimedTrajectory> {
    if !(amp_rot_deg >= 0.0 && amp_trans >= 0.0) {
        return Err(TrajectoryError::InvalidParams("shake amplitudes must be non-negative".into()));
    }
    if !(smoothness > 0.0 && smoothness < 1.0) {
        return Err(TrajectoryError::InvalidParams(format!("smoothness must lie in (0, 1), got {smoothness}")));
    }
    let params = MotionParams::HandheldShake {
        base_kind: base.kind,
        base: Box::new(base.params.clone()),
        amp_rot_deg,
        amp_trans,
        smoothness,
    };
    let mut out = TimedTrajectory { kind: MotionKind::HandheldShake, params, seed, ..base.clone() };
    if amp_rot_deg == 0.0 && amp_trans == 0.0 {
        return Ok(out);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = base.len();
    let mut state = [0.0f64; 6];
    let mut rot = Vec::with_capacity(n);
    let mut trans = Vec::with_capacity(n);
    for k in 0..n {
        for s in state.iter_mut() {
            let g: f64 = StandardNormal.sample(&mut rng);
            *s = if k == 0 { g } else { smoothness * *s + (1.0 - smoothness) * g };
        }
        rot.push(Vec3::new(state[0], state[1], state[2]));
        trans.push(Vec3::new(state[3], state[4], state[5]));
    }
    let peak = |v: &[Vec3]| v.iter().map(|w| w.norm()).fold(0.0, f64::max);
    let rot_scale = match peak(&rot) {
        p if p > 0.0 => amp_rot_deg.to_radians() / p,
        _ => 0.0,
    };
    let trans_scale = match peak(&trans) {
        p if p > 0.0 => amp_trans / p,
        _ => 0.0,
    };
    for (k, frame) in out.frames.iter_mut().enumerate() {
        let pose = frame.pose;
        let rotation = Mat3::exp(rot[k] * rot_scale) * pose.rotation;
        let center = pose.center() + trans[k] * trans_scale;
        frame.pose = CameraPose::from_center(rotation, center);
    }
    Ok(out)
}

fn seeded_axis(seed: u64) -> Vec3 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_a515);
    loop {
        let v = Vec3::new(
            StandardNormal.sample(&mut rng),
            StandardNormal.sample(&mut rng),
            StandardNormal.sample(&mut rng),
        );
        if let Some(u) = v.normalized() {
            return u;
        }
    }
}

/// Perturbation angle (degrees) of the explosive shake at frame `k`.
pub fn explosive_angle_deg(k: usize, t0: usize, amplitude_deg: f64, omega: f64, decay: f64) -> f64 {
    if k < t0 {
        return 0.0;
    }
    let dt = (k - t0) as f64;
    amplitude_deg * (-decay * dt).exp() * (omega * dt).sin()
}

/// Damped oscillation `A·e^(−decay·(k−t0))·sin(omega·(k−t0))` about a seeded
/// fixed body axis, starting at frame `t0`.
pub fn explosive_shake(
    base: &TimedTrajectory,
    t0: usize,
    amplitude_deg: f64,
    omega: f64,
    decay: f64,
    seed: u64,
) -> Result<TimedTrajectory> {
    if t0 >= base.len() {
        return Err(TrajectoryError::InvalidParams(format!("t0 {t0} outside clip of {} frames", base.len())));
    }
    let axis = seeded_axis(seed);
    let params = MotionParams::ExplosiveShake {
        base_kind: base.kind,
        base: Box::new(base.params.clone()),
        t0,
        amplitude_deg,
        omega,
        decay,
        axis: axis.to_array(),
    };
    let mut out = TimedTrajectory { kind: MotionKind::ExplosiveShake, params, seed, ..base.clone() };
    for (k, frame) in out.frames.iter_mut().enumerate().skip(t0) {
        let a = explosive_angle_deg(k, t0, amplitude_deg, omega, decay).to_radians();
        frame.pose = frame.pose.rotated_in_place(&Mat3::from_axis_angle(axis, a));
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeekParams {
    pub target: ObjectRef,
    pub sweep_amp_deg: f64,
    pub n_sweeps: u32,
    /// First frame of the aim transition.
    pub lock_frame: usize,
    pub transition_frames: usize,
    /// Final distance to the target as a fraction of the distance at lock-on.
    pub push_ratio: f64,
}

impl SeekParams {
    /// Lock at 60% of the clip with a transition window of 15%.
    pub fn with_defaults(target: ObjectRef, frames: usize) -> Self {
        Self {
            target,
            sweep_amp_deg: 25.0,
            n_sweeps: 2,
            lock_frame: ((0.6 * frames as f64).round() as usize).min(frames.saturating_sub(2)),
            transition_frames: ((0.15 * frames as f64).round() as usize).max(1),
            push_ratio: 0.6,
        }
    }
}

/// Sinusoidal pan search, slerp onto the target, then a push towards it.
pub fn seek_then_focus(
    scene: &SceneSpec,
    start: &CameraPose,
    intr: &Intrinsics,
    p: SeekParams,
    frames: usize,
    fps: f64,
) -> Result<TimedTrajectory> {
    check_common(frames, fps, 2)?;
    if !scene.contains(p.target) {
        return Err(TrajectoryError::UnknownTarget(p.target));
    }
    let settle = p.lock_frame + p.transition_frames;
    if p.transition_frames == 0 || settle > frames {
        return Err(TrajectoryError::InvalidParams(format!(
            "lock frame {} + transition {} must fit in {frames} frames",
            p.lock_frame, p.transition_frames
        )));
    }
    if !(p.push_ratio > 0.0) {
        return Err(TrajectoryError::InvalidParams("push_ratio must be positive".into()));
    }
    let up = Vec3::new(0.0, 1.0, 0.0);
    let c0 = start.center();
    let target_at = |k: usize| scene.object_center(p.target, k as f64 / fps);
    let sweep = |k: usize| {
        let phase = std::f64::consts::TAU * f64::from(p.n_sweeps) * k as f64 / p.lock_frame.max(1) as f64;
        let yaw = (p.sweep_amp_deg * phase.sin()).to_radians();
        start.rotated_in_place(&Mat3::from_axis_angle(Vec3::new(0.0, 1.0, 0.0), yaw).transpose())
    };
    let last_sweep = if p.lock_frame == 0 { *start } else { sweep(p.lock_frame - 1) };
    let d_lock = (c0 - target_at(settle - 1)?).norm();
    let push_frames = frames - settle;

    let mut poses = Vec::with_capacity(frames);
    for k in 0..frames {
        let pose = if k < p.lock_frame {
            sweep(k)
        } else if k < settle {
            let aim = look_at(c0, target_at(k)?, up)?;
            let s = (k - p.lock_frame + 1) as f64 / p.transition_frames as f64;
            interpolate_pose(&last_sweep, &aim, s)?
        } else {
            let tgt = target_at(k)?;
            let u = (k - settle + 1) as f64 / push_frames as f64;
            let dist = d_lock * (1.0 - (1.0 - p.push_ratio) * u);
            let dir = (c0 - tgt)
                .normalized()
                .ok_or_else(|| TrajectoryError::InvalidParams("camera starts inside the target".into()))?;
            look_at(tgt + dir * dist, tgt, up)?
        };
        poses.push(pose);
    }
    Ok(TimedTrajectory::from_poses(
        MotionKind::SeekThenFocus,
        MotionParams::SeekThenFocus {
            target: p.target,
            sweep_amp_deg: p.sweep_amp_deg,
            n_sweeps: p.n_sweeps,
            lock_frame: p.lock_frame,
            transition_frames: p.transition_frames,
            push_ratio: p.push_ratio,
        },
        0,
        fps,
        intr,
        poses,
    ))
}

/// Frame counts of the three switch-focus phases (aim A, transition, aim B).
pub fn switch_focus_phases(frames: usize) -> (usize, usize, usize) {
    let third = frames / 3;
    (third, frames - 2 * third, third)
}

/// Aim at `a` for the first third, slerp to `b` over the middle third, aim at
/// `b` for the rest. The camera centre stays at `center`.
#[allow(clippy::too_many_arguments)]
pub fn switch_focus(
    scene: &SceneSpec,
    center: Vec3,
    intr: &Intrinsics,
    a: ObjectRef,
    b: ObjectRef,
    frames: usize,
    fps: f64,
) -> Result<TimedTrajectory> {
    check_common(frames, fps, 3)?;
    for obj in [a, b] {
        if !scene.contains(obj) {
            return Err(TrajectoryError::UnknownTarget(obj));
        }
    }
    let up = Vec3::new(0.0, 1.0, 0.0);
    let aim = |obj: ObjectRef, k: usize| -> Result<CameraPose> {
        Ok(look_at(center, scene.object_center(obj, k as f64 / fps)?, up)?)
    };
    let (n1, nm, _) = switch_focus_phases(frames);
    let mut poses = Vec::with_capacity(frames);
    for k in 0..frames {
        let pose = if k < n1 {
            aim(a, k)?
        } else if k < n1 + nm {
            let s = (k - n1 + 1) as f64 / (nm + 1) as f64;
            interpolate_pose(&aim(a, k)?, &aim(b, k)?, s)?
        } else {
            aim(b, k)?
        };
        poses.push(pose);
    }
    Ok(TimedTrajectory::from_poses(
        MotionKind::SwitchFocus,
        MotionParams::SwitchFocus { first: a, second: b },
        0,
        fps,
        intr,
        poses,
    ))
}

/// Linear roll about the view axis from 0 to `degrees` (90 or 180).
pub fn roll_rotation(
    base_pose: &CameraPose,
    intr: &Intrinsics,
    degrees: f64,
    frames: usize,
    fps: f64,
) -> Result<TimedTrajectory> {
    if degrees != 90.0 && degrees != 180.0 {
        return Err(TrajectoryError::BadAngle(degrees));
    }
    check_common(frames, fps, 2)?;
    base_pose.validate()?;
    let z = Vec3::new(0.0, 0.0, 1.0);
    let denom = (frames - 1) as f64;
    let poses = (0..frames)
        .map(|k| {
            if k == 0 {
                *base_pose
            } else {
                let a = (degrees * k as f64 / denom).to_radians();
                base_pose.rotated_in_place(&Mat3::from_axis_angle(z, a).transpose())
            }
        })
        .collect();
    let d = degrees as u32;
    Ok(TimedTrajectory::from_poses(MotionKind::RollRotation(d), MotionParams::Roll { degrees: d }, 0, fps, intr, poses))
}

/// Builds any catalogue motion with default parameters, starting from (or
/// around) `start`. Object-centred motions pick moving objects first.
#[allow(clippy::too_many_arguments)]
pub fn build_default(
    kind: MotionKind,
    scene: &SceneSpec,
    start: &CameraPose,
    intr: &Intrinsics,
    frames: usize,
    fps: f64,
    seed: u64,
) -> Result<TimedTrajectory> {
    let focus = scene.object_refs().next();
    let focus_point = match focus {
        Some(o) => scene.object_center(o, 0.0)?,
        None => start.center() + start.forward() * 6.0,
    };
    match kind {
        MotionKind::Simple(SimpleKind::Static) => static_trajectory(start, intr, frames, fps),
        MotionKind::Simple(k) => make_simple(kind, start, k.default_speed(), intr, frames, fps),
        MotionKind::Composed(a, b) => {
            compose(SimpleMotion::with_default_speed(a), SimpleMotion::with_default_speed(b), start, intr, frames, fps)
        }
        MotionKind::SeekThenFocus => {
            let target = focus.ok_or_else(|| TrajectoryError::InvalidParams("seek needs an object".into()))?;
            seek_then_focus(scene, start, intr, SeekParams::with_defaults(target, frames), frames, fps)
        }
        MotionKind::SwitchFocus => {
            let mut refs = scene.object_refs();
            match (refs.next(), refs.next()) {
                (Some(a), Some(b)) => switch_focus(scene, start.center(), intr, a, b, frames, fps),
                _ => Err(TrajectoryError::InvalidParams("switch focus needs two objects".into())),
            }
        }
        MotionKind::Orbit => {
            let off = start.center() - focus_point;
            let radius = off.x.hypot(off.z).max(1.0);
            orbit(focus_point, radius, off.y.max(0.5), 90.0, intr, frames, fps, focus)
        }
        MotionKind::DollyZoom => {
            let d0 = (start.center() - focus_point).norm().max(1.0);
            let approach = match (start.center() - focus_point).normalized() {
                Some(a) => a,
                None => -start.forward(),
            };
            dolly_zoom(focus_point, intr, d0, 0.5 * d0, approach, frames, fps, focus)
        }
        MotionKind::HandheldShake => {
            let base = static_trajectory(start, intr, frames, fps)?;
            handheld_shake(&base, 1.5, 0.03, 0.85, seed)
        }
        MotionKind::ExplosiveShake => {
            let base = static_trajectory(start, intr, frames, fps)?;
            explosive_shake(&base, frames / 3, 5.0, 1.2, 0.15, seed)
        }
        MotionKind::RollRotation(d) => roll_rotation(start, intr, f64::from(d), frames, fps),
    }
}

#[cfg(test)]
mod tests;
