//! Trajectory accuracy (translation / rotation error), the frame-difference
//! flow loss, and the toy style and motion scores.
//!
//! Trajectory errors re-base both sequences so frame 0 is the identity, scale
//! translations so the ground truth's largest re-based translation has norm 1
//! (the same factor is applied to the estimate), and average over frames
//! `1..K`. Frame 0 agrees by construction and is excluded from the mean; the
//! per-frame lists still include it as 0.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{relative_pose, rotation_angle, CameraPose, GeometryError, Mat3, Vec3};
use crate::scalar::Real;
use crate::trajectory::TimedTrajectory;
use crate::video::VideoTensor;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("trajectory lengths differ: {gt} vs {est}")]
    LengthMismatch { gt: usize, est: usize },
    #[error("video shapes differ: {0:?} vs {1:?}")]
    ShapeMismatch([usize; 4], [usize; 4]),
    #[error("need at least {need} frames, got {got}")]
    DegenerateLength { need: usize, got: usize },
    #[error("statistics are not finite")]
    SingularStats,
    #[error("expected {expected} displacement vectors, got {got}")]
    DisplacementCount { expected: usize, got: usize },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryReport {
    pub trans_err: f64,
    /// Degrees.
    pub rot_err: f64,
    pub per_frame_trans: Vec<f64>,
    pub per_frame_rot: Vec<f64>,
}

fn rebase<T: Real>(poses: &[CameraPose<T>]) -> Vec<CameraPose<T>> {
    poses.iter().map(|p| relative_pose(&poses[0], p)).collect()
}

fn check_lengths(gt: usize, est: usize) -> Result<(), MetricsError> {
    if gt != est {
        return Err(MetricsError::LengthMismatch { gt, est });
    }
    if gt < 2 {
        return Err(MetricsError::DegenerateLength { need: 2, got: gt });
    }
    Ok(())
}

fn mean_after_first<T: Real>(v: &[T]) -> T {
    let s = v[1..].iter().fold(T::zero(), |a, &b| a + b);
    s / T::lit((v.len() - 1) as f64)
}

/// Per-frame translation errors (normalized units) of re-based pose sequences.
pub fn trans_errors<T: Real>(gt: &[CameraPose<T>], est: &[CameraPose<T>]) -> Result<Vec<T>, MetricsError> {
    check_lengths(gt.len(), est.len())?;
    let (g, e) = (rebase(gt), rebase(est));
    let max = g.iter().map(|p| p.translation.norm()).fold(T::zero(), T::max);
    let scale = if max > T::zero() { T::one() / max } else { T::one() };
    Ok(g.iter().zip(&e).map(|(a, b)| (b.translation - a.translation).norm() * scale).collect())
}

/// Per-frame rotation errors in degrees of re-based pose sequences.
pub fn rot_errors<T: Real>(gt: &[CameraPose<T>], est: &[CameraPose<T>]) -> Result<Vec<T>, MetricsError> {
    check_lengths(gt.len(), est.len())?;
    let (g, e) = (rebase(gt), rebase(est));
    g.iter().zip(&e).map(|(a, b)| Ok(rotation_angle(&b.rotation, &a.rotation)?.to_degrees())).collect()
}

pub fn trans_err_poses<T: Real>(gt: &[CameraPose<T>], est: &[CameraPose<T>]) -> Result<T, MetricsError> {
    Ok(mean_after_first(&trans_errors(gt, est)?))
}

pub fn rot_err_poses<T: Real>(gt: &[CameraPose<T>], est: &[CameraPose<T>]) -> Result<T, MetricsError> {
    Ok(mean_after_first(&rot_errors(gt, est)?))
}

fn poses(t: &TimedTrajectory) -> Vec<CameraPose> {
    t.poses().copied().collect()
}

pub fn trans_err(gt: &TimedTrajectory, est: &TimedTrajectory) -> Result<f64, MetricsError> {
    trans_err_poses(&poses(gt), &poses(est))
}

pub fn rot_err(gt: &TimedTrajectory, est: &TimedTrajectory) -> Result<f64, MetricsError> {
    rot_err_poses(&poses(gt), &poses(est))
}

pub fn trajectory_report(gt: &TimedTrajectory, est: &TimedTrajectory) -> Result<TrajectoryReport, MetricsError> {
    let (g, e) = (poses(gt), poses(est));
    let per_frame_trans = trans_errors(&g, &e)?;
    let per_frame_rot = rot_errors(&g, &e)?;
    Ok(TrajectoryReport {
        trans_err: mean_after_first(&per_frame_trans),
        rot_err: mean_after_first(&per_frame_rot),
        per_frame_trans,
        per_frame_rot,
    })
}

fn check_videos<T: Real>(a: &VideoTensor<T>, b: &VideoTensor<T>) -> Result<(), MetricsError> {
    if !a.same_shape(b) {
        return Err(MetricsError::ShapeMismatch(a.shape(), b.shape()));
    }
    if a.frames < 2 {
        return Err(MetricsError::DegenerateLength { need: 2, got: a.frames });
    }
    Ok(())
}

/// Mean absolute mismatch of one frame gap: `mean_i |(p[k+1]−p[k]) − (g[k+1]−g[k])|`,
/// accumulated in element order.
pub fn flow_gap<T: Real>(pred: &VideoTensor<T>, gt: &VideoTensor<T>, k: usize) -> T {
    let (p0, p1) = (pred.frame(k), pred.frame(k + 1));
    let (g0, g1) = (gt.frame(k), gt.frame(k + 1));
    let mut acc = T::zero();
    for i in 0..p0.len() {
        acc = acc + ((p1[i] - p0[i]) - (g1[i] - g0[i])).abs();
    }
    acc / T::lit(p0.len() as f64)
}

/// Frame-difference loss: gap means summed in frame order, divided by `K − 1`.
pub fn flow_loss<T: Real>(pred: &VideoTensor<T>, gt: &VideoTensor<T>) -> Result<T, MetricsError> {
    check_videos(pred, gt)?;
    let mut total = T::zero();
    for k in 0..pred.frames - 1 {
        total = total + flow_gap(pred, gt, k);
    }
    Ok(total / T::lit((pred.frames - 1) as f64))
}

/// Per-channel colour mean and covariance over all pixels of a clip.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StyleStats {
    pub mean: [f64; 3],
    pub cov: [[f64; 3]; 3],
}

/// Regularizer added to the pooled covariance diagonal.
pub const STYLE_EPSILON: f64 = 1e-6;

impl StyleStats {
    pub fn of<T: Real>(video: &VideoTensor<T>) -> Self {
        Self::of_many(std::slice::from_ref(video))
    }

    /// Pooled statistics of several clips.
    pub fn of_many<T: Real>(videos: &[VideoTensor<T>]) -> Self {
        let mut n = 0.0;
        let mut sum = [0.0; 3];
        for v in videos {
            for px in v.data.chunks_exact(3) {
                for c in 0..3 {
                    sum[c] += px[c].as_f64();
                }
                n += 1.0;
            }
        }
        let mean = sum.map(|s| s / n);
        let mut cov = [[0.0; 3]; 3];
        for v in videos {
            for px in v.data.chunks_exact(3) {
                let d = [px[0].as_f64() - mean[0], px[1].as_f64() - mean[1], px[2].as_f64() - mean[2]];
                for i in 0..3 {
                    for j in 0..3 {
                        cov[i][j] += d[i] * d[j];
                    }
                }
            }
        }
        for row in cov.iter_mut() {
            for v in row.iter_mut() {
                *v /= n;
            }
        }
        Self { mean, cov }
    }
}

/// Mahalanobis distance between clip and reference colour means under the
/// pooled covariance: `sqrt(Δμᵀ (½(Σ_v + Σ_r) + εI)⁻¹ Δμ)` with `ε = 1e-6`.
pub fn style_score_stats(stats: &StyleStats, reference: &StyleStats) -> Result<f64, MetricsError> {
    let mut s = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            s[i][j] = 0.5 * (stats.cov[i][j] + reference.cov[i][j]);
        }
        s[i][i] += STYLE_EPSILON;
    }
    let inv = Mat3 { rows: s }.inverse().ok_or(MetricsError::SingularStats)?;
    let d = Vec3::new(
        stats.mean[0] - reference.mean[0],
        stats.mean[1] - reference.mean[1],
        stats.mean[2] - reference.mean[2],
    );
    let q = d.dot(inv * d);
    if !q.is_finite() {
        return Err(MetricsError::SingularStats);
    }
    Ok(q.max(0.0).sqrt())
}

pub fn style_score<T: Real>(video: &VideoTensor<T>, reference: &StyleStats) -> Result<f64, MetricsError> {
    style_score_stats(&StyleStats::of(video), reference)
}

/// Largest displacement searched by [`motion_correlation`], in pixels.
pub const MAX_SHIFT: i32 = 3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MotionCorrelation {
    /// Pearson correlation in `[−1, 1]`; 0 when undefined.
    pub value: f64,
    /// Set when a frame (or the displacement sequence) has no variation.
    pub flat: bool,
    /// Estimated `(dx, dy)` per frame gap.
    pub estimated: Vec<[i32; 2]>,
}

fn gray<T: Real>(v: &VideoTensor<T>, k: usize) -> Vec<f64> {
    v.frame(k).chunks_exact(3).map(|p| (p[0].as_f64() + p[1].as_f64() + p[2].as_f64()) / 3.0).collect()
}

/// NCC of `b(x, y)` against `a(x − dx, y − dy)` over the overlap; `None` if either side is flat.
fn ncc(a: &[f64], b: &[f64], w: usize, h: usize, dx: i32, dy: i32) -> Option<f64> {
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for y in 0..h as i32 {
        for x in 0..w as i32 {
            let (sx, sy) = (x - dx, y - dy);
            if sx < 0 || sy < 0 || sx >= w as i32 || sy >= h as i32 {
                continue;
            }
            xs.push(a[(sy as usize) * w + sx as usize]);
            ys.push(b[(y as usize) * w + x as usize]);
        }
    }
    pearson(&xs, &ys)
}

pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    if x.is_empty() || x.len() != y.len() {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx <= 1e-18 || syy <= 1e-18 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Integer global shift between consecutive frames by normalized cross-correlation
/// over `[−MAX_SHIFT, MAX_SHIFT]²`; ties keep the first shift in scan order.
pub fn estimate_shifts<T: Real>(video: &VideoTensor<T>) -> (Vec<[i32; 2]>, bool) {
    let (w, h) = (video.width, video.height);
    let mut flat = false;
    let mut out = Vec::with_capacity(video.frames.saturating_sub(1));
    let mut prev = gray(video, 0);
    for k in 1..video.frames {
        let cur = gray(video, k);
        let mut best: Option<(f64, [i32; 2])> = None;
        for dy in -MAX_SHIFT..=MAX_SHIFT {
            for dx in -MAX_SHIFT..=MAX_SHIFT {
                if let Some(c) = ncc(&prev, &cur, w, h, dx, dy) {
                    if best.is_none_or(|(b, _)| c > b) {
                        best = Some((c, [dx, dy]));
                    }
                }
            }
        }
        match best {
            Some((_, s)) => out.push(s),
            None => {
                flat = true;
                out.push([0, 0]);
            }
        }
        prev = cur;
    }
    (out, flat)
}

/// Pearson correlation between estimated and target per-gap displacements
/// (`K − 1` entries, all `dx` followed by all `dy`).
pub fn motion_correlation<T: Real>(
    video: &VideoTensor<T>,
    target: &[[f64; 2]],
) -> Result<MotionCorrelation, MetricsError> {
    if video.frames < 3 {
        return Err(MetricsError::DegenerateLength { need: 3, got: video.frames });
    }
    if target.len() != video.frames - 1 {
        return Err(MetricsError::DisplacementCount { expected: video.frames - 1, got: target.len() });
    }
    let (estimated, mut flat) = estimate_shifts(video);
    let est: Vec<f64> =
        estimated.iter().map(|s| f64::from(s[0])).chain(estimated.iter().map(|s| f64::from(s[1]))).collect();
    let tgt: Vec<f64> = target.iter().map(|t| t[0]).chain(target.iter().map(|t| t[1])).collect();
    let value = match pearson(&est, &tgt) {
        Some(v) if !flat => v,
        _ => {
            flat = true;
            0.0
        }
    };
    Ok(MotionCorrelation { value, flat, estimated })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowReport {
    pub flow_loss: f64,
    pub per_frame: Vec<f64>,
}

pub fn flow_report(pred: &VideoTensor, gt: &VideoTensor) -> Result<FlowReport, MetricsError> {
    let flow_loss = flow_loss(pred, gt)?;
    let per_frame = (0..pred.frames - 1).map(|k| flow_gap(pred, gt, k)).collect();
    Ok(FlowReport { flow_loss, per_frame })
}
