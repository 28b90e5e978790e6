//! Rigid camera math, pinhole projection and per-pixel Plücker rays.
//!
//! Conventions used everywhere in the crate:
//!
//! * Poses are world→camera: `x_cam = R·x_world + t`.
//! * The world is right-handed with `+y` up. The camera body frame is
//!   `x` right, `y` up, and the camera looks down `−z` (identity rotation looks
//!   along world `−z`).
//! * Projection works in the optical frame `(x, −y, −z)` of the body frame, so
//!   depth is positive in front of the camera and image rows grow downwards:
//!   `u = cx + f·x/z`, `v = cy + f·y/z` with `(x, y, z)` optical coordinates.
//! * Plücker rays are sampled at pixel centres `(u + 0.5, v + 0.5)` and stored
//!   as `(d, m)` with `m = o × d`.

pub mod linalg;
pub mod record;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use linalg::{Mat3, Quat, Vec3};

use crate::scalar::Real;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("degenerate camera frame: {0}")]
    DegenerateFrame(&'static str),
    #[error("point is behind the camera (depth {depth})")]
    BehindCamera { depth: f64 },
    #[error("matrix is not a rotation (orthonormality error {error:e}, det {det})")]
    NotARotation { error: f64, det: f64 },
    #[error("interpolation parameter {0} outside [0, 1]")]
    OutOfRange(f64),
    #[error("invalid intrinsics: {0}")]
    InvalidIntrinsics(String),
    #[error("non-finite pose entries")]
    NonFinite,
}

/// Orthonormality tolerance for the scalar type: 1e-9 for `f64`.
pub fn rotation_tolerance<T: Real>() -> T {
    T::lit(1e-9).max(T::epsilon() * T::lit(100.0))
}

/// Checks `‖RᵀR − I‖∞` and `det R = +1`.
pub fn check_rotation<T: Real>(r: &Mat3<T>) -> Result<(), GeometryError> {
    if !r.is_finite() {
        return Err(GeometryError::NonFinite);
    }
    let error = r.orthonormality_error();
    let det = r.det();
    let tol = rotation_tolerance::<T>();
    if error >= tol || (det - T::one()).abs() >= tol * T::lit(10.0) {
        return Err(GeometryError::NotARotation { error: error.as_f64(), det: det.as_f64() });
    }
    Ok(())
}

/// World→camera rigid transform.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct CameraPose<T = f64> {
    pub rotation: Mat3<T>,
    pub translation: Vec3<T>,
}

impl<T: Real> CameraPose<T> {
    pub fn new(rotation: Mat3<T>, translation: Vec3<T>) -> Result<Self, GeometryError> {
        check_rotation(&rotation)?;
        if !translation.is_finite() {
            return Err(GeometryError::NonFinite);
        }
        Ok(Self { rotation, translation })
    }

    pub fn identity() -> Self {
        Self { rotation: Mat3::identity(), translation: Vec3::zero() }
    }

    /// Pose from a world→camera rotation and the camera centre in world coordinates.
    pub fn from_center(rotation: Mat3<T>, center: Vec3<T>) -> Self {
        Self { rotation, translation: -(rotation * center) }
    }

    /// Camera centre `o = −Rᵀ t`.
    pub fn center(&self) -> Vec3<T> {
        -(self.rotation.transpose() * self.translation)
    }

    /// World-frame forward (viewing) axis.
    pub fn forward(&self) -> Vec3<T> {
        -self.rotation.row(2)
    }

    pub fn right(&self) -> Vec3<T> {
        self.rotation.row(0)
    }

    pub fn up(&self) -> Vec3<T> {
        self.rotation.row(1)
    }

    /// World point to camera body frame.
    pub fn to_camera(&self, p: Vec3<T>) -> Vec3<T> {
        self.rotation * p + self.translation
    }

    /// Camera body-frame direction to world frame.
    pub fn dir_to_world(&self, d: Vec3<T>) -> Vec3<T> {
        self.rotation.transpose() * d
    }

    /// Applies a relative transform: returns `rel ∘ self`.
    pub fn then(&self, rel: &CameraPose<T>) -> CameraPose<T> {
        CameraPose {
            rotation: rel.rotation * self.rotation,
            translation: rel.rotation * self.translation + rel.translation,
        }
    }

    /// Rotates the camera about its own centre by `body` (body-frame rotation,
    /// applied on the left of the world→camera rotation).
    pub fn rotated_in_place(&self, body: &Mat3<T>) -> CameraPose<T> {
        CameraPose { rotation: *body * self.rotation, translation: *body * self.translation }
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        check_rotation(&self.rotation)?;
        if !self.translation.is_finite() {
            return Err(GeometryError::NonFinite);
        }
        Ok(())
    }

    pub fn cast<U: Real>(&self) -> CameraPose<U> {
        CameraPose { rotation: self.rotation.cast(), translation: self.translation.cast() }
    }
}

/// Pinhole intrinsics in pixels.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Intrinsics<T = f64> {
    pub focal_px: T,
    pub cx: T,
    pub cy: T,
    pub width: u32,
    pub height: u32,
}

impl<T: Real> Intrinsics<T> {
    pub fn new(focal_px: T, cx: T, cy: T, width: u32, height: u32) -> Result<Self, GeometryError> {
        let intr = Self { focal_px, cx, cy, width, height };
        intr.validate()?;
        Ok(intr)
    }

    /// Centred principal point with the given horizontal field of view (degrees).
    pub fn from_hfov(width: u32, height: u32, hfov_deg: T) -> Result<Self, GeometryError> {
        let w = T::lit(f64::from(width));
        let h = T::lit(f64::from(height));
        let f = w * T::half() / (hfov_deg.to_radians() * T::half()).tan();
        Self::new(f, w * T::half(), h * T::half(), width, height)
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        if self.width == 0 || self.height == 0 {
            return Err(GeometryError::InvalidIntrinsics("zero image size".into()));
        }
        if !(self.focal_px > T::zero()) || !self.focal_px.is_finite() {
            return Err(GeometryError::InvalidIntrinsics(format!("focal {}", self.focal_px)));
        }
        let w = T::lit(f64::from(self.width));
        let h = T::lit(f64::from(self.height));
        if !(self.cx >= T::zero() && self.cx < w && self.cy >= T::zero() && self.cy < h) {
            return Err(GeometryError::InvalidIntrinsics(format!(
                "principal point ({}, {}) outside {}x{}",
                self.cx, self.cy, self.width, self.height
            )));
        }
        Ok(())
    }

    /// Same image geometry with a different focal length.
    pub fn with_focal(&self, focal_px: T) -> Self {
        Self { focal_px, ..*self }
    }

    /// Body-frame (not unit) ray direction through image point `(u, v)`.
    pub fn ray_body(&self, u: T, v: T) -> Vec3<T> {
        let x = (u - self.cx) / self.focal_px;
        let y = (v - self.cy) / self.focal_px;
        Vec3::new(x, -y, -T::one())
    }
}

/// Returns the pose whose forward axis points from `eye` to `target`.
pub fn look_at<T: Real>(eye: Vec3<T>, target: Vec3<T>, up: Vec3<T>) -> Result<CameraPose<T>, GeometryError> {
    let fwd = (target - eye).normalized().ok_or(GeometryError::DegenerateFrame("eye equals target"))?;
    let up_n = up.normalized().ok_or(GeometryError::DegenerateFrame("zero up vector"))?;
    let side = fwd.cross(up_n);
    if side.norm() < T::lit(1e-9) {
        return Err(GeometryError::DegenerateFrame("up is parallel to the view direction"));
    }
    let right = side.normalized().ok_or(GeometryError::DegenerateFrame("up is parallel to the view direction"))?;
    let true_up = right.cross(fwd);
    // World→camera rotation has the body axes as rows.
    let rotation = Mat3::from_rows(right, true_up, -fwd);
    Ok(CameraPose::from_center(rotation, eye))
}

/// Transform taking camera frame `a` to camera frame `b`, so `a.then(&rel) == b`.
pub fn relative_pose<T: Real>(a: &CameraPose<T>, b: &CameraPose<T>) -> CameraPose<T> {
    let rotation = b.rotation * a.rotation.transpose();
    let translation = b.translation - rotation * a.translation;
    CameraPose { rotation, translation }
}

/// Projects a world point to pixel coordinates.
pub fn project<T: Real>(intr: &Intrinsics<T>, pose: &CameraPose<T>, point: Vec3<T>) -> Result<(T, T), GeometryError> {
    let c = pose.to_camera(point);
    let (x, y, z) = (c.x, -c.y, -c.z);
    if z <= T::zero() {
        return Err(GeometryError::BehindCamera { depth: z.as_f64() });
    }
    Ok((intr.cx + intr.focal_px * x / z, intr.cy + intr.focal_px * y / z))
}

/// Per-pixel Plücker coordinates of the viewing rays, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct PluckerImage<T = f64> {
    pub width: u32,
    pub height: u32,
    /// `[dx, dy, dz, mx, my, mz]` per pixel.
    pub data: Vec<[T; 6]>,
}

impl<T: Real> PluckerImage<T> {
    pub fn at(&self, u: u32, v: u32) -> (Vec3<T>, Vec3<T>) {
        let p = self.data[(v * self.width + u) as usize];
        (Vec3::new(p[0], p[1], p[2]), Vec3::new(p[3], p[4], p[5]))
    }

    /// Largest `|m·d|` over all pixels.
    pub fn max_incidence(&self) -> T {
        self.data.iter().map(|p| (p[0] * p[3] + p[1] * p[4] + p[2] * p[5]).abs()).fold(T::zero(), T::max)
    }
}

/// Plücker ray `(d, m)` through image point `(u, v)`.
pub fn plucker_ray<T: Real>(intr: &Intrinsics<T>, pose: &CameraPose<T>, u: T, v: T) -> (Vec3<T>, Vec3<T>) {
    let body = intr.ray_body(u, v);
    let d = pose.dir_to_world(body).normalized().expect("pinhole rays have non-zero length");
    let o = pose.center();
    (d, o.cross(d))
}

pub fn plucker_map<T: Real>(intr: &Intrinsics<T>, pose: &CameraPose<T>) -> PluckerImage<T> {
    let mut data = Vec::with_capacity((intr.width * intr.height) as usize);
    for v in 0..intr.height {
        for u in 0..intr.width {
            let uc = T::lit(f64::from(u)) + T::half();
            let vc = T::lit(f64::from(v)) + T::half();
            let (d, m) = plucker_ray(intr, pose, uc, vc);
            data.push([d.x, d.y, d.z, m.x, m.y, m.z]);
        }
    }
    PluckerImage { width: intr.width, height: intr.height, data }
}

/// Geodesic angle between two rotations, in radians within `[0, π]`.
///
/// Evaluated as `atan2(‖vee(M − Mᵀ)‖/2, (tr M − 1)/2)` with `M = Ra·Rbᵀ`, which
/// equals `arccos(clamp((tr M − 1)/2))` for rotations but keeps full precision
/// near 0 and π.
pub fn rotation_angle<T: Real>(ra: &Mat3<T>, rb: &Mat3<T>) -> Result<T, GeometryError> {
    check_rotation(ra)?;
    check_rotation(rb)?;
    Ok(rotation_angle_unchecked(ra, rb))
}

pub(crate) fn rotation_angle_unchecked<T: Real>(ra: &Mat3<T>, rb: &Mat3<T>) -> T {
    let m = *ra * rb.transpose();
    let r = &m.rows;
    let v = Vec3::new(r[2][1] - r[1][2], r[0][2] - r[2][0], r[1][0] - r[0][1]);
    let s = v.norm() * T::half();
    let c = ((m.trace() - T::one()) * T::half()).max(-T::one()).min(T::one());
    s.atan2(c)
}

/// Interpolates rotation by slerp and camera centre linearly.
///
/// Antipodal rotations are resolved by canonicalizing both quaternions to a
/// non-negative scalar part before the shortest-arc test, see [`Quat::slerp`].
pub fn interpolate_pose<T: Real>(a: &CameraPose<T>, b: &CameraPose<T>, s: T) -> Result<CameraPose<T>, GeometryError> {
    if !(s >= T::zero() && s <= T::one()) {
        return Err(GeometryError::OutOfRange(s.as_f64()));
    }
    if s == T::zero() {
        return Ok(*a);
    }
    if s == T::one() || a == b {
        return Ok(*b);
    }
    let qa = Quat::from_mat(&a.rotation);
    let qb = Quat::from_mat(&b.rotation);
    let rotation = qa.slerp(&qb, s).to_mat();
    let center = a.center().lerp(b.center(), s);
    Ok(CameraPose::from_center(rotation, center))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn v(x: f64, y: f64, z: f64) -> Vec3 {
        Vec3::new(x, y, z)
    }

    fn yaw(deg: f64) -> Mat3 {
        Mat3::from_axis_angle(v(0.0, 1.0, 0.0), deg.to_radians())
    }

    #[test]
    fn look_at_rest_convention_is_identity() {
        let p = look_at(v(0.0, 0.0, 0.0), v(0.0, 0.0, -1.0), v(0.0, 1.0, 0.0)).unwrap();
        assert_eq!(p.rotation, Mat3::identity());
        assert_eq!(p.translation.norm(), 0.0);
    }

    #[test]
    fn look_at_forward_matches_direction() {
        let eye = v(0.0, 2.0, 5.0);
        let p = look_at(eye, v(0.0, 0.0, 0.0), v(0.0, 1.0, 0.0)).unwrap();
        let expected = v(0.0, -2.0, -5.0).normalized().unwrap();
        // R maps the world direction onto the body forward axis (0, 0, -1).
        let body = p.rotation * expected;
        assert!((body - v(0.0, 0.0, -1.0)).norm() < 1e-12);
        assert!((p.forward() - expected).norm() < 1e-12);
        assert!(p.rotation.orthonormality_error() < 1e-12);
        assert!((p.center() - eye).norm() < 1e-12);
    }

    #[test]
    fn look_at_degenerate() {
        let e = look_at(v(0.0, 0.0, 0.0), v(0.0, 0.0, -1.0), v(0.0, 0.0, -1.0));
        assert!(matches!(e, Err(GeometryError::DegenerateFrame(_))));
        let e = look_at(v(1.0, 1.0, 1.0), v(1.0, 1.0, 1.0), v(0.0, 1.0, 0.0));
        assert!(matches!(e, Err(GeometryError::DegenerateFrame(_))));
    }

    #[test]
    fn relative_pose_examples() {
        let a = look_at(v(1.0, 2.0, 3.0), v(0.0, 0.0, 0.0), v(0.0, 1.0, 0.0)).unwrap();
        let rel = relative_pose(&a, &a);
        assert!(rel.rotation.max_abs_diff(&Mat3::identity()) < 1e-15);
        assert!(rel.translation.norm() < 1e-15);

        let b = CameraPose::new(Mat3::identity(), v(0.0, 0.0, -1.0)).unwrap();
        let rel = relative_pose(&CameraPose::identity(), &b);
        assert_eq!(rel.rotation, Mat3::identity());
        assert_eq!(rel.translation, v(0.0, 0.0, -1.0));
    }

    #[test]
    fn project_examples() {
        let intr = Intrinsics::new(100.0, 32.0, 32.0, 64, 64).unwrap();
        let id = CameraPose::identity();
        for depth in [0.5, 3.0, 40.0] {
            assert_eq!(project(&intr, &id, v(0.0, 0.0, -depth)).unwrap(), (32.0, 32.0));
        }
        // Optical-frame point (1, 0, 2) is body-frame (1, 0, -2).
        assert_eq!(project(&intr, &id, v(1.0, 0.0, -2.0)).unwrap(), (82.0, 32.0));
        assert!(matches!(project(&intr, &id, v(1.0, 0.0, 0.0)), Err(GeometryError::BehindCamera { .. })));
    }

    #[test]
    fn plucker_principal_point_identity() {
        let intr = Intrinsics::new(10.0, 3.5, 2.5, 8, 6).unwrap();
        let map = plucker_map(&intr, &CameraPose::identity());
        let (d, m) = map.at(3, 2);
        assert!((d - v(0.0, 0.0, -1.0)).norm() < 1e-15);
        assert_eq!(m.norm(), 0.0);
    }

    #[test]
    fn plucker_moment_cross_product() {
        // Camera at o = (1, 0, 0) looking down world +z.
        let pose = look_at(v(1.0, 0.0, 0.0), v(1.0, 0.0, 5.0), v(0.0, 1.0, 0.0)).unwrap();
        let intr = Intrinsics::new(10.0, 3.5, 2.5, 8, 6).unwrap();
        let (d, m) = plucker_map(&intr, &pose).at(3, 2);
        assert!((d - v(0.0, 0.0, 1.0)).norm() < 1e-12);
        assert!((m - v(0.0, -1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn rotation_angle_examples() {
        let r = yaw(33.0);
        assert_eq!(rotation_angle(&r, &r).unwrap(), 0.0);
        let a = rotation_angle(&Mat3::identity(), &yaw(90.0)).unwrap();
        assert!((a - FRAC_PI_2).abs() < 1e-12);
        let base = Mat3::exp(v(0.4, -1.1, 0.7));
        let composed = base * Mat3::from_axis_angle(v(1.0, 2.0, -0.5), 0.3);
        assert!((rotation_angle(&base, &composed).unwrap() - 0.3).abs() < 1e-9);
        let mut bad = Mat3::identity();
        bad.rows[0][0] = 1.1;
        assert!(matches!(rotation_angle(&bad, &Mat3::identity()), Err(GeometryError::NotARotation { .. })));
    }

    #[test]
    fn interpolate_examples() {
        let a = look_at(v(0.0, 1.0, 4.0), v(0.0, 0.0, 0.0), v(0.0, 1.0, 0.0)).unwrap();
        let b = look_at(v(3.0, 1.0, 0.0), v(0.0, 0.0, 0.0), v(0.0, 1.0, 0.0)).unwrap();
        assert_eq!(interpolate_pose(&a, &b, 0.0).unwrap(), a);
        assert_eq!(interpolate_pose(&a, &b, 1.0).unwrap(), b);
        assert!(matches!(interpolate_pose(&a, &b, 1.5), Err(GeometryError::OutOfRange(_))));

        let id = CameraPose::identity();
        let y90 = CameraPose::new(yaw(90.0), Vec3::zero()).unwrap();
        let mid = interpolate_pose(&id, &y90, 0.5).unwrap();
        assert!(mid.rotation.max_abs_diff(&yaw(45.0)) < 1e-12);
        assert!((rotation_angle(&mid.rotation, &Mat3::identity()).unwrap() - FRAC_PI_4).abs() < 1e-12);
    }

    #[test]
    fn interpolate_antipodal_is_deterministic() {
        let id = CameraPose::identity();
        let flip = CameraPose::new(yaw(180.0), Vec3::zero()).unwrap();
        let m1 = interpolate_pose(&id, &flip, 0.5).unwrap();
        let m2 = interpolate_pose(&id, &flip, 0.5).unwrap();
        assert_eq!(m1, m2);
        let angle = rotation_angle(&m1.rotation, &Mat3::identity()).unwrap();
        assert!((angle - PI / 2.0).abs() < 1e-9);
        // Canonical (w >= 0) endpoints: the half-way rotation is +90° yaw.
        assert!(m1.rotation.max_abs_diff(&yaw(90.0)) < 1e-9);
    }

    fn arb_rotation() -> impl Strategy<Value = Mat3> {
        (-3.0..3.0f64, -3.0..3.0f64, -3.0..3.0f64).prop_map(|(a, b, c)| Mat3::exp(v(a, b, c)))
    }

    fn arb_pose() -> impl Strategy<Value = CameraPose> {
        (arb_rotation(), -10.0..10.0f64, -10.0..10.0f64, -10.0..10.0f64)
            .prop_map(|(r, x, y, z)| CameraPose::new(r, v(x, y, z)).unwrap())
    }

    proptest! {
        #[test]
        fn relative_pose_reproduces_target(a in arb_pose(), b in arb_pose()) {
            let rel = relative_pose(&a, &b);
            let back = a.then(&rel);
            prop_assert!(back.rotation.max_abs_diff(&b.rotation) < 1e-12);
            prop_assert!((back.translation - b.translation).norm() < 1e-12);
            prop_assert!(rel.validate().is_ok());
        }

        #[test]
        fn rotation_angle_symmetric(a in arb_rotation(), b in arb_rotation()) {
            let ab = rotation_angle(&a, &b).unwrap();
            let ba = rotation_angle(&b, &a).unwrap();
            prop_assert!((ab - ba).abs() < 1e-12);
            prop_assert!((0.0..=PI).contains(&ab));
        }

        #[test]
        fn plucker_invariants(pose in arb_pose()) {
            let intr = Intrinsics::new(7.0, 4.2, 2.9, 9, 6).unwrap();
            let map = plucker_map(&intr, &pose);
            prop_assert!(map.max_incidence() < 1e-9);
            for p in &map.data {
                let n = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
                prop_assert!((n - 1.0).abs() < 1e-9);
            }
        }

        #[test]
        fn plucker_line_invariance(pose in arb_pose(), shift in -3.0..3.0f64, u in 0u32..9, vv in 0u32..6) {
            let intr = Intrinsics::new(7.0, 4.2, 2.9, 9, 6).unwrap();
            let (d, m) = plucker_map(&intr, &pose).at(u, vv);
            let moved = CameraPose::from_center(pose.rotation, pose.center() + d * shift);
            let (d2, m2) = plucker_map(&intr, &moved).at(u, vv);
            prop_assert!((d - d2).norm() < 1e-12);
            prop_assert!((m - m2).norm() < 1e-9);
        }

        #[test]
        fn interpolated_poses_are_valid(a in arb_pose(), b in arb_pose(), s in 0.0..1.0f64) {
            let p = interpolate_pose(&a, &b, s).unwrap();
            prop_assert!(p.validate().is_ok());
        }
    }
}
