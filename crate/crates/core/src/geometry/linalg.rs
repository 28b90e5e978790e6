//! Fixed-size 3D vectors, matrices and unit quaternions.

use std::ops::{Add, AddAssign, Index, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec3<T = f64> {
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T: Real> Vec3<T> {
    pub const fn new(x: T, y: T, z: T) -> Self {
        Self { x, y, z }
    }

    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero(), T::zero())
    }

    pub fn from_array(a: [T; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }

    pub fn to_array(self) -> [T; 3] {
        [self.x, self.y, self.z]
    }

    pub fn dot(self, o: Self) -> T {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Self) -> Self {
        Self::new(self.y * o.z - self.z * o.y, self.z * o.x - self.x * o.z, self.x * o.y - self.y * o.x)
    }

    pub fn norm(self) -> T {
        self.dot(self).sqrt()
    }

    /// Unit vector, or `None` when the norm is zero or not finite.
    pub fn normalized(self) -> Option<Self> {
        let n = self.norm();
        if n > T::zero() && n.is_finite() {
            Some(self * (T::one() / n))
        } else {
            None
        }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn lerp(self, o: Self, s: T) -> Self {
        self + (o - self) * s
    }

    pub fn cast<U: Real>(self) -> Vec3<U> {
        Vec3::new(U::lit(self.x.as_f64()), U::lit(self.y.as_f64()), U::lit(self.z.as_f64()))
    }
}

impl<T: Real> Add for Vec3<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl<T: Real> AddAssign for Vec3<T> {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl<T: Real> Sub for Vec3<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl<T: Real> Neg for Vec3<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y, -self.z)
    }
}

impl<T: Real> Mul<T> for Vec3<T> {
    type Output = Self;
    fn mul(self, s: T) -> Self {
        Self::new(self.x * s, self.y * s, self.z * s)
    }
}

impl<T: Real> Index<usize> for Vec3<T> {
    type Output = T;
    fn index(&self, i: usize) -> &T {
        match i {
            0 => &self.x,
            1 => &self.y,
            2 => &self.z,
            _ => panic!("Vec3 index {i} out of range"),
        }
    }
}

/// Row-major 3x3 matrix.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mat3<T = f64> {
    pub rows: [[T; 3]; 3],
}

impl<T: Real> Mat3<T> {
    pub fn identity() -> Self {
        let (o, z) = (T::one(), T::zero());
        Self { rows: [[o, z, z], [z, o, z], [z, z, o]] }
    }

    pub fn from_rows(r0: Vec3<T>, r1: Vec3<T>, r2: Vec3<T>) -> Self {
        Self { rows: [r0.to_array(), r1.to_array(), r2.to_array()] }
    }

    pub fn from_cols(c0: Vec3<T>, c1: Vec3<T>, c2: Vec3<T>) -> Self {
        Self::from_rows(c0, c1, c2).transpose()
    }

    pub fn from_row_major(v: &[T; 9]) -> Self {
        Self { rows: [[v[0], v[1], v[2]], [v[3], v[4], v[5]], [v[6], v[7], v[8]]] }
    }

    pub fn to_row_major(&self) -> [T; 9] {
        let r = &self.rows;
        [r[0][0], r[0][1], r[0][2], r[1][0], r[1][1], r[1][2], r[2][0], r[2][1], r[2][2]]
    }

    pub fn row(&self, i: usize) -> Vec3<T> {
        Vec3::from_array(self.rows[i])
    }

    pub fn col(&self, j: usize) -> Vec3<T> {
        Vec3::new(self.rows[0][j], self.rows[1][j], self.rows[2][j])
    }

    pub fn transpose(&self) -> Self {
        let mut out = *self;
        for i in 0..3 {
            for j in 0..3 {
                out.rows[i][j] = self.rows[j][i];
            }
        }
        out
    }

    pub fn trace(&self) -> T {
        self.rows[0][0] + self.rows[1][1] + self.rows[2][2]
    }

    pub fn det(&self) -> T {
        self.row(0).dot(self.row(1).cross(self.row(2)))
    }

    /// Inverse via the adjugate; `None` when the determinant is zero or not finite.
    pub fn inverse(&self) -> Option<Self> {
        let det = self.det();
        if det == T::zero() || !det.is_finite() {
            return None;
        }
        let (r0, r1, r2) = (self.row(0), self.row(1), self.row(2));
        // Columns of the inverse are the cross products of row pairs.
        let inv = Self::from_cols(r1.cross(r2), r2.cross(r0), r0.cross(r1));
        let mut rows = inv.rows;
        for row in rows.iter_mut() {
            for v in row.iter_mut() {
                *v = *v / det;
            }
        }
        Some(Self { rows })
    }

    pub fn mul_vec(&self, v: Vec3<T>) -> Vec3<T> {
        Vec3::new(self.row(0).dot(v), self.row(1).dot(v), self.row(2).dot(v))
    }

    /// Rotation by `angle` radians about `axis` (Rodrigues). The axis need not be unit length.
    pub fn from_axis_angle(axis: Vec3<T>, angle: T) -> Self {
        let Some(k) = axis.normalized() else {
            return Self::identity();
        };
        let (s, c) = angle.sin_cos();
        let v = T::one() - c;
        Self {
            rows: [
                [c + k.x * k.x * v, k.x * k.y * v - k.z * s, k.x * k.z * v + k.y * s],
                [k.y * k.x * v + k.z * s, c + k.y * k.y * v, k.y * k.z * v - k.x * s],
                [k.z * k.x * v - k.y * s, k.z * k.y * v + k.x * s, c + k.z * k.z * v],
            ],
        }
    }

    /// Exponential map of a rotation vector (axis scaled by angle).
    pub fn exp(w: Vec3<T>) -> Self {
        let angle = w.norm();
        if angle == T::zero() {
            return Self::identity();
        }
        Self::from_axis_angle(w, angle)
    }

    /// Rotation vector of this rotation; inverse of [`Mat3::exp`] for angles below pi.
    pub fn log(&self) -> Vec3<T> {
        let r = &self.rows;
        let v = Vec3::new(r[2][1] - r[1][2], r[0][2] - r[2][0], r[1][0] - r[0][1]);
        let s = v.norm() * T::half();
        let c = (self.trace() - T::one()) * T::half();
        let angle = s.atan2(c);
        if s < T::lit(1e-12) {
            if c > T::zero() {
                return v * T::half();
            }
            // Angle ~ pi: recover the axis from the symmetric part.
            let q = Quat::from_mat(self);
            let axis = Vec3::new(q.x, q.y, q.z).normalized().unwrap_or(Vec3::new(T::one(), T::zero(), T::zero()));
            return axis * angle;
        }
        v * (angle / (T::two() * s))
    }

    /// Largest absolute entry of `RᵀR − I`.
    pub fn orthonormality_error(&self) -> T {
        let p = self.transpose() * *self;
        let id = Self::identity();
        let mut e = T::zero();
        for i in 0..3 {
            for j in 0..3 {
                e = e.max((p.rows[i][j] - id.rows[i][j]).abs());
            }
        }
        e
    }

    pub fn is_finite(&self) -> bool {
        self.rows.iter().flatten().all(|v| v.is_finite())
    }

    pub fn max_abs_diff(&self, o: &Self) -> T {
        let mut e = T::zero();
        for i in 0..3 {
            for j in 0..3 {
                e = e.max((self.rows[i][j] - o.rows[i][j]).abs());
            }
        }
        e
    }

    pub fn cast<U: Real>(&self) -> Mat3<U> {
        let mut rows = [[U::zero(); 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                rows[i][j] = U::lit(self.rows[i][j].as_f64());
            }
        }
        Mat3 { rows }
    }
}

impl<T: Real> Mul for Mat3<T> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let mut out = [[T::zero(); 3]; 3];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = self.rows[i][0] * o.rows[0][j] + self.rows[i][1] * o.rows[1][j] + self.rows[i][2] * o.rows[2][j];
            }
        }
        Self { rows: out }
    }
}

impl<T: Real> Mul<Vec3<T>> for Mat3<T> {
    type Output = Vec3<T>;
    fn mul(self, v: Vec3<T>) -> Vec3<T> {
        self.mul_vec(v)
    }
}

/// Unit quaternion `w + xi + yj + zk`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quat<T = f64> {
    pub w: T,
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T: Real> Quat<T> {
    pub fn from_mat(m: &Mat3<T>) -> Self {
        let r = &m.rows;
        let tr = m.trace();
        let one = T::one();
        let quarter = T::lit(0.25);
        let q = if tr > T::zero() {
            let s = (tr + one).sqrt() * T::two();
            Self { w: quarter * s, x: (r[2][1] - r[1][2]) / s, y: (r[0][2] - r[2][0]) / s, z: (r[1][0] - r[0][1]) / s }
        } else if r[0][0] > r[1][1] && r[0][0] > r[2][2] {
            let s = (one + r[0][0] - r[1][1] - r[2][2]).sqrt() * T::two();
            Self { w: (r[2][1] - r[1][2]) / s, x: quarter * s, y: (r[0][1] + r[1][0]) / s, z: (r[0][2] + r[2][0]) / s }
        } else if r[1][1] > r[2][2] {
            let s = (one + r[1][1] - r[0][0] - r[2][2]).sqrt() * T::two();
            Self { w: (r[0][2] - r[2][0]) / s, x: (r[0][1] + r[1][0]) / s, y: quarter * s, z: (r[1][2] + r[2][1]) / s }
        } else {
            let s = (one + r[2][2] - r[0][0] - r[1][1]).sqrt() * T::two();
            Self { w: (r[1][0] - r[0][1]) / s, x: (r[0][2] + r[2][0]) / s, y: (r[1][2] + r[2][1]) / s, z: quarter * s }
        };
        q.normalized()
    }

    pub fn to_mat(&self) -> Mat3<T> {
        let Self { w, x, y, z } = *self;
        let one = T::one();
        let two = T::two();
        Mat3 {
            rows: [
                [one - two * (y * y + z * z), two * (x * y - w * z), two * (x * z + w * y)],
                [two * (x * y + w * z), one - two * (x * x + z * z), two * (y * z - w * x)],
                [two * (x * z - w * y), two * (y * z + w * x), one - two * (x * x + y * y)],
            ],
        }
    }

    pub fn dot(&self, o: &Self) -> T {
        self.w * o.w + self.x * o.x + self.y * o.y + self.z * o.z
    }

    fn scale(&self, s: T) -> Self {
        Self { w: self.w * s, x: self.x * s, y: self.y * s, z: self.z * s }
    }

    fn add(&self, o: &Self) -> Self {
        Self { w: self.w + o.w, x: self.x + o.x, y: self.y + o.y, z: self.z + o.z }
    }

    pub fn normalized(&self) -> Self {
        let n = self.dot(self).sqrt();
        self.scale(T::one() / n)
    }

    /// Sign-canonical representative: non-negative scalar part, and for a zero
    /// scalar part the first non-zero vector component is positive.
    pub fn canonical(&self) -> Self {
        let flip = if self.w != T::zero() {
            self.w < T::zero()
        } else if self.x != T::zero() {
            self.x < T::zero()
        } else if self.y != T::zero() {
            self.y < T::zero()
        } else {
            self.z < T::zero()
        };
        if flip {
            self.scale(-T::one())
        } else {
            *self
        }
    }

    /// Shortest-arc spherical interpolation between canonicalized endpoints.
    /// For antipodal rotations (dot exactly zero) no hemisphere flip happens,
    /// so the path is fixed by both endpoints having a non-negative scalar part.
    pub fn slerp(&self, other: &Self, s: T) -> Self {
        let a = self.canonical();
        let mut b = other.canonical();
        let mut d = a.dot(&b);
        if d < T::zero() {
            b = b.scale(-T::one());
            d = -d;
        }
        if d > T::lit(1.0 - 1e-12) {
            return a.scale(T::one() - s).add(&b.scale(s)).normalized();
        }
        let theta = d.min(T::one()).acos();
        let sin_t = theta.sin();
        let wa = ((T::one() - s) * theta).sin() / sin_t;
        let wb = (s * theta).sin() / sin_t;
        a.scale(wa).add(&b.scale(wb)).normalized()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_matches_identity() {
        let m = Mat3::from_row_major(&[2.0f64, 0.5, -1.0, 0.3, 3.0, 0.2, -0.7, 0.1, 1.5]);
        let p = m * m.inverse().unwrap();
        assert!(p.max_abs_diff(&Mat3::identity()) < 1e-14);
        assert!(Mat3::from_row_major(&[1.0f64, 2.0, 3.0, 2.0, 4.0, 6.0, 0.0, 1.0, 0.0]).inverse().is_none());
    }

    #[test]
    fn axis_angle_round_trip() {
        let w = Vec3::new(0.3f64, -0.2, 0.9);
        let r = Mat3::exp(w);
        let back = r.log();
        assert!((back - w).norm() < 1e-12);
        assert!(r.orthonormality_error() < 1e-14);
        assert!((r.det() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn quaternion_round_trip() {
        for w in [Vec3::new(0.1f64, 0.2, 0.3), Vec3::new(3.0, 0.1, 0.0), Vec3::new(0.0, -3.1, 0.2)] {
            let r = Mat3::exp(w);
            let q = Quat::from_mat(&r);
            assert!(q.to_mat().max_abs_diff(&r) < 1e-12);
        }
    }

    #[test]
    fn log_near_pi() {
        let axis = Vec3::new(0.0f64, 1.0, 0.0);
        let r = Mat3::from_axis_angle(axis, std::f64::consts::PI);
        let w = r.log();
        assert!((w.norm() - std::f64::consts::PI).abs() < 1e-9);
        assert!(Mat3::exp(w).max_abs_diff(&r) < 1e-9);
    }

    #[test]
    fn generic_over_f32() {
        let r = Mat3::<f32>::from_axis_angle(Vec3::new(0.0, 0.0, 1.0), 0.5);
        assert!(r.orthonormality_error() < 1e-6);
    }
}
