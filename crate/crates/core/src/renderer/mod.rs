//! Deterministic software rasterizer for low-poly scenes.
//!
//! Triangles are clipped against a near plane, rasterized at pixel centres and
//! resolved with a perspective-correct inverse-depth buffer. Shading is flat and
//! two-sided: `ambient + diffuse·|n·L|` for one fixed directional light. Depth
//! ties keep the triangle drawn first, and triangle order is fixed, so output
//! bytes depend only on the inputs.

pub mod io;
pub mod mesh;

use rayon::prelude::*;

use crate::geometry::record::PoseRecord;
use crate::geometry::{CameraPose, Intrinsics, Vec3};
use crate::scene::{FloorTexture, MovingKind, ObjectRef, SceneSpec, StaticKind};
use crate::seed::{mix, unit_f64};
use crate::trajectory::TimedTrajectory;
use crate::video::{Image, VideoTensor};

use mesh::Mesh;

pub const SKY_COLOR: [u8; 3] = [150, 196, 236];
pub const NEAR_PLANE: f64 = 0.05;
pub const AMBIENT: f64 = 0.4;
pub const DIFFUSE: f64 = 0.6;

/// Object ids written to the id buffer.
pub mod ids {
    use crate::scene::ObjectRef;

    pub const SKY: u32 = 0;
    pub const FLOOR: u32 = 1;
    pub const MOUNTAIN: u32 = 2;
    pub const STATIC_BASE: u32 = 100;
    pub const MOVING_BASE: u32 = 1000;

    pub fn of(obj: ObjectRef) -> u32 {
        match obj {
            ObjectRef::Static(i) => STATIC_BASE + i as u32,
            ObjectRef::Moving(i) => MOVING_BASE + i as u32,
        }
    }
}

fn light_dir() -> Vec3 {
    Vec3::new(0.4, 0.8, 0.3).normalized().unwrap()
}

/// One rendered frame: colour, optical depth (`∞` where nothing was hit) and object ids.
#[derive(Clone, Debug, PartialEq)]
pub struct Frame {
    pub image: Image,
    pub depth: Vec<f32>,
    pub ids: Vec<u32>,
}

impl Frame {
    pub fn mask(&self, id: u32) -> Vec<bool> {
        self.ids.iter().map(|&i| i == id).collect()
    }

    pub fn count(&self, id: u32) -> usize {
        self.ids.iter().filter(|&&i| i == id).count()
    }
}

#[derive(Clone, Copy, Debug)]
struct Tri {
    p: [Vec3; 3],
    color: [u8; 3],
    id: u32,
}

fn shade(color: [u8; 3], normal: Vec3) -> [u8; 3] {
    let k = AMBIENT + DIFFUSE * normal.dot(light_dir()).abs();
    color.map(|c| (f64::from(c) * k).round().clamp(0.0, 255.0) as u8)
}

fn push_mesh(out: &mut Vec<Tri>, m: &Mesh, id: u32) {
    for i in 0..m.triangles.len() {
        out.push(Tri { p: m.corners(i), color: shade(m.colors[i], m.normal(i)), id });
    }
}

fn floor_color(floor: FloorTexture, i: i64, j: i64, seed: u64) -> [u8; 3] {
    let base = match floor {
        FloorTexture::BrickStone => {
            if (i + j).rem_euclid(2) == 0 {
                [150, 88, 68]
            } else {
                [128, 122, 115]
            }
        }
        FloorTexture::BlackSand => [48, 44, 42],
        FloorTexture::GreenGrass => [70, 140, 60],
        FloorTexture::BrownGround => [122, 86, 56],
        FloorTexture::YellowGrass => [192, 172, 84],
        FloorTexture::LightGreenGrass => [140, 200, 112],
    };
    let h = mix(seed ^ 0xf100_0000, &[i as u64, j as u64]);
    let jitter = (unit_f64(h) - 0.5) * 24.0;
    base.map(|c| (f64::from(c) + jitter).round().clamp(0.0, 255.0) as u8)
}

fn quad(a: Vec3, b: Vec3, c: Vec3, d: Vec3, color: [u8; 3], id: u32, out: &mut Vec<Tri>) {
    let m = Mesh { vertices: vec![a, b, c, d], triangles: vec![[0, 1, 2], [0, 2, 3]], colors: vec![color; 2] };
    push_mesh(out, &m, id);
}

const FLOOR_CELL: f64 = 2.0;
const SKIRT: f64 = 160.0;

fn floor_tris(scene: &SceneSpec, out: &mut Vec<Tri>) {
    let a = scene.arena_half_extent;
    let n = ((2.0 * a / FLOOR_CELL).round() as i64).max(1);
    let cell = 2.0 * a / n as f64;
    for i in 0..n {
        for j in 0..n {
            let (x0, z0) = (-a + i as f64 * cell, -a + j as f64 * cell);
            let (x1, z1) = (x0 + cell, z0 + cell);
            let c = floor_color(scene.floor, i, j, scene.seed);
            quad(
                Vec3::new(x0, 0.0, z0),
                Vec3::new(x0, 0.0, z1),
                Vec3::new(x1, 0.0, z1),
                Vec3::new(x1, 0.0, z0),
                c,
                ids::FLOOR,
                out,
            );
        }
    }
    // Plain ground out to the horizon so the floor edge never shows sky.
    let base = floor_color(scene.floor, 0, 1, 0).map(|c| (f64::from(c) * 0.85) as u8);
    let s = SKIRT;
    let y = 0.0;
    let p = |x: f64, z: f64| Vec3::new(x, y, z);
    quad(p(-s, -s), p(-s, -a), p(s, -a), p(s, -s), base, ids::FLOOR, out);
    quad(p(-s, a), p(-s, s), p(s, s), p(s, a), base, ids::FLOOR, out);
    quad(p(-s, -a), p(-s, a), p(-a, a), p(-a, -a), base, ids::FLOOR, out);
    quad(p(a, -a), p(a, a), p(s, a), p(s, -a), base, ids::FLOOR, out);
}

fn ridge_ring(seed: u64, radius: f64, lo: f64, hi: f64, color: [u8; 3], out: &mut Vec<Tri>) {
    const SEGMENTS: u64 = 40;
    let height = |i: u64| lo + (hi - lo) * unit_f64(mix(seed, &[radius.to_bits(), i % SEGMENTS]));
    for i in 0..SEGMENTS {
        let a0 = std::f64::consts::TAU * i as f64 / SEGMENTS as f64;
        let a1 = std::f64::consts::TAU * (i + 1) as f64 / SEGMENTS as f64;
        let (h0, h1) = (height(i), height(i + 1));
        let b0 = Vec3::new(radius * a0.cos(), -1.0, radius * a0.sin());
        let b1 = Vec3::new(radius * a1.cos(), -1.0, radius * a1.sin());
        let t0 = Vec3::new(b0.x, h0, b0.z);
        let t1 = Vec3::new(b1.x, h1, b1.z);
        let shade = 0.9 + 0.2 * unit_f64(mix(seed ^ 0xc010, &[i]));
        let c = color.map(|v| (f64::from(v) * shade).round().clamp(0.0, 255.0) as u8);
        quad(b0, t0, t1, b1, c, ids::MOUNTAIN, out);
    }
}

fn static_mesh(kind: StaticKind, s: f64) -> Mesh {
    let v = Vec3::new;
    match kind {
        StaticKind::Tree => {
            let mut m =
                mesh::cylinder(6).transformed(v(0.06 * s, 0.35 * s, 0.06 * s), v(0.0, 0.0, 0.0)).paint([112, 76, 46]);
            m.append(
                &mesh::cone(8).transformed(v(0.3 * s, 0.7 * s, 0.3 * s), v(0.0, 0.3 * s, 0.0)).paint([42, 122, 52]),
            );
            m
        }
        StaticKind::Bush => {
            mesh::icosahedron().transformed(v(0.5 * s, 0.45 * s, 0.5 * s), v(0.0, 0.45 * s, 0.0)).paint([62, 132, 56])
        }
        StaticKind::Grass => {
            let mut m = Mesh::empty();
            for (dx, dz) in [(-0.15, 0.0), (0.15, 0.05), (0.0, -0.15)] {
                m.append(
                    &mesh::cone(4).transformed(v(0.12 * s, s, 0.12 * s), v(dx * s, 0.0, dz * s)).paint([104, 164, 62]),
                );
            }
            m
        }
    }
}

/// Mesh of a moving object with its base point at the origin.
pub fn moving_mesh(kind: MovingKind, s: f64, color: [u8; 3]) -> Mesh {
    let v = Vec3::new;
    let m = match kind {
        MovingKind::Sphere => mesh::icosphere(2).transformed(v(0.5 * s, 0.5 * s, 0.5 * s), v(0.0, 0.5 * s, 0.0)),
        MovingKind::Cube => mesh::cube().transformed(v(s, s, s), v(0.0, 0.5 * s, 0.0)),
        MovingKind::Polygon => mesh::octahedron().transformed(v(0.5 * s, 0.5 * s, 0.5 * s), v(0.0, 0.5 * s, 0.0)),
        MovingKind::Cylinder => mesh::cylinder(8).transformed(v(0.3 * s, s, 0.3 * s), v(0.0, 0.0, 0.0)),
    };
    m.paint(color)
}

/// Pre-built world geometry of a scene; moving objects are placed per frame.
pub struct SceneGeometry<'a> {
    scene: &'a SceneSpec,
    fixed: Vec<Tri>,
    moving: Vec<Mesh>,
}

impl<'a> SceneGeometry<'a> {
    pub fn new(scene: &'a SceneSpec) -> Self {
        let mut fixed = Vec::new();
        if scene.background.has_far() {
            ridge_ring(scene.seed, 140.0, 18.0, 40.0, [118, 134, 160], &mut fixed);
        }
        if scene.background.has_closer() {
            ridge_ring(scene.seed, 70.0, 6.0, 16.0, [96, 120, 88], &mut fixed);
        }
        floor_tris(scene, &mut fixed);
        for (i, o) in scene.static_objects.iter().enumerate() {
            let m = static_mesh(o.kind, o.scale).translated(Vec3::from_array(o.position));
            push_mesh(&mut fixed, &m, ids::of(ObjectRef::Static(i)));
        }
        let moving = scene.moving_objects.iter().map(|o| moving_mesh(o.kind, o.scale, o.color)).collect();
        Self { scene, fixed, moving }
    }

    fn triangles_at(&self, t: f64) -> Vec<Tri> {
        let mut out = self.fixed.clone();
        for (i, (m, o)) in self.moving.iter().zip(&self.scene.moving_objects).enumerate() {
            let placed = m.clone().translated(self.scene.moving_base(o, t));
            push_mesh(&mut out, &placed, ids::of(ObjectRef::Moving(i)));
        }
        out
    }

    pub fn render(&self, pose: &CameraPose, intr: &Intrinsics, t: f64) -> Frame {
        rasterize(&self.triangles_at(t), pose, intr)
    }
}

#[derive(Clone, Copy)]
struct ScreenVertex {
    u: f64,
    v: f64,
    inv_z: f64,
}

fn edge(a: (f64, f64), b: (f64, f64), p: (f64, f64)) -> f64 {
    (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0)
}

struct Target {
    w: usize,
    h: usize,
    inv_z: Vec<f64>,
    color: Vec<[u8; 3]>,
    ids: Vec<u32>,
}

impl Target {
    fn draw(&mut self, s: [ScreenVertex; 3], color: [u8; 3], id: u32) {
        let (p0, p1, p2) = ((s[0].u, s[0].v), (s[1].u, s[1].v), (s[2].u, s[2].v));
        let area = edge(p0, p1, p2);
        if area == 0.0 || !area.is_finite() {
            return;
        }
        let sign = area.signum();
        let min_u = p0.0.min(p1.0).min(p2.0);
        let max_u = p0.0.max(p1.0).max(p2.0);
        let min_v = p0.1.min(p1.1).min(p2.1);
        let max_v = p0.1.max(p1.1).max(p2.1);
        let x0 = (min_u - 0.5).ceil().max(0.0);
        let x1 = (max_u - 0.5).floor().min(self.w as f64 - 1.0);
        let y0 = (min_v - 0.5).ceil().max(0.0);
        let y1 = (max_v - 0.5).floor().min(self.h as f64 - 1.0);
        if x0 > x1 || y0 > y1 {
            return;
        }
        let (x0, x1, y0, y1) = (x0 as usize, x1 as usize, y0 as usize, y1 as usize);
        let inv_area = 1.0 / area;
        for y in y0..=y1 {
            let pv = y as f64 + 0.5;
            for x in x0..=x1 {
                let p = (x as f64 + 0.5, pv);
                let w0 = edge(p1, p2, p) * sign;
                let w1 = edge(p2, p0, p) * sign;
                let w2 = edge(p0, p1, p) * sign;
                if w0 < 0.0 || w1 < 0.0 || w2 < 0.0 {
                    continue;
                }
                let iz = (w0 * s[0].inv_z + w1 * s[1].inv_z + w2 * s[2].inv_z) * inv_area * sign;
                let i = y * self.w + x;
                if iz > self.inv_z[i] {
                    self.inv_z[i] = iz;
                    self.color[i] = color;
                    self.ids[i] = id;
                }
            }
        }
    }
}

/// Clips a triangle (optical-frame coordinates, depth along +z) to `z ≥ NEAR_PLANE`.
fn clip_near(p: [Vec3; 3]) -> Vec<Vec3> {
    let mut out = Vec::with_capacity(4);
    for i in 0..3 {
        let a = p[i];
        let b = p[(i + 1) % 3];
        let ina = a.z >= NEAR_PLANE;
        let inb = b.z >= NEAR_PLANE;
        if ina {
            out.push(a);
        }
        if ina != inb {
            let s = (NEAR_PLANE - a.z) / (b.z - a.z);
            let mut q = a.lerp(b, s);
            q.z = NEAR_PLANE;
            out.push(q);
        }
    }
    out
}

fn rasterize(tris: &[Tri], pose: &CameraPose, intr: &Intrinsics) -> Frame {
    let (w, h) = (intr.width as usize, intr.height as usize);
    let mut target =
        Target { w, h, inv_z: vec![0.0; w * h], color: vec![SKY_COLOR; w * h], ids: vec![ids::SKY; w * h] };
    for tri in tris {
        let optical = tri.p.map(|p| {
            let c = pose.to_camera(p);
            Vec3::new(c.x, -c.y, -c.z)
        });
        if optical.iter().all(|q| q.z < NEAR_PLANE) {
            continue;
        }
        let poly = if optical.iter().all(|q| q.z >= NEAR_PLANE) { optical.to_vec() } else { clip_near(optical) };
        if poly.len() < 3 {
            continue;
        }
        let screen: Vec<ScreenVertex> = poly
            .iter()
            .map(|q| ScreenVertex {
                u: intr.cx + intr.focal_px * q.x / q.z,
                v: intr.cy + intr.focal_px * q.y / q.z,
                inv_z: 1.0 / q.z,
            })
            .collect();
        for k in 1..screen.len() - 1 {
            target.draw([screen[0], screen[k], screen[k + 1]], tri.color, tri.id);
        }
    }
    let mut data = Vec::with_capacity(3 * w * h);
    for c in &target.color {
        data.extend_from_slice(c);
    }
    let depth = target.inv_z.iter().map(|&iz| if iz > 0.0 { (1.0 / iz) as f32 } else { f32::INFINITY }).collect();
    Frame { image: Image { width: intr.width, height: intr.height, data }, depth, ids: target.ids }
}

/// Renders one frame; moving objects are placed at time `frame_index / fps`.
pub fn render_frame(scene: &SceneSpec, pose: &CameraPose, intr: &Intrinsics, frame_index: usize, fps: f64) -> Frame {
    SceneGeometry::new(scene).render(pose, intr, frame_index as f64 / fps)
}

/// Renders every trajectory frame, in parallel, preserving order.
pub fn render_frames(scene: &SceneSpec, traj: &TimedTrajectory) -> Vec<Frame> {
    let geom = SceneGeometry::new(scene);
    traj.frames.par_iter().enumerate().map(|(k, f)| geom.render(&f.pose, &f.intrinsics, traj.time(k))).collect()
}

/// Rendered clip plus the exact pose records of the trajectory.
pub fn render_video(scene: &SceneSpec, traj: &TimedTrajectory) -> (VideoTensor, Vec<PoseRecord>) {
    let frames = render_frames(scene, traj);
    let images: Vec<Image> = frames.into_iter().map(|f| f.image).collect();
    let video = VideoTensor::from_images(&images, traj.fps).expect("trajectory frames share one resolution");
    (video, crate::trajectory::io::records(traj))
}

#[cfg(test)]
mod tests;
