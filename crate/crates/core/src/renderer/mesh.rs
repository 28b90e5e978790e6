//! Low-poly primitive meshes with one flat colour per triangle.

use std::collections::HashMap;

use crate::geometry::Vec3;

#[derive(Clone, Debug, PartialEq)]
pub struct Mesh {
    pub vertices: Vec<Vec3>,
    pub triangles: Vec<[u32; 3]>,
    pub colors: Vec<[u8; 3]>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MeshError {
    #[error("triangle {0} references a missing vertex")]
    IndexOutOfRange(usize),
    #[error("triangle {0} has zero area")]
    Degenerate(usize),
    #[error("{colors} colours for {triangles} triangles")]
    ColorCount { colors: usize, triangles: usize },
}

impl Mesh {
    pub fn empty() -> Self {
        Self { vertices: Vec::new(), triangles: Vec::new(), colors: Vec::new() }
    }

    pub fn validate(&self) -> Result<(), MeshError> {
        if self.colors.len() != self.triangles.len() {
            return Err(MeshError::ColorCount { colors: self.colors.len(), triangles: self.triangles.len() });
        }
        let n = self.vertices.len() as u32;
        for (i, t) in self.triangles.iter().enumerate() {
            if t.iter().any(|&j| j >= n) {
                return Err(MeshError::IndexOutOfRange(i));
            }
            if !(self.area(i) > 0.0) {
                return Err(MeshError::Degenerate(i));
            }
        }
        Ok(())
    }

    pub fn area(&self, tri: usize) -> f64 {
        let [a, b, c] = self.corners(tri);
        0.5 * (b - a).cross(c - a).norm()
    }

    pub fn corners(&self, tri: usize) -> [Vec3; 3] {
        let t = self.triangles[tri];
        [self.vertices[t[0] as usize], self.vertices[t[1] as usize], self.vertices[t[2] as usize]]
    }

    pub fn normal(&self, tri: usize) -> Vec3 {
        let [a, b, c] = self.corners(tri);
        (b - a).cross(c - a).normalized().unwrap_or(Vec3::new(0.0, 1.0, 0.0))
    }

    pub fn paint(mut self, rgb: [u8; 3]) -> Self {
        self.colors = vec![rgb; self.triangles.len()];
        self
    }

    /// Scales about the origin, then translates.
    pub fn transformed(mut self, scale: Vec3, offset: Vec3) -> Self {
        for v in &mut self.vertices {
            *v = Vec3::new(v.x * scale.x, v.y * scale.y, v.z * scale.z) + offset;
        }
        self
    }

    pub fn translated(self, offset: Vec3) -> Self {
        self.transformed(Vec3::new(1.0, 1.0, 1.0), offset)
    }

    pub fn append(&mut self, other: &Mesh) {
        let base = self.vertices.len() as u32;
        self.vertices.extend_from_slice(&other.vertices);
        self.triangles.extend(other.triangles.iter().map(|t| [t[0] + base, t[1] + base, t[2] + base]));
        self.colors.extend_from_slice(&other.colors);
    }

    fn from_parts(vertices: Vec<Vec3>, triangles: Vec<[u32; 3]>) -> Self {
        let colors = vec![[255, 255, 255]; triangles.len()];
        Self { vertices, triangles, colors }
    }
}

/// Axis-aligned cube of edge 1 centred at the origin.
pub fn cube() -> Mesh {
    let mut v = Vec::with_capacity(8);
    for i in 0..8 {
        let c = |bit: u32| if i & bit != 0 { 0.5 } else { -0.5 };
        v.push(Vec3::new(c(1), c(2), c(4)));
    }
    // Outward-facing, counter-clockwise seen from outside.
    let faces = [
        [0, 4, 6, 2], // -x
        [1, 3, 7, 5], // +x
        [0, 1, 5, 4], // -y
        [2, 6, 7, 3], // +y
        [0, 2, 3, 1], // -z
        [4, 5, 7, 6], // +z
    ];
    let mut t = Vec::with_capacity(12);
    for f in faces {
        t.push([f[0], f[1], f[2]]);
        t.push([f[0], f[2], f[3]]);
    }
    Mesh::from_parts(v, t)
}

/// Unit-radius octahedron.
pub fn octahedron() -> Mesh {
    let v = vec![
        Vec3::new(1.0, 0.0, 0.0),
        Vec3::new(-1.0, 0.0, 0.0),
        Vec3::new(0.0, 1.0, 0.0),
        Vec3::new(0.0, -1.0, 0.0),
        Vec3::new(0.0, 0.0, 1.0),
        Vec3::new(0.0, 0.0, -1.0),
    ];
    let t = vec![[0, 2, 4], [4, 2, 1], [1, 2, 5], [5, 2, 0], [4, 3, 0], [1, 3, 4], [5, 3, 1], [0, 3, 5]];
    Mesh::from_parts(v, t)
}

/// Unit-radius icosahedron.
pub fn icosahedron() -> Mesh {
    let p = (1.0 + 5f64.sqrt()) / 2.0;
    let raw = [
        (-1.0, p, 0.0),
        (1.0, p, 0.0),
        (-1.0, -p, 0.0),
        (1.0, -p, 0.0),
        (0.0, -1.0, p),
        (0.0, 1.0, p),
        (0.0, -1.0, -p),
        (0.0, 1.0, -p),
        (p, 0.0, -1.0),
        (p, 0.0, 1.0),
        (-p, 0.0, -1.0),
        (-p, 0.0, 1.0),
    ];
    let v = raw.iter().map(|&(x, y, z)| Vec3::new(x, y, z).normalized().unwrap()).collect();
    let t = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    Mesh::from_parts(v, t)
}

/// Unit-radius sphere by `levels` rounds of 4-way subdivision of an icosahedron.
pub fn icosphere(levels: u32) -> Mesh {
    let mut m = icosahedron();
    for _ in 0..levels {
        let mut cache: HashMap<(u32, u32), u32> = HashMap::new();
        let mut tris = Vec::with_capacity(m.triangles.len() * 4);
        let mut mid = |a: u32, b: u32, verts: &mut Vec<Vec3>| -> u32 {
            let key = (a.min(b), a.max(b));
            *cache.entry(key).or_insert_with(|| {
                let p = (verts[a as usize] + verts[b as usize]) * 0.5;
                verts.push(p.normalized().unwrap());
                (verts.len() - 1) as u32
            })
        };
        for t in m.triangles.clone() {
            let ab = mid(t[0], t[1], &mut m.vertices);
            let bc = mid(t[1], t[2], &mut m.vertices);
            let ca = mid(t[2], t[0], &mut m.vertices);
            tris.extend([[t[0], ab, ca], [t[1], bc, ab], [t[2], ca, bc], [ab, bc, ca]]);
        }
        m.triangles = tris;
    }
    m.colors = vec![[255, 255, 255]; m.triangles.len()];
    m
}

/// Closed `sides`-gon prism, radius 1, from `y = 0` to `y = 1`.
pub fn cylinder(sides: u32) -> Mesh {
    let mut v = Vec::new();
    for i in 0..sides {
        let a = std::f64::consts::TAU * f64::from(i) / f64::from(sides);
        v.push(Vec3::new(a.cos(), 0.0, a.sin()));
        v.push(Vec3::new(a.cos(), 1.0, a.sin()));
    }
    let bottom = v.len() as u32;
    v.push(Vec3::new(0.0, 0.0, 0.0));
    v.push(Vec3::new(0.0, 1.0, 0.0));
    let top = bottom + 1;
    let mut t = Vec::new();
    for i in 0..sides {
        let j = (i + 1) % sides;
        let (b0, t0, b1, t1) = (2 * i, 2 * i + 1, 2 * j, 2 * j + 1);
        t.push([b0, t1, b1]);
        t.push([b0, t0, t1]);
        t.push([bottom, b0, b1]);
        t.push([top, t1, t0]);
    }
    Mesh::from_parts(v, t)
}

/// Closed cone, base radius 1 at `y = 0`, apex at `y = 1`.
pub fn cone(sides: u32) -> Mesh {
    let mut v = Vec::new();
    for i in 0..sides {
        let a = std::f64::consts::TAU * f64::from(i) / f64::from(sides);
        v.push(Vec3::new(a.cos(), 0.0, a.sin()));
    }
    let apex = v.len() as u32;
    v.push(Vec3::new(0.0, 1.0, 0.0));
    v.push(Vec3::new(0.0, 0.0, 0.0));
    let base = apex + 1;
    let mut t = Vec::new();
    for i in 0..sides {
        let j = (i + 1) % sides;
        t.push([i, apex, j]);
        t.push([base, i, j]);
    }
    Mesh::from_parts(v, t)
}
