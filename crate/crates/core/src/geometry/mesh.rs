//! Geodesic icosphere triangulations of the unit sphere and OFF text I/O.

use std::collections::HashMap;
use std::fmt::Write as _;

use super::v3::{self, V3};
use crate::{Result, StabError};

/// Largest subdivision level accepted by [`build_icosphere`].
pub const MAX_LEVEL: u32 = 8;

/// Triangulated unit sphere.
///
/// Faces are counterclockwise seen from outside. Edges are stored once with
/// `edges[e][0] < edges[e][1]`; `face_edges[f][k]` is the edge joining
/// `faces[f][k]` to `faces[f][(k + 1) % 3]` and `face_edge_signs[f][k]` is
/// `+1.0` when that traversal agrees with the stored edge orientation.
#[derive(Clone, Debug)]
pub struct TriMesh {
    pub level: u32,
    pub vertices: Vec<V3>,
    pub faces: Vec<[usize; 3]>,
    pub edges: Vec<[usize; 2]>,
    pub face_edges: Vec<[usize; 3]>,
    pub face_edge_signs: Vec<[f64; 3]>,
}

fn icosahedron() -> (Vec<V3>, Vec<[usize; 3]>) {
    let p = (1.0 + 5f64.sqrt()) / 2.0;
    let raw: [V3; 12] = [
        [-1.0, p, 0.0],
        [1.0, p, 0.0],
        [-1.0, -p, 0.0],
        [1.0, -p, 0.0],
        [0.0, -1.0, p],
        [0.0, 1.0, p],
        [0.0, -1.0, -p],
        [0.0, 1.0, -p],
        [p, 0.0, -1.0],
        [p, 0.0, 1.0],
        [-p, 0.0, -1.0],
        [-p, 0.0, 1.0],
    ];
    let faces = vec![
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
    (raw.iter().map(|&v| v3::normalize(v)).collect(), faces)
}

fn subdivide(vertices: &mut Vec<V3>, faces: &[[usize; 3]]) -> Vec<[usize; 3]> {
    let mut mid: HashMap<(usize, usize), usize> = HashMap::with_capacity(faces.len() * 3 / 2);
    let mut midpoint = |a: usize, b: usize, vertices: &mut Vec<V3>| -> usize {
        let key = (a.min(b), a.max(b));
        *mid.entry(key).or_insert_with(|| {
            let m = v3::normalize(v3::add(vertices[a], vertices[b]));
            vertices.push(m);
            vertices.len() - 1
        })
    };
    let mut out = Vec::with_capacity(faces.len() * 4);
    for &[a, b, c] in faces {
        let ab = midpoint(a, b, vertices);
        let bc = midpoint(b, c, vertices);
        let ca = midpoint(c, a, vertices);
        out.push([a, ab, ca]);
        out.push([b, bc, ab]);
        out.push([c, ca, bc]);
        out.push([ab, bc, ca]);
    }
    out
}

/// Builds the level-`level` geodesic icosphere.
pub fn build_icosphere(level: u32) -> Result<TriMesh> {
    if level > MAX_LEVEL {
        return Err(StabError::InvalidArgument(format!(
            "mesh level {level} exceeds maximum {MAX_LEVEL}"
        )));
    }
    let (mut vertices, mut faces) = icosahedron();
    for _ in 0..level {
        faces = subdivide(&mut vertices, &faces);
    }
    TriMesh::from_parts(level, vertices, faces)
}

impl TriMesh {
    /// Builds edge tables for the given vertices and faces. Faces are
    /// reoriented to be counterclockwise from outside.
    pub fn from_parts(level: u32, vertices: Vec<V3>, mut faces: Vec<[usize; 3]>) -> Result<Self> {
        let nv = vertices.len();
        for (fi, f) in faces.iter_mut().enumerate() {
            if f.iter().any(|&i| i >= nv) {
                return Err(StabError::InvalidArgument(format!(
                    "face {fi} references a vertex out of range"
                )));
            }
            let [a, b, c] = *f;
            let n = v3::cross(
                v3::sub(vertices[b], vertices[a]),
                v3::sub(vertices[c], vertices[a]),
            );
            let centroid = v3::add(v3::add(vertices[a], vertices[b]), vertices[c]);
            if v3::dot(n, centroid) < 0.0 {
                f.swap(1, 2);
            }
        }
        let mut edges: Vec<[usize; 2]> = faces
            .iter()
            .flat_map(|f| (0..3).map(move |k| [f[k].min(f[(k + 1) % 3]), f[k].max(f[(k + 1) % 3])]))
            .collect();
        edges.sort_unstable();
        edges.dedup();
        let mut face_edges = Vec::with_capacity(faces.len());
        let mut face_edge_signs = Vec::with_capacity(faces.len());
        for f in &faces {
            let mut fe = [0usize; 3];
            let mut fs = [0.0; 3];
            for k in 0..3 {
                let (a, b) = (f[k], f[(k + 1) % 3]);
                let key = [a.min(b), a.max(b)];
                fe[k] = edges.binary_search(&key).expect("edge table is complete");
                fs[k] = if a < b { 1.0 } else { -1.0 };
            }
            face_edges.push(fe);
            face_edge_signs.push(fs);
        }
        Ok(TriMesh {
            level,
            vertices,
            faces,
            edges,
            face_edges,
            face_edge_signs,
        })
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.num_vertices() as i64 - self.num_edges() as i64 + self.num_faces() as i64
    }

    /// Flat area of face `f`.
    pub fn face_area(&self, f: usize) -> f64 {
        let [a, b, c] = self.faces[f];
        let p = &self.vertices;
        0.5 * v3::norm(v3::cross(v3::sub(p[b], p[a]), v3::sub(p[c], p[a])))
    }

    /// Outward unit normal of the flat face `f`. This is also the point of
    /// the sphere whose tangent plane is parallel to the face.
    pub fn face_normal(&self, f: usize) -> V3 {
        let [a, b, c] = self.faces[f];
        let p = &self.vertices;
        v3::normalize(v3::cross(v3::sub(p[b], p[a]), v3::sub(p[c], p[a])))
    }

    pub fn face_centroid(&self, f: usize) -> V3 {
        let [a, b, c] = self.faces[f];
        let p = &self.vertices;
        v3::scale(1.0 / 3.0, v3::add(v3::add(p[a], p[b]), p[c]))
    }

    pub fn total_area(&self) -> f64 {
        (0..self.num_faces()).map(|f| self.face_area(f)).sum()
    }

    /// Longest edge length.
    pub fn max_edge_length(&self) -> f64 {
        self.edges
            .iter()
            .map(|&[a, b]| v3::norm(v3::sub(self.vertices[a], self.vertices[b])))
            .fold(0.0, f64::max)
    }

    /// Faces incident to each vertex, in increasing face order.
    pub fn vertex_faces(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.num_vertices()];
        for (fi, f) in self.faces.iter().enumerate() {
            for &v in f {
                out[v].push(fi);
            }
        }
        out
    }

    /// Faces on either side of each edge, `[left, right]` where the left face
    /// traverses the edge in its stored direction.
    pub fn edge_faces(&self) -> Vec<[usize; 2]> {
        let mut out = vec![[usize::MAX; 2]; self.num_edges()];
        for f in 0..self.num_faces() {
            for k in 0..3 {
                let e = self.face_edges[f][k];
                let slot = if self.face_edge_signs[f][k] > 0.0 { 0 } else { 1 };
                out[e][slot] = f;
            }
        }
        out
    }

    /// Checks the structural invariants of a closed oriented sphere mesh.
    pub fn validate(&self) -> Result<()> {
        for (i, &p) in self.vertices.iter().enumerate() {
            if (v3::norm(p) - 1.0).abs() > 1e-14 {
                return Err(StabError::InvalidArgument(format!("vertex {i} is off the unit sphere")));
            }
        }
        if self.euler_characteristic() != 2 {
            return Err(StabError::InvalidArgument(format!(
                "Euler characteristic {} != 2",
                self.euler_characteristic()
            )));
        }
        let mut count = vec![[0u32; 2]; self.num_edges()];
        for f in 0..self.num_faces() {
            for k in 0..3 {
                let slot = if self.face_edge_signs[f][k] > 0.0 { 0 } else { 1 };
                count[self.face_edges[f][k]][slot] += 1;
            }
        }
        if let Some(e) = count.iter().position(|c| *c != [1, 1]) {
            return Err(StabError::InvalidArgument(format!(
                "edge {e} is not shared by exactly two consistently oriented faces"
            )));
        }
        Ok(())
    }

    /// OFF text: header, counts line, vertex lines and `3 i j k` face lines.
    pub fn to_off(&self) -> String {
        let mut s = String::with_capacity(64 * (self.num_vertices() + self.num_faces()));
        s.push_str("OFF\n");
        let _ = writeln!(s, "{} {} {}", self.num_vertices(), self.num_faces(), self.num_edges());
        for p in &self.vertices {
            let _ = writeln!(s, "{:?} {:?} {:?}", p[0], p[1], p[2]);
        }
        for f in &self.faces {
            let _ = writeln!(s, "3 {} {} {}", f[0], f[1], f[2]);
        }
        s
    }

    /// Parses OFF text. The level is recovered from the face count when it
    /// matches an icosphere, otherwise it is set to zero.
    pub fn from_off(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let bad = |m: &str| StabError::Parse(format!("OFF: {m}"));
        if lines.next() != Some("OFF") {
            return Err(bad("missing header"));
        }
        let counts: Vec<usize> = lines
            .next()
            .ok_or_else(|| bad("missing counts"))?
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| bad("bad count")))
            .collect::<Result<_>>()?;
        if counts.len() < 2 {
            return Err(bad("counts line needs vertex and face counts"));
        }
        let (nv, nf) = (counts[0], counts[1]);
        let mut vertices = Vec::with_capacity(nv);
        for _ in 0..nv {
            let t: Vec<f64> = lines
                .next()
                .ok_or_else(|| bad("truncated vertices"))?
                .split_whitespace()
                .map(|t| t.parse().map_err(|_| bad("bad coordinate")))
                .collect::<Result<_>>()?;
            if t.len() != 3 {
                return Err(bad("vertex line needs 3 coordinates"));
            }
            vertices.push([t[0], t[1], t[2]]);
        }
        let mut faces = Vec::with_capacity(nf);
        for _ in 0..nf {
            let t: Vec<usize> = lines
                .next()
                .ok_or_else(|| bad("truncated faces"))?
                .split_whitespace()
                .map(|t| t.parse().map_err(|_| bad("bad index")))
                .collect::<Result<_>>()?;
            if t.len() != 4 || t[0] != 3 {
                return Err(bad("only triangles are supported"));
            }
            faces.push([t[1], t[2], t[3]]);
        }
        let level = (0..=MAX_LEVEL).find(|&l| 20usize << (2 * l) == nf).unwrap_or(0);
        TriMesh::from_parts(level, vertices, faces)
    }
}
