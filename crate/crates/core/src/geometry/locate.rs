//! Point location on the sphere mesh and pullback of vertex fields.

use std::ops::{Add, Mul};

use super::mesh::TriMesh;
use super::v3::{self, V3};
use crate::{Result, StabError};

const INSIDE_TOL: f64 = 1e-14;

/// Walking point locator. Barycentric coordinates are those of the radial
/// projection of the query point onto the flat face.
pub struct PointLocator<'a> {
    mesh: &'a TriMesh,
    vertex_faces: Vec<Vec<usize>>,
    neighbors: Vec<[usize; 3]>,
}

impl<'a> PointLocator<'a> {
    pub fn new(mesh: &'a TriMesh) -> Self {
        let ef = mesh.edge_faces();
        let neighbors = (0..mesh.num_faces())
            .map(|f| {
                let mut out = [0; 3];
                for k in 0..3 {
                    let [l, r] = ef[mesh.face_edges[f][k]];
                    out[k] = if l == f { r } else { l };
                }
                out
            })
            .collect();
        PointLocator { mesh, vertex_faces: mesh.vertex_faces(), neighbors }
    }

    /// Signed volumes `det(a, b, p)` for the three edges of face `f`.
    fn edge_tests(&self, f: usize, p: V3) -> [f64; 3] {
        let [a, b, c] = self.mesh.faces[f];
        let x = &self.mesh.vertices;
        [
            v3::dot(v3::cross(x[a], x[b]), p),
            v3::dot(v3::cross(x[b], x[c]), p),
            v3::dot(v3::cross(x[c], x[a]), p),
        ]
    }

    fn contains(&self, f: usize, p: V3) -> bool {
        v3::dot(self.mesh.face_normal(f), p) > 0.0 && self.edge_tests(f, p).iter().all(|&d| d >= -INSIDE_TOL)
    }

    /// Face containing `p`, walking from `seed`. Among faces that contain `p`
    /// within tolerance the lowest index wins.
    pub fn locate(&self, p: V3, seed: usize) -> Result<usize> {
        let nf = self.mesh.num_faces();
        let mut f = seed.min(nf - 1);
        let mut found = None;
        for _ in 0..nf {
            if self.contains(f, p) {
                found = Some(f);
                break;
            }
            let t = self.edge_tests(f, p);
            let k = (0..3).min_by(|&i, &j| t[i].partial_cmp(&t[j]).unwrap()).unwrap();
            f = self.neighbors[f][k];
        }
        let f = match found {
            Some(f) => f,
            None => (0..nf).find(|&g| self.contains(g, p)).ok_or(StabError::PointLocation(p))?,
        };
        let mut best = f;
        for &v in &self.mesh.faces[f] {
            for &g in &self.vertex_faces[v] {
                if g < best && self.contains(g, p) {
                    best = g;
                }
            }
        }
        Ok(best)
    }

    /// Barycentric weights of `p` in face `f`, summing to one.
    pub fn barycentric(&self, f: usize, p: V3) -> [f64; 3] {
        let [a, b, c] = self.mesh.faces[f];
        let x = &self.mesh.vertices;
        let w = [
            v3::dot(v3::cross(x[b], x[c]), p),
            v3::dot(v3::cross(x[c], x[a]), p),
            v3::dot(v3::cross(x[a], x[b]), p),
        ];
        let s = w[0] + w[1] + w[2];
        [w[0] / s, w[1] / s, w[2] / s]
    }

    /// Seed face for a walk starting near vertex `v`.
    pub fn vertex_seed(&self, v: usize) -> usize {
        self.vertex_faces[v][0]
    }
}

/// `(u o flow)(x_v)` at every vertex by barycentric interpolation on the face
/// containing `flow(x_v)`.
pub fn pullback_field<T>(mesh: &TriMesh, u: &[T], flow: &dyn Fn(V3) -> V3) -> Result<Vec<T>>
where
    T: Copy + Add<Output = T> + Mul<f64, Output = T>,
{
    if u.len() != mesh.num_vertices() {
        return Err(StabError::LengthMismatch { expected: mesh.num_vertices(), got: u.len() });
    }
    let loc = PointLocator::new(mesh);
    let mut out = Vec::with_capacity(u.len());
    for (v, &x) in mesh.vertices.iter().enumerate() {
        let p = flow(x);
        if !p.iter().all(|c| c.is_finite()) {
            return Err(StabError::NonFinite("flow image"));
        }
        let f = loc.locate(p, loc.vertex_seed(v))?;
        let w = loc.barycentric(f, p);
        let [a, b, c] = mesh.faces[f];
        out.push(u[a] * w[0] + u[b] * w[1] + u[c] * w[2]);
    }
    Ok(out)
}
