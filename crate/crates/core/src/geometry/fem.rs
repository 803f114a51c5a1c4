//! Piecewise-linear finite elements on a [`TriMesh`]: cotangent stiffness,
//! consistent and lumped mass, and per-face gradients.

use super::mesh::TriMesh;
use super::v3::{self, V3};
use crate::linalg::CsrMatrix;
use crate::{Result, StabError};

#[derive(Clone, Debug)]
pub struct FemOperators {
    /// Consistent mass matrix.
    pub mass: CsrMatrix,
    /// Lumped (barycentric) mass, one entry per vertex.
    pub lumped: Vec<f64>,
    /// Cotangent stiffness matrix, `u^T K u = int |grad u|^2`.
    pub stiffness: CsrMatrix,
    /// Cotangent weight `w_e = (cot a + cot b) / 2` per edge.
    pub edge_weights: Vec<f64>,
    pub face_areas: Vec<f64>,
    pub face_normals: Vec<V3>,
    /// Gradients of the three hat functions on each face.
    pub face_grads: Vec<[V3; 3]>,
    faces: Vec<[usize; 3]>,
    edges: Vec<[usize; 2]>,
    vertices: Vec<V3>,
}

/// Assembles the finite-element operators of `mesh`.
pub fn assemble_fem(mesh: &TriMesh) -> Result<FemOperators> {
    let nv = mesh.num_vertices();
    let nf = mesh.num_faces();
    let p = &mesh.vertices;
    let mut face_areas = Vec::with_capacity(nf);
    let mut face_normals = Vec::with_capacity(nf);
    let mut face_grads = Vec::with_capacity(nf);
    let mut lumped = vec![0.0; nv];
    let mut edge_weights = vec![0.0; mesh.num_edges()];
    let mut mass_trips = Vec::with_capacity(9 * nf);
    for (fi, f) in mesh.faces.iter().enumerate() {
        let x = [p[f[0]], p[f[1]], p[f[2]]];
        let n2 = v3::cross(v3::sub(x[1], x[0]), v3::sub(x[2], x[0]));
        let twice_area = v3::norm(n2);
        let area = 0.5 * twice_area;
        let scale = v3::dot(v3::sub(x[1], x[0]), v3::sub(x[1], x[0]));
        if !(area > 1e-14 * scale) || !area.is_finite() {
            return Err(StabError::DegenerateTriangle { face: fi, area });
        }
        let n = v3::scale(1.0 / twice_area, n2);
        let mut g = [[0.0; 3]; 3];
        for k in 0..3 {
            let e = v3::sub(x[(k + 2) % 3], x[(k + 1) % 3]);
            g[k] = v3::scale(1.0 / twice_area, v3::cross(n, e));
        }
        for k in 0..3 {
            // Edge k joins local vertices k and k+1; its opposite angle sits
            // at local vertex k+2.
            let o = (k + 2) % 3;
            let a = v3::sub(x[k], x[o]);
            let b = v3::sub(x[(k + 1) % 3], x[o]);
            let cot = v3::dot(a, b) / twice_area;
            edge_weights[mesh.face_edges[fi][k]] += 0.5 * cot;
            lumped[f[k]] += area / 3.0;
        }
        for a in 0..3 {
            for b in 0..3 {
                let v = if a == b { area / 6.0 } else { area / 12.0 };
                mass_trips.push((f[a], f[b], v));
            }
        }
        face_areas.push(area);
        face_normals.push(n);
        face_grads.push(g);
    }
    let mut stiff_trips = Vec::with_capacity(4 * mesh.num_edges());
    for (e, &[i, j]) in mesh.edges.iter().enumerate() {
        let w = edge_weights[e];
        stiff_trips.push((i, i, w));
        stiff_trips.push((j, j, w));
        stiff_trips.push((i, j, -w));
        stiff_trips.push((j, i, -w));
    }
    Ok(FemOperators {
        mass: CsrMatrix::from_triplets(nv, &mass_trips),
        lumped,
        stiffness: CsrMatrix::from_triplets(nv, &stiff_trips),
        edge_weights,
        face_areas,
        face_normals,
        face_grads,
        faces: mesh.faces.clone(),
        edges: mesh.edges.clone(),
        vertices: mesh.vertices.clone(),
    })
}

fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(StabError::LengthMismatch { expected, got });
    }
    Ok(())
}

impl FemOperators {
    pub fn num_vertices(&self) -> usize {
        self.lumped.len()
    }

    pub fn total_area(&self) -> f64 {
        self.face_areas.iter().sum()
    }

    /// `K u` evaluated edge by edge as `sum_e w_e (u_i - u_j)`, which is
    /// exactly zero on constant vectors.
    pub fn stiffness_apply(&self, u: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; u.len()];
        for (e, &[i, j]) in self.edges.iter().enumerate() {
            let d = self.edge_weights[e] * (u[i] - u[j]);
            y[i] += d;
            y[j] -= d;
        }
        y
    }

    /// `int |grad u|^2 = sum_e w_e (u_i - u_j)^2`.
    pub fn dirichlet(&self, u: &[f64]) -> f64 {
        self.edges
            .iter()
            .zip(&self.edge_weights)
            .map(|(&[i, j], w)| w * (u[i] - u[j]).powi(2))
            .sum()
    }

    /// Gradient of the piecewise-linear interpolant on face `f`.
    #[inline]
    pub fn face_gradient(&self, f: usize, u: &[f64]) -> V3 {
        let g = &self.face_grads[f];
        let [a, b, c] = self.faces[f];
        v3::add(v3::add(v3::scale(u[a], g[0]), v3::scale(u[b], g[1])), v3::scale(u[c], g[2]))
    }

    /// Per-face gradient vectors, each lying in its face plane.
    pub fn gradient_field(&self, u: &[f64]) -> Result<Vec<V3>> {
        check_len(self.num_vertices(), u.len())?;
        Ok((0..self.faces.len()).map(|f| self.face_gradient(f, u)).collect())
    }

    /// Area-weighted average of the incident face gradients, projected onto
    /// the tangent plane at each vertex.
    pub fn vertex_gradient(&self, u: &[f64]) -> Result<Vec<V3>> {
        let fg = self.gradient_field(u)?;
        let nv = self.num_vertices();
        let mut acc = vec![[0.0; 3]; nv];
        let mut wsum = vec![0.0; nv];
        for (f, tri) in self.faces.iter().enumerate() {
            let a = self.face_areas[f];
            for &v in tri {
                acc[v] = v3::add(acc[v], v3::scale(a, fg[f]));
                wsum[v] += a;
            }
        }
        Ok(acc
            .into_iter()
            .zip(wsum)
            .zip(&self.vertices)
            .map(|((g, w), &x)| v3::project_tangent(x, v3::scale(1.0 / w, g)))
            .collect())
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    pub fn vertices(&self) -> &[V3] {
        &self.vertices
    }
}

/// A mesh together with its finite-element operators.
#[derive(Clone, Debug)]
pub struct Discretization {
    pub mesh: TriMesh,
    pub fem: FemOperators,
}

impl Discretization {
    pub fn new(mesh: TriMesh) -> Result<Self> {
        let fem = assemble_fem(&mesh)?;
        Ok(Discretization { mesh, fem })
    }

    pub fn icosphere(level: u32) -> Result<Self> {
        Self::new(super::mesh::build_icosphere(level)?)
    }
}
