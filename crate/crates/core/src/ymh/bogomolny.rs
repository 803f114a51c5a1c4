use std::f64::consts::PI;

use num_complex::Complex64;

use super::{ymh_energy, YmhState};
use crate::geometry::v3::{self, V3};
use crate::Result;

/// Per-face reconstruction of the curvature and covariant derivative in an
/// oriented orthonormal frame `e1 x e2 = n` of the face plane.
#[derive(Clone, Debug)]
pub struct FaceFrameData {
    pub area: f64,
    pub normal: V3,
    /// Curvature density `F(e1, e2) = Phi_f / A_f`.
    pub f12: f64,
    /// `Re <D_i u, D_j u>`, averaged over the three transport roots.
    pub du_gram: [[f64; 2]; 2],
    /// `|D_1 u + s i D_2 u|^2` with `s` the sign of the degree branch,
    /// averaged over roots.
    pub holo_defect: f64,
    pub mean_mod2: f64,
    pub mean_potential: f64,
}

/// Face data for every face. `upper` selects the branch `Du - i*Du`.
pub fn face_frame_data(state: &YmhState, upper: bool) -> Vec<FaceFrameData> {
    let disc = state.disc();
    let m = &disc.mesh;
    let fem = &disc.fem;
    let fl = state.bundle.fluxes();
    let e2 = state.epsilon * state.epsilon;
    let sgn = if upper { 1.0 } else { -1.0 };
    (0..m.num_faces())
        .map(|f| {
            let tri = m.faces[f];
            let n = fem.face_normals[f];
            let (e1, e2v) = v3::tangent_frame(n);
            let g = &fem.face_grads[f];
            let mut gram = [[0.0; 2]; 2];
            let mut holo = 0.0;
            for k in 0..3 {
                let kb = (k + 1) % 3;
                let kc = (k + 2) % 3;
                let t_ab = m.face_edge_signs[f][k] * state.bundle.theta[m.face_edges[f][k]];
                let t_ac = -m.face_edge_signs[f][kc] * state.bundle.theta[m.face_edges[f][kc]];
                let mut vals = [Complex64::new(0.0, 0.0); 3];
                vals[k] = state.u[tri[k]];
                vals[kb] = Complex64::from_polar(1.0, -t_ab) * state.u[tri[kb]];
                vals[kc] = Complex64::from_polar(1.0, -t_ac) * state.u[tri[kc]];
                let mut d = [Complex64::new(0.0, 0.0); 2];
                for (l, val) in vals.iter().enumerate() {
                    d[0] += val * v3::dot(g[l], e1);
                    d[1] += val * v3::dot(g[l], e2v);
                }
                for i in 0..2 {
                    for j in 0..2 {
                        gram[i][j] += (d[i].conj() * d[j]).re / 3.0;
                    }
                }
                holo += (d[0] + Complex64::new(0.0, sgn) * d[1]).norm_sqr() / 3.0;
            }
            let mean_mod2 = tri.iter().map(|&v| state.u[v].norm_sqr()).sum::<f64>() / 3.0;
            let mean_potential =
                tri.iter().map(|&v| (1.0 - state.u[v].norm_sqr()).powi(2)).sum::<f64>() / (3.0 * 4.0 * e2);
            FaceFrameData {
                area: fem.face_areas[f],
                normal: n,
                f12: fl[f] / fem.face_areas[f],
                du_gram: gram,
                holo_defect: holo,
                mean_mod2,
                mean_potential,
            }
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct BogomolnyReport {
    /// `E - 2 pi |d|`.
    pub defect: f64,
    /// Per face `(|D_1 u + s i D_2 u|^2, (eps F_12 - s (1 - |u|^2)/(2 eps))^2)`.
    pub face_residuals: Vec<[f64; 2]>,
    pub face_areas: Vec<f64>,
    /// `sum_f A_f (resA + resB)`.
    pub residual_integral: f64,
    pub degree: i64,
}

impl BogomolnyReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("faceIndex,residA,residB,area\n");
        for (f, (r, a)) in self.face_residuals.iter().zip(&self.face_areas).enumerate() {
            s.push_str(&format!("{f},{:.17e},{:.17e},{:.17e}\n", r[0], r[1], a));
        }
        s
    }
}

/// Bogomolny defect and its face-wise reconstruction; the sign branch
/// follows the sign of the degree.
pub fn bogomolny_defect(state: &YmhState) -> Result<BogomolnyReport> {
    let degree = state.degree()?;
    let upper = degree >= 0;
    let s = if upper { 1.0 } else { -1.0 };
    let eps = state.epsilon;
    let data = face_frame_data(state, upper);
    let mut face_residuals = Vec::with_capacity(data.len());
    let mut face_areas = Vec::with_capacity(data.len());
    let mut integral = 0.0;
    for d in &data {
        let ra = d.holo_defect;
        let rb = (eps * d.f12 - s * (1.0 - d.mean_mod2) / (2.0 * eps)).powi(2);
        integral += d.area * (ra + rb);
        face_residuals.push([ra, rb]);
        face_areas.push(d.area);
    }
    Ok(BogomolnyReport {
        defect: ymh_energy(state)? - 2.0 * PI * degree.unsigned_abs() as f64,
        face_residuals,
        face_areas,
        residual_integral: integral,
        degree,
    })
}
