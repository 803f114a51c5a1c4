use nalgebra::{DMatrix, DVector};

use super::{sphere::conformal_jet, ymh_stress_integrand, ConstantCurvature};
use crate::geometry::v3::{self, V3};
use crate::ymh::{face_frame_data, YmhState};
use crate::Result;

/// Face quadrature of the YMH stability integrand along `X_xi` for a
/// lattice state, using the per-face reconstruction of `F` and `Du`.
pub fn sphere_per_xi_stability_integrand(state: &YmhState, xi: V3) -> Result<f64> {
    Ok(lattice_per_xi_integrands(state, &[xi])?[0])
}

/// [`sphere_per_xi_stability_integrand`] for several `xi` sharing one
/// reconstruction.
pub fn lattice_per_xi_integrands(state: &YmhState, xis: &[V3]) -> Result<Vec<f64>> {
    let upper = state.degree()? >= 0;
    let data = face_frame_data(state, upper);
    let eps = state.epsilon;
    let curv = ConstantCurvature { n: 2, k: 1.0 };
    let mut out = vec![0.0; xis.len()];
    for d in &data {
        let (e1, e2) = v3::tangent_frame(d.normal);
        let x = DVector::from_column_slice(&d.normal);
        let frame = [DVector::from_column_slice(&e1), DVector::from_column_slice(&e2)];
        let f = DMatrix::from_row_slice(2, 2, &[0.0, d.f12, -d.f12, 0.0]);
        let gram = DMatrix::from_fn(2, 2, |i, j| d.du_gram[i][j]);
        let s = &f * f.transpose() * (eps * eps) + &gram;
        let e = eps * eps * d.f12 * d.f12 + gram.trace() + d.mean_potential;
        for (o, xi) in out.iter_mut().zip(xis) {
            let jet = conformal_jet(&x, &frame, &DVector::from_column_slice(xi), false);
            *o += d.area * ymh_stress_integrand(&jet, e, &s, &f, eps, &curv);
        }
    }
    Ok(out)
}
