use std::f64::consts::PI;
use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;

use super::checks::{flow_differences, gauge_errors, gl_fd_errors, random_section, ymh_fd_errors};
use super::config::ExperimentConfig;
use super::report::{write_report, Metric, ReportDoc};
use crate::geometry::{conformal_field_jet, Discretization};
use crate::gl::{
    gl_energy, gl_instability_certificate, gl_morse_index, gl_solve, gl_spectrum, inner_outer_gap, CertificateSource,
    GlParams, GlState, SolveLog,
};
use crate::io::{csv_table, write_atomic, GlSnapshot, YmhSnapshot};
use crate::linalg::{shift_invert_eigs, EigOptions};
use crate::pointlab::{
    cpn_eigenfunction_hessian, cpn_frame_build, cpn_lemma_prelim_check, cpn_trace_check, lattice_per_xi_integrands,
    sphere_gl_trace, sphere_ymh_trace, TraceReport,
};
use crate::pointlab::cpn::cpn_trace_check_with;
use crate::pointlab::sphere::sphere_ymh_trace_with;
use crate::ymh::{
    bogomolny_defect, bundle_init, gradient_norm, hessian_norm_estimate, trivial_pair, trivial_pair_quotient,
    ymh_energy, ymh_energy_parts, ymh_solve, ymh_spectrum_gauge_fixed, YmhSchedule, YmhState,
};
use crate::{Result, StabError};

/// Named pipelines.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Experiment {
    FemValidate,
    GlSolve,
    GlSpectrum,
    GlTrace,
    GlCertify,
    GlInnervar,
    Prop21Gap,
    Fdcheck,
    YmhSolve,
    YmhBogomolny,
    YmhSpectrum,
    YmhScanEpsilon,
    YmhGauge,
    YmhLatticeTrace,
    YmhVortex,
    PointlabSphereGl,
    PointlabSphereYmh,
    PointlabCpn,
}

impl Experiment {
    pub const ALL: [Experiment; 18] = [
        Experiment::FemValidate,
        Experiment::GlSolve,
        Experiment::GlSpectrum,
        Experiment::GlTrace,
        Experiment::GlCertify,
        Experiment::GlInnervar,
        Experiment::Prop21Gap,
        Experiment::Fdcheck,
        Experiment::YmhSolve,
        Experiment::YmhBogomolny,
        Experiment::YmhSpectrum,
        Experiment::YmhScanEpsilon,
        Experiment::YmhGauge,
        Experiment::YmhLatticeTrace,
        Experiment::YmhVortex,
        Experiment::PointlabSphereGl,
        Experiment::PointlabSphereYmh,
        Experiment::PointlabCpn,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Experiment::FemValidate => "fem-validate",
            Experiment::GlSolve => "gl-solve",
            Experiment::GlSpectrum => "gl-spectrum",
            Experiment::GlTrace => "gl-trace",
            Experiment::GlCertify => "gl-certify",
            Experiment::GlInnervar => "gl-innervar",
            Experiment::Prop21Gap => "prop21-gap",
            Experiment::Fdcheck => "fdcheck",
            Experiment::YmhSolve => "ymh-solve",
            Experiment::YmhBogomolny => "ymh-bogomolny",
            Experiment::YmhSpectrum => "ymh-spectrum",
            Experiment::YmhScanEpsilon => "ymh-scan-epsilon",
            Experiment::YmhGauge => "ymh-gauge",
            Experiment::YmhLatticeTrace => "ymh-lattice-trace",
            Experiment::YmhVortex => "ymh-vortex",
            Experiment::PointlabSphereGl => "pointlab-sphere-gl",
            Experiment::PointlabSphereYmh => "pointlab-sphere-ymh",
            Experiment::PointlabCpn => "pointlab-cpn",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Experiment {
    type Err = StabError;

    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL.iter().copied().find(|e| e.id() == s).ok_or_else(|| {
            let best = Experiment::ALL
                .iter()
                .map(|e| (strsim::jaro_winkler(s, e.id()), e.id()))
                .max_by(|a, b| a.0.total_cmp(&b.0))
                .filter(|(score, _)| *score > 0.8)
                .map(|(_, id)| format!(" (did you mean `{id}`?)"))
                .unwrap_or_default();
            StabError::InvalidArgument(format!("unknown experiment `{s}`{best}"))
        })
    }
}

/// Runs `which`, writes its artifacts and report into `config.output_dir`,
/// and returns the report. Module errors become failing metrics.
pub fn run_experiment(config: &ExperimentConfig, which: Experiment) -> Result<ReportDoc> {
    let doc = compute(config, which);
    write_report(&doc, &config.output_dir)?;
    Ok(doc)
}

/// Runs `which` and writes its artifacts, without writing the report.
pub fn compute(config: &ExperimentConfig, which: Experiment) -> ReportDoc {
    let mut run = Run { cfg: config, doc: ReportDoc::new(which.id(), config.echo()) };
    let out = match which {
        Experiment::FemValidate => run.fem_validate(),
        Experiment::GlSolve => run.gl_solve_only(),
        Experiment::GlSpectrum => run.gl_spectrum(),
        Experiment::GlTrace => run.gl_trace(),
        Experiment::GlCertify => run.gl_certify(),
        Experiment::GlInnervar => run.gl_innervar(),
        Experiment::Prop21Gap => run.prop21_gap(),
        Experiment::Fdcheck => run.fdcheck(),
        Experiment::YmhSolve => run.ymh_solve_only(),
        Experiment::YmhBogomolny => run.ymh_bogomolny(),
        Experiment::YmhSpectrum => run.ymh_spectrum(),
        Experiment::YmhScanEpsilon => run.ymh_scan(),
        Experiment::YmhGauge => run.ymh_gauge(),
        Experiment::YmhLatticeTrace => run.ymh_lattice_trace(),
        Experiment::YmhVortex => run.ymh_vortex(),
        Experiment::PointlabSphereGl => run.sphere(false),
        Experiment::PointlabSphereYmh => run.sphere(true),
        Experiment::PointlabCpn => run.cpn(),
    };
    if let Err(e) = out {
        run.doc.fail(which.id(), e);
    }
    run.doc
}

/// Degeneracy classes of GL critical points.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CriticalClass {
    Zero,
    UnitConstant,
    NonConstant,
}

impl CriticalClass {
    pub fn code(self) -> f64 {
        match self {
            CriticalClass::Zero => 0.0,
            CriticalClass::UnitConstant => 1.0,
            CriticalClass::NonConstant => 2.0,
        }
    }

    pub fn of(state: &GlState) -> Self {
        let max = state.max_modulus();
        if max <= 1e-6 {
            return CriticalClass::Zero;
        }
        let u0 = state.u[0];
        let spread = state.u.iter().map(|z| (z - u0).norm()).fold(0.0, f64::max);
        if spread <= 1e-6 && (u0.norm() - 1.0).abs() <= 1e-6 {
            CriticalClass::UnitConstant
        } else {
            CriticalClass::NonConstant
        }
    }
}

struct Run<'a> {
    cfg: &'a ExperimentConfig,
    doc: ReportDoc,
}

impl Run<'_> {
    fn dir(&self) -> &Path {
        &self.cfg.output_dir
    }

    fn artifact(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        write_atomic(&self.dir().join(name), bytes)?;
        self.doc.artifacts.push(name.to_string());
        Ok(())
    }

    fn disc(&self) -> Result<Arc<Discretization>> {
        Ok(Arc::new(Discretization::icosphere(self.cfg.mesh_level)?))
    }

    fn fem_validate(&mut self) -> Result<()> {
        let d = self.disc()?;
        let t = &self.cfg.tol;
        let r = shift_invert_eigs(&d.fem.stiffness, &d.fem.mass, -1.0, &EigOptions::new(9, self.cfg.seed), None)?;
        self.doc.count("eigenSolves", r.solves);
        let mut rows = Vec::new();
        for (i, &l) in r.values.iter().enumerate() {
            rows.push(vec![i as f64, l, r.residuals[i]]);
        }
        self.artifact("fem-spectrum.csv", csv_table(&["index", "eigenvalue", "residualNorm"], &rows).as_bytes())?;
        self.doc.metric("lambda0", Metric::within(r.values[0], 0.0, 1e-8));
        for k in 1..=3 {
            self.doc.metric(&format!("lambda{k}"), Metric::relative(r.values[k], 2.0, t.fem_first));
        }
        for k in 4..=8 {
            self.doc.metric(&format!("lambda{k}"), Metric::relative(r.values[k], 6.0, t.fem_second));
        }
        let err = (1..=3).map(|k| (r.values[k] - 2.0).abs() / 2.0).fold(0.0, f64::max);
        self.doc.metric("firstClusterError", Metric::info(err));
        Ok(())
    }

    fn solve_gl(&mut self) -> Result<GlState> {
        let d = self.disc()?;
        let p = GlParams::new(self.cfg.gl_epsilon)?;
        let start = self.cfg.gl_ansatz.build(d, p, self.cfg.seed)?;
        let (s, log) = gl_solve(&start, &self.cfg.gl_schedule())?;
        self.record_gl_log(&log);
        let e = gl_energy(&s)?;
        self.doc.metric("residual", Metric::at_most(log.final_residual, self.cfg.gl_solver_tol));
        let inc = if log.flow_steps > 0 { log.max_flow_increase().max(0.0) } else { 0.0 };
        self.doc.metric("flowEnergyIncrease", Metric::at_most(inc, 0.0));
        self.doc.metric("energy", Metric::info(e));
        self.doc.metric("maxModulus", Metric::info(s.max_modulus()));
        self.doc.metric("criticalClass", Metric::info(CriticalClass::of(&s).code()));
        let snap = crate::io::to_json_bytes(&GlSnapshot::from_state(&s))?;
        self.artifact("gl-state.json", &snap)?;
        Ok(s)
    }

    fn record_gl_log(&mut self, log: &SolveLog) {
        self.doc.count("flowSteps", log.flow_steps);
        self.doc.count("rejectedFlowSteps", log.rejected_flow_steps);
        self.doc.count("newtonSteps", log.newton_steps);
        self.doc.count("minresIterations", log.minres_iterations);
    }

    fn gl_solve_only(&mut self) -> Result<()> {
        self.solve_gl().map(|_| ())
    }

    fn gl_spectrum(&mut self) -> Result<()> {
        let s = self.solve_gl()?;
        let rep = gl_spectrum(&s, self.cfg.gl_spectrum_k, self.cfg.seed)?;
        self.doc.count("eigenSolves", rep.solves);
        self.artifact("gl-spectrum.csv", rep.to_csv().as_bytes())?;
        let worst = rep.residual_norms.iter().cloned().fold(0.0, f64::max);
        self.doc.metric("maxEigenResidual", Metric::at_most(worst, 1e-8));
        self.doc.metric("lambda1", Metric::info(rep.lambda1()));
        let negative = rep.eigenvalues.iter().filter(|&&l| l < -1e-8).count();
        self.doc.metric("negativeAmongComputed", Metric::info(negative as f64));
        Ok(())
    }

    /// On `S^2` the conformal trace of the second inner variation vanishes
    /// at critical points.
    fn gl_trace(&mut self) -> Result<()> {
        let s = self.solve_gl()?;
        let c = gl_instability_certificate(&s, 1e-8, self.cfg.seed)?;
        self.doc.metric("innerTraceRelative", Metric::at_most(c.inner_sum.abs() / c.scale, self.cfg.tol.certify_sum));
        self.doc.metric("outerTrace", Metric::info(c.outer_sum));
        self.doc.metric("scale", Metric::info(c.scale));
        Ok(())
    }

    fn gl_certify(&mut self) -> Result<()> {
        let s = self.solve_gl()?;
        let t = &self.cfg.tol;
        let class = CriticalClass::of(&s);
        let residual = self.doc.value("residual").unwrap_or(f64::INFINITY);
        if residual > self.cfg.gl_solver_tol {
            return Err(StabError::NotConverged(format!("residual {residual:e} above tolerance")));
        }
        let c = gl_instability_certificate(&s, 1e-8, self.cfg.seed)?;
        self.doc.metric("rayleighQuotient", Metric::info(c.rayleigh_quotient));
        self.doc.metric("scale", Metric::info(c.scale));
        match class {
            CriticalClass::UnitConstant => {
                let rep = gl_spectrum(&s, 1, self.cfg.seed)?;
                self.doc.count("eigenSolves", rep.solves);
                self.doc.metric("lambda1", Metric::at_least(rep.lambda1(), -t.certify_constant));
            }
            CriticalClass::Zero => {
                let rep = gl_spectrum(&s, 1, self.cfg.seed)?;
                self.doc.count("eigenSolves", rep.solves);
                let target = -1.0 / (self.cfg.gl_epsilon * self.cfg.gl_epsilon);
                self.doc.metric("lambda1", Metric::relative(rep.lambda1(), target, t.certify_zero));
            }
            CriticalClass::NonConstant => {
                self.doc.metric("negativeDirection", Metric::at_most(c.rayleigh_quotient, 0.0));
                let span_first = c.source == CertificateSource::ConformalSpan;
                self.doc.metric("fromConformalSpan", Metric::info(if span_first { 1.0 } else { 0.0 }));
                self.doc.metric("conformalSum", Metric::at_most(c.inner_sum.abs(), t.certify_sum * c.scale));
                self.doc.metric("outerConformalSum", Metric::info(c.outer_sum));
                let idx = gl_morse_index(&s, 1e-8, self.cfg.seed)?;
                self.doc.metric("morseIndex", Metric::info(idx as f64));
            }
        }
        Ok(())
    }

    fn gl_innervar(&mut self) -> Result<()> {
        let d = self.disc()?;
        let t = &self.cfg.tol;
        let xi = [0.3, -0.5, 0.8];
        let jet = conformal_field_jet(&xi, 2)?;
        let fd = flow_differences(d, self.cfg.gl_epsilon, &jet)?;
        self.doc.count("energyEvaluations", fd.evaluations);
        let rows: Vec<Vec<f64>> = super::checks::FLOW_STEPS
            .iter()
            .enumerate()
            .map(|(i, &s)| vec![s, fd.d1[i], fd.d2[i]])
            .collect();
        self.artifact("gl-innervar.csv", csv_table(&["t", "firstDifference", "secondDifference"], &rows).as_bytes())?;
        self.doc.metric("firstInner", Metric::info(fd.first));
        self.doc.metric("secondInner", Metric::info(fd.second));
        self.doc.metric("firstRelative", Metric::at_most(fd.first_relative(), t.inner_relative));
        self.doc.metric("secondRelative", Metric::at_most(fd.second_relative(), t.inner_relative));
        self.doc.metric("firstOrder", Metric::at_least(fd.first_order(), t.inner_order));
        self.doc.metric("secondOrder", Metric::at_least(fd.second_order(), t.inner_order));
        Ok(())
    }

    fn prop21_gap(&mut self) -> Result<()> {
        let d = self.disc()?;
        let s = GlState::from_fn(d, GlParams::new(self.cfg.gl_epsilon)?, super::checks::smooth_field)?;
        let jet = conformal_field_jet(&[0.3, -0.5, 0.8], 2)?;
        let g = inner_outer_gap(&s, &jet)?;
        self.doc.metric("gap", Metric::info(g.gap.abs()));
        self.doc.metric("inner", Metric::info(g.inner));
        self.doc.metric("outer", Metric::info(g.outer));
        self.doc.metric("first", Metric::info(g.first));
        Ok(())
    }

    fn fdcheck(&mut self) -> Result<()> {
        let d = self.disc()?;
        let t = &self.cfg.tol;
        let p = GlParams::new(self.cfg.gl_epsilon)?;
        let s = crate::gl::Ansatz::RandomHarmonics.build(d.clone(), p, self.cfg.seed)?;
        let gl = gl_fd_errors(&s, 1e-6, self.cfg.seed)?;
        self.doc.metric("glGradient", Metric::at_most(gl.gradient, t.fd_gradient));
        self.doc.metric("glHessian", Metric::at_most(gl.hessian, t.fd_hessian));
        let b = bundle_init(d, self.cfg.ymh_degree)?;
        let y = random_section(&YmhState::new(b, vec![Complex64::new(1.0, 0.0); s.u.len()], self.cfg.ymh_epsilon)?, self.cfg.seed)?;
        let ym = ymh_fd_errors(&y, 1e-6, self.cfg.seed)?;
        self.doc.metric("ymhGradient", Metric::at_most(ym.gradient, t.fd_gradient));
        self.doc.metric("ymhHessian", Metric::at_most(ym.hessian, t.fd_hessian));
        Ok(())
    }

    fn solve_ymh_at(&mut self, epsilon: f64, prefix: &str) -> Result<YmhState> {
        let d = self.disc()?;
        let b = bundle_init(d.clone(), self.cfg.ymh_degree)?;
        let start = YmhState::new(b, vec![Complex64::new(1.0, 0.0); d.mesh.num_vertices()], epsilon)?;
        let (s, log) = ymh_solve(&start, &YmhSchedule::default())?;
        self.doc.count(&format!("{prefix}lbfgsIterations"), log.lbfgs_iterations);
        self.doc.count(&format!("{prefix}newtonSteps"), log.newton_steps);
        self.doc.count(&format!("{prefix}minresIterations"), log.minres_iterations);
        self.doc.count(&format!("{prefix}guardRejections"), log.guard_rejections);
        let gn = gradient_norm(&s)?;
        self.doc.metric(&format!("{prefix}gradientNorm"), Metric::at_most(gn, self.cfg.tol.ymh_gradient));
        self.doc.metric(&format!("{prefix}energyIncrease"), Metric::at_most(log.max_energy_increase().max(0.0), 0.0));
        self.doc.metric(&format!("{prefix}degree"), Metric::within(s.degree()? as f64, self.cfg.ymh_degree as f64, 0.0));
        Ok(s)
    }

    fn solve_ymh(&mut self) -> Result<YmhState> {
        let s = self.solve_ymh_at(self.cfg.ymh_epsilon, "")?;
        let t = &self.cfg.tol;
        let e = ymh_energy(&s)?;
        let parts = ymh_energy_parts(&s);
        self.doc.metric("energy", Metric::info(e));
        self.doc.metric("curvatureEnergy", Metric::info(parts.curvature));
        self.doc.metric("covariantEnergy", Metric::info(parts.covariant));
        self.doc.metric("potentialEnergy", Metric::info(parts.potential));
        self.doc.metric("maxModulus", Metric::at_most(s.max_modulus(), 1.0 + 1e-6));
        let d = self.cfg.ymh_degree.unsigned_abs() as f64;
        if d > 0.0 {
            let ratio = e / (2.0 * PI * d);
            let mid = 0.5 * (t.ymh_energy_low + t.ymh_energy_high);
            self.doc.metric("energyRatio", Metric::within(ratio, mid, 0.5 * (t.ymh_energy_high - t.ymh_energy_low)));
        }
        self.artifact("ymh-state.json", &crate::io::to_json_bytes(&YmhSnapshot::from_state(&s)?)?)?;
        Ok(s)
    }

    fn ymh_solve_only(&mut self) -> Result<()> {
        self.solve_ymh().map(|_| ())
    }

    fn bogomolny_metrics(&mut self, s: &YmhState) -> Result<()> {
        let t = &self.cfg.tol;
        let b = bogomolny_defect(s)?;
        self.artifact("face-residuals.csv", b.to_csv().as_bytes())?;
        self.doc.metric("bogomolnyDefect", Metric::at_least(b.defect, -t.ymh_bogomolny));
        self.doc.metric("residualIntegral", Metric::info(b.residual_integral));
        self.doc.metric(
            "defectResidualMatch",
            Metric::within(b.defect, b.residual_integral, t.ymh_residual_match * b.residual_integral.abs()),
        );
        Ok(())
    }

    fn ymh_bogomolny(&mut self) -> Result<()> {
        let s = self.solve_ymh()?;
        self.bogomolny_metrics(&s)
    }

    fn spectrum_metrics(&mut self, s: &YmhState, k: usize) -> Result<()> {
        let t = &self.cfg.tol;
        let hn = hessian_norm_estimate(s, self.cfg.seed);
        let rep = ymh_spectrum_gauge_fixed(s, k, self.cfg.seed)?;
        self.doc.count("eigenSolves", rep.solves);
        self.artifact("ymh-spectrum.csv", rep.to_csv().as_bytes())?;
        self.doc.metric("hessianNorm", Metric::info(hn));
        self.doc.metric("lambda1", Metric::at_least(rep.lambda1(), -t.ymh_lambda * hn));
        let tp = trivial_pair(s.bundle.disc.clone(), 0, s.epsilon)?;
        let q = trivial_pair_quotient(&tp);
        self.doc.metric("trivialQuotient", Metric::relative(q, -1.0 / (s.epsilon * s.epsilon), t.ymh_trivial));
        Ok(())
    }

    fn ymh_spectrum(&mut self) -> Result<()> {
        let s = self.solve_ymh()?;
        self.spectrum_metrics(&s, self.cfg.gl_spectrum_k)
    }

    fn ymh_scan(&mut self) -> Result<()> {
        let mut boundary = f64::INFINITY;
        let mut rows = Vec::new();
        for eps in [0.2, 0.3, 0.5, 0.9] {
            let prefix = format!("eps{eps}.");
            let s = self.solve_ymh_at(eps, &prefix)?;
            let hn = hessian_norm_estimate(&s, self.cfg.seed);
            let rep = ymh_spectrum_gauge_fixed(&s, 3, self.cfg.seed)?;
            self.doc.count("eigenSolves", rep.solves);
            let l1 = rep.lambda1();
            let ratio = ymh_energy(&s)? / (2.0 * PI * (self.cfg.ymh_degree.unsigned_abs().max(1)) as f64);
            let stable = l1 >= -self.cfg.tol.ymh_lambda * hn;
            if !stable {
                boundary = boundary.min(eps);
            }
            self.doc.metric(&format!("{prefix}lambda1"), Metric::info(l1));
            self.doc.metric(&format!("{prefix}energyRatio"), Metric::info(ratio));
            self.doc.metric(&format!("{prefix}stable"), Metric::info(if stable { 1.0 } else { 0.0 }));
            rows.push(vec![eps, ratio, l1, hn, if stable { 1.0 } else { 0.0 }]);
        }
        self.artifact(
            "epsilon-scan.csv",
            csv_table(&["epsilon", "energyRatio", "lambda1", "hessianNorm", "stable"], &rows).as_bytes(),
        )?;
        // Zero when every scanned epsilon is stable.
        self.doc.metric("firstUnstableEpsilon", Metric::info(if boundary.is_finite() { boundary } else { 0.0 }));
        Ok(())
    }

    fn ymh_gauge(&mut self) -> Result<()> {
        let d = self.disc()?;
        let t = &self.cfg.tol;
        let b = bundle_init(d.clone(), self.cfg.ymh_degree)?;
        let s = random_section(
            &YmhState::new(b, vec![Complex64::new(1.0, 0.0); d.mesh.num_vertices()], self.cfg.ymh_epsilon)?,
            self.cfg.seed,
        )?;
        let g = gauge_errors(&s, self.cfg.seed)?;
        self.doc.metric("energyInvariance", Metric::at_most(g.energy, t.ymh_gauge));
        self.doc.metric("fluxInvariance", Metric::at_most(g.max_flux_change, t.ymh_gauge));
        self.doc.metric("modulusInvariance", Metric::at_most(g.max_modulus_change, t.ymh_gauge));
        self.doc.metric("composition", Metric::at_most(g.composition, t.ymh_gauge));
        self.doc.metric("degreePreserved", Metric::flag(g.degree_preserved));
        self.doc.metric("degreeQuantized", Metric::flag(g.quantized));
        self.doc.metric("degree", Metric::within(s.degree()? as f64, self.cfg.ymh_degree as f64, 0.0));
        Ok(())
    }

    fn lattice_trace_metrics(&mut self, s: &YmhState) -> Result<()> {
        let t = &self.cfg.tol;
        let xs = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        let per = lattice_per_xi_integrands(s, &xs)?;
        let parts = ymh_energy_parts(s);
        let scale = 1.0 + parts.total();
        for (i, v) in per.iter().enumerate() {
            self.doc.metric(&format!("perXi{i}"), Metric::at_least(*v, -t.ymh_per_xi * scale));
        }
        let target = 8.0 * parts.curvature;
        self.doc.metric("xiSum", Metric::relative(per.iter().sum(), target, t.ymh_xi_sum));
        Ok(())
    }

    fn ymh_lattice_trace(&mut self) -> Result<()> {
        let s = self.solve_ymh()?;
        self.lattice_trace_metrics(&s)
    }

    /// Solve, stability, Bogomolny, trivial pair and lattice trace in one run.
    fn ymh_vortex(&mut self) -> Result<()> {
        let s = self.solve_ymh()?;
        self.spectrum_metrics(&s, 3)?;
        self.bogomolny_metrics(&s)?;
        self.lattice_trace_metrics(&s)
    }

    fn sphere(&mut self, ymh: bool) -> Result<()> {
        let (n, k, seed) = (self.cfg.pointlab_n, self.cfg.pointlab_samples, self.cfg.seed);
        let rep = if ymh { sphere_ymh_trace(n, k, seed)? } else { sphere_gl_trace(n, k, seed)? };
        self.trace_metrics(&rep);
        if ymh && (n == 2 || n == 4) {
            // One term of the target vanishes in these dimensions; dropping
            // the other one from the data leaves a sum that must be zero.
            let degenerate = if n == 4 {
                sphere_ymh_trace_with(n, k, seed, |d| d.du.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0)))?
            } else {
                sphere_ymh_trace_with(n, k, seed, |d| d.f.fill(0.0))?
            };
            self.doc.metric("degenerateDeviation", Metric::at_most(degenerate.max_deviation, self.cfg.tol.pointlab_trace));
        }
        let name = if ymh { "pointlab-sphere-ymh-result.json" } else { "pointlab-sphere-gl-result.json" };
        let summary = PointlabSummary::from_trace(&rep, self.cfg.tol.pointlab_trace);
        self.artifact(name, &crate::io::to_json_bytes(&summary)?)
    }

    fn trace_metrics(&mut self, rep: &TraceReport) {
        self.doc.metric("maxDeviation", Metric::at_most(rep.max_deviation, self.cfg.tol.pointlab_trace));
        self.doc.metric("maxAbsDeviation", Metric::info(rep.max_abs_deviation));
        self.doc.metric("scale", Metric::info(rep.scale));
    }

    fn cpn(&mut self) -> Result<()> {
        let n = self.cfg.pointlab_n;
        let (k, seed) = (self.cfg.pointlab_samples, self.cfg.seed);
        let t = &self.cfg.tol;
        let frame = cpn_frame_build(n)?;
        let lemma = cpn_lemma_prelim_check(&frame, k, seed);
        let tr = cpn_trace_check(&frame, k, seed);
        let rot = cpn_trace_check_with(&frame, &frame.rotated_basis(seed.wrapping_add(1)), k, seed);
        let h = cpn_eigenfunction_hessian(n)?;
        self.doc.metric("lemma", Metric::at_most(lemma, t.cpn_lemma));
        self.doc.metric("q1Relative", Metric::at_most(tr.q1_relative, t.cpn_trace));
        self.doc.metric("q2q3Relative", Metric::at_most(tr.q2q3_relative, t.cpn_trace));
        self.doc.metric("rotatedQ1Relative", Metric::at_most(rot.q1_relative, t.cpn_trace));
        self.doc.metric("rotatedQ2q3Relative", Metric::at_most(rot.q2q3_relative, t.cpn_trace));
        self.doc.metric("hessianTensor", Metric::at_most(h.tensor_deviation, t.cpn_tensor));
        self.doc.metric("hessianDiagonal", Metric::at_most(h.diagonal_deviation, t.cpn_tensor));
        self.doc.metric("laplacianEigen", Metric::info(h.laplacian_deviation));
        self.doc.metric("ricci", Metric::at_most(frame.invariants.ricci, t.cpn_tensor));
        self.doc.metric("killingDimension", Metric::info(frame.invariants.q as f64));
        let summary = PointlabSummary {
            identity: "cpn".into(),
            n,
            samples: k,
            seed,
            max_deviation: tr.q1_relative.max(tr.q2q3_relative),
            scale: tr.scale,
            pass: self.doc.all_pass(),
        };
        self.artifact("pointlab-cpn-result.json", &crate::io::to_json_bytes(&summary)?)
    }
}

/// Compact pointwise-check result.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PointlabSummary {
    pub identity: String,
    pub n: usize,
    pub samples: usize,
    pub seed: u64,
    pub max_deviation: f64,
    pub scale: f64,
    pub pass: bool,
}

impl PointlabSummary {
    pub fn from_trace(rep: &TraceReport, tol: f64) -> Self {
        PointlabSummary {
            identity: rep.identity.clone(),
            n: rep.n,
            samples: rep.samples,
            seed: rep.seed,
            max_deviation: rep.max_deviation,
            scale: rep.scale,
            pass: rep.max_deviation <= tol,
        }
    }
}
