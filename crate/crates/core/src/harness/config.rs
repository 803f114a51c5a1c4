//! Line-oriented `dotted.key = value` configuration.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::gl::{Ansatz, GlSchedule};
use crate::{Result, StabError};

/// Every accepted key with its default and a one-line description.
pub const KEYS: &[(&str, &str, &str)] = &[
    ("mesh.level", "4", "icosphere subdivision level, 0..=7"),
    ("gl.epsilon", "0.5", "Ginzburg-Landau epsilon, positive"),
    ("gl.ansatz", "vortex-pair", "starting field: vortex-pair, modulated-pair, random-harmonics, half-constant, zero"),
    ("gl.solver.tol", "1e-8", "Newton residual tolerance"),
    ("gl.solver.maxIter", "60", "Newton iteration cap"),
    ("gl.solver.flowSteps", "4000", "gradient-flow step cap"),
    ("gl.solver.flowStep", "0.05", "gradient-flow time step"),
    ("gl.spectrum.k", "6", "number of Hessian eigenpairs, 1..=64"),
    ("ymh.degree", "1", "bundle degree, |d| <= 8"),
    ("ymh.epsilon", "0.3", "Yang-Mills-Higgs epsilon, positive"),
    ("pointlab.n", "3", "dimension for pointwise checks, 1..=8"),
    ("pointlab.samples", "100", "number of random samples"),
    ("pointlab.seed", "1", "seed for every random stream (STAB_SEED overrides)"),
    ("output.dir", "out", "directory for reports and artifacts"),
    ("tol.fem.first", "0.01", "relative error of the eigenvalue 2 cluster"),
    ("tol.fem.second", "0.02", "relative error of the eigenvalue 6 cluster"),
    ("tol.fem.order", "1.8", "minimum refinement order of the eigenvalue error"),
    ("tol.pointlab.trace", "1e-10", "pointwise trace deviation relative to its scale"),
    ("tol.cpn.lemma", "1e-6", "Killing-field lemma deviation on CP^n"),
    ("tol.cpn.trace", "1e-5", "CP^n trace sums relative to their scale"),
    ("tol.cpn.tensor", "1e-6", "eigenfunction Hessian and Ricci deviations on CP^n"),
    ("tol.inner.relative", "1e-3", "inner variations against flow differences"),
    ("tol.inner.order", "1.9", "minimum observed order of the flow differences"),
    ("tol.gap.order", "1.0", "minimum refinement order of the inner-outer gap"),
    ("tol.fd.gradient", "1e-6", "relative error of the gradient finite-difference check"),
    ("tol.fd.hessian", "1e-5", "relative error of the Hessian finite-difference check"),
    ("tol.certify.constant", "1e-8", "lower bound slack for lambda_1 at |u| = 1"),
    ("tol.certify.zero", "0.01", "relative error of lambda_1 = -1/eps^2 at u = 0"),
    ("tol.certify.sum", "1e-6", "conformal second-variation sum relative to its scale"),
    ("tol.ymh.gauge", "1e-12", "gauge invariance relative to 1 + E"),
    ("tol.ymh.gradient", "1e-8", "criticality threshold for the lattice gradient"),
    ("tol.ymh.energyLow", "0.98", "lower bound of E / (2 pi |d|)"),
    ("tol.ymh.energyHigh", "1.05", "upper bound of E / (2 pi |d|)"),
    ("tol.ymh.lambda", "1e-6", "lambda_1 lower bound relative to the Hessian norm"),
    ("tol.ymh.bogomolny", "1e-3", "allowed negative Bogomolny defect"),
    ("tol.ymh.residualMatch", "0.1", "relative mismatch of defect and face residual integral"),
    ("tol.ymh.trivial", "0.05", "relative error of the trivial-pair quotient"),
    ("tol.ymh.refinement", "0.2", "allowed growth of the Bogomolny defect per refinement"),
    ("tol.ymh.perXi", "1e-3", "allowed negative per-direction integrand relative to scale"),
    ("tol.ymh.xiSum", "0.05", "relative error of the direction sum against 8 eps^2 int |F|^2"),
];

#[derive(Clone, Debug, PartialEq)]
pub struct Tolerances {
    pub fem_first: f64,
    pub fem_second: f64,
    pub fem_order: f64,
    pub pointlab_trace: f64,
    pub cpn_lemma: f64,
    pub cpn_trace: f64,
    pub cpn_tensor: f64,
    pub inner_relative: f64,
    pub inner_order: f64,
    pub gap_order: f64,
    pub fd_gradient: f64,
    pub fd_hessian: f64,
    pub certify_constant: f64,
    pub certify_zero: f64,
    pub certify_sum: f64,
    pub ymh_gauge: f64,
    pub ymh_gradient: f64,
    pub ymh_energy_low: f64,
    pub ymh_energy_high: f64,
    pub ymh_lambda: f64,
    pub ymh_bogomolny: f64,
    pub ymh_residual_match: f64,
    pub ymh_trivial: f64,
    pub ymh_refinement: f64,
    pub ymh_per_xi: f64,
    pub ymh_xi_sum: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub mesh_level: u32,
    pub gl_epsilon: f64,
    pub gl_ansatz: Ansatz,
    pub gl_solver_tol: f64,
    pub gl_solver_max_iter: usize,
    pub gl_solver_flow_steps: usize,
    pub gl_solver_flow_step: f64,
    pub gl_spectrum_k: usize,
    pub ymh_degree: i64,
    pub ymh_epsilon: f64,
    pub pointlab_n: usize,
    pub pointlab_samples: usize,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub tol: Tolerances,
}

fn bad(key: &str, msg: impl Into<String>) -> StabError {
    StabError::ConfigValue { key: key.to_string(), msg: msg.into() }
}

fn real(key: &str, v: &str) -> Result<f64> {
    let x: f64 = v.parse().map_err(|_| bad(key, format!("`{v}` is not a number")))?;
    if !x.is_finite() {
        return Err(bad(key, "must be finite"));
    }
    Ok(x)
}

fn positive(key: &str, v: &str) -> Result<f64> {
    let x = real(key, v)?;
    if x <= 0.0 {
        return Err(bad(key, format!("must be positive, got {x}")));
    }
    Ok(x)
}

fn int<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| bad(key, format!("`{v}` is not an integer")))
}

fn ranged<T: std::str::FromStr + PartialOrd + std::fmt::Display + Copy>(key: &str, v: &str, lo: T, hi: T) -> Result<T> {
    let x: T = int(key, v)?;
    if x < lo || x > hi {
        return Err(bad(key, format!("{x} outside {lo}..={hi}")));
    }
    Ok(x)
}

/// Closest known key, if any is reasonably close.
pub fn suggest(key: &str) -> Option<String> {
    KEYS.iter()
        .map(|(k, _, _)| (strsim::jaro_winkler(key, k), *k))
        .filter(|(s, _)| *s > 0.8)
        .max_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(_, k)| k.to_string())
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let mut c = ExperimentConfig {
            mesh_level: 0,
            gl_epsilon: 1.0,
            gl_ansatz: Ansatz::Zero,
            gl_solver_tol: 1.0,
            gl_solver_max_iter: 0,
            gl_solver_flow_steps: 0,
            gl_solver_flow_step: 1.0,
            gl_spectrum_k: 1,
            ymh_degree: 0,
            ymh_epsilon: 1.0,
            pointlab_n: 1,
            pointlab_samples: 1,
            seed: 0,
            output_dir: PathBuf::new(),
            tol: Tolerances {
                fem_first: 0.0,
                fem_second: 0.0,
                fem_order: 0.0,
                pointlab_trace: 0.0,
                cpn_lemma: 0.0,
                cpn_trace: 0.0,
                cpn_tensor: 0.0,
                inner_relative: 0.0,
                inner_order: 0.0,
                gap_order: 0.0,
                fd_gradient: 0.0,
                fd_hessian: 0.0,
                certify_constant: 0.0,
                certify_zero: 0.0,
                certify_sum: 0.0,
                ymh_gauge: 0.0,
                ymh_gradient: 0.0,
                ymh_energy_low: 0.0,
                ymh_energy_high: 0.0,
                ymh_lambda: 0.0,
                ymh_bogomolny: 0.0,
                ymh_residual_match: 0.0,
                ymh_trivial: 0.0,
                ymh_refinement: 0.0,
                ymh_per_xi: 0.0,
                ymh_xi_sum: 0.0,
            },
        };
        for (k, v, _) in KEYS {
            c.set(k, v).expect("built-in defaults are valid");
        }
        c
    }
}

impl ExperimentConfig {
    /// Assigns one key; the value is validated on the spot.
    pub fn set(&mut self, key: &str, v: &str) -> Result<()> {
        let t = &mut self.tol;
        match key {
            "mesh.level" => self.mesh_level = ranged(key, v, 0u32, 7)?,
            "gl.epsilon" => self.gl_epsilon = positive(key, v)?,
            "gl.ansatz" => {
                self.gl_ansatz = Ansatz::parse(v).ok_or_else(|| {
                    let names: Vec<_> = Ansatz::ALL.iter().map(|a| a.name()).collect();
                    bad(key, format!("`{v}` is not one of {}", names.join(", ")))
                })?
            }
            "gl.solver.tol" => self.gl_solver_tol = positive(key, v)?,
            "gl.solver.maxIter" => self.gl_solver_max_iter = ranged(key, v, 1usize, 100_000)?,
            "gl.solver.flowSteps" => self.gl_solver_flow_steps = ranged(key, v, 0usize, 10_000_000)?,
            "gl.solver.flowStep" => self.gl_solver_flow_step = positive(key, v)?,
            "gl.spectrum.k" => self.gl_spectrum_k = ranged(key, v, 1usize, 64)?,
            "ymh.degree" => self.ymh_degree = ranged(key, v, -8i64, 8)?,
            "ymh.epsilon" => self.ymh_epsilon = positive(key, v)?,
            "pointlab.n" => self.pointlab_n = ranged(key, v, 1usize, 8)?,
            "pointlab.samples" => self.pointlab_samples = ranged(key, v, 1usize, 1_000_000)?,
            "pointlab.seed" => self.seed = int(key, v)?,
            "output.dir" => {
                if v.is_empty() {
                    return Err(bad(key, "must not be empty"));
                }
                self.output_dir = PathBuf::from(v)
            }
            "tol.fem.first" => t.fem_first = positive(key, v)?,
            "tol.fem.second" => t.fem_second = positive(key, v)?,
            "tol.fem.order" => t.fem_order = positive(key, v)?,
            "tol.pointlab.trace" => t.pointlab_trace = positive(key, v)?,
            "tol.cpn.lemma" => t.cpn_lemma = positive(key, v)?,
            "tol.cpn.trace" => t.cpn_trace = positive(key, v)?,
            "tol.cpn.tensor" => t.cpn_tensor = positive(key, v)?,
            "tol.inner.relative" => t.inner_relative = positive(key, v)?,
            "tol.inner.order" => t.inner_order = positive(key, v)?,
            "tol.gap.order" => t.gap_order = positive(key, v)?,
            "tol.fd.gradient" => t.fd_gradient = positive(key, v)?,
            "tol.fd.hessian" => t.fd_hessian = positive(key, v)?,
            "tol.certify.constant" => t.certify_constant = positive(key, v)?,
            "tol.certify.zero" => t.certify_zero = positive(key, v)?,
            "tol.certify.sum" => t.certify_sum = positive(key, v)?,
            "tol.ymh.gauge" => t.ymh_gauge = positive(key, v)?,
            "tol.ymh.gradient" => t.ymh_gradient = positive(key, v)?,
            "tol.ymh.energyLow" => t.ymh_energy_low = positive(key, v)?,
            "tol.ymh.energyHigh" => t.ymh_energy_high = positive(key, v)?,
            "tol.ymh.lambda" => t.ymh_lambda = positive(key, v)?,
            "tol.ymh.bogomolny" => t.ymh_bogomolny = positive(key, v)?,
            "tol.ymh.residualMatch" => t.ymh_residual_match = positive(key, v)?,
            "tol.ymh.trivial" => t.ymh_trivial = positive(key, v)?,
            "tol.ymh.refinement" => t.ymh_refinement = positive(key, v)?,
            "tol.ymh.perXi" => t.ymh_per_xi = positive(key, v)?,
            "tol.ymh.xiSum" => t.ymh_xi_sum = positive(key, v)?,
            _ => return Err(StabError::UnknownKey { key: key.to_string(), suggestion: suggest(key) }),
        }
        Ok(())
    }

    /// Parses config text on top of the defaults. Blank lines and lines
    /// starting with `#` are ignored; a key may appear only once.
    pub fn parse(text: &str) -> Result<Self> {
        let mut c = ExperimentConfig::default();
        let mut seen = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(StabError::ConfigParse { line: line_no, msg: format!("expected `key = value`, got `{line}`") });
            };
            let (k, v) = (k.trim(), v.trim());
            if k.is_empty() {
                return Err(StabError::ConfigParse { line: line_no, msg: "empty key".into() });
            }
            if let Some(prev) = seen.insert(k.to_string(), line_no) {
                return Err(StabError::ConfigParse { line: line_no, msg: format!("`{k}` already set on line {prev}") });
            }
            c.set(k, v)?;
        }
        if c.tol.ymh_energy_low > c.tol.ymh_energy_high {
            return Err(bad("tol.ymh.energyLow", "exceeds tol.ymh.energyHigh"));
        }
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Applies `STAB_SEED` when set.
    pub fn apply_env(&mut self) -> Result<()> {
        if let Ok(v) = std::env::var("STAB_SEED") {
            self.seed = v
                .trim()
                .parse()
                .map_err(|_| bad("STAB_SEED", format!("`{v}` is not an unsigned integer")))?;
        }
        Ok(())
    }

    /// Canonical text value of every key, for report echoes.
    pub fn echo(&self) -> BTreeMap<String, String> {
        let t = &self.tol;
        let f = |x: f64| format!("{x:?}");
        let pairs: Vec<(&str, String)> = vec![
            ("mesh.level", self.mesh_level.to_string()),
            ("gl.epsilon", f(self.gl_epsilon)),
            ("gl.ansatz", self.gl_ansatz.name().to_string()),
            ("gl.solver.tol", f(self.gl_solver_tol)),
            ("gl.solver.maxIter", self.gl_solver_max_iter.to_string()),
            ("gl.solver.flowSteps", self.gl_solver_flow_steps.to_string()),
            ("gl.solver.flowStep", f(self.gl_solver_flow_step)),
            ("gl.spectrum.k", self.gl_spectrum_k.to_string()),
            ("ymh.degree", self.ymh_degree.to_string()),
            ("ymh.epsilon", f(self.ymh_epsilon)),
            ("pointlab.n", self.pointlab_n.to_string()),
            ("pointlab.samples", self.pointlab_samples.to_string()),
            ("pointlab.seed", self.seed.to_string()),
            ("output.dir", self.output_dir.display().to_string()),
            ("tol.fem.first", f(t.fem_first)),
            ("tol.fem.second", f(t.fem_second)),
            ("tol.fem.order", f(t.fem_order)),
            ("tol.pointlab.trace", f(t.pointlab_trace)),
            ("tol.cpn.lemma", f(t.cpn_lemma)),
            ("tol.cpn.trace", f(t.cpn_trace)),
            ("tol.cpn.tensor", f(t.cpn_tensor)),
            ("tol.inner.relative", f(t.inner_relative)),
            ("tol.inner.order", f(t.inner_order)),
            ("tol.gap.order", f(t.gap_order)),
            ("tol.fd.gradient", f(t.fd_gradient)),
            ("tol.fd.hessian", f(t.fd_hessian)),
            ("tol.certify.constant", f(t.certify_constant)),
            ("tol.certify.zero", f(t.certify_zero)),
            ("tol.certify.sum", f(t.certify_sum)),
            ("tol.ymh.gauge", f(t.ymh_gauge)),
            ("tol.ymh.gradient", f(t.ymh_gradient)),
            ("tol.ymh.energyLow", f(t.ymh_energy_low)),
            ("tol.ymh.energyHigh", f(t.ymh_energy_high)),
            ("tol.ymh.lambda", f(t.ymh_lambda)),
            ("tol.ymh.bogomolny", f(t.ymh_bogomolny)),
            ("tol.ymh.residualMatch", f(t.ymh_residual_match)),
            ("tol.ymh.trivial", f(t.ymh_trivial)),
            ("tol.ymh.refinement", f(t.ymh_refinement)),
            ("tol.ymh.perXi", f(t.ymh_per_xi)),
            ("tol.ymh.xiSum", f(t.ymh_xi_sum)),
        ];
        pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
    }

    pub fn gl_schedule(&self) -> GlSchedule {
        GlSchedule {
            flow_steps: self.gl_solver_flow_steps,
            flow_step: self.gl_solver_flow_step,
            newton_tol: self.gl_solver_tol,
            newton_max_iter: self.gl_solver_max_iter,
            ..GlSchedule::default()
        }
    }

    /// Key table formatted for `--help`.
    pub fn help_text() -> String {
        let mut s = String::from("Config keys (`key = value`, one per line, `#` starts a comment):\n");
        for (k, v, d) in KEYS {
            s.push_str(&format!("  {k:<24} default {v:<12} {d}\n"));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn echo_covers_every_key() {
        let echo = ExperimentConfig::default().echo();
        assert_eq!(echo.len(), KEYS.len());
        for (k, _, _) in KEYS {
            assert!(echo.contains_key(*k), "{k}");
        }
    }

    #[test]
    fn echo_round_trips() {
        let mut c = ExperimentConfig::default();
        c.set("gl.epsilon", "0.25").unwrap();
        c.set("ymh.degree", "-2").unwrap();
        let text: String = c.echo().iter().map(|(k, v)| format!("{k} = {v}\n")).collect();
        assert_eq!(ExperimentConfig::parse(&text).unwrap(), c);
    }
}
