use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::io::{to_json_bytes, write_atomic};
use crate::Result;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Check {
    /// `|value - target| <= tolerance`.
    Abs,
    /// `value <= tolerance`.
    Le,
    /// `value >= tolerance`.
    Ge,
    /// Reported only.
    Info,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metric {
    /// Non-finite values are written as `null` and read back as NaN.
    #[serde(deserialize_with = "nullable")]
    pub value: f64,
    pub tolerance: Option<f64>,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub target: Option<f64>,
    pub check: Check,
}

fn nullable<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
}

impl Metric {
    pub fn within(value: f64, target: f64, tolerance: f64) -> Self {
        let pass = (value - target).abs() <= tolerance;
        Metric { value, tolerance: Some(tolerance), pass, target: Some(target), check: Check::Abs }
    }

    /// `|value - target| <= rel * |target|`; the echoed tolerance is absolute.
    pub fn relative(value: f64, target: f64, rel: f64) -> Self {
        Self::within(value, target, rel * target.abs())
    }

    pub fn at_most(value: f64, bound: f64) -> Self {
        Metric { value, tolerance: Some(bound), pass: value <= bound, target: None, check: Check::Le }
    }

    pub fn at_least(value: f64, bound: f64) -> Self {
        Metric { value, tolerance: Some(bound), pass: value >= bound, target: None, check: Check::Ge }
    }

    pub fn info(value: f64) -> Self {
        Metric { value, tolerance: None, pass: true, target: None, check: Check::Info }
    }

    pub fn flag(ok: bool) -> Self {
        Self::within(if ok { 1.0 } else { 0.0 }, 1.0, 0.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ReportDoc {
    pub schema_version: u32,
    pub experiment_id: String,
    pub config_echo: BTreeMap<String, String>,
    pub metrics: BTreeMap<String, Metric>,
    /// File names relative to the report directory.
    pub artifacts: Vec<String>,
    /// Deterministic work counters (iterations, solves); wall-clock time is
    /// never recorded so that reports are reproducible.
    pub timing: BTreeMap<String, u64>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub errors: Vec<String>,
}

impl ReportDoc {
    pub fn new(experiment_id: &str, config_echo: BTreeMap<String, String>) -> Self {
        ReportDoc {
            schema_version: SCHEMA_VERSION,
            experiment_id: experiment_id.to_string(),
            config_echo,
            metrics: BTreeMap::new(),
            artifacts: Vec::new(),
            timing: BTreeMap::new(),
            errors: Vec::new(),
        }
    }

    pub fn metric(&mut self, name: &str, m: Metric) {
        self.metrics.insert(name.to_string(), m);
    }

    pub fn count(&mut self, name: &str, n: usize) {
        *self.timing.entry(name.to_string()).or_insert(0) += n as u64;
    }

    /// Records a module error as a failing metric.
    pub fn fail(&mut self, stage: &str, err: impl std::fmt::Display) {
        self.errors.push(format!("{stage}: {err}"));
        self.metrics.insert(
            format!("{stage}.ok"),
            Metric { value: 0.0, tolerance: Some(0.0), pass: false, target: Some(1.0), check: Check::Abs },
        );
    }

    pub fn all_pass(&self) -> bool {
        self.errors.is_empty() && self.metrics.values().all(|m| m.pass)
    }

    pub fn failing(&self) -> Vec<&str> {
        self.metrics.iter().filter(|(_, m)| !m.pass).map(|(k, _)| k.as_str()).collect()
    }

    pub fn value(&self, name: &str) -> Option<f64> {
        self.metrics.get(name).map(|m| m.value)
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        to_json_bytes(self)
    }
}

/// Writes `doc` as `<dir>/<experimentId>.json` through a temporary file.
pub fn write_report(doc: &ReportDoc, dir: &Path) -> Result<PathBuf> {
    let path = dir.join(format!("{}.json", doc.experiment_id));
    write_atomic(&path, &doc.to_bytes()?)?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn metric_checks() {
        assert!(Metric::within(1.0, 1.05, 0.1).pass);
        assert!(!Metric::relative(2.1, 2.0, 0.01).pass);
        assert!(Metric::at_most(-3.0, 1e-6).pass);
        assert!(!Metric::at_least(-1e-3, -1e-6).pass);
        assert!(!Metric::within(f64::NAN, 0.0, 1.0).pass);
        assert!(Metric::info(f64::NAN).pass);
    }

    #[test]
    fn failure_is_recorded() {
        let mut d = ReportDoc::new("x", BTreeMap::new());
        d.metric("a", Metric::flag(true));
        assert!(d.all_pass());
        d.fail("solve", "boom");
        assert!(!d.all_pass());
        assert_eq!(d.failing(), vec!["solve.ok"]);
    }
}
