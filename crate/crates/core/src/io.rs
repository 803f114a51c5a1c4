//! File formats: state snapshots, CSV tables and atomic writes.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::geometry::Discretization;
use crate::gl::{GlParams, GlState};
use crate::ymh::{LatticeBundle, YmhState};
use crate::{Result, StabError};

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "camelCase")]
pub struct GlSnapshot {
    pub mesh_level: u32,
    pub epsilon: f64,
    pub real_parts: Vec<f64>,
    pub imag_parts: Vec<f64>,
}

impl GlSnapshot {
    pub fn from_state(state: &GlState) -> Self {
        GlSnapshot {
            mesh_level: state.disc.mesh.level,
            epsilon: state.params.epsilon,
            real_parts: state.u.iter().map(|z| z.re).collect(),
            imag_parts: state.u.iter().map(|z| z.im).collect(),
        }
    }

    /// Rebuilds the state on `disc`, which must have the recorded level.
    pub fn to_state(&self, disc: Arc<Discretization>) -> Result<GlState> {
        check_level(self.mesh_level, &disc)?;
        if self.real_parts.len() != self.imag_parts.len() {
            return Err(StabError::LengthMismatch { expected: self.real_parts.len(), got: self.imag_parts.len() });
        }
        let u = self.real_parts.iter().zip(&self.imag_parts).map(|(&a, &b)| Complex64::new(a, b)).collect();
        GlState::new(disc, u, GlParams::new(self.epsilon)?)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "camelCase")]
pub struct YmhSnapshot {
    pub mesh_level: u32,
    pub epsilon: f64,
    pub degree: i64,
    pub edge_phases: Vec<f64>,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl YmhSnapshot {
    pub fn from_state(state: &YmhState) -> Result<Self> {
        Ok(YmhSnapshot {
            mesh_level: state.disc().mesh.level,
            epsilon: state.epsilon,
            degree: state.degree()?,
            edge_phases: state.bundle.theta.clone(),
            re: state.u.iter().map(|z| z.re).collect(),
            im: state.u.iter().map(|z| z.im).collect(),
        })
    }

    /// Rebuilds the state and checks the recorded degree.
    pub fn to_state(&self, disc: Arc<Discretization>) -> Result<YmhState> {
        check_level(self.mesh_level, &disc)?;
        if self.re.len() != self.im.len() {
            return Err(StabError::LengthMismatch { expected: self.re.len(), got: self.im.len() });
        }
        let bundle = LatticeBundle::new(disc, self.edge_phases.clone())?;
        let u = self.re.iter().zip(&self.im).map(|(&a, &b)| Complex64::new(a, b)).collect();
        let state = YmhState::new(bundle, u, self.epsilon)?;
        let d = state.degree()?;
        if d != self.degree {
            return Err(StabError::Parse(format!("snapshot degree {} but phases give {d}", self.degree)));
        }
        Ok(state)
    }
}

fn check_level(level: u32, disc: &Discretization) -> Result<()> {
    if disc.mesh.level != level {
        return Err(StabError::InvalidArgument(format!(
            "snapshot is for level {level}, mesh has level {}",
            disc.mesh.level
        )));
    }
    Ok(())
}

/// Writes `bytes` to `path` through a sibling temporary file and a rename.
/// Missing parent directories are created.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let name = path
        .file_name()
        .ok_or_else(|| StabError::InvalidArgument(format!("not a file path: {}", path.display())))?;
    let mut tmp = PathBuf::from(dir);
    tmp.push(format!(".{}.tmp", name.to_string_lossy()));
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Pretty JSON with a trailing newline.
pub fn to_json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut v = serde_json::to_vec_pretty(value)?;
    v.push(b'\n');
    Ok(v)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_atomic(path, &to_json_bytes(value)?)
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

/// CSV with a header row; values are printed in round-trip form.
pub fn csv_table(header: &[&str], rows: &[Vec<f64>]) -> String {
    let mut s = header.join(",");
    s.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let s = csv_table(&["a", "b"], &[vec![1.0, 0.5], vec![-2.0, 1e-20]]);
        assert_eq!(s, "a,b\n1.0,0.5\n-2.0,1e-20\n");
    }

    #[test]
    fn atomic_write_creates_dirs() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x/y/z.json");
        write_atomic(&p, b"hello").unwrap();
        assert_eq!(fs::read(&p).unwrap(), b"hello");
        assert!(!dir.path().join("x/y/.z.json.tmp").exists());
    }
}
