use std::path::Path;

use super::config::ExperimentConfig;
use super::experiments::{compute, Experiment};
use super::report::{write_report, Metric, ReportDoc};
use crate::io::{csv_table, write_atomic};
use crate::{Result, StabError};

/// Quantity tracked across levels and how its sequence is judged.
fn tracked(which: Experiment) -> Result<&'static str> {
    match which {
        Experiment::FemValidate => Ok("firstClusterError"),
        Experiment::Prop21Gap => Ok("gap"),
        Experiment::YmhBogomolny => Ok("bogomolnyDefect"),
        _ => Err(StabError::InvalidArgument(format!(
            "no convergence study for `{which}`; use fem-validate, prop21-gap or ymh-bogomolny"
        ))),
    }
}

/// `log2(e_k / e_{k+1})` for successive levels; levels differ by one
/// halving of the mesh size.
pub fn observed_orders(values: &[f64]) -> Vec<f64> {
    values.windows(2).map(|w| (w[0].abs() / w[1].abs()).log2()).collect()
}

/// Runs `which` at every level (ascending), fits observed orders, writes a
/// CSV of per-level values and a report `converge-<id>.json`. A failing
/// level stops the study and leaves a partial report.
pub fn convergence_study(config: &ExperimentConfig, which: Experiment, levels: &[u32]) -> Result<ReportDoc> {
    let key = tracked(which)?;
    if levels.is_empty() || levels.windows(2).any(|w| w[1] <= w[0]) {
        return Err(StabError::InvalidArgument("levels must be non-empty and strictly ascending".into()));
    }
    if levels.windows(2).any(|w| w[1] != w[0] + 1) {
        return Err(StabError::InvalidArgument("levels must be consecutive".into()));
    }
    let mut doc = ReportDoc::new(&format!("converge-{}", which.id()), config.echo());
    let dir = config.output_dir.clone();
    let mut values = Vec::new();
    for &level in levels {
        let mut cfg = config.clone();
        cfg.mesh_level = level;
        cfg.output_dir = dir.join(format!("level{level}"));
        let sub = compute(&cfg, which);
        write_report(&sub, &cfg.output_dir)?;
        for (k, v) in &sub.timing {
            doc.count(&format!("level{level}.{k}"), *v as usize);
        }
        let Some(v) = sub.value(key).filter(|v| v.is_finite()) else {
            doc.fail(&format!("level{level}"), sub.errors.join("; "));
            break;
        };
        doc.metric(&format!("level{level}.{key}"), Metric::info(v));
        values.push(v);
    }
    let orders = observed_orders(&values);
    let t = &config.tol;
    if values.len() == levels.len() && values.len() >= 2 {
        match which {
            Experiment::FemValidate => {
                let p = orders.iter().cloned().fold(f64::INFINITY, f64::min);
                doc.metric("order", Metric::at_least(p, t.fem_order));
            }
            Experiment::Prop21Gap => {
                let p = orders.iter().cloned().fold(f64::INFINITY, f64::min);
                doc.metric("order", Metric::at_least(p, t.gap_order));
            }
            Experiment::YmhBogomolny => {
                let worst = values.windows(2).map(|w| w[1].abs() / w[0].abs()).fold(0.0, f64::max);
                doc.metric("defectGrowth", Metric::at_most(worst, 1.0 + t.ymh_refinement));
                let p = orders.iter().cloned().fold(f64::INFINITY, f64::min);
                doc.metric("order", Metric::info(p));
            }
            _ => unreachable!("checked by tracked()"),
        }
    }
    let rows: Vec<Vec<f64>> = values
        .iter()
        .enumerate()
        .map(|(i, &v)| vec![levels[i] as f64, v, if i == 0 { f64::NAN } else { orders[i - 1] }])
        .collect();
    let name = format!("converge-{}.csv", which.id());
    write_csv(&dir, &name, &csv_table(&["level", key, "order"], &rows))?;
    doc.artifacts.push(name);
    write_report(&doc, &dir)?;
    Ok(doc)
}

fn write_csv(dir: &Path, name: &str, text: &str) -> Result<()> {
    write_atomic(&dir.join(name), text.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orders_of_geometric_sequence() {
        let o = observed_orders(&[1.0, 0.25, 0.0625]);
        assert!(o.iter().all(|p| (p - 2.0).abs() < 1e-12));
    }
}
