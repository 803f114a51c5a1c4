use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use stab_core::geometry::build_icosphere;
use stab_core::harness::{
    compute, convergence_study, load_config, run_experiment, write_report, Experiment, ExperimentConfig,
    PointlabSummary, ReportDoc,
};
use stab_core::io::write_atomic;
use stab_core::StabError;

#[derive(Parser)]
#[command(name = "stab", version, about = "Stability experiments for Ginzburg-Landau and abelian Yang-Mills-Higgs")]
#[command(after_help = after_help())]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

fn after_help() -> String {
    format!(
        "{}\nSTAB_SEED overrides pointlab.seed.\nExit status: 0 all metrics pass, 1 a metric fails, 2 usage or config error.",
        ExperimentConfig::help_text()
    )
}

#[derive(Subcommand)]
enum Cmd {
    /// Write an icosphere mesh in OFF format.
    Mesh {
        #[arg(long)]
        level: u32,
        #[arg(long)]
        out: PathBuf,
    },
    /// Ginzburg-Landau pipelines.
    Gl {
        action: GlAction,
        #[arg(long)]
        config: PathBuf,
    },
    /// Lattice Yang-Mills-Higgs pipelines.
    Ymh {
        action: YmhAction,
        #[arg(long)]
        config: PathBuf,
    },
    /// Pointwise trace identities.
    Pointlab {
        identity: PointIdentity,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        /// Defaults to STAB_SEED, then 1.
        #[arg(long)]
        seed: Option<u64>,
        /// Also write the full report and artifacts into this directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Finite-difference checks of gradients and Hessians.
    Fdcheck {
        #[arg(long)]
        config: PathBuf,
    },
    /// Refinement study over consecutive mesh levels.
    Converge {
        #[arg(long)]
        experiment: String,
        #[arg(long, value_delimiter = ',', default_value = "3,4,5")]
        levels: Vec<u32>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Any named experiment.
    Run {
        #[arg(long)]
        experiment: String,
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum GlAction {
    Solve,
    Spectrum,
    Trace,
    Certify,
}

#[derive(Clone, Copy, ValueEnum)]
enum YmhAction {
    Solve,
    Bogomolny,
    Spectrum,
    ScanEpsilon,
}

#[derive(Clone, Copy, ValueEnum)]
enum PointIdentity {
    SphereGl,
    SphereYmh,
    Cpn,
}

enum Failure {
    Usage(String),
    Metrics,
}

impl From<StabError> for Failure {
    fn from(e: StabError) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn config_or_default(path: Option<&Path>) -> Result<ExperimentConfig, Failure> {
    match path {
        Some(p) => Ok(load_config(p)?),
        None => {
            let mut c = ExperimentConfig::default();
            c.apply_env()?;
            Ok(c)
        }
    }
}

fn summarize(doc: &ReportDoc, path: &Path) -> Result<(), Failure> {
    println!("{}: report {}", doc.experiment_id, path.display());
    for (name, m) in &doc.metrics {
        let tol = m.tolerance.map(|t| format!(" tolerance {t:e}")).unwrap_or_default();
        let status = if m.pass { "ok" } else { "FAIL" };
        println!("  {status:<4} {name} = {:e}{tol}", m.value);
    }
    for e in &doc.errors {
        println!("  error {e}");
    }
    if doc.all_pass() {
        Ok(())
    } else {
        Err(Failure::Metrics)
    }
}

fn run_named(config: &ExperimentConfig, which: Experiment) -> Result<(), Failure> {
    let doc = run_experiment(config, which)?;
    summarize(&doc, &config.output_dir.join(format!("{}.json", doc.experiment_id)))
}

fn execute(cli: Cli) -> Result<(), Failure> {
    match cli.cmd {
        Cmd::Mesh { level, out } => {
            let mesh = build_icosphere(level)?;
            write_atomic(&out, mesh.to_off().as_bytes())?;
            println!(
                "level {level}: {} vertices, {} edges, {} faces -> {}",
                mesh.num_vertices(),
                mesh.num_edges(),
                mesh.num_faces(),
                out.display()
            );
            Ok(())
        }
        Cmd::Gl { action, config } => {
            let cfg = load_config(&config)?;
            let which = match action {
                GlAction::Solve => Experiment::GlSolve,
                GlAction::Spectrum => Experiment::GlSpectrum,
                GlAction::Trace => Experiment::GlTrace,
                GlAction::Certify => Experiment::GlCertify,
            };
            run_named(&cfg, which)
        }
        Cmd::Ymh { action, config } => {
            let cfg = load_config(&config)?;
            let which = match action {
                YmhAction::Solve => Experiment::YmhSolve,
                YmhAction::Bogomolny => Experiment::YmhBogomolny,
                YmhAction::Spectrum => Experiment::YmhSpectrum,
                YmhAction::ScanEpsilon => Experiment::YmhScanEpsilon,
            };
            run_named(&cfg, which)
        }
        Cmd::Pointlab { identity, n, samples, seed, out } => {
            let mut cfg = ExperimentConfig::default();
            cfg.apply_env()?;
            cfg.set("pointlab.n", &n.to_string())?;
            cfg.set("pointlab.samples", &samples.to_string())?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let which = match identity {
                PointIdentity::SphereGl => Experiment::PointlabSphereGl,
                PointIdentity::SphereYmh => Experiment::PointlabSphereYmh,
                PointIdentity::Cpn => Experiment::PointlabCpn,
            };
            let scratch = tempfile_dir(out.as_deref())?;
            cfg.output_dir = scratch.clone();
            let doc = compute(&cfg, which);
            if !doc.errors.is_empty() {
                return Err(Failure::Usage(doc.errors.join("; ")));
            }
            let summary_path = scratch.join(&doc.artifacts[0]);
            let summary: PointlabSummary = stab_core::io::read_json(&summary_path)?;
            println!("{}", serde_json::to_string_pretty(&summary).map_err(StabError::from)?);
            if out.is_some() {
                write_report(&doc, &scratch)?;
            } else {
                let _ = std::fs::remove_dir_all(&scratch);
            }
            if doc.all_pass() {
                Ok(())
            } else {
                Err(Failure::Metrics)
            }
        }
        Cmd::Fdcheck { config } => run_named(&load_config(&config)?, Experiment::Fdcheck),
        Cmd::Converge { experiment, levels, config } => {
            let cfg = config_or_default(config.as_deref())?;
            let which: Experiment = experiment.parse()?;
            let doc = convergence_study(&cfg, which, &levels)?;
            summarize(&doc, &cfg.output_dir.join(format!("{}.json", doc.experiment_id)))
        }
        Cmd::Run { experiment, config } => {
            let cfg = config_or_default(config.as_deref())?;
            run_named(&cfg, experiment.parse()?)
        }
    }
}

/// Directory for artifacts: the requested one, or a fresh private one.
fn tempfile_dir(out: Option<&Path>) -> Result<PathBuf, Failure> {
    match out {
        Some(p) => Ok(p.to_path_buf()),
        None => {
            let base = std::env::temp_dir().join(format!("stab-pointlab-{}", std::process::id()));
            std::fs::create_dir_all(&base).map_err(StabError::from)?;
            Ok(base)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Metrics) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
