//! Command-line front end shared by the `rsf` binary and the tests.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::analysis::{classify_ancient, trace_separatrix, verify_ancient_numerically, DEFAULT_ANCIENT_TOL};
use crate::error::{Error, Result};
use crate::flow::FlowKind;
use crate::geometry::{
    relative_volume, ricci_eigenvalues, scalar_curvature, traceless_ricci_norm_sq, ModelParams,
};
use crate::integrator::{integrate, Direction};
use crate::io::{parse_metric, portrait, write_portrait, write_trajectory, Axis, Format, GridSpec, RunConfig};
use crate::verify::run_verify;

#[derive(Debug, Parser)]
#[command(name = "rsf", version, about = "Ricci flow of Sp(n+1)-invariant metrics on S^(4n+3)")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Quaternionic dimension; the sphere is S^(4n+3).
    #[arg(long, global = true)]
    pub n: Option<u32>,
    #[arg(long, global = true)]
    pub rel_tol: Option<f64>,
    #[arg(long, global = true)]
    pub abs_tol: Option<f64>,
    #[arg(long, global = true)]
    pub t_horizon: Option<f64>,
    /// Seed for the sampled suites of `verify`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// csv or json.
    #[arg(long, global = true)]
    pub format: Option<Format>,
    /// TOML file with defaults; flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Ricci eigenvalues, scalar curvature and volume of a metric.
    Curvature {
        /// "x,y,z,s" or "slice:x,y,z".
        #[arg(allow_hyphen_values = true)]
        metric: String,
    },
    /// Integrate a flow and write the trajectory.
    Flow {
        #[arg(allow_hyphen_values = true)]
        metric: String,
        /// normalized or unnormalized.
        #[arg(long, default_value = "normalized")]
        flow: FlowKind,
        #[arg(long)]
        backward: bool,
    },
    /// Classify grid points forward and backward.
    Portrait {
        /// name:min:max:count[:lin|log]; axes (s, ys), (x, y, z) or (x, y).
        #[arg(long = "axis", required = true)]
        axes: Vec<Axis>,
    },
    /// Bisect between two slice points for the round / blow-up boundary.
    Separatrix {
        /// "x,y,z" on the volume-one slice.
        a: String,
        b: String,
        #[arg(long, default_value_t = 1e-10)]
        bracket_tol: f64,
    },
    /// Decide whether the solution through a metric is ancient.
    Classify {
        #[arg(allow_hyphen_values = true)]
        metric: String,
        #[arg(long, default_value_t = DEFAULT_ANCIENT_TOL)]
        tol: f64,
        /// Also integrate backward and compare.
        #[arg(long)]
        numerical: bool,
    },
    /// Run every invariant suite.
    Verify,
}

impl GlobalArgs {
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut rc = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(n) = self.n {
            rc.n = n;
        }
        if let Some(v) = self.rel_tol {
            rc.integrator.rel_tol = v;
        }
        if let Some(v) = self.abs_tol {
            rc.integrator.abs_tol = v;
        }
        if let Some(v) = self.t_horizon {
            rc.integrator.t_horizon = v;
        }
        if let Some(v) = self.seed {
            rc.seed = v;
        }
        if let Some(v) = &self.out {
            rc.out = Some(v.clone());
        }
        if let Some(v) = self.format {
            rc.format = v;
        }
        rc.integrator.validate()?;
        Ok(rc)
    }
}

fn parse_slice_point(text: &str) -> Result<[f64; 3]> {
    let body = text.trim().strip_prefix("slice:").unwrap_or(text.trim());
    let vals: Vec<f64> = body
        .split(',')
        .map(|t| {
            t.trim()
                .parse()
                .map_err(|e: std::num::ParseFloatError| Error::parse(t.trim(), e.to_string()))
        })
        .collect::<Result<_>>()?;
    match vals.as_slice() {
        [x, y, z] => Ok([*x, *y, *z]),
        _ => Err(Error::parse(text, "expected x,y,z")),
    }
}

fn emit(rc: &RunConfig, write: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    match &rc.out {
        Some(path) => {
            let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
            write(&mut f)?;
            f.flush()?;
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            write(&mut lock)?;
        }
    }
    Ok(())
}

fn print_json(value: &serde_json::Value) -> Result<()> {
    let mut out = std::io::stdout().lock();
    writeln!(out, "{}", serde_json::to_string_pretty(value)?)?;
    Ok(())
}

/// Runs a parsed command and returns the process exit code.
pub fn run(cli: Cli) -> Result<i32> {
    let rc = cli.global.resolve()?;
    let p: ModelParams = rc.model()?;
    let cfg = &rc.integrator;
    match cli.command {
        Command::Curvature { metric } => {
            let m = parse_metric(&metric, &p)?;
            let r = ricci_eigenvalues(&m, &p)?;
            print_json(&json!({
                "metric": m,
                "n": p.n(),
                "r_i": r.r_i,
                "r_j": r.r_j,
                "r_k": r.r_k,
                "r_h": r.r_h,
                "S": scalar_curvature(&m, &p)?,
                "ric0_sq": traceless_ricci_norm_sq(&m, &p)?,
                "vol": relative_volume(&m, &p)?,
            }))?;
            Ok(0)
        }
        Command::Flow { metric, flow, backward } => {
            let m = parse_metric(&metric, &p)?;
            let dir = if backward { Direction::Backward } else { Direction::Forward };
            let traj = integrate(flow, &m, dir, &p, cfg)?;
            emit(&rc, |w| write_trajectory(&traj, rc.format, w))?;
            let t = &traj.terminal;
            eprintln!(
                "terminal: {} t_end={} samples={} {}",
                t.kind,
                t.t_end,
                traj.samples.len(),
                t.detail
            );
            Ok(0)
        }
        Command::Portrait { axes } => {
            let grid = GridSpec::new(axes)?;
            let rows = portrait(&grid, &p, cfg)?;
            emit(&rc, |w| write_portrait(&grid, &rows, rc.format, w))?;
            let failed = rows.iter().filter(|r| r.error.is_some()).count();
            eprintln!("portrait: {} rows, {} with errors", rows.len(), failed);
            Ok(0)
        }
        Command::Separatrix { a, b, bracket_tol } => {
            let a = parse_slice_point(&a)?;
            let b = parse_slice_point(&b)?;
            let res = trace_separatrix(a, b, &p, cfg, bracket_tol)?;
            print_json(&serde_json::to_value(&res)?)?;
            Ok(0)
        }
        Command::Classify { metric, tol, numerical } => {
            let m = parse_metric(&metric, &p)?;
            let verdict = classify_ancient(&m, tol)?;
            if numerical {
                let report = verify_ancient_numerically(&m, &p, cfg)?;
                print_json(&json!({ "verdict": verdict, "numerical": report }))?;
            } else {
                print_json(&json!({ "verdict": verdict }))?;
            }
            Ok(0)
        }
        Command::Verify => {
            let report = run_verify(&p, rc.seed);
            let text = report.render();
            emit(&rc, |w| Ok(w.write_all(text.as_bytes())?))?;
            Ok(if report.passed() { 0 } else { 1 })
        }
    }
}
