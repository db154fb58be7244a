//! Integrates the normalized flow forward and backward from one metric and
//! writes both trajectories as CSV.
//!
//! cargo run --example flow -- 0.1,1,1,3 /tmp/traj

use std::path::PathBuf;

use rsf::flow::FlowKind;
use rsf::integrator::integrate;
use rsf::io::{export_trajectory, parse_metric, Format};
use rsf::{Direction, IntegratorConfig, ModelParams};

fn main() -> rsf::Result<()> {
    let mut args = std::env::args().skip(1);
    let p = ModelParams::new(1)?;
    let m = parse_metric(&args.next().unwrap_or_else(|| "0.1,1,1,3".into()), &p)?;
    let dir = PathBuf::from(args.next().unwrap_or_else(|| std::env::temp_dir().display().to_string()));
    let cfg = IntegratorConfig::default();
    for (name, d) in [("forward", Direction::Forward), ("backward", Direction::Backward)] {
        let traj = integrate(FlowKind::Normalized, &m, d, &p, &cfg)?;
        let path = dir.join(format!("rsf_{name}.csv"));
        export_trajectory(&traj, Format::Csv, &path)?;
        let last = traj.last();
        println!(
            "{name:>8}: {} at t = {:.6} after {} samples; final S = {:.6e}; wrote {}",
            traj.terminal.kind,
            traj.terminal.t_end,
            traj.samples.len(),
            last.diagnostics.scalar,
            path.display()
        );
    }
    Ok(())
}
