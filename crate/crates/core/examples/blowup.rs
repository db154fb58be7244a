//! Forward blow-up below the separatrix: x*S tends to 6 and the Ricci
//! eigenvalues of the rescaled metric to (2, 2, 2, 0).

use rsf::analysis::blowup_profile;
use rsf::flow::FlowKind;
use rsf::integrator::{integrate, monitor_series};
use rsf::{Direction, IntegratorConfig, MetricParams, ModelParams};

fn main() -> rsf::Result<()> {
    let p = ModelParams::new(1)?;
    let cfg = IntegratorConfig::default();
    for start in [[0.3, 0.3, 0.3], [0.2, 0.25, 0.3]] {
        let m = MetricParams::from_slice(start[0], start[1], start[2], &p)?;
        let traj = integrate(FlowKind::Normalized, &m, Direction::Forward, &p, &cfg)?;
        let prof = blowup_profile(&traj, &p)?;
        let xz = monitor_series(&traj, "x/z")?;
        println!("start {start:?}: {} at t = {:.9}", traj.terminal.kind, traj.terminal.t_end);
        println!("  x*S = {:.9}", prof.xs_limit);
        println!("  rescaled Ricci = {:?}", prof.rescaled_ricci);
        println!("  (x/z, y/z) = {:?}, x/z {:?}", prof.ratio_limits, xz.verdict);
        println!("  window samples = {}", prof.window_samples);
    }
    Ok(())
}
