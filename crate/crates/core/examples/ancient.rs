//! The ancient-solution criterion next to backward integration.

use rsf::analysis::{classify_ancient, verify_ancient_numerically, ys_limit_candidates, DEFAULT_ANCIENT_TOL};
use rsf::{IntegratorConfig, MetricParams, ModelParams};

fn main() -> rsf::Result<()> {
    let p = ModelParams::new(1)?;
    let cfg = IntegratorConfig::default();
    println!("possible backward limits of y/s: {:?}", ys_limit_candidates(&p));
    for g in [[0.1, 1.0, 1.0, 3.0], [0.1, 1.0, 1.0, 1.0], [0.5, 0.8, 1.2, 1.0], [0.5, 2.0, 2.0, 1.0], [1.0, 1.0, 1.0, 5.0]] {
        let m = MetricParams::from_array(g);
        let v = classify_ancient(&m, DEFAULT_ANCIENT_TOL)?;
        let rep = verify_ancient_numerically(&m, &p, &cfg)?;
        println!(
            "{g:?}: {:?} -> ancient = {}; backward {} at t = {:.4}, min S = {:.4e}, agree = {}",
            v.reason, v.ancient, rep.backward_terminal.kind, rep.backward_terminal.t_end, rep.min_scalar, rep.verdict_match
        );
    }
    Ok(())
}
