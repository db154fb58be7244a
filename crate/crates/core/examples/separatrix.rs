//! Bisects for the boundary between round convergence and blow-up, on the
//! diagonal and off it.

use rsf::analysis::trace_separatrix;
use rsf::{IntegratorConfig, ModelParams};

fn main() -> rsf::Result<()> {
    let cfg = IntegratorConfig::default();
    for n in [1, 2] {
        let p = ModelParams::new(n)?;
        let c = p.jensen_slice_value();
        let res = trace_separatrix([0.75 * c; 3], [1.1; 3], &p, &cfg, 1e-10)?;
        println!("n = {n}: diagonal crossing {:.12} (Jensen {c:.12})", res.point[0]);
    }
    let p = ModelParams::new(1)?;
    let res = trace_separatrix([0.25, 0.3, 0.35], [1.0, 1.05, 1.1], &p, &cfg, 1e-10)?;
    println!(
        "off-diagonal: point {:?}, bracket {:.1e}\n  sides {} / {}\n  closest approach to Jensen {:.3e}",
        res.point, res.bracket_width, res.side_witnesses[0].kind, res.side_witnesses[1].kind, res.witness_distance
    );
    Ok(())
}
