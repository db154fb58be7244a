//! Ricci eigenvalues and scalar curvature at a few metrics.
//!
//! cargo run --example curvature -- 0.5,0.8,1.2,1

use rsf::geometry::{relative_volume, ricci_eigenvalues, scalar_curvature, traceless_ricci_norm_sq};
use rsf::io::parse_metric;
use rsf::{MetricParams, ModelParams};

fn main() -> rsf::Result<()> {
    let p = ModelParams::new(1)?;
    let mut metrics = vec![
        ("round", MetricParams::round()),
        ("jensen", MetricParams::jensen(&p)),
        ("berger", MetricParams::new(0.3, 1.0, 1.0, 1.0)?),
    ];
    if let Some(arg) = std::env::args().nth(1) {
        metrics.push(("argument", parse_metric(&arg, &p)?));
    }
    for (name, m) in metrics {
        let r = ricci_eigenvalues(&m, &p)?;
        println!(
            "{name:>8}  {:?}\n          r = ({:.6}, {:.6}, {:.6}, {:.6})  S = {:.6}  |Ric0|^2 = {:.3e}  vol = {:.6}",
            m.to_array(),
            r.r_i,
            r.r_j,
            r.r_k,
            r.r_h,
            scalar_curvature(&m, &p)?,
            traceless_ricci_norm_sq(&m, &p)?,
            relative_volume(&m, &p)?,
        );
    }
    Ok(())
}
