//! A small sweep over ancient-form metrics (s, y/s), printed as CSV.
//! Set RSF_THREADS to cap the worker count.

use rsf::io::{portrait, write_portrait, Axis, Format, GridSpec, Spacing};
use rsf::{IntegratorConfig, ModelParams};

fn main() -> rsf::Result<()> {
    let p = ModelParams::new(1)?;
    let grid = GridSpec::new(vec![
        Axis::new("s", 0.5, 8.0, 5, Spacing::Log)?,
        Axis::new("ys", 0.25, 1.5, 6, Spacing::Lin)?,
    ])?;
    let rows = portrait(&grid, &p, &IntegratorConfig::default())?;
    write_portrait(&grid, &rows, Format::Csv, std::io::stdout().lock())
}
