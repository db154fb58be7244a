//! The two Einstein metrics on the volume-one slice and the spectra of the
//! linearized flow there, closed form next to finite differences.

use rsf::flow::{fixed_points, linearization, slice_field};
use rsf::ModelParams;

fn main() -> rsf::Result<()> {
    for n in 1..=4 {
        let p = ModelParams::new(n)?;
        println!("n = {n}");
        for fp in fixed_points(&p) {
            let [x, y, z] = fp.slice_point;
            let f = slice_field(x, y, z, &p)?;
            let lin = linearization(fp.slice_point, &p, None)?;
            let closed: Vec<String> =
                fp.eigenvalues.iter().map(|e| format!("{:.9} (x{})", e.value, e.multiplicity)).collect();
            let fd: Vec<String> = lin.eigenvalues.iter().map(|(re, _)| format!("{re:.9}")).collect();
            println!(
                "  {:?} at {:.9}: |field| = {:.1e}\n    closed form {}\n    finite diff {}",
                fp.name,
                x,
                (f[0] * f[0] + f[1] * f[1] + f[2] * f[2]).sqrt(),
                closed.join(", "),
                fd.join(", ")
            );
        }
    }
    Ok(())
}
