//! Matrix density on the bands, point masses, and a Parseval check for a Gaussian.

use breathers::measure::{parseval, point_mass, DensityContext};
use breathers::spectrum::{gap_eigenvalues, joint_bands, GapSearch};
use breathers::{make_dislocation, make_periodic};

fn main() -> breathers::Result<()> {
    let two = make_periodic(&[(0.5, 1.0), (0.5, 9.0)], 2.0)?;
    let ctx = DensityContext::new(&two);
    for lam in [1.0, 4.0, 10.0, 5.0] {
        match ctx.density(lam) {
            Ok(d) => println!("M({lam}) = [[{:.5e}, {:.5e}], [., {:.5e}]]", d.m[0][0].re, d.m[0][1], d.m[1][1].re),
            Err(e) => println!("M({lam}): {e}"),
        }
    }

    let disl = make_dislocation(&two, 4.0, 1.0)?;
    let bands = joint_bands(&disl, 60.0, None)?;
    for ev in gap_eigenvalues(&disl, &bands, GapSearch::default()) {
        let pm = point_mass(&disl, &ev);
        println!("eigenvalue {:.8}: ||phi0||^2 {:.6}, weight {:?}", ev.lambda, pm.norm2, pm.weight_matrix);
    }

    let f = |x: f64| (-((x - 1.5) / 0.1).powi(2) / 2.0).exp();
    let r = parseval(&two, f, (1.05, 1.95), 2000.0, 48)?;
    println!(
        "||Tf||^2 = {:.10} (bands {:.10}, points {:.1e})  ||f||^2 = {:.10}  rel {:.2e}",
        r.measure_norm, r.band_part, r.point_part, r.function_norm, r.relative_error
    );
    Ok(())
}
