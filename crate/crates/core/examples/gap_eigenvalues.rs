//! Eigenvalues of a dislocation in the gaps, and their repetition in `√λ`.

use std::f64::consts::PI;

use breathers::assumptions::window_counts;
use breathers::spectrum::{gap_eigenvalues, joint_bands, GapSearch};
use breathers::{make_dislocation, make_periodic};

fn main() -> breathers::Result<()> {
    let base = make_periodic(&[(0.5, 1.0), (0.5, 9.0)], 2.0)?;
    // q0 = √4 · 1 = 2, so 4q0/T = 2 at T = 4
    let v = make_dislocation(&base, 4.0, 1.0)?;
    let omega = PI / 2.0;
    let bands = joint_bands(&v, (12.0 * omega).powi(2), None)?;
    let eigs = gap_eigenvalues(&v, &bands, GapSearch::default());
    println!("{:>14} {:>10} {:>10} {:>10}", "lambda", "|D|", "rho+", "rho-");
    for e in &eigs {
        println!("{:14.9} {:10.2e} {:10.6} {:10.6}", e.lambda, e.residual, e.rho_plus, e.rho_minus);
    }
    let lams: Vec<f64> = eigs.iter().map(|e| e.lambda).collect();
    println!("per 4*omega window of sqrt(lambda): {:?}", window_counts(&lams, omega, 3));
    Ok(())
}
