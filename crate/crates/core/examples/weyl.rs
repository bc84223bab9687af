//! Transfer matrices and Weyl functions `m±(λ)` off the real axis.

use breathers::linalg::C64;
use breathers::spectrum::weyl_m;
use breathers::transfer::{monodromy, propagate_classical};
use breathers::{make_dislocation, make_periodic, Side};

fn main() -> breathers::Result<()> {
    let free = make_periodic(&[(1.0, 1.0)], 1.0)?;
    let v = make_dislocation(&make_periodic(&[(0.5, 1.0), (0.5, 9.0)], 2.0)?, 4.0, 1.0)?;

    for lam in [C64::new(2.0, 0.5), C64::new(30.0, 1.0), C64::new(-4.0, 0.1)] {
        let mp = weyl_m(&free, Side::Plus, lam)?;
        println!("free  lambda {lam:.2}: m+ {mp:.6}  i*sqrt(lambda) {:.6}", C64::i() * lam.sqrt());
        let (p, m) = (weyl_m(&v, Side::Plus, lam)?, weyl_m(&v, Side::Minus, lam)?);
        println!("disl. lambda {lam:.2}: m+ {p:.6}  m- {m:.6}");
    }

    // unimodularity and the solution Ψ₂ carried across the insert
    let lam = C64::new(12.0, 0.0);
    let w = monodromy(&v, Side::Plus, lam).weighted();
    println!("det P+(12) = {:.3e}", w.det());
    for x in [-1.0, -0.5, 0.0, 0.5, 1.0] {
        let s = propagate_classical(&v, 0.0, x, lam, breathers::linalg::Vec2::real(0.0, 1.0));
        println!("psi2({x:+.1}) = {:+.6}", s.0[0].re);
    }
    Ok(())
}
