//! Bands, gaps and Floquet multipliers of the two-step potential `V = 1 | 9`, `X = 2`.

use breathers::linalg::C64;
use breathers::spectrum::band_scan;
use breathers::transfer::{floquet, monodromy};
use breathers::{make_periodic, Side};

fn main() -> breathers::Result<()> {
    let v = make_periodic(&[(0.5, 1.0), (0.5, 9.0)], 2.0)?;
    let b = band_scan(&v, Side::Plus, 100.0, None)?;
    println!("{:>12} {:>12}", "band lo", "band hi");
    for band in &b.bands {
        println!("{:12.6} {:12.6}", band.lo, band.hi);
    }

    // one point in each of the first three bands and gaps
    for (label, lam) in b.bands.iter().map(|x| ("band", x.mid())).zip(b.gaps.iter().map(|g| ("gap", g.mid()))).flat_map(|(a, g)| [a, g]).take(6) {
        let m = monodromy(&v, Side::Plus, C64::new(lam, 0.0));
        let f = floquet(&m, None);
        println!("{label:>4} lambda {lam:9.4}  tr {:+.6}  rho {:.6}  |rho| {:.6}", m.trace().re, f.rho, f.rho.norm());
    }
    Ok(())
}
