//! `sup_I |u| / ‖u‖_{L²(J)}` over solutions of `−u″ = λVu`, as `λ` grows.

use breathers::bounds::bound_scan;
use breathers::make_periodic;

fn main() -> breathers::Result<()> {
    let v = make_periodic(&[(0.5, 1.0), (0.5, 9.0)], 2.0)?;
    let s = bound_scan(&v, (-2.0, 2.0), (-1.0, 1.0), 1e4, 2000)?;
    for x in s.samples.iter().step_by(250) {
        println!("lambda {:9.1}  ratio {:.5}  angle {:.4}  reverse {:.4}", x.lambda, x.max_ratio, x.argmax_angle, x.reverse_ratio);
    }
    let (last, mid) = s.decade_maxima();
    println!("sup {:.5}; last decade {last:.5}, mid decade {mid:.5}; plateau {}", s.sup_ratio, s.plateau(1.05));
    Ok(())
}
