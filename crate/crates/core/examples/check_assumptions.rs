//! Assumption report for one potential of each class at `T = 4`.

use breathers::assumptions::{check_assumptions, CheckOptions, PeriodSpec};
use breathers::exact::{int, rat};
use breathers::{make_dislocation_exact, make_interface, make_periodic_exact, NonlinearityProfile};

fn main() -> breathers::Result<()> {
    let two = make_periodic_exact(&[(rat(1, 2), int(1)), (rat(1, 2), int(9))], &int(2))?;
    let other = make_periodic_exact(&[(rat(1, 2), int(1)), (rat(1, 2), int(25))], &int(2))?;
    let constant = make_periodic_exact(&[(int(1), int(1))], &int(1))?;
    let cases = [
        ("two-step", two.clone()),
        ("dislocation", make_dislocation_exact(&two, &int(4), &int(1))?),
        ("interface", make_interface(&two, &other)?),
        ("constant", constant),
    ];
    let gamma = NonlinearityProfile::bump(0.5, 0.5, 1.0)?;
    for (name, v) in &cases {
        let r = check_assumptions(v, Some(&gamma), &PeriodSpec::Exact(int(4)), &CheckOptions::default())?;
        println!(
            "{name:>12}: pass {:5}  A3 delta {:.4} ({:?})  A4 {}  class check {}  eigenvalues {}",
            r.pass,
            r.a3.delta,
            r.a3.certification,
            r.a4.pass,
            r.class_check.pass(),
            r.eigenvalues.len()
        );
    }
    Ok(())
}
