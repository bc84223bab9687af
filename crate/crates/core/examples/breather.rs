//! Ground-state breather of `V u_tt − u_xx = Γ u³` for the two-step potential at `T = 4/3`.

use std::f64::consts::PI;

use breathers::breather::{build_basis_with_cut, default_cut, default_grid, default_radius, ground_state, SolveOptions};
use breathers::{make_periodic, NonlinearityProfile};

fn main() -> breathers::Result<()> {
    let v = make_periodic(&[(0.5, 1.0), (0.5, 9.0)], 2.0)?;
    let gamma = NonlinearityProfile::bump(0.5, 0.5, 1.0)?;
    let (omega, k_max) = (1.5 * PI, 5);
    let r = default_radius(&v);
    let cut = default_cut(k_max, omega);
    let basis = build_basis_with_cut(&v, r, default_grid(&v, r, cut), k_max, omega, cut)?;
    println!("basis: {} modes on {} nodes, R = {r}", basis.n_modes(), basis.n_nodes());

    let (u, rep) = ground_state(&basis, &gamma, 3.0, &SolveOptions::default())?;
    println!("converged {}  J {:.8}  ||u||_H {:.6}", rep.converged, rep.energy.j, rep.norm_h);
    println!("Nehari {:?}", rep.nehari);
    println!("PDE residual {:.3e}  boundary mass {:.2e}", rep.pde.relative, rep.boundary_mass);

    // u(x, 0) near the support of Γ
    let u = u.phase_normalized();
    let nodes: Vec<usize> = (0..basis.n_nodes()).filter(|&j| basis.nodes[j].abs() <= 2.0).step_by(40).collect();
    let rows = u.sample(&basis, &nodes, &[0.0]);
    for (j, row) in nodes.iter().zip(&rows) {
        println!("x {:+.3}  u {:+.6}", basis.nodes[*j], row[0]);
    }
    Ok(())
}
