//! Breather ground states of `V u_tt − u_xx = Γ|u|^{p−1}u`: Galerkin discretization in a
//! spatial eigenbasis times odd temporal modes, the Nehari–Pankov reduction, and an
//! independent PDE residual.

pub mod basis;
mod functional;
pub mod nehari;
pub mod residual;
pub mod solver;

pub use basis::{
    build_basis, build_basis_with_cut, classification_cut, default_cut, default_grid, default_radius, BasisSummary,
    GalerkinBasis,
};
pub use functional::{evaluate_j, gradient_j, pairing, BreatherField, Energy, Problem};
pub use nehari::{nehari_project, NehariOptions, NehariPoint, NehariResiduals};
pub use residual::{boundary_mass_fraction, pde_residual, PdeResidual};
pub use solver::{
    deterministic_start, embed, ground_state, ground_state_antiperiodic, random_start, solve_modes, SolveOptions,
    SolveReport, StartSummary,
};

#[cfg(test)]
pub(crate) mod testing {
    use super::*;
    use crate::potential::{make_periodic, NonlinearityProfile};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    /// Two-step `(1, 9)`, `X = 2`, on `[−6.5, 6.5]` at `T = 4`.
    pub fn small_basis(k_max: u64) -> GalerkinBasis {
        let v = make_periodic(&[(0.5, 1.0), (0.5, 9.0)], 2.0).unwrap();
        let omega = PI / 2.0;
        let cut = default_cut(k_max, omega);
        build_basis_with_cut(&v, 6.5, default_grid(&v, 6.5, cut), k_max, omega, cut).unwrap()
    }

    pub fn bump() -> NonlinearityProfile {
        NonlinearityProfile::bump(0.5, 0.5, 1.0).unwrap()
    }

    /// Random field with coefficients decaying in `m`.
    pub fn random_field(problem: &Problem, seed: u64, amp: f64) -> BreatherField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut f = BreatherField::zeros(&problem.ks, problem.n_space());
        for (i, c) in f.coeffs.iter_mut().enumerate() {
            let m = (i % problem.n_space()) as f64;
            let s = amp / (1.0 + 0.1 * m);
            *c = crate::linalg::C64::new(rng.gen_range(-s..s), rng.gen_range(-s..s));
        }
        f
    }
}
