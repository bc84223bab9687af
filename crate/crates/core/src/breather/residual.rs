//! Residual of `V u_tt − u_xx − Γ|u|^{p−1}u` on a grid refined twice in `x` and `t`,
//! with each `φ_m` continued inside grid segments by the exact local solution.

use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

use super::basis::GalerkinBasis;
use super::functional::BreatherField;
use crate::linalg::C64;
use crate::potential::NonlinearityProfile;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct PdeResidual {
    /// `‖R‖_{L²(x,t)}`.
    pub absolute: f64,
    /// `‖Γ|u|^{p−1}u‖_{L²(x,t)}`.
    pub reference: f64,
    /// `absolute / reference`, or `0` for the zero field.
    pub relative: f64,
}

/// At `x_j + θh`, `θ ∈ [0, 1]`, with the value of `V` on segment `j`: `L_k(x) = V Σ_m c_{k,m}(λ_m − k²ω²)φ_m(x)` and `û_k(x)`.
fn point_sums(basis: &GalerkinBasis, field: &BreatherField, j: usize, theta: f64) -> (Vec<C64>, Vec<C64>) {
    let mm = field.n_space;
    let vseg = basis.segment_values[j];
    let phis: Vec<f64> = (0..mm)
        .map(|m| match theta {
            0.0 => basis.modes[m][j],
            1.0 => basis.modes[m][j + 1],
            t => basis.interpolate(m, j, t),
        })
        .collect();
    let mut lin = Vec::with_capacity(field.ks.len());
    let mut val = Vec::with_capacity(field.ks.len());
    for (ik, &k) in field.ks.iter().enumerate() {
        let nu = (k as f64 * basis.omega).powi(2);
        let (mut l, mut u) = (C64::new(0.0, 0.0), C64::new(0.0, 0.0));
        for m in 0..mm {
            let c = field.coeffs[ik * mm + m];
            l += c * ((basis.lambdas[m] - nu) * phis[m]);
            u += c * phis[m];
        }
        lin.push(l * vseg);
        val.push(u);
    }
    (lin, val)
}

/// `(∫⟨R²⟩_t, ∫⟨(Γ|u|^{p−1}u)²⟩_t)` contributions at one point.
fn point_terms(field: &BreatherField, lin: &[C64], val: &[C64], gamma: f64, p: f64, nt: usize) -> (f64, f64) {
    if gamma == 0.0 {
        // Parseval over the odd modes ±k
        return (2.0 * lin.iter().map(|l| l.norm_sqr()).sum::<f64>(), 0.0);
    }
    let (mut r2, mut n2) = (0.0, 0.0);
    for n in 0..nt {
        let t = 2.0 * PI * n as f64 / nt as f64;
        let (mut l, mut u) = (0.0, 0.0);
        for (ik, &k) in field.ks.iter().enumerate() {
            let e = C64::from_polar(1.0, k as f64 * t);
            l += 2.0 * (lin[ik] * e).re;
            u += 2.0 * (val[ik] * e).re;
        }
        let nl = gamma * u.abs().powf(p - 1.0) * u;
        r2 += (l - nl).powi(2);
        n2 += nl * nl;
    }
    (r2 / nt as f64, n2 / nt as f64)
}

/// Relative `L²(x,t)` residual by Simpson's rule on every grid segment and `2(4K+4)`
/// time samples.
pub fn pde_residual(basis: &GalerkinBasis, field: &BreatherField, gamma: &NonlinearityProfile, p: f64) -> PdeResidual {
    let kmax = field.ks.iter().copied().max().unwrap_or(1) as usize;
    let nt = 2 * (4 * kmax + 4);
    let segments = basis.nodes.len() - 1;
    let parts: Vec<(f64, f64)> = (0..segments)
        .into_par_iter()
        .map(|j| {
            let mut acc = (0.0, 0.0);
            for (theta, w) in [(0.0, 1.0), (0.5, 4.0), (1.0, 1.0)] {
                let x = basis.nodes[j] + theta * basis.h;
                let (lin, val) = point_sums(basis, field, j, theta);
                let (r2, n2) = point_terms(field, &lin, &val, gamma.eval(x), p, nt);
                acc.0 += w * r2;
                acc.1 += w * n2;
            }
            (acc.0 * basis.h / 6.0, acc.1 * basis.h / 6.0)
        })
        .collect();
    let (r2, n2) = parts.iter().fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    let (absolute, reference) = (r2.sqrt(), n2.sqrt());
    let relative = if reference > 0.0 { absolute / reference } else { 0.0 };
    PdeResidual { absolute, reference, relative }
}

/// Share of `Σ_k ∫V|û_k|²` in `|x| ≥ R − X`.
pub fn boundary_mass_fraction(basis: &GalerkinBasis, field: &BreatherField) -> f64 {
    let mm = field.n_space;
    let (mut outer, mut total) = (0.0, 0.0);
    for (j, &x) in basis.nodes.iter().enumerate() {
        let mut m2 = 0.0;
        for ik in 0..field.ks.len() {
            let mut u = C64::new(0.0, 0.0);
            for m in 0..mm {
                u += field.coeffs[ik * mm + m] * basis.modes[m][j];
            }
            m2 += 2.0 * u.norm_sqr();
        }
        let w = basis.h * basis.mass[j] * m2;
        total += w;
        if x.abs() >= basis.r - basis.tail_period {
            outer += w;
        }
    }
    if total > 0.0 {
        outer / total
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::breather::testing::{bump, random_field, small_basis};
    use crate::breather::Problem;

    #[test]
    fn zero_field_has_zero_residual() {
        let b = small_basis(3);
        let f = BreatherField::zeros(&[1, 3], b.n_modes());
        let r = pde_residual(&b, &f, &bump(), 3.0);
        assert_eq!((r.absolute, r.relative), (0.0, 0.0));
    }

    #[test]
    fn relative_residual_is_scale_covariant() {
        // (s u, Γ/s^{p−1}) has the same relative residual as (u, Γ)
        let b = small_basis(3);
        let g = bump();
        let pr = Problem::new(&b, &g, 3.0, &[1, 3]).unwrap();
        let f = random_field(&pr, 4, 0.3);
        let s: f64 = 2.5;
        let g2 = NonlinearityProfile::bump(0.5, 0.5, 1.0 / s.powi(2)).unwrap();
        let a = pde_residual(&b, &f, &g, 3.0);
        let c = pde_residual(&b, &f.scaled(s), &g2, 3.0);
        assert!((a.relative - c.relative).abs() < 1e-12 * a.relative);
        assert!((c.absolute - s * a.absolute).abs() < 1e-12 * c.absolute);
    }

    #[test]
    fn linear_part_by_parseval_off_support() {
        // with Γ ≡ 0 nowhere, the residual is the linear part; Simpson of |Σ c d V φ|² against
        // the same sum computed from dense time samples
        let b = small_basis(1);
        let zero = NonlinearityProfile::bump(100.0, 0.5, 1.0).unwrap();
        let pr = Problem::new(&b, &bump(), 3.0, &[1]).unwrap();
        let mut f = BreatherField::zeros(&[1], b.n_modes());
        f.coeffs[2] = C64::new(0.3, 0.1);
        let r = pde_residual(&b, &f, &zero, 3.0);
        // one mode: R = 2 Re(c d V φ e^{it}), ‖R‖² = 2|c d|² ∫V²φ²
        let d = pr.d[2];
        let integral: f64 = (0..b.nodes.len() - 1)
            .map(|j| {
                let v = b.segment_values[j];
                let q = |t: f64| (v * b.interpolate(2, j, t)).powi(2);
                b.h / 6.0 * (q(0.0) + 4.0 * q(0.5) + q(1.0))
            })
            .sum();
        let expected = (2.0 * f.coeffs[2].norm_sqr() * d * d * integral).sqrt();
        assert!((r.absolute - expected).abs() < 1e-12 * expected);
    }
}
