//! Uniform-in-λ comparison of `‖u‖_{L∞(I)}` and `‖u‖_{L²(J)}` for real solutions of
//! `−u″ = λVu`, evaluated cell by cell in closed form.

use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{Vec2, C64};
use crate::measure::cell_norm;
use crate::potential::PerturbedPeriodicPotential;
use crate::transfer::{cell_classical, propagate_classical};

const COARSE_ANGLES: usize = 32;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundSample {
    pub lambda: f64,
    pub max_ratio: f64,
    /// Angle of the maximizing initial data `(cos θ, κ sin θ)` at the left end of `I`.
    pub argmax_angle: f64,
    /// `min_θ |I|^{1/2}‖u‖_{L∞(I)} / ‖u‖_{L²(J)}`; the reverse inequality holds iff `≥ 1`.
    pub reverse_ratio: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundScan {
    pub interval_i: (f64, f64),
    pub interval_j: (f64, f64),
    pub samples: Vec<BoundSample>,
    pub sup_ratio: f64,
}

impl BoundScan {
    pub fn reverse_holds(&self) -> bool {
        self.samples.iter().all(|s| s.reverse_ratio >= 1.0 - 1e-12)
    }

    /// `(last-decade max, mid-decade max)` over `λ ∈ (Λ/10, Λ]` and `(Λ/100, Λ/10]`.
    pub fn decade_maxima(&self) -> (f64, f64) {
        let top = self.samples.iter().map(|s| s.lambda).fold(0.0, f64::max);
        let max_in = |lo: f64, hi: f64| {
            self.samples
                .iter()
                .filter(|s| s.lambda > lo && s.lambda <= hi)
                .map(|s| s.max_ratio)
                .fold(0.0, f64::max)
        };
        (max_in(top / 10.0, top), max_in(top / 100.0, top / 10.0))
    }

    pub fn plateau(&self, factor: f64) -> bool {
        let (last, mid) = self.decade_maxima();
        mid > 0.0 && last <= factor * mid
    }
}

/// `sup |u|` over a cell of value `a`, length `ℓ`, with data `(u, u′)` at its left end.
pub fn cell_sup(a: f64, ell: f64, lambda: f64, u: f64, du: f64) -> f64 {
    let k = (lambda * a).max(0.0).sqrt();
    let end = if k * ell < 1e-300 {
        u + du * ell
    } else {
        u * (k * ell).cos() + du / k * (k * ell).sin()
    };
    let mut m = u.abs().max(end.abs());
    if k > 0.0 {
        let b = du / k;
        // critical points of A cos(ks) + B sin(ks) sit at ks ≡ atan2(B, A) mod π
        let phi = b.atan2(u).rem_euclid(PI);
        if phi <= k * ell {
            m = m.max(u.hypot(b));
        }
    }
    m
}

/// Precomputed cell layout of `I` with the pieces lying in `J` flagged.
struct Layout {
    pieces: Vec<(f64, f64, bool)>,
}

impl Layout {
    fn new(pot: &PerturbedPeriodicPotential, i: (f64, f64), j: (f64, f64)) -> Self {
        let mut pieces = Vec::new();
        for p in pot.pieces(i.0, i.1) {
            let mut cuts = vec![p.start, p.start + p.length];
            for c in [j.0, j.1] {
                if c > p.start && c < p.start + p.length {
                    cuts.push(c);
                }
            }
            cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
            for w in cuts.windows(2) {
                let mid = 0.5 * (w[0] + w[1]);
                pieces.push((p.value, w[1] - w[0], mid >= j.0 && mid <= j.1));
            }
        }
        Layout { pieces }
    }

    /// `(sup_I |u|, ‖u‖²_{L²(J)})` for real data at the left end of `I`.
    fn evaluate(&self, lambda: f64, u0: f64, du0: f64) -> (f64, f64) {
        let lam = C64::new(lambda, 0.0);
        let mut state = Vec2::real(u0, du0);
        let (mut sup, mut l2) = (0.0f64, 0.0);
        for &(a, ell, in_j) in &self.pieces {
            let (u, du) = (state.0[0].re, state.0[1].re);
            sup = sup.max(cell_sup(a, ell, lambda, u, du));
            if in_j {
                l2 += cell_norm(a, ell, lambda, state).0 / a;
            }
            state = cell_classical(a, ell, lam).value.apply(&state);
        }
        (sup, l2)
    }
}

fn golden_max<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, iters: usize) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..iters {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    if fc > fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

fn sample(layout: &Layout, lambda: f64, i_len: f64, kappa: f64) -> BoundSample {
    let ratio_at = |theta: f64| -> (f64, f64) {
        let (sup, l2) = layout.evaluate(lambda, theta.cos(), kappa * theta.sin());
        (sup, l2.sqrt())
    };
    let mut best = (0.0, f64::NEG_INFINITY);
    let mut reverse = f64::INFINITY;
    for n in 0..COARSE_ANGLES {
        let theta = PI * n as f64 / COARSE_ANGLES as f64;
        let (sup, l2) = ratio_at(theta);
        let r = sup / l2;
        if r > best.1 {
            best = (theta, r);
        }
        reverse = reverse.min(i_len.sqrt() * sup / l2);
    }
    let h = PI / COARSE_ANGLES as f64;
    let (theta, r) = golden_max(|t| { let (s, l) = ratio_at(t); s / l }, best.0 - h, best.0 + h, 40);
    let (theta, r) = if r > best.1 { (theta, r) } else { best };
    BoundSample { lambda, max_ratio: r, argmax_angle: theta.rem_euclid(PI), reverse_ratio: reverse }
}

/// Worst-case ratio on `n_samples` equispaced `λ ∈ [0, λ_max]`.
pub fn bound_scan(
    pot: &PerturbedPeriodicPotential,
    i: (f64, f64),
    j: (f64, f64),
    lambda_max: f64,
    n_samples: usize,
) -> Result<BoundScan> {
    if !(j.1 > j.0) || !(i.1 > i.0) {
        return Err(Error::Domain("I and J need positive length".into()));
    }
    if j.0 < i.0 || j.1 > i.1 {
        return Err(Error::Domain(format!("J = [{}, {}] not inside I = [{}, {}]", j.0, j.1, i.0, i.1)));
    }
    if !(lambda_max >= 0.0) || n_samples == 0 {
        return Err(Error::Domain("need lambda_max >= 0 and at least one sample".into()));
    }
    let layout = Layout::new(pot, i, j);
    let a0 = pot.eval(i.0);
    let samples: Vec<BoundSample> = (0..n_samples)
        .into_par_iter()
        .map(|n| {
            let lambda = if n_samples == 1 { lambda_max } else { lambda_max * n as f64 / (n_samples - 1) as f64 };
            let kappa = (lambda * a0).sqrt().max(1.0);
            sample(&layout, lambda, i.1 - i.0, kappa)
        })
        .collect();
    let sup_ratio = samples.iter().map(|s| s.max_ratio).fold(0.0, f64::max);
    Ok(BoundScan { interval_i: i, interval_j: j, samples, sup_ratio })
}

/// Ratio for one explicit initial datum, by the same closed forms.
pub fn ratio_for_data(pot: &PerturbedPeriodicPotential, i: (f64, f64), j: (f64, f64), lambda: f64, u0: f64, du0: f64) -> f64 {
    let (sup, l2) = Layout::new(pot, i, j).evaluate(lambda, u0, du0);
    sup / l2.sqrt()
}

/// Dense-sampling reference for `sup_I |u|`, used as a check of [`cell_sup`].
pub fn sampled_sup(pot: &PerturbedPeriodicPotential, i: (f64, f64), lambda: f64, u0: f64, du0: f64, n: usize) -> f64 {
    (0..=n)
        .map(|m| {
            let x = i.0 + (i.1 - i.0) * m as f64 / n as f64;
            propagate_classical(pot, i.0, x, C64::new(lambda, 0.0), Vec2::real(u0, du0)).0[0].re.abs()
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::make_periodic;

    #[test]
    fn cell_sup_matches_sampling() {
        let v = make_periodic(&[(0.5, 1.0), (0.5, 9.0)], 2.0).unwrap();
        for (lam, u, du) in [(0.0, 1.0, -0.3), (3.7, 0.2, 1.0), (400.0, -1.0, 7.0)] {
            let (s, _) = Layout::new(&v, (0.0, 3.0), (0.0, 3.0)).evaluate(lam, u, du);
            let r = sampled_sup(&v, (0.0, 3.0), lam, u, du, 20000);
            assert!(s >= r - 1e-12 && s <= r * (1.0 + 1e-6), "{s} {r}");
        }
    }

    #[test]
    fn free_cosine_ratio() {
        // u = cos(kx) on I = J = [0, 2π] with k integer: sup 1, L² = √π
        let v = make_periodic(&[(1.0, 1.0)], 1.0).unwrap();
        let r = ratio_for_data(&v, (0.0, 2.0 * PI), (0.0, 2.0 * PI), 49.0, 1.0, 0.0);
        assert!((r - 1.0 / PI.sqrt()).abs() < 1e-12);
        let scan = bound_scan(&v, (0.0, 2.0 * PI), (0.0, 2.0 * PI), 2500.0, 5).unwrap();
        // sup over data of a sinusoid of period ≪ |J|: √(2/|J|)(1 + o(1))
        let last = scan.samples.last().unwrap().max_ratio;
        assert!((last / (2.0 / (2.0 * PI)).sqrt() - 1.0).abs() < 0.02, "{last}");
    }

    #[test]
    fn enlarging_j_lowers_ratio() {
        let v = make_periodic(&[(0.5, 1.0), (0.5, 9.0)], 2.0).unwrap();
        for lam in [0.5, 20.0, 300.0] {
            let l = Layout::new(&v, (0.0, 4.0), (1.0, 2.0));
            let big = Layout::new(&v, (0.0, 4.0), (0.5, 3.0));
            let k = (lam * 1.0f64).sqrt().max(1.0);
            assert!(sample(&big, lam, 4.0, k).max_ratio <= sample(&l, lam, 4.0, k).max_ratio + 1e-12);
        }
    }

    #[test]
    fn degenerate_j_rejected() {
        let v = make_periodic(&[(1.0, 1.0)], 1.0).unwrap();
        assert!(bound_scan(&v, (0.0, 1.0), (0.5, 0.5), 10.0, 3).is_err());
    }
}

