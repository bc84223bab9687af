//! Cell propagators, propagation `P(y, x; λ)`, monodromy matrices `P±(λ)` and Floquet data.
//!
//! Products are formed in classical coordinates `(u, u′)`, where every cell matrix is an
//! entire function of `λ`, paired with its exact `λ`-derivative. Weighted coordinates
//! `(√λ u, u′)` are obtained by the similarity `diag(√λ, 1)`.

use crate::linalg::{sqrt_principal, Dual, Mat2, Vec2, C64, ONE, ZERO};
use crate::potential::{PerturbedPeriodicPotential, Side};

/// `||tr| − 2|` below this marks a band edge (member of `S±`).
pub const SINGULAR_TOL: f64 = 1e-12;

/// `(cos√w, sin√w/√w, (√w cos√w − sin√w)/w^{3/2})`, all entire in `w`.
pub fn entire_functions(w: C64) -> (C64, C64, C64) {
    if w.norm() < 1.0 {
        // Taylor series; terms fall below 1e-17 well before n = 12
        let mut c = ZERO;
        let mut s = ZERO;
        let mut g = ZERO;
        let mut pow = ONE; // (−w)^n
        let mut fact_even = 1.0; // (2n)!
        for n in 0..14 {
            let fact_odd = fact_even * (2 * n + 1) as f64; // (2n+1)!
            c += pow / fact_even;
            s += pow / fact_odd;
            if n >= 1 {
                g += pow * (2 * n) as f64 / fact_odd;
            }
            pow *= -w;
            fact_even = fact_odd * (2 * n + 2) as f64;
        }
        // g accumulates Σ 2n (−w)^n/(2n+1)! = w·g(w)
        let g = if w == ZERO { C64::new(-1.0 / 3.0, 0.0) } else { g / w };
        (c, s, g)
    } else {
        let r = w.sqrt();
        let (sn, cs) = (r.sin(), r.cos());
        (cs, sn / r, (r * cs - sn) / (w * r))
    }
}

/// Classical cell matrix `(u, u′)(ℓ) = U (u, u′)(0)` for `−u″ = λ a u`, with `dU/dλ`.
///
/// A negative `ell` propagates backwards.
pub fn cell_classical(a: f64, ell: f64, lambda: C64) -> Dual {
    let q2 = a * ell * ell;
    let (c, s, g) = entire_functions(lambda * q2);
    let ls = s * ell;
    let value = Mat2::new(c, ls, -lambda * a * ls, c);
    let dc = -s * (0.5 * q2);
    let dls = g * (0.5 * ell * q2);
    let deriv = Mat2::new(dc, dls, -(ls * a) - lambda * a * dls, dc);
    Dual { value, deriv }
}

/// Transfer matrix in weighted coordinates `(√λ u, u′)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeightedMatrix {
    pub entries: Mat2,
    pub lambda: C64,
}

impl WeightedMatrix {
    pub fn det(&self) -> C64 {
        self.entries.det()
    }

    pub fn trace(&self) -> C64 {
        self.entries.trace()
    }
}

/// `diag(√λ, 1) · U · diag(√λ, 1)⁻¹`; the lower-left entry is zero at `λ = 0`.
pub fn to_weighted(u: &Mat2, lambda: C64) -> WeightedMatrix {
    let r = sqrt_principal(lambda);
    let c = if r == ZERO { ZERO } else { u.c / r };
    WeightedMatrix { entries: Mat2::new(u.a, u.b * r, c, u.d), lambda }
}

/// Weighted state `(√λ u, u′)` from classical `(u, u′)`.
pub fn weight_state(v: &Vec2, lambda: C64) -> Vec2 {
    Vec2::new(v.0[0] * sqrt_principal(lambda), v.0[1])
}

/// Closed-form weighted cell propagator
/// `[[cos(√λ q), sin(√λ q)/√a], [−√a sin(√λ q), cos(√λ q)]]`, `q = √a ℓ`.
pub fn cell_matrix(a: f64, ell: f64, lambda: C64) -> WeightedMatrix {
    let (c, s, _) = entire_functions(lambda * (a * ell * ell));
    let r = sqrt_principal(lambda);
    let rs = r * s * ell;
    WeightedMatrix { entries: Mat2::new(c, rs, -rs * a, c), lambda }
}

/// Product of forward cells `(value, length)`, the first cell acting first.
pub fn chain(cells: &[(f64, f64)], lambda: C64) -> Dual {
    cells.iter().fold(Dual::identity(), |acc, &(a, l)| cell_classical(a, l, lambda) * acc)
}

/// Classical propagator `P(x1, x0; λ)` with its `λ`-derivative.
pub fn propagator(pot: &PerturbedPeriodicPotential, x0: f64, x1: f64, lambda: C64) -> Dual {
    if x1 == x0 {
        return Dual::identity();
    }
    let (lo, hi) = if x0 < x1 { (x0, x1) } else { (x1, x0) };
    let cells: Vec<(f64, f64)> = pot.pieces(lo, hi).iter().map(|p| (p.value, p.length)).collect();
    let p = chain(&cells, lambda);
    if x0 < x1 {
        p
    } else {
        p.inverse_unimodular()
    }
}

/// Propagates weighted data `(√λ u, u′)` from `x0` to `x1`.
pub fn propagate(pot: &PerturbedPeriodicPotential, x0: f64, x1: f64, lambda: C64, state: Vec2) -> Vec2 {
    let p = propagator(pot, x0, x1, lambda).value;
    to_weighted(&p, lambda).entries.apply(&state)
}

/// Propagates classical data `(u, u′)` from `x0` to `x1`.
pub fn propagate_classical(pot: &PerturbedPeriodicPotential, x0: f64, x1: f64, lambda: C64, state: Vec2) -> Vec2 {
    propagator(pot, x0, x1, lambda).value.apply(&state)
}

/// Cell lists needed to form `P±(λ)` repeatedly for one side.
#[derive(Clone, Debug)]
pub struct SideTransfer {
    side: Side,
    /// Forward cells between `0` and `R±`.
    conj: Vec<(f64, f64)>,
    /// Forward cells of the tail period adjacent to `R±`.
    period: Vec<(f64, f64)>,
}

impl SideTransfer {
    pub fn new(pot: &PerturbedPeriodicPotential, side: Side) -> Self {
        let tail = pot.tail(side);
        let period = tail.values().iter().cloned().zip(tail.lengths()).collect();
        let conj = match side {
            Side::Plus => pot.pieces(0.0_f64.min(pot.r_plus()), pot.r_plus()),
            Side::Minus => pot.pieces(pot.r_minus(), 0.0_f64.max(pot.r_minus())),
        }
        .iter()
        .map(|p| (p.value, p.length))
        .collect();
        SideTransfer { side, conj, period }
    }

    pub fn side(&self) -> Side {
        self.side
    }

    /// Forward cells `(value, length)` of one tail period.
    pub fn period_cells(&self) -> &[(f64, f64)] {
        &self.period
    }

    /// Sum of optical lengths over one period.
    pub fn optical_period(&self) -> f64 {
        self.period.iter().map(|(a, l)| a.sqrt() * l).sum()
    }

    /// One-period map at the anchor: `P(R⁺+X⁺, R⁺)` or `P(R⁻−X⁻, R⁻)`.
    pub fn local(&self, lambda: C64) -> Dual {
        let p = chain(&self.period, lambda);
        match self.side {
            Side::Plus => p,
            Side::Minus => p.inverse_unimodular(),
        }
    }

    /// Classical propagator from `0` to the anchor `R±`.
    pub fn to_anchor(&self, lambda: C64) -> Dual {
        let c = chain(&self.conj, lambda);
        match self.side {
            Side::Plus => c,
            Side::Minus => c.inverse_unimodular(),
        }
    }

    /// Monodromy conjugated to base point `0`.
    pub fn monodromy(&self, lambda: C64) -> Monodromy {
        let c = self.to_anchor(lambda);
        let m = c.inverse_unimodular() * self.local(lambda) * c;
        Monodromy { side: self.side, lambda, classical: m }
    }

    /// Monodromy based at the anchor `R±`.
    pub fn local_monodromy(&self, lambda: C64) -> Monodromy {
        Monodromy { side: self.side, lambda, classical: self.local(lambda) }
    }
}

/// Monodromy matrix of one side with its `λ`-derivative (classical coordinates).
#[derive(Clone, Copy, Debug)]
pub struct Monodromy {
    pub side: Side,
    pub lambda: C64,
    pub classical: Dual,
}

impl Monodromy {
    pub fn weighted(&self) -> WeightedMatrix {
        to_weighted(&self.classical.value, self.lambda)
    }

    pub fn trace(&self) -> C64 {
        self.classical.value.trace()
    }

    pub fn trace_deriv(&self) -> C64 {
        self.classical.deriv.trace()
    }
}

/// `P±(λ)`, one period of the chosen tail conjugated to base point 0.
pub fn monodromy(pot: &PerturbedPeriodicPotential, side: Side, lambda: C64) -> Monodromy {
    SideTransfer::new(pot, side).monodromy(lambda)
}

/// Floquet multiplier, eigenvector and `dρ/dλ` for one side.
#[derive(Clone, Copy, Debug)]
pub struct FloquetData {
    pub side: Side,
    pub lambda: C64,
    pub rho: C64,
    pub rho_prime: C64,
    /// Unit eigenvector in weighted coordinates.
    pub v: Vec2,
    /// Unit eigenvector in classical coordinates `(u, u′)`.
    pub v_classical: Vec2,
    /// `|ρ| = 1` (real `λ` with `|tr| ≤ 2`).
    pub in_band: bool,
    /// `λ` numerically in `S±`: the eigenvalue is (nearly) defective.
    pub singular: bool,
}

fn eigenvector(m: &Mat2, rho: C64) -> Vec2 {
    let v1 = Vec2::new(m.b, rho - m.a);
    let v2 = Vec2::new(rho - m.d, m.c);
    let v = if v1.norm() >= v2.norm() { v1 } else { v2 };
    if v.norm() == 0.0 {
        Vec2::real(1.0, 0.0)
    } else {
        v.normalized()
    }
}

/// Selects `ρ` and its eigenvector: `|ρ| < 1` off the real bands; on a band the root
/// continued from the upper half-plane, characterised by `Im ρ · tr′ < 0`.
pub fn floquet(mono: &Monodromy, hint: Option<C64>) -> FloquetData {
    let lambda = mono.lambda;
    let tr = mono.trace();
    let dtr = mono.trace_deriv();
    let real_axis = lambda.im.abs() <= 1e-14 * lambda.norm().max(1.0);
    let in_band = real_axis && tr.im.abs() <= 1e-9 * tr.norm().max(1.0) && tr.re.abs() <= 2.0;
    let singular = real_axis && (tr.norm() - 2.0).abs() < SINGULAR_TOL;

    let rho = if in_band {
        let t = tr.re;
        let im = (4.0 - t * t).max(0.0).sqrt() / 2.0;
        let r_up = C64::new(t / 2.0, im);
        let r_down = r_up.conj();
        let by_hint = hint.map(|h| if (r_up - h).norm() <= (r_down - h).norm() { r_up } else { r_down });
        if dtr.re.abs() > 1e-14 && im > 1e-12 {
            if dtr.re > 0.0 {
                r_down
            } else {
                r_up
            }
        } else {
            by_hint.unwrap_or(r_up)
        }
    } else {
        let s = sqrt_principal(tr * tr - 4.0);
        let (a, b) = ((tr + s) * 0.5, (tr - s) * 0.5);
        let big = if a.norm() >= b.norm() { a } else { b };
        ONE / big
    };
    let denom = rho * 2.0 - tr;
    let rho_prime = dtr * rho / denom;
    let v_classical = eigenvector(&mono.classical.value, rho);
    let v = crate::transfer::weight_state(&v_classical, lambda);
    let v = if v.norm() == 0.0 { v_classical } else { v.normalized() };
    FloquetData { side: mono.side, lambda, rho, rho_prime, v, v_classical, in_band, singular }
}
