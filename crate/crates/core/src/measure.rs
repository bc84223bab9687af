//! Explicit spectral measure of `L`: matrix density on the bands, point masses at gap
//! eigenvalues, and the transform `T[f](λ) = ∫ f Ψ(·; λ) V dx`.
//!
//! All solution data are classical `(u, u′)` values at `x = 0`, where the fundamental
//! system `Ψ = (Ψ₁, Ψ₂)` has data `(1, 0)` and `(0, 1)`. Wronskians are
//! `W(f, g) = f g′ − f′ g`.

use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{Vec2, C64, ZERO};
use crate::potential::{PerturbedPeriodicPotential, Side};
use crate::quadrature::Rule;
use crate::spectrum::{BandStructure, GapEigenvalue};
use crate::transfer::{cell_classical, chain, entire_functions, floquet, FloquetData, SideTransfer};

/// `∫₀^ℓ a|u|²` for `−u″ = λ a u` with data `(u, u′)(0) = state`, and the data at `ℓ`.
pub fn cell_norm(a: f64, ell: f64, lambda: f64, state: Vec2) -> (f64, Vec2) {
    let x = (lambda * a).max(0.0).sqrt() * ell;
    let sinc = |y: f64| if y.abs() < 1e-8 { 1.0 - y * y / 6.0 } else { y.sin() / y };
    let i_cc = 0.5 * ell * (1.0 + sinc(2.0 * x));
    // (1 − sinc 2x)/(2x²), by series for small x
    let s_fac = if x < 0.5 {
        let y2 = 4.0 * x * x;
        let (mut term, mut sum) = (1.0, 0.0);
        for n in 1..14 {
            term *= y2 / ((2 * n) as f64 * (2 * n + 1) as f64);
            sum += if n % 2 == 1 { term } else { -term };
        }
        // sum = 1 − sinc(2x) = (2x²)·s_fac
        if x == 0.0 {
            1.0 / 3.0
        } else {
            sum / (2.0 * x * x)
        }
    } else {
        (1.0 - sinc(2.0 * x)) / (2.0 * x * x)
    };
    let i_ss = ell * ell * ell * s_fac;
    let i_cs = 0.5 * ell * ell * sinc(x) * sinc(x);
    let (u, du) = (state.0[0], state.0[1]);
    let val = a * (u.norm_sqr() * i_cc + du.norm_sqr() * i_ss + 2.0 * (u * du.conj()).re * i_cs);
    let end = cell_classical(a, ell, C64::new(lambda, 0.0)).value.apply(&state);
    (val, end)
}

/// `∫ V|u|²` over consecutive forward cells starting from `state`.
pub fn cells_norm(cells: &[(f64, f64)], lambda: f64, state: Vec2) -> (f64, Vec2) {
    cells.iter().fold((0.0, state), |(acc, s), &(a, l)| {
        let (n, e) = cell_norm(a, l, lambda, s);
        (acc + n, e)
    })
}

/// Floquet data of one side at real `λ` together with the eigenfunction's period norm.
#[derive(Clone, Copy, Debug)]
pub struct SideData {
    pub floquet: FloquetData,
    /// `φ±` data at 0 (the vector `v±`).
    pub v: Vec2,
    /// `φ±` data at the anchor `R±`.
    pub anchor: Vec2,
    /// `‖φ±‖²` over the period `[R⁺, R⁺+X⁺]` or `[R⁻−X⁻, R⁻]`.
    pub period_norm: f64,
}

impl SideData {
    pub fn new(st: &SideTransfer, lambda: f64) -> Self {
        let l = C64::new(lambda, 0.0);
        let f = floquet(&st.monodromy(l), None);
        let v = f.v_classical;
        let anchor = st.to_anchor(l).value.apply(&v);
        let start = match st.side() {
            Side::Plus => anchor,
            Side::Minus => st.local(l).value.apply(&anchor),
        };
        let (period_norm, _) = cells_norm(st.period_cells(), lambda, start);
        SideData { floquet: f, v, anchor, period_norm }
    }

    /// The same Floquet solution scaled by `c`.
    pub fn scaled(&self, c: C64) -> Self {
        SideData { v: self.v.scale(c), anchor: self.anchor.scale(c), period_norm: self.period_norm * c.norm_sqr(), ..*self }
    }

    pub fn in_band(&self) -> bool {
        self.floquet.in_band
    }
}

/// Both sides' transfer data for repeated density evaluations.
pub struct DensityContext {
    pub plus: SideTransfer,
    pub minus: SideTransfer,
}

impl DensityContext {
    pub fn new(pot: &PerturbedPeriodicPotential) -> Self {
        DensityContext { plus: SideTransfer::new(pot, Side::Plus), minus: SideTransfer::new(pot, Side::Minus) }
    }

    pub fn side(&self, side: Side) -> &SideTransfer {
        match side {
            Side::Plus => &self.plus,
            Side::Minus => &self.minus,
        }
    }

    pub fn side_data(&self, side: Side, lambda: f64) -> SideData {
        SideData::new(self.side(side), lambda)
    }

    pub fn density(&self, lambda: f64) -> Result<DensitySample> {
        density_from_parts(lambda, &self.side_data(Side::Plus, lambda), &self.side_data(Side::Minus, lambda))
    }
}

/// Floquet solution sampled on a grid.
#[derive(Clone, Debug)]
pub struct EigenfunctionPair {
    pub data: SideData,
    pub values: Vec<C64>,
}

/// `φ±(x; λ)` at `grid` by exact cell propagation from the eigenvector `v±`.
pub fn eigenfunction_pair(pot: &PerturbedPeriodicPotential, lambda: f64, side: Side, grid: &[f64]) -> Result<EigenfunctionPair> {
    let data = SideData::new(&SideTransfer::new(pot, side), lambda);
    if data.floquet.singular {
        return Err(Error::Singular { lambda, reason: format!("band edge of the {} side", side.label()) });
    }
    if !data.in_band() {
        return Err(Error::Domain(format!("lambda = {lambda} is not in a band of the {} side", side.label())));
    }
    let values = grid
        .par_iter()
        .map(|&x| crate::transfer::propagate_classical(pot, 0.0, x, C64::new(lambda, 0.0), data.v).0[0])
        .collect();
    Ok(EigenfunctionPair { data, values })
}

pub fn wronskian(f: &Vec2, g: &Vec2) -> C64 {
    f.wedge(g)
}

/// `(r, t)` with `φ_other = r φ + t φ̄`, from data at a common point.
pub fn reflection_transmission(other: &Vec2, phi: &Vec2, lambda: f64) -> Result<(C64, C64)> {
    let det = phi.wedge(&phi.conj());
    if det.norm() <= 1e-13 * phi.norm() * phi.norm() {
        return Err(Error::DegenerateBasis(lambda));
    }
    let r = other.wedge(&phi.conj()) / det;
    let t = phi.wedge(other) / det;
    Ok((r, t))
}

/// Matrix density `M(λ)` on the bands.
#[derive(Clone, Debug, Serialize)]
pub struct DensitySample {
    pub lambda: f64,
    /// Row-major `[[M₁₁, M₁₂], [M₂₁, M₂₂]]`.
    #[serde(skip)]
    pub m: [[C64; 2]; 2],
    pub contributing_sides: Vec<Side>,
}

impl DensitySample {
    /// `Σ g_i ḡ_j M_ij`.
    pub fn quadratic_form(&self, g: &[C64; 2]) -> f64 {
        let mut s = ZERO;
        for i in 0..2 {
            for j in 0..2 {
                s += g[i] * g[j].conj() * self.m[i][j];
            }
        }
        s.re
    }

    pub fn trace(&self) -> f64 {
        self.m[0][0].re + self.m[1][1].re
    }

    /// Eigenvalues of the Hermitian matrix, ascending.
    pub fn eigenvalues(&self) -> [f64; 2] {
        let (a, d) = (self.m[0][0].re, self.m[1][1].re);
        let b = self.m[0][1].norm();
        let disc = (0.25 * (a - d) * (a - d) + b * b).sqrt();
        [0.5 * (a + d) - disc, 0.5 * (a + d) + disc]
    }
}

fn outer(v: &Vec2, c: f64) -> [[C64; 2]; 2] {
    let mut m = [[ZERO; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            m[i][j] = v.0[i] * v.0[j].conj() * c;
        }
    }
    m
}

/// `M(λ) = Σ_± 𝟙{|ρ±| = 1} |ρ±′| v∓ v∓* / (2π |t(φ∓; φ±)|² ‖φ±‖²_period)`.
pub fn density_from_parts(lambda: f64, plus: &SideData, minus: &SideData) -> Result<DensitySample> {
    let mut m = [[ZERO; 2]; 2];
    let mut sides = Vec::new();
    for (this, other) in [(plus, minus), (minus, plus)] {
        if this.floquet.singular || other.floquet.singular {
            return Err(Error::Singular { lambda, reason: "band edge".into() });
        }
        if !this.in_band() {
            continue;
        }
        if this.v.wedge(&other.v).norm() < 1e-10 * this.v.norm() * other.v.norm() {
            return Err(Error::Singular { lambda, reason: "phi_plus parallel to phi_minus (S0)".into() });
        }
        let (_, t) = reflection_transmission(&other.v, &this.v, lambda)?;
        let c = this.floquet.rho_prime.norm() / (2.0 * PI * t.norm_sqr() * this.period_norm);
        let o = outer(&other.v, c);
        for i in 0..2 {
            for j in 0..2 {
                m[i][j] += o[i][j];
            }
        }
        sides.push(this.floquet.side);
    }
    Ok(DensitySample { lambda, m, contributing_sides: sides })
}

/// Cross-check: `M = (1/π) Im[(m₋ − m₊)⁻¹ [[1, (m₋+m₊)/2], [(m₋+m₊)/2, m₋m₊]]]` at `λ + iε`.
pub fn herglotz_density(pot: &PerturbedPeriodicPotential, lambda: f64, eps: f64) -> Result<[[f64; 2]; 2]> {
    let z = C64::new(lambda, eps);
    let mp = crate::spectrum::weyl_m(pot, Side::Plus, z)?;
    let mm = crate::spectrum::weyl_m(pot, Side::Minus, z)?;
    let inv = 1.0 / (mm - mp);
    let off = (inv * (mm + mp) * 0.5).im / PI;
    Ok([[inv.im / PI, off], [off, (inv * mm * mp).im / PI]])
}

/// Point mass of `μ` at a gap eigenvalue.
#[derive(Clone, Debug, Serialize)]
pub struct PointMass {
    pub lambda: f64,
    /// `φ₀` data at 0.
    pub v0: [f64; 2],
    /// `‖φ₀‖²_{L²_V(ℝ)}`.
    pub norm2: f64,
    /// `v₀v₀ᵀ/‖φ₀‖²`.
    pub weight_matrix: [[f64; 2]; 2],
}

impl PointMass {
    pub fn quadratic_form(&self, g: &[C64; 2]) -> f64 {
        let s = g[0] * self.v0[0] + g[1] * self.v0[1];
        s.norm_sqr() / self.norm2
    }
}

/// Weight of the point mass at an eigenvalue, with `‖φ₀‖²` summed in closed form
/// (geometric series over the tail periods).
pub fn point_mass(pot: &PerturbedPeriodicPotential, ev: &GapEigenvalue) -> PointMass {
    let lambda = ev.lambda;
    let l = C64::new(lambda, 0.0);
    let ctx = DensityContext::new(pot);
    let fp = floquet(&ctx.plus.monodromy(l), None);
    let fm = floquet(&ctx.minus.local_monodromy(l), None);
    let v0 = Vec2::real(fp.v_classical.0[0].re, fp.v_classical.0[1].re);
    let v0 = v0.scale(C64::new(1.0 / v0.norm(), 0.0));

    let right_core: Vec<(f64, f64)> = pot.pieces(0.0_f64.min(pot.r_plus()), pot.r_plus()).iter().map(|p| (p.value, p.length)).collect();
    let (n_core_r, at_rp) = cells_norm(&right_core, lambda, v0);
    let (n_per_r, _) = cells_norm(ctx.plus.period_cells(), lambda, at_rp);
    let rp = fp.rho.re;
    let right = n_core_r + n_per_r / (1.0 - rp * rp);

    let left_core: Vec<(f64, f64)> = pot.pieces(pot.r_minus(), 0.0_f64.max(pot.r_minus())).iter().map(|p| (p.value, p.length)).collect();
    let at_rm = chain(&left_core, l).inverse_unimodular().value.apply(&v0);
    let (n_core_l, _) = cells_norm(&left_core, lambda, at_rm);
    let start = ctx.minus.local(l).value.apply(&at_rm);
    let (n_per_l, _) = cells_norm(ctx.minus.period_cells(), lambda, start);
    let rm = fm.rho.re;
    let left = n_core_l + n_per_l / (1.0 - rm * rm);

    let norm2 = left + right;
    let (a, b) = (v0.0[0].re, v0.0[1].re);
    PointMass {
        lambda,
        v0: [a, b],
        norm2,
        weight_matrix: [[a * a / norm2, a * b / norm2], [a * b / norm2, b * b / norm2]],
    }
}

/// A density node of the band quadrature.
#[derive(Clone, Debug)]
pub struct DensityNode {
    pub lambda: f64,
    pub weight: f64,
    pub sample: DensitySample,
}

/// Quadrature of `μ` restricted to the bands of `[0, λ_max]`.
#[derive(Clone, Debug)]
pub struct DensityQuadrature {
    pub nodes: Vec<DensityNode>,
    /// Nodes dropped because they hit `S` numerically.
    pub skipped: usize,
    /// Segments `[a, b]` between consecutive edges of either side that lie in a band.
    pub segments: Vec<(f64, f64)>,
}

/// Gauss–Legendre nodes in `θ` with `λ = a + (b − a)(1 − cos θ)/2` on every segment between
/// consecutive band edges of either side.
pub fn density_quadrature(
    pot: &PerturbedPeriodicPotential,
    plus: &BandStructure,
    minus: &BandStructure,
    lambda_max: f64,
    nodes_per_segment: usize,
) -> DensityQuadrature {
    let mut cuts: Vec<f64> = plus
        .singular_set
        .iter()
        .chain(&minus.singular_set)
        .copied()
        .filter(|&e| e > 0.0 && e < lambda_max)
        .collect();
    cuts.push(0.0);
    cuts.push(lambda_max);
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    let segments: Vec<(f64, f64)> = cuts
        .windows(2)
        .map(|w| (w[0], w[1]))
        .filter(|&(a, b)| {
            let m = 0.5 * (a + b);
            b - a > 1e-12 && (plus.in_band(m) || minus.in_band(m))
        })
        .collect();
    let rule = Rule::legendre(nodes_per_segment);
    let ctx = DensityContext::new(pot);
    let raw: Vec<(f64, f64)> = segments.iter().flat_map(|&(a, b)| rule.cosine_substitution(a, b)).collect();
    let evaluated: Vec<Option<DensityNode>> = raw
        .par_iter()
        .map(|&(lambda, weight)| ctx.density(lambda).ok().map(|sample| DensityNode { lambda, weight, sample }))
        .collect();
    let skipped = evaluated.iter().filter(|n| n.is_none()).count();
    DensityQuadrature { nodes: evaluated.into_iter().flatten().collect(), skipped, segments }
}

/// `‖g‖²_{L²(μ)}`: band quadrature plus the point-mass sum.
pub fn measure_norm(
    quad: &DensityQuadrature,
    g_nodes: &[[C64; 2]],
    masses: &[PointMass],
    g_masses: &[[C64; 2]],
) -> Result<f64> {
    if g_nodes.len() != quad.nodes.len() || g_masses.len() != masses.len() {
        return Err(Error::Domain("g must be sampled on the quadrature nodes and point masses".into()));
    }
    let bands: f64 = quad.nodes.iter().zip(g_nodes).map(|(n, g)| n.weight * n.sample.quadratic_form(g)).sum();
    let points: f64 = masses.iter().zip(g_masses).map(|(m, g)| m.quadratic_form(g)).sum();
    let total = bands + points;
    if total < -1e-10 {
        return Err(Error::Numerical(format!("negative L2(mu) norm {total}")));
    }
    Ok(total.max(0.0))
}

/// Transform sample `T[f](λ)`.
#[derive(Clone, Copy, Debug)]
pub struct TransformSample {
    pub lambda: f64,
    pub value: [C64; 2],
}

/// `T[f](λ) = ∫ f Ψ V dx` for `f` supported in `[a, b]`, by Gauss–Legendre panels of
/// phase at most one radian on every constant piece of `V`.
pub fn transform<F>(pot: &PerturbedPeriodicPotential, f: F, support: (f64, f64), lambdas: &[f64]) -> Vec<TransformSample>
where
    F: Fn(f64) -> f64 + Sync,
{
    let (a, b) = support;
    let pieces = pot.pieces(a, b);
    let rule = Rule::legendre(12);
    let max_panel = (b - a) / 32.0;
    lambdas
        .par_iter()
        .map(|&lambda| {
            let l = C64::new(lambda, 0.0);
            let p0 = crate::transfer::propagator(pot, 0.0, a, l).value;
            // columns: data of Ψ₁ and Ψ₂ at the current point
            let mut psi = [Vec2::new(p0.a, p0.c), Vec2::new(p0.b, p0.d)];
            let mut acc = [ZERO; 2];
            for piece in &pieces {
                let k = (lambda * piece.value).max(0.0).sqrt();
                let n = ((piece.length * k).ceil().max(piece.length / max_panel).ceil() as usize).max(1);
                let h = piece.length / n as f64;
                for j in 0..n {
                    let x0 = piece.start + j as f64 * h;
                    for (x, w) in rule.on(0.0, h) {
                        let (c, s, _) = entire_functions(l * (piece.value * x * x));
                        let fv = f(x0 + x) * w * piece.value;
                        for (i, ps) in psi.iter().enumerate() {
                            acc[i] += (c * ps.0[0] + s * x * ps.0[1]) * fv;
                        }
                    }
                    let m = cell_classical(piece.value, h, l).value;
                    psi = [m.apply(&psi[0]), m.apply(&psi[1])];
                }
            }
            TransformSample { lambda, value: acc }
        })
        .collect()
}

/// `‖f‖²_{L²_V}` for real `f` supported in `[a, b]`, by Gauss–Legendre on the pieces of `V`.
pub fn weighted_norm<F: Fn(f64) -> f64>(pot: &PerturbedPeriodicPotential, f: F, support: (f64, f64)) -> f64 {
    let rule = Rule::legendre(20);
    pot.pieces(support.0, support.1)
        .iter()
        .map(|p| {
            let n = ((p.length / ((support.1 - support.0) / 64.0)).ceil() as usize).max(1);
            let h = p.length / n as f64;
            (0..n)
                .map(|j| {
                    let x0 = p.start + j as f64 * h;
                    rule.integrate(x0, x0 + h, |x| p.value * f(x) * f(x))
                })
                .sum::<f64>()
        })
        .sum()
}

/// `‖T f‖²_{L²(μ)}` against `‖f‖²_{L²_V}`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ParsevalCheck {
    pub measure_norm: f64,
    pub band_part: f64,
    pub point_part: f64,
    pub function_norm: f64,
    pub relative_error: f64,
    pub skipped_nodes: usize,
}

/// Parseval check for real `f` supported in `[a, b]`, with the band integral cut at `λ_max`.
pub fn parseval<F>(
    pot: &PerturbedPeriodicPotential,
    f: F,
    support: (f64, f64),
    lambda_max: f64,
    nodes_per_segment: usize,
) -> Result<ParsevalCheck>
where
    F: Fn(f64) -> f64 + Sync,
{
    let plus = crate::spectrum::band_scan(pot, Side::Plus, lambda_max, None)?;
    let minus = crate::spectrum::band_scan(pot, Side::Minus, lambda_max, None)?;
    let quad = density_quadrature(pot, &plus, &minus, lambda_max, nodes_per_segment);
    let lambdas: Vec<f64> = quad.nodes.iter().map(|n| n.lambda).collect();
    let g: Vec<[C64; 2]> = transform(pot, &f, support, &lambdas).iter().map(|t| t.value).collect();
    let band_part: f64 = quad.nodes.iter().zip(&g).map(|(n, g)| n.weight * n.sample.quadratic_form(g)).sum();
    let joint = crate::spectrum::merge(&plus, &minus);
    let masses: Vec<PointMass> = crate::spectrum::gap_eigenvalues(pot, &joint, Default::default())
        .iter()
        .filter(|e| !e.near_edge)
        .map(|e| point_mass(pot, e))
        .collect();
    let ml: Vec<f64> = masses.iter().map(|m| m.lambda).collect();
    let gm: Vec<[C64; 2]> = transform(pot, &f, support, &ml).iter().map(|t| t.value).collect();
    let point_part: f64 = masses.iter().zip(&gm).map(|(m, g)| m.quadratic_form(g)).sum();
    let function_norm = weighted_norm(pot, &f, support);
    let measure_norm = band_part + point_part;
    Ok(ParsevalCheck {
        measure_norm,
        band_part,
        point_part,
        function_norm,
        relative_error: (measure_norm - function_norm).abs() / function_norm,
        skipped_nodes: quad.skipped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::make_periodic;
    use crate::spectrum::band_scan;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn cell_norm_matches_quadrature() {
        let rule = Rule::legendre(40);
        for (lam, a, ell) in [(3.0, 2.0, 0.7), (1e-9, 9.0, 1.0), (0.0, 1.0, 2.0), (50.0, 1.0, 1.3)] {
            let st = Vec2::new(c(0.3, -1.0), c(2.0, 0.5));
            let (n, _) = cell_norm(a, ell, lam, st);
            let q = rule.integrate(0.0, ell, |x| {
                a * cell_classical(a, x, c(lam, 0.0)).value.apply(&st).0[0].norm_sqr()
            });
            assert!((n - q).abs() < 1e-12 * q.max(1.0), "{n} vs {q}");
        }
    }

    #[test]
    fn free_density_closed_form() {
        let v = make_periodic(&[(1.0, 1.0)], 1.0).unwrap();
        let ctx = DensityContext::new(&v);
        for lam in [0.1, 2.0, 37.0] {
            let s = ctx.density(lam).unwrap();
            let k: f64 = lam.sqrt();
            assert!((s.m[0][0].re - 1.0 / (2.0 * PI * k)).abs() < 1e-12 / k);
            assert!((s.m[1][1].re - k / (2.0 * PI)).abs() < 1e-12 * k);
            assert!(s.m[0][1].norm() < 1e-12);
        }
    }

    #[test]
    fn herglotz_agrees_with_density() {
        let v = make_periodic(&[(0.5, 1.0), (0.5, 9.0)], 2.0).unwrap();
        let b = band_scan(&v, Side::Plus, 10.0, None).unwrap();
        let lam = b.bands[1].mid();
        let s = DensityContext::new(&v).density(lam).unwrap();
        let h = herglotz_density(&v, lam, 1e-6).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!((s.m[i][j].re - h[i][j]).abs() < 1e-4 * s.trace(), "{i}{j}");
            }
        }
    }

    #[test]
    fn free_reflection_is_zero() {
        let v = make_periodic(&[(1.0, 1.0)], 1.0).unwrap();
        let ctx = DensityContext::new(&v);
        let (p, m) = (ctx.side_data(Side::Plus, 4.0), ctx.side_data(Side::Minus, 4.0));
        // φ₋ = e^{−2ix} = conj φ₊
        let (r, t) = reflection_transmission(&m.v, &p.v, 4.0).unwrap();
        assert!(r.norm() < 1e-14 && (t - 1.0).norm() < 1e-14);
        let phi = p.v;
        assert!(reflection_transmission(&phi, &Vec2::real(1.0, 2.0), 4.0).is_err());
    }

    /// `W(φ, φ̄)` against `±(ρ/ρ′)‖φ‖²` over one tail period.
    fn wronskian_defect(d: &SideData, side: Side) -> f64 {
        let w = wronskian(&d.v, &d.v.conj());
        let sign = if side == Side::Plus { 1.0 } else { -1.0 };
        let rhs = d.floquet.rho / d.floquet.rho_prime * (sign * d.period_norm);
        (w - rhs).norm() / rhs.norm()
    }

    #[test]
    fn wronskian_identity_on_bands() {
        let base = make_periodic(&[(0.5, 1.0), (0.5, 9.0)], 2.0).unwrap();
        let right = make_periodic(&[(0.5, 1.0), (0.5, 25.0)], 2.0).unwrap();
        let v = crate::potential::make_interface(&base, &right).unwrap();
        let ctx = DensityContext::new(&v);
        for side in Side::both() {
            let b = band_scan(&v, side, 400.0, None).unwrap();
            for band in b.bands.iter().take(8) {
                for frac in [0.13, 0.5, 0.91] {
                    let lam = band.lo + frac * band.width();
                    let d = ctx.side_data(side, lam);
                    assert!(d.in_band());
                    assert!(wronskian_defect(&d, side) < 1e-8, "{side:?} {lam}");
                    // W(φ₊, φ̄₊) ∈ i(−∞, 0), W(φ₋, φ̄₋) ∈ i(0, ∞)
                    let w = wronskian(&d.v, &d.v.conj());
                    assert!(w.re.abs() < 1e-12 * w.norm());
                    assert_eq!(w.im < 0.0, side == Side::Plus);
                }
            }
        }
    }

    #[test]
    fn density_ignores_eigenvector_scaling() {
        let v = make_periodic(&[(0.5, 1.0), (0.5, 9.0)], 2.0).unwrap();
        let ctx = DensityContext::new(&v);
        let b = band_scan(&v, Side::Plus, 200.0, None).unwrap();
        for (i, band) in b.bands.iter().enumerate() {
            let lam = band.mid();
            let (p, m) = (ctx.side_data(Side::Plus, lam), ctx.side_data(Side::Minus, lam));
            let a = density_from_parts(lam, &p, &m).unwrap();
            let (cp, cm) = (c(0.3 + i as f64, -2.0), c(-1.7, 0.05 * i as f64));
            let s = density_from_parts(lam, &p.scaled(cp), &m.scaled(cm)).unwrap();
            for r in 0..2 {
                for k in 0..2 {
                    assert!((a.m[r][k] - s.m[r][k]).norm() < 1e-12 * a.trace());
                }
            }
            let ev = a.eigenvalues();
            assert!(ev[0] >= -1e-12 * a.trace());
        }
    }

    #[test]
    fn parseval_for_a_cell_interior_gaussian() {
        let v = make_periodic(&[(0.5, 1.0), (0.5, 9.0)], 2.0).unwrap();
        let f = |x: f64| (-((x - 1.5) / 0.1).powi(2) / 2.0).exp();
        let r = parseval(&v, f, (1.5 - 0.45, 1.5 + 0.45), 1500.0, 48).unwrap();
        assert!(r.relative_error < 1e-3, "{r:?}");
        assert_eq!(r.point_part, 0.0);
    }
}
