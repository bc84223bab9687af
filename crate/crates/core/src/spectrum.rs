//! Bands and gaps from the monodromy trace, Weyl functions, and gap eigenvalues.

use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{Vec2, C64};
use crate::potential::{PerturbedPeriodicPotential, Side};
use crate::transfer::{chain, floquet, to_weighted, SideTransfer};

/// Absolute tolerance of band-edge bisection in `λ`.
pub const EDGE_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Interval { lo, hi }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }
}

/// Bands `|tr P±| ≤ 2` and complementary gaps over `[0, λ_max]`.
#[derive(Clone, Debug, Serialize)]
pub struct BandStructure {
    /// `None` for the joint structure (union over both sides).
    pub side: Option<Side>,
    pub bands: Vec<Interval>,
    pub gaps: Vec<Interval>,
    /// Band edges found by bisection (members of `S±`); excludes the `λ_max` cut.
    pub singular_set: Vec<f64>,
    pub scan_range: (f64, f64),
    /// Step of the scan grid in `√λ`.
    pub resolution: f64,
    pub warnings: Vec<String>,
}

impl BandStructure {
    pub fn in_band(&self, lambda: f64) -> bool {
        self.bands.iter().any(|b| b.contains(lambda))
    }

    /// Gap containing `lambda`, if any.
    pub fn gap_of(&self, lambda: f64) -> Option<Interval> {
        self.gaps.iter().copied().find(|g| lambda > g.lo && lambda < g.hi)
    }
}

/// Default `√λ` step: 256 samples per oscillation of `cos(√λ Σ q_i)`.
pub fn default_resolution(pot: &PerturbedPeriodicPotential, side: Side) -> f64 {
    let q: f64 = pot.tail(side).optical_lengths().iter().sum();
    2.0 * PI / 256.0 / q
}

fn bisect<F: Fn(f64) -> bool>(pred: F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    // pred(a) != pred(b)
    let pa = pred(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if (b - a).abs() <= tol || m == a || m == b {
            break;
        }
        if pred(m) == pa {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

fn complement(bands: &[Interval], lambda_max: f64) -> Vec<Interval> {
    let mut gaps = Vec::new();
    let mut x = 0.0;
    for b in bands {
        if b.lo > x {
            gaps.push(Interval::new(x, b.lo));
        }
        x = x.max(b.hi);
    }
    if x < lambda_max {
        gaps.push(Interval::new(x, lambda_max));
    }
    gaps
}

/// Bands of one side on `[0, λ_max]` from sign changes of `|tr| − 2` on a `√λ` grid.
pub fn band_scan(
    pot: &PerturbedPeriodicPotential,
    side: Side,
    lambda_max: f64,
    resolution: Option<f64>,
) -> Result<BandStructure> {
    if !(lambda_max > 0.0) {
        return Err(Error::Domain(format!("lambda_max must be positive, got {lambda_max}")));
    }
    let h = resolution.unwrap_or_else(|| default_resolution(pot, side));
    if !(h > 0.0) {
        return Err(Error::Domain("resolution must be positive".into()));
    }
    let st = SideTransfer::new(pot, side);
    let f = |lam: f64| st.local(C64::new(lam, 0.0)).value.trace().re.abs() - 2.0;
    let smax = lambda_max.sqrt();
    let n = (smax / h).ceil() as usize;
    let grid: Vec<f64> = (0..=n).map(|j| ((j as f64) * h).min(smax)).collect();
    let vals: Vec<f64> = grid.par_iter().map(|s| f(s * s)).collect();

    let mut bands = Vec::new();
    let mut edges = Vec::new();
    let mut warnings = Vec::new();
    let mut start: Option<f64> = if vals[0] <= 0.0 { Some(0.0) } else { None };
    if start.is_some() {
        edges.push(0.0);
    }
    for j in 1..grid.len() {
        let (a, b) = (grid[j - 1] * grid[j - 1], grid[j] * grid[j]);
        let (ia, ib) = (vals[j - 1] <= 0.0, vals[j] <= 0.0);
        if ia != ib {
            // bisected to machine precision, which is well inside EDGE_TOL
            let e = bisect(|l| f(l) <= 0.0, a, b, 0.0);
            edges.push(e);
            if ib {
                start = Some(e);
            } else if let Some(s) = start.take() {
                bands.push(Interval::new(s, e));
            }
        }
        if j + 1 < grid.len() {
            let (p, c, nx) = (vals[j - 1], vals[j], vals[j + 1]);
            if p > 0.0 && c > 0.0 && nx > 0.0 && c < p && c < nx && c < 1e-3 {
                warnings.push(format!(
                    "|tr| nearly touches 2 near lambda = {:.6e}; a band may be missed, refine the resolution",
                    b
                ));
            }
        }
    }
    if let Some(s) = start {
        bands.push(Interval::new(s, lambda_max));
    }
    let gaps = complement(&bands, lambda_max);
    Ok(BandStructure {
        side: Some(side),
        bands,
        gaps,
        singular_set: edges,
        scan_range: (0.0, lambda_max),
        resolution: h,
        warnings,
    })
}

/// Union of the band structures of both sides (the essential spectrum).
pub fn joint_bands(pot: &PerturbedPeriodicPotential, lambda_max: f64, resolution: Option<f64>) -> Result<BandStructure> {
    let plus = band_scan(pot, Side::Plus, lambda_max, resolution)?;
    let minus = if pot.left_tail() == pot.right_tail() {
        BandStructure { side: Some(Side::Minus), ..plus.clone() }
    } else {
        band_scan(pot, Side::Minus, lambda_max, resolution)?
    };
    Ok(merge(&plus, &minus))
}

/// Union of two band lists.
pub fn merge(plus: &BandStructure, minus: &BandStructure) -> BandStructure {
    let mut all: Vec<Interval> = plus.bands.iter().chain(&minus.bands).copied().collect();
    all.sort_by(|a, b| a.lo.partial_cmp(&b.lo).unwrap());
    let mut bands: Vec<Interval> = Vec::new();
    for b in all {
        match bands.last_mut() {
            Some(last) if b.lo <= last.hi => last.hi = last.hi.max(b.hi),
            _ => bands.push(b),
        }
    }
    let lambda_max = plus.scan_range.1.min(minus.scan_range.1);
    let gaps = complement(&bands, lambda_max);
    let mut singular_set: Vec<f64> = plus.singular_set.iter().chain(&minus.singular_set).copied().collect();
    singular_set.sort_by(|a, b| a.partial_cmp(b).unwrap());
    singular_set.dedup();
    let mut warnings = plus.warnings.clone();
    warnings.extend(minus.warnings.iter().cloned());
    BandStructure {
        side: None,
        bands,
        gaps,
        singular_set,
        scan_range: (0.0, lambda_max),
        resolution: plus.resolution.min(minus.resolution),
        warnings,
    }
}

/// Weyl function `m±(λ)`: the decaying Floquet solution has data `(1, m±)` at 0.
pub fn weyl_m(pot: &PerturbedPeriodicPotential, side: Side, lambda: C64) -> Result<C64> {
    if !(lambda.im > 0.0) {
        return Err(Error::Domain(format!("weyl_m needs Im lambda > 0, got {lambda}")));
    }
    let f = floquet(&SideTransfer::new(pot, side).monodromy(lambda), None);
    Ok(f.v_classical.0[1] / f.v_classical.0[0])
}

/// Point eigenvalue of `L` inside a joint gap.
#[derive(Clone, Debug, Serialize)]
pub struct GapEigenvalue {
    pub lambda: f64,
    pub gap: Interval,
    /// Decay factors per period: `|ρ⁺| < 1` towards `+∞`, `|ρ⁻| < 1` towards `−∞`.
    pub rho_plus: f64,
    pub rho_minus: f64,
    /// Weighted Floquet vectors at `R⁺` and `R⁻` (unit norm).
    pub v_plus: [f64; 2],
    pub v_minus: [f64; 2],
    /// `|D(λ*)|` of the matching determinant.
    pub residual: f64,
    pub sign_change: bool,
    /// Within edge tolerance of `S±`; not certified.
    pub near_edge: bool,
}

/// Matching determinant `D(λ) = det[P_w(R⁺, R⁻) ṽ⁻, v⁺]` in weighted coordinates.
pub struct Matching {
    plus: SideTransfer,
    minus: SideTransfer,
    core: Vec<(f64, f64)>,
}

/// One evaluation of `D` with the vectors used.
#[derive(Clone, Copy, Debug)]
pub struct MatchingSample {
    pub lambda: f64,
    pub d: f64,
    pub v_plus: Vec2,
    pub v_minus: Vec2,
    pub rho_plus: f64,
    pub rho_minus: f64,
}

fn align(v: Vec2, reference: Option<Vec2>) -> Vec2 {
    match reference {
        Some(r) if v.dot(&r).re < 0.0 => v.scale(C64::new(-1.0, 0.0)),
        _ => v,
    }
}

impl Matching {
    pub fn new(pot: &PerturbedPeriodicPotential) -> Self {
        let core = pot
            .pieces(pot.r_minus(), pot.r_plus())
            .iter()
            .map(|p| (p.value, p.length))
            .collect();
        Matching { plus: SideTransfer::new(pot, Side::Plus), minus: SideTransfer::new(pot, Side::Minus), core }
    }

    /// Evaluates `D(λ)`, aligning the Floquet vectors with `reference` by sign.
    pub fn eval(&self, lambda: f64, reference: Option<&MatchingSample>) -> MatchingSample {
        let l = C64::new(lambda, 0.0);
        let fp = floquet(&self.plus.local_monodromy(l), None);
        let fm = floquet(&self.minus.local_monodromy(l), None);
        let v_plus = align(real_unit(fp.v), reference.map(|r| r.v_plus));
        let v_minus = align(real_unit(fm.v), reference.map(|r| r.v_minus));
        let core = to_weighted(&chain(&self.core, l).value, l).entries;
        let d = core.apply(&v_minus).wedge(&v_plus).re;
        MatchingSample { lambda, d, v_plus, v_minus, rho_plus: fp.rho.norm(), rho_minus: fm.rho.norm() }
    }
}

fn real_unit(v: Vec2) -> Vec2 {
    let r = Vec2::real(v.0[0].re, v.0[1].re);
    let n = r.norm();
    if n == 0.0 {
        v
    } else {
        r.scale(C64::new(1.0 / n, 0.0))
    }
}

/// Options for [`gap_eigenvalues`].
#[derive(Clone, Copy, Debug)]
pub struct GapSearch {
    /// Multiplier on the number of `√λ` samples per gap.
    pub refine: usize,
    /// Roots closer than this (relative to `1 + λ`) to a gap edge are flagged.
    pub edge_tol: f64,
}

impl Default for GapSearch {
    fn default() -> Self {
        GapSearch { refine: 1, edge_tol: 1e-8 }
    }
}

/// Eigenvalues of `L` in the joint gaps of `bands`, by sign changes of `D` plus bisection.
pub fn gap_eigenvalues(pot: &PerturbedPeriodicPotential, bands: &BandStructure, opts: GapSearch) -> Vec<GapEigenvalue> {
    let matching = Matching::new(pot);
    let h = bands.resolution;
    let mut out: Vec<GapEigenvalue> = bands
        .gaps
        .par_iter()
        .filter(|g| g.width() > 2.0 * EDGE_TOL)
        .flat_map_iter(|gap| roots_in_gap(&matching, *gap, h, opts))
        .collect();
    out.sort_by(|a, b| a.lambda.partial_cmp(&b.lambda).unwrap());
    out
}

fn roots_in_gap(m: &Matching, gap: Interval, h: f64, opts: GapSearch) -> Vec<GapEigenvalue> {
    let (sa, sb) = (gap.lo.sqrt(), gap.hi.sqrt());
    let n = 2 * ((((sb - sa) / h).ceil() as usize).max(16)) * opts.refine.max(1);
    let (mid, half) = (0.5 * (sa + sb), 0.5 * (sb - sa));
    // Chebyshev points in √λ, clustered at the gap edges, ascending
    let lams: Vec<f64> = (0..n)
        .map(|i| {
            let s = mid - half * (PI * (i as f64 + 0.5) / n as f64).cos();
            s * s
        })
        .collect();
    let mut samples: Vec<MatchingSample> = Vec::with_capacity(n);
    for &l in &lams {
        let prev = samples.last();
        let s = m.eval(l, prev);
        samples.push(s);
    }
    let mut roots = Vec::new();
    for w in samples.windows(2) {
        let (a, b) = (w[0], w[1]);
        if a.d == 0.0 || a.d.signum() != b.d.signum() {
            let mut lo = a;
            let mut hi = b;
            for _ in 0..200 {
                if hi.lambda - lo.lambda <= 1e-15 * hi.lambda.max(1.0) {
                    break;
                }
                let mid = m.eval(0.5 * (lo.lambda + hi.lambda), Some(&lo));
                if mid.d == 0.0 {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if mid.d.signum() == lo.d.signum() {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let root = if lo.d.abs() <= hi.d.abs() { lo } else { hi };
            let tol = opts.edge_tol * (1.0 + root.lambda);
            roots.push(GapEigenvalue {
                lambda: root.lambda,
                gap,
                rho_plus: root.rho_plus,
                rho_minus: root.rho_minus,
                v_plus: [root.v_plus.0[0].re, root.v_plus.0[1].re],
                v_minus: [root.v_minus.0[0].re, root.v_minus.0[1].re],
                residual: root.d.abs(),
                sign_change: lo.d.signum() != hi.d.signum() || root.d == 0.0,
                near_edge: root.lambda - gap.lo < tol || gap.hi - root.lambda < tol,
            });
        }
    }
    roots
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::{make_dislocation, make_interface, make_periodic};

    fn two_step() -> PerturbedPeriodicPotential {
        make_periodic(&[(0.5, 1.0), (0.5, 9.0)], 2.0).unwrap()
    }

    #[test]
    fn free_bands_fill_range() {
        let v = make_periodic(&[(1.0, 1.0)], 1.0).unwrap();
        let b = band_scan(&v, Side::Plus, 400.0, None).unwrap();
        assert!(b.gaps.iter().all(|g| g.width() < 1e-8));
        let covered: f64 = b.bands.iter().map(|b| b.width()).sum();
        assert!((covered - 400.0).abs() < 1e-8);
    }

    #[test]
    fn two_step_resonances_in_gaps() {
        let v = two_step();
        let b = band_scan(&v, Side::Plus, 200.0, None).unwrap();
        let w = PI / 2.0;
        for k in [1.0, 3.0, 5.0, 7.0] {
            assert!(b.gap_of(k * k * w * w).is_some(), "k = {k}");
        }
        for band in &b.bands {
            let t = SideTransfer::new(&v, Side::Plus).local(C64::new(band.mid(), 0.0)).value.trace();
            assert!(t.re.abs() < 2.0);
        }
        for gap in &b.gaps {
            let t = SideTransfer::new(&v, Side::Plus).local(C64::new(gap.mid(), 0.0)).value.trace();
            assert!(t.re.abs() > 2.0);
        }
    }

    #[test]
    fn free_weyl_functions() {
        let v = make_periodic(&[(1.0, 1.0)], 1.0).unwrap();
        for l in [C64::new(1.0, 0.5), C64::new(-3.0, 0.1), C64::new(20.0, 2.0)] {
            let mp = weyl_m(&v, Side::Plus, l).unwrap();
            let mm = weyl_m(&v, Side::Minus, l).unwrap();
            let r = l.sqrt();
            assert!((mp - C64::i() * r).norm() < 1e-10);
            assert!((mm + C64::i() * r).norm() < 1e-10);
        }
        assert!(weyl_m(&v, Side::Plus, C64::new(1.0, 0.0)).is_err());
    }

    #[test]
    fn periodic_has_no_gap_eigenvalues() {
        let v = two_step();
        let b = joint_bands(&v, 150.0, None).unwrap();
        assert!(gap_eigenvalues(&v, &b, GapSearch::default()).is_empty());
    }

    #[test]
    fn dislocation_eigenvalues_verified() {
        let v = make_dislocation(&two_step(), 4.0, 1.0).unwrap();
        let b = joint_bands(&v, 150.0, None).unwrap();
        let e = gap_eigenvalues(&v, &b, GapSearch::default());
        assert!(!e.is_empty());
        for ev in &e {
            assert!(ev.residual < 1e-10 && ev.sign_change);
            assert!(ev.rho_plus < 1.0 && ev.rho_minus < 1.0);
            assert!(!b.in_band(ev.lambda));
        }
        let e2 = gap_eigenvalues(&v, &b, GapSearch { refine: 2, ..Default::default() });
        assert_eq!(e.len(), e2.len());
    }

    #[test]
    fn interface_joint_spectrum_is_union() {
        let l = two_step();
        let r = make_periodic(&[(0.5, 1.0), (0.5, 4.0)], 3.0).unwrap();
        let v = make_interface(&l, &r).unwrap();
        let j = joint_bands(&v, 100.0, None).unwrap();
        let p = band_scan(&v, Side::Plus, 100.0, None).unwrap();
        let m = band_scan(&v, Side::Minus, 100.0, None).unwrap();
        for lam in (1..2000).map(|i| i as f64 * 0.05) {
            assert_eq!(j.in_band(lam), p.in_band(lam) || m.in_band(lam), "lambda = {lam}");
        }
    }
}
