//! Outer minimization of `Ĵ(w) = J(m(w))` over the unit sphere of `H⁺`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use super::basis::GalerkinBasis;
use super::functional::{BreatherField, Energy, Problem};
use super::nehari::{maximize, NehariOptions, NehariPoint, NehariResiduals};
use super::residual::{boundary_mass_fraction, pde_residual, PdeResidual};
use crate::error::{Error, Result};
use crate::potential::NonlinearityProfile;

/// Relative gradient at which restarts are compared before polishing the best.
const COARSE_TOL: f64 = 1e-5;

#[derive(Clone, Debug)]
pub struct SolveOptions {
    /// Random starts in addition to the deterministic one.
    pub n_starts: usize,
    pub seed: u64,
    pub inner: NehariOptions,
    /// Stop when `‖J′(u)‖_{H′} ≤ tol_outer · ‖u‖_H`.
    pub tol_outer: f64,
    pub max_outer: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { n_starts: 5, seed: 0, inner: NehariOptions::default(), tol_outer: 1e-9, max_outer: 4000 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct StartSummary {
    /// `0` is the deterministic start.
    pub start: usize,
    pub j: f64,
    pub grad_norm: f64,
    pub outer_iters: usize,
    pub inner_iters: usize,
    pub converged: bool,
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SolveReport {
    pub energy: Energy,
    pub norm_h: f64,
    pub norm_plus: f64,
    pub norm_minus: f64,
    /// `‖J′(u)‖_{H′}`.
    pub grad_norm: f64,
    pub nehari: NehariResiduals,
    /// `|J − ((p−1)/(p+1))∫Γ|u|^{p+1}| / J`.
    pub nehari_identity_rel: f64,
    pub pde: PdeResidual,
    pub boundary_mass: f64,
    /// Smallest `‖m(w)⁺‖_H` met along the accepted iterates of every start.
    pub min_plus_norm: f64,
    pub outer_iters: usize,
    pub inner_iters: usize,
    pub best_start: usize,
    pub converged: bool,
    pub temporal_modes: Vec<u64>,
    /// Every start, run to the coarse tolerance.
    pub starts: Vec<StartSummary>,
    /// Continuation of the best start to the full tolerance.
    pub polish: Option<StartSummary>,
}

struct StartResult {
    point: NehariPoint,
    summary: StartSummary,
    min_plus: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(a: &mut [f64]) -> f64 {
    let n = dot(a, a).sqrt();
    if n > 0.0 {
        a.iter_mut().for_each(|x| *x /= n);
    }
    n
}

/// Gaussian bump at the centre of `supp Γ` times the lowest active mode, in `H⁺`.
pub fn deterministic_start(problem: &Problem, gamma: &NonlinearityProfile) -> Result<Vec<f64>> {
    let b = problem.basis;
    let (center, width) = match gamma.support() {
        Some((a, c)) => (0.5 * (a + c), 0.5 * (c - a)),
        None => (0.0, b.tail_period),
    };
    let g: Vec<f64> = b.nodes.iter().map(|x| (-((x - center) / width).powi(2)).exp()).collect();
    let mut field = BreatherField::zeros(&problem.ks, problem.n_space());
    for m in 0..problem.n_space() {
        field.coeffs[m] = crate::linalg::C64::new(0.5 * b.inner(&g, &b.modes[m]), 0.0);
    }
    let mut z = problem.to_z(&field);
    for (x, p) in z.iter_mut().zip(problem.plus_mask()) {
        if !p {
            *x = 0.0;
        }
    }
    if normalize(&mut z) < 1e-12 {
        return Err(Error::Numerical("deterministic start has no H+ component".into()));
    }
    Ok(z)
}

/// Random localized start in `H⁺`: per active temporal mode a Gaussian bump with random
/// centre in `supp Γ`, random width and random complex amplitude decaying like `1/k²`.
pub fn random_start(problem: &Problem, gamma: &NonlinearityProfile, seed: u64) -> Result<Vec<f64>> {
    let b = problem.basis;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = gamma.support().unwrap_or((-b.tail_period, b.tail_period));
    let half = 0.5 * (hi - lo);
    let mut field = BreatherField::zeros(&problem.ks, problem.n_space());
    for (ik, &k) in problem.ks.iter().enumerate() {
        let center = rng.gen_range(lo..=hi);
        let width = half * rng.gen_range(0.25..=1.0);
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        let amp = crate::linalg::C64::new(re, im) / (k * k) as f64;
        let g: Vec<f64> = b.nodes.iter().map(|x| (-((x - center) / width).powi(2)).exp()).collect();
        for m in 0..problem.n_space() {
            field.coeffs[ik * problem.n_space() + m] = amp * b.inner(&g, &b.modes[m]);
        }
    }
    let mut z = problem.to_z(&field);
    for (x, p) in z.iter_mut().zip(problem.plus_mask()) {
        if !p {
            *x = 0.0;
        }
    }
    if normalize(&mut z) < 1e-12 {
        return Err(Error::Numerical(format!("random start {seed} has no H+ component")));
    }
    Ok(z)
}

fn descend(problem: &Problem, w0: Vec<f64>, start: usize, opts: &SolveOptions) -> Result<StartResult> {
    let plus = problem.plus_mask();
    let riemannian = |pt: &NehariPoint| -> Vec<f64> {
        let mut g: Vec<f64> = pt.grad.iter().zip(&plus).map(|(x, p)| if *p { pt.s * x } else { 0.0 }).collect();
        let r = dot(&g, &pt.w);
        g.iter_mut().zip(&pt.w).for_each(|(a, b)| *a -= r * b);
        g
    };
    // inner solves are only as tight as the outer gradient requires
    let inner_for = |rel_grad: f64| NehariOptions { tol: opts.inner.tol.max((1e-2 * rel_grad).min(1e-4)), ..opts.inner };
    let mut pt = maximize(problem, &w0, None, &plus, inner_for(1.0))?;
    let mut tight = false;
    let mut inner_iters = pt.iters;
    let mut min_plus = pt.s;
    let mut g = riemannian(&pt);
    let mut alpha = 0.25 / pt.s.powi(2).max(1e-12);
    let mut history = vec![pt.energy.j];
    let mut prev: Option<(Vec<f64>, Vec<f64>)> = None;
    for it in 0..opts.max_outer {
        let gnorm = dot(&pt.grad, &pt.grad).sqrt();
        let rel = gnorm / pt.norm();
        if rel <= opts.tol_outer && !tight {
            pt = maximize(problem, &pt.w, Some((pt.s, &pt.v)), &plus, opts.inner)?;
            inner_iters += pt.iters;
            g = riemannian(&pt);
            *history.last_mut().unwrap() = pt.energy.j;
            prev = None;
            tight = true;
            continue;
        }
        if rel <= opts.tol_outer {
            return Ok(StartResult {
                summary: StartSummary {
                    start,
                    j: pt.energy.j,
                    grad_norm: gnorm,
                    outer_iters: it,
                    inner_iters,
                    converged: true,
                    error: None,
                },
                point: pt,
                min_plus,
            });
        }
        if let Some((pw, pg)) = &prev {
            let dw: Vec<f64> = pt.w.iter().zip(pw).map(|(a, b)| a - b).collect();
            let dg: Vec<f64> = g.iter().zip(pg).map(|(a, b)| a - b).collect();
            let c = dot(&dw, &dg);
            if c > 0.0 {
                alpha = (dot(&dw, &dw) / c).clamp(1e-8, 1e4) ;
            }
        }
        let reference = history.iter().rev().take(8).copied().fold(f64::NEG_INFINITY, f64::max);
        let g2 = dot(&g, &g);
        let mut step = alpha;
        let mut next = None;
        for _ in 0..40 {
            let mut w: Vec<f64> = pt.w.iter().zip(&g).map(|(a, b)| a - step * b).collect();
            normalize(&mut w);
            // warm start from the current (s, v)
            if let Ok(cand) = maximize(problem, &w, Some((pt.s, &pt.v)), &plus, inner_for(rel)) {
                inner_iters += cand.iters;
                if cand.energy.j <= reference - 1e-4 * step * g2 + 1e-13 * reference.abs() {
                    next = Some(cand);
                    break;
                }
            }
            step *= 0.5;
        }
        let Some(cand) = next else {
            if !tight {
                // a loose inner solve can underestimate J(m(w)) enough to block every step
                pt = maximize(problem, &pt.w, Some((pt.s, &pt.v)), &plus, opts.inner)?;
                inner_iters += pt.iters;
                g = riemannian(&pt);
                *history.last_mut().unwrap() = pt.energy.j;
                prev = None;
                tight = true;
                continue;
            }
            return Ok(StartResult {
                summary: StartSummary {
                    start,
                    j: pt.energy.j,
                    grad_norm: gnorm,
                    outer_iters: it,
                    inner_iters,
                    converged: false,
                    error: Some(format!("outer line search failed at gradient {gnorm:.3e}")),
                },
                point: pt,
                min_plus,
            });
        };
        prev = Some((pt.w.clone(), g));
        pt = cand;
        tight = false;
        min_plus = min_plus.min(pt.s);
        g = riemannian(&pt);
        history.push(pt.energy.j);
    }
    let gnorm = dot(&pt.grad, &pt.grad).sqrt();
    Ok(StartResult {
        summary: StartSummary {
            start,
            j: pt.energy.j,
            grad_norm: gnorm,
            outer_iters: opts.max_outer,
            inner_iters,
            converged: false,
            error: Some(format!("outer iteration limit reached at gradient {gnorm:.3e}")),
        },
        point: pt,
        min_plus,
    })
}

/// Ground state over all odd temporal modes of the basis.
pub fn ground_state(
    basis: &GalerkinBasis,
    gamma: &NonlinearityProfile,
    p: f64,
    opts: &SolveOptions,
) -> Result<(BreatherField, SolveReport)> {
    solve_modes(basis, gamma, p, &basis.odd_modes(1), opts)
}

/// Ground state among `T/(2m)`-antiperiodic fields: temporal modes `m·ℤ_odd`.
pub fn ground_state_antiperiodic(
    basis: &GalerkinBasis,
    m: u64,
    gamma: &NonlinearityProfile,
    p: f64,
    opts: &SolveOptions,
) -> Result<(BreatherField, SolveReport)> {
    if m.is_multiple_of(2) {
        return Err(Error::InvalidConfig(format!("antiperiodic class needs odd m, got {m}")));
    }
    let ks = basis.odd_modes(m);
    if ks.is_empty() {
        return Err(Error::InvalidConfig(format!("K = {} has no multiple of m = {m}", basis.k_max)));
    }
    let (field, report) = solve_modes(basis, gamma, p, &ks, opts)?;
    if field.ks.iter().any(|&k| k < m) {
        return Err(Error::Numerical("active mode below m".into()));
    }
    Ok((field, report))
}

/// Embeds a field into a larger temporal mode set (zeros elsewhere).
pub fn embed(field: &BreatherField, ks: &[u64]) -> BreatherField {
    let mut out = BreatherField::zeros(ks, field.n_space);
    for (ik, k) in ks.iter().enumerate() {
        if let Some(c) = field.mode(*k) {
            out.coeffs[ik * field.n_space..(ik + 1) * field.n_space].copy_from_slice(c);
        }
    }
    out
}

pub fn solve_modes(
    basis: &GalerkinBasis,
    gamma: &NonlinearityProfile,
    p: f64,
    ks: &[u64],
    opts: &SolveOptions,
) -> Result<(BreatherField, SolveReport)> {
    let problem = Problem::new(basis, gamma, p, ks)?;
    let mut starts = vec![deterministic_start(&problem, gamma)?];
    for i in 0..opts.n_starts {
        starts.push(random_start(&problem, gamma, opts.seed.wrapping_add(i as u64))?);
    }
    // every start to a coarse tolerance, then only the best one to full precision
    let coarse = SolveOptions { tol_outer: opts.tol_outer.max(COARSE_TOL), ..opts.clone() };
    let results: Vec<Result<StartResult>> = starts
        .into_par_iter()
        .enumerate()
        .map(|(i, w)| descend(&problem, w, i, &coarse))
        .collect();
    let mut summaries = Vec::new();
    let mut best: Option<StartResult> = None;
    let mut min_plus = f64::INFINITY;
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(sr) => {
                summaries.push(sr.summary.clone());
                min_plus = min_plus.min(sr.min_plus);
                let better = match &best {
                    None => true,
                    Some(b) => {
                        (sr.summary.converged && !b.summary.converged)
                            || (sr.summary.converged == b.summary.converged && sr.point.energy.j < b.point.energy.j)
                    }
                };
                if better {
                    best = Some(sr);
                }
            }
            Err(e) => summaries.push(StartSummary {
                start: i,
                j: f64::NAN,
                grad_norm: f64::NAN,
                outer_iters: 0,
                inner_iters: 0,
                converged: false,
                error: Some(e.to_string()),
            }),
        }
    }
    let mut polish = None;
    let best = match best {
        Some(b) if coarse.tol_outer > opts.tol_outer => {
            let polished = descend(&problem, b.point.w.clone(), b.summary.start, opts)?;
            min_plus = min_plus.min(polished.min_plus);
            polish = Some(polished.summary.clone());
            Some(StartResult {
                summary: StartSummary {
                    outer_iters: b.summary.outer_iters + polished.summary.outer_iters,
                    inner_iters: b.summary.inner_iters + polished.summary.inner_iters,
                    ..polished.summary.clone()
                },
                ..polished
            })
        }
        other => other,
    };
    let Some(best) = best else {
        let diag: Vec<String> = summaries.iter().filter_map(|s| s.error.clone()).collect();
        return Err(Error::NotConverged(format!("all starts failed: {}", diag.join("; "))));
    };
    let field = problem.from_z(&best.point.z);
    let (norm_h, norm_plus, norm_minus) = problem.norms(&field);
    let e = best.point.energy;
    let pde = pde_residual(basis, &field, gamma, p);
    let report = SolveReport {
        energy: e,
        norm_h: norm_h.sqrt(),
        norm_plus: norm_plus.sqrt(),
        norm_minus: norm_minus.sqrt(),
        grad_norm: dot(&best.point.grad, &best.point.grad).sqrt(),
        nehari: best.point.residuals(&problem.plus_mask()),
        nehari_identity_rel: ((e.j - (p - 1.0) / (p + 1.0) * e.gamma_moment) / e.j).abs(),
        pde,
        boundary_mass: boundary_mass_fraction(basis, &field),
        min_plus_norm: min_plus,
        outer_iters: best.summary.outer_iters,
        inner_iters: best.summary.inner_iters,
        best_start: best.summary.start,
        converged: best.summary.converged,
        temporal_modes: ks.to_vec(),
        starts: summaries,
        polish,
    };
    Ok((field, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::breather::testing::{bump, small_basis};

    fn opts() -> SolveOptions {
        SolveOptions { n_starts: 2, ..Default::default() }
    }

    #[test]
    fn ground_state_satisfies_the_manifold_conditions() {
        let b = small_basis(3);
        let (f, r) = ground_state(&b, &bump(), 3.0, &opts()).unwrap();
        assert!(r.converged, "{:?}", r.starts);
        assert!(r.energy.j > 0.0 && r.norm_h > 0.0);
        assert!(r.nehari.along_u <= 1e-6 * r.norm_h && r.nehari.minus_max <= 1e-6 * r.norm_h);
        assert!(r.nehari_identity_rel < 1e-6);
        assert!(r.min_plus_norm > 0.0);
        assert_eq!(f.ks, vec![1, 3]);
        // every start reaches the same level
        for s in &r.starts {
            assert!((s.j - r.energy.j).abs() < 1e-6 * r.energy.j, "{s:?}");
        }
    }

    #[test]
    fn scaling_gamma_scales_the_solution() {
        let b = small_basis(3);
        let s: f64 = 3.0;
        let g2 = NonlinearityProfile::bump(0.5, 0.5, 1.0 / s.powi(2)).unwrap();
        let (u, _) = ground_state(&b, &bump(), 3.0, &opts()).unwrap();
        let (v, _) = ground_state(&b, &g2, 3.0, &opts()).unwrap();
        let (a, c) = (u.phase_normalized().scaled(s), v.phase_normalized());
        let diff: f64 = a.coeffs.iter().zip(&c.coeffs).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt();
        let norm: f64 = c.coeffs.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        assert!(diff < 1e-3 * norm, "{}", diff / norm);
    }

    #[test]
    fn antiperiodic_class_drops_low_modes() {
        let b = small_basis(3);
        let (u1, r1) = ground_state_antiperiodic(&b, 1, &bump(), 3.0, &opts()).unwrap();
        let (_, r) = ground_state(&b, &bump(), 3.0, &opts()).unwrap();
        assert_eq!(r1.energy.j, r.energy.j);
        let (u3, r3) = ground_state_antiperiodic(&b, 3, &bump(), 3.0, &opts()).unwrap();
        assert!(r3.converged);
        assert_eq!(u3.ks, vec![3]);
        assert!(r3.energy.j > r1.energy.j);
        let pr = Problem::new(&b, &bump(), 3.0, &[1, 3]).unwrap();
        let e3 = embed(&u3, &[1, 3]);
        assert!(e3.mode(1).unwrap().iter().all(|c| c.norm() == 0.0));
        let diff = BreatherField { coeffs: u1.coeffs.iter().zip(&e3.coeffs).map(|(a, c)| a - c).collect(), ..u1.clone() };
        assert!(pr.norms(&diff).0.sqrt() > 1e-3);
        assert!(ground_state_antiperiodic(&b, 2, &bump(), 3.0, &opts()).is_err());
        assert!(ground_state_antiperiodic(&b, 5, &bump(), 3.0, &opts()).is_err());
    }

    #[test]
    fn starts_are_unit_vectors_in_the_positive_space() {
        let b = small_basis(3);
        let g = bump();
        let pr = Problem::new(&b, &g, 3.0, &[1, 3]).unwrap();
        let plus = pr.plus_mask();
        let mut all = vec![deterministic_start(&pr, &g).unwrap()];
        all.extend((0..3).map(|s| random_start(&pr, &g, s).unwrap()));
        for w in &all {
            assert!((dot(w, w) - 1.0).abs() < 1e-12);
            assert!(w.iter().zip(&plus).all(|(x, p)| *p || *x == 0.0));
        }
        assert_eq!(random_start(&pr, &g, 5).unwrap(), random_start(&pr, &g, 5).unwrap());
    }
}
