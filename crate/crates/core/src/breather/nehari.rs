//! Inner maximization `m(w)`: the unique maximizer of `J` on `ℝ_{≥0}w + H⁻`.

use serde::Serialize;

use super::functional::{Energy, Problem};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug)]
pub struct NehariOptions {
    /// Stop when the `H(w)`-restricted gradient is below `tol · max(1, ‖u‖_H)`.
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for NehariOptions {
    fn default() -> Self {
        NehariOptions { tol: 1e-10, max_iters: 20_000 }
    }
}

/// A point of the Nehari–Pankov manifold in `H`-normalized coordinates.
#[derive(Clone, Debug)]
pub struct NehariPoint {
    /// Unit direction in `H⁺`.
    pub w: Vec<f64>,
    pub s: f64,
    /// `H⁻` component (zero on `H⁺` entries).
    pub v: Vec<f64>,
    pub z: Vec<f64>,
    /// Riesz gradient `∇_z J(u)`.
    pub grad: Vec<f64>,
    pub energy: Energy,
    pub iters: usize,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct NehariResiduals {
    /// `|J′(u)[u]| / ‖u‖_H`.
    pub along_u: f64,
    /// `max |J′(u)[e]|` over unit `H⁻` coordinate directions.
    pub minus_max: f64,
    /// `|J′(u)[u]| / (2J)`: relative defect of `J = ((p−1)/(p+1))∫Γ|u|^{p+1}`.
    pub identity_rel: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

impl NehariPoint {
    pub fn norm(&self) -> f64 {
        norm(&self.z)
    }

    pub fn residuals(&self, plus: &[bool]) -> NehariResiduals {
        let along = dot(&self.grad, &self.z);
        let minus_max = self.grad.iter().zip(plus).filter(|(_, p)| !**p).map(|(g, _)| g.abs()).fold(0.0, f64::max);
        NehariResiduals {
            along_u: along.abs() / self.norm().max(f64::MIN_POSITIVE),
            minus_max,
            identity_rel: along.abs() / (2.0 * self.energy.j.abs()).max(f64::MIN_POSITIVE),
        }
    }
}

/// `m(w)` for an arbitrary `w ∉ H⁻`.
pub fn nehari_project(problem: &Problem, w: &[f64], opts: NehariOptions) -> Result<NehariPoint> {
    let plus = problem.plus_mask();
    let wp: Vec<f64> = w.iter().zip(&plus).map(|(x, p)| if *p { *x } else { 0.0 }).collect();
    let n = norm(&wp);
    if !(n > 1e-12 * norm(w).max(1e-300)) || n == 0.0 {
        return Err(Error::Domain("m(w) requires w outside H-".into()));
    }
    let wu: Vec<f64> = wp.iter().map(|x| x / n).collect();
    maximize(problem, &wu, None, &plus, opts)
}

/// Maximizer of `J(sw) = s² − s^{p+1}J₁(w)` for unit `w ∈ H⁺`.
fn ray_start(problem: &Problem, w: &[f64]) -> f64 {
    let e = problem.energy(&problem.from_z(w));
    let p = problem.p;
    if e.j1 <= 0.0 {
        return 1.0;
    }
    (2.0 / ((p + 1.0) * e.j1)).powf(1.0 / (p - 1.0))
}

/// Ascent over `(s, v) ∈ ℝ_{≥0} × H⁻` from a warm start.
pub fn maximize(
    problem: &Problem,
    w: &[f64],
    warm: Option<(f64, &[f64])>,
    plus: &[bool],
    opts: NehariOptions,
) -> Result<NehariPoint> {
    let (mut s, mut v) = match warm {
        Some((s, v)) => (s.max(0.0), v.to_vec()),
        None => (ray_start(problem, w), vec![0.0; w.len()]),
    };
    if s == 0.0 {
        s = ray_start(problem, w);
    }
    let assemble = |s: f64, v: &[f64]| -> Vec<f64> { w.iter().zip(v).map(|(a, b)| s * a + b).collect() };
    let restricted = |g: &[f64]| -> (f64, Vec<f64>) {
        let gs = dot(g, w);
        let gv: Vec<f64> = g.iter().zip(plus).map(|(x, p)| if *p { 0.0 } else { *x }).collect();
        (gs, gv)
    };
    let mut z = assemble(s, &v);
    let (mut f, mut g, mut e) = problem.eval_z(&z);
    let (mut gs, mut gv) = restricted(&g);
    let mut alpha = 0.25;
    let mut prev: Option<(f64, Vec<f64>, f64, Vec<f64>)> = None;
    for it in 0..opts.max_iters {
        let gnorm = (gs * gs + dot(&gv, &gv)).sqrt();
        if gnorm <= opts.tol * norm(&z).max(1.0) {
            return Ok(NehariPoint { w: w.to_vec(), s, v, z, grad: g, energy: e, iters: it });
        }
        if let Some((ps, pv, pgs, pgv)) = &prev {
            // BB1 step for ascent on a concave function: Δy·Δy / (−Δy·Δg)
            let dy2 = (s - ps).powi(2) + v.iter().zip(pv).map(|(a, b)| (a - b).powi(2)).sum::<f64>();
            let dydg = (s - ps) * (gs - pgs) + v.iter().zip(pv).zip(gv.iter().zip(pgv)).map(|((a, b), (c, d))| (a - b) * (c - d)).sum::<f64>();
            if dydg < 0.0 {
                alpha = (dy2 / -dydg).clamp(1e-6, 1e3);
            }
        }
        let mut step = alpha;
        let mut accepted = false;
        for _ in 0..60 {
            let s_new = (s + step * gs).max(0.0);
            let v_new: Vec<f64> = v.iter().zip(&gv).map(|(a, b)| a + step * b).collect();
            let z_new = assemble(s_new, &v_new);
            let (f_new, g_new, e_new) = problem.eval_z(&z_new);
            if f_new >= f + 1e-4 * step * gnorm * gnorm - 1e-14 * f.abs() {
                prev = Some((s, v.clone(), gs, gv.clone()));
                s = s_new;
                v = v_new;
                z = z_new;
                f = f_new;
                g = g_new;
                e = e_new;
                let r = restricted(&g);
                gs = r.0;
                gv = r.1;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            return Err(Error::NotConverged(format!("inner ascent stalled at restricted gradient {gnorm:.3e}")));
        }
    }
    Err(Error::NotConverged(format!("inner ascent exceeded {} iterations", opts.max_iters)))
}
