//! Discrete functional `J = J₀ − J₁` on the Galerkin space, its gradient, and the
//! `H`-normalized real coordinates used by the optimizers.

use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

use super::basis::GalerkinBasis;
use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::potential::NonlinearityProfile;

/// Coefficients `c_{k,m}` for `k > 0` in `ks`; `c_{−k,m} = conj(c_{k,m})` is implicit.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BreatherField {
    pub ks: Vec<u64>,
    pub n_space: usize,
    /// Row-major `[ik * n_space + m]`.
    pub coeffs: Vec<C64>,
}

impl BreatherField {
    pub fn zeros(ks: &[u64], n_space: usize) -> Self {
        BreatherField { ks: ks.to_vec(), n_space, coeffs: vec![C64::new(0.0, 0.0); ks.len() * n_space] }
    }

    pub fn get(&self, ik: usize, m: usize) -> C64 {
        self.coeffs[ik * self.n_space + m]
    }

    pub fn scaled(&self, s: f64) -> Self {
        BreatherField { coeffs: self.coeffs.iter().map(|c| c * s).collect(), ..self.clone() }
    }

    /// Time shift `t → t + τ`: `c_k → c_k e^{ikωτ}` with `θ = ωτ`.
    pub fn time_shifted(&self, theta: f64) -> Self {
        let mut out = self.clone();
        for (ik, &k) in self.ks.iter().enumerate() {
            let ph = C64::from_polar(1.0, k as f64 * theta);
            for m in 0..self.n_space {
                out.coeffs[ik * self.n_space + m] *= ph;
            }
        }
        out
    }

    /// Time shift making the largest lowest-mode coefficient real positive.
    pub fn phase_normalized(&self) -> Self {
        let Some(ik) = (0..self.ks.len()).find(|&ik| (0..self.n_space).any(|m| self.get(ik, m).norm() > 0.0)) else {
            return self.clone();
        };
        let m = (0..self.n_space)
            .max_by(|&a, &b| self.get(ik, a).norm().partial_cmp(&self.get(ik, b).norm()).unwrap())
            .unwrap();
        let theta = -self.get(ik, m).arg() / self.ks[ik] as f64;
        self.time_shifted(theta)
    }

    /// `u(x_j, t)` at the given grid nodes and times, `[node][time]`.
    pub fn sample(&self, basis: &GalerkinBasis, nodes: &[usize], times: &[f64]) -> Vec<Vec<f64>> {
        nodes
            .par_iter()
            .map(|&j| {
                let uk: Vec<C64> = (0..self.ks.len())
                    .map(|ik| (0..self.n_space).map(|m| self.get(ik, m) * basis.modes[m][j]).sum())
                    .collect();
                times
                    .iter()
                    .map(|&t| {
                        self.ks
                            .iter()
                            .zip(&uk)
                            .map(|(&k, v)| 2.0 * (v * C64::from_polar(1.0, k as f64 * basis.omega * t)).re)
                            .sum()
                    })
                    .collect()
            })
            .collect()
    }

    /// Coefficients of temporal mode `k` (empty if inactive).
    pub fn mode(&self, k: u64) -> Option<&[C64]> {
        let ik = self.ks.iter().position(|&q| q == k)?;
        Some(&self.coeffs[ik * self.n_space..(ik + 1) * self.n_space])
    }
}

/// `(J, J₀, J₁)`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Energy {
    pub j: f64,
    pub j0: f64,
    pub j1: f64,
    /// `∫ Γ|u|^{p+1}` over `ℝ × 𝕋`.
    pub gamma_moment: f64,
}

/// The discrete problem: basis, active temporal modes, quadrature on `supp Γ`.
pub struct Problem<'a> {
    pub basis: &'a GalerkinBasis,
    pub p: f64,
    pub ks: Vec<u64>,
    pub nt: usize,
    /// `(node index, h·Γ(x_j))` for nodes with `Γ > 0`.
    quad: Vec<(usize, f64)>,
    /// `φ_m(x_j)` on quadrature nodes, row-major `[q * M + m]`.
    phi_q: Vec<f64>,
    /// `λ_m − k²ω²`, row-major `[ik * M + m]`.
    pub d: Vec<f64>,
    cos_t: Vec<f64>,
    sin_t: Vec<f64>,
}

impl<'a> Problem<'a> {
    pub fn new(basis: &'a GalerkinBasis, gamma: &NonlinearityProfile, p: f64, ks: &[u64]) -> Result<Self> {
        if !(p > 1.0) {
            return Err(Error::Domain(format!("p must exceed 1, got {p}")));
        }
        if ks.is_empty() || ks.iter().any(|&k| k % 2 == 0 || k > basis.k_max) {
            return Err(Error::InvalidConfig(format!("temporal modes {ks:?} must be odd and at most K = {}", basis.k_max)));
        }
        let kmax = *ks.iter().max().unwrap() as usize;
        let nt = 4 * kmax + 4;
        let quad: Vec<(usize, f64)> = basis
            .nodes
            .iter()
            .enumerate()
            .filter_map(|(j, &x)| {
                let g = gamma.eval(x);
                (g > 0.0 && j > 0 && j + 1 < basis.nodes.len()).then_some((j, basis.h * g))
            })
            .collect();
        if quad.is_empty() {
            return Err(Error::InvalidConfig("Gamma vanishes on every grid node".into()));
        }
        let mm = basis.n_modes();
        let mut phi_q = Vec::with_capacity(quad.len() * mm);
        for &(j, _) in &quad {
            phi_q.extend(basis.modes.iter().map(|phi| phi[j]));
        }
        let mut d = Vec::with_capacity(ks.len() * mm);
        for &k in ks {
            let nu = (k as f64 * basis.omega).powi(2);
            d.extend(basis.lambdas.iter().map(|l| l - nu));
        }
        let (cos_t, sin_t) = time_table(ks, nt);
        Ok(Problem { basis, p, ks: ks.to_vec(), nt, quad, phi_q, d, cos_t, sin_t })
    }

    pub fn n_space(&self) -> usize {
        self.basis.n_modes()
    }

    pub fn dim(&self) -> usize {
        self.d.len()
    }

    pub fn quadrature_nodes(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.quad.iter().copied()
    }

    /// `u(x_j, t_n)` on the quadrature nodes, `[q][n]`.
    fn synthesize(&self, field: &BreatherField) -> Vec<Vec<f64>> {
        let mm = self.n_space();
        let nk = self.ks.len();
        (0..self.quad.len())
            .into_par_iter()
            .map(|q| {
                let row = &self.phi_q[q * mm..(q + 1) * mm];
                let uk: Vec<C64> = (0..nk)
                    .map(|ik| {
                        let c = &field.coeffs[ik * mm..(ik + 1) * mm];
                        let (mut re, mut im) = (0.0, 0.0);
                        for (ci, f) in c.iter().zip(row) {
                            re += ci.re * f;
                            im += ci.im * f;
                        }
                        C64::new(re, im)
                    })
                    .collect();
                (0..self.nt)
                    .map(|n| {
                        let mut u = 0.0;
                        for (ik, v) in uk.iter().enumerate() {
                            let (c, s) = (self.cos_t[ik * self.nt + n], self.sin_t[ik * self.nt + n]);
                            u += 2.0 * (v.re * c - v.im * s);
                        }
                        u
                    })
                    .collect()
            })
            .collect()
    }

    pub fn energy(&self, field: &BreatherField) -> Energy {
        let j0: f64 = 2.0 * field.coeffs.iter().zip(&self.d).map(|(c, d)| d * c.norm_sqr()).sum::<f64>();
        let u = self.synthesize(field);
        let moment: f64 = u
            .iter()
            .zip(&self.quad)
            .map(|(ut, &(_, w))| w * ut.iter().map(|v| v.abs().powf(self.p + 1.0)).sum::<f64>() / self.nt as f64)
            .sum();
        let j1 = 2.0 / (self.p + 1.0) * moment;
        Energy { j: j0 - j1, j0, j1, gamma_moment: moment }
    }

    /// `P_{k,m} = ∫ Γ φ_m ⟨|u|^{p−1}u e^{−ikωt}⟩ dx` together with the energy.
    fn nonlinear_projection(&self, field: &BreatherField) -> (Vec<C64>, f64) {
        let mm = self.n_space();
        let nk = self.ks.len();
        let u = self.synthesize(field);
        let per_node: Vec<(Vec<C64>, f64)> = u
            .par_iter()
            .zip(&self.quad)
            .map(|(ut, &(_, w))| {
                let mut nk_hat = vec![C64::new(0.0, 0.0); nk];
                let mut moment = 0.0;
                for (n, &v) in ut.iter().enumerate() {
                    let a = v.abs();
                    let nl = a.powf(self.p - 1.0) * v;
                    moment += nl * v;
                    for (ik, slot) in nk_hat.iter_mut().enumerate() {
                        let (c, s) = (self.cos_t[ik * self.nt + n], self.sin_t[ik * self.nt + n]);
                        *slot += C64::new(nl * c, -nl * s);
                    }
                }
                let scale = w / self.nt as f64;
                (nk_hat.into_iter().map(|z| z * scale).collect(), moment * scale)
            })
            .collect();
        let mut proj = vec![C64::new(0.0, 0.0); nk * mm];
        let mut moment = 0.0;
        // ordered reduction for determinism
        for (q, (nh, mo)) in per_node.iter().enumerate() {
            moment += mo;
            let row = &self.phi_q[q * mm..(q + 1) * mm];
            for ik in 0..nk {
                let z = nh[ik];
                let out = &mut proj[ik * mm..(ik + 1) * mm];
                for (o, f) in out.iter_mut().zip(row) {
                    *o += z * f;
                }
            }
        }
        (proj, moment)
    }

    /// `∂J/∂c̄_{k,m} = 2(λ_m − k²ω²)c_{k,m} − 2P_{k,m}`, with the energy.
    pub fn gradient(&self, field: &BreatherField) -> (BreatherField, Energy) {
        let (proj, moment) = self.nonlinear_projection(field);
        let coeffs: Vec<C64> = field.coeffs.iter().zip(&self.d).zip(&proj).map(|((c, d), p)| 2.0 * (c * d - p)).collect();
        let j0: f64 = 2.0 * field.coeffs.iter().zip(&self.d).map(|(c, d)| d * c.norm_sqr()).sum::<f64>();
        let j1 = 2.0 / (self.p + 1.0) * moment;
        (
            BreatherField { ks: field.ks.clone(), n_space: field.n_space, coeffs },
            Energy { j: j0 - j1, j0, j1, gamma_moment: moment },
        )
    }

    /// `J′(u)[v] = 2 Re Σ conj(∂J/∂c̄)·v`.
    pub fn directional(&self, field: &BreatherField, dir: &BreatherField) -> f64 {
        let (g, _) = self.gradient(field);
        pairing(&g, dir)
    }

    /// `‖u‖²_H`, `‖u⁺‖²_H`, `‖u⁻‖²_H`.
    pub fn norms(&self, field: &BreatherField) -> (f64, f64, f64) {
        let (mut plus, mut minus) = (0.0, 0.0);
        for (c, d) in field.coeffs.iter().zip(&self.d) {
            let v = 2.0 * d.abs() * c.norm_sqr();
            if *d > 0.0 {
                plus += v;
            } else {
                minus += v;
            }
        }
        (plus + minus, plus, minus)
    }

    /// `1/√(2|d_i|)`: `c = scale · z` maps unit `z` to unit `H`-norm.
    pub fn scales(&self) -> Vec<f64> {
        self.d.iter().map(|d| 1.0 / (2.0 * d.abs()).sqrt()).collect()
    }

    pub fn to_z(&self, field: &BreatherField) -> Vec<f64> {
        let mut z = Vec::with_capacity(2 * field.coeffs.len());
        for (c, s) in field.coeffs.iter().zip(self.scales()) {
            z.push(c.re / s);
            z.push(c.im / s);
        }
        z
    }

    pub fn from_z(&self, z: &[f64]) -> BreatherField {
        let coeffs = self.scales().iter().enumerate().map(|(i, s)| C64::new(z[2 * i] * s, z[2 * i + 1] * s)).collect();
        BreatherField { ks: self.ks.clone(), n_space: self.n_space(), coeffs }
    }

    /// `true` for `z`-components in `H⁺`.
    pub fn plus_mask(&self) -> Vec<bool> {
        self.d.iter().flat_map(|d| [*d > 0.0, *d > 0.0]).collect()
    }

    /// `(J, ∇_z J)`: the Riesz gradient in the `H` inner product.
    pub fn eval_z(&self, z: &[f64]) -> (f64, Vec<f64>, Energy) {
        let field = self.from_z(z);
        let (g, e) = self.gradient(&field);
        let scales = self.scales();
        let mut gz = Vec::with_capacity(z.len());
        for (gc, s) in g.coeffs.iter().zip(&scales) {
            gz.push(2.0 * s * gc.re);
            gz.push(2.0 * s * gc.im);
        }
        (e.j, gz, e)
    }
}

pub fn pairing(g: &BreatherField, v: &BreatherField) -> f64 {
    2.0 * g.coeffs.iter().zip(&v.coeffs).map(|(a, b)| (a.conj() * b).re).sum::<f64>()
}

fn time_table(ks: &[u64], nt: usize) -> (Vec<f64>, Vec<f64>) {
    let mut c = Vec::with_capacity(ks.len() * nt);
    let mut s = Vec::with_capacity(ks.len() * nt);
    for &k in ks {
        for n in 0..nt {
            let a = 2.0 * PI * ((k as usize * n) % nt) as f64 / nt as f64;
            c.push(a.cos());
            s.push(a.sin());
        }
    }
    (c, s)
}

/// `evaluate_J`.
pub fn evaluate_j(problem: &Problem, field: &BreatherField) -> Energy {
    problem.energy(field)
}

/// `gradient_J`: `∂J/∂c̄`.
pub fn gradient_j(problem: &Problem, field: &BreatherField) -> BreatherField {
    problem.gradient(field).0
}
