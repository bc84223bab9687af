//! Spatial eigenbasis of `−φ″ = λVφ` on `[−R, R]` with Dirichlet conditions, by
//! second-order finite differences with cell-averaged node masses.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::potential::PerturbedPeriodicPotential;
use crate::tridiag::SymTridiagonal;

/// Nodes per tail period in the default grid.
pub const NODES_PER_PERIOD: f64 = 400.0;

#[derive(Clone, Debug)]
pub struct GalerkinBasis {
    pub r: f64,
    pub h: f64,
    /// `x_j = −R + jh`, `j = 0..=N`; the end nodes carry the Dirichlet condition.
    pub nodes: Vec<f64>,
    /// Node masses `V_j`: the average of `V` over `[x_j − h/2, x_j + h/2]`.
    pub mass: Vec<f64>,
    /// `V` on each segment `[x_j, x_{j+1}]` (taken at the midpoint).
    pub segment_values: Vec<f64>,
    pub lambdas: Vec<f64>,
    /// `φ_m(x_j)` for all nodes, with `Σ_j h V_j φ_m(x_j)φ_n(x_j) = δ_mn`.
    pub modes: Vec<Vec<f64>>,
    pub k_max: u64,
    pub omega: f64,
    pub lambda_cut: f64,
    /// Longer of the two tail periods.
    pub tail_period: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct BasisSummary {
    pub r: f64,
    pub h: f64,
    pub n_nodes: usize,
    pub n_modes: usize,
    pub lambda_cut: f64,
    pub k_max: u64,
    pub omega: f64,
    pub orthonormality_residual: f64,
}

/// `8` tail periods beyond the core plus a quarter period.
pub fn default_radius(pot: &PerturbedPeriodicPotential) -> f64 {
    let x = pot.period_plus().max(pot.period_minus());
    8.0 * x + pot.r_minus().abs().max(pot.r_plus().abs()) + 0.25 * x
}

/// Largest `k·h` allowed at the spectral cut, `k = √(λ_cut sup V)`.
pub const MAX_KH: f64 = 0.6;

/// Number of grid intervals on `[−R, R]`: `h = X/400`, refined until `k·h ≤ 0.6` at `cut`.
pub fn default_grid(pot: &PerturbedPeriodicPotential, r: f64, cut: f64) -> usize {
    let x = pot.period_plus().min(pot.period_minus());
    let base = (2.0 * r / x * NODES_PER_PERIOD).round() as usize;
    let needed = (2.0 * r * (cut * pot.sup()).sqrt() / MAX_KH).ceil() as usize;
    // keep grid points on the jumps: refine by whole multiples
    let mult = needed.div_ceil(base).max(1);
    base * mult
}

/// `(Kω + 2ω)²`: every retained mode with `λ_m` below it is classified into `H±`.
pub fn classification_cut(k_max: u64, omega: f64) -> f64 {
    ((k_max as f64 + 2.0) * omega).powi(2)
}

/// Twice the classification cut; the margin resolves `Γ|u|^{p−1}u` in space.
pub fn default_cut(k_max: u64, omega: f64) -> f64 {
    2.0 * classification_cut(k_max, omega)
}

fn node_masses(pot: &PerturbedPeriodicPotential, nodes: &[f64], h: f64) -> Vec<f64> {
    nodes
        .iter()
        .map(|&x| {
            let pieces = pot.pieces(x - 0.5 * h, x + 0.5 * h);
            pieces.iter().map(|p| p.value * p.length).sum::<f64>() / h
        })
        .collect()
}

fn operator(mass: &[f64], h: f64) -> SymTridiagonal {
    // interior nodes 1..N−1, symmetrized by D^{-1/2}
    let inner = &mass[1..mass.len() - 1];
    let h2 = h * h;
    let diag = inner.iter().map(|v| 2.0 / (h2 * v)).collect();
    let off = inner.windows(2).map(|w| -1.0 / (h2 * (w[0] * w[1]).sqrt())).collect();
    SymTridiagonal::new(diag, off).expect("grid has interior nodes")
}

/// Mode count below each `k²ω²` on the grid with `n_grid` intervals.
fn negative_counts(pot: &PerturbedPeriodicPotential, r: f64, n_grid: usize, ks: &[u64], omega: f64) -> Vec<usize> {
    let h = 2.0 * r / n_grid as f64;
    let nodes: Vec<f64> = (0..=n_grid).map(|j| -r + j as f64 * h).collect();
    let t = operator(&node_masses(pot, &nodes, h), h);
    ks.iter().map(|&k| t.count_below((k as f64 * omega).powi(2))).collect()
}

pub fn build_basis(pot: &PerturbedPeriodicPotential, r: f64, n_grid: usize, k_max: u64, omega: f64) -> Result<GalerkinBasis> {
    build_basis_with_cut(pot, r, n_grid, k_max, omega, default_cut(k_max, omega))
}

/// As [`build_basis`] with an explicit spectral cut `λ_max ≥ (Kω + 2ω)²`.
pub fn build_basis_with_cut(
    pot: &PerturbedPeriodicPotential,
    r: f64,
    n_grid: usize,
    k_max: u64,
    omega: f64,
    lambda_cut: f64,
) -> Result<GalerkinBasis> {
    if !(omega > 0.0) || k_max == 0 || k_max.is_multiple_of(2) {
        return Err(Error::InvalidConfig(format!("need omega > 0 and odd K, got omega = {omega}, K = {k_max}")));
    }
    let x = pot.period_plus().max(pot.period_minus());
    let inner = pot.r_minus().abs().max(pot.r_plus().abs());
    if r < inner + 3.0 * x {
        return Err(Error::InvalidConfig(format!("R = {r} leaves fewer than 3 tail periods inside [-R, R]")));
    }
    if n_grid < 8 {
        return Err(Error::InvalidConfig("n_grid too small".into()));
    }
    let lambda_cut = lambda_cut.max(classification_cut(k_max, omega));
    let h = 2.0 * r / n_grid as f64;
    // 2nd-order FD: relative eigenvalue error ≈ (kh)²/12
    let kh = (lambda_cut * pot.sup()).sqrt() * h;
    if kh > MAX_KH {
        return Err(Error::Numerical(format!(
            "grid too coarse: k·h = {kh:.3} at the spectral cut; increase n_grid beyond {}",
            (n_grid as f64 * kh / MAX_KH).ceil()
        )));
    }
    let nodes: Vec<f64> = (0..=n_grid).map(|j| -r + j as f64 * h).collect();
    let mass = node_masses(pot, &nodes, h);
    let segment_values = nodes.windows(2).map(|w| pot.eval(0.5 * (w[0] + w[1]))).collect();
    let t = operator(&mass, h);
    let (lambdas, vecs) = t.eigenpairs_below(lambda_cut);
    let modes = vecs
        .into_iter()
        .map(|psi| {
            let mut phi = vec![0.0; n_grid + 1];
            for (j, v) in psi.iter().enumerate() {
                phi[j + 1] = v / (h * mass[j + 1]).sqrt();
            }
            phi
        })
        .collect();
    let basis = GalerkinBasis { r, h, nodes, mass, segment_values, lambdas, modes, k_max, omega, lambda_cut, tail_period: x };
    // every retained H± classification must survive one grid refinement
    let ks = basis.odd_modes(1);
    let coarse: Vec<usize> = ks.iter().map(|&k| basis.lambdas.iter().filter(|&&l| l < (k as f64 * omega).powi(2)).count()).collect();
    let fine = negative_counts(pot, r, 2 * n_grid, &ks, omega);
    if coarse != fine {
        return Err(Error::Numerical(format!(
            "H-/H+ classification changes under grid refinement (counts {coarse:?} vs {fine:?}); refine the grid"
        )));
    }
    for &k in &ks {
        let nu = (k as f64 * omega).powi(2);
        if let Some(l) = basis.lambdas.iter().find(|&&l| (l - nu).abs() < 1e-10 * nu) {
            return Err(Error::Numerical(format!("spatial eigenvalue {l} resonates with k = {k}")));
        }
    }
    Ok(basis)
}

impl GalerkinBasis {
    pub fn n_modes(&self) -> usize {
        self.lambdas.len()
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    /// Temporal modes `m·(1, 3, 5, …) ≤ K` for odd `m`.
    pub fn odd_modes(&self, m: u64) -> Vec<u64> {
        (1..=self.k_max).step_by(2).map(|k| k * m).filter(|&k| k <= self.k_max).collect()
    }

    /// `⟨φ_m, φ_n⟩` in the discrete `L²_V` product.
    pub fn inner(&self, a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).zip(&self.mass).map(|((x, y), v)| x * y * v).sum::<f64>() * self.h
    }

    pub fn orthonormality_residual(&self) -> f64 {
        let n = self.n_modes();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..=i {
                let d = self.inner(&self.modes[i], &self.modes[j]) - if i == j { 1.0 } else { 0.0 };
                worst = worst.max(d.abs());
            }
        }
        worst
    }

    /// Exact in-segment interpolation of `φ_m` at `x_j + θh`, `θ ∈ [0, 1]`.
    pub fn interpolate(&self, m: usize, j: usize, theta: f64) -> f64 {
        let (a, b) = (self.modes[m][j], self.modes[m][j + 1]);
        let k = (self.lambdas[m] * self.segment_values[j]).sqrt();
        let kh = k * self.h;
        if kh < 1e-6 {
            return a + theta * (b - a);
        }
        (a * ((1.0 - theta) * kh).sin() + b * (theta * kh).sin()) / kh.sin()
    }

    pub fn summary(&self) -> BasisSummary {
        BasisSummary {
            r: self.r,
            h: self.h,
            n_nodes: self.n_nodes(),
            n_modes: self.n_modes(),
            lambda_cut: self.lambda_cut,
            k_max: self.k_max,
            omega: self.omega,
            orthonormality_residual: self.orthonormality_residual(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::make_periodic;
    use std::f64::consts::PI;

    #[test]
    fn free_dirichlet_spectrum() {
        let v = make_periodic(&[(1.0, 1.0)], 1.0).unwrap();
        let r = default_radius(&v);
        let b = build_basis(&v, r, default_grid(&v, r, default_cut(7, PI / 2.0)), 7, PI / 2.0).unwrap();
        assert!(b.n_modes() >= 50);
        for m in 0..50 {
            let exact = ((m + 1) as f64 * PI / (2.0 * r)).powi(2);
            assert!((b.lambdas[m] / exact - 1.0).abs() < 1e-4, "{m}");
        }
        assert!(b.orthonormality_residual() < 1e-10);
    }

    #[test]
    fn richardson_second_order() {
        let v = make_periodic(&[(0.5, 1.0), (0.5, 9.0)], 2.0).unwrap();
        let r = 6.5;
        let l = |n| build_basis(&v, r, n, 1, PI / 2.0).unwrap().lambdas[..10].to_vec();
        let (a, b, c) = (l(520), l(1040), l(2080));
        for m in 0..10 {
            let ratio = (a[m] - b[m]) / (b[m] - c[m]);
            assert!((ratio - 4.0).abs() < 0.5, "{m}: {ratio}");
        }
    }

    #[test]
    fn interpolation_reproduces_free_sine() {
        let v = make_periodic(&[(1.0, 1.0)], 1.0).unwrap();
        let b = build_basis(&v, 4.0, 800, 1, 1.0).unwrap();
        // FD eigenvectors of the free problem are exact sines at the nodes
        let m = 3;
        let kfd = (1.0 - b.lambdas[m] * b.h * b.h / 2.0).acos() / b.h;
        let j = 317;
        let amp = b.modes[m][j] / (kfd * (b.nodes[j] + 4.0)).sin();
        let x = b.nodes[j] + 0.5 * b.h;
        let exact = amp * (kfd * (x + 4.0)).sin();
        assert!((b.interpolate(m, j, 0.5) - exact).abs() < 1e-6 * amp.abs());
    }
}
