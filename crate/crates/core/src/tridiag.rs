//! Lowest eigenpairs of a real symmetric tridiagonal matrix by Sturm-count bisection and
//! inverse iteration.

use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct SymTridiagonal {
    pub diag: Vec<f64>,
    /// `off[i]` couples rows `i` and `i + 1`.
    pub off: Vec<f64>,
}

impl SymTridiagonal {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Result<Self> {
        if diag.is_empty() || off.len() + 1 != diag.len() {
            return Err(Error::InvalidConfig(format!("tridiagonal sizes {} / {}", diag.len(), off.len())));
        }
        Ok(SymTridiagonal { diag, off })
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Number of eigenvalues strictly below `x`.
    pub fn count_below(&self, x: f64) -> usize {
        let mut q = self.diag[0] - x;
        let mut count = (q < 0.0) as usize;
        for i in 1..self.diag.len() {
            if q == 0.0 {
                q = -f64::EPSILON * (self.diag[i - 1].abs() + x.abs()).max(f64::MIN_POSITIVE);
            }
            q = self.diag[i] - x - self.off[i - 1] * self.off[i - 1] / q;
            count += (q < 0.0) as usize;
        }
        count
    }

    /// Gershgorin interval.
    pub fn bounds(&self) -> (f64, f64) {
        let n = self.diag.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let r = if i > 0 { self.off[i - 1].abs() } else { 0.0 } + if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.diag.len();
        (0..n)
            .map(|i| {
                let mut y = self.diag[i] * x[i];
                if i > 0 {
                    y += self.off[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    y += self.off[i] * x[i + 1];
                }
                y
            })
            .collect()
    }

    /// The `j`-th smallest eigenvalue (0-based), bisected to machine precision.
    pub fn eigenvalue(&self, j: usize) -> f64 {
        let (mut lo, mut hi) = self.bounds();
        loop {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                return mid;
            }
            if self.count_below(mid) > j {
                hi = mid;
            } else {
                lo = mid;
            }
        }
    }

    /// All eigenvalues below `cut`, ascending: bisection within `[λ_{j−1}, cut]` to relative
    /// `1e-9`, then a Rayleigh-quotient correction from the eigenvector.
    pub fn eigenvalues_below(&self, cut: f64) -> Vec<f64> {
        self.eigenpairs_below(cut).0
    }

    pub fn eigenpairs_below(&self, cut: f64) -> (Vec<f64>, Vec<Vec<f64>>) {
        let n = self.count_below(cut);
        let mut lo = self.bounds().0;
        let mut rough = Vec::with_capacity(n);
        for j in 0..n {
            let (mut a, mut b) = (lo, cut);
            while b - a > 1e-9 * a.abs().max(b.abs()).max(1e-300) {
                let mid = 0.5 * (a + b);
                if mid <= a || mid >= b {
                    break;
                }
                if self.count_below(mid) > j {
                    b = mid;
                } else {
                    a = mid;
                }
            }
            rough.push(0.5 * (a + b));
            lo = a;
        }
        let vecs = self.eigenvectors(&rough);
        let vals = vecs
            .iter()
            .map(|x| {
                let y = self.apply(x);
                x.iter().zip(&y).map(|(a, b)| a * b).sum::<f64>()
            })
            .collect();
        (vals, vecs)
    }

    /// Unit eigenvectors for the given (accurate) eigenvalues, reorthogonalized within
    /// clusters.
    pub fn eigenvectors(&self, values: &[f64]) -> Vec<Vec<f64>> {
        let n = self.len();
        let scale = self.bounds().1.abs().max(self.bounds().0.abs()).max(1.0);
        let mut out: Vec<Vec<f64>> = Vec::with_capacity(values.len());
        for (j, &lam) in values.iter().enumerate() {
            let cluster: Vec<usize> = (0..j).filter(|&i| (values[i] - lam).abs() < 1e-7 * scale.max(lam.abs())).collect();
            // shift slightly so the factorization is not exactly singular
            let shift = lam + 4.0 * f64::EPSILON * scale * (1.0 + cluster.len() as f64);
            let lu = TridiagLu::factor(self, shift);
            let mut x: Vec<f64> = (0..n).map(|i| 1.0 + ((i * 7919 + j * 104729) % 1000) as f64 * 1e-3).collect();
            for _ in 0..3 {
                for &i in &cluster {
                    let d: f64 = out[i].iter().zip(&x).map(|(a, b)| a * b).sum();
                    for (xv, ov) in x.iter_mut().zip(&out[i]) {
                        *xv -= d * ov;
                    }
                }
                normalize(&mut x);
                x = lu.solve(&x);
                normalize(&mut x);
            }
            for &i in &cluster {
                let d: f64 = out[i].iter().zip(&x).map(|(a, b)| a * b).sum();
                for (xv, ov) in x.iter_mut().zip(&out[i]) {
                    *xv -= d * ov;
                }
            }
            normalize(&mut x);
            // sign: first significant entry positive
            let pivot = x.iter().copied().find(|v| v.abs() > 1e-8).unwrap_or(1.0);
            if pivot < 0.0 {
                x.iter_mut().for_each(|v| *v = -*v);
            }
            out.push(x);
        }
        out
    }
}

fn normalize(x: &mut [f64]) {
    let n = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if n > 0.0 {
        x.iter_mut().for_each(|v| *v /= n);
    }
}

/// LU factorization of `T − μI` with partial pivoting (fill-in on a second superdiagonal).
struct TridiagLu {
    l: Vec<f64>,
    u0: Vec<f64>,
    u1: Vec<f64>,
    u2: Vec<f64>,
    swapped: Vec<bool>,
}

impl TridiagLu {
    fn factor(t: &SymTridiagonal, mu: f64) -> Self {
        let n = t.len();
        let mut d: Vec<f64> = t.diag.iter().map(|v| v - mu).collect();
        let mut du = t.off.clone();
        let mut dl = t.off.clone();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut l = vec![0.0; n.saturating_sub(1)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        let tiny = f64::EPSILON * t.bounds().1.abs().max(1.0);
        for i in 0..n.saturating_sub(1) {
            if d[i].abs() >= dl[i].abs() {
                if d[i] == 0.0 {
                    d[i] = tiny;
                }
                let f = dl[i] / d[i];
                l[i] = f;
                d[i + 1] -= f * du[i];
            } else {
                let f = d[i] / dl[i];
                d[i] = dl[i];
                l[i] = f;
                let tmp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = tmp - f * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] *= -f;
                }
                swapped[i] = true;
            }
            dl[i] = 0.0;
        }
        if n > 0 && d[n - 1] == 0.0 {
            d[n - 1] = tiny;
        }
        TridiagLu { l, u0: d, u1: du, u2: du2, swapped }
    }

    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.u0.len();
        let mut x = b.to_vec();
        for i in 0..n.saturating_sub(1) {
            if self.swapped[i] {
                x.swap(i, i + 1);
            }
            x[i + 1] -= self.l[i] * x[i];
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            if i + 1 < n {
                s -= self.u1[i] * x[i + 1];
            }
            if i + 2 < n {
                s -= self.u2[i] * x[i + 2];
            }
            x[i] = s / self.u0[i];
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn discrete_laplacian_spectrum() {
        let n = 200;
        let t = SymTridiagonal::new(vec![2.0; n], vec![-1.0; n - 1]).unwrap();
        let vals = t.eigenvalues_below(0.5);
        for (j, v) in vals.iter().enumerate() {
            let exact = 2.0 - 2.0 * (PI * (j + 1) as f64 / (n + 1) as f64).cos();
            assert!((v - exact).abs() < 1e-13, "{j}");
        }
        let vecs = t.eigenvectors(&vals);
        for (j, x) in vecs.iter().enumerate() {
            let r = t.apply(x);
            let res: f64 = r.iter().zip(x).map(|(a, b)| (a - vals[j] * b).powi(2)).sum::<f64>().sqrt();
            assert!(res < 1e-12);
            for y in &vecs[..j] {
                let d: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
                assert!(d.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn near_degenerate_pair_orthogonal() {
        // two weakly coupled copies of the same chain
        let m = 60;
        let mut off = vec![-1.0; 2 * m - 1];
        off[m - 1] = -1e-9;
        let t = SymTridiagonal::new(vec![2.0; 2 * m], off).unwrap();
        let vals: Vec<f64> = (0..4).map(|j| t.eigenvalue(j)).collect();
        let vecs = t.eigenvectors(&vals);
        for i in 0..4 {
            for j in 0..i {
                let d: f64 = vecs[i].iter().zip(&vecs[j]).map(|(a, b)| a * b).sum();
                assert!(d.abs() < 1e-10, "{i} {j} {d}");
            }
        }
    }
}
