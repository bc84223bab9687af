//! Gauss–Legendre rules mapped to intervals, and the cosine substitution used on bands.

use gauss_quad::legendre::GaussLegendre;
use std::num::NonZeroUsize;

/// Gauss–Legendre nodes and weights on `[-1, 1]`, ascending.
#[derive(Clone, Debug)]
pub struct Rule {
    pairs: Vec<(f64, f64)>,
}

impl Rule {
    pub fn legendre(n: usize) -> Self {
        let n = NonZeroUsize::new(n.max(1)).unwrap();
        let mut pairs = GaussLegendre::new(n).as_node_weight_pairs().to_vec();
        pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        Rule { pairs }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Nodes and weights on `[a, b]`.
    pub fn on(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let (m, h) = (0.5 * (a + b), 0.5 * (b - a));
        self.pairs.iter().map(move |&(x, w)| (m + h * x, h * w))
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        self.on(a, b).map(|(x, w)| w * f(x)).sum()
    }

    /// Nodes in `λ ∈ (a, b)` for `λ = a + (b − a)(1 − cos θ)/2`, `θ ∈ (0, π)`, with the
    /// Jacobian folded into the weights. Integrands with inverse square-root singularities
    /// at either end become smooth in `θ`.
    pub fn cosine_substitution(&self, a: f64, b: f64) -> Vec<(f64, f64)> {
        let half = 0.5 * (b - a);
        self.on(0.0, std::f64::consts::PI)
            .map(|(t, w)| (a + half * (1.0 - t.cos()), w * half * t.sin()))
            .collect()
    }
}
