//! Small fixed-size complex linear algebra used by the transfer-matrix code.

use num_complex::Complex64;
use std::ops::{Add, Mul, Sub};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Complex 2-vector.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Vec2(pub [C64; 2]);

impl Vec2 {
    pub fn new(a: C64, b: C64) -> Self {
        Vec2([a, b])
    }

    pub fn real(a: f64, b: f64) -> Self {
        Vec2([C64::new(a, 0.0), C64::new(b, 0.0)])
    }

    pub fn norm(&self) -> f64 {
        (self.0[0].norm_sqr() + self.0[1].norm_sqr()).sqrt()
    }

    pub fn scale(&self, s: C64) -> Self {
        Vec2([self.0[0] * s, self.0[1] * s])
    }

    pub fn conj(&self) -> Self {
        Vec2([self.0[0].conj(), self.0[1].conj()])
    }

    /// Bilinear product `a·b = a₁b₁ + a₂b₂` (no conjugation).
    pub fn dot(&self, other: &Vec2) -> C64 {
        self.0[0] * other.0[0] + self.0[1] * other.0[1]
    }

    /// `det[a, b]` with `a`, `b` as columns; for solution data this is the Wronskian.
    pub fn wedge(&self, other: &Vec2) -> C64 {
        self.0[0] * other.0[1] - self.0[1] * other.0[0]
    }

    /// Unit Euclidean norm with the first non-negligible component real positive.
    pub fn normalized(&self) -> Self {
        let n = self.norm();
        if n == 0.0 {
            return *self;
        }
        let v = self.scale(C64::new(1.0 / n, 0.0));
        let lead = if v.0[0].norm() > 1e-8 { v.0[0] } else { v.0[1] };
        let phase = lead.conj() / lead.norm();
        v.scale(phase)
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2([self.0[0] + o.0[0], self.0[1] + o.0[1]])
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2([self.0[0] - o.0[0], self.0[1] - o.0[1]])
    }
}

/// Complex 2×2 matrix `[[a, b], [c, d]]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat2 {
    pub a: C64,
    pub b: C64,
    pub c: C64,
    pub d: C64,
}

impl Mat2 {
    pub fn new(a: C64, b: C64, c: C64, d: C64) -> Self {
        Mat2 { a, b, c, d }
    }

    pub fn identity() -> Self {
        Mat2::new(ONE, ZERO, ZERO, ONE)
    }

    pub fn zero() -> Self {
        Mat2::new(ZERO, ZERO, ZERO, ZERO)
    }

    pub fn det(&self) -> C64 {
        self.a * self.d - self.b * self.c
    }

    pub fn trace(&self) -> C64 {
        self.a + self.d
    }

    /// Adjugate; equals the inverse when `det = 1`.
    pub fn adjugate(&self) -> Self {
        Mat2::new(self.d, -self.b, -self.c, self.a)
    }

    pub fn inverse(&self) -> Self {
        let det = self.det();
        let adj = self.adjugate();
        Mat2::new(adj.a / det, adj.b / det, adj.c / det, adj.d / det)
    }

    pub fn apply(&self, v: &Vec2) -> Vec2 {
        Vec2([
            self.a * v.0[0] + self.b * v.0[1],
            self.c * v.0[0] + self.d * v.0[1],
        ])
    }

    pub fn scale(&self, s: C64) -> Self {
        Mat2::new(self.a * s, self.b * s, self.c * s, self.d * s)
    }

    pub fn max_abs(&self) -> f64 {
        self.a.norm().max(self.b.norm()).max(self.c.norm()).max(self.d.norm())
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        Mat2 {
            a: self.a * o.a + self.b * o.c,
            b: self.a * o.b + self.b * o.d,
            c: self.c * o.a + self.d * o.c,
            d: self.c * o.b + self.d * o.d,
        }
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, o: Mat2) -> Mat2 {
        Mat2::new(self.a + o.a, self.b + o.b, self.c + o.c, self.d + o.d)
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, o: Mat2) -> Mat2 {
        Mat2::new(self.a - o.a, self.b - o.b, self.c - o.c, self.d - o.d)
    }
}

/// A matrix paired with its derivative in λ (forward-mode product rule).
#[derive(Clone, Copy, Debug)]
pub struct Dual {
    pub value: Mat2,
    pub deriv: Mat2,
}

impl Dual {
    pub fn identity() -> Self {
        Dual { value: Mat2::identity(), deriv: Mat2::zero() }
    }

    /// Inverse of a det-1 matrix; the adjugate is linear so it commutes with d/dλ.
    pub fn inverse_unimodular(&self) -> Self {
        Dual { value: self.value.adjugate(), deriv: self.deriv.adjugate() }
    }
}

impl Mul for Dual {
    type Output = Dual;
    fn mul(self, o: Dual) -> Dual {
        Dual {
            value: self.value * o.value,
            deriv: self.deriv * o.value + self.value * o.deriv,
        }
    }
}

/// Principal square root, with the branch on the negative real axis taken
/// from above (`√(−x) = i√x`).
pub fn sqrt_principal(z: C64) -> C64 {
    if z.im == 0.0 && z.re < 0.0 {
        C64::new(0.0, (-z.re).sqrt())
    } else {
        z.sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dual_product_rule() {
        let a = Dual {
            value: Mat2::new(ONE, C64::new(2.0, 0.0), ZERO, ONE),
            deriv: Mat2::new(ZERO, ONE, ZERO, ZERO),
        };
        let p = a * a;
        assert_eq!(p.value.b, C64::new(4.0, 0.0));
        assert_eq!(p.deriv.b, C64::new(2.0, 0.0));
    }

    #[test]
    fn normalized_has_positive_lead() {
        let v = Vec2::new(C64::new(0.0, -3.0), C64::new(4.0, 0.0)).normalized();
        assert!((v.norm() - 1.0).abs() < 1e-15);
        assert!(v.0[0].im.abs() < 1e-15 && v.0[0].re > 0.0);
    }
}
