//! Piecewise-constant perturbed-periodic coefficients `V` and nonlinearity profiles `Γ`.
//!
//! A [`PerturbedPeriodicPotential`] is a core step profile on `[R⁻, R⁺]` glued to two
//! periodic tails: `V(x) = V⁺_per(x)` for `x ≥ R⁺` with period `X⁺` anchored at `R⁺`,
//! and `V(x) = V⁻_per(x)` for `x < R⁻` with period `X⁻` anchored at `R⁻`. Potentials are
//! built only through [`make_periodic`], [`make_dislocation`] and [`make_interface`]
//! (plus the exact-arithmetic variants), so every cell keeps, when available, its length
//! and value as exact rationals.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{self, Rational};
use num_traits::{One, Signed, Zero};

/// Exact lengths and values of the cells of a [`StepProfile`].
#[derive(Clone, Debug, PartialEq)]
pub struct ExactSteps {
    pub lengths: Vec<Rational>,
    pub values: Vec<Rational>,
}

impl ExactSteps {
    /// `q_i = √a_i ℓ_i`, if every `a_i` is the square of a rational.
    pub fn optical_lengths(&self) -> Option<Vec<Rational>> {
        self.values
            .iter()
            .zip(&self.lengths)
            .map(|(a, l)| exact::sqrt_exact(a).map(|s| s * l))
            .collect()
    }
}

/// Piecewise-constant positive profile on `[breakpoints[0], breakpoints[n])`.
#[derive(Clone, Debug, PartialEq)]
pub struct StepProfile {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
    exact: Option<ExactSteps>,
}

impl StepProfile {
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if breakpoints.len() != values.len() + 1 {
            return Err(Error::InvalidProfile(format!(
                "{} breakpoints for {} cells",
                breakpoints.len(),
                values.len()
            )));
        }
        if values.is_empty() {
            return Err(Error::InvalidProfile("profile has no cells".into()));
        }
        for w in breakpoints.windows(2) {
            if !(w[1] > w[0]) || !w[0].is_finite() || !w[1].is_finite() {
                return Err(Error::InvalidProfile(format!(
                    "breakpoints not strictly increasing near {}",
                    w[0]
                )));
            }
        }
        if let Some(v) = values.iter().find(|v| !(**v > 0.0) || !v.is_finite()) {
            return Err(Error::InvalidProfile(format!("non-positive cell value {v}")));
        }
        Ok(StepProfile { breakpoints, values, exact: None })
    }

    /// Profile starting at `start` from cell `(length, value)` pairs.
    pub fn from_cells(start: f64, cells: &[(f64, f64)]) -> Result<Self> {
        let mut bp = Vec::with_capacity(cells.len() + 1);
        bp.push(start);
        let mut x = start;
        for &(len, _) in cells {
            if !(len > 0.0) {
                return Err(Error::InvalidProfile(format!("zero-length or negative cell {len}")));
            }
            x += len;
            bp.push(x);
        }
        StepProfile::new(bp, cells.iter().map(|c| c.1).collect())
    }

    /// Profile from exact cells; the float view is derived from the rationals.
    pub fn from_exact_cells(start: &Rational, cells: &[(Rational, Rational)]) -> Result<Self> {
        let mut bp = Vec::with_capacity(cells.len() + 1);
        let mut x = start.clone();
        bp.push(exact::to_f64(&x));
        for (len, val) in cells {
            if !len.is_positive() {
                return Err(Error::InvalidProfile("zero-length or negative cell".into()));
            }
            if !val.is_positive() {
                return Err(Error::InvalidProfile("non-positive cell value".into()));
            }
            x += len;
            bp.push(exact::to_f64(&x));
        }
        let mut p = StepProfile::new(bp, cells.iter().map(|c| exact::to_f64(&c.1)).collect())?;
        p.exact = Some(ExactSteps {
            lengths: cells.iter().map(|c| c.0.clone()).collect(),
            values: cells.iter().map(|c| c.1.clone()).collect(),
        });
        Ok(p)
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn exact(&self) -> Option<&ExactSteps> {
        self.exact.as_ref()
    }

    pub fn start(&self) -> f64 {
        self.breakpoints[0]
    }

    pub fn end(&self) -> f64 {
        *self.breakpoints.last().unwrap()
    }

    pub fn width(&self) -> f64 {
        self.end() - self.start()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Cell lengths `ℓ_i`.
    pub fn lengths(&self) -> Vec<f64> {
        self.breakpoints.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Optical lengths `q_i = √a_i ℓ_i` in floating point.
    pub fn optical_lengths(&self) -> Vec<f64> {
        self.values.iter().zip(self.lengths()).map(|(a, l)| a.sqrt() * l).collect()
    }

    /// Index of the half-open cell `[b_i, b_{i+1})` containing `x` (clamped to the ends).
    pub fn cell_index(&self, x: f64) -> usize {
        let n = self.values.len();
        match self.breakpoints.binary_search_by(|b| b.partial_cmp(&x).unwrap()) {
            Ok(i) => i.min(n - 1),
            Err(0) => 0,
            Err(i) => (i - 1).min(n - 1),
        }
    }

    pub fn value_at(&self, x: f64) -> f64 {
        self.values[self.cell_index(x)]
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().cloned().fold(f64::MIN, f64::max)
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().cloned().fold(f64::MAX, f64::min)
    }
}

/// How a potential was constructed; the exact-arithmetic criteria dispatch on this.
#[derive(Clone, Debug, PartialEq)]
pub enum PotentialKind {
    Periodic,
    Dislocation { v0: f64, d: f64, exact: Option<(Rational, Rational)> },
    Interface,
}

/// Coefficient `V` that is periodic near `±∞`.
#[derive(Clone, Debug, PartialEq)]
pub struct PerturbedPeriodicPotential {
    /// One period of `V⁻_per` in local coordinates `[0, X⁻)`, anchored at `R⁻`.
    left: StepProfile,
    /// One period of `V⁺_per` in local coordinates `[0, X⁺)`, anchored at `R⁺`.
    right: StepProfile,
    /// Cells on `[R⁻, R⁺]`; `None` when `R⁻ = R⁺`.
    core: Option<StepProfile>,
    r_minus: f64,
    r_plus: f64,
    kind: PotentialKind,
}

/// A constant piece `[start, start + length)` with value `value`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Piece {
    pub start: f64,
    pub length: f64,
    pub value: f64,
}

impl PerturbedPeriodicPotential {
    pub fn left_tail(&self) -> &StepProfile {
        &self.left
    }

    pub fn right_tail(&self) -> &StepProfile {
        &self.right
    }

    pub fn core(&self) -> Option<&StepProfile> {
        self.core.as_ref()
    }

    pub fn r_minus(&self) -> f64 {
        self.r_minus
    }

    pub fn r_plus(&self) -> f64 {
        self.r_plus
    }

    pub fn period_minus(&self) -> f64 {
        self.left.width()
    }

    pub fn period_plus(&self) -> f64 {
        self.right.width()
    }

    pub fn kind(&self) -> &PotentialKind {
        &self.kind
    }

    pub fn is_purely_periodic(&self) -> bool {
        self.kind == PotentialKind::Periodic
    }

    /// Tail profile for one side.
    pub fn tail(&self, side: Side) -> &StepProfile {
        match side {
            Side::Plus => &self.right,
            Side::Minus => &self.left,
        }
    }

    pub fn sup(&self) -> f64 {
        let mut m = self.left.max_value().max(self.right.max_value());
        if let Some(c) = &self.core {
            m = m.max(c.max_value());
        }
        m
    }

    pub fn inf(&self) -> f64 {
        let mut m = self.left.min_value().min(self.right.min_value());
        if let Some(c) = &self.core {
            m = m.min(c.min_value());
        }
        m
    }

    /// The cell containing `x` as `(value, cell_start, cell_end)` in absolute coordinates.
    pub fn cell_at(&self, x: f64) -> (f64, f64, f64) {
        if x >= self.r_plus {
            let period = self.right.width();
            let n = ((x - self.r_plus) / period).floor();
            let base = self.r_plus + n * period;
            let mut y = x - base;
            let mut base = base;
            if y >= period {
                y -= period;
                base += period;
            } else if y < 0.0 {
                y += period;
                base -= period;
            }
            let i = self.right.cell_index(y);
            let bp = self.right.breakpoints();
            (self.right.values()[i], base + bp[i], base + bp[i + 1])
        } else if x < self.r_minus {
            let period = self.left.width();
            let n = ((x - self.r_minus) / period).floor();
            let mut base = self.r_minus + n * period;
            let mut y = x - base;
            if y >= period {
                y -= period;
                base += period;
            } else if y < 0.0 {
                y += period;
                base -= period;
            }
            let i = self.left.cell_index(y);
            let bp = self.left.breakpoints();
            let end = (base + bp[i + 1]).min(self.r_minus);
            (self.left.values()[i], base + bp[i], end)
        } else {
            let core = self.core.as_ref().expect("R⁻ < R⁺ implies a core profile");
            let i = core.cell_index(x);
            let bp = core.breakpoints();
            (core.values()[i], bp[i], bp[i + 1])
        }
    }

    /// Evaluates `V(x)`.
    pub fn eval(&self, x: f64) -> f64 {
        self.cell_at(x).0
    }

    /// Constant pieces covering `[x0, x1]`, `x0 ≤ x1`, in increasing order.
    pub fn pieces(&self, x0: f64, x1: f64) -> Vec<Piece> {
        let mut out = Vec::new();
        if !(x1 > x0) {
            return out;
        }
        let mut x = x0;
        let tol = 1e-14 * (1.0 + x0.abs().max(x1.abs()));
        while x < x1 - tol {
            let (v, _, end) = self.cell_at(x);
            let mut stop = end.min(x1);
            if stop <= x {
                // rounding at a breakpoint; step into the next cell
                stop = (x + tol).min(x1);
            }
            out.push(Piece { start: x, length: stop - x, value: v });
            x = stop;
        }
        if let Some(last) = out.last_mut() {
            last.length = x1 - last.start;
        }
        out
    }

    /// Jump positions in `(a, b)` with signed jumps `V(x+) − V(x−)`.
    pub fn jumps(&self, a: f64, b: f64) -> Vec<(f64, f64)> {
        self.pieces(a, b)
            .windows(2)
            .filter(|w| w[1].value != w[0].value)
            .map(|w| (w[1].start, w[1].value - w[0].value))
            .collect()
    }

    /// Total variation of `V` over `[a, b]`.
    pub fn total_variation(&self, a: f64, b: f64) -> f64 {
        self.jumps(a, b).iter().map(|j| j.1.abs()).sum()
    }

    /// Exact optical lengths of all tail cells and, for a dislocation, the insert.
    pub fn is_exact(&self) -> bool {
        self.left.exact().is_some() && self.right.exact().is_some()
    }
}

/// Side of the real line: `Plus` for `x → +∞`, `Minus` for `x → −∞`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Plus,
    Minus,
}

impl Side {
    pub fn both() -> [Side; 2] {
        [Side::Plus, Side::Minus]
    }

    pub fn label(&self) -> &'static str {
        match self {
            Side::Plus => "plus",
            Side::Minus => "minus",
        }
    }
}

fn fractions_to_exact(steps: &[(f64, f64)], period: f64) -> Option<(Vec<(Rational, Rational)>, Rational)> {
    let x = exact::from_f64_decimal(period)?;
    let mut cells = Vec::with_capacity(steps.len());
    let mut total = Rational::zero();
    for &(frac, val) in steps {
        let f = exact::from_f64_decimal(frac)?;
        total += &f;
        cells.push((f * &x, exact::from_f64_decimal(val)?));
    }
    if total != Rational::one() {
        return None;
    }
    Some((cells, x))
}

/// Periodic step potential `V_per(x) = a_i` on `[θ_{i−1}X, θ_iX)`, extended with period `X`.
///
/// `steps` lists `(θ_i − θ_{i−1}, a_i)`. Fractions must sum to one. When every number is
/// an exact decimal and the fractions sum to one exactly, the cells are also stored as
/// rationals.
pub fn make_periodic(steps: &[(f64, f64)], period: f64) -> Result<PerturbedPeriodicPotential> {
    if !(period > 0.0) {
        return Err(Error::InvalidProfile(format!("period must be positive, got {period}")));
    }
    if steps.is_empty() {
        return Err(Error::InvalidProfile("no steps".into()));
    }
    let sum: f64 = steps.iter().map(|s| s.0).sum();
    if (sum - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidProfile(format!("fractions sum to {sum}, expected 1")));
    }
    if let Some((cells, x)) = fractions_to_exact(steps, period) {
        if cells.iter().all(|c| c.0.is_positive() && c.1.is_positive()) {
            let _ = x;
            return periodic_from_profile(StepProfile::from_exact_cells(&Rational::zero(), &cells)?);
        }
    }
    let cells: Vec<(f64, f64)> = steps.iter().map(|&(f, v)| (f * period, v)).collect();
    let mut prof = StepProfile::from_cells(0.0, &cells)?;
    // pin the last breakpoint to the period so the tail width is exact
    *prof.breakpoints.last_mut().unwrap() = period;
    periodic_from_profile(prof)
}

/// Exact variant of [`make_periodic`].
pub fn make_periodic_exact(steps: &[(Rational, Rational)], period: &Rational) -> Result<PerturbedPeriodicPotential> {
    if !period.is_positive() {
        return Err(Error::InvalidProfile("period must be positive".into()));
    }
    let total: Rational = steps.iter().map(|s| s.0.clone()).sum();
    if total != Rational::one() {
        return Err(Error::InvalidProfile(format!("fractions sum to {total}, expected 1")));
    }
    let cells: Vec<(Rational, Rational)> = steps.iter().map(|(f, v)| (f * period, v.clone())).collect();
    periodic_from_profile(StepProfile::from_exact_cells(&Rational::zero(), &cells)?)
}

fn periodic_from_profile(profile: StepProfile) -> Result<PerturbedPeriodicPotential> {
    Ok(PerturbedPeriodicPotential {
        left: profile.clone(),
        right: profile,
        core: None,
        r_minus: 0.0,
        r_plus: 0.0,
        kind: PotentialKind::Periodic,
    })
}

fn require_periodic(p: &PerturbedPeriodicPotential, what: &str) -> Result<()> {
    if p.kind != PotentialKind::Periodic {
        return Err(Error::InvalidProfile(format!("{what} must be purely periodic")));
    }
    Ok(())
}

/// `V = V_per` on `x < 0`, `V₀` on `[0, d)`, `V_per(x − d)` on `x ≥ d`.
pub fn make_dislocation(base: &PerturbedPeriodicPotential, v0: f64, d: f64) -> Result<PerturbedPeriodicPotential> {
    require_periodic(base, "dislocation base")?;
    if !(v0 > 0.0) || !(d > 0.0) {
        return Err(Error::InvalidProfile(format!("need V0 > 0 and d > 0, got V0 = {v0}, d = {d}")));
    }
    let exact_pair = exact::from_f64_decimal(v0).zip(exact::from_f64_decimal(d));
    let core = match &exact_pair {
        Some((v, l)) => StepProfile::from_exact_cells(&Rational::zero(), &[(l.clone(), v.clone())])?,
        None => StepProfile::from_cells(0.0, &[(d, v0)])?,
    };
    Ok(PerturbedPeriodicPotential {
        left: base.right.clone(),
        right: base.right.clone(),
        core: Some(core),
        r_minus: 0.0,
        r_plus: d,
        kind: PotentialKind::Dislocation { v0, d, exact: exact_pair },
    })
}

/// Exact variant of [`make_dislocation`].
pub fn make_dislocation_exact(
    base: &PerturbedPeriodicPotential,
    v0: &Rational,
    d: &Rational,
) -> Result<PerturbedPeriodicPotential> {
    require_periodic(base, "dislocation base")?;
    if !v0.is_positive() || !d.is_positive() {
        return Err(Error::InvalidProfile("need V0 > 0 and d > 0".into()));
    }
    let core = StepProfile::from_exact_cells(&Rational::zero(), &[(d.clone(), v0.clone())])?;
    Ok(PerturbedPeriodicPotential {
        left: base.right.clone(),
        right: base.right.clone(),
        core: Some(core),
        r_minus: 0.0,
        r_plus: exact::to_f64(d),
        kind: PotentialKind::Dislocation {
            v0: exact::to_f64(v0),
            d: exact::to_f64(d),
            exact: Some((v0.clone(), d.clone())),
        },
    })
}

/// `V = V⁻_per` on `x < 0` and `V⁺_per` on `x ≥ 0`.
pub fn make_interface(left: &PerturbedPeriodicPotential, right: &PerturbedPeriodicPotential) -> Result<PerturbedPeriodicPotential> {
    require_periodic(left, "interface left half")?;
    require_periodic(right, "interface right half")?;
    if left.right == right.right {
        return Ok(left.clone());
    }
    Ok(PerturbedPeriodicPotential {
        left: left.right.clone(),
        right: right.right.clone(),
        core: None,
        r_minus: 0.0,
        r_plus: 0.0,
        kind: PotentialKind::Interface,
    })
}

/// Nonlinearity coefficient `Γ`.
#[derive(Clone, Debug, PartialEq)]
pub enum NonlinearityProfile {
    /// Compactly supported step profile (values > 0 on its support, zero outside).
    CompactSteps(StepProfile),
    /// Smooth bump `amplitude · exp(1 − 1/(1 − r²))`, `r = (x − center)/half_width`.
    Bump { center: f64, half_width: f64, amplitude: f64 },
    /// `Γ = Γ_per + Γ_loc` with `Γ_per > 0` periodic and `Γ_loc ≥ 0` compactly supported.
    AsymptoticallyPeriodic { periodic: StepProfile, localized: Option<StepProfile> },
}

impl NonlinearityProfile {
    pub fn bump(center: f64, half_width: f64, amplitude: f64) -> Result<Self> {
        if !(half_width > 0.0) || !(amplitude > 0.0) {
            return Err(Error::InvalidProfile("bump needs positive width and amplitude".into()));
        }
        Ok(NonlinearityProfile::Bump { center, half_width, amplitude })
    }

    pub fn asymptotically_periodic(periodic: StepProfile, localized: Option<StepProfile>) -> Result<Self> {
        if periodic.start() != 0.0 {
            return Err(Error::InvalidProfile("periodic part of Γ must start at 0".into()));
        }
        Ok(NonlinearityProfile::AsymptoticallyPeriodic { periodic, localized })
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            NonlinearityProfile::CompactSteps(p) => {
                if x < p.start() || x >= p.end() {
                    0.0
                } else {
                    p.value_at(x)
                }
            }
            NonlinearityProfile::Bump { center, half_width, amplitude } => {
                let r = (x - center) / half_width;
                if r.abs() >= 1.0 {
                    0.0
                } else {
                    amplitude * (1.0 - 1.0 / (1.0 - r * r)).exp()
                }
            }
            NonlinearityProfile::AsymptoticallyPeriodic { periodic, localized } => {
                let y = x.rem_euclid(periodic.width());
                let mut g = periodic.value_at(y);
                if let Some(l) = localized {
                    if x >= l.start() && x < l.end() {
                        g += l.value_at(x);
                    }
                }
                g
            }
        }
    }

    /// Compact support `[a, b]`, or `None` for the asymptotically periodic mode.
    pub fn support(&self) -> Option<(f64, f64)> {
        match self {
            NonlinearityProfile::CompactSteps(p) => Some((p.start(), p.end())),
            NonlinearityProfile::Bump { center, half_width, .. } => {
                Some((center - half_width, center + half_width))
            }
            NonlinearityProfile::AsymptoticallyPeriodic { .. } => None,
        }
    }

    pub fn mode(&self) -> &'static str {
        match self {
            NonlinearityProfile::AsymptoticallyPeriodic { .. } => "asymptotically-periodic",
            _ => "compact",
        }
    }
}
