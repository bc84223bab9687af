//! Checks of the existence hypotheses `a1`–`a4`: exact commensurability and parity criteria for
//! step potentials, the non-resonance gap `δ`, growth of the point spectrum, and a finite
//! estimate of the embedding constant.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::exact::{self, Rational};
use crate::potential::{NonlinearityProfile, PerturbedPeriodicPotential, PotentialKind, Side, StepProfile};
use crate::spectrum::{self, BandStructure, GapEigenvalue, GapSearch, Interval};

/// Optical lengths `q_i = √r · c_i` with a common radicand `r` and rational `c_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactOptical {
    /// `1` when every `a_i` is a rational square.
    pub radicand: Rational,
    pub coeffs: Vec<Rational>,
}

/// Exact optical lengths, or `None` when the `q_i` are not pairwise commensurable
/// (or the profile has no exact representation).
pub fn exact_optical(profile: &StepProfile) -> Option<ExactOptical> {
    let ex = profile.exact()?;
    if let Some(q) = ex.optical_lengths() {
        return Some(ExactOptical { radicand: Rational::one(), coeffs: q });
    }
    let a1 = ex.values[0].clone();
    let coeffs = ex
        .values
        .iter()
        .zip(&ex.lengths)
        .map(|(a, l)| exact::sqrt_exact(&(a / &a1)).map(|r| r * l))
        .collect::<Option<Vec<_>>>()?;
    Some(ExactOptical { radicand: a1, coeffs })
}

/// Outcome of the multistep criterion `4q_i ∈ Tℕ`, even number of odd indices, `α ≠ 1`.
#[derive(Clone, Debug, Serialize)]
pub struct MultistepCheck {
    pub pass: bool,
    /// `4q_i/T` (as exact strings, or floats in uncertified mode).
    pub multiples: Vec<String>,
    /// 1-based indices with `4q_i ∈ Tℕ_odd`.
    pub odd_indices: Vec<usize>,
    pub alpha: Option<String>,
    pub alpha_value: Option<f64>,
    pub certified: bool,
    pub reason: String,
    #[serde(skip)]
    pub alpha_exact: Option<Rational>,
}

fn alpha_of(values: &[Rational], odd: &[usize]) -> Rational {
    let mut alpha = Rational::one();
    for (j, &i) in odd.iter().enumerate() {
        if j % 2 == 0 {
            alpha *= &values[i - 1];
        } else {
            alpha /= &values[i - 1];
        }
    }
    alpha
}

/// Exact check at a rational period `T`.
pub fn check_multistep(profile: &StepProfile, t: &Rational) -> Result<MultistepCheck> {
    if !t.is_positive() {
        return Err(Error::Domain("T must be positive".into()));
    }
    let opt = exact_optical(profile)
        .ok_or_else(|| Error::NotApplicable("optical lengths are not exactly commensurable".into()))?;
    let values = &profile.exact().unwrap().values;
    if !opt.radicand.is_one() && exact::sqrt_exact(&opt.radicand).is_none() {
        return Ok(MultistepCheck {
            pass: false,
            multiples: vec![],
            odd_indices: vec![],
            alpha: None,
            alpha_value: None,
            certified: true,
            reason: format!("4q_i/T is irrational (common factor sqrt({}))", opt.radicand),
            alpha_exact: None,
        });
    }
    let root = exact::sqrt_exact(&opt.radicand).unwrap();
    let multiples: Vec<Rational> = opt.coeffs.iter().map(|c| int4() * c * &root / t).collect();
    let strings = multiples.iter().map(|m| m.to_string()).collect();
    let naturals: Option<Vec<BigInt>> = multiples.iter().map(exact::as_natural).collect();
    let Some(naturals) = naturals.filter(|n| n.iter().all(|x| !x.is_zero())) else {
        return Ok(MultistepCheck {
            pass: false,
            multiples: strings,
            odd_indices: vec![],
            alpha: None,
            alpha_value: None,
            certified: true,
            reason: "some 4q_i is not in T·N".into(),
            alpha_exact: None,
        });
    };
    let odd: Vec<usize> = naturals.iter().enumerate().filter(|(_, n)| exact::is_odd(n)).map(|(i, _)| i + 1).collect();
    let alpha = alpha_of(values, &odd);
    let even_count = odd.len().is_multiple_of(2);
    let alpha_ok = !alpha.is_one();
    let reason = match (even_count, alpha_ok) {
        (true, true) => "4q_i in T·N, even number of odd indices, alpha != 1".to_string(),
        (false, _) => format!("odd number ({}) of indices with 4q_i in T·N_odd", odd.len()),
        (true, false) => "alpha = 1".to_string(),
    };
    Ok(MultistepCheck {
        pass: even_count && alpha_ok,
        multiples: strings,
        odd_indices: odd,
        alpha: Some(alpha.to_string()),
        alpha_value: Some(exact::to_f64(&alpha)),
        certified: true,
        reason,
        alpha_exact: Some(alpha),
    })
}

fn int4() -> Rational {
    exact::int(4)
}

/// Float fallback with tolerance `1e-9`; the result is marked uncertified.
pub fn check_multistep_float(profile: &StepProfile, t: f64) -> MultistepCheck {
    let q = profile.optical_lengths();
    let m: Vec<f64> = q.iter().map(|q| 4.0 * q / t).collect();
    let strings = m.iter().map(|x| format!("{x:.12}")).collect();
    let near: Option<Vec<i64>> = m
        .iter()
        .map(|&x| {
            let r = x.round();
            ((x - r).abs() <= 1e-9 * x.abs().max(1.0) && r >= 1.0).then_some(r as i64)
        })
        .collect();
    let Some(near) = near else {
        return MultistepCheck {
            pass: false,
            multiples: strings,
            odd_indices: vec![],
            alpha: None,
            alpha_value: None,
            certified: false,
            reason: "some 4q_i is not in T·N (float check)".into(),
            alpha_exact: None,
        };
    };
    let odd: Vec<usize> = near.iter().enumerate().filter(|(_, n)| *n % 2 == 1).map(|(i, _)| i + 1).collect();
    let mut alpha = 1.0;
    for (j, &i) in odd.iter().enumerate() {
        let a = profile.values()[i - 1];
        alpha = if j % 2 == 0 { alpha * a } else { alpha / a };
    }
    let pass = odd.len().is_multiple_of(2) && (alpha - 1.0).abs() > 1e-9;
    MultistepCheck {
        pass,
        multiples: strings,
        odd_indices: odd,
        alpha: Some(format!("{alpha:.12}")),
        alpha_value: Some(alpha),
        certified: false,
        reason: "float check with tolerance 1e-9 (uncertified)".into(),
        alpha_exact: None,
    }
}

/// The admissible periods `T = 4q/k`, `k` odd, with `q = gcd(q_i)`.
#[derive(Clone, Debug, Serialize)]
pub struct AdmissiblePeriods {
    /// `q = gcd(q_i)`, written as `c` or `c*sqrt(r)`.
    pub q: String,
    pub description: String,
    /// `T` for `k = 1, 3, 5, 7`.
    pub first: Vec<String>,
    /// Verdict of the parity-count and `α` conditions (independent of odd `k`).
    pub check: MultistepCheck,
    #[serde(skip)]
    pub q_exact: Option<Rational>,
}

pub fn admissible_periods(profile: &StepProfile) -> Result<AdmissiblePeriods> {
    let opt = exact_optical(profile)
        .ok_or_else(|| Error::NotApplicable("incommensurable optical lengths: no admissible period".into()))?;
    let g = exact::gcd_rational(&opt.coeffs).ok_or_else(|| Error::Numerical("gcd of optical lengths".into()))?;
    let root = exact::sqrt_exact(&opt.radicand);
    let (q_str, first, check, q_exact) = match root {
        Some(r) => {
            let q = g * r;
            let first = [1, 3, 5, 7].iter().map(|k| (int4() * &q / exact::int(*k)).to_string()).collect();
            let check = check_multistep(profile, &(int4() * &q))?;
            (q.to_string(), first, check, Some(q))
        }
        None => {
            let q = format!("{g}*sqrt({})", opt.radicand);
            let first = [1, 3, 5, 7].iter().map(|k| format!("{}*sqrt({})", int4() * &g / exact::int(*k), opt.radicand)).collect();
            // parity of q_i/q does not depend on the common radical
            let values = &profile.exact().unwrap().values;
            let odd: Vec<usize> = opt
                .coeffs
                .iter()
                .enumerate()
                .filter(|(_, c)| exact::as_natural(&(*c / &g)).map(|n| exact::is_odd(&n)).unwrap_or(false))
                .map(|(i, _)| i + 1)
                .collect();
            let alpha = alpha_of(values, &odd);
            let pass = odd.len().is_multiple_of(2) && !alpha.is_one();
            let check = MultistepCheck {
                pass,
                multiples: opt.coeffs.iter().map(|c| (c / &g).to_string()).collect(),
                odd_indices: odd,
                alpha: Some(alpha.to_string()),
                alpha_value: Some(exact::to_f64(&alpha)),
                certified: true,
                reason: "parity of q_i/q".into(),
                alpha_exact: Some(alpha),
            };
            (q, first, check, None)
        }
    };
    Ok(AdmissiblePeriods {
        description: format!("T = 4q/k for odd k, q = {q_str}"),
        q: q_str,
        first,
        check,
        q_exact,
    })
}

/// Dislocation criterion `4q₀ ∈ Tℕ_even`, `q₀ = √V₀ d`.
#[derive(Clone, Debug, Serialize)]
pub struct DislocationCheck {
    pub pass: bool,
    pub q0: String,
    /// `4q₀/T`.
    pub multiple: String,
    pub base: MultistepCheck,
    pub reason: String,
}

pub fn check_dislocation(pot: &PerturbedPeriodicPotential, t: &Rational) -> Result<DislocationCheck> {
    let PotentialKind::Dislocation { exact: ex, .. } = pot.kind() else {
        return Err(Error::NotApplicable("potential is not a dislocation".into()));
    };
    let base = check_multistep(pot.right_tail(), t)?;
    if !base.pass {
        return Err(Error::NotApplicable(format!("base fails the multistep criterion: {}", base.reason)));
    }
    let (v0, d) = ex.as_ref().ok_or_else(|| Error::NotApplicable("V0, d not exact".into()))?;
    let Some(root) = exact::sqrt_exact(v0) else {
        return Ok(DislocationCheck {
            pass: false,
            q0: format!("sqrt({v0})*{d}"),
            multiple: "irrational".into(),
            base,
            reason: "V0 is not a rational square, so 4q0/T is irrational".into(),
        });
    };
    let q0 = root * d;
    let m = int4() * &q0 / t;
    let even = exact::as_natural(&m).map(|n| !n.is_zero() && !exact::is_odd(&n)).unwrap_or(false);
    Ok(DislocationCheck {
        pass: even,
        q0: q0.to_string(),
        multiple: m.to_string(),
        base,
        reason: if even { "4q0 in T·N_even".into() } else { "4q0 not in T·N_even".into() },
    })
}

/// Interface criterion: `α⁺, α⁻` strictly on the same side of 1.
#[derive(Clone, Debug, Serialize)]
pub struct InterfaceCheck {
    pub pass: bool,
    pub alpha_plus: String,
    pub alpha_minus: String,
    pub plus: MultistepCheck,
    pub minus: MultistepCheck,
}

pub fn check_interface(pot: &PerturbedPeriodicPotential, t: &Rational) -> Result<InterfaceCheck> {
    let plus = check_multistep(pot.right_tail(), t)?;
    let minus = check_multistep(pot.left_tail(), t)?;
    for (c, name) in [(&plus, "right"), (&minus, "left")] {
        if !c.pass {
            return Err(Error::NotApplicable(format!("{name} half fails the multistep criterion: {}", c.reason)));
        }
    }
    let ap = plus.alpha_exact.clone().unwrap();
    let am = minus.alpha_exact.clone().unwrap();
    let one = Rational::one();
    let pass = (ap > one && am > one) || (ap < one && am < one);
    Ok(InterfaceCheck { pass, alpha_plus: ap.to_string(), alpha_minus: am.to_string(), plus, minus })
}

/// Whether every cell of `V` (tails and core) has `4q_i ∈ Tℕ`, which makes all weighted
/// cell matrices, hence the traces and the matching determinant, `4ω`-periodic in `√λ`.
pub fn exact_periodicity(pot: &PerturbedPeriodicPotential, t: &Rational) -> bool {
    let cells_ok = |p: &StepProfile| -> bool {
        let Some(opt) = exact_optical(p) else { return false };
        let Some(root) = exact::sqrt_exact(&opt.radicand) else { return false };
        opt.coeffs.iter().all(|c| exact::as_natural(&(int4() * c * &root / t)).is_some())
    };
    cells_ok(pot.left_tail()) && cells_ok(pot.right_tail()) && pot.core().map(cells_ok).unwrap_or(true)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Certification {
    ExactPeriodicity,
    NumericScan,
}

/// Non-resonance: `δ = inf |√λ − kω|` over the spectrum and odd `k`.
#[derive(Clone, Debug, Serialize)]
pub struct A3Report {
    pub omega: f64,
    pub period: f64,
    pub delta: f64,
    pub worst_k: u64,
    /// Spectral set attaining `δ`: a band `[lo, hi]` or an eigenvalue `[λ, λ]`.
    pub worst_set: Interval,
    pub certification: Certification,
    /// `(k, dist(kω, √σ))` for every odd `k ≤ k_max`.
    pub per_k: Vec<(u64, f64)>,
    pub pass: bool,
    pub note: String,
}

fn sqrt_dist(s: f64, set: &Interval) -> f64 {
    let (a, b) = (set.lo.sqrt(), set.hi.sqrt());
    if s >= a && s <= b {
        0.0
    } else {
        (s - a).abs().min((s - b).abs())
    }
}

/// Distance of `kω` (odd `k ≤ k_max`) to the square root of the joint spectrum.
pub fn verify_a3_numeric(
    pot: &PerturbedPeriodicPotential,
    omega: f64,
    bands: &BandStructure,
    eigenvalues: &[f64],
    k_max: u64,
    period: Option<&Rational>,
) -> Result<A3Report> {
    if !(omega > 0.0) {
        return Err(Error::Domain("omega must be positive".into()));
    }
    let needed = ((k_max as f64 + 1.0) * omega).powi(2);
    if bands.scan_range.1 < needed {
        return Err(Error::Domain(format!(
            "band scan up to {} does not cover ({} omega + omega)^2 = {needed}",
            bands.scan_range.1, k_max
        )));
    }
    let sets: Vec<Interval> = bands
        .bands
        .iter()
        .copied()
        .chain(eigenvalues.iter().map(|&l| Interval::new(l, l)))
        .collect();
    let mut per_k = Vec::new();
    let (mut delta, mut worst_k, mut worst_set) = (f64::INFINITY, 1, Interval::new(0.0, 0.0));
    for k in (1..=k_max).step_by(2) {
        let s = k as f64 * omega;
        let (d, set) = sets
            .iter()
            .map(|b| (sqrt_dist(s, b), *b))
            .fold((f64::INFINITY, Interval::new(0.0, 0.0)), |acc, x| if x.0 < acc.0 { x } else { acc });
        per_k.push((k, d));
        if d < delta {
            delta = d;
            worst_k = k;
            worst_set = set;
        }
    }
    let certified = match period {
        Some(t) => (exact::to_f64(t) - 2.0 * PI / omega).abs() <= 1e-12 * exact::to_f64(t) && exact_periodicity(pot, t) && k_max >= 3,
        None => false,
    };
    let tol = 1e-9;
    let note = if certified {
        "all cells satisfy 4q_i in T·N: spectrum is 4·omega-periodic in sqrt(lambda), so delta holds for every odd k".to_string()
    } else {
        format!("numeric scan for odd k <= {k_max} only; the tail k > {k_max} is uncertified")
    };
    Ok(A3Report {
        omega,
        period: 2.0 * PI / omega,
        delta,
        worst_k,
        worst_set,
        certification: if certified { Certification::ExactPeriodicity } else { Certification::NumericScan },
        per_k,
        pass: delta > tol,
        note,
    })
}

/// Growth of the point spectrum from its periodic repetition.
#[derive(Clone, Debug, Serialize)]
pub struct A4Report {
    pub pass: bool,
    /// Eigenvalues with `√λ` in the first window `[0, 4ω)`.
    pub first_window: Vec<f64>,
    /// Counts in consecutive windows `[4jω, 4(j+1)ω)` of `√λ`.
    pub window_counts: Vec<usize>,
    pub note: String,
}

/// Counts eigenvalues per `√λ`-window of length `4ω` over the first `windows` windows.
pub fn window_counts(eigenvalues: &[f64], omega: f64, windows: usize) -> Vec<usize> {
    let w = 4.0 * omega;
    (0..windows)
        .map(|j| {
            eigenvalues
                .iter()
                .filter(|l| {
                    let s = l.sqrt();
                    s >= j as f64 * w && s < (j + 1) as f64 * w
                })
                .count()
        })
        .collect()
}

pub fn check_a4(pot: &PerturbedPeriodicPotential, eigenvalues: &[f64], omega: f64) -> A4Report {
    let counts = window_counts(eigenvalues, omega, 3);
    let first_window = eigenvalues.iter().copied().filter(|l| l.sqrt() < 4.0 * omega).collect();
    if pot.is_purely_periodic() {
        return A4Report {
            pass: eigenvalues.is_empty(),
            first_window,
            window_counts: counts,
            note: "purely periodic: empty point spectrum".into(),
        };
    }
    let pass = counts.windows(2).all(|w| w[0] == w[1]);
    A4Report {
        pass,
        first_window,
        window_counts: counts,
        note: "equal counts per 4*omega window of sqrt(lambda): at least quadratic growth".into(),
    }
}

/// Finite estimate of the embedding constant for `ν_k = k²ω²`, `‖e_k‖_∞ = 1`.
#[derive(Clone, Debug, Serialize)]
pub struct EmbeddingEstimate {
    pub s: f64,
    pub k_trunc: u64,
    /// Double sum over odd `k ≤ k_trunc` and the scanned bands and eigenvalues.
    pub truncated: f64,
    /// Bound on the unscanned bands for `k ≤ k_trunc`.
    pub band_tail: f64,
    /// Bound on all terms with `k > k_trunc`.
    pub k_tail: f64,
    pub value: f64,
    pub finite: bool,
}

/// Inputs of [`embedding_series_estimate`] describing one periodic side.
pub struct SideSpectrum<'a> {
    pub bands: &'a BandStructure,
    pub period: f64,
    pub sup_v: f64,
    /// `Σ q_i` over one period.
    pub optical_period: f64,
}

fn dist_lambda(nu: f64, b: &Interval) -> f64 {
    if nu < b.lo {
        b.lo - nu
    } else if nu > b.hi {
        nu - b.hi
    } else {
        0.0
    }
}

/// Truncated double sum plus analytic tails: unscanned bands are bounded below through
/// `λ_j ≥ (1/‖V_per‖_∞)(π⌊j/2⌋/X)²`, and the `k`-tail through `dist ≥ kω·|√λ − kω|` with
/// `|√λ − kω| ≥ max(δ, m/N)` for the `m`-th nearest band (`N` bands per unit `√λ`).
pub fn embedding_series_estimate(
    sides: &[SideSpectrum<'_>],
    eigenvalues: &[f64],
    omega: f64,
    p: f64,
    k_trunc: u64,
    delta: f64,
) -> Result<EmbeddingEstimate> {
    if !(p > 2.0) {
        return Err(Error::Domain(format!("embedding estimate needs p > 2, got {p}")));
    }
    let s = p / (p - 2.0);
    let mut truncated = 0.0;
    let mut band_tail = 0.0;
    for k in (1..=k_trunc).step_by(2) {
        let nu = (k as f64 * omega).powi(2);
        for side in sides {
            let lmax = side.bands.scan_range.1;
            if lmax <= nu {
                return Err(Error::Domain("band scan must extend beyond nu_k".into()));
            }
            let full: Vec<&Interval> = side.bands.bands.iter().filter(|b| b.hi < lmax).collect();
            for b in &full {
                truncated += dist_lambda(nu, b).powf(-s);
            }
            // bands touching the scan limit and beyond: indices n > full.len()
            let mut n = full.len() + 1;
            loop {
                let j = 2 * n - 1;
                let lb = (PI * (j / 2) as f64 / side.period).powi(2) / side.sup_v;
                let term = (lb.max(lmax) - nu).powf(-s);
                band_tail += term;
                if lb > lmax && term < 1e-18 * (truncated + band_tail) {
                    break;
                }
                n += 1;
                if n > full.len() + 10_000_000 {
                    break;
                }
            }
        }
        for &l in eigenvalues {
            truncated += (nu - l).abs().powf(-s);
        }
    }
    // k > k_trunc: Σ_sets dist^{-s} ≤ (kω)^{-s} Σ_m max(δ, m/N)^{-s}, twice (both sides of kω)
    let k_tail = if delta > 0.0 {
        let mut per_k = 0.0;
        for side in sides {
            let density = side.optical_period / PI + 1.0;
            per_k += 2.0 * density * (delta.powf(-s) + zeta_tail(s, density, delta));
        }
        if !eigenvalues.is_empty() {
            let density = eigenvalues.len() as f64 / eigenvalues.last().unwrap().sqrt().max(1.0) + 1.0;
            per_k += 2.0 * density * (delta.powf(-s) + zeta_tail(s, density, delta));
        }
        // Σ_{k odd > K} k^{-s} ≤ ∫_K^∞ x^{-s} dx / 2
        let ksum = (k_trunc as f64).powf(1.0 - s) / (2.0 * (s - 1.0));
        omega.powf(-s) * ksum * per_k
    } else {
        f64::INFINITY
    };
    let value = truncated + band_tail + k_tail;
    Ok(EmbeddingEstimate { s, k_trunc, truncated, band_tail, k_tail, value, finite: value.is_finite() })
}

/// `Σ_{m≥1} max(δ, m/N)^{-s}` bounded by `N^s (ζ-tail)`.
fn zeta_tail(s: f64, n: f64, delta: f64) -> f64 {
    let m0 = (delta * n).ceil().max(1.0);
    let head = (m0 - 1.0).max(0.0) * delta.powf(-s);
    head + n.powf(s) * (m0.powf(-s) + m0.powf(1.0 - s) / (s - 1.0))
}

#[derive(Clone, Debug, Serialize)]
pub struct A1Report {
    pub pass: bool,
    pub inf_v: f64,
    pub sup_v: f64,
    pub gamma_ok: bool,
    pub note: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct A2Report {
    pub pass: bool,
    pub period_minus: f64,
    pub period_plus: f64,
    pub r_minus: f64,
    pub r_plus: f64,
}

/// Commensurability verdict matching the potential class.
#[derive(Clone, Debug, Serialize)]
#[serde(tag = "class", rename_all = "lowercase")]
pub enum ClassCheck {
    Periodic { multistep: MultistepCheck },
    Dislocation { dislocation: DislocationCheck },
    Interface { interface: InterfaceCheck },
    NotApplicable { reason: String },
}

impl ClassCheck {
    pub fn pass(&self) -> bool {
        match self {
            ClassCheck::Periodic { multistep } => multistep.pass,
            ClassCheck::Dislocation { dislocation } => dislocation.pass,
            ClassCheck::Interface { interface } => interface.pass,
            ClassCheck::NotApplicable { .. } => false,
        }
    }
}

/// Full report for `check`.
#[derive(Clone, Debug, Serialize)]
pub struct AssumptionReport {
    pub a1: A1Report,
    pub a2: A2Report,
    pub a3: A3Report,
    pub a4: A4Report,
    pub admissible_t: Option<AdmissiblePeriods>,
    pub class_check: ClassCheck,
    pub eigenvalues: Vec<GapEigenvalue>,
    pub embedding: Option<EmbeddingEstimate>,
    pub pass: bool,
}

/// Period of the breather: exact rational `T`, or `ω` in floating point.
#[derive(Clone, Debug)]
pub enum PeriodSpec {
    Exact(Rational),
    Omega(f64),
}

impl PeriodSpec {
    pub fn omega(&self) -> f64 {
        match self {
            PeriodSpec::Exact(t) => 2.0 * PI / exact::to_f64(t),
            PeriodSpec::Omega(w) => *w,
        }
    }

    pub fn exact(&self) -> Option<&Rational> {
        match self {
            PeriodSpec::Exact(t) => Some(t),
            PeriodSpec::Omega(_) => None,
        }
    }
}

/// Options for [`check_assumptions`].
#[derive(Clone, Debug)]
pub struct CheckOptions {
    pub k_max: u64,
    pub p: Option<f64>,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions { k_max: 21, p: Some(3.0) }
    }
}

/// Runs every check for `(V, Γ, T)`.
pub fn check_assumptions(
    pot: &PerturbedPeriodicPotential,
    gamma: Option<&NonlinearityProfile>,
    period: &PeriodSpec,
    opts: &CheckOptions,
) -> Result<AssumptionReport> {
    let omega = period.omega();
    let gamma_ok = match gamma {
        None => true,
        Some(NonlinearityProfile::AsymptoticallyPeriodic { periodic, localized }) => {
            periodic.min_value() > 0.0 && localized.as_ref().map(|l| l.min_value() >= 0.0).unwrap_or(true)
        }
        Some(g) => g.support().is_some(),
    };
    let a1 = A1Report {
        pass: pot.inf() > 0.0 && pot.sup().is_finite() && gamma_ok,
        inf_v: pot.inf(),
        sup_v: pot.sup(),
        gamma_ok,
        note: "step profiles have finitely many jumps on bounded sets".into(),
    };
    let a2 = A2Report {
        pass: true,
        period_minus: pot.period_minus(),
        period_plus: pot.period_plus(),
        r_minus: pot.r_minus(),
        r_plus: pot.r_plus(),
    };
    // A4 needs three 4ω windows; A3 needs (k_max + 1)ω
    let s_max = ((opts.k_max as f64 + 2.0) * omega).max(12.5 * omega);
    let lambda_max = s_max * s_max;
    let plus = spectrum::band_scan(pot, Side::Plus, lambda_max, None)?;
    let minus = if pot.left_tail() == pot.right_tail() {
        BandStructure { side: Some(Side::Minus), ..plus.clone() }
    } else {
        spectrum::band_scan(pot, Side::Minus, lambda_max, None)?
    };
    let joint = spectrum::merge(&plus, &minus);
    let eigs = spectrum::gap_eigenvalues(pot, &joint, GapSearch::default());
    let eig_values: Vec<f64> = eigs.iter().filter(|e| !e.near_edge).map(|e| e.lambda).collect();
    let a3 = verify_a3_numeric(pot, omega, &joint, &eig_values, opts.k_max, period.exact())?;
    let a4 = check_a4(pot, &eig_values, omega);

    let class_check = match (period.exact(), pot.kind()) {
        (None, _) => ClassCheck::NotApplicable { reason: "T not given exactly".into() },
        (Some(t), PotentialKind::Periodic) => match check_multistep(pot.right_tail(), t) {
            Ok(m) => ClassCheck::Periodic { multistep: m },
            Err(e) => ClassCheck::NotApplicable { reason: e.to_string() },
        },
        (Some(t), PotentialKind::Dislocation { .. }) => match check_dislocation(pot, t) {
            Ok(d) => ClassCheck::Dislocation { dislocation: d },
            Err(e) => ClassCheck::NotApplicable { reason: e.to_string() },
        },
        (Some(t), PotentialKind::Interface) => match check_interface(pot, t) {
            Ok(i) => ClassCheck::Interface { interface: i },
            Err(e) => ClassCheck::NotApplicable { reason: e.to_string() },
        },
    };
    let admissible_t = if pot.is_purely_periodic() { admissible_periods(pot.right_tail()).ok() } else { None };
    let embedding = match opts.p {
        Some(p) => {
            let mk = |b: &BandStructure, side: Side| {
                let tail = pot.tail(side);
                (b.clone(), tail.width(), tail.max_value(), tail.optical_lengths().iter().sum::<f64>())
            };
            let data = [mk(&plus, Side::Plus), mk(&minus, Side::Minus)];
            let sides: Vec<SideSpectrum> = data
                .iter()
                .map(|(b, x, v, q)| SideSpectrum { bands: b, period: *x, sup_v: *v, optical_period: *q })
                .collect();
            let k_trunc = (opts.k_max.saturating_sub(1)).max(1) | 1;
            Some(embedding_series_estimate(&sides, &eig_values, omega, p, k_trunc, a3.delta)?)
        }
        None => None,
    };
    let structural = matches!(class_check, ClassCheck::NotApplicable { .. }) || class_check.pass();
    let pass = a1.pass && a2.pass && a3.pass && a4.pass && structural && embedding.as_ref().map(|e| e.finite).unwrap_or(true);
    Ok(AssumptionReport { a1, a2, a3, a4, admissible_t, class_check, eigenvalues: eigs, embedding, pass })
}

/// `α` as a float for reporting, if defined.
pub fn alpha_f64(check: &MultistepCheck) -> Option<f64> {
    check.alpha_exact.as_ref().and_then(|a| a.to_f64())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{int, rat};
    use crate::potential::{make_dislocation, make_interface, make_periodic, make_periodic_exact};

    fn two_step() -> PerturbedPeriodicPotential {
        make_periodic(&[(0.5, 1.0), (0.5, 9.0)], 2.0).unwrap()
    }

    #[test]
    fn two_step_passes() {
        let c = check_multistep(two_step().right_tail(), &int(4)).unwrap();
        assert!(c.pass);
        assert_eq!(c.alpha_exact.unwrap(), rat(1, 9));
        assert_eq!(c.odd_indices, vec![1, 2]);
    }

    #[test]
    fn constant_fails_odd_count() {
        let v = make_periodic(&[(1.0, 1.0)], 1.0).unwrap();
        let c = check_multistep(v.right_tail(), &int(4)).unwrap();
        assert!(!c.pass);
        assert_eq!(c.odd_indices, vec![1]);
    }

    #[test]
    fn equal_values_fail_alpha() {
        let v = make_periodic(&[(0.25, 1.0), (0.75, 1.0)], 4.0).unwrap();
        let c = check_multistep(v.right_tail(), &int(4)).unwrap();
        assert!(!c.pass);
        assert_eq!(c.alpha_exact.unwrap(), int(1));
    }

    #[test]
    fn admissible_periods_two_step() {
        let a = admissible_periods(two_step().right_tail()).unwrap();
        assert_eq!(a.q_exact.unwrap(), int(1));
        assert_eq!(a.first, vec!["4", "4/3", "4/5", "4/7"]);
        assert!(a.check.pass);
    }

    #[test]
    fn admissible_periods_even_ratio_fails() {
        // q = (1, 2)
        let v = make_periodic(&[(0.5, 1.0), (0.5, 4.0)], 2.0).unwrap();
        let a = admissible_periods(v.right_tail()).unwrap();
        assert!(!a.check.pass);
        assert_eq!(a.check.odd_indices, vec![1]);
    }

    #[test]
    fn three_step_remark() {
        // q = (1, 3/5, 2/3): odd/odd and even/odd ratios to q1, a1 != a2
        let v = make_periodic_exact(
            &[(rat(15, 23), int(1)), (rat(3, 23), int(9)), (rat(5, 23), int(4))],
            &rat(23, 15),
        )
        .unwrap();
        let a = admissible_periods(v.right_tail()).unwrap();
        assert_eq!(a.q_exact.unwrap(), rat(1, 15));
        assert!(a.check.pass);
        assert_eq!(a.check.odd_indices, vec![1, 2]);
    }

    #[test]
    fn dislocation_parity() {
        let base = two_step();
        let ok = check_dislocation(&make_dislocation(&base, 4.0, 1.0).unwrap(), &int(4)).unwrap();
        assert!(ok.pass);
        assert_eq!(ok.q0, "2");
        let bad = check_dislocation(&make_dislocation(&base, 1.0, 1.0).unwrap(), &int(4)).unwrap();
        assert!(!bad.pass);
    }

    #[test]
    fn interface_sides() {
        let l = two_step();
        let same = make_periodic(&[(0.5, 1.0), (0.5, 25.0)], 2.0).unwrap();
        let flipped = make_periodic(&[(0.5, 9.0), (0.5, 1.0)], 2.0).unwrap();
        assert!(check_interface(&make_interface(&l, &same).unwrap(), &int(4)).unwrap().pass);
        let c = check_interface(&make_interface(&l, &flipped).unwrap(), &int(4)).unwrap();
        assert!(!c.pass);
        assert_eq!((c.alpha_plus.as_str(), c.alpha_minus.as_str()), ("9", "1/9"));
    }

    #[test]
    fn a3_two_step_certified() {
        let v = two_step();
        let r = check_assumptions(&v, None, &PeriodSpec::Exact(int(4)), &CheckOptions::default()).unwrap();
        assert!(r.a3.pass && r.a3.delta > 0.0);
        assert_eq!(r.a3.certification, Certification::ExactPeriodicity);
        let d: std::collections::HashMap<u64, f64> = r.a3.per_k.iter().copied().collect();
        for k in [1u64, 3, 5, 7] {
            assert!((d[&k] - d[&(k + 4)]).abs() < 1e-12, "k = {k}");
        }
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn a3_constant_fails() {
        let v = make_periodic(&[(1.0, 1.0)], 1.0).unwrap();
        let r = check_assumptions(&v, None, &PeriodSpec::Exact(int(4)), &CheckOptions::default()).unwrap();
        assert!(!r.a3.pass);
        assert!(!r.embedding.unwrap().finite);
        assert!(!r.pass);
    }

    #[test]
    fn embedding_converges_in_k() {
        let v = two_step();
        let w = PI / 2.0;
        let lmax = (45.0 * w).powi(2);
        let b = spectrum::band_scan(&v, Side::Plus, lmax, None).unwrap();
        let side = || SideSpectrum { bands: &b, period: 2.0, sup_v: 9.0, optical_period: 4.0 };
        let delta = verify_a3_numeric(&v, w, &b, &[], 41, None).unwrap().delta;
        let e1 = embedding_series_estimate(&[side(), side()], &[], w, 3.0, 21, delta).unwrap();
        let e2 = embedding_series_estimate(&[side(), side()], &[], w, 3.0, 41, delta).unwrap();
        assert!(e1.finite && e2.finite);
        assert!(((e1.value - e2.value) / e2.value).abs() < 0.01, "{e1:?} {e2:?}");
    }
}
