//! TOML run configuration.

use serde::Deserialize;
use sha2::{Digest, Sha256};
use std::f64::consts::PI;
use std::path::Path;

use crate::assumptions::PeriodSpec;
use crate::error::{Error, Result};
use crate::exact::{self, Rational};
use crate::potential::{
    make_dislocation, make_dislocation_exact, make_interface, make_periodic, make_periodic_exact, NonlinearityProfile,
    PerturbedPeriodicPotential, StepProfile,
};

/// A number given as a TOML integer, float, or string (`"1/3"`, `"0.25"`).
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum Num {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Num {
    pub fn value(&self) -> Result<f64> {
        match self {
            Num::Int(i) => Ok(*i as f64),
            Num::Float(x) => Ok(*x),
            Num::Text(s) => Ok(exact::to_f64(&exact::parse_rational(s)?)),
        }
    }

    /// Exact value; floats count as their shortest decimal representation.
    pub fn exact(&self) -> Option<Rational> {
        match self {
            Num::Int(i) => Some(exact::int(*i)),
            Num::Float(x) => exact::from_f64_decimal(*x),
            Num::Text(s) => exact::parse_rational(s).ok(),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PeriodicSpec {
    /// `[fraction of the period, value]` pairs.
    pub steps: Vec<(Num, Num)>,
    #[serde(rename = "X")]
    pub x: Num,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DislocationSpec {
    #[serde(rename = "V0")]
    pub v0: Num,
    pub d: Num,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterfaceSpec {
    pub left: PeriodicSpec,
    pub right: PeriodicSpec,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GammaSpec {
    /// `bump`, `steps` or `asymptotically-periodic`.
    pub mode: String,
    pub center: Option<f64>,
    pub half_width: Option<f64>,
    pub amplitude: Option<f64>,
    /// Compact mode: `[start, [[length, value], …]]`; periodic mode: `[[fraction, value], …]`.
    pub start: Option<f64>,
    pub steps: Option<Vec<(f64, f64)>>,
    /// Period of `Γ_per` in asymptotically periodic mode.
    #[serde(rename = "X")]
    pub x: Option<f64>,
    /// `Γ_loc` cells `[length, value]` starting at `loc_start`.
    pub loc: Option<Vec<(f64, f64)>>,
    pub loc_start: Option<f64>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSpec {
    pub lambda_max: Option<f64>,
    pub resolution: Option<f64>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensitySpec {
    pub lambda_min: Option<f64>,
    pub lambda_max: Option<f64>,
    pub n: Option<usize>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundSpec {
    #[serde(rename = "I")]
    pub i: Option<(f64, f64)>,
    #[serde(rename = "J")]
    pub j: Option<(f64, f64)>,
    pub lambda_max: Option<f64>,
    pub n_samples: Option<usize>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckSpec {
    pub k_max: Option<u64>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    pub n_starts: Option<usize>,
    pub tol_inner: Option<f64>,
    pub tol_outer: Option<f64>,
    pub max_outer: Option<usize>,
    pub lambda_cut: Option<f64>,
    pub n_grid: Option<usize>,
    /// Antiperiodic class `m` (odd); `1` is the plain ground state.
    pub m: Option<u64>,
    /// Time samples per period in the `field.csv` output.
    pub n_t_out: Option<usize>,
    /// Spatial stride (in grid nodes) of the `field.csv` output.
    pub x_stride: Option<usize>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub periodic: Option<PeriodicSpec>,
    pub dislocation: Option<DislocationSpec>,
    pub interface: Option<InterfaceSpec>,
    pub gamma: Option<GammaSpec>,
    pub p: Option<f64>,
    pub omega: Option<f64>,
    #[serde(rename = "T")]
    pub t: Option<Num>,
    #[serde(rename = "K")]
    pub k: Option<u64>,
    #[serde(rename = "R")]
    pub r: Option<f64>,
    pub seed: Option<u64>,
    pub out: Option<String>,
    #[serde(default)]
    pub scan: ScanSpec,
    #[serde(default)]
    pub density: DensitySpec,
    #[serde(default)]
    pub bound: BoundSpec,
    #[serde(default)]
    pub check: CheckSpec,
    #[serde(default)]
    pub solver: SolverSpec,
}

/// Parsed configuration together with the hash of its source text.
#[derive(Clone, Debug)]
pub struct LoadedConfig {
    pub config: RunConfig,
    pub sha256: String,
}

pub fn load(path: &Path) -> Result<LoadedConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidConfig(format!("cannot read {}: {e}", path.display())))?;
    parse(&text)
}

pub fn parse(text: &str) -> Result<LoadedConfig> {
    let config: RunConfig = toml::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
    config.validate()?;
    let sha256 = Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect();
    Ok(LoadedConfig { config, sha256 })
}

fn periodic_from(spec: &PeriodicSpec) -> Result<PerturbedPeriodicPotential> {
    let exact: Option<Vec<(Rational, Rational)>> =
        spec.steps.iter().map(|(f, v)| Some((f.exact()?, v.exact()?))).collect();
    let any_text = spec.steps.iter().any(|(f, v)| matches!(f, Num::Text(_)) || matches!(v, Num::Text(_)))
        || matches!(spec.x, Num::Text(_));
    if let (true, Some(cells), Some(x)) = (any_text, exact, spec.x.exact()) {
        return make_periodic_exact(&cells, &x);
    }
    let steps = spec.steps.iter().map(|(f, v)| Ok((f.value()?, v.value()?))).collect::<Result<Vec<_>>>()?;
    make_periodic(&steps, spec.x.value()?)
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        match (&self.omega, &self.t) {
            (Some(_), Some(_)) => return Err(Error::InvalidConfig("give exactly one of omega and T".into())),
            (Some(w), None) if !(*w > 0.0) => return Err(Error::InvalidConfig("omega must be positive".into())),
            (None, Some(t)) if !(t.value()? > 0.0) => return Err(Error::InvalidConfig("T must be positive".into())),
            _ => {}
        }
        if self.interface.is_some() && (self.periodic.is_some() || self.dislocation.is_some()) {
            return Err(Error::InvalidConfig("[interface] excludes [periodic] and [dislocation]".into()));
        }
        if self.interface.is_none() && self.periodic.is_none() {
            return Err(Error::InvalidConfig("missing [periodic] or [interface] section".into()));
        }
        if let Some(p) = self.p {
            if !(p > 1.0) {
                return Err(Error::InvalidConfig(format!("p must exceed 1, got {p}")));
            }
        }
        if let Some(k) = self.k {
            if k % 2 == 0 {
                return Err(Error::InvalidConfig(format!("K must be odd, got {k}")));
            }
        }
        Ok(())
    }

    pub fn potential(&self) -> Result<PerturbedPeriodicPotential> {
        let wrap = |e: Error| match e {
            Error::InvalidProfile(m) => Error::InvalidConfig(m),
            other => other,
        };
        if let Some(spec) = &self.interface {
            let l = periodic_from(&spec.left).map_err(wrap)?;
            let r = periodic_from(&spec.right).map_err(wrap)?;
            return make_interface(&l, &r).map_err(wrap);
        }
        let base = periodic_from(self.periodic.as_ref().unwrap()).map_err(wrap)?;
        match &self.dislocation {
            None => Ok(base),
            Some(d) => match (d.v0.exact(), d.d.exact(), base.is_exact()) {
                (Some(v0), Some(len), true) => make_dislocation_exact(&base, &v0, &len).map_err(wrap),
                _ => make_dislocation(&base, d.v0.value()?, d.d.value()?).map_err(wrap),
            },
        }
    }

    pub fn period(&self) -> Result<PeriodSpec> {
        match (&self.omega, &self.t) {
            (Some(w), None) => Ok(PeriodSpec::Omega(*w)),
            (None, Some(t)) => Ok(match t.exact() {
                Some(r) => PeriodSpec::Exact(r),
                None => PeriodSpec::Omega(2.0 * PI / t.value()?),
            }),
            _ => Err(Error::InvalidConfig("this command needs omega or T".into())),
        }
    }

    pub fn gamma(&self) -> Result<NonlinearityProfile> {
        let g = self.gamma.as_ref().ok_or_else(|| Error::InvalidConfig("missing [gamma] section".into()))?;
        let need = |v: Option<f64>, name: &str| v.ok_or_else(|| Error::InvalidConfig(format!("gamma.{name} missing")));
        let wrap = |e: Error| Error::InvalidConfig(e.to_string());
        match g.mode.as_str() {
            "bump" => NonlinearityProfile::bump(need(g.center, "center")?, need(g.half_width, "half_width")?, g.amplitude.unwrap_or(1.0))
                .map_err(wrap),
            "steps" => {
                let cells = g.steps.as_ref().ok_or_else(|| Error::InvalidConfig("gamma.steps missing".into()))?;
                Ok(NonlinearityProfile::CompactSteps(StepProfile::from_cells(g.start.unwrap_or(0.0), cells).map_err(wrap)?))
            }
            "asymptotically-periodic" => {
                let x = need(g.x, "X")?;
                let steps = g.steps.as_ref().ok_or_else(|| Error::InvalidConfig("gamma.steps missing".into()))?;
                let cells: Vec<(f64, f64)> = steps.iter().map(|(f, v)| (f * x, *v)).collect();
                let per = StepProfile::from_cells(0.0, &cells).map_err(wrap)?;
                let loc = match &g.loc {
                    Some(l) => Some(StepProfile::from_cells(g.loc_start.unwrap_or(0.0), l).map_err(wrap)?),
                    None => None,
                };
                NonlinearityProfile::asymptotically_periodic(per, loc).map_err(wrap)
            }
            other => Err(Error::InvalidConfig(format!("unknown gamma.mode {other:?}"))),
        }
    }

    pub fn p(&self) -> f64 {
        self.p.unwrap_or(3.0)
    }

    pub fn k_max(&self) -> u64 {
        self.k.unwrap_or(7)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }
}
