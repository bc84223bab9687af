//! Command-line front end: config-driven runs writing CSV and JSON files.

use clap::{Parser, Subcommand};
use serde::Serialize;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::assumptions::{check_assumptions, CheckOptions};
use crate::bounds::bound_scan;
use crate::breather::{
    build_basis_with_cut, default_cut, default_grid, default_radius, ground_state_antiperiodic, BasisSummary,
    BreatherField, SolveOptions, SolveReport,
};
use crate::config::{self, LoadedConfig, RunConfig};
use crate::error::{Error, Result};
use crate::measure::{density_quadrature, point_mass};
use crate::spectrum::{band_scan, gap_eigenvalues, merge, BandStructure, GapSearch};
use crate::potential::Side;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Boundary mass above which `solve` enlarges `R` and repeats.
const DECAY_LIMIT: f64 = 1e-6;
const MAX_ENLARGEMENTS: usize = 3;

#[derive(Debug, Parser)]
#[command(name = "breathers", version, about = "Spectra of perturbed-periodic step potentials and breather ground states")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (overrides `out` in the config; default `.`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Seed for the random restarts (overrides `seed` in the config).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, Subcommand, PartialEq, Eq)]
pub enum Command {
    /// Bands and gaps of both tails and their union.
    Bands,
    /// Spectral density on the bands and point masses at gap eigenvalues.
    Density,
    /// Eigenvalues in the joint gaps.
    Eigs,
    /// Assumption report; exit code 1 if any check fails.
    Check,
    /// Sup-over-L² ratio of eigenfunction solutions over a λ range.
    BoundScan,
    /// Breather ground state.
    Solve,
}

/// Process exit code for a finished run.
pub fn exit_code(result: &Result<Outcome>) -> i32 {
    match result {
        Ok(Outcome::Pass) => 0,
        Ok(Outcome::CheckFailed) => 1,
        Err(Error::InvalidConfig(_)) | Err(Error::InvalidProfile(_)) => 2,
        Err(_) => 3,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    CheckFailed,
}

/// Parses arguments, runs the command, prints errors and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = run(&cli);
    if let Err(e) = &result {
        eprintln!("error: {e}");
    }
    exit_code(&result)
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    let path = cli.config.as_ref().ok_or_else(|| Error::InvalidConfig("--config is required".into()))?;
    let loaded = config::load(path)?;
    if let Some(n) = cli.threads {
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
    let out = cli
        .out
        .clone()
        .or_else(|| loaded.config.out.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&out)?;
    let ctx = Context { loaded: &loaded, out: &out, seed: cli.seed.unwrap_or(loaded.config.seed()) };
    match cli.command {
        Command::Bands => ctx.bands(),
        Command::Density => ctx.density(),
        Command::Eigs => ctx.eigs(),
        Command::Check => ctx.check(),
        Command::BoundScan => ctx.bound_scan(),
        Command::Solve => ctx.solve(),
    }
}

struct Context<'a> {
    loaded: &'a LoadedConfig,
    out: &'a Path,
    seed: u64,
}

fn f(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    tool: String,
    config_sha256: &'a str,
    #[serde(flatten)]
    body: T,
}

impl Context<'_> {
    fn cfg(&self) -> &RunConfig {
        &self.loaded.config
    }

    fn header(&self) -> String {
        format!("# breathers {VERSION}\n# config_sha256 {}\n", self.loaded.sha256)
    }

    fn write_csv(&self, name: &str, columns: &str, rows: &str) -> Result<()> {
        let text = format!("{}{columns}\n{rows}", self.header());
        fs::write(self.out.join(name), text)?;
        Ok(())
    }

    fn write_json<T: Serialize>(&self, name: &str, body: T) -> Result<String> {
        let env = Envelope { tool: format!("breathers {VERSION}"), config_sha256: &self.loaded.sha256, body };
        let text = serde_json::to_string_pretty(&env).map_err(|e| Error::Numerical(e.to_string()))? + "\n";
        fs::write(self.out.join(name), &text)?;
        Ok(text)
    }

    /// `scan.lambda_max`, else `(Kω + 4ω)²`.
    fn lambda_max(&self) -> Result<f64> {
        let c = self.cfg();
        if let Some(l) = c.scan.lambda_max {
            return if l > 0.0 { Ok(l) } else { Err(Error::InvalidConfig("scan.lambda_max must be positive".into())) };
        }
        let omega = c
            .period()
            .map_err(|_| Error::InvalidConfig("give scan.lambda_max, or omega/T to derive it".into()))?
            .omega();
        Ok(((c.k_max() as f64 + 4.0) * omega).powi(2))
    }

    fn sides(&self, lambda_max: f64) -> Result<(BandStructure, BandStructure, BandStructure)> {
        let pot = self.cfg().potential()?;
        let res = self.cfg().scan.resolution;
        let plus = band_scan(&pot, Side::Plus, lambda_max, res)?;
        let minus = band_scan(&pot, Side::Minus, lambda_max, res)?;
        let joint = merge(&plus, &minus);
        Ok((plus, minus, joint))
    }

    fn bands(&self) -> Result<Outcome> {
        let (plus, minus, joint) = self.sides(self.lambda_max()?)?;
        let mut rows = String::new();
        for (label, s) in [("plus", &plus), ("minus", &minus), ("joint", &joint)] {
            let mut all: Vec<(f64, f64, &str)> = s.bands.iter().map(|b| (b.lo, b.hi, "band")).collect();
            all.extend(s.gaps.iter().map(|g| (g.lo, g.hi, "gap")));
            all.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
            for (lo, hi, kind) in all {
                writeln!(rows, "{},{},{kind},{label}", f(lo), f(hi)).unwrap();
            }
            for w in &s.warnings {
                eprintln!("warning ({label}): {w}");
            }
        }
        self.write_csv("bands.csv", "lambda_lo,lambda_hi,type,side", &rows)?;
        Ok(Outcome::Pass)
    }

    fn eigs(&self) -> Result<Outcome> {
        let pot = self.cfg().potential()?;
        let (_, _, joint) = self.sides(self.lambda_max()?)?;
        let eigs = gap_eigenvalues(&pot, &joint, GapSearch::default());
        let mut rows = String::new();
        for e in &eigs {
            writeln!(
                rows,
                "{},{},{},{},{},{},{},{}",
                f(e.lambda),
                f(e.gap.lo),
                f(e.gap.hi),
                f(e.residual),
                e.sign_change,
                f(e.rho_plus),
                f(e.rho_minus),
                e.near_edge
            )
            .unwrap();
        }
        self.write_csv("eigenvalues.csv", "lambda,gap_lo,gap_hi,residual,sign_change,rho_plus,rho_minus,near_edge", &rows)?;
        Ok(Outcome::Pass)
    }

    fn density(&self) -> Result<Outcome> {
        let pot = self.cfg().potential()?;
        let d = &self.cfg().density;
        let lambda_max = match d.lambda_max {
            Some(l) => l,
            None => self.lambda_max()?,
        };
        let lambda_min = d.lambda_min.unwrap_or(0.0);
        if !(lambda_max > lambda_min) || lambda_min < 0.0 {
            return Err(Error::InvalidConfig("density needs 0 <= lambda_min < lambda_max".into()));
        }
        let (plus, minus, joint) = self.sides(lambda_max)?;
        let quad = density_quadrature(&pot, &plus, &minus, lambda_max, d.n.unwrap_or(256));
        let mut rows = String::new();
        for n in quad.nodes.iter().filter(|n| n.lambda >= lambda_min) {
            let m = &n.sample.m;
            let has = |s: Side| n.sample.contributing_sides.contains(&s) as u8;
            writeln!(
                rows,
                "{},{},{},{},{},{},{},{}",
                f(n.lambda),
                f(m[0][0].re),
                f(m[0][1].re),
                f(m[0][1].im),
                f(m[1][1].re),
                has(Side::Plus),
                has(Side::Minus),
                f(n.weight)
            )
            .unwrap();
        }
        self.write_csv("density.csv", "lambda,M11,re_M12,im_M12,M22,plus,minus,weight", &rows)?;
        let mut pm = String::new();
        for e in gap_eigenvalues(&pot, &joint, GapSearch::default()).iter().filter(|e| !e.near_edge) {
            if e.lambda < lambda_min {
                continue;
            }
            let p = point_mass(&pot, e);
            writeln!(pm, "{},{},{},{}", f(p.lambda), f(p.v0[0]), f(p.v0[1]), f(p.norm2)).unwrap();
        }
        self.write_csv("point_masses.csv", "lambda,v0_u,v0_du,norm2", &pm)?;
        if quad.skipped > 0 {
            eprintln!("warning: {} density nodes hit the singular set and were skipped", quad.skipped);
        }
        Ok(Outcome::Pass)
    }

    fn check(&self) -> Result<Outcome> {
        let c = self.cfg();
        let pot = c.potential()?;
        let gamma = match &c.gamma {
            Some(_) => Some(c.gamma()?),
            None => None,
        };
        let opts = CheckOptions { k_max: c.check.k_max.unwrap_or(CheckOptions::default().k_max), p: Some(c.p()) };
        let report = check_assumptions(&pot, gamma.as_ref(), &c.period()?, &opts)?;
        let text = self.write_json("report.json", &report)?;
        print!("{text}");
        Ok(if report.pass { Outcome::Pass } else { Outcome::CheckFailed })
    }

    fn bound_scan(&self) -> Result<Outcome> {
        let c = self.cfg();
        let pot = c.potential()?;
        let x = pot.period_plus();
        let b = &c.bound;
        let i = b.i.unwrap_or((-x, x));
        let j = b.j.unwrap_or((-0.5 * x, 0.5 * x));
        let scan = bound_scan(&pot, i, j, b.lambda_max.unwrap_or(1e4), b.n_samples.unwrap_or(2000))
            .map_err(|e| Error::InvalidConfig(e.to_string()))?;
        let mut rows = String::new();
        for s in &scan.samples {
            writeln!(rows, "{},{},{}", f(s.lambda), f(s.max_ratio), f(s.argmax_angle)).unwrap();
        }
        self.write_csv("bound_scan.csv", "lambda,max_ratio,argmax_angle", &rows)?;
        let (last, mid) = scan.decade_maxima();
        eprintln!(
            "sup ratio {:.6e}; last-decade max {:.6e}, mid-decade max {:.6e}; reverse inequality {}",
            scan.sup_ratio,
            last,
            mid,
            if scan.reverse_holds() { "holds" } else { "FAILS" }
        );
        Ok(Outcome::Pass)
    }

    fn solve(&self) -> Result<Outcome> {
        let c = self.cfg();
        let pot = c.potential()?;
        let gamma = c.gamma()?;
        let p = c.p();
        let period = c.period()?;
        let omega = period.omega();
        let k_max = c.k_max();
        let s = &c.solver;
        let m = s.m.unwrap_or(1);

        let check = check_assumptions(&pot, Some(&gamma), &period, &CheckOptions { k_max, p: Some(p) })?;
        if !check.pass {
            self.write_json("report.json", &check)?;
            eprintln!("assumption check failed; see report.json");
            return Ok(Outcome::CheckFailed);
        }

        let opts = SolveOptions {
            n_starts: s.n_starts.unwrap_or(5),
            seed: self.seed,
            inner: crate::breather::NehariOptions {
                tol: s.tol_inner.unwrap_or(crate::breather::NehariOptions::default().tol),
                ..Default::default()
            },
            tol_outer: s.tol_outer.unwrap_or(SolveOptions::default().tol_outer),
            max_outer: s.max_outer.unwrap_or(SolveOptions::default().max_outer),
        };
        let cut = s.lambda_cut.unwrap_or_else(|| default_cut(k_max, omega));
        let mut r = c.r.unwrap_or_else(|| default_radius(&pot));
        let mut attempt = 0;
        let (basis, field, report) = loop {
            let n_grid = s.n_grid.unwrap_or_else(|| default_grid(&pot, r, cut));
            let basis = build_basis_with_cut(&pot, r, n_grid, k_max, omega, cut)?;
            let (field, report) = ground_state_antiperiodic(&basis, m, &gamma, p, &opts)?;
            if report.boundary_mass < DECAY_LIMIT || attempt == MAX_ENLARGEMENTS {
                break (basis, field, report);
            }
            eprintln!("boundary mass {:.3e} at R = {r}; enlarging R", report.boundary_mass);
            r *= 1.5;
            attempt += 1;
        };
        let field = field.phase_normalized();

        #[derive(Serialize)]
        struct Solution<'a> {
            omega: f64,
            period: f64,
            p: f64,
            basis: BasisSummary,
            lambdas: &'a [f64],
            ks: &'a [u64],
            /// `coefficients[ik][m] = [re, im]` of `c_{k,m}`.
            coefficients: Vec<Vec<[f64; 2]>>,
        }
        let coefficients = (0..field.ks.len())
            .map(|ik| (0..field.n_space).map(|mm| [field.get(ik, mm).re, field.get(ik, mm).im]).collect())
            .collect();
        self.write_json(
            "solution.json",
            Solution {
                omega,
                period: 2.0 * std::f64::consts::PI / omega,
                p,
                basis: basis.summary(),
                lambdas: &basis.lambdas,
                ks: &field.ks,
                coefficients,
            },
        )?;
        self.write_field(&basis, &field)?;

        #[derive(Serialize)]
        struct ReportFile<'a> {
            radius: f64,
            enlargements: usize,
            report: &'a SolveReport,
        }
        self.write_json("solve_report.json", ReportFile { radius: r, enlargements: attempt, report: &report })?;
        eprintln!(
            "J = {:.10e}, |J'| = {:.3e}, PDE residual {:.3e}, boundary mass {:.3e}, converged {}",
            report.energy.j, report.grad_norm, report.pde.relative, report.boundary_mass, report.converged
        );
        Ok(if report.converged { Outcome::Pass } else { Outcome::CheckFailed })
    }

    fn write_field(&self, basis: &crate::breather::GalerkinBasis, field: &BreatherField) -> Result<()> {
        let s = &self.cfg().solver;
        let stride = s.x_stride.unwrap_or(10).max(1);
        let nt = s.n_t_out.unwrap_or(32).max(1);
        let period = 2.0 * std::f64::consts::PI / basis.omega;
        let nodes: Vec<usize> = (0..basis.n_nodes()).step_by(stride).collect();
        let times: Vec<f64> = (0..nt).map(|n| period * n as f64 / nt as f64).collect();
        let values = field.sample(basis, &nodes, &times);
        let mut rows = String::new();
        for (&j, row) in nodes.iter().zip(&values) {
            for (t, u) in times.iter().zip(row) {
                writeln!(rows, "{},{},{}", f(basis.nodes[j]), f(*t), f(*u)).unwrap();
            }
        }
        self.write_csv("field.csv", "x,t,u", &rows)
    }
}
