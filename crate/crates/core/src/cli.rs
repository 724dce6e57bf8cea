//! Command-line front end.
//!
//! Data (CSV or report table) goes to `--out` or stdout; summaries go to
//! stderr. Exit codes: 0 pass, 1 failed assertion, 2 config error, 3 matrix
//! rejected.

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Error;
use crate::flow::{deck_apply, hamiltonian, integrate, CoverState, IntegratorConfig};
use crate::fundgroup::{growth_function, growth_rate};
use crate::integrals::{independence_rank_with, poisson_bracket, BracketConfig, QuotientIntegrals};
use crate::sampling::{covector_with_energy, unit_covector_where};
use crate::sectionmap::{cat_map, entropy_lower_bound, lyapunov_top, return_map_detailed, torus_distance, TorusPoint};
use crate::solmetric::{GluingMatrix, MetricFamily};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_MATRIX: i32 = 3;

pub const POINCARE_TOLERANCE: f64 = 1e-10;
pub const CROSSING_TOLERANCE: f64 = 1e-12;
pub const LYAPUNOV_RELATIVE_TOLERANCE: f64 = 0.01;
pub const ZERO_EXPONENT_BOUND: f64 = 0.01;
pub const DECK_TOLERANCE: f64 = 1e-12;
pub const RANK_FRACTION: f64 = 0.99;

#[derive(Debug, Parser)]
#[command(name = "solflow", version, about = "Geodesic flow experiments on sol-manifolds")]
pub struct Cli {
    #[command(subcommand)]
    pub verb: Verb,
}

#[derive(Debug, Subcommand)]
pub enum Verb {
    /// Integrate one trajectory and write it as CSV.
    Simulate(Flags),
    /// Bracket, deck-invariance and rank suites for the quotient integrals.
    Check(CheckFlags),
    /// Compare the return map on N with the gluing automorphism.
    Poincare(Flags),
    /// Top Lyapunov exponent of the gluing automorphism.
    Lyapunov(Flags),
    /// Growth function of the fundamental group.
    Growth(Flags),
}

#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// Gluing matrix "c11,c12,c21,c22".
    #[arg(long, allow_hyphen_values = true)]
    pub matrix: Option<String>,
    /// Initial state "x,y,z,px,py,pz".
    #[arg(long, allow_hyphen_values = true)]
    pub init: Option<String>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub t_final: Option<f64>,
    /// Write every n-th step of a trajectory.
    #[arg(long)]
    pub sample_every: Option<usize>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub iters: Option<usize>,
    #[arg(long)]
    pub max_radius: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Flat key=value file; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct CheckFlags {
    #[command(flatten)]
    pub flags: Flags,
    #[arg(long, hide = true)]
    pub debug_drop_two_pi: bool,
}

/// Validated settings shared by every verb.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub matrix: GluingMatrix,
    pub init: Option<CoverState>,
    pub dt: f64,
    pub t_final: f64,
    pub sample_every: usize,
    pub samples: Option<usize>,
    pub iters: usize,
    pub max_radius: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Matrix(String),
    Io(io::Error),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => EXIT_CONFIG,
            CliError::Matrix(_) => EXIT_MATRIX,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Matrix(m) => write!(f, "matrix rejected: {m}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::NotUnimodular(..) | Error::NoRealLogarithm { .. } => CliError::Matrix(e.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}

fn parse_list<const N: usize>(raw: &str, what: &str) -> Result<[f64; N], CliError> {
    let parts: Vec<&str> = raw.split(',').map(str::trim).collect();
    if parts.len() != N {
        return Err(CliError::Config(format!("{what}: expected {N} comma-separated numbers, got {raw:?}")));
    }
    let mut out = [0.0; N];
    for (o, p) in out.iter_mut().zip(parts) {
        *o = p.parse().map_err(|_| CliError::Config(format!("{what}: cannot parse {p:?}")))?;
    }
    Ok(out)
}

fn parse_value<T: std::str::FromStr>(key: &str, raw: &str) -> Result<T, CliError> {
    raw.trim()
        .parse()
        .map_err(|_| CliError::Config(format!("{key}: cannot parse {raw:?}")))
}

/// Reads a flat `key = value` file into flag form. `#` starts a comment.
pub fn read_config_file(path: &PathBuf) -> Result<Flags, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut entries = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("{}:{}: expected key=value", path.display(), lineno + 1)))?;
        entries.insert(k.trim().replace('_', "-"), v.trim().to_string());
    }
    let mut f = Flags::default();
    for (k, v) in entries {
        match k.as_str() {
            "matrix" => f.matrix = Some(v),
            "init" => f.init = Some(v),
            "dt" => f.dt = Some(parse_value(&k, &v)?),
            "t-final" => f.t_final = Some(parse_value(&k, &v)?),
            "sample-every" => f.sample_every = Some(parse_value(&k, &v)?),
            "samples" => f.samples = Some(parse_value(&k, &v)?),
            "iters" => f.iters = Some(parse_value(&k, &v)?),
            "max-radius" => f.max_radius = Some(parse_value(&k, &v)?),
            "seed" => f.seed = Some(parse_value(&k, &v)?),
            "out" => f.out = Some(PathBuf::from(v)),
            other => return Err(CliError::Config(format!("unknown config key {other:?}"))),
        }
    }
    Ok(f)
}

impl RunConfig {
    /// Merges the optional config file under the flags and validates.
    pub fn resolve(flags: &Flags) -> Result<Self, CliError> {
        let file = match &flags.config {
            Some(p) => read_config_file(p)?,
            None => Flags::default(),
        };
        let matrix = match flags.matrix.as_ref().or(file.matrix.as_ref()) {
            Some(raw) => raw.parse::<GluingMatrix>()?,
            None => GluingMatrix::cat(),
        };
        let init = match flags.init.as_ref().or(file.init.as_ref()) {
            Some(raw) => Some(CoverState::from_array(parse_list::<6>(raw, "init")?)),
            None => None,
        };
        let cfg = RunConfig {
            matrix,
            init,
            dt: flags.dt.or(file.dt).unwrap_or(1e-3),
            t_final: flags.t_final.or(file.t_final).unwrap_or(1.0),
            sample_every: flags.sample_every.or(file.sample_every).unwrap_or(1),
            samples: flags.samples.or(file.samples),
            iters: flags.iters.or(file.iters).unwrap_or(10_000),
            max_radius: flags.max_radius.or(file.max_radius).unwrap_or(12),
            seed: flags.seed.or(file.seed).unwrap_or(42),
            out: flags.out.clone().or(file.out),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        self.integrator().validate()?;
        if !(self.t_final >= 0.0 && self.t_final.is_finite()) {
            return Err(CliError::Config(format!("t-final = {} must be finite and >= 0", self.t_final)));
        }
        if self.sample_every == 0 {
            return Err(CliError::Config("sample-every must be >= 1".into()));
        }
        if self.samples == Some(0) {
            return Err(CliError::Config("samples must be >= 1".into()));
        }
        if self.iters < 100 {
            return Err(CliError::Config(format!("iters = {} < 100", self.iters)));
        }
        if !(5..=16).contains(&self.max_radius) {
            return Err(CliError::Config(format!("max-radius = {} outside 5..=16", self.max_radius)));
        }
        if let Some(s) = &self.init {
            if !s.is_finite() {
                return Err(CliError::Config("init has non-finite entries".into()));
            }
        }
        Ok(())
    }

    pub fn integrator(&self) -> IntegratorConfig {
        IntegratorConfig { seed: self.seed, ..IntegratorConfig::leapfrog(self.dt) }
    }

    fn metric(&self) -> Result<MetricFamily, CliError> {
        Ok(MetricFamily::new(self.matrix)?)
    }

    fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }
}

/// Compact decimal for summaries: 12 decimals, trailing zeros dropped.
fn fmt_num(v: f64) -> String {
    let s = format!("{v:.12}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

fn open_output(cfg: &RunConfig) -> Result<Box<dyn Write>, CliError> {
    Ok(match &cfg.out {
        Some(p) => Box::new(io::BufWriter::new(fs::File::create(p)?)),
        None => Box::new(io::BufWriter::new(io::stdout().lock())),
    })
}

fn pass_word(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

pub fn run_simulate(cfg: &RunConfig) -> Result<i32, CliError> {
    let metric = cfg.metric()?;
    let s0 = cfg.init.ok_or_else(|| CliError::Config("simulate needs --init x,y,z,px,py,pz".into()))?;
    let record = integrate(&s0, &metric, &cfg.integrator(), cfg.t_final, cfg.sample_every)?;
    let mut out = open_output(cfg)?;
    record.write_csv(&mut out)?;
    out.flush()?;

    let last = record.last_state().expect("integrate records at least one sample");
    let drift = record.max_drift();
    let coords: Vec<String> = last.to_array().iter().map(|&v| fmt_num(v)).collect();
    eprintln!("final state: ({})", coords.join(","));
    eprintln!(
        "max drift: H(rel)={:.3e} F1={:.3e} F2={:.3e} I1={:.3e} I2={:.3e}",
        drift.h, drift.f1, drift.f2, drift.i1, drift.i2
    );
    Ok(EXIT_PASS)
}

/// One line of the check report.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteLine {
    pub suite: &'static str,
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

pub const BRACKET_POINTS: usize = 20;
pub const DECK_MOMENTA: usize = 1000;
pub const VERTICAL_POINTS: usize = 100;
pub const DEFAULT_RANK_SAMPLES: usize = 10_000;

/// Runs the three check suites. `rank_samples` unit covectors go to the rank
/// suite.
pub fn check_suites(
    metric: &MetricFamily,
    integrals: &QuotientIntegrals,
    rank_samples: usize,
    seed: u64,
) -> Vec<SuiteLine> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bcfg = BracketConfig::default();
    let mut lines = Vec::new();
    let generic = |s: &CoverState| integrals.i1(s.px, s.py).abs() > 0.01;

    let points: Vec<CoverState> = (0..BRACKET_POINTS)
        .map(|_| unit_covector_where(&mut rng, metric, 0.5, generic))
        .collect();
    let i1 = |s: &CoverState| integrals.i1(s.px, s.py);
    let i2 = |s: &CoverState| integrals.i2(s.px, s.py);
    let h = |s: &CoverState| hamiltonian(s, metric);
    let f1 = |s: &CoverState| s.px;
    let f2 = |s: &CoverState| s.py;
    type Obs<'a> = &'a dyn Fn(&CoverState) -> f64;
    let pairs: [(&str, Obs, Obs); 6] = [
        ("{I1,I2}", &i1, &i2),
        ("{I1,H}", &i1, &h),
        ("{I2,H}", &i2, &h),
        ("{F1,F2}", &f1, &f2),
        ("{F1,H}", &f1, &h),
        ("{F2,H}", &f2, &h),
    ];
    for (name, f, g) in pairs {
        let worst = points
            .iter()
            .map(|s| poisson_bracket(f, g, s, &bcfg).abs())
            .fold(0.0, f64::max);
        lines.push(SuiteLine {
            suite: "bracket",
            name: name.into(),
            residual: worst,
            tolerance: bcfg.tolerance,
            pass: worst < bcfg.tolerance,
        });
    }

    let gluing = metric.gluing();
    let mit = gluing.inverse_transpose().entries().map(|r| r.map(|v| v as f64));
    let (mut d1, mut d2, mut df) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..DECK_MOMENTA {
        let s = covector_with_energy(&mut rng, metric, 0.5);
        let s = CoverState {
            px: 4.0 * rand::Rng::gen::<f64>(&mut rng) - 2.0,
            py: 4.0 * rand::Rng::gen::<f64>(&mut rng) - 2.0,
            ..s
        };
        let t = deck_apply(&s, gluing, 1);
        d1 = d1.max((integrals.i1(t.px, t.py) - integrals.i1(s.px, s.py)).abs());
        d2 = d2.max((integrals.i2(t.px, t.py) - integrals.i2(s.px, s.py)).abs());
        let want = [mit[0][0] * s.px + mit[0][1] * s.py, mit[1][0] * s.px + mit[1][1] * s.py];
        df = df.max((t.px - want[0]).abs()).max((t.py - want[1]).abs());
    }
    for (name, residual, tol) in [("I1", d1, DECK_TOLERANCE), ("I2", d2, DECK_TOLERANCE)] {
        lines.push(SuiteLine { suite: "deck", name: name.into(), residual, tolerance: tol, pass: residual < tol });
    }
    lines.push(SuiteLine {
        suite: "deck",
        name: format!("(F1,F2) -> {} (F1,F2)", gluing.inverse_transpose()),
        residual: df,
        tolerance: 0.0,
        pass: df == 0.0,
    });

    let full = (0..rank_samples)
        .filter(|_| {
            let s = unit_covector_where(&mut rng, metric, 0.5, generic);
            independence_rank_with(&s, metric, integrals, &bcfg) == 3
        })
        .count();
    let deficit = 1.0 - full as f64 / rank_samples as f64;
    lines.push(SuiteLine {
        suite: "rank",
        name: format!("rank 3 at {full}/{rank_samples} generic unit covectors"),
        residual: deficit,
        tolerance: 1.0 - RANK_FRACTION,
        pass: full as f64 >= RANK_FRACTION * rank_samples as f64,
    });
    let vertical_full = (0..VERTICAL_POINTS)
        .filter(|_| {
            let s = covector_with_energy(&mut rng, metric, 0.5);
            let s = CoverState { px: 0.0, py: 0.0, pz: 1.0, ..s };
            independence_rank_with(&s, metric, integrals, &bcfg) >= 3
        })
        .count();
    lines.push(SuiteLine {
        suite: "rank",
        name: format!("rank < 3 on p_x = p_y = 0 ({VERTICAL_POINTS} points)"),
        residual: vertical_full as f64,
        tolerance: 0.0,
        pass: vertical_full == 0,
    });
    lines
}

pub fn run_check(cfg: &RunConfig, drop_two_pi: bool) -> Result<i32, CliError> {
    let metric = cfg.metric()?;
    let mut integrals = QuotientIntegrals::for_matrix(&cfg.matrix)?;
    if drop_two_pi {
        integrals = integrals.without_two_pi();
    }
    let lines = check_suites(&metric, &integrals, cfg.samples.unwrap_or(DEFAULT_RANK_SAMPLES), cfg.seed);
    let mut out = open_output(cfg)?;
    writeln!(out, "matrix {} ; integrals: {}", cfg.matrix, integrals.label())?;
    writeln!(out, "suite,test,max_residual,tolerance,result")?;
    for l in &lines {
        writeln!(out, "{},{},{:.3e},{:.0e},{}", l.suite, l.name, l.residual, l.tolerance, pass_word(l.pass))?;
    }
    out.flush()?;
    let failed = lines.iter().filter(|l| !l.pass).count();
    eprintln!("check: {} of {} tests pass", lines.len() - failed, lines.len());
    Ok(if failed == 0 { EXIT_PASS } else { EXIT_FAIL })
}

pub fn run_poincare(cfg: &RunConfig) -> Result<i32, CliError> {
    let metric = cfg.metric()?;
    let integrator = cfg.integrator();
    let mut rng = cfg.rng();
    let inverse = cfg.matrix.inverse();
    let mut out = open_output(cfg)?;
    writeln!(out, "x0,y0,x1_flow,y1_flow,x1_cat,y1_cat,err")?;
    let (mut max_err, mut max_inv_err, mut max_dt) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..cfg.samples.unwrap_or(100) {
        let q = TorusPoint::new(rand::Rng::gen(&mut rng), rand::Rng::gen(&mut rng));
        let ret = return_map_detailed(&q, &metric, &integrator)?;
        let cat = cat_map(&q, &cfg.matrix);
        let err = torus_distance(&ret.point, &cat);
        max_err = max_err.max(err);
        max_inv_err = max_inv_err.max(torus_distance(&ret.point, &cat_map(&q, &inverse)));
        max_dt = max_dt.max((ret.crossing_time - 1.0).abs());
        writeln!(
            out,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            q.x(),
            q.y(),
            ret.point.x(),
            ret.point.y(),
            cat.x(),
            cat.y(),
            err
        )?;
    }
    out.flush()?;
    let ok_err = max_err < POINCARE_TOLERANCE;
    let ok_time = max_dt < CROSSING_TOLERANCE;
    let cmp = if ok_err { "<" } else { ">=" };
    eprintln!("max_err {cmp} {POINCARE_TOLERANCE:.0e} (max_err = {max_err:.3e}): {}", pass_word(ok_err));
    eprintln!("max |t_cross - 1| = {max_dt:.3e}: {}", pass_word(ok_time));
    eprintln!("max distance to C^-1 q = {max_inv_err:.3e}");
    Ok(if ok_err && ok_time { EXIT_PASS } else { EXIT_FAIL })
}

pub fn run_lyapunov(cfg: &RunConfig) -> Result<i32, CliError> {
    let est = lyapunov_top(&cfg.matrix, cfg.iters, cfg.seed)?;
    let mut out = open_output(cfg)?;
    writeln!(out, "orbit,exponent")?;
    for (i, e) in est.per_orbit.iter().enumerate() {
        writeln!(out, "{i},{e:.16e}")?;
    }
    out.flush()?;
    let bound = entropy_lower_bound(&cfg.matrix);
    let ok = if bound > 0.0 {
        ((est.top_exponent - bound) / bound).abs() < LYAPUNOV_RELATIVE_TOLERANCE
    } else {
        est.top_exponent < ZERO_EXPONENT_BOUND
    };
    eprintln!(
        "top exponent = {:.8} ; entropy lower bound max(0, ln rho) = {:.8}: {}",
        est.top_exponent,
        bound,
        pass_word(ok)
    );
    Ok(if ok { EXIT_PASS } else { EXIT_FAIL })
}

pub fn run_growth(cfg: &RunConfig) -> Result<i32, CliError> {
    let table = growth_function(&cfg.matrix, cfg.max_radius)?;
    let mut out = open_output(cfg)?;
    writeln!(out, "k,gamma,lower_bound_2_pow_halfk")?;
    let mut ok = table.complete;
    for (&k, &g) in table.radii.iter().zip(&table.counts) {
        let bound = 1u64 << (k / 2);
        if k % 2 == 0 && g < bound {
            ok = false;
        }
        writeln!(out, "{k},{g},{bound}")?;
    }
    let rate = growth_rate(&table)?;
    writeln!(out, "rate={rate:.6}")?;
    out.flush()?;
    if !table.complete {
        eprintln!("element cap reached: table stops at radius {}", table.radii.last().unwrap_or(&0));
    }
    eprintln!("gamma(2k) >= 2^k: {}", pass_word(ok));
    eprintln!("rate = {rate:.6}");
    Ok(if ok { EXIT_PASS } else { EXIT_FAIL })
}

pub fn run(cli: &Cli) -> i32 {
    let outcome = match &cli.verb {
        Verb::Simulate(f) => RunConfig::resolve(f).and_then(|c| run_simulate(&c)),
        Verb::Check(f) => RunConfig::resolve(&f.flags).and_then(|c| run_check(&c, f.debug_drop_two_pi)),
        Verb::Poincare(f) => RunConfig::resolve(f).and_then(|c| run_poincare(&c)),
        Verb::Lyapunov(f) => RunConfig::resolve(f).and_then(|c| run_lyapunov(&c)),
        Verb::Growth(f) => RunConfig::resolve(f).and_then(|c| run_growth(&c)),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{e}");
            e.code()
        }
    }
}

pub fn run_from_env() -> i32 {
    match Cli::try_parse() {
        Ok(cli) => run(&cli),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_PASS };
            let _ = e.print();
            code
        }
    }
}
