//! `hamsys`: command-line front end of the library.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use hamsys::criteria::{self, CriterionVerdict};
use hamsys::deficiency::{self, DeficiencyReport, LambdaConstancy, LineReport};
use hamsys::fixtures;
use hamsys::gauge;
use hamsys::gram::{self, RankReport};
use hamsys::propagator::{FundamentalSolution, PropagatorOptions};
use hamsys::report::{self, matrix_rows, AnalysisOptions, AnalysisReport, ExampleOutcome, MatrixRows};
use hamsys::system::{IntervalKind, Problem, SamplePlan, SystemSpec, ValidationReport};
use hamsys::{HamsysError, Result};

#[derive(Parser)]
#[command(name = "hamsys", version, about = "Analysis of symmetric first-order systems J f' + B f = λ H f")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Problem specification (JSON).
    #[arg(long, global = true, value_name = "PATH")]
    spec: Option<PathBuf>,
    /// Write the JSON result to this file instead of standard output.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Print JSON instead of a text summary.
    #[arg(long, global = true)]
    json: bool,
    /// Relative ODE tolerance (the absolute tolerance is 1/100 of it).
    #[arg(long, global = true, value_name = "RTOL")]
    tol_ode: Option<f64>,
    /// Largest truncation exponent k (T_k = 2^k).
    #[arg(long, global = true, value_name = "K")]
    tmax_exponent: Option<i32>,
    /// Seed for additional random sample points.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Check the structural conditions on J, B, H.
    Validate,
    /// Fundamental solution Y(x, λ) with Y(x0) = I.
    Propagate {
        /// Spectral parameter, "re" or "re,im".
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        lambda: String,
        /// Evaluation points (comma separated); default: a grid over the span.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        at: Vec<f64>,
        /// Span "alpha,beta"; default: the interval clipped to x0 ± 8.
        #[arg(long, allow_hyphen_values = true)]
        span: Option<String>,
        /// Number of grid points when --at is not given.
        #[arg(long, default_value_t = 11)]
        count: usize,
    },
    /// Gauge reductions.
    Gauge {
        #[arg(long, value_enum)]
        to: GaugeTarget,
        /// Span "alpha,beta" of the sampled result; default: the interval
        /// clipped to x0 ± 8.
        #[arg(long, allow_hyphen_values = true)]
        span: Option<String>,
        /// Number of grid points.
        #[arg(long, default_value_t = 65)]
        count: usize,
    },
    /// Gram matrix, rank and definiteness.
    Gram {
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        lambda: String,
        /// Span "alpha,beta"; default: the interval clipped to x0 ± 8.
        #[arg(long, allow_hyphen_values = true)]
        span: Option<String>,
    },
    /// Formal deficiency indices.
    Deficiency {
        /// Part of the interval to examine.
        #[arg(long, value_enum, default_value_t = IntervalChoice::Full)]
        interval: IntervalChoice,
        /// Extra λ values "re,im;re,im;..." for the half-plane constancy check.
        #[arg(long, allow_hyphen_values = true)]
        lambda_grid: Option<String>,
    },
    /// Evaluate self-adjointness and quasi-regularity criteria.
    Criteria {
        /// Criterion id, or "all".
        #[arg(long, default_value = "all")]
        id: String,
        /// Print the statement of a criterion and exit.
        #[arg(long, value_name = "ID")]
        explain: Option<String>,
    },
    /// Full pipeline: validation, rank, deficiency, criteria.
    Analyze,
    /// Run a shipped example and compare with its expected results.
    Example {
        /// Example id, or "all".
        id: String,
        /// Print the example's specification file instead of running it.
        #[arg(long)]
        print_spec: bool,
    },
    /// List registered criteria or examples.
    List {
        #[arg(value_enum)]
        kind: ListKind,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum GaugeTarget {
    Canonical,
    ConstantJ,
    SlEmbed,
    Square,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum IntervalChoice {
    Full,
    Right,
    Left,
}

#[derive(Clone, Copy, ValueEnum)]
enum ListKind {
    Criteria,
    Examples,
}

/// Command failure with its exit code.
struct Failure {
    code: u8,
    msg: String,
}

impl From<HamsysError> for Failure {
    fn from(e: HamsysError) -> Self {
        let code = match e {
            HamsysError::Parse { .. } | HamsysError::Spec(_) | HamsysError::Validation(_) => 2,
            _ => 1,
        };
        Failure { code, msg: e.to_string() }
    }
}

fn fail(code: u8, msg: impl Into<String>) -> Failure {
    Failure { code, msg: msg.into() }
}

type CmdResult = std::result::Result<u8, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = std::env::var("HAMSYS_THREADS").ok().and_then(|v| v.trim().parse::<usize>().ok()) {
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("hamsys: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: &Cli) -> CmdResult {
    let g = &cli.global;
    match &cli.command {
        Command::Validate => cmd_validate(g),
        Command::Propagate { lambda, at, span, count } => cmd_propagate(g, lambda, at, span.as_deref(), *count),
        Command::Gauge { to, span, count } => cmd_gauge(g, *to, span.as_deref(), *count),
        Command::Gram { lambda, span } => cmd_gram(g, lambda, span.as_deref()),
        Command::Deficiency { interval, lambda_grid } => cmd_deficiency(g, *interval, lambda_grid.as_deref()),
        Command::Criteria { id, explain } => cmd_criteria(g, id, explain.as_deref()),
        Command::Analyze => cmd_analyze(g),
        Command::Example { id, print_spec } => cmd_example(g, id, *print_spec),
        Command::List { kind } => cmd_list(g, *kind),
    }
}

// ---------------------------------------------------------------------------
// helpers

fn options(g: &Global) -> AnalysisOptions {
    let mut o = AnalysisOptions::default();
    if let Some(t) = g.tol_ode {
        o = o.with_ode_tolerance(t);
    }
    if let Some(k) = g.tmax_exponent {
        o = o.with_tmax_exponent(k);
    }
    o
}

fn load(g: &Global) -> std::result::Result<Problem, Failure> {
    let path = g.spec.as_ref().ok_or_else(|| fail(2, "--spec <PATH> is required for this command"))?;
    let text = fs::read_to_string(path).map_err(|e| fail(2, format!("cannot read {}: {e}", path.display())))?;
    Problem::from_json(&text).map_err(|e| {
        let mut f = Failure::from(e);
        f.msg = format!("{}: {}", path.display(), f.msg);
        f.code = 2;
        f
    })
}

fn to_json<T: Serialize>(v: &T) -> std::result::Result<String, Failure> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| fail(1, e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// Write the JSON payload to `--out`, or print it (or the text summary).
fn emit<T: Serialize>(g: &Global, value: &T, text: impl FnOnce() -> String) -> std::result::Result<(), Failure> {
    let json = to_json(value)?;
    match &g.out {
        Some(p) => fs::write(p, json).map_err(|e| fail(1, format!("cannot write {}: {e}", p.display())))?,
        None if g.json => print!("{json}"),
        None => print!("{}", text()),
    }
    Ok(())
}

/// Timings are kept out of the report: next to `--out`, or on stderr.
fn emit_timings<T: Serialize>(g: &Global, t: &T) -> std::result::Result<(), Failure> {
    let json = to_json(t)?;
    match &g.out {
        Some(p) => {
            let tp = timings_path(p);
            fs::write(&tp, json).map_err(|e| fail(1, format!("cannot write {}: {e}", tp.display())))
        }
        None => {
            let _ = write!(std::io::stderr(), "timings: {json}");
            Ok(())
        }
    }
}

fn timings_path(p: &Path) -> PathBuf {
    let mut s = p.as_os_str().to_owned();
    s.push(".timings.json");
    PathBuf::from(s)
}

fn parse_complex(s: &str) -> std::result::Result<Complex64, Failure> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let num = |t: &str| t.parse::<f64>().map_err(|_| fail(2, format!("invalid number '{t}' in λ = '{s}'")));
    match parts.as_slice() {
        [re] => Ok(Complex64::new(num(re)?, 0.0)),
        [re, im] => Ok(Complex64::new(num(re)?, num(im)?)),
        _ => Err(fail(2, format!("λ must be 're' or 're,im', got '{s}'"))),
    }
}

fn parse_span(s: &SystemSpec, span: Option<&str>) -> std::result::Result<(f64, f64), Failure> {
    match span {
        None => {
            let x0 = s.interval.x0;
            Ok(s.interval.clip(x0 - 8.0, x0 + 8.0))
        }
        Some(t) => {
            let v: Vec<f64> = t
                .split(',')
                .map(|p| p.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| fail(2, format!("invalid span '{t}'")))?;
            match v.as_slice() {
                [a, b] if a < b => Ok((*a, *b)),
                _ => Err(fail(2, format!("span must be 'alpha,beta' with alpha < beta, got '{t}'"))),
            }
        }
    }
}

/// `count` extra uniform points in `[lo, hi]` drawn from the seed.
fn random_points(seed: Option<u64>, lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let Some(seed) = seed else { return Vec::new() };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| rng.gen_range(lo..=hi)).collect()
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| a.total_cmp(b));
    v.dedup();
    v
}

fn status_word(ok: bool) -> &'static str {
    if ok {
        "ok"
    } else {
        "FAILED"
    }
}

// ---------------------------------------------------------------------------
// validate

fn validation_text(label: &str, r: &ValidationReport) -> String {
    let mut s = format!("{label}: {} sample points ({})\n", r.plan_size, r.plan_description);
    for c in &r.conditions {
        let at = c.worst_x.map(|x| format!(" at x = {x}")).unwrap_or_default();
        s += &format!("  {:<26} {:<5} worst {:.3e}{at}\n", c.name, format!("{:?}", c.status).to_lowercase(), c.worst_defect);
    }
    for e in &r.errors {
        s += &format!("  error: {e}\n");
    }
    s += &format!("validation {}\n", if r.passed() { "passed" } else if r.acceptable() { "passed with warnings" } else { "FAILED" });
    s
}

fn cmd_validate(g: &Global) -> CmdResult {
    let p = load(g)?;
    let s = p.system()?;
    let r = if g.seed.is_some() {
        let mut plan = SamplePlan::default_for(&s);
        if let (Some(&lo), Some(&hi)) = (plan.points.first(), plan.points.last()) {
            plan.points.extend(random_points(g.seed, lo, hi, 100));
            plan.points = sorted(std::mem::take(&mut plan.points));
            plan.description += " plus 100 seeded random points";
        }
        match &p {
            Problem::System(_) => hamsys::system::validate_system(&s, &plan),
            Problem::SturmLiouville(sl) => sl.validate(&plan)?,
        }
    } else {
        report::validate_problem(&p)?
    };
    emit(g, &r, || validation_text(p.label(), &r))?;
    Ok(if r.acceptable() { 0 } else { 2 })
}

// ---------------------------------------------------------------------------
// propagate

#[derive(Serialize)]
struct PropagationPoint {
    x: f64,
    /// `Y(x) = exp(log_scale) · unit`.
    log_scale: f64,
    unit: MatrixRows,
    /// Relative defect of `Y(x, λ̄)* J(x) Y(x, λ) = J(x0)`.
    symplectic_defect: f64,
}

#[derive(Serialize)]
struct PropagationReport {
    label: String,
    n: usize,
    lambda: [f64; 2],
    span: [f64; 2],
    rtol: f64,
    atol: f64,
    steps: usize,
    points: Vec<PropagationPoint>,
}

fn cmd_propagate(g: &Global, lambda: &str, at: &[f64], span: Option<&str>, count: usize) -> CmdResult {
    let p = load(g)?;
    let s = p.system()?;
    let lam = parse_complex(lambda)?;
    let mut xs: Vec<f64> = at.to_vec();
    let (alpha, beta) = if at.is_empty() {
        let (a, b) = parse_span(&s, span)?;
        xs = gauge::sample_grid(&s, a, b, count);
        (a, b)
    } else {
        let lo = at.iter().cloned().fold(s.interval.x0, f64::min);
        let hi = at.iter().cloned().fold(s.interval.x0, f64::max);
        match span {
            Some(_) => parse_span(&s, span)?,
            None => (lo, hi),
        }
    };
    xs.extend(random_points(g.seed, alpha, beta, 50));
    let xs = sorted(xs);
    let o = options(g);
    let popts = PropagatorOptions {
        ode: o.deficiency.ode,
        store_dense: true,
        ..PropagatorOptions::default()
    };
    let fs = Arc::new(FundamentalSolution::new(&s, lam, alpha, beta, popts)?);
    let mut points = Vec::with_capacity(xs.len());
    for &x in &xs {
        let y = fs.evaluate(x)?;
        points.push(PropagationPoint {
            x,
            log_scale: y.log_scale,
            unit: matrix_rows(&y.unit),
            symplectic_defect: fs.symplectic_defect(x)?,
        });
    }
    let r = PropagationReport {
        label: p.label().to_string(),
        n: s.n,
        lambda: [lam.re, lam.im],
        span: [alpha, beta],
        rtol: o.deficiency.ode.rtol,
        atol: o.deficiency.ode.atol,
        steps: fs.steps(),
        points,
    };
    emit(g, &r, || {
        let worst = r.points.iter().map(|q| q.symplectic_defect).fold(0.0, f64::max);
        format!(
            "{}: Y(x, {}{:+}i) on [{alpha}, {beta}], {} points, {} steps, worst symplectic defect {worst:.3e}\n(use --json for the matrices)\n",
            r.label,
            lam.re,
            lam.im,
            r.points.len(),
            r.steps
        )
    })?;
    Ok(0)
}

// ---------------------------------------------------------------------------
// gauge

#[derive(Serialize)]
struct GaugeReport {
    target: &'static str,
    /// Largest neglected residual (canonical: ‖U*JU′ + U*BU‖).
    #[serde(skip_serializing_if = "Option::is_none")]
    max_b_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    max_j_defect: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    min_gap: Option<f64>,
    /// The gauge `U` on the grid.
    #[serde(skip_serializing_if = "Option::is_none")]
    gauge: Option<Vec<MatrixRows>>,
    system: serde_json::Value,
}

fn system_value(s: &SystemSpec, grid: &[f64]) -> std::result::Result<serde_json::Value, Failure> {
    let v = if s.is_symbolic() {
        serde_json::from_str(&s.to_json()?).map_err(|e| fail(1, e.to_string()))?
    } else {
        serde_json::to_value(report::sample_system(s, grid)?).map_err(|e| fail(1, e.to_string()))?
    };
    Ok(v)
}

fn cmd_gauge(g: &Global, to: GaugeTarget, span: Option<&str>, count: usize) -> CmdResult {
    let p = load(g)?;
    let s = p.system()?;
    let (alpha, beta) = parse_span(&s, span)?;
    let gauge_values = |u: &gauge::GaugeMap, grid: &[f64]| -> Result<Vec<MatrixRows>> {
        grid.iter().map(|&x| u.evaluate(x).map(|m| matrix_rows(&m))).collect()
    };
    let r = match to {
        GaugeTarget::Canonical => {
            let c = gauge::canonicalize(&s, alpha, beta, count)?;
            let grid = gauge::sample_grid(&s, alpha, beta, count);
            GaugeReport {
                target: "canonical",
                max_b_residual: Some(c.max_b_residual),
                max_j_defect: Some(c.max_j_defect),
                min_gap: None,
                gauge: Some(gauge_values(&c.gauge, &grid)?),
                system: system_value(&c.system, &grid)?,
            }
        }
        GaugeTarget::ConstantJ => {
            let c = gauge::reduce_constant_j(&s, alpha, beta, count, gauge::GAMMA_GAP)?;
            let grid = gauge::sample_grid(&s, alpha, beta, count);
            GaugeReport {
                target: "constant-j",
                max_b_residual: None,
                max_j_defect: Some(c.max_j_defect),
                min_gap: Some(c.min_gap),
                gauge: Some(gauge_values(&c.gauge, &grid)?),
                system: system_value(&c.system, &grid)?,
            }
        }
        GaugeTarget::SlEmbed => {
            let Problem::SturmLiouville(sl) = &p else {
                return Err(fail(2, "sl-embed needs a Sturm–Liouville specification (A, Q, R, H)"));
            };
            let e = gauge::embed_sturm_liouville(sl)?;
            let grid = gauge::sample_grid(&e, alpha, beta, count);
            GaugeReport {
                target: "sl-embed",
                max_b_residual: None,
                max_j_defect: None,
                min_gap: None,
                gauge: None,
                system: system_value(&e, &grid)?,
            }
        }
        GaugeTarget::Square => {
            let q = gauge::square_system(&s)?;
            let grid = gauge::sample_grid(&q, alpha, beta, count);
            GaugeReport {
                target: "square",
                max_b_residual: None,
                max_j_defect: None,
                min_gap: None,
                gauge: None,
                system: system_value(&q, &grid)?,
            }
        }
    };
    // the result is data; always JSON
    let json = to_json(&r)?;
    match &g.out {
        Some(path) => fs::write(path, json).map_err(|e| fail(1, format!("cannot write {}: {e}", path.display())))?,
        None => print!("{json}"),
    }
    Ok(0)
}

// ---------------------------------------------------------------------------
// gram

#[derive(Serialize)]
struct GramReport {
    label: String,
    lambda: [f64; 2],
    span: [f64; 2],
    /// `M = exp(log_scale) · unit`.
    log_scale: f64,
    unit: MatrixRows,
    singular_values: Vec<f64>,
    rank: usize,
    /// Rank on exhausting spans of the interval.
    system_rank: Option<RankReport>,
    definite: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rank_error: Option<String>,
}

fn cmd_gram(g: &Global, lambda: &str, span: Option<&str>) -> CmdResult {
    let p = load(g)?;
    let s = p.system()?;
    let lam = parse_complex(lambda)?;
    let (alpha, beta) = parse_span(&s, span)?;
    let m = gram::gram_matrix(&s, lam, alpha, beta)?;
    let (system_rank, rank_error) = match gram::rank_of_system(&s) {
        Ok(r) => (Some(r), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let r = GramReport {
        label: p.label().to_string(),
        lambda: [lam.re, lam.im],
        span: [alpha, beta],
        log_scale: m.scaled.log_scale,
        unit: matrix_rows(&m.scaled.unit),
        singular_values: m.singular_values(),
        rank: m.rank(),
        definite: system_rank.as_ref().map(|r| r.is_definite()),
        system_rank,
        rank_error,
    };
    emit(g, &r, || {
        let mut t = format!("{}: rank M[{alpha}, {beta}] = {}\n", r.label, r.rank);
        match &r.system_rank {
            Some(sr) => {
                t += &format!(
                    "rank on the interval = {} ({}), definite = {}\n",
                    sr.rank,
                    if sr.stabilized { "stabilized" } else { "NOT stabilized" },
                    sr.is_definite()
                )
            }
            None => t += &format!("rank on the interval: {}\n", r.rank_error.as_deref().unwrap_or("")),
        }
        t
    })?;
    Ok(match &r.system_rank {
        Some(sr) if sr.stabilized => 0,
        _ => 3,
    })
}

// ---------------------------------------------------------------------------
// deficiency

#[derive(Serialize)]
struct DeficiencyOutput {
    interval: &'static str,
    tmax_exponent: i32,
    #[serde(skip_serializing_if = "Option::is_none")]
    half_line: Option<DeficiencyReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    line: Option<LineReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    lambda_constancy: Option<LambdaConstancy>,
}

fn deficiency_text(r: &DeficiencyReport) -> String {
    format!(
        "{} ({}): n = {}, rank = {}, κ± = ({}, {}), ñ± = ({}, {}), N± = ({}, {}), inconclusive = {}, inequalities {}\n",
        r.label,
        r.interval.as_str(),
        r.n,
        r.rank,
        r.kappa_plus,
        r.kappa_minus,
        r.n_tilde_plus,
        r.n_tilde_minus,
        r.deficiency_plus,
        r.deficiency_minus,
        r.inconclusive,
        status_word(r.inequalities_hold)
    )
}

fn cmd_deficiency(g: &Global, interval: IntervalChoice, lambda_grid: Option<&str>) -> CmdResult {
    let p = load(g)?;
    let mut s = p.system()?;
    let o = options(g).deficiency;
    match interval {
        IntervalChoice::Full => {}
        IntervalChoice::Right => s = s.with_interval(s.interval.right_part()),
        IntervalChoice::Left => s = s.with_interval(s.interval.left_part()),
    }
    let mut out = DeficiencyOutput {
        interval: match interval {
            IntervalChoice::Full => "full",
            IntervalChoice::Right => "right",
            IntervalChoice::Left => "left",
        },
        tmax_exponent: o.k_max,
        half_line: None,
        line: None,
        lambda_constancy: None,
    };
    if s.interval.kind == IntervalKind::FullLine {
        out.line = Some(deficiency::line_indices(&s, &o)?);
    } else {
        out.half_line = Some(deficiency::formal_deficiency_indices(&s, &o)?);
    }
    if let Some(grid) = lambda_grid {
        if s.interval.kind == IntervalKind::FullLine {
            return Err(fail(2, "--lambda-grid needs a half-line or finite interval (use --interval right|left)"));
        }
        let lambdas = grid
            .split(';')
            .filter(|t| !t.trim().is_empty())
            .map(parse_complex)
            .collect::<std::result::Result<Vec<_>, _>>()?;
        out.lambda_constancy = Some(deficiency::lambda_constancy_check(&s, &lambdas, &o)?);
    }
    let inconclusive = out.half_line.as_ref().map_or(0, |r| r.inconclusive) + out.line.as_ref().map_or(0, |r| r.inconclusive);
    emit(g, &out, || {
        let mut t = String::new();
        if let Some(r) = &out.half_line {
            t += &deficiency_text(r);
        }
        if let Some(r) = &out.line {
            t += &format!(
                "{} (full line): n = {}, rank = {}, ñ± = ({}, {}), N± = ({}, {}), inconclusive = {}\n",
                r.label, r.n, r.rank, r.n_tilde_plus, r.n_tilde_minus, r.deficiency_plus, r.deficiency_minus, r.inconclusive
            );
            for h in &r.halves {
                t += "  ";
                t += &deficiency_text(h);
            }
        }
        if let Some(c) = &out.lambda_constancy {
            t += &format!("λ-constancy: counts {:?}, conjugate counts {:?}\n", c.counts, c.conjugate_counts);
        }
        t
    })?;
    Ok(if inconclusive > 0 { 3 } else { 0 })
}

// ---------------------------------------------------------------------------
// criteria

fn verdict_text(v: &CriterionVerdict) -> String {
    let mut t = format!("{:<26} {:<12} {}\n", v.id, v.status.as_str(), v.conclusion);
    for h in &v.hypotheses {
        t += &format!("    [{}] {}: {}\n", format!("{:?}", h.status).to_lowercase(), h.name, h.detail);
    }
    t
}

fn cmd_criteria(g: &Global, id: &str, explain: Option<&str>) -> CmdResult {
    if let Some(e) = explain {
        let text = criteria::explain(e).map_err(|err| fail(2, err.to_string()))?;
        if g.json {
            print!("{}", to_json(criteria::info(e)?)?);
        } else {
            println!("{text}");
        }
        return Ok(0);
    }
    let p = load(g)?;
    let o = options(g).criteria;
    let verdicts = if id == "all" {
        criteria::evaluate_all(&p, &o)
    } else {
        vec![criteria::evaluate_criterion(id, &p, &o).map_err(|e| match e {
            HamsysError::UnknownId(_) | HamsysError::Precondition(_) => fail(2, e.to_string()),
            e => Failure::from(e),
        })?]
    };
    emit(g, &verdicts, || verdicts.iter().map(verdict_text).collect())?;
    Ok(0)
}

// ---------------------------------------------------------------------------
// analyze

fn analysis_text(r: &AnalysisReport) -> String {
    let mut t = format!("{} ({}, {}, n = {})\n", r.label, r.problem, r.interval.as_str(), r.n);
    t += &format!(
        "validation: {}\n",
        if r.validation.passed() { "passed" } else if r.validation.acceptable() { "passed with warnings" } else { "FAILED" }
    );
    if let Some(rk) = &r.rank.rank {
        t += &format!("rank: {} ({}), definite: {}\n", rk.rank, if rk.stabilized { "stabilized" } else { "NOT stabilized" }, rk.is_definite());
    }
    if let Some(e) = &r.rank.error {
        t += &format!("rank: {e}\n");
    }
    if let Some(d) = &r.deficiency.half_line {
        t += &deficiency_text(d);
    }
    if let Some(l) = &r.deficiency.line {
        t += &format!(
            "full line: ñ± = ({}, {}), N± = ({}, {}), inconclusive = {}\n",
            l.n_tilde_plus, l.n_tilde_minus, l.deficiency_plus, l.deficiency_minus, l.inconclusive
        );
    }
    if let Some(e) = &r.deficiency.error {
        t += &format!("deficiency: {e}\n");
    }
    for v in &r.criteria {
        t += &format!("  {:<26} {:<12} {}\n", v.id, v.status.as_str(), v.conclusion);
    }
    for c in r.consistency.iter().filter(|c| !c.consistent) {
        t += &format!("INCONSISTENT: {} claims {:?}/{:?}, measured {:?}\n", c.criterion, c.claimed_plus, c.claimed_minus, c.measured);
    }
    t += &format!("status: {:?}\n", r.status).to_lowercase();
    t
}

fn cmd_analyze(g: &Global) -> CmdResult {
    let p = load(g)?;
    let r = report::analyze(&p, &options(g))?;
    emit(g, &r, || analysis_text(&r))?;
    emit_timings(g, &r.timings)?;
    Ok(r.status.exit_code() as u8)
}

// ---------------------------------------------------------------------------
// example

#[derive(Serialize)]
struct ExampleTiming<'a> {
    id: &'a str,
    timings: &'a report::Timings,
}

fn cmd_example(g: &Global, id: &str, print_spec: bool) -> CmdResult {
    if print_spec {
        let f = fixtures::find(id).ok_or_else(|| fail(2, format!("unknown example '{id}' (see `hamsys list examples`)")))?;
        let mut text = f.problem()?.to_json()?;
        text.push('\n');
        match &g.out {
            Some(p) => fs::write(p, text).map_err(|e| fail(1, format!("cannot write {}: {e}", p.display())))?,
            None => print!("{text}"),
        }
        return Ok(0);
    }
    let list: Vec<fixtures::Fixture> = if id == "all" {
        fixtures::all()
    } else {
        vec![fixtures::find(id).ok_or_else(|| fail(2, format!("unknown example '{id}' (see `hamsys list examples`)")))?]
    };
    let o = options(g);
    let outcomes: Vec<ExampleOutcome> = list
        .par_iter()
        .map(|f| report::run_example(f, &o))
        .collect::<Result<Vec<_>>>()?;
    let timings: Vec<ExampleTiming> = outcomes
        .iter()
        .map(|x| ExampleTiming {
            id: x.id,
            timings: &x.report.timings,
        })
        .collect();
    emit(g, &outcomes, || {
        let mut t = String::new();
        for x in &outcomes {
            t += &format!("{:<16} {}  {}\n", x.id, if x.passed { "pass" } else { "FAIL" }, x.title);
            for m in &x.mismatches {
                t += &format!("    {m}\n");
            }
        }
        let passed = outcomes.iter().filter(|x| x.passed).count();
        t += &format!("{passed}/{} examples reproduce their expected results\n", outcomes.len());
        t
    })?;
    emit_timings(g, &timings)?;
    Ok(if outcomes.iter().all(|x| x.passed) { 0 } else { 1 })
}

// ---------------------------------------------------------------------------
// list

#[derive(Serialize)]
struct ExampleEntry {
    id: &'static str,
    title: &'static str,
}

fn cmd_list(g: &Global, kind: ListKind) -> CmdResult {
    match kind {
        ListKind::Criteria => {
            let mut v: Vec<&criteria::CriterionInfo> = criteria::registry().iter().collect();
            v.sort_by_key(|c| c.id);
            emit(g, &v, || {
                v.iter()
                    .map(|c| {
                        format!(
                            "{:<26} {:<14} {:<24} {}\n",
                            c.id,
                            if c.equivalence { "equivalence" } else { "sufficient" },
                            serde_json::to_value(c.applies_to).ok().and_then(|x| x.as_str().map(String::from)).unwrap_or_default(),
                            c.title
                        )
                    })
                    .collect()
            })?;
        }
        ListKind::Examples => {
            let mut v: Vec<ExampleEntry> = fixtures::all().iter().map(|f| ExampleEntry { id: f.id, title: f.title }).collect();
            v.sort_by_key(|e| e.id);
            emit(g, &v, || v.iter().map(|e| format!("{:<16} {}\n", e.id, e.title)).collect())?;
        }
    }
    Ok(0)
}
