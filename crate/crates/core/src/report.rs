//! The full analysis pipeline (validation → rank → deficiency → criteria)
//! and its JSON report, plus fixture comparison.

use std::time::Instant;

use serde::Serialize;

use crate::criteria::{self, ClaimQuantity, ClaimScope, CriteriaOptions, CriterionVerdict, VerdictStatus};
use crate::deficiency::{self, DeficiencyOptions, DeficiencyReport, LineReport};
use crate::error::Result;
use crate::fixtures::Fixture;
use crate::gram::{self, RankReport};
use crate::matrix::CMat;
use crate::system::{self, IntervalFile, IntervalKind, Problem, SamplePlan, SystemSpec, ValidationReport};

/// Numerical settings of an analysis.
#[derive(Debug, Clone, Default)]
pub struct AnalysisOptions {
    pub deficiency: DeficiencyOptions,
    pub criteria: CriteriaOptions,
}

impl AnalysisOptions {
    /// Relative ODE tolerance (the absolute one follows at 1/100 of it).
    pub fn with_ode_tolerance(mut self, rtol: f64) -> Self {
        for ode in [&mut self.deficiency.ode, &mut self.criteria.deficiency.ode] {
            ode.rtol = rtol;
            ode.atol = rtol * 1e-2;
        }
        self
    }

    /// Largest truncation exponent for the deficiency plan and the
    /// improper-integral tables.
    pub fn with_tmax_exponent(mut self, k: i32) -> Self {
        self.deficiency.k_max = k.max(self.deficiency.k_min);
        self.criteria.deficiency.k_max = self.deficiency.k_max;
        self.criteria.plan.k_max = k.max(self.criteria.plan.k_min);
        self
    }

    pub fn echo(&self) -> ParameterEcho {
        ParameterEcho {
            ode_rtol: self.deficiency.ode.rtol,
            ode_atol: self.deficiency.ode.atol,
            deficiency_k_min: self.deficiency.k_min,
            deficiency_k_max: self.deficiency.k_max,
            log_cap: self.deficiency.log_cap,
            rescale_threshold: self.deficiency.rescale_threshold,
            integral_k_min: self.criteria.plan.k_min,
            integral_k_max: self.criteria.plan.k_max,
            integral_eps: self.criteria.plan.eps,
            criteria_grid_points: self.criteria.grid_points,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ParameterEcho {
    pub ode_rtol: f64,
    pub ode_atol: f64,
    pub deficiency_k_min: i32,
    pub deficiency_k_max: i32,
    pub log_cap: f64,
    pub rescale_threshold: f64,
    pub integral_k_min: i32,
    pub integral_k_max: i32,
    pub integral_eps: f64,
    pub criteria_grid_points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReportStatus {
    Ok,
    ValidationFailed,
    Inconclusive,
    Inconsistent,
}

impl ReportStatus {
    /// Process exit code for this outcome.
    pub fn exit_code(self) -> i32 {
        match self {
            ReportStatus::Ok => 0,
            ReportStatus::Inconsistent => 1,
            ReportStatus::ValidationFailed => 2,
            ReportStatus::Inconclusive => 3,
        }
    }
}

/// Comparison of a verdict's index claim with the numerical estimate.
#[derive(Debug, Clone, Serialize)]
pub struct ConsistencyCheck {
    pub criterion: &'static str,
    pub status: VerdictStatus,
    pub scope: ClaimScope,
    pub quantity: ClaimQuantity,
    pub claimed_plus: [i64; 2],
    pub claimed_minus: [i64; 2],
    pub measured: [i64; 2],
    pub consistent: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct RankSummary {
    pub rank: Option<RankReport>,
    pub definite: Option<bool>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DeficiencySummary {
    pub half_line: Option<DeficiencyReport>,
    pub line: Option<LineReport>,
    pub error: Option<String>,
}

impl DeficiencySummary {
    fn inconclusive(&self) -> bool {
        self.error.is_some()
            || self.half_line.as_ref().is_some_and(|r| r.inconclusive > 0)
            || self.line.as_ref().is_some_and(|r| r.inconclusive > 0)
    }
}

/// Wall-clock timings; kept out of the serialized report so that reports
/// are byte-stable.
#[derive(Debug, Clone, Default, Serialize)]
pub struct Timings {
    pub validation: f64,
    pub rank: f64,
    pub deficiency: f64,
    pub criteria: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalysisReport {
    pub tool: &'static str,
    pub version: &'static str,
    pub label: String,
    pub problem: &'static str,
    pub interval: IntervalKind,
    pub n: usize,
    pub parameters: ParameterEcho,
    pub validation: ValidationReport,
    pub rank: RankSummary,
    pub deficiency: DeficiencySummary,
    pub criteria: Vec<CriterionVerdict>,
    pub consistency: Vec<ConsistencyCheck>,
    pub status: ReportStatus,
    #[serde(skip)]
    pub timings: Timings,
}

pub fn validate_problem(p: &Problem) -> Result<ValidationReport> {
    let s = p.system()?;
    let plan = SamplePlan::default_for(&s);
    match p {
        Problem::System(_) => Ok(system::validate_system(&s, &plan)),
        Problem::SturmLiouville(sl) => sl.validate(&plan),
    }
}

/// Indices of the analysed problem on its interval.
pub fn deficiency_summary(p: &Problem, o: &DeficiencyOptions) -> DeficiencySummary {
    let mut out = DeficiencySummary {
        half_line: None,
        line: None,
        error: None,
    };
    let s = match p.system() {
        Ok(s) => s,
        Err(e) => {
            out.error = Some(e.to_string());
            return out;
        }
    };
    let r = if s.interval.kind == IntervalKind::FullLine {
        deficiency::line_indices(&s, o).map(|r| out.line = Some(r))
    } else {
        deficiency::formal_deficiency_indices(&s, o).map(|r| out.half_line = Some(r))
    };
    if let Err(e) = r {
        out.error = Some(e.to_string());
    }
    out
}

fn consistency(verdicts: &[CriterionVerdict], d: &DeficiencySummary) -> Vec<ConsistencyCheck> {
    let mut out = Vec::new();
    for v in verdicts {
        let Some(claim) = v.claim else { continue };
        if v.status == VerdictStatus::Inconclusive {
            continue;
        }
        let measured = match (claim.scope, claim.quantity) {
            (ClaimScope::HalfLine, ClaimQuantity::NTilde) => d
                .half_line
                .as_ref()
                .filter(|r| r.inconclusive == 0)
                .map(|r| [r.n_tilde_plus as i64, r.n_tilde_minus as i64]),
            (ClaimScope::HalfLine, ClaimQuantity::Deficiency) => d
                .half_line
                .as_ref()
                .filter(|r| r.inconclusive == 0)
                .map(|r| [r.deficiency_plus, r.deficiency_minus]),
            (ClaimScope::Line, ClaimQuantity::NTilde) => d
                .line
                .as_ref()
                .filter(|r| r.inconclusive == 0)
                .map(|r| [r.n_tilde_plus as i64, r.n_tilde_minus as i64]),
            (ClaimScope::Line, ClaimQuantity::Deficiency) => d
                .line
                .as_ref()
                .filter(|r| r.inconclusive == 0)
                .map(|r| [r.deficiency_plus, r.deficiency_minus]),
        };
        let Some(m) = measured else { continue };
        out.push(ConsistencyCheck {
            criterion: v.id,
            status: v.status,
            scope: claim.scope,
            quantity: claim.quantity,
            claimed_plus: claim.plus,
            claimed_minus: claim.minus,
            measured: m,
            consistent: claim.admits(m[0], m[1]),
        });
    }
    out
}

/// Run the whole pipeline.  Validation failures stop after the validation
/// stage.
pub fn analyze(p: &Problem, o: &AnalysisOptions) -> Result<AnalysisReport> {
    let s = p.system()?;
    let mut timings = Timings::default();
    let t = Instant::now();
    let validation = validate_problem(p)?;
    timings.validation = t.elapsed().as_secs_f64();
    let mut report = AnalysisReport {
        tool: "hamsys",
        version: env!("CARGO_PKG_VERSION"),
        label: p.label().to_string(),
        problem: match p {
            Problem::System(_) => "system",
            Problem::SturmLiouville(_) => "sturm-liouville",
        },
        interval: s.interval.kind,
        n: s.n,
        parameters: o.echo(),
        validation,
        rank: RankSummary {
            rank: None,
            definite: None,
            error: None,
        },
        deficiency: DeficiencySummary {
            half_line: None,
            line: None,
            error: None,
        },
        criteria: Vec::new(),
        consistency: Vec::new(),
        status: ReportStatus::Ok,
        timings,
    };
    if !report.validation.acceptable() {
        report.status = ReportStatus::ValidationFailed;
        return Ok(report);
    }

    let t = Instant::now();
    match gram::rank_of_system(&s) {
        Ok(r) => {
            report.rank.definite = Some(r.is_definite());
            report.rank.rank = Some(r);
        }
        Err(e) => report.rank.error = Some(e.to_string()),
    }
    report.timings.rank = t.elapsed().as_secs_f64();

    let t = Instant::now();
    report.deficiency = deficiency_summary(p, &o.deficiency);
    report.timings.deficiency = t.elapsed().as_secs_f64();

    let t = Instant::now();
    report.criteria = criteria::evaluate_all(p, &o.criteria);
    report.timings.criteria = t.elapsed().as_secs_f64();

    report.consistency = consistency(&report.criteria, &report.deficiency);
    let rank_ok = report.rank.rank.as_ref().is_some_and(|r| r.stabilized);
    report.status = if report.consistency.iter().any(|c| !c.consistent) {
        ReportStatus::Inconsistent
    } else if !rank_ok || report.deficiency.inconclusive() {
        ReportStatus::Inconclusive
    } else {
        ReportStatus::Ok
    };
    Ok(report)
}

/// Outcome of running a shipped example against its expectations.
#[derive(Debug, Clone, Serialize)]
pub struct ExampleOutcome {
    pub id: &'static str,
    pub title: &'static str,
    pub passed: bool,
    pub mismatches: Vec<String>,
    pub report: AnalysisReport,
}

pub fn run_example(f: &Fixture, o: &AnalysisOptions) -> Result<ExampleOutcome> {
    let p = f.problem()?;
    let report = analyze(&p, o)?;
    let e = f.expectation();
    let mut mm = Vec::new();
    let rank = report.rank.rank.as_ref();
    if let Some(want) = e.rank {
        match rank {
            Some(r) if r.rank == want => {}
            Some(r) => mm.push(format!("rank: expected {want}, got {}", r.rank)),
            None => mm.push(format!("rank: expected {want}, not computed")),
        }
    }
    if let Some(want) = e.definite {
        if report.rank.definite != Some(want) {
            mm.push(format!("definite: expected {want}, got {:?}", report.rank.definite));
        }
    }
    let half = report.deficiency.half_line.as_ref();
    if let Some(want) = e.n_tilde {
        match half {
            Some(r) if r.inconclusive == 0 && [r.n_tilde_plus, r.n_tilde_minus] == want => {}
            Some(r) => mm.push(format!(
                "ñ: expected {want:?}, got [{}, {}] ({} inconclusive)",
                r.n_tilde_plus, r.n_tilde_minus, r.inconclusive
            )),
            None => mm.push(format!("ñ: expected {want:?}, not computed")),
        }
    }
    if let Some(want) = e.deficiency {
        match half {
            Some(r) if [r.deficiency_plus, r.deficiency_minus] == want => {}
            Some(r) => mm.push(format!("N: expected {want:?}, got [{}, {}]", r.deficiency_plus, r.deficiency_minus)),
            None => mm.push(format!("N: expected {want:?}, not computed")),
        }
    }
    if let Some(want) = e.line_n_tilde {
        match report.deficiency.line.as_ref() {
            Some(r) if r.inconclusive == 0 && [r.n_tilde_plus, r.n_tilde_minus] == want => {}
            Some(r) => mm.push(format!(
                "line ñ: expected {want:?}, got [{}, {}] ({} inconclusive)",
                r.n_tilde_plus, r.n_tilde_minus, r.inconclusive
            )),
            None => mm.push(format!("line ñ: expected {want:?}, not computed")),
        }
    }
    for (id, want) in &e.verdicts {
        match report.criteria.iter().find(|v| v.id == *id) {
            Some(v) if v.status.as_str() == *want => {}
            Some(v) => mm.push(format!("{id}: expected {want}, got {}", v.status.as_str())),
            None => mm.push(format!("{id}: expected {want}, not evaluated")),
        }
    }
    if report.status != ReportStatus::Ok {
        mm.push(format!("report status {:?}", report.status));
    }
    Ok(ExampleOutcome {
        id: f.id,
        title: f.title,
        passed: mm.is_empty(),
        mismatches: mm,
        report,
    })
}

// ---------------------------------------------------------------------------
// JSON export of matrices and sampled systems

/// A complex matrix as rows of `[re, im]` pairs.
pub type MatrixRows = Vec<Vec<[f64; 2]>>;

pub fn matrix_rows(m: &CMat) -> MatrixRows {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

/// A system given by its coefficients on a grid.
#[derive(Debug, Clone, Serialize)]
pub struct SampledSystem {
    pub format: &'static str,
    pub label: String,
    pub n: usize,
    pub interval: IntervalFile,
    pub grid: Vec<f64>,
    #[serde(rename = "J")]
    pub j: Vec<MatrixRows>,
    #[serde(rename = "B")]
    pub b: Vec<MatrixRows>,
    #[serde(rename = "H")]
    pub h: Vec<MatrixRows>,
}

pub fn sample_system(s: &SystemSpec, grid: &[f64]) -> Result<SampledSystem> {
    let mut out = SampledSystem {
        format: "sampled-system",
        label: s.label.clone(),
        n: s.n,
        interval: IntervalFile::from(s.interval),
        grid: grid.to_vec(),
        j: Vec::with_capacity(grid.len()),
        b: Vec::with_capacity(grid.len()),
        h: Vec::with_capacity(grid.len()),
    };
    for &x in grid {
        out.j.push(matrix_rows(&s.j.evaluate(x)?));
        out.b.push(matrix_rows(&s.b.evaluate(x)?));
        out.h.push(matrix_rows(&s.h.evaluate(x)?));
    }
    Ok(out)
}
