//! Coefficient data of symmetric first-order systems `J f' + B f = λ H f`
//! and of Sturm–Liouville problems, with structural validation.

use serde::{Deserialize, Serialize};

use crate::error::{HamsysError, Result};
use crate::linalg;
use crate::matrix::{CMat, Coefficient, MatrixFunction};

/// Default structural tolerance.
pub const TAU_STRUCT: f64 = 1e-10;
/// Above this a structural defect is a hard failure (between the two: warning).
pub const TAU_HARD: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IntervalKind {
    Finite,
    HalfLinePositive,
    HalfLineNegative,
    FullLine,
}

impl IntervalKind {
    pub fn as_str(self) -> &'static str {
        match self {
            IntervalKind::Finite => "finite",
            IntervalKind::HalfLinePositive => "half-line-positive",
            IntervalKind::HalfLineNegative => "half-line-negative",
            IntervalKind::FullLine => "full-line",
        }
    }
}

/// Interval with basepoint. Infinite endpoints are `±f64::INFINITY`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntervalSpec {
    pub kind: IntervalKind,
    pub a: f64,
    pub b: f64,
    pub x0: f64,
}

impl IntervalSpec {
    pub fn new(kind: IntervalKind, a: f64, b: f64, x0: f64) -> Result<IntervalSpec> {
        let iv = IntervalSpec { kind, a, b, x0 };
        iv.check()?;
        Ok(iv)
    }

    pub fn finite(a: f64, b: f64, x0: f64) -> Result<IntervalSpec> {
        IntervalSpec::new(IntervalKind::Finite, a, b, x0)
    }

    pub fn half_line_positive(a: f64) -> IntervalSpec {
        IntervalSpec {
            kind: IntervalKind::HalfLinePositive,
            a,
            b: f64::INFINITY,
            x0: a,
        }
    }

    pub fn half_line_negative(b: f64) -> IntervalSpec {
        IntervalSpec {
            kind: IntervalKind::HalfLineNegative,
            a: f64::NEG_INFINITY,
            b,
            x0: b,
        }
    }

    pub fn full_line(x0: f64) -> IntervalSpec {
        IntervalSpec {
            kind: IntervalKind::FullLine,
            a: f64::NEG_INFINITY,
            b: f64::INFINITY,
            x0,
        }
    }

    fn check(&self) -> Result<()> {
        if !(self.a < self.b) {
            return Err(HamsysError::Spec(format!("interval requires a < b (a={}, b={})", self.a, self.b)));
        }
        if !self.x0.is_finite() || self.x0 < self.a || self.x0 > self.b {
            return Err(HamsysError::Spec(format!(
                "basepoint x0={} must be a finite point of [{}, {}]",
                self.x0, self.a, self.b
            )));
        }
        let ok = match self.kind {
            IntervalKind::Finite => self.a.is_finite() && self.b.is_finite(),
            IntervalKind::HalfLinePositive => self.a.is_finite() && self.b == f64::INFINITY,
            IntervalKind::HalfLineNegative => self.a == f64::NEG_INFINITY && self.b.is_finite(),
            IntervalKind::FullLine => self.a == f64::NEG_INFINITY && self.b == f64::INFINITY,
        };
        if !ok {
            return Err(HamsysError::Spec(format!(
                "endpoints [{}, {}] inconsistent with interval kind {}",
                self.a,
                self.b,
                self.kind.as_str()
            )));
        }
        Ok(())
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.a && x <= self.b
    }

    /// Clip a span to the interval.
    pub fn clip(&self, lo: f64, hi: f64) -> (f64, f64) {
        (lo.max(self.a), hi.min(self.b))
    }

    /// The positive half `[x0, b)` of this interval.
    pub fn right_part(&self) -> IntervalSpec {
        if self.b.is_finite() {
            IntervalSpec {
                kind: IntervalKind::Finite,
                a: self.x0,
                b: self.b,
                x0: self.x0,
            }
        } else {
            IntervalSpec::half_line_positive(self.x0)
        }
    }

    /// The negative half `(a, x0]` of this interval.
    pub fn left_part(&self) -> IntervalSpec {
        if self.a.is_finite() {
            IntervalSpec {
                kind: IntervalKind::Finite,
                a: self.a,
                b: self.x0,
                x0: self.x0,
            }
        } else {
            IntervalSpec::half_line_negative(self.x0)
        }
    }
}

/// Block layout attached to systems built from (V, B, A, H) blocks: used by
/// structural definiteness and the block Weyl weight.
#[derive(Debug, Clone)]
pub struct BlockLayout {
    /// Inner n×n leading coefficient (J of the block form; `iI` for
    /// Sturm–Liouville embeddings).
    pub inner_j: Coefficient,
    pub a: Coefficient,
    pub h: Coefficient,
    pub v: Coefficient,
}

/// A symmetric first-order system on an interval.
#[derive(Debug, Clone)]
pub struct SystemSpec {
    pub n: usize,
    pub interval: IntervalSpec,
    pub j: Coefficient,
    pub b: Coefficient,
    pub h: Coefficient,
    pub label: String,
    pub block: Option<BlockLayout>,
}

impl SystemSpec {
    pub fn new(
        interval: IntervalSpec,
        j: impl Into<Coefficient>,
        b: impl Into<Coefficient>,
        h: impl Into<Coefficient>,
        label: impl Into<String>,
    ) -> Result<SystemSpec> {
        let (j, b, h) = (j.into(), b.into(), h.into());
        let n = j.n();
        if b.n() != n || h.n() != n {
            return Err(HamsysError::Dimension(format!(
                "J is {n}x{n} but B is {}x{} and H is {}x{}",
                b.n(),
                b.n(),
                h.n(),
                h.n()
            )));
        }
        Ok(SystemSpec {
            n,
            interval,
            j,
            b,
            h,
            label: label.into(),
            block: None,
        })
    }

    pub fn with_interval(&self, interval: IntervalSpec) -> SystemSpec {
        let mut s = self.clone();
        s.interval = interval;
        s
    }

    pub fn with_block(mut self, block: BlockLayout) -> SystemSpec {
        self.block = Some(block);
        self
    }

    /// All piecewise breakpoints of the coefficients.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut out = self.j.breakpoints();
        out.extend(self.b.breakpoints());
        out.extend(self.h.breakpoints());
        out.sort_by(|a, b| a.partial_cmp(b).unwrap());
        out.dedup();
        out
    }

    pub fn is_symbolic(&self) -> bool {
        self.j.as_symbolic().is_some() && self.b.as_symbolic().is_some() && self.h.as_symbolic().is_some()
    }

    /// Reflect a system on a negative half-line onto the positive one via
    /// x -> -x: (J, B, H)(x) ↦ (−J, B, H)(−x). The reflected coefficients
    /// satisfy the same structural conditions.
    pub fn reflect(&self) -> Result<SystemSpec> {
        let (j, b, h) = match (self.j.as_symbolic(), self.b.as_symbolic(), self.h.as_symbolic()) {
            (Some(j), Some(b), Some(h)) => (j.reflect().neg(), b.reflect(), h.reflect()),
            _ => return Err(HamsysError::Precondition("reflection requires symbolic coefficients".into())),
        };
        let iv = self.interval;
        let interval = IntervalSpec {
            kind: match iv.kind {
                IntervalKind::HalfLinePositive => IntervalKind::HalfLineNegative,
                IntervalKind::HalfLineNegative => IntervalKind::HalfLinePositive,
                k => k,
            },
            a: -iv.b,
            b: -iv.a,
            x0: -iv.x0,
        };
        SystemSpec::new(interval, j, b, h, format!("{} (reflected)", self.label))
    }

    /// Parse a system from its JSON spec text.
    pub fn from_json(text: &str) -> Result<SystemSpec> {
        match Problem::from_json(text)? {
            Problem::System(s) => Ok(s),
            Problem::SturmLiouville(_) => Err(HamsysError::Spec(
                "expected a first-order system spec (J, B, H), found a Sturm-Liouville spec".into(),
            )),
        }
    }

    /// Serialize a symbolic system to the JSON spec format.
    pub fn to_json(&self) -> Result<String> {
        let file = SpecFile {
            n: self.n,
            interval: IntervalFile::from(self.interval),
            j: Some(sym(&self.j, "J")?.to_rows()),
            b: Some(sym(&self.b, "B")?.to_rows()),
            h: Some(sym(&self.h, "H")?.to_rows()),
            a: None,
            q: None,
            r: None,
            label: Some(self.label.clone()),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }
}

fn sym<'a>(c: &'a Coefficient, name: &str) -> Result<&'a MatrixFunction> {
    c.as_symbolic()
        .ok_or_else(|| HamsysError::Spec(format!("{name} is sampled; only symbolic systems serialize to spec JSON")))
}

/// Sturm–Liouville problem −(A⁻¹ u′ ... ) data (A, Q, R, H), n×n blocks.
#[derive(Debug, Clone)]
pub struct SturmLiouvilleSpec {
    pub n: usize,
    pub interval: IntervalSpec,
    pub a: MatrixFunction,
    pub q: MatrixFunction,
    pub r: MatrixFunction,
    pub h: MatrixFunction,
    pub label: String,
}

impl SturmLiouvilleSpec {
    pub fn new(
        interval: IntervalSpec,
        a: MatrixFunction,
        q: MatrixFunction,
        r: MatrixFunction,
        h: MatrixFunction,
        label: impl Into<String>,
    ) -> Result<SturmLiouvilleSpec> {
        let n = a.n();
        if q.n() != n || r.n() != n || h.n() != n {
            return Err(HamsysError::Dimension("A, Q, R, H must share one dimension".into()));
        }
        Ok(SturmLiouvilleSpec {
            n,
            interval,
            a,
            q,
            r,
            h,
            label: label.into(),
        })
    }

    /// V = R − Q* A Q.
    pub fn v(&self) -> MatrixFunction {
        self.r.add(&self.q.adjoint().mul(&self.a).mul(&self.q).neg())
    }

    pub fn with_interval(&self, interval: IntervalSpec) -> SturmLiouvilleSpec {
        let mut s = self.clone();
        s.interval = interval;
        s
    }

    pub fn to_json(&self) -> Result<String> {
        let file = SpecFile {
            n: self.n,
            interval: IntervalFile::from(self.interval),
            j: None,
            b: None,
            h: Some(self.h.to_rows()),
            a: Some(self.a.to_rows()),
            q: Some(self.q.to_rows()),
            r: Some(self.r.to_rows()),
            label: Some(self.label.clone()),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    /// Validate: A Hermitian positive definite, R Hermitian, H ⪰ 0.
    pub fn validate(&self, plan: &SamplePlan) -> Result<ValidationReport> {
        let mut a_def = Condition::new("A hermitian positive definite", "max ‖A−A*‖ and −min eig A");
        let mut r_herm = Condition::new("R hermitian", "max ‖R−R*‖");
        let mut h_herm = Condition::new("H hermitian", "max ‖H−H*‖");
        let mut h_psd = Condition::new("H positive semidefinite", "max(0, −min eig H)/max(1,‖H‖)");
        for &x in &plan.points {
            let a = self.a.evaluate(x)?;
            let r = self.r.evaluate(x)?;
            let h = self.h.evaluate(x)?;
            let (ae, _) = linalg::hermitian_eigen(&a);
            let skew_a = (&a - a.adjoint()).norm();
            let amin = ae[0];
            // positive definiteness is a strict condition: non-positive min eig fails outright
            a_def.record(x, if amin <= 0.0 { f64::INFINITY } else { skew_a });
            r_herm.record(x, (&r - r.adjoint()).norm());
            h_herm.record(x, (&h - h.adjoint()).norm());
            let (he, _) = linalg::hermitian_eigen(&h);
            let scale = linalg::max_abs(&h).max(1.0);
            h_psd.record(x, (-he[0]).max(0.0) / scale);
        }
        Ok(ValidationReport::from_conditions(vec![a_def, r_herm, h_herm, h_psd], plan))
    }
}

/// Either kind of problem accepted by the tools.
#[derive(Debug, Clone)]
pub enum Problem {
    System(SystemSpec),
    SturmLiouville(SturmLiouvilleSpec),
}

impl Problem {
    pub fn from_json(text: &str) -> Result<Problem> {
        let file: SpecFile = serde_json::from_str(text).map_err(|e| HamsysError::Parse {
            pos: e.column(),
            msg: format!("line {}: {e}", e.line()),
        })?;
        file.into_problem()
    }

    pub fn label(&self) -> &str {
        match self {
            Problem::System(s) => &s.label,
            Problem::SturmLiouville(s) => &s.label,
        }
    }

    pub fn interval(&self) -> IntervalSpec {
        match self {
            Problem::System(s) => s.interval,
            Problem::SturmLiouville(s) => s.interval,
        }
    }

    /// The first-order system (Sturm–Liouville problems are embedded).
    pub fn system(&self) -> Result<SystemSpec> {
        match self {
            Problem::System(s) => Ok(s.clone()),
            Problem::SturmLiouville(sl) => crate::gauge::embed_sturm_liouville(sl),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        match self {
            Problem::System(s) => s.to_json(),
            Problem::SturmLiouville(s) => s.to_json(),
        }
    }
}

// ---------------------------------------------------------------------------
// JSON file format

/// Interval endpoint in spec files: a number or "inf"/"-inf".
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Endpoint {
    Num(f64),
    Text(String),
}

impl Endpoint {
    fn value(&self) -> Result<f64> {
        match self {
            Endpoint::Num(v) => Ok(*v),
            Endpoint::Text(s) => match s.trim() {
                "inf" | "+inf" | "infinity" | "+infinity" => Ok(f64::INFINITY),
                "-inf" | "-infinity" => Ok(f64::NEG_INFINITY),
                other => crate::expr::Expr::parse(other)
                    .and_then(|e| e.eval(0.0))
                    .map(|z| z.re)
                    .map_err(|_| HamsysError::Spec(format!("invalid endpoint '{other}'"))),
            },
        }
    }

    fn from_value(v: f64) -> Endpoint {
        if v == f64::INFINITY {
            Endpoint::Text("inf".into())
        } else if v == f64::NEG_INFINITY {
            Endpoint::Text("-inf".into())
        } else {
            Endpoint::Num(v)
        }
    }
}

/// Interval as written in spec files (infinite ends as "-inf"/"inf").
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IntervalFile {
    kind: IntervalKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    a: Option<Endpoint>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    b: Option<Endpoint>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    x0: Option<f64>,
}

impl From<IntervalSpec> for IntervalFile {
    fn from(iv: IntervalSpec) -> Self {
        IntervalFile {
            kind: iv.kind,
            a: Some(Endpoint::from_value(iv.a)),
            b: Some(Endpoint::from_value(iv.b)),
            x0: Some(iv.x0),
        }
    }
}

impl IntervalFile {
    fn to_spec(&self) -> Result<IntervalSpec> {
        let a = self.a.as_ref().map(Endpoint::value).transpose()?;
        let b = self.b.as_ref().map(Endpoint::value).transpose()?;
        let (a, b) = match self.kind {
            IntervalKind::Finite => (
                a.ok_or_else(|| HamsysError::Spec("finite interval needs 'a'".into()))?,
                b.ok_or_else(|| HamsysError::Spec("finite interval needs 'b'".into()))?,
            ),
            IntervalKind::HalfLinePositive => (a.unwrap_or(0.0), b.unwrap_or(f64::INFINITY)),
            IntervalKind::HalfLineNegative => (a.unwrap_or(f64::NEG_INFINITY), b.unwrap_or(0.0)),
            IntervalKind::FullLine => (a.unwrap_or(f64::NEG_INFINITY), b.unwrap_or(f64::INFINITY)),
        };
        let x0 = self.x0.unwrap_or(match self.kind {
            IntervalKind::Finite | IntervalKind::HalfLinePositive => a,
            IntervalKind::HalfLineNegative => b,
            IntervalKind::FullLine => 0.0,
        });
        IntervalSpec::new(self.kind, a, b, x0)
    }
}

type Grid = Vec<Vec<String>>;

#[derive(Debug, Clone, Serialize, Deserialize)]
struct SpecFile {
    n: usize,
    interval: IntervalFile,
    #[serde(rename = "J", default, skip_serializing_if = "Option::is_none")]
    j: Option<Grid>,
    #[serde(rename = "B", default, skip_serializing_if = "Option::is_none")]
    b: Option<Grid>,
    #[serde(rename = "H", default, skip_serializing_if = "Option::is_none")]
    h: Option<Grid>,
    #[serde(rename = "A", default, skip_serializing_if = "Option::is_none")]
    a: Option<Grid>,
    #[serde(rename = "Q", default, skip_serializing_if = "Option::is_none")]
    q: Option<Grid>,
    #[serde(rename = "R", default, skip_serializing_if = "Option::is_none")]
    r: Option<Grid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<String>,
}

impl SpecFile {
    fn into_problem(self) -> Result<Problem> {
        let n = self.n;
        if n == 0 {
            return Err(HamsysError::Spec("n must be positive".into()));
        }
        let interval = self.interval.to_spec()?;
        let label = self.label.clone().unwrap_or_default();
        let grid = |g: &Option<Grid>, name: &str| -> Result<Option<MatrixFunction>> {
            g.as_ref().map(|rows| MatrixFunction::parse_rows(n, rows, name)).transpose()
        };
        let h = grid(&self.h, "H")?.ok_or_else(|| HamsysError::Spec("missing field 'H'".into()))?;
        if let Some(a) = grid(&self.a, "A")? {
            if self.j.is_some() || self.b.is_some() {
                return Err(HamsysError::Spec("a spec carries either (J, B, H) or (A, Q, R, H), not both".into()));
            }
            let q = grid(&self.q, "Q")?.unwrap_or_else(|| MatrixFunction::zeros(n));
            let r = grid(&self.r, "R")?.unwrap_or_else(|| MatrixFunction::zeros(n));
            return Ok(Problem::SturmLiouville(SturmLiouvilleSpec::new(interval, a, q, r, h, label)?));
        }
        let j = grid(&self.j, "J")?.ok_or_else(|| HamsysError::Spec("missing field 'J'".into()))?;
        let b = grid(&self.b, "B")?.unwrap_or_else(|| MatrixFunction::zeros(n));
        Ok(Problem::System(SystemSpec::new(interval, j, b, h, label)?))
    }
}

// ---------------------------------------------------------------------------
// Sample plans and validation

/// Points at which pointwise conditions are checked.
#[derive(Debug, Clone, Serialize)]
pub struct SamplePlan {
    pub points: Vec<f64>,
    pub description: String,
}

impl SamplePlan {
    /// `count` points covering the interval: uniform (cell midpoints) on a
    /// finite interval; on infinite ends, logarithmically spread out to
    /// distance `reach` from x0. Breakpoints and points just left of them are
    /// added so both sides of every jump are checked.
    pub fn for_interval(iv: &IntervalSpec, count: usize, reach: f64, breakpoints: &[f64]) -> SamplePlan {
        let count = count.max(2);
        let mut pts = Vec::with_capacity(count + 2 * breakpoints.len());
        let (desc, lo, hi) = match iv.kind {
            IntervalKind::Finite => ("uniform cell midpoints".to_string(), iv.a, iv.b),
            _ => (
                format!("log-spaced out to distance {reach} from x0"),
                if iv.a.is_finite() { iv.a } else { iv.x0 - reach },
                if iv.b.is_finite() { iv.b } else { iv.x0 + reach },
            ),
        };
        match iv.kind {
            IntervalKind::Finite => {
                for k in 0..count {
                    pts.push(lo + (hi - lo) * (k as f64 + 0.5) / count as f64);
                }
            }
            _ => {
                // split the budget between the two sides of x0 proportional
                // to log-length
                let left = iv.x0 - lo;
                let right = hi - iv.x0;
                let wl = (1.0 + left).ln();
                let wr = (1.0 + right).ln();
                let nl = ((count as f64) * wl / (wl + wr).max(1e-300)).round() as usize;
                let nr = count - nl.min(count);
                for k in 0..nr {
                    let t = (k as f64 + 0.5) / nr as f64;
                    pts.push(iv.x0 + ((1.0 + right).powf(t) - 1.0));
                }
                for k in 0..nl {
                    let t = (k as f64 + 0.5) / nl as f64;
                    pts.push(iv.x0 - ((1.0 + left).powf(t) - 1.0));
                }
            }
        }
        for &bp in breakpoints {
            if bp > lo && bp < hi {
                pts.push(bp);
                pts.push(bp - 1e-9 * (1.0 + bp.abs()));
            }
        }
        pts.retain(|x| x.is_finite() && iv.contains(*x));
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        pts.dedup();
        SamplePlan {
            points: pts,
            description: desc,
        }
    }

    /// Default validation plan: 1000 points, reach 2^10 on infinite ends.
    pub fn default_for(s: &SystemSpec) -> SamplePlan {
        let mut plan = SamplePlan::for_interval(&s.interval, 1000, 1024.0, &s.breakpoints());
        restrict_to_sampled(&mut plan, s);
        plan
    }

    pub fn explicit(points: Vec<f64>) -> SamplePlan {
        SamplePlan {
            points,
            description: "explicit points".into(),
        }
    }
}

/// Keep only points where every sampled coefficient is defined.
fn restrict_to_sampled(plan: &mut SamplePlan, s: &SystemSpec) {
    for coef in [&s.j, &s.b, &s.h] {
        if let Some((lo, hi)) = coef.sampled_span() {
            plan.points.retain(|&x| x >= lo && x <= hi);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ConditionStatus {
    Pass,
    Warn,
    Fail,
}

/// Worst defect of one structural condition over the sample plan.
#[derive(Debug, Clone, Serialize)]
pub struct Condition {
    pub name: String,
    pub measure: String,
    pub worst_defect: f64,
    pub worst_x: Option<f64>,
    pub status: ConditionStatus,
}

impl Condition {
    fn new(name: &str, measure: &str) -> Condition {
        Condition {
            name: name.into(),
            measure: measure.into(),
            worst_defect: 0.0,
            worst_x: None,
            status: ConditionStatus::Pass,
        }
    }

    fn record(&mut self, x: f64, defect: f64) {
        let d = if defect.is_nan() { f64::INFINITY } else { defect };
        if self.worst_x.is_none() || d > self.worst_defect {
            self.worst_defect = d;
            self.worst_x = Some(x);
        }
    }

    fn finish(&mut self) {
        self.status = if self.worst_defect <= TAU_STRUCT {
            ConditionStatus::Pass
        } else if self.worst_defect <= TAU_HARD {
            ConditionStatus::Warn
        } else {
            ConditionStatus::Fail
        };
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub conditions: Vec<Condition>,
    pub plan_description: String,
    pub plan_size: usize,
    pub tau_struct: f64,
    /// Evaluation failures (domain errors) with their location.
    pub errors: Vec<String>,
}

impl ValidationReport {
    fn from_conditions(mut conditions: Vec<Condition>, plan: &SamplePlan) -> ValidationReport {
        for c in &mut conditions {
            c.finish();
        }
        ValidationReport {
            conditions,
            plan_description: plan.description.clone(),
            plan_size: plan.points.len(),
            tau_struct: TAU_STRUCT,
            errors: Vec::new(),
        }
    }

    /// Every condition within τ_struct.
    pub fn passed(&self) -> bool {
        self.errors.is_empty() && self.conditions.iter().all(|c| c.status == ConditionStatus::Pass)
    }

    /// No hard failure (warnings allowed).
    pub fn acceptable(&self) -> bool {
        self.errors.is_empty() && self.conditions.iter().all(|c| c.status != ConditionStatus::Fail)
    }

    pub fn condition(&self, name: &str) -> Option<&Condition> {
        self.conditions.iter().find(|c| c.name == name)
    }
}

pub const COND_SKEW: &str = "J skew-hermitian";
pub const COND_DET: &str = "J invertible";
pub const COND_B: &str = "B* = B - J'";
pub const COND_H_HERM: &str = "H hermitian";
pub const COND_H_PSD: &str = "H positive semidefinite";

/// Check the structural conditions J* = −J, det J ≠ 0, B* = B − J′,
/// H = H* ⪰ 0 on the sample plan.
pub fn validate_system(s: &SystemSpec, plan: &SamplePlan) -> ValidationReport {
    let mut skew = Condition::new(COND_SKEW, "max ‖J*+J‖_F");
    let mut det = Condition::new(COND_DET, "max 1/|det J| scaled: reported defect is 1 if |det J| ≤ 1e-12·‖J‖^n, else 0; min |det J| in evidence");
    let mut bcond = Condition::new(COND_B, "max ‖B*−B+J′‖_F");
    let mut hherm = Condition::new(COND_H_HERM, "max ‖H−H*‖_F");
    let mut hpsd = Condition::new(COND_H_PSD, "max(0, −min eig H)/max(1, max|H_ij|)");
    let mut errors = Vec::new();
    let mut min_det = f64::INFINITY;
    for &x in &plan.points {
        let eval = || -> Result<(CMat, CMat, CMat, CMat)> {
            Ok((s.j.evaluate(x)?, s.j.evaluate_derivative(x)?, s.b.evaluate(x)?, s.h.evaluate(x)?))
        };
        let (j, dj, b, h) = match eval() {
            Ok(v) => v,
            Err(e) => {
                errors.push(format!("{e}"));
                continue;
            }
        };
        skew.record(x, (&j + j.adjoint()).norm());
        let d = linalg::determinant(&j).norm();
        min_det = min_det.min(d);
        let scale = j.norm().max(1e-300).powi(s.n as i32);
        det.record(x, if d <= 1e-12 * scale { 1.0 } else { 0.0 });
        bcond.record(x, (b.adjoint() - &b + &dj).norm());
        hherm.record(x, (&h - h.adjoint()).norm());
        let (he, _) = linalg::hermitian_eigen(&h);
        let hs = linalg::max_abs(&h).max(1.0);
        hpsd.record(x, (-he[0]).max(0.0) / hs);
    }
    det.measure = format!("|det J| ≤ 1e-12·‖J‖_F^n counts as singular (min |det J| = {min_det:e})");
    let mut rep = ValidationReport::from_conditions(vec![skew, det, bcond, hherm, hpsd], plan);
    errors.truncate(20);
    rep.errors = errors;
    rep
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_checks() {
        assert!(IntervalSpec::finite(1.0, 0.0, 0.5).is_err());
        assert!(IntervalSpec::finite(0.0, 1.0, 2.0).is_err());
        assert!(IntervalSpec::new(IntervalKind::HalfLinePositive, 0.0, 5.0, 0.0).is_err());
        assert!(IntervalSpec::new(IntervalKind::FullLine, f64::NEG_INFINITY, f64::INFINITY, 0.0).is_ok());
    }

    #[test]
    fn sample_plan_respects_breakpoints() {
        let iv = IntervalSpec::half_line_positive(0.0);
        let plan = SamplePlan::for_interval(&iv, 100, 100.0, &[1.0]);
        assert!(plan.points.contains(&1.0));
        assert!(plan.points.iter().all(|&x| x >= 0.0));
    }
}
