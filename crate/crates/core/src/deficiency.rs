//! Counting square-integrable solutions and formal deficiency indices.
//!
//! For a half-line the fundamental solution is propagated towards the
//! singular end with aggressive rescaling.  The basis of initial data is
//! replaced by the column-normalised `C = P_N⁻¹` (P_N being the accumulated
//! triangular factor at the last truncation point), so that the window
//! contributions to `C* M(T) C` are graded but free of cancellation.  The
//! eigenvalues of this congruent Gram matrix are computed from a stacked
//! square-root factor with one-sided Jacobi, which keeps the small ones
//! relatively accurate.  By Sylvester/Ostrowski the number of bounded
//! eigenvalue trajectories equals that of `M(T)` itself.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{HamsysError, Result};
use crate::gram::{self, RankReport};
use crate::growth::{self, Classification, ClassifierParams, Status};
use crate::linalg;
use crate::matrix::{c, CMat};
use crate::ode::OdeOptions;
use crate::propagator::{FundamentalSolution, PropagatorOptions};
use crate::system::{IntervalKind, SamplePlan, SystemSpec};

/// Eigenvalues of `iJ(x0)` below this are treated as an error.
pub const KAPPA_TOL: f64 = 1e-10;
/// Principal-angle-style tolerance for intersecting solution subspaces.
pub const SUBSPACE_TOL: f64 = 1e-6;

/// Which side of x0 is examined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Right,
    Left,
}

impl Side {
    pub fn direction(self) -> f64 {
        match self {
            Side::Right => 1.0,
            Side::Left => -1.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DeficiencyOptions {
    /// Truncation points are `x0 ± 2^k`, `k = k_min..=k_max`.
    pub k_min: i32,
    pub k_max: i32,
    /// Stop once `log ‖Y‖` exceeds this (the Gram log-scale then stays
    /// below twice the value).
    pub log_cap: f64,
    pub rescale_threshold: f64,
    pub ode: OdeOptions,
    pub classifier: ClassifierParams,
}

impl Default for DeficiencyOptions {
    fn default() -> Self {
        DeficiencyOptions {
            k_min: 3,
            k_max: 12,
            log_cap: 300.0,
            rescale_threshold: 16.0,
            ode: OdeOptions::default(),
            classifier: ClassifierParams::trajectory(),
        }
    }
}

/// Minimal number of truncation points; fewer (because of the log cap)
/// triggers a denser plan that ends where the cap was hit.
const MIN_PLAN_POINTS: usize = 8;

impl DeficiencyOptions {
    /// Truncation points on one side of x0, ordered away from x0.
    pub fn plan(&self, s: &SystemSpec, side: Side) -> Vec<f64> {
        let iv = &s.interval;
        let x0 = iv.x0;
        let end = match side {
            Side::Right => iv.b,
            Side::Left => iv.a,
        };
        let dir = side.direction();
        if end.is_finite() {
            let len = (end - x0).abs();
            (0..=(self.k_max - self.k_min).max(0))
                .map(|j| x0 + dir * len * (1.0 - 2f64.powi(-(j + 1))))
                .collect()
        } else {
            (self.k_min..=self.k_max).map(|k| x0 + dir * 2f64.powi(k)).collect()
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    pub values: Vec<f64>,
    pub classification: Classification,
}

/// Result of counting L²(H) solutions on one side at one λ.
#[derive(Debug, Clone, Serialize)]
pub struct SolutionCount {
    pub lambda: [f64; 2],
    pub side: Side,
    /// Truncation points actually used.
    pub plan: Vec<f64>,
    /// Whether the log cap shortened the requested plan.
    pub capped: bool,
    pub trajectories: Vec<Trajectory>,
    pub bounded: usize,
    pub divergent: usize,
    pub inconclusive: usize,
    /// Each eigenvalue trajectory is nondecreasing.
    pub monotone: bool,
    pub steps: usize,
    /// Orthonormal basis of initial data (at x0) of the bounded solutions.
    #[serde(skip)]
    pub bounded_subspace: CMat,
}

fn propagate(
    s: &SystemSpec,
    lambda: Complex64,
    side: Side,
    plan: &[f64],
    cap: Option<f64>,
    o: &DeficiencyOptions,
) -> Result<FundamentalSolution> {
    let x0 = s.interval.x0;
    let target = *plan.last().ok_or_else(|| HamsysError::Precondition("empty truncation plan".into()))?;
    let (alpha, beta) = match side {
        Side::Right => (x0, target),
        Side::Left => (target, x0),
    };
    let opts = PropagatorOptions {
        ode: o.ode,
        rescale_threshold: o.rescale_threshold,
        checkpoints: plan.to_vec(),
        store_dense: false,
        gram: true,
        max_log_scale: cap,
    };
    FundamentalSolution::new(s, lambda, alpha, beta, opts)
}

/// Count the solutions of `J f' + B f = λ H f` with finite `∫ f* H f`
/// towards the end on `side`.
pub fn l2_solution_count(s: &SystemSpec, lambda: Complex64, side: Side, o: &DeficiencyOptions) -> Result<SolutionCount> {
    let n = s.n;
    let x0 = s.interval.x0;
    let dir = side.direction();
    let mut plan = o.plan(s, side);
    let mut fs = propagate(s, lambda, side, &plan, Some(o.log_cap), o)?;
    let mut capped = false;
    {
        let br = fs.branch(dir);
        if br.truncated() {
            capped = true;
            let reached = br.reached;
            let used = plan.iter().filter(|&&p| (reached - p) * dir >= 0.0).count();
            if used < MIN_PLAN_POINTS {
                // denser doubling plan ending where the cap was hit
                let d = (reached - x0).abs();
                plan = (0..10).rev().map(|j| x0 + dir * d * 2f64.powi(-j)).collect();
                fs = propagate(s, lambda, side, &plan, None, o)?;
            } else {
                plan.truncate(used);
            }
        }
    }
    let br = fs.branch(dir);
    let windows = &br.windows;
    // window index ending at each plan point
    let mut ends = Vec::with_capacity(plan.len());
    for &p in &plan {
        let idx = windows
            .iter()
            .position(|w| w.end == p)
            .ok_or_else(|| HamsysError::Inconsistent(format!("no window ends at truncation point {p}")))?;
        ends.push(idx);
    }
    let nw = *ends.last().unwrap() + 1;

    // Y(x)·C = Z_i(x)·M_i on window i with M_i = R_{i-1}⋯R_0·C. The basis C
    // is orthonormal and adapted to the growth on the whole plan: a backward
    // sweep R_i⁻¹ Q_{i+1} = Q_i S_i gives C = Q_0 and M_i = Q_i V_i with the
    // upper triangular V_{i+1} = S_i⁻¹ V_i, whose columns are graded from the
    // fastest-decaying to the fastest-growing solution. The sweep starts
    // from a fixed generic unitary: coordinate flags are invariant under the
    // triangular (and, for decoupled systems, diagonal) R_i⁻¹, so a
    // coordinate-aligned start could pin a column to the wrong direction.
    let mut qs: Vec<CMat> = vec![CMat::identity(n, n); nw + 1];
    qs[nw] = generic_unitary(n);
    let mut ss: Vec<CMat> = vec![CMat::zeros(n, n); nw];
    for i in (0..nw).rev() {
        let x = linalg::solve_upper(&windows[i].r, &qs[i + 1]).ok_or_else(|| HamsysError::Singular {
            x: windows[i].end,
            what: "triangular factor".into(),
        })?;
        let (q, s) = linalg::qr_positive(&x);
        qs[i] = q;
        ss[i] = s;
    }
    // forward sweep with per-column logs; window i contributes D W* Q_i* M_i
    // where Q_i* G_i Q_i = W D² W*
    let mut v = CMat::identity(n, n);
    let mut l = vec![0.0f64; n];
    let mut factors: Vec<CMat> = Vec::with_capacity(nw);
    for i in 0..nw {
        let mut m = v.clone();
        for j in 0..n {
            let f = l[j].exp();
            m.column_mut(j).iter_mut().for_each(|z| *z *= f);
        }
        let g = windows[i].gram.as_ref().expect("gram requested");
        let g = linalg::hermitian_part(&(qs[i].adjoint() * g * &qs[i]));
        let (vals, vecs) = linalg::hermitian_eigen(&g);
        let d = CMat::from_diagonal(&nalgebra::DVector::from_iterator(
            n,
            vals.iter().map(|&v| c(v.max(0.0).sqrt(), 0.0)),
        ));
        factors.push(d * vecs.adjoint() * m);
        v = linalg::solve_upper(&ss[i], &v).ok_or_else(|| HamsysError::Singular {
            x: windows[i].end,
            what: "triangular factor".into(),
        })?;
        for j in 0..n {
            let a = v.column(j).iter().fold(0.0f64, |m, z| m.max(z.norm()));
            if a > 0.0 && a.is_finite() {
                v.column_mut(j).iter_mut().for_each(|z| *z /= a);
                l[j] += a.ln();
            }
        }
    }
    let c_basis = qs[0].clone();

    let mut series: Vec<Vec<f64>> = vec![Vec::with_capacity(plan.len()); n];
    let mut final_v = CMat::identity(n, n);
    for &e in &ends {
        let svd = linalg::jacobi_svd(&linalg::vstack(&factors[..=e]));
        // ascending eigenvalues μ = σ²
        for (j, sigma) in svd.values.iter().rev().enumerate() {
            series[j].push(sigma * sigma);
        }
        final_v = svd.v;
    }
    let ts: Vec<f64> = plan.iter().map(|p| (p - x0).abs()).collect();
    let trajectories: Vec<Trajectory> = series
        .into_iter()
        .map(|values| Trajectory {
            classification: growth::classify(&ts, &values, &o.classifier),
            values,
        })
        .collect();
    let monotone = trajectories.iter().all(|t| {
        t.values
            .windows(2)
            .all(|w| w[1] >= w[0] - gram::MONOTONE_TOL * (1.0 + w[1].abs()))
    });
    // Sorted trajectories are ordered, so the bounded ones form a prefix.
    let statuses: Vec<Status> = trajectories.iter().map(|t| t.classification.status).collect();
    let bounded = statuses.iter().take_while(|s| **s == Status::Convergent).count();
    let divergent = statuses.iter().rev().take_while(|s| **s == Status::Divergent).count().min(n - bounded);
    let inconclusive = n - bounded - divergent;
    // Right singular vectors are ordered by descending σ; the bounded ones
    // are the last `bounded` columns.
    let v_bounded = final_v.columns(n - bounded, bounded).into_owned();
    let bounded_subspace = orthonormal_columns(&(&c_basis * v_bounded));
    Ok(SolutionCount {
        lambda: [lambda.re, lambda.im],
        side,
        plan,
        capped,
        trajectories,
        bounded,
        divergent,
        inconclusive,
        monotone,
        steps: br.steps,
        bounded_subspace,
    })
}

/// A fixed pseudo-random unitary matrix (deterministic per dimension).
fn generic_unitary(n: usize) -> CMat {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0000 + n as u64);
    let m = CMat::from_fn(n, n, |_, _| c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5));
    linalg::qr_positive(&m).0
}

fn orthonormal_columns(m: &CMat) -> CMat {
    if m.ncols() == 0 {
        return m.clone();
    }
    let qr = m.clone().qr();
    qr.q().columns(0, m.ncols()).into_owned()
}

/// `(κ+, κ-)`: numbers of positive and negative eigenvalues of `iJ(x0)`.
pub fn signature_kappa(s: &SystemSpec) -> Result<(usize, usize)> {
    let j = s.j.evaluate(s.interval.x0)?;
    let ij = linalg::hermitian_part(&(j * c(0.0, 1.0)));
    let ev = linalg::hermitian_eigenvalues(&ij);
    if let Some(e) = ev.iter().find(|e| e.abs() < KAPPA_TOL) {
        return Err(HamsysError::Singular {
            x: s.interval.x0,
            what: format!("iJ(x0) has a near-zero eigenvalue {e:e}"),
        });
    }
    Ok((ev.iter().filter(|&&e| e > 0.0).count(), ev.iter().filter(|&&e| e < 0.0).count()))
}

/// Formal deficiency indices on one interval.
#[derive(Debug, Clone, Serialize)]
pub struct DeficiencyReport {
    pub label: String,
    pub interval: IntervalKind,
    pub n: usize,
    pub rank: usize,
    pub rank_stabilized: bool,
    pub kappa_plus: usize,
    pub kappa_minus: usize,
    /// `ñ±`: numbers of L²(H) solutions for λ = ±i.
    pub n_tilde_plus: usize,
    pub n_tilde_minus: usize,
    /// `N± = ñ± − (n − rank)`.
    pub deficiency_plus: i64,
    pub deficiency_minus: i64,
    pub inconclusive: usize,
    /// `κ± ≤ ñ± ≤ n` and `ñ+ + ñ- ≥ n`.
    pub inequalities_hold: bool,
    /// `J⁻¹B` and `J⁻¹H` are real on the sample grid.
    pub real_coefficients: bool,
    pub counts: Vec<SolutionCount>,
}

impl DeficiencyReport {
    pub fn conclusive(&self) -> bool {
        self.inconclusive == 0
    }
}

fn real_coefficients(s: &SystemSpec) -> Result<bool> {
    let plan = SamplePlan::for_interval(&s.interval, 200, 64.0, &s.breakpoints());
    for &x in &plan.points {
        let j = s.j.evaluate(x)?;
        let ji = linalg::inverse(&j).ok_or_else(|| HamsysError::Singular { x, what: "J".into() })?;
        for m in [&ji * s.b.evaluate(x)?, &ji * s.h.evaluate(x)?] {
            let scale = 1.0 + linalg::max_abs(&m);
            if m.iter().any(|z| z.im.abs() > 1e-12 * scale) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn count_pair(s: &SystemSpec, side: Side, o: &DeficiencyOptions) -> Result<(SolutionCount, SolutionCount)> {
    let (p, m) = rayon::join(
        || l2_solution_count(s, c(0.0, 1.0), side, o),
        || l2_solution_count(s, c(0.0, -1.0), side, o),
    );
    Ok((p?, m?))
}

fn assemble(
    s: &SystemSpec,
    rank: &RankReport,
    kappa: (usize, usize),
    n_tilde: (usize, usize),
    counts: Vec<SolutionCount>,
) -> Result<DeficiencyReport> {
    let n = s.n;
    let inconclusive = counts.iter().map(|c| c.inconclusive).sum();
    let kernel = (n - rank.rank) as i64;
    let inequalities_hold = kappa.0 <= n_tilde.0
        && n_tilde.0 <= n
        && kappa.1 <= n_tilde.1
        && n_tilde.1 <= n
        && n_tilde.0 + n_tilde.1 >= n;
    Ok(DeficiencyReport {
        label: s.label.clone(),
        interval: s.interval.kind,
        n,
        rank: rank.rank,
        rank_stabilized: rank.stabilized,
        kappa_plus: kappa.0,
        kappa_minus: kappa.1,
        n_tilde_plus: n_tilde.0,
        n_tilde_minus: n_tilde.1,
        deficiency_plus: n_tilde.0 as i64 - kernel,
        deficiency_minus: n_tilde.1 as i64 - kernel,
        inconclusive,
        inequalities_hold,
        real_coefficients: real_coefficients(s)?,
        counts,
    })
}

/// Formal deficiency indices `ñ±` and `N±` on a half-line or finite
/// interval.
pub fn formal_deficiency_indices(s: &SystemSpec, o: &DeficiencyOptions) -> Result<DeficiencyReport> {
    match s.interval.kind {
        IntervalKind::Finite => finite_interval_indices(s, o),
        IntervalKind::HalfLinePositive | IntervalKind::HalfLineNegative => {
            let side = if s.interval.kind == IntervalKind::HalfLinePositive {
                Side::Right
            } else {
                Side::Left
            };
            let (kp, km) = signature_kappa(s)?;
            // reflection x → -x flips the sign of J
            let kappa = if side == Side::Right { (kp, km) } else { (km, kp) };
            let (pair, rank) = rayon::join(|| count_pair(s, side, o), || gram::rank_of_system(s));
            let ((plus, minus), rank) = (pair?, rank?);
            let nt = (plus.bounded, minus.bounded);
            assemble(s, &rank, kappa, nt, vec![plus, minus])
        }
        IntervalKind::FullLine => Err(HamsysError::Precondition(
            "formal deficiency indices of a full line: use line_indices or glue_line_indices".into(),
        )),
    }
}

/// On a finite interval with regular ends every solution is square
/// integrable, so `ñ± = n`; the counts towards both ends are still computed
/// as a cross-check.
pub fn finite_interval_indices(s: &SystemSpec, o: &DeficiencyOptions) -> Result<DeficiencyReport> {
    if s.interval.kind != IntervalKind::Finite {
        return Err(HamsysError::Precondition("finite_interval_indices needs a finite interval".into()));
    }
    let n = s.n;
    let kappa = signature_kappa(s)?;
    let rank = gram::rank_of_system(s)?;
    let mut counts = Vec::new();
    for side in [Side::Right, Side::Left] {
        let iv = &s.interval;
        let room = match side {
            Side::Right => iv.b - iv.x0,
            Side::Left => iv.x0 - iv.a,
        };
        if room > 0.0 {
            let (p, m) = count_pair(s, side, o)?;
            counts.push(p);
            counts.push(m);
        }
    }
    if let Some(bad) = counts.iter().find(|c| c.bounded != n) {
        return Err(HamsysError::Inconsistent(format!(
            "finite interval: only {} of {n} solutions classified bounded on the {:?} side",
            bad.bounded, bad.side
        )));
    }
    assemble(s, &rank, kappa, (n, n), counts)
}

/// Counts of L²(H) solutions at several λ (and their conjugates); they must
/// not change within a half-plane.
#[derive(Debug, Clone, Serialize)]
pub struct LambdaConstancy {
    pub lambdas: Vec<[f64; 2]>,
    pub counts: Vec<usize>,
    pub conjugate_counts: Vec<usize>,
}

pub fn lambda_constancy_check(s: &SystemSpec, lambdas: &[Complex64], o: &DeficiencyOptions) -> Result<LambdaConstancy> {
    let side = match s.interval.kind {
        IntervalKind::HalfLineNegative => Side::Left,
        IntervalKind::HalfLinePositive | IntervalKind::Finite => Side::Right,
        IntervalKind::FullLine => {
            return Err(HamsysError::Precondition("λ-constancy is checked per half-line".into()));
        }
    };
    let mut counts = Vec::new();
    let mut conj = Vec::new();
    for &l in lambdas {
        if l.im == 0.0 {
            return Err(HamsysError::Precondition(format!("λ = {l} must be non-real")));
        }
        let (a, b) = rayon::join(
            || l2_solution_count(s, l, side, o),
            || l2_solution_count(s, l.conj(), side, o),
        );
        let (a, b) = (a?, b?);
        // normalise to the upper half-plane
        let (up, down) = if l.im > 0.0 { (a, b) } else { (b, a) };
        counts.push(up.bounded);
        conj.push(down.bounded);
        if up.inconclusive + down.inconclusive > 0 {
            return Err(HamsysError::Inconsistent(format!("inconclusive trajectories at λ = {l}")));
        }
    }
    let report = LambdaConstancy {
        lambdas: lambdas.iter().map(|l| [l.re, l.im.abs()]).collect(),
        counts,
        conjugate_counts: conj,
    };
    if report.counts.iter().any(|&k| k != report.counts[0])
        || report.conjugate_counts.iter().any(|&k| k != report.conjugate_counts[0])
    {
        return Err(HamsysError::Inconsistent(format!(
            "solution counts vary within a half-plane: {:?} / {:?}",
            report.counts, report.conjugate_counts
        )));
    }
    Ok(report)
}

/// Indices on the full line.
#[derive(Debug, Clone, Serialize)]
pub struct LineReport {
    pub label: String,
    pub n: usize,
    pub rank: usize,
    pub n_tilde_plus: usize,
    pub n_tilde_minus: usize,
    pub deficiency_plus: i64,
    pub deficiency_minus: i64,
    pub inconclusive: usize,
    /// Half-line reports (x ≥ x0 first).
    pub halves: Vec<DeficiencyReport>,
}

fn intersection_dim(a: &CMat, b: &CMat) -> usize {
    if a.ncols() == 0 || b.ncols() == 0 {
        return 0;
    }
    let mut both = CMat::zeros(a.nrows(), a.ncols() + b.ncols());
    both.columns_mut(0, a.ncols()).copy_from(a);
    both.columns_mut(a.ncols(), b.ncols()).copy_from(b);
    let sv = linalg::singular_values(&both);
    let r = sv.iter().filter(|&&x| x > SUBSPACE_TOL).count();
    a.ncols() + b.ncols() - r
}

fn halves(s: &SystemSpec, o: &DeficiencyOptions) -> Result<(DeficiencyReport, DeficiencyReport)> {
    if s.interval.kind != IntervalKind::FullLine {
        return Err(HamsysError::Precondition("line indices need a full-line system".into()));
    }
    let right = s.with_interval(s.interval.right_part());
    let left = s.with_interval(s.interval.left_part());
    let (r, l) = rayon::join(|| formal_deficiency_indices(&right, o), || formal_deficiency_indices(&left, o));
    Ok((r?, l?))
}

/// Direct two-ended classification: a solution is in L²(H) on the line
/// when it is so towards both ends, so `ñ(line)` is the dimension of the
/// intersection of the two bounded subspaces of initial data at x0.
pub fn line_indices(s: &SystemSpec, o: &DeficiencyOptions) -> Result<LineReport> {
    let (r, l) = halves(s, o)?;
    let rank = gram::rank_of_system(s)?;
    let dim = |k: usize| intersection_dim(&r.counts[k].bounded_subspace, &l.counts[k].bounded_subspace);
    let (np, nm) = (dim(0), dim(1));
    let kernel = (s.n - rank.rank) as i64;
    Ok(LineReport {
        label: s.label.clone(),
        n: s.n,
        rank: rank.rank,
        n_tilde_plus: np,
        n_tilde_minus: nm,
        deficiency_plus: np as i64 - kernel,
        deficiency_minus: nm as i64 - kernel,
        inconclusive: r.inconclusive + l.inconclusive,
        halves: vec![r, l],
    })
}

/// `ñ±(line) = ñ±(x ≥ x0) + ñ±(x ≤ x0) − n`, valid for definite systems
/// only; refuses otherwise.
pub fn glue_line_indices(s: &SystemSpec, o: &DeficiencyOptions) -> Result<LineReport> {
    let (r, l) = halves(s, o)?;
    for h in [&r, &l] {
        if h.rank != h.n {
            return Err(HamsysError::Refused(format!(
                "gluing requires definite half-line systems (rank {} < n = {} on the {} part)",
                h.rank,
                h.n,
                h.interval.as_str()
            )));
        }
    }
    let n = s.n;
    let np = (r.n_tilde_plus + l.n_tilde_plus).checked_sub(n);
    let nm = (r.n_tilde_minus + l.n_tilde_minus).checked_sub(n);
    let (Some(np), Some(nm)) = (np, nm) else {
        return Err(HamsysError::Inconsistent("half-line counts sum to less than n".into()));
    };
    Ok(LineReport {
        label: s.label.clone(),
        n,
        rank: n,
        n_tilde_plus: np,
        n_tilde_minus: nm,
        deficiency_plus: np as i64,
        deficiency_minus: nm as i64,
        inconclusive: r.inconclusive + l.inconclusive,
        halves: vec![r, l],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::MatrixFunction;
    use crate::system::IntervalSpec;

    #[test]
    fn diagonal_example_counts() {
        let s = SystemSpec::new(
            IntervalSpec::half_line_positive(0.0),
            MatrixFunction::from_strs(&[&["i", "0"], &["0", "-i"]]).unwrap(),
            MatrixFunction::zeros(2),
            MatrixFunction::from_strs(&[&["1", "0"], &["0", "(1+x)^(-2)"]]).unwrap(),
            "diag",
        )
        .unwrap();
        let r = formal_deficiency_indices(&s, &DeficiencyOptions::default()).unwrap();
        assert_eq!((r.n_tilde_plus, r.n_tilde_minus), (1, 2), "{:#?}", r.counts);
        assert_eq!(r.inconclusive, 0);
        assert_eq!((r.kappa_plus, r.kappa_minus), (1, 1));
        assert!(r.inequalities_hold);
    }
}
