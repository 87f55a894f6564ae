//! Gram matrices `M_λ = ∫ Y* H Y`, rank, kernel and definiteness tests.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{HamsysError, Result};
use crate::linalg;
use crate::matrix::{c, CMat, Coefficient};
use crate::propagator::{FundamentalSolution, PropagatorOptions, ScaledMatrix};
use crate::quad::{self, QuadOptions};
use crate::system::{IntervalSpec, SamplePlan, SystemSpec};

/// Relative singular-value threshold for rank decisions.
pub const RANK_REL: f64 = 1e-8;
/// Absolute singular-value floor for rank decisions.
pub const RANK_ABS: f64 = 1e-12;
/// Number of interval enlargements `I_k`, `k = 0..=MAX_ENLARGEMENT`.
pub const MAX_ENLARGEMENT: usize = 8;
/// Tolerance for the monotonicity of `M` in the interval.
pub const MONOTONE_TOL: f64 = 1e-10;
/// Principal-angle tolerance for λ-independence of the kernel.
pub const KERNEL_ANGLE_TOL: f64 = 1e-6;
/// Minimal grid fraction for structural definiteness.
pub const STRUCTURAL_FRACTION: f64 = 1e-3;
/// Determinant threshold for structural definiteness.
pub const STRUCTURAL_DET: f64 = 1e-12;

/// `M_λ` over `[alpha, beta]`, stored with a separate log-scale.
#[derive(Debug, Clone)]
pub struct GramMatrix {
    pub lambda: Complex64,
    pub alpha: f64,
    pub beta: f64,
    pub scaled: ScaledMatrix,
}

impl GramMatrix {
    pub fn matrix(&self) -> Result<CMat> {
        self.scaled.to_matrix()
    }

    /// Singular values (= eigenvalues), descending, in true scale (may be
    /// infinite if not representable).
    pub fn singular_values(&self) -> Vec<f64> {
        let f = self.scaled.log_scale.exp();
        linalg::singular_values(&self.scaled.unit).into_iter().map(|s| s * f).collect()
    }

    pub fn rank(&self) -> usize {
        let sv = linalg::singular_values(&self.scaled.unit);
        // abs floor expressed in unit scale
        let floor = RANK_ABS * (-self.scaled.log_scale).exp();
        linalg::numerical_rank(&sv, RANK_REL, floor)
    }

    pub fn kernel(&self) -> CMat {
        linalg::kernel_basis(&self.scaled.unit, self.rank())
    }
}

fn window_terms(fs: &FundamentalSolution, lo: f64, hi: f64) -> ScaledMatrix {
    let n = fs.n();
    let mut acc = ScaledMatrix {
        log_scale: 0.0,
        unit: CMat::zeros(n, n),
    };
    for branch in [&fs.right, &fs.left] {
        for w in &branch.windows {
            let (a, b) = if w.start <= w.end { (w.start, w.end) } else { (w.end, w.start) };
            if a < lo || b > hi {
                continue;
            }
            if let Some(g) = &w.gram {
                let u = &w.factor.unit;
                let term = ScaledMatrix {
                    log_scale: 2.0 * w.factor.log_scale,
                    unit: linalg::hermitian_part(&(u.adjoint() * g * u)),
                };
                acc.accumulate(&term);
            }
        }
    }
    acc
}

fn gram_options(checkpoints: Vec<f64>) -> PropagatorOptions {
    PropagatorOptions {
        gram: true,
        checkpoints,
        ..PropagatorOptions::default()
    }
}

/// `M_λ` over `[alpha, beta]` (which must contain x0).
pub fn gram_matrix(s: &SystemSpec, lambda: Complex64, alpha: f64, beta: f64) -> Result<GramMatrix> {
    let fs = FundamentalSolution::new(s, lambda, alpha, beta, gram_options(Vec::new()))?;
    Ok(GramMatrix {
        lambda,
        alpha,
        beta,
        scaled: window_terms(&fs, alpha, beta),
    })
}

/// Gram matrices on nested spans (each containing x0), from one solve on
/// the largest span.
pub fn nested_grams(s: &SystemSpec, lambda: Complex64, spans: &[(f64, f64)]) -> Result<Vec<GramMatrix>> {
    let lo = spans.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let hi = spans.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let cps: Vec<f64> = spans.iter().flat_map(|p| [p.0, p.1]).collect();
    let fs = FundamentalSolution::new(s, lambda, lo, hi, gram_options(cps))?;
    Ok(spans
        .iter()
        .map(|&(a, b)| GramMatrix {
            lambda,
            alpha: a,
            beta: b,
            scaled: window_terms(&fs, a, b),
        })
        .collect())
}

/// The nested spans `I_k = [x0 - 2^k, x0 + 2^k] ∩ I`.
pub fn enlargement_spans(iv: &IntervalSpec) -> Vec<(f64, f64)> {
    (0..=MAX_ENLARGEMENT)
        .map(|k| {
            let r = 2f64.powi(k as i32);
            iv.clip(iv.x0 - r, iv.x0 + r)
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct RankReport {
    pub n: usize,
    pub lambda: [f64; 2],
    pub rank: usize,
    /// Ranks on every `I_k`.
    pub ranks: Vec<usize>,
    /// Index k of the first interval of the stable run.
    pub stable_from: Option<usize>,
    pub stabilized: bool,
    /// Span on which the rank was declared.
    pub span: (f64, f64),
    /// Singular values of `M` on that span (descending).
    pub singular_values: Vec<f64>,
    /// Whether `M` grew monotonically (up to tolerance) along `I_k`.
    pub monotone: bool,
    #[serde(skip)]
    pub kernel: CMat,
}

impl RankReport {
    pub fn is_definite(&self) -> bool {
        self.rank == self.n
    }
}

fn monotone(grams: &[GramMatrix]) -> bool {
    grams.windows(2).all(|w| {
        let (Ok(a), Ok(b)) = (w[0].matrix(), w[1].matrix()) else {
            // not representable: compare in the larger scale
            let f = (w[0].scaled.log_scale - w[1].scaled.log_scale).exp();
            let d = &w[1].scaled.unit - &w[0].scaled.unit * c(f, 0.0);
            let min = linalg::hermitian_eigenvalues(&d).first().copied().unwrap_or(0.0);
            return min >= -MONOTONE_TOL * (1.0 + linalg::norm2(&w[1].scaled.unit));
        };
        let d = &b - &a;
        let min = linalg::hermitian_eigenvalues(&d).first().copied().unwrap_or(0.0);
        min >= -MONOTONE_TOL * (1.0 + linalg::norm2(&b))
    })
}

/// Rank of `M_λ` on the nested spans, declared once three consecutive
/// spans agree.
pub fn rank_of_system_at(s: &SystemSpec, lambda: Complex64) -> Result<RankReport> {
    let spans = enlargement_spans(&s.interval);
    let grams = nested_grams(s, lambda, &spans)?;
    let ranks: Vec<usize> = grams.iter().map(|g| g.rank()).collect();
    let stable_from = (2..ranks.len())
        .find(|&k| ranks[k] == ranks[k - 1] && ranks[k] == ranks[k - 2])
        .map(|k| k - 2);
    let k0 = stable_from.unwrap_or(ranks.len() - 1);
    let g = &grams[k0];
    Ok(RankReport {
        n: s.n,
        lambda: [lambda.re, lambda.im],
        rank: ranks[k0],
        ranks: ranks.clone(),
        stable_from,
        stabilized: stable_from.is_some(),
        span: (g.alpha, g.beta),
        singular_values: g.singular_values(),
        monotone: monotone(&grams),
        kernel: g.kernel(),
    })
}

/// Rank of the system (computed at λ = 0; the rank does not depend on λ).
pub fn rank_of_system(s: &SystemSpec) -> Result<RankReport> {
    rank_of_system_at(s, c(0.0, 0.0))
}

pub fn is_definite(s: &SystemSpec) -> Result<bool> {
    Ok(rank_of_system(s)?.is_definite())
}

#[derive(Debug, Clone, Serialize)]
pub struct KernelReport {
    pub lambdas: Vec<[f64; 2]>,
    pub ranks: Vec<usize>,
    pub kernel_dimension: usize,
    pub max_angle: f64,
    pub independent: bool,
}

/// The default probe set for kernel λ-independence.
pub fn kernel_probe_lambdas() -> Vec<Complex64> {
    vec![c(0.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(1.0, 1.0), c(1.0, -1.0)]
}

/// Compare the kernels of `M_λ` across several λ.
pub fn kernel_lambda_independence(s: &SystemSpec, lambdas: &[Complex64]) -> Result<KernelReport> {
    let reports: Vec<RankReport> = lambdas.iter().map(|&l| rank_of_system_at(s, l)).collect::<Result<_>>()?;
    let ranks: Vec<usize> = reports.iter().map(|r| r.rank).collect();
    if ranks.iter().any(|&r| r != ranks[0]) {
        return Err(HamsysError::Inconsistent(format!("rank of M_λ depends on λ: {ranks:?}")));
    }
    let base = &reports[0].kernel;
    let max_angle = reports[1..]
        .iter()
        .map(|r| linalg::max_principal_angle(base, &r.kernel))
        .fold(0.0, f64::max);
    Ok(KernelReport {
        lambdas: lambdas.iter().map(|l| [l.re, l.im]).collect(),
        ranks,
        kernel_dimension: s.n - reports[0].rank,
        max_angle,
        independent: max_angle <= KERNEL_ANGLE_TOL,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct PositiveTypeReport {
    pub positive_type: bool,
    /// Span on which `∫ H` was found invertible (or the largest tried).
    pub span: (f64, f64),
    pub singular_values: Vec<f64>,
}

/// Whether `∫_I H` is invertible on some `I_k`.
pub fn is_positive_type(h: &Coefficient, iv: &IntervalSpec) -> Result<PositiveTypeReport> {
    let n = h.n();
    let bps = h.breakpoints();
    let mut last = None;
    for (lo, hi) in enlargement_spans(iv) {
        let m = integrate_matrix(h, lo, hi, &bps)?;
        let sv = linalg::singular_values(&m);
        let full = linalg::numerical_rank(&sv, RANK_REL, RANK_ABS) == n;
        last = Some(PositiveTypeReport {
            positive_type: full,
            span: (lo, hi),
            singular_values: sv,
        });
        if full {
            break;
        }
    }
    Ok(last.expect("at least one span"))
}

/// Entrywise integral of a matrix coefficient over a finite span.
pub fn integrate_matrix(h: &Coefficient, lo: f64, hi: f64, breakpoints: &[f64]) -> Result<CMat> {
    let n = h.n();
    let r = quad::integrate_vec(
        |x| {
            let m = h.evaluate(x)?;
            Ok(m.iter().flat_map(|z| [z.re, z.im]).collect())
        },
        lo,
        hi,
        2 * n * n,
        breakpoints,
        &QuadOptions::default(),
    )?;
    Ok(CMat::from_iterator(n, n, r.value.chunks(2).map(|p| c(p[0], p[1]))))
}

#[derive(Debug, Clone, Serialize)]
pub struct StructuralReport {
    pub fraction: f64,
    pub points: usize,
    pub holds: bool,
}

/// Grid test of `|det(A H)| > 1e-12` on a positive fraction of points, for
/// systems carrying a block layout.
pub fn structural_definiteness(s: &SystemSpec) -> Result<StructuralReport> {
    let block = s
        .block
        .as_ref()
        .ok_or_else(|| HamsysError::Precondition("structural definiteness needs a block layout (A, H)".into()))?;
    let plan = SamplePlan::default_for(s);
    let mut hits = 0usize;
    for &x in &plan.points {
        let a = block.a.evaluate(x)?;
        let h = block.h.evaluate(x)?;
        if linalg::determinant(&(a * h)).norm() > STRUCTURAL_DET {
            hits += 1;
        }
    }
    let fraction = hits as f64 / plan.points.len() as f64;
    Ok(StructuralReport {
        fraction,
        points: plan.points.len(),
        holds: fraction > STRUCTURAL_FRACTION,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::MatrixFunction;

    #[test]
    fn constant_h_gram_is_length() {
        let j = MatrixFunction::from_strs(&[&["0", "1"], &["-1", "0"]]).unwrap();
        let s = SystemSpec::new(
            IntervalSpec::finite(0.0, 3.0, 0.0).unwrap(),
            j,
            MatrixFunction::zeros(2),
            MatrixFunction::from_strs(&[&["1", "0"], &["0", "0"]]).unwrap(),
            "t",
        )
        .unwrap();
        let g = gram_matrix(&s, c(0.0, 0.0), 0.0, 3.0).unwrap();
        let m = g.matrix().unwrap();
        assert!((m[(0, 0)].re - 3.0).abs() < 1e-10);
        // y2 = y2(0) - λ ∫ h11 y1 = const at λ = 0, but h22 = 0
        assert!(m[(1, 1)].norm() < 1e-12);
        assert_eq!(g.rank(), 1);
    }
}
