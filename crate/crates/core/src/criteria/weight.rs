//! Pointwise weights entering the integral criteria: the Weyl weight
//! `c(x) = ‖H^{-1/2} J H^{-1/2}‖`, its block variant, and the extreme
//! eigenvalues of `H`.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{HamsysError, Result};
use crate::linalg;
use crate::matrix::{c, CMat, Coefficient};
use crate::system::SystemSpec;

/// Eigenvalues of a non-diagonal `H` below `SIGMA_SING · max(1, ‖H‖)` count
/// as zero (the eigen-solver cannot resolve them).  Diagonal values are
/// exact and only non-positive ones count as singular.
pub const SIGMA_SING: f64 = 1e-14;

/// A real function of `x`, possibly `+∞`-valued.
#[derive(Clone)]
pub struct ScalarFunction {
    pub name: String,
    pub breakpoints: Vec<f64>,
    f: Arc<dyn Fn(f64) -> Result<f64> + Send + Sync>,
}

impl fmt::Debug for ScalarFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarFunction").field("name", &self.name).finish()
    }
}

impl ScalarFunction {
    pub fn new<F>(name: impl Into<String>, breakpoints: Vec<f64>, f: F) -> ScalarFunction
    where
        F: Fn(f64) -> Result<f64> + Send + Sync + 'static,
    {
        ScalarFunction {
            name: name.into(),
            breakpoints,
            f: Arc::new(f),
        }
    }

    pub fn constant(v: f64) -> ScalarFunction {
        ScalarFunction::new(format!("{v}"), Vec::new(), move |_| Ok(v))
    }

    /// A function given by an expression in `x` (real part).
    pub fn parse(src: &str) -> Result<ScalarFunction> {
        let e = crate::expr::Expr::parse(src)?;
        let mut bps = Vec::new();
        e.breakpoints(&mut bps);
        let compiled = e.compile();
        Ok(ScalarFunction::new(src, bps, move |x| Ok(compiled.eval(x)?.re)))
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        (self.f)(x)
    }

    /// Pointwise product.
    pub fn times(&self, other: &ScalarFunction) -> ScalarFunction {
        let (a, b) = (self.clone(), other.clone());
        let mut bps = self.breakpoints.clone();
        bps.extend(&other.breakpoints);
        ScalarFunction::new(format!("({})·({})", self.name, other.name), bps, move |x| {
            let (u, v) = (a.eval(x)?, b.eval(x)?);
            // 0·∞ = 0: a vanishing factor wins
            Ok(if u == 0.0 || v == 0.0 { 0.0 } else { u * v })
        })
    }

    /// `g(f(x))` for a scalar map `g`.
    pub fn map<G>(&self, name: impl Into<String>, g: G) -> ScalarFunction
    where
        G: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let a = self.clone();
        ScalarFunction::new(name, self.breakpoints.clone(), move |x| Ok(g(a.eval(x)?)))
    }
}

fn is_diagonal(m: &CMat) -> bool {
    (0..m.nrows()).all(|i| (0..m.ncols()).all(|j| i == j || m[(i, j)] == c(0.0, 0.0)))
}

/// Eigen-decomposition of a hermitian PSD matrix with exact handling of
/// diagonal input.  Returns `None` when the matrix is (numerically)
/// singular.
fn inverse_sqrt(m: &CMat) -> Option<CMat> {
    let n = m.nrows();
    if is_diagonal(m) {
        let mut out = CMat::zeros(n, n);
        for i in 0..n {
            let d = m[(i, i)].re;
            if d <= 0.0 || !d.is_finite() {
                return None;
            }
            out[(i, i)] = c(d.sqrt().recip(), 0.0);
        }
        return Some(out);
    }
    let (ev, v) = linalg::hermitian_eigen(&linalg::hermitian_part(m));
    let scale = linalg::norm2(m).max(1.0);
    if ev[0] <= SIGMA_SING * scale {
        return None;
    }
    let d = CMat::from_diagonal(&nalgebra::DVector::from_iterator(n, ev.iter().map(|e| c(e.sqrt().recip(), 0.0))));
    Some(&v * d * v.adjoint())
}

/// Eigenvalues of hermitian `H`, ascending, exact for diagonal input.
pub fn hamiltonian_eigenvalues(h: &CMat) -> Vec<f64> {
    if is_diagonal(h) {
        let mut d: Vec<f64> = (0..h.nrows()).map(|i| h[(i, i)].re).collect();
        d.sort_by(|a, b| a.partial_cmp(b).unwrap());
        d
    } else {
        linalg::hermitian_eigenvalues(&linalg::hermitian_part(h))
    }
}

/// `c(x) = ‖H^{-1/2} J H^{-1/2}‖`, `+∞` where `H` is singular.
pub fn weyl_weight_c(s: &SystemSpec, x: f64) -> Result<f64> {
    let h = s.h.evaluate(x)?;
    let j = s.j.evaluate(x)?;
    Ok(match inverse_sqrt(&h) {
        Some(r) => linalg::norm2(&(&r * j * &r)),
        None => f64::INFINITY,
    })
}

/// Block Weyl weight `max(1, ‖A^{-1/2} J H^{-1/2}‖)` of a system with a
/// block layout; `+∞` where `A` or `H` is singular.
pub fn block_weight_c(s: &SystemSpec, x: f64) -> Result<f64> {
    let layout = s
        .block
        .as_ref()
        .ok_or_else(|| HamsysError::Precondition("block Weyl weight needs a block-structured system".into()))?;
    block_weight_parts(&layout.inner_j, &layout.a, &layout.h, x)
}

fn block_weight_parts(j: &Coefficient, a: &Coefficient, h: &Coefficient, x: f64) -> Result<f64> {
    let (j, a, h) = (j.evaluate(x)?, a.evaluate(x)?, h.evaluate(x)?);
    Ok(match (inverse_sqrt(&a), inverse_sqrt(&h)) {
        (Some(ra), Some(rh)) => linalg::norm2(&(ra * j * rh)).max(1.0),
        _ => f64::INFINITY,
    })
}

/// `1/c` as a scalar function (zero where `H` is singular).
pub fn inverse_weight(s: &SystemSpec) -> ScalarFunction {
    let sys = s.clone();
    ScalarFunction::new("1/c", s.breakpoints(), move |x| Ok(weyl_weight_c(&sys, x)?.recip()))
}

/// `1/c` of the block form.
pub fn inverse_block_weight(s: &SystemSpec) -> Result<ScalarFunction> {
    let layout = s
        .block
        .clone()
        .ok_or_else(|| HamsysError::Precondition("block Weyl weight needs a block-structured system".into()))?;
    let mut bps = s.breakpoints();
    for coef in [&layout.a, &layout.h, &layout.inner_j] {
        bps.extend(coef.breakpoints());
    }
    Ok(ScalarFunction::new("1/c (block)", bps, move |x| {
        Ok(block_weight_parts(&layout.inner_j, &layout.a, &layout.h, x)?.recip())
    }))
}

/// `λ₁(x)`, the smallest eigenvalue of `H(x)` (clipped at zero).
pub fn smallest_eigenvalue(s: &SystemSpec) -> ScalarFunction {
    let h = s.h.clone();
    ScalarFunction::new("λ₁", s.breakpoints(), move |x| {
        Ok(hamiltonian_eigenvalues(&h.evaluate(x)?)[0].max(0.0))
    })
}

/// `tr H(x)` of a coefficient.
pub fn trace_of(h: &Coefficient, name: &str) -> ScalarFunction {
    let h = h.clone();
    ScalarFunction::new(name, h.breakpoints(), move |x| Ok(h.evaluate(x)?.trace().re.max(0.0)))
}

/// Diagonal entry `h_jj(x)`.
pub fn diagonal_entry(h: &Coefficient, j: usize) -> ScalarFunction {
    let h = h.clone();
    ScalarFunction::new(format!("h{}{}", j + 1, j + 1), h.breakpoints(), move |x| {
        Ok(h.evaluate(x)?[(j, j)].re.max(0.0))
    })
}

/// Pointwise check of `λ₁/‖J‖ ≤ 1/c ≤ ‖J⁻¹‖ λ_n`.
#[derive(Debug, Clone, Serialize)]
pub struct EstimateChain {
    pub points: usize,
    /// Points skipped because `H` is singular there.
    pub singular_points: usize,
    /// Largest relative violation of either inequality (0 when both hold).
    pub max_violation: f64,
}

impl EstimateChain {
    pub fn holds(&self, tol: f64) -> bool {
        self.max_violation <= tol
    }
}

pub fn estimate_chain(s: &SystemSpec, points: &[f64]) -> Result<EstimateChain> {
    let mut out = EstimateChain {
        points: 0,
        singular_points: 0,
        max_violation: 0.0,
    };
    for &x in points {
        let h = s.h.evaluate(x)?;
        let j = s.j.evaluate(x)?;
        let cw = weyl_weight_c(s, x)?;
        if !cw.is_finite() {
            out.singular_points += 1;
            continue;
        }
        out.points += 1;
        let ev = hamiltonian_eigenvalues(&h);
        let jinv = linalg::inverse(&j).ok_or_else(|| HamsysError::Singular { x, what: "J".into() })?;
        let inv_c = cw.recip();
        let lower = ev[0] / linalg::norm2(&j);
        let upper = linalg::norm2(&jinv) * ev[ev.len() - 1];
        let v1 = (lower - inv_c) / inv_c.max(1e-300);
        let v2 = (inv_c - upper) / upper.max(1e-300);
        out.max_violation = out.max_violation.max(v1).max(v2);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::MatrixFunction;
    use crate::system::IntervalSpec;

    fn sys(h: &[&[&str]]) -> SystemSpec {
        SystemSpec::new(
            IntervalSpec::half_line_positive(0.0),
            MatrixFunction::from_strs(&[&["0", "1"], &["-1", "0"]]).unwrap(),
            MatrixFunction::zeros(2),
            MatrixFunction::from_strs(h).unwrap(),
            "t",
        )
        .unwrap()
    }

    #[test]
    fn weight_of_decaying_diagonal() {
        let s = sys(&[&["(1+x)^(-4)", "0"], &["0", "1"]]);
        for x in [0.0, 3.0, 1e6] {
            let w = weyl_weight_c(&s, x).unwrap();
            assert!((w.recip() / (1.0 + x).powi(-2) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn singular_h_gives_infinite_weight() {
        let s = sys(&[&["1", "0"], &["0", "0"]]);
        assert_eq!(weyl_weight_c(&s, 0.5).unwrap(), f64::INFINITY);
        let s = sys(&[&["cos(x)^2", "sin(x)*cos(x)"], &["sin(x)*cos(x)", "sin(x)^2"]]);
        assert_eq!(weyl_weight_c(&s, 0.7).unwrap(), f64::INFINITY);
    }
}
