//! Regularisation of a monotone potential bound `q` into `q̃ ≥ q` with a
//! Lipschitz-controlled `q̃^{-1/2}`.
//!
//! With `φ(x) = ∫_a^x c⁻¹` and its distribution function
//! `ψ(t) = sup{x : φ(x) ≤ t}`, put `q₁ = q∘ψ`, sample `q̃₁(m) = q₁(m+1)` on
//! the integers, interpolate `q̃₁^{-1/2}` linearly in between and set
//! `q̃ = q̃₁∘φ`.  Then `q̃ ≥ q`, `|(q̃^{-1/2})′|·c ≤ q(ψ(0))^{-1/2}`, and
//! `∫ q̃^{-1/2} c⁻¹` diverges together with `∫ q^{-1/2} c⁻¹`.

use serde::Serialize;

use crate::deficiency::Side;
use crate::error::{HamsysError, Result};
use crate::growth::Status;
use crate::quad;
use crate::system::{IntervalSpec, SamplePlan};

use super::improper::{classify_improper_integral, DivergenceClassification, IntegralPlan};
use super::weight::ScalarFunction;

/// Table nodes of `φ` per doubling of the distance from the base point.
const NODES_PER_DOUBLING: usize = 256;
/// Number of sample points for the invariant checks.
const CHECK_POINTS: usize = 2000;

#[derive(Debug, Clone, Serialize)]
pub struct QInvariants {
    /// `min (q̃ − q)/q` on the sample grid (nonnegative when `q̃ ≥ q`).
    pub min_relative_margin: f64,
    /// Sampled `max |(q̃^{-1/2})′|·c`.
    pub lipschitz_max: f64,
    pub lipschitz_bound: f64,
    /// `∫ q̃^{-1/2} c⁻¹`.
    pub divergence: DivergenceClassification,
    pub points: usize,
}

impl QInvariants {
    pub fn hold(&self) -> bool {
        self.min_relative_margin >= -1e-12
            && self.lipschitz_max <= self.lipschitz_bound * (1.0 + 1e-6)
            && self.divergence.status == Status::Divergent
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct QRegularization {
    pub base: f64,
    /// `C₁ = q(ψ(0))^{-1/2}`.
    pub c1: f64,
    /// `(x, φ(x))` nodes; `φ` is linear in between.
    pub phi_table: Vec<[f64; 2]>,
    /// Hypothesis integral `∫ q^{-1/2} c⁻¹`.
    pub hypothesis: DivergenceClassification,
    pub invariants: Option<QInvariants>,
    #[serde(skip)]
    q: Option<ScalarFunction>,
}

impl QRegularization {
    fn q(&self) -> &ScalarFunction {
        self.q.as_ref().expect("regularisation built with its q")
    }

    pub fn phi(&self, x: f64) -> Result<f64> {
        let t = &self.phi_table;
        if x < self.base || x > t[t.len() - 1][0] {
            return Err(HamsysError::Domain {
                x,
                msg: "outside the tabulated range of φ".into(),
            });
        }
        let i = t.partition_point(|p| p[0] <= x).clamp(1, t.len() - 1);
        let (a, b) = (t[i - 1], t[i]);
        let s = if b[0] > a[0] { (x - a[0]) / (b[0] - a[0]) } else { 0.0 };
        Ok(a[1] + s * (b[1] - a[1]))
    }

    /// `ψ(t) = sup{x : φ(x) ≤ t}`.
    pub fn psi(&self, t: f64) -> Result<f64> {
        let tab = &self.phi_table;
        let i = tab.partition_point(|p| p[1] <= t);
        if i == 0 {
            return Ok(self.base);
        }
        if i == tab.len() {
            return Err(HamsysError::Domain {
                x: t,
                msg: "φ does not reach this value within the table".into(),
            });
        }
        let (a, b) = (tab[i - 1], tab[i]);
        Ok(a[0] + (t - a[1]) / (b[1] - a[1]) * (b[0] - a[0]))
    }

    /// `q̃₁(m) = q(ψ(m + 1))` at integer `m`.
    fn q1_sample(&self, m: f64) -> Result<f64> {
        self.q().eval(self.psi(m + 1.0)?)
    }

    /// `q̃₁^{-1/2}(t)`, linear between integers.
    pub fn q_tilde1_inv_sqrt(&self, t: f64) -> Result<f64> {
        let m = t.floor();
        let s = t - m;
        let lo = self.q1_sample(m)?.sqrt().recip();
        if s == 0.0 {
            return Ok(lo);
        }
        let hi = self.q1_sample(m + 1.0)?.sqrt().recip();
        Ok((1.0 - s) * lo + s * hi)
    }

    /// `q̃(x) = q̃₁(φ(x))`.
    pub fn q_tilde(&self, x: f64) -> Result<f64> {
        Ok(self.q_tilde1_inv_sqrt(self.phi(x)?)?.powi(-2))
    }
}

/// Build `q̃` from a nondecreasing `q ≥ δ > 0` and the weight `c`.
pub fn regularize_q(q: &ScalarFunction, c: &ScalarFunction, base: f64, plan: &IntegralPlan) -> Result<QRegularization> {
    let reach = 2f64.powi(plan.k_max);
    let grid = SamplePlan::for_interval(&IntervalSpec::half_line_positive(base), CHECK_POINTS, reach, &q.breakpoints).points;
    let mut prev: Option<(f64, f64)> = None;
    for &x in &grid {
        let v = q.eval(x)?;
        if !(v > 0.0) {
            return Err(HamsysError::Precondition(format!("q must be positive, q({x}) = {v}")));
        }
        if let Some((px, pv)) = prev {
            if v < pv * (1.0 - 1e-12) {
                return Err(HamsysError::Precondition(format!(
                    "q is not nondecreasing: q({px}) = {pv} > q({x}) = {v}"
                )));
            }
        }
        prev = Some((x, v));
    }
    let inv_c = c.map("1/c", |w| w.recip());
    let integrand = q.map("q^-1/2", |v| v.sqrt().recip()).times(&inv_c);
    let hypothesis = classify_improper_integral(&integrand, base, Side::Right, plan)?;
    if hypothesis.status != Status::Divergent {
        return Err(HamsysError::Precondition(format!(
            "∫ q^(-1/2) c^(-1) is classified {}, a divergent integral is required",
            hypothesis.status.as_str()
        )));
    }

    // φ on a table reaching well beyond the last truncation, so that q̃
    // (which looks two integer steps of φ ahead) is defined there
    let mut table = vec![[base, 0.0]];
    let mut acc = 0.0;
    let mut bps = c.breakpoints.clone();
    bps.extend(&q.breakpoints);
    for k in 0..=(plan.k_max + 2) {
        let (lo, hi) = if k == 0 { (0.0, 1.0) } else { (2f64.powi(k - 1), 2f64.powi(k)) };
        for i in 1..=NODES_PER_DOUBLING {
            let a = base + lo + (hi - lo) * (i - 1) as f64 / NODES_PER_DOUBLING as f64;
            let b = base + lo + (hi - lo) * i as f64 / NODES_PER_DOUBLING as f64;
            acc += quad::integrate(|x| Ok(inv_c.eval(x)?), a, b, &bps, &plan.quad)?.0;
            table.push([b, acc]);
        }
    }
    let mut reg = QRegularization {
        base,
        c1: 0.0,
        phi_table: table,
        hypothesis,
        invariants: None,
        q: Some(q.clone()),
    };
    reg.c1 = q.eval(reg.psi(0.0)?)?.sqrt().recip();

    // invariants
    let mut margin = f64::INFINITY;
    let mut lip: f64 = 0.0;
    let mut points = 0;
    for &x in &grid {
        let qt = reg.q_tilde(x)?;
        let qv = q.eval(x)?;
        margin = margin.min((qt - qv) / qv);
        let h = 1e-6 * (1.0 + (x - base).abs());
        let (xl, xr) = ((x - h).max(base), x + h);
        let d = (reg.q_tilde(xr)?.sqrt().recip() - reg.q_tilde(xl)?.sqrt().recip()) / (xr - xl);
        let cw = c.eval(x)?;
        if cw.is_finite() {
            lip = lip.max(d.abs() * cw);
        }
        points += 1;
    }
    let r2 = reg.clone();
    let qt_fn = ScalarFunction::new("q̃^-1/2", bps, move |x| r2.q_tilde1_inv_sqrt(r2.phi(x)?));
    let divergence = classify_improper_integral(&qt_fn.times(&inv_c), base, Side::Right, plan)?;
    reg.invariants = Some(QInvariants {
        min_relative_margin: margin,
        lipschitz_max: lip,
        lipschitz_bound: reg.c1,
        divergence,
        points,
    });
    Ok(reg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_q_is_shifted_on_integers() {
        let q = ScalarFunction::parse("1+x").unwrap();
        let c = ScalarFunction::constant(1.0);
        let r = regularize_q(&q, &c, 0.0, &IntegralPlan::default()).unwrap();
        for n in 0..20 {
            assert!((r.q_tilde(n as f64).unwrap() - (2.0 + n as f64)).abs() < 1e-9);
        }
        assert!(r.invariants.as_ref().unwrap().hold());
    }

    #[test]
    fn exponential_q_fails_the_hypothesis() {
        let q = ScalarFunction::parse("exp(x)").unwrap();
        let c = ScalarFunction::constant(1.0);
        assert!(matches!(
            regularize_q(&q, &c, 0.0, &IntegralPlan::default()),
            Err(HamsysError::Precondition(_))
        ));
    }
}
