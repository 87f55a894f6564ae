//! Cutoff functions `χ_n` adapted to a weight `f` with `∫_0^∞ f = ∞`:
//! `χ_n = 1` on `(-∞, n]`, `χ_n = 0` beyond some `x_n`, and
//! `|χ_n′| ≤ f/n`.
//!
//! Construction: pick a cap `C` with `∫_n^∞ min(C, f/n) ≥ 2`, the end point
//! `N` where `K_n = ∫_n^N min(C, f/n)` first reaches 1, and set
//! `χ_n(x) = 1 − K_n⁻¹ ∫_{min(n,x)}^{min(N,x)} min(C, f/n)`.

use serde::Serialize;

use crate::deficiency::Side;
use crate::error::{HamsysError, Result};
use crate::growth::Status;
use crate::quad::{self, QuadOptions};

use super::improper::{classify_improper_integral, IntegralPlan};
use super::weight::ScalarFunction;

/// Number of stored nodes on `[n, N]`.
const NODES: usize = 64;
/// Largest exponent tried when searching for the cap and the end point.
const MAX_EXPONENT: i32 = 60;
/// Number of cap doublings tried.
const MAX_CAP_DOUBLINGS: usize = 40;

#[derive(Debug, Clone, Serialize)]
pub struct CutoffFunction {
    pub n: usize,
    /// The cap `C`.
    pub cap: f64,
    /// Support end `x_n = N`.
    pub support_end: f64,
    /// `K_n = ∫_n^N min(C, f/n)`.
    pub k_n: f64,
    /// `(x, ∫_n^x min(C, f/n))` on `[n, N]`.
    pub nodes: Vec<[f64; 2]>,
    #[serde(skip)]
    f: Option<ScalarFunction>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CutoffProperties {
    /// `max |χ − 1|` on `x ≤ n`.
    pub equals_one_before_n: f64,
    /// `max |χ|` on `x ≥ N`.
    pub vanishes_after_support: f64,
    /// Sampled `sup |χ′|` and its bound `C / K_n`.
    pub derivative_sup: f64,
    pub derivative_bound: f64,
    /// Largest sampled excess `|χ′| − f/n`.
    pub derivative_excess: f64,
    /// `∫ max(0, |χ′| − f/n)` over `[n, N]`.
    pub derivative_excess_integral: f64,
    /// Mismatch between stored nodes and fresh quadrature.
    pub node_consistency: f64,
    pub points: usize,
}

impl CutoffProperties {
    pub fn holds(&self, tol: f64) -> bool {
        self.equals_one_before_n <= tol
            && self.vanishes_after_support <= tol
            && self.derivative_sup <= self.derivative_bound * (1.0 + tol)
            && self.derivative_excess <= tol
            && self.derivative_excess_integral <= tol
            && self.node_consistency <= tol
    }
}

fn opts() -> QuadOptions {
    QuadOptions {
        rel_tol: 1e-13,
        abs_tol: 1e-15,
        max_intervals: 4000,
    }
}

fn capped(f: &ScalarFunction, n: f64, cap: f64) -> impl Fn(f64) -> Result<f64> + '_ {
    move |x| Ok((f.eval(x)? / n).min(cap))
}

fn integral(f: &ScalarFunction, n: f64, cap: f64, lo: f64, hi: f64) -> Result<f64> {
    let g = capped(f, n, cap);
    Ok(quad::integrate(|x| g(x), lo, hi, &f.breakpoints, &opts())?.0)
}

/// Smallest doubling end point `n + 2^k` where the capped integral reaches
/// `target`, with the value there; `None` when unreachable.
fn reach(f: &ScalarFunction, n: f64, cap: f64, target: f64) -> Result<Option<(f64, f64, f64)>> {
    let mut acc = 0.0;
    let mut prev = n;
    for k in 0..=MAX_EXPONENT {
        let next = n + 2f64.powi(k);
        let seg = integral(f, n, cap, prev, next)?;
        if acc + seg >= target {
            return Ok(Some((prev, next, acc)));
        }
        acc += seg;
        prev = next;
    }
    Ok(None)
}

pub fn construct_cutoff(f: &ScalarFunction, n: usize, plan: &IntegralPlan) -> Result<CutoffFunction> {
    if n == 0 {
        return Err(HamsysError::Precondition("cutoff index must be at least 1".into()));
    }
    let cl = classify_improper_integral(f, 0.0, Side::Right, plan)?;
    if cl.status != Status::Divergent {
        return Err(HamsysError::Precondition(format!(
            "∫₀^∞ {} is classified {}, a divergent integral is required",
            f.name,
            cl.status.as_str()
        )));
    }
    let nf = n as f64;
    let mut cap = 1.0;
    let mut found = false;
    for _ in 0..MAX_CAP_DOUBLINGS {
        if reach(f, nf, cap, 2.0)?.is_some() {
            found = true;
            break;
        }
        cap *= 2.0;
    }
    if !found {
        return Err(HamsysError::Precondition(format!(
            "∫_n^∞ min(C, f/n) stays below 2 up to n + 2^{MAX_EXPONENT} for every cap tried"
        )));
    }
    let (lo0, hi0, acc) = reach(f, nf, cap, 1.0)?.expect("reached 2, hence 1");
    // bisection for the point where the capped integral equals 1; the upper
    // end always satisfies K ≥ 1
    let (mut lo, mut hi) = (lo0, hi0);
    let mut k_hi = acc + integral(f, nf, cap, lo0, hi0)?;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let v = acc + integral(f, nf, cap, lo0, mid)?;
        if v >= 1.0 {
            hi = mid;
            k_hi = v;
        } else {
            lo = mid;
        }
        if v == 1.0 {
            break;
        }
    }
    let big_n = hi;
    let mut nodes = Vec::with_capacity(NODES + 1);
    let mut g = 0.0;
    let mut px = nf;
    nodes.push([nf, 0.0]);
    for i in 1..=NODES {
        let x = nf + (big_n - nf) * i as f64 / NODES as f64;
        g += integral(f, nf, cap, px, x)?;
        nodes.push([x, g]);
        px = x;
    }
    // the last node is the definition of K_n
    let k_n = g;
    debug_assert!((k_n - k_hi).abs() <= 1e-9 * k_n.max(1.0));
    Ok(CutoffFunction {
        n,
        cap,
        support_end: big_n,
        k_n,
        nodes,
        f: Some(f.clone()),
    })
}

impl CutoffFunction {
    fn weight(&self) -> &ScalarFunction {
        self.f.as_ref().expect("cutoff built with its weight")
    }

    fn g(&self, x: f64) -> Result<f64> {
        Ok((self.weight().eval(x)? / self.n as f64).min(self.cap))
    }

    pub fn value(&self, x: f64) -> Result<f64> {
        let n = self.n as f64;
        if x <= n {
            return Ok(1.0);
        }
        if x >= self.support_end {
            return Ok(0.0);
        }
        let i = self.nodes.partition_point(|p| p[0] <= x) - 1;
        let [nx, gv] = self.nodes[i];
        let rest = integral(self.weight(), n, self.cap, nx, x)?;
        Ok(1.0 - (gv + rest) / self.k_n)
    }

    pub fn derivative(&self, x: f64) -> Result<f64> {
        if x <= self.n as f64 || x >= self.support_end {
            return Ok(0.0);
        }
        Ok(-self.g(x)? / self.k_n)
    }

    /// Check the four defining properties on a sample grid and by
    /// quadrature.
    pub fn verify(&self) -> Result<CutoffProperties> {
        let n = self.n as f64;
        let f = self.weight();
        let mut p = CutoffProperties {
            equals_one_before_n: 0.0,
            vanishes_after_support: 0.0,
            derivative_sup: 0.0,
            derivative_bound: self.cap / self.k_n,
            derivative_excess: 0.0,
            derivative_excess_integral: 0.0,
            node_consistency: 0.0,
            points: 0,
        };
        let mut pts: Vec<f64> = (0..=200).map(|i| n * i as f64 / 200.0).collect();
        pts.extend((0..=400).map(|i| n + (self.support_end - n) * i as f64 / 400.0));
        pts.extend((0..=100).map(|i| self.support_end * (1.0 + i as f64 / 10.0)));
        for &x in &pts {
            let v = self.value(x)?;
            if x <= n {
                p.equals_one_before_n = p.equals_one_before_n.max((v - 1.0).abs());
            }
            if x >= self.support_end {
                p.vanishes_after_support = p.vanishes_after_support.max(v.abs());
            }
            let d = self.derivative(x)?.abs();
            p.derivative_sup = p.derivative_sup.max(d);
            p.derivative_excess = p.derivative_excess.max(d - f.eval(x)? / n);
        }
        p.points = pts.len();
        p.vanishes_after_support = p.vanishes_after_support.max(self.value(self.support_end)?.abs());
        let (excess, _) = quad::integrate(
            |x| Ok((self.derivative(x)?.abs() - f.eval(x)? / n).max(0.0)),
            n,
            self.support_end,
            &f.breakpoints,
            &opts(),
        )?;
        p.derivative_excess_integral = excess;
        for w in self.nodes.windows(2) {
            let fresh = integral(f, n, self.cap, n, w[1][0])?;
            p.node_consistency = p.node_consistency.max((fresh - w[1][1]).abs());
        }
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_weight_gives_linear_ramp() {
        let f = ScalarFunction::constant(1.0);
        let chi = construct_cutoff(&f, 1, &IntegralPlan::default()).unwrap();
        assert_eq!(chi.cap, 1.0);
        assert!((chi.support_end - 2.0).abs() < 1e-12);
        assert!((chi.k_n - 1.0).abs() < 1e-12);
        assert!((chi.value(1.5).unwrap() - 0.5).abs() < 1e-12);
        assert!(chi.verify().unwrap().holds(1e-10));
    }

    #[test]
    fn integrable_weight_is_rejected() {
        let f = ScalarFunction::parse("(1+x)^(-2)").unwrap();
        assert!(matches!(construct_cutoff(&f, 1, &IntegralPlan::default()), Err(HamsysError::Precondition(_))));
    }
}
