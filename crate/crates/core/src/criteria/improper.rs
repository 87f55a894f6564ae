//! Improper integrals `∫_{x0}^{±∞} f` decided from doubling truncations.

use std::sync::Mutex;

use serde::Serialize;

use crate::deficiency::Side;
use crate::error::{HamsysError, Result};
use crate::growth::{self, ClassifierParams, GrowthFit, Status};
use crate::matrix::{c, CMat, Coefficient};
use crate::quad::{self, QuadOptions};

use super::weight::ScalarFunction;

/// Truncations `T_k = 2^k` for `k = k_min..=k_max`.
#[derive(Debug, Clone, Copy)]
pub struct IntegralPlan {
    pub k_min: i32,
    pub k_max: i32,
    /// Relative Cauchy tolerance of the classifier.
    pub eps: f64,
    pub quad: QuadOptions,
}

impl Default for IntegralPlan {
    fn default() -> Self {
        IntegralPlan {
            k_min: 0,
            k_max: 20,
            eps: 1e-8,
            quad: QuadOptions::default(),
        }
    }
}

impl IntegralPlan {
    pub fn truncations(&self) -> Vec<f64> {
        (self.k_min..=self.k_max).map(|k| 2f64.powi(k)).collect()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DivergenceClassification {
    pub integrand: String,
    pub base: f64,
    pub side: Side,
    pub status: Status,
    pub rule: &'static str,
    /// Extrapolated value of a convergent integral.
    pub limit: Option<f64>,
    pub growth: Option<GrowthFit>,
    pub increment_ratio: Option<f64>,
    pub decay_exponent: Option<f64>,
    /// `(T_k, ∫ over the first T_k)`.
    pub truncations: Vec<[f64; 2]>,
}

impl DivergenceClassification {
    pub fn convergent(&self) -> bool {
        self.status == Status::Convergent
    }

    pub fn divergent(&self) -> bool {
        self.status == Status::Divergent
    }

    /// Best estimate of the full integral (last truncation if divergent).
    pub fn value(&self) -> f64 {
        self.limit
            .unwrap_or_else(|| self.truncations.last().map(|p| p[1]).unwrap_or(0.0))
    }
}

/// `∫_{base}^{base ± T_k} f` for every truncation of the plan.
pub fn truncated_integrals(f: &ScalarFunction, base: f64, side: Side, plan: &IntegralPlan) -> Result<Vec<[f64; 2]>> {
    let dir = side.direction();
    let mut out = Vec::new();
    let mut acc = 0.0;
    let mut prev = 0.0;
    for t in plan.truncations() {
        let (lo, hi) = (base + dir * prev, base + dir * t);
        let (v, _) = quad::integrate(|x| f.eval(x), lo, hi, &f.breakpoints, &plan.quad)?;
        acc += dir * v;
        out.push([t, acc]);
        prev = t;
    }
    Ok(out)
}

/// Classify `∫_{base}^{±∞} f` for a nonnegative `f`.
pub fn classify_improper_integral(f: &ScalarFunction, base: f64, side: Side, plan: &IntegralPlan) -> Result<DivergenceClassification> {
    let table = truncated_integrals(f, base, side, plan)?;
    if let Some(p) = table.iter().find(|p| p[1] < -1e-12 * (1.0 + p[1].abs())) {
        return Err(HamsysError::Precondition(format!(
            "integrand {} is not nonnegative (truncated integral {} at T = {})",
            f.name, p[1], p[0]
        )));
    }
    Ok(classify_table(&f.name, base, side, table, plan.eps))
}

/// Classify a precomputed nondecreasing truncation table.
pub fn classify_table(name: &str, base: f64, side: Side, table: Vec<[f64; 2]>, eps: f64) -> DivergenceClassification {
    let ts: Vec<f64> = table.iter().map(|p| p[0]).collect();
    let vs: Vec<f64> = table.iter().map(|p| p[1]).collect();
    let cl = growth::classify(&ts, &vs, &ClassifierParams::integral(eps));
    DivergenceClassification {
        integrand: name.to_string(),
        base,
        side,
        status: cl.status,
        rule: cl.rule,
        limit: cl.limit,
        growth: cl.growth,
        increment_ratio: cl.increment_ratio,
        decay_exponent: cl.decay_exponent,
        truncations: table,
    }
}

/// `Ã(x) = ∫_{base}^x A`, exact for constant `A` and otherwise built from
/// cached anchors on a geometric grid.
pub struct Antiderivative {
    a: Coefficient,
    base: f64,
    constant: Option<CMat>,
    anchors: Mutex<Vec<(f64, CMat)>>,
}

/// Anchors per doubling of the distance from the base point.
const ANCHORS_PER_DOUBLING: f64 = 8.0;

impl Antiderivative {
    pub fn new(a: &Coefficient, base: f64) -> Result<Antiderivative> {
        let constant = if a.is_constant() { Some(a.evaluate(base)?) } else { None };
        Ok(Antiderivative {
            a: a.clone(),
            base,
            constant,
            anchors: Mutex::new(Vec::new()),
        })
    }

    fn integrate(&self, lo: f64, hi: f64) -> Result<CMat> {
        let n = self.a.n();
        let r = quad::integrate_vec(
            |x| Ok(self.a.evaluate(x)?.iter().flat_map(|z| [z.re, z.im]).collect()),
            lo,
            hi,
            2 * n * n,
            &self.a.breakpoints(),
            &QuadOptions::default(),
        )?;
        Ok(CMat::from_iterator(n, n, r.value.chunks(2).map(|p| c(p[0], p[1]))))
    }

    /// Grid distance `d_m` of anchor `m ≥ 1` from the base point.
    fn anchor_distance(m: usize) -> f64 {
        2f64.powf((m as f64 - 1.0) / ANCHORS_PER_DOUBLING - 4.0)
    }

    pub fn evaluate(&self, x: f64) -> Result<CMat> {
        if let Some(a) = &self.constant {
            return Ok(a * c(x - self.base, 0.0));
        }
        let d = (x - self.base).abs();
        let dir = if x >= self.base { 1.0 } else { -1.0 };
        if d <= Self::anchor_distance(1) {
            return self.integrate(self.base, x);
        }
        // anchors are kept for the side first queried; the other side is
        // integrated directly from the base point
        let mut anchors = self.anchors.lock().expect("anchor cache");
        let side_ok = anchors.first().map_or(true, |(p, _)| (p - self.base) * dir > 0.0);
        if !side_ok {
            drop(anchors);
            return self.integrate(self.base, x);
        }
        while anchors.last().map_or(true, |(p, _)| (p - self.base).abs() < d) {
            let m = anchors.len() + 1;
            let (prev_x, prev_v) = anchors.last().cloned().unwrap_or((self.base, CMat::zeros(self.a.n(), self.a.n())));
            let nx = self.base + dir * Self::anchor_distance(m);
            let v = prev_v + self.integrate(prev_x, nx)?;
            anchors.push((nx, v));
        }
        let k = anchors.partition_point(|(p, _)| (p - self.base).abs() <= d);
        let (ax, av) = if k == 0 {
            (self.base, CMat::zeros(self.a.n(), self.a.n()))
        } else {
            anchors[k - 1].clone()
        };
        drop(anchors);
        Ok(av + self.integrate(ax, x)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_square_converges_to_one() {
        let f = ScalarFunction::parse("(1+x)^(-2)").unwrap();
        let cl = classify_improper_integral(&f, 0.0, Side::Right, &IntegralPlan::default()).unwrap();
        assert!(cl.convergent());
        assert!((cl.limit.unwrap() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn constant_diverges_on_both_sides() {
        let f = ScalarFunction::constant(1.0);
        for side in [Side::Right, Side::Left] {
            let cl = classify_improper_integral(&f, 0.0, side, &IntegralPlan::default()).unwrap();
            assert!(cl.divergent());
        }
    }

    #[test]
    fn antiderivative_of_variable_coefficient() {
        let a = Coefficient::from(crate::matrix::MatrixFunction::from_strs(&[&["1+cos(x)"]]).unwrap());
        let ad = Antiderivative::new(&a, 0.0).unwrap();
        for x in [0.01, 0.7, 5.0, 300.0, 2.5] {
            let v = ad.evaluate(x).unwrap()[(0, 0)].re;
            assert!((v - (x + x.sin())).abs() < 1e-10 * (1.0 + x), "{x}: {v}");
        }
    }
}
