//! Solutions of `−(A⁻¹u′)′ + R u = 0` on `ℝ₊` with prescribed behaviour at
//! infinity: `U → I`, `U′ → 0`, and `V ~ Ã`, `V′ ~ A`, where
//! `Ã(x) = ∫_0^x A`.
//!
//! `U` solves `U(x) = I + ∫_x^∞ (Ã(s) − Ã(x)) R(s) U(s) ds`.  Once
//! `θ(X) = ∫_X^∞ ‖Ã‖‖R‖` is small the successive approximations
//! `U = I + U₁ + U₂ + …` satisfy `‖U_k‖ ≤ θ^k`, so two terms give the data
//! at `X` up to `θ²/(1−θ)`; the solution is then continued by the ODE.
//! `V = U ∫_0^x U⁻¹ A U⁻*` (matrix Liouville formula).

use num_complex::Complex64;
use serde::Serialize;

use crate::deficiency::Side;
use crate::error::{HamsysError, Result};
use crate::growth::Status;
use crate::linalg;
use crate::matrix::{c, CMat, Coefficient};
use crate::ode::{self, Control, OdeOptions};
use crate::quad::{self, QuadOptions};

use super::improper::{classify_improper_integral, Antiderivative, DivergenceClassification, IntegralPlan};
use super::weight::ScalarFunction;

#[derive(Debug, Clone)]
pub struct AsymptoticOptions {
    pub plan: IntegralPlan,
    /// Bound for the neglected successive-approximation terms.
    pub tau: f64,
    /// Points where the asymptotics are reported.
    pub check_points: Vec<f64>,
    pub ode: OdeOptions,
}

impl Default for AsymptoticOptions {
    fn default() -> Self {
        AsymptoticOptions {
            plan: IntegralPlan::default(),
            tau: 1e-10,
            check_points: vec![1e2, 1e3],
            ode: OdeOptions {
                rtol: 1e-12,
                atol: 1e-14,
                ..OdeOptions::default()
            },
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AsymptoticSample {
    pub x: f64,
    /// `‖U(x) − I‖`.
    pub u_deviation: f64,
    /// `‖U′(x)‖`.
    pub du_norm: f64,
    /// `‖Ã(x)⁻¹V(x) − I‖`.
    pub v_deviation: f64,
    /// `‖A(x)⁻¹V′(x) − I‖`.
    pub dv_deviation: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AsymptoticPair {
    pub n: usize,
    /// `∫_1^∞ ‖Ã‖‖R‖`.
    pub weighted_integral: DivergenceClassification,
    /// `‖A(T) ∫_T^∞ R‖` at `T = 2^k` (empty in the scalar case, where the
    /// condition is not needed).
    pub potential_tail: Vec<[f64; 2]>,
    /// Contraction point `N` with `θ(N) < 1/2`, and `θ(N)`.
    pub contraction_point: f64,
    pub theta_at_contraction: f64,
    /// Point where the two-term approximation is used, and its error bound.
    pub matching_point: f64,
    pub truncation_bound: f64,
    /// Accuracy the construction guarantees (`max(τ, truncation bound)`);
    /// deviation changes below it are not resolved.
    pub accuracy: f64,
    pub samples: Vec<AsymptoticSample>,
    /// `max ‖K(x) − K(0)‖` over the grid on `[0, max check point]`.
    pub k_defect: f64,
    /// `max ‖K(x)‖` (the constant is zero for this `U`).
    pub k_norm: f64,
    /// Deviation of the mixed Wronskian `U* A⁻¹V′ − (A⁻¹U′)* V` from `I`.
    pub wronskian_defect: f64,
    /// Grid values `(x, U, V)`.
    #[serde(skip)]
    pub values: Vec<(f64, CMat, CMat)>,
}

impl AsymptoticPair {
    /// `U → I`, `U′ → 0`, `V ~ Ã`, `V′ ~ A` at the last check point within
    /// `tol`, and all deviations decrease between check points.
    pub fn asymptotics_hold(&self, tol: f64) -> bool {
        let Some(last) = self.samples.last() else { return false };
        let small = [last.u_deviation, last.du_norm, last.v_deviation, last.dv_deviation]
            .iter()
            .all(|v| *v <= tol);
        let decreasing = self.samples.windows(2).all(|w| {
            let slack = |a: f64, b: f64| b <= a * (1.0 + 1e-6) + self.accuracy;
            slack(w[0].u_deviation, w[1].u_deviation)
                && slack(w[0].du_norm, w[1].du_norm)
                && slack(w[0].v_deviation, w[1].v_deviation)
                && slack(w[0].dv_deviation, w[1].dv_deviation)
        });
        small && decreasing
    }
}

fn flatten(ms: &[&CMat], out: &mut [Complex64]) {
    let mut k = 0;
    for m in ms {
        for z in m.iter() {
            out[k] = *z;
            k += 1;
        }
    }
}

fn unflatten(y: &[Complex64], n: usize, idx: usize) -> CMat {
    CMat::from_column_slice(n, n, &y[idx * n * n..(idx + 1) * n * n])
}

/// `∫_x^{±∞} g` (orientation `dir = ±1`, integral over a positive-measure
/// set) for a matrix integrand decaying at infinity, summed over doubling
/// segments until three consecutive ones are negligible.
pub(crate) fn tail_integral<G>(g: G, x: f64, dir: f64, n: usize, bps: &[f64]) -> Result<CMat>
where
    G: Fn(f64) -> Result<CMat>,
{
    let opts = QuadOptions::default();
    let mut acc = CMat::zeros(n, n);
    let mut lo = x;
    let mut quiet = 0;
    let step0 = x.abs().max(1.0);
    for j in 0..400 {
        let hi = x + dir * step0 * 2f64.powi(j);
        let r = quad::integrate_vec(
            |s| Ok(g(s)?.iter().flat_map(|z| [z.re, z.im]).collect()),
            lo,
            hi,
            2 * n * n,
            bps,
            &opts,
        )?;
        let seg = CMat::from_iterator(n, n, r.value.chunks(2).map(|p| c(dir * p[0], dir * p[1])));
        let sn = seg.norm();
        acc += seg;
        quiet = if sn <= 1e-17 * (1.0 + acc.norm()) { quiet + 1 } else { 0 };
        if quiet >= 3 {
            return Ok(acc);
        }
        lo = hi;
    }
    Err(HamsysError::Precondition("tail integral does not settle".into()))
}

pub fn asymptotic_solutions_uv(a: &Coefficient, r: &Coefficient, o: &AsymptoticOptions) -> Result<AsymptoticPair> {
    let n = a.n();
    if r.n() != n {
        return Err(HamsysError::Dimension("A and R must have the same size".into()));
    }
    let mut bps = a.breakpoints();
    bps.extend(r.breakpoints());
    bps.sort_by(|x, y| x.partial_cmp(y).unwrap());
    bps.dedup();
    let at = std::sync::Arc::new(Antiderivative::new(a, 0.0)?);

    // hypothesis: ∫_1^∞ ‖Ã‖‖R‖ < ∞
    let (at2, r2) = (at.clone(), r.clone());
    let w = ScalarFunction::new("‖Ã‖‖R‖", bps.clone(), move |x| {
        let rn = linalg::norm2(&r2.evaluate(x)?);
        Ok(if rn == 0.0 { 0.0 } else { linalg::norm2(&at2.evaluate(x)?) * rn })
    });
    let weighted = classify_improper_integral(&w, 1.0, Side::Right, &o.plan)?;
    if weighted.status != Status::Convergent {
        return Err(HamsysError::Precondition(format!(
            "∫₁^∞ ‖Ã‖‖R‖ is classified {}, a convergent integral is required",
            weighted.status.as_str()
        )));
    }
    let total = weighted.value();
    // θ(T) = ∫_T^∞ ‖Ã‖‖R‖ on the truncation points (measured from 1)
    let thetas: Vec<(f64, f64)> = std::iter::once((1.0, total))
        .chain(weighted.truncations.iter().map(|p| (1.0 + p[0], (total - p[1]).max(0.0))))
        .collect();

    // A(T) ∫_T^∞ R → 0 (only needed for matrix equations)
    let mut potential_tail = Vec::new();
    if n > 1 {
        for k in 2..=o.plan.k_max.min(16) {
            let t = 2f64.powi(k);
            let tail = tail_integral(|s| r.evaluate(s), t, 1.0, n, &bps)?;
            potential_tail.push([t, linalg::norm2(&(a.evaluate(t)? * tail))]);
        }
        let first = potential_tail.iter().map(|p| p[1]).fold(0.0, f64::max);
        let last = potential_tail.last().map(|p| p[1]).unwrap_or(0.0);
        if last > 1e-10 && last > 1e-3 * first {
            return Err(HamsysError::Precondition(format!(
                "A(x)∫ₓ^∞R does not tend to zero (‖·‖ = {last:e} at x = 2^{})",
                o.plan.k_max.min(16)
            )));
        }
    }

    let &(contraction_point, theta_n) = thetas
        .iter()
        .find(|p| p.1 < 0.5)
        .ok_or_else(|| HamsysError::Precondition("no N with ∫_N^∞ ‖Ã‖‖R‖ < 1/2 within the truncation grid".into()))?;
    let &(x_end, theta_end) = thetas
        .iter()
        .find(|p| p.0 >= contraction_point && p.1 * p.1 / (1.0 - p.1) <= o.tau)
        .ok_or_else(|| {
            HamsysError::Precondition("successive approximations do not reach the tolerance within the truncation grid".into())
        })?;

    // two-term data at x_end
    let ax = at.evaluate(x_end)?;
    let u1 = tail_integral(|s| Ok((at.evaluate(s)? - &ax) * r.evaluate(s)?), x_end, 1.0, n, &bps)?;
    let u_end = CMat::identity(n, n) + u1;
    let w_end = -tail_integral(|s| r.evaluate(s), x_end, 1.0, n, &bps)?;

    // backward to 0: U′ = A W, W′ = R U
    let rhs_uw = |x: f64, y: &[Complex64], dy: &mut [Complex64]| -> Result<()> {
        let u = unflatten(y, n, 0);
        let wm = unflatten(y, n, 1);
        let du = a.evaluate(x)? * &wm;
        let dw = r.evaluate(x)? * &u;
        flatten(&[&du, &dw], dy);
        Ok(())
    };
    let mut y0 = vec![c(0.0, 0.0); 2 * n * n];
    flatten(&[&u_end, &w_end], &mut y0);
    let back = ode::integrate(rhs_uw, x_end, &y0, 0.0, &bps, &o.ode, |_, _| Control::Continue)?;
    let u0 = unflatten(&back.y, n, 0);
    let w0 = unflatten(&back.y, n, 1);

    // forward from 0 with P = ∫ U⁻¹ A U⁻*
    let x_max = o.check_points.iter().copied().fold(x_end, f64::max);
    let mut grid: Vec<f64> = (0..=400).map(|i| x_max * (i as f64 / 400.0).powi(3)).collect();
    grid.extend(&o.check_points);
    grid.extend(bps.iter().filter(|&&b| b > 0.0 && b < x_max));
    grid.sort_by(|x, y| x.partial_cmp(y).unwrap());
    grid.dedup();
    let rhs_uwp = |x: f64, y: &[Complex64], dy: &mut [Complex64]| -> Result<()> {
        let u = unflatten(y, n, 0);
        let wm = unflatten(y, n, 1);
        let ax = a.evaluate(x)?;
        let du = &ax * &wm;
        let dw = r.evaluate(x)? * &u;
        let ui = linalg::inverse(&u).ok_or_else(|| HamsysError::Singular { x, what: "U".into() })?;
        let dp = &ui * ax * ui.adjoint();
        flatten(&[&du, &dw, &dp], dy);
        Ok(())
    };
    let mut y1 = vec![c(0.0, 0.0); 3 * n * n];
    flatten(&[&u0, &w0, &CMat::zeros(n, n)], &mut y1);
    let mut states: Vec<(f64, Vec<Complex64>)> = vec![(0.0, y1.clone())];
    ode::integrate(rhs_uwp, 0.0, &y1, x_max, &grid, &o.ode, |x, y| {
        if grid.binary_search_by(|g| g.partial_cmp(&x).unwrap()).is_ok() {
            states.push((x, y.to_vec()));
        }
        Control::Continue
    })?;

    let k_of = |u: &CMat, wm: &CMat| u.adjoint() * wm - wm.adjoint() * u;
    let k0 = k_of(&unflatten(&states[0].1, n, 0), &unflatten(&states[0].1, n, 1));
    let mut k_defect: f64 = 0.0;
    let mut k_norm: f64 = 0.0;
    let mut wronskian_defect: f64 = 0.0;
    let mut values = Vec::with_capacity(states.len());
    let mut samples = Vec::new();
    for (x, y) in &states {
        let (u, wm, p) = (unflatten(y, n, 0), unflatten(y, n, 1), unflatten(y, n, 2));
        let k = k_of(&u, &wm);
        k_defect = k_defect.max((&k - &k0).norm());
        k_norm = k_norm.max(k.norm());
        let ui = linalg::inverse(&u).ok_or_else(|| HamsysError::Singular { x: *x, what: "U".into() })?;
        let v = &u * &p;
        // A⁻¹V′ = W P + U⁻*
        let wv = &wm * &p + ui.adjoint();
        let wr = u.adjoint() * &wv - wm.adjoint() * &v;
        wronskian_defect = wronskian_defect.max((wr - CMat::identity(n, n)).norm());
        if o.check_points.contains(x) {
            let ax = at.evaluate(*x)?;
            let axi = linalg::inverse(&ax).ok_or_else(|| HamsysError::Singular { x: *x, what: "Ã".into() })?;
            samples.push(AsymptoticSample {
                x: *x,
                u_deviation: linalg::norm2(&(&u - CMat::identity(n, n))),
                du_norm: linalg::norm2(&(a.evaluate(*x)? * &wm)),
                v_deviation: linalg::norm2(&(axi * &v - CMat::identity(n, n))),
                dv_deviation: linalg::norm2(&(&wv - CMat::identity(n, n))),
            });
        }
        values.push((*x, u, v));
    }
    let truncation_bound = theta_end * theta_end / (1.0 - theta_end);
    Ok(AsymptoticPair {
        n,
        weighted_integral: weighted,
        potential_tail,
        contraction_point,
        theta_at_contraction: theta_n,
        matching_point: x_end,
        truncation_bound,
        accuracy: o.tau.max(truncation_bound),
        samples,
        k_defect,
        k_norm,
        wronskian_defect,
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::MatrixFunction;

    #[test]
    fn free_equation_is_exact() {
        let a = Coefficient::from(MatrixFunction::identity(1));
        let r = Coefficient::from(MatrixFunction::zeros(1));
        let p = asymptotic_solutions_uv(&a, &r, &AsymptoticOptions::default()).unwrap();
        for (x, u, v) in &p.values {
            assert!((u[(0, 0)] - c(1.0, 0.0)).norm() < 1e-12);
            assert!((v[(0, 0)] - c(*x, 0.0)).norm() < 1e-9 * (1.0 + x));
        }
        assert!(p.k_defect < 1e-12);
    }
}
