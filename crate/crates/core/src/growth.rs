//! Convergence/divergence classification of monotone sequences sampled on
//! a doubling grid (Gram eigenvalue trajectories, truncated improper
//! integrals).
//!
//! The decision is made in three stages:
//!
//! 1. a Cauchy test on the trailing increments (bounded if every one of the
//!    last `cauchy_steps` increments is below `eps * (1 + |v|)`);
//! 2. an increment-model test on the trailing `window` increments: `ln d_k`
//!    is fitted against `k` (geometric model) and against `ln k` (power
//!    model in the doubling index).  Non-decaying increments, or a power
//!    decay no faster than `k^-a_div`, mean divergence; a decay at least as
//!    fast as `k^-a_conv` means convergence;
//! 3. anything in between is reported as inconclusive.
//!
//! Divergent sequences additionally get a growth model (`log T`,
//! `log log T`, `T^p`, `e^{cT}`) selected by least squares.

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Convergent,
    Divergent,
    Inconclusive,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Convergent => "convergent",
            Status::Divergent => "divergent",
            Status::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GrowthModel {
    Log,
    LogLog,
    Power,
    Exponential,
}

#[derive(Debug, Clone, Serialize)]
pub struct GrowthFit {
    pub model: GrowthModel,
    /// Coefficient of the model (`β` in `β log T`, `p` in `T^p`, `c` in
    /// `e^{cT}`).
    pub parameter: f64,
    /// Relative RMS misfit over the fitted window.
    pub misfit: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct ClassifierParams {
    pub eps: f64,
    pub cauchy_steps: usize,
    pub window: usize,
    /// Geometric slope (per doubling, natural log) above which the
    /// increments are treated as non-decaying.
    pub flat_slope: f64,
    pub a_div: f64,
    pub a_conv: f64,
}

impl ClassifierParams {
    /// Settings used for Gram eigenvalue trajectories.
    pub fn trajectory() -> Self {
        ClassifierParams {
            eps: 1e-6,
            cauchy_steps: 3,
            window: 6,
            flat_slope: -0.01,
            a_div: 1.15,
            a_conv: 1.5,
        }
    }

    /// Settings used for truncated improper integrals.
    pub fn integral(eps: f64) -> Self {
        ClassifierParams {
            eps,
            ..Self::trajectory()
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Classification {
    pub status: Status,
    /// Which rule fired.
    pub rule: &'static str,
    pub last_value: f64,
    /// Extrapolated limit for convergent sequences.
    pub limit: Option<f64>,
    /// Fitted ratio of successive increments.
    pub increment_ratio: Option<f64>,
    /// Fitted power decay of the increments in the doubling index.
    pub decay_exponent: Option<f64>,
    pub growth: Option<GrowthFit>,
}

fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let icpt = my - slope * mx;
    let rss: f64 = xs.iter().zip(ys).map(|(x, y)| (y - icpt - slope * x).powi(2)).sum();
    (slope, icpt, (rss / n).sqrt())
}

/// Select the best growth model for a divergent sequence.
pub fn fit_growth(ts: &[f64], values: &[f64]) -> Option<GrowthFit> {
    let pts: Vec<(f64, f64)> = ts
        .iter()
        .zip(values)
        .filter(|(t, v)| **t > 1.0 && v.is_finite() && **v > 0.0)
        .map(|(t, v)| (*t, *v))
        .collect();
    if pts.len() < 3 {
        return None;
    }
    let vs: Vec<f64> = pts.iter().map(|p| p.1).collect();
    let rel = |pred: &dyn Fn(f64) -> f64| -> f64 {
        let s: f64 = pts.iter().map(|(t, v)| ((pred(*t) - v) / v).powi(2)).sum();
        (s / pts.len() as f64).sqrt()
    };
    let mut best: Option<GrowthFit> = None;
    let mut consider = |fit: GrowthFit| {
        if fit.misfit.is_finite() && best.as_ref().map_or(true, |b| fit.misfit < b.misfit) {
            best = Some(fit);
        }
    };
    // v = α + β log T
    let lt: Vec<f64> = pts.iter().map(|p| p.0.ln()).collect();
    let (b, a, _) = linear_fit(&lt, &vs);
    consider(GrowthFit {
        model: GrowthModel::Log,
        parameter: b,
        misfit: rel(&|t: f64| a + b * t.ln()),
    });
    // v = α + β log log T
    if pts.iter().all(|p| p.0 > std::f64::consts::E) {
        let llt: Vec<f64> = lt.iter().map(|l| l.ln()).collect();
        let (b, a, _) = linear_fit(&llt, &vs);
        consider(GrowthFit {
            model: GrowthModel::LogLog,
            parameter: b,
            misfit: rel(&|t: f64| a + b * t.ln().ln()),
        });
    }
    let lv: Vec<f64> = vs.iter().map(|v| v.ln()).collect();
    // v = C T^p
    let (p, a, _) = linear_fit(&lt, &lv);
    consider(GrowthFit {
        model: GrowthModel::Power,
        parameter: p,
        misfit: rel(&|t: f64| (a + p * t.ln()).exp()),
    });
    // v = C e^{cT}
    let tt: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let (cc, a, _) = linear_fit(&tt, &lv);
    consider(GrowthFit {
        model: GrowthModel::Exponential,
        parameter: cc,
        misfit: rel(&|t: f64| (a + cc * t).exp()),
    });
    best
}

/// Classify a nondecreasing sequence `values[k]` sampled at `ts[k]`, where
/// consecutive `ts` (measured from the base point) roughly double.
pub fn classify(ts: &[f64], values: &[f64], p: &ClassifierParams) -> Classification {
    let n = values.len();
    let last = values.last().copied().unwrap_or(0.0);
    let mut out = Classification {
        status: Status::Inconclusive,
        rule: "too-few-points",
        last_value: last,
        limit: None,
        increment_ratio: None,
        decay_exponent: None,
        growth: None,
    };
    if values.iter().any(|v| !v.is_finite()) {
        out.status = Status::Divergent;
        out.rule = "overflow";
        return out;
    }
    if n < p.cauchy_steps + 1 {
        return out;
    }
    let incs: Vec<f64> = values.windows(2).map(|w| w[1] - w[0]).collect();
    let tol = |k: usize| p.eps * (1.0 + values[k + 1].abs());
    let m = incs.len();
    let cauchy = (m - p.cauchy_steps..m).all(|k| incs[k].abs() < tol(k));

    // Increment-model fit over the trailing window.
    let w = p.window.min(m);
    let floor = 1e-300f64;
    let ks: Vec<f64> = (m - w..m).map(|k| (k + 1) as f64).collect();
    let lds: Vec<f64> = (m - w..m).map(|k| incs[k].max(floor).ln()).collect();
    let tiny = (m - w..m).all(|k| incs[k].abs() < 1e-12 * (1.0 + values[k + 1].abs()));
    let model_ok = w >= 4 && !tiny;
    let (geo_slope, geo_icpt, geo_res) = linear_fit(&ks, &lds);
    let lks: Vec<f64> = ks.iter().map(|k| k.ln()).collect();
    let (pow_slope, _, pow_res) = linear_fit(&lks, &lds);
    if model_ok {
        out.increment_ratio = Some(geo_slope.exp());
        out.decay_exponent = Some(-pow_slope);
    }
    let tail = || -> f64 {
        let d_last = incs[m - 1].max(0.0);
        let kl = m as f64;
        let r = geo_slope.exp();
        let a = -pow_slope;
        if geo_res <= pow_res && r < 1.0 {
            // geometric tail, using the fitted (smoothed) last increment
            let d = (geo_icpt + geo_slope * kl).exp().min(d_last.max(0.0) * 4.0 + floor);
            d * r / (1.0 - r)
        } else if a > 1.0 {
            d_last * kl / (a - 1.0)
        } else {
            0.0
        }
    };

    if cauchy {
        out.status = Status::Convergent;
        out.rule = "cauchy";
        out.limit = Some(if model_ok { last + tail() } else { last });
        return out;
    }
    if !model_ok {
        return out;
    }
    if incs[m - w..].iter().any(|d| *d <= 0.0) {
        // a non-increasing stretch that is not small: the data are noisy
        out.rule = "non-monotone";
        return out;
    }
    let a = -pow_slope;
    if geo_slope >= p.flat_slope || a <= p.a_div {
        out.status = Status::Divergent;
        out.rule = if geo_slope >= p.flat_slope { "non-decaying-increments" } else { "slow-increment-decay" };
        out.growth = fit_growth(&ts[n - w - 1..], &values[n - w - 1..]);
        return out;
    }
    if a >= p.a_conv {
        out.status = Status::Convergent;
        out.rule = "fast-increment-decay";
        out.limit = Some(last + tail());
        return out;
    }
    out.rule = "ambiguous-increment-decay";
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Vec<f64> {
        (0..=20).map(|k| 2f64.powi(k)).collect()
    }

    #[test]
    fn inverse_square_tail_converges_to_limit() {
        let ts = grid();
        let vs: Vec<f64> = ts.iter().map(|t| 1.0 - 1.0 / (1.0 + t)).collect();
        let c = classify(&ts, &vs, &ClassifierParams::integral(1e-8));
        assert_eq!(c.status, Status::Convergent);
        assert!((c.limit.unwrap() - 1.0).abs() < 1e-8, "{:?}", c.limit);
    }

    #[test]
    fn log_and_loglog_diverge() {
        let ts = grid();
        let vs: Vec<f64> = ts.iter().map(|t| (t + 2.0).ln()).collect();
        assert_eq!(classify(&ts, &vs, &ClassifierParams::integral(1e-8)).status, Status::Divergent);
        let vs: Vec<f64> = ts.iter().map(|t| (t + 2.0).ln().ln()).collect();
        let c = classify(&ts, &vs, &ClassifierParams::integral(1e-8));
        assert_eq!(c.status, Status::Divergent);
        assert_eq!(c.growth.unwrap().model, GrowthModel::LogLog);
    }

    #[test]
    fn inverse_log_converges() {
        let ts = grid();
        let vs: Vec<f64> = ts.iter().map(|t| 1.0 / 2f64.ln() - 1.0 / (t + 2.0).ln()).collect();
        assert_eq!(classify(&ts, &vs, &ClassifierParams::integral(1e-8)).status, Status::Convergent);
    }

    #[test]
    fn exponential_growth_model() {
        let ts: Vec<f64> = (3..=8).map(|k| 2f64.powi(k)).collect();
        let vs: Vec<f64> = ts.iter().map(|t| (2.0 * t).exp()).collect();
        let c = classify(&ts, &vs, &ClassifierParams::trajectory());
        assert_eq!(c.status, Status::Divergent);
        let g = c.growth.unwrap();
        assert_eq!(g.model, GrowthModel::Exponential);
        assert!((g.parameter - 2.0).abs() < 1e-9);
    }
}
