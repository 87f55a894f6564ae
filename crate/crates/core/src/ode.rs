//! Adaptive explicit Runge–Kutta integration (Dormand–Prince 8(5,3)) for
//! complex-valued first-order systems.
//!
//! Steps never cross a mandatory node; they land on it exactly, and the
//! right-hand side is never evaluated on the far side of a node from the step
//! being taken. Together with closed-left piecewise coefficients this keeps
//! the full order across coefficient jumps.

use num_complex::Complex64;

use crate::error::{HamsysError, Result};

/// Integration tolerances and limits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Initial step magnitude; estimated when `None`.
    pub h_init: Option<f64>,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            rtol: 1e-10,
            atol: 1e-12,
            h_init: None,
            h_max: f64::INFINITY,
            max_steps: 5_000_000,
        }
    }
}

/// Returned by the step observer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Control {
    Continue,
    Stop,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub x: f64,
    pub y: Vec<Complex64>,
    /// Suggested magnitude for the next step.
    pub h_next: f64,
    pub steps: usize,
    pub rejected: usize,
    /// True when the observer stopped the integration before `x_end`.
    pub stopped: bool,
}

// Dormand–Prince 8(5,3) tableau.
const C2: f64 = 0.526001519587677318785587544488E-01;
const C3: f64 = 0.789002279381515978178381316732E-01;
const C4: f64 = 0.118350341907227396726757197510E+00;
const C5: f64 = 0.281649658092772603273242802490E+00;
const C6: f64 = 0.333333333333333333333333333333E+00;
const C7: f64 = 0.25E+00;
const C8: f64 = 0.307692307692307692307692307692E+00;
const C9: f64 = 0.651282051282051282051282051282E+00;
const C10: f64 = 0.6E+00;
const C11: f64 = 0.857142857142857142857142857142E+00;

const A21: f64 = 5.26001519587677318785587544488E-2;
const A31: f64 = 1.97250569845378994544595329183E-2;
const A32: f64 = 5.91751709536136983633785987549E-2;
const A41: f64 = 2.95875854768068491816892993775E-2;
const A43: f64 = 8.87627564304205475450678981324E-2;
const A51: f64 = 2.41365134159266685502369798665E-1;
const A53: f64 = -8.84549479328286085344864962717E-1;
const A54: f64 = 9.24834003261792003115737966543E-1;
const A61: f64 = 3.7037037037037037037037037037E-2;
const A64: f64 = 1.70828608729473871279604482173E-1;
const A65: f64 = 1.25467687566822425016691814123E-1;
const A71: f64 = 3.7109375E-2;
const A74: f64 = 1.70252211019544039314978060272E-1;
const A75: f64 = 6.02165389804559606850219397283E-2;
const A76: f64 = -1.7578125E-2;
const A81: f64 = 3.70920001185047927108779319836E-2;
const A84: f64 = 1.70383925712239993810214054705E-1;
const A85: f64 = 1.07262030446373284651809199168E-1;
const A86: f64 = -1.53194377486244017527936158236E-2;
const A87: f64 = 8.27378916381402288758473766002E-3;
const A91: f64 = 6.24110958716075717114429577812E-1;
const A94: f64 = -3.36089262944694129406857109825E0;
const A95: f64 = -8.68219346841726006818189891453E-1;
const A96: f64 = 2.75920996994467083049415600797E1;
const A97: f64 = 2.01540675504778934086186788979E1;
const A98: f64 = -4.34898841810699588477366255144E1;
const A101: f64 = 4.77662536438264365890433908527E-1;
const A104: f64 = -2.48811461997166764192642586468E0;
const A105: f64 = -5.90290826836842996371446475743E-1;
const A106: f64 = 2.12300514481811942347288949897E1;
const A107: f64 = 1.52792336328824235832596922938E1;
const A108: f64 = -3.32882109689848629194453265587E1;
const A109: f64 = -2.03312017085086261358222928593E-2;
const A111: f64 = -9.3714243008598732571704021658E-1;
const A114: f64 = 5.18637242884406370830023853209E0;
const A115: f64 = 1.09143734899672957818500254654E0;
const A116: f64 = -8.14978701074692612513997267357E0;
const A117: f64 = -1.85200656599969598641566180701E1;
const A118: f64 = 2.27394870993505042818970056734E1;
const A119: f64 = 2.49360555267965238987089396762E0;
const A1110: f64 = -3.0467644718982195003823669022E0;
const A121: f64 = 2.27331014751653820792359768449E0;
const A124: f64 = -1.05344954667372501984066689879E1;
const A125: f64 = -2.00087205822486249909675718444E0;
const A126: f64 = -1.79589318631187989172765950534E1;
const A127: f64 = 2.79488845294199600508499808837E1;
const A128: f64 = -2.85899827713502369474065508674E0;
const A129: f64 = -8.87285693353062954433549289258E0;
const A1210: f64 = 1.23605671757943030647266201528E1;
const A1211: f64 = 6.43392746015763530355970484046E-1;

const B1: f64 = 5.42937341165687622380535766363E-2;
const B6: f64 = 4.45031289275240888144113950566E0;
const B7: f64 = 1.89151789931450038304281599044E0;
const B8: f64 = -5.8012039600105847814672114227E0;
const B9: f64 = 3.1116436695781989440891606237E-1;
const B10: f64 = -1.52160949662516078556178806805E-1;
const B11: f64 = 2.01365400804030348374776537501E-1;
const B12: f64 = 4.47106157277725905176885569043E-2;

const BHH1: f64 = 0.244094488188976377952755905512E+00;
const BHH2: f64 = 0.733846688281611857341361741547E+00;
const BHH3: f64 = 0.220588235294117647058823529412E-01;

const ER1: f64 = 0.1312004499419488073250102996E-01;
const ER6: f64 = -0.1225156446376204440720569753E+01;
const ER7: f64 = -0.4957589496572501915214079952E+00;
const ER8: f64 = 0.1664377182454986536961530415E+01;
const ER9: f64 = -0.3503288487499736816886487290E+00;
const ER10: f64 = 0.3341791187130174790297318841E+00;
const ER11: f64 = 0.8192320648511571246570742613E-01;
const ER12: f64 = -0.2235530786388629525884427845E-01;

const SAFE: f64 = 0.9;
const FAC1: f64 = 0.333;
const FAC2: f64 = 6.0;

/// Move `t` a few ulps towards `dir` (used to keep evaluations on the
/// correct side of a node).
fn nudge(t: f64, dir: f64) -> f64 {
    t + dir * 4.0 * f64::EPSILON * t.abs().max(1e-300)
}

fn axpy_into(out: &mut [Complex64], y: &[Complex64], h: f64, terms: &[(f64, &[Complex64])]) {
    for i in 0..out.len() {
        let mut acc = Complex64::new(0.0, 0.0);
        for (c, k) in terms {
            acc += k[i] * *c;
        }
        out[i] = y[i] + acc * h;
    }
}

fn rms_norm(v: &[Complex64], y: &[Complex64], atol: f64, rtol: f64) -> f64 {
    let n = v.len().max(1);
    let s: f64 = v
        .iter()
        .zip(y)
        .map(|(a, b)| {
            let sk = atol + rtol * b.norm();
            (a.norm() / sk).powi(2)
        })
        .sum();
    (s / n as f64).sqrt()
}

/// Integrate `y' = f(x, y)` from `x0` to `x_end` (either direction).
///
/// `nodes` are points the integrator must land on exactly; nodes outside
/// the open span are ignored. The observer runs after every accepted step
/// (with the new state) and may stop the integration early.
pub fn integrate<F, O>(
    mut rhs: F,
    x0: f64,
    y0: &[Complex64],
    x_end: f64,
    nodes: &[f64],
    opts: &OdeOptions,
    mut observer: O,
) -> Result<Outcome>
where
    F: FnMut(f64, &[Complex64], &mut [Complex64]) -> Result<()>,
    O: FnMut(f64, &[Complex64]) -> Control,
{
    let dim = y0.len();
    let mut y = y0.to_vec();
    if x_end == x0 || dim == 0 {
        return Ok(Outcome {
            x: x0,
            y,
            h_next: opts.h_init.unwrap_or(0.0),
            steps: 0,
            rejected: 0,
            stopped: false,
        });
    }
    let dir = if x_end > x0 { 1.0 } else { -1.0 };
    // nodes strictly inside the span, ordered along the direction, then x_end
    let mut stops: Vec<f64> = nodes
        .iter()
        .copied()
        .filter(|&t| (t - x0) * dir > 0.0 && (x_end - t) * dir > 0.0)
        .collect();
    stops.sort_by(|a, b| ((a - b) * dir).partial_cmp(&0.0).unwrap());
    stops.dedup();
    stops.push(x_end);
    let mut next_stop = 0usize;

    let zero = Complex64::new(0.0, 0.0);
    let mut k = vec![vec![zero; dim]; 12];
    let mut ytmp = vec![zero; dim];
    let mut y_new = vec![zero; dim];
    let mut x = x0;

    rhs(nudge(x, dir), &y, &mut k[0])?;
    let mut h = match opts.h_init {
        Some(h) if h > 0.0 => h,
        _ => initial_step(&mut rhs, x, &y, &k[0], dir, opts, &mut ytmp, &mut y_new)?,
    }
    .min(opts.h_max);
    let span = (x_end - x0).abs();
    h = h.min(span);

    let mut steps = 0usize;
    let mut rejected = 0usize;
    let mut last_rejected = false;

    loop {
        if steps + rejected >= opts.max_steps {
            return Err(HamsysError::StepUnderflow { x, h });
        }
        let target = stops[next_stop];
        let remaining = (target - x).abs();
        if remaining <= 8.0 * f64::EPSILON * x.abs().max(1.0) {
            // a stop within rounding distance of the current point (e.g. a
            // grid point next to a breakpoint): move onto it without a step
            x = target;
            next_stop += 1;
            let done = next_stop == stops.len();
            if observer(x, &y) == Control::Stop && !done {
                return Ok(Outcome {
                    x,
                    y,
                    h_next: h,
                    steps,
                    rejected,
                    stopped: true,
                });
            }
            if done {
                return Ok(Outcome {
                    x,
                    y,
                    h_next: h,
                    steps,
                    rejected,
                    stopped: false,
                });
            }
            rhs(nudge(x, dir), &y, &mut k[0])?;
            continue;
        }
        let mut landing = false;
        let mut hs = h;
        if hs >= remaining * (1.0 - 1e-12) {
            hs = remaining;
            landing = true;
        } else if hs > 0.5 * remaining {
            // avoid leaving a sliver before a node
            hs = 0.5 * remaining;
        }
        if hs <= 8.0 * f64::EPSILON * x.abs().max(1.0) {
            return Err(HamsysError::StepUnderflow { x, h: hs });
        }
        let hh = dir * hs;
        let x_new = if landing { target } else { x + hh };
        // stage evaluation points: the last stage sits on the step end, which
        // is nudged back inside the step
        let t_end = nudge(x_new, -dir);

        {
            let (k1, rest) = k.split_at_mut(1);
            let k1 = &k1[0];
            axpy_into(&mut ytmp, &y, hh, &[(A21, k1)]);
            rhs(x + C2 * hh, &ytmp, &mut rest[0])?;
        }
        stage(&mut rhs, &mut k, &mut ytmp, &y, hh, x + C3 * hh, 2, &[(0, A31), (1, A32)])?;
        stage(&mut rhs, &mut k, &mut ytmp, &y, hh, x + C4 * hh, 3, &[(0, A41), (2, A43)])?;
        stage(&mut rhs, &mut k, &mut ytmp, &y, hh, x + C5 * hh, 4, &[(0, A51), (2, A53), (3, A54)])?;
        stage(&mut rhs, &mut k, &mut ytmp, &y, hh, x + C6 * hh, 5, &[(0, A61), (3, A64), (4, A65)])?;
        stage(&mut rhs, &mut k, &mut ytmp, &y, hh, x + C7 * hh, 6, &[(0, A71), (3, A74), (4, A75), (5, A76)])?;
        stage(
            &mut rhs,
            &mut k,
            &mut ytmp,
            &y,
            hh,
            x + C8 * hh,
            7,
            &[(0, A81), (3, A84), (4, A85), (5, A86), (6, A87)],
        )?;
        stage(
            &mut rhs,
            &mut k,
            &mut ytmp,
            &y,
            hh,
            x + C9 * hh,
            8,
            &[(0, A91), (3, A94), (4, A95), (5, A96), (6, A97), (7, A98)],
        )?;
        stage(
            &mut rhs,
            &mut k,
            &mut ytmp,
            &y,
            hh,
            x + C10 * hh,
            9,
            &[(0, A101), (3, A104), (4, A105), (5, A106), (6, A107), (7, A108), (8, A109)],
        )?;
        stage(
            &mut rhs,
            &mut k,
            &mut ytmp,
            &y,
            hh,
            x + C11 * hh,
            10,
            &[(0, A111), (3, A114), (4, A115), (5, A116), (6, A117), (7, A118), (8, A119), (9, A1110)],
        )?;
        // 12th stage at the step end
        stage(
            &mut rhs,
            &mut k,
            &mut ytmp,
            &y,
            hh,
            t_end,
            11,
            &[
                (0, A121),
                (3, A124),
                (4, A125),
                (5, A126),
                (6, A127),
                (7, A128),
                (8, A129),
                (9, A1210),
                (10, A1211),
            ],
        )?;

        // 8th-order update and the two error estimates
        let mut err = 0.0;
        let mut err2 = 0.0;
        for i in 0..dim {
            let upd = k[0][i] * B1
                + k[5][i] * B6
                + k[6][i] * B7
                + k[7][i] * B8
                + k[8][i] * B9
                + k[9][i] * B10
                + k[10][i] * B11
                + k[11][i] * B12;
            y_new[i] = y[i] + upd * hh;
            let sk = opts.atol + opts.rtol * y[i].norm().max(y_new[i].norm());
            let e2 = upd - k[0][i] * BHH1 - k[8][i] * BHH2 - k[11][i] * BHH3;
            err2 += (e2.norm() / sk).powi(2);
            let e = k[0][i] * ER1
                + k[5][i] * ER6
                + k[6][i] * ER7
                + k[7][i] * ER8
                + k[8][i] * ER9
                + k[9][i] * ER10
                + k[10][i] * ER11
                + k[11][i] * ER12;
            err += (e.norm() / sk).powi(2);
        }
        let mut deno = err + 0.01 * err2;
        if deno <= 0.0 {
            deno = 1.0;
        }
        let err = hs * err * (1.0 / (deno * dim as f64)).sqrt();
        if !err.is_finite() {
            // non-finite state: shrink hard and retry
            rejected += 1;
            h = hs * 0.1;
            last_rejected = true;
            continue;
        }
        let fac11 = err.powf(0.125);
        let fac = (fac11 / SAFE).clamp(1.0 / FAC2, 1.0 / FAC1);
        let mut h_new = hs / fac;

        if err <= 1.0 {
            steps += 1;
            std::mem::swap(&mut y, &mut y_new);
            x = x_new;
            if landing {
                next_stop += 1;
            }
            if last_rejected {
                h_new = h_new.min(hs);
            }
            last_rejected = false;
            h = h_new.min(opts.h_max);
            let done = landing && next_stop == stops.len();
            if observer(x, &y) == Control::Stop && !done {
                return Ok(Outcome {
                    x,
                    y,
                    h_next: h,
                    steps,
                    rejected,
                    stopped: true,
                });
            }
            if done {
                return Ok(Outcome {
                    x,
                    y,
                    h_next: h,
                    steps,
                    rejected,
                    stopped: false,
                });
            }
            // first-same-as-last, except across a node where the coefficient
            // may jump: re-evaluate on the new step's side
            if landing {
                rhs(nudge(x, dir), &y, &mut k[0])?;
            } else {
                rhs(x, &y, &mut k[0])?;
            }
        } else {
            rejected += 1;
            last_rejected = true;
            h = hs / (1.0 / FAC1).min(fac11 / SAFE);
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn stage<F>(
    rhs: &mut F,
    k: &mut [Vec<Complex64>],
    ytmp: &mut [Complex64],
    y: &[Complex64],
    hh: f64,
    t: f64,
    target: usize,
    coeffs: &[(usize, f64)],
) -> Result<()>
where
    F: FnMut(f64, &[Complex64], &mut [Complex64]) -> Result<()>,
{
    for i in 0..y.len() {
        let mut acc = Complex64::new(0.0, 0.0);
        for &(j, c) in coeffs {
            acc += k[j][i] * c;
        }
        ytmp[i] = y[i] + acc * hh;
    }
    rhs(t, ytmp, &mut k[target])
}

#[allow(clippy::too_many_arguments)]
fn initial_step<F>(
    rhs: &mut F,
    x: f64,
    y: &[Complex64],
    f0: &[Complex64],
    dir: f64,
    opts: &OdeOptions,
    ytmp: &mut [Complex64],
    f1: &mut [Complex64],
) -> Result<f64>
where
    F: FnMut(f64, &[Complex64], &mut [Complex64]) -> Result<()>,
{
    let dnf = rms_norm(f0, y, opts.atol, opts.rtol);
    let dny = rms_norm(y, y, opts.atol, opts.rtol);
    let mut h = if dnf <= 1e-10 || dny <= 1e-10 { 1e-6 } else { 0.01 * dny / dnf };
    h = h.min(opts.h_max);
    for i in 0..y.len() {
        ytmp[i] = y[i] + f0[i] * (dir * h);
    }
    rhs(nudge(x + dir * h, -dir), ytmp, f1)?;
    let diff: Vec<Complex64> = f1.iter().zip(f0).map(|(a, b)| a - b).collect();
    let der2 = rms_norm(&diff, y, opts.atol, opts.rtol) / h;
    let der12 = der2.abs().max(dnf);
    let h1 = if der12 <= 1e-15 {
        (1e-6f64).max(h * 1e-3)
    } else {
        (0.01 / der12).powf(1.0 / 8.0)
    };
    Ok((100.0 * h).min(h1).min(opts.h_max))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn exponential_growth() {
        let out = integrate(
            |_x, y, dy| {
                dy[0] = y[0];
                Ok(())
            },
            0.0,
            &[c(1.0)],
            5.0,
            &[],
            &OdeOptions::default(),
            |_, _| Control::Continue,
        )
        .unwrap();
        let rel = (out.y[0].re - 5f64.exp()).abs() / 5f64.exp();
        assert!(rel < 1e-9, "rel = {rel}");
    }

    #[test]
    fn backward_harmonic() {
        // y'' = -y as a system, integrated from 0 to -3
        let out = integrate(
            |_x, y, dy| {
                dy[0] = y[1];
                dy[1] = -y[0];
                Ok(())
            },
            0.0,
            &[c(0.0), c(1.0)],
            -3.0,
            &[],
            &OdeOptions::default(),
            |_, _| Control::Continue,
        )
        .unwrap();
        assert!((out.y[0].re - (-3f64).sin()).abs() < 1e-9);
    }

    #[test]
    fn lands_on_nodes_and_respects_jumps() {
        // y' = 1 for x < 1, y' = 0 afterwards: exact answer 1 at x = 3
        let mut seen = Vec::new();
        let out = integrate(
            |x, _y, dy| {
                dy[0] = if x < 1.0 { c(1.0) } else { c(0.0) };
                Ok(())
            },
            0.0,
            &[c(0.0)],
            3.0,
            &[1.0],
            &OdeOptions::default(),
            |x, _| {
                seen.push(x);
                Control::Continue
            },
        )
        .unwrap();
        assert!(seen.contains(&1.0));
        assert!((out.y[0].re - 1.0).abs() < 1e-13);
    }

    #[test]
    fn nodes_a_few_ulps_apart() {
        // a grid point next to a breakpoint must not force a sub-ulp step
        let next = f64::from_bits(1f64.to_bits() + 1);
        let mut seen = Vec::new();
        let out = integrate(
            |x, _y, dy| {
                dy[0] = if x < 1.0 { c(1.0) } else { c(0.0) };
                Ok(())
            },
            0.0,
            &[c(0.0)],
            3.0,
            &[1.0, next],
            &OdeOptions::default(),
            |x, _| {
                seen.push(x);
                Control::Continue
            },
        )
        .unwrap();
        assert!(seen.contains(&1.0) && seen.contains(&next));
        assert!((out.y[0].re - 1.0).abs() < 1e-13);
    }

    #[test]
    fn observer_can_stop() {
        let out = integrate(
            |_x, y, dy| {
                dy[0] = y[0];
                Ok(())
            },
            0.0,
            &[c(1.0)],
            50.0,
            &[],
            &OdeOptions::default(),
            |_, y| if y[0].norm() > 100.0 { Control::Stop } else { Control::Continue },
        )
        .unwrap();
        assert!(out.stopped && out.x < 10.0);
    }
}
