//! Adaptive Gauss–Kronrod (7/15) quadrature for scalar and vector
//! integrands on finite intervals.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{HamsysError, Result};

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// Quadrature settings.
#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            rel_tol: 1e-12,
            abs_tol: 1e-14,
            max_intervals: 4000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct QuadResult {
    pub value: Vec<f64>,
    pub error: f64,
    pub intervals: usize,
}

struct Piece {
    a: f64,
    b: f64,
    value: Vec<f64>,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.partial_cmp(&other.error).unwrap_or(Ordering::Equal)
    }
}

fn gk15<F>(f: &mut F, a: f64, b: f64, dim: usize) -> Result<Piece>
where
    F: FnMut(f64) -> Result<Vec<f64>>,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut kron = vec![0.0; dim];
    let mut gauss = vec![0.0; dim];
    let fc = f(center)?;
    for d in 0..dim {
        kron[d] = fc[d] * WGK[7];
        gauss[d] = fc[d] * WG[3];
    }
    for (k, &xk) in XGK.iter().enumerate().take(7) {
        let dx = half * xk;
        let f1 = f(center - dx)?;
        let f2 = f(center + dx)?;
        for d in 0..dim {
            let s = f1[d] + f2[d];
            kron[d] += WGK[k] * s;
            if k % 2 == 1 {
                gauss[d] += WG[k / 2] * s;
            }
        }
    }
    let mut err: f64 = 0.0;
    for d in 0..dim {
        kron[d] *= half;
        gauss[d] *= half;
        err = err.max((kron[d] - gauss[d]).abs());
    }
    Ok(Piece {
        a,
        b,
        value: kron,
        error: err,
    })
}

/// Integrate a vector-valued function over `[a, b]`; `breakpoints` inside
/// the interval split the initial partition.
pub fn integrate_vec<F>(mut f: F, a: f64, b: f64, dim: usize, breakpoints: &[f64], opts: &QuadOptions) -> Result<QuadResult>
where
    F: FnMut(f64) -> Result<Vec<f64>>,
{
    if !(a.is_finite() && b.is_finite()) {
        return Err(HamsysError::Precondition("quadrature needs finite limits".into()));
    }
    if a == b {
        return Ok(QuadResult {
            value: vec![0.0; dim],
            error: 0.0,
            intervals: 0,
        });
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let mut cuts: Vec<f64> = breakpoints.iter().copied().filter(|&p| p > lo && p < hi).collect();
    cuts.push(lo);
    cuts.push(hi);
    cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    cuts.dedup();
    let mut heap = BinaryHeap::new();
    for w in cuts.windows(2) {
        heap.push(gk15(&mut f, w[0], w[1], dim)?);
    }
    loop {
        let total: Vec<f64> = (0..dim).map(|d| heap.iter().map(|p| p.value[d]).sum()).collect();
        let err: f64 = heap.iter().map(|p| p.error).sum();
        let scale = total.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if err <= opts.abs_tol.max(opts.rel_tol * scale) || heap.len() >= opts.max_intervals {
            return Ok(QuadResult {
                value: total.into_iter().map(|v| v * sign).collect(),
                error: err,
                intervals: heap.len(),
            });
        }
        let worst = heap.pop().unwrap();
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // cannot split further
            heap.push(Piece { error: 0.0, ..worst });
            continue;
        }
        heap.push(gk15(&mut f, worst.a, mid, dim)?);
        heap.push(gk15(&mut f, mid, worst.b, dim)?);
    }
}

/// Integrate a real scalar function over `[a, b]`.
pub fn integrate<F>(mut f: F, a: f64, b: f64, breakpoints: &[f64], opts: &QuadOptions) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let r = integrate_vec(|x| Ok(vec![f(x)?]), a, b, 1, breakpoints, opts)?;
    Ok((r.value[0], r.error))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let (v, _) = integrate(|x| Ok(x.powi(9) - 3.0 * x * x), 0.0, 2.0, &[], &QuadOptions::default()).unwrap();
        assert!((v - (102.4 - 8.0)).abs() < 1e-12);
    }

    #[test]
    fn jump_with_breakpoint() {
        let (v, _) = integrate(|x| Ok(if x < 1.0 { 1.0 } else { 0.0 }), 0.0, 3.0, &[1.0], &QuadOptions::default()).unwrap();
        assert!((v - 1.0).abs() < 1e-14);
    }

    #[test]
    fn reversed_limits() {
        let (v, _) = integrate(|x| Ok(x.exp()), 1.0, 0.0, &[], &QuadOptions::default()).unwrap();
        assert!((v + (1f64.exp() - 1.0)).abs() < 1e-13);
    }
}
