//! Gauge transformations `(J, B, H) ↦ (U*JU, U*JU′ + U*BU, U*HU)` and the
//! structural reductions built from them.

use num_complex::Complex64;

use crate::error::{HamsysError, Result};
use crate::expr::{self, Expr};
use crate::linalg;
use crate::matrix::{c, CMat, Coefficient, MatrixFunction, SampledMatrixFunction};
use crate::ode::{self, Control, OdeOptions};
use crate::propagator::Generator;
use crate::system::{BlockLayout, SturmLiouvilleSpec, SystemSpec};

/// Default tolerance for gauge constructions.
pub const TAU_GAUGE: f64 = 1e-8;
/// Default minimal eigenvalue gap of `iJ(x)` for constant-J reduction.
pub const GAMMA_GAP: f64 = 1e-6;

/// An invertible matrix path `U(x)` with derivative.
#[derive(Debug, Clone)]
pub enum GaugeMap {
    Symbolic(MatrixFunction),
    Sampled(SampledMatrixFunction),
}

impl GaugeMap {
    pub fn identity(n: usize) -> GaugeMap {
        GaugeMap::Symbolic(MatrixFunction::identity(n))
    }

    pub fn n(&self) -> usize {
        match self {
            GaugeMap::Symbolic(u) => u.n(),
            GaugeMap::Sampled(u) => u.n(),
        }
    }

    pub fn evaluate(&self, x: f64) -> Result<CMat> {
        match self {
            GaugeMap::Symbolic(u) => u.evaluate(x),
            GaugeMap::Sampled(u) => u.evaluate(x),
        }
    }

    pub fn evaluate_derivative(&self, x: f64) -> Result<CMat> {
        match self {
            GaugeMap::Symbolic(u) => u.derivative().evaluate(x),
            GaugeMap::Sampled(u) => u.evaluate_derivative(x),
        }
    }

    /// `U⁻¹` (symbolically when possible; `(U⁻¹)′ = −U⁻¹U′U⁻¹` otherwise).
    pub fn inverse(&self) -> Result<GaugeMap> {
        match self {
            GaugeMap::Symbolic(u) => Ok(GaugeMap::Symbolic(symbolic_inverse(u)?)),
            GaugeMap::Sampled(u) => {
                let mut vals = Vec::with_capacity(u.nodes().len());
                let mut ders = Vec::with_capacity(u.nodes().len());
                for ((x, v), d) in u.nodes().iter().zip(u.values()).zip(u.derivs()) {
                    let inv = linalg::inverse(v).ok_or_else(|| HamsysError::Singular {
                        x: *x,
                        what: "gauge U".into(),
                    })?;
                    ders.push(-(&inv * d * &inv));
                    vals.push(inv);
                }
                Ok(GaugeMap::Sampled(SampledMatrixFunction::new(u.nodes().to_vec(), vals, ders)?))
            }
        }
    }
}

/// Symbolic inverse: numeric for constant matrices, adjugate/determinant
/// (cofactor expansion) up to 4×4 otherwise.
pub fn symbolic_inverse(m: &MatrixFunction) -> Result<MatrixFunction> {
    let n = m.n();
    if m.is_constant() {
        let v = m.evaluate(0.0)?;
        let inv = linalg::inverse(&v).ok_or_else(|| HamsysError::Singular {
            x: 0.0,
            what: "constant matrix".into(),
        })?;
        return Ok(MatrixFunction::from_constant(&inv));
    }
    if n > 4 {
        return Err(HamsysError::Precondition(format!(
            "symbolic inverse of a non-constant {n}x{n} matrix is not supported"
        )));
    }
    let rows: Vec<usize> = (0..n).collect();
    let det = cofactor_det(m, &rows, &rows);
    let mut entries = vec![Expr::zero(); n * n];
    for i in 0..n {
        for j in 0..n {
            // inverse_{ij} = (-1)^{i+j} minor_{ji} / det
            let r: Vec<usize> = (0..n).filter(|&k| k != j).collect();
            let cidx: Vec<usize> = (0..n).filter(|&k| k != i).collect();
            let minor = if n == 1 { Expr::one() } else { cofactor_det(m, &r, &cidx) };
            let signed = if (i + j) % 2 == 0 { minor } else { expr::neg(minor) };
            entries[i * n + j] = expr::div(signed, det.clone());
        }
    }
    MatrixFunction::new(n, entries)
}

fn cofactor_det(m: &MatrixFunction, rows: &[usize], cols: &[usize]) -> Expr {
    if rows.len() == 1 {
        return m.entry(rows[0], cols[0]).clone();
    }
    let mut acc = Expr::zero();
    for (k, &col) in cols.iter().enumerate() {
        let e = m.entry(rows[0], col);
        if e.is_zero() {
            continue;
        }
        let sub_cols: Vec<usize> = cols.iter().copied().filter(|&x| x != col).collect();
        let term = expr::mul(e.clone(), cofactor_det(m, &rows[1..], &sub_cols));
        acc = if k % 2 == 0 { expr::add(acc, term) } else { expr::sub(acc, term) };
    }
    acc
}

fn transform_at(s: &SystemSpec, u: &CMat, du: &CMat, x: f64) -> Result<(CMat, CMat, CMat, CMat, CMat)> {
    let j = s.j.evaluate(x)?;
    let dj = s.j.evaluate_derivative(x)?;
    let b = s.b.evaluate(x)?;
    let h = s.h.evaluate(x)?;
    let dh = s.h.evaluate_derivative(x)?;
    let us = u.adjoint();
    let jt = &us * &j * u;
    let bt = &us * &j * du + &us * &b * u;
    let ht = &us * &h * u;
    let djt = du.adjoint() * &j * u + &us * &dj * u + &us * &j * du;
    let dht = du.adjoint() * &h * u + &us * &dh * u + &us * &h * du;
    Ok((jt, bt, ht, djt, dht))
}

/// Apply a gauge. Symbolic inputs give a symbolic system; otherwise the
/// result is sampled on the gauge's nodes.
pub fn apply_gauge(s: &SystemSpec, u: &GaugeMap) -> Result<SystemSpec> {
    if u.n() != s.n {
        return Err(HamsysError::Dimension(format!("gauge is {0}x{0}, system is {1}x{1}", u.n(), s.n)));
    }
    let label = format!("{} (gauged)", s.label);
    match (u, s.j.as_symbolic(), s.b.as_symbolic(), s.h.as_symbolic()) {
        (GaugeMap::Symbolic(um), Some(j), Some(b), Some(h)) => {
            check_invertible_symbolic(um, s)?;
            let us = um.adjoint();
            let du = um.derivative();
            let jt = us.mul(j).mul(um);
            let bt = us.mul(j).mul(&du).add(&us.mul(b).mul(um));
            let ht = us.mul(h).mul(um);
            SystemSpec::new(s.interval, jt, bt, ht, label)
        }
        (GaugeMap::Sampled(um), ..) => {
            let xs = um.nodes().to_vec();
            sampled_transform(s, &xs, um.values(), um.derivs(), label)
        }
        (GaugeMap::Symbolic(um), ..) => {
            // symbolic gauge on a sampled system: sample on the system's nodes
            let xs = sampled_nodes(s).ok_or_else(|| HamsysError::Precondition("no sample nodes".into()))?;
            let mut us = Vec::with_capacity(xs.len());
            let mut dus = Vec::with_capacity(xs.len());
            let du = um.derivative();
            for &x in &xs {
                us.push(um.evaluate(x)?);
                dus.push(du.evaluate(x)?);
            }
            sampled_transform(s, &xs, &us, &dus, label)
        }
    }
}

fn sampled_nodes(s: &SystemSpec) -> Option<Vec<f64>> {
    for coef in [&s.h, &s.b, &s.j] {
        if let Coefficient::Sampled(m) = coef {
            return Some(m.nodes().to_vec());
        }
    }
    None
}

fn check_invertible_symbolic(u: &MatrixFunction, s: &SystemSpec) -> Result<()> {
    let plan = crate::system::SamplePlan::for_interval(&s.interval, 200, 256.0, &s.breakpoints());
    for &x in &plan.points {
        let v = u.evaluate(x)?;
        let d = linalg::determinant(&v).norm();
        let scale = v.norm().powi(s.n as i32).max(1e-300);
        if d <= 1e-12 * scale {
            return Err(HamsysError::Singular { x, what: "gauge U".into() });
        }
    }
    Ok(())
}

fn sampled_transform(s: &SystemSpec, xs: &[f64], us: &[CMat], dus: &[CMat], label: String) -> Result<SystemSpec> {
    let mut jv = Vec::with_capacity(xs.len());
    let mut jd = Vec::with_capacity(xs.len());
    let mut bv = Vec::with_capacity(xs.len());
    let mut hv = Vec::with_capacity(xs.len());
    let mut hd = Vec::with_capacity(xs.len());
    for (k, &x) in xs.iter().enumerate() {
        let d = linalg::determinant(&us[k]).norm();
        if d <= 1e-12 * us[k].norm().powi(s.n as i32).max(1e-300) {
            return Err(HamsysError::Singular { x, what: "gauge U".into() });
        }
        let (jt, bt, ht, djt, dht) = transform_at(s, &us[k], &dus[k], x)?;
        jv.push(jt);
        jd.push(djt);
        bv.push(bt);
        hv.push(ht);
        hd.push(dht);
    }
    let j = SampledMatrixFunction::new(xs.to_vec(), jv, jd)?;
    let b = SampledMatrixFunction::from_values(xs.to_vec(), bv)?;
    let h = SampledMatrixFunction::new(xs.to_vec(), hv, hd)?;
    SystemSpec::new(
        s.interval,
        Coefficient::sampled(j),
        Coefficient::sampled(b),
        Coefficient::sampled(h),
        label,
    )
}

/// Sample grid on `[alpha, beta]`: `count` uniform nodes, x0, and every
/// breakpoint together with a point just left of it (so jumps are
/// represented on both sides).
pub fn sample_grid(s: &SystemSpec, alpha: f64, beta: f64, count: usize) -> Vec<f64> {
    let count = count.max(2);
    let mut xs: Vec<f64> = (0..count)
        .map(|k| alpha + (beta - alpha) * k as f64 / (count - 1) as f64)
        .collect();
    xs.push(s.interval.x0.clamp(alpha, beta));
    for bp in s.breakpoints() {
        if bp > alpha && bp < beta {
            xs.push(bp);
            xs.push(bp - 1e-9 * (1.0 + bp.abs()));
        }
    }
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    xs.dedup();
    xs
}

/// Result of `canonicalize`.
#[derive(Debug, Clone)]
pub struct CanonicalForm {
    pub system: SystemSpec,
    pub gauge: GaugeMap,
    /// Largest ‖U*JU′ + U*BU‖ on the grid (the neglected B̃).
    pub max_b_residual: f64,
    /// Largest ‖U*JU − J(x0)‖ on the grid.
    pub max_j_defect: f64,
}

/// Canonical form with the gauge `U = Y(·, 0)`: J̃ = J(x0), B̃ = 0 and
/// H̃ = Y*HY sampled on `[alpha, beta]`. Requires constant J.
pub fn canonicalize(s: &SystemSpec, alpha: f64, beta: f64, count: usize) -> Result<CanonicalForm> {
    if !s.j.is_constant() {
        return Err(HamsysError::Precondition(
            "canonicalize requires constant J; apply reduce_constant_J first".into(),
        ));
    }
    let n = s.n;
    let x0 = s.interval.x0;
    let j0 = s.j.evaluate(x0)?;
    if s.b.is_zero() {
        return Ok(CanonicalForm {
            system: s.clone(),
            gauge: GaugeMap::identity(n),
            max_b_residual: 0.0,
            max_j_defect: 0.0,
        });
    }
    let xs = sample_grid(s, alpha, beta, count);
    let ys = sample_fundamental(s, c(0.0, 0.0), &xs, &OdeOptions::default())?;
    let gen = Generator::new(s, c(0.0, 0.0))?;
    let mut hv = Vec::with_capacity(xs.len());
    let mut hd = Vec::with_capacity(xs.len());
    let mut uv = Vec::with_capacity(xs.len());
    let mut ud = Vec::with_capacity(xs.len());
    let mut max_b: f64 = 0.0;
    let mut max_j: f64 = 0.0;
    for (k, &x) in xs.iter().enumerate() {
        let y = &ys[k];
        let (a, _) = gen.evaluate(x)?;
        let dy = &a * y;
        let (jt, bt, ht, _, dht) = transform_at(s, y, &dy, x)?;
        max_b = max_b.max(linalg::norm2(&bt));
        max_j = max_j.max(linalg::norm2(&(jt - &j0)));
        hv.push(ht);
        hd.push(dht);
        uv.push(y.clone());
        ud.push(dy);
    }
    let h = SampledMatrixFunction::new(xs.clone(), hv, hd)?;
    let system = SystemSpec::new(
        s.interval,
        MatrixFunction::from_constant(&j0),
        MatrixFunction::zeros(n),
        Coefficient::sampled(h),
        format!("{} (canonical)", s.label),
    )?;
    Ok(CanonicalForm {
        system,
        gauge: GaugeMap::Sampled(SampledMatrixFunction::new(xs, uv, ud)?),
        max_b_residual: max_b,
        max_j_defect: max_j,
    })
}

/// `Y(x, λ)` at the given (sorted) nodes, integrated without rescaling.
pub fn sample_fundamental(s: &SystemSpec, lambda: Complex64, xs: &[f64], opts: &OdeOptions) -> Result<Vec<CMat>> {
    let n = s.n;
    let x0 = s.interval.x0;
    let gen = Generator::new(s, lambda)?;
    let mut nodes = s.breakpoints();
    nodes.extend_from_slice(xs);
    let mut out: Vec<Option<CMat>> = vec![None; xs.len()];
    let rhs = |x: f64, y: &[Complex64], dy: &mut [Complex64]| -> Result<()> {
        let (a, _) = gen.evaluate(x)?;
        let z = CMat::from_column_slice(n, n, y);
        dy.copy_from_slice((&a * z).as_slice());
        Ok(())
    };
    let id = CMat::identity(n, n);
    for (k, &x) in xs.iter().enumerate() {
        if x == x0 {
            out[k] = Some(id.clone());
        }
    }
    let lo = xs.first().copied().unwrap_or(x0).min(x0);
    let hi = xs.last().copied().unwrap_or(x0).max(x0);
    for end in [hi, lo] {
        if end == x0 {
            continue;
        }
        ode::integrate(rhs, x0, id.as_slice(), end, &nodes, opts, |x, y| {
            if let Ok(k) = xs.binary_search_by(|p| p.partial_cmp(&x).unwrap()) {
                out[k] = Some(CMat::from_column_slice(n, n, y));
            }
            Control::Continue
        })?;
    }
    out.into_iter()
        .enumerate()
        .map(|(k, v)| {
            v.ok_or_else(|| HamsysError::Inconsistent(format!("node {} was not reached", xs[k])))
        })
        .collect()
}

/// Result of `reduce_constant_j`.
#[derive(Debug, Clone)]
pub struct ConstantJReduction {
    pub system: SystemSpec,
    pub gauge: GaugeMap,
    /// Largest ‖U*JU − J(x0)‖ on the grid.
    pub max_j_defect: f64,
    /// Smallest eigenvalue gap of iJ(x) seen on the grid.
    pub min_gap: f64,
}

/// Eigen-frame of `iJ(x)` aligned to a reference frame: each cluster of
/// (numerically) equal eigenvalues is rotated by the unitary polar factor
/// of `V_ref* V`, which fixes eigenvector phases continuously.
fn aligned_frame(j: &CMat, reference: Option<&CMat>, clusters: &[(usize, usize)]) -> (Vec<f64>, CMat) {
    let ij = j * c(0.0, 1.0);
    let (vals, mut vecs) = linalg::hermitian_eigen(&ij);
    if let Some(vr) = reference {
        for &(lo, hi) in clusters {
            let k = hi - lo;
            let v = vecs.columns(lo, k).into_owned();
            let r = vr.columns(lo, k).into_owned();
            let overlap = v.adjoint() * &r;
            let svd = overlap.svd(true, true);
            let polar = svd.u.unwrap() * svd.v_t.unwrap();
            let aligned = v * polar;
            vecs.columns_mut(lo, k).copy_from(&aligned);
        }
    }
    (vals, vecs)
}

fn clusters_of(vals: &[f64], gap: f64) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut lo = 0;
    for k in 1..=vals.len() {
        if k == vals.len() || vals[k] - vals[k - 1] >= gap {
            out.push((lo, k));
            lo = k;
        }
    }
    out
}

/// Reduce to constant J: `U = V |D|^{-1/2} W` from `iJ(x) = V D V*`, with
/// `W = |D(x0)|^{1/2} V(x0)*` so that `U(x0) = I` and `U*JU = J(x0)`.
/// `U′` is computed by a five-point difference of the locally aligned
/// frame. Eigenvalue crossings (gap below `gamma_gap`) are refused.
pub fn reduce_constant_j(s: &SystemSpec, alpha: f64, beta: f64, count: usize, gamma_gap: f64) -> Result<ConstantJReduction> {
    let n = s.n;
    let x0 = s.interval.x0;
    let j0 = s.j.evaluate(x0)?;
    if s.j.is_constant() {
        return Ok(ConstantJReduction {
            system: s.clone(),
            gauge: GaugeMap::identity(n),
            max_j_defect: 0.0,
            min_gap: f64::INFINITY,
        });
    }
    let (vals0, _) = linalg::hermitian_eigen(&(&j0 * c(0.0, 1.0)));
    if vals0.iter().any(|v| v.abs() < 1e-10) {
        return Err(HamsysError::Singular { x: x0, what: "J(x0)".into() });
    }
    let clusters = clusters_of(&vals0, gamma_gap);
    let (_, v0) = aligned_frame(&j0, None, &clusters);
    let d0: Vec<f64> = vals0.clone();
    let w = CMat::from_diagonal(&nalgebra::DVector::from_iterator(n, d0.iter().map(|d| c(d.abs().sqrt(), 0.0))))
        * v0.adjoint();

    let xs = sample_grid(s, alpha, beta, count);
    let k0 = xs
        .iter()
        .position(|&x| x == x0)
        .ok_or_else(|| HamsysError::Inconsistent("x0 missing from grid".into()))?;
    let mut frames: Vec<Option<CMat>> = vec![None; xs.len()];
    let mut min_gap = f64::INFINITY;

    let u_from = |vals: &[f64], v: &CMat| -> CMat {
        let dinv = CMat::from_diagonal(&nalgebra::DVector::from_iterator(
            n,
            vals.iter().map(|d| c(1.0 / d.abs().sqrt(), 0.0)),
        ));
        v * dinv * &w
    };

    let check_gap = |vals: &[f64], x: f64| -> Result<f64> {
        let mut g = f64::INFINITY;
        for (ci, &(lo, hi)) in clusters.iter().enumerate() {
            if vals[hi - 1] - vals[lo] >= gamma_gap {
                return Err(HamsysError::Refused(format!(
                    "eigenvalues of iJ(x) split at x = {x}; a degenerate cluster does not persist"
                )));
            }
            if ci + 1 < clusters.len() {
                let gap = vals[hi] - vals[hi - 1];
                g = g.min(gap);
                if gap < gamma_gap {
                    return Err(HamsysError::Refused(format!(
                        "eigenvalue crossing of iJ(x) at x = {x} (gap {gap:e} < {gamma_gap:e})"
                    )));
                }
            }
        }
        if vals.iter().zip(&vals0).any(|(a, b)| a.signum() != b.signum()) {
            return Err(HamsysError::Refused(format!("signature of iJ(x) changes at x = {x}")));
        }
        Ok(g)
    };

    frames[k0] = Some(v0.clone());
    // march outward from x0 in both directions, aligning to the neighbour
    let order: Vec<Vec<usize>> = vec![((k0 + 1)..xs.len()).collect(), (0..k0).rev().collect()];
    for seq in order {
        let mut prev = v0.clone();
        for k in seq {
            let j = s.j.evaluate(xs[k])?;
            let (vals, v) = aligned_frame(&j, Some(&prev), &clusters);
            min_gap = min_gap.min(check_gap(&vals, xs[k])?);
            frames[k] = Some(v.clone());
            prev = v;
        }
    }

    let mut uv = Vec::with_capacity(xs.len());
    let mut ud = Vec::with_capacity(xs.len());
    let mut max_j: f64 = 0.0;
    for (k, &x) in xs.iter().enumerate() {
        let frame = frames[k].clone().unwrap();
        let j = s.j.evaluate(x)?;
        let (vals, _) = linalg::hermitian_eigen(&(&j * c(0.0, 1.0)));
        let u = u_from(&vals, &frame);
        // five-point stencil on the frame aligned to this node, kept
        // inside [alpha, beta]
        let delta = 1e-3;
        let offsets: [f64; 5] = if x - 2.0 * delta < alpha {
            [0.0, 1.0, 2.0, 3.0, 4.0]
        } else if x + 2.0 * delta > beta {
            [0.0, -1.0, -2.0, -3.0, -4.0]
        } else {
            [-2.0, -1.0, 0.0, 1.0, 2.0]
        };
        let weights: [f64; 5] = if offsets[0] == -2.0 {
            [1.0, -8.0, 0.0, 8.0, -1.0]
        } else if offsets[1] > 0.0 {
            [-25.0, 48.0, -36.0, 16.0, -3.0]
        } else {
            [25.0, -48.0, 36.0, -16.0, 3.0]
        };
        let mut du = CMat::zeros(n, n);
        for (off, wt) in offsets.iter().zip(weights) {
            if wt == 0.0 {
                continue;
            }
            let ue = if *off == 0.0 {
                u.clone()
            } else {
                let je = s.j.evaluate(x + off * delta)?;
                let (ve, fe) = aligned_frame(&je, Some(&frame), &clusters);
                u_from(&ve, &fe)
            };
            du += ue * c(wt / (12.0 * delta), 0.0);
        }
        max_j = max_j.max(linalg::norm2(&(u.adjoint() * &j * &u - &j0)));
        uv.push(u);
        ud.push(du);
    }
    let gauge = SampledMatrixFunction::new(xs.clone(), uv.clone(), ud.clone())?;
    let mut sys = sampled_transform(s, &xs, &uv, &ud, format!("{} (constant J)", s.label))?;
    sys.j = Coefficient::constant(&j0);
    Ok(ConstantJReduction {
        system: sys,
        gauge: GaugeMap::Sampled(gauge),
        max_j_defect: max_j,
        min_gap,
    })
}

fn i_times(m: &MatrixFunction) -> MatrixFunction {
    m.scale(&Expr::I)
}

fn neg_i_times(m: &MatrixFunction) -> MatrixFunction {
    m.scale(&expr::neg(Expr::I))
}

/// `[[0, iI], [iI, 0]]` of size 2n.
pub fn j_tilde(n: usize) -> MatrixFunction {
    let ii = i_times(&MatrixFunction::identity(n));
    let z = MatrixFunction::zeros(n);
    MatrixFunction::block2(&z, &ii, &ii, &z)
}

/// Sturm–Liouville embedding: J̃ = [[0, iI], [iI, 0]],
/// B̃ = [[R − Q*AQ, −iQ*A], [iAQ, −A]], H̃ = diag(H, 0).
pub fn embed_sturm_liouville(sl: &SturmLiouvilleSpec) -> Result<SystemSpec> {
    let n = sl.n;
    let v = sl.v();
    let qs_a = sl.q.adjoint().mul(&sl.a);
    let a_q = sl.a.mul(&sl.q);
    let b = MatrixFunction::block2(&v, &neg_i_times(&qs_a), &i_times(&a_q), &sl.a.neg());
    let z = MatrixFunction::zeros(n);
    let h = MatrixFunction::block2(&sl.h, &z, &z, &z);
    let sys = SystemSpec::new(sl.interval, j_tilde(n), b, h, sl.label.clone())?;
    // in the (J*, −J) block layout the inner J is −iI
    let inner = neg_i_times(&MatrixFunction::identity(n));
    Ok(sys.with_block(BlockLayout {
        inner_j: inner.into(),
        a: sl.a.clone().into(),
        h: sl.h.clone().into(),
        v: v.into(),
    }))
}

/// Square of a system: J̃ = [[0, iI], [iI, 0]],
/// B̃ = [[0, iB*J⁻¹], [iJ⁻¹B, −(J⁻¹)*HJ⁻¹]], H̃ = diag(H, 0).
pub fn square_system(s: &SystemSpec) -> Result<SystemSpec> {
    let (j, b, h) = match (s.j.as_symbolic(), s.b.as_symbolic(), s.h.as_symbolic()) {
        (Some(j), Some(b), Some(h)) => (j, b, h),
        _ => return Err(HamsysError::Precondition("square_system requires symbolic coefficients".into())),
    };
    let n = s.n;
    let jinv = symbolic_inverse(j)?;
    let ur = i_times(&b.adjoint().mul(&jinv));
    let ll = i_times(&jinv.mul(b));
    let lr = jinv.adjoint().mul(h).mul(&jinv).neg();
    let z = MatrixFunction::zeros(n);
    let bt = MatrixFunction::block2(&z, &ur, &ll, &lr);
    let ht = MatrixFunction::block2(h, &z, &z, &z);
    SystemSpec::new(s.interval, j_tilde(n), bt, ht, format!("{} (square)", s.label))
}

/// Block data (J, V, B, A, H) of the 2n-system
/// J₁ = [[0, J*], [−J, 0]], B₁ = [[V, B], [B* − J′, −A]], H̃ = diag(H, 0).
#[derive(Debug, Clone)]
pub struct BlockData {
    pub j: MatrixFunction,
    pub v: MatrixFunction,
    pub b: MatrixFunction,
    pub a: MatrixFunction,
    pub h: MatrixFunction,
}

/// Which normal form to emit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockForm {
    /// The general layout J₁, B₁.
    General,
    /// J₂ = [[0, iI], [iI, 0]].
    Second,
    /// J₃ = [[0, −I], [I, 0]].
    Third,
}

impl BlockData {
    fn check(&self, iv: &crate::system::IntervalSpec) -> Result<()> {
        let n = self.j.n();
        for (name, m) in [("V", &self.v), ("B", &self.b), ("A", &self.a), ("H", &self.h)] {
            if m.n() != n {
                return Err(HamsysError::Dimension(format!("block {name} must be {n}x{n}")));
            }
        }
        let plan = crate::system::SamplePlan::for_interval(iv, 200, 256.0, &[]);
        for &x in &plan.points {
            let v = self.v.evaluate(x)?;
            let a = self.a.evaluate(x)?;
            let h = self.h.evaluate(x)?;
            let j = self.j.evaluate(x)?;
            if (&v - v.adjoint()).norm() > 1e-10 {
                return Err(HamsysError::Validation(format!("V is not hermitian at x = {x}")));
            }
            if (&a - a.adjoint()).norm() > 1e-10 {
                return Err(HamsysError::Validation(format!("A is not hermitian at x = {x}")));
            }
            if (&h - h.adjoint()).norm() > 1e-10 || linalg::hermitian_eigenvalues(&h)[0] < -1e-10 {
                return Err(HamsysError::Validation(format!("H is not positive semidefinite at x = {x}")));
            }
            if linalg::determinant(&j).norm() <= 1e-12 * j.norm().powi(n as i32).max(1e-300) {
                return Err(HamsysError::Singular { x, what: "J".into() });
            }
        }
        Ok(())
    }
}

/// Build the block system in the requested normal form.
pub fn block_normal_form(d: &BlockData, interval: crate::system::IntervalSpec, form: BlockForm, label: &str) -> Result<SystemSpec> {
    d.check(&interval)?;
    let n = d.j.n();
    let z = MatrixFunction::zeros(n);
    let layout = BlockLayout {
        inner_j: d.j.clone().into(),
        a: d.a.clone().into(),
        h: d.h.clone().into(),
        v: d.v.clone().into(),
    };
    let ht = MatrixFunction::block2(&d.h, &z, &z, &z);
    let dj = d.j.derivative();
    let (jt, bt) = match form {
        BlockForm::General => {
            let jt = MatrixFunction::block2(&z, &d.j.adjoint(), &d.j.neg(), &z);
            let bt = MatrixFunction::block2(&d.v, &d.b, &d.b.adjoint().add(&dj.neg()), &d.a.neg());
            (jt, bt)
        }
        BlockForm::Second | BlockForm::Third => {
            let jinv = symbolic_inverse(&d.j)?;
            let jinv_s = jinv.adjoint();
            // (B − (J*)′)(J⁻¹)*  and  J⁻¹(B* − J′)
            let ur = d.b.add(&d.j.adjoint().derivative().neg()).mul(&jinv_s);
            let ll = jinv.mul(&d.b.adjoint().add(&dj.neg()));
            let lr = jinv.mul(&d.a).mul(&jinv_s).neg();
            if form == BlockForm::Second {
                (j_tilde(n), MatrixFunction::block2(&d.v, &i_times(&ur), &neg_i_times(&ll), &lr))
            } else {
                let minus_i = MatrixFunction::identity(n).neg();
                let jt = MatrixFunction::block2(&z, &minus_i, &MatrixFunction::identity(n), &z);
                (jt, MatrixFunction::block2(&d.v, &ur.neg(), &ll.neg(), &lr))
            }
        }
    };
    Ok(SystemSpec::new(interval, jt, bt, ht, label)?.with_block(layout))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::IntervalSpec;

    #[test]
    fn inverse_2x2() {
        let m = MatrixFunction::from_strs(&[&["1+x", "0"], &["x", "2"]]).unwrap();
        let inv = symbolic_inverse(&m).unwrap();
        let p = m.evaluate(0.7).unwrap() * inv.evaluate(0.7).unwrap();
        assert!((p - CMat::identity(2, 2)).norm() < 1e-14);
    }

    #[test]
    fn sl_embedding_scalar() {
        let one = MatrixFunction::identity(1);
        let sl = SturmLiouvilleSpec::new(
            IntervalSpec::half_line_positive(0.0),
            one.clone(),
            MatrixFunction::zeros(1),
            MatrixFunction::zeros(1),
            one,
            "sl",
        )
        .unwrap();
        let s = embed_sturm_liouville(&sl).unwrap();
        let b = s.b.evaluate(0.3).unwrap();
        assert_eq!(b, CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)]));
    }
}
