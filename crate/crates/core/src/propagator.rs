//! Fundamental solutions `Y(x, λ)` of `J Y' + B Y = λ H Y`, `Y(x0) = I`.
//!
//! The propagator is kept in windows. On window `k` a well-scaled matrix
//! `Z_k` is integrated from an orthonormal start `Q_{k-1}`; when its norm
//! passes the rescale threshold (or a checkpoint is reached) it is factored
//! `Z_k(end) = Q_k R_k` and the next window starts from `Q_k`. Then
//! `Y(x) = Z_k(x) P_{k-1}` with `P_k = R_k ⋯ R_1`, and `P_k` is stored as
//! `exp(log_scale) · unit` so exponential growth never overflows.

use std::sync::{Arc, OnceLock};

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{HamsysError, Result};
use crate::linalg;
use crate::matrix::{c, CMat};
use crate::ode::{self, Control, OdeOptions};
use crate::system::SystemSpec;

/// Scale threshold used when the caller does not choose one.
pub const DEFAULT_RESCALE: f64 = 1e8;

/// A matrix stored as `exp(log_scale) · unit`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledMatrix {
    pub log_scale: f64,
    pub unit: CMat,
}

impl ScaledMatrix {
    pub fn identity(n: usize) -> ScaledMatrix {
        ScaledMatrix {
            log_scale: 0.0,
            unit: CMat::identity(n, n),
        }
    }

    /// Normalise so that the largest entry of `unit` has modulus one.
    pub fn from_matrix(m: CMat) -> ScaledMatrix {
        let mut s = ScaledMatrix { log_scale: 0.0, unit: m };
        s.renormalize();
        s
    }

    fn renormalize(&mut self) {
        let a = linalg::max_abs(&self.unit);
        if a > 0.0 && a.is_finite() {
            self.unit /= c(a, 0.0);
            self.log_scale += a.ln();
        }
    }

    /// Natural log of the spectral norm.
    pub fn log_norm(&self) -> f64 {
        let n = linalg::norm2(&self.unit);
        if n == 0.0 {
            f64::NEG_INFINITY
        } else {
            self.log_scale + n.ln()
        }
    }

    /// The plain matrix; fails if it is not representable.
    pub fn to_matrix(&self) -> Result<CMat> {
        if self.log_scale > 700.0 {
            return Err(HamsysError::Overflow(format!(
                "matrix of magnitude e^{:.1} is not representable",
                self.log_scale
            )));
        }
        Ok(&self.unit * c(self.log_scale.exp(), 0.0))
    }

    /// Running sum of scaled terms.
    pub fn accumulate(&mut self, other: &ScaledMatrix) {
        if other.unit.iter().all(|z| *z == c(0.0, 0.0)) {
            return;
        }
        if self.unit.iter().all(|z| *z == c(0.0, 0.0)) {
            *self = other.clone();
            return;
        }
        if other.log_scale > self.log_scale {
            let f = (self.log_scale - other.log_scale).exp();
            self.unit = &self.unit * c(f, 0.0) + &other.unit;
            self.log_scale = other.log_scale;
        } else {
            let f = (other.log_scale - self.log_scale).exp();
            self.unit += &other.unit * c(f, 0.0);
        }
        self.renormalize();
    }
}

/// Evaluates `A(x) = J(x)⁻¹ (λ H(x) − B(x))` and `H(x)`.
#[derive(Debug, Clone)]
pub struct Generator {
    system: SystemSpec,
    lambda: Complex64,
    j_inv: Option<CMat>,
}

impl Generator {
    pub fn new(system: &SystemSpec, lambda: Complex64) -> Result<Generator> {
        let j_inv = if system.j.is_constant() {
            let j = system.j.evaluate(system.interval.x0)?;
            Some(linalg::inverse(&j).ok_or_else(|| HamsysError::Singular {
                x: system.interval.x0,
                what: "J".into(),
            })?)
        } else {
            None
        };
        Ok(Generator {
            system: system.clone(),
            lambda,
            j_inv,
        })
    }

    pub fn system(&self) -> &SystemSpec {
        &self.system
    }

    pub fn lambda(&self) -> Complex64 {
        self.lambda
    }

    pub fn j_inverse(&self, x: f64) -> Result<CMat> {
        match &self.j_inv {
            Some(m) => Ok(m.clone()),
            None => {
                let j = self.system.j.evaluate(x)?;
                linalg::inverse(&j).ok_or_else(|| HamsysError::Singular { x, what: "J".into() })
            }
        }
    }

    /// `(A(x), H(x))`.
    pub fn evaluate(&self, x: f64) -> Result<(CMat, CMat)> {
        let h = self.system.h.evaluate(x)?;
        let b = self.system.b.evaluate(x)?;
        let jinv = self.j_inverse(x)?;
        let a = jinv * (&h * self.lambda - b);
        Ok((a, h))
    }
}

/// Settings for a fundamental-solution computation.
#[derive(Debug, Clone)]
pub struct PropagatorOptions {
    pub ode: OdeOptions,
    pub rescale_threshold: f64,
    /// Points where a window must end (e.g. truncation points).
    pub checkpoints: Vec<f64>,
    /// Keep every accepted step for faster dense evaluation.
    pub store_dense: bool,
    /// Integrate the window Gram matrices `∫ Z* H Z`.
    pub gram: bool,
    /// Stop a branch once the accumulated log-scale exceeds this value.
    pub max_log_scale: Option<f64>,
}

impl Default for PropagatorOptions {
    fn default() -> Self {
        PropagatorOptions {
            ode: OdeOptions::default(),
            rescale_threshold: DEFAULT_RESCALE,
            checkpoints: Vec::new(),
            store_dense: false,
            gram: false,
            max_log_scale: None,
        }
    }
}

/// One rescaling window.
#[derive(Debug, Clone)]
pub struct Window {
    pub start: f64,
    pub end: f64,
    /// Orthonormal start value of `Z` on this window.
    pub q0: CMat,
    /// `Z` at the window end (before refactoring).
    pub z_end: CMat,
    /// Upper-triangular factor with `z_end = q_next · r`.
    pub r: CMat,
    /// `∫ Z* H Z` over the window (when requested).
    pub gram: Option<CMat>,
    /// `P_{k-1}`: the accumulated factor at the window start.
    pub factor: ScaledMatrix,
    dense: Vec<(f64, CMat)>,
}

impl Window {
    fn contains(&self, x: f64) -> bool {
        let (lo, hi) = if self.start <= self.end {
            (self.start, self.end)
        } else {
            (self.end, self.start)
        };
        x >= lo && x <= hi
    }
}

/// Windows on one side of x0.
#[derive(Debug, Clone)]
pub struct Branch {
    pub direction: f64,
    pub windows: Vec<Window>,
    /// Requested end of the branch.
    pub target: f64,
    /// Where integration actually stopped (differs from `target` when the
    /// log-scale cap was hit).
    pub reached: f64,
    pub steps: usize,
}

impl Branch {
    /// Accumulated factor `P` at the branch end.
    pub fn end_factor(&self, n: usize) -> ScaledMatrix {
        match self.windows.last() {
            None => ScaledMatrix::identity(n),
            Some(w) => {
                let mut f = ScaledMatrix {
                    log_scale: w.factor.log_scale,
                    unit: &w.r * &w.factor.unit,
                };
                f.renormalize();
                f
            }
        }
    }

    pub fn truncated(&self) -> bool {
        self.reached != self.target
    }
}

/// Windowed, rescaled fundamental solution on `[alpha, beta]`.
#[derive(Debug)]
pub struct FundamentalSolution {
    gen: Generator,
    pub x0: f64,
    pub alpha: f64,
    pub beta: f64,
    pub right: Branch,
    pub left: Branch,
    opts: PropagatorOptions,
    nodes: Vec<f64>,
    companion: OnceLock<Arc<FundamentalSolution>>,
}

fn state_from(z: &CMat, gram: bool) -> Vec<Complex64> {
    let n = z.nrows();
    let mut v: Vec<Complex64> = z.as_slice().to_vec();
    if gram {
        v.extend(std::iter::repeat(c(0.0, 0.0)).take(n * n));
    }
    v
}

/// Smallest and largest column norm of Z.
fn z_column_range(state: &[Complex64], n: usize) -> (f64, f64) {
    (0..n)
        .map(|j| state[j * n..(j + 1) * n].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
        .fold((f64::INFINITY, 0.0), |(lo, hi), c| (lo.min(c), hi.max(c)))
}

/// Right-hand side for `Z' = A Z` (and `G' = ±Z* H Z`).
fn matrix_rhs(
    gen: &Generator,
    n: usize,
    gram: bool,
    dir: f64,
) -> impl FnMut(f64, &[Complex64], &mut [Complex64]) -> Result<()> + '_ {
    move |x, y, dy| {
        let (a, h) = gen.evaluate(x)?;
        let z = CMat::from_column_slice(n, n, &y[..n * n]);
        let dz = &a * &z;
        dy[..n * n].copy_from_slice(dz.as_slice());
        if gram {
            let g = z.adjoint() * &h * &z * c(dir, 0.0);
            dy[n * n..].copy_from_slice(g.as_slice());
        }
        for v in dy.iter() {
            if !v.re.is_finite() || !v.im.is_finite() {
                return Err(HamsysError::Overflow(format!("non-finite derivative at x = {x}")));
            }
        }
        Ok(())
    }
}

impl FundamentalSolution {
    /// Solve on `[alpha, beta]` (which must contain x0 and lie in the
    /// interval).
    pub fn new(
        system: &SystemSpec,
        lambda: Complex64,
        alpha: f64,
        beta: f64,
        opts: PropagatorOptions,
    ) -> Result<FundamentalSolution> {
        let iv = system.interval;
        let x0 = iv.x0;
        if !(alpha <= x0 && x0 <= beta) {
            return Err(HamsysError::Precondition(format!(
                "span [{alpha}, {beta}] must contain x0 = {x0}"
            )));
        }
        if !alpha.is_finite() || !beta.is_finite() {
            return Err(HamsysError::Precondition("propagation span must be finite".into()));
        }
        if alpha < iv.a || beta > iv.b {
            return Err(HamsysError::Precondition(format!(
                "span [{alpha}, {beta}] leaves the interval [{}, {}]",
                iv.a, iv.b
            )));
        }
        let gen = Generator::new(system, lambda)?;
        let nodes = system.breakpoints();
        let right = Self::solve_branch(&gen, x0, beta, &nodes, &opts)?;
        let left = Self::solve_branch(&gen, x0, alpha, &nodes, &opts)?;
        Ok(FundamentalSolution {
            gen,
            x0,
            alpha,
            beta,
            right,
            left,
            opts,
            nodes,
            companion: OnceLock::new(),
        })
    }

    /// Default options, given span.
    pub fn solve(system: &SystemSpec, lambda: Complex64, alpha: f64, beta: f64) -> Result<FundamentalSolution> {
        FundamentalSolution::new(system, lambda, alpha, beta, PropagatorOptions::default())
    }

    fn solve_branch(gen: &Generator, x0: f64, target: f64, nodes: &[f64], opts: &PropagatorOptions) -> Result<Branch> {
        let n = gen.system.n;
        let dir = if target >= x0 { 1.0 } else { -1.0 };
        let mut branch = Branch {
            direction: dir,
            windows: Vec::new(),
            target,
            reached: x0,
            steps: 0,
        };
        if target == x0 {
            return Ok(branch);
        }
        let mut checkpoints: Vec<f64> = opts
            .checkpoints
            .iter()
            .copied()
            .filter(|&t| (t - x0) * dir > 0.0 && (target - t) * dir > 0.0)
            .collect();
        checkpoints.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut all_nodes: Vec<f64> = nodes.to_vec();
        all_nodes.extend(&checkpoints);

        let mut q = CMat::identity(n, n);
        let mut factor = ScaledMatrix::identity(n);
        let mut x = x0;
        let mut ode_opts = opts.ode;
        loop {
            let state0 = state_from(&q, opts.gram);
            let mut dense = Vec::new();
            if opts.store_dense {
                dense.push((x, q.clone()));
            }
            let threshold = opts.rescale_threshold;
            let store = opts.store_dense;
            let cps = &checkpoints;
            let out = ode::integrate(
                matrix_rhs(gen, n, opts.gram, dir),
                x,
                &state0,
                target,
                &all_nodes,
                &ode_opts,
                |xs, y| {
                    if store {
                        dense.push((xs, CMat::from_column_slice(n, n, &y[..n * n])));
                    }
                    // restart on growth and on decay alike, so that a
                    // decaying column never sinks below the error tolerance
                    let (lo, hi) = z_column_range(y, n);
                    if hi > threshold || lo * threshold < 1.0 || cps.contains(&xs) {
                        Control::Stop
                    } else {
                        Control::Continue
                    }
                },
            )?;
            branch.steps += out.steps;
            ode_opts.h_init = Some(out.h_next);
            let z_end = CMat::from_column_slice(n, n, &out.y[..n * n]);
            let gram = if opts.gram {
                let g = CMat::from_column_slice(n, n, &out.y[n * n..]);
                Some(linalg::hermitian_part(&g))
            } else {
                None
            };
            let (q_next, r) = linalg::qr_positive(&z_end);
            if (0..n).any(|k| r[(k, k)].norm() == 0.0 || !r[(k, k)].re.is_finite()) {
                return Err(HamsysError::Singular {
                    x: out.x,
                    what: "propagator lost rank".into(),
                });
            }
            let next_factor = {
                let mut f = ScaledMatrix {
                    log_scale: factor.log_scale,
                    unit: &r * &factor.unit,
                };
                f.renormalize();
                f
            };
            branch.windows.push(Window {
                start: x,
                end: out.x,
                q0: q,
                z_end,
                r,
                gram,
                factor,
                dense,
            });
            x = out.x;
            branch.reached = x;
            q = q_next;
            factor = next_factor;
            if !out.stopped {
                break;
            }
            if let Some(cap) = opts.max_log_scale {
                if factor.log_norm() > cap {
                    break;
                }
            }
        }
        Ok(branch)
    }

    pub fn n(&self) -> usize {
        self.gen.system.n
    }

    pub fn lambda(&self) -> Complex64 {
        self.gen.lambda
    }

    pub fn system(&self) -> &SystemSpec {
        &self.gen.system
    }

    pub fn generator(&self) -> &Generator {
        &self.gen
    }

    pub fn options(&self) -> &PropagatorOptions {
        &self.opts
    }

    pub fn branch(&self, direction: f64) -> &Branch {
        if direction >= 0.0 {
            &self.right
        } else {
            &self.left
        }
    }

    /// Total accepted ODE steps.
    pub fn steps(&self) -> usize {
        self.right.steps + self.left.steps
    }

    /// Largest accumulated log-magnitude on either branch.
    pub fn max_log_scale(&self) -> f64 {
        let n = self.n();
        self.right.end_factor(n).log_norm().max(self.left.end_factor(n).log_norm())
    }

    /// Scaled `Z` at x inside the given window (re-integrated from the
    /// nearest stored state).
    fn z_at(&self, branch: &Branch, w: &Window, x: f64) -> Result<CMat> {
        let n = self.n();
        if x == w.end {
            return Ok(w.z_end.clone());
        }
        let dir = branch.direction;
        let (x_start, z_start) = w
            .dense
            .iter()
            .rev()
            .find(|(xs, _)| (x - xs) * dir >= 0.0)
            .map(|(xs, z)| (*xs, z.clone()))
            .unwrap_or((w.start, w.q0.clone()));
        if x_start == x {
            return Ok(z_start);
        }
        let mut ode_opts = self.opts.ode;
        ode_opts.h_init = None;
        let out = ode::integrate(
            matrix_rhs(&self.gen, n, false, dir),
            x_start,
            z_start.as_slice(),
            x,
            &self.nodes,
            &ode_opts,
            |_, _| Control::Continue,
        )?;
        Ok(CMat::from_column_slice(n, n, &out.y))
    }

    /// `Y(x, λ)` in scaled form.
    pub fn evaluate(&self, x: f64) -> Result<ScaledMatrix> {
        let n = self.n();
        if x == self.x0 {
            return Ok(ScaledMatrix::identity(n));
        }
        let branch = if x > self.x0 { &self.right } else { &self.left };
        let w = branch
            .windows
            .iter()
            .find(|w| w.contains(x))
            .ok_or_else(|| HamsysError::Precondition(format!("x = {x} outside the solved span")))?;
        let z = self.z_at(branch, w, x)?;
        let mut m = ScaledMatrix {
            log_scale: w.factor.log_scale,
            unit: z * &w.factor.unit,
        };
        m.renormalize();
        Ok(m)
    }

    /// `Y(x, λ)` as a plain matrix (errors when not representable).
    pub fn matrix(&self, x: f64) -> Result<CMat> {
        self.evaluate(x)?.to_matrix()
    }

    /// Solution at `λ̄` on the same span with the same options (computed
    /// once, on demand). For real λ this is the solution itself.
    pub fn companion(self: &Arc<Self>) -> Result<Arc<FundamentalSolution>> {
        if self.gen.lambda.im == 0.0 {
            return Ok(self.clone());
        }
        if let Some(c) = self.companion.get() {
            return Ok(c.clone());
        }
        let comp = Arc::new(FundamentalSolution::new(
            &self.gen.system,
            self.gen.lambda.conj(),
            self.alpha,
            self.beta,
            self.opts.clone(),
        )?);
        let _ = self.companion.set(comp.clone());
        Ok(self.companion.get().cloned().unwrap_or(comp))
    }

    /// Relative defect of the identity `Y(x,λ̄)* J(x) Y(x,λ) = J(x0)`:
    /// `‖Y(λ̄)* J Y(λ) − J(x0)‖ / max(1, ‖Y(λ̄)‖‖Y(λ)‖)`, evaluated with the
    /// scales recombined so exponential growth does not overflow.
    pub fn symplectic_defect(self: &Arc<Self>, x: f64) -> Result<f64> {
        let comp = self.companion()?;
        let y = self.evaluate(x)?;
        let yb = comp.evaluate(x)?;
        let jx = self.gen.system.j.evaluate(x)?;
        let j0 = self.gen.system.j.evaluate(self.x0)?;
        Ok(symplectic_defect_scaled(&y, &yb, &jx, &j0))
    }
}

/// Defect of `Yb* J Y = J0` relative to `max(1, ‖Yb‖‖Y‖)`.
pub fn symplectic_defect_scaled(y: &ScaledMatrix, yb: &ScaledMatrix, jx: &CMat, j0: &CMat) -> f64 {
    let t = y.log_scale + yb.log_scale;
    let k = yb.unit.adjoint() * jx * &y.unit;
    let back = (-t).exp();
    let d = if back.is_finite() {
        linalg::norm2(&(k - j0 * c(back, 0.0)))
    } else {
        // both solutions tiny: compare in the unscaled frame
        return linalg::norm2(&(yb.to_matrix().unwrap_or_else(|_| yb.unit.clone()).adjoint() * jx * &y.unit - j0));
    };
    let ny = linalg::norm2(&y.unit) * linalg::norm2(&yb.unit);
    d / ny.max(back)
}

/// A vector solution sampled on a grid with derivative samples.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub lambda: Complex64,
    pub xs: Vec<f64>,
    pub ys: Vec<DVector<Complex64>>,
    pub dys: Vec<DVector<Complex64>>,
}

impl Trajectory {
    /// Cubic Hermite interpolation.
    pub fn evaluate(&self, x: f64) -> Result<DVector<Complex64>> {
        let (lo, hi) = (self.xs[0], *self.xs.last().unwrap());
        if x < lo || x > hi {
            return Err(HamsysError::Precondition(format!("x = {x} outside trajectory span [{lo}, {hi}]")));
        }
        let i = match self.xs.binary_search_by(|v| v.partial_cmp(&x).unwrap()) {
            Ok(i) => return Ok(self.ys[i].clone()),
            Err(i) => i - 1,
        };
        let (x0, x1) = (self.xs[i], self.xs[i + 1]);
        let h = x1 - x0;
        let t = (x - x0) / h;
        let h00 = 2.0 * t.powi(3) - 3.0 * t * t + 1.0;
        let h10 = t.powi(3) - 2.0 * t * t + t;
        let h01 = -2.0 * t.powi(3) + 3.0 * t * t;
        let h11 = t.powi(3) - t * t;
        Ok(&self.ys[i] * c(h00, 0.0)
            + &self.dys[i] * c(h10 * h, 0.0)
            + &self.ys[i + 1] * c(h01, 0.0)
            + &self.dys[i + 1] * c(h11 * h, 0.0))
    }

    /// Largest residual `‖J y′ + B y − λ H y − H g‖ / (1 + ‖y‖)` over the
    /// samples.
    pub fn residual<G>(&self, system: &SystemSpec, g: G) -> Result<f64>
    where
        G: Fn(f64) -> Result<DVector<Complex64>>,
    {
        let mut worst: f64 = 0.0;
        for ((x, y), dy) in self.xs.iter().zip(&self.ys).zip(&self.dys) {
            let j = system.j.evaluate(*x)?;
            let b = system.b.evaluate(*x)?;
            let h = system.h.evaluate(*x)?;
            let gv = g(*x)?;
            let r = &j * dy + &b * y - &h * y * self.lambda - &h * gv;
            worst = worst.max(r.norm() / (1.0 + y.norm()));
        }
        Ok(worst)
    }
}

/// Solve `J y′ + B y = λ H y + H g`, `y(x0) = 0` on `[alpha, beta]` by
/// variation of constants: `y(x) = Y(x,λ) J(x0)⁻¹ ∫_{x0}^x Y(t,λ̄)* H g dt`.
/// `Y(·,λ)`, `Y(·,λ̄)` and the integral are advanced together on one grid.
/// Extra `grid` points are included in the output.
pub fn variation_of_constants<G>(
    system: &SystemSpec,
    lambda: Complex64,
    g: G,
    alpha: f64,
    beta: f64,
    grid: &[f64],
    ode_opts: &OdeOptions,
) -> Result<Trajectory>
where
    G: Fn(f64) -> Result<DVector<Complex64>>,
{
    let n = system.n;
    let x0 = system.interval.x0;
    if !(alpha <= x0 && x0 <= beta) || alpha < system.interval.a || beta > system.interval.b {
        return Err(HamsysError::Precondition(format!(
            "span [{alpha}, {beta}] must contain x0 and lie in the interval"
        )));
    }
    let gen = Generator::new(system, lambda)?;
    let genb = Generator::new(system, lambda.conj())?;
    let j0inv = gen.j_inverse(x0)?;
    let mut nodes = system.breakpoints();
    nodes.extend_from_slice(grid);
    let nn = n * n;

    let rhs = |x: f64, s: &[Complex64], ds: &mut [Complex64]| -> Result<()> {
        let (a, h) = gen.evaluate(x)?;
        let (ab, _) = genb.evaluate(x)?;
        let y = CMat::from_column_slice(n, n, &s[..nn]);
        let yb = CMat::from_column_slice(n, n, &s[nn..2 * nn]);
        let gv = g(x)?;
        ds[..nn].copy_from_slice((&a * &y).as_slice());
        ds[nn..2 * nn].copy_from_slice((&ab * &yb).as_slice());
        let w = yb.adjoint() * (&h * gv);
        ds[2 * nn..].copy_from_slice(w.as_slice());
        Ok(())
    };

    let mut samples: Vec<(f64, Vec<Complex64>)> = Vec::new();
    let mut init = Vec::with_capacity(2 * nn + n);
    init.extend_from_slice(CMat::identity(n, n).as_slice());
    init.extend_from_slice(CMat::identity(n, n).as_slice());
    init.extend(std::iter::repeat(c(0.0, 0.0)).take(n));
    samples.push((x0, init.clone()));
    for end in [beta, alpha] {
        if end == x0 {
            continue;
        }
        let mut overflow = false;
        ode::integrate(rhs, x0, &init, end, &nodes, ode_opts, |x, s| {
            if s.iter().any(|z| z.norm() > 1e150) {
                overflow = true;
                return Control::Stop;
            }
            samples.push((x, s.to_vec()));
            Control::Continue
        })?;
        if overflow {
            return Err(HamsysError::Overflow(
                "variation-of-constants integrand exceeds 1e150; shorten the span".into(),
            ));
        }
    }
    samples.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    samples.dedup_by(|a, b| a.0 == b.0);

    let mut xs = Vec::with_capacity(samples.len());
    let mut ys = Vec::with_capacity(samples.len());
    let mut dys = Vec::with_capacity(samples.len());
    for (x, s) in samples {
        let y = CMat::from_column_slice(n, n, &s[..nn]);
        let yb = CMat::from_column_slice(n, n, &s[nn..2 * nn]);
        let w = DVector::from_column_slice(&s[2 * nn..]);
        let (a, h) = gen.evaluate(x)?;
        let gv = g(x)?;
        let yv = &y * (&j0inv * &w);
        // y′ = A y + Y J(x0)⁻¹ Y(λ̄)* H g
        let dy = &a * &yv + &y * (&j0inv * (yb.adjoint() * (&h * gv)));
        xs.push(x);
        ys.push(yv);
        dys.push(dy);
    }
    Ok(Trajectory { lambda, xs, ys, dys })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::MatrixFunction;
    use crate::system::IntervalSpec;

    fn rotation_system() -> SystemSpec {
        let j = MatrixFunction::from_strs(&[&["0", "1"], &["-1", "0"]]).unwrap();
        let b = MatrixFunction::from_strs(&[&["-1", "0"], &["0", "-1"]]).unwrap();
        let h = MatrixFunction::from_strs(&[&["cos(x)^2", "sin(x)*cos(x)"], &["sin(x)*cos(x)", "sin(x)^2"]]).unwrap();
        SystemSpec::new(IntervalSpec::finite(0.0, 10.0, 0.0).unwrap(), j, b, h, "rot").unwrap()
    }

    #[test]
    fn rotation_closed_form() {
        let s = rotation_system();
        let sol = FundamentalSolution::solve(&s, c(0.0, 0.0), 0.0, 10.0).unwrap();
        for &x in &[0.5, 3.0, std::f64::consts::PI, 9.9] {
            let y = sol.matrix(x).unwrap();
            let (cs, sn) = (x.cos(), x.sin());
            assert!((y[(0, 0)] - c(cs, 0.0)).norm() < 1e-9);
            assert!((y[(0, 1)] - c(-sn, 0.0)).norm() < 1e-9);
            assert!((y[(1, 0)] - c(sn, 0.0)).norm() < 1e-9);
        }
    }

    #[test]
    fn growth_is_rescaled() {
        // y1' = y1 for λ = i with J = diag(i, -i), H = I
        let j = MatrixFunction::from_strs(&[&["i", "0"], &["0", "-i"]]).unwrap();
        let h = MatrixFunction::identity(2);
        let s = SystemSpec::new(IntervalSpec::half_line_positive(0.0), j, MatrixFunction::zeros(2), h, "d").unwrap();
        let sol = FundamentalSolution::solve(&s, c(0.0, 1.0), 0.0, 800.0).unwrap();
        let y = sol.evaluate(800.0).unwrap();
        assert!((y.log_norm() - 800.0).abs() < 1e-6);
        assert!(sol.right.windows.len() > 10);
    }
}
