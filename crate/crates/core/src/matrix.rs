//! Matrix-valued functions of `x`: symbolic (expression grids) and sampled
//! (Hermite interpolants of numerically computed paths).

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{HamsysError, Result};
use crate::expr::{self, Compiled, Expr};

pub type CMat = DMatrix<Complex64>;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// n×n grid of expressions.
#[derive(Debug, Clone)]
pub struct MatrixFunction {
    n: usize,
    entries: Vec<Expr>,
    compiled: Vec<Compiled>,
}

impl PartialEq for MatrixFunction {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.entries == other.entries
    }
}

impl MatrixFunction {
    /// Build from row-major entries.
    pub fn new(n: usize, entries: Vec<Expr>) -> Result<MatrixFunction> {
        if entries.len() != n * n {
            return Err(HamsysError::Dimension(format!(
                "expected {} entries for a {n}x{n} matrix, got {}",
                n * n,
                entries.len()
            )));
        }
        let compiled = entries.iter().map(Expr::compile).collect();
        Ok(MatrixFunction {
            n,
            entries,
            compiled,
        })
    }

    pub fn zeros(n: usize) -> MatrixFunction {
        MatrixFunction::new(n, vec![Expr::zero(); n * n]).expect("square")
    }

    pub fn identity(n: usize) -> MatrixFunction {
        let entries = (0..n * n)
            .map(|k| if k / n == k % n { Expr::one() } else { Expr::zero() })
            .collect();
        MatrixFunction::new(n, entries).expect("square")
    }

    pub fn diagonal(diag: Vec<Expr>) -> MatrixFunction {
        let n = diag.len();
        let mut entries = vec![Expr::zero(); n * n];
        for (k, d) in diag.into_iter().enumerate() {
            entries[k * n + k] = d;
        }
        MatrixFunction::new(n, entries).expect("square")
    }

    /// Parse from rows of expression strings; the grid must be n×n.
    pub fn parse_rows(n: usize, rows: &[Vec<String>], name: &str) -> Result<MatrixFunction> {
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            let shape: Vec<usize> = rows.iter().map(Vec::len).collect();
            return Err(HamsysError::Dimension(format!(
                "{name}: expected {n}x{n} grid, got {} rows with lengths {shape:?}",
                rows.len()
            )));
        }
        let mut entries = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            for (j, s) in row.iter().enumerate() {
                let e = Expr::parse(s).map_err(|err| match err {
                    HamsysError::Parse { pos, msg } => HamsysError::Parse {
                        pos,
                        msg: format!("{name}[{i}][{j}] \"{s}\": {msg}"),
                    },
                    other => other,
                })?;
                entries.push(e);
            }
        }
        MatrixFunction::new(n, entries)
    }

    /// Parse from a grid of literal strings (test and fixture convenience).
    pub fn from_strs(rows: &[&[&str]]) -> Result<MatrixFunction> {
        let n = rows.len();
        let rows: Vec<Vec<String>> = rows
            .iter()
            .map(|r| r.iter().map(|s| s.to_string()).collect())
            .collect();
        MatrixFunction::parse_rows(n, &rows, "matrix")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entry(&self, i: usize, j: usize) -> &Expr {
        &self.entries[i * self.n + j]
    }

    pub fn entries(&self) -> &[Expr] {
        &self.entries
    }

    pub fn to_rows(&self) -> Vec<Vec<String>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.entry(i, j).to_string()).collect())
            .collect()
    }

    pub fn is_constant(&self) -> bool {
        self.compiled.iter().all(|c| c.constant().is_some())
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Expr::is_zero)
    }

    pub fn evaluate(&self, x: f64) -> Result<CMat> {
        let mut m = CMat::zeros(self.n, self.n);
        self.evaluate_into(x, &mut m)?;
        Ok(m)
    }

    pub fn evaluate_into(&self, x: f64, out: &mut CMat) -> Result<()> {
        let n = self.n;
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] = self.compiled[i * n + j].eval(x)?;
            }
        }
        Ok(())
    }

    pub fn derivative(&self) -> MatrixFunction {
        MatrixFunction::new(self.n, self.entries.iter().map(Expr::derivative).collect())
            .expect("same shape")
    }

    pub fn breakpoints(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for e in &self.entries {
            e.breakpoints(&mut out);
        }
        out.sort_by(|a, b| a.partial_cmp(b).unwrap());
        out.dedup();
        out
    }

    /// Symbolic conjugate transpose.
    pub fn adjoint(&self) -> MatrixFunction {
        let n = self.n;
        let entries = (0..n * n)
            .map(|k| self.entry(k % n, k / n).conj())
            .collect();
        MatrixFunction::new(n, entries).expect("same shape")
    }

    /// Symbolic matrix product.
    pub fn mul(&self, other: &MatrixFunction) -> MatrixFunction {
        let n = self.n;
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = Expr::zero();
                for k in 0..n {
                    acc = expr::add(acc, expr::mul(self.entry(i, k).clone(), other.entry(k, j).clone()));
                }
                entries.push(acc);
            }
        }
        MatrixFunction::new(n, entries).expect("same shape")
    }

    pub fn add(&self, other: &MatrixFunction) -> MatrixFunction {
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| expr::add(a.clone(), b.clone()))
            .collect();
        MatrixFunction::new(self.n, entries).expect("same shape")
    }

    pub fn neg(&self) -> MatrixFunction {
        let entries = self.entries.iter().map(|a| expr::neg(a.clone())).collect();
        MatrixFunction::new(self.n, entries).expect("same shape")
    }

    /// Multiply every entry by a scalar expression.
    pub fn scale(&self, s: &Expr) -> MatrixFunction {
        let entries = self
            .entries
            .iter()
            .map(|a| expr::mul(s.clone(), a.clone()))
            .collect();
        MatrixFunction::new(self.n, entries).expect("same shape")
    }

    /// Reflection x -> -x of every entry.
    pub fn reflect(&self) -> MatrixFunction {
        MatrixFunction::new(self.n, self.entries.iter().map(Expr::reflect).collect())
            .expect("same shape")
    }

    /// Assemble a 2n×2n block matrix [[a, b], [c, d]].
    pub fn block2(a: &MatrixFunction, b: &MatrixFunction, c: &MatrixFunction, d: &MatrixFunction) -> MatrixFunction {
        let n = a.n;
        let m = 2 * n;
        let mut entries = vec![Expr::zero(); m * m];
        for i in 0..n {
            for j in 0..n {
                entries[i * m + j] = a.entry(i, j).clone();
                entries[i * m + n + j] = b.entry(i, j).clone();
                entries[(n + i) * m + j] = c.entry(i, j).clone();
                entries[(n + i) * m + n + j] = d.entry(i, j).clone();
            }
        }
        MatrixFunction::new(m, entries).expect("square")
    }

    /// Constant matrix function from numeric values (real and imaginary parts
    /// are emitted as literals).
    pub fn from_constant(m: &CMat) -> MatrixFunction {
        let n = m.nrows();
        let entries = (0..n * n)
            .map(|k| constant_expr(m[(k / n, k % n)]))
            .collect();
        MatrixFunction::new(n, entries).expect("square")
    }
}

/// Expression for a complex constant.
pub fn constant_expr(z: Complex64) -> Expr {
    let re = Expr::num(z.re);
    let im = expr::mul(Expr::num(z.im), Expr::I);
    expr::add(re, im)
}

/// Piecewise-cubic Hermite interpolant of a sampled matrix path.
#[derive(Debug, Clone)]
pub struct SampledMatrixFunction {
    n: usize,
    xs: Vec<f64>,
    values: Vec<CMat>,
    derivs: Vec<CMat>,
}

impl SampledMatrixFunction {
    /// `xs` must be strictly increasing; `values[k]` and `derivs[k]` are the
    /// matrix and its derivative at `xs[k]`.
    pub fn new(xs: Vec<f64>, values: Vec<CMat>, derivs: Vec<CMat>) -> Result<SampledMatrixFunction> {
        if xs.len() < 2 || xs.len() != values.len() || xs.len() != derivs.len() {
            return Err(HamsysError::Dimension("sampled path needs >= 2 consistent samples".into()));
        }
        if xs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(HamsysError::Spec("sample nodes must be strictly increasing".into()));
        }
        let n = values[0].nrows();
        Ok(SampledMatrixFunction {
            n,
            xs,
            values,
            derivs,
        })
    }

    /// Samples without derivative data: derivatives are estimated by
    /// second-order finite differences on the (non-uniform) nodes.
    pub fn from_values(xs: Vec<f64>, values: Vec<CMat>) -> Result<SampledMatrixFunction> {
        let m = xs.len();
        if m < 2 || values.len() != m {
            return Err(HamsysError::Dimension("sampled path needs >= 2 consistent samples".into()));
        }
        let mut derivs = Vec::with_capacity(m);
        for k in 0..m {
            let d = if m == 2 {
                (&values[1] - &values[0]) / c(xs[1] - xs[0], 0.0)
            } else {
                let (i0, i1, i2) = if k == 0 {
                    (0, 1, 2)
                } else if k == m - 1 {
                    (m - 3, m - 2, m - 1)
                } else {
                    (k - 1, k, k + 1)
                };
                let (x0, x1, x2) = (xs[i0], xs[i1], xs[i2]);
                let x = xs[k];
                // derivative of the quadratic Lagrange interpolant at x
                let w0 = ((x - x1) + (x - x2)) / ((x0 - x1) * (x0 - x2));
                let w1 = ((x - x0) + (x - x2)) / ((x1 - x0) * (x1 - x2));
                let w2 = ((x - x0) + (x - x1)) / ((x2 - x0) * (x2 - x1));
                &values[i0] * c(w0, 0.0) + &values[i1] * c(w1, 0.0) + &values[i2] * c(w2, 0.0)
            };
            derivs.push(d);
        }
        SampledMatrixFunction::new(xs, values, derivs)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn derivs(&self) -> &[CMat] {
        &self.derivs
    }

    pub fn nodes(&self) -> &[f64] {
        &self.xs
    }

    pub fn values(&self) -> &[CMat] {
        &self.values
    }

    pub fn span(&self) -> (f64, f64) {
        (self.xs[0], *self.xs.last().unwrap())
    }

    fn locate(&self, x: f64) -> Result<usize> {
        let (a, b) = self.span();
        let tol = 1e-12 * (1.0 + a.abs().max(b.abs()));
        if x < a - tol || x > b + tol {
            return Err(HamsysError::Domain {
                x,
                msg: format!("outside sampled span [{a}, {b}]"),
            });
        }
        let k = match self.xs.binary_search_by(|p| p.partial_cmp(&x).unwrap()) {
            Ok(k) => k.min(self.xs.len() - 2),
            Err(k) => k.saturating_sub(1).min(self.xs.len() - 2),
        };
        Ok(k)
    }

    pub fn evaluate(&self, x: f64) -> Result<CMat> {
        let k = self.locate(x)?;
        let (x0, x1) = (self.xs[k], self.xs[k + 1]);
        let h = x1 - x0;
        let t = ((x - x0) / h).clamp(0.0, 1.0);
        let h00 = 2.0 * t * t * t - 3.0 * t * t + 1.0;
        let h10 = t * t * t - 2.0 * t * t + t;
        let h01 = -2.0 * t * t * t + 3.0 * t * t;
        let h11 = t * t * t - t * t;
        Ok(&self.values[k] * c(h00, 0.0)
            + &self.derivs[k] * c(h10 * h, 0.0)
            + &self.values[k + 1] * c(h01, 0.0)
            + &self.derivs[k + 1] * c(h11 * h, 0.0))
    }

    pub fn evaluate_derivative(&self, x: f64) -> Result<CMat> {
        let k = self.locate(x)?;
        let (x0, x1) = (self.xs[k], self.xs[k + 1]);
        let h = x1 - x0;
        let t = ((x - x0) / h).clamp(0.0, 1.0);
        let d00 = (6.0 * t * t - 6.0 * t) / h;
        let d10 = 3.0 * t * t - 4.0 * t + 1.0;
        let d01 = (-6.0 * t * t + 6.0 * t) / h;
        let d11 = 3.0 * t * t - 2.0 * t;
        Ok(&self.values[k] * c(d00, 0.0)
            + &self.derivs[k] * c(d10, 0.0)
            + &self.values[k + 1] * c(d01, 0.0)
            + &self.derivs[k + 1] * c(d11, 0.0))
    }
}

/// A coefficient of a system: symbolic or sampled.
#[derive(Debug, Clone)]
pub enum Coefficient {
    Symbolic {
        f: MatrixFunction,
        df: Arc<MatrixFunction>,
    },
    Sampled(Arc<SampledMatrixFunction>),
}

impl Coefficient {
    pub fn symbolic(f: MatrixFunction) -> Coefficient {
        let df = Arc::new(f.derivative());
        Coefficient::Symbolic { f, df }
    }

    pub fn constant(m: &CMat) -> Coefficient {
        Coefficient::symbolic(MatrixFunction::from_constant(m))
    }

    pub fn sampled(s: SampledMatrixFunction) -> Coefficient {
        Coefficient::Sampled(Arc::new(s))
    }

    pub fn n(&self) -> usize {
        match self {
            Coefficient::Symbolic { f, .. } => f.n(),
            Coefficient::Sampled(s) => s.n(),
        }
    }

    pub fn as_symbolic(&self) -> Option<&MatrixFunction> {
        match self {
            Coefficient::Symbolic { f, .. } => Some(f),
            Coefficient::Sampled(_) => None,
        }
    }

    pub fn is_constant(&self) -> bool {
        match self {
            Coefficient::Symbolic { f, .. } => f.is_constant(),
            Coefficient::Sampled(_) => false,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Coefficient::Symbolic { f, .. } => f.is_zero(),
            Coefficient::Sampled(_) => false,
        }
    }

    pub fn evaluate(&self, x: f64) -> Result<CMat> {
        match self {
            Coefficient::Symbolic { f, .. } => f.evaluate(x),
            Coefficient::Sampled(s) => s.evaluate(x),
        }
    }

    pub fn evaluate_into(&self, x: f64, out: &mut CMat) -> Result<()> {
        match self {
            Coefficient::Symbolic { f, .. } => f.evaluate_into(x, out),
            Coefficient::Sampled(s) => {
                *out = s.evaluate(x)?;
                Ok(())
            }
        }
    }

    pub fn evaluate_derivative(&self, x: f64) -> Result<CMat> {
        match self {
            Coefficient::Symbolic { df, .. } => df.evaluate(x),
            Coefficient::Sampled(s) => s.evaluate_derivative(x),
        }
    }

    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            Coefficient::Symbolic { f, .. } => f.breakpoints(),
            Coefficient::Sampled(_) => Vec::new(),
        }
    }

    /// Sampled span if this coefficient is only defined on a sub-interval.
    pub fn sampled_span(&self) -> Option<(f64, f64)> {
        match self {
            Coefficient::Symbolic { .. } => None,
            Coefficient::Sampled(s) => Some(s.span()),
        }
    }
}

impl From<MatrixFunction> for Coefficient {
    fn from(f: MatrixFunction) -> Self {
        Coefficient::symbolic(f)
    }
}
