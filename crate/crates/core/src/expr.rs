//! Scalar expression language for coefficient entries.
//!
//! Grammar (whitespace-insensitive):
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := ('-' | '+') unary | power
//! power   := primary ('^' unary)?
//! primary := number | 'x' | 'pi' | 'e' | 'i'
//!          | func '(' expr ')'
//!          | 'piecewise' '(' 'x' '<' expr ',' expr ',' expr ')'
//!          | '(' expr ')'
//! func    := exp | log | sin | cos | sinh | cosh | sqrt | abs
//! ```
//!
//! Expressions are complex-valued functions of the real variable `x`.
//! `log`, `sqrt` and non-integer powers of negative reals are domain errors
//! rather than silently jumping onto a branch.

use std::fmt;

use num_complex::Complex64;

use crate::error::{HamsysError, Result};

/// Elementary functions admitted by the grammar.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Exp,
    Log,
    Sin,
    Cos,
    Sinh,
    Cosh,
    Sqrt,
    Abs,
}

impl Func {
    pub const ALL: [Func; 8] = [
        Func::Exp,
        Func::Log,
        Func::Sin,
        Func::Cos,
        Func::Sinh,
        Func::Cosh,
        Func::Sqrt,
        Func::Abs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
        }
    }

    fn from_name(s: &str) -> Option<Func> {
        Func::ALL.iter().copied().find(|f| f.name() == s)
    }

    fn apply(self, z: Complex64, x: f64) -> Result<Complex64> {
        let real = z.im == 0.0;
        Ok(match self {
            Func::Exp => {
                if real {
                    Complex64::new(z.re.exp(), 0.0)
                } else {
                    z.exp()
                }
            }
            Func::Log => {
                if real && z.re <= 0.0 {
                    return Err(HamsysError::Domain {
                        x,
                        msg: format!("log of nonpositive argument {}", z.re),
                    });
                }
                if real {
                    Complex64::new(z.re.ln(), 0.0)
                } else {
                    z.ln()
                }
            }
            Func::Sqrt => {
                if real && z.re < 0.0 {
                    return Err(HamsysError::Domain {
                        x,
                        msg: format!("sqrt of negative argument {}", z.re),
                    });
                }
                if real {
                    Complex64::new(z.re.sqrt(), 0.0)
                } else {
                    z.sqrt()
                }
            }
            Func::Sin => z.sin(),
            Func::Cos => z.cos(),
            Func::Sinh => z.sinh(),
            Func::Cosh => z.cosh(),
            Func::Abs => Complex64::new(z.norm(), 0.0),
        })
    }
}

/// Abstract syntax tree of an expression in `x`.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    /// Nonnegative real literal as written (negation is a separate node).
    Num(f64),
    X,
    Pi,
    E,
    /// The imaginary unit.
    I,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
    /// `piecewise(x < c, then, else)`: `then` on `x < c`, `else` on `x >= c`.
    Piecewise {
        threshold: Box<Expr>,
        then: Box<Expr>,
        otherwise: Box<Expr>,
    },
}

impl Expr {
    pub fn num(v: f64) -> Expr {
        if v < 0.0 {
            Expr::Neg(Box::new(Expr::Num(-v)))
        } else {
            Expr::Num(v)
        }
    }

    pub fn zero() -> Expr {
        Expr::Num(0.0)
    }

    pub fn one() -> Expr {
        Expr::Num(1.0)
    }

    /// Parse an expression string.
    pub fn parse(src: &str) -> Result<Expr> {
        Parser::new(src)?.parse_all()
    }

    /// True when the expression is the literal zero (after the light folding
    /// done by the smart constructors).
    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Num(v) if *v == 0.0)
    }

    pub fn is_one(&self) -> bool {
        matches!(self, Expr::Num(v) if *v == 1.0)
    }

    /// True if the expression does not depend on `x`.
    pub fn is_constant(&self) -> bool {
        match self {
            Expr::X => false,
            Expr::Num(_) | Expr::Pi | Expr::E | Expr::I => true,
            Expr::Neg(a) | Expr::Call(_, a) => a.is_constant(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
                a.is_constant() && b.is_constant()
            }
            // A piecewise node is constant only if both branches coincide.
            Expr::Piecewise { then, otherwise, .. } => {
                then.is_constant() && otherwise.is_constant() && then == otherwise
            }
        }
    }

    /// Evaluate at `x` by walking the tree. See [`Compiled`] for repeated use.
    pub fn eval(&self, x: f64) -> Result<Complex64> {
        Ok(match self {
            Expr::Num(v) => Complex64::new(*v, 0.0),
            Expr::X => Complex64::new(x, 0.0),
            Expr::Pi => Complex64::new(std::f64::consts::PI, 0.0),
            Expr::E => Complex64::new(std::f64::consts::E, 0.0),
            Expr::I => Complex64::new(0.0, 1.0),
            Expr::Neg(a) => -a.eval(x)?,
            Expr::Add(a, b) => a.eval(x)? + b.eval(x)?,
            Expr::Sub(a, b) => a.eval(x)? - b.eval(x)?,
            Expr::Mul(a, b) => a.eval(x)? * b.eval(x)?,
            Expr::Div(a, b) => divide(a.eval(x)?, b.eval(x)?, x)?,
            Expr::Pow(a, b) => power(a.eval(x)?, b.eval(x)?, x)?,
            Expr::Call(f, a) => f.apply(a.eval(x)?, x)?,
            Expr::Piecewise {
                threshold,
                then,
                otherwise,
            } => {
                let c = threshold.eval(x)?.re;
                if x < c {
                    then.eval(x)?
                } else {
                    otherwise.eval(x)?
                }
            }
        })
    }

    /// Symbolic derivative with respect to `x`.
    pub fn derivative(&self) -> Expr {
        use Expr::*;
        match self {
            Num(_) | Pi | E | I => Expr::zero(),
            X => Expr::one(),
            Neg(a) => neg(a.derivative()),
            Add(a, b) => add(a.derivative(), b.derivative()),
            Sub(a, b) => sub(a.derivative(), b.derivative()),
            Mul(a, b) => add(
                mul(a.derivative(), (**b).clone()),
                mul((**a).clone(), b.derivative()),
            ),
            Div(a, b) => {
                // (a'b - ab') / b^2
                let num = sub(
                    mul(a.derivative(), (**b).clone()),
                    mul((**a).clone(), b.derivative()),
                );
                div(num, pow((**b).clone(), Expr::Num(2.0)))
            }
            Pow(a, b) => {
                if b.is_constant() {
                    // b a^(b-1) a'
                    let exp_m1 = sub((**b).clone(), Expr::one());
                    mul(mul((**b).clone(), pow((**a).clone(), exp_m1)), a.derivative())
                } else {
                    // a^b (b' log a + b a'/a)
                    let t1 = mul(b.derivative(), call(Func::Log, (**a).clone()));
                    let t2 = div(mul((**b).clone(), a.derivative()), (**a).clone());
                    mul(self.clone(), add(t1, t2))
                }
            }
            Call(f, a) => {
                let da = a.derivative();
                if da.is_zero() {
                    return Expr::zero();
                }
                let a = (**a).clone();
                let outer = match f {
                    Func::Exp => call(Func::Exp, a),
                    Func::Log => div(Expr::one(), a),
                    Func::Sin => call(Func::Cos, a),
                    Func::Cos => neg(call(Func::Sin, a)),
                    Func::Sinh => call(Func::Cosh, a),
                    Func::Cosh => call(Func::Sinh, a),
                    Func::Sqrt => div(Expr::one(), mul(Expr::Num(2.0), call(Func::Sqrt, a))),
                    Func::Abs => div(a.clone(), call(Func::Abs, a)),
                };
                mul(outer, da)
            }
            Piecewise {
                threshold,
                then,
                otherwise,
            } => piecewise((**threshold).clone(), then.derivative(), otherwise.derivative()),
        }
    }

    /// Complex conjugate as a function of real `x` (replaces `i` by `-i`).
    /// Valid because every admitted function commutes with conjugation off
    /// its branch cut, and branch cuts are domain errors.
    pub fn conj(&self) -> Expr {
        use Expr::*;
        match self {
            I => neg(Expr::I),
            Num(_) | X | Pi | E => self.clone(),
            Neg(a) => neg(a.conj()),
            Add(a, b) => add(a.conj(), b.conj()),
            Sub(a, b) => sub(a.conj(), b.conj()),
            Mul(a, b) => mul(a.conj(), b.conj()),
            Div(a, b) => div(a.conj(), b.conj()),
            Pow(a, b) => pow(a.conj(), b.conj()),
            Call(f, a) => call(*f, a.conj()),
            Piecewise {
                threshold,
                then,
                otherwise,
            } => piecewise((**threshold).clone(), then.conj(), otherwise.conj()),
        }
    }

    /// Reflection `x -> -x` (maps a negative half-line problem onto a
    /// positive one). Under reflection `-x < c` becomes `x > -c`, which is
    /// `x >= -c` up to a single point, so piecewise branches swap.
    pub fn reflect(&self) -> Expr {
        use Expr::*;
        match self {
            X => neg(Expr::X),
            Num(_) | Pi | E | I => self.clone(),
            Neg(a) => neg(a.reflect()),
            Add(a, b) => add(a.reflect(), b.reflect()),
            Sub(a, b) => sub(a.reflect(), b.reflect()),
            Mul(a, b) => mul(a.reflect(), b.reflect()),
            Div(a, b) => div(a.reflect(), b.reflect()),
            Pow(a, b) => pow(a.reflect(), b.reflect()),
            Call(f, a) => call(*f, a.reflect()),
            Piecewise {
                threshold,
                then,
                otherwise,
            } => piecewise(neg((**threshold).clone()), otherwise.reflect(), then.reflect()),
        }
    }

    /// All breakpoints `c` of `piecewise(x < c, ...)` nodes.
    pub fn breakpoints(&self, out: &mut Vec<f64>) {
        use Expr::*;
        match self {
            Num(_) | X | Pi | E | I => {}
            Call(Func::Abs, a) => {
                // kink of |a(x)| when the argument is affine in x
                if let (Ok(a0), Ok(a1), Ok(a2)) = (a.eval(0.0), a.eval(1.0), a.eval(2.0)) {
                    let slope = a1.re - a0.re;
                    if slope != 0.0 && ((a2.re - a1.re) - slope).abs() <= 1e-12 * slope.abs() {
                        out.push(-a0.re / slope);
                    }
                }
                a.breakpoints(out);
            }
            Neg(a) | Call(_, a) => a.breakpoints(out),
            Add(a, b) | Sub(a, b) | Mul(a, b) | Div(a, b) | Pow(a, b) => {
                a.breakpoints(out);
                b.breakpoints(out);
            }
            Piecewise {
                threshold,
                then,
                otherwise,
            } => {
                if let Ok(c) = threshold.eval(0.0) {
                    out.push(c.re);
                }
                then.breakpoints(out);
                otherwise.breakpoints(out);
            }
        }
    }

    /// Compile to a flat program for fast repeated evaluation.
    pub fn compile(&self) -> Compiled {
        let mut prog = Vec::new();
        compile_into(self, &mut prog);
        Compiled::from_ops(prog)
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(..) => 3,
            Expr::Pow(..) => 4,
            _ => 5,
        }
    }
}

// ---------------------------------------------------------------------------
// Smart constructors with light constant folding (0 and 1 identities only).

pub fn neg(a: Expr) -> Expr {
    match a {
        Expr::Num(v) if v == 0.0 => Expr::zero(),
        Expr::Neg(inner) => *inner,
        other => Expr::Neg(Box::new(other)),
    }
}

pub fn add(a: Expr, b: Expr) -> Expr {
    if a.is_zero() {
        return b;
    }
    if b.is_zero() {
        return a;
    }
    if let (Expr::Num(p), Expr::Num(q)) = (&a, &b) {
        return Expr::Num(p + q);
    }
    if let Expr::Neg(inner) = b {
        return sub(a, *inner);
    }
    Expr::Add(Box::new(a), Box::new(b))
}

pub fn sub(a: Expr, b: Expr) -> Expr {
    if b.is_zero() {
        return a;
    }
    if a.is_zero() {
        return neg(b);
    }
    if let (Expr::Num(p), Expr::Num(q)) = (&a, &b) {
        return Expr::num(p - q);
    }
    Expr::Sub(Box::new(a), Box::new(b))
}

pub fn mul(a: Expr, b: Expr) -> Expr {
    if a.is_zero() || b.is_zero() {
        return Expr::zero();
    }
    if a.is_one() {
        return b;
    }
    if b.is_one() {
        return a;
    }
    if let (Expr::Num(p), Expr::Num(q)) = (&a, &b) {
        return Expr::Num(p * q);
    }
    match (a, b) {
        (Expr::Neg(p), Expr::Neg(q)) => mul(*p, *q),
        (Expr::Neg(p), q) => neg(mul(*p, q)),
        (p, Expr::Neg(q)) => neg(mul(p, *q)),
        (p, q) => Expr::Mul(Box::new(p), Box::new(q)),
    }
}

pub fn div(a: Expr, b: Expr) -> Expr {
    if a.is_zero() {
        return Expr::zero();
    }
    if b.is_one() {
        return a;
    }
    Expr::Div(Box::new(a), Box::new(b))
}

pub fn pow(a: Expr, b: Expr) -> Expr {
    if b.is_zero() {
        return Expr::one();
    }
    if b.is_one() {
        return a;
    }
    Expr::Pow(Box::new(a), Box::new(b))
}

pub fn call(f: Func, a: Expr) -> Expr {
    Expr::Call(f, Box::new(a))
}

pub fn piecewise(threshold: Expr, then: Expr, otherwise: Expr) -> Expr {
    if then == otherwise {
        return then;
    }
    Expr::Piecewise {
        threshold: Box::new(threshold),
        then: Box::new(then),
        otherwise: Box::new(otherwise),
    }
}

fn divide(a: Complex64, b: Complex64, x: f64) -> Result<Complex64> {
    if b == Complex64::new(0.0, 0.0) {
        return Err(HamsysError::Domain {
            x,
            msg: "division by zero".into(),
        });
    }
    if a.im == 0.0 && b.im == 0.0 {
        return Ok(Complex64::new(a.re / b.re, 0.0));
    }
    Ok(a / b)
}

fn power(a: Complex64, b: Complex64, x: f64) -> Result<Complex64> {
    if b.im == 0.0 {
        let p = b.re;
        let integral = p.fract() == 0.0 && p.abs() < 2.0e9;
        if a.im == 0.0 {
            let base = a.re;
            if base > 0.0 {
                return Ok(Complex64::new(base.powf(p), 0.0));
            }
            if base == 0.0 {
                if p > 0.0 {
                    return Ok(Complex64::new(0.0, 0.0));
                }
                if p == 0.0 {
                    return Ok(Complex64::new(1.0, 0.0));
                }
                return Err(HamsysError::Domain {
                    x,
                    msg: "zero raised to a negative power".into(),
                });
            }
            if integral {
                return Ok(Complex64::new(base.powi(p as i32), 0.0));
            }
            return Err(HamsysError::Domain {
                x,
                msg: format!("negative base {base} raised to non-integer power {p}"),
            });
        }
        if integral {
            return Ok(a.powi(p as i32));
        }
    }
    if a == Complex64::new(0.0, 0.0) {
        return Err(HamsysError::Domain {
            x,
            msg: "zero raised to a complex power".into(),
        });
    }
    Ok((b * a.ln()).exp())
}

// ---------------------------------------------------------------------------
// Printing: precedence-aware, minimal parentheses, round-trips through parse.

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Expr::*;
        match self {
            Num(v) => write!(f, "{v:?}"),
            X => write!(f, "x"),
            Pi => write!(f, "pi"),
            E => write!(f, "e"),
            I => write!(f, "i"),
            Neg(a) => {
                if a.precedence() <= 2 {
                    write!(f, "-({a})")
                } else {
                    write!(f, "-{a}")
                }
            }
            Add(a, b) => {
                write!(f, "{a}+")?;
                wrap(f, b, b.precedence() <= 1)
            }
            Sub(a, b) => {
                write!(f, "{a}-")?;
                wrap(f, b, b.precedence() <= 1)
            }
            Mul(a, b) => {
                wrap(f, a, a.precedence() < 2)?;
                write!(f, "*")?;
                wrap(f, b, b.precedence() <= 2)
            }
            Div(a, b) => {
                wrap(f, a, a.precedence() < 2)?;
                write!(f, "/")?;
                wrap(f, b, b.precedence() <= 2)
            }
            Pow(a, b) => {
                // base must be a primary; exponent must be a unary.
                wrap(f, a, a.precedence() <= 4)?;
                write!(f, "^")?;
                wrap(f, b, b.precedence() < 3)
            }
            Call(func, a) => write!(f, "{}({a})", func.name()),
            Piecewise {
                threshold,
                then,
                otherwise,
            } => write!(f, "piecewise(x<{threshold}, {then}, {otherwise})"),
        }
    }
}

fn wrap(f: &mut fmt::Formatter<'_>, e: &Expr, paren: bool) -> fmt::Result {
    if paren {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

// ---------------------------------------------------------------------------
// Parser

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    len: usize,
}

impl Parser {
    fn new(src: &str) -> Result<Parser> {
        let bytes: Vec<char> = src.chars().collect();
        let mut toks = Vec::new();
        let mut i = 0;
        while i < bytes.len() {
            let c = bytes[i];
            if c.is_whitespace() {
                i += 1;
            } else if c.is_ascii_digit() || (c == '.' && i + 1 < bytes.len() && bytes[i + 1].is_ascii_digit()) {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == '.') {
                    i += 1;
                }
                if i < bytes.len() && (bytes[i] == 'e' || bytes[i] == 'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == '+' || bytes[j] == '-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        while j < bytes.len() && bytes[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let text: String = bytes[start..i].iter().collect();
                let v: f64 = text.parse().map_err(|_| HamsysError::Parse {
                    pos: start,
                    msg: format!("invalid number '{text}'"),
                })?;
                toks.push((Tok::Num(v), start));
            } else if c.is_ascii_alphabetic() || c == '_' {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == '_') {
                    i += 1;
                }
                toks.push((Tok::Ident(bytes[start..i].iter().collect()), start));
            } else if "+-*/^(),<".contains(c) {
                toks.push((Tok::Op(c), i));
                i += 1;
            } else {
                return Err(HamsysError::Parse {
                    pos: i,
                    msg: format!("unexpected character '{c}'"),
                });
            }
        }
        Ok(Parser {
            toks,
            pos: 0,
            len: bytes.len(),
        })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map(|(_, p)| *p).unwrap_or(self.len)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(HamsysError::Parse {
            pos: self.here(),
            msg: msg.into(),
        })
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.peek() == Some(&Tok::Op(c)) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(format!("expected '{c}'"))
        }
    }

    fn parse_all(mut self) -> Result<Expr> {
        if self.toks.is_empty() {
            return self.err("empty expression");
        }
        let e = self.expr()?;
        if self.pos != self.toks.len() {
            return self.err("unexpected trailing input");
        }
        Ok(e)
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Op('+')) => {
                    self.pos += 1;
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some(Tok::Op('-')) => {
                    self.pos += 1;
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Some(Tok::Op('*')) => {
                    self.pos += 1;
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Some(Tok::Op('/')) => {
                    self.pos += 1;
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        match self.peek() {
            Some(Tok::Op('-')) => {
                self.pos += 1;
                Ok(Expr::Neg(Box::new(self.unary()?)))
            }
            Some(Tok::Op('+')) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.primary()?;
        if self.peek() == Some(&Tok::Op('^')) {
            self.pos += 1;
            let exponent = self.unary()?;
            return Ok(Expr::Pow(Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr> {
        let tok = match self.peek() {
            Some(t) => t.clone(),
            None => return self.err("unexpected end of expression"),
        };
        match tok {
            Tok::Num(v) => {
                self.pos += 1;
                Ok(Expr::Num(v))
            }
            Tok::Op('(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Ident(name) => {
                let at = self.here();
                self.pos += 1;
                match name.as_str() {
                    "x" => Ok(Expr::X),
                    "pi" => Ok(Expr::Pi),
                    "e" => Ok(Expr::E),
                    "i" => Ok(Expr::I),
                    "piecewise" => {
                        self.expect('(')?;
                        match self.peek() {
                            Some(Tok::Ident(v)) if v == "x" => self.pos += 1,
                            _ => return self.err("piecewise condition must have the form 'x < c'"),
                        }
                        self.expect('<')?;
                        let threshold = self.expr()?;
                        if !threshold.is_constant() {
                            return Err(HamsysError::Parse {
                                pos: at,
                                msg: "piecewise threshold must not depend on x".into(),
                            });
                        }
                        self.expect(',')?;
                        let then = self.expr()?;
                        self.expect(',')?;
                        let otherwise = self.expr()?;
                        self.expect(')')?;
                        Ok(Expr::Piecewise {
                            threshold: Box::new(threshold),
                            then: Box::new(then),
                            otherwise: Box::new(otherwise),
                        })
                    }
                    other => match Func::from_name(other) {
                        Some(f) => {
                            self.expect('(')?;
                            let arg = self.expr()?;
                            self.expect(')')?;
                            Ok(Expr::Call(f, Box::new(arg)))
                        }
                        None => Err(HamsysError::Parse {
                            pos: at,
                            msg: format!("unknown identifier or function '{other}'"),
                        }),
                    },
                }
            }
            Tok::Op(c) => self.err(format!("unexpected '{c}'")),
        }
    }
}

// ---------------------------------------------------------------------------
// Compiled form: a small stack machine.

#[derive(Debug, Clone, Copy)]
enum Op {
    Const(Complex64),
    X,
    Neg,
    Add,
    Sub,
    Mul,
    Div,
    Pow,
    PowInt(i32),
    Call(Func),
    /// Jump to `target` unless `x < c`.
    JumpUnlessLess(f64, usize),
    Jump(usize),
}

/// Compiled expression; cheap to clone and evaluate.
#[derive(Debug, Clone)]
pub struct Compiled {
    ops: Vec<Op>,
    constant: Option<Complex64>,
}

fn compile_into(e: &Expr, prog: &mut Vec<Op>) {
    if e.is_constant() {
        if let Ok(v) = e.eval(0.0) {
            prog.push(Op::Const(v));
            return;
        }
    }
    match e {
        Expr::Num(v) => prog.push(Op::Const(Complex64::new(*v, 0.0))),
        Expr::Pi => prog.push(Op::Const(Complex64::new(std::f64::consts::PI, 0.0))),
        Expr::E => prog.push(Op::Const(Complex64::new(std::f64::consts::E, 0.0))),
        Expr::I => prog.push(Op::Const(Complex64::new(0.0, 1.0))),
        Expr::X => prog.push(Op::X),
        Expr::Neg(a) => {
            compile_into(a, prog);
            prog.push(Op::Neg);
        }
        Expr::Add(a, b) => bin(a, b, Op::Add, prog),
        Expr::Sub(a, b) => bin(a, b, Op::Sub, prog),
        Expr::Mul(a, b) => bin(a, b, Op::Mul, prog),
        Expr::Div(a, b) => bin(a, b, Op::Div, prog),
        Expr::Pow(a, b) => {
            compile_into(a, prog);
            let int_exp = if b.is_constant() {
                b.eval(0.0).ok().and_then(|v| {
                    (v.im == 0.0 && v.re.fract() == 0.0 && v.re.abs() <= 64.0).then_some(v.re as i32)
                })
            } else {
                None
            };
            match int_exp {
                Some(k) => prog.push(Op::PowInt(k)),
                None => {
                    compile_into(b, prog);
                    prog.push(Op::Pow);
                }
            }
        }
        Expr::Call(f, a) => {
            compile_into(a, prog);
            prog.push(Op::Call(*f));
        }
        Expr::Piecewise {
            threshold,
            then,
            otherwise,
        } => {
            let c = threshold.eval(0.0).map(|v| v.re).unwrap_or(f64::NAN);
            let jump_at = prog.len();
            prog.push(Op::JumpUnlessLess(c, 0));
            compile_into(then, prog);
            let skip_at = prog.len();
            prog.push(Op::Jump(0));
            let else_start = prog.len();
            compile_into(otherwise, prog);
            let end = prog.len();
            prog[jump_at] = Op::JumpUnlessLess(c, else_start);
            prog[skip_at] = Op::Jump(end);
        }
    }
}

fn bin(a: &Expr, b: &Expr, op: Op, prog: &mut Vec<Op>) {
    compile_into(a, prog);
    compile_into(b, prog);
    prog.push(op);
}

impl Compiled {
    fn from_ops(ops: Vec<Op>) -> Compiled {
        let constant = match ops.as_slice() {
            [Op::Const(v)] => Some(*v),
            _ => None,
        };
        Compiled { ops, constant }
    }

    /// Value if the expression is constant in `x`.
    pub fn constant(&self) -> Option<Complex64> {
        self.constant
    }

    pub fn eval(&self, x: f64) -> Result<Complex64> {
        if let Some(v) = self.constant {
            return Ok(v);
        }
        let mut stack: smallstack::Stack = smallstack::Stack::new();
        let mut pc = 0;
        let xc = Complex64::new(x, 0.0);
        while pc < self.ops.len() {
            match self.ops[pc] {
                Op::Const(v) => stack.push(v),
                Op::X => stack.push(xc),
                Op::Neg => {
                    let a = stack.pop();
                    stack.push(-a);
                }
                Op::Add => {
                    let b = stack.pop();
                    let a = stack.pop();
                    stack.push(a + b);
                }
                Op::Sub => {
                    let b = stack.pop();
                    let a = stack.pop();
                    stack.push(a - b);
                }
                Op::Mul => {
                    let b = stack.pop();
                    let a = stack.pop();
                    stack.push(if a.im == 0.0 && b.im == 0.0 {
                        Complex64::new(a.re * b.re, 0.0)
                    } else {
                        a * b
                    });
                }
                Op::Div => {
                    let b = stack.pop();
                    let a = stack.pop();
                    stack.push(divide(a, b, x)?);
                }
                Op::Pow => {
                    let b = stack.pop();
                    let a = stack.pop();
                    stack.push(power(a, b, x)?);
                }
                Op::PowInt(k) => {
                    let a = stack.pop();
                    if a == Complex64::new(0.0, 0.0) && k < 0 {
                        return Err(HamsysError::Domain {
                            x,
                            msg: "zero raised to a negative power".into(),
                        });
                    }
                    stack.push(if a.im == 0.0 {
                        Complex64::new(a.re.powi(k), 0.0)
                    } else {
                        a.powi(k)
                    });
                }
                Op::Call(f) => {
                    let a = stack.pop();
                    stack.push(f.apply(a, x)?);
                }
                Op::JumpUnlessLess(c, target) => {
                    if !(x < c) {
                        pc = target;
                        continue;
                    }
                }
                Op::Jump(target) => {
                    pc = target;
                    continue;
                }
            }
            pc += 1;
        }
        Ok(stack.pop())
    }
}

mod smallstack {
    use num_complex::Complex64;

    /// Fixed-capacity evaluation stack that spills to the heap when deep.
    pub struct Stack {
        inline: [Complex64; 16],
        len: usize,
        spill: Vec<Complex64>,
    }

    impl Stack {
        pub fn new() -> Stack {
            Stack {
                inline: [Complex64::new(0.0, 0.0); 16],
                len: 0,
                spill: Vec::new(),
            }
        }

        #[inline]
        pub fn push(&mut self, v: Complex64) {
            if self.len < 16 {
                self.inline[self.len] = v;
            } else {
                self.spill.push(v);
            }
            self.len += 1;
        }

        #[inline]
        pub fn pop(&mut self) -> Complex64 {
            self.len -= 1;
            if self.len < 16 {
                self.inline[self.len]
            } else {
                self.spill.pop().expect("stack underflow")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(s: &str, x: f64) -> Complex64 {
        Expr::parse(s).unwrap().eval(x).unwrap()
    }

    #[test]
    fn precedence_and_unary_minus() {
        assert_eq!(ev("-2^2", 0.0).re, -4.0);
        assert_eq!(ev("2*3+4", 0.0).re, 10.0);
        assert_eq!(ev("2^3^2", 0.0).re, 512.0);
        assert_eq!(ev("(1+x)^-2", 1.0).re, 0.25);
        assert_eq!(ev("8/2/2", 0.0).re, 2.0);
    }

    #[test]
    fn compiled_matches_tree() {
        let srcs = [
            "i*exp(-x)",
            "piecewise(x<1, x^2, 3*x)",
            "sqrt(1+x^2)/cosh(x)",
            "(abs(x)+2)^-1*log(abs(x)+2)^-2",
            "x^x",
        ];
        for s in srcs {
            let e = Expr::parse(s).unwrap();
            let c = e.compile();
            for &x in &[0.3, 1.0, 2.5] {
                let a = e.eval(x).unwrap();
                let b = c.eval(x).unwrap();
                assert!((a - b).norm() < 1e-14 * (1.0 + a.norm()), "{s} at {x}");
            }
        }
    }

    #[test]
    fn domain_errors() {
        assert!(Expr::parse("log(x)").unwrap().eval(-1.0).is_err());
        assert!(Expr::parse("sqrt(x)").unwrap().compile().eval(-1.0).is_err());
    }
}
