//! Shipped example systems with their expected analysis results.

use serde::Serialize;

use crate::error::Result;
use crate::expr::Expr;
use crate::matrix::MatrixFunction;
use crate::system::{IntervalSpec, Problem, SturmLiouvilleSpec, SystemSpec};

/// Expected outcomes; `None` means "not asserted".
#[derive(Debug, Clone, Default, Serialize)]
pub struct Expectation {
    pub rank: Option<usize>,
    pub definite: Option<bool>,
    /// `(ñ+, ñ-)` for half-lines and finite intervals.
    pub n_tilde: Option<[usize; 2]>,
    /// `(N+, N-)`.
    pub deficiency: Option<[i64; 2]>,
    /// `(ñ+, ñ-)` of a full-line system.
    pub line_n_tilde: Option<[usize; 2]>,
    /// Expected criterion verdicts `(id, status)`.
    pub verdicts: Vec<(&'static str, &'static str)>,
}

pub struct Fixture {
    pub id: &'static str,
    pub title: &'static str,
    build: fn() -> Result<Problem>,
    expect: fn() -> Expectation,
}

impl Fixture {
    pub fn problem(&self) -> Result<Problem> {
        (self.build)()
    }

    pub fn expectation(&self) -> Expectation {
        (self.expect)()
    }
}

fn std_j() -> MatrixFunction {
    MatrixFunction::from_strs(&[&["0", "1"], &["-1", "0"]]).expect("constant J")
}

fn diag_j() -> MatrixFunction {
    MatrixFunction::from_strs(&[&["i", "0"], &["0", "-i"]]).expect("constant J")
}

fn diag(entries: &[&str]) -> Result<MatrixFunction> {
    Ok(MatrixFunction::diagonal(
        entries.iter().map(|e| Expr::parse(e)).collect::<Result<Vec<_>>>()?,
    ))
}

fn system(iv: IntervalSpec, j: MatrixFunction, b: MatrixFunction, h: MatrixFunction, label: &str) -> Result<Problem> {
    Ok(Problem::System(SystemSpec::new(iv, j, b, h, label)?))
}

fn scalar_sl(iv: IntervalSpec, r: &str, h: &str, label: &str) -> Result<Problem> {
    Ok(Problem::SturmLiouville(SturmLiouvilleSpec::new(
        iv,
        MatrixFunction::identity(1),
        MatrixFunction::zeros(1),
        diag(&[r])?,
        diag(&[h])?,
        label,
    )?))
}

fn interval(a: f64, b: f64, x0: f64) -> IntervalSpec {
    IntervalSpec::finite(a, b, x0).expect("valid interval")
}

fn ml_s2_2() -> Result<Problem> {
    system(interval(0.0, 1.0, 0.0), std_j(), MatrixFunction::zeros(2), diag(&["1", "0"])?, "projector Hamiltonian on (0,1)")
}

fn mark_1() -> Result<Problem> {
    system(
        interval(0.0, std::f64::consts::PI, 0.0),
        std_j(),
        diag(&["-1", "-1"])?,
        MatrixFunction::from_strs(&[&["cos(x)^2", "sin(x)*cos(x)"], &["sin(x)*cos(x)", "sin(x)^2"]])?,
        "rotating projector with B = -I",
    )
}

fn mark_2() -> Result<Problem> {
    system(
        interval(0.0, 1.0, 0.0),
        MatrixFunction::from_strs(&[&["0", "-1"], &["1", "0"]])?,
        diag(&["1", "-1"])?,
        diag(&["1", "0"])?,
        "Schroedinger operator -f'' + f as a 2x2 system",
    )
}

fn r3_1_4() -> Result<Problem> {
    system(
        IntervalSpec::half_line_positive(0.0),
        std_j(),
        MatrixFunction::zeros(2),
        diag(&["1", "0"])?,
        "projector Hamiltonian on the half-line",
    )
}

fn ex3_1() -> Result<Problem> {
    system(
        IntervalSpec::half_line_positive(0.0),
        diag_j(),
        MatrixFunction::zeros(2),
        diag(&["1", "(1+x)^(-2)"])?,
        "diagonal J, h11 = 1, h22 = (1+x)^-2",
    )
}

fn ex3_1_swapped() -> Result<Problem> {
    system(
        IntervalSpec::half_line_positive(0.0),
        diag_j(),
        MatrixFunction::zeros(2),
        diag(&["(1+x)^(-2)", "1"])?,
        "diagonal J, h11 = (1+x)^-2, h22 = 1",
    )
}

fn ex3_2() -> Result<Problem> {
    system(
        IntervalSpec::half_line_positive(0.0),
        diag_j(),
        MatrixFunction::zeros(2),
        diag(&["2*(1+x)^(-1)", "(1+x)^(-1)"])?,
        "diagonal J, h11 = 2/(1+x), h22 = 1/(1+x)",
    )
}

fn ex3_3() -> Result<Problem> {
    let j = diag(&["i", "-i", "i", "-i", "i", "-i"])?;
    system(
        IntervalSpec::half_line_positive(0.0),
        j,
        MatrixFunction::zeros(6),
        diag(&["1", "(1+x)^(-2)", "1", "(1+x)^(-2)", "2*(1+x)^(-2)", "2"])?,
        "three diagonal 2x2 blocks, one with the roles swapped",
    )
}

fn ex3_6() -> Result<Problem> {
    system(
        IntervalSpec::full_line(0.0),
        std_j(),
        MatrixFunction::zeros(2),
        diag(&["(abs(x)+2)^(-1)*log(abs(x)+2)^(-2)", "(abs(x)+2)^(-1)"])?,
        "integrable smallest eigenvalue, non-integrable 1/c on the line",
    )
}

fn ml_s5_33() -> Result<Problem> {
    system(
        IntervalSpec::half_line_positive(0.0),
        std_j(),
        MatrixFunction::zeros(2),
        diag(&["(1+x)^(-4)", "1"])?,
        "H = diag((1+x)^-4, 1): integrable 1/c, minimal indices",
    )
}

fn re5_40() -> Result<Problem> {
    scalar_sl(
        IntervalSpec::half_line_positive(0.0),
        "-1",
        "(1+x)^(-1.5)",
        "-u'' - u = lambda (1+x)^-1.5 u",
    )
}

fn kac_krein() -> Result<Problem> {
    system(IntervalSpec::half_line_positive(0.0), std_j(), MatrixFunction::zeros(2), diag(&["1", "1"])?, "H = I on the half-line")
}

fn canonical_decay() -> Result<Problem> {
    system(
        IntervalSpec::half_line_positive(0.0),
        std_j(),
        MatrixFunction::zeros(2),
        diag(&["(1+x)^(-2)", "(1+x)^(-2)"])?,
        "H = (1+x)^-2 I on the half-line",
    )
}

fn sl_quartic() -> Result<Problem> {
    scalar_sl(IntervalSpec::half_line_positive(0.0), "0", "(1+x)^(-4)", "-u'' = lambda (1+x)^-4 u")
}

fn sl_inverse() -> Result<Problem> {
    scalar_sl(IntervalSpec::half_line_positive(0.0), "0", "(1+x)^(-1)", "-u'' = lambda (1+x)^-1 u")
}

fn sl_line_quartic() -> Result<Problem> {
    scalar_sl(IntervalSpec::full_line(0.0), "0", "(1+abs(x))^(-4)", "-u'' = lambda (1+|x|)^-4 u on the line")
}

fn diag_line() -> Result<Problem> {
    system(IntervalSpec::full_line(0.0), diag_j(), MatrixFunction::zeros(2), diag(&["1", "1"])?, "diagonal J, H = I on the line")
}

fn projector_line() -> Result<Problem> {
    system(IntervalSpec::full_line(0.0), std_j(), MatrixFunction::zeros(2), diag(&["1", "0"])?, "projector Hamiltonian on the line")
}

/// All shipped fixtures, sorted by id.
pub fn all() -> Vec<Fixture> {
    let mut v = vec![
        Fixture {
            id: "ml-s2.2",
            title: "Non-definite canonical system on (0,1)",
            build: ml_s2_2,
            expect: || Expectation {
                rank: Some(1),
                definite: Some(false),
                n_tilde: Some([2, 2]),
                deficiency: Some([1, 1]),
                ..Default::default()
            },
        },
        Fixture {
            id: "mark-s1.11-1",
            title: "Rotating projector: integral of H invertible, system not definite",
            build: mark_1,
            expect: || Expectation {
                rank: Some(1),
                definite: Some(false),
                n_tilde: Some([2, 2]),
                deficiency: Some([1, 1]),
                ..Default::default()
            },
        },
        Fixture {
            id: "mark-s1.11-2",
            title: "Schroedinger operator as a definite system with singular H",
            build: mark_2,
            expect: || Expectation {
                rank: Some(2),
                definite: Some(true),
                n_tilde: Some([2, 2]),
                deficiency: Some([2, 2]),
                ..Default::default()
            },
        },
        Fixture {
            id: "r3.1-4",
            title: "Projector Hamiltonian on the half-line",
            build: r3_1_4,
            expect: || Expectation {
                rank: Some(1),
                definite: Some(false),
                n_tilde: Some([1, 1]),
                deficiency: Some([0, 0]),
                ..Default::default()
            },
        },
        Fixture {
            id: "ex3.1",
            title: "Diagonal system with unequal indices",
            build: ex3_1,
            expect: || Expectation {
                rank: Some(2),
                definite: Some(true),
                n_tilde: Some([1, 2]),
                deficiency: Some([1, 2]),
                verdicts: vec![("intermediate-n-minus-1", "fails")],
                ..Default::default()
            },
        },
        Fixture {
            id: "ex3.1-swapped",
            title: "Diagonal system with unequal indices, roles swapped",
            build: ex3_1_swapped,
            expect: || Expectation {
                rank: Some(2),
                definite: Some(true),
                n_tilde: Some([2, 1]),
                deficiency: Some([2, 1]),
                ..Default::default()
            },
        },
        Fixture {
            id: "ex3.2",
            title: "Diagonal system with indices n-1 outside the sufficient conditions",
            build: ex3_2,
            expect: || Expectation {
                rank: Some(2),
                definite: Some(true),
                n_tilde: Some([1, 1]),
                deficiency: Some([1, 1]),
                ..Default::default()
            },
        },
        Fixture {
            id: "ex3.3",
            title: "6x6 diagonal system with trace condition but unequal indices",
            build: ex3_3,
            expect: || Expectation {
                rank: Some(6),
                definite: Some(true),
                n_tilde: Some([4, 5]),
                deficiency: Some([4, 5]),
                ..Default::default()
            },
        },
        Fixture {
            id: "ex3.6",
            title: "Weyl weight criterion holds where the eigenvalue criterion fails",
            build: ex3_6,
            expect: || Expectation {
                rank: Some(2),
                definite: Some(true),
                line_n_tilde: Some([0, 0]),
                verdicts: vec![("line-self-adjoint", "holds"), ("line-smallest-eigenvalue", "fails")],
                ..Default::default()
            },
        },
        Fixture {
            id: "ml-s5.33",
            title: "Minimal indices although 1/c is integrable",
            build: ml_s5_33,
            expect: || Expectation {
                rank: Some(2),
                definite: Some(true),
                n_tilde: Some([1, 1]),
                deficiency: Some([1, 1]),
                verdicts: vec![("halfline-minimal", "fails")],
                ..Default::default()
            },
        },
        Fixture {
            id: "re5.40",
            title: "Negative constant potential, non-integrable sqrt(H), maximal indices",
            build: re5_40,
            expect: || Expectation {
                rank: Some(2),
                definite: Some(true),
                n_tilde: Some([2, 2]),
                deficiency: Some([2, 2]),
                verdicts: vec![("sl-constant-potential", "holds")],
                ..Default::default()
            },
        },
        Fixture {
            id: "kac-krein",
            title: "H = I on the half-line (limit point)",
            build: kac_krein,
            expect: || Expectation {
                rank: Some(2),
                definite: Some(true),
                n_tilde: Some([1, 1]),
                deficiency: Some([1, 1]),
                verdicts: vec![("canonical-maximal", "fails"), ("halfline-minimal", "holds")],
                ..Default::default()
            },
        },
        Fixture {
            id: "canonical-decay",
            title: "Integrable trace: maximal indices",
            build: canonical_decay,
            expect: || Expectation {
                rank: Some(2),
                definite: Some(true),
                n_tilde: Some([2, 2]),
                deficiency: Some([2, 2]),
                verdicts: vec![("canonical-maximal", "holds"), ("quasiregular", "holds")],
                ..Default::default()
            },
        },
        Fixture {
            id: "sl-quartic",
            title: "-u'' = lambda (1+x)^-4 u: limit circle",
            build: sl_quartic,
            expect: || Expectation {
                rank: Some(2),
                definite: Some(true),
                n_tilde: Some([2, 2]),
                deficiency: Some([2, 2]),
                verdicts: vec![("sl-scalar", "holds")],
                ..Default::default()
            },
        },
        Fixture {
            id: "sl-inverse",
            title: "-u'' = lambda (1+x)^-1 u: limit point",
            build: sl_inverse,
            expect: || Expectation {
                rank: Some(2),
                definite: Some(true),
                n_tilde: Some([1, 1]),
                deficiency: Some([1, 1]),
                verdicts: vec![("sl-scalar", "fails")],
                ..Default::default()
            },
        },
        Fixture {
            id: "sl-line-quartic",
            title: "-u'' = lambda (1+|x|)^-4 u on the line",
            build: sl_line_quartic,
            expect: || Expectation {
                rank: Some(2),
                definite: Some(true),
                line_n_tilde: Some([2, 2]),
                ..Default::default()
            },
        },
        Fixture {
            id: "diag-line",
            title: "Diagonal J, H = I on the line",
            build: diag_line,
            expect: || Expectation {
                rank: Some(2),
                definite: Some(true),
                line_n_tilde: Some([0, 0]),
                ..Default::default()
            },
        },
        Fixture {
            id: "projector-line",
            title: "Projector Hamiltonian on the line (not definite)",
            build: projector_line,
            expect: || Expectation {
                rank: Some(1),
                definite: Some(false),
                line_n_tilde: Some([1, 1]),
                ..Default::default()
            },
        },
    ];
    v.sort_by(|a, b| a.id.cmp(b.id));
    v
}

pub fn find(id: &str) -> Option<Fixture> {
    all().into_iter().find(|f| f.id == id)
}
