use num_complex::Complex64;

use hamsys::fixtures;
use hamsys::matrix::MatrixFunction;
use hamsys::propagator::{FundamentalSolution, PropagatorOptions};
use hamsys::system::{IntervalSpec, SystemSpec};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// J = [[0,-1],[1,0]], B = 0, H = I: Y(x, λ) = rotation by −λx.
fn harmonic() -> SystemSpec {
    SystemSpec::new(
        IntervalSpec::half_line_positive(0.0),
        MatrixFunction::from_strs(&[&["0", "-1"], &["1", "0"]]).unwrap(),
        MatrixFunction::zeros(2),
        MatrixFunction::identity(2),
        "harmonic",
    )
    .unwrap()
}

#[test]
fn constant_coefficients_match_closed_form() {
    let s = harmonic();
    for lambda in [c(0.7, 0.0), c(0.3, 0.2), c(0.0, 1.0)] {
        let fs = FundamentalSolution::solve(&s, lambda, 0.0, 10.0).unwrap();
        for x in [0.5, 3.0, 10.0] {
            let y = fs.matrix(x).unwrap();
            let (cs, sn) = ((lambda * x).cos(), (lambda * x).sin());
            // J Y' = λ Y  ⇒  Y' = −λ J Y  with J⁻¹ = −J
            let expect = [[cs, sn], [-sn, cs]];
            for i in 0..2 {
                for j in 0..2 {
                    let err = (y[(i, j)] - expect[i][j]).norm() / (1.0 + expect[i][j].norm());
                    assert!(err < 1e-8, "λ = {lambda}, x = {x}, entry ({i},{j}) error {err:e}");
                }
            }
        }
    }
}

#[test]
fn symplectic_identity_holds_on_fixtures() {
    for f in fixtures::all() {
        let Ok(s) = f.problem().and_then(|p| p.system()) else { continue };
        let (a, b) = s.interval.clip(s.interval.x0 - 8.0, s.interval.x0 + 8.0);
        let lambda = c(0.5, 1.0);
        let y = FundamentalSolution::solve(&s, lambda, a, b).unwrap();
        let y_bar = FundamentalSolution::solve(&s, lambda.conj(), a, b).unwrap();
        let j0 = s.j.evaluate(s.interval.x0).unwrap();
        for x in [a, 0.5 * (a + b), b] {
            let p = y_bar.matrix(x).unwrap();
            let q = y.matrix(x).unwrap();
            let lhs = p.adjoint() * s.j.evaluate(x).unwrap() * &q;
            let defect = (lhs - &j0).norm() / (p.norm() * q.norm() * j0.norm());
            assert!(defect < 1e-8, "{} at x = {x}: defect {defect:e}", f.id);
        }
    }
}

#[test]
fn exponential_growth_is_carried_in_log_scale() {
    // H = I with J = diag(i, −i): at λ = i one solution grows like e^x
    let s = fixtures::find("kac-krein").unwrap().problem().unwrap().system().unwrap();
    let opts = PropagatorOptions {
        rescale_threshold: 16.0,
        ..Default::default()
    };
    let fs = FundamentalSolution::new(&s, c(0.0, 1.0), 0.0, 2000.0, opts).unwrap();
    let y = fs.evaluate(2000.0).unwrap();
    assert!(y.log_norm().is_finite());
    assert!((y.log_norm() - 2000.0).abs() < 1.0, "log norm {}", y.log_norm());
    assert!(fs.matrix(2000.0).is_err(), "e^2000 is not representable as a plain matrix");
}

#[test]
fn decaying_solutions_stay_resolved() {
    // J = diag(i, −i), h11 = 1: at λ = −i the first solution is exactly e^{−x};
    // its decay must be tracked through the window factors, not lost below
    // the integration tolerance
    let s = fixtures::find("ex3.1").unwrap().problem().unwrap().system().unwrap();
    let opts = PropagatorOptions {
        rescale_threshold: 16.0,
        ..Default::default()
    };
    let fs = FundamentalSolution::new(&s, c(0.0, -1.0), 0.0, 400.0, opts).unwrap();
    let log_decay: f64 = fs.branch(1.0).windows.iter().map(|w| w.r[(0, 0)].norm().ln()).sum();
    assert!((log_decay + 400.0).abs() < 1e-6, "accumulated log decay {log_decay}");
}
