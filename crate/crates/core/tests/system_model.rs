use hamsys::expr::Expr;
use hamsys::matrix::MatrixFunction;
use hamsys::report::validate_problem;
use hamsys::system::{IntervalKind, IntervalSpec, Problem, SamplePlan, SystemSpec};
use hamsys::HamsysError;

const DIAGONAL: &str = r#"{
  "n": 2,
  "interval": {"kind": "half-line-positive", "a": 0.0, "b": "inf", "x0": 0.0},
  "J": [["i", "0"], ["0", "-i"]],
  "B": [["0", "0"], ["0", "0"]],
  "H": [["1", "0"], ["0", "(1+x)^-2"]],
  "label": "diagonal"
}"#;

#[test]
fn json_round_trip_preserves_coefficients() {
    let p = Problem::from_json(DIAGONAL).unwrap();
    let s = p.system().unwrap();
    assert_eq!(s.n, 2);
    assert_eq!(s.interval.kind, IntervalKind::HalfLinePositive);
    let again = SystemSpec::from_json(&s.to_json().unwrap()).unwrap();
    for x in [0.0, 0.5, 3.0, 40.0] {
        let a = s.h.evaluate(x).unwrap();
        let b = again.h.evaluate(x).unwrap();
        assert!((a - b).norm() < 1e-15, "H differs at {x}");
    }
}

#[test]
fn malformed_expression_reports_position() {
    let bad = DIAGONAL.replace("(1+x)^-2", "(1+x^");
    match Problem::from_json(&bad) {
        Err(HamsysError::Parse { .. }) | Err(HamsysError::Spec(_)) => {}
        other => panic!("expected a parse error, got {other:?}"),
    }
    assert!(Expr::parse("sin(x").is_err());
    assert!(Expr::parse("foo(x)").is_err());
}

#[test]
fn dimension_mismatch_is_rejected() {
    let r = SystemSpec::new(
        IntervalSpec::half_line_positive(0.0),
        MatrixFunction::from_strs(&[&["i", "0"], &["0", "-i"]]).unwrap(),
        MatrixFunction::zeros(2),
        MatrixFunction::identity(3),
        "mismatch",
    );
    assert!(matches!(r, Err(HamsysError::Dimension(_))));
}

#[test]
fn non_hermitian_h_fails_validation() {
    let bad = DIAGONAL.replace(r#"["1", "0"], ["0", "(1+x)^-2"]"#, r#"["1", "x"], ["0", "1"]"#);
    let p = Problem::from_json(&bad).unwrap();
    let v = validate_problem(&p).unwrap();
    assert!(!v.passed());
}

#[test]
fn non_skew_j_fails_validation() {
    let bad = DIAGONAL.replace(r#"["i", "0"], ["0", "-i"]"#, r#"["1", "0"], ["0", "1"]"#);
    let p = Problem::from_json(&bad).unwrap();
    assert!(!validate_problem(&p).unwrap().passed());
}

#[test]
fn valid_system_passes_validation() {
    let p = Problem::from_json(DIAGONAL).unwrap();
    assert!(validate_problem(&p).unwrap().passed());
}

#[test]
fn piecewise_coefficients_expose_breakpoints() {
    let e = Expr::parse("piecewise(x<1, 1, 0)").unwrap();
    let mut bps = Vec::new();
    e.breakpoints(&mut bps);
    assert_eq!(bps, vec![1.0]);
    assert_eq!(e.eval(0.5).unwrap().re, 1.0);
    assert_eq!(e.eval(1.5).unwrap().re, 0.0);
}

#[test]
fn sample_plan_covers_both_sides_of_jumps() {
    let iv = IntervalSpec::half_line_positive(0.0);
    let plan = SamplePlan::for_interval(&iv, 64, 1e3, &[2.0]);
    assert!(plan.points.iter().any(|&x| x == 2.0));
    assert!(plan.points.iter().any(|&x| x < 2.0 && x > 1.99));
    assert!(plan.points.iter().all(|&x| (0.0..=1e3).contains(&x)));
}

#[test]
fn symbolic_derivative_matches_finite_difference() {
    let e = Expr::parse("sin(x)*exp(-x/3) + (1+x^2)^(-1/2)").unwrap();
    let d = e.derivative();
    for x in [0.1, 0.7, 2.5, 9.0] {
        let h = 1e-6;
        let fd = (e.eval(x + h).unwrap() - e.eval(x - h).unwrap()) / (2.0 * h);
        assert!((d.eval(x).unwrap() - fd).norm() < 1e-7, "at {x}");
    }
}
