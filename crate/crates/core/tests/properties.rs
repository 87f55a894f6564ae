use num_complex::Complex64;
use proptest::prelude::*;

use hamsys::expr::Expr;
use hamsys::matrix::MatrixFunction;
use hamsys::ode::{self, Control, OdeOptions};
use hamsys::propagator::FundamentalSolution;
use hamsys::system::{IntervalSpec, SystemSpec};

fn constant_system(h: [f64; 3], b: f64) -> SystemSpec {
    let rows = [
        [format!("{}", h[0]), format!("{}", h[1])],
        [format!("{}", h[1]), format!("{}", h[2])],
    ];
    let h = MatrixFunction::from_strs(&[&[&rows[0][0], &rows[0][1]], &[&rows[1][0], &rows[1][1]]]).unwrap();
    let b = MatrixFunction::from_strs(&[&[&format!("{b}"), "0"], &["0", "0"]]).unwrap();
    SystemSpec::new(
        IntervalSpec::finite(-3.0, 3.0, 0.0).unwrap(),
        MatrixFunction::from_strs(&[&["0", "-1"], &["1", "0"]]).unwrap(),
        b,
        h,
        "random",
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    /// Y(λ̄)* J Y(λ) = J for every symmetric system.
    #[test]
    fn symplectic_identity(
        d1 in 0.1f64..3.0, d2 in 0.1f64..3.0, off in -1.0f64..1.0, b in -2.0f64..2.0,
        re in -2.0f64..2.0, im in -1.5f64..1.5, x in -3.0f64..3.0,
    ) {
        let off = off * (d1 * d2).sqrt() * 0.9;
        let s = constant_system([d1, off, d2], b);
        let lambda = Complex64::new(re, im);
        let y = FundamentalSolution::solve(&s, lambda, -3.0, 3.0).unwrap().matrix(x).unwrap();
        let z = FundamentalSolution::solve(&s, lambda.conj(), -3.0, 3.0).unwrap().matrix(x).unwrap();
        let j = s.j.evaluate(0.0).unwrap();
        let defect = (z.adjoint() * &j * &y - &j).norm() / (y.norm() * z.norm());
        prop_assert!(defect < 1e-8, "defect {:e}", defect);
    }

    /// The integrator reproduces y' = a y.
    #[test]
    fn linear_scalar_ode(a_re in -2.0f64..2.0, a_im in -5.0f64..5.0, t in 0.1f64..4.0) {
        let a = Complex64::new(a_re, a_im);
        let out = ode::integrate(
            |_x, y, dy| { dy[0] = a * y[0]; Ok(()) },
            0.0,
            &[Complex64::new(1.0, 0.0)],
            t,
            &[],
            &OdeOptions::default(),
            |_, _| Control::Continue,
        ).unwrap();
        let exact = (a * t).exp();
        prop_assert!((out.y[0] - exact).norm() <= 1e-8 * exact.norm().max(1.0));
    }

    /// Parsed polynomials evaluate like the direct formula.
    #[test]
    fn polynomial_expressions(c0 in -5.0f64..5.0, c1 in -5.0f64..5.0, c2 in -5.0f64..5.0, x in -10.0f64..10.0) {
        let e = Expr::parse(&format!("({c0}) + ({c1})*x + ({c2})*x^2")).unwrap();
        let v = e.eval(x).unwrap();
        let direct = c0 + c1 * x + c2 * x * x;
        prop_assert!((v.re - direct).abs() <= 1e-12 * (1.0 + direct.abs()));
        prop_assert!(v.im.abs() <= 1e-12);
        let d = e.derivative().eval(x).unwrap();
        prop_assert!((d.re - (c1 + 2.0 * c2 * x)).abs() <= 1e-11 * (1.0 + d.re.abs()));
    }
}
