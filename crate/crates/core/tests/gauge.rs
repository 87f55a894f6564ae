use num_complex::Complex64;

use hamsys::deficiency::{self, DeficiencyOptions};
use hamsys::fixtures;
use hamsys::gauge::{self, apply_gauge, GaugeMap};
use hamsys::gram;
use hamsys::matrix::MatrixFunction;
use hamsys::propagator::FundamentalSolution;
use hamsys::system::{IntervalSpec, Problem, SystemSpec};

fn system(id: &str) -> SystemSpec {
    fixtures::find(id).unwrap().problem().unwrap().system().unwrap()
}

fn rotation() -> GaugeMap {
    GaugeMap::Symbolic(MatrixFunction::from_strs(&[&["cos(x)", "-sin(x)"], &["sin(x)", "cos(x)"]]).unwrap())
}

#[test]
fn gauge_maps_solutions_to_solutions() {
    // Y_gauged(x) = U(x)⁻¹ Y(x) U(x0)
    let s = system("ex3.2");
    let u = rotation();
    let g = apply_gauge(&s, &u).unwrap();
    let lambda = Complex64::new(0.4, 0.9);
    let y = FundamentalSolution::solve(&s, lambda, 0.0, 6.0).unwrap();
    let z = FundamentalSolution::solve(&g, lambda, 0.0, 6.0).unwrap();
    let u0 = u.evaluate(0.0).unwrap();
    for x in [1.0, 3.5, 6.0] {
        let ux = u.evaluate(x).unwrap();
        let expect = ux.try_inverse().unwrap() * y.matrix(x).unwrap() * &u0;
        let err = (z.matrix(x).unwrap() - &expect).norm() / expect.norm();
        assert!(err < 1e-8, "x = {x}: relative error {err:e}");
    }
}

#[test]
fn gauge_preserves_rank_and_indices() {
    let s = system("ex3.1-swapped");
    let g = apply_gauge(&s, &rotation()).unwrap();
    assert_eq!(gram::rank_of_system(&g).unwrap().rank, gram::rank_of_system(&s).unwrap().rank);
    let o = DeficiencyOptions::default();
    let a = deficiency::formal_deficiency_indices(&s, &o).unwrap();
    let b = deficiency::formal_deficiency_indices(&g, &o).unwrap();
    assert_eq!((a.n_tilde_plus, a.n_tilde_minus), (2, 1));
    assert_eq!((b.n_tilde_plus, b.n_tilde_minus), (2, 1));
}

#[test]
fn gauge_inverse_round_trip() {
    let u = rotation();
    let v = u.inverse().unwrap();
    for x in [0.0, 0.3, 2.0] {
        let p = u.evaluate(x).unwrap() * v.evaluate(x).unwrap();
        assert!((p - nalgebra::DMatrix::identity(2, 2)).norm() < 1e-13);
    }
}

#[test]
fn canonical_form_removes_b() {
    let s = SystemSpec::new(
        IntervalSpec::finite(0.0, 2.0, 0.0).unwrap(),
        MatrixFunction::from_strs(&[&["0", "-1"], &["1", "0"]]).unwrap(),
        MatrixFunction::from_strs(&[&["x", "0"], &["0", "1"]]).unwrap(),
        MatrixFunction::from_strs(&[&["1", "0"], &["0", "1+x^2"]]).unwrap(),
        "with B",
    )
    .unwrap();
    let cf = gauge::canonicalize(&s, 0.0, 2.0, 65).unwrap();
    assert!(cf.max_b_residual < 1e-8, "residual {}", cf.max_b_residual);
    assert!(cf.max_j_defect < 1e-8, "J defect {}", cf.max_j_defect);
}

#[test]
fn constant_j_reduction_keeps_j_at_base_point() {
    let s = SystemSpec::new(
        IntervalSpec::finite(0.0, 1.0, 0.0).unwrap(),
        MatrixFunction::from_strs(&[&["i*(2+x)", "0"], &["0", "-i"]]).unwrap(),
        MatrixFunction::from_strs(&[&["i/2", "0"], &["0", "0"]]).unwrap(),
        MatrixFunction::identity(2),
        "variable J",
    )
    .unwrap();
    let r = gauge::reduce_constant_j(&s, 0.0, 1.0, 33, 1e-6).unwrap();
    assert!(r.max_j_defect < 1e-8, "J defect {}", r.max_j_defect);
    assert!(r.min_gap > 1.0);
}

#[test]
fn sturm_liouville_embedding_is_a_symmetric_system() {
    let f = fixtures::find("sl-quartic").unwrap();
    let Problem::SturmLiouville(sl) = f.problem().unwrap() else { panic!("expected a Sturm–Liouville fixture") };
    let s = gauge::embed_sturm_liouville(&sl).unwrap();
    assert_eq!(s.n, 2 * sl.n);
    for x in [0.0, 1.5, 10.0] {
        let j = s.j.evaluate(x).unwrap();
        assert!((&j + j.adjoint()).norm() < 1e-14, "J not skew at {x}");
        let h = s.h.evaluate(x).unwrap();
        assert!((&h - h.adjoint()).norm() < 1e-14, "H not hermitian at {x}");
    }
}

#[test]
fn square_doubles_the_dimension() {
    let s = system("kac-krein");
    let sq = gauge::square_system(&s).unwrap();
    assert_eq!(sq.n, 2 * s.n);
}
