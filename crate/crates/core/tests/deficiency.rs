use num_complex::Complex64;

use hamsys::deficiency::{self, DeficiencyOptions, Side};
use hamsys::fixtures;
use hamsys::growth::Status;
use hamsys::matrix::MatrixFunction;
use hamsys::system::{IntervalSpec, SystemSpec};

fn system(id: &str) -> SystemSpec {
    fixtures::find(id).unwrap().problem().unwrap().system().unwrap()
}

fn indices(id: &str) -> (usize, usize) {
    let r = deficiency::formal_deficiency_indices(&system(id), &DeficiencyOptions::default()).unwrap();
    assert!(r.conclusive(), "{id}: inconclusive trajectories");
    assert!(r.inequalities_hold, "{id}: index inequalities violated");
    (r.n_tilde_plus, r.n_tilde_minus)
}

#[test]
fn limit_point_half_line() {
    // H = I: one L²(H) solution per half-plane
    assert_eq!(indices("kac-krein"), (1, 1));
}

#[test]
fn integrable_trace_gives_maximal_indices() {
    assert_eq!(indices("canonical-decay"), (2, 2));
}

#[test]
fn unequal_indices_and_their_mirror() {
    assert_eq!(indices("ex3.1"), (1, 2));
    assert_eq!(indices("ex3.1-swapped"), (2, 1));
}

#[test]
fn six_dimensional_unequal_indices() {
    assert_eq!(indices("ex3.3"), (4, 5));
}

#[test]
fn finite_interval_is_quasi_regular() {
    let s = SystemSpec::new(
        IntervalSpec::finite(0.0, 3.0, 0.0).unwrap(),
        MatrixFunction::from_strs(&[&["0", "-1"], &["1", "0"]]).unwrap(),
        MatrixFunction::zeros(2),
        MatrixFunction::from_strs(&[&["1+x", "0"], &["0", "1"]]).unwrap(),
        "finite",
    )
    .unwrap();
    let r = deficiency::finite_interval_indices(&s, &DeficiencyOptions::default()).unwrap();
    assert_eq!((r.n_tilde_plus, r.n_tilde_minus), (2, 2));
    assert_eq!((r.deficiency_plus, r.deficiency_minus), (2, 2));
}

#[test]
fn trajectories_are_monotone_and_classified() {
    let s = system("ex3.1");
    let c = deficiency::l2_solution_count(&s, Complex64::new(0.0, 1.0), Side::Right, &DeficiencyOptions::default()).unwrap();
    assert!(c.monotone);
    assert_eq!(c.bounded + c.divergent + c.inconclusive, 2);
    for t in &c.trajectories {
        assert!(t.values.windows(2).all(|w| w[1] >= w[0] * (1.0 - 1e-9)));
        assert_ne!(t.classification.status, Status::Inconclusive);
    }
}

#[test]
fn real_coefficients_give_equal_indices() {
    let r = deficiency::formal_deficiency_indices(&system("ex3.2"), &DeficiencyOptions::default()).unwrap();
    if r.real_coefficients {
        assert_eq!(r.n_tilde_plus, r.n_tilde_minus);
    }
    let k = deficiency::signature_kappa(&system("ex3.2")).unwrap();
    assert!(k.0 <= r.n_tilde_plus && k.1 <= r.n_tilde_minus);
}

#[test]
fn line_indices_agree_with_gluing() {
    let s = system("diag-line");
    let o = DeficiencyOptions::default();
    let direct = deficiency::line_indices(&s, &o).unwrap();
    let glued = deficiency::glue_line_indices(&s, &o).unwrap();
    assert_eq!(
        (direct.deficiency_plus, direct.deficiency_minus),
        (glued.deficiency_plus, glued.deficiency_minus)
    );
    assert_eq!(direct.halves.len(), 2);
}

#[test]
fn gluing_is_refused_for_non_definite_line_systems() {
    let r = deficiency::glue_line_indices(&system("projector-line"), &DeficiencyOptions::default());
    assert!(matches!(r, Err(hamsys::HamsysError::Refused(_))));
}
