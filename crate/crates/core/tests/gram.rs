use std::f64::consts::PI;

use num_complex::Complex64;

use hamsys::fixtures;
use hamsys::gram::{self, integrate_matrix};
use hamsys::matrix::{Coefficient, MatrixFunction};

fn system(id: &str) -> hamsys::system::SystemSpec {
    fixtures::find(id).unwrap().problem().unwrap().system().unwrap()
}

#[test]
fn identity_hamiltonian_is_definite() {
    let s = system("kac-krein");
    let r = gram::rank_of_system(&s).unwrap();
    assert!(r.stabilized);
    assert_eq!(r.rank, s.n);
    assert!(r.is_definite());
}

#[test]
fn constant_projector_has_rank_one() {
    let s = system("ml-s2.2");
    let r = gram::rank_of_system(&s).unwrap();
    assert_eq!(r.rank, 1);
    assert!(!r.is_definite());
    assert_eq!(r.kernel.ncols(), 1);
}

#[test]
fn gram_matrix_is_hermitian_and_nonnegative() {
    for f in fixtures::all() {
        let Ok(s) = f.problem().and_then(|p| p.system()) else { continue };
        let (a, b) = s.interval.clip(s.interval.x0 - 4.0, s.interval.x0 + 4.0);
        let g = gram::gram_matrix(&s, Complex64::new(0.0, 1.0), a, b).unwrap();
        let m = g.matrix().unwrap();
        let skew = (&m - m.adjoint()).norm() / m.norm().max(1.0);
        assert!(skew < 1e-10, "{}: skew {skew:e}", f.id);
        assert!(g.singular_values().iter().all(|&v| v >= 0.0));
    }
}

#[test]
fn quadrature_of_rotating_projector() {
    let h = Coefficient::from(
        MatrixFunction::from_strs(&[&["cos(x)^2", "cos(x)*sin(x)"], &["cos(x)*sin(x)", "sin(x)^2"]]).unwrap(),
    );
    let m = integrate_matrix(&h, 0.0, PI, &[]).unwrap();
    assert!((m[(0, 0)].re - PI / 2.0).abs() < 1e-12);
    assert!((m[(1, 1)].re - PI / 2.0).abs() < 1e-12);
    assert!(m[(0, 1)].norm() < 1e-12);
}

#[test]
fn kernel_does_not_depend_on_lambda() {
    let s = system("ml-s2.2");
    let k = gram::kernel_lambda_independence(&s, &gram::kernel_probe_lambdas()).unwrap();
    assert!(k.max_angle <= 1e-6, "angle {}", k.max_angle);
}
