mod common;

use common::{cubic_roots, match_distance, quadratic_roots, random_spectrum};
use num_complex::Complex64;
use sv_density::eigen::{annulus_check, eigenvalues};
use sv_density::matrix::ComplexMatrix;
use sv_density::sampling::{gaussian_matrix, haar_unitary, model_matrix, RngStream};

#[test]
fn trace_and_determinant_identities() {
    let mut meta = RngStream::new(2024, u64::MAX);
    for k in 0..1000u64 {
        let n = 1 + (meta.uniform() * 16.0) as usize;
        let spec = random_spectrum(&mut meta, n, 0.05, 20.0);
        let a = model_matrix(&spec, &mut RngStream::new(5, k)).unwrap();
        let res = eigenvalues(&a);
        assert!(res.converged, "sample {k}");
        let sum: Complex64 = res.values.iter().sum();
        let prod: Complex64 = res.values.iter().product();
        let det = a.determinant();
        assert!((sum - a.trace()).norm() <= 1e-10 * (1.0 + a.frobenius_norm()), "trace, sample {k}");
        assert!((prod - det).norm() <= 1e-8 * (1.0 + det.norm()), "det, sample {k}");
        assert!(annulus_check(&res.values, &spec), "annulus, sample {k}");
    }
}

#[test]
fn two_by_two_against_quadratic_formula() {
    let mut rng = RngStream::new(17, 0);
    for _ in 0..1000 {
        let a = gaussian_matrix(2, &mut rng);
        let tr = a.trace();
        let det = a.determinant();
        let exact = quadratic_roots(-tr, det);
        let got = eigenvalues(&a).values;
        assert!(match_distance(&exact, &got) <= 1e-10, "{exact:?} vs {got:?}");
    }
}

#[test]
fn three_by_three_against_cardano() {
    let mut rng = RngStream::new(17, 1);
    for _ in 0..1000 {
        let a = gaussian_matrix(3, &mut rng);
        let minors = a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(1, 0)] + a[(0, 0)] * a[(2, 2)] - a[(0, 2)] * a[(2, 0)]
            + a[(1, 1)] * a[(2, 2)]
            - a[(1, 2)] * a[(2, 1)];
        let exact = cubic_roots(-a.trace(), minors, -a.determinant());
        let got = eigenvalues(&a).values;
        assert!(match_distance(&exact, &got) <= 1e-10, "{exact:?} vs {got:?}");
    }
}

#[test]
fn unitary_similarity_preserves_spectrum() {
    let mut rng = RngStream::new(31, 0);
    for n in [2usize, 5, 9, 16, 24] {
        for _ in 0..20 {
            let a = gaussian_matrix(n, &mut rng);
            let u = haar_unitary(n, &mut rng).unwrap();
            let b = &(&u * &a) * &u.adjoint();
            let ea = eigenvalues(&a);
            let eb = eigenvalues(&b);
            assert!(ea.converged && eb.converged);
            assert!(match_distance(&ea.values, &eb.values) <= 1e-9, "n={n}");
        }
    }
}

#[test]
fn complex_triangular_and_repeated() {
    let z = |re, im| Complex64::new(re, im);
    let t = ComplexMatrix::from_rows(&[
        vec![z(1.0, 1.0), z(3.0, 0.0), z(0.0, 2.0)],
        vec![z(0.0, 0.0), z(-2.0, 0.5), z(1.0, 1.0)],
        vec![z(0.0, 0.0), z(0.0, 0.0), z(0.5, -3.0)],
    ])
    .unwrap();
    let got = eigenvalues(&t).values;
    assert!(match_distance(&[z(1.0, 1.0), z(-2.0, 0.5), z(0.5, -3.0)], &got) < 1e-13);

    // a random unitary conjugate of 2·I stays 2·I up to rounding
    let mut rng = RngStream::new(8, 8);
    let u = haar_unitary(6, &mut rng).unwrap();
    let two = ComplexMatrix::from_diag(&[z(2.0, 0.0); 6]);
    let b = &(&u * &two) * &u.adjoint();
    let res = eigenvalues(&b);
    assert!(res.converged);
    assert!(res.values.iter().all(|v| (v - z(2.0, 0.0)).norm() < 1e-12));
}

#[test]
fn cubic_oracle_sanity() {
    let z = |re| Complex64::new(re, 0.0);
    // (x−1)(x−2)(x−3) = x³ − 6x² + 11x − 6
    let r = cubic_roots(z(-6.0), z(11.0), z(-6.0));
    assert!(match_distance(&[z(1.0), z(2.0), z(3.0)], &r) < 1e-14);
}
