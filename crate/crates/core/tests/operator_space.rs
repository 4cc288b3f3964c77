mod common;

use common::*;
use krylov_core::operator::{apply_liouvillian, build_superoperator, inner_product, MatrixFile};
use krylov_core::{HermitianMatrix, InnerProductSpec, OperatorVector};
use proptest::prelude::*;

fn thermal_pair_check(beta: f64, seed: u64) {
    let mut r = rng(seed);
    for case in 0..200 {
        let d = 2 + case % 7;
        let h = random_hermitian(&mut r, d, 1.0, false);
        let spec = InnerProductSpec::thermal(beta, &h).unwrap();
        let a = random_observable(&mut r, d).with_spec(spec.clone());
        let b = random_observable(&mut r, d).with_spec(spec.clone());
        let la = apply_liouvillian(&h, &a).unwrap();
        let lb = apply_liouvillian(&h, &b).unwrap();
        let lhs = inner_product(&a, &lb, &spec).unwrap();
        let rhs = inner_product(&la, &b, &spec).unwrap();
        assert!((lhs - rhs).norm() < 1e-10, "beta={beta} case={case}: {lhs} vs {rhs}");
        let seed_val = inner_product(&a, &la, &spec).unwrap();
        assert!(seed_val.re.abs() < 1e-10 && seed_val.im.abs() < 1e-10);
    }
}

#[test]
fn liouvillian_self_adjoint_infinite_temperature() {
    thermal_pair_check(0.0, 11);
}

#[test]
fn liouvillian_self_adjoint_thermal() {
    thermal_pair_check(1.0, 12);
}

#[test]
fn commutator_matches_matrix_products() {
    let mut r = rng(5);
    for d in 1..=6 {
        let h = random_hermitian(&mut r, d, 1.0, false);
        let a = random_observable(&mut r, d);
        let got = apply_liouvillian(&h, &a).unwrap();
        let want = commutator(d, h.entries(), a.components());
        for (x, y) in got.components().iter().zip(&want) {
            assert!((x - y).norm() < 1e-13);
        }
    }
}

#[test]
fn superoperator_matches_columnwise_commutators() {
    let mut r = rng(6);
    for d in 1..=5 {
        let h = random_hermitian(&mut r, d, 1.0, false);
        let m = build_superoperator(&h, None).unwrap();
        let want = superoperator(d, h.entries());
        for (x, y) in m.as_slice().iter().zip(&want) {
            assert!((x - y).norm() < 1e-13);
        }
    }
    let h = random_hermitian(&mut r, 5, 1.0, false);
    assert!(build_superoperator(&h, Some(4)).is_err());
}

#[test]
fn dense_evolution_is_unitary() {
    let mut r = rng(7);
    for d in 2..=4 {
        let h = random_hermitian(&mut r, d, 1.0, false);
        let a = random_observable(&mut r, d);
        let n = d * d;
        let m = superoperator(d, h.entries());
        let norm0 = hs_inner(d, a.components(), a.components()).re.sqrt();
        for &t in &[0.3, 1.0, 4.0, 10.0] {
            let gen: Vec<C64> = m.iter().map(|z| z * C64::new(0.0, t)).collect();
            let at = matvec(n, &expm(n, &gen), a.components());
            let norm = hs_inner(d, &at, &at).re.sqrt();
            assert!((norm - norm0).abs() < 1e-9);
            // the Heisenberg picture e^{iHt} A e^{-iHt}
            let u: Vec<C64> = expm(d, &h.entries().iter().map(|z| z * C64::new(0.0, t)).collect::<Vec<_>>());
            let ud: Vec<C64> = (0..d * d).map(|k| u[(k / d) + (k % d) * d].conj()).collect();
            let direct = matmul(d, &matmul(d, &u, a.components()), &ud);
            for (x, y) in at.iter().zip(&direct) {
                assert!((x - y).norm() < 1e-9);
            }
        }
    }
}

#[test]
fn matrix_file_round_trip() {
    let mut r = rng(8);
    let h = random_hermitian(&mut r, 3, 1.0, false);
    let file = h.to_file();
    let text = serde_json::to_string(&file).unwrap();
    let back: MatrixFile<f64> = serde_json::from_str(&text).unwrap();
    assert_eq!(HermitianMatrix::from_file(&back).unwrap(), h);
    let o = OperatorVector::from_file(&back).unwrap();
    assert_eq!(o.components(), h.entries());
}

#[test]
fn rejects_non_hermitian_and_bad_dimensions() {
    let m = vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)];
    assert!(HermitianMatrix::new(2, m).is_err());
    let mut r = rng(9);
    let h = random_hermitian(&mut r, 3, 1.0, false);
    let a = random_observable(&mut r, 2);
    assert!(apply_liouvillian(&h, &a).is_err());
    let unbound = InnerProductSpec::new(1.0, 0.5).unwrap();
    assert!(inner_product(&a, &a, &unbound).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn inner_product_is_conjugate_symmetric_and_positive(seed in any::<u64>(), d in 1usize..6, beta in 0.0f64..3.0) {
        let mut r = rng(seed);
        let h = random_hermitian(&mut r, d, 1.0, false);
        let spec = InnerProductSpec::thermal(beta, &h).unwrap();
        let a = random_observable(&mut r, d);
        let b = random_observable(&mut r, d);
        let ab = inner_product(&a, &b, &spec).unwrap();
        let ba = inner_product(&b, &a, &spec).unwrap();
        prop_assert!((ab - ba.conj()).norm() < 1e-12);
        let aa = inner_product(&a, &a, &spec).unwrap();
        prop_assert!(aa.re > 0.0 && aa.im.abs() < 1e-12);
    }

    #[test]
    fn liouvillian_second_moment_is_non_negative(seed in any::<u64>(), d in 1usize..6) {
        let mut r = rng(seed);
        let h = random_hermitian(&mut r, d, 1.0, false);
        let a = random_observable(&mut r, d);
        let la = apply_liouvillian(&h, &a).unwrap();
        let lla = apply_liouvillian(&h, &la).unwrap();
        let m2 = a.inner(&lla).unwrap();
        prop_assert!(m2.re >= -1e-12 && m2.im.abs() < 1e-12);
        prop_assert!((m2.re - la.inner(&la).unwrap().re).abs() < 1e-12);
    }
}
