use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use twistorlab_core::cp1_bundles::Bundle;
use twistorlab_core::laurent_linalg::{LaurentMatrix, LaurentPoly, Mat};
use twistorlab_core::rho_quat::{space_from_bundle, SectionModel};
use twistorlab_core::scalar::QI;
use twistorlab_core::ward::*;
use twistorlab_core::Error;

fn line_class(k: i64, b: Vec<LaurentPoly<QI>>) -> ExtensionClass {
    let rows = b.into_iter().map(|p| vec![p]).collect();
    ExtensionClass::new(Bundle::line(k), LaurentMatrix::from_rows(rows)).unwrap()
}

#[test]
fn random_classes_over_lines() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for k in [2i64, 4] {
        let base = Bundle::line(k);
        let model = SectionModel::canonical(&base).unwrap();
        let mut ones = 0;
        for c in random_classes(&mut rng, &base, (k - 1) as usize, 15, -2, k + 2) {
            let r = ward_identity_check_with(&c, &model, WardOptions::default()).unwrap();
            assert!(r.passed(), "{r:?}");
            ones += r.all_ones as usize;
        }
        assert!(ones > 0);
    }
}

#[test]
fn identity_on_gauged_and_mixed_bases() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for degrees in [vec![2], vec![2, 1], vec![3, 2], vec![2, 2]] {
        let base = Bundle::random_with_degrees(&mut rng, &degrees, 1);
        let model = SectionModel::canonical(&base).unwrap();
        let w = degrees.iter().map(|a| (a - 1) as usize).sum::<usize>().max(1);
        for c in random_classes(&mut rng, &base, w, 4, -2, 4) {
            let r = ward_identity_check_with(&c, &model, WardOptions::default()).unwrap();
            assert!(r.passed(), "{degrees:?}: {r:?}");
        }
    }
}

#[test]
fn identity_in_quotient_coordinates() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let s = space_from_bundle::<QI>(&twistorlab_core::cp1_bundles::SplittingType::new(vec![4])).unwrap();
    let model = SectionModel::from_quotient(&s).unwrap();
    for c in random_classes(&mut rng, &model.bundle, 3, 5, -2, 6) {
        let r = ward_identity_check_with(&c, &model, WardOptions::default()).unwrap();
        assert!(r.passed(), "{r:?}");
    }
}

#[test]
fn normal_form_preserves_the_identity_sides() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let base = Bundle::random_with_degrees(&mut rng, &[3, 1], 1);
    for c in random_classes(&mut rng, &base, 2, 5, -3, 5) {
        let nf = class_normal_form(&c);
        let a = ward_identity_check(&c, WardOptions::default()).unwrap();
        let b = ward_identity_check(&nf, WardOptions::default()).unwrap();
        assert_eq!(a.class_matrix, b.class_matrix);
        assert_eq!(a.extension_splitting, b.extension_splitting);
    }
}

#[test]
fn trapezoid_exact_within_aliasing_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for _ in 0..20 {
        let p = LaurentPoly::random(&mut rng, -8, 8, 5, 0.7);
        let n = 2 * 8 + 2;
        let exact = twistorlab_core::scalar::Field::to_c64(&p.coeff(0));
        assert!((trapezoid_mean(&p, n) - exact).norm() < 1e-12);
    }
}

#[test]
fn nonpositive_base_is_rejected() {
    let c = ExtensionClass::new(Bundle::from_degrees(&[1, 0]), LaurentMatrix::from_rows(vec![vec![LaurentPoly::z(1), LaurentPoly::zero()]]))
        .unwrap();
    assert!(matches!(ward_identity_check(&c, WardOptions::default()), Err(Error::NotPositive(_))));
}

#[test]
fn opposite_sign_is_literal() {
    let r = ward_identity_check(&line_class(2, vec![LaurentPoly::z(1)]), WardOptions::default()).unwrap();
    assert_eq!(r.scalar, QI::int(1));
    assert_eq!(r.rho_prime_restriction, Mat::from_rows(vec![vec![QI::int(-1)]]));
    assert_eq!(r.class_matrix, Mat::from_rows(vec![vec![QI::int(1)]]));
}
