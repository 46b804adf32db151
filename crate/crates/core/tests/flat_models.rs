use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use twistorlab_core::flat_models::*;
use twistorlab_core::laurent_linalg::Mat;
use num_traits::Zero;
use twistorlab_core::scalar::QI;

type P = MultiPoly<QI>;

#[test]
fn sl2_relations_up_to_k6() {
    for k in 0..=6 {
        assert!(IrrepUk::<QI>::new(k).commutation_holds(), "k = {k}");
    }
}

#[test]
fn invariant_forms_are_unique_for_even_k() {
    for k in (2..=8).step_by(2) {
        assert_eq!(invariant_symmetric_forms::<QI>(k).len(), 1, "k = {k}");
        let f = invariant_form::<QI>(k).unwrap();
        assert!(f.is_invariant());
        assert_eq!(f.q, f.q.transpose());
        assert!(f.q.inverse().is_some());
    }
    for k in [1, 3, 5] {
        assert!(invariant_symmetric_forms::<QI>(k).is_empty());
        assert_eq!(invariant_bilinear_forms::<QI>(k).len(), 1);
    }
}

// Oracle: the first transvectant (k−1)·a′·b − a·b′ of a ∈ U₁, b ∈ U_{k−1}.
fn transvectant(k: u32, a: &[QI], b: &[QI]) -> Vec<QI> {
    let n = k as usize;
    let mut out = vec![QI::int(0); n];
    for (j, bj) in b.iter().enumerate() {
        out[j] = out[j].clone() + QI::int(k as i64 - 1) * a[1].clone() * bj.clone();
        if j >= 1 {
            let d = QI::int(j as i64) * bj.clone();
            out[j - 1] = out[j - 1].clone() - a[0].clone() * d.clone();
            out[j] = out[j].clone() - a[1].clone() * d;
        }
    }
    assert!(out[n - 1].is_zero());
    out.truncate(n - 1);
    out
}

#[test]
fn clebsch_projections_match_oracles() {
    for k in [2u32, 4, 6] {
        let c = clebsch_projections::<QI>(k).unwrap();
        assert!(c.verify());
        assert_eq!(2 * k, (k - 1) + (k + 1));
        let f = k as usize;
        // P_low is proportional to the transvectant on product vectors.
        let mut ratio: Option<QI> = None;
        for a in 0..2 {
            for j in 0..f {
                let mut av = vec![QI::int(0); 2];
                av[a] = QI::int(1);
                let mut bv = vec![QI::int(0); f];
                bv[j] = QI::int(1);
                let mut e = vec![QI::int(0); 2 * f];
                e[a * f + j] = QI::int(1);
                let got = c.p_low.mul_vec(&e);
                let want = transvectant(k, &av, &bv);
                for (g, w) in got.iter().zip(&want) {
                    if w.is_zero() {
                        assert!(g.is_zero());
                    } else {
                        let r = g.clone() / w.clone();
                        match &ratio {
                            None => ratio = Some(r),
                            Some(r0) => assert_eq!(&r, r0),
                        }
                    }
                }
            }
        }
        assert!(ratio.is_some());
    }
}

#[test]
fn p_high_is_symmetrization_for_k2() {
    let c = clebsch_projections::<QI>(2).unwrap();
    let one = QI::int(1);
    let zero = QI::int(0);
    assert_eq!(
        c.p_high,
        Mat::from_rows(vec![
            vec![one.clone(), zero.clone(), zero.clone(), zero.clone()],
            vec![zero.clone(), one.clone(), one.clone(), zero.clone()],
            vec![zero.clone(), zero.clone(), zero.clone(), one.clone()],
        ])
    );
    // P_low kills the symmetric tensor 1⊗X + X⊗1.
    assert!(c.p_low.mul_vec(&[zero.clone(), one.clone(), one.clone(), zero]).iter().all(|x| x.is_zero()));
}

#[test]
fn prop44_random_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(44);
    let w2 = P::var(1, 0).pow(2);
    for _ in 0..10 {
        let z = QI::random(&mut rng, 5, true);
        assert!(harmonic_check_prop44(4, &w2, &z).unwrap().is_zero());
    }
    let lin = P::linear(&[QI::int(3)]);
    for k in [2, 4, 6] {
        let z = QI::random(&mut rng, 5, true);
        assert!(harmonic_check_prop44(k, &lin, &z).unwrap().is_zero());
        let w = P::var(1, 0).pow(4);
        assert!(harmonic_check_prop44(k, &w, &z).unwrap().is_zero());
    }
}

#[test]
fn horizontal_conformality_k2_k4() {
    for k in [2, 4, 6] {
        let r = horizontal_conformality::<QI>(k).unwrap();
        assert!(r.conformal, "k = {k}");
        assert!(r.negative_control_fails);
    }
}

#[test]
fn asd_decomposition_dimensions() {
    for f in 1..=4usize {
        let asd = asd_basis::<QI>(f);
        let sd = sd_basis::<QI>(f);
        assert_eq!(asd.len(), f * (f + 1) / 2);
        assert_eq!(sd.len(), 3 * f * (f - 1) / 2);
        assert_eq!(asd.len() + sd.len(), 2 * f * (2 * f - 1) / 2);
        let cols: Vec<Vec<QI>> = asd.iter().chain(&sd).map(|w| w.omega.iter().cloned().collect()).collect();
        if !cols.is_empty() {
            assert_eq!(Mat::from_columns(&cols, 4 * f * f).rank(), cols.len());
        }
        for w in &asd {
            let (a, s) = w.decompose();
            assert_eq!(&a, w);
            assert!(s.omega.is_zero());
        }
        for w in &sd {
            let (a, s) = w.decompose();
            assert!(a.omega.is_zero());
            assert_eq!(&s, w);
            // Three values of z detect the defect.
            let z_vals = [QI::int(0), QI::int(1), QI::int(2)];
            let hit = z_vals.iter().any(|z| {
                let c = w.isotropy_coefficients();
                let m = c[0].add(&c[1].scale(z)).add(&c[2].scale(&(z.clone() * z.clone())));
                !m.is_zero()
            });
            assert!(hit);
        }
    }
}

#[test]
fn isotropy_by_direct_evaluation() {
    // ω(ℓ_z⊗f, ℓ_z⊗g) evaluated directly against the coefficient form.
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let f = 2;
    let a = Mat::from_fn(4, 4, |_, _| QI::random(&mut rng, 4, false));
    let omega = a.sub(&a.transpose());
    let w = TwoFormOnE::new(omega.clone(), f).unwrap();
    let c = w.isotropy_coefficients();
    for z in [QI::int(-1), QI::int(3), QI::ratio(1, 2)] {
        let lz = [-z.clone(), QI::int(1)];
        let direct = Mat::from_fn(f, f, |i, j| {
            let mut acc = QI::int(0);
            for x in 0..2 {
                for y in 0..2 {
                    acc += lz[x].clone() * lz[y].clone() * omega[(x * f + i, y * f + j)].clone();
                }
            }
            acc
        });
        let poly = c[0].add(&c[1].scale(&z)).add(&c[2].scale(&(z.clone() * z.clone())));
        assert_eq!(direct, poly);
    }
}
