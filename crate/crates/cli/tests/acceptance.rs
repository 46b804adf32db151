use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use twistorlab_core::cp1_bundles::{Bundle, SplittingType};
use twistorlab_core::flat_models::{
    clebsch_projections, invariant_form, invariant_symmetric_forms, laplacian_hk, IrrepUk, MultiPoly,
};
use twistorlab_core::gibbons_hawking::{verify_suite, Expr, MonopoleData, SuiteConfig};
use twistorlab_core::laurent_linalg::{LaurentMatrix, LaurentPoly, Mat};
use twistorlab_core::penrose::{prop52_identity, Germ, PenroseModel};
use twistorlab_core::rho_quat::{space_from_bundle, RhoQuatSpace, SectionModel};
use twistorlab_core::scalar::{Field, QI};
use twistorlab_core::ward::{
    cauchy_alpha, random_classes, trapezoid_mean, ward_identity_check_with, ward_scalar, ExtensionClass,
    PolesProjection, WardOptions,
};

type P = LaurentPoly<QI>;
type M = LaurentMatrix<QI>;

fn q(n: i64) -> QI {
    QI::int(n)
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

// ---------------------------------------------------------------- bundles

/// Unimodular polynomial matrix: permuted product of unipotent triangular
/// factors with polynomial entries of degree ≤ `deg`.
fn unimodular(rng: &mut ChaCha8Rng, n: usize, deg: i64) -> M {
    let entry = |rng: &mut ChaCha8Rng| P::random(rng, 0, deg, 3, 0.6);
    let upper = M::from_fn(n, n, |i, j| match i.cmp(&j) {
        std::cmp::Ordering::Equal => P::constant(q(1)),
        std::cmp::Ordering::Less => entry(rng),
        _ => P::zero(),
    });
    let lower = M::from_fn(n, n, |i, j| match i.cmp(&j) {
        std::cmp::Ordering::Equal => P::constant(q(1)),
        std::cmp::Ordering::Greater => entry(rng),
        _ => P::zero(),
    });
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        perm.swap(i, rng.gen_range(0..=i));
    }
    upper.mul(&lower).select_rows(&perm)
}

/// `G₀(z)·diag(z^{aᵢ})·G_∞(1/z)`, a transition of `⊕ O(aᵢ)`.
fn conjugate(rng: &mut ChaCha8Rng, degrees: &[i64], deg: i64) -> Bundle<QI> {
    let n = degrees.len();
    let g0 = unimodular(rng, n, deg);
    let g_inf = unimodular(rng, n, deg).reflect();
    Bundle::new(g0.mul(&M::diag_monomials(degrees)).mul(&g_inf)).expect("conjugate is a unit")
}

fn constant_unit(m: &M) -> bool {
    let d = m.det();
    d.num_terms() == 1 && d.coeff(0) != q(0)
}

fn sorted_desc(mut v: Vec<i64>) -> Vec<i64> {
    v.sort_unstable_by(|a, b| b.cmp(a));
    v
}

fn criterion_1() -> Result<String, String> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let count = 200;
    for trial in 0..count {
        let n = rng.gen_range(1..=4);
        let degrees: Vec<i64> = (0..n).map(|_| rng.gen_range(-3..=3)).collect();
        let b = conjugate(&mut rng, &degrees, 2);
        let report = b.split_report();
        let expected = sorted_desc(degrees.clone());
        ensure(report.splitting.degrees == expected, || {
            format!("trial {trial}: {:?} recovered as {:?}", expected, report.splitting.degrees)
        })?;
        let g = &report.gauge;
        ensure(g.a0.is_polynomial() && constant_unit(&g.a0), || format!("trial {trial}: A0 is not in GL(n, C[z])"))?;
        ensure(g.a_inf.is_polynomial() && constant_unit(&g.a_inf), || format!("trial {trial}: Ainf is not in GL(n, C[w])"))?;
        let product = g.a0.mul(b.transition()).mul(&g.a_inf.reflect());
        ensure(product == M::diag_monomials(&expected), || format!("trial {trial}: certificate does not multiply out"))?;
    }
    let t = start.elapsed();
    ensure(t < Duration::from_secs(30), || format!("runtime {t:?} >= 30 s"))?;
    Ok(format!("{count}/{count} conjugates exact, certificates verified in {:.1} s", t.as_secs_f64()))
}

fn criterion_2() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let count = 100;
    for trial in 0..count {
        let n = rng.gen_range(1..=4);
        let degrees: Vec<i64> = (0..n).map(|_| rng.gen_range(0..=3)).collect();
        let b = conjugate(&mut rng, &degrees, 2);
        let expected: i64 = degrees.iter().map(|a| a + 1).sum();
        let direct = b.h0_dim_direct() as i64;
        ensure(direct == expected, || format!("trial {trial}: {degrees:?} h0 direct {direct} vs {expected}"))?;
        let from_split: i64 = b.splitting_type().degrees.iter().map(|a| a + 1).sum();
        ensure(from_split == expected, || format!("trial {trial}: splitting gives {from_split}"))?;
        let basis = b.h0_basis();
        ensure(basis.sections.iter().all(|s| s.is_section_of(&b)), || format!("trial {trial}: basis element is not a section"))?;
        ensure(basis.coeff_matrix().rank() as i64 == expected, || format!("trial {trial}: basis is dependent"))?;
    }
    Ok(format!("{count}/{count} bundles: direct h0 = sum(a_i + 1)"))
}

// ---------------------------------------------------------------- ward

/// `p = ρ₁·K₁` from the definition: `ξ_λ = λ∘ρ` on `e₁⊗F`, zero on `e₀⊗F`.
fn poles_oracle(s: &RhoQuatSpace<QI>, kernel: &Mat<QI>) -> Mat<QI> {
    let f = s.dim_f;
    let rho1 = s.rho.block(0, f, s.dim_u, f);
    rho1.mul(&kernel.block(f, 0, f, kernel.cols()))
}

fn criterion_3() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut scalars: Vec<QI> = Vec::new();
    let (mut ones, mut total) = (0usize, 0usize);
    for k in [2i64, 4, 6] {
        let base = Bundle::line(k);
        let model = SectionModel::canonical(&base).map_err(|e| e.to_string())?;
        let w = (k - 1) as usize;
        let kernel = PolesProjection::new(&model.space).map_err(|e| e.to_string())?.kernel;
        ensure(model.space.rho.mul(&kernel).is_zero() && kernel.cols() == w, || format!("k = {k}: kernel basis"))?;
        let p = poles_oracle(&model.space, &kernel);
        for (i, c) in random_classes(&mut rng, &base, w, 50, -3, k + 2).into_iter().enumerate() {
            let r = ward_identity_check_with(&c, &model, WardOptions::default()).map_err(|e| format!("k = {k} #{i}: {e}"))?;
            let ext = extension_class_total(&c);
            // (a) nonnegative: h⁰(𝒰′*(−1)) = 0 by direct solve.
            ensure(ext.dual().twist(-1).h0_dim_direct() == 0, || format!("k = {k} #{i}: extension has a negative summand"))?;
            ensure(r.extension_nonnegative, || format!("k = {k} #{i}: report says negative"))?;
            // (b) kernel sub-bundle trivial, with the H⁰ sequence exact.
            ensure(r.kernel_subbundle_trivial, || format!("k = {k} #{i}: kernel sub-bundle not trivial"))?;
            ensure(ext.h0_dim_direct() == base.h0_dim_direct() + w, || format!("k = {k} #{i}: H0 sequence not exact"))?;
            ensure(ext.twist(-1).h0_dim_direct() == base.twist(-1).h0_dim_direct(), || format!("k = {k} #{i}: F' != F"))?;
            // (c) all ones ⇔ invertible; with rank k and degree k, all ones ⇔ h⁰(𝒰′(−2)) = 0.
            let all_ones = ext.twist(-2).h0_dim_direct() == 0;
            let invertible = r.rho_prime_restriction.rows() == w && r.rho_prime_restriction.rank() == w;
            ensure(all_ones == invertible, || format!("k = {k} #{i}: all-ones {all_ones} but invertible {invertible}"))?;
            ensure(r.extension_splitting.is_all_ones() == all_ones, || format!("k = {k} #{i}: splitting disagrees with h0"))?;
            ones += all_ones as usize;
            total += 1;
            // (d) class by exact coefficient extraction against the section basis.
            let h = c.cocycle.mul(&c.base.transition().inverse().unwrap());
            let alpha = Mat::from_fn(w, model.u.dim(), |a, j| {
                (0..c.base.rank()).fold(q(0), |acc, l| acc + (&h[(a, l)] * &model.u.sections[j].s0[l]).coeff(0))
            });
            let class = alpha.mul(&p);
            ensure(class == r.class_matrix, || format!("k = {k} #{i}: class matrix differs from oracle"))?;
            if let Some((a, b)) = first_nonzero(&class) {
                let s = -(r.rho_prime_restriction[(a, b)].clone() / class[(a, b)].clone());
                ensure(r.rho_prime_restriction == class.scale(&-s.clone()), || format!("k = {k} #{i}: not a scalar multiple"))?;
                if !scalars.contains(&s) {
                    scalars.push(s);
                }
            } else {
                ensure(r.rho_prime_restriction.is_zero(), || format!("k = {k} #{i}: zero class, nonzero restriction"))?;
            }
        }
    }
    ensure(scalars.len() == 1, || format!("scalars {scalars:?} are not a single global s"))?;
    ensure(&scalars[0] == ward_scalar(), || format!("s = {} differs from the fixed scalar", scalars[0]))?;
    ensure(ones > 0 && ones < total, || format!("all-ones in {ones}/{total}: both sides of (c) not exercised"))?;
    Ok(format!("{total} classes exact, s = {}, all-ones {ones}/{total}", scalars[0]))
}

fn extension_class_total(c: &ExtensionClass) -> Bundle<QI> {
    let w = c.w_dim;
    let top = M::identity(w).hstack(&c.cocycle);
    let bottom = M::zeros(c.base.rank(), w).hstack(c.base.transition());
    Bundle::new(top.vstack(&bottom)).expect("block triangular unit")
}

fn first_nonzero(m: &Mat<QI>) -> Option<(usize, usize)> {
    (0..m.rows()).flat_map(|i| (0..m.cols()).map(move |j| (i, j))).find(|&(i, j)| m[(i, j)] != q(0))
}

fn naive_trapezoid(p: &P, n: usize) -> Complex<f64> {
    let mut acc = Complex::new(0.0, 0.0);
    for j in 0..n {
        let z = Complex::from_polar(1.0, 2.0 * std::f64::consts::PI * j as f64 / n as f64);
        acc += p.terms().map(|(e, c)| c.to_c64() * z.powi(e as i32)).sum::<Complex<f64>>();
    }
    acc / n as f64
}

fn criterion_4() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0f64;
    for i in 0..200 {
        let p = P::random(&mut rng, -8, 8, 9, 0.8);
        let exact = p.coeff(0).to_c64();
        let quad = trapezoid_mean(&p, 512);
        worst = worst.max((quad - exact).norm()).max((naive_trapezoid(&p, 512) - exact).norm());
        let via = cauchy_alpha(std::slice::from_ref(&p), 512, 1e-10).map_err(|e| format!("#{i}: {e}"))?;
        ensure(via[0] == p.coeff(0), || format!("#{i}: cauchy_alpha is not the z^0 coefficient"))?;
    }
    ensure(worst <= 1e-10, || format!("trapezoid deviation {worst:e} > 1e-10"))?;
    for k in [2i64, 4, 6] {
        let s = space_from_bundle::<QI>(&SplittingType::new(vec![k])).map_err(|e| e.to_string())?;
        let poles = PolesProjection::new(&s).map_err(|e| e.to_string())?;
        let f = s.dim_f;
        let ann0 = s.rho.block(0, f, s.dim_u, f).left_nullspace();
        let ann_inf = s.rho.block(0, 0, s.dim_u, f).left_nullspace();
        let sum: Vec<Vec<QI>> = ann0.iter().chain(&ann_inf).cloned().collect();
        let dim_sum = if sum.is_empty() { 0 } else { Mat::from_rows(sum.clone()).rank() };
        let p = poles_oracle(&s, &poles.kernel);
        let ker_p = p.left_nullspace();
        let joint: Vec<Vec<QI>> = sum.iter().chain(&ker_p).cloned().collect();
        let dim_joint = Mat::from_rows(joint).rank();
        ensure(ker_p.len() == dim_sum && dim_joint == dim_sum, || {
            format!("k = {k}: dim ker p = {}, dim sum = {dim_sum}, joint {dim_joint}", ker_p.len())
        })?;
        let r = poles.kernel_report(&s);
        ensure(r.kernel_matches && r.dim_ker_p == ker_p.len(), || format!("k = {k}: kernel_report {r:?}"))?;
    }
    Ok(format!("200 Laurent inputs, worst deviation {worst:.1e}; kernel equality for k = 2, 4, 6"))
}

// ---------------------------------------------------------------- penrose

fn binom(n: i64, k: i64) -> i64 {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// `Σ (−1)ʲ C(k, j) ∂ⱼ∂_{k−j}`: inverse of the apolar form `(−1)ʲ/C(k, j)`.
fn apolar_laplacian(f: &MultiPoly<QI>, k: usize) -> MultiPoly<QI> {
    let mut out = MultiPoly::zero(k + 1);
    for j in 0..=k {
        let c = q(if j % 2 == 0 { 1 } else { -1 } * binom(k as i64, j as i64));
        out = &out + &f.derivative(j).derivative(k - j).scale(&c);
    }
    out
}

/// `u(x)` by expanding `p_x(z) = Σ xⱼ zʲ` directly.
fn direct_value(g: &Germ, x: &[QI]) -> Vec<QI> {
    let px = P::from_coeffs(x.to_vec());
    let mut out = vec![q(0); g.m];
    for t in &g.terms {
        let mono = P::monomial(t.coef.clone(), t.zpow) * px.pow(t.umonomial[0]);
        out[t.out] = out[t.out].clone() + mono.coeff(0);
    }
    out
}

fn random_point(rng: &mut ChaCha8Rng, n: usize) -> Vec<QI> {
    (0..n)
        .map(|_| {
            let d = rng.gen_range(1..=4);
            QI::ratio(rng.gen_range(-5..=5), d) + QI::ratio(rng.gen_range(-5..=5), d) * QI::i()
        })
        .collect()
}

fn penrose_model(k: i64) -> Result<PenroseModel, String> {
    let s = space_from_bundle::<QI>(&SplittingType::new(vec![k])).map_err(|e| e.to_string())?;
    PenroseModel::from_space(&s).map_err(|e| e.to_string())
}

fn criterion_5() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0f64;
    for k in [2i64, 4] {
        let model = penrose_model(k)?;
        let n = k as usize;
        // The operator is not trivially zero.
        let mut e = vec![0u32; n + 1];
        e[0] = 1;
        e[n] = 1;
        let control = MultiPoly::monomial(e, q(1));
        ensure(!apolar_laplacian(&control, n).is_zero(), || "control x0*xk is harmonic".into())?;
        for i in 0..20 {
            let g = Germ::random(&mut rng, 1, 1, (-2 * k, 2), 4, 4);
            let u = model.pluriharmonic_poly(&g).map_err(|e| e.to_string())?;
            let lap = laplacian_hk(&u[0], k as u32).map_err(|e| e.to_string())?;
            ensure(lap.is_zero(), || format!("k = {k} #{i}: laplacian_hk(u) = {lap:?}"))?;
            ensure(apolar_laplacian(&u[0], n).is_zero(), || format!("k = {k} #{i}: apolar laplacian nonzero"))?;
            let x = random_point(&mut rng, n + 1);
            let exact = direct_value(&g, &x);
            ensure(u[0].eval(&x) == exact[0], || format!("k = {k} #{i}: closed form differs from direct expansion"))?;
            let xc: Vec<Complex<f64>> = x.iter().map(|v| v.to_c64()).collect();
            let quad = model.quadrature_eval(&g, &xc, 512).map_err(|e| e.to_string())?;
            worst = worst.max((quad[0] - exact[0].to_c64()).norm());
        }
    }
    ensure(worst <= 1e-8, || format!("quadrature deviation {worst:e} > 1e-8"))?;
    Ok(format!("40 germs harmonic exactly, quadrature deviation {worst:.1e}"))
}

fn criterion_6() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let s = ward_scalar().clone();
    let mut worst = 0.0f64;
    let mut count = 0;
    for (k, m) in [(2i64, 1usize), (4, 1), (4, 3)] {
        let model = penrose_model(k)?;
        let n = model.dim_u();
        let poles = PolesProjection::new(&model.sections.space).map_err(|e| e.to_string())?;
        let p = poles_oracle(&model.sections.space, &poles.kernel);
        for i in 0..10 {
            let g = Germ::random_fibre_linear(&mut rng, 1, m, -k - 1, 2);
            let x = random_point(&mut rng, n);
            // du for h = b(z)·u and u(x) = [z⁰] b(z)·Σ xⱼ zʲ.
            let mut du: Mat<QI> = Mat::zeros(m, n);
            for t in &g.terms {
                let j = -t.zpow;
                if (0..n as i64).contains(&j) {
                    du[(t.out, j as usize)] = du[(t.out, j as usize)].clone() + t.coef.clone();
                }
            }
            let lhs = du.mul(&p);
            let r = prop52_identity(&model, &g, &x, 512, 1e-8).map_err(|e| format!("k = {k} #{i}: {e}"))?;
            ensure(r.lhs == lhs, || format!("k = {k} #{i}: (Id x p)(du) differs from oracle"))?;
            // Ward side rebuilt from the cocycle ∂h/∂u·T.
            let b = M::from_fn(m, 1, |a, _| {
                g.terms.iter().filter(|t| t.out == a).fold(P::zero(), |acc, t| acc + P::monomial(t.coef.clone(), t.zpow))
            })
            .mul(model.sections.bundle.transition());
            let class = ExtensionClass::new(model.sections.bundle.clone(), b).map_err(|e| e.to_string())?;
            let ward = ward_identity_check_with(&class, &model.sections, WardOptions::default()).map_err(|e| e.to_string())?;
            ensure(ward.rho_prime_restriction == lhs.scale(&-s.clone()), || format!("k = {k} #{i}: Ward side != -s * lhs"))?;
            ensure(r.exact_holds, || format!("k = {k} #{i}: exact path fails"))?;
            worst = worst.max(r.quadrature_deviation);
            count += 1;
        }
    }
    ensure(worst <= 1e-8, || format!("quadrature deviation {worst:e} > 1e-8"))?;
    Ok(format!("{count} fibre-linear germs over O(2), O(4): exact with s = {s}, quadrature {worst:.1e}"))
}

// ---------------------------------------------------------------- representations

fn bracket(a: &Mat<QI>, b: &Mat<QI>) -> Mat<QI> {
    a.mul(b).sub(&b.mul(a))
}

/// Nullity of `Q ↦ (AᵀQ + QA)_A ⊕ (Q − Qᵀ)` over `n × n` matrices.
fn invariant_symmetric_dim(u: &IrrepUk<QI>) -> usize {
    let n = u.dim();
    let gens = [&u.h, &u.x_plus, &u.x_minus];
    let mut rows = Vec::new();
    for a in gens {
        for i in 0..n {
            for j in 0..n {
                let mut row = vec![q(0); n * n];
                for l in 0..n {
                    row[l * n + j] = row[l * n + j].clone() + a[(l, i)].clone();
                    row[i * n + l] = row[i * n + l].clone() + a[(l, j)].clone();
                }
                rows.push(row);
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            let mut row = vec![q(0); n * n];
            row[i * n + j] = q(1);
            row[j * n + i] = row[j * n + i].clone() - q(1);
            rows.push(row);
        }
    }
    n * n - Mat::from_rows(rows).rank()
}

fn criterion_7() -> Result<String, String> {
    for k in 0..=6u32 {
        let u = IrrepUk::<QI>::new(k);
        ensure(bracket(&u.h, &u.x_plus) == u.x_plus.scale(&q(2)), || format!("k = {k}: [H, X+] != 2X+"))?;
        ensure(bracket(&u.h, &u.x_minus) == u.x_minus.scale(&q(-2)), || format!("k = {k}: [H, X-] != -2X-"))?;
        ensure(bracket(&u.x_plus, &u.x_minus) == u.h, || format!("k = {k}: [X+, X-] != H"))?;
        if k >= 2 {
            let c = clebsch_projections::<QI>(k).map_err(|e| e.to_string())?;
            let (one, rest) = (IrrepUk::<QI>::new(1), IrrepUk::<QI>::new(k - 1));
            let (low, high) = (IrrepUk::<QI>::new(k - 2), IrrepUk::<QI>::new(k));
            let e_action = |a: &Mat<QI>, b: &Mat<QI>| a.kron(&Mat::identity(rest.dim())).add(&Mat::identity(2).kron(b));
            let pairs = [
                (e_action(&one.h, &rest.h), &low.h, &high.h),
                (e_action(&one.x_plus, &rest.x_plus), &low.x_plus, &high.x_plus),
                (e_action(&one.x_minus, &rest.x_minus), &low.x_minus, &high.x_minus),
            ];
            for (e, l, h) in &pairs {
                ensure(c.p_low.mul(e) == l.mul(&c.p_low), || format!("k = {k}: P_low not equivariant"))?;
                ensure(c.p_high.mul(e) == h.mul(&c.p_high), || format!("k = {k}: P_high not equivariant"))?;
                ensure(e.mul(&c.incl_low) == c.incl_low.mul(l), || format!("k = {k}: low inclusion not equivariant"))?;
                ensure(e.mul(&c.incl_high) == c.incl_high.mul(h), || format!("k = {k}: high inclusion not equivariant"))?;
            }
            let id = c.incl_low.mul(&c.p_low).add(&c.incl_high.mul(&c.p_high));
            ensure(id == Mat::identity(2 * k as usize), || format!("k = {k}: projections are not complementary"))?;
        }
        if k % 2 == 0 {
            let f = invariant_form::<QI>(k).map_err(|e| e.to_string())?;
            for a in [&u.h, &u.x_plus, &u.x_minus] {
                ensure(a.transpose().mul(&f.q).add(&f.q.mul(a)).is_zero(), || format!("k = {k}: h_k not invariant"))?;
            }
            // Apolar form (−1)ʲ/C(k, j) on the antidiagonal, up to scale.
            let n = k as usize;
            let apolar = Mat::from_fn(n + 1, n + 1, |i, j| {
                if i + j == n {
                    QI::ratio(if i % 2 == 0 { 1 } else { -1 }, binom(k as i64, i as i64))
                } else {
                    q(0)
                }
            });
            let m = n / 2;
            let scaled = apolar.scale(&(f.q[(m, m)].clone() / apolar[(m, m)].clone()));
            ensure(scaled == f.q, || format!("k = {k}: form is not the apolar form"))?;
        }
    }
    for k in (0..=8u32).step_by(2) {
        let dim = invariant_symmetric_dim(&IrrepUk::<QI>::new(k));
        ensure(dim == 1, || format!("k = {k}: solution space has dimension {dim}"))?;
        ensure(invariant_symmetric_forms::<QI>(k).len() == 1, || format!("k = {k}: library finds a different dimension"))?;
    }
    Ok("sl(2), Clebsch-Gordan and h_k exact for k <= 6; invariant forms 1-dimensional for even k <= 8".into())
}

// ---------------------------------------------------------------- gibbons-hawking

fn criterion_8() -> Result<String, String> {
    let start = Instant::now();
    let data = MonopoleData::gibbons_hawking(1.0, &[[0.0; 3]]);
    // The data is v = 1 + 1/(2r).
    for p in [[0.7, 0.8, 0.9], [1.0, 0.6, 0.75]] {
        let r: f64 = p[0] * p[0] + p[1] * p[1] + p[2] * p[2];
        let v = data.v.eval(&p);
        ensure((v - (1.0 + 0.5 / r.sqrt())).abs() < 1e-14, || format!("v({p:?}) = {v}"))?;
    }
    let cfg = SuiteConfig::default();
    ensure(cfg.h == 0.01 && cfg.refinement.len() == 4, || "suite is not at h = 0.01 with three refinements".into())?;
    let r = verify_suite(&data, [0.0; 3], &cfg).map_err(|e| e.to_string())?;
    let am = r.analytic_monopole.ok_or("no analytic monopole residual")?;
    let aa = r.analytic_asd.ok_or("no analytic ASD residual")?;
    ensure(am.sup < 1e-6 && aa.sup < 1e-6, || format!("analytic residuals {:e}, {:e}", am.sup, aa.sup))?;
    ensure(r.grid_monopole.sup < 1e-3 && r.grid_asd.sup < 1e-3, || {
        format!("grid residuals {:e}, {:e}", r.grid_monopole.sup, r.grid_asd.sup)
    })?;
    ensure(r.kahler.sup < 1e-3, || format!("Kahler residual {:e}", r.kahler.sup))?;
    let names: Vec<&str> = r.pullbacks.iter().map(|p| p.name.as_str()).collect();
    ensure(names.len() == 4, || format!("pullback functions {names:?}"))?;
    for p in &r.pullbacks {
        ensure(p.residual.sup < 1e-3, || format!("pullback {} residual {:e}", p.name, p.residual.sup))?;
    }
    let mut slopes = Vec::new();
    for t in &r.refinement {
        ensure(t.slopes.len() == 3, || format!("{}: {} slopes", t.quantity.name(), t.slopes.len()))?;
        for s in &t.slopes {
            ensure((s - 2.0).abs() <= 0.2, || format!("{} slope {s}", t.quantity.name()))?;
        }
        slopes.extend(t.slopes.iter().cloned());
    }
    // The 1/r test function is the Newtonian potential of the centre.
    let inv_r = Expr::div(Expr::c(1.0), Expr::distance_to([0.0; 3]));
    ensure(inv_r.flat_laplacian().eval::<f64>(&[0.7, 0.8, 0.9]).abs() < 1e-12, || "1/r is not harmonic".into())?;
    let t = start.elapsed();
    ensure(t < Duration::from_secs(300), || format!("runtime {t:?} >= 5 min"))?;
    let (lo, hi) = slopes.iter().fold((f64::MAX, f64::MIN), |(a, b), s| (a.min(*s), b.max(*s)));
    Ok(format!(
        "analytic {:.0e}, grid {:.1e}/{:.1e}, Kahler {:.1e}, slopes in [{lo:.3}, {hi:.3}], {:.1} s",
        am.sup.max(aa.sup),
        r.grid_monopole.sup,
        r.grid_asd.sup,
        r.kahler.sup,
        t.as_secs_f64()
    ))
}

// ---------------------------------------------------------------- determinism

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(name).display().to_string()
}

fn run_cli(args: &[String], threads: &str) -> Result<(Option<i32>, Vec<u8>), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_twistorlab"))
        .args(args)
        .env("TWISTORLAB_THREADS", threads)
        .output()
        .map_err(|e| e.to_string())?;
    Ok((out.status.code(), out.stdout))
}

fn criterion_9() -> Result<String, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cmds: Vec<Vec<String>> = vec![
        vec!["bundle".into(), "split".into(), data("gauged_o1_o3.json")],
        vec!["bundle".into(), "cohomology".into(), data("line2.json")],
        vec!["ward".into(), "extend".into(), data("o4_w2.json")],
        vec!["ward".into(), "identity".into(), data("o2_z.json")],
        vec!["ward".into(), "identity".into(), data("o4_w2.json"), "--random".into(), "20".into(), "--seed".into(), "9".into()],
        vec!["penrose".into(), "eval".into(), data("germ_k2.json"), data("space_k2.json"), "--at".into(), "1:2,-1/3,2".into()],
        vec!["penrose".into(), "certify".into(), data("germ_k2.json"), data("space_k2.json"), "--at".into(), "1,1,1".into()],
        vec!["gh".into(), "verify".into(), data("taubnut.json")],
        vec!["rep".into(), "clebsch".into(), "6".into()],
        vec!["rep".into(), "form".into(), "8".into()],
    ];
    for (i, args) in cmds.iter().enumerate() {
        let (c1, a) = run_cli(args, "1")?;
        let (c2, b) = run_cli(args, "4")?;
        let name = args[..2].join(" ");
        ensure(c1 == Some(0) && c2 == Some(0), || format!("{name}: exit codes {c1:?}, {c2:?}"))?;
        ensure(!a.is_empty() && a == b, || format!("{name}: stdout differs between runs"))?;
        let path = dir.path().join(format!("r{i}.json"));
        let mut with_out = args.clone();
        with_out.extend(["--out".into(), path.display().to_string()]);
        run_cli(&with_out, "2")?;
        let file = std::fs::read(&path).map_err(|e| e.to_string())?;
        ensure(file == a, || format!("{name}: --out file differs from stdout"))?;
    }
    Ok(format!("{} commands byte-identical across runs, thread counts and --out", cmds.len()))
}

type Criterion = fn() -> Result<String, String>;

fn main() {
    let criteria: [(&str, Criterion); 9] = [
        ("gauge invariance of splitting", criterion_1),
        ("cohomology cross-check", criterion_2),
        ("infinitesimal Ward transform", criterion_3),
        ("Cauchy evaluator and poles projection", criterion_4),
        ("Penrose harmonicity", criterion_5),
        ("gradient identity for fibre-linear germs", criterion_6),
        ("representation algebra", criterion_7),
        ("Gibbons-Hawking suite", criterion_8),
        ("CLI determinism", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panic: {}", msg.unwrap_or_default()))
        });
        match outcome {
            Ok(detail) => println!("PASS {} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {} {name}: {detail}", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
