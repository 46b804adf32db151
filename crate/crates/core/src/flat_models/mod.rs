//! Flat models: the `sl(2)` modules `U_k` of binary forms, their invariant
//! forms, Clebsch–Gordan projections of `U₁⊗U_{k−1}`, the invariant
//! Laplacian, and linear anti-self-duality on `E = C²⊗F`.

mod multipoly;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::laurent_linalg::Mat;
use crate::scalar::Field;

pub use multipoly::MultiPoly;
pub(crate) use multipoly::expect_vars;

/// `U_k`: polynomials of degree `≤ k` in `X`, basis `X⁰…Xᵏ`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IrrepUk<T> {
    pub k: u32,
    pub h: Mat<T>,
    #[serde(rename = "X+")]
    pub x_plus: Mat<T>,
    #[serde(rename = "X-")]
    pub x_minus: Mat<T>,
}

fn commutator<T: Field>(a: &Mat<T>, b: &Mat<T>) -> Mat<T> {
    a.mul(b).sub(&b.mul(a))
}

impl<T: Field> IrrepUk<T> {
    pub fn new(k: u32) -> Self {
        let n = k as usize + 1;
        let ki = k as i64;
        let h = Mat::from_fn(n, n, |i, j| if i == j { T::from_i64(ki - 2 * j as i64) } else { T::zero() });
        let x_plus = Mat::from_fn(n, n, |i, j| if i + 1 == j { T::from_i64(j as i64) } else { T::zero() });
        let x_minus = Mat::from_fn(n, n, |i, j| if i == j + 1 { T::from_i64(ki - j as i64) } else { T::zero() });
        IrrepUk { k, h, x_plus, x_minus }
    }

    pub fn dim(&self) -> usize {
        self.k as usize + 1
    }

    pub fn generators(&self) -> [&Mat<T>; 3] {
        [&self.h, &self.x_plus, &self.x_minus]
    }

    /// `[H,X₊] = 2X₊`, `[H,X₋] = −2X₋`, `[X₊,X₋] = H`.
    pub fn commutation_holds(&self) -> bool {
        let two = T::from_i64(2);
        commutator(&self.h, &self.x_plus) == self.x_plus.scale(&two)
            && commutator(&self.h, &self.x_minus) == self.x_minus.scale(&-two)
            && commutator(&self.x_plus, &self.x_minus) == self.h
    }
}

/// Generators of the tensor product action on `U_a ⊗ U_b` (first factor
/// outer in the Kronecker order).
pub fn tensor_action<T: Field>(a: &IrrepUk<T>, b: &IrrepUk<T>) -> [Mat<T>; 3] {
    let (ia, ib) = (Mat::identity(a.dim()), Mat::identity(b.dim()));
    let ga = a.generators();
    let gb = b.generators();
    [0, 1, 2].map(|i| ga[i].kron(&ib).add(&ia.kron(gb[i])))
}

/// Basis of the solution space of a homogeneous linear condition on
/// `rows × cols` matrices; `f` returns the matrices that must vanish.
fn solve_matrix_equations<T: Field, F: Fn(&Mat<T>) -> Vec<Mat<T>>>(rows: usize, cols: usize, f: F) -> Vec<Mat<T>> {
    let n = rows * cols;
    let mut columns = Vec::with_capacity(n);
    for idx in 0..n {
        let e = Mat::from_fn(rows, cols, |i, j| if i * cols + j == idx { T::one() } else { T::zero() });
        columns.push(f(&e).iter().flat_map(|m| m.iter().cloned()).collect::<Vec<T>>());
    }
    let len = columns.first().map_or(0, |c| c.len());
    let system = Mat::from_columns(&columns, len);
    system
        .nullspace()
        .into_iter()
        .map(|v| Mat::from_fn(rows, cols, |i, j| v[i * cols + j].clone()))
        .collect()
}

/// All `M` with `M·Aᵢ = Bᵢ·M` for the paired generators.
pub fn equivariant_maps<T: Field>(src: &[Mat<T>; 3], dst: &[Mat<T>; 3]) -> Vec<Mat<T>> {
    let (rows, cols) = (dst[0].rows(), src[0].rows());
    solve_matrix_equations(rows, cols, |m| (0..3).map(|i| m.mul(&src[i]).sub(&dst[i].mul(m))).collect())
}

fn is_equivariant<T: Field>(m: &Mat<T>, src: &[Mat<T>; 3], dst: &[Mat<T>; 3]) -> bool {
    (0..3).all(|i| m.mul(&src[i]) == dst[i].mul(m))
}

/// Invariant bilinear forms `Q` on `U_k`: `AᵀQ + QA = 0` for every generator.
pub fn invariant_bilinear_forms<T: Field>(k: u32) -> Vec<Mat<T>> {
    let u = IrrepUk::<T>::new(k);
    let n = u.dim();
    solve_matrix_equations(n, n, |q| u.generators().iter().map(|a| a.transpose().mul(q).add(&q.mul(a))).collect())
}

/// Invariant symmetric forms on `U_k`.
pub fn invariant_symmetric_forms<T: Field>(k: u32) -> Vec<Mat<T>> {
    let u = IrrepUk::<T>::new(k);
    let n = u.dim();
    solve_matrix_equations(n, n, |q| {
        let mut eqs: Vec<Mat<T>> = u.generators().iter().map(|a| a.transpose().mul(q).add(&q.mul(a))).collect();
        eqs.push(q.sub(&q.transpose()));
        eqs
    })
}

/// The invariant form on `U_k`, `k` even, with `q(X^{k/2}, X^{k/2}) = 1`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InvariantForm<T> {
    pub k: u32,
    pub q: Mat<T>,
    pub normalization: String,
}

pub fn invariant_form<T: Field>(k: u32) -> Result<InvariantForm<T>> {
    if k % 2 == 1 {
        return Err(Error::OddK(k));
    }
    let sols = invariant_symmetric_forms::<T>(k);
    if sols.len() != 1 {
        return Err(Error::Invariant(format!("{} invariant symmetric forms on U_{k}", sols.len())));
    }
    let m = k as usize / 2;
    let q = sols[0].scale(&sols[0][(m, m)].inv());
    Ok(InvariantForm { k, q, normalization: "q(X^{k/2},X^{k/2}) = 1".into() })
}

/// The invariant skew form on `U_k`, `k` odd, with `ω(1, Xᵏ) = 1`.
pub fn invariant_skew_form<T: Field>(k: u32) -> Result<Mat<T>> {
    if k.is_multiple_of(2) {
        return Err(Error::Invariant(format!("U_{k} carries no invariant skew form")));
    }
    let sols = invariant_bilinear_forms::<T>(k);
    if sols.len() != 1 {
        return Err(Error::Invariant(format!("{} invariant forms on U_{k}", sols.len())));
    }
    let n = k as usize;
    Ok(sols[0].scale(&sols[0][(0, n)].inv()))
}

impl<T: Field> InvariantForm<T> {
    pub fn is_invariant(&self) -> bool {
        let u = IrrepUk::<T>::new(self.k);
        u.generators().iter().all(|a| a.transpose().mul(&self.q).add(&self.q.mul(a)).is_zero())
    }

    pub fn inverse(&self) -> Mat<T> {
        self.q.inverse().expect("invariant form is nondegenerate")
    }
}

/// `Σ q^{ij} ∂ᵢ∂ⱼ f` for `f` a polynomial in the coordinates of `U_k`.
pub fn laplacian_hk<T: Field>(f: &MultiPoly<T>, k: u32) -> Result<MultiPoly<T>> {
    let form = invariant_form::<T>(k)?;
    expect_vars(f, k as usize + 1)?;
    let qi = form.inverse();
    let n = qi.rows();
    let mut out = MultiPoly::zero(n);
    for i in 0..n {
        let di = f.derivative(i);
        if di.is_zero() {
            continue;
        }
        for j in 0..n {
            if qi[(i, j)].is_zero() {
                continue;
            }
            out = &out + &di.derivative(j).scale(&qi[(i, j)]);
        }
    }
    Ok(out)
}

/// `ψ_z(x) = Σ xⱼ zʲ`, evaluation of the binary form at `z`.
pub fn psi_z<T: Field>(k: u32, z: &T) -> MultiPoly<T> {
    let mut c = Vec::with_capacity(k as usize + 1);
    let mut p = T::one();
    for _ in 0..=k {
        c.push(p.clone());
        p = p * z.clone();
    }
    MultiPoly::linear(&c)
}

/// `Δ_{h_k}(w∘ψ_z)` for a one-variable polynomial `w`.
pub fn harmonic_check_prop44<T: Field>(k: u32, w: &MultiPoly<T>, z: &T) -> Result<MultiPoly<T>> {
    expect_vars(w, 1)?;
    laplacian_hk(&w.compose(&[psi_z(k, z)]), k)
}

/// Equivariant projections and inclusions for `U₁⊗U_{k−1} = U_{k−2} ⊕ U_k`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Clebsch<T> {
    pub k: u32,
    pub p_low: Mat<T>,
    pub p_high: Mat<T>,
    pub incl_low: Mat<T>,
    pub incl_high: Mat<T>,
}

/// Multiplication `U₁⊗U_{k−1} → U_k`, `Xᵃ⊗Xʲ ↦ X^{a+j}`.
pub fn multiplication_map<T: Field>(k: u32) -> Mat<T> {
    let f = k as usize;
    Mat::from_fn(f + 1, 2 * f, |i, col| {
        let (a, j) = (col / f, col % f);
        if a + j == i {
            T::one()
        } else {
            T::zero()
        }
    })
}

pub fn clebsch_projections<T: Field>(k: u32) -> Result<Clebsch<T>> {
    if k < 2 {
        return Err(Error::Dimension(format!("Clebsch–Gordan split needs k >= 2, got {k}")));
    }
    let e = tensor_action(&IrrepUk::<T>::new(1), &IrrepUk::<T>::new(k - 1));
    let gen = |m: u32| {
        let u = IrrepUk::<T>::new(m);
        [u.h, u.x_plus, u.x_minus]
    };
    let (low, high) = (gen(k - 2), gen(k));
    let one = |v: Vec<Mat<T>>, what: &str| -> Result<Mat<T>> {
        if v.len() != 1 {
            return Err(Error::Invariant(format!("{} equivariant maps for {what}", v.len())));
        }
        Ok(v.into_iter().next().unwrap())
    };
    let p_high = multiplication_map::<T>(k);
    if !is_equivariant(&p_high, &e, &high) {
        return Err(Error::Invariant("multiplication is not equivariant".into()));
    }
    let p_low = one(equivariant_maps(&e, &low), "E -> U_{k-2}")?;
    let p_low = p_low.scale(&first_nonzero(&p_low).inv());
    let incl_high = one(equivariant_maps(&high, &e), "U_k -> E")?;
    let incl_low = one(equivariant_maps(&low, &e), "U_{k-2} -> E")?;
    let incl_high = incl_high.scale(&p_high.mul(&incl_high)[(0, 0)].inv());
    let incl_low = incl_low.scale(&p_low.mul(&incl_low)[(0, 0)].inv());
    Ok(Clebsch { k, p_low, p_high, incl_low, incl_high })
}

fn first_nonzero<T: Field>(m: &Mat<T>) -> T {
    m.iter().find(|x| !x.is_zero()).cloned().expect("nonzero matrix")
}

impl<T: Field> Clebsch<T> {
    /// Projection identities, complementarity and equivariance.
    pub fn verify(&self) -> bool {
        let k = self.k;
        let e = tensor_action(&IrrepUk::<T>::new(1), &IrrepUk::<T>::new(k - 1));
        let gen = |m: u32| {
            let u = IrrepUk::<T>::new(m);
            [u.h, u.x_plus, u.x_minus]
        };
        let (low, high) = (gen(k - 2), gen(k));
        let (nl, nh) = (k as usize - 1, k as usize + 1);
        let full = self.incl_low.mul(&self.p_low).add(&self.incl_high.mul(&self.p_high));
        self.p_low.mul(&self.incl_low) == Mat::identity(nl)
            && self.p_high.mul(&self.incl_high) == Mat::identity(nh)
            && self.p_low.mul(&self.incl_high).is_zero()
            && self.p_high.mul(&self.incl_low).is_zero()
            && full == Mat::identity(2 * k as usize)
            && self.p_low.rank() == nl
            && self.p_high.rank() == nh
            && is_equivariant(&self.p_low, &e, &low)
            && is_equivariant(&self.p_high, &e, &high)
            && is_equivariant(&self.incl_low, &low, &e)
            && is_equivariant(&self.incl_high, &high, &e)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConformalityReport<T> {
    pub k: u32,
    /// `λ` in `ρ∘ρ* = λ·Id`, if it is a multiple of the identity.
    pub lambda: Option<T>,
    pub conformal: bool,
    /// The perturbed, non-equivariant projection fails the test.
    pub negative_control_fails: bool,
}

/// `ρ∘ρ*` for `ρ: (E, g) → (U, h)`, with `ρ* = g⁻¹ρᵀh`.
pub fn conformal_factor<T: Field>(rho: &Mat<T>, g: &Mat<T>, h: &Mat<T>) -> Option<T> {
    let gi = g.inverse()?;
    let m = rho.mul(&gi).mul(&rho.transpose()).mul(h);
    let lambda = m[(0, 0)].clone();
    if lambda.is_zero() || m != Mat::identity(m.rows()).scale(&lambda) {
        return None;
    }
    Some(lambda)
}

/// The invariant structure on `E = U₁⊗U_{k−1}` is `ε₁⊗ε_{k−1}`.
pub fn horizontal_conformality<T: Field>(k: u32) -> Result<ConformalityReport<T>> {
    let h = invariant_form::<T>(k)?.q;
    let g = invariant_skew_form::<T>(1)?.kron(&invariant_skew_form::<T>(k - 1)?);
    let rho = multiplication_map::<T>(k);
    let lambda = conformal_factor(&rho, &g, &h);
    let mut bad = rho.clone();
    let last = bad.cols() - 1;
    bad[(0, last)] = bad[(0, last)].clone() + T::one();
    let negative_control_fails = conformal_factor(&bad, &g, &h).is_none();
    Ok(ConformalityReport { k, conformal: lambda.is_some(), lambda, negative_control_fails })
}

/// Antisymmetric form on `E = C²⊗F`, index `a·dim F + j`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Field + Deserialize<'de>"))]
pub struct TwoFormOnE<T> {
    #[serde(rename = "Fdim")]
    pub f_dim: usize,
    pub omega: Mat<T>,
}

impl<T: Field> TwoFormOnE<T> {
    pub fn new(omega: Mat<T>, f_dim: usize) -> Result<Self> {
        if omega.shape() != (2 * f_dim, 2 * f_dim) {
            return Err(Error::Dimension(format!("two-form is {:?}, expected {}", omega.shape(), 2 * f_dim)));
        }
        let defect = omega.add(&omega.transpose()).max_abs();
        if defect > if T::EXACT { 0.0 } else { 1e-9 * (1.0 + omega.max_abs()) } {
            return Err(Error::Invariant("two-form is not antisymmetric".into()));
        }
        Ok(TwoFormOnE { f_dim, omega })
    }

    pub fn block(&self, a: usize, b: usize) -> Mat<T> {
        self.omega.block(a * self.f_dim, b * self.f_dim, self.f_dim, self.f_dim)
    }

    /// Coefficients of `z⁰, z¹, z²` in `ω(ℓ_z⊗·, ℓ_z⊗·)` with `ℓ_z = −z e₀ + e₁`.
    pub fn isotropy_coefficients(&self) -> [Mat<T>; 3] {
        [self.block(1, 1), self.block(0, 1).add(&self.block(1, 0)).neg(), self.block(0, 0)]
    }

    /// Largest coefficient of the isotropy defect; zero iff anti-self-dual.
    pub fn isotropy_defect(&self) -> f64 {
        self.isotropy_coefficients().iter().map(|m| m.max_abs()).fold(0.0, f64::max)
    }

    /// `(Λ²C²⊗S²F*, S²C²⊗Λ²F*)` components.
    pub fn decompose(&self) -> (Self, Self) {
        let f = self.f_dim;
        let half = T::one() / T::from_i64(2);
        let w01 = self.block(0, 1);
        let s = w01.add(&w01.transpose()).scale(&half);
        let a01 = w01.sub(&w01.transpose()).scale(&half);
        let zero = Mat::zeros(f, f);
        let asd = assemble(&zero, &s, &s.neg(), &zero);
        let sd = assemble(&self.block(0, 0), &a01, &a01, &self.block(1, 1));
        (TwoFormOnE { f_dim: f, omega: asd }, TwoFormOnE { f_dim: f, omega: sd })
    }
}

fn assemble<T: Field>(a: &Mat<T>, b: &Mat<T>, c: &Mat<T>, d: &Mat<T>) -> Mat<T> {
    a.hstack(b).vstack(&c.hstack(d))
}

pub fn is_anti_self_dual<T: Field>(w: &TwoFormOnE<T>) -> bool {
    w.isotropy_coefficients().iter().all(|m| m.iter().all(|x| x.is_negligible()))
}

fn sym_basis<T: Field>(f: usize, skew: bool) -> Vec<Mat<T>> {
    let mut out = Vec::new();
    for i in 0..f {
        for j in i..f {
            if skew && i == j {
                continue;
            }
            let mut m = Mat::zeros(f, f);
            m[(i, j)] = T::one();
            m[(j, i)] = if skew { -T::one() } else { T::one() };
            out.push(m);
        }
    }
    out
}

/// `ε⊗S` for `S` running over a basis of `S²F*`: `F(F+1)/2` forms.
pub fn asd_basis<T: Field>(f_dim: usize) -> Vec<TwoFormOnE<T>> {
    let zero = Mat::zeros(f_dim, f_dim);
    sym_basis::<T>(f_dim, false)
        .into_iter()
        .map(|s| TwoFormOnE { f_dim, omega: assemble(&zero, &s, &s.neg(), &zero) })
        .collect()
}

/// `σ⊗A` for `σ ∈ S²C²`, `A ∈ Λ²F*`: `3F(F−1)/2` forms.
pub fn sd_basis<T: Field>(f_dim: usize) -> Vec<TwoFormOnE<T>> {
    let zero = Mat::zeros(f_dim, f_dim);
    let mut out = Vec::new();
    for a in sym_basis::<T>(f_dim, true) {
        out.push(TwoFormOnE { f_dim, omega: assemble(&a, &zero, &zero, &zero) });
        out.push(TwoFormOnE { f_dim, omega: assemble(&zero, &a, &a, &zero) });
        out.push(TwoFormOnE { f_dim, omega: assemble(&zero, &zero, &zero, &a) });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::QI;

    fn q(n: i64) -> QI {
        QI::int(n)
    }

    #[test]
    fn quadratic_form_k2() {
        let f = invariant_form::<QI>(2).unwrap();
        assert_eq!(f.q, Mat::from_rows(vec![vec![q(0), q(0), q(-2)], vec![q(0), q(1), q(0)], vec![q(-2), q(0), q(0)]]));
        assert!(matches!(invariant_form::<QI>(3), Err(Error::OddK(3))));
    }

    #[test]
    fn laplacian_examples() {
        let x = |i| MultiPoly::<QI>::var(3, i);
        let f = &(&x(1) * &x(1)) + &(&x(0) * &x(2)).scale(&q(2));
        assert!(laplacian_hk(&f, 2).unwrap().is_zero());
        let s = (&(&x(0) + &x(1)) + &x(2)).pow(2);
        assert!(laplacian_hk(&s, 2).unwrap().is_zero());
        assert!(!laplacian_hk(&(&x(1) * &x(1)), 2).unwrap().is_zero());
    }

    #[test]
    fn prop44_cubic_at_zero() {
        let w = MultiPoly::<QI>::var(1, 0).pow(3);
        assert!(harmonic_check_prop44(2, &w, &q(0)).unwrap().is_zero());
    }

    #[test]
    fn clebsch_k2_and_transvectant() {
        for k in [2, 3, 4] {
            let c = clebsch_projections::<QI>(k).unwrap();
            assert!(c.verify());
        }
    }

    #[test]
    fn asd_dimensions() {
        assert_eq!(asd_basis::<QI>(2).len(), 3);
        for w in asd_basis::<QI>(3) {
            assert!(is_anti_self_dual(&w));
        }
        for w in sd_basis::<QI>(3) {
            assert!(!is_anti_self_dual(&w));
        }
    }
}
