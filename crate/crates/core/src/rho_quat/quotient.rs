use serde::{Deserialize, Serialize};

use crate::cp1_bundles::{Bundle, H0Space, Point, Section, SplittingType};
use crate::error::{Error, Result};
use crate::laurent_linalg::{LaurentMatrix, LaurentPoly, Mat};
use crate::scalar::Field;

use super::hypercomplex::kernel_line;

/// Linear ρ-quaternionic structure `ρ: E = C² ⊗ F → U`.
///
/// Columns of `rho` are indexed by `a·dim_f + j` for `e_a ⊗ f_j`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Field + Deserialize<'de>"))]
pub struct RhoQuatSpace<T> {
    #[serde(rename = "dimU")]
    pub dim_u: usize,
    #[serde(rename = "dimF")]
    pub dim_f: usize,
    pub rho: Mat<T>,
    pub model: String,
}

impl<T: Field> RhoQuatSpace<T> {
    pub fn new(rho: Mat<T>, dim_f: usize, model: &str) -> Result<Self> {
        if rho.cols() != 2 * dim_f {
            return Err(Error::Dimension(format!("rho has {} columns, expected 2·dimF = {}", rho.cols(), 2 * dim_f)));
        }
        Ok(RhoQuatSpace { dim_u: rho.rows(), dim_f, rho, model: model.to_string() })
    }

    pub fn dim_e(&self) -> usize {
        2 * self.dim_f
    }

    /// `ρ` restricted to `e_a ⊗ F`.
    pub fn rho_block(&self, a: usize) -> Mat<T> {
        self.rho.block(0, a * self.dim_f, self.dim_u, self.dim_f)
    }

    /// Columns spanning `E_z = ℓ_z ⊗ F`.
    pub fn e_z(&self, z: &Point<T>) -> Mat<T> {
        let [l0, l1] = kernel_line(z);
        let id = Mat::identity(self.dim_f);
        id.scale(&l0).vstack(&id.scale(&l1))
    }

    /// `ρ(E_z)` as a polynomial family in `z`: `R(z) = ρ₁ − z·ρ₀`.
    pub fn image_family(&self) -> LaurentMatrix<T> {
        let r0 = LaurentMatrix::constant(&self.rho_block(0));
        let r1 = LaurentMatrix::constant(&self.rho_block(1));
        r1.sub(&r0.shift(1))
    }

    /// Same family in the chart at infinity: `R_∞(w) = w·ρ₁ − ρ₀`.
    pub fn image_family_inf(&self) -> LaurentMatrix<T> {
        let r0 = LaurentMatrix::constant(&self.rho_block(0));
        let r1 = LaurentMatrix::constant(&self.rho_block(1));
        r1.shift(1).sub(&r0)
    }

    /// Basis of `ker ρ` as columns.
    pub fn kernel(&self) -> Mat<T> {
        self.rho.kernel_matrix()
    }

    pub fn is_surjective(&self) -> bool {
        self.rho.rank() == self.dim_u
    }

    /// `E_z ∩ ker ρ = 0` at one point.
    pub fn injective_at(&self, z: &Point<T>) -> bool {
        self.rho.mul(&self.e_z(z)).rank() == self.dim_f
    }
}

/// Polynomial model of a nonnegative splitting type:
/// `U = ⊕ C[X]_{≤aᵢ}`, `F = ⊕ C[X]_{≤aᵢ−1}`, `ρ((α, β) ⊗ q) = (α + βX)·q`.
pub fn space_from_bundle<T: Field>(s: &SplittingType) -> Result<RhoQuatSpace<T>> {
    if let Some(&a) = s.degrees.iter().find(|&&a| a < 0) {
        return Err(Error::NegativeDegree(a));
    }
    let dim_u: usize = s.degrees.iter().map(|&a| a as usize + 1).sum();
    let dim_f: usize = s.degrees.iter().map(|&a| a as usize).sum();
    let mut rho = Mat::zeros(dim_u, 2 * dim_f);
    let (mut u_off, mut f_off) = (0, 0);
    for &a in &s.degrees {
        let a = a as usize;
        for p in 0..a {
            rho[(u_off + p, f_off + p)] = T::one();
            rho[(u_off + p + 1, dim_f + f_off + p)] = T::one();
        }
        u_off += a + 1;
        f_off += a;
    }
    RhoQuatSpace::new(rho, dim_f, "polynomial")
}

/// How a frame of `ρ(E_z)` was completed to a frame of `U` over a chart.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Completion {
    /// Constant complement read off at the chart's centre.
    Probe,
    /// Complement from a unimodular polynomial row reduction.
    Symbolic,
}

/// Quotient bundle `U/ρ(E_z)` together with the quotient maps in each chart.
#[derive(Clone, Debug)]
pub struct QuotientBundle<T: Field> {
    pub bundle: Bundle<T>,
    /// `eval0(z)`: `U → 𝒰_z` in the chart-0 frame, polynomial in `z`.
    pub eval0: LaurentMatrix<T>,
    /// `eval_inf(w)`: same in the chart-∞ frame, polynomial in `w`.
    pub eval_inf: LaurentMatrix<T>,
    pub completion: [Completion; 2],
    /// Gcd of maximal minors of `R(z)`, resp. `R_∞(w)`; a nonzero constant
    /// exactly when `E_z ∩ ker ρ = 0` on the chart.
    pub certificates: [LaurentPoly<T>; 2],
}

/// Vector bundle of a ρ-quaternionic space, `𝒰_z = U/ρ(E_z)`.
pub fn bundle_of<T: Field>(s: &RhoQuatSpace<T>) -> Result<QuotientBundle<T>> {
    if s.dim_u == 0 {
        return Err(Error::Dimension("U = 0 has no vector bundle".into()));
    }
    if s.dim_f >= s.dim_u {
        return Err(Error::DegenerateFamily {
            certificate: format!("dim F = {} >= dim U = {}, so E_z meets ker rho", s.dim_f, s.dim_u),
        });
    }
    let (c0, cert0, how0) = complete_frame(&s.image_family())?;
    let (ci, certi, howi) = complete_frame(&s.image_family_inf())?;
    let r = s.dim_u - s.dim_f;
    let eval0 = quotient_map(&s.image_family(), &c0, r);
    let eval_inf = quotient_map(&s.image_family_inf(), &ci, r);
    let t = eval0.mul(&ci.reflect());
    let bundle = Bundle::new(t)?;
    debug_assert_eq!(bundle.degree(), s.dim_f as i64);
    if eval0 != bundle.transition().mul(&eval_inf.reflect()) {
        return Err(Error::Invariant("quotient maps do not glue through the transition".into()));
    }
    Ok(QuotientBundle { bundle, eval0, eval_inf, completion: [how0, howi], certificates: [cert0, certi] })
}

/// Bottom `r` rows of `[R | C]⁻¹`: the quotient coordinates.
fn quotient_map<T: Field>(r_fam: &LaurentMatrix<T>, c: &LaurentMatrix<T>, r: usize) -> LaurentMatrix<T> {
    let full = r_fam.hstack(c);
    let inv = full.inverse().expect("completed frame is unimodular");
    let n = full.rows();
    inv.block(n - r, 0, r, n)
}

fn has_const_det<T: Field>(m: &LaurentMatrix<T>) -> bool {
    matches!(m.det().as_monomial(), Some((_, 0)))
}

/// Completes the polynomial family `R` (`m × n`, `m > n`) to a unimodular
/// `[R | C]`. Returns the complement, the certificate, and the method.
fn complete_frame<T: Field>(r_fam: &LaurentMatrix<T>) -> Result<(LaurentMatrix<T>, LaurentPoly<T>, Completion)> {
    let (m, n) = r_fam.shape();
    let (cert, _u, u_inv) = hermite(r_fam);
    match cert.as_monomial() {
        Some((_, 0)) => {}
        _ => return Err(Error::DegenerateFamily { certificate: format!("{cert:?}") }),
    }
    if n == 0 {
        return Ok((LaurentMatrix::identity(m), cert, Completion::Probe));
    }
    // Probe: unit vectors completing the column space at the chart centre.
    let at0 = r_fam.coeff_mat(0);
    let (_, pivots) = at0.hstack(&Mat::identity(m)).rref();
    if pivots.len() == m && pivots[..n].iter().all(|&p| p < n) {
        let extra: Vec<usize> = pivots[n..].iter().map(|p| p - n).collect();
        let c = LaurentMatrix::constant(&Mat::identity(m).select_cols(&extra));
        if has_const_det(&r_fam.hstack(&c)) {
            return Ok((c, cert, Completion::Probe));
        }
    }
    let c = u_inv.block(0, n, m, m - n);
    debug_assert!(has_const_det(&r_fam.hstack(&c)));
    Ok((c, cert, Completion::Symbolic))
}

/// Unimodular row reduction `U·R = [D; 0]` with `D` upper triangular, by
/// Euclid on each column. Returns `(Π diag D, U, U⁻¹)`; the product is the
/// gcd of the maximal minors up to a unit.
fn hermite<T: Field>(r_fam: &LaurentMatrix<T>) -> (LaurentPoly<T>, LaurentMatrix<T>, LaurentMatrix<T>) {
    let (m, n) = r_fam.shape();
    assert!(r_fam.is_polynomial(), "hermite reduction needs polynomial entries");
    let mut a = r_fam.clone();
    let mut u = LaurentMatrix::identity(m);
    let mut u_inv = LaurentMatrix::identity(m);
    let mut cert = LaurentPoly::constant(T::one());
    for c in 0..n {
        loop {
            let nz: Vec<usize> = (c..m).filter(|&r| !a[(r, c)].is_zero()).collect();
            if nz.is_empty() {
                return (LaurentPoly::zero(), u, u_inv);
            }
            let p = *nz.iter().min_by_key(|&&r| (a[(r, c)].max_exp().unwrap(), r)).unwrap();
            if nz.len() == 1 {
                swap_rows(&mut a, &mut u, &mut u_inv, p, c);
                break;
            }
            let piv = a[(p, c)].clone();
            for &r in &nz {
                if r == p {
                    continue;
                }
                let (q, _) = a[(r, c)].div_rem(&piv);
                if q.is_zero() {
                    continue;
                }
                // row_r -= q·row_p; the inverse adds q·col_r to col_p.
                for j in 0..n {
                    let v = &a[(r, j)] - &(&q * &a[(p, j)]);
                    a[(r, j)] = v;
                }
                for j in 0..m {
                    let v = &u[(r, j)] - &(&q * &u[(p, j)]);
                    u[(r, j)] = v;
                }
                for i in 0..m {
                    let v = &u_inv[(i, p)] + &(&q * &u_inv[(i, r)]);
                    u_inv[(i, p)] = v;
                }
            }
        }
        cert = &cert * &a[(c, c)];
    }
    (cert, u, u_inv)
}

fn swap_rows<T: Field>(
    a: &mut LaurentMatrix<T>,
    u: &mut LaurentMatrix<T>,
    u_inv: &mut LaurentMatrix<T>,
    p: usize,
    c: usize,
) {
    if p == c {
        return;
    }
    a.swap_rows(p, c);
    u.swap_rows(p, c);
    for i in 0..u_inv.rows() {
        let tmp = u_inv[(i, p)].clone();
        u_inv[(i, p)] = u_inv[(i, c)].clone();
        u_inv[(i, c)] = tmp;
    }
}

/// Frame-free ρ-quaternionic space of a nonnegative bundle:
/// `U = H⁰(𝒰)`, `F = H⁰(𝒰(−1))`, `ρ(e₀ ⊗ t) = t·1`, `ρ(e₁ ⊗ t) = t·z`,
/// where `1, z` are the sections of `O(1)` vanishing at `∞`, resp. `0`.
#[derive(Clone, Debug)]
pub struct SectionModel<T: Field> {
    pub bundle: Bundle<T>,
    pub u: H0Space<T>,
    /// Sections of `𝒰(−1)`.
    pub f: Vec<Section<T>>,
    pub space: RhoQuatSpace<T>,
}

impl<T: Field> SectionModel<T> {
    pub fn canonical(bundle: &Bundle<T>) -> Result<Self> {
        let st = bundle.splitting_type();
        if !st.is_nonnegative() {
            return Err(Error::NotPositive(format!("splitting {:?} has a negative degree", st.degrees)));
        }
        let u = bundle.h0_basis();
        let f = bundle.twist(-1).h0_basis().sections;
        Self::assemble(bundle.clone(), u, f, "sections")
    }

    /// Model whose `U`-coordinates are those of `s`, with the bundle from
    /// [`bundle_of`].
    pub fn from_quotient(s: &RhoQuatSpace<T>) -> Result<Self> {
        let q = bundle_of(s)?;
        let col = |m: &LaurentMatrix<T>, v: &Mat<T>| -> Vec<LaurentPoly<T>> {
            m.mul(&LaurentMatrix::constant(v)).into_mat().col(0)
        };
        let u_sections = (0..s.dim_u)
            .map(|k| {
                let e = Mat::from_fn(s.dim_u, 1, |i, _| if i == k { T::one() } else { T::zero() });
                Section { s0: col(&q.eval0, &e), s_inf: col(&q.eval_inf, &e) }
            })
            .collect();
        let (r0, r1) = (s.rho_block(0), s.rho_block(1));
        let f = (0..s.dim_f)
            .map(|j| Section {
                s0: col(&q.eval0, &r0.select_cols(&[j])),
                s_inf: col(&q.eval_inf, &r1.select_cols(&[j])),
            })
            .collect();
        let u = H0Space::from_sections(u_sections, q.bundle.rank());
        let model = Self::assemble(q.bundle, u, f, &s.model)?;
        if model.space.rho != s.rho {
            return Err(Error::Invariant("section model does not reproduce rho".into()));
        }
        Ok(model)
    }

    fn assemble(bundle: Bundle<T>, u: H0Space<T>, f: Vec<Section<T>>, tag: &str) -> Result<Self> {
        let dim_f = f.len();
        let mut rho = Mat::zeros(u.dim(), 2 * dim_f);
        let shift_z: Vec<LaurentPoly<T>> = vec![LaurentPoly::z(1)];
        for (j, t) in f.iter().enumerate() {
            let c0 = u
                .coords(&t.s0)
                .ok_or_else(|| Error::Invariant("e0 ⊗ t is not a global section".into()))?;
            let zt: Vec<LaurentPoly<T>> = t.s0.iter().map(|p| p * &shift_z[0]).collect();
            let c1 = u.coords(&zt).ok_or_else(|| Error::Invariant("e1 ⊗ t is not a global section".into()))?;
            for i in 0..u.dim() {
                rho[(i, j)] = c0[i].clone();
                rho[(i, dim_f + j)] = c1[i].clone();
            }
        }
        let space = RhoQuatSpace::new(rho, dim_f, tag)?;
        Ok(SectionModel { bundle, u, f, space })
    }

    /// `U`-coordinates of a chart-0 section of the bundle.
    pub fn coords(&self, s0: &[LaurentPoly<T>]) -> Option<Vec<T>> {
        self.u.coords(s0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::QI;

    fn model(d: &[i64]) -> RhoQuatSpace<QI> {
        space_from_bundle(&SplittingType::new(d.to_vec())).unwrap()
    }

    #[test]
    fn quadratic_model_kernel() {
        let s = model(&[2]);
        assert_eq!((s.dim_u, s.dim_f), (3, 2));
        let k = s.kernel();
        assert_eq!(k.cols(), 1);
        // e₁⊗1 − e₀⊗X, indices: e₀⊗1=0, e₀⊗X=1, e₁⊗1=2, e₁⊗X=3
        let expect = Mat::column(vec![QI::int(0), QI::int(-1), QI::int(1), QI::int(0)]);
        assert_eq!(k.hstack(&expect).rank(), 1);
    }

    #[test]
    fn degree_zero_model() {
        let s = model(&[0]);
        assert_eq!((s.dim_u, s.dim_f, s.dim_e()), (1, 0, 0));
        let q = bundle_of(&s).unwrap();
        assert_eq!(q.bundle.splitting_type().degrees, vec![0]);
    }

    #[test]
    fn negative_degree_rejected() {
        assert!(matches!(
            space_from_bundle::<QI>(&SplittingType::new(vec![1, -1])),
            Err(Error::NegativeDegree(-1))
        ));
    }

    #[test]
    fn roundtrip_small_types() {
        for d in [vec![2], vec![1, 1], vec![3, 0], vec![2, 1, 0], vec![4]] {
            let s = model(&d);
            let q = bundle_of(&s).unwrap();
            assert_eq!(q.bundle.splitting_type().degrees, d);
            assert_eq!(q.certificates[0].as_monomial().unwrap().1, 0);
        }
    }

    #[test]
    fn degenerate_family_detected() {
        // ρ₁ − zρ₀ loses rank at z = 1 when ρ₀ = ρ₁.
        let rho = Mat::from_rows(vec![
            vec![QI::int(1), QI::int(1)],
            vec![QI::int(0), QI::int(0)],
        ]);
        let s = RhoQuatSpace::new(rho, 1, "custom").unwrap();
        assert!(!s.injective_at(&Point::Finite(QI::int(1))));
        assert!(matches!(bundle_of(&s), Err(Error::DegenerateFamily { .. })));
    }

    #[test]
    fn section_model_matches_polynomial_model() {
        for k in 1..=4 {
            let b = Bundle::<QI>::line(k);
            let m = SectionModel::canonical(&b).unwrap();
            assert_eq!(m.space.rho, model(&[k]).rho);
        }
    }

    #[test]
    fn from_quotient_reproduces_rho() {
        let s = model(&[2, 1]);
        let m = SectionModel::from_quotient(&s).unwrap();
        assert_eq!(m.space.rho, s.rho);
        assert!(m.u.sections.iter().all(|t| t.is_section_of(&m.bundle)));
        let twisted = m.bundle.twist(-1);
        assert!(m.f.iter().all(|t| t.is_section_of(&twisted)));
    }
}
