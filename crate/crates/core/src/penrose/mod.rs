//! Penrose transform along the unit circle: `u(x) = (1/2π)∫ h(e^{it}, ψ_{e^{it}}(x)) dt`
//! for Laurent-polynomial germs, and the comparison of `du` with the Ward
//! side.

use std::f64::consts::PI;

use num_complex::Complex;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cp1_bundles::{Point, SplittingType};
use crate::error::{Error, Result};
use crate::flat_models::MultiPoly;
use crate::laurent_linalg::{LaurentMatrix, LaurentPoly, Mat};
use crate::rho_quat::{RhoQuatSpace, SectionModel};
use crate::scalar::{Field, QI};
use crate::ward::{extension_bundle, ward_identity_check_with, ward_scalar, ExtensionClass, PolesProjection, WardOptions};

/// One term `coef · z^zpow · u^umonomial` of output component `out`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GermTerm {
    pub zpow: i64,
    pub umonomial: Vec<u32>,
    pub coef: QI,
    #[serde(default)]
    pub out: usize,
}

/// `h: annulus × fibre → C^m`, Laurent in `z` and polynomial in the fibre
/// coordinates `u`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Germ {
    pub m: usize,
    pub terms: Vec<GermTerm>,
}

impl Germ {
    pub fn new(m: usize, terms: Vec<GermTerm>) -> Result<Self> {
        let g = Germ { m, terms };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::Dimension("germ with m = 0".into()));
        }
        let r = self.fibre_rank();
        for t in &self.terms {
            if t.out >= self.m {
                return Err(Error::Dimension(format!("term output {} >= m = {}", t.out, self.m)));
            }
            if t.umonomial.len() != r {
                return Err(Error::Dimension("terms disagree on the fibre rank".into()));
            }
        }
        Ok(())
    }

    /// Number of fibre coordinates; zero for a germ without terms.
    pub fn fibre_rank(&self) -> usize {
        self.terms.first().map_or(0, |t| t.umonomial.len())
    }

    /// `Σⱼ bᵢⱼ(z) uⱼ` for an `m × r` Laurent matrix `b`.
    pub fn fibre_linear(b: &LaurentMatrix<QI>) -> Self {
        let (m, r) = b.shape();
        let mut terms = Vec::new();
        for i in 0..m {
            for j in 0..r {
                for (e, c) in b[(i, j)].terms() {
                    let mut mono = vec![0; r];
                    mono[j] = 1;
                    terms.push(GermTerm { zpow: e, umonomial: mono, coef: c.clone(), out: i });
                }
            }
        }
        Germ { m, terms }
    }

    /// Random germ with `terms` monomials of fibre degree `≤ max_udeg`.
    pub fn random<R: Rng + ?Sized>(
        rng: &mut R,
        rank: usize,
        m: usize,
        zrange: (i64, i64),
        max_udeg: u32,
        terms: usize,
    ) -> Self {
        let terms = (0..terms)
            .map(|_| {
                let deg = rng.gen_range(0..=max_udeg);
                let mut mono = vec![0; rank];
                for _ in 0..deg {
                    mono[rng.gen_range(0..rank)] += 1;
                }
                let zpow = rng.gen_range(zrange.0..=zrange.1);
                let complex = rng.gen_bool(0.3);
                let coef = QI::random_nonzero(rng, 4, complex);
                GermTerm { zpow, umonomial: mono, coef, out: rng.gen_range(0..m) }
            })
            .collect();
        Germ { m, terms }
    }

    /// Random fibre-linear germ `Σ bᵢⱼ(z) uⱼ` with every exponent in `lo..=hi`
    /// present.
    pub fn random_fibre_linear<R: Rng + ?Sized>(rng: &mut R, rank: usize, m: usize, lo: i64, hi: i64) -> Self {
        let b = LaurentMatrix::from_fn(m, rank, |_, _| {
            LaurentPoly::from_terms((lo..=hi).map(|e| (e, QI::random_nonzero(rng, 9, true))))
        });
        Self::fibre_linear(&b)
    }

    pub fn is_fibre_linear(&self) -> bool {
        self.terms.iter().all(|t| t.umonomial.iter().sum::<u32>() == 1)
    }

    fn max_abs_zpow(&self) -> i64 {
        self.terms.iter().map(|t| t.zpow.abs()).max().unwrap_or(0)
    }

    fn check_rank(&self, r: usize) -> Result<()> {
        if !self.terms.is_empty() && self.fibre_rank() != r {
            return Err(Error::Dimension(format!("germ has {} fibre coordinates, bundle rank is {r}", self.fibre_rank())));
        }
        Ok(())
    }

    /// `∂h/∂uⱼ` as a germ.
    pub fn fibre_derivative(&self, j: usize) -> Germ {
        let mut terms = Vec::new();
        for t in &self.terms {
            let k = t.umonomial[j];
            if k == 0 {
                continue;
            }
            let mut mono = t.umonomial.clone();
            mono[j] -= 1;
            terms.push(GermTerm { zpow: t.zpow, umonomial: mono, coef: t.coef.clone() * QI::int(k as i64), out: t.out });
        }
        Germ { m: self.m, terms }
    }

    fn eval_c64(&self, z: Complex<f64>, u: &[Complex<f64>]) -> Vec<Complex<f64>> {
        let mut out = vec![Complex::new(0.0, 0.0); self.m];
        for t in &self.terms {
            let mut v = t.coef.to_c64() * z.powi(t.zpow as i32);
            for (ui, &k) in u.iter().zip(&t.umonomial) {
                v *= ui.powu(k);
            }
            out[t.out] += v;
        }
        out
    }
}

/// `ψ_z` and the Penrose transform over a section model of the bundle.
#[derive(Clone, Debug)]
pub struct PenroseModel {
    pub sections: SectionModel<QI>,
    /// `ψ_z = Σ_k x_k u_k(z)` in the chart-0 frame, `rank × dim U`.
    psi0: LaurentMatrix<QI>,
}

impl PenroseModel {
    /// Coordinates on `U` are those of `S`.
    pub fn from_space(s: &RhoQuatSpace<QI>) -> Result<Self> {
        Self::new(SectionModel::from_quotient(s)?)
    }

    pub fn new(sections: SectionModel<QI>) -> Result<Self> {
        let st = sections.bundle.splitting_type();
        if !st.is_positive() {
            return Err(Error::NotPositive(format!("splitting {:?}", st.degrees)));
        }
        let r = sections.bundle.rank();
        let u = &sections.u;
        let psi0 = LaurentMatrix::from_fn(r, u.dim(), |i, k| u.sections[k].s0[i].clone());
        Ok(PenroseModel { sections, psi0 })
    }

    pub fn dim_u(&self) -> usize {
        self.psi0.cols()
    }

    pub fn rank(&self) -> usize {
        self.psi0.rows()
    }

    pub fn splitting(&self) -> &SplittingType {
        self.sections.bundle.splitting_type()
    }

    /// `ψ_z(x)`: the section `x` evaluated at `z` in the chart frame.
    pub fn psi_eval(&self, x: &[QI], z: &Point<QI>) -> Vec<QI> {
        let s = self.sections.u.combine(x);
        s.eval(z)
    }

    /// `ψ_z` as a Laurent matrix `rank × dim U`.
    pub fn psi_matrix(&self) -> &LaurentMatrix<QI> {
        &self.psi0
    }

    /// `h(z, ψ_z(x))` as a polynomial in `x` with Laurent coefficients, one
    /// per output.
    fn composed(&self, g: &Germ) -> Result<Vec<MultiPoly<LaurentPoly<QI>>>> {
        g.validate()?;
        g.check_rank(self.rank())?;
        let n = self.dim_u();
        let subs: Vec<MultiPoly<LaurentPoly<QI>>> =
            (0..self.rank()).map(|i| MultiPoly::linear(self.psi0.as_mat().row(i))).collect();
        let mut powers: Vec<Vec<MultiPoly<LaurentPoly<QI>>>> =
            subs.iter().map(|s| vec![MultiPoly::constant(n, LaurentPoly::constant(QI::int(1))), s.clone()]).collect();
        let mut out = vec![MultiPoly::zero(n); g.m];
        for t in &g.terms {
            let mut m = MultiPoly::constant(n, LaurentPoly::monomial(t.coef.clone(), t.zpow));
            for (i, &k) in t.umonomial.iter().enumerate() {
                while powers[i].len() <= k as usize {
                    let next = &powers[i][powers[i].len() - 1] * &subs[i];
                    powers[i].push(next);
                }
                m = &m * &powers[i][k as usize];
            }
            out[t.out] = &out[t.out] + &m;
        }
        Ok(out)
    }

    /// Closed form of `u` by extraction of the `z⁰` coefficient.
    pub fn pluriharmonic_poly(&self, g: &Germ) -> Result<Vec<MultiPoly<QI>>> {
        Ok(self
            .composed(g)?
            .into_iter()
            .map(|p| {
                let mut q = MultiPoly::zero(p.nvars());
                for (e, c) in p.terms() {
                    q.add_term(e.clone(), c.coeff(0));
                }
                q
            })
            .collect())
    }

    /// Largest `|exponent|` of `z` in `h(z, ψ_z(x))`.
    pub fn max_abs_exponent(&self, g: &Germ) -> i64 {
        let (lo, hi) = self.psi0.exp_range();
        let deg = g.terms.iter().map(|t| t.umonomial.iter().sum::<u32>()).max().unwrap_or(0) as i64;
        g.max_abs_zpow() + deg * lo.abs().max(hi.abs())
    }

    /// `(1/N) Σ_k h(ζ_k, ψ_{ζ_k}(x))`, `ζ_k = e^{2πik/N}`. Node values are
    /// summed in index order.
    pub fn quadrature_eval(&self, g: &Germ, x: &[Complex<f64>], nodes: usize) -> Result<Vec<Complex<f64>>> {
        g.validate()?;
        g.check_rank(self.rank())?;
        if x.len() != self.dim_u() || nodes == 0 {
            return Err(Error::Dimension(format!("point of length {}, expected {}", x.len(), self.dim_u())));
        }
        let values: Vec<Vec<Complex<f64>>> = (0..nodes)
            .into_par_iter()
            .map(|k| {
                let z = Complex::from_polar(1.0, 2.0 * PI * k as f64 / nodes as f64);
                let u: Vec<Complex<f64>> = (0..self.rank())
                    .map(|i| (0..self.dim_u()).map(|j| self.psi0[(i, j)].eval_c64(z) * x[j]).sum())
                    .collect();
                g.eval_c64(z, &u)
            })
            .collect();
        let mut acc = vec![Complex::new(0.0, 0.0); g.m];
        for v in values {
            for (a, b) in acc.iter_mut().zip(v) {
                *a += b;
            }
        }
        Ok(acc.into_iter().map(|a| a / nodes as f64).collect())
    }

    /// Exact value, cross-checked against the trapezoid rule.
    pub fn pluriharmonic_eval(&self, g: &Germ, x: &[QI], nodes: usize, tol: f64) -> Result<Vec<QI>> {
        let polys = self.pluriharmonic_poly(g)?;
        let exact: Vec<QI> = polys.iter().map(|p| p.eval(x)).collect();
        let xc: Vec<Complex<f64>> = x.iter().map(|v| v.to_c64()).collect();
        let quad = self.quadrature_eval(g, &xc, nodes)?;
        let dev = deviation(&exact, &quad);
        if dev > tol {
            return Err(Error::QuadratureMismatch { deviation: dev, tolerance: tol });
        }
        Ok(exact)
    }

    /// `du_x` as an `m × dim U` matrix.
    pub fn pluriharmonic_grad(&self, g: &Germ, x: &[QI]) -> Result<Mat<QI>> {
        let polys = self.pluriharmonic_poly(g)?;
        Ok(Mat::from_fn(g.m, self.dim_u(), |i, j| polys[i].derivative(j).eval(x)))
    }

    /// Largest relative gap between the exact gradient and central
    /// differences of the quadrature value.
    pub fn gradient_fd_check(&self, g: &Germ, x: &[QI], step: f64, nodes: usize) -> Result<f64> {
        let grad = self.pluriharmonic_grad(g, x)?;
        let xc: Vec<Complex<f64>> = x.iter().map(|v| v.to_c64()).collect();
        let scale = grad.max_abs().max(1.0);
        let mut worst = 0.0f64;
        for j in 0..self.dim_u() {
            let mut plus = xc.clone();
            let mut minus = xc.clone();
            plus[j] += step;
            minus[j] -= step;
            let fp = self.quadrature_eval(g, &plus, nodes)?;
            let fm = self.quadrature_eval(g, &minus, nodes)?;
            for i in 0..g.m {
                let fd = (fp[i] - fm[i]) / (2.0 * step);
                worst = worst.max((fd - grad[(i, j)].to_c64()).norm() / scale);
            }
        }
        Ok(worst)
    }

    /// `∂h/∂u(z, ψ_z(x))`, an `m × rank` Laurent matrix.
    pub fn linearization(&self, g: &Germ, x: &[QI]) -> Result<LaurentMatrix<QI>> {
        let r = self.rank();
        let mut cols = Vec::with_capacity(r);
        for j in 0..r {
            let d = g.fibre_derivative(j);
            let comp = self.composed(&Germ { m: g.m, terms: d.terms })?;
            cols.push(comp.iter().map(|p| eval_laurent_coeffs(p, x)).collect::<Vec<_>>());
        }
        Ok(LaurentMatrix::from_fn(g.m, r, |i, j| cols[j][i].clone()))
    }
}

fn eval_laurent_coeffs(p: &MultiPoly<LaurentPoly<QI>>, x: &[QI]) -> LaurentPoly<QI> {
    let lifted: Vec<LaurentPoly<QI>> = x.iter().map(|v| LaurentPoly::constant(v.clone())).collect();
    p.eval(&lifted)
}

fn deviation(exact: &[QI], quad: &[Complex<f64>]) -> f64 {
    exact.iter().zip(quad).map(|(e, q)| (e.to_c64() - q).norm()).fold(0.0, f64::max)
}

/// Both sides of `(Id⊗p)(du) = c|_{ker ρ}` at one point.
#[derive(Clone, Debug, Serialize)]
pub struct Prop52Report {
    /// `(Id⊗p)(du_x)`, `m × dim ker ρ`.
    pub lhs: Mat<QI>,
    /// `ρ′|_{ker ρ}` of the extension with cocycle `∂h/∂u·T`.
    pub ward_restriction: Mat<QI>,
    pub scalar: QI,
    pub cocycle: LaurentMatrix<QI>,
    pub extension_splitting: SplittingType,
    /// `ρ′| = −s·lhs` exactly.
    pub exact_holds: bool,
    /// Same comparison with `du` replaced by central differences of the
    /// quadrature value.
    pub quadrature_deviation: f64,
    pub quadrature_holds: bool,
}

pub fn prop52_identity(model: &PenroseModel, g: &Germ, x: &[QI], nodes: usize, tol: f64) -> Result<Prop52Report> {
    let poles = PolesProjection::new(&model.sections.space)?;
    let du = model.pluriharmonic_grad(g, x)?;
    let lhs = du.mul(&poles.matrix);

    let b = model.linearization(g, x)?.mul(model.sections.bundle.transition());
    let class = ExtensionClass::new(model.sections.bundle.clone(), b.clone())?;
    let ward = ward_identity_check_with(&class, &model.sections, WardOptions { nodes, quad_tol: tol })?;
    let s = ward_scalar().clone();
    let rhs = lhs.scale(&-s.clone());
    let exact_holds = ward.rho_prime_restriction == rhs;

    let fd = fd_gradient(model, g, x, 1e-3, nodes)?;
    let p = poles.matrix.map(|v| v.to_c64());
    let sc = s.to_c64();
    let mut dev = 0.0f64;
    for i in 0..lhs.rows() {
        for j in 0..lhs.cols() {
            let v: Complex<f64> = (0..model.dim_u()).map(|k| fd[i * model.dim_u() + k] * p[(k, j)]).sum();
            dev = dev.max((-sc * v - ward.rho_prime_restriction[(i, j)].to_c64()).norm());
        }
    }
    let report = Prop52Report {
        lhs,
        ward_restriction: ward.rho_prime_restriction,
        scalar: s,
        cocycle: b,
        extension_splitting: ward.extension_splitting,
        exact_holds,
        quadrature_deviation: dev,
        quadrature_holds: dev <= tol.max(1e-8),
    };
    Ok(report)
}

fn fd_gradient(model: &PenroseModel, g: &Germ, x: &[QI], step: f64, nodes: usize) -> Result<Vec<Complex<f64>>> {
    let xc: Vec<Complex<f64>> = x.iter().map(|v| v.to_c64()).collect();
    let n = model.dim_u();
    let mut out = vec![Complex::new(0.0, 0.0); g.m * n];
    for j in 0..n {
        // Fourth-order central stencil (f(−2) − 8f(−1) + 8f(1) − f(2)) / 12h.
        let mut vals = Vec::with_capacity(4);
        for k in [-2.0, -1.0, 1.0, 2.0] {
            let mut p = xc.clone();
            p[j] += k * step;
            vals.push(model.quadrature_eval(g, &p, nodes)?);
        }
        for i in 0..g.m {
            out[i * n + j] = (vals[0][i] - 8.0 * vals[1][i] + 8.0 * vals[2][i] - vals[3][i]) / (12.0 * step);
        }
    }
    Ok(out)
}

/// Strict variant failing with [`Error::IdentityViolation`].
pub fn prop52_assert(model: &PenroseModel, g: &Germ, x: &[QI], nodes: usize, tol: f64) -> Result<Prop52Report> {
    let r = prop52_identity(model, g, x, nodes, tol)?;
    if !r.exact_holds || !r.quadrature_holds {
        return Err(Error::IdentityViolation {
            lhs: format!("{:?}", r.ward_restriction),
            rhs: format!("-({}) * {:?}", r.scalar, r.lhs),
        });
    }
    Ok(r)
}

#[derive(Clone, Debug, Serialize)]
pub struct HypercomplexCertificate {
    pub status: &'static str,
    pub matrix: Mat<QI>,
    pub invertible: bool,
    pub extension_splitting: SplittingType,
    pub all_ones: bool,
    pub consistent: bool,
}

/// `(Id⊗p)(du_x)` invertible, cross-checked against the splitting type of
/// the extension with cocycle `∂h/∂u·T`.
pub fn hypercomplex_certificate(model: &PenroseModel, g: &Germ, x: &[QI]) -> Result<HypercomplexCertificate> {
    let poles = PolesProjection::new(&model.sections.space)?;
    if g.m != poles.kernel.cols() {
        return Err(Error::Dimension(format!("m = {} but dim ker rho = {}", g.m, poles.kernel.cols())));
    }
    let matrix = model.pluriharmonic_grad(g, x)?.mul(&poles.matrix);
    let invertible = matrix.rows() > 0 && matrix.inverse().is_some();
    let b = model.linearization(g, x)?.mul(model.sections.bundle.transition());
    let ext = extension_bundle(&ExtensionClass::new(model.sections.bundle.clone(), b)?)?;
    let st = ext.total.splitting_type().clone();
    let all_ones = st.is_all_ones();
    Ok(HypercomplexCertificate {
        status: if invertible && all_ones { "PASS" } else { "FAIL" },
        matrix,
        invertible,
        extension_splitting: st,
        all_ones,
        consistent: invertible == all_ones,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rho_quat::space_from_bundle;

    fn model(k: i64) -> PenroseModel {
        PenroseModel::from_space(&space_from_bundle(&SplittingType::new(vec![k])).unwrap()).unwrap()
    }

    fn term(zpow: i64, u: Vec<u32>, c: i64) -> GermTerm {
        GermTerm { zpow, umonomial: u, coef: QI::int(c), out: 0 }
    }

    #[test]
    fn psi_is_evaluation_in_the_polynomial_model() {
        let m = model(2);
        let x = [QI::int(1), QI::int(2), QI::int(3)];
        assert_eq!(m.psi_eval(&x, &Point::Finite(QI::int(2))), vec![QI::int(1 + 4 + 12)]);
        assert_eq!(m.psi_eval(&x, &Point::Infinity), vec![QI::int(3)]);
    }

    #[test]
    fn closed_forms() {
        let m = model(2);
        let u = m.pluriharmonic_poly(&Germ::new(1, vec![term(0, vec![1], 1)]).unwrap()).unwrap();
        assert_eq!(u[0], MultiPoly::var(3, 0));
        let g = Germ::new(1, vec![term(-2, vec![2], 1)]).unwrap();
        let u = m.pluriharmonic_poly(&g).unwrap();
        let x = |i| MultiPoly::<QI>::var(3, i);
        assert_eq!(u[0], &(&x(1) * &x(1)) + &(&x(0) * &x(2)).scale(&QI::int(2)));
        let xs = [QI::int(1), QI::int(-1), QI::int(2)];
        assert_eq!(m.pluriharmonic_eval(&g, &xs, 64, 1e-10).unwrap(), vec![QI::int(5)]);
    }

    #[test]
    fn gradient_identity_on_quadratic_model() {
        let m = model(2);
        let g = Germ::new(1, vec![term(-1, vec![1], 1)]).unwrap();
        let r = prop52_identity(&m, &g, &vec![QI::int(0); 3], 64, 1e-8).unwrap();
        assert!(r.exact_holds && r.quadrature_holds, "{r:?}");
        assert!(!r.lhs.is_zero());
        let c = hypercomplex_certificate(&m, &g, &vec![QI::int(0); 3]).unwrap();
        assert_eq!(c.status, "PASS");
        assert_eq!(c.extension_splitting.degrees, vec![1, 1]);
        let k = Germ::new(1, vec![term(3, vec![0], 2)]).unwrap();
        let c = hypercomplex_certificate(&m, &k, &vec![QI::int(0); 3]).unwrap();
        assert_eq!(c.status, "FAIL");
        assert!(c.matrix.is_zero() && c.consistent);
    }
}
