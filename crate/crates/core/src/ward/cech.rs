use std::f64::consts::PI;

use num_complex::Complex;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::laurent_linalg::{LaurentPoly, Mat};
use crate::rho_quat::RhoQuatSpace;
use crate::scalar::{Field, QI};

/// `ι∘h = h₀ − h_∞` with `h₀` holomorphic on the `z` chart and `h_∞`
/// holomorphic on the `w` chart vanishing at `∞`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CechSplit {
    pub h0: Vec<LaurentPoly<QI>>,
    pub h_inf: Vec<LaurentPoly<QI>>,
}

pub fn cech_split(h: &[LaurentPoly<QI>]) -> CechSplit {
    let h0 = h.iter().map(|p| p.truncate(0, i64::MAX)).collect();
    let h_inf = h.iter().map(|p| -p.truncate(i64::MIN, -1)).collect();
    CechSplit { h0, h_inf }
}

impl CechSplit {
    /// `h₀(0)`.
    pub fn h0_at_zero(&self) -> Vec<QI> {
        self.h0.iter().map(|p| p.coeff(0)).collect()
    }
}

/// `(1/N) Σ_k f(e^{2πik/N})`, the `N`-node trapezoid rule for
/// `(1/2π)∫₀^{2π} f(e^{it}) dt`.
pub fn trapezoid_mean(p: &LaurentPoly<QI>, nodes: usize) -> Complex<f64> {
    assert!(nodes > 0, "trapezoid rule needs at least one node");
    let terms: Vec<(i64, Complex<f64>)> = p.terms().map(|(e, c)| (e, c.to_c64())).collect();
    let mut acc = Complex::new(0.0, 0.0);
    for k in 0..nodes {
        let t = 2.0 * PI * k as f64 / nodes as f64;
        for (e, c) in &terms {
            acc += c * Complex::from_polar(1.0, t * *e as f64);
        }
    }
    acc / nodes as f64
}

/// Cauchy mean `(1/2π)∫(ι∘h)(e^{it}) dt` by exact coefficient extraction,
/// cross-checked against the trapezoid rule.
pub fn cauchy_alpha(iota_h: &[LaurentPoly<QI>], nodes: usize, tol: f64) -> Result<Vec<QI>> {
    let exact: Vec<QI> = iota_h.iter().map(|p| p.coeff(0)).collect();
    let mut worst = 0.0f64;
    for (p, e) in iota_h.iter().zip(&exact) {
        worst = worst.max((trapezoid_mean(p, nodes) - e.to_c64()).norm());
    }
    if worst > tol {
        return Err(Error::QuadratureMismatch { deviation: worst, tolerance: tol });
    }
    Ok(exact)
}

/// The map `p: U* → (ker ρ)*`, `p(λ) = ξ_λ|_{ker ρ}` where `ξ_λ` agrees
/// with `λ∘ρ` on `E₀ = e₁⊗F` and vanishes on `E_∞ = e₀⊗F`.
#[derive(Clone, Debug, PartialEq)]
pub struct PolesProjection {
    /// Columns of `ker ρ`.
    pub kernel: Mat<QI>,
    /// `dim U × dim ker ρ`; `p(λ) = λ·matrix` for row vectors `λ`.
    pub matrix: Mat<QI>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PolesKernelReport {
    pub rank: usize,
    pub dim_ker_rho: usize,
    pub dim_ker_p: usize,
    pub dim_annihilator_sum: usize,
    pub kernel_matches: bool,
    pub surjective: bool,
}

impl PolesProjection {
    pub fn new(s: &RhoQuatSpace<QI>) -> Result<Self> {
        if !s.is_surjective() {
            return Err(Error::NotPositive(format!("rho has rank {} < dim U = {}", s.rho.rank(), s.dim_u)));
        }
        let kernel = s.kernel();
        let k1 = kernel.block(s.dim_f, 0, s.dim_f, kernel.cols());
        let matrix = s.rho_block(1).mul(&k1);
        Ok(PolesProjection { kernel, matrix })
    }

    pub fn apply(&self, lambda: &[QI]) -> Vec<QI> {
        self.matrix.transpose().mul_vec(lambda)
    }

    /// Applies `p` to each row of `alpha` (`m × dim U`).
    pub fn apply_rows(&self, alpha: &Mat<QI>) -> Mat<QI> {
        alpha.mul(&self.matrix)
    }

    /// Exact rank comparison of `ker p` with `(U*∩Ann E₀) + (U*∩Ann E_∞)`.
    pub fn kernel_report(&self, s: &RhoQuatSpace<QI>) -> PolesKernelReport {
        let ker_p = self.matrix.left_nullspace();
        let ann0 = s.rho_block(1).left_nullspace();
        let ann_inf = s.rho_block(0).left_nullspace();
        let mut sum_rows: Vec<Vec<QI>> = ann0;
        sum_rows.extend(ann_inf);
        let dim_sum = rank_of_rows(&sum_rows, s.dim_u);
        let mut joint = sum_rows.clone();
        joint.extend(ker_p.iter().cloned());
        let dim_joint = rank_of_rows(&joint, s.dim_u);
        let rank = self.matrix.rank();
        PolesKernelReport {
            rank,
            dim_ker_rho: self.kernel.cols(),
            dim_ker_p: ker_p.len(),
            dim_annihilator_sum: dim_sum,
            kernel_matches: dim_sum == ker_p.len() && dim_joint == dim_sum,
            surjective: rank == self.kernel.cols(),
        }
    }
}

fn rank_of_rows(rows: &[Vec<QI>], width: usize) -> usize {
    if rows.is_empty() {
        return 0;
    }
    Mat::from_rows(rows.to_vec()).rank().min(width)
}
