use crate::cp1_bundles::Point;
use crate::error::{Error, Result};
use crate::laurent_linalg::Mat;
use crate::scalar::Field;

/// `gl(2)` basis order used for `sigma`: `e₁₁, e₁₂, e₂₁, e₂₂`.
pub const BASIS: [(usize, usize); 4] = [(0, 0), (0, 1), (1, 0), (1, 1)];

/// Representation `σ: gl(2) → End(E)` given on the elementary matrices.
#[derive(Clone, Debug, PartialEq)]
pub struct HypercomplexStructure<T> {
    pub dim_e: usize,
    pub sigma: [Mat<T>; 4],
}

fn elementary<T: Field>(i: usize, j: usize) -> Mat<T> {
    let mut m = Mat::zeros(2, 2);
    m[(i, j)] = T::one();
    m
}

impl<T: Field> HypercomplexStructure<T> {
    /// `A ↦ A ⊗ I_F` on `C² ⊗ F`, index `a·dim_f + j`.
    pub fn standard(dim_f: usize) -> Self {
        let id = Mat::identity(dim_f);
        let sigma = BASIS.map(|(i, j)| elementary::<T>(i, j).kron(&id));
        HypercomplexStructure { dim_e: 2 * dim_f, sigma }
    }

    /// `σ'(A) = P·σ(A)·P⁻¹`.
    pub fn conjugate(&self, p: &Mat<T>) -> Result<Self> {
        let pinv = p.inverse().ok_or_else(|| Error::Dimension("conjugating matrix is singular".into()))?;
        let sigma = self.sigma.clone().map(|s| p.mul(&s).mul(&pinv));
        Ok(HypercomplexStructure { dim_e: self.dim_e, sigma })
    }

    /// `σ(A)` for an arbitrary 2×2 matrix.
    pub fn apply(&self, a: &Mat<T>) -> Mat<T> {
        let mut out = Mat::zeros(self.dim_e, self.dim_e);
        for (k, (i, j)) in BASIS.iter().enumerate() {
            if !a[(*i, *j)].is_zero() {
                out = out.add(&self.sigma[k].scale(&a[(*i, *j)]));
            }
        }
        out
    }

    /// Unital algebra morphism identities `σ(e_ij)σ(e_kl) = δ_jk σ(e_il)`
    /// and `σ(e₁₁) + σ(e₂₂) = I`.
    pub fn validate(&self) -> Result<()> {
        for s in &self.sigma {
            if s.shape() != (self.dim_e, self.dim_e) {
                return Err(Error::NotAlgebraMorphism(format!("sigma block has shape {:?}", s.shape())));
            }
        }
        if !self.dim_e.is_multiple_of(2) {
            return Err(Error::NotAlgebraMorphism(format!("dim E = {} is odd", self.dim_e)));
        }
        let zero = Mat::zeros(self.dim_e, self.dim_e);
        for (a, (i, j)) in BASIS.iter().enumerate() {
            for (b, (k, l)) in BASIS.iter().enumerate() {
                let lhs = self.sigma[a].mul(&self.sigma[b]);
                let rhs = if j == k {
                    let c = BASIS.iter().position(|p| *p == (*i, *l)).unwrap();
                    &self.sigma[c]
                } else {
                    &zero
                };
                if !approx_eq(&lhs, rhs) {
                    return Err(Error::NotAlgebraMorphism(format!(
                        "sigma(e{}{}) sigma(e{}{}) is wrong",
                        i + 1,
                        j + 1,
                        k + 1,
                        l + 1
                    )));
                }
            }
        }
        if !approx_eq(&self.sigma[0].add(&self.sigma[3]), &Mat::identity(self.dim_e)) {
            return Err(Error::NotAlgebraMorphism("sigma(e11) + sigma(e22) != I".into()));
        }
        Ok(())
    }

    /// `F = im σ(e₁₁)` and `iso: E → C² ⊗ F` with
    /// `iso·σ(A)·iso⁻¹ = A ⊗ I_F`. The second copy of `F` is `σ(e₂₁)F`.
    pub fn decompose(&self) -> Result<(usize, Mat<T>)> {
        self.validate()?;
        if self.dim_e == 0 {
            return Ok((0, Mat::zeros(0, 0)));
        }
        let f_basis = self.sigma[0].column_basis();
        let dim_f = f_basis.cols();
        if 2 * dim_f != self.dim_e {
            return Err(Error::NotAlgebraMorphism(format!("rank sigma(e11) = {dim_f}, dim E = {}", self.dim_e)));
        }
        let frame = f_basis.hstack(&self.sigma[2].mul(&f_basis));
        let iso = frame
            .inverse()
            .ok_or_else(|| Error::NotAlgebraMorphism("F and sigma(e21)F are not complementary".into()))?;
        Ok((dim_f, iso))
    }

    /// `ker σ(A_z)` as columns, `A_z` the nilpotent with kernel line `ℓ_z`.
    pub fn kernel_map(&self, z: &Point<T>) -> Mat<T> {
        let a = nilpotent(z);
        self.apply(&a).kernel_matrix()
    }
}

/// Kernel line `ℓ_z = (−z, 1)`, `ℓ_∞ = (1, 0)`.
pub fn kernel_line<T: Field>(z: &Point<T>) -> [T; 2] {
    match z {
        Point::Finite(z) => [-z.clone(), T::one()],
        Point::Infinity => [T::one(), T::zero()],
    }
}

/// Nilpotent `A_z = [[−z, −z²], [1, z]]` with `ker A_z = ℓ_z`; `A_∞ = e₁₂`.
pub fn nilpotent<T: Field>(z: &Point<T>) -> Mat<T> {
    match z {
        Point::Finite(z) => Mat::from_rows(vec![
            vec![-z.clone(), -(z.clone() * z.clone())],
            vec![T::one(), z.clone()],
        ]),
        Point::Infinity => elementary(0, 1),
    }
}

fn approx_eq<T: Field>(a: &Mat<T>, b: &Mat<T>) -> bool {
    if T::EXACT {
        a == b
    } else {
        a.sub(b).iter().all(|x| x.is_negligible())
    }
}
