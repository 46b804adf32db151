use std::collections::HashMap;
use std::fmt;
use std::ops::{Index, IndexMut};

use num_complex::Complex;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::dense::Mat;
use super::poly::LaurentPoly;
use crate::error::{Error, Result};
use crate::scalar::Field;

/// Matrix of Laurent polynomials in the chart variable `z`.
#[derive(Clone, PartialEq)]
pub struct LaurentMatrix<T> {
    m: Mat<LaurentPoly<T>>,
}

impl<T: Field> LaurentMatrix<T> {
    pub fn from_mat(m: Mat<LaurentPoly<T>>) -> Self {
        LaurentMatrix { m }
    }

    pub fn from_rows(rows: Vec<Vec<LaurentPoly<T>>>) -> Self {
        LaurentMatrix { m: Mat::from_rows(rows) }
    }

    pub fn from_fn<F: FnMut(usize, usize) -> LaurentPoly<T>>(rows: usize, cols: usize, f: F) -> Self {
        LaurentMatrix { m: Mat::from_fn(rows, cols, f) }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        LaurentMatrix { m: Mat::zeros(rows, cols) }
    }

    pub fn identity(n: usize) -> Self {
        LaurentMatrix { m: Mat::identity(n) }
    }

    /// Constant matrix viewed as a Laurent matrix.
    pub fn constant(c: &Mat<T>) -> Self {
        Self::from_fn(c.rows(), c.cols(), |i, j| LaurentPoly::constant(c[(i, j)].clone()))
    }

    /// `diag(z^{d_1}, …, z^{d_n})`.
    pub fn diag_monomials(degrees: &[i64]) -> Self {
        let n = degrees.len();
        Self::from_fn(n, n, |i, j| if i == j { LaurentPoly::z(degrees[i]) } else { LaurentPoly::zero() })
    }

    /// `Σ_e C_e z^e` from `(e, C_e)` pairs of equal shape.
    pub fn from_coeff_mats(rows: usize, cols: usize, mats: &[(i64, Mat<T>)]) -> Self {
        let mut out = Self::zeros(rows, cols);
        for (e, c) in mats {
            assert_eq!(c.shape(), (rows, cols), "coefficient matrix shape");
            for i in 0..rows {
                for j in 0..cols {
                    out.m[(i, j)].add_term(*e, c[(i, j)].clone());
                }
            }
        }
        out
    }

    pub fn rows(&self) -> usize {
        self.m.rows()
    }

    pub fn cols(&self) -> usize {
        self.m.cols()
    }

    pub fn shape(&self) -> (usize, usize) {
        self.m.shape()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn as_mat(&self) -> &Mat<LaurentPoly<T>> {
        &self.m
    }

    pub fn into_mat(self) -> Mat<LaurentPoly<T>> {
        self.m
    }

    pub fn entries(&self) -> impl Iterator<Item = &LaurentPoly<T>> {
        self.m.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.entries().all(|p| p.is_zero())
    }

    pub fn min_exp(&self) -> Option<i64> {
        self.entries().filter_map(|p| p.min_exp()).min()
    }

    pub fn max_exp(&self) -> Option<i64> {
        self.entries().filter_map(|p| p.max_exp()).max()
    }

    /// Exponent range `(min, max)` over all entries; `(0, 0)` for the zero matrix.
    pub fn exp_range(&self) -> (i64, i64) {
        (self.min_exp().unwrap_or(0), self.max_exp().unwrap_or(0))
    }

    /// No negative powers of `z`.
    pub fn is_polynomial(&self) -> bool {
        self.entries().all(|p| p.is_polynomial())
    }

    /// No positive powers of `z`, i.e. polynomial in `w = 1/z`.
    pub fn is_polynomial_in_w(&self) -> bool {
        self.max_exp().is_none_or(|e| e <= 0)
    }

    pub fn is_constant(&self) -> bool {
        self.entries().all(|p| p.min_exp().is_none_or(|e| e == 0) && p.max_exp().is_none_or(|e| e == 0))
    }

    /// Coefficient matrix of `z^e`.
    pub fn coeff_mat(&self, e: i64) -> Mat<T> {
        self.m.map(|p| p.coeff(e))
    }

    pub fn transpose(&self) -> Self {
        LaurentMatrix { m: self.m.transpose() }
    }

    pub fn add(&self, o: &Self) -> Self {
        LaurentMatrix { m: self.m.add(&o.m) }
    }

    pub fn sub(&self, o: &Self) -> Self {
        LaurentMatrix { m: self.m.sub(&o.m) }
    }

    pub fn neg(&self) -> Self {
        LaurentMatrix { m: self.m.neg() }
    }

    pub fn mul(&self, o: &Self) -> Self {
        LaurentMatrix { m: self.m.mul(&o.m) }
    }

    pub fn mul_const(&self, c: &Mat<T>) -> Self {
        self.mul(&Self::constant(c))
    }

    pub fn const_mul(&self, c: &Mat<T>) -> Self {
        Self::constant(c).mul(self)
    }

    pub fn scale(&self, c: &LaurentPoly<T>) -> Self {
        LaurentMatrix { m: self.m.map(|p| p * c) }
    }

    /// Multiplication by `z^k`.
    pub fn shift(&self, k: i64) -> Self {
        LaurentMatrix { m: self.m.map(|p| p.shift(k)) }
    }

    /// Substitution `z ↦ 1/z`.
    pub fn reflect(&self) -> Self {
        LaurentMatrix { m: self.m.map(|p| p.reflect()) }
    }

    pub fn kron(&self, o: &Self) -> Self {
        LaurentMatrix { m: self.m.kron(&o.m) }
    }

    pub fn direct_sum(&self, o: &Self) -> Self {
        LaurentMatrix { m: self.m.direct_sum(&o.m) }
    }

    pub fn hstack(&self, o: &Self) -> Self {
        LaurentMatrix { m: self.m.hstack(&o.m) }
    }

    pub fn vstack(&self, o: &Self) -> Self {
        LaurentMatrix { m: self.m.vstack(&o.m) }
    }

    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Self {
        LaurentMatrix { m: self.m.block(r0, c0, rows, cols) }
    }

    pub fn select_rows(&self, idx: &[usize]) -> Self {
        LaurentMatrix { m: self.m.select_rows(idx) }
    }

    pub fn select_cols(&self, idx: &[usize]) -> Self {
        LaurentMatrix { m: self.m.select_cols(idx) }
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        self.m.swap_rows(a, b);
    }

    pub fn mul_vec(&self, v: &[LaurentPoly<T>]) -> Vec<LaurentPoly<T>> {
        self.m.mul_vec(v)
    }

    pub fn eval(&self, z: &T) -> Mat<T> {
        self.m.map(|p| p.eval(z))
    }

    pub fn eval_c64(&self, z: Complex<f64>) -> Mat<Complex<f64>> {
        self.m.map(|p| p.eval_c64(z))
    }

    /// Determinant by fraction-free (Bareiss) elimination on the matrix
    /// shifted to polynomial entries.
    pub fn det(&self) -> LaurentPoly<T> {
        assert!(self.is_square(), "det of non-square Laurent matrix");
        let n = self.rows();
        if n == 0 {
            return LaurentPoly::constant(T::one());
        }
        let mut total_shift = 0i64;
        let mut a: Vec<Vec<LaurentPoly<T>>> = (0..n)
            .map(|i| {
                let row = self.m.row(i);
                let lo = row.iter().filter_map(|p| p.min_exp()).min().unwrap_or(0);
                total_shift += lo;
                row.iter().map(|p| p.shift(-lo)).collect()
            })
            .collect();
        let mut sign = false;
        let mut prev = LaurentPoly::constant(T::one());
        for k in 0..n - 1 {
            if a[k][k].is_zero() {
                match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                    Some(p) => {
                        a.swap(k, p);
                        sign = !sign;
                    }
                    None => return LaurentPoly::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let num = &(&a[i][j] * &a[k][k]) - &(&a[i][k] * &a[k][j]);
                    let (q, r) = num.div_rem(&prev);
                    debug_assert!(r.is_zero(), "Bareiss division not exact");
                    a[i][j] = q;
                }
            }
            prev = a[k][k].clone();
        }
        let d = a[n - 1][n - 1].shift(total_shift);
        if sign {
            -d
        } else {
            d
        }
    }

    /// Determinant by memoised cofactor expansion along rows; exponential in
    /// the size, kept as an independent check of [`LaurentMatrix::det`].
    pub fn det_cofactor(&self) -> LaurentPoly<T> {
        assert!(self.is_square(), "det of non-square Laurent matrix");
        let n = self.rows();
        assert!(n <= 20, "cofactor expansion limited to n <= 20");
        let mut memo: HashMap<u32, LaurentPoly<T>> = HashMap::new();
        self.cofactor_rec(0, (1u32 << n) - 1, &mut memo)
    }

    fn cofactor_rec(&self, row: usize, cols: u32, memo: &mut HashMap<u32, LaurentPoly<T>>) -> LaurentPoly<T> {
        if cols == 0 {
            return LaurentPoly::constant(T::one());
        }
        if let Some(v) = memo.get(&cols) {
            return v.clone();
        }
        let mut acc = LaurentPoly::zero();
        let mut parity = false;
        for j in 0..self.cols() {
            if cols & (1 << j) == 0 {
                continue;
            }
            let e = &self.m[(row, j)];
            if !e.is_zero() {
                let minor = self.cofactor_rec(row + 1, cols & !(1 << j), memo);
                let t = e * &minor;
                acc = if parity { &acc - &t } else { &acc + &t };
            }
            parity = !parity;
        }
        memo.insert(cols, acc.clone());
        acc
    }

    /// Transpose of the cofactor matrix.
    pub fn adjugate(&self) -> Self {
        assert!(self.is_square(), "adjugate of non-square Laurent matrix");
        let n = self.rows();
        if n == 1 {
            return Self::identity(1);
        }
        Self::from_fn(n, n, |i, j| {
            let rows: Vec<usize> = (0..n).filter(|&r| r != j).collect();
            let cols: Vec<usize> = (0..n).filter(|&c| c != i).collect();
            let minor = self.select_rows(&rows).select_cols(&cols).det();
            if (i + j) % 2 == 1 {
                -minor
            } else {
                minor
            }
        })
    }

    /// `(true, Some(d))` iff `det = c·z^d` with `c ≠ 0`.
    pub fn unit_on_cstar(&self) -> (bool, Option<i64>) {
        if !self.is_square() {
            return (false, None);
        }
        match self.det().as_monomial() {
            Some((_, d)) => (true, Some(d)),
            None => (false, None),
        }
    }

    /// Exact inverse `adj(M) / det(M)`; requires a monomial determinant.
    pub fn inverse(&self) -> Result<Self> {
        let det = self.det();
        let Some((c, d)) = det.as_monomial() else {
            return Err(Error::NotUnitOnCstar { det: format!("{det:?}") });
        };
        let adj = self.adjugate();
        Ok(LaurentMatrix { m: adj.m.map(|p| p.div_monomial(&c, d)) })
    }

    /// Applies `f` to every entry.
    pub fn map<F: Fn(&LaurentPoly<T>) -> LaurentPoly<T>>(&self, f: F) -> Self {
        LaurentMatrix { m: self.m.map(f) }
    }
}

impl<T> Index<(usize, usize)> for LaurentMatrix<T> {
    type Output = LaurentPoly<T>;
    fn index(&self, ij: (usize, usize)) -> &LaurentPoly<T> {
        &self.m[ij]
    }
}

impl<T> IndexMut<(usize, usize)> for LaurentMatrix<T> {
    fn index_mut(&mut self, ij: (usize, usize)) -> &mut LaurentPoly<T> {
        &mut self.m[ij]
    }
}

impl<T: fmt::Debug> fmt::Debug for LaurentMatrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(&self.m, f)
    }
}

impl<T: Serialize> Serialize for LaurentMatrix<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.m.serialize(s)
    }
}

impl<'de, T: Field + Deserialize<'de>> Deserialize<'de> for LaurentMatrix<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        Ok(LaurentMatrix { m: Mat::deserialize(d)? })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::QI;

    type P = LaurentPoly<QI>;
    type M = LaurentMatrix<QI>;

    fn z(e: i64) -> P {
        P::z(e)
    }

    fn c(n: i64) -> P {
        P::constant(QI::int(n))
    }

    #[test]
    fn determinant_examples() {
        let d = M::diag_monomials(&[1, 2]);
        assert_eq!(d.det(), z(3));
        let t = M::from_rows(vec![vec![c(1), z(1)], vec![P::zero(), z(2)]]);
        assert_eq!(t.det(), z(2));
        assert_eq!(t.det_cofactor(), z(2));
    }

    #[test]
    fn unit_checks() {
        let t = M::from_rows(vec![vec![c(1), z(1)], vec![P::zero(), z(2)]]);
        assert_eq!(t.unit_on_cstar(), (true, Some(2)));
        let bad = M::from_rows(vec![vec![c(1), P::zero()], vec![P::zero(), &z(1) + &c(1)]]);
        assert_eq!(bad.unit_on_cstar(), (false, None));
        assert!(matches!(bad.inverse(), Err(Error::NotUnitOnCstar { .. })));
        assert_eq!(M::diag_monomials(&[-1, 3]).unit_on_cstar(), (true, Some(2)));
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(M::diag_monomials(&[1, 1]).inverse().unwrap(), M::diag_monomials(&[-1, -1]));
        let t = M::from_rows(vec![vec![c(1), z(1)], vec![P::zero(), z(2)]]);
        let inv = t.inverse().unwrap();
        let expect = M::from_rows(vec![vec![c(1), -z(-1)], vec![P::zero(), z(-2)]]);
        assert_eq!(inv, expect);
        assert_eq!(t.mul(&inv), M::identity(2));
    }

    #[test]
    fn bareiss_handles_zero_pivot() {
        let t = M::from_rows(vec![
            vec![P::zero(), z(1), c(2)],
            vec![z(-1), c(3), P::zero()],
            vec![c(1), z(2), &z(1) + &c(1)],
        ]);
        assert_eq!(t.det(), t.det_cofactor());
    }
}
