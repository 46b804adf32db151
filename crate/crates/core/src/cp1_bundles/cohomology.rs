use serde::Serialize;

use crate::error::{Error, Result};
use crate::laurent_linalg::{LaurentMatrix, LaurentPoly, Mat};
use crate::scalar::Field;

use super::{Bundle, Point};

/// Global section: `s₀` polynomial in `z`, `s_∞` polynomial in `w`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Section<T> {
    pub s0: Vec<LaurentPoly<T>>,
    pub s_inf: Vec<LaurentPoly<T>>,
}

impl<T: Field> Section<T> {
    pub fn eval(&self, p: &Point<T>) -> Vec<T> {
        match p {
            Point::Finite(z) => self.s0.iter().map(|q| q.eval(z)).collect(),
            Point::Infinity => self.s_inf.iter().map(|q| q.coeff(0)).collect(),
        }
    }

    /// `s₀(z) = T(z)·s_∞(1/z)` exactly, with both halves polynomial.
    pub fn is_section_of(&self, b: &Bundle<T>) -> bool {
        let back: Vec<LaurentPoly<T>> = self.s_inf.iter().map(|q| q.reflect()).collect();
        self.s0.iter().all(|q| q.is_polynomial())
            && self.s_inf.iter().all(|q| q.is_polynomial())
            && b.transition().mul_vec(&back) == self.s0
    }

    pub fn scale(&self, c: &T) -> Self {
        Section {
            s0: self.s0.iter().map(|p| p.scale(c)).collect(),
            s_inf: self.s_inf.iter().map(|p| p.scale(c)).collect(),
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        Section {
            s0: self.s0.iter().zip(&o.s0).map(|(a, b)| a + b).collect(),
            s_inf: self.s_inf.iter().zip(&o.s_inf).map(|(a, b)| a + b).collect(),
        }
    }
}

/// Basis of `H⁰` together with the data to take coordinates in it.
#[derive(Clone, Debug)]
pub struct H0Space<T> {
    pub sections: Vec<Section<T>>,
    /// Largest power of `z` appearing in any `s₀`.
    pub max_deg: usize,
    rank: usize,
}

impl<T: Field> H0Space<T> {
    /// Wraps linearly independent sections of a rank-`rank` bundle.
    pub fn from_sections(sections: Vec<Section<T>>, rank: usize) -> Self {
        let max_deg = sections
            .iter()
            .flat_map(|s| s.s0.iter().filter_map(|p| p.max_exp()))
            .max()
            .unwrap_or(0)
            .max(0) as usize;
        H0Space { sections, max_deg, rank }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn dim(&self) -> usize {
        self.sections.len()
    }

    fn coeff_row(&self, s0: &[LaurentPoly<T>]) -> Option<Vec<T>> {
        let w = self.max_deg + 1;
        let mut row = vec![T::zero(); self.rank * w];
        for (i, p) in s0.iter().enumerate() {
            for (e, c) in p.terms() {
                if e < 0 || e as usize >= w {
                    return None;
                }
                row[i * w + e as usize] = c.clone();
            }
        }
        Some(row)
    }

    /// Coordinates of a chart-0 section in this basis, `None` if it is not
    /// in the span.
    pub fn coords(&self, s0: &[LaurentPoly<T>]) -> Option<Vec<T>> {
        if self.sections.is_empty() {
            return s0.iter().all(|p| p.is_zero()).then(Vec::new);
        }
        let target = self.coeff_row(s0)?;
        let basis: Vec<Vec<T>> = self.sections.iter().map(|s| self.coeff_row(&s.s0).unwrap()).collect();
        let a = Mat::from_columns(&basis, target.len());
        a.solve_vec(&target)
    }

    /// Chart-0 section with the given coordinates.
    pub fn combine(&self, coords: &[T]) -> Section<T> {
        assert_eq!(coords.len(), self.dim(), "coordinate length");
        let n = self.rank;
        let mut acc = Section { s0: vec![LaurentPoly::zero(); n], s_inf: vec![LaurentPoly::zero(); n] };
        for (c, s) in coords.iter().zip(&self.sections) {
            if !c.is_zero() {
                acc = acc.add(&s.scale(c));
            }
        }
        acc
    }

    /// Matrix whose column `j` holds the coefficients of `s₀` of section `j`,
    /// rows ordered by (component, power).
    pub fn coeff_matrix(&self) -> Mat<T> {
        let rows = self.rank * (self.max_deg + 1);
        let cols: Vec<Vec<T>> = self.sections.iter().map(|s| self.coeff_row(&s.s0).unwrap()).collect();
        Mat::from_columns(&cols, rows)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CohomologyDims {
    pub h0: usize,
    pub h1: usize,
}

/// Null space of the conditions "negative powers of `T(z)·s_∞(1/z)` vanish"
/// for `s_∞` of degree at most `bound`. Returns `s_∞` coefficient vectors.
fn solve_sections<T: Field>(t: &LaurentMatrix<T>, bound: i64) -> Vec<Vec<T>> {
    let n = t.rows();
    let unknowns = n * (bound as usize + 1);
    let tmin = t.min_exp().unwrap_or(0);
    let lo = tmin - bound;
    if lo > -1 {
        return Mat::<T>::identity(unknowns).columns();
    }
    let eqs = (-1 - lo + 1) as usize * n;
    let mut a = Mat::zeros(eqs, unknowns);
    for (r, e) in (lo..=-1).enumerate() {
        for i in 0..n {
            for k in 0..=bound {
                for j in 0..n {
                    let c = t[(i, j)].coeff(e + k);
                    if !c.is_zero() {
                        a[(r * n + i, k as usize * n + j)] = c;
                    }
                }
            }
        }
    }
    a.nullspace()
}

impl<T: Field> Bundle<T> {
    /// Degree bound on `s_∞` implied by `s_∞(1/z) = T⁻¹(z)·s₀(z)` with `s₀`
    /// polynomial.
    pub fn h0_degree_bound(&self) -> i64 {
        let tinv = self.transition().inverse().expect("transition is a unit");
        (-tinv.min_exp().unwrap_or(0)).max(0)
    }

    /// Basis of global sections by a direct linear solve, independent of the
    /// splitting. The basis is in echelon form on the `s₀` coefficients, so
    /// for `O(k)` it is `1, z, …, z^k`.
    pub fn h0_basis(&self) -> H0Space<T> {
        let n = self.rank();
        let t = self.transition();
        let bound = self.h0_degree_bound();
        let raw = solve_sections(t, bound);
        assert_eq!(raw.len(), solve_sections(t, bound + 1).len(), "h0 degree bound not stable");

        let to_section = |c: &[T], deg: i64| -> Section<T> {
            let s_inf: Vec<LaurentPoly<T>> = (0..n)
                .map(|j| LaurentPoly::from_terms((0..=deg).map(|k| (k, c[k as usize * n + j].clone()))))
                .collect();
            let back: Vec<LaurentPoly<T>> = s_inf.iter().map(|q| q.reflect()).collect();
            Section { s0: t.mul_vec(&back), s_inf }
        };
        let sections: Vec<Section<T>> = raw.iter().map(|c| to_section(c, bound)).collect();
        let max_deg = sections
            .iter()
            .flat_map(|s| s.s0.iter().filter_map(|p| p.max_exp()))
            .max()
            .unwrap_or(0)
            .max(0) as usize;

        // Echelon form on [s₀ coefficients | s_∞ coefficients]; s₀ determines
        // the section so every pivot lands in the first block.
        let w0 = max_deg + 1;
        let w1 = bound as usize + 1;
        let width = n * (w0 + w1);
        let mut m = Mat::zeros(sections.len(), width);
        for (r, s) in sections.iter().enumerate() {
            for i in 0..n {
                for (e, c) in s.s0[i].terms() {
                    assert!(e >= 0, "h0 solve produced a non-polynomial s0");
                    m[(r, i * w0 + e as usize)] = c.clone();
                }
                for (e, c) in s.s_inf[i].terms() {
                    m[(r, n * w0 + i * w1 + e as usize)] = c.clone();
                }
            }
        }
        let (red, pivots) = m.rref();
        assert!(pivots.iter().all(|&p| p < n * w0), "section not determined by its chart-0 part");
        let sections = (0..pivots.len())
            .map(|r| Section {
                s0: (0..n)
                    .map(|i| LaurentPoly::from_terms((0..w0).map(|e| (e as i64, red[(r, i * w0 + e)].clone()))))
                    .collect(),
                s_inf: (0..n)
                    .map(|i| {
                        LaurentPoly::from_terms((0..w1).map(|e| (e as i64, red[(r, n * w0 + i * w1 + e)].clone())))
                    })
                    .collect(),
            })
            .collect();
        H0Space { sections, max_deg, rank: n }
    }

    /// `h⁰` by direct solve.
    pub fn h0_dim_direct(&self) -> usize {
        let bound = self.h0_degree_bound();
        solve_sections(self.transition(), bound).len()
    }

    /// `h¹(B) = h⁰(B* ⊗ O(-2))` by direct solve.
    pub fn h1_dim_direct(&self) -> usize {
        self.dual().twist(-2).h0_dim_direct()
    }

    /// Both dimensions, computed from the splitting and by direct solves,
    /// and checked against each other and against Riemann–Roch.
    pub fn cohomology(&self) -> Result<CohomologyDims> {
        let st = self.splitting_type();
        let (f0, f1) = (st.h0(), st.h1());
        let (d0, d1) = (self.h0_dim_direct(), self.h1_dim_direct());
        if (f0, f1) != (d0, d1) {
            return Err(Error::Invariant(format!(
                "cohomology mismatch: splitting gives ({f0}, {f1}), direct solve gives ({d0}, {d1})"
            )));
        }
        let rr = self.degree() + self.rank() as i64;
        if f0 as i64 - f1 as i64 != rr {
            return Err(Error::Invariant(format!("Riemann-Roch fails: h0 - h1 = {} but deg + rank = {rr}", f0 as i64 - f1 as i64)));
        }
        Ok(CohomologyDims { h0: f0, h1: f1 })
    }

    pub fn h0_dim(&self) -> Result<usize> {
        self.cohomology().map(|c| c.h0)
    }

    pub fn h1_dim(&self) -> Result<usize> {
        self.cohomology().map(|c| c.h1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::QI;

    type B = Bundle<QI>;
    type P = LaurentPoly<QI>;

    #[test]
    fn line_bundle_sections() {
        let b = B::line(2);
        let h = b.h0_basis();
        assert_eq!(h.dim(), 3);
        for (k, s) in h.sections.iter().enumerate() {
            assert_eq!(s.s0, vec![P::z(k as i64)]);
            assert!(s.is_section_of(&b));
        }
        assert_eq!(B::line(-1).cohomology().unwrap(), CohomologyDims { h0: 0, h1: 0 });
        assert_eq!(B::line(-4).cohomology().unwrap(), CohomologyDims { h0: 0, h1: 3 });
    }

    #[test]
    fn fibre_evaluation() {
        let b = B::line(2);
        let h = b.h0_basis();
        let s = h.combine(&[QI::int(1), QI::int(0), QI::int(1)]);
        assert_eq!(b.fibre_eval(&s, &Point::Finite(QI::int(1))), vec![QI::int(2)]);
        let top = &h.sections[2];
        assert_eq!(b.fibre_eval(top, &Point::Infinity), vec![QI::int(1)]);
    }

    #[test]
    fn non_split_transition() {
        let t = LaurentMatrix::from_rows(vec![
            vec![P::constant(QI::int(1)), P::z(1)],
            vec![P::zero(), P::z(2)],
        ]);
        let b = B::new(t).unwrap();
        assert_eq!(b.cohomology().unwrap(), CohomologyDims { h0: 4, h1: 0 });
        let h = b.h0_basis();
        assert!(h.sections.iter().all(|s| s.is_section_of(&b)));
    }

    #[test]
    fn coordinates_roundtrip() {
        let b = B::from_degrees(&[1, 3]);
        let h = b.h0_basis();
        let c: Vec<QI> = (0..h.dim()).map(|i| QI::int(i as i64 - 2)).collect();
        let s = h.combine(&c);
        assert_eq!(h.coords(&s.s0).unwrap(), c);
    }
}
