use crate::laurent_linalg::{LaurentMatrix, LaurentPoly, Mat};
use crate::scalar::Field;

use super::{GaugePair, SplitReport, SplittingType};

/// Birkhoff–Grothendieck factorisation of a transition matrix.
///
/// Works by polynomial row operations in the `z` chart until the matrix of
/// leading row coefficients at `z = ∞` is invertible. Then the row degrees
/// are the splitting degrees and `diag(z^{-δ})·M` is a unit polynomial in
/// `w`. Each step strictly lowers the sum of row degrees, which is bounded
/// below by the degree of `det T`.
pub fn split<T: Field>(t: &LaurentMatrix<T>) -> SplitReport<T> {
    let n = t.rows();
    let mut m = t.clone();
    let mut l = LaurentMatrix::<T>::identity(n);

    let deltas = loop {
        let deltas: Vec<i64> = (0..n)
            .map(|i| {
                (0..n)
                    .filter_map(|j| m[(i, j)].max_exp())
                    .max()
                    .expect("unit transition has no zero row")
            })
            .collect();
        let lead = Mat::from_fn(n, n, |i, j| m[(i, j)].coeff(deltas[i]));
        let Some(alpha) = lead.left_nullspace().into_iter().next() else {
            break deltas;
        };
        let i0 = (0..n)
            .filter(|&i| !alpha[i].is_zero())
            .max_by(|&a, &b| deltas[a].cmp(&deltas[b]).then(b.cmp(&a)))
            .expect("null vector is nonzero");
        let mut op: Vec<LaurentPoly<T>> = Vec::with_capacity(n);
        for i in 0..n {
            op.push(LaurentPoly::monomial(alpha[i].clone(), deltas[i0] - deltas[i]));
        }
        m = replace_row(&m, i0, &op);
        l = replace_row(&l, i0, &op);
    };

    let inv_z = LaurentMatrix::from_fn(n, n, |i, j| {
        if i == j { LaurentPoly::z(-deltas[i]) } else { LaurentPoly::zero() }
    });
    // N(1/z) = diag(z^{-δ})·M is a unit polynomial in w, and L·T·N⁻¹ = diag(z^δ).
    let n_w = inv_z.mul(&m);
    let n_inv = n_w.inverse().expect("leading coefficients invertible");

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| deltas[b].cmp(&deltas[a]).then(a.cmp(&b)));
    let degrees: Vec<i64> = order.iter().map(|&i| deltas[i]).collect();
    let a0 = l.select_rows(&order);
    let a_inf = n_inv.select_cols(&order).reflect();
    SplitReport { splitting: SplittingType { degrees }, gauge: GaugePair { a0, a_inf } }
}

/// `row_{i0} ← Σᵢ op[i]·row_i`, all other rows unchanged.
fn replace_row<T: Field>(m: &LaurentMatrix<T>, i0: usize, op: &[LaurentPoly<T>]) -> LaurentMatrix<T> {
    let mut out = m.clone();
    for j in 0..m.cols() {
        let mut acc = LaurentPoly::zero();
        for (i, c) in op.iter().enumerate() {
            if !c.is_zero() && !m[(i, j)].is_zero() {
                acc = &acc + &(c * &m[(i, j)]);
            }
        }
        out[(i0, j)] = acc;
    }
    out
}
