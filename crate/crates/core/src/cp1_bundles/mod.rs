//! Holomorphic vector bundles on `CP¹` given by a transition matrix on the
//! two-chart cover `{z ≠ ∞}`, `{w = 1/z ≠ ∞}`.
//!
//! A section is a pair `(s₀(z), s_∞(w))` of polynomial vectors with
//! `s₀(z) = T(z)·s_∞(1/z)` on `C*`, so `T = z^k` is `O(k)`.

mod birkhoff;
mod cohomology;

use std::sync::OnceLock;

use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::laurent_linalg::{LaurentMatrix, LaurentPoly};
use crate::scalar::{Field, QI};

pub use birkhoff::split;
pub use cohomology::{CohomologyDims, H0Space, Section};

/// Point of `CP¹`: a finite `z` or the point `w = 0`.
#[derive(Clone, Debug, PartialEq)]
pub enum Point<T> {
    Finite(T),
    Infinity,
}

/// Weakly decreasing list of line-bundle degrees.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SplittingType {
    pub degrees: Vec<i64>,
}

impl SplittingType {
    pub fn new(mut degrees: Vec<i64>) -> Self {
        degrees.sort_unstable_by(|a, b| b.cmp(a));
        SplittingType { degrees }
    }

    pub fn rank(&self) -> usize {
        self.degrees.len()
    }

    pub fn degree(&self) -> i64 {
        self.degrees.iter().sum()
    }

    pub fn is_nonnegative(&self) -> bool {
        self.degrees.iter().all(|&a| a >= 0)
    }

    pub fn is_positive(&self) -> bool {
        self.degrees.iter().all(|&a| a >= 1)
    }

    pub fn is_trivial(&self) -> bool {
        self.degrees.iter().all(|&a| a == 0)
    }

    pub fn is_all_ones(&self) -> bool {
        self.degrees.iter().all(|&a| a == 1)
    }

    pub fn h0(&self) -> usize {
        self.degrees.iter().map(|&a| (a + 1).max(0) as usize).sum()
    }

    pub fn h1(&self) -> usize {
        self.degrees.iter().map(|&a| (-a - 1).max(0) as usize).sum()
    }
}

/// `A₀(z)` polynomial in `z` and `A_∞(w)` polynomial in `w`, both with
/// constant nonzero determinant. Acts by `T ↦ A₀(z)·T(z)·A_∞(1/z)`.
#[derive(Clone, Debug, PartialEq)]
pub struct GaugePair<T> {
    pub a0: LaurentMatrix<T>,
    pub a_inf: LaurentMatrix<T>,
}

impl<T: Field> GaugePair<T> {
    pub fn identity(n: usize) -> Self {
        GaugePair { a0: LaurentMatrix::identity(n), a_inf: LaurentMatrix::identity(n) }
    }

    pub fn apply(&self, t: &LaurentMatrix<T>) -> LaurentMatrix<T> {
        self.a0.mul(t).mul(&self.a_inf.reflect())
    }

    /// Both factors polynomial in their own chart with constant nonzero det.
    pub fn is_valid(&self) -> bool {
        let const_det = |m: &LaurentMatrix<T>| {
            m.is_polynomial() && matches!(m.det().as_monomial(), Some((_, 0)))
        };
        const_det(&self.a0) && const_det(&self.a_inf)
    }

    pub fn inverse(&self) -> Result<Self> {
        Ok(GaugePair { a0: self.a0.inverse()?, a_inf: self.a_inf.inverse()? })
    }
}

impl GaugePair<QI> {
    /// Random gauge built from unitriangular factors with entries of degree
    /// at most `max_deg`, a permutation, and a constant diagonal.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, n: usize, max_deg: i64) -> Self {
        GaugePair { a0: random_poly_unit(rng, n, max_deg), a_inf: random_poly_unit(rng, n, max_deg) }
    }
}

fn random_poly_unit<R: Rng + ?Sized>(rng: &mut R, n: usize, max_deg: i64) -> LaurentMatrix<QI> {
    let upper = LaurentMatrix::from_fn(n, n, |i, j| match i.cmp(&j) {
        std::cmp::Ordering::Equal => LaurentPoly::constant(QI::int(1)),
        std::cmp::Ordering::Less => LaurentPoly::random(rng, 0, max_deg, 2, 0.6),
        _ => LaurentPoly::zero(),
    });
    let lower = LaurentMatrix::from_fn(n, n, |i, j| match i.cmp(&j) {
        std::cmp::Ordering::Equal => LaurentPoly::constant(QI::random_nonzero(rng, 2, false)),
        std::cmp::Ordering::Greater => LaurentPoly::random(rng, 0, max_deg, 2, 0.6),
        _ => LaurentPoly::zero(),
    });
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        perm.swap(i, rng.gen_range(0..=i));
    }
    upper.mul(&lower).select_rows(&perm)
}

/// Result of splitting: sorted degrees and a certificate with
/// `A₀·T·A_∞(1/z) = diag(z^{a₁}, …, z^{aₙ})`.
#[derive(Clone, Debug, PartialEq)]
pub struct SplitReport<T> {
    pub splitting: SplittingType,
    pub gauge: GaugePair<T>,
}

impl<T: Field> SplitReport<T> {
    /// Exact check of the certificate against `t`.
    pub fn verify(&self, t: &LaurentMatrix<T>) -> bool {
        self.gauge.is_valid()
            && self.gauge.apply(t) == LaurentMatrix::diag_monomials(&self.splitting.degrees)
    }
}

impl<T: Field + Serialize> Serialize for SplitReport<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Gauge<'a, T: Field> {
            #[serde(rename = "A0")]
            a0: &'a LaurentMatrix<T>,
            #[serde(rename = "Ainf")]
            a_inf: &'a LaurentMatrix<T>,
        }
        #[derive(Serialize)]
        struct Repr<'a, T: Field> {
            degrees: &'a [i64],
            gauge: Gauge<'a, T>,
        }
        Repr {
            degrees: &self.splitting.degrees,
            gauge: Gauge { a0: &self.gauge.a0, a_inf: &self.gauge.a_inf },
        }
        .serialize(s)
    }
}

/// Holomorphic vector bundle on `CP¹` by its transition matrix.
pub struct Bundle<T> {
    transition: LaurentMatrix<T>,
    det_degree: i64,
    split_cache: OnceLock<SplitReport<T>>,
}

impl<T: Field> Clone for Bundle<T> {
    fn clone(&self) -> Self {
        let split_cache = OnceLock::new();
        if let Some(r) = self.split_cache.get() {
            let _ = split_cache.set(r.clone());
        }
        Bundle { transition: self.transition.clone(), det_degree: self.det_degree, split_cache }
    }
}

impl<T: Field> PartialEq for Bundle<T> {
    fn eq(&self, o: &Self) -> bool {
        self.transition == o.transition
    }
}

impl<T: Field> std::fmt::Debug for Bundle<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Bundle").field("rank", &self.rank()).field("transition", &self.transition).finish()
    }
}

impl<T: Field> Bundle<T> {
    /// Rejects transitions that are not units on `C*`.
    pub fn new(transition: LaurentMatrix<T>) -> Result<Self> {
        if !transition.is_square() || transition.rows() == 0 {
            return Err(Error::Dimension(format!("transition must be square and nonempty, got {:?}", transition.shape())));
        }
        let (ok, d) = transition.unit_on_cstar();
        if !ok {
            return Err(Error::NotUnitOnCstar { det: format!("{:?}", transition.det()) });
        }
        Ok(Bundle { transition, det_degree: d.unwrap(), split_cache: OnceLock::new() })
    }

    fn trusted(transition: LaurentMatrix<T>, det_degree: i64) -> Self {
        Bundle { transition, det_degree, split_cache: OnceLock::new() }
    }

    pub fn line(k: i64) -> Self {
        Self::trusted(LaurentMatrix::diag_monomials(&[k]), k)
    }

    pub fn trivial(n: usize) -> Self {
        Self::trusted(LaurentMatrix::identity(n), 0)
    }

    /// `⊕ O(aᵢ)` in split form.
    pub fn from_degrees(degrees: &[i64]) -> Self {
        Self::trusted(LaurentMatrix::diag_monomials(degrees), degrees.iter().sum())
    }

    pub fn rank(&self) -> usize {
        self.transition.rows()
    }

    pub fn transition(&self) -> &LaurentMatrix<T> {
        &self.transition
    }

    /// Degree of `det T`, i.e. the first Chern number.
    pub fn degree(&self) -> i64 {
        self.det_degree
    }

    pub fn direct_sum(&self, o: &Self) -> Self {
        Self::trusted(self.transition.direct_sum(&o.transition), self.det_degree + o.det_degree)
    }

    pub fn tensor(&self, o: &Self) -> Self {
        let d = self.det_degree * o.rank() as i64 + o.det_degree * self.rank() as i64;
        Self::trusted(self.transition.kron(&o.transition), d)
    }

    /// Transition `(T⁻¹)ᵀ`.
    pub fn dual(&self) -> Self {
        let inv = self.transition.inverse().expect("transition is a unit on C*");
        Self::trusted(inv.transpose(), -self.det_degree)
    }

    /// `B ⊗ O(m)`, transition `z^m·T`.
    pub fn twist(&self, m: i64) -> Self {
        Self::trusted(self.transition.shift(m), self.det_degree + m * self.rank() as i64)
    }

    /// Bundle with transition `A₀·T·A_∞(1/z)`; isomorphic to `self`.
    pub fn gauge(&self, g: &GaugePair<T>) -> Result<Self> {
        if !g.is_valid() {
            return Err(Error::Invariant("gauge pair factors need constant nonzero determinant".into()));
        }
        Ok(Self::trusted(g.apply(&self.transition), self.det_degree))
    }

    /// Splitting type and certificate, computed once.
    pub fn split_report(&self) -> &SplitReport<T> {
        self.split_cache.get_or_init(|| split(&self.transition))
    }

    pub fn splitting_type(&self) -> &SplittingType {
        &self.split_report().splitting
    }

    /// Coordinates of `s` at `p`: `s₀(z)` for finite `z`, `s_∞(0)` at infinity.
    pub fn fibre_eval(&self, s: &Section<T>, p: &Point<T>) -> Vec<T> {
        s.eval(p)
    }
}

impl Bundle<QI> {
    /// `⊕ O(aᵢ)` conjugated by a random gauge pair.
    pub fn random_with_degrees<R: Rng + ?Sized>(rng: &mut R, degrees: &[i64], max_deg: i64) -> Self {
        let g = GaugePair::random(rng, degrees.len(), max_deg);
        Bundle::from_degrees(degrees).gauge(&g).expect("random gauge is valid")
    }
}

impl<T: Field + Serialize> Serialize for Bundle<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<'a, T: Field> {
            rank: usize,
            transition: &'a LaurentMatrix<T>,
        }
        Repr { rank: self.rank(), transition: &self.transition }.serialize(s)
    }
}

impl<'de, T: Field + Deserialize<'de>> Deserialize<'de> for Bundle<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(bound = "T: Field + Deserialize<'de>")]
        struct Repr<T: Field> {
            rank: usize,
            transition: LaurentMatrix<T>,
        }
        let r = Repr::<T>::deserialize(d)?;
        if r.transition.shape() != (r.rank, r.rank) {
            return Err(serde::de::Error::custom(format!(
                "rank {} does not match transition shape {:?}",
                r.rank,
                r.transition.shape()
            )));
        }
        Bundle::new(r.transition).map_err(serde::de::Error::custom)
    }
}
