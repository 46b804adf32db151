use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex;
use num_traits::{One, Zero};
use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::scalar::{Field, Ring, QI};

/// Finite Laurent polynomial `Σ c_e z^e`. Zero coefficients are never stored,
/// so structural equality is mathematical equality.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct LaurentPoly<T> {
    terms: BTreeMap<i64, T>,
}

impl<T: Ring> LaurentPoly<T> {
    pub fn zero() -> Self {
        LaurentPoly { terms: BTreeMap::new() }
    }

    pub fn constant(c: T) -> Self {
        Self::monomial(c, 0)
    }

    pub fn monomial(c: T, exp: i64) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(exp, c);
        }
        LaurentPoly { terms }
    }

    /// `z^exp` with unit coefficient.
    pub fn z(exp: i64) -> Self {
        Self::monomial(T::one(), exp)
    }

    /// Builds from `(exponent, coefficient)` pairs, summing repeats.
    pub fn from_terms<I: IntoIterator<Item = (i64, T)>>(it: I) -> Self {
        let mut p = Self::zero();
        for (e, c) in it {
            p.add_term(e, c);
        }
        p
    }

    /// Dense coefficients starting at `z^0`.
    pub fn from_coeffs(coeffs: Vec<T>) -> Self {
        Self::from_terms(coeffs.into_iter().enumerate().map(|(i, c)| (i as i64, c)))
    }

    pub fn add_term(&mut self, exp: i64, c: T) {
        if c.is_zero() {
            return;
        }
        match self.terms.remove(&exp) {
            Some(old) => {
                let s = old + c;
                if !s.is_zero() {
                    self.terms.insert(exp, s);
                }
            }
            None => {
                self.terms.insert(exp, c);
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (i64, &T)> + '_ {
        self.terms.iter().map(|(e, c)| (*e, c))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, exp: i64) -> T {
        self.terms.get(&exp).cloned().unwrap_or_else(T::zero)
    }

    pub fn min_exp(&self) -> Option<i64> {
        self.terms.keys().next().copied()
    }

    pub fn max_exp(&self) -> Option<i64> {
        self.terms.keys().next_back().copied()
    }

    pub fn leading(&self) -> Option<(i64, &T)> {
        self.terms.iter().next_back().map(|(e, c)| (*e, c))
    }

    /// `Some((c, d))` when the polynomial is exactly `c·z^d`, `c ≠ 0`.
    pub fn as_monomial(&self) -> Option<(T, i64)> {
        if self.terms.len() == 1 {
            let (e, c) = self.terms.iter().next().unwrap();
            Some((c.clone(), *e))
        } else {
            None
        }
    }

    pub fn is_polynomial(&self) -> bool {
        self.min_exp().is_none_or(|e| e >= 0)
    }

    /// Multiplication by `z^k`.
    pub fn shift(&self, k: i64) -> Self {
        LaurentPoly {
            terms: self.terms.iter().map(|(e, c)| (e + k, c.clone())).collect(),
        }
    }

    /// Substitution `z ↦ 1/z`, the change of chart variable.
    pub fn reflect(&self) -> Self {
        LaurentPoly {
            terms: self.terms.iter().map(|(e, c)| (-e, c.clone())).collect(),
        }
    }

    pub fn scale(&self, c: &T) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self::from_terms(self.terms.iter().map(|(e, v)| (*e, v.clone() * c.clone())))
    }

    /// Terms with exponent in `lo..=hi`.
    pub fn truncate(&self, lo: i64, hi: i64) -> Self {
        if lo > hi {
            return LaurentPoly { terms: BTreeMap::new() };
        }
        LaurentPoly {
            terms: self.terms.range(lo..=hi).map(|(e, c)| (*e, c.clone())).collect(),
        }
    }

    pub fn map<U: Ring, F: Fn(&T) -> U>(&self, f: F) -> LaurentPoly<U> {
        LaurentPoly::from_terms(self.terms.iter().map(|(e, c)| (*e, f(c))))
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::constant(T::one());
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    /// Formal derivative in `z`.
    pub fn derivative(&self) -> Self {
        Self::from_terms(
            self.terms
                .iter()
                .map(|(e, c)| (e - 1, c.clone() * T::from_i64(*e))),
        )
    }
}

impl<T: Field> LaurentPoly<T> {
    /// Exact evaluation; `z` must be nonzero unless the polynomial has no
    /// negative exponents.
    pub fn eval(&self, z: &T) -> T {
        let mut acc = T::zero();
        for (e, c) in &self.terms {
            let zp = if *e >= 0 {
                pow_field(z, *e as u64)
            } else {
                assert!(!z.is_zero(), "evaluating a negative power at z = 0");
                pow_field(&z.inv(), (-*e) as u64)
            };
            acc = acc + c.clone() * zp;
        }
        acc
    }

    pub fn eval_c64(&self, z: Complex<f64>) -> Complex<f64> {
        self.terms
            .iter()
            .map(|(e, c)| c.to_c64() * z.powi(*e as i32))
            .sum()
    }

    /// Euclidean division for ordinary polynomials (no negative exponents).
    /// Returns `(q, r)` with `self = q·d + r` and `deg r < deg d`.
    pub fn div_rem(&self, d: &Self) -> (Self, Self) {
        assert!(self.is_polynomial() && d.is_polynomial(), "div_rem needs polynomials");
        let (dd, dc) = d.leading().map(|(e, c)| (e, c.clone())).expect("division by zero polynomial");
        let mut q = Self::zero();
        let mut r = self.clone();
        while let Some((re, rc)) = r.leading().map(|(e, c)| (e, c.clone())) {
            if re < dd {
                break;
            }
            let t = Self::monomial(rc / dc.clone(), re - dd);
            r = &r - &(&t * d);
            q = &q + &t;
        }
        (q, r)
    }

    /// Exact division by a monomial `c·z^d`.
    pub fn div_monomial(&self, c: &T, d: i64) -> Self {
        let inv = c.inv();
        Self::from_terms(self.terms.iter().map(|(e, v)| (e - d, v.clone() * inv.clone())))
    }
}

fn pow_field<T: Field>(z: &T, mut e: u64) -> T {
    let mut base = z.clone();
    let mut acc = T::one();
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base.clone();
        }
        base = base.clone() * base;
        e >>= 1;
    }
    acc
}

impl LaurentPoly<QI> {
    /// Random Laurent polynomial with exponents in `lo..=hi`, each term
    /// present with probability `density`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, lo: i64, hi: i64, bound: i64, density: f64) -> Self {
        let mut p = Self::zero();
        for e in lo..=hi {
            if rng.gen_bool(density) {
                p.add_term(e, QI::random(rng, bound, false));
            }
        }
        p
    }
}

impl<'a, T: Ring> Add<&'a LaurentPoly<T>> for &'a LaurentPoly<T> {
    type Output = LaurentPoly<T>;
    fn add(self, rhs: &LaurentPoly<T>) -> LaurentPoly<T> {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(*e, c.clone());
        }
        out
    }
}

impl<'a, T: Ring> Sub<&'a LaurentPoly<T>> for &'a LaurentPoly<T> {
    type Output = LaurentPoly<T>;
    fn sub(self, rhs: &LaurentPoly<T>) -> LaurentPoly<T> {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(*e, -c.clone());
        }
        out
    }
}

impl<'a, T: Ring> Mul<&'a LaurentPoly<T>> for &'a LaurentPoly<T> {
    type Output = LaurentPoly<T>;
    fn mul(self, rhs: &LaurentPoly<T>) -> LaurentPoly<T> {
        let mut out = LaurentPoly::zero();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &rhs.terms {
                out.add_term(e1 + e2, c1.clone() * c2.clone());
            }
        }
        out
    }
}

impl<T: Ring> Neg for &LaurentPoly<T> {
    type Output = LaurentPoly<T>;
    fn neg(self) -> LaurentPoly<T> {
        LaurentPoly {
            terms: self.terms.iter().map(|(e, c)| (*e, -c.clone())).collect(),
        }
    }
}

impl<T: Ring> Add for LaurentPoly<T> {
    type Output = LaurentPoly<T>;
    fn add(self, rhs: Self) -> Self {
        &self + &rhs
    }
}

impl<T: Ring> Sub for LaurentPoly<T> {
    type Output = LaurentPoly<T>;
    fn sub(self, rhs: Self) -> Self {
        &self - &rhs
    }
}

impl<T: Ring> Mul for LaurentPoly<T> {
    type Output = LaurentPoly<T>;
    fn mul(self, rhs: Self) -> Self {
        &self * &rhs
    }
}

impl<T: Ring> Neg for LaurentPoly<T> {
    type Output = LaurentPoly<T>;
    fn neg(self) -> Self {
        -&self
    }
}

impl<T: Ring> Zero for LaurentPoly<T> {
    fn zero() -> Self {
        LaurentPoly::zero()
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

impl<T: Ring> One for LaurentPoly<T> {
    fn one() -> Self {
        LaurentPoly::constant(T::one())
    }
}

impl<T: Ring> Ring for LaurentPoly<T> {
    fn from_i64(n: i64) -> Self {
        LaurentPoly::constant(T::from_i64(n))
    }
}

impl<T: fmt::Debug> fmt::Debug for LaurentPoly<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match e {
                0 => write!(f, "({c:?})")?,
                1 => write!(f, "({c:?})z")?,
                _ => write!(f, "({c:?})z^{e}")?,
            }
        }
        Ok(())
    }
}

impl<T: fmt::Debug> fmt::Display for LaurentPoly<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Serialize, Deserialize)]
struct TermRepr<T> {
    pow: i64,
    coef: T,
}

impl<T: Serialize> Serialize for LaurentPoly<T> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let v: Vec<TermRepr<&T>> = self.terms.iter().map(|(e, c)| TermRepr { pow: *e, coef: c }).collect();
        v.serialize(s)
    }
}

impl<'de, T: Ring + Deserialize<'de>> Deserialize<'de> for LaurentPoly<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v: Vec<TermRepr<T>> = Vec::deserialize(d)?;
        Ok(LaurentPoly::from_terms(v.into_iter().map(|t| (t.pow, t.coef))))
    }
}
