use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::scalar::{Field, Ring};

/// Sparse polynomial in a fixed number of variables, keyed by exponent
/// vectors. Zero coefficients are never stored.
#[derive(Clone, PartialEq)]
pub struct MultiPoly<T> {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, T>,
}

impl<T: Ring> MultiPoly<T> {
    pub fn zero(nvars: usize) -> Self {
        MultiPoly { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: T) -> Self {
        Self::monomial(vec![0; nvars], c)
    }

    pub fn monomial(exps: Vec<u32>, c: T) -> Self {
        let mut p = Self::zero(exps.len());
        p.add_term(exps, c);
        p
    }

    /// The coordinate function `xᵢ`.
    pub fn var(nvars: usize, i: usize) -> Self {
        assert!(i < nvars, "variable {i} out of range for {nvars} variables");
        let mut e = vec![0; nvars];
        e[i] = 1;
        Self::monomial(e, T::one())
    }

    /// `Σ cᵢ xᵢ`.
    pub fn linear(coeffs: &[T]) -> Self {
        let n = coeffs.len();
        let mut p = Self::zero(n);
        for (i, c) in coeffs.iter().enumerate() {
            let mut e = vec![0; n];
            e[i] = 1;
            p.add_term(e, c.clone());
        }
        p
    }

    pub fn from_terms<I: IntoIterator<Item = (Vec<u32>, T)>>(nvars: usize, it: I) -> Self {
        let mut p = Self::zero(nvars);
        for (e, c) in it {
            p.add_term(e, c);
        }
        p
    }

    pub fn add_term(&mut self, exps: Vec<u32>, c: T) {
        assert_eq!(exps.len(), self.nvars, "exponent vector length");
        if c.is_zero() {
            return;
        }
        match self.terms.remove(&exps) {
            Some(old) => {
                let s = old + c;
                if !s.is_zero() {
                    self.terms.insert(exps, s);
                }
            }
            None => {
                self.terms.insert(exps, c);
            }
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &T)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, exps: &[u32]) -> T {
        self.terms.get(exps).cloned().unwrap_or_else(T::zero)
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    /// Homogeneous component of degree `d`.
    pub fn homogeneous_part(&self, d: u32) -> Self {
        Self::from_terms(
            self.nvars,
            self.terms.iter().filter(|(e, _)| e.iter().sum::<u32>() == d).map(|(e, c)| (e.clone(), c.clone())),
        )
    }

    pub fn scale(&self, c: &T) -> Self {
        Self::from_terms(self.nvars, self.terms.iter().map(|(e, v)| (e.clone(), v.clone() * c.clone())))
    }

    pub fn map<U: Ring, F: Fn(&T) -> U>(&self, f: F) -> MultiPoly<U> {
        MultiPoly::from_terms(self.nvars, self.terms.iter().map(|(e, c)| (e.clone(), f(c))))
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut out = Self::constant(self.nvars, T::one());
        for _ in 0..n {
            out = &out * self;
        }
        out
    }

    /// `∂/∂xᵢ`.
    pub fn derivative(&self, i: usize) -> Self {
        let mut out = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            if e[i] == 0 {
                continue;
            }
            let mut f = e.clone();
            f[i] -= 1;
            out.add_term(f, c.clone() * T::from_i64(e[i] as i64));
        }
        out
    }

    pub fn eval(&self, x: &[T]) -> T {
        assert_eq!(x.len(), self.nvars, "point dimension");
        let mut acc = T::zero();
        for (e, c) in &self.terms {
            let mut m = c.clone();
            for (xi, &k) in x.iter().zip(e) {
                for _ in 0..k {
                    m = m * xi.clone();
                }
            }
            acc = acc + m;
        }
        acc
    }

    /// Substitutes `xᵢ ↦ substitutions[i]` (all in the same target ring).
    pub fn compose(&self, substitutions: &[MultiPoly<T>]) -> MultiPoly<T> {
        assert_eq!(substitutions.len(), self.nvars, "one substitution per variable");
        let target = substitutions.first().map_or(0, |s| s.nvars);
        let mut powers: Vec<Vec<MultiPoly<T>>> = substitutions
            .iter()
            .map(|s| vec![MultiPoly::constant(target, T::one()), s.clone()])
            .collect();
        let mut out = MultiPoly::zero(target);
        for (e, c) in &self.terms {
            let mut m = MultiPoly::constant(target, c.clone());
            for (i, &k) in e.iter().enumerate() {
                while powers[i].len() <= k as usize {
                    let next = &powers[i][powers[i].len() - 1] * &substitutions[i];
                    powers[i].push(next);
                }
                m = &m * &powers[i][k as usize];
            }
            out = &out + &m;
        }
        out
    }

    /// Hessian as a matrix of polynomials.
    pub fn hessian(&self) -> Vec<Vec<MultiPoly<T>>> {
        let d: Vec<Self> = (0..self.nvars).map(|i| self.derivative(i)).collect();
        (0..self.nvars).map(|i| (0..self.nvars).map(|j| d[i].derivative(j)).collect()).collect()
    }
}

impl<T: Field> MultiPoly<T> {
    pub fn eval_c64(&self, x: &[Complex<f64>]) -> Complex<f64> {
        assert_eq!(x.len(), self.nvars, "point dimension");
        let mut acc = Complex::new(0.0, 0.0);
        for (e, c) in &self.terms {
            let mut m = c.to_c64();
            for (xi, &k) in x.iter().zip(e) {
                m *= xi.powu(k);
            }
            acc += m;
        }
        acc
    }

    /// Largest coefficient modulus, used as a residual.
    pub fn max_abs(&self) -> f64 {
        self.terms.values().map(|c| c.magnitude()).fold(0.0, f64::max)
    }
}

fn check_vars<T>(a: &MultiPoly<T>, b: &MultiPoly<T>) {
    assert_eq!(a.nvars, b.nvars, "polynomials in different numbers of variables");
}

impl<T: Ring> Add for &MultiPoly<T> {
    type Output = MultiPoly<T>;
    fn add(self, o: &MultiPoly<T>) -> MultiPoly<T> {
        check_vars(self, o);
        let mut out = self.clone();
        for (e, c) in &o.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }
}

impl<T: Ring> Sub for &MultiPoly<T> {
    type Output = MultiPoly<T>;
    fn sub(self, o: &MultiPoly<T>) -> MultiPoly<T> {
        check_vars(self, o);
        let mut out = self.clone();
        for (e, c) in &o.terms {
            out.add_term(e.clone(), -c.clone());
        }
        out
    }
}

impl<T: Ring> Neg for &MultiPoly<T> {
    type Output = MultiPoly<T>;
    fn neg(self) -> MultiPoly<T> {
        self.map(|c| -c.clone())
    }
}

impl<T: Ring> Mul for &MultiPoly<T> {
    type Output = MultiPoly<T>;
    fn mul(self, o: &MultiPoly<T>) -> MultiPoly<T> {
        check_vars(self, o);
        let mut out = MultiPoly::zero(self.nvars);
        for (a, x) in &self.terms {
            for (b, y) in &o.terms {
                let e = a.iter().zip(b).map(|(i, j)| i + j).collect();
                out.add_term(e, x.clone() * y.clone());
            }
        }
        out
    }
}

impl<T: Ring> Add for MultiPoly<T> {
    type Output = MultiPoly<T>;
    fn add(self, o: Self) -> Self {
        &self + &o
    }
}

impl<T: Ring> Sub for MultiPoly<T> {
    type Output = MultiPoly<T>;
    fn sub(self, o: Self) -> Self {
        &self - &o
    }
}

impl<T: Ring> Mul for MultiPoly<T> {
    type Output = MultiPoly<T>;
    fn mul(self, o: Self) -> Self {
        &self * &o
    }
}

impl<T: Ring> Neg for MultiPoly<T> {
    type Output = MultiPoly<T>;
    fn neg(self) -> Self {
        -&self
    }
}

impl<T: fmt::Debug> fmt::Debug for MultiPoly<T> {
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
            write!(f, "({c:?})")?;
            for (i, k) in e.iter().enumerate() {
                match k {
                    0 => {}
                    1 => write!(f, "·x{i}")?,
                    _ => write!(f, "·x{i}^{k}")?,
                }
            }
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct TermRepr<C> {
    exponents: Vec<u32>,
    coef: C,
}

#[derive(Serialize, Deserialize)]
struct Repr<C> {
    nvars: usize,
    terms: Vec<TermRepr<C>>,
}

impl<T: Serialize> Serialize for MultiPoly<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        Repr {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, c)| TermRepr { exponents: e.clone(), coef: c }).collect(),
        }
        .serialize(s)
    }
}

impl<'de, T: Ring + Deserialize<'de>> Deserialize<'de> for MultiPoly<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r: Repr<T> = Repr::deserialize(d)?;
        let mut p = MultiPoly::zero(r.nvars);
        for t in r.terms {
            if t.exponents.len() != r.nvars {
                return Err(serde::de::Error::custom(format!(
                    "monomial {:?} does not have {} exponents",
                    t.exponents, r.nvars
                )));
            }
            p.add_term(t.exponents, t.coef);
        }
        Ok(p)
    }
}

/// Rejects polynomials with more variables than a model provides.
pub(crate) fn expect_vars<T>(p: &MultiPoly<T>, n: usize) -> Result<()> {
    if p.nvars != n {
        return Err(Error::Dimension(format!("polynomial in {} variables, expected {n}", p.nvars)));
    }
    Ok(())
}
