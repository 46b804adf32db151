//! Scalar traits shared by every algebraic module, and the exact Gaussian
//! rational type used wherever results must not depend on tolerances.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{Float, One, Signed, ToPrimitive, Zero};
use rand::Rng;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Commutative ring with unit. Laurent polynomials and every field below
/// implement it; multivariate polynomial coefficients only need this much.
pub trait Ring:
    Clone
    + PartialEq
    + fmt::Debug
    + Send
    + Sync
    + 'static
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    fn from_i64(n: i64) -> Self;
}

/// A field the linear algebra can eliminate over.
///
/// Exact fields (`EXACT = true`) pivot on the first nonzero entry; inexact
/// ones use partial pivoting and treat entries below a fixed threshold as
/// zero.
pub trait Field: Ring + Div<Output = Self> {
    const EXACT: bool;

    /// Complex double approximation, used by quadrature and reporting.
    fn to_c64(&self) -> Complex<f64>;

    /// Size used to choose pivots; only consulted for inexact fields and for
    /// the "largest pivot" frame completion.
    fn magnitude(&self) -> f64 {
        self.to_c64().norm()
    }

    fn is_negligible(&self) -> bool {
        self.is_zero()
    }

    fn inv(&self) -> Self {
        Self::one() / self.clone()
    }
}

/// Real floating-point scalars for the grid and quadrature modules.
pub trait Real: Float + fmt::Debug + fmt::Display + Send + Sync + 'static {
    fn lit(x: f64) -> Self {
        Self::from(x).expect("f64 literal representable")
    }
}

impl Real for f64 {}
impl Real for f32 {}

macro_rules! float_field {
    ($t:ty, $eps:expr) => {
        impl Ring for $t {
            fn from_i64(n: i64) -> Self {
                n as $t
            }
        }
        impl Field for $t {
            const EXACT: bool = false;
            fn to_c64(&self) -> Complex<f64> {
                Complex::new(*self as f64, 0.0)
            }
            fn magnitude(&self) -> f64 {
                (*self as f64).abs()
            }
            fn is_negligible(&self) -> bool {
                self.abs() <= $eps
            }
        }
    };
}

float_field!(f64, 1e-12);
float_field!(f32, 1e-6);

impl<F: Real> Ring for Complex<F> {
    fn from_i64(n: i64) -> Self {
        Complex::new(F::from(n).expect("integer representable"), F::zero())
    }
}

impl<F: Real> Field for Complex<F> {
    const EXACT: bool = false;
    fn to_c64(&self) -> Complex<f64> {
        Complex::new(
            self.re.to_f64().unwrap_or(f64::NAN),
            self.im.to_f64().unwrap_or(f64::NAN),
        )
    }
    fn is_negligible(&self) -> bool {
        self.norm() <= F::epsilon().sqrt() * F::lit(1e-4)
    }
}

/// Gaussian rational `re + i·im` with arbitrary-precision components.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct QI {
    pub re: BigRational,
    pub im: BigRational,
}

impl QI {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        QI { re, im }
    }

    pub fn int(n: i64) -> Self {
        QI::new(BigRational::from_integer(n.into()), BigRational::zero())
    }

    pub fn ratio(p: i64, q: i64) -> Self {
        QI::new(BigRational::new(p.into(), q.into()), BigRational::zero())
    }

    pub fn gaussian(re: i64, im: i64) -> Self {
        QI::new(
            BigRational::from_integer(re.into()),
            BigRational::from_integer(im.into()),
        )
    }

    pub fn i() -> Self {
        QI::gaussian(0, 1)
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        QI::new(self.re.clone(), -self.im.clone())
    }

    /// Squared modulus, exact.
    pub fn norm_sqr(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = QI::one();
        for _ in 0..e {
            acc *= self.clone();
        }
        acc
    }

    /// Uniform random Gaussian integer with components in `[-bound, bound]`;
    /// the imaginary part is zero unless `complex` is set.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, bound: i64, complex: bool) -> Self {
        let re = rng.gen_range(-bound..=bound);
        let im = if complex { rng.gen_range(-bound..=bound) } else { 0 };
        QI::gaussian(re, im)
    }

    /// Random nonzero value, same distribution as [`QI::random`] otherwise.
    pub fn random_nonzero<R: Rng + ?Sized>(rng: &mut R, bound: i64, complex: bool) -> Self {
        loop {
            let v = QI::random(rng, bound, complex);
            if !v.is_zero() {
                return v;
            }
        }
    }
}

fn ratio_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // Components too large for a direct conversion: fall back to a ratio
        // of truncated integers.
        let n = r.numer().to_f64().unwrap_or(f64::INFINITY);
        let d = r.denom().to_f64().unwrap_or(f64::INFINITY);
        n / d
    })
}

impl Zero for QI {
    fn zero() -> Self {
        QI::new(BigRational::zero(), BigRational::zero())
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
}

impl One for QI {
    fn one() -> Self {
        QI::int(1)
    }
}

impl Add for QI {
    type Output = QI;
    fn add(self, rhs: QI) -> QI {
        QI::new(self.re + rhs.re, self.im + rhs.im)
    }
}

impl<'a> Add<&'a QI> for &'a QI {
    type Output = QI;
    fn add(self, rhs: &QI) -> QI {
        QI::new(&self.re + &rhs.re, &self.im + &rhs.im)
    }
}

impl AddAssign for QI {
    fn add_assign(&mut self, rhs: QI) {
        self.re += rhs.re;
        self.im += rhs.im;
    }
}

impl Sub for QI {
    type Output = QI;
    fn sub(self, rhs: QI) -> QI {
        QI::new(self.re - rhs.re, self.im - rhs.im)
    }
}

impl<'a> Sub<&'a QI> for &'a QI {
    type Output = QI;
    fn sub(self, rhs: &QI) -> QI {
        QI::new(&self.re - &rhs.re, &self.im - &rhs.im)
    }
}

impl SubAssign for QI {
    fn sub_assign(&mut self, rhs: QI) {
        self.re -= rhs.re;
        self.im -= rhs.im;
    }
}

impl<'a> Mul<&'a QI> for &'a QI {
    type Output = QI;
    fn mul(self, rhs: &QI) -> QI {
        if self.im.is_zero() && rhs.im.is_zero() {
            return QI::new(&self.re * &rhs.re, BigRational::zero());
        }
        QI::new(
            &self.re * &rhs.re - &self.im * &rhs.im,
            &self.re * &rhs.im + &self.im * &rhs.re,
        )
    }
}

impl Mul for QI {
    type Output = QI;
    fn mul(self, rhs: QI) -> QI {
        &self * &rhs
    }
}

impl MulAssign for QI {
    fn mul_assign(&mut self, rhs: QI) {
        *self = &*self * &rhs;
    }
}

impl<'a> Div<&'a QI> for &'a QI {
    type Output = QI;
    fn div(self, rhs: &QI) -> QI {
        assert!(!rhs.is_zero(), "division by zero Gaussian rational");
        if rhs.im.is_zero() {
            return QI::new(&self.re / &rhs.re, &self.im / &rhs.re);
        }
        let d = rhs.norm_sqr();
        let re = &self.re * &rhs.re + &self.im * &rhs.im;
        let im = &self.im * &rhs.re - &self.re * &rhs.im;
        QI::new(re / &d, im / d)
    }
}

impl Div for QI {
    type Output = QI;
    fn div(self, rhs: QI) -> QI {
        &self / &rhs
    }
}

impl Neg for QI {
    type Output = QI;
    fn neg(self) -> QI {
        QI::new(-self.re, -self.im)
    }
}

impl Neg for &QI {
    type Output = QI;
    fn neg(self) -> QI {
        QI::new(-self.re.clone(), -self.im.clone())
    }
}

impl Ring for QI {
    fn from_i64(n: i64) -> Self {
        QI::int(n)
    }
}

impl Field for QI {
    const EXACT: bool = true;

    fn to_c64(&self) -> Complex<f64> {
        Complex::new(ratio_to_f64(&self.re), ratio_to_f64(&self.im))
    }

    fn magnitude(&self) -> f64 {
        ratio_to_f64(&self.re).abs() + ratio_to_f64(&self.im).abs()
    }
}

impl From<i64> for QI {
    fn from(n: i64) -> Self {
        QI::int(n)
    }
}

impl fmt::Display for QI {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.re.is_zero(), self.im.is_zero()) {
            (_, true) => write!(f, "{}", self.re),
            (true, false) => write!(f, "{}i", self.im),
            (false, false) => {
                if self.im.is_negative() {
                    write!(f, "{}-{}i", self.re, -self.im.clone())
                } else {
                    write!(f, "{}+{}i", self.re, self.im)
                }
            }
        }
    }
}

impl fmt::Debug for QI {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Parses `"p"` or `"p/q"` with decimal integers.
pub fn parse_rational(s: &str) -> Result<BigRational, String> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n = BigInt::from_str(num).map_err(|e| format!("bad numerator {num:?}: {e}"))?;
    let d = BigInt::from_str(den).map_err(|e| format!("bad denominator {den:?}: {e}"))?;
    if d.is_zero() {
        return Err(format!("zero denominator in {s:?}"));
    }
    Ok(BigRational::new(n, d))
}

fn format_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

#[derive(Serialize, Deserialize)]
struct QIRepr {
    re: String,
    im: String,
}

impl Serialize for QI {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        QIRepr {
            re: format_rational(&self.re),
            im: format_rational(&self.im),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for QI {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let repr = QIRepr::deserialize(d)?;
        let re = parse_rational(&repr.re).map_err(D::Error::custom)?;
        let im = parse_rational(&repr.im).map_err(D::Error::custom)?;
        Ok(QI::new(re, im))
    }
}

/// Total order on Gaussian rationals (lexicographic on `(re, im)`), only
/// used to make reports and tie-breaks deterministic.
pub fn lex_cmp(a: &QI, b: &QI) -> Ordering {
    a.re.cmp(&b.re).then_with(|| a.im.cmp(&b.im))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_axioms_on_samples() {
        let a = QI::gaussian(3, -2);
        let b = QI::ratio(5, 7);
        let c = QI::gaussian(-1, 4);
        assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        assert_eq!(&(&a / &c) * &c, a);
        assert_eq!(&a - &a, QI::zero());
        assert_eq!(QI::i() * QI::i(), QI::int(-1));
    }

    #[test]
    fn json_encoding_matches_contract() {
        let q = QI::new(BigRational::new(3.into(), 4.into()), BigRational::from_integer((-2).into()));
        let js = serde_json::to_string(&q).unwrap();
        assert_eq!(js, r#"{"re":"3/4","im":"-2"}"#);
        let back: QI = serde_json::from_str(&js).unwrap();
        assert_eq!(back, q);
        let alt: QI = serde_json::from_str(r#"{"re":"6/8","im":"-4/2"}"#).unwrap();
        assert_eq!(alt, q);
        assert!(serde_json::from_str::<QI>(r#"{"re":"1/0","im":"0"}"#).is_err());
    }

    #[test]
    fn to_c64_is_close() {
        let q = QI::new(BigRational::new(1.into(), 3.into()), BigRational::new((-5).into(), 2.into()));
        let c = q.to_c64();
        assert!((c.re - 1.0 / 3.0).abs() < 1e-15);
        assert!((c.im + 2.5).abs() < 1e-15);
    }
}
