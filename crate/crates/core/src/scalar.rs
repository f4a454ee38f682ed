//! Scalar backends: exact rationals and 64-bit floats, plus the ring
//! abstraction shared by pointwise tensors and polynomial-coefficient tensors.

use std::cmp::Ordering;
use std::fmt;
use std::iter::{Product, Sum};
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_rational::Ratio;
use num_traits::{CheckedAdd, CheckedDiv, CheckedMul, CheckedSub, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Exact rational number backed by `i128` numerator and denominator.
///
/// Arithmetic is checked; an overflow panics instead of silently wrapping,
/// since every identity check relies on exact zero tests.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Q(Ratio<i128>);

impl Q {
    pub const ZERO: Q = Q(Ratio::new_raw(0, 1));
    pub const ONE: Q = Q(Ratio::new_raw(1, 1));

    pub fn new(num: i128, den: i128) -> Q {
        assert!(den != 0, "zero denominator");
        Q(Ratio::new(num, den))
    }

    pub fn int(v: i128) -> Q {
        Q(Ratio::from_integer(v))
    }

    pub fn numer(&self) -> i128 {
        *self.0.numer()
    }

    pub fn denom(&self) -> i128 {
        *self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn abs(&self) -> Q {
        Q(self.0.abs())
    }

    pub fn recip(&self) -> Q {
        assert!(!self.is_zero(), "reciprocal of zero");
        Q(self.0.recip())
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    pub fn pow(&self, e: u32) -> Q {
        let mut acc = Q::ONE;
        for _ in 0..e {
            acc *= *self;
        }
        acc
    }

    /// Best rational approximation with bounded denominator; used when a
    /// float point has to enter exact evaluation.
    pub fn from_f64_approx(x: f64, max_den: i128) -> Q {
        if !x.is_finite() {
            return Q::ZERO;
        }
        let (mut h0, mut h1) = (0i128, 1i128);
        let (mut k0, mut k1) = (1i128, 0i128);
        let mut v = x;
        for _ in 0..64 {
            let a = v.floor();
            if a.abs() > 1e18 {
                break;
            }
            let ai = a as i128;
            let h2 = ai * h1 + h0;
            let k2 = ai * k1 + k0;
            if k2 > max_den {
                break;
            }
            h0 = h1;
            h1 = h2;
            k0 = k1;
            k1 = k2;
            let frac = v - a;
            if frac.abs() < 1e-15 {
                break;
            }
            v = 1.0 / frac;
        }
        if k1 == 0 {
            return Q::int(x.round() as i128);
        }
        Q::new(h1, k1)
    }
}

impl fmt::Debug for Q {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Q {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.denom() == 1 {
            write!(f, "{}", self.numer())
        } else {
            write!(f, "{}/{}", self.numer(), self.denom())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid rational literal `{0}`")]
pub struct ParseQError(pub String);

impl FromStr for Q {
    type Err = ParseQError;

    fn from_str(s: &str) -> Result<Q, ParseQError> {
        let t = s.trim();
        let err = || ParseQError(s.to_string());
        if let Some((n, d)) = t.split_once('/') {
            let n: i128 = n.trim().parse().map_err(|_| err())?;
            let d: i128 = d.trim().parse().map_err(|_| err())?;
            if d == 0 {
                return Err(err());
            }
            Ok(Q::new(n, d))
        } else if let Ok(v) = t.parse::<i128>() {
            Ok(Q::int(v))
        } else {
            // decimal literal such as 0.25
            let (int_part, frac_part) = t.split_once('.').ok_or_else(err)?;
            let neg = int_part.starts_with('-');
            let digits = frac_part.len() as u32;
            if digits > 30 || !frac_part.chars().all(|c| c.is_ascii_digit()) {
                return Err(err());
            }
            let ip: i128 = if int_part.is_empty() || int_part == "-" || int_part == "+" {
                0
            } else {
                int_part.parse().map_err(|_| err())?
            };
            let fp: i128 = if frac_part.is_empty() { 0 } else { frac_part.parse().map_err(|_| err())? };
            let scale = 10i128.pow(digits);
            let mag = ip.abs() * scale + fp;
            Ok(Q::new(if neg { -mag } else { mag }, scale))
        }
    }
}

impl Serialize for Q {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Q {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Q, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Lit {
            Int(i64),
            Float(f64),
            Str(String),
        }
        match Lit::deserialize(d)? {
            Lit::Int(v) => Ok(Q::int(v as i128)),
            Lit::Float(v) => Ok(Q::from_f64_approx(v, 1_000_000_000)),
            Lit::Str(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

impl PartialOrd for Q {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Q {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.cmp(&other.0)
    }
}

impl Add for Q {
    type Output = Q;
    fn add(self, o: Q) -> Q {
        Q(self.0.checked_add(&o.0).expect("rational overflow in addition"))
    }
}

impl Sub for Q {
    type Output = Q;
    fn sub(self, o: Q) -> Q {
        Q(self.0.checked_sub(&o.0).expect("rational overflow in subtraction"))
    }
}

impl Mul for Q {
    type Output = Q;
    fn mul(self, o: Q) -> Q {
        Q(self.0.checked_mul(&o.0).expect("rational overflow in multiplication"))
    }
}

impl Div for Q {
    type Output = Q;
    fn div(self, o: Q) -> Q {
        assert!(!o.is_zero(), "division by zero");
        Q(self.0.checked_div(&o.0).expect("rational overflow in division"))
    }
}

impl Neg for Q {
    type Output = Q;
    fn neg(self) -> Q {
        Q(-self.0)
    }
}

impl AddAssign for Q {
    fn add_assign(&mut self, o: Q) {
        *self = *self + o;
    }
}

impl SubAssign for Q {
    fn sub_assign(&mut self, o: Q) {
        *self = *self - o;
    }
}

impl MulAssign for Q {
    fn mul_assign(&mut self, o: Q) {
        *self = *self * o;
    }
}

impl Sum for Q {
    fn sum<I: Iterator<Item = Q>>(iter: I) -> Q {
        iter.fold(Q::ZERO, |a, b| a + b)
    }
}

impl Product for Q {
    fn product<I: Iterator<Item = Q>>(iter: I) -> Q {
        iter.fold(Q::ONE, |a, b| a * b)
    }
}

impl From<i64> for Q {
    fn from(v: i64) -> Q {
        Q::int(v as i128)
    }
}

impl From<i32> for Q {
    fn from(v: i32) -> Q {
        Q::int(v as i128)
    }
}

/// Commutative ring operations used by the sparse tensor kernel.
///
/// Implemented for the two scalar backends and for polynomials, so the same
/// wedge/contraction code serves pointwise tensors and tensor fields.
pub trait Ring: Clone + fmt::Debug + Send + Sync + 'static {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn plus(&self, other: &Self) -> Self;
    fn minus(&self, other: &Self) -> Self;
    fn times(&self, other: &Self) -> Self;
    fn negated(&self) -> Self;
    fn from_int(v: i64) -> Self;

    fn accumulate(&mut self, other: &Self) {
        *self = self.plus(other);
    }
}

/// A field of scalars: a ring with division, a float view, and a magnitude.
pub trait Scalar: Ring + Copy + PartialEq {
    fn divide(&self, other: &Self) -> Self;
    fn to_f64(&self) -> f64;
    fn from_q(q: Q) -> Self;
    /// Zero test used by decision procedures: exact for rationals, absolute
    /// threshold for floats.
    fn is_negligible(&self, tol: f64) -> bool;
}

impl Ring for Q {
    fn zero() -> Self {
        Q::ZERO
    }
    fn one() -> Self {
        Q::ONE
    }
    fn is_zero(&self) -> bool {
        Q::is_zero(self)
    }
    fn plus(&self, o: &Self) -> Self {
        *self + *o
    }
    fn minus(&self, o: &Self) -> Self {
        *self - *o
    }
    fn times(&self, o: &Self) -> Self {
        *self * *o
    }
    fn negated(&self) -> Self {
        -*self
    }
    fn from_int(v: i64) -> Self {
        Q::int(v as i128)
    }
}

impl Scalar for Q {
    fn divide(&self, o: &Self) -> Self {
        *self / *o
    }
    fn to_f64(&self) -> f64 {
        Q::to_f64(self)
    }
    fn from_q(q: Q) -> Self {
        q
    }
    fn is_negligible(&self, _tol: f64) -> bool {
        self.is_zero()
    }
}

impl Ring for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn plus(&self, o: &Self) -> Self {
        self + o
    }
    fn minus(&self, o: &Self) -> Self {
        self - o
    }
    fn times(&self, o: &Self) -> Self {
        self * o
    }
    fn negated(&self) -> Self {
        -self
    }
    fn from_int(v: i64) -> Self {
        v as f64
    }
}

impl Scalar for f64 {
    fn divide(&self, o: &Self) -> Self {
        self / o
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn from_q(q: Q) -> Self {
        q.to_f64()
    }
    fn is_negligible(&self, tol: f64) -> bool {
        self.abs() <= tol
    }
}

pub fn factorial(k: usize) -> i64 {
    (1..=k as i64).product()
}

pub fn q_vec_to_f64(v: &[Q]) -> Vec<f64> {
    v.iter().map(Q::to_f64).collect()
}
