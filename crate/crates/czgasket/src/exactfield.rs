//! Exact arithmetic: arbitrary-precision rationals and the field Q(sqrt 3).
//!
//! Every coordinate the crate manipulates — gasket vertices, similitude
//! images, squared distances, truncation radii — has the form `a + b*sqrt(3)`
//! with rational `a`, `b`, so [`QReal`] is closed under all the geometry we
//! do. The one nontrivial primitive is [`QReal::sign`]: the sign of
//! `a + b*sqrt(3)` is decided exactly by comparing `a^2` with `3 b^2` when
//! `a` and `b` disagree in sign (for rational `a`, `b` the quantity `a^2 - 3 b^2`
//! vanishes only when both do, since sqrt 3 is irrational).

use crate::Error;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

pub type Rat = BigRational;

/// `p/q` as an exact rational. Panics if `q == 0`.
pub fn rat(p: i64, q: i64) -> Rat {
    Rat::new(BigInt::from(p), BigInt::from(q))
}

/// `n` as an exact rational.
pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// `r^k` for unsigned `k` (so no inversion, valid for zero bases too).
pub fn rat_pow(r: &Rat, k: u32) -> Rat {
    let mut acc = Rat::one();
    for _ in 0..k {
        acc *= r;
    }
    acc
}

/// `3^-k` exactly.
pub fn third_pow(k: u32) -> Rat {
    Rat::new(BigInt::one(), BigInt::from(3).pow(k))
}

/// Nearest f64 (NaN only if the conversion is impossible, which does not
/// happen for the magnitudes this crate produces).
pub fn rat_to_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Serde helper: rationals travel as `p/q` strings in JSON output.
pub fn serialize_rat<S: Serializer>(r: &Rat, serializer: S) -> Result<S::Ok, S::Error> {
    serializer.collect_str(r)
}

/// An element `a + b*sqrt(3)` of the real quadratic field Q(sqrt 3).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct QReal {
    pub a: Rat,
    pub b: Rat,
}

impl QReal {
    pub fn new(a: Rat, b: Rat) -> Self {
        QReal { a, b }
    }

    pub fn from_rat(a: Rat) -> Self {
        QReal { a, b: Rat::zero() }
    }

    pub fn from_int(n: i64) -> Self {
        Self::from_rat(rat_int(n))
    }

    pub fn zero() -> Self {
        Self::from_rat(Rat::zero())
    }

    pub fn one() -> Self {
        Self::from_rat(Rat::one())
    }

    pub fn sqrt3() -> Self {
        QReal { a: Rat::zero(), b: Rat::one() }
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    /// Exact sign: -1, 0 or +1.
    ///
    /// When `a` and `b` have opposite signs the sign of `a + b*sqrt(3)` equals
    /// the sign of the dominant term, decided by comparing `a^2` against
    /// `3 b^2`; equality there forces `a = b = 0` by irrationality of sqrt 3.
    pub fn sign(&self) -> i32 {
        let sa = rat_sign(&self.a);
        let sb = rat_sign(&self.b);
        match (sa, sb) {
            (0, 0) => 0,
            (0, _) => sb,
            (_, 0) => sa,
            _ if sa == sb => sa,
            _ => {
                let a2 = &self.a * &self.a;
                let b23 = Rat::from_integer(BigInt::from(3)) * &self.b * &self.b;
                match a2.cmp(&b23) {
                    std::cmp::Ordering::Greater => sa,
                    std::cmp::Ordering::Less => sb,
                    // a^2 = 3 b^2 with a, b rational forces a = b = 0,
                    // already handled above.
                    std::cmp::Ordering::Equal => 0,
                }
            }
        }
    }

    /// Multiplicative inverse by the conjugate: `1/(a + b s) = (a - b s) / (a^2 - 3 b^2)`.
    pub fn inv(&self) -> Result<QReal, Error> {
        let norm = &self.a * &self.a - Rat::from_integer(BigInt::from(3)) * &self.b * &self.b;
        if norm.is_zero() {
            // norm = 0 iff a = b = 0 (irrationality again), i.e. division by zero
            return Err(Error::DivisionByZero);
        }
        Ok(QReal {
            a: &self.a / &norm,
            b: -(&self.b / &norm),
        })
    }

    /// Scale by an exact rational.
    pub fn scale(&self, c: &Rat) -> QReal {
        QReal { a: &self.a * c, b: &self.b * c }
    }

    pub fn to_f64(&self) -> f64 {
        rat_to_f64(&self.a) + rat_to_f64(&self.b) * 3f64.sqrt()
    }
}

pub(crate) fn rat_sign(r: &Rat) -> i32 {
    if r.is_zero() {
        0
    } else if r.is_positive() {
        1
    } else {
        -1
    }
}

impl Add for &QReal {
    type Output = QReal;
    fn add(self, rhs: &QReal) -> QReal {
        QReal { a: &self.a + &rhs.a, b: &self.b + &rhs.b }
    }
}

impl Sub for &QReal {
    type Output = QReal;
    fn sub(self, rhs: &QReal) -> QReal {
        QReal { a: &self.a - &rhs.a, b: &self.b - &rhs.b }
    }
}

impl Mul for &QReal {
    type Output = QReal;
    fn mul(self, rhs: &QReal) -> QReal {
        let three = Rat::from_integer(BigInt::from(3));
        QReal {
            a: &self.a * &rhs.a + three * &self.b * &rhs.b,
            b: &self.a * &rhs.b + &self.b * &rhs.a,
        }
    }
}

impl Neg for &QReal {
    type Output = QReal;
    fn neg(self) -> QReal {
        QReal { a: -&self.a, b: -&self.b }
    }
}

impl Add for QReal {
    type Output = QReal;
    fn add(self, rhs: QReal) -> QReal {
        &self + &rhs
    }
}

impl Sub for QReal {
    type Output = QReal;
    fn sub(self, rhs: QReal) -> QReal {
        &self - &rhs
    }
}

impl Mul for QReal {
    type Output = QReal;
    fn mul(self, rhs: QReal) -> QReal {
        &self * &rhs
    }
}

impl Neg for QReal {
    type Output = QReal;
    fn neg(self) -> QReal {
        -&self
    }
}

/// Serialized as `a/b+c/d*sqrt3` with signed numerators, e.g. `1/2+-3/4*sqrt3`.
impl fmt::Display for QReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}/{}+{}/{}*sqrt3",
            self.a.numer(),
            self.a.denom(),
            self.b.numer(),
            self.b.denom()
        )
    }
}

impl fmt::Debug for QReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "QReal({} ~ {})", self, self.to_f64())
    }
}

impl Serialize for QReal {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}
