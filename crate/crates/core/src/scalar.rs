//! Numeric backends: arbitrary-precision rationals for exact identity
//! checking and complex doubles for root solving.
//!
//! Every algebraic identity in this crate is a rational-function identity,
//! so the exact backend works over [`Rat`] (reduced `BigRational`).  The
//! float backend [`C64`] appears only in the spectrum pipeline, where Bethe
//! roots are genuinely complex.  The [`Ring`] and [`Scalar`] traits let the
//! operator algebra and the Bethe-vector machinery run over either backend
//! with a single code path.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::ratfun::RatFun;

/// Tolerance below which a floating denominator counts as a pole hit.
pub const NEAR_POLE_TOL: f64 = 1e-12;

/// Exact rational scalar.  Always stored reduced with positive denominator;
/// `BigRational` maintains both invariants on every operation.
///
/// Serializes as the string `"p/q"`, with `/q` omitted when `q = 1`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Rat(BigRational);

impl Rat {
    /// The rational p/q.  Panics if `q = 0`; use [`Rat::from_str`] for
    /// fallible parsing of untrusted input.
    pub fn new(p: i64, q: i64) -> Self {
        assert!(q != 0, "zero denominator");
        Rat(BigRational::new(BigInt::from(p), BigInt::from(q)))
    }

    /// The integer n as a rational.
    pub fn int(n: i64) -> Self {
        Rat(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn zero() -> Self {
        Rat(BigRational::zero())
    }

    pub fn one() -> Self {
        Rat(BigRational::one())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }

    /// Multiplicative inverse; `Pole` on zero.
    pub fn recip(&self) -> Result<Rat> {
        if self.is_zero() {
            return Err(Error::Pole("division by exact zero".into()));
        }
        Ok(Rat(self.0.recip()))
    }

    /// Nearest double (both components of huge rationals round).
    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or_else(|| {
            // Fall back to separate conversion when the ratio overflows.
            let n = self.0.numer().to_f64().unwrap_or(f64::INFINITY);
            let d = self.0.denom().to_f64().unwrap_or(f64::INFINITY);
            n / d
        })
    }

    pub fn abs(&self) -> Rat {
        Rat(self.0.abs())
    }

    pub fn inner(&self) -> &BigRational {
        &self.0
    }
}

impl fmt::Display for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.denom().is_one() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl FromStr for Rat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (num, den) = match s.split_once('/') {
            Some((n, d)) => (n.trim(), Some(d.trim())),
            None => (s, None),
        };
        let p = BigInt::from_str(num)
            .map_err(|_| Error::Parse(format!("invalid integer part in rational '{s}'")))?;
        let q = match den {
            Some(d) => BigInt::from_str(d)
                .map_err(|_| Error::Parse(format!("invalid denominator in rational '{s}'")))?,
            None => BigInt::one(),
        };
        if q.is_zero() {
            return Err(Error::Parse(format!("zero denominator in rational '{s}'")));
        }
        Ok(Rat(BigRational::new(p, q)))
    }
}

impl From<i64> for Rat {
    fn from(n: i64) -> Self {
        Rat::int(n)
    }
}

impl Serialize for Rat {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Rat {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Rat::from_str(&s).map_err(|e| D::Error::custom(e.to_string()))
    }
}

macro_rules! rat_binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl $trait for Rat {
            type Output = Rat;
            fn $method(self, rhs: Rat) -> Rat {
                Rat(self.0 $op rhs.0)
            }
        }
        impl<'a> $trait<&'a Rat> for &Rat {
            type Output = Rat;
            fn $method(self, rhs: &Rat) -> Rat {
                Rat(&self.0 $op &rhs.0)
            }
        }
        impl $trait<&Rat> for Rat {
            type Output = Rat;
            fn $method(self, rhs: &Rat) -> Rat {
                Rat(self.0 $op &rhs.0)
            }
        }
        impl $trait<Rat> for &Rat {
            type Output = Rat;
            fn $method(self, rhs: Rat) -> Rat {
                Rat(&self.0 $op rhs.0)
            }
        }
    };
}

rat_binop!(Add, add, +);
rat_binop!(Sub, sub, -);
rat_binop!(Mul, mul, *);

impl Div for Rat {
    type Output = Rat;
    fn div(self, rhs: Rat) -> Rat {
        assert!(!rhs.is_zero(), "division by zero Rat");
        Rat(self.0 / rhs.0)
    }
}

impl Div<&Rat> for &Rat {
    type Output = Rat;
    fn div(self, rhs: &Rat) -> Rat {
        assert!(!rhs.is_zero(), "division by zero Rat");
        Rat(&self.0 / &rhs.0)
    }
}

impl Neg for Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        Rat(-self.0)
    }
}

impl Neg for &Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        Rat(-&self.0)
    }
}

/// Complex double scalar used by the spectrum pipeline.
pub type C64 = num_complex::Complex64;

/// Commutative-ring interface for operator entries.  Implemented by both
/// numeric backends and by univariate rational functions, so the sparse
/// operator algebra can hold any of them.
pub trait Ring: Clone + PartialEq + fmt::Debug + Send + Sync + 'static {
    fn ring_zero() -> Self;
    fn ring_one() -> Self;
    fn ring_add(&self, other: &Self) -> Self;
    fn ring_sub(&self, other: &Self) -> Self;
    fn ring_mul(&self, other: &Self) -> Self;
    fn ring_neg(&self) -> Self;
    /// Exact zero test; used to prune explicit zeros from sparse storage.
    fn ring_is_zero(&self) -> bool;
}

/// Field interface for the weight functions and recursion coefficients.
/// Division is pole-guarded: exactly for [`Rat`], with tolerance
/// [`NEAR_POLE_TOL`] for [`C64`].
pub trait Scalar: Ring {
    /// Hashable, totally ordered key used for memoization and canonical
    /// sorting of parameter sets.
    type Key: Eq + Ord + std::hash::Hash + Clone + fmt::Debug + Send + Sync;

    fn from_rat(r: &Rat) -> Self;
    fn div_checked(&self, den: &Self) -> Result<Self>;
    /// Evaluate a univariate rational function at this scalar.
    fn eval_rf(f: &RatFun, at: &Self) -> Result<Self>;
    fn key(&self) -> Self::Key;
}

impl Ring for Rat {
    fn ring_zero() -> Self {
        Rat::zero()
    }
    fn ring_one() -> Self {
        Rat::one()
    }
    fn ring_add(&self, other: &Self) -> Self {
        self + other
    }
    fn ring_sub(&self, other: &Self) -> Self {
        self - other
    }
    fn ring_mul(&self, other: &Self) -> Self {
        self * other
    }
    fn ring_neg(&self) -> Self {
        -self
    }
    fn ring_is_zero(&self) -> bool {
        self.is_zero()
    }
}

impl Scalar for Rat {
    type Key = Rat;

    fn from_rat(r: &Rat) -> Self {
        r.clone()
    }

    fn div_checked(&self, den: &Self) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::Pole("exact denominator vanished".into()));
        }
        Ok(self / den)
    }

    fn eval_rf(f: &RatFun, at: &Self) -> Result<Self> {
        f.eval(at)
    }

    fn key(&self) -> Rat {
        self.clone()
    }
}

impl Ring for C64 {
    fn ring_zero() -> Self {
        C64::new(0.0, 0.0)
    }
    fn ring_one() -> Self {
        C64::new(1.0, 0.0)
    }
    fn ring_add(&self, other: &Self) -> Self {
        self + other
    }
    fn ring_sub(&self, other: &Self) -> Self {
        self - other
    }
    fn ring_mul(&self, other: &Self) -> Self {
        self * other
    }
    fn ring_neg(&self) -> Self {
        -self
    }
    fn ring_is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
}

/// Total order on doubles through their bit pattern; only determinism
/// matters here, not numeric meaning.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct C64Key(pub u64, pub u64);

impl Scalar for C64 {
    type Key = C64Key;

    fn from_rat(r: &Rat) -> Self {
        C64::new(r.to_f64(), 0.0)
    }

    fn div_checked(&self, den: &Self) -> Result<Self> {
        if den.norm() < NEAR_POLE_TOL {
            return Err(Error::NearPole(format!(
                "denominator magnitude {} below {NEAR_POLE_TOL}",
                den.norm()
            )));
        }
        Ok(self / den)
    }

    fn eval_rf(f: &RatFun, at: &Self) -> Result<Self> {
        f.eval_c64(*at)
    }

    fn key(&self) -> C64Key {
        C64Key(self.re.to_bits(), self.im.to_bits())
    }
}
