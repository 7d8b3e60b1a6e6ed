//! Scalars shared by the floating and the exact rational routes.

use std::fmt::Debug;
use std::ops::{Div, Sub};

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{One, Signed, ToPrimitive, Zero};

pub trait Scalar: Clone + Debug + PartialOrd + Zero + One + Sub<Output = Self> + Div<Output = Self> + Send + Sync {
    /// Equality up to the route's tolerance: `1e-12` for floats, exact for rationals.
    fn close(&self, other: &Self) -> bool;
    fn to_f64(&self) -> f64;
    fn abs_val(&self) -> Self;
}

impl Scalar for f64 {
    fn close(&self, other: &Self) -> bool {
        (self - other).abs() <= 1e-12
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn abs_val(&self) -> Self {
        self.abs()
    }
}

impl Scalar for BigRational {
    fn close(&self, other: &Self) -> bool {
        self == other
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn abs_val(&self) -> Self {
        self.abs()
    }
}

/// Exact rationals over `i64` for suites whose denominators stay small.
/// Overflow panics in builds with overflow checks and is never rounded.
pub type SmallRational = Ratio<i64>;

impl Scalar for SmallRational {
    fn close(&self, other: &Self) -> bool {
        self == other
    }

    fn to_f64(&self) -> f64 {
        *self.numer() as f64 / *self.denom() as f64
    }

    fn abs_val(&self) -> Self {
        self.abs()
    }
}

pub fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Parses `"p/q"`, `"p"` or a decimal such as `"0.125"` exactly.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().ok()?;
        let q: BigInt = q.trim().parse().ok()?;
        return (!q.is_zero()).then(|| BigRational::new(p, q));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        let digits = format!("{whole}{frac}");
        let p: BigInt = digits.parse().ok()?;
        let q = num_traits::pow(BigInt::from(10), frac.len());
        return Some(BigRational::new(p, q));
    }
    s.parse::<BigInt>().ok().map(BigRational::from_integer)
}
