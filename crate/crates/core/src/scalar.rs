//! The numeric abstraction every algorithm in the crate is written against.
//!
//! Exact work uses [`Rational`] (arbitrary precision, always reduced). The
//! floating point impls exist for quick exploratory runs; ties and exhaustion
//! events are then only as good as the rounding.

use std::fmt::{Debug, Display};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, ToPrimitive, Zero};

/// Exact arbitrary-precision fraction in canonical reduced form.
pub type Rational = BigRational;

pub trait Scalar:
    Num + Clone + PartialOrd + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync + 'static
{
    /// `true` when arithmetic and comparisons are exact.
    const EXACT: bool;

    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar")
    }

    fn ratio(num: i64, den: i64) -> Self {
        Self::from_i64(num).expect("integer representable in scalar")
            / Self::from_i64(den).expect("integer representable in scalar")
    }

    fn approx(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {
    const EXACT: bool = false;
}

impl Scalar for f64 {
    const EXACT: bool = false;
}

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }
}

/// Shorthand for building an exact rational from machine integers.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::ratio(num, den)
}

/// Exact conversion of a finite `f64` (every finite double is a dyadic rational).
pub fn rational_from_f64(x: f64) -> Option<Rational> {
    BigRational::from_float(x)
}

pub(crate) fn is_unit<S: Scalar>(x: &S) -> bool {
    x.is_one()
}

pub(crate) fn is_partial<S: Scalar>(x: &S) -> bool {
    !x.is_zero() && *x < S::one()
}

pub(crate) fn sum<'a, S: Scalar>(xs: impl IntoIterator<Item = &'a S>) -> S {
    xs.into_iter().fold(S::zero(), |acc, x| acc + x.clone())
}

/// Decimal rendering with a fixed number of places, rounding half away from zero.
/// Exact for rationals; used for human-readable annotations only.
pub fn to_fixed(x: &Rational, places: u32) -> String {
    let scale = BigInt::from(10u32).pow(places);
    let scaled = x * BigRational::from_integer(scale.clone());
    let rounded = scaled.round().to_integer();
    let negative = rounded < BigInt::zero();
    let abs = if negative { -rounded } else { rounded };
    let int_part = &abs / &scale;
    let frac_part = &abs % &scale;
    let mut out = String::new();
    if negative {
        out.push('-');
    }
    out.push_str(&int_part.to_string());
    if places > 0 {
        out.push('.');
        let frac = frac_part.to_string();
        for _ in frac.len()..places as usize {
            out.push('0');
        }
        out.push_str(&frac);
    }
    out
}
