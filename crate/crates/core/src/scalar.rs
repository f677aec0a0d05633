//! Number types shared by the float and exact-rational code paths.
//!
//! Every finite `f64` is a dyadic rational, so graph data converts into
//! [`BigRational`] without loss. Computations instantiated with `BigRational`
//! are therefore exact with respect to the stored floating-point inputs.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rational = BigRational;

pub trait Scalar:
    Clone
    + Debug
    + PartialOrd
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
{
    /// Lossless for rationals; identity for floats.
    fn from_f64(x: f64) -> Self;
    fn to_f64(&self) -> f64;
    fn abs_val(&self) -> Self;

    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    fn is_positive(&self) -> bool {
        *self > Self::zero()
    }
}

impl Scalar for f64 {
    fn from_f64(x: f64) -> Self {
        x
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn abs_val(&self) -> Self {
        self.abs()
    }
}

impl Scalar for BigRational {
    fn from_f64(x: f64) -> Self {
        rational_from_f64(x)
    }
    fn to_f64(&self) -> f64 {
        rational_to_f64(self)
    }
    fn abs_val(&self) -> Self {
        self.abs()
    }
}

/// Exact conversion of a finite float. Panics on NaN or infinity, which never
/// reach this point because graph and function constructors reject them.
pub fn rational_from_f64(x: f64) -> BigRational {
    BigRational::from_float(x).unwrap_or_else(|| panic!("non-finite value {x} has no rational form"))
}

pub fn rational_to_f64(x: &BigRational) -> f64 {
    if let Some(v) = num_traits::ToPrimitive::to_f64(x) {
        if v.is_finite() {
            return v;
        }
    }
    // numerator/denominator too large for direct conversion: scale down first
    let n = x.numer();
    let d = x.denom();
    let shift = n.bits().max(d.bits()).saturating_sub(1000) as usize;
    let n = n >> shift;
    let d = d >> shift;
    match (n.to_f64(), d.to_f64()) {
        (Some(a), Some(b)) if b != 0.0 => a / b,
        _ => f64::NAN,
    }
}

pub fn rational(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Exact `x^(num/den)` when the result is rational, `None` otherwise.
pub fn rational_pow(x: &BigRational, num: u32, den: u32) -> Option<BigRational> {
    if x.is_negative() {
        return None;
    }
    if x.is_zero() {
        return Some(BigRational::zero());
    }
    let root_n = exact_int_root(x.numer(), den)?;
    let root_d = exact_int_root(x.denom(), den)?;
    let base = BigRational::new(root_n, root_d);
    Some(num_traits::pow(base, num as usize))
}

fn exact_int_root(n: &BigInt, k: u32) -> Option<BigInt> {
    if k == 1 {
        return Some(n.clone());
    }
    let r = n.nth_root(k);
    if num_traits::pow(r.clone(), k as usize) == *n {
        Some(r)
    } else {
        None
    }
}

/// Writes `p` as a reduced fraction with a small denominator, if it is one.
pub fn small_fraction(p: f64, max_den: u32) -> Option<(u32, u32)> {
    for den in 1..=max_den {
        let num = (p * den as f64).round();
        if num >= 0.0 && (num / den as f64 - p).abs() <= 1e-12 * p.abs().max(1.0) {
            let g = gcd(num as u64, den as u64);
            return Some(((num as u64 / g) as u32, (den as u64 / g) as u32));
        }
    }
    None
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a.max(1)
}

/// Best rational approximation with denominator at most `max_den`
/// (continued-fraction convergents).
pub fn snap_to_rational(x: f64, max_den: i64) -> BigRational {
    if !x.is_finite() {
        return BigRational::zero();
    }
    let neg = x < 0.0;
    let mut v = x.abs();
    let (mut p0, mut q0, mut p1, mut q1) = (0i128, 1i128, 1i128, 0i128);
    for _ in 0..64 {
        let a = v.floor();
        if a > 1e18 {
            break;
        }
        let a_i = a as i128;
        let p2 = a_i * p1 + p0;
        let q2 = a_i * q1 + q0;
        if q2 > max_den as i128 {
            break;
        }
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
        let frac = v - a;
        if frac < 1e-15 {
            break;
        }
        v = 1.0 / frac;
    }
    if q1 == 0 {
        return BigRational::zero();
    }
    let r = BigRational::new(BigInt::from(p1), BigInt::from(q1));
    if neg {
        -r
    } else {
        r
    }
}
