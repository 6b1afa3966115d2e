//! Scalar fields the moment and cumulant machinery is generic over.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

/// A field of values: exact rationals, doubles, or rational functions of `N`.
///
/// The trait deliberately has no cross-type conversions between
/// implementors, so exact and floating values cannot be mixed in one sum.
pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + Send
    + Sync
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_bigint(v: &BigInt) -> Self;

    fn from_rational(v: &BigRational) -> Self;

    fn from_i64(v: i64) -> Self {
        Self::from_bigint(&BigInt::from(v))
    }

    /// Sum in the given order. Floating implementations compensate.
    fn sum_ordered(values: &[Self]) -> Self {
        values.iter().fold(Self::zero(), |acc, v| acc + v.clone())
    }

    /// Row-major `n×n` product.
    fn matmul(a: &[Self], b: &[Self], n: usize) -> Vec<Self> {
        let mut out = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = Self::zero();
                for k in 0..n {
                    acc = acc + a[i * n + k].clone() * b[k * n + j].clone();
                }
                out.push(acc);
            }
        }
        out
    }
}

/// Integer numerators over the lcm of the denominators.
fn common_denominator(a: &[BigRational]) -> (Vec<BigInt>, BigInt) {
    let d = a.iter().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
    let nums = a.iter().map(|v| v.numer() * (&d / v.denom())).collect();
    (nums, d)
}

impl Scalar for BigRational {
    fn from_bigint(v: &BigInt) -> Self {
        BigRational::from_integer(v.clone())
    }

    fn from_rational(v: &BigRational) -> Self {
        v.clone()
    }

    fn matmul(a: &[Self], b: &[Self], n: usize) -> Vec<Self> {
        let (x, dx) = common_denominator(a);
        let (y, dy) = common_denominator(b);
        let d = dx * dy;
        let mut out = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = BigInt::zero();
                for k in 0..n {
                    acc += &x[i * n + k] * &y[k * n + j];
                }
                out.push(BigRational::new(acc, d.clone()));
            }
        }
        out
    }
}

impl Scalar for f64 {
    fn from_bigint(v: &BigInt) -> Self {
        v.to_f64().unwrap_or(f64::NAN)
    }

    fn from_rational(v: &BigRational) -> Self {
        v.to_f64().unwrap_or(f64::NAN)
    }

    fn sum_ordered(values: &[Self]) -> Self {
        neumaier_sum(values.iter().copied())
    }
}

/// Neumaier's compensated summation, evaluated strictly left to right.
pub fn neumaier_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Parse `"p/q"`, `"p"` or a decimal such as `"0.25"` into an exact rational.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().ok()?;
        let q: BigInt = q.trim().parse().ok()?;
        if q.is_zero() {
            return None;
        }
        return Some(BigRational::new(p, q));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let neg = int.starts_with('-');
        let digits = format!("{}{}", int.trim_start_matches(['-', '+']), frac);
        let num: BigInt = digits.parse().ok()?;
        let den = num_traits::pow(BigInt::from(10), frac.len());
        let r = BigRational::new(num, den);
        return Some(if neg { -r } else { r });
    }
    let p: BigInt = s.parse().ok()?;
    Some(BigRational::from_integer(p))
}

/// Render a rational as `"p/q"` (or `"p"` when integral).
pub fn format_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}
