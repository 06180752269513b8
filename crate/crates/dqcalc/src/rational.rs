//! Exact rationals and their canonical string form.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::Error;

pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qf(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn zero() -> Q {
    Q::zero()
}

pub fn one() -> Q {
    Q::one()
}

pub fn factorial(n: usize) -> Q {
    let mut acc = BigInt::one();
    for k in 2..=n {
        acc *= BigInt::from(k);
    }
    Q::from_integer(acc)
}

pub fn inv_factorial(n: usize) -> Q {
    factorial(n).recip()
}

pub fn binomial(n: u32, k: u32) -> Q {
    if k > n {
        return zero();
    }
    let mut acc = BigInt::one();
    for i in 0..k {
        acc *= BigInt::from(n - i);
        acc /= BigInt::from(i + 1);
    }
    Q::from_integer(acc)
}

/// `(-1)^k` as a rational.
pub fn sign(k: i64) -> Q {
    if k.rem_euclid(2) == 0 {
        one()
    } else {
        -one()
    }
}

/// Canonical text form `p/q`, denominator always present.
pub fn format_q(x: &Q) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

/// Accepts `p/q`, `p`, with optional sign and surrounding whitespace.
pub fn parse_q(s: &str) -> Result<Q, Error> {
    let t = s.trim();
    let bad = || Error::Parse(format!("not a rational: {s:?}"));
    let (n, d) = match t.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (t, "1"),
    };
    let n: BigInt = n.parse().map_err(|_| bad())?;
    let d: BigInt = d.parse().map_err(|_| bad())?;
    if d.is_zero() {
        return Err(bad());
    }
    Ok(Q::new(n, d))
}

pub fn to_i64(x: &Q) -> Option<i64> {
    if x.is_integer() {
        x.numer().to_i64()
    } else {
        None
    }
}

pub fn is_neg(x: &Q) -> bool {
    x.is_negative()
}
