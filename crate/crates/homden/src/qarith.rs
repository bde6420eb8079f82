//! Small helpers for exact rational arithmetic.
//!
//! Rationals are `num_rational::BigRational` throughout. The wire format for
//! a rational is the reduced string `"p/q"`, or just `"p"` when the
//! denominator is one.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rat = num_rational::BigRational;

/// `n/d` as a rational. Panics on `d == 0`; use only with literal arguments.
pub fn rat(n: i64, d: i64) -> Rat {
    assert!(d != 0, "zero denominator");
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> Rat {
    Rat::from(BigInt::from(n))
}

pub fn rat_biguint(n: BigUint) -> Rat {
    Rat::from(BigInt::from(n))
}

/// Parses `"p/q"` or `"p"`, with optional sign on the numerator.
pub fn parse_rat(s: &str) -> Result<Rat> {
    let bad = |why: &str| Error::invalid("rational", format!("{s:?}: {why}"));
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n, Some(d)),
        None => (s, None),
    };
    let n: BigInt = num
        .trim()
        .parse()
        .map_err(|_| bad("numerator is not an integer"))?;
    let d: BigInt = match den {
        Some(d) => d
            .trim()
            .parse()
            .map_err(|_| bad("denominator is not an integer"))?,
        None => BigInt::one(),
    };
    if d.is_zero() {
        return Err(bad("zero denominator"));
    }
    Ok(Rat::new(n, d))
}

/// Reduced `"p/q"` form, or `"p"` when the denominator is one.
pub fn format_rat(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses a decimal or scientific literal such as `0.5`, `1e-9`, `2.5e-3`,
/// or a plain rational `p/q`, into an exact rational.
pub fn parse_decimal_rat(s: &str) -> Result<Rat> {
    let s = s.trim();
    if s.contains('/') {
        return parse_rat(s);
    }
    let bad = || Error::invalid("decimal", format!("{s:?}"));
    let (mantissa, exp10) = match s.split_once(['e', 'E']) {
        Some((m, e)) => (m, e.parse::<i64>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (int_part, frac_part) = match mantissa.split_once('.') {
        Some((i, f)) => (i, f),
        None => (mantissa, ""),
    };
    let digits = format!("{int_part}{frac_part}");
    if digits.is_empty() || digits == "-" || digits == "+" {
        return Err(bad());
    }
    let n: BigInt = digits.parse().map_err(|_| bad())?;
    let shift = exp10 - frac_part.len() as i64;
    let ten = BigInt::from(10u8);
    let pow = ten.pow(shift.unsigned_abs() as u32);
    Ok(if shift >= 0 {
        Rat::from(n * pow)
    } else {
        Rat::new(n, pow)
    })
}

pub fn factorial(n: usize) -> BigUint {
    let mut acc = BigUint::one();
    for i in 2..=n {
        acc *= BigUint::from(i);
    }
    acc
}

pub fn binomial(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    num_integer::binomial(BigUint::from(n), BigUint::from(k))
}

pub fn binomial_rat(n: usize, k: usize) -> Rat {
    rat_biguint(binomial(n, k))
}

/// Raises a nonnegative rational to an integer power, `0^0 = 1`.
pub fn pow_rat_int(base: &Rat, exp: i64) -> Rat {
    if exp == 0 {
        return Rat::one();
    }
    if base.is_zero() {
        assert!(exp > 0, "zero base with negative exponent");
        return Rat::zero();
    }
    let mag = num_traits::Pow::pow(base, exp.unsigned_abs() as u64);

    if exp < 0 {
        mag.recip()
    } else {
        mag
    }
}

/// Exact `q`-th root of a nonnegative rational, if one exists.
pub fn exact_nth_root(value: &Rat, q: u64) -> Result<Rat> {
    assert!(q >= 1);
    if value.is_negative() {
        return Err(Error::invalid("root", "negative radicand"));
    }
    if q == 1 || value.is_zero() || value.is_one() {
        return Ok(value.clone());
    }
    let n = value.numer().magnitude();
    let d = value.denom().magnitude();
    let rn = n.nth_root(q as u32);
    let rd = d.nth_root(q as u32);
    if &rn.pow(q as u32) == n && &rd.pow(q as u32) == d {
        Ok(Rat::new(BigInt::from(rn), BigInt::from(rd)))
    } else {
        Err(Error::NotAPower {
            value: format_rat(value),
            degree: q,
        })
    }
}

/// `exp` as an `i64`; panics if out of range (exponents here are small).
pub fn rat_exp_parts(exp: &Rat) -> (i64, u64) {
    let p = exp
        .numer()
        .to_i64()
        .expect("exponent numerator out of range");
    let q = exp
        .denom()
        .to_u64()
        .expect("exponent denominator out of range");
    (p, q)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format_round_trip() {
        for s in ["3/4", "-2/7", "5", "0"] {
            let r = parse_rat(s).unwrap();
            assert_eq!(format_rat(&r), s);
        }
        assert_eq!(format_rat(&parse_rat("6/8").unwrap()), "3/4");
        assert!(parse_rat("1/0").is_err());
        assert!(parse_rat("x").is_err());
    }

    #[test]
    fn decimal_parsing() {
        assert_eq!(parse_decimal_rat("0.5").unwrap(), rat(1, 2));
        assert_eq!(parse_decimal_rat("1e-9").unwrap(), rat(1, 1_000_000_000));
        assert_eq!(parse_decimal_rat("2.5e-3").unwrap(), rat(1, 400));
        assert_eq!(parse_decimal_rat("25e2").unwrap(), rat_int(2500));
        assert_eq!(parse_decimal_rat("3/4").unwrap(), rat(3, 4));
        assert!(parse_decimal_rat("").is_err());
    }

    #[test]
    fn binomials_and_factorials() {
        assert_eq!(binomial(5, 3), BigUint::from(10u32));
        assert_eq!(binomial(3, 5), BigUint::zero());
        assert_eq!(binomial(0, 0), BigUint::from(1u32));
        assert_eq!(factorial(5), BigUint::from(120u32));
    }

    #[test]
    fn integer_powers() {
        assert_eq!(pow_rat_int(&rat(2, 3), 3), rat(8, 27));
        assert_eq!(pow_rat_int(&rat(2, 3), -2), rat(9, 4));
        assert_eq!(pow_rat_int(&rat(0, 1), 0), rat_int(1));
        assert_eq!(pow_rat_int(&rat(0, 1), 5), rat_int(0));
    }

    #[test]
    fn exact_roots() {
        assert_eq!(exact_nth_root(&rat(9, 16), 2).unwrap(), rat(3, 4));
        assert_eq!(exact_nth_root(&rat(8, 27), 3).unwrap(), rat(2, 3));
        assert!(exact_nth_root(&rat(1, 2), 2).is_err());
    }
}
