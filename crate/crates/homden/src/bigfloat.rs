//! Fixed-precision binary floating point over big integers.
//!
//! A value is `mant * 2^exp` with `2^(bits-1) <= |mant| < 2^bits` (or zero).
//! Every operation rounds to nearest with ties away from zero using pure
//! integer arithmetic, so results are deterministic across platforms. The
//! operation set is what the density evaluators need: field arithmetic,
//! integer powers, and rational powers computed through integer `q`th roots
//! rather than exp/log.

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::qarith::{rat_exp_parts, Rat};

pub const DEFAULT_PRECISION_BITS: u32 = 128;

#[derive(Clone, Debug)]
pub struct BigFloat {
    mant: BigInt,
    exp: i64,
    bits: u32,
}

/// Rounds `mag` down by `shift` bits, to nearest, ties away from zero.
fn round_shift(mag: &BigUint, shift: u64) -> BigUint {
    if shift == 0 {
        return mag.clone();
    }
    let kept = mag >> shift;
    let dropped = mag - (&kept << shift);
    let half = BigUint::one() << (shift - 1);
    if dropped >= half {
        kept + 1u32
    } else {
        kept
    }
}

impl BigFloat {
    pub fn zero(bits: u32) -> Self {
        BigFloat {
            mant: BigInt::zero(),
            exp: 0,
            bits,
        }
    }

    pub fn one(bits: u32) -> Self {
        BigFloat::from_parts(BigInt::one(), 0, bits)
    }

    pub fn precision_bits(&self) -> u32 {
        self.bits
    }

    /// Builds `mant * 2^exp` normalized to `bits` of precision.
    pub fn from_parts(mant: BigInt, mut exp: i64, bits: u32) -> Self {
        assert!(bits >= 8, "precision too small");
        if mant.is_zero() {
            return BigFloat::zero(bits);
        }
        let sign = mant.sign();
        let mut mag = mant.magnitude().clone();
        let len = mag.bits();
        let bits64 = bits as u64;
        if len > bits64 {
            let shift = len - bits64;
            mag = round_shift(&mag, shift);
            exp += shift as i64;
            if mag.bits() > bits64 {
                // Carry out of the top bit; mag is exactly 2^bits here.
                mag >>= 1u8;
                exp += 1;
            }
        } else if len < bits64 {
            let shift = bits64 - len;
            mag <<= shift;
            exp -= shift as i64;
        }
        BigFloat {
            mant: BigInt::from_biguint(sign, mag),
            exp,
            bits,
        }
    }

    pub fn from_rational(value: &Rat, bits: u32) -> Self {
        if value.is_zero() {
            return BigFloat::zero(bits);
        }
        let sign = if value.is_negative() {
            Sign::Minus
        } else {
            Sign::Plus
        };
        let n = value.numer().magnitude();
        let d = value.denom().magnitude();
        let want = bits as i64 + 2;
        let have = n.bits() as i64 - d.bits() as i64;
        let k = (want - have).max(0) as u64;
        let mut q = (n << k) / d;
        if &(&q * d) != &(n << k) {
            q |= BigUint::one();
        }
        BigFloat::from_parts(BigInt::from_biguint(sign, q), -(k as i64), bits)
    }

    /// The exact rational this float represents.
    pub fn to_rational(&self) -> Rat {
        if self.exp >= 0 {
            Rat::from(&self.mant << self.exp as u64)
        } else {
            Rat::new(
                self.mant.clone(),
                BigInt::one() << (-self.exp) as u64,
            )
        }
    }

    pub fn is_zero(&self) -> bool {
        self.mant.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.mant.is_negative()
    }

    pub fn neg(&self) -> Self {
        BigFloat {
            mant: -&self.mant,
            exp: self.exp,
            bits: self.bits,
        }
    }

    pub fn abs(&self) -> Self {
        BigFloat {
            mant: self.mant.abs(),
            exp: self.exp,
            bits: self.bits,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let bits = self.bits.max(other.bits);
        if self.is_zero() {
            return BigFloat::from_parts(other.mant.clone(), other.exp, bits);
        }
        if other.is_zero() {
            return BigFloat::from_parts(self.mant.clone(), self.exp, bits);
        }
        let (hi, lo) = if self.exp >= other.exp {
            (self, other)
        } else {
            (other, self)
        };
        let diff = (hi.exp - lo.exp) as u64;
        // Beyond 2 * bits + 4 the addend cannot move the rounded result.
        if diff > 2 * bits as u64 + 4 {
            return BigFloat::from_parts(hi.mant.clone(), hi.exp, bits);
        }
        let sum = (&hi.mant << diff) + &lo.mant;
        BigFloat::from_parts(sum, lo.exp, bits)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let bits = self.bits.max(other.bits);
        BigFloat::from_parts(&self.mant * &other.mant, self.exp + other.exp, bits)
    }

    pub fn div(&self, other: &Self) -> Self {
        assert!(!other.is_zero(), "division by zero");
        let bits = self.bits.max(other.bits);
        if self.is_zero() {
            return BigFloat::zero(bits);
        }
        let sign = self.mant.sign() * other.mant.sign();
        let k = bits as u64 + 2;
        let num = self.mant.magnitude() << k;
        let den = other.mant.magnitude();
        let mut q = &num / den;
        if &(&q * den) != &num {
            q |= BigUint::one();
        }
        BigFloat::from_parts(
            BigInt::from_biguint(sign, q),
            self.exp - other.exp - k as i64,
            bits,
        )
    }

    pub fn pow_u(&self, n: u64) -> Self {
        let mut result = BigFloat::one(self.bits);
        let mut base = self.clone();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                result = result.mul(&base);
            }
            n >>= 1;
            if n > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    /// `q`th root of a nonnegative value, rounded to precision.
    pub fn root(&self, q: u64) -> Self {
        assert!(q >= 1);
        assert!(!self.is_negative(), "root of negative value");
        if self.is_zero() || q == 1 {
            return self.clone();
        }
        let qi = q as i64;
        let v = self.exp.rem_euclid(qi);
        let u = (self.exp - v) / qi;
        let guard = self.bits as u64 + 2;
        let scaled = self.mant.magnitude() << (v as u64 + q * guard);
        let mut w = scaled.nth_root(q as u32);
        if w.pow(q as u32) != scaled {
            w |= BigUint::one();
        }
        BigFloat::from_parts(BigInt::from(w), u - guard as i64, self.bits)
    }

    /// Raises a nonnegative value to a rational power (`0^0 = 1`).
    pub fn pow_rational(&self, exponent: &Rat) -> Result<Self> {
        let (p, q) = rat_exp_parts(exponent);
        if self.is_negative() {
            return Err(Error::invalid("power", "negative base"));
        }
        if p == 0 {
            return Ok(BigFloat::one(self.bits));
        }
        if self.is_zero() {
            if p > 0 {
                return Ok(BigFloat::zero(self.bits));
            }
            return Err(Error::invalid("power", "zero base with negative exponent"));
        }
        let root = self.root(q);
        let powed = root.pow_u(p.unsigned_abs());
        if p < 0 {
            Ok(BigFloat::one(self.bits).div(&powed))
        } else {
            Ok(powed)
        }
    }

    pub fn cmp_value(&self, other: &Self) -> std::cmp::Ordering {
        self.to_rational().cmp(&other.to_rational())
    }

    /// Scientific decimal form with `sig` significant digits.
    pub fn to_decimal(&self, sig: usize) -> String {
        assert!(sig >= 1);
        if self.is_zero() {
            return "0".to_string();
        }
        let neg = self.is_negative();
        let mag = self.mant.magnitude().clone();
        let log2 = self.exp + mag.bits() as i64 - 1;
        let mut dec_exp = (log2 as f64 * std::f64::consts::LOG10_2).floor() as i64;
        let (digits, final_exp) = loop {
            // digits = round(|x| * 10^(sig - 1 - dec_exp)) via exact integers.
            let t = sig as i64 - 1 - dec_exp;
            let mut num = mag.clone();
            let mut den = BigUint::one();
            if self.exp >= 0 {
                num <<= self.exp as u64;
            } else {
                den <<= (-self.exp) as u64;
            }
            let ten = BigUint::from(10u8);
            if t >= 0 {
                num *= ten.pow(t as u32);
            } else {
                den *= ten.pow((-t) as u32);
            }
            let rounded = (num * 2u8 + &den) / (den * 2u8);
            let lo = BigUint::from(10u8).pow(sig as u32 - 1);
            let hi = BigUint::from(10u8).pow(sig as u32);
            if rounded < lo {
                dec_exp -= 1;
            } else if rounded >= hi {
                dec_exp += 1;
            } else {
                break (rounded.to_string(), dec_exp);
            }
        };
        let mut out = String::new();
        if neg {
            out.push('-');
        }
        out.push_str(&digits[..1]);
        if digits.len() > 1 {
            out.push('.');
            out.push_str(&digits[1..]);
        }
        out.push('e');
        out.push_str(&final_exp.to_string());
        out
    }

    /// Nearest `f64`, for display convenience only.
    pub fn to_f64_lossy(&self) -> f64 {
        let r = self.to_rational();
        r.numer().to_f64().unwrap_or(f64::NAN) / r.denom().to_f64().unwrap_or(f64::NAN)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qarith::{rat, rat_int};

    const B: u32 = 128;

    fn close(a: &BigFloat, r: &Rat, tol_exp: i64) {
        let diff = (a.to_rational() - r).abs();
        let tol = Rat::new(BigInt::one(), BigInt::one() << tol_exp.unsigned_abs() as u64);
        assert!(
            diff <= tol * r.abs().max(Rat::one()),
            "difference {} too large",
            diff
        );
    }

    #[test]
    fn dyadic_values_are_exact() {
        let x = BigFloat::from_rational(&rat(3, 4), B);
        assert_eq!(x.to_rational(), rat(3, 4));
        let y = BigFloat::from_rational(&rat(-5, 8), B);
        assert_eq!(y.to_rational(), rat(-5, 8));
    }

    #[test]
    fn arithmetic_matches_rationals() {
        let a = BigFloat::from_rational(&rat(1, 3), B);
        let b = BigFloat::from_rational(&rat(2, 7), B);
        close(&a.add(&b), &rat(13, 21), 120);
        close(&a.sub(&b), &rat(1, 21), 120);
        close(&a.mul(&b), &rat(2, 21), 120);
        close(&a.div(&b), &rat(7, 6), 120);
        close(&a.pow_u(5), &rat(1, 243), 118);
    }

    #[test]
    fn roots_of_exact_powers() {
        let x = BigFloat::from_rational(&rat(9, 16), B);
        assert_eq!(x.root(2).to_rational(), rat(3, 4));
        let c = BigFloat::from_rational(&rat(8, 27), B);
        close(&c.root(3), &rat(2, 3), 126);
    }

    #[test]
    fn rational_powers() {
        let x = BigFloat::from_rational(&rat(4, 9), B);
        close(&x.pow_rational(&rat(3, 2)).unwrap(), &rat(8, 27), 120);
        close(&x.pow_rational(&rat(-1, 2)).unwrap(), &rat(3, 2), 120);
        assert_eq!(
            x.pow_rational(&rat_int(0)).unwrap().to_rational(),
            rat_int(1)
        );
        let zero = BigFloat::zero(B);
        assert!(zero.pow_rational(&rat(1, 2)).unwrap().is_zero());
        assert!(zero.pow_rational(&rat(-1, 2)).is_err());
    }

    #[test]
    fn tiny_addend_is_absorbed() {
        let one = BigFloat::one(B);
        let tiny = BigFloat::from_parts(BigInt::one(), -400, B);
        assert_eq!(one.add(&tiny).to_rational(), rat_int(1));
    }

    #[test]
    fn decimal_formatting() {
        let x = BigFloat::from_rational(&rat(1, 8), B);
        assert_eq!(x.to_decimal(3), "1.25e-1");
        let y = BigFloat::from_rational(&rat_int(1000), B);
        assert_eq!(y.to_decimal(2), "1.0e3");
        let z = BigFloat::from_rational(&rat(-1, 3), B);
        assert!(z.to_decimal(5).starts_with("-3.3333e-1"));
        assert_eq!(BigFloat::zero(B).to_decimal(5), "0");
        // 0.999996 rounds up across a power of ten at 5 digits.
        let w = BigFloat::from_rational(&rat(999_996, 1_000_000), B);
        assert_eq!(w.to_decimal(5), "1.0000e0");
    }

    #[test]
    fn comparisons() {
        let a = BigFloat::from_rational(&rat(1, 3), B);
        let b = BigFloat::from_rational(&rat(1, 2), B);
        assert_eq!(a.cmp_value(&b), std::cmp::Ordering::Less);
        assert_eq!(b.cmp_value(&a), std::cmp::Ordering::Greater);
    }
}
