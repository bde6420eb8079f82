//! Arithmetic modes and the numeric values densities are reported in.
//!
//! Exact mode works in arbitrary-precision rationals and only permits
//! integer exponents, unless power-compatible roots are enabled, in which
//! case a fractional power `x^(p/q)` succeeds exactly when `x` has an exact
//! `q`th root (evaluators arrange their inputs so that it does). Float mode
//! works in [`BigFloat`] at a stated mantissa precision.

use std::cmp::Ordering;
use std::collections::HashMap;

use num_traits::{One, Signed, Zero};

use crate::bigfloat::{BigFloat, DEFAULT_PRECISION_BITS};
use crate::error::{Error, Result};
use crate::qarith::{exact_nth_root, format_rat, pow_rat_int, rat_exp_parts, Rat};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EvalMode {
    Exact { power_compatible: bool },
    Float { precision_bits: u32 },
}

impl EvalMode {
    pub fn exact() -> Self {
        EvalMode::Exact {
            power_compatible: false,
        }
    }

    pub fn exact_with_roots() -> Self {
        EvalMode::Exact {
            power_compatible: true,
        }
    }

    pub fn float_default() -> Self {
        EvalMode::Float {
            precision_bits: DEFAULT_PRECISION_BITS,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, EvalMode::Exact { .. })
    }
}

/// A density (or margin) computed in one of the two arithmetic modes.
#[derive(Clone, Debug)]
pub enum DensityValue {
    Exact(Rat),
    Float(BigFloat),
}

impl DensityValue {
    pub fn zero(mode: EvalMode) -> Self {
        match mode {
            EvalMode::Exact { .. } => DensityValue::Exact(Rat::zero()),
            EvalMode::Float { precision_bits } => DensityValue::Float(BigFloat::zero(precision_bits)),
        }
    }

    pub fn one(mode: EvalMode) -> Self {
        match mode {
            EvalMode::Exact { .. } => DensityValue::Exact(Rat::one()),
            EvalMode::Float { precision_bits } => DensityValue::Float(BigFloat::one(precision_bits)),
        }
    }

    pub fn from_rat(r: &Rat, mode: EvalMode) -> Self {
        match mode {
            EvalMode::Exact { .. } => DensityValue::Exact(r.clone()),
            EvalMode::Float { precision_bits } => {
                DensityValue::Float(BigFloat::from_rational(r, precision_bits))
            }
        }
    }

    pub fn exact(r: Rat) -> Self {
        DensityValue::Exact(r)
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, DensityValue::Exact(_))
    }

    pub fn is_zero(&self) -> bool {
        match self {
            DensityValue::Exact(r) => r.is_zero(),
            DensityValue::Float(f) => f.is_zero(),
        }
    }

    pub fn is_negative(&self) -> bool {
        match self {
            DensityValue::Exact(r) => r.is_negative(),
            DensityValue::Float(f) => f.is_negative(),
        }
    }

    fn float_bits(&self) -> Option<u32> {
        match self {
            DensityValue::Exact(_) => None,
            DensityValue::Float(f) => Some(f.precision_bits()),
        }
    }

    fn as_float(&self, bits: u32) -> BigFloat {
        match self {
            DensityValue::Exact(r) => BigFloat::from_rational(r, bits),
            DensityValue::Float(f) => f.clone(),
        }
    }

    /// Mixed-mode operations promote the exact side to float.
    fn binop(
        &self,
        other: &Self,
        exact_op: impl FnOnce(&Rat, &Rat) -> Rat,
        float_op: impl FnOnce(&BigFloat, &BigFloat) -> BigFloat,
    ) -> Self {
        match (self, other) {
            (DensityValue::Exact(a), DensityValue::Exact(b)) => DensityValue::Exact(exact_op(a, b)),
            _ => {
                let bits = self
                    .float_bits()
                    .or(other.float_bits())
                    .unwrap_or(DEFAULT_PRECISION_BITS);
                DensityValue::Float(float_op(&self.as_float(bits), &other.as_float(bits)))
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.binop(other, |a, b| a + b, |a, b| a.add(b))
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.binop(other, |a, b| a - b, |a, b| a.sub(b))
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.binop(other, |a, b| a * b, |a, b| a.mul(b))
    }

    pub fn div(&self, other: &Self) -> Self {
        self.binop(other, |a, b| a / b, |a, b| a.div(b))
    }

    pub fn abs(&self) -> Self {
        match self {
            DensityValue::Exact(r) => DensityValue::Exact(r.abs()),
            DensityValue::Float(f) => DensityValue::Float(f.abs()),
        }
    }

    pub fn neg(&self) -> Self {
        match self {
            DensityValue::Exact(r) => DensityValue::Exact(-r),
            DensityValue::Float(f) => DensityValue::Float(f.neg()),
        }
    }

    /// Raises to a rational power under the rules of the value's mode.
    pub fn pow(&self, exponent: &Rat) -> Result<Self> {
        self.pow_mode(exponent, None)
    }

    fn pow_mode(&self, exponent: &Rat, power_compatible: Option<bool>) -> Result<Self> {
        match self {
            DensityValue::Float(f) => Ok(DensityValue::Float(f.pow_rational(exponent)?)),
            DensityValue::Exact(r) => {
                let (p, q) = rat_exp_parts(exponent);
                if q == 1 {
                    return Ok(DensityValue::Exact(pow_rat_int(r, p)));
                }
                if power_compatible == Some(false) {
                    return Err(Error::FractionalExponent {
                        exponent: format_rat(exponent),
                    });
                }
                let root = exact_nth_root(r, q)?;
                Ok(DensityValue::Exact(pow_rat_int(&root, p)))
            }
        }
    }

    /// The exact rational behind the value. Float mantissas are dyadic, so
    /// this is lossless in both modes.
    pub fn to_rational(&self) -> Rat {
        match self {
            DensityValue::Exact(r) => r.clone(),
            DensityValue::Float(f) => f.to_rational(),
        }
    }

    pub fn cmp_value(&self, other: &Self) -> Ordering {
        self.to_rational().cmp(&other.to_rational())
    }

    /// Wire form: `"p/q"` for exact values, `"f<bits>:<decimal>"` for floats.
    pub fn to_wire(&self) -> String {
        match self {
            DensityValue::Exact(r) => format_rat(r),
            DensityValue::Float(f) => {
                let digits = (f.precision_bits() as f64 * std::f64::consts::LOG10_2).ceil() as usize + 2;
                format!("f{}:{}", f.precision_bits(), f.to_decimal(digits))
            }
        }
    }
}

/// Shared evaluation context: mode, pow memoization, and the term cap.
pub struct Evaluator {
    mode: EvalMode,
    pow_cache: HashMap<(Rat, Rat), DensityValue>,
    term_cap: u128,
}

pub const DEFAULT_TERM_CAP: u128 = 100_000_000;

impl Evaluator {
    pub fn new(mode: EvalMode, term_cap: u128) -> Self {
        Evaluator {
            mode,
            pow_cache: HashMap::new(),
            term_cap,
        }
    }

    pub fn with_mode(mode: EvalMode) -> Self {
        Evaluator::new(mode, DEFAULT_TERM_CAP)
    }

    pub fn mode(&self) -> EvalMode {
        self.mode
    }

    pub fn check_terms(&self, terms: u128) -> Result<()> {
        if terms > self.term_cap {
            return Err(Error::InfeasibleSize {
                terms,
                cap: self.term_cap,
            });
        }
        Ok(())
    }

    pub fn from_rat(&self, r: &Rat) -> DensityValue {
        DensityValue::from_rat(r, self.mode)
    }

    /// `base^exponent` for a rational base, memoized per (base, exponent).
    pub fn pow_base(&mut self, base: &Rat, exponent: &Rat) -> Result<DensityValue> {
        if exponent.is_one() {
            return Ok(self.from_rat(base));
        }
        let key = (base.clone(), exponent.clone());
        if let Some(v) = self.pow_cache.get(&key) {
            return Ok(v.clone());
        }
        let power_compatible = match self.mode {
            EvalMode::Exact { power_compatible } => Some(power_compatible),
            EvalMode::Float { .. } => None,
        };
        let v = self.from_rat(base).pow_mode(exponent, power_compatible)?;
        self.pow_cache.insert(key, v.clone());
        Ok(v)
    }

    /// `value^exponent` for a derived value (not memoized): exact integer
    /// powers always work, fractional exact powers only when the mode
    /// allows roots and the value happens to be a perfect power.
    pub fn pow_value(&self, value: &DensityValue, exponent: &Rat) -> Result<DensityValue> {
        let power_compatible = match self.mode {
            EvalMode::Exact { power_compatible } => Some(power_compatible),
            EvalMode::Float { .. } => None,
        };
        value.pow_mode(exponent, power_compatible)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qarith::{rat, rat_int};

    #[test]
    fn exact_integer_powers() {
        let v = DensityValue::exact(rat(2, 3));
        assert_eq!(v.pow(&rat_int(3)).unwrap().to_rational(), rat(8, 27));
    }

    #[test]
    fn exact_fractional_power_requires_roots() {
        let mut plain = Evaluator::with_mode(EvalMode::exact());
        let err = plain.pow_base(&rat(1, 2), &rat(1, 2)).unwrap_err();
        assert!(matches!(err, Error::FractionalExponent { .. }));

        let mut compat = Evaluator::with_mode(EvalMode::exact_with_roots());
        let v = compat.pow_base(&rat(9, 16), &rat(1, 2)).unwrap();
        assert_eq!(v.to_rational(), rat(3, 4));
        let err = compat.pow_base(&rat(1, 2), &rat(1, 2)).unwrap_err();
        assert!(matches!(err, Error::NotAPower { .. }));
    }

    #[test]
    fn float_mode_powers() {
        let mut ev = Evaluator::with_mode(EvalMode::float_default());
        let v = ev.pow_base(&rat(4, 9), &rat(1, 2)).unwrap();
        let diff = (v.to_rational() - rat(2, 3)).abs();
        assert!(diff < rat(1, 1_000_000_000));
    }

    #[test]
    fn mixed_mode_promotes_to_float() {
        let e = DensityValue::exact(rat(1, 3));
        let f = DensityValue::from_rat(&rat(1, 6), EvalMode::float_default());
        let s = e.add(&f);
        assert!(!s.is_exact());
        let diff = (s.to_rational() - rat(1, 2)).abs();
        assert!(diff < rat(1, 1_000_000_000));
    }

    #[test]
    fn wire_forms() {
        assert_eq!(DensityValue::exact(rat(3, 4)).to_wire(), "3/4");
        let f = DensityValue::from_rat(&rat(1, 8), EvalMode::float_default());
        let w = f.to_wire();
        assert!(w.starts_with("f128:1.25"), "{w}");
    }

    #[test]
    fn term_cap_enforced() {
        let ev = Evaluator::new(EvalMode::exact(), 100);
        assert!(ev.check_terms(100).is_ok());
        assert!(matches!(
            ev.check_terms(101),
            Err(Error::InfeasibleSize { .. })
        ));
    }
}
