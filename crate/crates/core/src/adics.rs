//! Truncated 2-adic integers.
//!
//! An [`Adic`] keeps the low `N` bits of an infinite binary expansion
//! `... + 4a_2 + 2a_1 + a_0`. All arithmetic is exact modulo `2^N`, and
//! negative integers embed through two's complement, which coincides with
//! their 2-adic expansion (`-1 = ...1111`).

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_PRECISION: u32 = 64;
pub const MAX_PRECISION: u32 = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AdicError {
    #[error("even 2-adic integers have no multiplicative inverse")]
    EvenNotInvertible,
    #[error("precision mismatch: {0} vs {1}")]
    PrecisionMismatch(u32, u32),
    #[error("precision must be in 1..=64, got {0}")]
    BadPrecision(u32),
    #[error("malformed hexadecimal 2-adic literal {0:?}")]
    BadLiteral(String),
}

/// The 2-adic valuation of a coordinate: `x = (2i+1) 2^k` has rank `k`.
/// Zero (at the retained precision) is unranked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Rank {
    Ranked(u32),
    Unranked,
}

impl Rank {
    pub fn value(self) -> Option<u32> {
        match self {
            Rank::Ranked(k) => Some(k),
            Rank::Unranked => None,
        }
    }

    pub fn is_ranked(self) -> bool {
        matches!(self, Rank::Ranked(_))
    }
}

impl PartialOrd for Rank {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Unranked compares above every finite rank.
impl Ord for Rank {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Rank::Ranked(a), Rank::Ranked(b)) => a.cmp(b),
            (Rank::Ranked(_), Rank::Unranked) => Ordering::Less,
            (Rank::Unranked, Rank::Ranked(_)) => Ordering::Greater,
            (Rank::Unranked, Rank::Unranked) => Ordering::Equal,
        }
    }
}

impl fmt::Display for Rank {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rank::Ranked(k) => write!(f, "{k}"),
            Rank::Unranked => f.write_str("unranked"),
        }
    }
}

/// A 2-adic integer truncated to `precision` bits.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Adic {
    bits: u64,
    precision: u32,
}

fn mask(precision: u32) -> u64 {
    if precision >= 64 {
        u64::MAX
    } else {
        (1u64 << precision) - 1
    }
}

impl Adic {
    pub fn new(bits: u64, precision: u32) -> Result<Self, AdicError> {
        if precision == 0 || precision > MAX_PRECISION {
            return Err(AdicError::BadPrecision(precision));
        }
        Ok(Adic {
            bits: bits & mask(precision),
            precision,
        })
    }

    /// Panics on a precision outside `1..=64`; use [`Adic::new`] for checked construction.
    pub fn from_bits(bits: u64, precision: u32) -> Self {
        Self::new(bits, precision).expect("precision in 1..=64")
    }

    pub fn from_i64(n: i64, precision: u32) -> Self {
        Self::from_bits(n as u64, precision)
    }

    pub fn zero(precision: u32) -> Self {
        Self::from_bits(0, precision)
    }

    pub fn one(precision: u32) -> Self {
        Self::from_bits(1, precision)
    }

    pub fn bits(self) -> u64 {
        self.bits
    }

    pub fn precision(self) -> u32 {
        self.precision
    }

    /// Coefficient of `2^i`; bits beyond the precision read as zero.
    pub fn bit(self, i: u32) -> bool {
        i < self.precision && (self.bits >> i) & 1 == 1
    }

    pub fn is_zero(self) -> bool {
        self.bits == 0
    }

    /// Two's-complement reading of the retained bits. Faithful for
    /// integers of magnitude below `2^(N-1)`.
    pub fn to_i64(self) -> i64 {
        if self.precision >= 64 {
            return self.bits as i64;
        }
        let shift = 64 - self.precision;
        ((self.bits << shift) as i64) >> shift
    }

    /// Low `m` bits as a residue in `0..2^m` (`m` capped at the precision).
    pub fn residue(self, m: u32) -> u64 {
        self.bits & mask(m.min(self.precision))
    }

    /// Same value with only the low `m` bits kept.
    pub fn truncate(self, m: u32) -> Self {
        Adic {
            bits: self.residue(m),
            precision: self.precision,
        }
    }

    pub fn valuation(self) -> Rank {
        if self.bits == 0 {
            Rank::Unranked
        } else {
            Rank::Ranked(self.bits.trailing_zeros())
        }
    }

    fn check(self, other: Adic) -> Result<(), AdicError> {
        if self.precision == other.precision {
            Ok(())
        } else {
            Err(AdicError::PrecisionMismatch(
                self.precision,
                other.precision,
            ))
        }
    }

    pub fn checked_add(self, other: Adic) -> Result<Adic, AdicError> {
        self.check(other)?;
        Ok(Adic::from_bits(
            self.bits.wrapping_add(other.bits),
            self.precision,
        ))
    }

    pub fn checked_sub(self, other: Adic) -> Result<Adic, AdicError> {
        self.check(other)?;
        Ok(Adic::from_bits(
            self.bits.wrapping_sub(other.bits),
            self.precision,
        ))
    }

    pub fn checked_mul(self, other: Adic) -> Result<Adic, AdicError> {
        self.check(other)?;
        Ok(Adic::from_bits(
            self.bits.wrapping_mul(other.bits),
            self.precision,
        ))
    }

    pub fn neg(self) -> Adic {
        Adic::from_bits(self.bits.wrapping_neg(), self.precision)
    }

    /// Multiplicative inverse of an odd 2-adic, by Newton iteration
    /// `y <- y (2 - a y)`, which doubles the number of correct bits per step.
    pub fn invert_odd(self) -> Result<Adic, AdicError> {
        if self.bits & 1 == 0 {
            return Err(AdicError::EvenNotInvertible);
        }
        let a = self.bits;
        // a*a == 1 mod 8 for every odd a: three correct bits to start.
        let mut y = a;
        for _ in 0..6 {
            y = y.wrapping_mul(2u64.wrapping_sub(a.wrapping_mul(y)));
        }
        Ok(Adic::from_bits(y, self.precision))
    }

    /// Shift metric `2^(1-v)` with `v = valuation(a - b)`: an upper bound on
    /// the fraction of bracket colors changed by the relative shift `a - b`.
    pub fn shift_metric(self, other: Adic) -> Result<f64, AdicError> {
        Ok(match self.checked_sub(other)?.valuation() {
            Rank::Unranked => 0.0,
            Rank::Ranked(v) => 2f64.powi(1 - v as i32),
        })
    }

    /// Lowercase hex, most significant retained bit first.
    pub fn to_hex(self) -> String {
        format!("{:#x}", self.bits)
    }

    pub fn from_hex(text: &str, precision: u32) -> Result<Adic, AdicError> {
        let digits = text
            .strip_prefix("0x")
            .or_else(|| text.strip_prefix("0X"))
            .ok_or_else(|| AdicError::BadLiteral(text.to_string()))?;
        let bits =
            u64::from_str_radix(digits, 16).map_err(|_| AdicError::BadLiteral(text.to_string()))?;
        if bits & !mask(precision.min(64)) != 0 {
            return Err(AdicError::BadLiteral(text.to_string()));
        }
        Adic::new(bits, precision)
    }
}

impl std::ops::Add for Adic {
    type Output = Adic;
    fn add(self, rhs: Adic) -> Adic {
        self.checked_add(rhs).expect("2-adic precision mismatch")
    }
}

impl std::ops::Sub for Adic {
    type Output = Adic;
    fn sub(self, rhs: Adic) -> Adic {
        self.checked_sub(rhs).expect("2-adic precision mismatch")
    }
}

impl std::ops::Mul for Adic {
    type Output = Adic;
    fn mul(self, rhs: Adic) -> Adic {
        self.checked_mul(rhs).expect("2-adic precision mismatch")
    }
}

impl std::ops::Neg for Adic {
    type Output = Adic;
    fn neg(self) -> Adic {
        Adic::neg(self)
    }
}

impl fmt::Debug for Adic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Adic({}/{})", self.to_hex(), self.precision)
    }
}

impl fmt::Display for Adic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

#[derive(Serialize, Deserialize)]
struct AdicRepr {
    value: String,
    precision: u32,
}

impl Serialize for Adic {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        AdicRepr {
            value: self.to_hex(),
            precision: self.precision,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Adic {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let repr = AdicRepr::deserialize(d)?;
        Adic::from_hex(&repr.value, repr.precision).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn a8(n: i64) -> Adic {
        Adic::from_i64(n, 8)
    }

    #[test]
    fn valuation_examples() {
        assert_eq!(a8(4).valuation(), Rank::Ranked(2));
        assert_eq!(a8(-2).bits(), 0b1111_1110);
        assert_eq!(a8(-2).valuation(), Rank::Ranked(1));
        assert_eq!(a8(0).valuation(), Rank::Unranked);
        assert_eq!(Adic::from_i64(256, 8).valuation(), Rank::Unranked);
    }

    #[test]
    fn minus_one_is_all_ones() {
        let m = -Adic::one(64);
        assert_eq!(m.bits(), u64::MAX);
        assert_eq!((-a8(1)).bits(), 0xff);
        assert!((a8(1) + -a8(1)).is_zero());
    }

    #[test]
    fn inverse_of_three_mod_32() {
        // brute force: the unique x in 0..32 with 3x = 1 mod 32
        let brute: Vec<u64> = (0..32u64).filter(|x| (3 * x) % 32 == 1).collect();
        assert_eq!(brute, vec![11]);
        let three = Adic::from_bits(3, 5);
        assert_eq!((three * Adic::from_bits(11, 5)).bits(), 1);
        assert_eq!(three.invert_odd().unwrap().bits(), 11);
        assert_eq!(Adic::one(5).invert_odd().unwrap().bits(), 1);
        assert_eq!(a8(2).invert_odd(), Err(AdicError::EvenNotInvertible));
    }

    #[test]
    fn metric_examples() {
        let z = Adic::zero(64);
        assert_eq!(z.shift_metric(z).unwrap(), 0.0);
        assert_eq!(z.shift_metric(Adic::from_i64(2, 64)).unwrap(), 1.0);
        assert_eq!(z.shift_metric(Adic::from_i64(8, 64)).unwrap(), 0.25);
    }

    #[test]
    fn precision_mismatch_is_reported() {
        assert_eq!(
            a8(1).checked_add(Adic::one(9)),
            Err(AdicError::PrecisionMismatch(8, 9))
        );
        assert!(Adic::new(0, 0).is_err());
        assert!(Adic::new(0, 65).is_err());
    }

    #[test]
    fn hex_round_trip() {
        let a = Adic::from_i64(-3, 12);
        assert_eq!(a.to_hex(), "0xffd");
        assert_eq!(Adic::from_hex("0xffd", 12).unwrap(), a);
        assert!(Adic::from_hex("ffd", 12).is_err());
        assert!(Adic::from_hex("0x1ffd", 12).is_err());
        let json = serde_json::to_string(&a).unwrap();
        assert_eq!(json, r#"{"value":"0xffd","precision":12}"#);
        assert_eq!(serde_json::from_str::<Adic>(&json).unwrap(), a);
    }

    proptest! {
        #[test]
        fn integer_round_trip(n in -(1i64 << 20)..=(1i64 << 20)) {
            let a = Adic::from_i64(n, 64);
            prop_assert_eq!(a.to_i64(), n);
            prop_assert_eq!((-a).to_i64(), -n);
            let b = Adic::from_i64(n, 24);
            prop_assert_eq!(b.to_i64(), n);
        }

        #[test]
        fn ultrametric(a: u64, b: u64, c: u64) {
            let (a, b, c) = (Adic::from_bits(a, 64), Adic::from_bits(b, 64), Adic::from_bits(c, 64));
            let ac = a.shift_metric(c).unwrap();
            let m = a.shift_metric(b).unwrap().max(b.shift_metric(c).unwrap());
            prop_assert!(ac <= m);
        }

        #[test]
        fn valuation_is_additive(a in 1u64..u64::MAX, b in 1u64..u64::MAX) {
            let (x, y) = (Adic::from_bits(a, 64), Adic::from_bits(b, 64));
            let (va, vb) = (x.valuation().value().unwrap(), y.valuation().value().unwrap());
            if va + vb < 64 {
                prop_assert_eq!((x * y).valuation(), Rank::Ranked(va + vb));
            }
        }

        #[test]
        fn odd_inverse(a: u64, precision in 1u32..=64) {
            let x = Adic::from_bits(a | 1, precision);
            prop_assert_eq!((x * x.invert_odd().unwrap()).bits(), 1);
        }

        #[test]
        fn ring_laws(a: u64, b: u64, c: u64, precision in 1u32..=64) {
            let (a, b, c) = (
                Adic::from_bits(a, precision),
                Adic::from_bits(b, precision),
                Adic::from_bits(c, precision),
            );
            prop_assert_eq!(a * (b + c), a * b + a * c);
            prop_assert_eq!(a + b, b + a);
            prop_assert!((a + -a).is_zero());
        }
    }
}
