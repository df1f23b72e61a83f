//! Base-q signed-digit representations and their compact normal form.
//!
//! A digit sequence `(a_0, ..., a_{m-1})` with every `a_i` in `[-q+1, q-1]`
//! denotes `sum a_i * q^i`, least significant digit first. A sequence is
//! compact when no two neighbouring digits both have magnitude `q-1` and no
//! two neighbouring nonzero digits have opposite signs. Every integer has
//! exactly one compact sequence without trailing zeros, and compact
//! sequences compare lexicographically from the top digit down.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CsdrError {
    #[error("base must be at least 2, got {0}")]
    BadBase(u32),
    #[error("digit {digit} at index {index} is outside [-{max}, {max}]")]
    DigitOutOfRange { index: usize, digit: i64, max: i64 },
    #[error("comparison needs compact operands")]
    NotCompact,
    #[error("operands use different bases ({0} and {1})")]
    BaseMismatch(u32, u32),
}

/// A finite signed-digit sequence in a fixed base.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SignedDigitSeq {
    base: u32,
    digits: Vec<i32>,
}

impl SignedDigitSeq {
    pub fn new(base: u32, digits: Vec<i32>) -> Result<Self, CsdrError> {
        if base < 2 {
            return Err(CsdrError::BadBase(base));
        }
        let max = i64::from(base) - 1;
        for (index, &d) in digits.iter().enumerate() {
            if i64::from(d).abs() > max {
                return Err(CsdrError::DigitOutOfRange {
                    index,
                    digit: i64::from(d),
                    max,
                });
            }
        }
        Ok(Self { base, digits })
    }

    /// The compact representation of `x`.
    pub fn from_integer(x: &BigInt, base: u32) -> Result<Self, CsdrError> {
        if base < 2 {
            return Err(CsdrError::BadBase(base));
        }
        let q = BigInt::from(base);
        let mut mag = x.abs();
        let mut standard = Vec::new();
        while !mag.is_zero() {
            let (quot, rem) = mag.div_rem(&q);
            standard.push(rem.to_i64().expect("digit fits"));
            mag = quot;
        }
        let mut digits = compact_standard(&standard, i64::from(base));
        if x.is_negative() {
            negate(&mut digits);
        }
        Ok(Self {
            base,
            digits: trimmed(digits),
        })
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn digits(&self) -> &[i32] {
        &self.digits
    }

    pub fn len(&self) -> usize {
        self.digits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.digits.is_empty()
    }

    pub fn value(&self) -> BigInt {
        digits_value(&self.digits, self.base)
    }

    pub fn is_compact(&self) -> bool {
        is_compact_digits(&self.digits, self.base)
    }

    /// The unique compact sequence of the same value, trailing zeros removed.
    pub fn make_compact(&self) -> SignedDigitSeq {
        let q = i64::from(self.base);
        let positive: Vec<i64> = self.digits.iter().map(|&d| i64::from(d.max(0))).collect();
        let negative: Vec<i64> = self.digits.iter().map(|&d| i64::from((-d).max(0))).collect();
        let (negated, magnitude) = match compare_standard(&positive, &negative) {
            Ordering::Less => (true, subtract_standard(&negative, &positive, q)),
            _ => (false, subtract_standard(&positive, &negative, q)),
        };
        let mut digits = compact_standard(&magnitude, q);
        if negated {
            negate(&mut digits);
        }
        SignedDigitSeq {
            base: self.base,
            digits: trimmed(digits),
        }
    }

    /// Orders two compact sequences by value using only their digits.
    pub fn compare(&self, other: &SignedDigitSeq) -> Result<Ordering, CsdrError> {
        if self.base != other.base {
            return Err(CsdrError::BaseMismatch(self.base, other.base));
        }
        if !self.is_compact() || !other.is_compact() {
            return Err(CsdrError::NotCompact);
        }
        Ok(compare_digits(&self.digits, &other.digits))
    }
}

/// Largest value of a compact sequence of length `m`: the top digit is
/// `q-1`, then `q-2` and `q-1` alternate downwards.
pub fn max_compact_value(m: usize, base: u32) -> BigInt {
    let q = BigInt::from(base);
    let mut total = BigInt::zero();
    let mut power = BigInt::from(1);
    for i in 0..m {
        let top_parity = (m - 1 - i).is_multiple_of(2);
        let digit = if top_parity { base - 1 } else { base - 2 };
        total += &power * digit;
        power *= &q;
    }
    total
}

pub(crate) fn digits_value(digits: &[i32], base: u32) -> BigInt {
    let q = BigInt::from(base);
    digits
        .iter()
        .rev()
        .fold(BigInt::zero(), |acc, &d| acc * &q + d)
}

pub(crate) fn is_compact_digits(digits: &[i32], base: u32) -> bool {
    let top = base as i32 - 1;
    digits.windows(2).all(|w| {
        let (a, b) = (w[0], w[1]);
        let saturated = a.abs() == top && b.abs() == top;
        let sign_clash = a != 0 && b != 0 && a.signum() != b.signum();
        !saturated && !sign_clash
    })
}

/// Lexicographic comparison from the most significant digit; shorter input
/// is padded with zeros.
pub(crate) fn compare_digits(a: &[i32], b: &[i32]) -> Ordering {
    let n = a.len().max(b.len());
    for i in (0..n).rev() {
        let x = a.get(i).copied().unwrap_or(0);
        let y = b.get(i).copied().unwrap_or(0);
        if x != y {
            return x.cmp(&y);
        }
    }
    Ordering::Equal
}

/// Compacts a sequence whose entries may exceed the digit range (sums of
/// several digit sequences). Trailing zeros are removed.
pub(crate) fn compact_from_wide(wide: &[i64], base: u32) -> Vec<i32> {
    let q = i64::from(base);
    let (negated, standard) = match carry_normalize(wide, q) {
        Some(s) => (false, s),
        None => {
            let flipped: Vec<i64> = wide.iter().map(|&d| -d).collect();
            (true, carry_normalize(&flipped, q).expect("negation is nonnegative"))
        }
    };
    let mut digits = compact_standard(&standard, q);
    if negated {
        negate(&mut digits);
    }
    trimmed(digits)
}

/// Standard base-q digits of a nonnegative wide sequence, or `None` if its
/// value is negative.
fn carry_normalize(wide: &[i64], q: i64) -> Option<Vec<i64>> {
    let mut out = Vec::with_capacity(wide.len() + 2);
    let mut carry = 0i64;
    for &d in wide {
        let t = d + carry;
        out.push(t.rem_euclid(q));
        carry = t.div_euclid(q);
    }
    if carry < 0 {
        return None;
    }
    while carry > 0 {
        out.push(carry % q);
        carry /= q;
    }
    Some(out)
}

fn compare_standard(a: &[i64], b: &[i64]) -> Ordering {
    let n = a.len().max(b.len());
    for i in (0..n).rev() {
        let x = a.get(i).copied().unwrap_or(0);
        let y = b.get(i).copied().unwrap_or(0);
        if x != y {
            return x.cmp(&y);
        }
    }
    Ordering::Equal
}

/// `a - b` for standard digit vectors with `a >= b`.
fn subtract_standard(a: &[i64], b: &[i64], q: i64) -> Vec<i64> {
    let mut out = Vec::with_capacity(a.len());
    let mut borrow = 0;
    for (i, &x) in a.iter().enumerate() {
        let mut t = x - b.get(i).copied().unwrap_or(0) - borrow;
        borrow = 0;
        if t < 0 {
            t += q;
            borrow = 1;
        }
        out.push(t);
    }
    debug_assert_eq!(borrow, 0);
    out
}

/// The two carry passes turning a standard base-q digit vector of length
/// `m` into a compact one of length `m + 1`.
pub(crate) fn compact_standard(a: &[i64], q: i64) -> Vec<i32> {
    let b = first_pass(a, q);
    second_pass(&b, q)
}

fn first_pass(a: &[i64], q: i64) -> Vec<i64> {
    let m = a.len();
    let at = |i: usize| if i < m { a[i] } else { 0 };
    let starts = |j: usize| j >= 1 && at(j) == q - 1 && at(j - 1) == q - 1;
    let continues = |k: usize| (at(k) == q - 1 || at(k + 1) == q - 1) && at(k) >= q - 2;

    // carry[i] for i in 0..=m+1; carry[0] and carry[m+1] stay zero.
    let mut carry = vec![false; m + 2];
    for i in 1..=m {
        carry[i] = starts(i) || starts(i - 1) || (carry[i - 1] && continues(i - 1));
    }
    (0..=m)
        .map(|i| at(i) - q * i64::from(carry[i + 1]) + i64::from(carry[i]))
        .collect()
}

fn second_pass(b: &[i64], q: i64) -> Vec<i32> {
    let len = b.len();
    // run[i]: some j >= i has b_j = -1 with b_i..b_{j-1} all positive.
    let mut run = vec![false; len + 1];
    for i in (0..len).rev() {
        run[i] = b[i] == -1 || (b[i] > 0 && run[i + 1]);
    }
    let mut borrow = vec![false; len + 1];
    for i in 1..len {
        borrow[i] = b[i - 1] > 0 && run[i];
    }
    (0..len)
        .map(|i| {
            let c = b[i] - q * i64::from(borrow[i + 1]) + i64::from(borrow[i]);
            c as i32
        })
        .collect()
}

fn negate(digits: &mut [i32]) {
    for d in digits {
        *d = -*d;
    }
}

fn trimmed(mut digits: Vec<i32>) -> Vec<i32> {
    while digits.last() == Some(&0) {
        digits.pop();
    }
    digits
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn seq(base: u32, digits: &[i32]) -> SignedDigitSeq {
        SignedDigitSeq::new(base, digits.to_vec()).unwrap()
    }

    #[test]
    fn values() {
        assert_eq!(seq(3, &[-2, 0, 0, 1, 2]).value(), BigInt::from(187));
        assert_eq!(seq(3, &[]).value(), BigInt::zero());
        assert_eq!(seq(2, &[1, 1, 1]).value(), BigInt::from(7));
    }

    #[test]
    fn compactness_predicate() {
        assert!(!seq(2, &[1, 1]).is_compact());
        assert!(!seq(2, &[1, -1]).is_compact());
        assert!(seq(3, &[-2, 0, 0, 1, 2]).is_compact());
    }

    #[test]
    fn make_compact_examples() {
        assert_eq!(seq(2, &[1, 1, 1]).make_compact().digits(), &[-1, 0, 0, 1]);
        assert!(seq(3, &[0, 0]).make_compact().is_empty());
        assert_eq!(seq(3, &[2, 2]).make_compact().digits(), &[-1, 0, 1]);
    }

    #[test]
    fn compare_examples() {
        let a = seq(2, &[-1, 0, 0, 1]);
        let b = seq(2, &[1, 0, 1, 0]);
        assert_eq!(a.compare(&b), Ok(Ordering::Greater));
        assert_eq!(a.compare(&a), Ok(Ordering::Equal));
        assert_eq!(seq(3, &[1]).compare(&seq(3, &[-1])), Ok(Ordering::Greater));
        assert_eq!(seq(2, &[1, 1]).compare(&a), Err(CsdrError::NotCompact));
    }

    #[test]
    fn max_values() {
        assert_eq!(max_compact_value(3, 2), BigInt::from(5));
        assert_eq!(max_compact_value(2, 3), BigInt::from(7));
        assert_eq!(max_compact_value(0, 5), BigInt::zero());
    }

    #[test]
    fn rejects_bad_digits() {
        assert!(SignedDigitSeq::new(3, vec![3]).is_err());
        assert!(SignedDigitSeq::new(1, vec![]).is_err());
    }

    fn arb_seq() -> impl Strategy<Value = SignedDigitSeq> {
        (2u32..=6).prop_flat_map(|q| {
            let top = q as i32 - 1;
            prop::collection::vec(-top..=top, 0..=20)
                .prop_map(move |d| SignedDigitSeq::new(q, d).unwrap())
        })
    }

    proptest! {
        #[test]
        fn make_compact_preserves_value(a in arb_seq()) {
            let c = a.make_compact();
            prop_assert_eq!(c.value(), a.value());
            prop_assert!(c.is_compact());
            prop_assert!(c.len() <= a.len() + 1);
        }

        #[test]
        fn make_compact_is_idempotent(a in arb_seq()) {
            let c = a.make_compact();
            prop_assert_eq!(c.make_compact(), c);
        }

        #[test]
        fn wide_compaction_matches_integer_route(
            q in 2u32..=7,
            wide in prop::collection::vec(-40i64..=40, 0..12),
        ) {
            let value = wide
                .iter()
                .rev()
                .fold(BigInt::zero(), |acc, &d| acc * q + d);
            let via_wide = compact_from_wide(&wide, q);
            let via_int = SignedDigitSeq::from_integer(&value, q).unwrap();
            prop_assert_eq!(via_wide.as_slice(), via_int.digits());
        }
    }
}
