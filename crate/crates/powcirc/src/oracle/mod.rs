//! Exact big-integer reference implementations for differential testing.
//!
//! Everything here is slow on purpose: values are materialized, rewriting
//! is done one rule at a time, and digit passes are evaluated straight from
//! their boolean definitions.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::powercircuit::{Marking, NodeId, PowerCircuit};

mod group;

pub use group::{exact_word, fixed_conjugacy_reference, ExactBs, ExactGroup, ExactLetter, Strategy};

/// Default bit budget for materialized values.
pub const DEFAULT_BIT_CAP: u64 = 1 << 20;

/// A value did not fit the configured bit budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Overflow;

/// Exact value of `m`, or [`Overflow`] if any node value needs more than
/// `bit_cap` bits.
pub fn evaluate_marking_exact(pc: &PowerCircuit, m: &Marking, bit_cap: u64) -> Result<BigInt, Overflow> {
    let mut memo = HashMap::new();
    evaluate_with(pc, m, bit_cap, &mut memo)
}

/// Exact values of all nodes in ascending order.
pub fn node_values_exact(pc: &PowerCircuit, bit_cap: u64) -> Result<Vec<BigInt>, Overflow> {
    let mut memo = HashMap::new();
    pc.sorted_nodes()
        .iter()
        .map(|&n| node_value(pc, n, bit_cap, &mut memo))
        .collect()
}

fn evaluate_with(
    pc: &PowerCircuit,
    m: &Marking,
    bit_cap: u64,
    memo: &mut HashMap<NodeId, Result<BigInt, Overflow>>,
) -> Result<BigInt, Overflow> {
    let mut total = BigInt::zero();
    for &(n, d) in m.terms() {
        total += node_value(pc, n, bit_cap, memo)? * d;
    }
    Ok(total)
}

fn node_value(
    pc: &PowerCircuit,
    n: NodeId,
    bit_cap: u64,
    memo: &mut HashMap<NodeId, Result<BigInt, Overflow>>,
) -> Result<BigInt, Overflow> {
    if let Some(v) = memo.get(&n) {
        return v.clone();
    }
    let exponent = evaluate_with(pc, pc.successor(n), bit_cap, memo)?;
    let bits_per_digit = f64::from(pc.base()).log2();
    let v = match exponent.to_u64() {
        Some(e) if (e as f64) * bits_per_digit <= bit_cap as f64 => {
            Ok(BigInt::from(pc.base()).pow(e as u32))
        }
        _ => Err(Overflow),
    };
    memo.insert(n, v.clone());
    v
}

/// Standard base-`q` digits of `|x|`, least significant first.
fn standard_digits(x: &BigInt, q: u32) -> Vec<i64> {
    let mut n = x.abs();
    let qb = BigInt::from(q);
    let mut out = Vec::new();
    while !n.is_zero() {
        let d = &n % &qb;
        out.push(d.to_i64().expect("digit fits"));
        n /= &qb;
    }
    out
}

/// The compact representation of `x`, built by evaluating both carry
/// passes directly from their quantified definitions. Quadratic or worse.
pub fn compact_rep_literal(x: &BigInt, q: u32) -> Vec<i32> {
    let qi = i64::from(q);
    let a = standard_digits(x, q);
    let m = a.len();
    let at = |i: isize| -> i64 {
        if i < 0 || i as usize >= m {
            0
        } else {
            a[i as usize]
        }
    };
    let top = qi - 1;
    let e = |i: usize| -> i64 {
        let hit = (1..=i).any(|j| {
            let j = j as isize;
            at(j) == top
                && at(j - 1) == top
                && (j + 1..i as isize).all(|k| (at(k) == top || at(k + 1) == top) && at(k) >= qi - 2)
        });
        i64::from(hit)
    };
    let b: Vec<i64> = (0..=m).map(|i| at(i as isize) - qi * e(i + 1) + e(i)).collect();

    let bt = |i: isize| -> i64 {
        if i < 0 || i as usize > m {
            0
        } else {
            b[i as usize]
        }
    };
    let f = |i: usize| -> i64 {
        let hit = (i..=m).any(|j| {
            bt(j as isize) == -1 && (i as isize - 1..j as isize).all(|l| bt(l) > 0)
        });
        i64::from(hit)
    };
    let mut c: Vec<i32> = (0..=m)
        .map(|i| (b[i] - qi * f(i + 1) + f(i)) as i32)
        .collect();
    while c.last() == Some(&0) {
        c.pop();
    }
    if x.is_negative() {
        for d in &mut c {
            *d = -*d;
        }
    }
    c
}

/// Every compact digit sequence of exactly `len` digits with a nonzero top
/// digit, paired with its value.
pub fn enumerate_compact(len: usize, q: u32) -> Vec<(Vec<i32>, BigInt)> {
    let top = q as i32 - 1;
    let mut out = Vec::new();
    let mut digits = Vec::with_capacity(len);
    fn rec(
        len: usize,
        q: u32,
        top: i32,
        digits: &mut Vec<i32>,
        out: &mut Vec<(Vec<i32>, BigInt)>,
    ) {
        if digits.len() == len {
            if len == 0 || digits[len - 1] != 0 {
                let v = digits
                    .iter()
                    .rev()
                    .fold(BigInt::zero(), |acc, &d| acc * q + d);
                out.push((digits.clone(), v));
            }
            return;
        }
        for d in -top..=top {
            if let Some(&prev) = digits.last() {
                if prev.abs() == top && d.abs() == top {
                    continue;
                }
                if prev != 0 && d != 0 && prev.signum() != d.signum() {
                    continue;
                }
            }
            digits.push(d);
            rec(len, q, top, digits, out);
            digits.pop();
        }
    }
    rec(len, q, top, &mut digits, &mut out);
    out
}

/// The compact representation of `x` found by exhaustive search. Returns
/// every compact sequence of value `x` with at most `max_len` digits.
pub fn compact_rep_search(x: &BigInt, q: u32, max_len: usize) -> Vec<Vec<i32>> {
    (0..=max_len)
        .flat_map(|len| enumerate_compact(len, q))
        .filter(|(_, v)| v == x)
        .map(|(d, _)| d)
        .collect()
}

/// `q^k` as a big integer.
pub fn big_pow(q: i64, k: u64) -> BigInt {
    num_traits::pow(BigInt::from(q), k as usize)
}
