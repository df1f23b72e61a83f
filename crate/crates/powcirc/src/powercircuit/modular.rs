//! Residues of marking values.

use std::cmp::Ordering;
use std::collections::HashMap;

use num_integer::Integer;

use super::{CircuitError, Marking, NodeId, PowerCircuit};

type Memo = HashMap<(NodeId, u64), u64>;

impl PowerCircuit {
    /// `e(m) mod k`, in `[0, k)`.
    pub fn mod_const(&self, m: &Marking, k: u64) -> Result<u64, CircuitError> {
        if k < 2 {
            return Err(CircuitError::BadModulus { min: 2, got: k });
        }
        self.check_refs(m)?;
        let mut memo = Memo::new();
        Ok(self.residue(m, k, &mut memo))
    }

    fn residue(&self, m: &Marking, k: u64, memo: &mut Memo) -> u64 {
        if k == 1 {
            return 0;
        }
        let mut acc: u64 = 0;
        for &(n, d) in &m.terms {
            let p = self.node_residue(n, k, memo);
            let term = mul_mod(p, i64::from(d).rem_euclid(k as i64) as u64, k);
            acc = (acc + term) % k;
        }
        acc
    }

    /// `e(P) = Q^e(Λ_P) mod k`.
    fn node_residue(&self, n: NodeId, k: u64, memo: &mut Memo) -> u64 {
        if let Some(v) = self.nodes[n as usize].small {
            return v % k;
        }
        if let Some(&v) = memo.get(&(n, k)) {
            return v;
        }
        let q = u64::from(self.base);
        let succ = &self.nodes[n as usize].succ;

        let mut coprime = k;
        loop {
            let g = coprime.gcd(&q);
            if g == 1 {
                break;
            }
            coprime /= g;
        }
        let shared = k / coprime;

        // Powers of Q vanish modulo `shared` once the exponent reaches `t`.
        let shared_res = if shared == 1 {
            0
        } else {
            let mut t = 0u32;
            let mut acc = 1 % shared;
            while acc != 0 {
                acc = mul_mod(acc, q, shared);
                t += 1;
            }
            if self.at_least(succ, i128::from(t)) {
                0
            } else {
                let e = self.small_value(succ).expect("exponent below threshold is small");
                pow_mod(q, e as u64, shared)
            }
        };

        let coprime_res = if coprime == 1 {
            0
        } else {
            let phi = totient(coprime);
            let e = self.residue(succ, phi, memo);
            pow_mod(q, e, coprime)
        };

        let v = crt(shared_res, shared, coprime_res, coprime);
        memo.insert((n, k), v);
        v
    }

    /// Compact marking of `e(l) mod (Q^e(k) * r)`.
    pub fn mod_power(&mut self, l: &Marking, k: &Marking, r: u64) -> Result<Marking, CircuitError> {
        if r < 1 {
            return Err(CircuitError::BadModulus { min: 1, got: r });
        }
        self.check_refs(l)?;
        self.check_refs(k)?;
        if self.sign(k) == Ordering::Less {
            return Err(CircuitError::NegativeExponent);
        }
        let (low, high): (Vec<_>, Vec<_>) = l
            .terms
            .iter()
            .partition(|&&(n, _)| self.compare(&self.nodes[n as usize].succ, k) == Ordering::Less);
        let low = Marking { terms: low };
        let high = Marking { terms: high };

        // |e(low)| < Q^e(k); lift a negative remainder by one unit.
        let borrow = self.sign(&low) == Ordering::Less;
        let base = if borrow {
            let unit = self.insert_node(k.clone());
            self.add(&low, &Marking::single(unit, 1))
        } else {
            low
        };
        if r == 1 {
            return Ok(base);
        }

        let upper = self.shift(&high, &k.negated())?;
        let u = self.mod_const(&upper, r)?;
        let i = (u + r - u64::from(borrow)) % r;
        if i == 0 {
            return Ok(base);
        }
        let count = self.int_marking_i64(i as i64);
        let top = self.shift(&count, k)?;
        Ok(self.add(&base, &top))
    }
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((u128::from(a) * u128::from(b)) % u128::from(m)) as u64
}

pub(crate) fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    acc
}

/// Euler's totient by trial division.
pub(crate) fn totient(mut n: u64) -> u64 {
    let mut phi = n;
    let mut p = 2u64;
    while p.saturating_mul(p) <= n {
        if n.is_multiple_of(p) {
            while n.is_multiple_of(p) {
                n /= p;
            }
            phi -= phi / p;
        }
        p += 1;
    }
    if n > 1 {
        phi -= phi / n;
    }
    phi
}

/// The residue mod `m1 * m2` matching `a1 mod m1` and `a2 mod m2`, for
/// coprime moduli.
fn crt(a1: u64, m1: u64, a2: u64, m2: u64) -> u64 {
    if m1 == 1 {
        return a2 % m2;
    }
    if m2 == 1 {
        return a1 % m1;
    }
    let ext = i128::from(m1).extended_gcd(&i128::from(m2));
    // x = a1 + m1 * ((a2 - a1) * inv(m1) mod m2)
    let diff = (i128::from(a2) - i128::from(a1)).rem_euclid(i128::from(m2)) as u64;
    let inv = ext.x.rem_euclid(i128::from(m2)) as u64;
    let t = mul_mod(diff, inv, m2);
    (u128::from(a1) + u128::from(m1) * u128::from(t)) as u64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn totients() {
        assert_eq!(totient(1), 1);
        assert_eq!(totient(9), 6);
        assert_eq!(totient(36), 12);
        assert_eq!(totient(97), 96);
    }

    #[test]
    fn crt_small() {
        for a in 0..4 {
            for b in 0..9 {
                let x = crt(a, 4, b, 9);
                assert_eq!((x % 4, x % 9), (a, b));
            }
        }
    }
}
