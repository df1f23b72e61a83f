//! Exact rewriting in `BG(1,q)` with materialized rationals.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};

use super::{evaluate_marking_exact, Overflow};
use crate::baumslag::{Group, PcWord, Stable, Token};
use crate::powercircuit::Marking;

/// `(num / |q|^den, m)` with `den = 0` or `|q|` not dividing `num`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ExactBs {
    pub num: BigInt,
    pub den: u64,
    pub m: BigInt,
}

impl ExactBs {
    pub fn identity() -> Self {
        Self {
            num: BigInt::zero(),
            den: 0,
            m: BigInt::zero(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.num.is_zero() && self.m.is_zero()
    }

    pub fn from_ints(r: impl Into<BigInt>, m: impl Into<BigInt>) -> Self {
        Self {
            num: r.into(),
            den: 0,
            m: m.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ExactLetter {
    Stable(Stable),
    Bs(ExactBs),
}

/// Order in which rewriting rules are applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    /// Always rewrite the leftmost redex.
    Leftmost,
    /// Read left to right and rewrite only at the end of the prefix read so far.
    Stack,
}

/// Exact arithmetic in `BS(1,q)` and rewriting in `BG(1,q)`.
#[derive(Debug, Clone, Copy)]
pub struct ExactGroup {
    pub q: i64,
    /// Largest bit length allowed for numerators, exponents and `m`.
    pub size_cap: u64,
}

impl ExactGroup {
    pub fn new(q: i64, size_cap: u64) -> Self {
        assert!(q.abs() >= 2, "|q| must be at least 2");
        Self { q, size_cap }
    }

    fn qa(&self) -> BigInt {
        BigInt::from(self.q.abs())
    }

    fn check(&self, x: &BigInt) -> Result<(), Overflow> {
        if x.bits() > self.size_cap {
            Err(Overflow)
        } else {
            Ok(())
        }
    }

    fn normalize(&self, mut num: BigInt, mut den: u64) -> Result<(BigInt, u64), Overflow> {
        let qa = self.qa();
        if num.is_zero() {
            return Ok((num, 0));
        }
        while den > 0 && num.is_multiple_of(&qa) {
            num /= &qa;
            den -= 1;
        }
        self.check(&num)?;
        Ok((num, den))
    }

    /// `q^k * num / |q|^den`.
    fn scale(&self, num: &BigInt, den: u64, k: &BigInt) -> Result<(BigInt, u64), Overflow> {
        if num.is_zero() || k.is_zero() {
            return Ok((num.clone(), den));
        }
        let kk = k.abs().to_u64().filter(|&k| k <= self.size_cap).ok_or(Overflow)?;
        let sign_flip = self.q < 0 && k.is_odd();
        let mut num = num.clone();
        let mut den = den;
        if sign_flip {
            num = -num;
        }
        if k.is_positive() {
            num *= num_traits::pow(self.qa(), kk as usize);
        } else {
            den += kk;
        }
        self.normalize(num, den)
    }

    fn add(&self, a: (&BigInt, u64), b: (&BigInt, u64)) -> Result<(BigInt, u64), Overflow> {
        let den = a.1.max(b.1);
        let lift = |n: &BigInt, d: u64| n * num_traits::pow(self.qa(), (den - d) as usize);
        self.normalize(lift(a.0, a.1) + lift(b.0, b.1), den)
    }

    pub fn multiply(&self, x: &ExactBs, y: &ExactBs) -> Result<ExactBs, Overflow> {
        let (sn, sd) = self.scale(&y.num, y.den, &x.m)?;
        let (num, den) = self.add((&x.num, x.den), (&sn, sd))?;
        let m = &x.m + &y.m;
        self.check(&m)?;
        Ok(ExactBs { num, den, m })
    }

    pub fn inverse(&self, x: &ExactBs) -> Result<ExactBs, Overflow> {
        let m = -&x.m;
        let (num, den) = self.scale(&(-&x.num), x.den, &m)?;
        Ok(ExactBs { num, den, m })
    }

    pub fn invert_word(&self, w: &[ExactLetter]) -> Result<Vec<ExactLetter>, Overflow> {
        w.iter()
            .rev()
            .map(|l| match l {
                ExactLetter::Stable(s) => Ok(ExactLetter::Stable(s.inverse())),
                ExactLetter::Bs(x) => self.inverse(x).map(ExactLetter::Bs),
            })
            .collect()
    }

    fn pinch(&self, s: Stable, x: &ExactBs) -> Option<ExactBs> {
        match s {
            Stable::B if x.m.is_zero() && x.den == 0 => Some(ExactBs::from_ints(0, x.num.clone())),
            Stable::BInv if x.num.is_zero() => Some(ExactBs::from_ints(x.m.clone(), 0)),
            _ => None,
        }
    }

    /// One rewrite at the start of `w[i..]`, if any applies there.
    fn rewrite_at(&self, w: &mut Vec<ExactLetter>, i: usize) -> Result<bool, Overflow> {
        use ExactLetter::{Bs, Stable as St};
        match (&w[i], w.get(i + 1), w.get(i + 2)) {
            (Bs(x), _, _) if x.is_identity() => {
                w.remove(i);
            }
            (Bs(x), Some(Bs(y)), _) => {
                let p = self.multiply(x, y)?;
                w.splice(i..i + 2, [Bs(p)]);
            }
            (St(s), Some(St(t)), _) if *t == s.inverse() => {
                w.drain(i..i + 2);
            }
            (St(s), Some(Bs(x)), Some(St(t))) if *t == s.inverse() => match self.pinch(*s, x) {
                Some(p) => {
                    w.splice(i..i + 3, [Bs(p)]);
                }
                None => return Ok(false),
            },
            _ => return Ok(false),
        }
        Ok(true)
    }

    /// Exhaustive rewriting with the three rules of the group, plus removal
    /// of the identity. The result is Britton-reduced.
    pub fn britton_reduce_exact(&self, w: &[ExactLetter], strategy: Strategy) -> Result<Vec<ExactLetter>, Overflow> {
        match strategy {
            Strategy::Leftmost => {
                let mut w = w.to_vec();
                let mut i = 0;
                while i < w.len() {
                    if self.rewrite_at(&mut w, i)? {
                        i = i.saturating_sub(2);
                    } else {
                        i += 1;
                    }
                }
                Ok(w)
            }
            Strategy::Stack => {
                let mut out: Vec<ExactLetter> = Vec::with_capacity(w.len());
                for l in w {
                    out.push(l.clone());
                    loop {
                        let n = out.len();
                        let start = n.saturating_sub(3);
                        let mut changed = false;
                        for i in (start..n).rev() {
                            if i < out.len() && self.rewrite_at(&mut out, i)? {
                                changed = true;
                                break;
                            }
                        }
                        if !changed {
                            break;
                        }
                    }
                }
                Ok(out)
            }
        }
    }

    pub fn is_identity(&self, w: &[ExactLetter]) -> Result<bool, Overflow> {
        Ok(self.britton_reduce_exact(w, Strategy::Leftmost)?.is_empty())
    }

    /// Whether `u` and `v` denote the same element.
    pub fn equal(&self, u: &[ExactLetter], v: &[ExactLetter]) -> Result<bool, Overflow> {
        let mut w = u.to_vec();
        w.extend(self.invert_word(v)?);
        self.is_identity(&w)
    }

    /// Letters for parsed tokens.
    pub fn letters(&self, tokens: &[Token]) -> Vec<ExactLetter> {
        let mut out = Vec::new();
        for t in tokens {
            match t {
                Token::A(e) => out.push(ExactLetter::Bs(ExactBs::from_ints(e.clone(), 0))),
                Token::T(e) => out.push(ExactLetter::Bs(ExactBs::from_ints(0, e.clone()))),
                Token::B(k) => {
                    let s = if *k > 0 { Stable::B } else { Stable::BInv };
                    out.extend(std::iter::repeat_n(ExactLetter::Stable(s), k.unsigned_abs() as usize));
                }
            }
        }
        out
    }

    /// `z^-1 u z = v`.
    pub fn conjugate_by(&self, u: &[ExactLetter], v: &[ExactLetter], z: &[ExactLetter]) -> Result<bool, Overflow> {
        let mut w = self.invert_word(z)?;
        w.extend_from_slice(u);
        w.extend_from_slice(z);
        self.equal(&w, v)
    }

    /// The first conjugator among all words of length at most `max_len`
    /// over `a, t, b` and their inverses, followed by `a^x` and `t^x` for
    /// `|x| <= max_power`. Overflowing candidates are skipped.
    pub fn find_conjugator(
        &self,
        u: &[ExactLetter],
        v: &[ExactLetter],
        max_len: usize,
        max_power: i64,
    ) -> Option<Vec<ExactLetter>> {
        let gens = generators();
        let mut layer: Vec<Vec<ExactLetter>> = vec![Vec::new()];
        for len in 0..=max_len {
            for z in &layer {
                if self.conjugate_by(u, v, z) == Ok(true) {
                    return Some(z.clone());
                }
            }
            if len == max_len {
                break;
            }
            layer = layer
                .iter()
                .flat_map(|z| {
                    gens.iter().map(move |g| {
                        let mut z = z.clone();
                        z.push(g.clone());
                        z
                    })
                })
                .collect();
        }
        for x in -max_power..=max_power {
            for z in [ExactBs::from_ints(x, 0), ExactBs::from_ints(0, x)] {
                let z = [ExactLetter::Bs(z)];
                if self.conjugate_by(u, v, &z) == Ok(true) {
                    return Some(z.to_vec());
                }
            }
        }
        None
    }
}

fn generators() -> Vec<ExactLetter> {
    vec![
        ExactLetter::Bs(ExactBs::from_ints(1, 0)),
        ExactLetter::Bs(ExactBs::from_ints(-1, 0)),
        ExactLetter::Bs(ExactBs::from_ints(0, 1)),
        ExactLetter::Bs(ExactBs::from_ints(0, -1)),
        ExactLetter::Stable(Stable::B),
        ExactLetter::Stable(Stable::BInv),
    ]
}

fn eval(g: &Group, m: &Marking, cap: u64) -> Result<BigInt, Overflow> {
    evaluate_marking_exact(g.circuit(), m, cap)
}

/// Exact letters of an engine word; identity elements are dropped.
pub fn exact_word(g: &Group, w: &PcWord, bit_cap: u64) -> Result<Vec<ExactLetter>, Overflow> {
    let qa = BigInt::from(g.q().abs());
    let mut out = Vec::new();
    for (i, x) in w.elems.iter().enumerate() {
        if i > 0 {
            out.push(ExactLetter::Stable(w.stables[i - 1]));
        }
        if x.is_identity() {
            continue;
        }
        let mant = eval(g, &x.r.mantissa, bit_cap)?;
        let e = eval(g, &x.r.exponent, bit_cap)?;
        let e_small = e.abs().to_u64().filter(|&e| e <= bit_cap).ok_or(Overflow)?;
        let (num, den) = if e.is_negative() {
            (mant, e_small)
        } else {
            (mant * num_traits::pow(qa.clone(), e_small as usize), 0)
        };
        let m = eval(g, &x.m, bit_cap)?;
        out.push(ExactLetter::Bs(ExactBs { num, den, m }));
    }
    Ok(out)
}

/// Fixed-element conjugacy `(r, m) ~ (s, n)` for `q >= 2` and integer
/// `r`, `s`, decided by plain integer congruences.
pub fn fixed_conjugacy_reference(q: i64, g: (i64, i64), w: (i64, i64)) -> bool {
    assert!(q >= 2);
    let q = BigInt::from(q);
    let strip = |mut x: BigInt| {
        while !x.is_zero() && x.is_multiple_of(&q) {
            x /= &q;
        }
        x
    };
    let (mut r, mut m) = (strip(g.0.into()), g.1);
    let (mut s, mut n) = (strip(w.0.into()), w.1);
    let modulus = |k: i64| num_traits::pow(q.clone(), k.unsigned_abs() as usize) - 1;
    let to_zero = |x: &BigInt, k: i64| x.mod_floor(&modulus(k)).is_zero();

    if m != 0 && !to_zero(&r, m) {
        if m < 0 {
            (r, m, s, n) = (-r, -m, -s, -n);
        }
        if n != m {
            return false;
        }
        let md = modulus(m);
        let target = s.mod_floor(&md);
        let mut x = r.mod_floor(&md);
        for _ in 0..m {
            if x == target {
                return true;
            }
            x = (x * &q).mod_floor(&md);
        }
        return false;
    }
    // g ~ (base, 0)
    let mut base = strip(if m != 0 { BigInt::from(m) } else { r });
    if base.is_zero() {
        return s.is_zero() && n == 0;
    }
    if n == 0 {
        return s == base;
    }
    if n < 0 {
        (s, n, base) = (-s, -n, -base);
    }
    // n = q^k base for some k >= 0, and (s, n) ~ (0, n)
    let mut nn = BigInt::from(n);
    loop {
        if nn == base {
            break;
        }
        if !nn.is_multiple_of(&q) || nn.is_zero() {
            return false;
        }
        nn /= &q;
    }
    to_zero(&s, n)
}
