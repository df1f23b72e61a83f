//! Cyclic reduction and conjugacy decisions.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};

use super::{Bs, Group, GroupError, Letter, PcWord, Stable};
use crate::powercircuit::{FloatRep, Marking};

/// Largest `|m|` accepted for the fixed element `(r, m)`.
const FIXED_MAX_M: i128 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConjugacyAnswer {
    Conjugate,
    NotConjugate,
    /// One of the words is conjugate into `BS(1,q)`; the generic test does
    /// not decide this case.
    InconclusiveInBs,
}

/// A cyclic word `s_1 x_1 s_2 x_2 .. s_h x_h` with at least one stable
/// letter.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CyclicWord {
    pub pairs: Vec<(Stable, Bs)>,
}

impl CyclicWord {
    fn rotated(&self, k: usize) -> CyclicWord {
        let mut pairs = self.pairs.clone();
        pairs.rotate_left(k);
        CyclicWord { pairs }
    }

    fn signature(&self) -> Vec<Stable> {
        self.pairs.iter().map(|p| p.0).collect()
    }

    fn letters(&self) -> Vec<Letter> {
        self.pairs
            .iter()
            .flat_map(|(s, x)| [Letter::Stable(*s), Letter::Bs(x.clone())])
            .collect()
    }
}

impl Group {
    /// A cyclically Britton-reduced conjugate of the Britton-reduced `w`.
    pub fn cyclically_reduce(&mut self, w: &PcWord) -> PcWord {
        debug_assert!(self.is_britton_reduced(w));
        let mut w = w.clone();
        loop {
            let h = w.beta_len();
            if h == 0 {
                return w;
            }
            let (first, last) = (w.stables[0], w.stables[h - 1]);
            if first != last.inverse() {
                return w;
            }
            let joint = self.bs_multiply(&w.elems[h], &w.elems[0]);
            if self.pinch(last, &joint).is_none() {
                return w;
            }
            // w = u v with u holding the first ceil(h/2) stable letters.
            let c = h.div_ceil(2);
            let mut u_elems = w.elems[..c].to_vec();
            u_elems.push(Bs::identity());
            let u = PcWord {
                elems: u_elems,
                stables: w.stables[..c].to_vec(),
            };
            let v = PcWord {
                elems: w.elems[c..].to_vec(),
                stables: w.stables[c..].to_vec(),
            };
            w = self.britton_merge(&v, &u);
        }
    }

    /// The cyclically reduced `w` read as a cyclic word, or `None` when it
    /// has no stable letters.
    pub fn cyclic_form(&mut self, w: &PcWord) -> Option<CyclicWord> {
        let h = w.beta_len();
        if h == 0 {
            return None;
        }
        let mut pairs: Vec<(Stable, Bs)> = (0..h).map(|i| (w.stables[i], w.elems[i + 1].clone())).collect();
        pairs[h - 1].1 = self.bs_multiply(&w.elems[h], &w.elems[0]);
        Some(CyclicWord { pairs })
    }

    fn cyclic_inverse(&mut self, c: &CyclicWord) -> CyclicWord {
        // (s_1 x_1 .. s_h x_h)^-1 = x_h^-1 s_h^-1 .. x_1^-1 s_1^-1, rotated so
        // that it starts with s_h^-1.
        let h = c.pairs.len();
        let pairs = (0..h)
            .map(|k| {
                let s = c.pairs[h - 1 - k].0.inverse();
                let x = &c.pairs[(2 * h - 2 - k) % h].1;
                (s, self.bs_inverse(x))
            })
            .collect();
        CyclicWord { pairs }
    }

    /// Reduced and cyclically reduced form of `text`.
    fn cyclic_reduction_of(&mut self, text: &str) -> Result<PcWord, GroupError> {
        let letters = self.parse_word(text)?;
        let w = self.britton_reduce(&letters);
        Ok(self.cyclically_reduce(&w))
    }

    pub fn conjugacy_generic(&mut self, u: &str, v: &str) -> Result<ConjugacyAnswer, GroupError> {
        let u = self.cyclic_reduction_of(u)?;
        let v = self.cyclic_reduction_of(v)?;
        Ok(self.conjugacy_cyclic(&u, &v))
    }

    /// Generic conjugacy of two cyclically reduced words.
    pub fn conjugacy_cyclic(&mut self, u: &PcWord, v: &PcWord) -> ConjugacyAnswer {
        let (Some(cu), Some(cv)) = (self.cyclic_form(u), self.cyclic_form(v)) else {
            return ConjugacyAnswer::InconclusiveInBs;
        };
        if cu.pairs.len() != cv.pairs.len() {
            return ConjugacyAnswer::NotConjugate;
        }
        let iu = self.cyclic_inverse(&cu);
        let iv = self.cyclic_inverse(&cv);
        for (a, b) in [(&cu, &cv), (&iu, &iv)] {
            if self.conjugate_in_orientation(a, b) {
                return ConjugacyAnswer::Conjugate;
            }
        }
        ConjugacyAnswer::NotConjugate
    }

    fn conjugate_in_orientation(&mut self, u: &CyclicWord, v: &CyclicWord) -> bool {
        let h = u.pairs.len();
        let Some(start) = u.pairs.iter().position(|p| p.0 == Stable::BInv) else {
            return false;
        };
        let u = u.rotated(start);
        let sig = u.signature();
        (0..h).any(|k| {
            let v = v.rotated(k);
            v.signature() == sig && self.related_by_associated(&u, &v)
        })
    }

    /// Whether `z^-1 u z = v` for some `z` in `<a>` or `<t>`, where both
    /// words start with `b^-1` and share their signature.
    fn related_by_associated(&mut self, u: &CyclicWord, v: &CyclicWord) -> bool {
        let (x, y) = (&u.pairs[0].1, &v.pairs[0].1);
        if u.pairs.len() == 1 {
            // q^(n-m) r = s + q^n (n-m)
            let diff = self.pc.sub(&y.m, &x.m);
            let lhs = self.scale(&x.r, &diff);
            let d = self.pc.to_float(&diff);
            let t = self.scale(&d, &y.m);
            let rhs = self.pc.float_sum(&[&y.r, &t]);
            return lhs == rhs;
        }
        let (e, f) = if u.pairs[1].0 == Stable::B {
            (x.r.exponent.negated(), y.r.exponent.negated())
        } else {
            (x.m.negated(), y.m.negated())
        };
        // a^e u a^-e (a^f v a^-f)^-1 = a^e u a^(f-e) v^-1 a^-f
        let ae = self.a_power(&e);
        let fe = self.pc.sub(&f, &e);
        let afe = self.a_power(&fe);
        let af = self.a_power(&f.negated());
        let mut letters = vec![Letter::Bs(ae)];
        letters.extend(u.letters());
        letters.push(Letter::Bs(afe));
        let v_word = PcWord {
            elems: std::iter::once(Bs::identity())
                .chain(v.pairs.iter().map(|p| p.1.clone()))
                .collect(),
            stables: v.signature(),
        };
        let v_inv = self.word_inverse(&v_word);
        letters.extend(v_inv.letters());
        letters.push(Letter::Bs(af));
        self.britton_reduce(&letters).is_identity()
    }

    fn a_power(&mut self, e: &Marking) -> Bs {
        Bs {
            r: self.pc.to_float(e),
            m: Marking::zero(),
        }
    }

    /// `q^-E r` for `r = U |q|^E`: an integer not divisible by `q`.
    fn strip_q(&mut self, r: &FloatRep) -> Marking {
        if self.q < 0 && self.pc.mod_const(&r.exponent, 2).expect("valid modulus") == 1 {
            r.mantissa.negated()
        } else {
            r.mantissa.clone()
        }
    }

    fn small(&self, m: &Marking) -> Option<i128> {
        self.pc.small_value(m)
    }

    /// Whether `w` is conjugate to the fixed element `g`.
    pub fn conjugate_to_fixed(&mut self, g: &str, w: &str) -> Result<bool, GroupError> {
        let gc = self.cyclic_reduction_of(g)?;
        let wc = self.cyclic_reduction_of(w)?;
        let Some(gx) = gc.as_bs().cloned() else {
            return Ok(self.conjugacy_cyclic(&gc, &wc) == ConjugacyAnswer::Conjugate);
        };
        if self.q < 0 && !self.allow_negative_fixed {
            return Err(GroupError::UnsupportedFixed("negative q needs the opt-in flag".into()));
        }
        let r = self.strip_q(&gx.r);
        let out_of_range = || GroupError::UnsupportedFixed("need |m| <= 64 and |r| <= 2^63".into());
        let r = self.small(&r).filter(|r| r.unsigned_abs() <= 1 << 63).ok_or_else(out_of_range)?;
        let m = self.small(&gx.m).filter(|m| m.abs() <= FIXED_MAX_M).ok_or_else(out_of_range)?;
        let Some(wx) = wc.as_bs().cloned() else {
            return Ok(false);
        };
        self.fixed_decision(BigInt::from(r), m, wx)
    }

    fn fixed_decision(&mut self, r: BigInt, m: i128, w: Bs) -> Result<bool, GroupError> {
        let q = BigInt::from(self.q);
        let (base, w) = if m != 0 {
            let (r, w) = if m < 0 {
                (-r, self.bs_inverse(&w))
            } else {
                (r, w)
            };
            let mm = m.unsigned_abs() as u32;
            let modulus = (num_traits::pow(q.clone(), mm as usize) - 1i32).abs();
            if !r.mod_floor(&modulus).is_zero() {
                // (r, m) is not conjugate to (0, m) in BS: stay in BS.
                if self.small(&w.m) != Some(i128::from(mm)) {
                    return Ok(false);
                }
                let s = self.strip_q(&w.r);
                let s = self.residue_mod_power_minus_one(&s, mm, &modulus)?;
                let mut x = r.mod_floor(&modulus);
                for _ in 0..mm {
                    if x == s {
                        return Ok(true);
                    }
                    x = (x * &q).mod_floor(&modulus);
                }
                return Ok(false);
            }
            // g^-1 was taken when m < 0, and (0, |m|) ~ (|m|, 0).
            (BigInt::from(m.abs()), w)
        } else {
            (r, w)
        };
        // g ~ (base, 0); strip factors of q.
        let mut r = base;
        while !r.is_zero() && r.is_multiple_of(&q) {
            r /= &q;
        }
        self.fixed_on_a(r, w)
    }

    /// `(r, 0) ~ w` for `r` not divisible by `q`.
    fn fixed_on_a(&mut self, r: BigInt, w: Bs) -> Result<bool, GroupError> {
        if r.is_zero() {
            return Ok(w.is_identity());
        }
        if w.m.is_zero() {
            let s = self.strip_q(&w.r);
            let r = self.pc.int_marking(&r);
            return Ok(s == r);
        }
        let (r, w) = if self.pc.sign(&w.m) == std::cmp::Ordering::Less {
            (-r, self.bs_inverse(&w))
        } else {
            (r, w)
        };
        // n = q^k r with k >= 0
        let n_float = self.pc.to_float(&w.m);
        let n_core = self.strip_q(&n_float);
        if self.small(&n_core) != r.to_i128() {
            return Ok(false);
        }
        let k = n_float.exponent;
        // (s, n) ~ (0, n) iff s = 0 mod q^n - 1
        let s = w.r.mantissa;
        if s.is_zero() {
            return Ok(true);
        }
        let r_abs = r.abs().to_u64().ok_or_else(|| GroupError::UnsupportedFixed("|r| too large".into()))?;
        let mut terms = Vec::new();
        let mut weight: u64 = 0;
        let pc = &mut self.pc;
        for &(node, d) in s.terms() {
            let exp = pc.successor(node).clone();
            let low = pc.mod_power(&exp, &k, r_abs)?;
            let mut digit = i64::from(d);
            if self.q < 0 {
                // |q|^L = (-1)^L q^L and q^(L mod n) = (-1)^(L mod n) |q|^(L mod n)
                let flips = pc.mod_const(&exp, 2)? + if low.is_zero() { 0 } else { pc.mod_const(&low, 2)? };
                if flips % 2 == 1 {
                    digit = -digit;
                }
            }
            weight += d.unsigned_abs() as u64;
            let unit = pc.int_marking_i64(digit);
            terms.push(pc.shift(&unit, &low)?);
        }
        let refs: Vec<&Marking> = terms.iter().collect();
        let total = self.pc.sum(&refs);
        // q^n - 1 = |q|^n - eps
        let eps: i64 = if self.q < 0 && self.pc.mod_const(&w.m, 2)? == 1 { -1 } else { 1 };
        let weight = weight as i64 + 1;
        for j in -weight..=weight {
            let jm = self.pc.int_marking_i64(j);
            let top = self.pc.shift(&jm, &w.m)?;
            let low = self.pc.int_marking_i64(-eps * j);
            let cand = self.pc.add(&top, &low);
            if cand == total {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// `e(s) mod |q^mm - 1|` for an integer marking `s`.
    fn residue_mod_power_minus_one(&mut self, s: &Marking, mm: u32, modulus: &BigInt) -> Result<BigInt, GroupError> {
        let q = BigInt::from(self.q);
        let period = 2 * u64::from(mm);
        let mut acc = BigInt::zero();
        for &(node, d) in s.terms() {
            let l = self.pc.mod_const(self.pc.successor(node), period.max(2))?;
            // |q|^L = (-1)^L q^L when q < 0, and q^L = q^(L mod mm)
            let sign = if self.q < 0 && l % 2 == 1 { -1 } else { 1 };
            let p = num_traits::pow(q.clone(), (l % u64::from(mm)) as usize);
            acc += p * d * sign;
        }
        Ok(acc.mod_floor(modulus))
    }
}
