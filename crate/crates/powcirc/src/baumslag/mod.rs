//! Word, membership and conjugacy problems in the Baumslag group
//! `BG(1,q) = <a, b | b a b^-1 a = a^q b a b^-1>`.
//!
//! Elements of `BS(1,q) = Z[1/q] ⋊ Z` are pairs `(r, m)` stored as a
//! [`FloatRep`] and an integer [`Marking`] on a power circuit of base `|q|`.
//! Words alternate between such pairs and the stable letters `b`, `b^-1`.

mod conjugacy;
mod parse;
mod reduce;

use std::fmt;

use num_bigint::BigInt;
use thiserror::Error;

use crate::powercircuit::{CircuitError, FloatRep, Marking, PowerCircuit, MAX_BASE};

pub use conjugacy::{ConjugacyAnswer, CyclicWord};
pub use parse::{parse_tokens, Token};
pub use reduce::DepthSearch;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GroupError {
    #[error("|q| must lie in [2, {MAX_BASE}], got {0}")]
    BadBase(i64),
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unsupported fixed element: {0}")]
    UnsupportedFixed(String),
    #[error("malformed segment: {0}")]
    Malformed(String),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
}

/// `b` or `b^-1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stable {
    B,
    BInv,
}

impl Stable {
    pub fn inverse(self) -> Stable {
        match self {
            Stable::B => Stable::BInv,
            Stable::BInv => Stable::B,
        }
    }
}

impl fmt::Display for Stable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stable::B => "b",
            Stable::BInv => "B",
        })
    }
}

/// The element `e(r.mantissa) * |q|^e(r.exponent)` paired with `e(m)`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Bs {
    pub r: FloatRep,
    pub m: Marking,
}

impl Bs {
    pub fn identity() -> Self {
        Self::default()
    }

    pub fn is_identity(&self) -> bool {
        self.r.is_zero() && self.m.is_zero()
    }

    /// Mantissa plus `m` support.
    pub fn norm(&self) -> usize {
        self.r.mantissa.support() + self.m.support()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Letter {
    Stable(Stable),
    Bs(Bs),
}

/// A word `x_0 s_1 x_1 ... s_h x_h` with `x_i` in `BS(1,q)` and `s_i`
/// stable letters. Identity `x_i` stand for empty positions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PcWord {
    pub elems: Vec<Bs>,
    pub stables: Vec<Stable>,
}

impl PcWord {
    pub fn identity() -> Self {
        Self::from_bs(Bs::identity())
    }

    pub fn from_bs(x: Bs) -> Self {
        Self {
            elems: vec![x],
            stables: Vec::new(),
        }
    }

    pub fn from_stable(s: Stable) -> Self {
        Self {
            elems: vec![Bs::identity(), Bs::identity()],
            stables: vec![s],
        }
    }

    /// Number of stable letters.
    pub fn beta_len(&self) -> usize {
        self.stables.len()
    }

    /// The sole element, when the word has no stable letters.
    pub fn as_bs(&self) -> Option<&Bs> {
        self.stables.is_empty().then(|| &self.elems[0])
    }

    pub fn is_identity(&self) -> bool {
        self.as_bs().is_some_and(Bs::is_identity)
    }

    /// Sum of mantissa and `m` supports.
    pub fn norm(&self) -> usize {
        self.elems.iter().map(Bs::norm).sum()
    }

    /// Letters left to right with identity elements dropped.
    pub fn letters(&self) -> Vec<Letter> {
        let mut out = Vec::new();
        for (i, x) in self.elems.iter().enumerate() {
            if i > 0 {
                out.push(Letter::Stable(self.stables[i - 1]));
            }
            if !x.is_identity() {
                out.push(Letter::Bs(x.clone()));
            }
        }
        out
    }
}

/// A group `BG(1,q)` together with the power circuit all its words live on.
#[derive(Debug, Clone)]
pub struct Group {
    q: i64,
    pc: PowerCircuit,
    search: DepthSearch,
    /// Allows the fixed-element test for negative `q`.
    pub allow_negative_fixed: bool,
}

impl Group {
    pub fn new(q: i64) -> Result<Self, GroupError> {
        let abs = q.unsigned_abs();
        if !(2..=u64::from(MAX_BASE)).contains(&abs) {
            return Err(GroupError::BadBase(q));
        }
        Ok(Self {
            q,
            pc: PowerCircuit::new(abs as u32)?,
            search: DepthSearch::Sequential,
            allow_negative_fixed: false,
        })
    }

    pub fn q(&self) -> i64 {
        self.q
    }

    pub fn circuit(&self) -> &PowerCircuit {
        &self.pc
    }

    pub fn circuit_mut(&mut self) -> &mut PowerCircuit {
        &mut self.pc
    }

    pub fn set_depth_search(&mut self, mode: DepthSearch) {
        self.search = mode;
    }

    /// Letters for `text`, with exponents expanded.
    pub fn parse_word(&mut self, text: &str) -> Result<Vec<Letter>, GroupError> {
        let tokens = parse_tokens(text)?;
        Ok(self.letters_from_tokens(&tokens))
    }

    pub fn letters_from_tokens(&mut self, tokens: &[Token]) -> Vec<Letter> {
        let mut out = Vec::new();
        for tok in tokens {
            match *tok {
                Token::A(ref e) => out.push(Letter::Bs(self.bs_from_ints(e, &BigInt::from(0)))),
                Token::T(ref e) => out.push(Letter::Bs(self.bs_from_ints(&BigInt::from(0), e))),
                Token::B(k) => {
                    let s = if k > 0 { Stable::B } else { Stable::BInv };
                    out.extend(std::iter::repeat_n(Letter::Stable(s), k.unsigned_abs() as usize));
                }
            }
        }
        out
    }

    /// `(a, t)` as an element.
    pub fn bs_from_ints(&mut self, a: &BigInt, t: &BigInt) -> Bs {
        let r = self.pc.int_marking(a);
        let r = self.pc.to_float(&r);
        let m = self.pc.int_marking(t);
        Bs { r, m }
    }

    /// `q^k * r`. The circuit works in base `|q|`, so odd `k` flips the
    /// sign when `q < 0`.
    pub(crate) fn scale(&mut self, r: &FloatRep, k: &Marking) -> FloatRep {
        let shifted = self.pc.float_shift(r, k);
        if self.q < 0 && !k.is_zero() && self.pc.mod_const(k, 2).expect("valid modulus") == 1 {
            shifted.negated()
        } else {
            shifted
        }
    }

    /// `(r, m) (s, n) = (r + q^m s, m + n)`.
    pub fn bs_multiply(&mut self, x: &Bs, y: &Bs) -> Bs {
        if x.is_identity() {
            return y.clone();
        }
        if y.is_identity() {
            return x.clone();
        }
        let shifted = self.scale(&y.r, &x.m);
        Bs {
            r: self.pc.float_sum(&[&x.r, &shifted]),
            m: self.pc.add(&x.m, &y.m),
        }
    }

    /// `(r, m)^-1 = (-r q^-m, -m)`.
    pub fn bs_inverse(&mut self, x: &Bs) -> Bs {
        let m = x.m.negated();
        Bs {
            r: self.scale(&x.r.negated(), &m),
            m,
        }
    }

    pub fn word_inverse(&mut self, w: &PcWord) -> PcWord {
        PcWord {
            elems: w.elems.iter().rev().map(|x| self.bs_inverse(x)).collect(),
            stables: w.stables.iter().rev().map(|s| s.inverse()).collect(),
        }
    }

    /// Integer marking of `r` if it is an integer.
    pub fn as_integer(&mut self, r: &FloatRep) -> Option<Marking> {
        self.pc.float_to_int(r)
    }

    /// Britton-reduced form of `letters`.
    pub fn britton_reduce(&mut self, letters: &[Letter]) -> PcWord {
        self.reduce_letters(letters)
    }

    /// Whether `text` denotes the identity.
    pub fn word_problem(&mut self, text: &str) -> Result<bool, GroupError> {
        let letters = self.parse_word(text)?;
        Ok(self.britton_reduce(&letters).is_identity())
    }

    /// The element of `BS(1,q)` that `text` denotes, if any.
    pub fn subgroup_membership(&mut self, text: &str) -> Result<Option<Bs>, GroupError> {
        let letters = self.parse_word(text)?;
        Ok(self.britton_reduce(&letters).as_bs().cloned())
    }

    /// Exact `(r, m)` as big integers when both parts are small enough,
    /// with `r` given as numerator and power of `|q|` in the denominator.
    pub fn small_parts(&self, x: &Bs) -> Option<(i128, i128, i128)> {
        let num = self.pc.small_value(&x.r.mantissa)?;
        let exp = self.pc.small_value(&x.r.exponent)?;
        let m = self.pc.small_value(&x.m)?;
        Some((num, exp, m))
    }

    /// Compact text for an element, `(u*Q^e, m)` with small parts printed
    /// exactly and huge parts abbreviated.
    pub fn describe(&self, x: &Bs) -> String {
        let show = |m: &Marking| match self.pc.small_value(m) {
            Some(v) => v.to_string(),
            None => format!("<{} terms>", m.support()),
        };
        let r = if x.r.exponent.is_zero() {
            show(&x.r.mantissa)
        } else {
            format!("{}*{}^{}", show(&x.r.mantissa), self.pc.base(), show(&x.r.exponent))
        };
        format!("({}, {})", r, show(&x.m))
    }
}

/// Tokens of `w_n`, where `w_0 = t` and `w_(n+1) = b w_n a w_n^-1 b^-1`.
/// `w_n` has `2^(n+2) - 3` letters.
pub fn tower_tokens(n: u32) -> Vec<Token> {
    let mut w = vec![Token::T(BigInt::from(1))];
    for _ in 0..n {
        let inv = invert_tokens(&w);
        let mut next = Vec::with_capacity(2 * w.len() + 3);
        next.push(Token::B(1));
        next.extend(w);
        next.push(Token::A(BigInt::from(1)));
        next.extend(inv);
        next.push(Token::B(-1));
        w = next;
    }
    w
}

pub fn invert_tokens(w: &[Token]) -> Vec<Token> {
    w.iter()
        .rev()
        .map(|t| match t {
            Token::A(e) => Token::A(-e),
            Token::T(e) => Token::T(-e),
            Token::B(k) => Token::B(-k),
        })
        .collect()
}

/// Text form of tokens, readable by [`parse_tokens`].
pub fn tokens_to_text(w: &[Token]) -> String {
    let item = |c: char, e: &BigInt| {
        if *e == BigInt::from(1) {
            c.to_string()
        } else {
            format!("{c}^{e}")
        }
    };
    w.iter()
        .map(|t| match t {
            Token::A(e) => item('a', e),
            Token::T(e) => item('t', e),
            Token::B(k) => item('b', &BigInt::from(*k)),
        })
        .collect::<Vec<_>>()
        .join(" ")
}

/// `len` letters drawn uniformly from `a A t T b B`.
pub fn random_tokens<R: rand::Rng>(rng: &mut R, len: usize) -> Vec<Token> {
    (0..len)
        .map(|_| match rng.gen_range(0..6) {
            0 => Token::A(BigInt::from(1)),
            1 => Token::A(BigInt::from(-1)),
            2 => Token::T(BigInt::from(1)),
            3 => Token::T(BigInt::from(-1)),
            4 => Token::B(1),
            _ => Token::B(-1),
        })
        .collect()
}

/// The node of value `tow(n)` on the tower chain `1, Q, Q^Q, ..` of the
/// circuit, if present.
pub fn tower_node(pc: &PowerCircuit, n: u32) -> Option<crate::powercircuit::NodeId> {
    let mut node = pc.find_node(&Marking::zero())?;
    for _ in 0..n {
        node = pc.find_node(&pc.node_marking(node, 1))?;
    }
    Some(node)
}

/// Whether `w` is the single letter `t^tow(n)`, checked by marking equality.
pub fn is_tower_result(g: &Group, w: &PcWord, n: u32) -> bool {
    let Some(x) = w.as_bs() else {
        return false;
    };
    let Some(node) = tower_node(g.circuit(), n) else {
        return false;
    };
    x.r.is_zero() && x.m == g.circuit().node_marking(node, 1)
}
