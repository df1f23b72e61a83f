//! Britton reduction: pinch tests, merging of reduced words, and the
//! tree-shaped reduction of arbitrary letter sequences.
//!
//! In a merge of `U = x_0 s_1 .. s_h x_h` with `V = y_0 t_1 .. t_l y_l`,
//! depth `i` refers to the subword `uv[i]` spanning the `i+1` innermost
//! stable letters on each side of the junction.

use std::collections::HashMap;

use super::{Bs, Group, GroupError, Letter, PcWord, Stable};
use crate::powercircuit::{FloatRep, Marking};

/// How a merge finds its cancellation depth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DepthSearch {
    /// Walk outward from the junction and stop at the first failure.
    #[default]
    Sequential,
    /// Decide every depth from closed forms on a scratch copy of the
    /// circuit, then take the longest prefix of successes.
    Independent,
}

impl Group {
    /// `s y s^-1` as an element of `BS(1,q)`, if it is a pinch.
    pub fn pinch(&mut self, outer: Stable, y: &Bs) -> Option<Bs> {
        match outer {
            Stable::B => {
                if !y.m.is_zero() {
                    return None;
                }
                let g = self.pc.float_to_int(&y.r)?;
                Some(Bs {
                    r: FloatRep::zero(),
                    m: g,
                })
            }
            Stable::BInv => {
                if !y.r.is_zero() {
                    return None;
                }
                Some(Bs {
                    r: self.pc.to_float(&y.m),
                    m: Marking::zero(),
                })
            }
        }
    }

    /// Decides whether `outer x (inner) y outer^-1` lies in `BS(1,q)`, where
    /// the inner word starts with `inner_outer` and evaluates to `inner`.
    /// Returns its value when it does.
    pub fn pinch_check(&mut self, outer: Stable, inner_outer: Stable, x: &Bs, inner: &Bs, y: &Bs) -> Option<Bs> {
        match (outer, inner_outer) {
            (Stable::B, Stable::B) => {
                // inner = (0, k)
                let mk = self.pc.add(&x.m, &inner.m);
                if !self.pc.add(&mk, &y.m).is_zero() {
                    return None;
                }
                let shifted = self.scale(&y.r, &mk);
                let v = self.pc.float_sum(&[&x.r, &shifted]);
                let v = self.pc.float_to_int(&v)?;
                Some(Bs { r: FloatRep::zero(), m: v })
            }
            (Stable::B, Stable::BInv) => {
                // inner = (g, 0)
                if !self.pc.add(&x.m, &y.m).is_zero() {
                    return None;
                }
                let gs = self.pc.float_sum(&[&inner.r, &y.r]);
                let shifted = self.scale(&gs, &x.m);
                let v = self.pc.float_sum(&[&x.r, &shifted]);
                let v = self.pc.float_to_int(&v)?;
                Some(Bs { r: FloatRep::zero(), m: v })
            }
            (Stable::BInv, Stable::B) => {
                debug_assert!(!x.r.is_zero() && !y.r.is_zero(), "flanking letters must be reduced");
                let mk = self.pc.add(&x.m, &inner.m);
                let shifted = self.scale(&y.r, &mk);
                let v = self.pc.float_sum(&[&x.r, &shifted]);
                if !v.is_zero() {
                    return None;
                }
                let e = self.pc.add(&mk, &y.m);
                Some(Bs {
                    r: self.pc.to_float(&e),
                    m: Marking::zero(),
                })
            }
            (Stable::BInv, Stable::BInv) => {
                let gs = self.pc.float_sum(&[&inner.r, &y.r]);
                let shifted = self.scale(&gs, &x.m);
                let v = self.pc.float_sum(&[&x.r, &shifted]);
                if !v.is_zero() {
                    return None;
                }
                let e = self.pc.add(&x.m, &y.m);
                Some(Bs {
                    r: self.pc.to_float(&e),
                    m: Marking::zero(),
                })
            }
        }
    }

    /// Value of an alternating segment
    /// `b x_0 B x_1 b .. b x_2j B y B z_2j b .. b z_0 B` whose core
    /// `B y b` equals `(g, 0)`. `outer[t]` and `inner[t]` are the elements
    /// `t` steps in from the ends, so both slices have length `2j + 1`.
    pub fn pinch_telescope(&mut self, outer: &[Bs], inner: &[Bs], g: &Marking) -> Result<Bs, GroupError> {
        if outer.len() != inner.len() || outer.len().is_multiple_of(2) {
            return Err(GroupError::Malformed(format!(
                "segment sides have lengths {} and {}",
                outer.len(),
                inner.len()
            )));
        }
        let j = outer.len() / 2;
        let mut terms = vec![outer[0].r.clone()];
        let mut kappa = Marking::zero();
        for theta in 0..=j {
            kappa = self.pc.add(&kappa, &outer[2 * theta].m);
            let parts: Vec<FloatRep> = if theta == j {
                vec![self.pc.to_float(g), inner[2 * j].r.clone()]
            } else {
                vec![
                    self.pc.to_float(&outer[2 * theta + 1].m),
                    self.pc.to_float(&inner[2 * theta + 1].m),
                    outer[2 * theta + 2].r.clone(),
                    inner[2 * theta].r.clone(),
                ]
            };
            for p in parts {
                if !p.is_zero() {
                    let scaled = self.scale(&p, &kappa);
                    terms.push(scaled);
                }
            }
        }
        let refs: Vec<&FloatRep> = terms.iter().collect();
        let v = self.pc.float_sum(&refs);
        let v = self
            .pc
            .float_to_int(&v)
            .ok_or_else(|| GroupError::Malformed("segment value is not an integer".into()))?;
        Ok(Bs { r: FloatRep::zero(), m: v })
    }

    /// Britton-reduced form of `uv` for Britton-reduced `u` and `v`.
    pub fn britton_merge(&mut self, u: &PcWord, v: &PcWord) -> PcWord {
        let (depth, inner) = match self.search {
            DepthSearch::Sequential => self.depth_sequential(u, v),
            DepthSearch::Independent => self.depth_independent(u, v),
        };
        let h = u.beta_len();
        let x = &u.elems[h - depth];
        let y = &v.elems[depth];
        let left = self.bs_multiply(x, &inner);
        let boundary = self.bs_multiply(&left, y);

        let mut elems = Vec::with_capacity(u.elems.len() + v.elems.len() - 2 * depth - 1);
        elems.extend_from_slice(&u.elems[..h - depth]);
        elems.push(boundary);
        elems.extend_from_slice(&v.elems[depth + 1..]);
        let mut stables = Vec::with_capacity(elems.len() - 1);
        stables.extend_from_slice(&u.stables[..h - depth]);
        stables.extend_from_slice(&v.stables[depth..]);
        let w = PcWord { elems, stables };
        debug_assert!(self.is_britton_reduced(&w));
        w
    }

    /// Number of cancelled stable-letter pairs and the value of the
    /// cancelled core, found by walking outward from the junction.
    fn depth_sequential(&mut self, u: &PcWord, v: &PcWord) -> (usize, Bs) {
        let h = u.beta_len();
        let limit = h.min(v.beta_len());
        let mut inner = Bs::identity();
        let mut depth = 0;
        while depth < limit {
            let outer = u.stables[h - 1 - depth];
            if v.stables[depth] != outer.inverse() {
                break;
            }
            let x = &u.elems[h - depth];
            let y = &v.elems[depth];
            let next = if depth == 0 {
                let p = self.bs_multiply(x, y);
                self.pinch(outer, &p)
            } else {
                self.pinch_check(outer, u.stables[h - depth], x, &inner, y)
            };
            match next {
                Some(val) => {
                    inner = val;
                    depth += 1;
                }
                None => break,
            }
        }
        (depth, inner)
    }

    /// Same answer as [`Self::depth_sequential`], but each depth is decided
    /// on its own scratch circuit from closed forms that do not depend on
    /// the other decisions.
    fn depth_independent(&mut self, u: &PcWord, v: &PcWord) -> (usize, Bs) {
        let h = u.beta_len();
        let limit = h.min(v.beta_len());
        let signature = (0..limit)
            .take_while(|&i| v.stables[i] == u.stables[h - 1 - i].inverse())
            .count();
        let bits: Vec<bool> = (0..signature)
            .map(|i| {
                let mut scratch = self.clone();
                let mut walk = DepthWalk::new(u, v);
                walk.holds(&mut scratch, i)
            })
            .collect();
        let depth = bits.iter().take_while(|&&b| b).count();
        let inner = if depth == 0 {
            Bs::identity()
        } else {
            let mut walk = DepthWalk::new(u, v);
            walk.value(self, depth - 1).expect("core value of a cancelled prefix")
        };
        (depth, inner)
    }

    /// No adjacent `BS` letters and no pinch windows.
    pub fn is_britton_reduced(&mut self, w: &PcWord) -> bool {
        if w.elems.len() != w.stables.len() + 1 {
            return false;
        }
        for i in 1..w.stables.len() {
            let (s, t) = (w.stables[i - 1], w.stables[i]);
            if t == s.inverse() && self.pinch(s, &w.elems[i]).is_some() {
                return false;
            }
        }
        true
    }

    pub(super) fn reduce_letters(&mut self, letters: &[Letter]) -> PcWord {
        let mut round: Vec<PcWord> = letters
            .iter()
            .map(|l| match l {
                Letter::Stable(s) => PcWord::from_stable(*s),
                Letter::Bs(x) => PcWord::from_bs(x.clone()),
            })
            .collect();
        if round.is_empty() {
            return PcWord::identity();
        }
        round.resize(round.len().next_power_of_two(), PcWord::identity());
        while round.len() > 1 {
            let mut next = Vec::with_capacity(round.len() / 2);
            for pair in round.chunks(2) {
                let (u, v) = (&pair[0], &pair[1]);
                next.push(if v.is_identity() {
                    u.clone()
                } else if u.is_identity() {
                    v.clone()
                } else {
                    self.britton_merge(u, v)
                });
            }
            round = next;
        }
        round.pop().expect("one word left")
    }
}

/// Closed-form values of the cores `uv[i]` of one merge, each computed
/// assuming every core below it lies in `BS(1,q)`.
struct DepthWalk<'a> {
    u: &'a PcWord,
    v: &'a PcWord,
    memo: HashMap<usize, Option<Bs>>,
}

impl<'a> DepthWalk<'a> {
    fn new(u: &'a PcWord, v: &'a PcWord) -> Self {
        Self {
            u,
            v,
            memo: HashMap::new(),
        }
    }

    /// The `u`-side element `i` steps from the junction.
    fn left(&self, i: usize) -> &'a Bs {
        &self.u.elems[self.u.beta_len() - i]
    }

    fn right(&self, i: usize) -> &'a Bs {
        &self.v.elems[i]
    }

    /// The stable letter opening `uv[i - 1]`, for `i >= 1`.
    fn stable(&self, i: usize) -> Stable {
        self.u.stables[self.u.beta_len() - i]
    }

    /// Whether `uv[i]` lies in `BS(1,q)` given that `uv[i - 1]` does.
    fn holds(&mut self, g: &mut Group, i: usize) -> bool {
        let outer = self.stable(i + 1);
        if i == 0 {
            let p = g.bs_multiply(self.left(0), self.right(0));
            return g.pinch(outer, &p).is_some();
        }
        let Some(inner) = self.value(g, i - 1) else {
            return false;
        };
        g.pinch_check(outer, self.stable(i), self.left(i), &inner, self.right(i))
            .is_some()
    }

    /// Value of `uv[i]` under the assumption that it lies in `BS(1,q)`.
    fn value(&mut self, g: &mut Group, i: usize) -> Option<Bs> {
        if let Some(v) = self.memo.get(&i) {
            return v.clone();
        }
        let v = self.compute(g, i);
        self.memo.insert(i, v.clone());
        v
    }

    fn compute(&mut self, g: &mut Group, i: usize) -> Option<Bs> {
        let outer = self.stable(i + 1);
        let (x, y) = (self.left(i), self.right(i));
        if i == 0 {
            let p = g.bs_multiply(x, y);
            return g.pinch(outer, &p);
        }
        match (outer, self.stable(i)) {
            (Stable::B, Stable::B) => {
                // (0, r + q^-n s)
                let shifted = g.scale(&y.r, &y.m.negated());
                let v = g.pc.float_sum(&[&x.r, &shifted]);
                let v = g.pc.float_to_int(&v)?;
                Some(Bs { r: FloatRep::zero(), m: v })
            }
            (Stable::BInv, Stable::BInv) => {
                let e = g.pc.add(&x.m, &y.m);
                Some(Bs {
                    r: g.pc.to_float(&e),
                    m: Marking::zero(),
                })
            }
            (Stable::BInv, Stable::B) => {
                let k = self.value(g, i - 1)?.m;
                let e = g.pc.sum(&[&x.m, &y.m, &k]);
                Some(Bs {
                    r: g.pc.to_float(&e),
                    m: Marking::zero(),
                })
            }
            (Stable::B, Stable::BInv) => {
                // Longest alternating run b B b B .. ending in B above a core.
                let mut j = 0;
                while i >= 2 * j + 3 && self.stable(i - 2 * j - 1) == Stable::B && self.stable(i - 2 * j - 2) == Stable::BInv {
                    j += 1;
                }
                let core = self.value(g, i - 2 * j - 1)?;
                let gval = g.pc.float_to_int(&core.r)?;
                let outer_side: Vec<Bs> = (0..=2 * j).map(|t| self.left(i - t).clone()).collect();
                let inner_side: Vec<Bs> = (0..=2 * j).map(|t| self.right(i - t).clone()).collect();
                g.pinch_telescope(&outer_side, &inner_side, &gval).ok()
            }
        }
    }
}
