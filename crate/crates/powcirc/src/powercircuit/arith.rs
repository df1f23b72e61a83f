//! Addition, shifting by powers of the base, and floating-point
//! representations on top of them.

use std::cmp::Ordering;

use num_bigint::BigInt;

use super::{CircuitError, FloatRep, Marking, NodeId, PowerCircuit};
use crate::csdr;

/// A run of chain-adjacent nodes carrying digits of a pending sum.
struct Run {
    start: NodeId,
    wide: Vec<i64>,
}

impl PowerCircuit {
    /// One compact marking per batch, valued at the batch sum.
    pub fn add_markings(&mut self, batches: &[Vec<Marking>]) -> Result<Vec<Marking>, CircuitError> {
        for m in batches.iter().flatten() {
            self.check_refs(m)?;
        }
        Ok(batches
            .iter()
            .map(|b| self.sum(&b.iter().collect::<Vec<_>>()))
            .collect())
    }

    /// `e(a) + e(b)`.
    pub fn add(&mut self, a: &Marking, b: &Marking) -> Marking {
        if a.is_zero() {
            return b.clone();
        }
        if b.is_zero() {
            return a.clone();
        }
        self.sum(&[a, b])
    }

    /// `e(a) - e(b)`.
    pub fn sub(&mut self, a: &Marking, b: &Marking) -> Marking {
        self.add(a, &b.negated())
    }

    /// Sum of any number of compact markings. Digits are added chain by
    /// chain and each chain's total is recompacted; when a total needs more
    /// digits than its chain has, the chain is extended upward by one node
    /// and the sum is redone.
    pub fn sum(&mut self, inputs: &[&Marking]) -> Marking {
        let nonzero: Vec<&Marking> = inputs.iter().copied().filter(|m| !m.is_zero()).collect();
        match nonzero.len() {
            0 => return Marking::zero(),
            1 => return nonzero[0].clone(),
            _ => {}
        }
        loop {
            let runs = self.collect_runs(&nonzero);
            let mut terms = Vec::new();
            let mut short: Vec<NodeId> = Vec::new();
            for run in runs {
                let digits = csdr::compact_from_wide(&run.wide, self.base);
                let mut node = run.start;
                for (pos, &d) in digits.iter().enumerate() {
                    if pos > 0 {
                        match self.next_of(node) {
                            Some(n) => node = n,
                            None => {
                                short.push(node);
                                break;
                            }
                        }
                    }
                    if d != 0 {
                        terms.push((node, d));
                    }
                }
            }
            if short.is_empty() {
                return Marking { terms };
            }
            for top in short {
                self.extend_above(top);
            }
        }
    }

    /// Groups the digits of all inputs into runs along chains.
    fn collect_runs(&self, inputs: &[&Marking]) -> Vec<Run> {
        let mut all: Vec<(NodeId, i64)> = inputs
            .iter()
            .flat_map(|m| m.terms.iter().map(|&(n, d)| (n, i64::from(d))))
            .collect();
        all.sort_by_key(|&(n, _)| self.label(n));

        let mut runs: Vec<Run> = Vec::new();
        let mut cursor: Option<(NodeId, usize)> = None;
        for (id, d) in all {
            if let Some((mut node, mut pos)) = cursor {
                while node != id {
                    match self.next_of(node) {
                        Some(n) => {
                            node = n;
                            pos += 1;
                        }
                        None => break,
                    }
                }
                if node == id {
                    let run = runs.last_mut().expect("cursor implies a run");
                    if run.wide.len() <= pos {
                        run.wide.resize(pos + 1, 0);
                    }
                    run.wide[pos] += d;
                    cursor = Some((node, pos));
                    continue;
                }
            }
            runs.push(Run {
                start: id,
                wide: vec![d],
            });
            cursor = Some((id, 0));
        }
        runs
    }

    /// Inserts the node of value `Q * e(top)`.
    fn extend_above(&mut self, top: NodeId) {
        if self.next_of(top).is_some() {
            return;
        }
        let one = self.int_marking_i64(1);
        let succ = self.nodes[top as usize].succ.clone();
        let bumped = self.add(&succ, &one);
        self.insert_node(bumped);
    }

    /// For every node `P` and `i` in `1..=mu`, ensures a node with successor
    /// value `e(Λ_P) + i`. Returns the inserted nodes.
    pub fn extend_chains(&mut self, mu: usize) -> Vec<NodeId> {
        let before = self.nodes.len();
        if mu == 0 {
            return Vec::new();
        }
        self.ensure_initial_chain(2);
        let tops: Vec<NodeId> = self
            .order
            .iter()
            .copied()
            .filter(|&n| !self.nodes[n as usize].linked_up)
            .collect();
        for top in tops {
            let succ = self.nodes[top as usize].succ.clone();
            for i in 1..=mu {
                let step = self.int_marking_i64(i as i64);
                let target = self.add(&succ, &step);
                self.insert_node(target);
            }
        }
        (before as NodeId..self.nodes.len() as NodeId).collect()
    }

    /// Compact markings for each integer, placed on the initial chain.
    pub fn int_to_marking(&mut self, xs: &[BigInt]) -> Vec<Marking> {
        xs.iter().map(|x| self.int_marking(x)).collect()
    }

    pub fn int_marking(&mut self, x: &BigInt) -> Marking {
        let digits = csdr::SignedDigitSeq::from_integer(x, self.base).expect("valid base");
        self.place_on_initial(digits.digits())
    }

    pub fn int_marking_i64(&mut self, x: i64) -> Marking {
        if x == 0 {
            return Marking::zero();
        }
        let wide = [x];
        let digits = csdr::compact_from_wide(&wide, self.base);
        self.place_on_initial(&digits)
    }

    fn place_on_initial(&mut self, digits: &[i32]) -> Marking {
        self.ensure_initial_chain(digits.len());
        Marking {
            terms: digits
                .iter()
                .enumerate()
                .filter(|(_, &d)| d != 0)
                .map(|(pos, &d)| (self.initial[pos], d))
                .collect(),
        }
    }

    /// Per pair `(K, L)`, a compact marking of value `e(K) * Q^e(L)`.
    /// Each node of `K` moves to the node whose successor value is shifted
    /// by `e(L)`; the digits are carried over unchanged.
    pub fn mult_by_power(&mut self, pairs: &[(Marking, Marking)]) -> Result<Vec<Marking>, CircuitError> {
        pairs.iter().map(|(k, l)| self.shift(k, l)).collect()
    }

    pub fn shift(&mut self, k: &Marking, l: &Marking) -> Result<Marking, CircuitError> {
        self.check_refs(k)?;
        self.check_refs(l)?;
        if k.is_zero() || l.is_zero() {
            return Ok(k.clone());
        }
        let mut terms = Vec::with_capacity(k.terms.len());
        for &(p, d) in &k.terms {
            let succ = self.nodes[p as usize].succ.clone();
            let target = self.add(&succ, l);
            if self.sign(&target) == Ordering::Less {
                return Err(CircuitError::NonIntegral);
            }
            terms.push((self.insert_node(target), d));
        }
        Ok(Marking { terms })
    }

    /// Splits each marking into a mantissa not divisible by `Q` and an
    /// exponent, read off the lowest node of the support.
    pub fn make_floating_point(&mut self, ks: &[Marking]) -> Vec<FloatRep> {
        ks.iter().map(|k| self.to_float(k)).collect()
    }

    pub fn to_float(&mut self, k: &Marking) -> FloatRep {
        let Some(&(low, _)) = k.terms.first() else {
            return FloatRep::zero();
        };
        let exponent = self.nodes[low as usize].succ.clone();
        let mantissa = self
            .shift(k, &exponent.negated())
            .expect("lowest node shift is integral");
        FloatRep { mantissa, exponent }
    }

    /// Per item, `r * Q^e(M)`; only the exponent changes.
    pub fn fp_mult_power(&mut self, items: &[(FloatRep, Marking)]) -> Vec<FloatRep> {
        items.iter().map(|(r, m)| self.float_shift(r, m)).collect()
    }

    pub fn float_shift(&mut self, r: &FloatRep, m: &Marking) -> FloatRep {
        if r.is_zero() {
            return FloatRep::zero();
        }
        FloatRep {
            mantissa: r.mantissa.clone(),
            exponent: self.add(&r.exponent, m),
        }
    }

    /// Integer marking for each input that denotes an integer.
    pub fn fp_to_int(&mut self, rs: &[FloatRep]) -> Vec<Option<Marking>> {
        rs.iter().map(|r| self.float_to_int(r)).collect()
    }

    pub fn float_to_int(&mut self, r: &FloatRep) -> Option<Marking> {
        if self.sign(&r.exponent) == Ordering::Less {
            return None;
        }
        Some(
            self.shift(&r.mantissa, &r.exponent)
                .expect("nonnegative exponent"),
        )
    }

    /// Sum of each batch: shift every term to the smallest exponent, add the
    /// integer mantissas, renormalize.
    pub fn fp_add(&mut self, batches: &[Vec<FloatRep>]) -> Vec<FloatRep> {
        batches
            .iter()
            .map(|b| self.float_sum(&b.iter().collect::<Vec<_>>()))
            .collect()
    }

    pub fn float_sum(&mut self, terms: &[&FloatRep]) -> FloatRep {
        let live: Vec<&FloatRep> = terms.iter().copied().filter(|r| !r.is_zero()).collect();
        match live.len() {
            0 => return FloatRep::zero(),
            1 => return live[0].clone(),
            _ => {}
        }
        let e_min = live
            .iter()
            .map(|r| &r.exponent)
            .min_by(|a, b| self.compare(a, b))
            .expect("nonempty")
            .clone();
        let mut shifted = Vec::with_capacity(live.len());
        for r in &live {
            let gap = self.sub(&r.exponent, &e_min);
            shifted.push(self.shift(&r.mantissa, &gap).expect("gap is nonnegative"));
        }
        let total = self.sum(&shifted.iter().collect::<Vec<_>>());
        let normal = self.to_float(&total);
        self.float_shift(&normal, &e_min)
    }

    /// Exact equality of two normalized floating-point values.
    pub fn float_eq(&self, a: &FloatRep, b: &FloatRep) -> bool {
        a == b
    }
}
