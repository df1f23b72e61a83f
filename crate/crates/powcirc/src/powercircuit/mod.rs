//! Reduced power circuits over a base `Q >= 2`.
//!
//! Every node `P` evaluates to `Q^e(Λ_P)` where `Λ_P` is its successor
//! marking, itself a compact marking over strictly smaller nodes. Nodes are
//! kept sorted by value; two nodes never share a value, so equality of
//! values is equality of successor markings.
//!
//! Nodes live in an append-only arena: a [`NodeId`] is stable for the life
//! of the circuit and every [`Marking`] built against an earlier state stays
//! valid after later insertions. The value order is tracked separately by
//! order-maintenance labels, and [`PowerCircuit::rank`] gives the position
//! of a node in the sorted list.

mod arith;
mod dump;
mod modular;

use std::cmp::Ordering;
use std::collections::HashMap;

use num_bigint::BigInt;
use thiserror::Error;

use crate::csdr;

pub use dump::ParsedDump;

pub type NodeId = u32;

/// Largest supported base. Keeps digit sums and small-value shortcuts in
/// machine integers.
pub const MAX_BASE: u32 = 1 << 20;

/// Node values above this are treated as "huge" by the small-value shortcut.
const SMALL_LIMIT: u64 = 1 << 62;

const LABEL_GAP: u64 = 1 << 32;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CircuitError {
    #[error("base must lie in [2, {MAX_BASE}], got {0}")]
    BadBase(u64),
    #[error("marking references node {0}, which does not exist")]
    DanglingNode(NodeId),
    #[error("marking is not compact")]
    NotCompact,
    #[error("digit {0} is outside the digit range")]
    BadDigit(i64),
    #[error("marking lists node {0} twice")]
    DuplicateNode(NodeId),
    #[error("successor marking has a negative value")]
    NegativeSuccessor,
    #[error("result is not an integer")]
    NonIntegral,
    #[error("exponent marking must be nonnegative")]
    NegativeExponent,
    #[error("modulus must be at least {min}, got {got}")]
    BadModulus { min: u64, got: u64 },
    #[error("dump line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Digit assignment to circuit nodes, terms sorted by ascending node value.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Marking {
    terms: Vec<(NodeId, i32)>,
}

impl Marking {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// `(node, digit)` pairs in ascending node value.
    pub fn terms(&self) -> &[(NodeId, i32)] {
        &self.terms
    }

    /// Size of the support.
    pub fn support(&self) -> usize {
        self.terms.len()
    }

    pub fn digit(&self, node: NodeId) -> i32 {
        self.terms
            .iter()
            .find(|&&(n, _)| n == node)
            .map_or(0, |&(_, d)| d)
    }

    pub fn negated(&self) -> Marking {
        Marking {
            terms: self.terms.iter().map(|&(n, d)| (n, -d)).collect(),
        }
    }

    fn single(node: NodeId, digit: i32) -> Marking {
        Marking {
            terms: vec![(node, digit)],
        }
    }

    fn max_node(&self) -> Option<NodeId> {
        self.terms.iter().map(|&(n, _)| n).max()
    }
}

/// Mantissa/exponent pair denoting `e(mantissa) * Q^e(exponent)`.
///
/// Normalized: a zero mantissa has a zero exponent, otherwise `Q` does not
/// divide the mantissa.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct FloatRep {
    pub mantissa: Marking,
    pub exponent: Marking,
}

impl FloatRep {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.is_zero()
    }

    pub fn negated(&self) -> FloatRep {
        FloatRep {
            mantissa: self.mantissa.negated(),
            exponent: self.exponent.clone(),
        }
    }
}

/// A maximal run of nodes whose values grow by a factor of `Q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Chain {
    /// Rank of the lowest node.
    pub start: usize,
    pub len: usize,
}

#[derive(Debug, Clone)]
struct Node {
    succ: Marking,
    label: u64,
    prev: Option<NodeId>,
    next: Option<NodeId>,
    /// The next node in value order has successor value one larger.
    linked_up: bool,
    /// Position in the initial chain, if the node belongs to it.
    initial_pos: Option<u32>,
    /// Exact value when at most `SMALL_LIMIT`.
    small: Option<u64>,
}

#[derive(Debug, Clone)]
pub struct PowerCircuit {
    base: u32,
    nodes: Vec<Node>,
    order: Vec<NodeId>,
    index: HashMap<Marking, NodeId>,
    initial: Vec<NodeId>,
}

impl PowerCircuit {
    /// A circuit holding the single node of value 1.
    pub fn new(base: u32) -> Result<Self, CircuitError> {
        let mut pc = Self::empty(base)?;
        pc.insert_node(Marking::zero());
        Ok(pc)
    }

    fn empty(base: u32) -> Result<Self, CircuitError> {
        if !(2..=MAX_BASE).contains(&base) {
            return Err(CircuitError::BadBase(u64::from(base)));
        }
        Ok(Self {
            base,
            nodes: Vec::new(),
            order: Vec::new(),
            index: HashMap::new(),
            initial: Vec::new(),
        })
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Snapshot identifier. Circuits only grow, so the node count orders
    /// snapshots of one lineage.
    pub fn version(&self) -> usize {
        self.nodes.len()
    }

    /// Node ids in ascending value order.
    pub fn sorted_nodes(&self) -> &[NodeId] {
        &self.order
    }

    pub fn successor(&self, node: NodeId) -> &Marking {
        &self.nodes[node as usize].succ
    }

    /// Position of `node` in the sorted node list.
    pub fn rank(&self, node: NodeId) -> usize {
        let label = self.label(node);
        self.order
            .binary_search_by(|&n| self.label(n).cmp(&label))
            .expect("node is in the order")
    }

    /// The initial maximal chain, lowest node first.
    pub fn initial_chain(&self) -> &[NodeId] {
        &self.initial
    }

    /// Marking with the single digit `digit` on `node`.
    pub fn node_marking(&self, node: NodeId, digit: i32) -> Marking {
        Marking::single(node, digit)
    }

    /// Builds a marking from arbitrary `(node, digit)` pairs, validating it.
    pub fn marking(&self, mut terms: Vec<(NodeId, i32)>) -> Result<Marking, CircuitError> {
        terms.retain(|&(_, d)| d != 0);
        for &(n, d) in &terms {
            if n as usize >= self.nodes.len() {
                return Err(CircuitError::DanglingNode(n));
            }
            if i64::from(d).abs() >= i64::from(self.base) {
                return Err(CircuitError::BadDigit(i64::from(d)));
            }
        }
        terms.sort_by_key(|&(n, _)| self.label(n));
        for w in terms.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(CircuitError::DuplicateNode(w[0].0));
            }
        }
        let m = Marking { terms };
        if !self.is_compact(&m) {
            return Err(CircuitError::NotCompact);
        }
        Ok(m)
    }

    /// Checks node references, digit range, ordering and compactness.
    pub fn validate(&self, m: &Marking) -> Result<(), CircuitError> {
        let rebuilt = self.marking(m.terms.clone())?;
        if rebuilt != *m {
            return Err(CircuitError::NotCompact);
        }
        Ok(())
    }

    /// Compactness: per chain, no two adjacent digits of magnitude `Q-1`
    /// and no adjacent nonzero digits of opposite sign.
    pub fn is_compact(&self, m: &Marking) -> bool {
        let top = self.base as i32 - 1;
        m.terms.windows(2).all(|w| {
            let (lo, a) = w[0];
            let (hi, b) = w[1];
            let lo_node = &self.nodes[lo as usize];
            let adjacent = lo_node.linked_up && lo_node.next == Some(hi);
            if !adjacent {
                return true;
            }
            let saturated = a.abs() == top && b.abs() == top;
            let sign_clash = a.signum() != b.signum();
            !saturated && !sign_clash
        }) && m.terms.iter().all(|&(_, d)| d != 0 && d.abs() <= top)
    }

    /// Orders `e(a)` against `e(b)` by comparing digits from the highest
    /// node down.
    pub fn compare(&self, a: &Marking, b: &Marking) -> Ordering {
        let (mut i, mut j) = (a.terms.len(), b.terms.len());
        loop {
            match (i, j) {
                (0, 0) => return Ordering::Equal,
                (_, 0) => return a.terms[i - 1].1.cmp(&0),
                (0, _) => return 0.cmp(&b.terms[j - 1].1),
                _ => {
                    let (na, da) = a.terms[i - 1];
                    let (nb, db) = b.terms[j - 1];
                    if na == nb {
                        if da != db {
                            return da.cmp(&db);
                        }
                        i -= 1;
                        j -= 1;
                    } else if self.label(na) > self.label(nb) {
                        return da.cmp(&0);
                    } else {
                        return 0.cmp(&db);
                    }
                }
            }
        }
    }

    /// Sign of `e(m)`, read off the top digit.
    pub fn sign(&self, m: &Marking) -> Ordering {
        m.terms.last().map_or(Ordering::Equal, |&(_, d)| d.cmp(&0))
    }

    /// Maximal chains in ascending order.
    pub fn chains(&self) -> Vec<Chain> {
        let mut out = Vec::new();
        let mut start = 0;
        for (rank, &id) in self.order.iter().enumerate() {
            if !self.nodes[id as usize].linked_up {
                out.push(Chain {
                    start,
                    len: rank + 1 - start,
                });
                start = rank + 1;
            }
        }
        out
    }

    pub fn chain_count(&self) -> usize {
        self.nodes.iter().filter(|n| !n.linked_up).count()
    }

    /// Exact value of `m` when every node in its support is at most 2^62.
    /// Otherwise the top node is huge and `|e(m)| > 2^62 / Q^2`.
    pub fn small_value(&self, m: &Marking) -> Option<i128> {
        let mut total: i128 = 0;
        for &(n, d) in &m.terms {
            let v = self.nodes[n as usize].small?;
            total += i128::from(d) * i128::from(v);
        }
        Some(total)
    }

    /// Exact small-value shortcut used by threshold tests.
    pub(crate) fn at_least(&self, m: &Marking, bound: i128) -> bool {
        match self.small_value(m) {
            Some(v) => v >= bound,
            None => self.sign(m) == Ordering::Greater,
        }
    }

    /// The node whose successor marking is `succ`, inserting it if needed.
    pub fn update_nodes(&mut self, proposals: &[Marking]) -> Result<Vec<NodeId>, CircuitError> {
        for p in proposals {
            self.validate(p)?;
            if self.sign(p) == Ordering::Less {
                return Err(CircuitError::NegativeSuccessor);
            }
        }
        Ok(proposals
            .iter()
            .map(|p| self.insert_node(p.clone()))
            .collect())
    }

    /// Looks up a node by successor marking without inserting.
    pub fn find_node(&self, succ: &Marking) -> Option<NodeId> {
        self.index.get(succ).copied()
    }

    /// Makes the initial chain at least `mu` nodes long, reusing existing
    /// nodes where their successor values already match.
    pub fn ensure_initial_chain(&mut self, mu: usize) {
        while self.initial.len() < mu {
            let i = self.initial.len();
            let digits = csdr::SignedDigitSeq::from_integer(&BigInt::from(i), self.base)
                .expect("valid base");
            let terms: Vec<(NodeId, i32)> = digits
                .digits()
                .iter()
                .enumerate()
                .filter(|(_, &d)| d != 0)
                .map(|(pos, &d)| (self.initial[pos], d))
                .collect();
            self.insert_node(Marking { terms });
        }
    }

    pub(crate) fn insert_node(&mut self, succ: Marking) -> NodeId {
        if let Some(&id) = self.index.get(&succ) {
            return id;
        }
        debug_assert!(self.sign(&succ) != Ordering::Less);
        debug_assert!(self.is_compact(&succ));
        let pos = self.order.partition_point(|&n| {
            self.compare(&self.nodes[n as usize].succ, &succ) == Ordering::Less
        });
        let id = self.nodes.len() as NodeId;
        let prev = pos.checked_sub(1).map(|p| self.order[p]);
        let next = self.order.get(pos).copied();
        let small = self.small_node_value(&succ);
        self.nodes.push(Node {
            succ: succ.clone(),
            label: 0,
            prev,
            next,
            linked_up: false,
            initial_pos: None,
            small,
        });
        self.order.insert(pos, id);
        self.assign_label(pos);
        if let Some(p) = prev {
            self.nodes[p as usize].next = Some(id);
        }
        if let Some(n) = next {
            self.nodes[n as usize].prev = Some(id);
        }
        self.index.insert(succ, id);

        if self.initial.is_empty() && self.nodes[id as usize].succ.is_zero() {
            self.initial.push(id);
            self.nodes[id as usize].initial_pos = Some(0);
        }
        if let Some(p) = prev {
            let linked = self.is_successor_step(p, id);
            self.nodes[p as usize].linked_up = linked;
            self.grow_initial_chain();
        }
        if let Some(n) = next {
            let linked = self.is_successor_step(id, n);
            self.nodes[id as usize].linked_up = linked;
            self.grow_initial_chain();
        }
        id
    }

    fn grow_initial_chain(&mut self) {
        while let Some(&last) = self.initial.last() {
            let node = &self.nodes[last as usize];
            match (node.linked_up, node.next) {
                (true, Some(n)) => {
                    self.nodes[n as usize].initial_pos = Some(self.initial.len() as u32);
                    self.initial.push(n);
                }
                _ => break,
            }
        }
    }

    /// Whether `e(Λ_hi) = e(Λ_lo) + 1`. Outside the initial chain both
    /// successor markings must agree digit for digit; on the initial chain
    /// the digit difference must evaluate to one.
    fn is_successor_step(&self, lo: NodeId, hi: NodeId) -> bool {
        let a = &self.nodes[lo as usize].succ;
        let b = &self.nodes[hi as usize].succ;
        let split = |m: &Marking| {
            let mut rest = Vec::new();
            let mut low = Vec::new();
            for &(n, d) in &m.terms {
                match self.nodes[n as usize].initial_pos {
                    Some(p) => low.push((p as usize, i64::from(d))),
                    None => rest.push((n, d)),
                }
            }
            (low, rest)
        };
        let (low_a, rest_a) = split(a);
        let (low_b, rest_b) = split(b);
        if rest_a != rest_b {
            return false;
        }
        let width = low_a
            .iter()
            .chain(low_b.iter())
            .map(|&(p, _)| p + 1)
            .max()
            .unwrap_or(0);
        let mut diff = vec![0i64; width];
        for &(p, d) in &low_b {
            diff[p] += d;
        }
        for &(p, d) in &low_a {
            diff[p] -= d;
        }
        csdr::compact_from_wide(&diff, self.base) == [1]
    }

    fn small_node_value(&self, succ: &Marking) -> Option<u64> {
        let e = self.small_value(succ)?;
        let e = u32::try_from(e).ok()?;
        let v = u64::from(self.base).checked_pow(e)?;
        (v <= SMALL_LIMIT).then_some(v)
    }

    fn label(&self, n: NodeId) -> u64 {
        self.nodes[n as usize].label
    }

    fn assign_label(&mut self, pos: usize) {
        let lo = pos.checked_sub(1).map(|p| self.label(self.order[p]));
        let hi = self.order.get(pos + 1).map(|&n| self.label(n));
        let label = match (lo, hi) {
            (None, None) => Some(LABEL_GAP),
            (Some(l), None) => l.checked_add(LABEL_GAP),
            (None, Some(h)) => (h >= 2).then_some(h / 2),
            (Some(l), Some(h)) => (h - l >= 2).then(|| l + (h - l) / 2),
        };
        match label {
            Some(l) => {
                let id = self.order[pos];
                self.nodes[id as usize].label = l;
            }
            None => self.relabel(),
        }
    }

    fn relabel(&mut self) {
        let spacing = (u64::MAX / (self.order.len() as u64 + 2)).min(LABEL_GAP);
        for (rank, &id) in self.order.iter().enumerate() {
            self.nodes[id as usize].label = (rank as u64 + 1) * spacing;
        }
    }

    fn check_refs(&self, m: &Marking) -> Result<(), CircuitError> {
        match m.max_node() {
            Some(n) if n as usize >= self.nodes.len() => Err(CircuitError::DanglingNode(n)),
            _ => Ok(()),
        }
    }

    fn next_of(&self, n: NodeId) -> Option<NodeId> {
        let node = &self.nodes[n as usize];
        if node.linked_up {
            node.next
        } else {
            None
        }
    }
}

#[cfg(test)]
mod tests;
