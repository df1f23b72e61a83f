use num_bigint::BigInt;
use proptest::prelude::*;

use super::*;
use crate::oracle::{evaluate_marking_exact, node_values_exact, DEFAULT_BIT_CAP};

fn value(pc: &PowerCircuit, m: &Marking) -> BigInt {
    evaluate_marking_exact(pc, m, DEFAULT_BIT_CAP).expect("small enough to evaluate")
}

fn int(pc: &mut PowerCircuit, x: i64) -> Marking {
    pc.int_marking(&BigInt::from(x))
}

/// Nodes of value 1, Q, Q^Q, ... up to height `h`.
fn tower(pc: &mut PowerCircuit, h: usize) -> Vec<NodeId> {
    let mut ids = vec![pc.update_nodes(&[Marking::zero()]).unwrap()[0]];
    for _ in 0..h {
        let below = *ids.last().unwrap();
        let succ = pc.node_marking(below, 1);
        ids.push(pc.update_nodes(&[succ]).unwrap()[0]);
    }
    ids
}

fn assert_sorted(pc: &PowerCircuit) {
    if let Ok(vals) = node_values_exact(pc, DEFAULT_BIT_CAP) {
        assert!(vals.windows(2).all(|w| w[0] < w[1]), "node values not increasing");
    }
    for w in pc.sorted_nodes().windows(2) {
        assert_eq!(
            pc.compare(pc.successor(w[0]), pc.successor(w[1])),
            Ordering::Less
        );
    }
}

#[test]
fn tower_chain_compare() {
    let mut pc = PowerCircuit::new(2).unwrap();
    let t = tower(&mut pc, 5);
    let vals = node_values_exact(&pc, 70_000).unwrap();
    assert_eq!(vals[4], BigInt::from(65536));
    assert_eq!(vals[5], BigInt::from(2).pow(65536u32));
    let l = pc.node_marking(t[5], 1);
    let m = pc.node_marking(t[4], 1);
    assert_eq!(pc.compare(&l, &m), Ordering::Greater);
    assert_eq!(pc.compare(&l, &l), Ordering::Equal);
}

#[test]
fn compare_small_chain() {
    // 1 + 2 is not compact in base 2; 3 is written -1 + 4.
    let mut pc = PowerCircuit::new(2).unwrap();
    pc.ensure_initial_chain(3);
    let c = pc.initial_chain().to_vec();
    assert_eq!(pc.marking(vec![(c[0], 1), (c[1], 1)]), Err(CircuitError::NotCompact));
    let l = int(&mut pc, 3);
    let m = pc.marking(vec![(c[2], 1)]).unwrap();
    assert_eq!(pc.compare(&l, &m), Ordering::Less);
    assert_eq!(pc.compare(&m, &l), Ordering::Greater);
}

#[test]
fn initial_chain_growth() {
    let mut pc = PowerCircuit::new(2).unwrap();
    pc.ensure_initial_chain(0);
    assert_eq!(pc.len(), 1);
    pc.ensure_initial_chain(3);
    assert_eq!(pc.initial_chain().len(), 3);
    assert_eq!(
        node_values_exact(&pc, 64).unwrap(),
        [1, 2, 4].map(BigInt::from).to_vec()
    );
    let before = pc.len();
    pc.ensure_initial_chain(2);
    assert_eq!(pc.len(), before);
}

#[test]
fn update_nodes_merges_duplicates() {
    let mut pc = PowerCircuit::new(2).unwrap();
    let t = tower(&mut pc, 3);
    let dup = pc.successor(t[2]).clone();
    let ids = pc.update_nodes(&[dup.clone(), dup]).unwrap();
    assert_eq!(ids, [t[2], t[2]]);
    assert_eq!(pc.len(), 4);
    assert!(pc.update_nodes(&[]).unwrap().is_empty());
}

/// Base-3 circuit with node values 1, 3, 81 (successor values 0, 1, 4).
fn sparse_base3() -> PowerCircuit {
    PowerCircuit::parse_dump(3, "node 0:\nnode 1: +1@0\nnode 2: +1@0 +1@1\n")
        .unwrap()
        .circuit
}

#[test]
fn update_nodes_between() {
    let mut pc = sparse_base3();
    let one = pc.sorted_nodes()[0];
    let nine = pc.update_nodes(&[pc.node_marking(one, 2)]).unwrap()[0];
    assert_eq!(pc.rank(nine), 2);
    assert_eq!(
        node_values_exact(&pc, 64).unwrap(),
        [1, 3, 9, 81].map(BigInt::from).to_vec()
    );
    assert_sorted(&pc);
}

#[test]
fn extend_chains_examples() {
    let mut pc = PowerCircuit::new(2).unwrap();
    pc.ensure_initial_chain(2);
    assert!(pc.extend_chains(0).is_empty());
    pc.extend_chains(1);
    assert_eq!(
        node_values_exact(&pc, 64).unwrap(),
        [1, 2, 4].map(BigInt::from).to_vec()
    );

    let mut pc = sparse_base3();
    let added = pc.extend_chains(1);
    assert_eq!(added.len(), 2);
    assert_eq!(
        node_values_exact(&pc, 64).unwrap(),
        [1, 3, 9, 81, 243].map(BigInt::from).to_vec()
    );
    assert_sorted(&pc);
}

#[test]
fn addition() {
    let mut pc = PowerCircuit::new(2).unwrap();
    pc.ensure_initial_chain(4);
    let len = pc.len();
    let (a, b) = (int(&mut pc, 3), int(&mut pc, 5));
    let s = pc.add_markings(&[vec![a.clone(), b]]).unwrap().pop().unwrap();
    assert_eq!(pc.len(), len);
    assert_eq!(s.terms(), &[(pc.initial_chain()[3], 1)]);
    let single = pc.add_markings(&[vec![a.clone()]]).unwrap().pop().unwrap();
    assert_eq!(single, a);
    assert!(pc.add(&a, &a.negated()).is_zero());
}

#[test]
fn multiply_by_power() {
    let mut pc = PowerCircuit::new(2).unwrap();
    let (k, l) = (int(&mut pc, 3), int(&mut pc, 2));
    let out = pc
        .mult_by_power(&[(k.clone(), l.clone()), (k.clone(), Marking::zero()), (Marking::zero(), l)])
        .unwrap();
    assert_eq!(value(&pc, &out[0]), BigInt::from(12));
    assert_eq!(out[1], k);
    assert!(out[2].is_zero());
    assert_eq!(out[0].support(), k.support());

    let half = int(&mut pc, -1);
    assert_eq!(pc.shift(&k, &half), Err(CircuitError::NonIntegral));
}

#[test]
fn floating_point() {
    let mut pc = PowerCircuit::new(2).unwrap();
    let twelve = int(&mut pc, 12);
    let three = int(&mut pc, 3);
    let reps = pc.make_floating_point(&[twelve, Marking::zero(), three]);
    assert_eq!(value(&pc, &reps[0].mantissa), BigInt::from(3));
    assert_eq!(value(&pc, &reps[0].exponent), BigInt::from(2));
    assert!(reps[1].is_zero() && reps[1].exponent.is_zero());
    assert_eq!(value(&pc, &reps[2].mantissa), BigInt::from(3));
    assert!(reps[2].exponent.is_zero());

    // 3*2^2 + 1 = 13
    let one = int(&mut pc, 1);
    let r1 = reps[0].clone();
    let r2 = pc.to_float(&one);
    let s = pc.fp_add(&[vec![r1.clone(), r2]]).pop().unwrap();
    assert_eq!(value(&pc, &s.mantissa), BigInt::from(13));
    assert!(s.exponent.is_zero());
    assert!(pc.float_sum(&[&r1, &r1.negated()]).is_zero());

    // 2^-1 + 2^-1 = 1
    let minus_one = int(&mut pc, -1);
    let unit = pc.to_float(&one);
    let half = pc.float_shift(&unit, &minus_one);
    assert_eq!(pc.float_to_int(&half), None);
    let s = pc.float_sum(&[&half, &half]);
    assert_eq!(value(&pc, &s.mantissa), BigInt::from(1));
    assert!(s.exponent.is_zero());
    assert_eq!(pc.float_to_int(&s), Some(one));
}

#[test]
fn residues() {
    let mut pc = PowerCircuit::new(2).unwrap();
    let t = tower(&mut pc, 5);
    let m = pc.node_marking(t[4], 1);
    assert_eq!(pc.mod_const(&m, 3).unwrap(), 1);
    assert_eq!(pc.mod_const(&Marking::zero(), 7).unwrap(), 0);
    let five = int(&mut pc, 5);
    assert_eq!(pc.mod_const(&five, 4).unwrap(), 1);
    assert!(pc.mod_const(&five, 1).is_err());

    let thirteen = int(&mut pc, 13);
    let two = int(&mut pc, 2);
    let one = int(&mut pc, 1);
    let r = pc.mod_power(&thirteen, &two, 1).unwrap();
    assert_eq!(value(&pc, &r), BigInt::from(1));
    let r = pc.mod_power(&thirteen, &Marking::zero(), 1).unwrap();
    assert!(r.is_zero());
    let r = pc.mod_power(&thirteen, &one, 3).unwrap();
    assert_eq!(value(&pc, &r), BigInt::from(1));
    assert!(pc.mod_power(&thirteen, &one, 0).is_err());
    assert_eq!(
        pc.mod_power(&thirteen, &one.negated(), 3),
        Err(CircuitError::NegativeExponent)
    );
}

#[test]
fn residues_on_tower_nodes() {
    let mut pc = PowerCircuit::new(2).unwrap();
    let t = tower(&mut pc, 5);
    // Node values 1, 2, 4, 16, 65536, 2^65536.
    let exps: [u64; 6] = [0, 1, 2, 4, 16, 65536];
    for k in 2..=64u64 {
        for (i, &e) in exps.iter().enumerate() {
            let m = pc.node_marking(t[i], 1);
            let want = BigInt::from(2).modpow(&BigInt::from(e), &BigInt::from(k));
            assert_eq!(BigInt::from(pc.mod_const(&m, k).unwrap()), want, "node {i}, k {k}");
        }
    }
}

#[test]
fn integers_on_initial_chain() {
    let mut pc = PowerCircuit::new(3).unwrap();
    let m = int(&mut pc, 187);
    let c = pc.initial_chain().to_vec();
    assert_eq!(m.terms(), &[(c[0], -2), (c[3], 1), (c[4], 2)]);
    assert_eq!(value(&pc, &m), BigInt::from(187));
    assert!(int(&mut pc, 0).is_zero());

    let mut pc = PowerCircuit::new(2).unwrap();
    let m = int(&mut pc, -5);
    let c = pc.initial_chain().to_vec();
    assert_eq!(m.terms(), &[(c[0], -1), (c[2], -1)]);
}

#[test]
fn dump_round_trip() {
    let mut pc = PowerCircuit::new(3).unwrap();
    let m = int(&mut pc, 187);
    let n = int(&mut pc, -40);
    let text = pc.dump(&[("x", &m), ("y", &n)]);
    assert!(text.starts_with("node 0:\n"));
    let parsed = PowerCircuit::parse_dump(3, &text).unwrap();
    let names: Vec<&str> = parsed.markings.iter().map(|(s, _)| s.as_str()).collect();
    assert_eq!(names, ["x", "y"]);
    let again = parsed.circuit.dump(
        &parsed
            .markings
            .iter()
            .map(|(s, m)| (s.as_str(), m))
            .collect::<Vec<_>>(),
    );
    assert_eq!(again, text);
}

#[test]
fn dump_rejects_bad_input() {
    for bad in [
        "node 0:\nnode 1: +1@0\nnode 2: +1@0\n",
        "node 0:\nnode 1: +1@0 +1@1\n",
        "node 0:\nnode 2: +1@0\n",
        "node 0:\nnode 1: -1@0\n",
        "node 0:\nnode 1: +2@0\n",
        "node 0: +1@0\n",
        "marking x: +1@0\nnode 0:\n",
        "vertex 0:\n",
        "node 0\n",
        "node 0:\nnode 1: +1@0\nnode 2: +1@1 +1@0\nnode 3: +1@0 +1@1\n",
    ] {
        assert!(PowerCircuit::parse_dump(2, bad).is_err(), "{bad:?}");
    }
}

#[test]
fn snapshots_are_monotone() {
    let mut pc = PowerCircuit::new(2).unwrap();
    let a = int(&mut pc, 37);
    let before = pc.clone();
    let b = int(&mut pc, 1000);
    let _ = pc.shift(&a, &b).unwrap();
    for id in 0..before.len() as NodeId {
        assert_eq!(before.successor(id), pc.successor(id));
    }
    assert_eq!(value(&before, &a), value(&pc, &a));
    assert_sorted(&pc);
}

fn arb_base() -> impl Strategy<Value = u32> {
    prop_oneof![Just(2u32), Just(3), Just(5)]
}

proptest! {
    #[test]
    fn sums_match_oracle(q in arb_base(), xs in prop::collection::vec(-5000i64..5000, 1..6)) {
        let mut pc = PowerCircuit::new(q).unwrap();
        let ms: Vec<Marking> = xs.iter().map(|&x| int(&mut pc, x)).collect();
        let s = pc.sum(&ms.iter().collect::<Vec<_>>());
        prop_assert!(pc.is_compact(&s));
        prop_assert_eq!(value(&pc, &s), BigInt::from(xs.iter().sum::<i64>()));
        assert_sorted(&pc);
    }

    #[test]
    fn shifted_sums_match_oracle(
        q in arb_base(),
        terms in prop::collection::vec((-300i64..300, 0u32..12), 1..5),
    ) {
        let mut pc = PowerCircuit::new(q).unwrap();
        let mut want = BigInt::from(0);
        let mut ms = Vec::new();
        for &(x, e) in &terms {
            let k = int(&mut pc, x);
            let l = int(&mut pc, i64::from(e));
            ms.push(pc.shift(&k, &l).unwrap());
            want += BigInt::from(x) * BigInt::from(q).pow(e);
        }
        let s = pc.sum(&ms.iter().collect::<Vec<_>>());
        prop_assert!(pc.is_compact(&s));
        prop_assert_eq!(value(&pc, &s), want);
        assert_sorted(&pc);
    }

    #[test]
    fn residues_match_oracle(q in arb_base(), x in -100_000i64..100_000, e in 0u32..40, k in 2u64..200) {
        let mut pc = PowerCircuit::new(q).unwrap();
        let base = int(&mut pc, x);
        let exp = int(&mut pc, i64::from(e));
        let m = pc.shift(&base, &exp).unwrap();
        let big = BigInt::from(x) * BigInt::from(q).pow(e);
        let want = ((&big % k) + k) % k;
        prop_assert_eq!(BigInt::from(pc.mod_const(&m, k).unwrap()), want);
    }

    #[test]
    fn mod_power_matches_oracle(q in arb_base(), x in -100_000i64..100_000, e in 0i64..8, r in 1u64..12) {
        let mut pc = PowerCircuit::new(q).unwrap();
        let l = int(&mut pc, x);
        let k = int(&mut pc, e);
        let m = pc.mod_power(&l, &k, r).unwrap();
        prop_assert!(pc.is_compact(&m));
        let modulus = BigInt::from(q).pow(e as u32) * r;
        let want = ((BigInt::from(x) % &modulus) + &modulus) % &modulus;
        prop_assert_eq!(value(&pc, &m), want);
    }
}
