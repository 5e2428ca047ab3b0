#![allow(dead_code)]

use std::collections::BTreeSet;

use qsa_core::dense::DenseOperator;
use qsa_core::propagator::{AttachmentSpec, SwapperSpec};
use qsa_core::schedule::{replay_symbolic, ConnectivityGraph, QsaSchedule, Seed};
use qsa_core::{Pauli, PauliString};
use rand::seq::SliceRandom;
use rand::Rng;

fn letter(rng: &mut impl Rng) -> Pauli {
    Pauli::NON_IDENTITY[rng.random_range(0..3)]
}

fn other_letter(rng: &mut impl Rng, not: Pauli) -> Pauli {
    let choices: Vec<Pauli> = Pauli::NON_IDENTITY.into_iter().filter(|&p| p != not).collect();
    choices[rng.random_range(0..2)]
}

/// Random schedule on `n` sites that validates clean on the complete graph:
/// seed on two random sites, layers of disjoint attachments onto fresh
/// sites with connectors matching the current letter, and random swappers.
pub fn random_schedule(rng: &mut impl Rng, n: usize) -> QsaSchedule {
    assert!(n >= 2);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let total = rng.random_range(2..=n);
    let mut letters = vec![Pauli::I; n];
    let (a, b) = (order[0], order[1]);
    letters[a] = letter(rng);
    letters[b] = letter(rng);
    let seed = PauliString::new(letters.clone(), 0).unwrap();

    let mut grown: Vec<usize> = vec![a, b];
    let mut fresh: Vec<usize> = order[2..total].to_vec();
    let mut layers = Vec::new();
    while !fresh.is_empty() {
        let mut connectors = grown.clone();
        connectors.shuffle(rng);
        let k = rng.random_range(1..=connectors.len().min(fresh.len()));
        let mut layer = Vec::new();
        let mut added = Vec::new();
        for &c in connectors.iter().take(k) {
            let m = fresh.pop().unwrap();
            let alpha = letters[c];
            let beta = other_letter(rng, alpha);
            let lm = letter(rng);
            layer.push(AttachmentSpec::new(c, alpha, beta, m, lm).unwrap());
            letters[c] = beta;
            letters[m] = lm;
            added.push(m);
        }
        grown.extend(added);
        layers.push(layer);
    }
    let mut final_swappers = Vec::new();
    let used: BTreeSet<usize> = grown.iter().copied().collect();
    for &s in &used {
        if rng.random_bool(0.3) {
            let beta = other_letter(rng, letters[s]);
            final_swappers.push(SwapperSpec::new(s, letters[s], beta).unwrap());
            letters[s] = beta;
        }
    }
    let tg = rng.random_range(-3.0..3.0);
    let mut s = QsaSchedule {
        n_sites: n,
        seed: Seed { string: seed, tg },
        layers,
        final_swappers,
        target: PauliString::identity(n),
    };
    s.target = replay_symbolic(&s).unwrap();
    s
}

/// Frobenius norm of `a − b`, an upper bound on the spectral distance.
pub fn frobenius_distance(a: &DenseOperator, b: &DenseOperator) -> f64 {
    (a.matrix() - b.matrix()).norm()
}

/// Random connected graph: a random spanning tree plus extra edges.
pub fn random_graph(rng: &mut impl Rng, n: usize) -> ConnectivityGraph {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut edges = Vec::new();
    for k in 1..n {
        edges.push((order[k], order[rng.random_range(0..k)]));
    }
    for a in 0..n {
        for b in a + 1..n {
            if rng.random_bool(0.25) {
                edges.push((a, b));
            }
        }
    }
    ConnectivityGraph::new(n, edges).unwrap()
}
