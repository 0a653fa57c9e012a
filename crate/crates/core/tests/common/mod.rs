//! Independent brute-force reimplementations of the engine's math, written
//! against the definitions rather than the engine code: label multisets as
//! string-keyed maps, two-pass variance, interval-scan symbol lookup, and a
//! dense chi-square sum. The test suites compare the engine against these.
//!
//! Each integration test target compiles its own copy of this module and
//! uses a different subset of it, so unused-item lints stay off.
#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use sigmatch::{LabeledGraph, VertexId};

/// Label multiset of `{u} ∪ adj(u)` keyed by label name.
pub fn closed_neighborhood(g: &LabeledGraph, u: VertexId) -> BTreeMap<String, u32> {
    let mut counts = BTreeMap::new();
    *counts.entry(g.label_name(u).to_string()).or_insert(0) += 1;
    for &w in g.neighbors(u) {
        *counts.entry(g.label_name(w).to_string()).or_insert(0) += 1;
    }
    counts
}

/// Similarity of a target multiset against a query multiset, straight from
/// the definition: overlap / (overlap + deficit^gamma).
pub fn oracle_eta(
    target: &BTreeMap<String, u32>,
    query: &BTreeMap<String, u32>,
    gamma: f64,
) -> f64 {
    let mut overlap = 0u64;
    let mut deficit = 0u64;
    for (label, &want) in query {
        let have = target.get(label).copied().unwrap_or(0);
        overlap += want.min(have) as u64;
        deficit += want.saturating_sub(have) as u64;
    }
    if overlap == 0 {
        0.0
    } else {
        overlap as f64 / (overlap as f64 + (deficit as f64).powf(gamma))
    }
}

/// Mean, sample standard deviation, and maximum standardized deviation of
/// the similarity over all ordered vertex pairs, computed two-pass on a
/// materialized list.
pub fn oracle_distribution(g: &LabeledGraph, gamma: f64) -> (f64, f64, f64) {
    let n = g.vertex_count();
    assert!(n >= 2, "oracle needs at least two vertices");
    let hoods: Vec<_> = (0..n as VertexId)
        .map(|u| closed_neighborhood(g, u))
        .collect();
    let mut etas = Vec::with_capacity(n * (n - 1));
    for u in 0..n {
        for w in 0..n {
            if u != w {
                etas.push(oracle_eta(&hoods[u], &hoods[w], gamma));
            }
        }
    }
    let count = etas.len() as f64;
    let psi = etas.iter().sum::<f64>() / count;
    let var = etas.iter().map(|e| (e - psi) * (e - psi)).sum::<f64>() / (count - 1.0);
    let delta = var.sqrt();
    let max_dev = if delta == 0.0 {
        0.0
    } else {
        etas.iter()
            .map(|e| (e - psi).abs())
            .fold(0.0f64, f64::max)
            / delta
    };
    (psi, delta, max_dev)
}

/// Symbol rank by scanning the band intervals one by one.
pub fn oracle_symbolize(eta: f64, psi: f64, delta: f64, kappa: f64, tau: usize) -> u32 {
    if delta == 0.0 || eta <= psi {
        return 1;
    }
    let t = (eta - psi) / delta;
    if t < 1.0 + kappa {
        return 1;
    }
    for i in 2..=tau {
        let lo = 1.0 + (i as f64 - 1.0) * kappa;
        let hi = 1.0 + i as f64 * kappa;
        if t >= lo && t < hi {
            return i as u32;
        }
    }
    tau as u32
}

/// Dense chi-square: every symbol contributes (observed - expected)^2 /
/// expected, including the unobserved ones.
pub fn oracle_chi_square(symbol_ranks: &[u32], probabilities: &[f64]) -> f64 {
    assert!(!symbol_ranks.is_empty());
    let len = symbol_ranks.len() as f64;
    let mut observed = vec![0u64; probabilities.len()];
    for &rank in symbol_ranks {
        observed[rank as usize - 1] += 1;
    }
    observed
        .iter()
        .zip(probabilities)
        .map(|(&o, &p)| {
            let expected = len * p;
            (o as f64 - expected) * (o as f64 - expected) / expected
        })
        .sum()
}

/// A random labeled graph: 2..=max_n vertices, labels L0..L{max_labels-1},
/// each possible edge present with probability ~3/n.
pub fn random_graph(rng: &mut ChaCha8Rng, max_n: usize, max_labels: usize) -> LabeledGraph {
    let n = rng.random_range(2..=max_n);
    let labels: Vec<String> = (0..n)
        .map(|_| format!("L{}", rng.random_range(0..max_labels)))
        .collect();
    let p = (3.0 / n as f64).min(1.0);
    let mut edges = Vec::new();
    for u in 0..n as VertexId {
        for w in (u + 1)..n as VertexId {
            if rng.random_bool(p) {
                edges.push((u, w));
            }
        }
    }
    LabeledGraph::from_parts(&labels, &edges).expect("random graph is well-formed")
}
