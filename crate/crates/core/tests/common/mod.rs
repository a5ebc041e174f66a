#![allow(dead_code)]

use std::sync::Arc;

use num_bigint::BigInt;
use proptest::prelude::*;
use qmgraph::word::random_word_seeded;
use qmgraph::{LabeledGraph, NormalWord, VertexGroup};

pub fn label(code: u8) -> VertexGroup {
    match code {
        0 => VertexGroup::Infinite,
        1 => VertexGroup::Cyclic(2),
        2 => VertexGroup::Cyclic(3),
        3 => VertexGroup::Cyclic(4),
        _ => VertexGroup::Cyclic(5),
    }
}

/// Expanded graph on `n` vertices from an edge mask and label codes.
pub fn build(n: usize, mask: u64, labels: &[u8]) -> Arc<LabeledGraph> {
    let vertices = (0..n).map(|i| (format!("x{i}"), label(labels[i % labels.len()]))).collect();
    let mut edges = Vec::new();
    let mut bit = 0;
    for i in 0..n {
        for j in i + 1..n {
            if mask >> bit & 1 == 1 {
                edges.push((i, j));
            }
            bit += 1;
        }
    }
    Arc::new(LabeledGraph::new(vertices, &edges).unwrap().expand().unwrap())
}

prop_compose! {
    pub fn graph(max_n: usize)(n in 1..=max_n, mask in any::<u64>(), labels in prop::collection::vec(0u8..5, 1..=max_n)) -> Arc<LabeledGraph> {
        build(n, mask, &labels)
    }
}

prop_compose! {
    pub fn raag(max_n: usize)(n in 1..=max_n, mask in any::<u64>()) -> Arc<LabeledGraph> {
        build(n, mask, &[0])
    }
}

pub fn word(g: &Arc<LabeledGraph>, len: usize, seed: u64) -> NormalWord {
    random_word_seeded(g, len, seed)
}

/// `a * b` with a fixed edgeless cut between the parts: vertices `0..na`
/// form side A, the rest side B.
pub fn free_product(na: usize, nb: usize, mask_a: u64, mask_b: u64, labels: &[u8]) -> Arc<LabeledGraph> {
    let n = na + nb;
    let vertices = (0..n).map(|i| (format!("x{i}"), label(labels[i % labels.len()]))).collect();
    let mut edges = Vec::new();
    for (lo, hi, mask) in [(0, na, mask_a), (na, n, mask_b)] {
        let mut bit = 0;
        for i in lo..hi {
            for j in i + 1..hi {
                if mask >> bit & 1 == 1 {
                    edges.push((i, j));
                }
                bit += 1;
            }
        }
    }
    Arc::new(LabeledGraph::new(vertices, &edges).unwrap().expand().unwrap())
}

pub fn big(n: i64) -> BigInt {
    BigInt::from(n)
}
