//! Standard graph families used by the corpus, tests and benches.

use crate::graph::{GraphError, LabeledGraph, VertexGroup};

/// Labels are assigned cyclically from `labels` in vertex order.
pub fn labelled(ids: &[String], edges: &[(usize, usize)], labels: &[VertexGroup]) -> Result<LabeledGraph, GraphError> {
    let vertices = ids.iter().enumerate().map(|(i, id)| (id.clone(), labels[i % labels.len()])).collect();
    LabeledGraph::new(vertices, edges)
}

fn numbered(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

/// Cycle on `n >= 3` vertices.
pub fn ngon(n: usize, labels: &[VertexGroup]) -> Result<LabeledGraph, GraphError> {
    let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    labelled(&numbered("v", n), &edges, labels)
}

/// One-skeleton of the `n`-cube; vertices are bit strings.
pub fn cube(n: usize, labels: &[VertexGroup]) -> Result<LabeledGraph, GraphError> {
    let m = 1usize << n;
    let mut edges = Vec::new();
    for v in 0..m {
        for b in 0..n {
            let w = v ^ (1 << b);
            if w > v {
                edges.push((v, w));
            }
        }
    }
    labelled(&numbered("v", m), &edges, labels)
}

/// Path `v0 - v1 - ... - vn`.
pub fn path_a(n: usize, labels: &[VertexGroup]) -> Result<LabeledGraph, GraphError> {
    let edges: Vec<_> = (0..n).map(|i| (i, i + 1)).collect();
    labelled(&numbered("v", n + 1), &edges, labels)
}

/// Path `v0 - ... - v(n-2)` with `v(n-1)` and `vn` both attached to `v(n-2)`.
pub fn fork_b(n: usize, labels: &[VertexGroup]) -> Result<LabeledGraph, GraphError> {
    assert!(n >= 2, "fork needs n >= 2");
    let mut edges: Vec<_> = (0..n - 2).map(|i| (i, i + 1)).collect();
    edges.push((n - 2, n - 1));
    edges.push((n - 2, n));
    labelled(&numbered("v", n + 1), &edges, labels)
}

pub fn complete(n: usize, labels: &[VertexGroup]) -> Result<LabeledGraph, GraphError> {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            edges.push((i, j));
        }
    }
    labelled(&numbered("v", n), &edges, labels)
}

pub fn edgeless(n: usize, labels: &[VertexGroup]) -> Result<LabeledGraph, GraphError> {
    labelled(&numbered("v", n), &[], labels)
}

/// Square `a b c d` with two apexes `v`, `w` joined to all of it.
pub fn octahedron(labels: &[VertexGroup]) -> Result<LabeledGraph, GraphError> {
    let ids: Vec<String> = ["a", "b", "c", "d", "v", "w"].iter().map(|s| s.to_string()).collect();
    let mut edges = vec![(0, 1), (1, 2), (2, 3), (3, 0)];
    for apex in [4, 5] {
        for s in 0..4 {
            edges.push((s, apex));
        }
    }
    labelled(&ids, &edges, labels)
}

/// Twelve vertices: two poles, an upper and a lower pentagon.
pub fn icosahedron(labels: &[VertexGroup]) -> Result<LabeledGraph, GraphError> {
    let mut edges = Vec::new();
    for i in 0..5 {
        let (up, low, up_next, low_next) = (1 + i, 6 + i, 1 + (i + 1) % 5, 6 + (i + 1) % 5);
        edges.push((0, up));
        edges.push((11, low));
        edges.push((up, up_next));
        edges.push((low, low_next));
        edges.push((up, low));
        edges.push((up_next, low));
    }
    labelled(&numbered("v", 12), &edges, labels)
}

/// `K_{2,3}` with parts `{v0, v4}` and `{v1, v2, v3}`.
pub fn k23(labels: &[VertexGroup]) -> Result<LabeledGraph, GraphError> {
    let edges = [(0, 1), (0, 2), (0, 3), (4, 1), (4, 2), (4, 3)];
    labelled(&numbered("v", 5), &edges, labels)
}

/// Seven vertices: `w0` joined to `w1, w2, w3`, which are joined to `w4`,
/// which carries the leaves `w5`, `w6`.
pub fn lambda(labels: &[VertexGroup]) -> Result<LabeledGraph, GraphError> {
    let edges = [(0, 1), (0, 2), (0, 3), (1, 4), (2, 4), (3, 4), (4, 5), (4, 6)];
    labelled(&numbered("w", 7), &edges, labels)
}

pub const Z: VertexGroup = VertexGroup::Infinite;

pub fn cyclic(n: u64) -> VertexGroup {
    VertexGroup::Cyclic(n)
}
