//! Generators of the automorphism group of a graph product.

use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::{LabeledGraph, VertexGroup, VertexSet};
use crate::word::{Letter, NormalWord};

/// Default vertex bound for labelled-graph automorphism enumeration.
pub const DEFAULT_AUT_BOUND: usize = 16;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AutError {
    #[error("invalid generator: {0}")]
    Invalid(String),
    #[error("graph has {n} vertices, above the enumeration bound {bound}")]
    TooManyVertices { n: usize, bound: usize },
    #[error("graph is not expanded")]
    NotExpanded,
    #[error("exponent too large to expand a transvection image")]
    ExponentTooLarge,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AutFamily {
    LabelledGraph,
    Factor,
    Transvection,
    PartialConj,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AutGen {
    /// Vertex permutation preserving labels and edges.
    LabelledGraph(Vec<usize>),
    /// `v ↦ v^m`.
    Factor { v: usize, m: BigInt },
    /// `v ↦ v w^q` for `v ≤τ w`.
    Transvection { v: usize, w: usize },
    /// `z ↦ v z v⁻¹` for `z` in a component of `Γ − st(v)`.
    PartialConj { v: usize, component: VertexSet },
}

/// Composite automorphism, applied right to left.
pub type AutWord = Vec<AutGen>;

impl AutGen {
    pub fn family(&self) -> AutFamily {
        match self {
            AutGen::LabelledGraph(_) => AutFamily::LabelledGraph,
            AutGen::Factor { .. } => AutFamily::Factor,
            AutGen::Transvection { .. } => AutFamily::Transvection,
            AutGen::PartialConj { .. } => AutFamily::PartialConj,
        }
    }

    pub fn describe(&self, g: &LabeledGraph) -> String {
        match self {
            AutGen::LabelledGraph(p) => {
                let pairs: Vec<String> =
                    p.iter().enumerate().map(|(i, &t)| format!("{}:{}", g.id(i), g.id(t))).collect();
                format!("graph[{}]", pairs.join(" "))
            }
            AutGen::Factor { v, m } => format!("factor({}, {m})", g.id(*v)),
            AutGen::Transvection { v, w } => format!("transvection({}, {})", g.id(*v), g.id(*w)),
            AutGen::PartialConj { v, component } => {
                format!("partial_conj({}, {{{}}})", g.id(*v), g.names(*component).join(","))
            }
        }
    }
}

fn invalid(msg: impl Into<String>) -> AutError {
    AutError::Invalid(msg.into())
}

/// Exponent `q` with `v ↦ v w^q` for a transvection.
fn transvection_power(g: &LabeledGraph, v: usize, w: usize) -> u64 {
    match (g.group(v), g.group(w)) {
        (VertexGroup::Primary { p, k }, VertexGroup::Primary { k: l, .. }) if l > k => p.pow(l - k),
        _ => 1,
    }
}

pub fn validate_gen(g: &LabeledGraph, gen: &AutGen) -> Result<(), AutError> {
    let n = g.n();
    match gen {
        AutGen::LabelledGraph(perm) => {
            if perm.len() != n {
                return Err(invalid("permutation has the wrong length"));
            }
            let mut seen = VertexSet::EMPTY;
            for &t in perm {
                if t >= n || seen.contains(t) {
                    return Err(invalid("not a permutation"));
                }
                seen.insert(t);
            }
            for v in 0..n {
                if !g.group(v).isomorphic(&g.group(perm[v])) {
                    return Err(invalid(format!("label of `{}` not preserved", g.id(v))));
                }
                for w in v + 1..n {
                    if g.adjacent(v, w) != g.adjacent(perm[v], perm[w]) {
                        return Err(invalid("adjacency not preserved"));
                    }
                }
            }
            Ok(())
        }
        AutGen::Factor { v, m } => {
            if *v >= n {
                return Err(invalid("vertex out of range"));
            }
            match g.group(*v).order() {
                None if m.abs().is_one() => Ok(()),
                None => Err(invalid("factor of an infinite vertex needs m = ±1")),
                Some(q) if m.gcd(&BigInt::from(q)).is_one() => Ok(()),
                Some(q) => Err(invalid(format!("gcd({m}, {q}) != 1"))),
            }
        }
        AutGen::Transvection { v, w } => {
            if *v >= n || *w >= n {
                return Err(invalid("vertex out of range"));
            }
            if !g.is_expanded() {
                return Err(AutError::NotExpanded);
            }
            if v == w {
                return Err(invalid("transvection needs distinct vertices"));
            }
            if !g.leq_tau_unchecked(*v, *w) {
                return Err(invalid(format!("`{}` is not ≤τ `{}`", g.id(*v), g.id(*w))));
            }
            Ok(())
        }
        AutGen::PartialConj { v, component } => {
            if *v >= n {
                return Err(invalid("vertex out of range"));
            }
            let rest = g.all().difference(g.star(*v));
            if !g.components(rest).contains(component) {
                return Err(invalid("not a connected component of Γ − st(v)"));
            }
            Ok(())
        }
    }
}

fn letter_image(gen: &AutGen, graph: &Arc<LabeledGraph>, l: &Letter) -> Result<NormalWord, AutError> {
    let u = l.vertex;
    let e = &l.exp;
    let one = |v: usize, e: BigInt| (v, e);
    Ok(match gen {
        AutGen::LabelledGraph(perm) => NormalWord::letter(graph.clone(), perm[u], e.clone()),
        AutGen::Factor { v, m } if *v == u => NormalWord::letter(graph.clone(), u, e * m),
        AutGen::Transvection { v, w } if *v == u => {
            if graph.group(u).is_infinite() {
                let reps = e.abs().to_usize().ok_or(AutError::ExponentTooLarge)?;
                let unit: Vec<(usize, BigInt)> = if e.is_positive() {
                    vec![one(*v, BigInt::one()), one(*w, BigInt::one())]
                } else {
                    vec![one(*w, -BigInt::one()), one(*v, -BigInt::one())]
                };
                NormalWord::from_letters(graph.clone(), unit.iter().cycle().take(2 * reps).cloned())
            } else {
                let q = BigInt::from(transvection_power(graph, *v, *w));
                NormalWord::from_letters(graph.clone(), [(*v, e.clone()), (*w, e * q)])
            }
        }
        AutGen::PartialConj { v, component } if component.contains(u) => NormalWord::from_letters(
            graph.clone(),
            [(*v, BigInt::one()), (u, e.clone()), (*v, -BigInt::one())],
        ),
        _ => NormalWord::letter(graph.clone(), u, e.clone()),
    })
}

/// Applies one validated generator.
pub fn apply_gen(gen: &AutGen, x: &NormalWord) -> Result<NormalWord, AutError> {
    validate_gen(x.graph(), gen)?;
    apply_gen_unchecked(gen, x)
}

pub(crate) fn apply_gen_unchecked(gen: &AutGen, x: &NormalWord) -> Result<NormalWord, AutError> {
    let graph = x.graph().clone();
    let images: Vec<NormalWord> =
        x.letters().iter().map(|l| letter_image(gen, &graph, l)).collect::<Result<_, _>>()?;
    let flat = images.iter().flat_map(|w| w.letters().iter().map(|l| (l.vertex, l.exp.clone())));
    Ok(NormalWord::from_letters(graph.clone(), flat.collect::<Vec<_>>()))
}

/// Applies a composite automorphism, rightmost generator first.
pub fn apply(word: &[AutGen], x: &NormalWord) -> Result<NormalWord, AutError> {
    for gen in word {
        validate_gen(x.graph(), gen)?;
    }
    let mut y = x.clone();
    for gen in word.iter().rev() {
        y = apply_gen_unchecked(gen, &y)?;
    }
    Ok(y)
}

/// Inverse as a composite of generators.
pub fn inverse_gen(g: &LabeledGraph, gen: &AutGen) -> AutWord {
    match gen {
        AutGen::LabelledGraph(perm) => {
            let mut inv = vec![0; perm.len()];
            for (i, &t) in perm.iter().enumerate() {
                inv[t] = i;
            }
            vec![AutGen::LabelledGraph(inv)]
        }
        AutGen::Factor { v, m } => {
            let m = match g.group(*v).order() {
                None => m.clone(),
                Some(q) => {
                    let q = BigInt::from(q);
                    let ext = m.extended_gcd(&q);
                    ext.x.mod_floor(&q)
                }
            };
            vec![AutGen::Factor { v: *v, m }]
        }
        AutGen::Transvection { w, .. } => {
            let flip = AutGen::Factor { v: *w, m: -BigInt::one() };
            vec![flip.clone(), gen.clone(), flip]
        }
        AutGen::PartialConj { v, .. } => {
            let flip = AutGen::Factor { v: *v, m: -BigInt::one() };
            vec![flip.clone(), gen.clone(), flip]
        }
    }
}

pub fn inverse(g: &LabeledGraph, word: &[AutGen]) -> AutWord {
    word.iter().rev().flat_map(|gen| inverse_gen(g, gen)).collect()
}

/// All label-preserving graph automorphisms, in lexicographic order.
pub fn enum_labelled_graph_autos(g: &LabeledGraph, bound: usize) -> Result<Vec<Vec<usize>>, AutError> {
    if !g.is_expanded() {
        return Err(AutError::NotExpanded);
    }
    let n = g.n();
    if n > bound {
        return Err(AutError::TooManyVertices { n, bound });
    }
    let degree: Vec<usize> = (0..n).map(|v| g.link(v).len()).collect();
    let mut out = Vec::new();
    let mut perm = Vec::with_capacity(n);
    let mut used = VertexSet::EMPTY;
    fn rec(
        g: &LabeledGraph,
        degree: &[usize],
        perm: &mut Vec<usize>,
        used: &mut VertexSet,
        out: &mut Vec<Vec<usize>>,
    ) {
        let i = perm.len();
        if i == g.n() {
            out.push(perm.clone());
            return;
        }
        for t in 0..g.n() {
            if used.contains(t) || degree[t] != degree[i] || !g.group(i).isomorphic(&g.group(t)) {
                continue;
            }
            if (0..i).any(|j| g.adjacent(i, j) != g.adjacent(t, perm[j])) {
                continue;
            }
            perm.push(t);
            used.insert(t);
            rec(g, degree, perm, used, out);
            used.remove(t);
            perm.pop();
        }
    }
    rec(g, &degree, &mut perm, &mut used, &mut out);
    Ok(out)
}

/// Every nontrivial generator of types factor, transvection and partial
/// conjugation.
pub fn aut0_generators(g: &LabeledGraph) -> Result<Vec<AutGen>, AutError> {
    if !g.is_expanded() {
        return Err(AutError::NotExpanded);
    }
    let mut gens = Vec::new();
    for v in 0..g.n() {
        match g.group(v).order() {
            None => gens.push(AutGen::Factor { v, m: -BigInt::one() }),
            Some(q) => {
                for m in 2..q {
                    if m.gcd(&q) == 1 {
                        gens.push(AutGen::Factor { v, m: BigInt::from(m) });
                    }
                }
            }
        }
    }
    for v in 0..g.n() {
        for w in 0..g.n() {
            if v != w && g.leq_tau_unchecked(v, w) {
                gens.push(AutGen::Transvection { v, w });
            }
        }
    }
    for v in 0..g.n() {
        for component in g.components(g.all().difference(g.star(v))) {
            gens.push(AutGen::PartialConj { v, component });
        }
    }
    Ok(gens)
}

/// A random product of `length` generators drawn uniformly from
/// [`aut0_generators`].
pub fn random_aut0(g: &LabeledGraph, length: usize, seed: u64) -> Result<AutWord, AutError> {
    let gens = aut0_generators(g)?;
    if gens.is_empty() {
        return Ok(Vec::new());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..length).map(|_| gens[rng.gen_range(0..gens.len())].clone()).collect())
}

/// True when the word is the identity map on every generator letter.
pub fn acts_trivially(word: &[AutGen], g: &Arc<LabeledGraph>) -> Result<bool, AutError> {
    for v in 0..g.n() {
        let x = NormalWord::letter(g.clone(), v, 1);
        if apply(word, &x)? != x {
            return Ok(false);
        }
    }
    Ok(true)
}
