//! Group elements of a graph product in canonical normal form.
//!
//! A word is kept reduced (no two letters on the same vertex can be shuffled
//! together) and is stored as the lexicographically least shuffle of itself,
//! comparing letters by vertex index.

use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::{LabeledGraph, VertexSet};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WordError {
    #[error("malformed token `{0}`")]
    Syntax(String),
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("words live over different graphs")]
    GraphMismatch,
    #[error("partition sides are joined by an edge")]
    CrossEdges,
    #[error("word has letters outside the partition")]
    OutsideSupport,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Letter {
    pub vertex: usize,
    pub exp: BigInt,
}

/// Side of a two-part partition.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    A,
    B,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Syllable {
    pub side: Side,
    pub block: NormalWord,
}

#[derive(Clone)]
pub struct NormalWord {
    graph: Arc<LabeledGraph>,
    letters: Vec<Letter>,
}

fn same_graph(a: &Arc<LabeledGraph>, b: &Arc<LabeledGraph>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

/// Exponent reduced into `1..order` for finite vertices; zero means trivial.
fn reduce_exp(g: &LabeledGraph, v: usize, e: BigInt) -> BigInt {
    match g.group(v).order() {
        Some(q) => e.mod_floor(&BigInt::from(q)),
        None => e,
    }
}

/// Appends a letter to a reduced word, merging with the nearest same-vertex
/// letter reachable through commuting letters.
fn push_reduced(g: &LabeledGraph, word: &mut Vec<Letter>, v: usize, e: BigInt) {
    let e = reduce_exp(g, v, e);
    if e.is_zero() {
        return;
    }
    for i in (0..word.len()).rev() {
        let u = word[i].vertex;
        if u == v {
            let merged = reduce_exp(g, v, &word[i].exp + e);
            if merged.is_zero() {
                word.remove(i);
            } else {
                word[i].exp = merged;
            }
            return;
        }
        if !g.adjacent(u, v) {
            break;
        }
    }
    word.push(Letter { vertex: v, exp: e });
}

/// Lexicographically least shuffle of a reduced word.
fn canonical(g: &LabeledGraph, letters: Vec<Letter>) -> Vec<Letter> {
    let n = g.n();
    let mut queues: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, l) in letters.iter().enumerate() {
        queues[l.vertex].push(i);
    }
    let mut heads = vec![0usize; n];
    let front = |v: usize, heads: &[usize], queues: &[Vec<usize>]| queues[v].get(heads[v]).copied();
    let mut slots: Vec<Option<Letter>> = letters.into_iter().map(Some).collect();
    let mut out = Vec::with_capacity(slots.len());
    let mut present = VertexSet::from_iter((0..n).filter(|&v| !queues[v].is_empty()));
    while !present.is_empty() {
        let mut chosen = None;
        for v in present.iter() {
            let pos = front(v, &heads, &queues).unwrap();
            let blockers = present.difference(g.star(v));
            if blockers.iter().all(|u| front(u, &heads, &queues).unwrap() > pos) {
                chosen = Some((v, pos));
                break;
            }
        }
        let (v, pos) = chosen.expect("some letter is always available");
        out.push(slots[pos].take().unwrap());
        heads[v] += 1;
        if front(v, &heads, &queues).is_none() {
            present.remove(v);
        }
    }
    out
}

impl NormalWord {
    pub fn identity(graph: Arc<LabeledGraph>) -> Self {
        NormalWord { graph, letters: Vec::new() }
    }

    /// Normalises an arbitrary sequence of `(vertex, exponent)` letters.
    pub fn from_letters<I>(graph: Arc<LabeledGraph>, letters: I) -> Self
    where
        I: IntoIterator<Item = (usize, BigInt)>,
    {
        let mut word = Vec::new();
        for (v, e) in letters {
            push_reduced(&graph, &mut word, v, e);
        }
        let letters = canonical(&graph, word);
        NormalWord { graph, letters }
    }

    pub fn letter(graph: Arc<LabeledGraph>, v: usize, e: impl Into<BigInt>) -> Self {
        Self::from_letters(graph, [(v, e.into())])
    }

    /// Parses whitespace-separated tokens `id`, `id^k` and `e`.
    pub fn parse(graph: Arc<LabeledGraph>, text: &str) -> Result<Self, WordError> {
        let mut letters = Vec::new();
        for tok in text.split_whitespace() {
            if tok == "e" {
                continue;
            }
            let (id, exp) = match tok.split_once('^') {
                Some((id, e)) => {
                    let e = e.trim_start_matches('(').trim_end_matches(')');
                    let exp: BigInt = e.parse().map_err(|_| WordError::Syntax(tok.to_string()))?;
                    (id, exp)
                }
                None => (tok, BigInt::one()),
            };
            let v = graph
                .index_of(id)
                .ok_or_else(|| WordError::UnknownVertex(id.to_string()))?;
            letters.push((v, exp));
        }
        Ok(Self::from_letters(graph, letters))
    }

    pub fn graph(&self) -> &Arc<LabeledGraph> {
        &self.graph
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn support(&self) -> VertexSet {
        VertexSet::from_iter(self.letters.iter().map(|l| l.vertex))
    }

    pub fn multiply(&self, other: &NormalWord) -> Result<NormalWord, WordError> {
        if !same_graph(&self.graph, &other.graph) {
            return Err(WordError::GraphMismatch);
        }
        Ok(self.mul(other))
    }

    /// Product without the graph check; both words must share a graph.
    pub fn mul(&self, other: &NormalWord) -> NormalWord {
        let mut word = self.letters.clone();
        for l in &other.letters {
            push_reduced(&self.graph, &mut word, l.vertex, l.exp.clone());
        }
        NormalWord { letters: canonical(&self.graph, word), graph: self.graph.clone() }
    }

    pub fn invert(&self) -> NormalWord {
        Self::from_letters(
            self.graph.clone(),
            self.letters.iter().rev().map(|l| (l.vertex, -&l.exp)),
        )
    }

    pub fn power(&self, n: i64) -> NormalWord {
        let base = if n < 0 { self.invert() } else { self.clone() };
        let mut word = Vec::new();
        for _ in 0..n.unsigned_abs() {
            for l in &base.letters {
                push_reduced(&self.graph, &mut word, l.vertex, l.exp.clone());
            }
        }
        NormalWord { letters: canonical(&self.graph, word), graph: self.graph.clone() }
    }

    /// Successive powers `x, x^2, ..., x^n`.
    pub fn powers(&self, n: usize) -> Vec<NormalWord> {
        let mut out = Vec::with_capacity(n);
        let mut word: Vec<Letter> = Vec::new();
        for _ in 0..n {
            for l in &self.letters {
                push_reduced(&self.graph, &mut word, l.vertex, l.exp.clone());
            }
            out.push(NormalWord {
                letters: canonical(&self.graph, word.clone()),
                graph: self.graph.clone(),
            });
        }
        out
    }

    /// Finite order test. A torsion element is conjugate into a clique of
    /// finite vertices of its support, so its order divides the lcm of their
    /// orders. `None` when that lcm exceeds `cap`.
    pub fn has_finite_order(&self, cap: u64) -> Option<bool> {
        let mut l = 1u64;
        for v in self.support().iter() {
            if let Some(q) = self.graph.group(v).order() {
                l = l.lcm(&q);
                if l > cap {
                    return None;
                }
            }
        }
        Some(self.is_identity() || (l > 1 && self.power(l as i64).is_identity()))
    }

    pub fn conjugate_by(&self, y: &NormalWord) -> NormalWord {
        y.mul(self).mul(&y.invert())
    }

    /// Deletes every letter outside `x`.
    pub fn retraction(&self, x: VertexSet) -> NormalWord {
        if self.support().is_subset(x) {
            return self.clone();
        }
        Self::from_letters(
            self.graph.clone(),
            self.letters
                .iter()
                .filter(|l| x.contains(l.vertex))
                .map(|l| (l.vertex, l.exp.clone())),
        )
    }

    /// Free-product blocks of a word in `W_A * W_B`.
    pub fn syllables(&self, a: VertexSet, b: VertexSet) -> Result<Vec<Syllable>, WordError> {
        if !self.graph.no_cross_edges(a, b) {
            return Err(WordError::CrossEdges);
        }
        // A factor of a canonical word is canonical, so blocks need no renormalising.
        let mut out: Vec<(Side, Vec<Letter>)> = Vec::new();
        for l in &self.letters {
            let side = if a.contains(l.vertex) {
                Side::A
            } else if b.contains(l.vertex) {
                Side::B
            } else {
                return Err(WordError::OutsideSupport);
            };
            match out.last_mut() {
                Some((s, block)) if *s == side => block.push(l.clone()),
                _ => out.push((side, vec![l.clone()])),
            }
        }
        Ok(out
            .into_iter()
            .map(|(side, letters)| Syllable { side, block: NormalWord { graph: self.graph.clone(), letters } })
            .collect())
    }

    /// Applies a letter substitution and renormalises.
    pub fn substitute(&self, f: impl Fn(&Letter) -> NormalWord) -> NormalWord {
        let mut word = Vec::new();
        for l in &self.letters {
            for m in f(l).letters {
                push_reduced(&self.graph, &mut word, m.vertex, m.exp);
            }
        }
        NormalWord { letters: canonical(&self.graph, word), graph: self.graph.clone() }
    }

    /// Rebuilds the word over another graph sharing vertex indices.
    pub fn with_graph(&self, graph: Arc<LabeledGraph>) -> NormalWord {
        Self::from_letters(graph, self.letters.iter().map(|l| (l.vertex, l.exp.clone())))
    }
}

impl PartialEq for NormalWord {
    fn eq(&self, other: &Self) -> bool {
        self.letters == other.letters && same_graph(&self.graph, &other.graph)
    }
}

impl Eq for NormalWord {}

impl Hash for NormalWord {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.letters.hash(state);
    }
}

impl fmt::Display for NormalWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "e");
        }
        for (i, l) in self.letters.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{}", self.graph.id(l.vertex))?;
            if !l.exp.is_one() {
                write!(f, "^{}", l.exp)?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for NormalWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "NormalWord({self})")
    }
}

/// A uniformly random letter sequence of the given length, normalised.
pub fn random_word<R: Rng>(graph: &Arc<LabeledGraph>, length: usize, rng: &mut R) -> NormalWord {
    let n = graph.n();
    let letters: Vec<(usize, BigInt)> = (0..length)
        .map(|_| {
            let v = rng.gen_range(0..n);
            let e = match graph.group(v).order() {
                Some(q) => BigInt::from(rng.gen_range(1..q)),
                None => {
                    if rng.gen_bool(0.5) {
                        BigInt::one()
                    } else {
                        -BigInt::one()
                    }
                }
            };
            (v, e)
        })
        .collect();
    NormalWord::from_letters(graph.clone(), letters)
}

pub fn random_word_seeded(graph: &Arc<LabeledGraph>, length: usize, seed: u64) -> NormalWord {
    random_word(graph, length, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Largest absolute exponent, a cheap size measure.
pub fn max_abs_exp(w: &NormalWord) -> BigInt {
    w.letters.iter().map(|l| l.exp.abs()).max().unwrap_or_else(BigInt::zero)
}
