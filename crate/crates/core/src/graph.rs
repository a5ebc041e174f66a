//! Labelled simplicial graphs whose vertices carry cyclic groups.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

/// Vertex sets are bitmasks, which caps graphs at this many vertices.
pub const MAX_VERTICES: usize = 64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("line {line}: syntax error: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: duplicate vertex `{id}`")]
    DuplicateVertex { line: usize, id: String },
    #[error("line {line}: undefined endpoint `{id}`")]
    UndefinedEndpoint { line: usize, id: String },
    #[error("line {line}: cyclic order {n} must be at least 2")]
    InvalidOrder { line: usize, n: u64 },
    #[error("line {line}: self-loop on `{id}`")]
    SelfLoop { line: usize, id: String },
    #[error("graph has more than {MAX_VERTICES} vertices")]
    TooLarge,
    #[error("graph is not expanded (a vertex carries a non-primary finite label)")]
    NotExpanded,
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
}

/// The group attached to a vertex.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum VertexGroup {
    Infinite,
    Cyclic(u64),
    Primary { p: u64, k: u32 },
}

impl VertexGroup {
    /// `None` for the infinite cyclic group.
    pub fn order(&self) -> Option<u64> {
        match *self {
            VertexGroup::Infinite => None,
            VertexGroup::Cyclic(n) => Some(n),
            VertexGroup::Primary { p, k } => Some(p.pow(k)),
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, VertexGroup::Infinite)
    }

    pub fn is_z2(&self) -> bool {
        self.order() == Some(2)
    }

    /// Groups are compared up to isomorphism, i.e. by order.
    pub fn isomorphic(&self, other: &VertexGroup) -> bool {
        self.order() == other.order()
    }
}

impl fmt::Display for VertexGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.order() {
            None => write!(f, "Z"),
            Some(n) => write!(f, "Z/{n}"),
        }
    }
}

/// Prime-power factorisation by trial division, primes ascending.
pub fn prime_power_factors(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p.saturating_mul(p) <= n {
        if n.is_multiple_of(p) {
            let mut k = 0;
            while n.is_multiple_of(p) {
                n /= p;
                k += 1;
            }
            out.push((p, k));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

#[derive(Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct VertexSet(pub u64);

impl VertexSet {
    pub const EMPTY: VertexSet = VertexSet(0);

    pub fn singleton(v: usize) -> Self {
        VertexSet(1 << v)
    }

    pub fn full(n: usize) -> Self {
        if n >= 64 {
            VertexSet(u64::MAX)
        } else {
            VertexSet((1u64 << n) - 1)
        }
    }

    pub fn from_iter<I: IntoIterator<Item = usize>>(it: I) -> Self {
        let mut s = VertexSet::EMPTY;
        for v in it {
            s.insert(v);
        }
        s
    }

    pub fn contains(self, v: usize) -> bool {
        self.0 >> v & 1 == 1
    }

    pub fn insert(&mut self, v: usize) {
        self.0 |= 1 << v;
    }

    pub fn remove(&mut self, v: usize) {
        self.0 &= !(1 << v);
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn union(self, o: VertexSet) -> VertexSet {
        VertexSet(self.0 | o.0)
    }

    pub fn intersection(self, o: VertexSet) -> VertexSet {
        VertexSet(self.0 & o.0)
    }

    pub fn difference(self, o: VertexSet) -> VertexSet {
        VertexSet(self.0 & !o.0)
    }

    pub fn is_subset(self, o: VertexSet) -> bool {
        self.0 & !o.0 == 0
    }

    pub fn is_disjoint(self, o: VertexSet) -> bool {
        self.0 & o.0 == 0
    }

    pub fn first(self) -> Option<usize> {
        (self.0 != 0).then(|| self.0.trailing_zeros() as usize)
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let v = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(v)
            }
        })
    }
}

impl fmt::Debug for VertexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// Isomorphism type of a `~τ` class of an expanded graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClassType {
    FiniteAbelian,
    FreeAbelian(usize),
    Free(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TauClass {
    pub members: VertexSet,
    pub class_type: ClassType,
}

/// The `~τ` classes with the partial order induced by `≤τ`.
#[derive(Clone, Debug)]
pub struct ClassPoset {
    pub classes: Vec<TauClass>,
    /// `leq[i][j]` iff class i ≤τ class j.
    pub leq: Vec<Vec<bool>>,
}

impl ClassPoset {
    pub fn is_minimal(&self, i: usize) -> bool {
        (0..self.classes.len()).all(|j| j == i || !self.leq[j][i])
    }

    pub fn minimal(&self) -> Vec<usize> {
        (0..self.classes.len()).filter(|&i| self.is_minimal(i)).collect()
    }

    pub fn class_of(&self, v: usize) -> usize {
        self.classes
            .iter()
            .position(|c| c.members.contains(v))
            .expect("every vertex lies in a class")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabeledGraph {
    ids: Vec<String>,
    groups: Vec<VertexGroup>,
    adj: Vec<VertexSet>,
}

fn valid_id(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl LabeledGraph {
    /// Builds a graph from vertex labels and an edge list over vertex indices.
    pub fn new(
        vertices: Vec<(String, VertexGroup)>,
        edges: &[(usize, usize)],
    ) -> Result<Self, GraphError> {
        if vertices.len() > MAX_VERTICES {
            return Err(GraphError::TooLarge);
        }
        let mut seen = HashMap::new();
        for (i, (id, g)) in vertices.iter().enumerate() {
            if !valid_id(id) || id == "e" {
                return Err(GraphError::Syntax { line: 0, msg: format!("invalid vertex id `{id}`") });
            }
            if seen.insert(id.clone(), i).is_some() {
                return Err(GraphError::DuplicateVertex { line: 0, id: id.clone() });
            }
            if let Some(n) = g.order() {
                if n < 2 {
                    return Err(GraphError::InvalidOrder { line: 0, n });
                }
            }
        }
        let n = vertices.len();
        let mut adj = vec![VertexSet::EMPTY; n];
        for &(a, b) in edges {
            if a >= n || b >= n {
                return Err(GraphError::UnknownVertex(format!("#{}", a.max(b))));
            }
            if a == b {
                return Err(GraphError::SelfLoop { line: 0, id: vertices[a].0.clone() });
            }
            adj[a].insert(b);
            adj[b].insert(a);
        }
        let (ids, groups) = vertices.into_iter().unzip();
        Ok(LabeledGraph { ids, groups, adj })
    }

    /// Parses the line-oriented graph format.
    pub fn parse(text: &str) -> Result<Self, GraphError> {
        let mut vertices: Vec<(String, VertexGroup)> = Vec::new();
        let mut index: HashMap<String, usize> = HashMap::new();
        let mut edge_lines = Vec::new();
        for (ln, raw) in text.lines().enumerate() {
            let line = ln + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let toks: Vec<&str> = body.split_whitespace().collect();
            let syntax = |msg: &str| GraphError::Syntax { line, msg: msg.to_string() };
            match toks[0] {
                "vertex" => {
                    if toks.len() != 3 {
                        return Err(syntax("expected `vertex <id> <label>`"));
                    }
                    let id = toks[1];
                    if !valid_id(id) || id == "e" {
                        return Err(syntax(&format!("invalid vertex id `{id}`")));
                    }
                    let group = parse_label(toks[2], line)?;
                    if index.contains_key(id) {
                        return Err(GraphError::DuplicateVertex { line, id: id.to_string() });
                    }
                    if vertices.len() == MAX_VERTICES {
                        return Err(GraphError::TooLarge);
                    }
                    index.insert(id.to_string(), vertices.len());
                    vertices.push((id.to_string(), group));
                }
                "edge" => {
                    if toks.len() != 3 {
                        return Err(syntax("expected `edge <id> <id>`"));
                    }
                    for id in &toks[1..] {
                        if !valid_id(id) {
                            return Err(syntax(&format!("invalid vertex id `{id}`")));
                        }
                    }
                    edge_lines.push((line, toks[1].to_string(), toks[2].to_string()));
                }
                other => return Err(syntax(&format!("unknown directive `{other}`"))),
            }
        }
        let mut edges = Vec::new();
        for (line, a, b) in edge_lines {
            let ia = *index
                .get(&a)
                .ok_or_else(|| GraphError::UndefinedEndpoint { line, id: a.clone() })?;
            let ib = *index
                .get(&b)
                .ok_or_else(|| GraphError::UndefinedEndpoint { line, id: b.clone() })?;
            if ia == ib {
                return Err(GraphError::SelfLoop { line, id: a });
            }
            edges.push((ia, ib));
        }
        LabeledGraph::new(vertices, &edges)
    }

    /// Serialises back into the graph file format.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for v in 0..self.n() {
            out.push_str(&format!("vertex {} {}\n", self.ids[v], self.groups[v]));
        }
        for v in 0..self.n() {
            for w in self.adj[v].iter().filter(|&w| w > v) {
                out.push_str(&format!("edge {} {}\n", self.ids[v], self.ids[w]));
            }
        }
        out
    }

    pub fn n(&self) -> usize {
        self.ids.len()
    }

    pub fn all(&self) -> VertexSet {
        VertexSet::full(self.n())
    }

    pub fn id(&self, v: usize) -> &str {
        &self.ids[v]
    }

    pub fn group(&self, v: usize) -> VertexGroup {
        self.groups[v]
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.ids.iter().position(|s| s == id)
    }

    /// Resolves a list of vertex ids into a set.
    pub fn set_of<S: AsRef<str>>(&self, ids: &[S]) -> Result<VertexSet, GraphError> {
        let mut s = VertexSet::EMPTY;
        for id in ids {
            let id = id.as_ref();
            s.insert(self.index_of(id).ok_or_else(|| GraphError::UnknownVertex(id.to_string()))?);
        }
        Ok(s)
    }

    pub fn names(&self, s: VertexSet) -> Vec<&str> {
        s.iter().map(|v| self.id(v)).collect()
    }

    pub fn adjacent(&self, v: usize, w: usize) -> bool {
        self.adj[v].contains(w)
    }

    pub fn link(&self, v: usize) -> VertexSet {
        self.adj[v]
    }

    pub fn star(&self, v: usize) -> VertexSet {
        let mut s = self.adj[v];
        s.insert(v);
        s
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(|a| a.len()).sum::<usize>() / 2
    }

    pub fn is_expanded(&self) -> bool {
        !self.groups.iter().any(|g| matches!(g, VertexGroup::Cyclic(_)))
    }

    /// Replaces every finite cyclic vertex by a clique of its primary factors.
    /// Each new vertex inherits the adjacencies of the old one.
    pub fn expand(&self) -> Result<LabeledGraph, GraphError> {
        let mut taken: std::collections::HashSet<String> = self.ids.iter().cloned().collect();
        let mut vertices = Vec::new();
        let mut parts: Vec<Vec<usize>> = Vec::with_capacity(self.n());
        for v in 0..self.n() {
            let mut mine = Vec::new();
            match self.groups[v] {
                VertexGroup::Cyclic(n) => {
                    let factors = prime_power_factors(n);
                    if factors.len() == 1 {
                        let (p, k) = factors[0];
                        mine.push(vertices.len());
                        vertices.push((self.ids[v].clone(), VertexGroup::Primary { p, k }));
                    } else {
                        for (p, k) in factors {
                            let mut id = format!("{}_{}", self.ids[v], p.pow(k));
                            while taken.contains(&id) {
                                id.push('_');
                            }
                            taken.insert(id.clone());
                            mine.push(vertices.len());
                            vertices.push((id, VertexGroup::Primary { p, k }));
                        }
                    }
                }
                g => {
                    mine.push(vertices.len());
                    vertices.push((self.ids[v].clone(), g));
                }
            }
            parts.push(mine);
        }
        if vertices.len() > MAX_VERTICES {
            return Err(GraphError::TooLarge);
        }
        let mut edges = Vec::new();
        for part in &parts {
            for (i, &a) in part.iter().enumerate() {
                for &b in &part[i + 1..] {
                    edges.push((a, b));
                }
            }
        }
        for v in 0..self.n() {
            for w in self.adj[v].iter().filter(|&w| w > v) {
                for &a in &parts[v] {
                    for &b in &parts[w] {
                        edges.push((a, b));
                    }
                }
            }
        }
        LabeledGraph::new(vertices, &edges)
    }

    /// `lk(v) ⊆ st(w)`.
    pub fn leq(&self, v: usize, w: usize) -> bool {
        self.link(v).is_subset(self.star(w))
    }

    /// `st(v) ⊆ st(w)`.
    pub fn leq_s(&self, v: usize, w: usize) -> bool {
        self.star(v).is_subset(self.star(w))
    }

    /// The transvection preorder on an expanded graph. Reflexive.
    pub fn leq_tau(&self, v: usize, w: usize) -> Result<bool, GraphError> {
        if !self.is_expanded() {
            return Err(GraphError::NotExpanded);
        }
        Ok(self.leq_tau_unchecked(v, w))
    }

    pub(crate) fn leq_tau_unchecked(&self, v: usize, w: usize) -> bool {
        if v == w {
            return true;
        }
        match (self.groups[v], self.groups[w]) {
            (VertexGroup::Infinite, _) => self.leq(v, w),
            (VertexGroup::Primary { p, .. }, VertexGroup::Primary { p: q, .. }) if p == q => {
                self.leq_s(v, w)
            }
            _ => false,
        }
    }

    /// `~τ` classes ordered by their first vertex.
    pub fn tau_classes(&self) -> Result<ClassPoset, GraphError> {
        if !self.is_expanded() {
            return Err(GraphError::NotExpanded);
        }
        let n = self.n();
        let mut assigned = VertexSet::EMPTY;
        let mut classes = Vec::new();
        for v in 0..n {
            if assigned.contains(v) {
                continue;
            }
            let members = VertexSet::from_iter(
                (v..n).filter(|&w| self.leq_tau_unchecked(v, w) && self.leq_tau_unchecked(w, v)),
            );
            assigned = assigned.union(members);
            let class_type = if self.groups[v].is_infinite() {
                if self.is_clique(members) {
                    ClassType::FreeAbelian(members.len())
                } else {
                    ClassType::Free(members.len())
                }
            } else {
                ClassType::FiniteAbelian
            };
            classes.push(TauClass { members, class_type });
        }
        let reps: Vec<usize> = classes.iter().map(|c| c.members.first().unwrap()).collect();
        let leq = reps
            .iter()
            .map(|&a| reps.iter().map(|&b| self.leq_tau_unchecked(a, b)).collect())
            .collect();
        Ok(ClassPoset { classes, leq })
    }

    /// Downward closed under `≤τ`.
    pub fn is_lower_cone(&self, x: VertexSet) -> Result<bool, GraphError> {
        if !self.is_expanded() {
            return Err(GraphError::NotExpanded);
        }
        Ok(self.lower_cone_violation(x).is_none())
    }

    /// A pair `(s, t)` with `t ∈ x`, `s ≤τ t` and `s ∉ x`, if any.
    pub fn lower_cone_violation(&self, x: VertexSet) -> Option<(usize, usize)> {
        for t in x.iter() {
            for s in 0..self.n() {
                if !x.contains(s) && self.leq_tau_unchecked(s, t) {
                    return Some((s, t));
                }
            }
        }
        None
    }

    /// `L_M = V − ∪_{w∈M} st(w)`.
    pub fn lower_cone_l(&self, m: VertexSet) -> VertexSet {
        self.lower_cone_l_within(m, self.all())
    }

    /// `L_M` computed inside the vertex set `u`.
    pub fn lower_cone_l_within(&self, m: VertexSet, u: VertexSet) -> VertexSet {
        m.iter().fold(u, |acc, w| acc.difference(self.star(w)))
    }

    /// Vertices adjacent to every other vertex.
    pub fn center_support(&self) -> VertexSet {
        self.center_within(self.all())
    }

    pub fn center_within(&self, u: VertexSet) -> VertexSet {
        VertexSet::from_iter(u.iter().filter(|&v| u.is_subset(self.star(v))))
    }

    pub fn is_clique(&self, x: VertexSet) -> bool {
        x.iter().all(|v| x.difference(VertexSet::singleton(v)).is_subset(self.adj[v]))
    }

    pub fn is_edgeless(&self, x: VertexSet) -> bool {
        x.iter().all(|v| self.adj[v].is_disjoint(x))
    }

    pub fn is_connected(&self, x: VertexSet) -> bool {
        self.components(x).len() <= 1
    }

    /// Connected components of the induced subgraph on `x`, by first vertex.
    pub fn components(&self, x: VertexSet) -> Vec<VertexSet> {
        self.components_by(x, |v| self.adj[v])
    }

    /// Connected components of the complement graph; these are the direct factors.
    pub fn direct_factor_decomposition(&self) -> Vec<VertexSet> {
        let all = self.all();
        self.components_by(all, |v| all.difference(self.star(v)))
    }

    fn components_by(&self, x: VertexSet, nbrs: impl Fn(usize) -> VertexSet) -> Vec<VertexSet> {
        let mut left = x;
        let mut out = Vec::new();
        while let Some(start) = left.first() {
            let mut comp = VertexSet::singleton(start);
            let mut frontier = comp;
            while !frontier.is_empty() {
                let mut next = VertexSet::EMPTY;
                for v in frontier.iter() {
                    next = next.union(nbrs(v).intersection(x));
                }
                frontier = next.difference(comp);
                comp = comp.union(frontier);
            }
            left = left.difference(comp);
            out.push(comp);
        }
        out
    }

    /// No edges between `a` and `b`.
    pub fn no_cross_edges(&self, a: VertexSet, b: VertexSet) -> bool {
        a.iter().all(|v| self.adj[v].is_disjoint(b))
    }

    /// True when the group over `x` is a single infinite cyclic vertex.
    pub fn is_single_z(&self, x: VertexSet) -> bool {
        x.len() == 1 && self.groups[x.first().unwrap()].is_infinite()
    }

    /// True when the group over `x` is a single vertex of order two.
    pub fn is_single_z2(&self, x: VertexSet) -> bool {
        x.len() == 1 && self.groups[x.first().unwrap()].is_z2()
    }
}

fn parse_label(tok: &str, line: usize) -> Result<VertexGroup, GraphError> {
    if tok == "Z" {
        return Ok(VertexGroup::Infinite);
    }
    let bad = || GraphError::Syntax { line, msg: format!("invalid label `{tok}`") };
    let n: u64 = tok.strip_prefix("Z/").ok_or_else(bad)?.parse().map_err(|_| bad())?;
    if n < 2 {
        return Err(GraphError::InvalidOrder { line, n });
    }
    Ok(VertexGroup::Cyclic(n))
}
