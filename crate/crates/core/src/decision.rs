//! Deciding whether a graph product admits unbounded automorphism-invariant
//! quasimorphisms, with a verified witness when the answer is constructive.

use std::fmt;
use std::sync::Arc;

use log::debug;
use num_bigint::BigInt;
use num_traits::Zero;
use thiserror::Error;

use crate::autos::{enum_labelled_graph_autos, AutError, DEFAULT_AUT_BOUND};
use crate::codes::{HomogParams, Partition};
use crate::graph::{ClassPoset, GraphError, LabeledGraph, VertexSet};
use crate::invariant::{certified_non_isomorphic, Evaluator, QmKind, QmValue};
use crate::word::{NormalWord, Side};

/// Cap on the number of lower-cone candidates examined.
pub const MAX_CONE_CANDIDATES: usize = 1 << 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DecisionError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("not a right-angled Artin graph: vertex `{0}` has a finite label")]
    NotRaag(String),
    #[error("verdict carries no constructive witness")]
    NotConstructive,
    #[error(transparent)]
    Aut(#[from] AutError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Status {
    Finite,
    Abelian,
    ProvablyNone,
    ExistsConstructive,
    ExistsNonConstructive,
    Unknown,
}

impl Status {
    pub fn exists(self) -> bool {
        matches!(self, Status::ExistsConstructive | Status::ExistsNonConstructive)
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl std::str::FromStr for Status {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "Finite" => Status::Finite,
            "Abelian" => Status::Abelian,
            "ProvablyNone" => Status::ProvablyNone,
            "ExistsConstructive" => Status::ExistsConstructive,
            "ExistsNonConstructive" => Status::ExistsNonConstructive,
            "Unknown" => Status::Unknown,
            other => return Err(format!("unknown status `{other}`")),
        })
    }
}

/// A direct factor found while peeling the graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DirectFactor {
    /// A clique: a finite or free abelian factor.
    Abelian(VertexSet),
    /// An edgeless set of `k` vertices of order two, the free product of `k` copies of `Z/2`.
    FreeZ2(VertexSet),
}

/// A verified unbounded invariant quasimorphism and a word it does not vanish on.
#[derive(Clone, Debug)]
pub struct Witness {
    pub evaluator: Evaluator,
    pub word: NormalWord,
    pub value: QmValue,
    pub route: String,
}

#[derive(Clone, Debug)]
pub struct Verdict {
    pub status: Status,
    pub graph: Arc<LabeledGraph>,
    pub witness: Option<Witness>,
    pub decomposition: Vec<DirectFactor>,
    pub trace: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct DecideOptions {
    pub z: Vec<u64>,
    pub params: HomogParams,
    pub aut_bound: usize,
    pub max_cone_candidates: usize,
    /// Verification attempts allowed in the non-invariant lower-cone search.
    pub max_search_attempts: usize,
}

impl Default for DecideOptions {
    fn default() -> Self {
        DecideOptions {
            z: vec![1, 2, 3],
            params: HomogParams::default(),
            aut_bound: DEFAULT_AUT_BOUND,
            max_cone_candidates: MAX_CONE_CANDIDATES,
            max_search_attempts: 64,
        }
    }
}

/// A labelled-graph-invariant lower cone whose induced graph splits as a free
/// product meeting the existence criterion.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InvariantCone {
    pub cone: VertexSet,
    pub components: Vec<VertexSet>,
}

struct Ctx<'a> {
    g: Arc<LabeledGraph>,
    opts: &'a DecideOptions,
    autos: Option<Vec<Vec<usize>>>,
    poset: ClassPoset,
    trace: Vec<String>,
}

enum Outcome {
    Done(Status),
    Witnessed(Witness),
}

pub fn decide(g: &LabeledGraph) -> Result<Verdict, DecisionError> {
    decide_with(g, &DecideOptions::default())
}

pub fn decide_with(g: &LabeledGraph, opts: &DecideOptions) -> Result<Verdict, DecisionError> {
    let mut ctx = Ctx::new(g, opts)?;
    let out = ctx.run(false);
    Ok(ctx.finish(out))
}

/// Right-angled Artin graphs only.
pub fn decide_raag(g: &LabeledGraph) -> Result<Verdict, DecisionError> {
    decide_raag_with(g, &DecideOptions::default())
}

pub fn decide_raag_with(g: &LabeledGraph, opts: &DecideOptions) -> Result<Verdict, DecisionError> {
    if let Some(v) = (0..g.n()).find(|&v| !g.group(v).is_infinite()) {
        return Err(DecisionError::NotRaag(g.id(v).to_string()));
    }
    let mut ctx = Ctx::new(g, opts)?;
    let out = ctx.run(true);
    Ok(ctx.finish(out))
}

/// The witness word of a constructive verdict.
pub fn witness(v: &Verdict) -> Result<&NormalWord, DecisionError> {
    match (&v.status, &v.witness) {
        (Status::ExistsConstructive, Some(w)) => Ok(&w.word),
        _ => Err(DecisionError::NotConstructive),
    }
}

/// All lower cones (nonempty), ordered by size and then by vertex list.
pub fn lower_cones(g: &LabeledGraph, cap: usize) -> Result<Vec<VertexSet>, GraphError> {
    let poset = g.tau_classes()?;
    Ok(lower_cones_of(&poset, cap))
}

fn lower_cones_of(poset: &ClassPoset, cap: usize) -> Vec<VertexSet> {
    let c = poset.classes.len();
    let below: Vec<u64> = (0..c)
        .map(|i| (0..c).filter(|&j| poset.leq[j][i]).fold(0u64, |acc, j| acc | 1 << j))
        .collect();
    let total: u64 = if c >= 63 { u64::MAX } else { 1u64 << c };
    let limit = total.min(cap as u64 + 1);
    if limit < total {
        debug!("lower-cone enumeration truncated at {cap} candidates");
    }
    let mut out = Vec::new();
    for mask in 1..limit {
        let closed = (0..c).all(|i| mask >> i & 1 == 0 || below[i] & !mask == 0);
        if closed {
            let cone = (0..c)
                .filter(|&i| mask >> i & 1 == 1)
                .fold(VertexSet::EMPTY, |acc, i| acc.union(poset.classes[i].members));
            out.push(cone);
        }
    }
    sort_sets(&mut out);
    out
}

fn sort_sets(sets: &mut [VertexSet]) {
    sets.sort_by_key(|s| (s.len(), s.iter().collect::<Vec<_>>()));
}

fn image(perm: &[usize], s: VertexSet) -> VertexSet {
    VertexSet::from_iter(s.iter().map(|v| perm[v]))
}

/// Invariant lower cones meeting the free-product criterion: at least two
/// components, at most two of them `Z`, and not all of them `Z/2`.
pub fn find_invariant_cones(g: &LabeledGraph) -> Result<Vec<InvariantCone>, DecisionError> {
    if !g.is_expanded() {
        return Err(GraphError::NotExpanded.into());
    }
    let autos = enum_labelled_graph_autos(g, DEFAULT_AUT_BOUND)?;
    let poset = g.tau_classes()?;
    Ok(invariant_cones(g, &poset, &autos, MAX_CONE_CANDIDATES))
}

fn invariant_cones(g: &LabeledGraph, poset: &ClassPoset, autos: &[Vec<usize>], cap: usize) -> Vec<InvariantCone> {
    lower_cones_of(poset, cap)
        .into_iter()
        .filter(|&x| autos.iter().all(|p| image(p, x) == x))
        .filter_map(|cone| {
            let components = g.components(cone);
            let zs = components.iter().filter(|&&c| g.is_single_z(c)).count();
            let all_z2 = components.iter().all(|&c| g.is_single_z2(c));
            (components.len() >= 2 && zs <= 2 && !all_z2).then_some(InvariantCone { cone, components })
        })
        .collect()
}

/// Repeats `z` and, for odd length, appends one longer run so that runs
/// alternate cleanly across powers.
fn pattern_runs(z: &[u64]) -> Vec<u64> {
    let mut runs = z.to_vec();
    if runs.len() % 2 == 1 {
        runs.push(z.iter().max().unwrap() + 1);
    }
    runs
}

type Letters = Vec<(usize, BigInt)>;

/// Pairs of distinct non-trivial elements of the side group used as run values.
fn value_pairs(g: &LabeledGraph, c: VertexSet) -> Vec<(Letters, Letters)> {
    let mut out = Vec::new();
    for v in c.iter().filter(|&v| g.group(v).order().is_none_or(|q| q >= 3)).take(2) {
        out.push((vec![(v, BigInt::from(1))], vec![(v, BigInt::from(2))]));
    }
    'outer: for v in c.iter() {
        for w in g.link(v).intersection(c).iter().filter(|&w| w > v) {
            out.push((vec![(v, BigInt::from(1))], vec![(w, BigInt::from(1))]));
            if out.len() >= 3 {
                break 'outer;
            }
        }
    }
    out
}

fn separators(g: &LabeledGraph, d: VertexSet) -> Vec<Letters> {
    let _ = g;
    let mut out: Vec<Letters> = d.iter().take(2).map(|v| vec![(v, BigInt::from(1))]).collect();
    if d.len() >= 2 {
        out.push(d.iter().map(|v| (v, BigInt::from(1))).collect());
    }
    out
}

/// Candidate words on which the quasimorphism should not vanish.
pub fn witness_words(g: &Arc<LabeledGraph>, part: &Partition, kind: &QmKind) -> Vec<NormalWord> {
    let runs = pattern_runs(kind.z());
    let mut out = Vec::new();
    match kind {
        QmKind::WeightedZ { .. } => {
            let v = part.a.first().unwrap();
            for d in separators(g, part.b) {
                let mut letters = Vec::new();
                for (i, &len) in runs.iter().enumerate() {
                    let e = if i % 2 == 0 { len as i64 } else { -(len as i64) };
                    letters.push((v, BigInt::from(e)));
                    letters.extend(d.iter().cloned());
                }
                out.push(NormalWord::from_letters(g.clone(), letters));
            }
        }
        QmKind::Code { .. } | QmKind::SumBothSides { .. } => {
            let (c, d) = match kind {
                QmKind::Code { side: Side::B, .. } => (part.b, part.a),
                _ => (part.a, part.b),
            };
            for (alpha, beta) in value_pairs(g, c) {
                for sep in separators(g, d) {
                    let mut letters = Vec::new();
                    for (i, &len) in runs.iter().enumerate() {
                        let val = if i % 2 == 0 { &alpha } else { &beta };
                        for _ in 0..len {
                            letters.extend(val.iter().cloned());
                            letters.extend(sep.iter().cloned());
                        }
                    }
                    out.push(NormalWord::from_letters(g.clone(), letters));
                }
            }
        }
    }
    out
}

/// Admissible kinds for a partition, most specific first.
fn kinds_for(g: &LabeledGraph, part: &Partition, z: &[u64]) -> Vec<(Partition, QmKind)> {
    let (za, zb) = (g.is_single_z(part.a), g.is_single_z(part.b));
    let z = z.to_vec();
    match (za, zb) {
        (true, true) => vec![],
        (true, false) => vec![(*part, QmKind::WeightedZ { z })],
        (false, true) => vec![(part.swapped(), QmKind::WeightedZ { z })],
        (false, false) => {
            let mut out = Vec::new();
            if certified_non_isomorphic(g, part.a, part.b) {
                for side in [Side::A, Side::B] {
                    if !g.is_single_z2(part.side(side)) {
                        out.push((*part, QmKind::Code { side, z: z.clone() }));
                    }
                }
            }
            if !g.is_single_z2(part.a) && !g.is_single_z2(part.b) {
                out.push((*part, QmKind::SumBothSides { z }));
            }
            out
        }
    }
}

impl<'a> Ctx<'a> {
    fn new(g: &LabeledGraph, opts: &'a DecideOptions) -> Result<Self, DecisionError> {
        let g = Arc::new(g.expand()?);
        let autos = match enum_labelled_graph_autos(&g, opts.aut_bound) {
            Ok(a) => Some(a),
            Err(AutError::TooManyVertices { .. }) => None,
            Err(e) => return Err(e.into()),
        };
        let poset = g.tau_classes()?;
        Ok(Ctx { g, opts, autos, poset, trace: Vec::new() })
    }

    fn note(&mut self, s: impl Into<String>) {
        let s = s.into();
        debug!("{s}");
        self.trace.push(s);
    }

    fn names(&self, s: VertexSet) -> String {
        format!("{{{}}}", self.g.names(s).join(","))
    }

    fn finish(self, out: (Outcome, Vec<DirectFactor>)) -> Verdict {
        let (outcome, decomposition) = out;
        let (status, witness) = match outcome {
            Outcome::Done(s) => (s, None),
            Outcome::Witnessed(w) => (Status::ExistsConstructive, Some(w)),
        };
        let mut trace = self.trace;
        trace.push(format!("status={status}"));
        Verdict { status, graph: self.g, witness, decomposition, trace }
    }

    fn run(&mut self, raag: bool) -> (Outcome, Vec<DirectFactor>) {
        let g = self.g.clone();
        let all = g.all();
        self.note(format!("expanded graph: {} vertices, {} edges", g.n(), g.edge_count()));
        if self.autos.is_none() {
            self.note(format!(
                "labelled-graph automorphisms not enumerated (more than {} vertices); witnesses cannot be verified",
                self.opts.aut_bound
            ));
        }
        if g.is_clique(all) {
            let finite = (0..g.n()).all(|v| !g.group(v).is_infinite());
            self.note("graph is complete: the group is abelian");
            let s = if finite { Status::Finite } else { Status::Abelian };
            return (Outcome::Done(s), vec![DirectFactor::Abelian(all)]);
        }
        if let Some(dec) = self.dihedral_product() {
            self.note("direct product of infinite dihedral and abelian factors");
            return (Outcome::Done(Status::ProvablyNone), dec);
        }
        let comps = g.components(all);
        if comps.len() >= 2 {
            return (self.free_product(&comps), Vec::new());
        }
        let finite = (0..g.n()).all(|v| !g.group(v).is_infinite());
        let infinite = (0..g.n()).all(|v| g.group(v).is_infinite());
        if finite {
            self.finite_procedure()
        } else if infinite || raag {
            (self.raag_connected(), Vec::new())
        } else {
            (self.mixed_connected(), Vec::new())
        }
    }

    fn dihedral_product(&self) -> Option<Vec<DirectFactor>> {
        let g = &self.g;
        let mut dec = Vec::new();
        let mut any_dihedral = false;
        for part in g.direct_factor_decomposition() {
            if g.is_clique(part) {
                dec.push(DirectFactor::Abelian(part));
            } else if part.len() == 2 && part.iter().all(|v| g.group(v).is_z2()) {
                any_dihedral = true;
                dec.push(DirectFactor::FreeZ2(part));
            } else {
                return None;
            }
        }
        any_dihedral.then_some(dec)
    }

    /// Builds, averages and checks a candidate quasimorphism.
    fn try_candidate(&mut self, cone: VertexSet, part: Partition, route: &str) -> Option<Witness> {
        let autos = self.autos.clone()?;
        for (part, kind) in kinds_for(&self.g, &part, &self.opts.z) {
            let built = Evaluator::build(self.g.clone(), cone, part, kind.clone(), self.opts.params.clone());
            let ev = match built {
                Ok(e) => e,
                Err(e) => {
                    self.note(format!(
                        "reject cone {} split {} | {} {kind}: {e}",
                        self.names(cone),
                        self.names(part.a),
                        self.names(part.b)
                    ));
                    continue;
                }
            };
            let ev = ev.with_autos(autos.clone());
            for word in witness_words(&self.g, &part, &kind) {
                match ev.evaluate(&word) {
                    Ok(v) if v.exact && !v.value.is_zero() => {
                        self.note(format!(
                            "{route}: cone {} split {} | {} {kind} is nonzero on the witness",
                            self.names(cone),
                            self.names(part.a),
                            self.names(part.b)
                        ));
                        return Some(Witness { evaluator: ev, word, value: v, route: route.to_string() });
                    }
                    Ok(_) => {}
                    Err(e) => self.note(format!("evaluation failed: {e}")),
                }
            }
            self.note(format!(
                "cone {} split {} | {} {kind}: witnesses vanish",
                self.names(cone),
                self.names(part.a),
                self.names(part.b)
            ));
        }
        None
    }

    fn free_product(&mut self, comps: &[VertexSet]) -> Outcome {
        let g = self.g.clone();
        let k = comps.len();
        self.note(format!("disconnected: free product of {k} freely indecomposable factors"));
        let zs: Vec<VertexSet> = comps.iter().copied().filter(|&c| g.is_single_z(c)).collect();
        if comps.iter().all(|&c| g.is_single_z2(c)) {
            self.note(format!("free product of {k} copies of Z/2: open case"));
            return Outcome::Done(Status::Unknown);
        }
        if zs.len() >= 3 {
            self.note(format!("{} infinite cyclic free factors: open case", zs.len()));
            return Outcome::Done(Status::Unknown);
        }
        if zs.len() == 2 {
            self.note("two infinite cyclic free factors: the base is F₂");
            return Outcome::Done(Status::ExistsNonConstructive);
        }
        let mut pairs = Vec::new();
        if let Some(&z) = zs.first() {
            pairs.extend(comps.iter().filter(|&&c| c != z).map(|&c| (z, c)));
        } else {
            for &a in comps.iter().filter(|&&c| !g.is_single_z2(c)) {
                pairs.extend(comps.iter().filter(|&&c| c != a).map(|&c| (a, c)));
            }
        }
        for (a, b) in pairs {
            let part = Partition { a, b };
            if let Some(w) = self.try_candidate(g.all(), part, "free product") {
                return Outcome::Witnessed(w);
            }
        }
        self.note("existence holds but no candidate verified");
        Outcome::Done(Status::ExistsNonConstructive)
    }

    fn classes_in(&self, u: VertexSet) -> Vec<usize> {
        (0..self.poset.classes.len()).filter(|&i| self.poset.classes[i].members.is_subset(u)).collect()
    }

    /// Classes inside `u` with no other class inside `u` below them.
    fn minimal_in(&self, u: VertexSet) -> Vec<usize> {
        let inside = self.classes_in(u);
        inside
            .iter()
            .copied()
            .filter(|&i| inside.iter().all(|&j| j == i || !self.poset.leq[j][i]))
            .collect()
    }

    fn finite_procedure(&mut self) -> (Outcome, Vec<DirectFactor>) {
        let g = self.g.clone();
        let mut u = g.all();
        let mut dec = Vec::new();
        while !u.is_empty() {
            let center = g.center_within(u);
            if !center.is_empty() {
                self.note(format!("peel central finite abelian factor {}", self.names(center)));
                dec.push(DirectFactor::Abelian(center));
                u = u.difference(center);
                continue;
            }
            let comps = g.components(u);
            if comps.len() >= 2 {
                if comps.iter().all(|&c| g.is_single_z2(c)) {
                    self.note(format!("peel free product of {} copies of Z/2 {}", comps.len(), self.names(u)));
                    dec.push(DirectFactor::FreeZ2(u));
                    break;
                }
                return (self.claim(u, "disconnected remainder"), dec);
            }
            let m = self.poset.classes[self.minimal_in(u)[0]].members;
            let l = g.lower_cone_l_within(m, u);
            let cone = m.union(l);
            let lcomps = g.components(l);
            self.note(format!("minimal class M={} with L_M={}", self.names(m), self.names(l)));
            if !(g.is_single_z2(m) && lcomps.iter().all(|&c| g.is_single_z2(c))) {
                return (self.claim(cone, "M ∪ L_M"), dec);
            }
            let rest = u.difference(cone);
            let pivot = l.iter().find(|&y| rest.iter().any(|z| !g.adjacent(z, y)));
            if let Some(y) = pivot {
                let ys = VertexSet::singleton(y);
                let cone = ys.union(g.lower_cone_l_within(ys, u));
                self.note(format!("pivot to M={}", self.names(ys)));
                return (self.claim(cone, "pivot"), dec);
            }
            self.note(format!("peel direct factor {} (free product of {} copies of Z/2)", self.names(cone), cone.len()));
            dec.push(DirectFactor::FreeZ2(cone));
            u = u.difference(cone);
        }
        let worst = dec
            .iter()
            .map(|f| match f {
                DirectFactor::FreeZ2(s) => s.len(),
                DirectFactor::Abelian(_) => 0,
            })
            .max()
            .unwrap_or(0);
        if worst <= 2 {
            self.note("every factor is finite abelian or infinite dihedral");
            (Outcome::Done(Status::ProvablyNone), dec)
        } else {
            self.note(format!("a factor is a free product of {worst} copies of Z/2: open case"));
            (Outcome::Done(Status::Unknown), dec)
        }
    }

    /// `cone` is a lower cone splitting as a free product of at least two
    /// factors, not all `Z/2`.
    fn claim(&mut self, cone: VertexSet, why: &str) -> Outcome {
        let g = self.g.clone();
        let comps = g.components(cone);
        self.note(format!("{why}: lower cone {} splits into {} factors", self.names(cone), comps.len()));
        for &wb in comps.iter().filter(|&&c| !g.is_single_z2(c)) {
            for &wa in comps.iter().filter(|&&c| c != wb) {
                let a = self.poset.classes[self.minimal_in(wa)[0]].members;
                let b = self.poset.classes[self.minimal_in(wb)[0]].members;
                let found = if g.is_single_z2(a) && g.is_single_z2(b) {
                    self.try_candidate(a.union(wb), Partition { a, b: wb }, "class against factor")
                } else {
                    self.try_candidate(a.union(b), Partition { a, b }, "minimal classes")
                };
                if let Some(w) = found {
                    return Outcome::Witnessed(w);
                }
            }
        }
        for &wb in comps.iter().filter(|&&c| !g.is_single_z2(c)) {
            for &wa in comps.iter().filter(|&&c| c != wb) {
                if let Some(w) = self.try_candidate(cone, Partition { a: wa, b: wb }, "factors of the cone") {
                    return Outcome::Witnessed(w);
                }
            }
        }
        self.note("existence holds but no candidate verified");
        Outcome::Done(Status::ExistsNonConstructive)
    }

    fn invariant_cone_route(&mut self) -> (Option<Witness>, bool) {
        let Some(autos) = self.autos.clone() else {
            return (None, false);
        };
        let cones = invariant_cones(&self.g, &self.poset, &autos, self.opts.max_cone_candidates);
        let g = self.g.clone();
        let mut f2_only = false;
        for ic in cones {
            let zs: Vec<VertexSet> = ic.components.iter().copied().filter(|&c| g.is_single_z(c)).collect();
            self.note(format!("invariant lower cone {} with {} factors", self.names(ic.cone), ic.components.len()));
            if zs.len() == 2 {
                self.note("its base is F₂");
                f2_only = true;
                continue;
            }
            let mut pairs = Vec::new();
            if let Some(&z) = zs.first() {
                pairs.extend(ic.components.iter().filter(|&&c| c != z).map(|&c| (z, c)));
            } else {
                for &a in ic.components.iter().filter(|&&c| !g.is_single_z2(c)) {
                    pairs.extend(ic.components.iter().filter(|&&c| c != a).map(|&c| (a, c)));
                }
            }
            for (a, b) in pairs {
                if let Some(w) = self.try_candidate(ic.cone, Partition { a, b }, "invariant cone") {
                    return (Some(w), f2_only);
                }
            }
        }
        (None, f2_only)
    }

    /// Averaged quasimorphisms on arbitrary lower cones, kept only when
    /// verified nonzero.
    fn lower_cone_search(&mut self) -> Option<Witness> {
        let g = self.g.clone();
        let mut attempts = 0;
        for cone in lower_cones_of(&self.poset, self.opts.max_cone_candidates) {
            let comps = g.components(cone);
            if comps.len() < 2 {
                continue;
            }
            let zs = comps.iter().filter(|&&c| g.is_single_z(c)).count();
            if zs >= 2 {
                continue;
            }
            for (i, &a) in comps.iter().enumerate() {
                for &b in &comps[i + 1..] {
                    if g.is_single_z2(a) && g.is_single_z2(b) {
                        continue;
                    }
                    if zs == 1 && !g.is_single_z(a) && !g.is_single_z(b) {
                        continue;
                    }
                    attempts += 1;
                    if attempts > self.opts.max_search_attempts {
                        self.note("lower-cone search attempt budget exhausted");
                        return None;
                    }
                    if let Some(w) = self.try_candidate(cone, Partition { a, b }, "averaged lower cone") {
                        return Some(w);
                    }
                }
            }
        }
        None
    }

    fn raag_connected(&mut self) -> Outcome {
        let (w, mut f2) = self.invariant_cone_route();
        if let Some(w) = w {
            return Outcome::Witnessed(w);
        }
        let g = self.g.clone();
        let poset = self.poset.clone();
        let no_free = poset.classes.iter().all(|c| !matches!(c.class_type, crate::graph::ClassType::Free(k) if k >= 2));
        if no_free {
            self.note("no class is a free group of rank at least two");
            let mut u = g.all();
            loop {
                let c = g.center_within(u);
                if c.is_empty() {
                    break;
                }
                u = u.difference(c);
            }
            for mi in self.minimal_in(u) {
                let m = poset.classes[mi].members;
                let l = g.lower_cone_l_within(m, u);
                for ni in self.minimal_in(l) {
                    let nset = poset.classes[ni].members;
                    if g.is_single_z(m) && g.is_single_z(nset) {
                        f2 = true;
                        continue;
                    }
                    if let Some(w) = self.try_candidate(m.union(nset), Partition { a: m, b: nset }, "free abelian classes") {
                        return Outcome::Witnessed(w);
                    }
                }
            }
        }
        if let Some(w) = self.lower_cone_search() {
            return Outcome::Witnessed(w);
        }
        let f2_class = poset
            .minimal()
            .into_iter()
            .find(|&i| poset.classes[i].class_type == crate::graph::ClassType::Free(2));
        if let Some(i) = f2_class {
            self.note(format!("minimal class {} generates F₂", self.names(poset.classes[i].members)));
            return Outcome::Done(Status::ExistsNonConstructive);
        }
        if f2 {
            self.note("existence via an F₂ base only");
            return Outcome::Done(Status::ExistsNonConstructive);
        }
        self.note("no criterion applies");
        Outcome::Done(Status::Unknown)
    }

    fn mixed_connected(&mut self) -> Outcome {
        let (w, f2) = self.invariant_cone_route();
        if let Some(w) = w {
            return Outcome::Witnessed(w);
        }
        if let Some(w) = self.lower_cone_search() {
            return Outcome::Witnessed(w);
        }
        if f2 {
            self.note("existence via an F₂ base only");
            return Outcome::Done(Status::ExistsNonConstructive);
        }
        self.note("no criterion applies");
        Outcome::Done(Status::Unknown)
    }
}
