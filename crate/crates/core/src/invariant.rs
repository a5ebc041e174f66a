//! Homogenised code quasimorphisms pulled back along a retraction, optionally
//! averaged over labelled-graph automorphisms.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use thiserror::Error;

use crate::autos::{enum_labelled_graph_autos, AutError, DEFAULT_AUT_BOUND};
use crate::codes::{code_qm, homogenise, is_generic, weighted_code_qm, CodeError, HomogParams, HomogValue, Partition};
use crate::exec::Exec;
use crate::graph::{LabeledGraph, VertexSet};
use crate::word::{NormalWord, Side, WordError};

/// Value of an evaluator at a word.
pub type QmValue = HomogValue;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QmError {
    #[error("graph is not expanded")]
    NotExpanded,
    #[error("cone is not a lower cone: `{s}` ≤τ `{t}` but `{s}` is missing")]
    NotLowerCone { s: String, t: String },
    #[error("bad partition: {0}")]
    BadPartition(String),
    #[error("non-constructive base (F₂)")]
    NonConstructiveF2,
    #[error("base is Z/2 * Z/2, which has no unbounded quasimorphisms")]
    InfiniteDihedral,
    #[error("tuple {0:?} is not generic")]
    NotGeneric(Vec<u64>),
    #[error("quasimorphism kind not admissible here: {0}")]
    KindNotAdmissible(String),
    #[error("retraction onto the partition is not automorphism-equivariant: {0}")]
    NotEquivariant(String),
    #[error(transparent)]
    Code(#[from] CodeError),
    #[error(transparent)]
    Aut(#[from] AutError),
    #[error(transparent)]
    Word(#[from] WordError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum QmKind {
    /// Code quasimorphism of one side.
    Code { side: Side, z: Vec<u64> },
    /// Weighted code of a single infinite cyclic vertex on side A.
    WeightedZ { z: Vec<u64> },
    /// Sum of the code quasimorphisms of both sides.
    SumBothSides { z: Vec<u64> },
}

impl QmKind {
    pub fn z(&self) -> &[u64] {
        match self {
            QmKind::Code { z, .. } | QmKind::WeightedZ { z } | QmKind::SumBothSides { z } => z,
        }
    }
}

impl fmt::Display for QmKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let z: Vec<String> = self.z().iter().map(|v| v.to_string()).collect();
        match self {
            QmKind::Code { side, .. } => write!(f, "code(side={side:?}, z={})", z.join(",")),
            QmKind::WeightedZ { .. } => write!(f, "wz(z={})", z.join(",")),
            QmKind::SumBothSides { .. } => write!(f, "sum(z={})", z.join(",")),
        }
    }
}

/// Abelianisations differ, so the two side groups are not isomorphic.
pub fn certified_non_isomorphic(g: &LabeledGraph, a: VertexSet, b: VertexSet) -> bool {
    let sig = |s: VertexSet| {
        let mut v: Vec<Option<u64>> = s.iter().map(|x| g.group(x).order()).collect();
        v.sort();
        v
    };
    sig(a) != sig(b)
}

fn structural_checks(
    g: &LabeledGraph,
    cone: VertexSet,
    part: &Partition,
    kind: &QmKind,
) -> Result<(), QmError> {
    if !g.is_expanded() {
        return Err(QmError::NotExpanded);
    }
    if !cone.is_subset(g.all()) {
        return Err(QmError::BadPartition("cone has unknown vertices".into()));
    }
    if part.a.is_empty() || part.b.is_empty() || !part.a.is_disjoint(part.b) {
        return Err(QmError::BadPartition("sides must be nonempty and disjoint".into()));
    }
    if !part.union().is_subset(cone) {
        return Err(QmError::BadPartition("sides must lie in the cone".into()));
    }
    if !g.no_cross_edges(part.a, part.b) {
        return Err(QmError::BadPartition("an edge joins the two sides".into()));
    }
    if kind.z().is_empty() || kind.z().contains(&0) {
        return Err(CodeError::BadTuple.into());
    }
    if matches!(kind, QmKind::WeightedZ { .. }) && !g.is_single_z(part.a) {
        return Err(QmError::KindNotAdmissible("weighted code needs side A a single Z vertex".into()));
    }
    Ok(())
}

/// Checks that the pulled-back quasimorphism is invariant under the
/// automorphisms fixing every labelled-graph coset.
fn hypothesis_checks(
    g: &LabeledGraph,
    cone: VertexSet,
    part: &Partition,
    kind: &QmKind,
) -> Result<(), QmError> {
    if let Some((s, t)) = g.lower_cone_violation(cone) {
        return Err(QmError::NotLowerCone { s: g.id(s).into(), t: g.id(t).into() });
    }
    for (name, side) in [("A", part.a), ("B", part.b)] {
        if !g.is_connected(side) {
            return Err(QmError::BadPartition(format!("side {name} is not connected")));
        }
    }
    let union = part.union();
    if g.lower_cone_violation(union).is_some() {
        let comps = g.components(cone);
        if !comps.contains(&part.a) || !comps.contains(&part.b) {
            return Err(QmError::NotEquivariant(
                "sides are neither a lower cone nor components of the cone".into(),
            ));
        }
        if comps.iter().any(|&c| c.is_disjoint(union) && g.is_single_z(c)) {
            return Err(QmError::NotEquivariant("another component of the cone is Z".into()));
        }
    }
    let (za, zb) = (g.is_single_z(part.a), g.is_single_z(part.b));
    if za && zb {
        return Err(QmError::NonConstructiveF2);
    }
    if g.is_single_z2(part.a) && g.is_single_z2(part.b) {
        return Err(QmError::InfiniteDihedral);
    }
    if !is_generic(kind.z()) {
        return Err(QmError::NotGeneric(kind.z().to_vec()));
    }
    match kind {
        QmKind::WeightedZ { .. } => Ok(()),
        QmKind::Code { side, .. } => {
            if za || zb {
                return Err(QmError::KindNotAdmissible("use the weighted code when a side is Z".into()));
            }
            let c = part.side(*side);
            if g.is_single_z2(c) {
                return Err(QmError::KindNotAdmissible("code side is Z/2".into()));
            }
            if !certified_non_isomorphic(g, part.a, part.b) {
                return Err(QmError::KindNotAdmissible(
                    "sides may be isomorphic; use the sum of both sides".into(),
                ));
            }
            Ok(())
        }
        QmKind::SumBothSides { .. } => {
            if za || zb {
                return Err(QmError::KindNotAdmissible("use the weighted code when a side is Z".into()));
            }
            if g.is_single_z2(part.a) || g.is_single_z2(part.b) {
                return Err(QmError::KindNotAdmissible("a side is Z/2".into()));
            }
            Ok(())
        }
    }
}

#[derive(Clone, Debug)]
pub struct Evaluator {
    graph: Arc<LabeledGraph>,
    cone: VertexSet,
    partition: Partition,
    kind: QmKind,
    params: HomogParams,
    autos: Option<Vec<Vec<usize>>>,
    exec: Exec,
}

impl Evaluator {
    /// Builds an unaveraged evaluator after checking that the base
    /// quasimorphism is invariant and that the retraction is equivariant.
    pub fn build(
        graph: Arc<LabeledGraph>,
        cone: VertexSet,
        partition: Partition,
        kind: QmKind,
        params: HomogParams,
    ) -> Result<Self, QmError> {
        structural_checks(&graph, cone, &partition, &kind)?;
        hypothesis_checks(&graph, cone, &partition, &kind)?;
        Ok(Self::assemble(graph, cone, partition, kind, params))
    }

    /// Builds without the invariance hypotheses; only the shape is checked.
    /// Values need not be automorphism-invariant.
    pub fn build_unchecked(
        graph: Arc<LabeledGraph>,
        cone: VertexSet,
        partition: Partition,
        kind: QmKind,
        params: HomogParams,
    ) -> Result<Self, QmError> {
        structural_checks(&graph, cone, &partition, &kind)?;
        Ok(Self::assemble(graph, cone, partition, kind, params))
    }

    fn assemble(
        graph: Arc<LabeledGraph>,
        cone: VertexSet,
        partition: Partition,
        kind: QmKind,
        params: HomogParams,
    ) -> Self {
        Evaluator { graph, cone, partition, kind, params, autos: None, exec: Exec::default() }
    }

    /// Sums over every label-preserving graph automorphism.
    pub fn averaged(self) -> Result<Self, QmError> {
        let autos = enum_labelled_graph_autos(&self.graph, DEFAULT_AUT_BOUND)?;
        Ok(self.with_autos(autos))
    }

    pub(crate) fn with_autos(mut self, autos: Vec<Vec<usize>>) -> Self {
        note_class_preserving(&self.graph, &autos);
        self.autos = Some(autos);
        self
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }

    pub fn with_params(mut self, params: HomogParams) -> Self {
        self.params = params;
        self
    }

    pub fn graph(&self) -> &Arc<LabeledGraph> {
        &self.graph
    }

    pub fn cone(&self) -> VertexSet {
        self.cone
    }

    pub fn partition(&self) -> Partition {
        self.partition
    }

    pub fn kind(&self) -> &QmKind {
        &self.kind
    }

    pub fn params(&self) -> &HomogParams {
        &self.params
    }

    pub fn exec(&self) -> Exec {
        self.exec
    }

    pub fn is_averaged(&self) -> bool {
        self.autos.is_some()
    }

    pub fn autos(&self) -> Option<&[Vec<usize>]> {
        self.autos.as_deref()
    }

    /// The base quasimorphism on a word supported in the partition.
    fn base(&self, w: &NormalWord) -> Result<BigInt, CodeError> {
        let p = &self.partition;
        match &self.kind {
            QmKind::Code { side, z } => code_qm(w, p, *side, z),
            QmKind::WeightedZ { z } => weighted_code_qm(w, p, z),
            QmKind::SumBothSides { z } => Ok(code_qm(w, p, Side::A, z)? + code_qm(w, p, Side::B, z)?),
        }
    }

    /// Unhomogenised base quasimorphism composed with the retraction.
    pub fn base_value(&self, x: &NormalWord) -> Result<BigInt, QmError> {
        self.check_graph(x)?;
        Ok(self.base(&x.retraction(self.partition.union()))?)
    }

    /// Homogenisation of the base quasimorphism composed with the retraction.
    pub fn term(&self, x: &NormalWord) -> Result<QmValue, QmError> {
        self.check_graph(x)?;
        let y = x.retraction(self.partition.union());
        Ok(homogenise(|w| self.base(w), &y, &self.params, self.exec)?)
    }

    pub fn evaluate(&self, x: &NormalWord) -> Result<QmValue, QmError> {
        self.check_graph(x)?;
        let Some(autos) = &self.autos else {
            return self.term(x);
        };
        let terms = self.exec.map(autos, |perm| {
            let y = NormalWord::from_letters(
                self.graph.clone(),
                x.letters().iter().map(|l| (perm[l.vertex], l.exp.clone())),
            );
            self.term(&y)
        });
        let mut total = QmValue::zero();
        for t in terms {
            total = total.add(&t?);
        }
        Ok(total)
    }

    fn check_graph(&self, x: &NormalWord) -> Result<(), QmError> {
        if Arc::ptr_eq(x.graph(), &self.graph) || **x.graph() == *self.graph {
            Ok(())
        } else {
            Err(WordError::GraphMismatch.into())
        }
    }
}

/// A nontrivial automorphism keeping every vertex inside its `~τ` class is a
/// product of factor maps and transvections, so its coset may repeat another's.
fn note_class_preserving(g: &LabeledGraph, autos: &[Vec<usize>]) {
    let Ok(poset) = g.tau_classes() else { return };
    let repeats = autos
        .iter()
        .filter(|p| p.iter().enumerate().any(|(v, &w)| v != w))
        .filter(|p| p.iter().enumerate().all(|(v, &w)| poset.class_of(v) == poset.class_of(w)))
        .count();
    if repeats > 0 {
        log::debug!("{repeats} of {} labelled-graph automorphisms preserve every ~τ class; their cosets may coincide", autos.len());
    }
}

fn image(perm: &[usize], s: VertexSet) -> VertexSet {
    VertexSet::from_iter(s.iter().map(|v| perm[v]))
}

/// Number of labelled-graph automorphisms fixing the cone and the pair of
/// sides setwise.
pub fn stabilizer_count(g: &LabeledGraph, cone: VertexSet, part: &Partition) -> Result<usize, QmError> {
    let autos = enum_labelled_graph_autos(g, DEFAULT_AUT_BOUND)?;
    Ok(autos
        .iter()
        .filter(|p| {
            let (a, b) = (image(p, part.a), image(p, part.b));
            image(p, cone) == cone && ((a == part.a && b == part.b) || (a == part.b && b == part.a))
        })
        .count())
}
