//! Invariant commutator subgroups, defect estimates and the resulting
//! lower bound for invariant stable commutator length.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::sync::Mutex;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::{GraphError, LabeledGraph, VertexGroup};
use crate::invariant::{Evaluator, QmError};
use crate::rational::fmt_rational;
use crate::word::{random_word, NormalWord};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SclError {
    #[error("defect bound {bound} is below the empirical defect {empirical}")]
    BoundBelowEmpirical { bound: String, empirical: String },
    #[error("defect bound must be positive")]
    NonPositiveBound,
    #[error("defect estimate is zero; no bound can be derived")]
    ZeroDefect,
    #[error("group has nontrivial center")]
    NontrivialCenter,
    #[error("value at the word is not exact")]
    Inexact,
    #[error("infinite vertex groups need a positive exponent bound")]
    UnboundedBall,
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Qm(#[from] QmError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CommutatorCondition {
    /// The invariant commutator subgroup is the whole group.
    Equal,
    /// The invariant commutator subgroup has finite index.
    FiniteIndex,
    NoClaim,
}

impl fmt::Display for CommutatorCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CommutatorCondition::Equal => "Equal",
            CommutatorCondition::FiniteIndex => "FiniteIndex",
            CommutatorCondition::NoClaim => "NoClaim",
        })
    }
}

pub fn commutator_conditions(g: &LabeledGraph) -> Result<CommutatorCondition, SclError> {
    let center = g.center_support();
    if center.iter().any(|v| g.group(v).is_infinite()) {
        return Ok(CommutatorCondition::NoClaim);
    }
    let e = g.expand()?;
    let even_or_infinite = e
        .all()
        .iter()
        .any(|v| matches!(e.group(v), VertexGroup::Infinite | VertexGroup::Primary { p: 2, .. }));
    if center.is_empty() && !even_or_infinite {
        Ok(CommutatorCondition::Equal)
    } else {
        Ok(CommutatorCondition::FiniteIndex)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DefectEstimate {
    /// Largest observed `|φ(g) + φ(h) − φ(gh)|`; a lower bound for the defect.
    pub empirical_max: BigRational,
    pub samples: usize,
    /// Pairs dropped because some value was not exact.
    pub skipped: usize,
    pub max_len: usize,
    pub seed: u64,
    pub user_bound: Option<BigRational>,
}

impl DefectEstimate {
    /// No pairs were examined.
    pub fn is_vacuous(&self) -> bool {
        self.samples == self.skipped
    }

    pub fn with_user_bound(mut self, bound: BigRational) -> Result<Self, SclError> {
        if !bound.is_positive() {
            return Err(SclError::NonPositiveBound);
        }
        if bound < self.empirical_max {
            return Err(SclError::BoundBelowEmpirical {
                bound: fmt_rational(&bound),
                empirical: fmt_rational(&self.empirical_max),
            });
        }
        self.user_bound = Some(bound);
        Ok(self)
    }
}

fn pair_defect(e: &Evaluator, g: &NormalWord, h: &NormalWord) -> Result<Option<BigRational>, QmError> {
    let a = e.evaluate(g)?;
    let b = e.evaluate(h)?;
    let c = e.evaluate(&g.mul(h))?;
    if !(a.exact && b.exact && c.exact) {
        return Ok(None);
    }
    Ok(Some((a.value + b.value - c.value).abs()))
}

/// Samples `samples` random pairs of letter sequences of length at most
/// `max_len`. Sample `i` draws from its own ChaCha stream, so the result does
/// not depend on the execution mode.
pub fn estimate_defect(e: &Evaluator, samples: usize, max_len: usize, seed: u64) -> Result<DefectEstimate, SclError> {
    let graph = e.graph().clone();
    let results = e.exec().map_range(samples, |i| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        let lg = rng.gen_range(0..=max_len);
        let lh = rng.gen_range(0..=max_len);
        let g = random_word(&graph, lg, &mut rng);
        let h = random_word(&graph, lh, &mut rng);
        pair_defect(e, &g, &h)
    });
    let mut empirical_max = BigRational::zero();
    let mut skipped = 0;
    for r in results {
        match r? {
            Some(d) => empirical_max = empirical_max.max(d),
            None => skipped += 1,
        }
    }
    log::debug!("defect estimate over {samples} samples, {skipped} skipped");
    Ok(DefectEstimate { empirical_max, samples, skipped, max_len, seed, user_bound: None })
}

/// Every element of normal-form length at most `max_len`. Infinite vertex
/// letters range over exponents `±1..=±exp_bound`.
pub fn ball(g: &std::sync::Arc<LabeledGraph>, max_len: usize, exp_bound: u64) -> Result<Vec<NormalWord>, SclError> {
    let mut letters = Vec::new();
    for v in 0..g.n() {
        match g.group(v).order() {
            Some(q) => letters.extend((1..q).map(|e| NormalWord::letter(g.clone(), v, e))),
            None => {
                if exp_bound == 0 {
                    return Err(SclError::UnboundedBall);
                }
                for e in 1..=exp_bound as i64 {
                    letters.push(NormalWord::letter(g.clone(), v, e));
                    letters.push(NormalWord::letter(g.clone(), v, -e));
                }
            }
        }
    }
    let mut all = vec![NormalWord::identity(g.clone())];
    let mut seen: HashSet<NormalWord> = all.iter().cloned().collect();
    let mut frontier = all.clone();
    for len in 1..=max_len {
        let mut next = Vec::new();
        for w in &frontier {
            for l in &letters {
                let y = w.mul(l);
                if y.len() == len && seen.insert(y.clone()) {
                    next.push(y);
                }
            }
        }
        all.extend(next.iter().cloned());
        frontier = next;
    }
    Ok(all)
}

/// True when an end letter can be carried through commuting letters to a
/// letter of the same vertex at the other end.
fn end_merges(x: &NormalWord, front: bool) -> bool {
    let g = x.graph();
    let ls = x.letters();
    let n = ls.len();
    let v = if front { ls[0].vertex } else { ls[n - 1].vertex };
    for k in 1..n {
        let u = if front { ls[n - k].vertex } else { ls[k - 1].vertex };
        if u == v {
            return true;
        }
        if !g.adjacent(u, v) {
            return false;
        }
    }
    false
}

/// Shortens `x` by conjugating with its end letters while that helps.
fn cyclically_shorten(x: &NormalWord) -> NormalWord {
    let mut x = x.clone();
    while x.len() >= 2 {
        let n = x.len();
        let Some(i) = [true, false].into_iter().position(|f| end_merges(&x, f)) else {
            break;
        };
        let l = &x.letters()[if i == 0 { 0 } else { n - 1 }];
        let l = NormalWord::letter(x.graph().clone(), l.vertex, l.exp.clone());
        let y = if i == 0 { l.invert().mul(&x).mul(&l) } else { l.mul(&x).mul(&l.invert()) };
        if y.len() >= n {
            break;
        }
        x = y;
    }
    x
}

/// Least cyclic rotation of the letter sequence, renormalised.
fn least_rotation(x: &NormalWord) -> NormalWord {
    let ls = x.letters();
    let key = |w: &NormalWord| w.letters().iter().map(|l| (l.vertex, l.exp.clone())).collect::<Vec<_>>();
    let mut best = x.clone();
    let mut best_key = key(x);
    for r in 1..ls.len() {
        let y = NormalWord::from_letters(
            x.graph().clone(),
            ls[r..].iter().chain(&ls[..r]).map(|l| (l.vertex, l.exp.clone())),
        );
        let k = key(&y);
        if k < best_key {
            best = y;
            best_key = k;
        }
    }
    best
}

/// Exact supremum of the defect over all pairs from the ball of radius
/// `max_len`. Values are memoised per conjugacy representative.
pub fn exhaustive_defect(e: &Evaluator, max_len: usize, exp_bound: u64) -> Result<DefectEstimate, SclError> {
    let words = ball(e.graph(), max_len, exp_bound)?;
    let index: Mutex<HashMap<NormalWord, usize>> = Mutex::new(HashMap::new());
    let key = |w: &NormalWord| {
        let r = cyclically_shorten(w);
        let mut m = index.lock().expect("index lock");
        let next = m.len();
        *m.entry(r).or_insert(next)
    };
    let own: Vec<usize> = words.iter().map(key).collect();
    // gh and hg are conjugate, so only pairs with i <= j are needed
    let products: Vec<Vec<usize>> =
        e.exec().map_range(words.len(), |i| words[i..].iter().map(|h| key(&words[i].mul(h))).collect());
    let mut reps: Vec<(NormalWord, usize)> = index.into_inner().expect("index lock").into_iter().collect();
    reps.sort_by_key(|(_, i)| *i);
    // second pass: merge representatives that are rotations of each other
    let rotated: Vec<NormalWord> = e.exec().map(&reps, |(w, _)| least_rotation(w));
    let mut classes: HashMap<&NormalWord, usize> = HashMap::new();
    let class_of: Vec<usize> = rotated
        .iter()
        .map(|w| {
            let next = classes.len();
            *classes.entry(w).or_insert(next)
        })
        .collect();
    let mut class_reps: Vec<(&NormalWord, usize)> = classes.into_iter().collect();
    class_reps.sort_by_key(|(_, i)| *i);
    let class_values = e.exec().map(&class_reps, |(w, _)| e.evaluate(w));
    let class_values: Vec<_> = class_values.into_iter().collect::<Result<_, _>>()?;
    let values: Vec<_> = class_of.iter().map(|&c| &class_values[c]).collect();

    let mut empirical_max = BigRational::zero();
    let mut skipped = 0;
    for (i, row) in products.iter().enumerate() {
        for (j, &k) in row.iter().enumerate() {
            let (a, b, c) = (values[own[i]], values[own[i + j]], values[k]);
            if !(a.exact && b.exact && c.exact) {
                skipped += 1;
                continue;
            }
            let d = (&a.value + &b.value - &c.value).abs();
            if d > empirical_max {
                empirical_max = d;
            }
        }
    }
    let samples = products.iter().map(Vec::len).sum();
    Ok(DefectEstimate { empirical_max, samples, skipped, max_len, seed: 0, user_bound: None })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundMode {
    RigorousGivenBound,
    /// The denominator is an empirical lower bound for the defect, so the
    /// result is not certified.
    Heuristic,
}

impl fmt::Display for BoundMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoundMode::RigorousGivenBound => "rigorous-given-bound",
            BoundMode::Heuristic => "heuristic",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SclBound {
    pub value: BigRational,
    pub mode: BoundMode,
}

/// `½|φ(x)| / D`, with `D` the user bound when present and the empirical
/// maximum otherwise.
pub fn scl_aut_lower_bound(e: &Evaluator, x: &NormalWord, d: &DefectEstimate) -> Result<SclBound, SclError> {
    if !e.graph().center_support().is_empty() {
        return Err(SclError::NontrivialCenter);
    }
    let (denom, mode) = match &d.user_bound {
        Some(b) => (b.clone(), BoundMode::RigorousGivenBound),
        None => (d.empirical_max.clone(), BoundMode::Heuristic),
    };
    let v = e.evaluate(x)?;
    if !v.exact {
        return Err(SclError::Inexact);
    }
    if v.value.is_zero() {
        return Ok(SclBound { value: BigRational::zero(), mode });
    }
    if denom.is_zero() {
        return Err(SclError::ZeroDefect);
    }
    let value = v.value.abs() / (denom * BigInt::from(2));
    Ok(SclBound { value, mode })
}
