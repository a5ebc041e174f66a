//! Codes of words in a free product `W_A * W_B`, counting functions and
//! homogenisation.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::exec::Exec;
use crate::graph::{LabeledGraph, VertexSet};
use crate::word::{NormalWord, Side, WordError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CodeError {
    #[error(transparent)]
    Word(#[from] WordError),
    #[error("partition sides must be nonempty and disjoint")]
    BadPartition,
    #[error("side A must be a single infinite cyclic vertex")]
    NotSingleZ,
    #[error("tuple must be nonempty with positive entries")]
    BadTuple,
    #[error("homogenisation needs max_n >= 2 * max_period and max_period >= 1")]
    BadHomogParams,
}

/// Two vertex sets with no edges between them.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Partition {
    pub a: VertexSet,
    pub b: VertexSet,
}

impl Partition {
    pub fn new(graph: &LabeledGraph, a: VertexSet, b: VertexSet) -> Result<Self, CodeError> {
        if a.is_empty() || b.is_empty() || !a.is_disjoint(b) {
            return Err(CodeError::BadPartition);
        }
        if !graph.no_cross_edges(a, b) {
            return Err(WordError::CrossEdges.into());
        }
        Ok(Partition { a, b })
    }

    pub fn side(&self, s: Side) -> VertexSet {
        match s {
            Side::A => self.a,
            Side::B => self.b,
        }
    }

    pub fn union(&self) -> VertexSet {
        self.a.union(self.b)
    }

    pub fn swapped(&self) -> Partition {
        Partition { a: self.b, b: self.a }
    }
}

/// The blocks of `x` lying on one side.
pub fn side_tuple(x: &NormalWord, part: &Partition, side: Side) -> Result<Vec<NormalWord>, CodeError> {
    Ok(x.syllables(part.a, part.b)?
        .into_iter()
        .filter(|s| s.side == side)
        .map(|s| s.block)
        .collect())
}

/// Run lengths of equal consecutive entries.
pub fn run_lengths<T: PartialEq>(xs: &[T]) -> Vec<u64> {
    let mut out: Vec<u64> = Vec::new();
    for (i, x) in xs.iter().enumerate() {
        if i > 0 && xs[i - 1] == *x {
            *out.last_mut().unwrap() += 1;
        } else {
            out.push(1);
        }
    }
    out
}

/// Letter ranges of the blocks of `x` on one side.
fn side_blocks(x: &NormalWord, part: &Partition, side: Side) -> Result<Vec<std::ops::Range<usize>>, CodeError> {
    if !x.graph().no_cross_edges(part.a, part.b) {
        return Err(WordError::CrossEdges.into());
    }
    let mine = part.side(side);
    let support = part.union();
    let mut out: Vec<std::ops::Range<usize>> = Vec::new();
    let mut prev_mine = false;
    for (i, l) in x.letters().iter().enumerate() {
        if !support.contains(l.vertex) {
            return Err(WordError::OutsideSupport.into());
        }
        let here = mine.contains(l.vertex);
        if here {
            match out.last_mut() {
                Some(r) if prev_mine => r.end = i + 1,
                _ => out.push(i..i + 1),
            }
        }
        prev_mine = here;
    }
    Ok(out)
}

pub fn code(x: &NormalWord, part: &Partition, side: Side) -> Result<Vec<u64>, CodeError> {
    let letters = x.letters();
    let blocks: Vec<_> = side_blocks(x, part, side)?.into_iter().map(|r| &letters[r]).collect();
    Ok(run_lengths(&blocks))
}

/// Exponents of the single `Z` vertex on side A, blockwise.
pub fn z_tuple(x: &NormalWord, part: &Partition) -> Result<Vec<BigInt>, CodeError> {
    let g = x.graph();
    if !g.is_single_z(part.a) {
        return Err(CodeError::NotSingleZ);
    }
    Ok(side_blocks(x, part, Side::A)?
        .into_iter()
        .map(|r| x.letters()[r.start].exp.clone())
        .collect())
}

/// Absolute sums over maximal runs of equal sign.
pub fn weight_runs(t: &[BigInt]) -> Vec<BigInt> {
    let mut out: Vec<BigInt> = Vec::new();
    let mut last_sign = None;
    for e in t {
        let s = e.is_positive();
        if last_sign == Some(s) {
            *out.last_mut().unwrap() += e.abs();
        } else {
            out.push(e.abs());
        }
        last_sign = Some(s);
    }
    out
}

pub fn weighted_z_code(x: &NormalWord, part: &Partition) -> Result<Vec<BigInt>, CodeError> {
    Ok(weight_runs(&z_tuple(x, part)?))
}

/// `reverse(z)` does not occur as a block of `|z|` adjacent entries of `z z`.
pub fn is_generic(z: &[u64]) -> bool {
    let k = z.len();
    if k == 0 {
        return false;
    }
    let zz: Vec<u64> = z.iter().chain(z.iter()).copied().collect();
    let rev: Vec<u64> = z.iter().rev().copied().collect();
    !zz.windows(k).any(|w| w == rev.as_slice())
}

fn check_tuple(z: &[u64]) -> Result<(), CodeError> {
    if z.is_empty() || z.contains(&0) {
        return Err(CodeError::BadTuple);
    }
    Ok(())
}

/// Greedy left-to-right count of disjoint occurrences of `z` in `seq`.
pub fn theta<T: PartialEq>(seq: &[T], z: &[T]) -> u64 {
    assert!(!z.is_empty(), "theta needs a nonempty pattern");
    let (mut i, mut count) = (0, 0);
    while i + z.len() <= seq.len() {
        if seq[i..i + z.len()] == *z {
            count += 1;
            i += z.len();
        } else {
            i += 1;
        }
    }
    count
}

/// `θ_z(x) − θ_z(x⁻¹)` on the code of one side.
pub fn code_qm(x: &NormalWord, part: &Partition, side: Side, z: &[u64]) -> Result<BigInt, CodeError> {
    check_tuple(z)?;
    // the code of x⁻¹ is the reversed code of x
    let mut c = code(x, part, side)?;
    let fwd = theta(&c, z);
    c.reverse();
    let back = theta(&c, z);
    Ok(BigInt::from(fwd) - BigInt::from(back))
}

/// `θ_z(x) − θ_z(x⁻¹)` on the weighted `Z`-code.
pub fn weighted_code_qm(x: &NormalWord, part: &Partition, z: &[u64]) -> Result<BigInt, CodeError> {
    check_tuple(z)?;
    let zb: Vec<BigInt> = z.iter().map(|&v| BigInt::from(v)).collect();
    let mut c = weighted_z_code(x, part)?;
    let fwd = theta(&c, &zb);
    c.reverse();
    let back = theta(&c, &zb);
    Ok(BigInt::from(fwd) - BigInt::from(back))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HomogParams {
    pub max_n: usize,
    pub max_period: usize,
    /// Used for the error bound when no period is detected; when absent the
    /// largest defect seen along the computed powers is used.
    pub defect_estimate: Option<BigRational>,
}

impl Default for HomogParams {
    fn default() -> Self {
        let max_n = std::env::var("QMGRAPH_MAX_N")
            .ok()
            .and_then(|s| s.parse().ok())
            .unwrap_or(64);
        HomogParams { max_n, max_period: 8, defect_estimate: None }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HomogValue {
    pub value: BigRational,
    pub exact: bool,
    pub error_bound: BigRational,
}

impl HomogValue {
    pub fn exact(value: BigRational) -> Self {
        HomogValue { value, exact: true, error_bound: BigRational::zero() }
    }

    pub fn zero() -> Self {
        Self::exact(BigRational::zero())
    }

    pub fn add(&self, other: &HomogValue) -> HomogValue {
        HomogValue {
            value: &self.value + &other.value,
            exact: self.exact && other.exact,
            error_bound: &self.error_bound + &other.error_bound,
        }
    }

    pub fn scale(&self, k: i64) -> HomogValue {
        let k = BigRational::from_integer(BigInt::from(k));
        HomogValue {
            value: &self.value * &k,
            exact: self.exact,
            error_bound: &self.error_bound * k.abs(),
        }
    }
}

/// Slope `c/p` of an eventually arithmetic-periodic sequence `s_1..s_N`.
///
/// Looks for the smallest period `p <= max_period` such that `s_{n+p} − s_n`
/// is a constant `c` for every `n0 <= n <= N − p`, with `n0 <= N/2`.
pub fn detect_slope(s: &[BigInt], max_period: usize) -> Option<BigRational> {
    let n = s.len();
    for p in 1..=max_period.min(n.saturating_sub(1)) {
        // 1-based n maps to s[n-1]
        let d = |m: usize| &s[m + p - 1] - &s[m - 1];
        let last = n - p;
        let c = d(last);
        let mut n0 = last;
        while n0 > 1 && d(n0 - 1) == c {
            n0 -= 1;
        }
        if n0 <= n / 2 {
            return Some(BigRational::new(c, BigInt::from(p)));
        }
    }
    None
}

/// Largest `|s_{m+n} − s_m − s_n|` over the sequence.
pub fn empirical_power_defect(s: &[BigInt]) -> BigInt {
    let mut best = BigInt::zero();
    for m in 1..=s.len() {
        for n in 1..=s.len() - m {
            let d = (&s[m + n - 1] - &s[m - 1] - &s[n - 1]).abs();
            if d > best {
                best = d;
            }
        }
    }
    best
}

/// Largest exponent tried by the exact torsion test.
const TORSION_CAP: u64 = 1 << 12;

/// `lim f(x^n)/n`, exact when the sequence `f(x^n)` is detected to be
/// eventually arithmetic-periodic, and `0` for torsion elements.
pub fn homogenise<F>(f: F, x: &NormalWord, params: &HomogParams, exec: Exec) -> Result<HomogValue, CodeError>
where
    F: Fn(&NormalWord) -> Result<BigInt, CodeError> + Sync + Send,
{
    if params.max_period < 1 || params.max_n < 2 || params.max_n < 2 * params.max_period {
        return Err(CodeError::BadHomogParams);
    }
    if x.is_identity() {
        return Ok(HomogValue::zero());
    }
    if x.has_finite_order(TORSION_CAP) == Some(true) {
        return Ok(HomogValue::zero());
    }
    let powers = x.powers(params.max_n);
    if powers.iter().any(|p| p.is_identity()) {
        return Ok(HomogValue::zero());
    }
    let s: Vec<BigInt> = exec.map(&powers, |p| f(p)).into_iter().collect::<Result<_, _>>()?;
    if let Some(v) = detect_slope(&s, params.max_period) {
        return Ok(HomogValue::exact(v));
    }
    let n = BigInt::from(params.max_n);
    let d = params
        .defect_estimate
        .clone()
        .unwrap_or_else(|| BigRational::from_integer(empirical_power_defect(&s)));
    Ok(HomogValue {
        value: BigRational::new(s[params.max_n - 1].clone(), n.clone()),
        exact: false,
        error_bound: d / BigRational::from_integer(n),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    fn free_pair() -> (Arc<LabeledGraph>, Partition) {
        let g = Arc::new(
            LabeledGraph::parse("vertex a Z/5\nvertex b Z/3\n").unwrap().expand().unwrap(),
        );
        let p = Partition::new(&g, VertexSet::singleton(0), VertexSet::singleton(1)).unwrap();
        (g, p)
    }

    #[test]
    fn theta_greedy() {
        assert_eq!(theta(&[1, 2, 1, 2, 1], &[1, 2, 1]), 1);
        assert_eq!(theta(&[1, 2, 1, 1, 2, 1], &[1, 2, 1]), 2);
        assert_eq!(theta::<u64>(&[], &[1]), 0);
    }

    #[test]
    fn genericity() {
        assert!(is_generic(&[1, 2, 3]));
        assert!(!is_generic(&[2, 1, 2]));
        assert!(!is_generic(&[1, 2]));
        assert!(!is_generic(&[5]));
    }

    #[test]
    fn weighted_runs_example() {
        let t: Vec<BigInt> = [8, -4, -4, -1, 7, 2, -3].iter().map(|&v| BigInt::from(v)).collect();
        let w: Vec<BigInt> = [8, 9, 9, 3].iter().map(|&v| BigInt::from(v)).collect();
        assert_eq!(weight_runs(&t), w);
    }

    #[test]
    fn code_of_inverse_is_reversed() {
        let (g, p) = free_pair();
        let x = NormalWord::parse(g, "a^4 b a^2 b a^2 b a^3 b").unwrap();
        let mut c = code(&x, &p, Side::A).unwrap();
        assert_eq!(c, vec![1, 2, 1]);
        c.reverse();
        assert_eq!(code(&x.invert(), &p, Side::A).unwrap(), c);
    }

    #[test]
    fn weighted_qm_counts_sign_runs() {
        let g = Arc::new(LabeledGraph::parse("vertex v Z\nvertex b Z/2\n").unwrap().expand().unwrap());
        let p = Partition::new(&g, VertexSet::singleton(0), VertexSet::singleton(1)).unwrap();
        // all positive exponents collapse into one run
        let x = NormalWord::parse(g.clone(), "v b v^2 b v^3 b").unwrap();
        assert_eq!(weighted_code_qm(&x, &p, &[1, 2, 3]).unwrap(), BigInt::from(0));
        let y = NormalWord::parse(g.clone(), "v b v^-2 b v^3 b").unwrap();
        assert_eq!(weighted_code_qm(&y, &p, &[1, 2, 3]).unwrap(), BigInt::from(1));
        let bad = Partition { a: p.b, b: p.a };
        assert_eq!(weighted_z_code(&y, &bad), Err(CodeError::NotSingleZ));
    }

    #[test]
    fn slope_detection() {
        let s: Vec<BigInt> = (1..=64).map(|n| BigInt::from(3 * n + (n % 2))).collect();
        assert_eq!(detect_slope(&s, 8), Some(BigRational::from_integer(3.into())));
        let s: Vec<BigInt> = (1..=64).map(|n: i64| BigInt::from(n * n)).collect();
        assert_eq!(detect_slope(&s, 8), None);
        assert_eq!(empirical_power_defect(&[1, 2, 3].map(BigInt::from)), BigInt::from(0));
    }

    #[test]
    fn homogenise_params_checked() {
        let (g, p) = free_pair();
        let x = NormalWord::parse(g, "a b").unwrap();
        let f = |w: &NormalWord| code_qm(w, &p, Side::A, &[1, 2, 3]);
        let bad = HomogParams { max_n: 10, max_period: 8, defect_estimate: None };
        assert_eq!(homogenise(f, &x, &bad, Exec::Sequential), Err(CodeError::BadHomogParams));
        let v = homogenise(f, &x, &HomogParams::default(), Exec::Sequential).unwrap();
        assert!(v.exact && v.value.is_zero());
    }
}
