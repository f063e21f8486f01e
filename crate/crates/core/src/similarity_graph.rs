//! Shortest-path distances on the feature lattice and the normalized
//! similarity `s(p, q) = 1 - d(p, q) / D`.
//!
//! Two points of the lattice are adjacent when they differ by one rank step
//! in exactly one feature, so the shortest-path distance is the L1 distance
//! between rank vectors. [`matrix_power_distance`] recovers the same number
//! from powers of the adjacency matrix and is kept as an independent check.

use num_traits::One;

use crate::case_memory::Memory;
use crate::error::{Error, Result};
use crate::feature_space::{FeatureSpace, Problem};
use crate::numeric::Rational;

/// Default cap on the number of lattice nodes materialized by the oracle.
pub const DEFAULT_LATTICE_CAP: usize = 10_000;

/// Rank-L1 distance between two complete problems.
pub fn lattice_distance(space: &FeatureSpace, a: &Problem, b: &Problem) -> Result<u64> {
    let ra = space.ranks(a)?;
    let rb = space.ranks(b)?;
    Ok(rank_distance(&ra, &rb))
}

pub(crate) fn rank_distance(a: &[usize], b: &[usize]) -> u64 {
    a.iter().zip(b).map(|(&x, &y)| x.abs_diff(y) as u64).sum()
}

/// Diameter of the lattice spanned by `space`: the sum over features of
/// (number of values - 1). Zero when every feature is single-valued.
pub fn diameter(space: &FeatureSpace) -> u64 {
    space.features().map(|f| f.cardinality() as u64 - 1).sum()
}

/// `1 - distance / diameter`, or 1 on a degenerate (zero-diameter) space.
pub fn normalized_similarity(distance: u64, diameter: u64) -> Rational {
    if diameter == 0 {
        return Rational::one();
    }
    Rational::one() - Rational::new(distance as i128, diameter as i128)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimilarityEntry {
    pub problem: Problem,
    pub distance: u64,
    pub similarity: Rational,
}

/// Similarities from one query to a sequence of problems, in that sequence's
/// order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimilarityTable {
    pub query: Problem,
    pub entries: Vec<SimilarityEntry>,
    pub diameter_used: u64,
}

impl SimilarityTable {
    pub fn compute<'a, I>(space: &FeatureSpace, query: &Problem, problems: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a Problem>,
    {
        let d_max = diameter(space);
        let query_ranks = space.ranks(query)?;
        let entries = problems
            .into_iter()
            .map(|q| {
                let distance = rank_distance(&query_ranks, &space.ranks(q)?);
                Ok(SimilarityEntry {
                    problem: q.clone(),
                    distance,
                    similarity: normalized_similarity(distance, d_max),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SimilarityTable {
            query: query.clone(),
            entries,
            diameter_used: d_max,
        })
    }

    /// True when the space had diameter 0 and every similarity was set to 1.
    pub fn is_degenerate(&self) -> bool {
        self.diameter_used == 0
    }

    pub fn get(&self, problem: &Problem) -> Option<Rational> {
        self.entries
            .iter()
            .find(|e| &e.problem == problem)
            .map(|e| e.similarity)
    }

    pub fn similarities(&self) -> Vec<Rational> {
        self.entries.iter().map(|e| e.similarity).collect()
    }
}

/// Similarity of `query` to every history problem of `memory`, measured in
/// `space` (which must already contain any value the query introduces).
pub fn similarity(
    space: &FeatureSpace,
    query: &Problem,
    memory: &Memory,
) -> Result<SimilarityTable> {
    SimilarityTable::compute(space, query, memory.history())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairDistance {
    pub left: usize,
    pub right: usize,
    pub distance: u64,
    pub similarity: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceReport {
    /// History problems, indexed by `PairDistance::left/right`.
    pub problems: Vec<Problem>,
    /// Every unordered pair `left < right` in history order.
    pub pairwise: Vec<PairDistance>,
    pub diameter: u64,
    pub query: Option<SimilarityTable>,
}

impl DistanceReport {
    pub fn pair(&self, i: usize, j: usize) -> Option<&PairDistance> {
        let (l, r) = if i < j { (i, j) } else { (j, i) };
        self.pairwise.iter().find(|p| p.left == l && p.right == r)
    }
}

pub fn distance_report(
    space: &FeatureSpace,
    memory: &Memory,
    query: Option<&Problem>,
) -> Result<DistanceReport> {
    let d_max = diameter(space);
    let problems: Vec<Problem> = memory.history().into_iter().cloned().collect();
    let ranks = problems
        .iter()
        .map(|p| space.ranks(p))
        .collect::<Result<Vec<_>>>()?;
    let mut pairwise = Vec::new();
    for i in 0..ranks.len() {
        for j in i + 1..ranks.len() {
            let distance = rank_distance(&ranks[i], &ranks[j]);
            pairwise.push(PairDistance {
                left: i,
                right: j,
                distance,
                similarity: normalized_similarity(distance, d_max),
            });
        }
    }
    let query = query
        .map(|q| SimilarityTable::compute(space, q, &problems))
        .transpose()?;
    Ok(DistanceReport {
        problems,
        pairwise,
        diameter: d_max,
        query,
    })
}

pub fn pairwise_similarity(space: &FeatureSpace, memory: &Memory) -> Result<DistanceReport> {
    distance_report(space, memory, None)
}

// ---------------------------------------------------------------------------
// Adjacency-matrix oracle
// ---------------------------------------------------------------------------

/// An explicit graph over lattice points with its adjacency lists.
pub struct Lattice {
    nodes: Vec<Vec<usize>>,
    adjacency: Vec<Vec<usize>>,
}

impl Lattice {
    /// Materializes every point of `space`.
    pub fn full(space: &FeatureSpace, cap: usize) -> Result<Self> {
        let size = space.lattice_size();
        if size > cap as u128 {
            return Err(Error::LatticeTooLarge { size, cap });
        }
        let cards = space.cardinalities();
        let mut nodes = Vec::with_capacity(size as usize);
        let mut current = vec![0usize; cards.len()];
        'outer: loop {
            nodes.push(current.clone());
            for k in (0..cards.len()).rev() {
                current[k] += 1;
                if current[k] < cards[k] {
                    continue 'outer;
                }
                current[k] = 0;
            }
            break;
        }
        Ok(Self::from_rank_vectors(nodes))
    }

    /// Materializes only the given problems.
    pub fn restricted(space: &FeatureSpace, problems: &[Problem], cap: usize) -> Result<Self> {
        if problems.len() > cap {
            return Err(Error::LatticeTooLarge {
                size: problems.len() as u128,
                cap,
            });
        }
        let mut nodes = problems
            .iter()
            .map(|p| space.ranks(p))
            .collect::<Result<Vec<_>>>()?;
        nodes.sort();
        nodes.dedup();
        Ok(Self::from_rank_vectors(nodes))
    }

    fn from_rank_vectors(nodes: Vec<Vec<usize>>) -> Self {
        // Sorted rank vectors allow neighbour lookup by binary search.
        let mut sorted = nodes;
        sorted.sort();
        let adjacency = sorted
            .iter()
            .map(|v| {
                let mut neighbours = Vec::new();
                let mut probe = v.clone();
                for k in 0..v.len() {
                    for step in [-1i64, 1] {
                        let r = v[k] as i64 + step;
                        if r < 0 {
                            continue;
                        }
                        probe[k] = r as usize;
                        if let Ok(idx) = sorted.binary_search(&probe) {
                            neighbours.push(idx);
                        }
                    }
                    probe[k] = v[k];
                }
                neighbours
            })
            .collect();
        Lattice {
            nodes: sorted,
            adjacency,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn index_of(&self, ranks: &[usize]) -> Option<usize> {
        self.nodes
            .binary_search_by(|n| n.as_slice().cmp(ranks))
            .ok()
    }

    /// Least `l` such that entry `(from, to)` of `B^l` is nonzero.
    ///
    /// Row `from` of `B^l` is obtained as `e_from * B^l`, one vector-matrix
    /// product per power. Entries of `B^l` count walks and are non-negative,
    /// so nonzero-ness is tracked over the boolean semiring.
    pub fn least_power(&self, from: usize, to: usize) -> Option<u64> {
        if from == to {
            return Some(0);
        }
        let mut row = vec![false; self.nodes.len()];
        row[from] = true;
        // Union of all rows so far; equals the BFS ball of radius `l`.
        let mut seen = row.clone();
        let mut l = 0u64;
        loop {
            l += 1;
            let mut next = vec![false; self.nodes.len()];
            for (i, &on) in row.iter().enumerate() {
                if on {
                    for &j in &self.adjacency[i] {
                        next[j] = true;
                    }
                }
            }
            if next[to] {
                return Some(l);
            }
            let mut grew = false;
            for (s, &n) in seen.iter_mut().zip(&next) {
                if n && !*s {
                    *s = true;
                    grew = true;
                }
            }
            if !grew {
                return None;
            }
            row = next;
        }
    }
}

/// Distance between `a` and `b` as the least power of the adjacency matrix
/// with a nonzero `(a, b)` entry. Materializes the full lattice of `space`
/// when `nodes` is `None`, otherwise only the listed problems.
pub fn matrix_power_distance(
    space: &FeatureSpace,
    nodes: Option<&[Problem]>,
    a: &Problem,
    b: &Problem,
    cap: usize,
) -> Result<u64> {
    let lattice = match nodes {
        None => Lattice::full(space, cap)?,
        Some(ps) => Lattice::restricted(space, ps, cap)?,
    };
    let ia = lattice
        .index_of(&space.ranks(a)?)
        .ok_or(Error::NotInLattice)?;
    let ib = lattice
        .index_of(&space.ranks(b)?)
        .ok_or(Error::NotInLattice)?;
    lattice.least_power(ia, ib).ok_or(Error::Disconnected)
}
