//! Random spaces and memories shared by the integration tests, plus
//! independent reference computations that avoid the library's own
//! similarity code.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use cbdt::{ActionId, Case, Feature, FeatureId, FeatureSpace, Memory, Outcome, Problem, Rational};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A space with 1..=max_features features of cardinality 1..=max_card whose
/// lattice has at most `cap` points.
pub fn random_space(
    rng: &mut ChaCha8Rng,
    max_features: usize,
    max_card: usize,
    cap: u128,
) -> FeatureSpace {
    loop {
        let n = rng.random_range(1..=max_features);
        let cards: Vec<usize> = (0..n).map(|_| rng.random_range(1..=max_card)).collect();
        let size: u128 = cards.iter().map(|&c| c as u128).product();
        if size > cap {
            continue;
        }
        let features = cards
            .iter()
            .enumerate()
            .map(|(j, &c)| {
                let values: Vec<String> = (0..c).map(|v| format!("v{v}")).collect();
                let default_rank = rng.random_range(0..c);
                Feature::new(
                    format!("f{j}").as_str(),
                    format!("feature {j}"),
                    values,
                    default_rank,
                )
                .unwrap()
            })
            .collect();
        return FeatureSpace::new(features).unwrap();
    }
}

pub fn random_ranks(rng: &mut ChaCha8Rng, space: &FeatureSpace) -> Vec<usize> {
    space
        .cardinalities()
        .iter()
        .map(|&c| rng.random_range(0..c))
        .collect()
}

pub fn random_problem(rng: &mut ChaCha8Rng, space: &FeatureSpace) -> Problem {
    let ranks = random_ranks(rng, space);
    space.problem_at(&ranks)
}

/// A non-zero rational in [-10, 10] (or (0, 10] when `positive`).
pub fn random_result(rng: &mut ChaCha8Rng, positive: bool) -> Rational {
    loop {
        let den = rng.random_range(1..=4i128);
        let num = if positive {
            rng.random_range(1..=10 * den)
        } else {
            rng.random_range(-10 * den..=10 * den)
        };
        if num != 0 {
            return Rational::new(num, den);
        }
    }
}

pub fn actions(n: usize) -> Vec<ActionId> {
    (0..n)
        .map(|i| ActionId::new(format!("a{i}")).unwrap())
        .collect()
}

/// Up to `max_cases` cases on distinct problems, at least one.
pub fn random_memory_in(
    rng: &mut ChaCha8Rng,
    space: &FeatureSpace,
    n_actions: usize,
    max_cases: usize,
    positive: bool,
) -> Memory {
    let acts = actions(n_actions);
    let mut memory = Memory::new(space.clone(), acts.clone());
    let limit = (space.lattice_size().min(max_cases as u128)) as usize;
    let target = rng.random_range(1..=limit.max(1));
    let mut seen = BTreeSet::new();
    while seen.len() < target {
        let p = random_problem(rng, space);
        if !seen.insert(p.clone()) {
            continue;
        }
        let a = acts[rng.random_range(0..acts.len())].clone();
        let case = Case::new(p, a, Outcome(random_result(rng, positive))).unwrap();
        memory = memory.add_case(case).unwrap();
    }
    memory
}

pub fn random_memory(rng: &mut ChaCha8Rng) -> Memory {
    let space = random_space(rng, 4, 5, 10_000);
    let n_actions = rng.random_range(1..=4);
    random_memory_in(rng, &space, n_actions, 12, false)
}

/// Rank of `label` found by scanning the feature's declared order.
fn scan_rank(f: &Feature, label: &str) -> usize {
    f.values()
        .iter()
        .position(|v| v == label)
        .expect("label in range")
}

/// Sum of absolute rank differences, computed without the library.
pub fn reference_distance(space: &FeatureSpace, p: &Problem, q: &Problem) -> u64 {
    space
        .features()
        .map(|f| {
            let a = scan_rank(f, p.get(f.id()).unwrap()) as i64;
            let b = scan_rank(f, q.get(f.id()).unwrap()) as i64;
            (a - b).unsigned_abs()
        })
        .sum()
}

pub fn reference_diameter(space: &FeatureSpace) -> u64 {
    space.features().map(|f| f.values().len() as u64 - 1).sum()
}

pub fn reference_similarity(space: &FeatureSpace, p: &Problem, q: &Problem) -> Rational {
    let d = reference_diameter(space);
    if d == 0 {
        return Rational::from_integer(1);
    }
    Rational::from_integer(1) - Rational::new(reference_distance(space, p, q) as i128, d as i128)
}

/// Brute-force score of every action under the identity utility scaled by
/// `scale`.
pub fn reference_scores(
    memory: &Memory,
    query: &Problem,
    scale: Rational,
) -> Vec<(ActionId, Rational)> {
    memory
        .actions()
        .iter()
        .map(|a| {
            let total = memory
                .cases()
                .iter()
                .filter(|c| c.action() == a)
                .map(|c| {
                    reference_similarity(memory.space(), query, c.problem())
                        * c.result().value()
                        * scale
                })
                .fold(Rational::from_integer(0), |acc, x| acc + x);
            (a.clone(), total)
        })
        .collect()
}

/// A memory followed by successors that each add one case, with the true
/// novelty carried by every added problem.
pub struct Stream {
    pub old: Memory,
    pub memories: Vec<Memory>,
    /// New values per feature carried by each added problem.
    pub value_counts: Vec<BTreeMap<FeatureId, u64>>,
    /// Features first appearing with each added problem.
    pub feature_counts: Vec<u64>,
}

/// Each step widens the range of a random feature with probability
/// `p_value` and adds a single-valued feature with probability `p_feature`;
/// the case added in that step carries the new value, so every novelty
/// arrives with the problem that introduces it.
pub fn growing_stream(rng: &mut ChaCha8Rng, len: usize, p_value: f64, p_feature: f64) -> Stream {
    let space = random_space(rng, 2, 3, 9);
    let old = random_memory_in(rng, &space, 2, 3, true);
    let mut current = old.clone();
    let mut stream = Stream {
        old,
        memories: Vec::new(),
        value_counts: Vec::new(),
        feature_counts: Vec::new(),
    };
    let mut fresh = 0;
    while stream.memories.len() < len {
        let mut space = current.space().clone();
        let mut carried = Vec::new();
        let mut introduced = 0;
        if rng.random_bool(p_value) {
            let j = rng.random_range(0..space.len());
            let id = space.features().nth(j).unwrap().id().clone();
            let end = space.feature(&id).unwrap().cardinality();
            let label = format!("n{fresh}");
            space = space.extend_with_value(&id, &label, end).unwrap();
            carried.push((id, label));
        }
        if rng.random_bool(p_feature) {
            let f = Feature::simple(&format!("g{fresh}"), &["base"]).unwrap();
            space = space.extend_with_feature(f).unwrap();
            introduced = 1;
        }
        fresh += 1;
        let next = current.with_space(space.clone()).unwrap();
        let mut p = random_problem(rng, &space);
        for (id, label) in &carried {
            p = p.with(id.clone(), label.clone());
        }
        if next.contains_problem(&p) {
            continue;
        }
        let mut values: BTreeMap<FeatureId, u64> = space.ids().map(|id| (id.clone(), 0)).collect();
        for (id, _) in &carried {
            *values.get_mut(id).unwrap() += 1;
        }
        let action = next.actions().iter().next().unwrap().clone();
        let case = Case::new(p, action, Outcome::from_integer(1)).unwrap();
        current = next.add_case(case).unwrap();
        stream.memories.push(current.clone());
        stream.value_counts.push(values);
        stream.feature_counts.push(introduced);
    }
    stream
}
