//! Executable checks for the testable consequences of the similarity
//! representation on finite instances: metric axioms of the lattice distance,
//! the cyclic product identity of a symmetric similarity, and agreement
//! between the linear representation and the decision rule.
//!
//! Every check is deterministic for a given seed. Lattices small enough are
//! checked exhaustively. Failure witnesses are shrunk coordinate by
//! coordinate toward each feature's default rank.

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::case_memory::{Memory, Outcome};
use crate::decision::{decide, UtilityFunction};
use crate::error::{Error, Result};
use crate::feature_space::{FeatureSpace, Problem};
use crate::numeric::{fraction_string, Rational};
use crate::similarity_graph::{diameter, lattice_distance, normalized_similarity, similarity};

/// Lattices with at most this many points are checked exhaustively.
pub const EXHAUSTIVE_LIMIT: u128 = 1_000;
/// Histories up to this size have every triple checked.
pub const EXHAUSTIVE_HISTORY_LIMIT: usize = 100;
/// Witnesses kept per check; further failures are only counted.
pub const MAX_WITNESSES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CheckConfig {
    pub samples: u64,
    pub seed: u64,
    pub exhaustive_limit: u128,
}

impl CheckConfig {
    pub fn new(samples: u64, seed: u64) -> Self {
        CheckConfig {
            samples,
            seed,
            exhaustive_limit: EXHAUSTIVE_LIMIT,
        }
    }

    pub fn sampled_only(mut self) -> Self {
        self.exhaustive_limit = 0;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Failure {
    pub witness: Vec<Problem>,
    pub expected: String,
    pub observed: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckResult {
    pub check_name: String,
    pub instances_tested: u64,
    pub exhaustive: bool,
    pub failure_count: u64,
    pub failures: Vec<Failure>,
}

impl CheckResult {
    fn new(name: &str, exhaustive: bool) -> Self {
        CheckResult {
            check_name: name.to_string(),
            instances_tested: 0,
            exhaustive,
            failure_count: 0,
            failures: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.failure_count == 0
    }

    fn wants_witness(&self) -> bool {
        self.failures.len() < MAX_WITNESSES
    }

    fn record(&mut self, failure: impl FnOnce() -> Failure) {
        self.failure_count += 1;
        if self.failures.len() < MAX_WITNESSES {
            self.failures.push(failure());
        }
    }
}

fn random_ranks(rng: &mut ChaCha8Rng, cards: &[usize]) -> Vec<usize> {
    cards.iter().map(|&c| rng.random_range(0..c)).collect()
}

fn all_rank_vectors(cards: &[usize]) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = vec![0usize; cards.len()];
    'outer: loop {
        out.push(current.clone());
        for k in (0..cards.len()).rev() {
            current[k] += 1;
            if current[k] < cards[k] {
                continue 'outer;
            }
            current[k] = 0;
        }
        break;
    }
    out
}

/// Moves coordinates one step at a time toward the default rank as long as
/// `fails` keeps holding.
fn shrink<F>(space: &FeatureSpace, mut witness: Vec<Vec<usize>>, fails: F) -> Vec<Problem>
where
    F: Fn(&[Problem]) -> bool,
{
    let defaults: Vec<usize> = space.features().map(|f| f.default_rank()).collect();
    let to_problems = |w: &[Vec<usize>]| w.iter().map(|r| space.problem_at(r)).collect::<Vec<_>>();
    loop {
        let mut progressed = false;
        for i in 0..witness.len() {
            for k in 0..defaults.len() {
                let cur = witness[i][k];
                if cur == defaults[k] {
                    continue;
                }
                let mut candidate = witness.clone();
                candidate[i][k] = if cur > defaults[k] { cur - 1 } else { cur + 1 };
                if fails(&to_problems(&candidate)) {
                    witness = candidate;
                    progressed = true;
                }
            }
        }
        if !progressed {
            return to_problems(&witness);
        }
    }
}

/// Which metric relation a triple violates, if any.
fn metric_violation<D>(d: &D, t: &[Problem]) -> Option<(String, String)>
where
    D: Fn(&Problem, &Problem) -> i64,
{
    let (a, b, c) = (&t[0], &t[1], &t[2]);
    for (x, y) in [(a, b), (b, c), (a, c)] {
        let dxy = d(x, y);
        if dxy < 0 {
            return Some(("d >= 0".into(), format!("d = {dxy}")));
        }
        if (dxy == 0) != (x == y) {
            return Some((
                "d = 0 iff equal".into(),
                format!("d = {dxy}, equal = {}", x == y),
            ));
        }
        let dyx = d(y, x);
        if dxy != dyx {
            return Some(("d(x,y) = d(y,x)".into(), format!("{dxy} vs {dyx}")));
        }
    }
    let (ac, ab, bc) = (d(a, c), d(a, b), d(b, c));
    if ac > ab + bc {
        return Some((
            "d(a,c) <= d(a,b) + d(b,c)".into(),
            format!("{ac} > {ab} + {bc}"),
        ));
    }
    None
}

/// Metric axioms of the lattice distance.
pub fn check_metric(space: &FeatureSpace, config: &CheckConfig) -> Result<CheckResult> {
    check_metric_with(space, config, |a, b| {
        lattice_distance(space, a, b).expect("lattice points are complete") as i64
    })
}

/// [`check_metric`] against an arbitrary distance function.
pub fn check_metric_with<D>(space: &FeatureSpace, config: &CheckConfig, d: D) -> Result<CheckResult>
where
    D: Fn(&Problem, &Problem) -> i64,
{
    if space.is_empty() {
        return Err(Error::InvalidParameter("space has no features".into()));
    }
    let cards = space.cardinalities();
    let exhaustive = space.lattice_size() <= config.exhaustive_limit;
    let mut result = CheckResult::new("metric", exhaustive);
    let fails = |t: &[Problem]| metric_violation(&d, t).is_some();

    if exhaustive {
        let ranks = all_rank_vectors(&cards);
        let points: Vec<Problem> = ranks.iter().map(|r| space.problem_at(r)).collect();
        let n = points.len();
        let mut matrix = vec![0i64; n * n];
        for i in 0..n {
            for j in 0..n {
                matrix[i * n + j] = d(&points[i], &points[j]);
            }
        }
        let report = |result: &mut CheckResult, idx: [usize; 3]| {
            if !result.wants_witness() {
                result.failure_count += 1;
                return;
            }
            let w: Vec<Vec<usize>> = idx.iter().map(|&i| ranks[i].clone()).collect();
            let shrunk = shrink(space, w, fails);
            let (expected, observed) = metric_violation(&d, &shrunk)
                .unwrap_or_else(|| ("metric".into(), "violation".into()));
            result.record(|| Failure {
                witness: shrunk,
                expected,
                observed,
            });
        };
        for i in 0..n {
            for j in 0..n {
                let dij = matrix[i * n + j];
                if dij < 0 || (dij == 0) != (i == j) || dij != matrix[j * n + i] {
                    report(&mut result, [i, j, j]);
                }
            }
        }
        for a in 0..n {
            for b in 0..n {
                let ab = matrix[a * n + b];
                let row_b = &matrix[b * n..(b + 1) * n];
                let row_a = &matrix[a * n..(a + 1) * n];
                for c in 0..n {
                    if row_a[c] > ab + row_b[c] {
                        report(&mut result, [a, b, c]);
                    }
                }
            }
        }
        result.instances_tested = (n as u64).pow(3);
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        for _ in 0..config.samples {
            let w: Vec<Vec<usize>> = (0..3).map(|_| random_ranks(&mut rng, &cards)).collect();
            let t: Vec<Problem> = w.iter().map(|r| space.problem_at(r)).collect();
            if fails(&t) && !result.wants_witness() {
                result.failure_count += 1;
            } else if fails(&t) {
                let shrunk = shrink(space, w, fails);
                let (expected, observed) = metric_violation(&d, &shrunk)
                    .unwrap_or_else(|| ("metric".into(), "violation".into()));
                result.record(|| Failure {
                    witness: shrunk,
                    expected,
                    observed,
                });
            }
            result.instances_tested += 1;
        }
    }
    Ok(result)
}

fn cyclic_products<S>(s: &S, t: &[Problem]) -> (Rational, Rational)
where
    S: Fn(&Problem, &Problem) -> Rational,
{
    let (p, m, r) = (&t[0], &t[1], &t[2]);
    (s(p, m) * s(m, r) * s(r, p), s(p, r) * s(r, m) * s(m, p))
}

/// `s(p,m) s(m,r) s(r,p) = s(p,r) s(r,m) s(m,p)` for the lattice similarity.
pub fn check_symmetry_product(
    space: &FeatureSpace,
    memory: &Memory,
    config: &CheckConfig,
) -> Result<CheckResult> {
    let d_max = diameter(space);
    check_symmetry_product_with(space, memory, config, |a, b| {
        normalized_similarity(
            lattice_distance(space, a, b).expect("problems are complete"),
            d_max,
        )
    })
}

/// [`check_symmetry_product`] against an arbitrary similarity function.
/// Every triple of history problems is checked when the history is small,
/// plus `config.samples` random triples from the whole lattice.
pub fn check_symmetry_product_with<S>(
    space: &FeatureSpace,
    memory: &Memory,
    config: &CheckConfig,
    s: S,
) -> Result<CheckResult>
where
    S: Fn(&Problem, &Problem) -> Rational,
{
    if space.lattice_size() < 3 {
        return Err(Error::InvalidParameter(
            "the cyclic product check needs at least three distinct problems".into(),
        ));
    }
    let history: Vec<Vec<usize>> = memory
        .history()
        .into_iter()
        .map(|q| space.ranks(q))
        .collect::<Result<_>>()?;
    let exhaustive_history = history.len() <= EXHAUSTIVE_HISTORY_LIMIT;
    let mut result = CheckResult::new("symmetry-product", false);
    let fails = |t: &[Problem]| {
        let (l, r) = cyclic_products(&s, t);
        l != r
    };
    let check = |result: &mut CheckResult, w: Vec<Vec<usize>>| {
        let t: Vec<Problem> = w.iter().map(|r| space.problem_at(r)).collect();
        result.instances_tested += 1;
        if fails(&t) && !result.wants_witness() {
            result.failure_count += 1;
        } else if fails(&t) {
            let shrunk = shrink(space, w, fails);
            let (l, r) = cyclic_products(&s, &shrunk);
            result.record(|| Failure {
                witness: shrunk,
                expected: "s(p,m)s(m,r)s(r,p) = s(p,r)s(r,m)s(m,p)".into(),
                observed: format!("{} vs {}", fraction_string(&l), fraction_string(&r)),
            });
        }
    };
    if exhaustive_history {
        for i in 0..history.len() {
            for j in 0..history.len() {
                for k in 0..history.len() {
                    if i != j && j != k && i != k {
                        check(
                            &mut result,
                            vec![history[i].clone(), history[j].clone(), history[k].clone()],
                        );
                    }
                }
            }
        }
    }
    let cards = space.cardinalities();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    for _ in 0..config.samples {
        let w = (0..3).map(|_| random_ranks(&mut rng, &cards)).collect();
        check(&mut result, w);
    }
    Ok(result)
}

fn profile_value(s: &[Rational], x: &[Outcome], u: &UtilityFunction) -> Result<Rational> {
    let mut total = Rational::zero();
    for (si, xi) in s.iter().zip(x) {
        if !xi.is_null() {
            total += *si * u.apply(*xi)?;
        }
    }
    Ok(total)
}

fn random_outcome(rng: &mut ChaCha8Rng, u: &UtilityFunction, lo: i64, hi: i64) -> Outcome {
    match u {
        UtilityFunction::Table(t) if !t.is_empty() => {
            if rng.random_bool(0.25) {
                return Outcome::NULL;
            }
            let keys: Vec<&Outcome> = t.keys().collect();
            *keys[rng.random_range(0..keys.len())]
        }
        _ => {
            // Half-unit grid, null included.
            Outcome(Rational::new(rng.random_range(lo * 2..=hi * 2) as i128, 2))
        }
    }
}

/// Agreement between the linear representation `V(x) = sum s(p,q) u(x(q))`
/// over result profiles and the decision rule: every action's profile value
/// equals its decision score, the chosen action's profile is weakly
/// preferred to every other, and on sampled profiles the induced order is
/// reflexive, total and transitive. For sign-preserving utilities
/// (identity, or affine without shift) sampled pairs with `x >= y` and
/// `x * y = 0` must have `x` weakly preferred.
pub fn check_representation(
    memory: &Memory,
    query: &Problem,
    u: &UtilityFunction,
    config: &CheckConfig,
) -> Result<CheckResult> {
    let report = decide(memory, query, u)?;
    let table = similarity(memory.space(), query, memory)?;
    let s = table.similarities();
    let history: Vec<Problem> = memory.history().into_iter().cloned().collect();
    let mut result = CheckResult::new("representation", false);

    let chosen_profile: Vec<Outcome> = memory
        .result_profile(&report.chosen)?
        .into_iter()
        .map(|(_, r)| r)
        .collect();
    let chosen_value = profile_value(&s, &chosen_profile, u)?;
    for action in memory.actions() {
        let x: Vec<Outcome> = memory
            .result_profile(action)?
            .into_iter()
            .map(|(_, r)| r)
            .collect();
        let v = profile_value(&s, &x, u)?;
        let score = report.scores[action];
        result.instances_tested += 1;
        if v != score {
            result.record(|| Failure {
                witness: history.clone(),
                expected: format!("profile value of `{action}` equals its decision score"),
                observed: format!("{} vs {}", fraction_string(&v), fraction_string(&score)),
            });
        }
        if v > chosen_value {
            result.record(|| Failure {
                witness: history.clone(),
                expected: format!("chosen `{}` weakly preferred to `{action}`", report.chosen),
                observed: format!(
                    "{} < {}",
                    fraction_string(&chosen_value),
                    fraction_string(&v)
                ),
            });
        }
    }

    let sign_preserving = match u {
        UtilityFunction::Identity => true,
        UtilityFunction::Affine { shift, .. } => shift.is_zero(),
        UtilityFunction::Table(_) => false,
    };
    let n = history.len();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    for _ in 0..config.samples {
        let x: Vec<Outcome> = (0..n)
            .map(|_| random_outcome(&mut rng, u, -10, 10))
            .collect();
        let y: Vec<Outcome> = (0..n)
            .map(|_| random_outcome(&mut rng, u, -10, 10))
            .collect();
        let z: Vec<Outcome> = (0..n)
            .map(|_| random_outcome(&mut rng, u, -10, 10))
            .collect();
        let (vx, vy, vz) = (
            profile_value(&s, &x, u)?,
            profile_value(&s, &y, u)?,
            profile_value(&s, &z, u)?,
        );
        let vx_again = profile_value(&s, &x, u)?;
        result.instances_tested += 1;
        if vx != vx_again {
            result.record(|| Failure {
                witness: history.clone(),
                expected: "x indifferent to itself".into(),
                observed: format!("{} vs {}", fraction_string(&vx), fraction_string(&vx_again)),
            });
        }
        if !(vx >= vy || vy >= vx) {
            result.record(|| Failure {
                witness: history.clone(),
                expected: "x and y comparable".into(),
                observed: format!("{} ? {}", fraction_string(&vx), fraction_string(&vy)),
            });
        }
        if vx >= vy && vy >= vz && vx < vz {
            result.record(|| Failure {
                witness: history.clone(),
                expected: "transitivity".into(),
                observed: format!(
                    "{} >= {} >= {} but not x >= z",
                    fraction_string(&vx),
                    fraction_string(&vy),
                    fraction_string(&vz)
                ),
            });
        }
        if sign_preserving {
            // x >= 0 everywhere; y is null where x is positive and <= 0 elsewhere.
            let xm: Vec<Outcome> = (0..n).map(|_| random_outcome(&mut rng, u, 0, 10)).collect();
            let ym: Vec<Outcome> = xm
                .iter()
                .map(|xi| {
                    if xi.is_null() {
                        random_outcome(&mut rng, u, -10, 0)
                    } else {
                        Outcome::NULL
                    }
                })
                .collect();
            let (vxm, vym) = (profile_value(&s, &xm, u)?, profile_value(&s, &ym, u)?);
            result.instances_tested += 1;
            if vxm < vym {
                result.record(|| Failure {
                    witness: history.clone(),
                    expected: "x >= y and x*y = 0 implies x weakly preferred".into(),
                    observed: format!("{} < {}", fraction_string(&vxm), fraction_string(&vym)),
                });
            }
        }
    }
    Ok(result)
}

/// Superadditivity `s(p,q) >= s(p,m) + s(m,q)` over history triples.
///
/// The normalized lattice similarity does not satisfy this in general (for
/// points on a shortest path it gives `1 - d(p,q)/D` against
/// `2 - d(p,q)/D`). The check is expected to fail; its witnesses document
/// the counterexamples.
pub fn check_similarity_superadditivity(
    memory: &Memory,
    config: &CheckConfig,
) -> Result<CheckResult> {
    let space = memory.space();
    let d_max = diameter(space);
    let history: Vec<&Problem> = memory.history();
    let s = |a: &Problem, b: &Problem| -> Result<Rational> {
        Ok(normalized_similarity(lattice_distance(space, a, b)?, d_max))
    };
    let mut result = CheckResult::new("similarity-superadditivity (expected failure)", false);
    let check = |result: &mut CheckResult, p: &Problem, m: &Problem, q: &Problem| -> Result<()> {
        let (pq, pm, mq) = (s(p, q)?, s(p, m)?, s(m, q)?);
        result.instances_tested += 1;
        if pq < pm + mq {
            result.record(|| Failure {
                witness: vec![p.clone(), m.clone(), q.clone()],
                expected: "s(p,q) >= s(p,m) + s(m,q)".into(),
                observed: format!(
                    "{} < {} + {}",
                    fraction_string(&pq),
                    fraction_string(&pm),
                    fraction_string(&mq)
                ),
            });
        }
        Ok(())
    };
    let n = history.len();
    if n <= EXHAUSTIVE_HISTORY_LIMIT {
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if i != j && j != k && i != k {
                        check(&mut result, history[i], history[j], history[k])?;
                    }
                }
            }
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        for _ in 0..config.samples {
            let (i, j, k) = (
                rng.random_range(0..n),
                rng.random_range(0..n),
                rng.random_range(0..n),
            );
            check(&mut result, history[i], history[j], history[k])?;
        }
    }
    Ok(result)
}
