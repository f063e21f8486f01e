//! Acceptance suite: one PASS/FAIL line per criterion. Runs without the
//! libtest harness so the lines always reach the terminal.

mod common;

use std::time::{Duration, Instant};

use cbdt::axiom_verifier::{check_metric, check_symmetry_product, CheckConfig};
use cbdt::similarity_graph::{Lattice, DEFAULT_LATTICE_CAP};
use cbdt::*;
use common::*;
use rand::Rng;

const EXAMPLE1: &str = include_str!("../fixtures/example1_memory.json");
const EXAMPLE2: &str = include_str!("../fixtures/example2_memory.json");
const EXAMPLE4: &str = include_str!("../fixtures/example4_memory.json");
const EXAMPLE5_SCENARIO: &str = include_str!("../fixtures/example5_scenario.json");
const EXAMPLE5_RATES: &str = include_str!("../fixtures/example5_rates.json");

type Outcome = std::result::Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn r(n: i128, d: i128) -> Rational {
    Rational::new(n, d)
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn problem(pairs: &[(&str, &str)]) -> Problem {
    Problem::from_pairs(pairs)
}

fn q(i: usize) -> Problem {
    let (f1, f2) = [("5", "16"), ("5.5", "16"), ("5", "32"), ("5.5", "32")][i - 1];
    problem(&[("f1", f1), ("f2", f2)])
}

fn action(s: &str) -> ActionId {
    ActionId::new(s).unwrap()
}

fn example1() -> Outcome {
    let start = Instant::now();
    let memory = load_memory(EXAMPLE1).map_err(|e| e.to_string())?;
    let report = decide(
        &memory,
        &problem(&[("f1", "7"), ("f2", "16")]),
        &UtilityFunction::Identity,
    )
    .map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let sims = report.similarity.similarities();
    ensure(sims == vec![r(1, 3), r(2, 3), r(0, 1), r(1, 3)], || {
        format!("similarities {sims:?}")
    })?;
    let buy = report.scores[&action("buy")];
    let not_buy = report.scores[&action("not-buy")];
    ensure(buy == r(4, 1), || format!("U(buy) = {buy}"))?;
    ensure(not_buy == r(20, 3), || format!("U(not-buy) = {not_buy}"))?;
    ensure(report.chosen == action("not-buy"), || {
        format!("chose {}", report.chosen)
    })?;
    ensure(elapsed < Duration::from_secs(1), || {
        format!("took {elapsed:?}")
    })?;
    Ok(format!(
        "U(buy)=4, U(not-buy)=20/3, chosen not-buy in {elapsed:?}"
    ))
}

fn pair_table(memory: &Memory) -> std::result::Result<(u64, Vec<Rational>), String> {
    let report = pairwise_similarity(memory.space(), memory).map_err(|e| e.to_string())?;
    let index = |p: &Problem| {
        let full = memory.space().complete_problem(p).unwrap();
        report.problems.iter().position(|x| *x == full).unwrap()
    };
    let order = [(1, 2), (2, 3), (3, 4), (1, 3), (2, 4), (1, 4)];
    let sims = order
        .iter()
        .map(|&(a, b)| {
            let (i, j) = (index(&q(a)), index(&q(b)));
            report.pair(i.min(j), i.max(j)).unwrap().similarity
        })
        .collect();
    Ok((report.diameter, sims))
}

fn example2() -> Outcome {
    let memory = load_memory(EXAMPLE2).map_err(|e| e.to_string())?;
    let (d, before) = pair_table(&memory)?;
    let want = vec![r(1, 2), r(0, 1), r(1, 2), r(1, 2), r(1, 2), r(0, 1)];
    ensure(d == 2 && before == want, || {
        format!("before: D={d} {before:?}")
    })?;
    let space = memory
        .space()
        .apply_new_value(&NewValue::appended("f1", "7"))
        .map_err(|e| e.to_string())?;
    let grown = memory.with_space(space).map_err(|e| e.to_string())?;
    let (d, after) = pair_table(&grown)?;
    let want = vec![r(2, 3), r(1, 3), r(2, 3), r(2, 3), r(2, 3), r(1, 3)];
    ensure(d == 3 && after == want, || {
        format!("after: D={d} {after:?}")
    })?;
    Ok("D 2 -> 3, all twelve pairwise similarities exact".into())
}

fn example4() -> Outcome {
    let memory = load_memory(EXAMPLE4).map_err(|e| e.to_string())?;
    let selector =
        SubspaceSelector::new(memory.space(), ["f1", "f2"]).map_err(|e| e.to_string())?;
    let p = problem(&[("f1", "7"), ("f2", "32"), ("f3", "9")]);
    let report = decide_restricted(&memory, &p, &UtilityFunction::Identity, &selector, r(1, 2))
        .map_err(|e| e.to_string())?;
    let sims = report.similarity.similarities();
    ensure(sims == vec![r(0, 1), r(1, 3), r(1, 3), r(2, 3)], || {
        format!("projected {sims:?}")
    })?;
    let kept = report.restricted_history.clone().unwrap_or_default();
    let q4 = memory.space().complete_problem(&q(4)).unwrap();
    ensure(kept == vec![q4], || format!("restricted history {kept:?}"))?;
    ensure(!report.fallback_used, || "fell back to full history".into())?;
    ensure(report.chosen == action("buy"), || {
        format!("chose {}", report.chosen)
    })?;
    Ok("projected similarities {0, 1/3, 1/3, 2/3}, history {q4}, chosen buy".into())
}

fn example5() -> Outcome {
    let memory = load_memory(EXAMPLE4).map_err(|e| e.to_string())?;
    let scenario: WaitScenario =
        serde_json::from_str(EXAMPLE5_SCENARIO).map_err(|e| e.to_string())?;
    let p = problem(&[("f1", "7"), ("f2", "32"), ("f3", "9")]);
    let u = UtilityFunction::Identity;

    let now = decide(&memory, &p, &u).map_err(|e| e.to_string())?;
    let sims = now.similarity.similarities();
    ensure(now.similarity.diameter_used == 4, || "D != 4".into())?;
    ensure(sims == vec![r(0, 1), r(1, 4), r(1, 4), r(1, 2)], || {
        format!("now {sims:?}")
    })?;
    ensure(now.scores[&action("buy")] == r(7, 2), || {
        "U(buy) != 7/2".into()
    })?;

    let printed = 1.0 / (10.0 * 12f64.exp());
    let v = evaluate_wait_with_probability(&memory, &p, &scenario, &u, printed)
        .map_err(|e| e.to_string())?;
    let future = v.future_similarity().similarities();
    ensure(v.future_similarity().diameter_used == 7, || {
        "D' != 7".into()
    })?;
    ensure(future == vec![r(0, 1), r(1, 7), r(1, 7), r(2, 7)], || {
        format!("future {future:?}")
    })?;
    ensure(
        v.act_now_utility == r(7, 2) && v.future_utility == r(2, 1),
        || format!("utilities {} / {}", v.act_now_utility, v.future_utility),
    )?;
    let kappa = v.threshold_discount.ok_or("no threshold")?;
    let want = 17.5 * 12f64.exp();
    let rel = (kappa - want).abs() / want;
    ensure(rel < 1e-9, || {
        format!("threshold {kappa} vs {want}, rel {rel:e}")
    })?;

    let pmf = poisson_pmf(1, 0.1).map_err(|e| e.to_string())?;
    let corrected = 0.1 * (-0.1f64).exp();
    ensure((pmf - corrected).abs() < 1e-12, || {
        format!("f(1, 0.1) = {pmf}")
    })?;

    let model: RateModel = serde_json::from_str(EXAMPLE5_RATES).map_err(|e| e.to_string())?;
    let prob = event_probability(&model, &scenario).map_err(|e| e.to_string())?;
    let own = (-2.0f64).exp() * corrected;
    ensure((prob - own).abs() < 1e-15, || {
        format!("event probability {prob}")
    })?;
    Ok(format!(
        "D=4 and D'=7 tables exact, U(buy)=7/2, threshold {kappa:.6e} (rel err {rel:.1e}), f(1,0.1)={pmf:.6}, engine event probability {prob:.6}"
    ))
}

fn oracle_equivalence() -> Outcome {
    let mut rng = rng(0x5eed_0005);
    let mut pairs = 0;
    let mut largest = 0u128;
    let mut spaces = 0;
    let mut fixed = vec![
        grid(&[10, 10, 10, 10]),
        grid(&[9, 8, 7, 4, 2]),
        grid(&[100, 100]),
        grid(&[2; 13]),
    ];
    while pairs < 1200 {
        let space = match fixed.pop() {
            Some(space) => space,
            None if spaces % 10 == 0 => random_space(&mut rng, 4, 10, 10_000),
            None => random_space(&mut rng, 5, 6, 10_000),
        };
        spaces += 1;
        largest = largest.max(space.lattice_size());
        let lattice = Lattice::full(&space, DEFAULT_LATTICE_CAP).map_err(|e| e.to_string())?;
        for _ in 0..12 {
            let (a, b) = (
                random_ranks(&mut rng, &space),
                random_ranks(&mut rng, &space),
            );
            let from = lattice.index_of(&a).ok_or("missing node")?;
            let to = lattice.index_of(&b).ok_or("missing node")?;
            let power = lattice.least_power(from, to).ok_or("unreachable")?;
            let (p, q) = (space.problem_at(&a), space.problem_at(&b));
            let l1 = reference_distance(&space, &p, &q);
            ensure(power == l1, || {
                format!("{p} vs {q}: power {power}, L1 {l1}")
            })?;
            pairs += 1;
        }
    }
    let p = problem(&[("f0", "v0")]);
    let one = FeatureSpace::new(vec![Feature::simple("f0", &["v0", "v1", "v2"]).unwrap()]).unwrap();
    let via_api = matrix_power_distance(
        &one,
        None,
        &p,
        &p.clone().with("f0", "v2"),
        DEFAULT_LATTICE_CAP,
    )
    .map_err(|e| e.to_string())?;
    ensure(via_api == 2, || {
        format!("single feature distance {via_api}")
    })?;
    Ok(format!(
        "{pairs} pairs over {spaces} spaces (largest lattice {largest}), 0 mismatches"
    ))
}

fn metric_suite() -> Outcome {
    let mut rng = rng(0x5eed_0006);
    let mut sampled = 0u64;
    for seed in 0..20 {
        let space = random_space(&mut rng, 6, 8, 1_000_000);
        let cfg = CheckConfig::new(1000, seed).sampled_only();
        let res = check_metric(&space, &cfg).map_err(|e| e.to_string())?;
        ensure(res.passed(), || {
            format!("sampled failures {:?}", res.failures)
        })?;
        sampled += res.instances_tested;
        if space.lattice_size() >= 3 {
            let mem = random_memory_in(&mut rng, &space, 2, 20, false);
            let sym = check_symmetry_product(&space, &mem, &cfg).map_err(|e| e.to_string())?;
            ensure(sym.passed(), || {
                format!("symmetry failures {:?}", sym.failures)
            })?;
        }
    }
    ensure(sampled >= 10_000, || {
        format!("only {sampled} sampled triples")
    })?;

    let mut exhaustive = 0u64;
    let mut sizes = Vec::new();
    let mut spaces: Vec<FeatureSpace> =
        (0..8).map(|_| random_space(&mut rng, 4, 5, 1000)).collect();
    spaces.push(grid(&[10, 10, 10]));
    spaces.push(grid(&[2, 3, 5, 2, 4]));
    for (i, space) in spaces.iter().enumerate() {
        let res =
            check_metric(space, &CheckConfig::new(100, i as u64)).map_err(|e| e.to_string())?;
        ensure(res.exhaustive, || {
            format!("lattice {} not exhaustive", space.lattice_size())
        })?;
        ensure(res.passed(), || {
            format!("exhaustive failures {:?}", res.failures)
        })?;
        exhaustive += res.instances_tested;
        sizes.push(space.lattice_size());
    }
    let max = sizes.iter().max().copied().unwrap_or(0);
    Ok(format!(
        "{sampled} sampled triples, {exhaustive} exhaustive triples on {} lattices (largest {max}), 0 failures",
        sizes.len()
    ))
}

fn grid(cards: &[usize]) -> FeatureSpace {
    let features = cards
        .iter()
        .enumerate()
        .map(|(j, &c)| {
            let values: Vec<String> = (0..c).map(|v| v.to_string()).collect();
            Feature::simple(&format!("g{j}"), &values).unwrap()
        })
        .collect();
    FeatureSpace::new(features).unwrap()
}

fn estimator_identity() -> Outcome {
    let mut rng = rng(0x5eed_0007);
    let mut streams = 0;
    for len in [20usize, 37, 50, 64, 100, 128, 150, 200] {
        for _ in 0..3 {
            let s = growing_stream(&mut rng, len, 0.5, 0.05);
            let n = len as f64;
            let model = estimate_rates(
                &RateModel::new(len as u64).unwrap(),
                &s.old,
                s.memories.last().unwrap(),
            )
            .map_err(|e| e.to_string())?;
            for (id, lambda) in model.lambda_values() {
                let total: u64 = s
                    .value_counts
                    .iter()
                    .map(|c| c.get(id).copied().unwrap_or(0))
                    .sum();
                let mean = total as f64 / n;
                ensure(*lambda == mean, || {
                    format!("len {len}, {id}: {lambda} vs mean {mean}")
                })?;
            }
            let seen: std::collections::BTreeSet<_> =
                s.value_counts.iter().flat_map(|c| c.keys()).collect();
            ensure(seen.len() == model.lambda_values().len(), || {
                "feature set differs".into()
            })?;
            let features: u64 = s.feature_counts.iter().sum();
            let mean = features as f64 / n;
            ensure(model.lambda_features() == mean, || {
                format!(
                    "len {len}: new-feature rate {} vs mean {mean}",
                    model.lambda_features()
                )
            })?;
            streams += 1;
        }
    }
    Ok(format!(
        "{streams} streams of 20..200 problems, rates equal the sample means exactly"
    ))
}

fn argmax_invariance() -> Outcome {
    let mut rng = rng(0x5eed_0008);
    for i in 0..1000 {
        let memory = random_memory(&mut rng);
        let query = random_problem(&mut rng, memory.space());
        let scale = Rational::new(rng.random_range(1..1000), rng.random_range(1..1000));
        let base =
            decide(&memory, &query, &UtilityFunction::Identity).map_err(|e| e.to_string())?;
        let u =
            UtilityFunction::affine(scale, Rational::from_integer(0)).map_err(|e| e.to_string())?;
        let scaled = decide(&memory, &query, &u).map_err(|e| e.to_string())?;
        ensure(
            base.chosen == scaled.chosen && base.ties == scaled.ties,
            || {
                format!(
                    "memory {i}: {:?} vs {:?} at scale {scale}",
                    base.ties, scaled.ties
                )
            },
        )?;
    }
    Ok("1000 random memories, chosen action and ties unchanged".into())
}

fn round_trip() -> Outcome {
    let mut rng = rng(0x5eed_0009);
    for i in 0..1000 {
        let memory = random_memory(&mut rng);
        let back = load_memory(&save_memory(&memory)).map_err(|e| format!("memory {i}: {e}"))?;
        ensure(back == memory, || {
            format!("memory {i} changed after round trip")
        })?;
    }
    Ok("1000 random memories, load(save(m)) == m".into())
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("1 worked example: decision on (7, 16)", example1),
        ("2 worked example: range extension", example2),
        ("3 worked example: restricted comparison", example4),
        ("4 worked example: wait lottery", example5),
        ("5 matrix-power distance equals L1", oracle_equivalence),
        ("6 metric properties", metric_suite),
        ("7 rate estimator equals sample mean", estimator_identity),
        ("8 argmax invariant under scaling", argmax_invariance),
        ("9 persistence round trip", round_trip),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS  {name}: {detail} [{secs:.2}s]"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {name}: {detail} [{secs:.2}s]");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all 9 acceptance criteria passed");
}
