//! Action choice by similarity-weighted past utility.
//!
//! `U(a) = sum over cases (q, a, r) of s(p, q) * u(r)`; the chosen action is
//! the maximizer, with ties broken by the lexicographic order of action ids.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::case_memory::{ActionId, Memory, Outcome};
use crate::error::{Error, Result};
use crate::feature_space::{
    project, Feature, FeatureId, FeatureSpace, NewValue, Problem, SubspaceSelector,
};
use crate::numeric::{parse_rational, Rational};
use crate::similarity_graph::{similarity, SimilarityTable};

/// Instantaneous utility of a result.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum UtilityFunction {
    Identity,
    /// `scale * r + shift`, `scale > 0`.
    Affine {
        scale: Rational,
        shift: Rational,
    },
    /// Explicit utilities; must cover every result present in the memory.
    Table(BTreeMap<Outcome, Rational>),
}

impl UtilityFunction {
    pub fn affine(scale: Rational, shift: Rational) -> Result<Self> {
        if scale <= Rational::zero() {
            return Err(Error::InvalidUtility(format!(
                "affine scale must be positive, got {scale}"
            )));
        }
        Ok(UtilityFunction::Affine { scale, shift })
    }

    pub fn apply(&self, r: Outcome) -> Result<Rational> {
        match self {
            UtilityFunction::Identity => Ok(r.value()),
            UtilityFunction::Affine { scale, shift } => Ok(*scale * r.value() + *shift),
            UtilityFunction::Table(t) => t
                .get(&r)
                .copied()
                .ok_or_else(|| Error::InvalidUtility(format!("no utility listed for result {r}"))),
        }
    }

    /// Parses `identity`, `affine:SCALE:SHIFT` or a JSON table
    /// `[[result, utility], ...]` given inline after `table:`.
    pub fn parse(text: &str) -> Result<Self> {
        if text == "identity" {
            return Ok(UtilityFunction::Identity);
        }
        if let Some(rest) = text.strip_prefix("affine:") {
            let (scale, shift) = rest
                .split_once(':')
                .ok_or_else(|| Error::InvalidUtility("expected affine:SCALE:SHIFT".into()))?;
            return UtilityFunction::affine(parse_rational(scale)?, parse_rational(shift)?);
        }
        if let Some(rest) = text.strip_prefix("table:") {
            let rows: Vec<(String, String)> = serde_json::from_str(rest)
                .map_err(|e| Error::InvalidUtility(format!("bad table: {e}")))?;
            let table = rows
                .iter()
                .map(|(r, u)| Ok((Outcome(parse_rational(r)?), parse_rational(u)?)))
                .collect::<Result<_>>()?;
            return Ok(UtilityFunction::Table(table));
        }
        Err(Error::InvalidUtility(format!("unknown utility `{text}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecisionReport {
    pub query: Problem,
    pub scores: BTreeMap<ActionId, Rational>,
    pub chosen: ActionId,
    pub ties: Vec<ActionId>,
    pub similarity: SimilarityTable,
    pub restricted_history: Option<Vec<Problem>>,
    pub fallback_used: bool,
}

impl DecisionReport {
    pub fn score(&self, action: &ActionId) -> Option<Rational> {
        self.scores.get(action).copied()
    }
}

/// Scores every action over the cases whose problems appear in `table`
/// (matched by history index) and picks the argmax.
fn score_actions(
    memory: &Memory,
    u: &UtilityFunction,
    table: &SimilarityTable,
    included: &[bool],
) -> Result<(BTreeMap<ActionId, Rational>, ActionId, Vec<ActionId>)> {
    if memory.actions().is_empty() {
        return Err(Error::EmptyActionSet);
    }
    let mut scores: BTreeMap<ActionId, Rational> = memory
        .actions()
        .iter()
        .map(|a| (a.clone(), Rational::zero()))
        .collect();
    for ((case, entry), keep) in memory.cases().iter().zip(&table.entries).zip(included) {
        if *keep {
            *scores
                .get_mut(case.action())
                .expect("case action is in the action set") +=
                entry.similarity * u.apply(case.result())?;
        }
    }
    let best = *scores.values().max().expect("non-empty action set");
    let ties: Vec<ActionId> = scores
        .iter()
        .filter(|(_, s)| **s == best)
        .map(|(a, _)| a.clone())
        .collect();
    let chosen = ties[0].clone();
    Ok((scores, chosen, ties))
}

pub fn decide(memory: &Memory, query: &Problem, u: &UtilityFunction) -> Result<DecisionReport> {
    if memory.is_empty() {
        return Err(Error::EmptyMemory);
    }
    memory.space().validate_complete(query)?;
    let table = similarity(memory.space(), query, memory)?;
    let all = vec![true; memory.len()];
    let (scores, chosen, ties) = score_actions(memory, u, &table, &all)?;
    Ok(DecisionReport {
        query: query.clone(),
        scores,
        chosen,
        ties,
        similarity: table,
        restricted_history: None,
        fallback_used: false,
    })
}

/// Decision on an aspect of the problem: similarities are measured on the
/// selected subspace (with that subspace's own diameter) and only history
/// problems with projected similarity strictly above `delta` take part. When
/// none qualify the full history is used and `fallback_used` is set.
pub fn decide_restricted(
    memory: &Memory,
    query: &Problem,
    u: &UtilityFunction,
    selector: &SubspaceSelector,
    delta: Rational,
) -> Result<DecisionReport> {
    if delta < Rational::zero() || delta > Rational::one() {
        return Err(Error::InvalidDelta(delta.to_string()));
    }
    if memory.is_empty() {
        return Err(Error::EmptyMemory);
    }
    memory.space().validate_complete(query)?;
    let subspace = memory.space().subspace(selector)?;
    let projected_query = project(query, selector)?;
    let projected_history = memory
        .history()
        .into_iter()
        .map(|q| project(q, selector))
        .collect::<Result<Vec<_>>>()?;
    let table = SimilarityTable::compute(&subspace, &projected_query, &projected_history)?;

    let mut included: Vec<bool> = table.entries.iter().map(|e| e.similarity > delta).collect();
    let fallback_used = !included.iter().any(|&k| k);
    if fallback_used {
        included.iter_mut().for_each(|k| *k = true);
    }
    let restricted: Vec<Problem> = memory
        .history()
        .into_iter()
        .zip(&included)
        .filter(|(_, &k)| k)
        .map(|(q, _)| q.clone())
        .collect();
    let (scores, chosen, ties) = score_actions(memory, u, &table, &included)?;
    Ok(DecisionReport {
        query: query.clone(),
        scores,
        chosen,
        ties,
        similarity: table,
        restricted_history: Some(restricted),
        fallback_used,
    })
}

/// A query that may use values or features the memory has not seen yet.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawQuery {
    pub coordinates: BTreeMap<FeatureId, String>,
    #[serde(default)]
    pub new_values: Vec<NewValue>,
    #[serde(default)]
    pub new_features: Vec<Feature>,
}

impl RawQuery {
    pub fn plain(problem: &Problem) -> Self {
        RawQuery {
            coordinates: problem.coordinates().clone(),
            ..Default::default()
        }
    }
}

/// Extends `space` with the listed new features and values, in that order.
pub fn extend_space(
    space: &FeatureSpace,
    new_features: &[Feature],
    new_values: &[NewValue],
) -> Result<FeatureSpace> {
    let mut space = space.clone();
    for f in new_features {
        space = space.extend_with_feature(f.clone())?;
    }
    for v in new_values {
        space = space.apply_new_value(v)?;
    }
    Ok(space)
}

/// Evolves the memory's space to accommodate `raw` (new features first, then
/// new values), re-completes the history, and decides on the evolved space.
/// Coordinates for new features are filled with the feature default when the
/// query leaves them out.
pub fn evolve_then_decide(
    memory: &Memory,
    raw: &RawQuery,
    u: &UtilityFunction,
) -> Result<(Memory, DecisionReport)> {
    let space = extend_space(memory.space(), &raw.new_features, &raw.new_values)?;
    let evolved = if space == *memory.space() {
        memory.clone()
    } else {
        memory.with_space(space)?
    };
    let query = evolved
        .space()
        .complete_problem(&Problem::new(raw.coordinates.clone()))?;
    let report = decide(&evolved, &query, u)?;
    Ok((evolved, report))
}

/// Union of action ids whose score is maximal; exposed for callers that
/// compare decisions across utilities.
pub fn argmax_set(scores: &BTreeMap<ActionId, Rational>) -> BTreeSet<ActionId> {
    let Some(best) = scores.values().max() else {
        return BTreeSet::new();
    };
    scores
        .iter()
        .filter(|(_, s)| *s == best)
        .map(|(a, _)| a.clone())
        .collect()
}
