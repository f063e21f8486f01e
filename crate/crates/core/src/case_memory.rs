//! Cases, memories and the memory document.
//!
//! A memory stores only the action actually taken on each remembered
//! problem. The result of any other action on that problem is the null
//! result `0` and is never stored, so every history problem carries exactly
//! one non-null (action, result) pair.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::feature_space::{Feature, FeatureId, FeatureSpace, Problem};
use crate::numeric::{serde_rational, to_f64, Rational};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct ActionId(String);

impl ActionId {
    pub fn new(id: impl Into<String>) -> Result<Self> {
        let id = id.into();
        if id.is_empty() {
            return Err(Error::EmptyActionId);
        }
        Ok(ActionId(id))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for ActionId {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        ActionId::new(s)
    }
}

impl From<ActionId> for String {
    fn from(a: ActionId) -> String {
        a.0
    }
}

impl fmt::Display for ActionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A real-valued result. `Outcome::NULL` is the result of an action not taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Outcome(#[serde(with = "serde_rational")] pub Rational);

impl Outcome {
    pub const NULL: Outcome = Outcome(Rational::new_raw(0, 1));

    pub fn from_integer(v: i64) -> Self {
        Outcome(Rational::from_integer(v as i128))
    }

    pub fn value(&self) -> Rational {
        self.0
    }

    pub fn is_null(&self) -> bool {
        self.0.is_zero()
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        crate::numeric::Frac(&self.0).fmt(f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Case {
    problem: Problem,
    action: ActionId,
    result: Outcome,
}

impl Case {
    pub fn new(problem: Problem, action: ActionId, result: Outcome) -> Result<Self> {
        if result.is_null() {
            return Err(Error::NullResult);
        }
        Ok(Case {
            problem,
            action,
            result,
        })
    }

    pub fn problem(&self) -> &Problem {
        &self.problem
    }

    pub fn action(&self) -> &ActionId {
        &self.action
    }

    pub fn result(&self) -> Outcome {
        self.result
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Memory {
    space: FeatureSpace,
    cases: Vec<Case>,
    actions: BTreeSet<ActionId>,
}

impl Memory {
    pub fn new(space: FeatureSpace, actions: impl IntoIterator<Item = ActionId>) -> Self {
        Memory {
            space,
            cases: Vec::new(),
            actions: actions.into_iter().collect(),
        }
    }

    pub fn space(&self) -> &FeatureSpace {
        &self.space
    }

    pub fn cases(&self) -> &[Case] {
        &self.cases
    }

    pub fn actions(&self) -> &BTreeSet<ActionId> {
        &self.actions
    }

    pub fn len(&self) -> usize {
        self.cases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cases.is_empty()
    }

    pub fn contains_problem(&self, problem: &Problem) -> bool {
        self.cases.iter().any(|c| &c.problem == problem)
    }

    /// Returns a memory with `case` appended. Missing coordinates are filled
    /// with feature defaults before the uniqueness check.
    pub fn add_case(&self, case: Case) -> Result<Memory> {
        if !self.actions.contains(&case.action) {
            return Err(Error::UnknownAction(case.action));
        }
        let problem = self.space.complete_problem(&case.problem)?;
        if self.contains_problem(&problem) {
            return Err(Error::DuplicateProblem(problem.display_in(&self.space)));
        }
        let value = case.result.value();
        if value < Rational::zero() || value > Rational::from_integer(10) {
            log::warn!(
                "result {} for {} lies outside [0, 10]",
                to_f64(&value),
                problem.display_in(&self.space)
            );
        }
        let mut next = self.clone();
        next.cases.push(Case { problem, ..case });
        Ok(next)
    }

    /// Problems of all cases in insertion order.
    pub fn history(&self) -> Vec<&Problem> {
        self.cases.iter().map(|c| &c.problem).collect()
    }

    /// The action viewed as a vector over the history: the stored result where
    /// the case used this action, the null result elsewhere.
    pub fn result_profile(&self, action: &ActionId) -> Result<Vec<(Problem, Outcome)>> {
        if !self.actions.contains(action) {
            return Err(Error::UnknownAction(action.clone()));
        }
        Ok(self
            .cases
            .iter()
            .map(|c| {
                let r = if &c.action == action {
                    c.result
                } else {
                    Outcome::NULL
                };
                (c.problem.clone(), r)
            })
            .collect())
    }

    /// Re-homes the memory in `space`, completing every problem. `space` must
    /// contain every value already used by the history.
    pub fn with_space(&self, space: FeatureSpace) -> Result<Memory> {
        let cases = self
            .cases
            .iter()
            .map(|c| {
                Ok(Case {
                    problem: space.complete_problem(&c.problem)?,
                    ..c.clone()
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Memory {
            space,
            cases,
            actions: self.actions.clone(),
        })
    }

    pub fn with_action(&self, action: ActionId) -> Memory {
        let mut next = self.clone();
        next.actions.insert(action);
        next
    }
}

// ---------------------------------------------------------------------------
// Document format
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeatureDoc {
    pub id: FeatureId,
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    #[serde(default)]
    pub values: Vec<String>,
    #[serde(default)]
    pub default_rank: usize,
}

impl FeatureDoc {
    pub fn into_feature(self) -> Result<Feature> {
        match self.kind.as_deref() {
            None | Some("discrete") => {}
            Some("continuous") => return Err(Error::ContinuousFeature(self.id)),
            Some(other) => {
                return Err(Error::Malformed(format!(
                    "feature `{}` has unknown kind `{other}`",
                    self.id
                )))
            }
        }
        let name = self.name.unwrap_or_else(|| self.id.to_string());
        Feature::new(self.id, name, self.values, self.default_rank)
    }
}

impl TryFrom<FeatureDoc> for Feature {
    type Error = Error;

    fn try_from(doc: FeatureDoc) -> Result<Feature> {
        doc.into_feature()
    }
}

impl From<Feature> for FeatureDoc {
    fn from(f: Feature) -> Self {
        FeatureDoc::from(&f)
    }
}

impl From<&Feature> for FeatureDoc {
    fn from(f: &Feature) -> Self {
        FeatureDoc {
            id: f.id().clone(),
            name: Some(f.name().to_string()),
            kind: None,
            values: f.values().to_vec(),
            default_rank: f.default_rank(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseDoc {
    pub problem: BTreeMap<FeatureId, String>,
    pub action: String,
    #[serde(with = "serde_rational")]
    pub result: Rational,
}

/// On-disk form of a memory. Field order is part of the format.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MemoryDocument {
    pub features: Vec<FeatureDoc>,
    pub actions: Vec<String>,
    #[serde(default)]
    pub cases: Vec<CaseDoc>,
}

impl MemoryDocument {
    pub fn from_memory(memory: &Memory) -> Self {
        MemoryDocument {
            features: memory.space.features().map(FeatureDoc::from).collect(),
            actions: memory.actions.iter().map(|a| a.0.clone()).collect(),
            cases: memory
                .cases
                .iter()
                .map(|c| CaseDoc {
                    problem: c.problem.coordinates().clone(),
                    action: c.action.0.clone(),
                    result: c.result.0,
                })
                .collect(),
        }
    }

    pub fn into_memory(self) -> Result<Memory> {
        let features = self
            .features
            .into_iter()
            .map(FeatureDoc::into_feature)
            .collect::<Result<Vec<_>>>()?;
        let space = FeatureSpace::new(features)?;
        let mut actions = BTreeSet::new();
        for a in self.actions {
            let id = ActionId::new(a)?;
            if !actions.insert(id.clone()) {
                return Err(Error::Malformed(format!("action `{id}` listed twice")));
            }
        }
        let mut memory = Memory::new(space, actions);
        for (index, doc) in self.cases.into_iter().enumerate() {
            let invalid = |rule: &'static str, detail: String| Error::InvalidCase {
                index,
                rule,
                detail,
            };
            let action =
                ActionId::new(doc.action).map_err(|e| invalid("known-action", e.to_string()))?;
            let case = Case::new(Problem::new(doc.problem), action, Outcome(doc.result))
                .map_err(|e| invalid("non-null-result", e.to_string()))?;
            memory = memory.add_case(case).map_err(|e| {
                let rule = match &e {
                    Error::DuplicateProblem(_) => "unique-problem",
                    Error::UnknownAction(_) => "known-action",
                    _ => "known-coordinates",
                };
                invalid(rule, e.to_string())
            })?;
        }
        Ok(memory)
    }
}

pub fn load_memory(text: &str) -> Result<Memory> {
    let doc: MemoryDocument =
        serde_json::from_str(text).map_err(|e| Error::Malformed(e.to_string()))?;
    doc.into_memory()
}

pub fn save_memory(memory: &Memory) -> String {
    let mut text = serde_json::to_string_pretty(&MemoryDocument::from_memory(memory))
        .expect("memory documents always serialize");
    text.push('\n');
    text
}
