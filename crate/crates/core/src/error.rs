use thiserror::Error;

use crate::case_memory::ActionId;
use crate::feature_space::FeatureId;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("feature `{0}` is not part of the feature space")]
    UnknownFeature(FeatureId),

    #[error("value `{label}` is not in the range of feature `{feature}`")]
    UnknownValue { feature: FeatureId, label: String },

    #[error("feature `{feature}` already contains value `{label}`")]
    DuplicateValue { feature: FeatureId, label: String },

    #[error(
        "insertion position {position} is out of bounds for feature `{feature}` with {len} values"
    )]
    InvalidPosition {
        feature: FeatureId,
        position: usize,
        len: usize,
    },

    #[error("feature id `{0}` is already used")]
    DuplicateFeature(FeatureId),

    #[error("invalid feature `{feature}`: {reason}")]
    InvalidFeature { feature: FeatureId, reason: String },

    #[error("feature `{0}` is continuous; discretize it into an ordered set of value labels before loading")]
    ContinuousFeature(FeatureId),

    #[error("problem has no value for feature `{0}`")]
    IncompleteProblem(FeatureId),

    #[error("subspace selector must name at least one feature")]
    EmptySelector,

    #[error("action id must be non-empty")]
    EmptyActionId,

    #[error("action `{0}` is not in the action set")]
    UnknownAction(ActionId),

    #[error(
        "problem {0} is already in the history; each remembered problem records exactly one action"
    )]
    DuplicateProblem(String),

    #[error("a stored case must carry a non-null result (r != 0)")]
    NullResult,

    #[error("result must be a finite real number, got `{0}`")]
    InvalidNumber(String),

    #[error("memory is empty; there is no basis for a decision")]
    EmptyMemory,

    #[error("action set is empty")]
    EmptyActionSet,

    #[error("utility: {0}")]
    InvalidUtility(String),

    #[error("threshold delta must lie in [0, 1], got {0}")]
    InvalidDelta(String),

    #[error("lattice has {size} nodes, above the cap of {cap}")]
    LatticeTooLarge { size: u128, cap: usize },

    #[error("no path between the two problems in the restricted node set")]
    Disconnected,

    #[error("problem is not a node of the given lattice")]
    NotInLattice,

    #[error("case {index} violates `{rule}`: {detail}")]
    InvalidCase {
        index: usize,
        rule: &'static str,
        detail: String,
    },

    #[error("malformed document: {0}")]
    Malformed(String),

    #[error("old memory is not a prefix of the new memory: {0}")]
    NotPrefix(String),

    #[error("new memory adds no problems; rate estimate would divide by zero")]
    EmptyDelta,

    #[error("no rate is known for feature `{0}`")]
    UnknownRate(FeatureId),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("hypothetical feature space is degenerate (diameter 0)")]
    DegenerateSpace,
}
