//! Case-based decisions over a discrete feature lattice.
//!
//! Problems are points of a product of ordered feature ranges. The similarity
//! between two problems is one minus their shortest-path distance on that
//! lattice divided by its diameter, and an action's value for a new problem
//! is the similarity-weighted sum of the utilities it earned on remembered
//! problems.

pub mod axiom_verifier;
pub mod case_memory;
pub mod cli;
pub mod decision;
pub mod error;
pub mod feature_space;
pub mod learning;
pub mod numeric;
pub mod similarity_graph;

pub use case_memory::{load_memory, save_memory, ActionId, Case, Memory, Outcome};
pub use decision::{
    decide, decide_restricted, evolve_then_decide, DecisionReport, RawQuery, UtilityFunction,
};
pub use error::{Error, Result};
pub use feature_space::{
    project, Feature, FeatureId, FeatureSpace, NewValue, Problem, SubspaceSelector,
};
pub use learning::{
    estimate_rates, evaluate_wait, evaluate_wait_with_probability, event_probability, poisson_pmf,
    DiscountMode, LotteryValuation, RateModel, Recommendation, WaitScenario,
};
pub use numeric::Rational;
pub use similarity_graph::{
    diameter, lattice_distance, matrix_power_distance, pairwise_similarity, similarity,
    DistanceReport, SimilarityTable,
};
