//! Poisson arrival rates of new values and features, and the valuation of
//! acting now against waiting for an anticipated, richer problem.
//!
//! Time is measured in problem intervals: one interval elapses between the
//! formulation of two consecutive problems.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::case_memory::{ActionId, Memory};
use crate::decision::{decide, extend_space, DecisionReport, UtilityFunction};
use crate::error::{Error, Result};
use crate::feature_space::{Feature, FeatureId, FeatureSpace, NewValue, Problem};
use crate::numeric::{to_f64, Rational};
use crate::similarity_graph::{diameter, SimilarityTable};

/// `e^-lambda * lambda^k / k!`.
pub fn poisson_pmf(k: u64, lambda: f64) -> Result<f64> {
    if !lambda.is_finite() || lambda < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "Poisson rate must be a finite non-negative number, got {lambda}"
        )));
    }
    if lambda == 0.0 {
        return Ok(if k == 0 { 1.0 } else { 0.0 });
    }
    if k <= 170 {
        // Direct product keeps full precision for the small k used here.
        let mut p = (-lambda).exp();
        for i in 1..=k {
            p *= lambda / i as f64;
        }
        Ok(p)
    } else {
        let ln_fact: f64 = (1..=k).map(|i| (i as f64).ln()).sum();
        Ok((k as f64 * lambda.ln() - lambda - ln_fact).exp())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
struct PendingCounts {
    problems: u64,
    value_arrivals: BTreeMap<FeatureId, u64>,
    feature_arrivals: u64,
}

/// Current rate estimates plus the counts gathered since the last
/// re-estimation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateModel {
    lambda_values: BTreeMap<FeatureId, f64>,
    lambda_features: f64,
    batch_size: u64,
    observations: u64,
    #[serde(default)]
    pending: PendingCounts,
}

impl RateModel {
    /// An empty model: all rates 0, no observations.
    pub fn new(batch_size: u64) -> Result<Self> {
        if batch_size == 0 {
            return Err(Error::InvalidParameter(
                "batch size must be positive".into(),
            ));
        }
        Ok(RateModel {
            lambda_values: BTreeMap::new(),
            lambda_features: 0.0,
            batch_size,
            observations: 0,
            pending: PendingCounts::default(),
        })
    }

    /// A model with one shared rate for every feature of `space`.
    pub fn uniform(space: &FeatureSpace, lambda_value: f64, lambda_features: f64) -> Result<Self> {
        let mut m = RateModel::new(1)?;
        for id in space.ids() {
            m = m.with_value_rate(id.clone(), lambda_value)?;
        }
        m.with_feature_rate(lambda_features)
    }

    pub fn with_value_rate(mut self, feature: FeatureId, lambda: f64) -> Result<Self> {
        check_rate(lambda)?;
        self.lambda_values.insert(feature, lambda);
        Ok(self)
    }

    pub fn with_feature_rate(mut self, lambda: f64) -> Result<Self> {
        check_rate(lambda)?;
        self.lambda_features = lambda;
        Ok(self)
    }

    /// Replaces every per-feature rate by their mean.
    pub fn pooled(mut self) -> Self {
        if !self.lambda_values.is_empty() {
            let mean = self.lambda_values.values().sum::<f64>() / self.lambda_values.len() as f64;
            self.lambda_values.values_mut().for_each(|l| *l = mean);
        }
        self
    }

    pub fn lambda_value(&self, feature: &FeatureId) -> Option<f64> {
        self.lambda_values.get(feature).copied()
    }

    pub fn lambda_values(&self) -> &BTreeMap<FeatureId, f64> {
        &self.lambda_values
    }

    pub fn lambda_features(&self) -> f64 {
        self.lambda_features
    }

    pub fn batch_size(&self) -> u64 {
        self.batch_size
    }

    pub fn observations(&self) -> u64 {
        self.observations
    }

    /// Problems consumed since the last re-estimation.
    pub fn pending_problems(&self) -> u64 {
        self.pending.problems
    }
}

fn check_rate(lambda: f64) -> Result<()> {
    if lambda.is_finite() && lambda >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "rate must be >= 0, got {lambda}"
        )))
    }
}

/// Per-problem novelty counts for the cases `new` adds on top of `old`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Novelty {
    /// New values per feature introduced by this problem.
    pub values: BTreeMap<FeatureId, u64>,
    /// Features first seen with this problem.
    pub features: u64,
}

/// Walks the problems `new` adds to `old` in order and counts, for each, the
/// values absent from the range known just before it and the features first
/// seen with it. The known range starts from `old`'s feature space.
pub fn novelty_counts(old: &Memory, new: &Memory) -> Result<Vec<Novelty>> {
    check_prefix(old, new)?;
    let mut known: BTreeMap<FeatureId, BTreeSet<String>> = old
        .space()
        .features()
        .map(|f| (f.id().clone(), f.values().iter().cloned().collect()))
        .collect();
    let mut out = Vec::with_capacity(new.len() - old.len());
    for case in &new.cases()[old.len()..] {
        let mut values = BTreeMap::new();
        let mut features = 0;
        for (id, label) in case.problem().coordinates() {
            match known.get_mut(id) {
                Some(range) => {
                    let fresh = range.insert(label.clone()) as u64;
                    values.insert(id.clone(), fresh);
                }
                None => {
                    features += 1;
                    known.insert(id.clone(), BTreeSet::from([label.clone()]));
                    values.insert(id.clone(), 0);
                }
            }
        }
        out.push(Novelty { values, features });
    }
    Ok(out)
}

fn check_prefix(old: &Memory, new: &Memory) -> Result<()> {
    if new.len() < old.len() {
        return Err(Error::NotPrefix(format!(
            "new memory has {} cases, old has {}",
            new.len(),
            old.len()
        )));
    }
    for (i, (a, b)) in old.cases().iter().zip(new.cases()).enumerate() {
        let same_coords = a
            .problem()
            .coordinates()
            .iter()
            .all(|(id, v)| b.problem().get(id) == Some(v.as_str()));
        if !same_coords || a.action() != b.action() || a.result() != b.result() {
            return Err(Error::NotPrefix(format!("case {i} differs")));
        }
    }
    if new.len() == old.len() {
        return Err(Error::EmptyDelta);
    }
    Ok(())
}

/// Folds the problems `new` adds to `old` into the model. Rates are
/// re-estimated as sample means over all problems gathered since the last
/// re-estimation, and only when the observation count crosses a multiple of
/// the batch size; otherwise the previous rates carry over.
pub fn estimate_rates(model: &RateModel, old: &Memory, new: &Memory) -> Result<RateModel> {
    let counts = novelty_counts(old, new)?;
    let mut next = model.clone();
    let before = next.observations / next.batch_size;
    for n in &counts {
        next.pending.problems += 1;
        for (id, k) in &n.values {
            *next.pending.value_arrivals.entry(id.clone()).or_default() += k;
        }
        next.pending.feature_arrivals += n.features;
    }
    next.observations += counts.len() as u64;
    if next.observations / next.batch_size > before {
        let size = next.pending.problems as f64;
        for (id, total) in &next.pending.value_arrivals {
            next.lambda_values.insert(id.clone(), *total as f64 / size);
        }
        next.lambda_features = next.pending.feature_arrivals as f64 / size;
        next.pending = PendingCounts::default();
    }
    Ok(next)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiscountMode {
    /// `kappa^n` for a wait of `n` intervals.
    #[default]
    Compound,
    /// A single `kappa` regardless of the horizon.
    SingleFactor,
}

/// A hypothetical future: the space grows by `new_values` and `new_features`
/// by time `wait_until`, and the agent then faces `anticipated_problem`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaitScenario {
    pub now: u64,
    pub wait_until: u64,
    #[serde(default)]
    pub new_values: Vec<NewValue>,
    #[serde(default)]
    pub new_features: Vec<Feature>,
    pub anticipated_problem: Problem,
    pub discount: f64,
    #[serde(default)]
    pub mode: DiscountMode,
    /// Evaluate this action on both sides instead of each side's best action.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub action: Option<ActionId>,
}

impl WaitScenario {
    pub fn horizon(&self) -> Result<u64> {
        self.wait_until.checked_sub(self.now).ok_or_else(|| {
            Error::InvalidParameter(format!(
                "wait_until {} precedes now {}",
                self.wait_until, self.now
            ))
        })
    }

    /// Anticipated new-value counts per feature.
    pub fn anticipated_values(&self) -> BTreeMap<FeatureId, u64> {
        let mut counts = BTreeMap::new();
        for v in &self.new_values {
            *counts.entry(v.feature.clone()).or_insert(0) += 1;
        }
        counts
    }

    pub fn anticipated_features(&self) -> u64 {
        self.new_features.len() as u64
    }

    fn discount_factor(&self, kappa: f64, n: u64) -> f64 {
        match self.mode {
            DiscountMode::Compound => kappa.powi(n as i32),
            DiscountMode::SingleFactor => kappa,
        }
    }
}

/// Probability that exactly the anticipated arrivals happen within the
/// horizon: the product of Poisson probabilities over the features that gain
/// values, times that of the anticipated number of new features.
pub fn event_probability(model: &RateModel, scenario: &WaitScenario) -> Result<f64> {
    let n = scenario.horizon()?;
    if n == 0 {
        return Err(Error::InvalidParameter(
            "wait horizon must be at least one interval".into(),
        ));
    }
    let mut p = 1.0;
    for (id, k) in scenario.anticipated_values() {
        let lambda = model
            .lambda_value(&id)
            .ok_or_else(|| Error::UnknownRate(id.clone()))?;
        p *= poisson_pmf(k, n as f64 * lambda)?;
    }
    p *= poisson_pmf(
        scenario.anticipated_features(),
        n as f64 * model.lambda_features(),
    )?;
    Ok(p)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Recommendation {
    ActNow,
    Wait,
    Indifferent,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LotteryValuation {
    pub act_now_value: f64,
    pub wait_value: f64,
    pub event_probability: f64,
    /// Discount at which both lotteries are worth the same.
    pub threshold_discount: Option<f64>,
    pub recommendation: Recommendation,
    pub horizon: u64,
    /// Exact utility of acting now and of the anticipated decision.
    pub act_now_utility: Rational,
    pub future_utility: Rational,
    pub now_report: DecisionReport,
    pub future_report: DecisionReport,
    pub hypothetical_space: FeatureSpace,
}

impl LotteryValuation {
    pub fn future_similarity(&self) -> &SimilarityTable {
        &self.future_report.similarity
    }
}

fn value_of(report: &DecisionReport, action: Option<&ActionId>) -> Result<Rational> {
    match action {
        Some(a) => report
            .score(a)
            .ok_or_else(|| Error::UnknownAction(a.clone())),
        None => Ok(report.score(&report.chosen).unwrap_or_else(Rational::zero)),
    }
}

/// Compares acting on `query_now` against waiting for the scenario's
/// anticipated problem, with the event probability taken from `model`.
pub fn evaluate_wait(
    memory: &Memory,
    query_now: &Problem,
    scenario: &WaitScenario,
    model: &RateModel,
    u: &UtilityFunction,
) -> Result<LotteryValuation> {
    let probability = event_probability(model, scenario)?;
    evaluate_wait_with_probability(memory, query_now, scenario, u, probability)
}

/// [`evaluate_wait`] with the event probability supplied by the caller.
/// The anticipated outcome that does not occur is valued at 0.
pub fn evaluate_wait_with_probability(
    memory: &Memory,
    query_now: &Problem,
    scenario: &WaitScenario,
    u: &UtilityFunction,
    probability: f64,
) -> Result<LotteryValuation> {
    if !(0.0..=1.0).contains(&probability) {
        return Err(Error::InvalidParameter(format!(
            "event probability must lie in [0, 1], got {probability}"
        )));
    }
    if !scenario.discount.is_finite() || scenario.discount <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "discount must be positive, got {}",
            scenario.discount
        )));
    }
    let n = scenario.horizon()?;
    let action = scenario.action.as_ref();

    let now_report = decide(memory, query_now, u)?;
    let act_now_utility = value_of(&now_report, action)?;

    let hypothetical_space =
        extend_space(memory.space(), &scenario.new_features, &scenario.new_values)?;
    if diameter(&hypothetical_space) == 0 {
        return Err(Error::DegenerateSpace);
    }
    let hypothetical = memory.with_space(hypothetical_space.clone())?;
    hypothetical_space.validate_complete(&scenario.anticipated_problem)?;
    let future_report = decide(&hypothetical, &scenario.anticipated_problem, u)?;
    let future_utility = value_of(&future_report, action)?;

    let act_now_value = to_f64(&act_now_utility);
    let future_value = to_f64(&future_utility);
    let wait_value = probability * scenario.discount_factor(scenario.discount, n) * future_value;

    let threshold_discount = if future_value > 0.0 && probability > 0.0 && act_now_value > 0.0 {
        let factor = act_now_value / (probability * future_value);
        match scenario.mode {
            DiscountMode::SingleFactor => Some(factor),
            DiscountMode::Compound if n > 0 => Some(factor.powf(1.0 / n as f64)),
            DiscountMode::Compound => None,
        }
    } else {
        None
    };

    let recommendation = if wait_value > act_now_value {
        Recommendation::Wait
    } else if wait_value < act_now_value {
        Recommendation::ActNow
    } else {
        Recommendation::Indifferent
    };

    Ok(LotteryValuation {
        act_now_value,
        wait_value,
        event_probability: probability,
        threshold_discount,
        recommendation,
        horizon: n,
        act_now_utility,
        future_utility,
        now_report,
        future_report,
        hypothetical_space,
    })
}
