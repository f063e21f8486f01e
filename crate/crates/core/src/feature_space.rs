//! Discrete, linearly ordered feature ranges and the lattice they span.
//!
//! A [`FeatureSpace`] is an immutable value. The evolution operations
//! (`extend_with_value`, `extend_with_feature`) return a new space and leave
//! the receiver untouched; unchanged features are shared between versions.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FeatureId(String);

impl FeatureId {
    pub fn new(id: impl Into<String>) -> Self {
        FeatureId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for FeatureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for FeatureId {
    fn from(s: &str) -> Self {
        FeatureId(s.to_string())
    }
}

/// One axis of the problem lattice: an ordered, finite set of value labels.
///
/// Labels are opaque; their order in `values` is the linear order used for
/// distances. `default_rank` is the value assigned to problems recorded before
/// this feature was known.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(
    try_from = "crate::case_memory::FeatureDoc",
    into = "crate::case_memory::FeatureDoc"
)]
pub struct Feature {
    id: FeatureId,
    name: String,
    values: Vec<String>,
    default_rank: usize,
}

impl Feature {
    pub fn new(
        id: impl Into<FeatureId>,
        name: impl Into<String>,
        values: Vec<String>,
        default_rank: usize,
    ) -> Result<Self> {
        let id = id.into();
        if id.as_str().is_empty() {
            return Err(Error::InvalidFeature {
                feature: id,
                reason: "feature id must be non-empty".into(),
            });
        }
        if values.is_empty() {
            return Err(Error::InvalidFeature {
                feature: id,
                reason: "value range must be non-empty".into(),
            });
        }
        let mut seen = BTreeSet::new();
        for v in &values {
            if !seen.insert(v.as_str()) {
                return Err(Error::DuplicateValue {
                    feature: id,
                    label: v.clone(),
                });
            }
        }
        if default_rank >= values.len() {
            return Err(Error::InvalidFeature {
                feature: id,
                reason: format!("default_rank {default_rank} is outside 0..{}", values.len()),
            });
        }
        Ok(Feature {
            id,
            name: name.into(),
            values,
            default_rank,
        })
    }

    /// Convenience constructor with `name = id` and `default_rank = 0`.
    pub fn simple<S: AsRef<str>>(id: &str, values: &[S]) -> Result<Self> {
        Feature::new(
            id,
            id,
            values.iter().map(|v| v.as_ref().to_string()).collect(),
            0,
        )
    }

    pub fn id(&self) -> &FeatureId {
        &self.id
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn values(&self) -> &[String] {
        &self.values
    }

    pub fn default_rank(&self) -> usize {
        self.default_rank
    }

    pub fn default_value(&self) -> &str {
        &self.values[self.default_rank]
    }

    /// Number of values in the range.
    pub fn cardinality(&self) -> usize {
        self.values.len()
    }

    pub fn rank(&self, label: &str) -> Option<usize> {
        self.values.iter().position(|v| v == label)
    }

    pub fn contains(&self, label: &str) -> bool {
        self.rank(label).is_some()
    }
}

/// A new value for an existing feature together with its place in the order.
/// `position: None` appends after the current maximum.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NewValue {
    pub feature: FeatureId,
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub position: Option<usize>,
}

impl NewValue {
    pub fn appended(feature: impl Into<FeatureId>, label: impl Into<String>) -> Self {
        NewValue {
            feature: feature.into(),
            label: label.into(),
            position: None,
        }
    }
}

/// The product of feature ranges.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FeatureSpace {
    features: Vec<Arc<Feature>>,
}

impl FeatureSpace {
    pub fn new(features: Vec<Feature>) -> Result<Self> {
        let mut ids = BTreeSet::new();
        for f in &features {
            if !ids.insert(f.id.clone()) {
                return Err(Error::DuplicateFeature(f.id.clone()));
            }
        }
        Ok(FeatureSpace {
            features: features.into_iter().map(Arc::new).collect(),
        })
    }

    pub fn features(&self) -> impl ExactSizeIterator<Item = &Feature> + '_ {
        self.features.iter().map(|f| f.as_ref())
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn feature(&self, id: &FeatureId) -> Option<&Feature> {
        self.features
            .iter()
            .find(|f| &f.id == id)
            .map(|f| f.as_ref())
    }

    fn require(&self, id: &FeatureId) -> Result<&Feature> {
        self.feature(id)
            .ok_or_else(|| Error::UnknownFeature(id.clone()))
    }

    pub fn ids(&self) -> impl Iterator<Item = &FeatureId> + '_ {
        self.features.iter().map(|f| &f.id)
    }

    /// Number of lattice points, saturating at `u128::MAX`.
    pub fn lattice_size(&self) -> u128 {
        self.features
            .iter()
            .try_fold(1u128, |acc, f| acc.checked_mul(f.cardinality() as u128))
            .unwrap_or(u128::MAX)
    }

    pub fn rank_of(&self, feature: &FeatureId, label: &str) -> Result<usize> {
        let f = self.require(feature)?;
        f.rank(label).ok_or_else(|| Error::UnknownValue {
            feature: feature.clone(),
            label: label.to_string(),
        })
    }

    /// Returns a space in which `feature` also contains `label` at `position`.
    pub fn extend_with_value(
        &self,
        feature: &FeatureId,
        label: &str,
        position: usize,
    ) -> Result<FeatureSpace> {
        let idx = self
            .features
            .iter()
            .position(|f| &f.id == feature)
            .ok_or_else(|| Error::UnknownFeature(feature.clone()))?;
        let old = &self.features[idx];
        if old.contains(label) {
            return Err(Error::DuplicateValue {
                feature: feature.clone(),
                label: label.to_string(),
            });
        }
        if position > old.values.len() {
            return Err(Error::InvalidPosition {
                feature: feature.clone(),
                position,
                len: old.values.len(),
            });
        }
        let mut values = old.values.clone();
        values.insert(position, label.to_string());
        // Keep the default pointing at the same label.
        let default_rank = if position <= old.default_rank {
            old.default_rank + 1
        } else {
            old.default_rank
        };
        let mut features = self.features.clone();
        features[idx] = Arc::new(Feature {
            id: old.id.clone(),
            name: old.name.clone(),
            values,
            default_rank,
        });
        Ok(FeatureSpace { features })
    }

    pub fn apply_new_value(&self, new: &NewValue) -> Result<FeatureSpace> {
        let len = self.require(&new.feature)?.cardinality();
        self.extend_with_value(&new.feature, &new.label, new.position.unwrap_or(len))
    }

    pub fn extend_with_feature(&self, feature: Feature) -> Result<FeatureSpace> {
        if self.feature(&feature.id).is_some() {
            return Err(Error::DuplicateFeature(feature.id));
        }
        let mut features = self.features.clone();
        features.push(Arc::new(feature));
        Ok(FeatureSpace { features })
    }

    /// Checks that every coordinate of `problem` names a known feature and a
    /// value inside that feature's range. Missing coordinates are allowed.
    pub fn validate_partial(&self, problem: &Problem) -> Result<()> {
        for (id, label) in &problem.coordinates {
            self.rank_of(id, label)?;
        }
        Ok(())
    }

    /// Like [`validate_partial`](Self::validate_partial) but also requires a
    /// coordinate for every feature.
    pub fn validate_complete(&self, problem: &Problem) -> Result<()> {
        self.validate_partial(problem)?;
        for f in self.features() {
            if !problem.coordinates.contains_key(&f.id) {
                return Err(Error::IncompleteProblem(f.id.clone()));
            }
        }
        Ok(())
    }

    /// Fills every missing coordinate with the feature's default value.
    pub fn complete_problem(&self, problem: &Problem) -> Result<Problem> {
        self.validate_partial(problem)?;
        let mut coordinates = problem.coordinates.clone();
        for f in self.features() {
            coordinates
                .entry(f.id.clone())
                .or_insert_with(|| f.default_value().to_string());
        }
        Ok(Problem { coordinates })
    }

    /// Rank vector of a complete problem, in feature order.
    pub fn ranks(&self, problem: &Problem) -> Result<Vec<usize>> {
        self.features
            .iter()
            .map(|f| {
                let label = problem
                    .coordinates
                    .get(&f.id)
                    .ok_or_else(|| Error::IncompleteProblem(f.id.clone()))?;
                f.rank(label).ok_or_else(|| Error::UnknownValue {
                    feature: f.id.clone(),
                    label: label.clone(),
                })
            })
            .collect()
    }

    /// Inverse of [`ranks`](Self::ranks); `ranks` must be in bounds.
    pub fn problem_at(&self, ranks: &[usize]) -> Problem {
        Problem {
            coordinates: self
                .features
                .iter()
                .zip(ranks)
                .map(|(f, &r)| (f.id.clone(), f.values[r].clone()))
                .collect(),
        }
    }

    /// The space spanned by the selected features, in this space's order.
    pub fn subspace(&self, selector: &SubspaceSelector) -> Result<FeatureSpace> {
        for id in &selector.feature_ids {
            self.require(id)?;
        }
        Ok(FeatureSpace {
            features: self
                .features
                .iter()
                .filter(|f| selector.feature_ids.contains(&f.id))
                .cloned()
                .collect(),
        })
    }

    /// Cardinalities of every feature, in order.
    pub fn cardinalities(&self) -> Vec<usize> {
        self.features.iter().map(|f| f.cardinality()).collect()
    }
}

/// A point of the lattice: one value label per feature.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Problem {
    coordinates: BTreeMap<FeatureId, String>,
}

impl Problem {
    pub fn new(coordinates: BTreeMap<FeatureId, String>) -> Self {
        Problem { coordinates }
    }

    pub fn from_pairs<K: AsRef<str>, V: AsRef<str>>(pairs: &[(K, V)]) -> Self {
        Problem {
            coordinates: pairs
                .iter()
                .map(|(k, v)| (FeatureId::new(k.as_ref()), v.as_ref().to_string()))
                .collect(),
        }
    }

    pub fn coordinates(&self) -> &BTreeMap<FeatureId, String> {
        &self.coordinates
    }

    pub fn get(&self, feature: &FeatureId) -> Option<&str> {
        self.coordinates.get(feature).map(String::as_str)
    }

    pub fn with(mut self, feature: impl Into<FeatureId>, label: impl Into<String>) -> Self {
        self.coordinates.insert(feature.into(), label.into());
        self
    }

    /// Renders the problem as a tuple in the feature order of `space`,
    /// falling back to key order for coordinates the space does not know.
    pub fn display_in(&self, space: &FeatureSpace) -> String {
        let mut parts: Vec<&str> = space
            .ids()
            .filter_map(|id| self.coordinates.get(id).map(String::as_str))
            .collect();
        for (id, v) in &self.coordinates {
            if space.feature(id).is_none() {
                parts.push(v);
            }
        }
        format!("({})", parts.join(", "))
    }
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .coordinates
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect();
        write!(f, "({})", parts.join(", "))
    }
}

/// A non-empty set of features defining an aspect of comparison.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubspaceSelector {
    feature_ids: BTreeSet<FeatureId>,
}

impl SubspaceSelector {
    pub fn new<I>(space: &FeatureSpace, ids: I) -> Result<Self>
    where
        I: IntoIterator,
        I::Item: Into<FeatureId>,
    {
        let feature_ids: BTreeSet<FeatureId> = ids.into_iter().map(Into::into).collect();
        if feature_ids.is_empty() {
            return Err(Error::EmptySelector);
        }
        for id in &feature_ids {
            space.require(id)?;
        }
        Ok(SubspaceSelector { feature_ids })
    }

    pub fn all(space: &FeatureSpace) -> Result<Self> {
        SubspaceSelector::new(space, space.ids().cloned())
    }

    pub fn feature_ids(&self) -> &BTreeSet<FeatureId> {
        &self.feature_ids
    }
}

/// Restricts `problem` to the selected coordinates.
pub fn project(problem: &Problem, selector: &SubspaceSelector) -> Result<Problem> {
    let mut coordinates = BTreeMap::new();
    for id in &selector.feature_ids {
        let v = problem
            .coordinates
            .get(id)
            .ok_or_else(|| Error::UnknownFeature(id.clone()))?;
        coordinates.insert(id.clone(), v.clone());
    }
    Ok(Problem { coordinates })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example_space() -> FeatureSpace {
        FeatureSpace::new(vec![
            Feature::simple("f1", &["5", "5.5", "7"]).unwrap(),
            Feature::simple("f2", &["16", "32"]).unwrap(),
        ])
        .unwrap()
    }

    fn fid(s: &str) -> FeatureId {
        FeatureId::new(s)
    }

    #[test]
    fn rank_follows_declared_order() {
        let space = example_space();
        assert_eq!(space.rank_of(&fid("f1"), "7").unwrap(), 2);
        assert_eq!(space.rank_of(&fid("f2"), "16").unwrap(), 0);
        assert_eq!(space.rank_of(&fid("f1"), "5.5").unwrap(), 1);
    }

    #[test]
    fn rank_errors() {
        let space = example_space();
        assert_eq!(
            space.rank_of(&fid("f9"), "7"),
            Err(Error::UnknownFeature(fid("f9")))
        );
        assert!(matches!(
            space.rank_of(&fid("f1"), "6"),
            Err(Error::UnknownValue { .. })
        ));
    }

    #[test]
    fn feature_invariants() {
        assert!(Feature::simple::<&str>("f", &[]).is_err());
        assert!(matches!(
            Feature::simple("f", &["a", "a"]),
            Err(Error::DuplicateValue { .. })
        ));
        assert!(Feature::new("f", "f", vec!["a".into()], 1).is_err());
        assert!(Feature::simple("", &["a"]).is_err());
    }

    #[test]
    fn extend_with_value_appends_and_preserves_original() {
        let space = FeatureSpace::new(vec![
            Feature::simple("f1", &["5", "5.5"]).unwrap(),
            Feature::simple("f2", &["16", "32"]).unwrap(),
        ])
        .unwrap();
        let grown = space.extend_with_value(&fid("f1"), "7", 2).unwrap();
        assert_eq!(
            grown.feature(&fid("f1")).unwrap().values(),
            ["5", "5.5", "7"]
        );
        assert_eq!(space.feature(&fid("f1")).unwrap().values(), ["5", "5.5"]);
        assert_eq!(grown.feature(&fid("f2")), space.feature(&fid("f2")));
    }

    #[test]
    fn extend_with_value_errors() {
        let space = example_space();
        assert!(matches!(
            space.extend_with_value(&fid("f2"), "64", 3),
            Err(Error::InvalidPosition { .. })
        ));
        assert!(matches!(
            space.extend_with_value(&fid("f2"), "32", 0),
            Err(Error::DuplicateValue { .. })
        ));
    }

    #[test]
    fn mid_range_insert_keeps_default_label() {
        let space = FeatureSpace::new(vec![Feature::new(
            "f",
            "f",
            vec!["a".into(), "c".into()],
            1,
        )
        .unwrap()])
        .unwrap();
        let grown = space.extend_with_value(&fid("f"), "b", 1).unwrap();
        let f = grown.feature(&fid("f")).unwrap();
        assert_eq!(f.values(), ["a", "b", "c"]);
        assert_eq!(f.default_value(), "c");
    }

    #[test]
    fn extend_with_feature_and_complete() {
        let space = example_space();
        let f3 = Feature::simple("f3", &["none", "9"]).unwrap();
        let grown = space.extend_with_feature(f3.clone()).unwrap();
        assert_eq!(grown.len(), 3);
        assert_eq!(space.len(), 2);
        assert_eq!(
            grown.extend_with_feature(f3),
            Err(Error::DuplicateFeature(fid("f3")))
        );

        let q1 = Problem::from_pairs(&[("f1", "5"), ("f2", "16")]);
        let done = grown.complete_problem(&q1).unwrap();
        assert_eq!(done.get(&fid("f3")), Some("none"));
        assert_eq!(grown.complete_problem(&done).unwrap(), done);
        assert!(grown.validate_complete(&done).is_ok());
        assert_eq!(
            grown.validate_complete(&q1),
            Err(Error::IncompleteProblem(fid("f3")))
        );
    }

    #[test]
    fn projection() {
        let space = example_space()
            .extend_with_feature(Feature::simple("f3", &["none", "9"]).unwrap())
            .unwrap();
        let p = Problem::from_pairs(&[("f1", "7"), ("f2", "32"), ("f3", "9")]);
        let sel = SubspaceSelector::new(&space, ["f1", "f2"]).unwrap();
        assert_eq!(
            project(&p, &sel).unwrap(),
            Problem::from_pairs(&[("f1", "7"), ("f2", "32")])
        );
        let all = SubspaceSelector::all(&space).unwrap();
        assert_eq!(project(&p, &all).unwrap(), p);
        assert!(SubspaceSelector::new(&space, ["f4"]).is_err());
        assert_eq!(
            SubspaceSelector::new(&space, Vec::<&str>::new()),
            Err(Error::EmptySelector)
        );
    }

    #[test]
    fn nested_projection_composes() {
        let space = example_space()
            .extend_with_feature(Feature::simple("f3", &["none", "9"]).unwrap())
            .unwrap();
        let p = Problem::from_pairs(&[("f1", "7"), ("f2", "32"), ("f3", "9")]);
        let outer = SubspaceSelector::new(&space, ["f1", "f2"]).unwrap();
        let inner = SubspaceSelector::new(&space, ["f2"]).unwrap();
        let twice = project(&project(&p, &outer).unwrap(), &inner).unwrap();
        assert_eq!(twice, project(&p, &inner).unwrap());
    }
}
