use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Type of a single feature.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum FeatureKind {
    Continuous,
    /// Levels in interning order; a level's position is its index.
    Categorical { levels: Vec<String> },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Feature {
    pub name: String,
    #[serde(flatten)]
    pub kind: FeatureKind,
}

impl Feature {
    pub fn continuous(name: impl Into<String>) -> Self {
        Feature {
            name: name.into(),
            kind: FeatureKind::Continuous,
        }
    }

    pub fn categorical<S: Into<String>>(
        name: impl Into<String>,
        levels: impl IntoIterator<Item = S>,
    ) -> Self {
        Feature {
            name: name.into(),
            kind: FeatureKind::Categorical {
                levels: levels.into_iter().map(Into::into).collect(),
            },
        }
    }

    pub fn is_continuous(&self) -> bool {
        matches!(self.kind, FeatureKind::Continuous)
    }

    pub fn n_levels(&self) -> Option<usize> {
        match &self.kind {
            FeatureKind::Continuous => None,
            FeatureKind::Categorical { levels } => Some(levels.len()),
        }
    }
}

/// Ordered list of features. Names are unique, categorical level sets are
/// non-empty and there is at least one feature.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct FeatureSchema {
    features: Vec<Feature>,
}

impl FeatureSchema {
    pub fn new(features: Vec<Feature>) -> Result<Self> {
        if features.is_empty() {
            return Err(Error::InvalidSchema("schema has no features".into()));
        }
        let mut seen = HashSet::new();
        for f in &features {
            if !seen.insert(f.name.as_str()) {
                return Err(Error::InvalidSchema(format!(
                    "duplicate feature name {:?}",
                    f.name
                )));
            }
            if let FeatureKind::Categorical { levels } = &f.kind {
                if levels.is_empty() {
                    return Err(Error::InvalidSchema(format!(
                        "categorical feature {:?} has no levels",
                        f.name
                    )));
                }
                let mut lv = HashSet::new();
                if !levels.iter().all(|l| lv.insert(l)) {
                    return Err(Error::InvalidSchema(format!(
                        "categorical feature {:?} has duplicate levels",
                        f.name
                    )));
                }
            }
        }
        Ok(FeatureSchema { features })
    }

    /// `p` continuous features named `x1..xp`.
    pub fn continuous(p: usize) -> Result<Self> {
        Self::new((1..=p).map(|i| Feature::continuous(format!("x{i}"))).collect())
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn features(&self) -> &[Feature] {
        &self.features
    }

    pub fn feature(&self, p: usize) -> &Feature {
        &self.features[p]
    }

    pub fn all_continuous(&self) -> bool {
        self.features.iter().all(Feature::is_continuous)
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.features.iter().position(|f| f.name == name)
    }
}

impl<'de> Deserialize<'de> for FeatureSchema {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let features = Vec::<Feature>::deserialize(d)?;
        FeatureSchema::new(features).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_duplicate_names() {
        let err = FeatureSchema::new(vec![Feature::continuous("a"), Feature::continuous("a")]);
        assert!(matches!(err, Err(Error::InvalidSchema(_))));
    }

    #[test]
    fn rejects_empty_level_set() {
        let err = FeatureSchema::new(vec![Feature::categorical("c", Vec::<String>::new())]);
        assert!(err.is_err());
        assert!(FeatureSchema::new(vec![]).is_err());
    }

    #[test]
    fn json_shape() {
        let s = FeatureSchema::new(vec![
            Feature::continuous("x"),
            Feature::categorical("c", ["A", "B"]),
        ])
        .unwrap();
        let js = serde_json::to_string(&s).unwrap();
        assert_eq!(
            js,
            r#"[{"name":"x","kind":"continuous"},{"name":"c","kind":"categorical","levels":["A","B"]}]"#
        );
        let back: FeatureSchema = serde_json::from_str(&js).unwrap();
        assert_eq!(back, s);
    }
}
