use super::ModelError;
use std::collections::BTreeMap;

/// Named model parameters in normalized units (`m0 = l0 = g = 1`).
#[derive(Clone, Debug, PartialEq, Default)]
pub struct ParamSet {
    model: String,
    values: BTreeMap<String, f64>,
}

impl ParamSet {
    pub fn new(model: &str, entries: &[(&str, f64)]) -> Self {
        ParamSet {
            model: model.to_string(),
            values: entries.iter().map(|&(k, v)| (k.to_string(), v)).collect(),
        }
    }

    /// Value of a known parameter; panics on an unknown name, which is a
    /// programming error inside the model builders.
    pub fn get(&self, name: &str) -> f64 {
        match self.values.get(name) {
            Some(&v) => v,
            None => panic!("parameter `{name}` missing from {}", self.model),
        }
    }

    /// Overrides an existing parameter.
    pub fn set(&mut self, name: &str, value: f64) -> Result<(), ModelError> {
        match self.values.get_mut(name) {
            Some(slot) => {
                if !value.is_finite() {
                    return Err(ModelError::InvalidParameter {
                        name: name.into(),
                        value,
                        reason: "not finite".into(),
                    });
                }
                *slot = value;
                Ok(())
            }
            None => Err(ModelError::UnknownParameter {
                model: self.model.clone(),
                name: name.into(),
            }),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.values.iter().map(|(k, &v)| (k.as_str(), v))
    }

    /// Rejects negative masses, inertias, stiffnesses, dampings and
    /// non-positive lengths.
    pub fn validate(&self) -> Result<(), ModelError> {
        for (name, &value) in &self.values {
            let nonneg =
                name.starts_with("m_") || name.starts_with("j_") || name.starts_with("k") || name.starts_with("d");
            let positive = name.starts_with("l");
            let reason = if nonneg && value < 0.0 {
                Some("must be non-negative")
            } else if positive && value <= 0.0 {
                Some("must be positive")
            } else {
                None
            };
            if let Some(reason) = reason {
                return Err(ModelError::InvalidParameter {
                    name: name.clone(),
                    value,
                    reason: reason.into(),
                });
            }
        }
        Ok(())
    }
}
