//! Named residual records with pass/fail verdicts.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::tensor::Tensor;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub residual: f64,
    pub threshold: f64,
    pub pass: bool,
}

/// Ordered list of checks plus informational values that do not gate the
/// verdict.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub checks: Vec<Check>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub info: BTreeMap<String, f64>,
}

impl Report {
    pub fn new() -> Self {
        Report::default()
    }

    /// Records `residual ≤ threshold`. NaN residuals fail.
    pub fn check(&mut self, name: impl Into<String>, residual: f64, threshold: f64) -> bool {
        let pass = residual <= threshold;
        self.checks.push(Check { name: name.into(), residual, threshold, pass });
        pass
    }

    /// Records a check whose outcome is decided by the caller.
    pub fn verdict(&mut self, name: impl Into<String>, pass: bool) {
        let residual = if pass { 0.0 } else { 1.0 };
        self.checks.push(Check { name: name.into(), residual, threshold: 0.5, pass });
    }

    pub fn note(&mut self, name: impl Into<String>, value: f64) {
        self.info.insert(name.into(), value);
    }

    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn residual(&self, name: &str) -> Option<f64> {
        self.get(name).map(|c| c.residual)
    }

    pub fn max_residual(&self) -> f64 {
        self.checks.iter().map(|c| c.residual).fold(0.0, f64::max)
    }

    /// Appends the records of `other`, prefixing their names.
    pub fn extend_prefixed(&mut self, prefix: &str, other: Report) {
        for mut c in other.checks {
            c.name = format!("{prefix}{}", c.name);
            self.checks.push(c);
        }
        for (k, v) in other.info {
            self.info.insert(format!("{prefix}{k}"), v);
        }
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

/// `|a − b| / max(|a|, |b|)`, zero when both vanish.
pub fn rel_residual(a: &Tensor, b: &Tensor) -> f64 {
    a.rel_diff(b)
}

/// `|a − b| / scale`, zero for a vanishing scale.
pub fn scaled_residual(a: &Tensor, b: &Tensor, scale: f64) -> f64 {
    let d = (a - b).norm();
    if scale > 0.0 {
        d / scale
    } else if d == 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}
