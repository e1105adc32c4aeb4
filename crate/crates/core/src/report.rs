//! Solver and checker outputs.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::instance::SignalingScheme;

/// Substitutes/complements verdict for a piecewise-linear instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Classification {
    /// Full revelation is optimal for Alice and no revelation is not.
    Substitutes,
    /// No revelation is optimal for Alice and full revelation is not.
    Complements,
    /// Neither benchmark scheme attains the optimum.
    Neither,
    /// Both benchmark schemes attain the optimum.
    Indifferent,
    Unclassified,
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Classification::Substitutes => "Substitutes",
            Classification::Complements => "Complements",
            Classification::Neither => "Neither",
            Classification::Indifferent => "Indifferent",
            Classification::Unclassified => "Unclassified",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    Exact,
    FptasA,
    FptasEB,
    Oracle,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Method::Exact => "Exact",
            Method::FptasA => "FptasA",
            Method::FptasEB => "FptasEB",
            Method::Oracle => "Oracle",
        };
        f.write_str(s)
    }
}

/// Named numeric solver counters (LP dimensions, grid resolution, epsilon, flags as 0/1).
pub type Diagnostics = BTreeMap<String, f64>;

/// Result of any solver: the committed scheme and its payoffs.
///
/// `sender_objective` is always the exact negation of `bob_utility`.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub scheme: SignalingScheme,
    pub sender_objective: f64,
    pub bob_utility: f64,
    pub total_value_v: f64,
    pub classification: Classification,
    pub method: Method,
    pub diagnostics: Diagnostics,
}

impl SolveReport {
    pub(crate) fn new(
        scheme: SignalingScheme,
        bob_utility: f64,
        total_value_v: f64,
        method: Method,
        diagnostics: Diagnostics,
    ) -> Self {
        SolveReport {
            scheme,
            sender_objective: -bob_utility,
            bob_utility,
            total_value_v,
            classification: Classification::Unclassified,
            method,
            diagnostics,
        }
    }

    /// Alice's expected total utility, `V - u_B`.
    pub fn alice_utility(&self) -> f64 {
        self.total_value_v - self.bob_utility
    }
}

/// Outcome of a sampled or deterministic property check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub passed: bool,
    pub values: BTreeMap<String, f64>,
    /// Human-readable description of each failed condition.
    pub violations: Vec<String>,
    /// A pair of points witnessing a failure, when the check samples pairs.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<(Vec<f64>, Vec<f64>)>,
}

impl CheckReport {
    pub(crate) fn new(name: impl Into<String>) -> Self {
        CheckReport {
            name: name.into(),
            passed: true,
            values: BTreeMap::new(),
            violations: Vec::new(),
            witness: None,
        }
    }

    pub(crate) fn value(&mut self, key: &str, v: f64) {
        self.values.insert(key.to_string(), v);
    }

    pub(crate) fn fail(&mut self, msg: impl Into<String>) {
        self.passed = false;
        self.violations.push(msg.into());
    }
}
