//! Session files: a rank, named splittings, assertions and budget overrides.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::bass_serre::{validate, Splitting, SplittingSpec, ValidationReport};
use crate::corecomplex::{default_budget, CoreOptions, DEFAULT_CAP};
use crate::error::{Error, Result};

pub const SCHEMA: &str = "treecore/1";

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Assertions {
    /// Both splittings are JSJ over the same family and the group does not
    /// split over an infinite-index subgroup of an edge stabilizer.
    #[serde(default)]
    pub jsj_fp_hypotheses: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Budgets {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate_radius: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orbit_cap: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub crosscheck_radius: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SessionFile {
    pub schema: String,
    pub rank: usize,
    pub splittings: BTreeMap<String, SplittingSpec>,
    #[serde(default)]
    pub assertions: Assertions,
    #[serde(default)]
    pub budgets: Budgets,
}

impl SessionFile {
    pub fn parse(text: &str) -> Result<Self> {
        // Words are checked against the rank after the structure parses.
        let mut s: SessionFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        if s.schema != SCHEMA {
            return Err(Error::Parse(format!("unsupported schema {:?}, expected {SCHEMA:?}", s.schema)));
        }
        for (label, spec) in s.splittings.iter_mut() {
            if spec.label.is_empty() {
                spec.label = label.clone();
            } else if spec.label != *label {
                return Err(Error::Parse(format!("splitting {label:?} carries label {:?}", spec.label)));
            }
            let words = spec.a_gens.iter().chain(&spec.b_gens).chain(&spec.c_gens).chain(&spec.stable_letter);
            for w in words {
                if w.max_generator() > s.rank {
                    return Err(Error::InvalidGenerator { letter: w.max_generator() as i32, rank: s.rank });
                }
            }
        }
        Ok(s)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("session serializes")
    }

    pub fn spec(&self, label: &str) -> Result<&SplittingSpec> {
        self.splittings.get(label).ok_or_else(|| Error::BadReference(format!("no splitting named {label:?}")))
    }

    pub fn validate_all(&self) -> Vec<ValidationReport> {
        self.splittings.values().map(|s| validate(s, self.rank)).collect()
    }

    pub fn splitting(&self, label: &str) -> Result<Splitting> {
        Splitting::new(self.spec(label)?.clone(), self.rank)
    }

    /// Budgets from the file, with `budget` (from a flag or the environment)
    /// taking precedence over the certificate radius.
    pub fn core_options(&self, budget: Option<usize>) -> CoreOptions {
        CoreOptions {
            budget: budget.or(self.budgets.certificate_radius).unwrap_or_else(|| default_budget(self.rank)),
            cap: self.budgets.orbit_cap.unwrap_or(DEFAULT_CAP),
            jsj_asserted: self.assertions.jsj_fp_hypotheses,
        }
    }

    pub fn crosscheck_radius(&self) -> usize {
        self.budgets.crosscheck_radius.unwrap_or(if self.rank <= 2 { 6 } else { 4 })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TORUS: &str = r#"{
        "schema": "treecore/1",
        "rank": 2,
        "splittings": {
            "Ta": {"kind": "hnn", "a_gens": ["a", "baB"], "c_gens": ["a"], "stable_letter": "b"},
            "Tb": {"kind": "hnn", "a_gens": ["b", "abA"], "c_gens": ["b"], "stable_letter": "a"}
        },
        "assertions": {"jsj_fp_hypotheses": true}
    }"#;

    #[test]
    fn parses_and_fills_labels() {
        let s = SessionFile::parse(TORUS).unwrap();
        assert_eq!(s.spec("Ta").unwrap().label, "Ta");
        assert!(s.core_options(None).jsj_asserted);
        assert_eq!(s.core_options(Some(3)).budget, 3);
        assert!(s.validate_all().iter().all(|r| r.passed()));
        let again = SessionFile::parse(&s.to_json()).unwrap();
        assert_eq!(again, s);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(SessionFile::parse("{"), Err(Error::Parse(_))));
        let unknown = TORUS.replace("\"rank\"", "\"colour\": 1, \"rank\"");
        assert!(matches!(SessionFile::parse(&unknown), Err(Error::Parse(_))));
        let high = TORUS.replace("\"abA\"", "\"abc\"");
        assert!(matches!(SessionFile::parse(&high), Err(Error::InvalidGenerator { .. })));
        let schema = TORUS.replace("treecore/1", "treecore/0");
        assert!(SessionFile::parse(&schema).is_err());
        assert!(matches!(SessionFile::parse(TORUS).unwrap().spec("X"), Err(Error::BadReference(_))));
    }
}
