//! Source test suite generation: uniform random sampling and whole-suite
//! evolutionary search over line, branch or weak-mutation fitness.

mod fitness;
mod io;
mod search;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{self, InputProfile, SamplingError};
use crate::dsl::Value;
use crate::seeds;

pub use fitness::{fitness, normalize, FitnessContext, FitnessKind, FitnessReport, Goal, TestRecord};
pub use io::{read_suite, write_suite, SuiteIoError};
pub use search::{evolve_suite, minimize_suite, SearchConfig, SearchResult};

#[derive(Debug, Error)]
pub enum TestgenError {
    #[error("random suite size must be at least 1")]
    EmptyRequest,
    #[error(transparent)]
    Sampling(#[from] SamplingError),
    #[error("invalid search configuration: {0}")]
    Config(String),
}

/// One input to a function under test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestCase {
    pub args: Vec<Value>,
}

impl TestCase {
    pub fn new(args: Vec<Value>) -> Self {
        TestCase { args }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Random,
    Line,
    Branch,
    WeakMutation,
    Combined,
    File,
}

impl Provenance {
    pub fn name(self) -> &'static str {
        match self {
            Provenance::Random => "random",
            Provenance::Line => "line",
            Provenance::Branch => "branch",
            Provenance::WeakMutation => "weak_mutation",
            Provenance::Combined => "combined",
            Provenance::File => "file",
        }
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Provenance {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [
            Provenance::Random,
            Provenance::Line,
            Provenance::Branch,
            Provenance::WeakMutation,
            Provenance::Combined,
            Provenance::File,
        ]
        .into_iter()
        .find(|p| p.name() == s)
        .ok_or_else(|| format!("unknown suite origin `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestSuite {
    pub function: String,
    pub tests: Vec<TestCase>,
    pub provenance: Provenance,
    pub seed: u64,
    /// Why the suite is empty, when it is.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl TestSuite {
    pub fn new(function: &str, tests: Vec<TestCase>, provenance: Provenance, seed: u64) -> Self {
        TestSuite {
            function: function.to_string(),
            tests,
            provenance,
            seed,
            note: None,
        }
    }

    pub fn len(&self) -> usize {
        self.tests.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tests.is_empty()
    }
}

/// `n` tests drawn from `profile`; test `i` uses sub-seed `i` of `seed`.
pub fn random_suite(function: &str, profile: &InputProfile, n: usize, seed: u64) -> Result<TestSuite, TestgenError> {
    if n == 0 {
        return Err(TestgenError::EmptyRequest);
    }
    let tests = (0..n)
        .map(|i| corpus::sample_input(profile, seeds::child(seed, i as u64)).map(TestCase::new))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(TestSuite::new(function, tests, Provenance::Random, seed))
}

#[cfg(test)]
mod tests;
