//! Bundled functions under test with their input profiles and metamorphic
//! relation metadata.
//!
//! Sources live in `corpus/*.mtw`; `corpus/manifest.toml` holds one
//! `[[function]]` table per entry. Both are embedded at compile time, and
//! [`load_corpus_dir`] reads the same layout from disk.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dsl::{self, FunctionDef, ParamKind, Value};
use crate::mrengine::MrKind;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("corpus entry `{entry}`: {message}")]
    Entry { entry: String, message: String },
    #[error("corpus manifest: {0}")]
    Manifest(String),
    #[error("reading corpus: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SamplingError {
    #[error("invalid profile: {0}")]
    InvalidProfile(String),
    #[error("could not satisfy profile constraints within {0} attempts")]
    Unsatisfiable(usize),
}

/// Domain constraints on generated inputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Constraint {
    /// Every numeric value is > 0.
    StrictlyPositive,
    /// All array parameters have the same length.
    EqualLengths,
}

/// Shape and value domain of a function's inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputProfile {
    pub kinds: Vec<ParamKind>,
    /// Inclusive array length range used for sampling; the lower bound is
    /// also the minimum length any input may have.
    pub length: (usize, usize),
    /// Value range used for sampling.
    pub values: (f64, f64),
    /// Sample integer values only.
    pub integers: bool,
    pub constraints: Vec<Constraint>,
}

const MAX_ATTEMPTS: usize = 1000;

impl InputProfile {
    pub fn new(kinds: Vec<ParamKind>) -> Self {
        InputProfile {
            kinds,
            length: (1, 20),
            values: (-100.0, 100.0),
            integers: false,
            constraints: Vec::new(),
        }
    }

    pub fn arity(&self) -> usize {
        self.kinds.len()
    }

    pub fn has(&self, c: Constraint) -> bool {
        self.constraints.contains(&c)
    }

    pub fn range_width(&self) -> f64 {
        self.values.1 - self.values.0
    }

    pub fn validate(&self) -> Result<(), SamplingError> {
        let bad = |m: &str| Err(SamplingError::InvalidProfile(m.to_string()));
        if !(self.values.0 < self.values.1) || !self.values.0.is_finite() || !self.values.1.is_finite() {
            return bad("value range must be finite and non-degenerate");
        }
        if self.length.0 > self.length.1 {
            return bad("length range is empty");
        }
        if self.integers && self.values.0.ceil() > self.values.1.floor() {
            return bad("value range contains no integer");
        }
        if self.has(Constraint::StrictlyPositive) && self.values.1 <= 0.0 {
            return bad("strictly positive values requested from a non-positive range");
        }
        if self.has(Constraint::StrictlyPositive)
            && self.integers
            && self.values.1.floor() < 1.0
        {
            return bad("strictly positive integers requested from a range below 1");
        }
        Ok(())
    }

    /// Checks arity, kinds and domain constraints of an input.
    pub fn admits(&self, args: &[Value]) -> Result<(), String> {
        if args.len() != self.kinds.len() {
            return Err(format!("expected {} arguments, got {}", self.kinds.len(), args.len()));
        }
        let mut array_len = None;
        for (i, (a, k)) in args.iter().zip(&self.kinds).enumerate() {
            if !a.matches(*k) {
                return Err(format!("argument {i} should be {k}"));
            }
            if !a.is_finite() {
                return Err(format!("argument {i} is not finite"));
            }
            if let Value::Array(xs) = a {
                if xs.len() < self.length.0 {
                    return Err(format!(
                        "argument {i} has length {} below the minimum {}",
                        xs.len(),
                        self.length.0
                    ));
                }
                if self.has(Constraint::EqualLengths) {
                    match array_len {
                        None => array_len = Some(xs.len()),
                        Some(n) if n != xs.len() => return Err("array lengths differ".into()),
                        _ => {}
                    }
                }
            }
            if self.has(Constraint::StrictlyPositive) {
                let ok = match a {
                    Value::Scalar(x) => *x > 0.0,
                    Value::Array(xs) => xs.iter().all(|x| *x > 0.0),
                    Value::Bool(_) => true,
                };
                if !ok {
                    return Err(format!("argument {i} is not strictly positive"));
                }
            }
        }
        Ok(())
    }

    /// Draws one value from the value range, honouring positivity.
    pub fn sample_value<R: Rng>(&self, rng: &mut R) -> Result<f64, SamplingError> {
        for _ in 0..MAX_ATTEMPTS {
            let (lo, hi) = self.values;
            let x = if self.integers {
                rng.random_range(lo.ceil() as i64..=hi.floor() as i64) as f64
            } else {
                rng.random_range(lo..hi)
            };
            if !self.has(Constraint::StrictlyPositive) || x > 0.0 {
                return Ok(x);
            }
        }
        Err(SamplingError::Unsatisfiable(MAX_ATTEMPTS))
    }

    pub fn sample_length<R: Rng>(&self, rng: &mut R) -> usize {
        rng.random_range(self.length.0..=self.length.1)
    }

    /// Draws a full argument list.
    pub fn sample_with<R: Rng>(&self, rng: &mut R) -> Result<Vec<Value>, SamplingError> {
        self.validate()?;
        let shared = self.sample_length(rng);
        let mut args = Vec::with_capacity(self.kinds.len());
        for k in &self.kinds {
            args.push(match k {
                ParamKind::Scalar => Value::Scalar(self.sample_value(rng)?),
                ParamKind::Array => {
                    let n = if self.has(Constraint::EqualLengths) {
                        shared
                    } else {
                        self.sample_length(rng)
                    };
                    Value::Array((0..n).map(|_| self.sample_value(rng)).collect::<Result<_, _>>()?)
                }
            });
        }
        debug_assert!(self.admits(&args).is_ok());
        Ok(args)
    }
}

/// Deterministic input for `seed`.
pub fn sample_input(profile: &InputProfile, seed: u64) -> Result<Vec<Value>, SamplingError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    profile.sample_with(&mut rng)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputKind {
    Scalar,
    Array,
}

/// How outputs of source and follow-up runs are compared.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ComparisonMode {
    Scalar,
    Elementwise,
    Multiset,
}

impl fmt::Display for ComparisonMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ComparisonMode::Scalar => "scalar",
            ComparisonMode::Elementwise => "elementwise",
            ComparisonMode::Multiset => "multiset",
        })
    }
}

#[derive(Debug, Clone)]
pub struct CorpusEntry {
    pub name: String,
    pub description: String,
    pub source: String,
    pub function: FunctionDef,
    pub profile: InputProfile,
    pub output_kind: OutputKind,
    pub applicable_mrs: BTreeSet<MrKind>,
    pub comparison_mode: ComparisonMode,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Manifest {
    function: Vec<ManifestEntry>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ManifestEntry {
    name: String,
    #[serde(default)]
    description: String,
    output: OutputKind,
    comparison: ComparisonMode,
    mrs: Vec<MrKind>,
    #[serde(default = "default_length")]
    length: (usize, usize),
    #[serde(default = "default_values")]
    values: (f64, f64),
    #[serde(default)]
    integers: bool,
    #[serde(default)]
    constraints: Vec<Constraint>,
}

fn default_length() -> (usize, usize) {
    (1, 20)
}

fn default_values() -> (f64, f64) {
    (-100.0, 100.0)
}

macro_rules! embedded_sources {
    ($($name:literal),* $(,)?) => {
        &[$(($name, include_str!(concat!("../../corpus/", $name, ".mtw")))),*]
    };
}

const MANIFEST: &str = include_str!("../../corpus/manifest.toml");

const SOURCES: &[(&str, &str)] = embedded_sources![
    "add_values",
    "average",
    "dot_product",
    "find_max",
    "find_min",
    "find_median",
    "variance",
    "bubble",
    "insertion_sort",
    "manhattan_dist",
    "find_euc_dist",
    "hamming_dist",
    "geometric_mean",
    "harmonicMean",
    "weightedMean",
    "cnt_zeroes",
    "count_k",
    "elementwise_max",
    "sum",
    "product",
    "count_non_zeroes",
    "elementwise_min",
    "find_magnitude",
    "selection_sort",
    "shell_sort",
    "sequential_search",
    "set_min_val",
    "chebyshevDistance",
    "mean_absolute_error",
];

/// Names every bundled corpus must provide.
pub const CORE_FUNCTIONS: [&str; 20] = [
    "add_values",
    "average",
    "dot_product",
    "find_max",
    "find_min",
    "find_median",
    "variance",
    "bubble",
    "insertion_sort",
    "manhattan_dist",
    "find_euc_dist",
    "hamming_dist",
    "geometric_mean",
    "harmonicMean",
    "weightedMean",
    "cnt_zeroes",
    "count_k",
    "elementwise_max",
    "sum",
    "product",
];

fn build(manifest: &str, source_of: impl Fn(&str) -> Option<String>) -> Result<Vec<CorpusEntry>, CorpusError> {
    let m: Manifest = toml::from_str(manifest).map_err(|e| CorpusError::Manifest(e.to_string()))?;
    let mut out: Vec<CorpusEntry> = Vec::with_capacity(m.function.len());
    for e in m.function {
        let err = |message: String| CorpusError::Entry {
            entry: e.name.clone(),
            message,
        };
        if out.iter().any(|o| o.name == e.name) {
            return Err(err("listed twice".into()));
        }
        let source = source_of(&e.name).ok_or_else(|| err("source file missing".into()))?;
        let unit = dsl::parse_named(&format!("{}.mtw", e.name), &source).map_err(|x| err(x.to_string()))?;
        let function = unit
            .function(&e.name)
            .cloned()
            .ok_or_else(|| err("source does not define a function of that name".into()))?;
        let profile = InputProfile {
            kinds: function.param_kinds(),
            length: e.length,
            values: e.values,
            integers: e.integers,
            constraints: e.constraints,
        };
        profile.validate().map_err(|x| err(x.to_string()))?;
        out.push(CorpusEntry {
            name: e.name,
            description: e.description,
            source,
            function,
            profile,
            output_kind: e.output,
            applicable_mrs: e.mrs.into_iter().collect(),
            comparison_mode: e.comparison,
        });
    }
    Ok(out)
}

/// Loads the bundled corpus.
pub fn load_corpus() -> Result<Vec<CorpusEntry>, CorpusError> {
    build(MANIFEST, |name| {
        SOURCES
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, s)| s.to_string())
    })
}

/// Loads a corpus laid out as `manifest.toml` plus `<name>.mtw` files.
pub fn load_corpus_dir(dir: &Path) -> Result<Vec<CorpusEntry>, CorpusError> {
    let manifest = std::fs::read_to_string(dir.join("manifest.toml"))?;
    build(&manifest, |name| std::fs::read_to_string(dir.join(format!("{name}.mtw"))).ok())
}

/// Builds a corpus from in-memory manifest text and `(name, source)` pairs.
pub fn corpus_from_parts(manifest: &str, sources: &[(&str, &str)]) -> Result<Vec<CorpusEntry>, CorpusError> {
    build(manifest, |name| {
        sources.iter().find(|(n, _)| *n == name).map(|(_, s)| s.to_string())
    })
}

pub fn find<'a>(corpus: &'a [CorpusEntry], name: &str) -> Option<&'a CorpusEntry> {
    corpus.iter().find(|e| e.name == name)
}
