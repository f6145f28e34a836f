//! Full study orchestration: source suites, mutants, MT runs, kill matrices
//! and the statistics over them.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{self, CorpusEntry, CorpusError};
use crate::mrengine::{self, MetamorphicRelation, MrKind, Verdict};
use crate::mutation::{generate_mutants, MutantSet, MutationOperator};
use crate::seeds;
use crate::testgen::{self, FitnessKind, Provenance, SearchConfig, SuiteIoError, TestSuite, TestgenError};

mod config;
mod report;
pub mod stats;

pub use config::{load_config, parse_config, ConfigError};
pub use report::{emit_report, read_results, write_results, ReportFormat, Table};
pub use stats::{kill_rate, paired_t_test, suite_size_stats, SizeStats, StatsSummary, TTest};

/// A broken internal invariant or a precondition the caller violated.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("contract violation: {0}")]
pub struct ContractViolation(pub String);

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error("{function}: {source}")]
    Testgen {
        function: String,
        #[source]
        source: TestgenError,
    },
    #[error("suite file {path}: {message}")]
    SuiteFile { path: PathBuf, message: String },
    #[error(transparent)]
    Contract(#[from] ContractViolation),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

/// Where one method's source suite comes from.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceSpec {
    pub origin: Provenance,
    /// Explicit suite seed; derived from the master seed when absent.
    pub seed: Option<u64>,
    /// Suite file for the `file` origin.
    pub path: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodPlan {
    pub name: String,
    /// Size of random suites.
    pub num_tests: usize,
    pub mrs: Vec<MetamorphicRelation>,
    pub sources: Vec<SourceSpec>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPlan {
    pub seed: u64,
    /// Step budget for every MT execution.
    pub budget: u64,
    pub operators: Vec<MutationOperator>,
    pub search: SearchConfig,
    pub methods: Vec<MethodPlan>,
}

pub const DEFAULT_NUM_TESTS: usize = 10;

impl ExperimentPlan {
    pub fn validate(&self) -> Result<(), ContractViolation> {
        if self.methods.is_empty() {
            return Err(ContractViolation("plan has no methods".into()));
        }
        if self.operators.is_empty() {
            return Err(ContractViolation("plan has no mutation operators".into()));
        }
        for m in &self.methods {
            if m.mrs.is_empty() {
                return Err(ContractViolation(format!("{}: no metamorphic relations", m.name)));
            }
            if m.sources.is_empty() {
                return Err(ContractViolation(format!("{}: no source suites", m.name)));
            }
            let origins: BTreeSet<_> = m.sources.iter().map(|s| s.origin).collect();
            if origins.len() != m.sources.len() {
                return Err(ContractViolation(format!("{}: duplicate source origin", m.name)));
            }
            if origins.contains(&Provenance::Combined) {
                return Err(ContractViolation(format!("{}: `combined` is not a source origin", m.name)));
            }
        }
        Ok(())
    }

    /// Every origin used by any method, in canonical order.
    pub fn strategies(&self) -> Vec<Provenance> {
        let s: BTreeSet<_> = self.methods.iter().flat_map(|m| m.sources.iter().map(|s| s.origin)).collect();
        s.into_iter().collect()
    }
}

/// Pair counts for one relation within one source suite.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairCounts {
    pub planned: usize,
    /// Passed on the original program and kept for kill credit.
    pub surviving: usize,
    pub violated: usize,
    pub inapplicable: usize,
    pub errored: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteRecord {
    pub suite: TestSuite,
    /// Final fitness for searched suites.
    pub fitness: Option<f64>,
    pub evaluations: Option<usize>,
    pub pairs: BTreeMap<MrKind, PairCounts>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionRecord {
    pub function: String,
    pub mutants: MutantSet,
    /// Relations run, after dropping those the entry does not support.
    pub mrs: Vec<MrKind>,
    pub skipped_mrs: Vec<MrKind>,
    pub suites: BTreeMap<Provenance, SuiteRecord>,
    /// No pair survived sanity filtering and some pair was violated on the
    /// original program.
    pub excluded: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrategyKills {
    /// Fingerprint of the mutant population the ids refer to.
    pub population: u64,
    pub mutants: usize,
    pub killed: BTreeSet<usize>,
    pub per_mr: BTreeMap<MrKind, BTreeSet<usize>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunctionKills {
    pub function: String,
    pub mutants: usize,
    pub population: u64,
    pub excluded: bool,
    pub strategies: BTreeMap<Provenance, StrategyKills>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct KillMatrix {
    pub functions: Vec<FunctionKills>,
}

impl KillMatrix {
    /// Killed and total mutants for `strategy`, pooled over non-excluded
    /// functions that ran it.
    pub fn totals(&self, strategy: Provenance) -> (usize, usize) {
        self.functions
            .iter()
            .filter(|f| !f.excluded)
            .filter_map(|f| f.strategies.get(&strategy))
            .fold((0, 0), |(k, t), s| (k + s.killed.len(), t + s.mutants))
    }

    /// Pooled totals of the union of `strategies`, over functions that ran
    /// all of them.
    pub fn combined_totals(&self, strategies: &[Provenance]) -> Result<(usize, usize), ContractViolation> {
        let mut acc = (0, 0);
        for f in self.functions.iter().filter(|f| !f.excluded) {
            let parts: Option<Vec<_>> = strategies.iter().map(|s| f.strategies.get(s)).collect();
            if let Some(parts) = parts {
                let c = combine_suites(&parts)?;
                acc.0 += c.killed.len();
                acc.1 += c.mutants;
            }
        }
        Ok(acc)
    }

    /// Checks that ids are in range and per-relation sets union to the
    /// strategy set.
    pub fn check_invariants(&self) -> Result<(), ContractViolation> {
        for f in &self.functions {
            for (s, k) in &f.strategies {
                if k.population != f.population || k.mutants != f.mutants {
                    return Err(ContractViolation(format!("{}/{s}: population mismatch", f.function)));
                }
                if k.killed.iter().any(|&id| id >= f.mutants) {
                    return Err(ContractViolation(format!("{}/{s}: killed id out of range", f.function)));
                }
                let union: BTreeSet<usize> = k.per_mr.values().flatten().copied().collect();
                if union != k.killed {
                    return Err(ContractViolation(format!(
                        "{}/{s}: per-relation kills do not union to the strategy set",
                        f.function
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Union of kill sets over one mutant population.
pub fn combine_suites(parts: &[&StrategyKills]) -> Result<StrategyKills, ContractViolation> {
    let first = parts.first().ok_or_else(|| ContractViolation("nothing to combine".into()))?;
    let mut out = StrategyKills {
        population: first.population,
        mutants: first.mutants,
        killed: BTreeSet::new(),
        per_mr: BTreeMap::new(),
    };
    for p in parts {
        if p.population != out.population || p.mutants != out.mutants {
            return Err(ContractViolation("combined suites were run on different mutant populations".into()));
        }
        out.killed.extend(&p.killed);
        for (mr, ids) in &p.per_mr {
            out.per_mr.entry(*mr).or_default().extend(ids);
        }
    }
    Ok(out)
}

/// Kill rate of one (strategy, relation) cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MrRate {
    pub killed: usize,
    pub mutants: usize,
    pub rate: Option<f64>,
    /// Every planned pair for this relation was sanity-filtered.
    pub flagged: bool,
}

/// Strategy by relation kill rates, pooled over non-excluded functions.
pub fn per_mr_breakdown(
    matrix: &KillMatrix,
    records: &[FunctionRecord],
) -> Result<BTreeMap<Provenance, BTreeMap<MrKind, MrRate>>, ContractViolation> {
    let pairs: BTreeMap<&str, &FunctionRecord> = records.iter().map(|r| (r.function.as_str(), r)).collect();
    let mut out: BTreeMap<Provenance, BTreeMap<MrKind, (usize, usize, usize, usize)>> = BTreeMap::new();
    for f in matrix.functions.iter().filter(|f| !f.excluded) {
        let rec = pairs.get(f.function.as_str());
        for (s, k) in &f.strategies {
            let counts = rec.and_then(|r| r.suites.get(s)).map(|sr| &sr.pairs);
            for (mr, ids) in &k.per_mr {
                let c = counts.and_then(|c| c.get(mr)).copied().unwrap_or_default();
                let cell = out.entry(*s).or_default().entry(*mr).or_default();
                cell.0 += ids.len();
                cell.1 += k.mutants;
                cell.2 += c.planned;
                cell.3 += c.surviving;
            }
        }
    }
    out.into_iter()
        .map(|(s, row)| {
            let row = row
                .into_iter()
                .map(|(mr, (killed, mutants, planned, surviving))| {
                    Ok((
                        mr,
                        MrRate {
                            killed,
                            mutants,
                            rate: kill_rate(killed, mutants)?,
                            flagged: planned > 0 && surviving == 0,
                        },
                    ))
                })
                .collect::<Result<_, ContractViolation>>()?;
            Ok((s, row))
        })
        .collect()
}

/// Everything a study run produces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResults {
    pub seed: u64,
    pub strategies: Vec<Provenance>,
    pub functions: Vec<FunctionRecord>,
    pub kills: KillMatrix,
}

impl ExperimentResults {
    /// Strategies every function ran.
    pub fn common_strategies(&self) -> Vec<Provenance> {
        self.strategies
            .iter()
            .copied()
            .filter(|s| self.functions.iter().all(|f| f.suites.contains_key(s)))
            .collect()
    }

    /// Suite-size statistics over strategies every function ran.
    pub fn stats(&self) -> Result<StatsSummary, ContractViolation> {
        let sizes = self
            .common_strategies()
            .into_iter()
            .map(|s| (s, self.functions.iter().map(|f| f.suites[&s].suite.len() as f64).collect()))
            .collect();
        suite_size_stats(&sizes)
    }
}

fn search_kind(origin: Provenance) -> Option<FitnessKind> {
    match origin {
        Provenance::Line => Some(FitnessKind::Lc),
        Provenance::Branch => Some(FitnessKind::Bc),
        Provenance::WeakMutation => Some(FitnessKind::Wm),
        _ => None,
    }
}

/// Seed of the relation instance used for `function`. It does not depend on
/// the strategy, so follow-ups of a test are the same in every suite.
pub fn relation_seed(master: u64, function: &str, mr: MrKind) -> u64 {
    seeds::child_str(seeds::child_str(master, "mr"), &format!("{function}/{}", mr.name()))
}

/// Seed of a source suite when the config gives none.
pub fn suite_seed(master: u64, function: &str, origin: Provenance) -> u64 {
    seeds::child_str(seeds::child_str(master, "suite"), &format!("{function}/{}", origin.name()))
}

fn population_fingerprint(set: &MutantSet) -> u64 {
    let text: String = set
        .mutants
        .iter()
        .map(|m| format!("{}:{}:{}>{};", m.id, m.path(), m.original, m.replacement.token()))
        .collect();
    seeds::child_str(set.mutants.len() as u64, &format!("{}|{text}", set.function))
}

fn read_suite_file(path: &PathBuf, entry: &CorpusEntry) -> Result<TestSuite, ExperimentError> {
    let err = |message: String| ExperimentError::SuiteFile { path: path.clone(), message };
    let file = File::open(path).map_err(|e| err(e.to_string()))?;
    let suite = testgen::read_suite(BufReader::new(file)).map_err(|e: SuiteIoError| err(e.to_string()))?;
    if suite.function != entry.name {
        return Err(err(format!("suite is for `{}`, not `{}`", suite.function, entry.name)));
    }
    if suite.is_empty() {
        return Err(err("suite is empty".into()));
    }
    for (i, t) in suite.tests.iter().enumerate() {
        entry.profile.admits(&t.args).map_err(|m| err(format!("test {i}: {m}")))?;
    }
    Ok(suite)
}

/// Builds one source suite for `entry`.
pub fn build_suite(
    plan: &ExperimentPlan,
    method: &MethodPlan,
    source: &SourceSpec,
    entry: &CorpusEntry,
    mutants: &MutantSet,
) -> Result<(TestSuite, Option<f64>, Option<usize>), ExperimentError> {
    let seed = source.seed.unwrap_or_else(|| suite_seed(plan.seed, &entry.name, source.origin));
    let tg = |source| ExperimentError::Testgen {
        function: entry.name.clone(),
        source,
    };
    if let Some(kind) = search_kind(source.origin) {
        let muts = if kind == FitnessKind::Wm { &mutants.mutants[..] } else { &[] };
        let cfg = plan.search.clone().with_seed(seed);
        let res = testgen::evolve_suite(&entry.function, &entry.profile, kind, &cfg, muts).map_err(tg)?;
        let min = testgen::minimize_suite(&res.suite, &entry.function, kind, muts, cfg.step_budget);
        return Ok((min, Some(res.report.value), Some(res.evaluations)));
    }
    match source.origin {
        Provenance::Random => {
            let s = testgen::random_suite(&entry.name, &entry.profile, method.num_tests, seed).map_err(tg)?;
            Ok((s, None, None))
        }
        Provenance::File => {
            let path = source.path.as_ref().ok_or_else(|| {
                ExperimentError::Contract(ContractViolation(format!("{}: file source without a path", entry.name)))
            })?;
            Ok((read_suite_file(path, entry)?, None, None))
        }
        other => Err(ContractViolation(format!("`{other}` is not a source origin")).into()),
    }
}

/// Relations of `method` that `entry` supports, seeded for this function.
pub fn function_relations(
    plan: &ExperimentPlan,
    method: &MethodPlan,
    entry: &CorpusEntry,
) -> (Vec<MetamorphicRelation>, Vec<MrKind>) {
    let (run, skipped): (Vec<&MetamorphicRelation>, Vec<_>) =
        method.mrs.iter().partition(|mr| entry.applicable_mrs.contains(&mr.kind));
    (
        run.into_iter()
            .map(|mr| mr.with_seed(relation_seed(plan.seed, &entry.name, mr.kind)))
            .collect(),
        skipped.into_iter().map(|mr| mr.kind).collect(),
    )
}

fn run_function(
    plan: &ExperimentPlan,
    method: &MethodPlan,
    entry: &CorpusEntry,
) -> Result<(FunctionRecord, FunctionKills), ExperimentError> {
    let f = &entry.function;
    let mutants = generate_mutants(f, &plan.operators);
    let population = population_fingerprint(&mutants);
    let (mrs, skipped_mrs) = function_relations(plan, method, entry);

    let mut sources = method.sources.clone();
    sources.sort_by_key(|s| s.origin);
    let mut suites = BTreeMap::new();
    let mut plans = Vec::new();
    for src in &sources {
        let (suite, fitness, evaluations) = build_suite(plan, method, src, entry, &mutants)?;
        let planned = mrengine::plan_pairs(&suite.tests, &mrs, &entry.profile);
        let verdicts = mrengine::execute_plan(f, &suite.tests, &planned, entry.comparison_mode, plan.budget);
        let mut pairs: BTreeMap<MrKind, PairCounts> = mrs.iter().map(|m| (m.kind, PairCounts::default())).collect();
        let mut kept = Vec::new();
        for (p, v) in planned.into_iter().zip(&verdicts) {
            let c = pairs.get_mut(&p.mr.kind).expect("relation listed");
            c.planned += 1;
            match v.verdict {
                Verdict::Pass => {
                    c.surviving += 1;
                    kept.push(p);
                }
                Verdict::Violated => c.violated += 1,
                Verdict::Inapplicable(_) => c.inapplicable += 1,
                Verdict::Error(_) => c.errored += 1,
            }
        }
        plans.push((src.origin, suite.tests.clone(), kept));
        suites.insert(
            src.origin,
            SuiteRecord {
                suite,
                fitness,
                evaluations,
                pairs,
            },
        );
    }

    let any = |pick: fn(&PairCounts) -> usize| suites.values().flat_map(|s| s.pairs.values()).map(pick).sum::<usize>();
    let excluded = any(|c| c.surviving) == 0 && any(|c| c.violated) > 0;

    // Per mutant: (strategy, relation) pairs that killed it.
    let hits: Vec<Vec<(Provenance, MrKind)>> = mutants
        .mutants
        .par_iter()
        .map(|m| {
            let mf = m.apply(f);
            let mut out = Vec::new();
            for (origin, tests, kept) in &plans {
                let verdicts = mrengine::execute_plan(&mf, tests, kept, entry.comparison_mode, plan.budget);
                let killers: BTreeSet<MrKind> =
                    verdicts.iter().filter(|v| v.verdict.is_failure()).map(|v| v.mr).collect();
                out.extend(killers.into_iter().map(|mr| (*origin, mr)));
            }
            out
        })
        .collect();

    let mut strategies: BTreeMap<Provenance, StrategyKills> = suites
        .keys()
        .map(|s| {
            (
                *s,
                StrategyKills {
                    population,
                    mutants: mutants.len(),
                    killed: BTreeSet::new(),
                    per_mr: mrs.iter().map(|m| (m.kind, BTreeSet::new())).collect(),
                },
            )
        })
        .collect();
    for (id, hs) in hits.iter().enumerate() {
        for (s, mr) in hs {
            let k = strategies.get_mut(s).expect("strategy present");
            k.killed.insert(id);
            k.per_mr.get_mut(mr).expect("relation present").insert(id);
        }
    }

    let kills = FunctionKills {
        function: entry.name.clone(),
        mutants: mutants.len(),
        population,
        excluded,
        strategies,
    };
    let record = FunctionRecord {
        function: entry.name.clone(),
        mutants,
        mrs: mrs.iter().map(|m| m.kind).collect(),
        skipped_mrs,
        suites,
        excluded,
    };
    Ok((record, kills))
}

/// Runs the whole plan. Functions and mutants run in parallel; the result
/// depends only on the plan and corpus.
pub fn run_experiment(plan: &ExperimentPlan, corpus: &[CorpusEntry]) -> Result<ExperimentResults, ExperimentError> {
    plan.validate()?;
    let entries = plan
        .methods
        .iter()
        .map(|m| {
            corpus::find(corpus, &m.name).ok_or_else(|| ContractViolation(format!("`{}` is not in the corpus", m.name)))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let done = plan
        .methods
        .par_iter()
        .zip(entries.par_iter())
        .map(|(m, e)| run_function(plan, m, e))
        .collect::<Result<Vec<_>, _>>()?;
    let (functions, kills): (Vec<_>, Vec<_>) = done.into_iter().unzip();
    let kills = KillMatrix { functions: kills };
    kills.check_invariants()?;
    Ok(ExperimentResults {
        seed: plan.seed,
        strategies: plan.strategies(),
        functions,
        kills,
    })
}

/// One MT verdict on an original program, for the `mt` command.
#[derive(Debug, Clone, PartialEq)]
pub struct OriginalVerdict {
    pub function: String,
    pub origin: Provenance,
    pub verdict: mrengine::MtVerdict,
}

/// Builds every source suite in `plan` and runs MT on the unmutated
/// functions.
pub fn run_original_mt(plan: &ExperimentPlan, corpus: &[CorpusEntry]) -> Result<Vec<OriginalVerdict>, ExperimentError> {
    plan.validate()?;
    let mut out = Vec::new();
    for m in &plan.methods {
        let entry = corpus::find(corpus, &m.name)
            .ok_or_else(|| ContractViolation(format!("`{}` is not in the corpus", m.name)))?;
        let mutants = generate_mutants(&entry.function, &plan.operators);
        let (mrs, _) = function_relations(plan, m, entry);
        let mut sources = m.sources.clone();
        sources.sort_by_key(|s| s.origin);
        for src in &sources {
            let (suite, _, _) = build_suite(plan, m, src, entry, &mutants)?;
            let setup = mrengine::MtSetup {
                profile: &entry.profile,
                mode: entry.comparison_mode,
                budget: plan.budget,
            };
            for v in mrengine::run_mt(&entry.function, &suite.tests, &mrs, &setup) {
                out.push(OriginalVerdict {
                    function: entry.name.clone(),
                    origin: src.origin,
                    verdict: v,
                });
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests;
