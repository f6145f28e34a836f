use std::collections::HashMap;
use std::rc::Rc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::fitness::{FitnessContext, FitnessKind, FitnessReport, TestRecord};
use super::{Provenance, TestCase, TestSuite, TestgenError};
use crate::corpus::{Constraint, InputProfile};
use crate::dsl::{FunctionDef, Value, DEFAULT_BUDGET};
use crate::mutation::Mutant;

/// Genetic algorithm settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub population: usize,
    pub max_evaluations: usize,
    pub max_suite_size: usize,
    /// Expected number of mutated tests per offspring suite.
    pub test_mutation_rate: f64,
    /// Chance that a mutated test gets a Gaussian step rather than a fresh argument.
    pub perturb_probability: f64,
    pub add_test_probability: f64,
    pub remove_test_probability: f64,
    pub crossover_rate: f64,
    pub tournament_size: usize,
    pub elitism: usize,
    pub seed: u64,
    /// Step budget for each test execution.
    pub step_budget: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            population: 50,
            max_evaluations: 10_000,
            max_suite_size: 10,
            test_mutation_rate: 1.0,
            perturb_probability: 0.5,
            add_test_probability: 0.3,
            remove_test_probability: 0.1,
            crossover_rate: 0.75,
            tournament_size: 5,
            elitism: 1,
            seed: 0,
            step_budget: DEFAULT_BUDGET,
        }
    }
}

impl SearchConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<(), TestgenError> {
        let err = |m: &str| Err(TestgenError::Config(m.to_string()));
        if self.population < 2 {
            return err("population must be at least 2");
        }
        if self.max_evaluations == 0 || self.max_suite_size == 0 || self.tournament_size == 0 || self.step_budget == 0 {
            return err("evaluation budget, suite cap, tournament size and step budget must be positive");
        }
        if self.elitism >= self.population {
            return err("elitism must be smaller than the population");
        }
        for (name, p) in [
            ("perturb_probability", self.perturb_probability),
            ("add_test_probability", self.add_test_probability),
            ("remove_test_probability", self.remove_test_probability),
            ("crossover_rate", self.crossover_rate),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(TestgenError::Config(format!("{name} must lie in [0, 1]")));
            }
        }
        if !(self.test_mutation_rate > 0.0) {
            return err("test_mutation_rate must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SearchResult {
    pub suite: TestSuite,
    pub report: FitnessReport,
    pub generations: usize,
    pub evaluations: usize,
}

fn cache_key(t: &TestCase) -> Vec<u64> {
    let mut k = Vec::new();
    for a in &t.args {
        match a {
            Value::Scalar(x) => k.extend([0, x.to_bits()]),
            Value::Bool(b) => k.extend([1, *b as u64]),
            Value::Array(xs) => {
                k.extend([2, xs.len() as u64]);
                k.extend(xs.iter().map(|x| x.to_bits()));
            }
        }
    }
    k
}

struct Individual {
    tests: Vec<TestCase>,
    fitness: f64,
}

struct Search<'a> {
    ctx: FitnessContext<'a>,
    profile: &'a InputProfile,
    cfg: &'a SearchConfig,
    rng: ChaCha8Rng,
    cache: HashMap<Vec<u64>, Rc<TestRecord>>,
    evaluations: usize,
}

const CACHE_LIMIT: usize = 50_000;

impl Search<'_> {
    fn record(&mut self, t: &TestCase) -> Rc<TestRecord> {
        let key = cache_key(t);
        if let Some(r) = self.cache.get(&key) {
            return r.clone();
        }
        if self.cache.len() >= CACHE_LIMIT {
            self.cache.clear();
        }
        let r = Rc::new(self.ctx.run(t));
        self.cache.insert(key, r.clone());
        r
    }

    fn score(&mut self, tests: Vec<TestCase>) -> Individual {
        let recs: Vec<Rc<TestRecord>> = tests.iter().map(|t| self.record(t)).collect();
        let refs: Vec<&TestRecord> = recs.iter().map(|r| r.as_ref()).collect();
        self.evaluations += 1;
        Individual {
            fitness: self.ctx.value(&refs),
            tests,
        }
    }

    fn random_test(&mut self) -> TestCase {
        TestCase::new(
            self.profile
                .sample_with(&mut self.rng)
                .expect("profile validated before search"),
        )
    }

    fn random_suite(&mut self) -> Vec<TestCase> {
        let n = self.rng.random_range(1..=self.cfg.max_suite_size);
        (0..n).map(|_| self.random_test()).collect()
    }

    fn step(&mut self, x: f64) -> f64 {
        let sigma = 0.1 * self.profile.range_width();
        let n = Normal::new(0.0, sigma).expect("positive width");
        let y = x + n.sample(&mut self.rng);
        if self.profile.integers {
            let r = y.round();
            if r == x {
                x + if self.rng.random_bool(0.5) { 1.0 } else { -1.0 }
            } else {
                r
            }
        } else {
            y
        }
    }

    fn perturb(&mut self, t: &mut TestCase) {
        let i = self.rng.random_range(0..t.args.len());
        let equal = self.profile.has(Constraint::EqualLengths);
        let resize = matches!(t.args[i], Value::Array(_)) && self.rng.random_bool(1.0 / 3.0);
        if resize {
            let Value::Array(xs) = &t.args[i] else { unreachable!() };
            let n = xs.len();
            let (lo, hi) = self.profile.length;
            let grow = if n <= lo {
                true
            } else if n >= hi {
                false
            } else {
                self.rng.random_bool(0.5)
            };
            if (grow && n >= hi) || (!grow && n <= lo) {
                return;
            }
            for j in 0..t.args.len() {
                if j != i && !equal {
                    continue;
                }
                let fresh = self.profile.sample_value(&mut self.rng).expect("profile validated");
                if let Value::Array(ys) = &mut t.args[j] {
                    if grow {
                        ys.push(fresh);
                    } else {
                        ys.pop();
                    }
                }
            }
            return;
        }
        match &mut t.args[i] {
            Value::Scalar(x) => {
                let y = self.step(*x);
                t.args[i] = Value::Scalar(y);
            }
            Value::Array(xs) if !xs.is_empty() => {
                let k = self.rng.random_range(0..xs.len());
                let old = xs[k];
                let y = self.step(old);
                if let Value::Array(xs) = &mut t.args[i] {
                    xs[k] = y;
                }
            }
            _ => {}
        }
    }

    fn resample_arg(&mut self, t: &mut TestCase) {
        let i = self.rng.random_range(0..t.args.len());
        let fresh = self.random_test();
        match (&t.args[i], &fresh.args[i]) {
            (Value::Array(old), Value::Array(new)) if self.profile.has(Constraint::EqualLengths) => {
                let n = old.len();
                let mut v: Vec<f64> = new.iter().copied().take(n).collect();
                while v.len() < n {
                    v.push(self.profile.sample_value(&mut self.rng).expect("profile validated"));
                }
                t.args[i] = Value::Array(v);
            }
            _ => t.args[i] = fresh.args[i].clone(),
        }
    }

    fn mutate(&mut self, tests: &mut Vec<TestCase>) {
        let p = (self.cfg.test_mutation_rate / tests.len() as f64).min(1.0);
        for idx in 0..tests.len() {
            if !self.rng.random_bool(p) {
                continue;
            }
            let mut t = tests[idx].clone();
            if self.rng.random_bool(self.cfg.perturb_probability) {
                self.perturb(&mut t);
            } else {
                self.resample_arg(&mut t);
            }
            if self.profile.admits(&t.args).is_err() {
                t = self.random_test();
            }
            tests[idx] = t;
        }
        if tests.len() < self.cfg.max_suite_size && self.rng.random_bool(self.cfg.add_test_probability) {
            let t = self.random_test();
            tests.push(t);
        }
        if tests.len() > 1 && self.rng.random_bool(self.cfg.remove_test_probability) {
            let i = self.rng.random_range(0..tests.len());
            tests.remove(i);
        }
    }

    fn crossover(&mut self, a: &[TestCase], b: &[TestCase]) -> (Vec<TestCase>, Vec<TestCase>) {
        let alpha: f64 = self.rng.random();
        let ca = ((a.len() as f64) * alpha).round() as usize;
        let cb = ((b.len() as f64) * alpha).round() as usize;
        let mut x: Vec<TestCase> = a[..ca].iter().chain(&b[cb..]).cloned().collect();
        let mut y: Vec<TestCase> = b[..cb].iter().chain(&a[ca..]).cloned().collect();
        for (v, parent) in [(&mut x, a), (&mut y, b)] {
            v.truncate(self.cfg.max_suite_size);
            if v.is_empty() {
                v.push(parent[0].clone());
            }
        }
        (x, y)
    }

    /// Tournament over a population sorted best first: the lowest index wins.
    fn select(&mut self, n: usize) -> usize {
        (0..self.cfg.tournament_size)
            .map(|_| self.rng.random_range(0..n))
            .min()
            .expect("tournament size is positive")
    }
}

fn better(a: &Individual, b: &Individual) -> bool {
    (a.fitness, a.tests.len()) < (b.fitness, b.tests.len())
}

/// Evolves a whole suite toward fitness 0 for `kind`.
///
/// The best suite seen by (fitness, size) is returned. The search stops as
/// soon as a suite reaches fitness 0 or the evaluation budget is spent.
pub fn evolve_suite(
    f: &FunctionDef,
    profile: &InputProfile,
    kind: FitnessKind,
    config: &SearchConfig,
    mutants: &[Mutant],
) -> Result<SearchResult, TestgenError> {
    config.validate()?;
    profile.validate()?;
    let mut s = Search {
        ctx: FitnessContext::new(f, kind, mutants).with_budget(config.step_budget),
        profile,
        cfg: config,
        rng: ChaCha8Rng::seed_from_u64(config.seed),
        cache: HashMap::new(),
        evaluations: 0,
    };
    let mut pop: Vec<Individual> = Vec::with_capacity(config.population);
    let mut best: Option<Individual> = None;
    let consider = |best: &mut Option<Individual>, ind: &Individual| {
        if best.as_ref().is_none_or(|b| better(ind, b)) {
            *best = Some(Individual {
                tests: ind.tests.clone(),
                fitness: ind.fitness,
            });
        }
    };
    while pop.len() < config.population && s.evaluations < config.max_evaluations {
        let tests = s.random_suite();
        let ind = s.score(tests);
        consider(&mut best, &ind);
        pop.push(ind);
        if ind_done(&best) {
            break;
        }
    }
    let mut generations = 0;
    while !ind_done(&best) && s.evaluations < config.max_evaluations {
        generations += 1;
        pop.sort_by(|a, b| (a.fitness, a.tests.len()).partial_cmp(&(b.fitness, b.tests.len())).unwrap());
        let n = pop.len();
        let mut next: Vec<Individual> = pop
            .iter()
            .take(config.elitism)
            .map(|i| Individual {
                tests: i.tests.clone(),
                fitness: i.fitness,
            })
            .collect();
        while next.len() < config.population && s.evaluations < config.max_evaluations && !ind_done(&best) {
            let (i, j) = (s.select(n), s.select(n));
            let (mut x, mut y) = if s.rng.random_bool(config.crossover_rate) {
                s.crossover(&pop[i].tests, &pop[j].tests)
            } else {
                (pop[i].tests.clone(), pop[j].tests.clone())
            };
            s.mutate(&mut x);
            s.mutate(&mut y);
            for tests in [x, y] {
                if s.evaluations >= config.max_evaluations || next.len() >= config.population {
                    break;
                }
                let ind = s.score(tests);
                consider(&mut best, &ind);
                next.push(ind);
            }
        }
        pop = next;
    }
    let best = best.expect("at least one evaluation");
    let report = s.ctx.evaluate_suite(&best.tests);
    let provenance = match kind {
        FitnessKind::Lc => Provenance::Line,
        FitnessKind::Bc => Provenance::Branch,
        FitnessKind::Wm => Provenance::WeakMutation,
    };
    Ok(SearchResult {
        suite: TestSuite::new(&f.name, best.tests, provenance, config.seed),
        report,
        generations,
        evaluations: s.evaluations,
    })
}

fn ind_done(best: &Option<Individual>) -> bool {
    best.as_ref().is_some_and(|b| b.fitness == 0.0)
}

/// Greedily drops tests, newest first, while neither the covered goals nor
/// the fitness value change.
pub fn minimize_suite(
    suite: &TestSuite,
    f: &FunctionDef,
    kind: FitnessKind,
    mutants: &[Mutant],
    budget: u64,
) -> TestSuite {
    let ctx = FitnessContext::new(f, kind, mutants).with_budget(budget);
    let records: Vec<TestRecord> = suite.tests.iter().map(|t| ctx.run(t)).collect();
    let mut keep = vec![true; records.len()];
    let current = |keep: &[bool]| -> Vec<&TestRecord> {
        records.iter().zip(keep).filter(|(_, k)| **k).map(|(r, _)| r).collect()
    };
    let goals = ctx.covered_goals(&current(&keep));
    let value = ctx.value(&current(&keep));
    for i in (0..records.len()).rev() {
        if keep.iter().filter(|k| **k).count() == 1 {
            break;
        }
        keep[i] = false;
        let recs = current(&keep);
        if ctx.value(&recs) != value || ctx.covered_goals(&recs) != goals {
            keep[i] = true;
        }
    }
    let mut out = suite.clone();
    out.tests = suite
        .tests
        .iter()
        .zip(&keep)
        .filter(|(_, k)| **k)
        .map(|(t, _)| t.clone())
        .collect();
    out
}
