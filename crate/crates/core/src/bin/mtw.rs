use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};

use mtw::corpus::{self, CorpusEntry};
use mtw::experiment::{self, ExperimentError, ReportFormat};
use mtw::mutation::{generate_mutants, MutationOperator};
use mtw::testgen::{self, FitnessKind, SearchConfig};

#[derive(Parser)]
#[command(name = "mtw", version, about = "Metamorphic testing with generated source suites")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Criterion {
    Line,
    Branch,
    Weakmut,
    Random,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Markdown,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a source suite and print it as JSON lines.
    Generate {
        #[arg(long = "fn")]
        function: String,
        #[arg(long, value_enum)]
        criterion: Criterion,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Suite size for the random criterion.
        #[arg(long, default_value_t = experiment::DEFAULT_NUM_TESTS)]
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the mutant catalog of a function as CSV.
    Mutants {
        #[arg(long = "fn")]
        function: String,
        /// Comma-separated operators; all when omitted.
        #[arg(long)]
        operators: Option<String>,
    },
    /// Run MT on the unmutated functions of a config and print the verdicts.
    Mt {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run the full study and write results and tables.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Re-render tables from a study directory.
    Report {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
}

enum Failure {
    Usage(String),
    Contract(String),
}

impl From<ExperimentError> for Failure {
    fn from(e: ExperimentError) -> Self {
        match e {
            ExperimentError::Contract(c) => Failure::Contract(c.to_string()),
            other => Failure::Usage(other.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn load() -> Result<Vec<CorpusEntry>, Failure> {
    corpus::load_corpus().map_err(|e| Failure::Contract(e.to_string()))
}

fn entry<'a>(corpus: &'a [CorpusEntry], name: &str) -> Result<&'a CorpusEntry, Failure> {
    corpus::find(corpus, name).ok_or_else(|| Failure::Usage(format!("unknown function `{name}`")))
}

fn generate(function: &str, criterion: Criterion, seed: u64, n: usize, out: Option<PathBuf>) -> Result<(), Failure> {
    let corpus = load()?;
    let e = entry(&corpus, function)?;
    let tg = |err: testgen::TestgenError| Failure::Usage(format!("{function}: {err}"));
    let kind = match criterion {
        Criterion::Line => Some(FitnessKind::Lc),
        Criterion::Branch => Some(FitnessKind::Bc),
        Criterion::Weakmut => Some(FitnessKind::Wm),
        Criterion::Random => None,
    };
    let suite = match kind {
        None => testgen::random_suite(&e.name, &e.profile, n, seed).map_err(tg)?,
        Some(kind) => {
            let mutants = generate_mutants(&e.function, &MutationOperator::ALL);
            let muts = if kind == FitnessKind::Wm { &mutants.mutants[..] } else { &[] };
            let cfg = SearchConfig::default().with_seed(seed);
            let res = testgen::evolve_suite(&e.function, &e.profile, kind, &cfg, muts).map_err(tg)?;
            let min = testgen::minimize_suite(&res.suite, &e.function, kind, muts, cfg.step_budget);
            eprintln!(
                "{function}: {} fitness {:.4} after {} evaluations, {} tests",
                kind.name(),
                res.report.value,
                res.evaluations,
                min.len()
            );
            min
        }
    };
    let mut buf = Vec::new();
    testgen::write_suite(&mut buf, &suite)?;
    match out {
        Some(p) => std::fs::write(p, buf)?,
        None => io::stdout().write_all(&buf)?,
    }
    Ok(())
}

fn mutants(function: &str, operators: Option<String>) -> Result<(), Failure> {
    let corpus = load()?;
    let e = entry(&corpus, function)?;
    let ops = match operators {
        None => MutationOperator::ALL.to_vec(),
        Some(list) => list
            .split(',')
            .map(|s| MutationOperator::from_str(s.trim()))
            .collect::<Result<Vec<_>, _>>()
            .map_err(Failure::Usage)?,
    };
    generate_mutants(&e.function, &ops)
        .write_catalog(io::stdout())
        .map_err(|e| Failure::Usage(e.to_string()))
}

fn mt(config: PathBuf) -> Result<(), Failure> {
    let corpus = load()?;
    let plan = experiment::load_config(&config, &corpus).map_err(ExperimentError::from)?;
    let verdicts = experiment::run_original_mt(&plan, &corpus)?;
    let mut w = csv::Writer::from_writer(io::stdout());
    let csv_err = |e: csv::Error| Failure::Usage(e.to_string());
    w.write_record(["fn", "source", "test", "mr", "verdict", "source_output", "followup_output"])
        .map_err(csv_err)?;
    let show = |v: &Option<mtw::dsl::Value>| v.as_ref().map(|x| x.to_string()).unwrap_or_default();
    let mut violated = 0;
    for v in &verdicts {
        violated += (v.verdict.verdict == mtw::mrengine::Verdict::Violated) as usize;
        w.write_record([
            v.function.clone(),
            v.origin.to_string(),
            v.verdict.test_index.to_string(),
            v.verdict.mr.name().to_string(),
            v.verdict.verdict.to_string(),
            show(&v.verdict.source_output),
            show(&v.verdict.followup_output),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    eprintln!("{} pairs, {violated} violated", verdicts.len());
    Ok(())
}

fn run_study(config: PathBuf, out: PathBuf, jobs: Option<usize>) -> Result<(), Failure> {
    if let Some(n) = jobs {
        if n == 0 {
            return Err(Failure::Usage("--jobs must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Contract(e.to_string()))?;
    }
    let corpus = load()?;
    let plan = experiment::load_config(&config, &corpus).map_err(ExperimentError::from)?;
    let start = Instant::now();
    let results = experiment::run_experiment(&plan, &corpus)?;
    experiment::write_results(&results, &out)?;
    experiment::emit_report(&results, &out, ReportFormat::Csv)?;
    print!("{}", std::fs::read_to_string(out.join("summary.md"))?);
    eprintln!(
        "{} functions, {} strategies in {:.1}s; output in {}",
        results.functions.len(),
        results.strategies.len(),
        start.elapsed().as_secs_f64(),
        out.display()
    );
    Ok(())
}

fn report(input: PathBuf, format: Format) -> Result<(), Failure> {
    let results = experiment::read_results(&input)?;
    let format = match format {
        Format::Csv => ReportFormat::Csv,
        Format::Markdown => ReportFormat::Markdown,
    };
    for p in experiment::emit_report(&results, &input, format)? {
        println!("{}", p.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let res = match cli.cmd {
        Cmd::Generate {
            function,
            criterion,
            seed,
            n,
            out,
        } => generate(&function, criterion, seed, n, out),
        Cmd::Mutants { function, operators } => mutants(&function, operators),
        Cmd::Mt { config } => mt(config),
        Cmd::Experiment { config, out, jobs } => run_study(config, out, jobs),
        Cmd::Report { input, format } => report(input, format),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Contract(m)) => {
            eprintln!("internal error: {m}");
            ExitCode::from(2)
        }
    }
}
