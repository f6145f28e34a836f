//! Table files for a finished study.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use super::stats::format_rate;
use super::{kill_rate, per_mr_breakdown, ContractViolation, ExperimentError, ExperimentResults};
use crate::testgen::Provenance;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Markdown,
}

impl ReportFormat {
    fn extension(self) -> &'static str {
        match self {
            ReportFormat::Csv => "csv",
            ReportFormat::Markdown => "md",
        }
    }
}

impl FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            _ => Err(format!("unknown report format `{s}`")),
        }
    }
}

/// A named table of strings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    pub name: &'static str,
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(name: &'static str, headers: &[&str]) -> Self {
        Table {
            name,
            headers: headers.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn render(&self, format: ReportFormat) -> Result<String, ExperimentError> {
        match format {
            ReportFormat::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(&self.headers)?;
                for r in &self.rows {
                    w.write_record(r)?;
                }
                let bytes = w.into_inner().map_err(|e| std::io::Error::other(e.to_string()))?;
                Ok(String::from_utf8(bytes).expect("csv of utf-8 strings"))
            }
            ReportFormat::Markdown => {
                let mut s = String::new();
                let line = |cells: &[String]| format!("| {} |\n", cells.join(" | "));
                s.push_str(&line(&self.headers));
                s.push_str(&line(&vec!["---".to_string(); self.headers.len()]));
                for r in &self.rows {
                    s.push_str(&line(r));
                }
                Ok(s)
            }
        }
    }
}

/// Weak mutation combined with each other systematic or random strategy.
pub const COMBINATIONS: [&[Provenance]; 4] = [
    &[Provenance::WeakMutation, Provenance::Line],
    &[Provenance::WeakMutation, Provenance::Branch],
    &[Provenance::WeakMutation, Provenance::Line, Provenance::Branch],
    &[Provenance::WeakMutation, Provenance::Random],
];

fn join(ps: &[Provenance]) -> String {
    ps.iter().map(|p| p.name()).collect::<Vec<_>>().join("+")
}

fn opt(x: Option<f64>, f: impl Fn(f64) -> String) -> String {
    x.map(f).unwrap_or_default()
}

pub(super) fn table2(r: &ExperimentResults) -> Result<Table, ContractViolation> {
    let mut headers = vec!["function".to_string(), "mutants".to_string()];
    for s in &r.strategies {
        headers.push(format!("{s}_size"));
        headers.push(format!("{s}_kill_rate"));
    }
    headers.push("excluded".into());
    let mut t = Table {
        name: "table2",
        headers,
        rows: Vec::new(),
    };
    for (rec, k) in r.functions.iter().zip(&r.kills.functions) {
        let mut row = vec![rec.function.clone(), k.mutants.to_string()];
        for s in &r.strategies {
            match (rec.suites.get(s), k.strategies.get(s)) {
                (Some(sr), Some(sk)) => {
                    row.push(sr.suite.len().to_string());
                    row.push(format_rate(kill_rate(sk.killed.len(), sk.mutants)?));
                }
                _ => row.extend([String::new(), String::new()]),
            }
        }
        row.push(k.excluded.to_string());
        t.rows.push(row);
    }
    Ok(t)
}

pub(super) fn table3(r: &ExperimentResults) -> Result<Table, ContractViolation> {
    let mut t = Table::new("table3", &["combination", "killed", "mutants", "kill_rate", "tests"]);
    for combo in COMBINATIONS {
        if !combo.iter().all(|s| r.strategies.contains(s)) {
            continue;
        }
        let (killed, mutants) = r.kills.combined_totals(combo)?;
        let tests: usize = r
            .functions
            .iter()
            .filter(|f| !f.excluded && combo.iter().all(|s| f.suites.contains_key(s)))
            .map(|f| combo.iter().map(|s| f.suites[s].suite.len()).sum::<usize>())
            .sum();
        t.rows.push(vec![
            join(combo),
            killed.to_string(),
            mutants.to_string(),
            format_rate(kill_rate(killed, mutants)?),
            tests.to_string(),
        ]);
    }
    Ok(t)
}

pub(super) fn table4(r: &ExperimentResults) -> Result<Table, ContractViolation> {
    let stats = r.stats()?;
    let mut t = Table::new(
        "table4",
        &["strategy", "total", "mean", "median", "sd", "wm_smaller", "wm_equal", "wm_larger", "t", "p"],
    );
    for (s, st) in &stats.strategies {
        let (a, b, c) = st.vs_weak_mutation.map_or((String::new(), String::new(), String::new()), |(a, b, c)| {
            (a.to_string(), b.to_string(), c.to_string())
        });
        t.rows.push(vec![
            s.to_string(),
            st.total.to_string(),
            format!("{:.4}", st.mean),
            format!("{:.4}", st.median),
            format!("{:.4}", st.sd),
            a,
            b,
            c,
            opt(st.t_test.map(|x| x.t), |v| format!("{v:.6}")),
            opt(st.t_test.map(|x| x.p), |v| format!("{v:.4e}")),
        ]);
    }
    Ok(t)
}

pub(super) fn fig4(r: &ExperimentResults) -> Result<Table, ContractViolation> {
    let mut t = Table::new("fig4", &["strategy", "killed", "mutants", "kill_rate"]);
    for s in &r.strategies {
        let (k, n) = r.kills.totals(*s);
        t.rows.push(vec![s.to_string(), k.to_string(), n.to_string(), format_rate(kill_rate(k, n)?)]);
    }
    Ok(t)
}

pub(super) fn fig6(r: &ExperimentResults) -> Result<Table, ContractViolation> {
    let mut t = Table::new("fig6", &["strategy", "mr", "killed", "mutants", "kill_rate", "flagged"]);
    for (s, row) in per_mr_breakdown(&r.kills, &r.functions)? {
        for (mr, cell) in row {
            t.rows.push(vec![
                s.to_string(),
                mr.name().to_string(),
                cell.killed.to_string(),
                cell.mutants.to_string(),
                format_rate(cell.rate),
                cell.flagged.to_string(),
            ]);
        }
    }
    Ok(t)
}

/// Strategies reaching the highest kill rate for each function.
pub(super) fn best_sets(r: &ExperimentResults) -> Result<Vec<(String, Option<f64>, Vec<Provenance>)>, ContractViolation> {
    let mut out = Vec::new();
    for k in r.kills.functions.iter().filter(|f| !f.excluded) {
        let top = k.strategies.values().map(|sk| sk.killed.len()).max();
        let rate = match top {
            Some(m) => kill_rate(m, k.mutants)?,
            None => None,
        };
        let best = match rate {
            Some(_) => k.strategies.iter().filter(|(_, sk)| Some(sk.killed.len()) == top).map(|(s, _)| *s).collect(),
            None => Vec::new(),
        };
        out.push((k.function.clone(), rate, best));
    }
    Ok(out)
}

fn best_table(r: &ExperimentResults) -> Result<Table, ContractViolation> {
    let mut headers = vec!["function".to_string(), "best_rate".to_string(), "best".to_string()];
    headers.extend(r.strategies.iter().map(|s| s.to_string()));
    let mut t = Table {
        name: "best_sets",
        headers,
        rows: Vec::new(),
    };
    for (f, rate, best) in best_sets(r)? {
        let mut row = vec![f, format_rate(rate), join(&best)];
        row.extend(r.strategies.iter().map(|s| (best.contains(s) as u8).to_string()));
        t.rows.push(row);
    }
    Ok(t)
}

/// All tables for `results`, in emission order.
pub fn tables(results: &ExperimentResults) -> Result<Vec<Table>, ContractViolation> {
    Ok(vec![
        table2(results)?,
        table3(results)?,
        table4(results)?,
        fig4(results)?,
        fig6(results)?,
        best_table(results)?,
    ])
}

fn summary(r: &ExperimentResults) -> Result<String, ContractViolation> {
    let mut s = String::new();
    let excluded: Vec<_> = r.functions.iter().filter(|f| f.excluded).map(|f| f.function.as_str()).collect();
    let mutants: usize = r.kills.functions.iter().filter(|f| !f.excluded).map(|f| f.mutants).sum();
    let w = &mut s;
    writeln!(w, "# Study summary\n").unwrap();
    writeln!(w, "- master seed: {}", r.seed).unwrap();
    writeln!(w, "- functions: {} ({} excluded{})", r.functions.len(), excluded.len(), if excluded.is_empty() {
        String::new()
    } else {
        format!(": {}", excluded.join(", "))
    })
    .unwrap();
    writeln!(w, "- mutants: {mutants}").unwrap();
    writeln!(w, "\n## Kill rates\n").unwrap();
    for s in &r.strategies {
        let (k, n) = r.kills.totals(*s);
        writeln!(w, "- {s}: {k}/{n} ({}%)", format_rate(kill_rate(k, n)?)).unwrap();
    }
    if r.strategies.contains(&Provenance::WeakMutation) && r.strategies.contains(&Provenance::Random) {
        let (wk, wn) = r.kills.totals(Provenance::WeakMutation);
        let (rk, rn) = r.kills.totals(Provenance::Random);
        let wr = kill_rate(wk, wn)?.unwrap_or(0.0);
        let rr = kill_rate(rk, rn)?.unwrap_or(0.0);
        let dir = if wr >= rr { "at least as many as" } else { "fewer than" };
        writeln!(w, "\nWeak-mutation suites kill {dir} random suites ({wr:.2}% vs {rr:.2}%).").unwrap();
    }
    let best = best_sets(r)?;
    let mut per_strategy: BTreeMap<Provenance, usize> = BTreeMap::new();
    let mut per_set: BTreeMap<String, usize> = BTreeMap::new();
    for (_, _, b) in &best {
        for s in b {
            *per_strategy.entry(*s).or_default() += 1;
        }
        if !b.is_empty() {
            *per_set.entry(join(b)).or_default() += 1;
        }
    }
    writeln!(w, "\n## Functions where each strategy is best\n").unwrap();
    for (s, n) in &per_strategy {
        writeln!(w, "- {s}: {n}").unwrap();
    }
    writeln!(w, "\n## Exact best sets\n").unwrap();
    for (set, n) in &per_set {
        writeln!(w, "- {set}: {n}").unwrap();
    }
    let stats = r.stats()?;
    if stats.strategies.values().any(|s| s.t_test.is_some()) {
        writeln!(w, "\n## Suite sizes against weak mutation\n").unwrap();
        for (s, st) in &stats.strategies {
            if let Some(t) = st.t_test {
                writeln!(
                    w,
                    "- {s}: t = {:.4}, p = {:.4e}{}",
                    t.t,
                    t.p,
                    if t.degenerate { " (degenerate)" } else { "" }
                )
                .unwrap();
            }
        }
    }
    Ok(s)
}

/// Writes one file per table plus `summary.md` into `dir`.
pub fn emit_report(results: &ExperimentResults, dir: &Path, format: ReportFormat) -> Result<Vec<PathBuf>, ExperimentError> {
    if results.strategies.is_empty() {
        return Err(ContractViolation("results have no strategies".into()).into());
    }
    let tables = tables(results)?;
    let summary = summary(results)?;
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for t in tables {
        let p = dir.join(format!("{}.{}", t.name, format.extension()));
        fs::write(&p, t.render(format)?)?;
        written.push(p);
    }
    let p = dir.join("summary.md");
    fs::write(&p, summary)?;
    written.push(p);
    Ok(written)
}

/// Writes `results.json`, `mutants.csv` and `suites/<fn>.<origin>.jsonl`.
pub fn write_results(results: &ExperimentResults, dir: &Path) -> Result<(), ExperimentError> {
    fs::create_dir_all(dir.join("suites"))?;
    let mut json = serde_json::to_string_pretty(results)?;
    json.push('\n');
    fs::write(dir.join("results.json"), json)?;
    let mut w = csv::Writer::from_path(dir.join("mutants.csv"))?;
    w.write_record(["fn", "id", "operator", "path", "original", "replacement", "killed_by"])?;
    for (rec, k) in results.functions.iter().zip(&results.kills.functions) {
        for m in &rec.mutants.mutants {
            let by: Vec<&str> = k
                .strategies
                .iter()
                .filter(|(_, sk)| sk.killed.contains(&m.id))
                .map(|(s, _)| s.name())
                .collect();
            w.write_record([
                rec.function.clone(),
                m.id.to_string(),
                m.operator.name().to_string(),
                m.path(),
                m.original.clone(),
                m.replacement.token(),
                by.join("+"),
            ])?;
        }
    }
    w.flush()?;
    for rec in &results.functions {
        for (s, sr) in &rec.suites {
            let mut buf = Vec::new();
            crate::testgen::write_suite(&mut buf, &sr.suite)?;
            fs::write(dir.join("suites").join(format!("{}.{}.jsonl", rec.function, s.name())), buf)?;
        }
    }
    Ok(())
}

/// Reads `results.json` from a study output directory.
pub fn read_results(dir: &Path) -> Result<ExperimentResults, ExperimentError> {
    let text = fs::read_to_string(dir.join("results.json"))?;
    Ok(serde_json::from_str(&text)?)
}
