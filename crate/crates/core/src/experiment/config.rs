//! XML experiment configs.
//!
//! ```xml
//! <mettester seed="42" budget="100000" operators="AOR,ROR,UOI,LCR,CRP">
//!   <search population="50" max_evaluations="10000"/>
//!   <method name="add_values">
//!     <num_tests>10</num_tests>
//!     <mrs>
//!       <mr name="addition" constant="2"/>
//!       <mr name="shuffle"/>
//!     </mrs>
//!     <source origin="random" seed="7"/>
//!     <source origin="weak_mutation"/>
//!   </method>
//! </mettester>
//! ```

use std::path::{Path, PathBuf};
use std::str::FromStr;

use roxmltree::{Document, Node};
use thiserror::Error;

use super::{ExperimentPlan, MethodPlan, SourceSpec, DEFAULT_NUM_TESTS};
use crate::corpus::{self, CorpusEntry};
use crate::dsl::DEFAULT_BUDGET;
use crate::mrengine::{MetamorphicRelation, MrKind};
use crate::mutation::MutationOperator;
use crate::testgen::{Provenance, SearchConfig};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: malformed xml: {message}")]
    Xml { line: u32, message: String },
    #[error("line {line}: {message}")]
    Schema { line: u32, message: String },
    #[error("line {line}: unknown metamorphic relation `{name}`")]
    UnknownMr { line: u32, name: String },
    #[error("line {line}: unknown method `{name}`")]
    UnknownMethod { line: u32, name: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Environment variable that replaces the config's master seed.
pub const SEED_ENV: &str = "MTW_SEED";

fn line_of(doc: &Document, n: Node) -> u32 {
    doc.text_pos_at(n.range().start).row
}

struct Ctx<'a, 'input> {
    doc: &'a Document<'input>,
}

impl<'a, 'input> Ctx<'a, 'input> {
    fn schema(&self, n: Node, message: impl Into<String>) -> ConfigError {
        ConfigError::Schema {
            line: line_of(self.doc, n),
            message: message.into(),
        }
    }

    fn check_attrs(&self, n: Node, allowed: &[&str]) -> Result<(), ConfigError> {
        match n.attributes().find(|a| !allowed.contains(&a.name())) {
            Some(a) => Err(self.schema(n, format!("unknown attribute `{}` on <{}>", a.name(), n.tag_name().name()))),
            None => Ok(()),
        }
    }

    fn parse_attr<T: FromStr>(&self, n: Node, name: &str) -> Result<Option<T>, ConfigError> {
        n.attribute(name)
            .map(|v| {
                v.trim()
                    .parse()
                    .map_err(|_| self.schema(n, format!("bad value `{v}` for `{name}`")))
            })
            .transpose()
    }

    fn elements(&self, n: Node<'a, 'input>) -> Result<Vec<Node<'a, 'input>>, ConfigError> {
        let mut out = Vec::new();
        for c in n.children() {
            if c.is_element() {
                out.push(c);
            } else if c.is_text() && !c.text().unwrap_or("").trim().is_empty() {
                return Err(self.schema(c, format!("unexpected text in <{}>", n.tag_name().name())));
            }
        }
        Ok(out)
    }
}

fn apply_search(ctx: &Ctx, n: Node, cfg: &mut SearchConfig) -> Result<(), ConfigError> {
    ctx.check_attrs(
        n,
        &[
            "population",
            "max_evaluations",
            "max_suite_size",
            "test_mutation_rate",
            "perturb_probability",
            "add_test_probability",
            "remove_test_probability",
            "crossover_rate",
            "tournament_size",
            "elitism",
            "step_budget",
        ],
    )?;
    macro_rules! field {
        ($($f:ident),*) => {
            $(if let Some(v) = ctx.parse_attr(n, stringify!($f))? { cfg.$f = v; })*
        };
    }
    field!(
        population,
        max_evaluations,
        max_suite_size,
        test_mutation_rate,
        perturb_probability,
        add_test_probability,
        remove_test_probability,
        crossover_rate,
        tournament_size,
        elitism,
        step_budget
    );
    cfg.validate().map_err(|e| ctx.schema(n, e.to_string()))
}

fn parse_method(ctx: &Ctx, n: Node, corpus: &[CorpusEntry]) -> Result<MethodPlan, ConfigError> {
    ctx.check_attrs(n, &["name"])?;
    let name = n.attribute("name").ok_or_else(|| ctx.schema(n, "<method> needs a `name`"))?;
    if corpus::find(corpus, name).is_none() {
        return Err(ConfigError::UnknownMethod {
            line: line_of(ctx.doc, n),
            name: name.to_string(),
        });
    }
    let mut num_tests = None;
    let mut mrs: Option<Vec<MetamorphicRelation>> = None;
    let mut sources = Vec::new();
    for c in ctx.elements(n)? {
        match c.tag_name().name() {
            "num_tests" => {
                ctx.check_attrs(c, &[])?;
                if num_tests.is_some() {
                    return Err(ctx.schema(c, "duplicate <num_tests>"));
                }
                let text = c.text().unwrap_or("").trim();
                let v: usize = text.parse().map_err(|_| ctx.schema(c, format!("bad test count `{text}`")))?;
                if v == 0 {
                    return Err(ctx.schema(c, "test count must be positive"));
                }
                num_tests = Some(v);
            }
            "mrs" => {
                ctx.check_attrs(c, &[])?;
                if mrs.is_some() {
                    return Err(ctx.schema(c, "duplicate <mrs>"));
                }
                let mut list = Vec::new();
                for m in ctx.elements(c)? {
                    if m.tag_name().name() != "mr" {
                        return Err(ctx.schema(m, format!("unknown element <{}> in <mrs>", m.tag_name().name())));
                    }
                    ctx.check_attrs(m, &["name", "constant"])?;
                    let mr_name = m.attribute("name").ok_or_else(|| ctx.schema(m, "<mr> needs a `name`"))?;
                    let kind = MrKind::from_str(mr_name).map_err(|_| ConfigError::UnknownMr {
                        line: line_of(ctx.doc, m),
                        name: mr_name.to_string(),
                    })?;
                    if list.iter().any(|x: &MetamorphicRelation| x.kind == kind) {
                        return Err(ctx.schema(m, format!("relation `{mr_name}` listed twice")));
                    }
                    let mut mr = MetamorphicRelation::new(kind);
                    if let Some(c) = ctx.parse_attr::<f64>(m, "constant")? {
                        if !c.is_finite() {
                            return Err(ctx.schema(m, "constant must be finite"));
                        }
                        mr = mr.with_constant(c);
                    }
                    list.push(mr);
                }
                if list.is_empty() {
                    return Err(ctx.schema(c, "<mrs> is empty"));
                }
                mrs = Some(list);
            }
            "source" => {
                ctx.check_attrs(c, &["origin", "seed", "path"])?;
                let origin = c.attribute("origin").ok_or_else(|| ctx.schema(c, "<source> needs an `origin`"))?;
                let origin = match Provenance::from_str(origin) {
                    Ok(p) if p != Provenance::Combined => p,
                    _ => return Err(ctx.schema(c, format!("unknown source origin `{origin}`"))),
                };
                if sources.iter().any(|s: &SourceSpec| s.origin == origin) {
                    return Err(ctx.schema(c, format!("source `{origin}` listed twice")));
                }
                let path = c.attribute("path").map(PathBuf::from);
                if (origin == Provenance::File) != path.is_some() {
                    return Err(ctx.schema(c, "`path` goes with, and only with, origin=\"file\""));
                }
                sources.push(SourceSpec {
                    origin,
                    seed: ctx.parse_attr(c, "seed")?,
                    path,
                });
            }
            other => return Err(ctx.schema(c, format!("unknown element <{other}> in <method>"))),
        }
    }
    let mrs = mrs.ok_or_else(|| ctx.schema(n, format!("method `{name}` has no <mrs>")))?;
    if sources.is_empty() {
        return Err(ctx.schema(n, format!("method `{name}` has no <source>")));
    }
    Ok(MethodPlan {
        name: name.to_string(),
        num_tests: num_tests.unwrap_or(DEFAULT_NUM_TESTS),
        mrs,
        sources,
    })
}

/// Parses a config against `corpus`. File-source paths are left as written.
pub fn parse_config(text: &str, corpus: &[CorpusEntry]) -> Result<ExperimentPlan, ConfigError> {
    let doc = Document::parse(text).map_err(|e| ConfigError::Xml {
        line: e.pos().row,
        message: e.to_string(),
    })?;
    let ctx = Ctx { doc: &doc };
    let root = doc.root_element();
    if root.tag_name().name() != "mettester" {
        return Err(ctx.schema(root, format!("root element is <{}>, expected <mettester>", root.tag_name().name())));
    }
    ctx.check_attrs(root, &["seed", "budget", "operators"])?;
    let seed = ctx.parse_attr(root, "seed")?.unwrap_or(0);
    let budget = ctx.parse_attr(root, "budget")?.unwrap_or(DEFAULT_BUDGET);
    if budget == 0 {
        return Err(ctx.schema(root, "budget must be positive"));
    }
    let operators = match root.attribute("operators") {
        None => MutationOperator::ALL.to_vec(),
        Some(list) => {
            let mut ops = Vec::new();
            for tok in list.split(',').map(str::trim).filter(|t| !t.is_empty()) {
                let op = MutationOperator::from_str(tok).map_err(|e| ctx.schema(root, e))?;
                if !ops.contains(&op) {
                    ops.push(op);
                }
            }
            if ops.is_empty() {
                return Err(ctx.schema(root, "operator list is empty"));
            }
            ops
        }
    };
    let mut search = SearchConfig::default();
    let mut seen_search = false;
    let mut methods = Vec::new();
    for c in ctx.elements(root)? {
        match c.tag_name().name() {
            "search" => {
                if std::mem::replace(&mut seen_search, true) {
                    return Err(ctx.schema(c, "duplicate <search>"));
                }
                apply_search(&ctx, c, &mut search)?;
            }
            "method" => {
                let m = parse_method(&ctx, c, corpus)?;
                if methods.iter().any(|x: &MethodPlan| x.name == m.name) {
                    return Err(ctx.schema(c, format!("method `{}` listed twice", m.name)));
                }
                methods.push(m);
            }
            other => return Err(ctx.schema(c, format!("unknown element <{other}> in <mettester>"))),
        }
    }
    if methods.is_empty() {
        return Err(ctx.schema(root, "config lists no <method>"));
    }
    Ok(ExperimentPlan {
        seed,
        budget,
        operators,
        search,
        methods,
    })
}

/// Reads a config file, resolves suite paths against its directory and
/// applies `MTW_SEED`.
pub fn load_config(path: &Path, corpus: &[CorpusEntry]) -> Result<ExperimentPlan, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut plan = parse_config(&text, corpus)?;
    let base = path.parent().unwrap_or(Path::new("."));
    for m in &mut plan.methods {
        for s in &mut m.sources {
            if let Some(p) = &mut s.path {
                if p.is_relative() {
                    *p = base.join(&*p);
                }
            }
        }
    }
    if let Ok(v) = std::env::var(SEED_ENV) {
        plan.seed = v.trim().parse().map_err(|_| ConfigError::Schema {
            line: 0,
            message: format!("{SEED_ENV}=`{v}` is not an unsigned integer"),
        })?;
    }
    Ok(plan)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn corpus() -> Vec<CorpusEntry> {
        corpus::load_corpus().unwrap()
    }

    const MINIMAL: &str = r#"<mettester seed="3">
  <method name="add_values">
    <num_tests>10</num_tests>
    <mrs><mr name="addition" constant="2"/></mrs>
    <source origin="random"/>
  </method>
</mettester>"#;

    #[test]
    fn minimal_config() {
        let plan = parse_config(MINIMAL, &corpus()).unwrap();
        assert_eq!(plan.seed, 3);
        assert_eq!(plan.budget, DEFAULT_BUDGET);
        assert_eq!(plan.operators, MutationOperator::ALL.to_vec());
        assert_eq!(plan.methods.len(), 1);
        let m = &plan.methods[0];
        assert_eq!((m.name.as_str(), m.num_tests), ("add_values", 10));
        assert_eq!(m.mrs, vec![MetamorphicRelation::new(MrKind::Addition)]);
        assert_eq!(m.sources[0].origin, Provenance::Random);
        plan.validate().unwrap();
    }

    #[test]
    fn unknown_relation_names_line() {
        let text = MINIMAL.replace("addition", "inversion");
        match parse_config(&text, &corpus()) {
            Err(ConfigError::UnknownMr { line, name }) => assert_eq!((line, name.as_str()), (4, "inversion")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_method() {
        let text = MINIMAL.replace("add_values", "quicksort");
        assert!(matches!(
            parse_config(&text, &corpus()),
            Err(ConfigError::UnknownMethod { line: 2, .. })
        ));
    }

    #[test]
    fn schema_errors() {
        let c = corpus();
        let bad = [
            (MINIMAL.replace("<num_tests>", "<count>").replace("</num_tests>", "</count>"), 3),
            (MINIMAL.replace("origin=\"random\"", "origin=\"combined\""), 5),
            (MINIMAL.replace("origin=\"random\"", "origin=\"random\" size=\"4\""), 5),
            (MINIMAL.replace(">10<", ">0<"), 3),
            (MINIMAL.replace("<source origin=\"random\"/>", ""), 2),
            (MINIMAL.replace("seed=\"3\"", "seed=\"x\""), 1),
            (MINIMAL.replace("<mettester", "<mettester operators=\"AOR,XYZ\""), 1),
            (MINIMAL.replace("origin=\"random\"", "origin=\"file\""), 5),
        ];
        for (text, want) in bad {
            match parse_config(&text, &c) {
                Err(ConfigError::Schema { line, .. }) => assert_eq!(line, want, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
        assert!(matches!(parse_config("<mettester>", &c), Err(ConfigError::Xml { .. })));
        assert!(matches!(
            parse_config("<mettester/>", &c),
            Err(ConfigError::Schema { line: 1, .. })
        ));
    }

    #[test]
    fn search_overrides() {
        let text = MINIMAL.replace(
            "<method",
            "<search population=\"20\" max_evaluations=\"500\" step_budget=\"1000\"/>\n  <method",
        );
        let plan = parse_config(&text, &corpus()).unwrap();
        assert_eq!(
            (plan.search.population, plan.search.max_evaluations, plan.search.step_budget),
            (20, 500, 1000)
        );
        let bad = MINIMAL.replace("<method", "<search population=\"0\"/>\n  <method");
        assert!(matches!(parse_config(&bad, &corpus()), Err(ConfigError::Schema { line: 2, .. })));
    }

    #[test]
    fn file_paths_resolve_against_config_dir() {
        let dir = tempfile::tempdir().unwrap();
        let text = MINIMAL.replace("origin=\"random\"", "origin=\"file\" path=\"s/add.jsonl\"");
        let p = dir.path().join("c.xml");
        std::fs::write(&p, text).unwrap();
        let plan = load_config(&p, &corpus()).unwrap();
        assert_eq!(plan.methods[0].sources[0].path.as_deref(), Some(dir.path().join("s/add.jsonl").as_path()));
        assert!(matches!(
            load_config(&dir.path().join("missing.xml"), &corpus()),
            Err(ConfigError::Io { .. })
        ));
    }
}
