use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn mtw(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mtw"))
        .args(args)
        .env_remove("MTW_SEED")
        .output()
        .unwrap()
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn generate_random_is_seeded() {
    let a = mtw(&["generate", "--fn", "add_values", "--criterion", "random", "--seed", "3", "--n", "4"]);
    let b = mtw(&["generate", "--fn", "add_values", "--criterion", "random", "--seed", "3", "--n", "4"]);
    assert!(a.status.success());
    assert_eq!(stdout(&a).lines().count(), 1 + 4);
    assert_eq!(a.stdout, b.stdout);
    let c = mtw(&["generate", "--fn", "add_values", "--criterion", "random", "--seed", "4", "--n", "4"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn generate_branch_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.jsonl");
    let o = mtw(&[
        "generate",
        "--fn",
        "bubble",
        "--criterion",
        "branch",
        "--seed",
        "1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(out).unwrap();
    assert!((2..=6).contains(&text.lines().count()));
}

#[test]
fn mutants_catalog_respects_operators() {
    let all = mtw(&["mutants", "--fn", "add_values"]);
    let aor = mtw(&["mutants", "--fn", "add_values", "--operators", "AOR"]);
    assert!(all.status.success() && aor.status.success());
    let rows = |o: &Output| stdout(o).lines().count() - 1;
    assert!(rows(&aor) > 0 && rows(&aor) < rows(&all));
    assert!(stdout(&aor).lines().skip(1).all(|l| l.contains("AOR")));
}

#[test]
fn mt_on_originals_has_no_violations_on_sums() {
    let cfg = configs().join("minimal.xml");
    let o = mtw(&["mt", "--config", cfg.to_str().unwrap()]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("fn,source,test,mr,verdict"));
    let rows: Vec<_> = lines.collect();
    assert_eq!(rows.len(), 10);
    assert!(rows.iter().all(|r| r.contains(",pass,")));
}

#[test]
fn experiment_then_markdown_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("minimal.xml");
    let o = mtw(&["experiment", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap(), "--jobs", "1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(dir.path().join("results.json").is_file());
    assert!(dir.path().join("table2.csv").is_file());
    let r = mtw(&["report", "--in", dir.path().to_str().unwrap(), "--format", "markdown"]);
    assert!(r.status.success());
    assert!(dir.path().join("table2.md").is_file());
}

#[test]
fn seed_env_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("minimal.xml");
    let run = |seed: Option<&str>| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_mtw"));
        c.args(["mt", "--config", cfg.to_str().unwrap()]).current_dir(dir.path());
        match seed {
            Some(s) => c.env("MTW_SEED", s),
            None => c.env_remove("MTW_SEED"),
        };
        c.output().unwrap()
    };
    let base = run(None);
    let same = run(Some("7"));
    let other = run(Some("8"));
    assert_eq!(base.stdout, same.stdout);
    assert_ne!(base.stdout, other.stdout);
}

#[test]
fn exit_codes() {
    assert_eq!(mtw(&["--help"]).status.code(), Some(0));
    assert_eq!(mtw(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(mtw(&["mutants", "--fn", "no_such_function"]).status.code(), Some(1));
    assert_eq!(mtw(&["mt", "--config", "/nonexistent/config.xml"]).status.code(), Some(1));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.xml");
    std::fs::write(
        &bad,
        r#"<mettester seed="1"><method name="add_values"><mrs><mr name="inversion"/></mrs><source origin="random"/></method></mettester>"#,
    )
    .unwrap();
    let o = mtw(&["mt", "--config", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("inversion"));
}
