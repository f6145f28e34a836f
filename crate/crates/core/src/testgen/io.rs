//! JSON-lines suite files: a header line, then one `{"fn", "args"}` object
//! per test.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Provenance, TestCase, TestSuite};
use crate::dsl::Value;

#[derive(Debug, Error)]
pub enum SuiteIoError {
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    #[serde(rename = "fn")]
    function: String,
    provenance: Provenance,
    seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    note: Option<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Line {
    #[serde(rename = "fn")]
    function: String,
    args: Vec<Value>,
}

pub fn write_suite<W: Write>(mut w: W, suite: &TestSuite) -> std::io::Result<()> {
    let header = Header {
        function: suite.function.clone(),
        provenance: suite.provenance,
        seed: suite.seed,
        note: suite.note.clone(),
    };
    writeln!(w, "{}", serde_json::to_string(&header)?)?;
    for t in &suite.tests {
        let line = Line {
            function: suite.function.clone(),
            args: t.args.clone(),
        };
        writeln!(w, "{}", serde_json::to_string(&line)?)?;
    }
    Ok(())
}

pub fn read_suite<R: BufRead>(r: R) -> Result<TestSuite, SuiteIoError> {
    let mut lines = r.lines().enumerate().filter_map(|(i, l)| match l {
        Ok(s) if s.trim().is_empty() => None,
        other => Some((i + 1, other)),
    });
    let bad = |line: usize, message: String| SuiteIoError::Format { line, message };
    let (n, first) = lines.next().ok_or_else(|| bad(1, "missing header line".into()))?;
    let header: Header = serde_json::from_str(&first?).map_err(|e| bad(n, e.to_string()))?;
    let mut tests = Vec::new();
    for (n, l) in lines {
        let line: Line = serde_json::from_str(&l?).map_err(|e| bad(n, e.to_string()))?;
        if line.function != header.function {
            return Err(bad(
                n,
                format!("test for `{}` in a suite for `{}`", line.function, header.function),
            ));
        }
        tests.push(TestCase::new(line.args));
    }
    Ok(TestSuite {
        function: header.function,
        tests,
        provenance: header.provenance,
        seed: header.seed,
        note: header.note,
    })
}
