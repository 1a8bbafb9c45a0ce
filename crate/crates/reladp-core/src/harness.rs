//! Benchmark harness: runs the prover over a directory of `.trs` files and
//! aggregates verdicts, wall times and a CSV report.

use std::fmt;
use std::fs;
use std::io;
use std::path::Path;
use std::time::Instant;

use crate::parse::parse_relative_trs;
use crate::proof::Verdict;
use crate::prover::{prove, ProverConfig};

/// Outcome for one benchmark file.
#[derive(Clone, Debug)]
pub struct BenchEntry {
    pub file: String,
    pub verdict: Option<Verdict>,
    pub error: Option<String>,
    pub seconds: f64,
}

impl BenchEntry {
    fn verdict_text(&self) -> String {
        match (&self.verdict, &self.error) {
            (Some(v), _) => v.to_string(),
            (None, Some(_)) => "ERROR".into(),
            (None, None) => "-".into(),
        }
    }
}

/// Aggregated results over a corpus directory.
#[derive(Clone, Debug, Default)]
pub struct BenchReport {
    pub entries: Vec<BenchEntry>,
    pub yes: usize,
    pub no: usize,
    pub maybe: usize,
    pub errors: usize,
    pub average_seconds: f64,
}

impl BenchReport {
    /// CSV with a header line: file, verdict, seconds, message.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("file,verdict,seconds,message\n");
        for entry in &self.entries {
            let message = entry.error.clone().unwrap_or_default().replace(',', ";");
            out.push_str(&format!(
                "{},{},{:.3},{}\n",
                entry.file,
                entry.verdict_text(),
                entry.seconds,
                message
            ));
        }
        out
    }
}

impl fmt::Display for BenchReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self
            .entries
            .iter()
            .map(|e| e.file.len())
            .max()
            .unwrap_or(4)
            .max(4);
        writeln!(f, "{:width$}  {:6}  {:>8}", "file", "result", "time")?;
        for entry in &self.entries {
            writeln!(
                f,
                "{:width$}  {:6}  {:>7.3}s",
                entry.file,
                entry.verdict_text(),
                entry.seconds
            )?;
        }
        writeln!(
            f,
            "YES: {}  NO: {}  MAYBE: {}  ERROR: {}  avg: {:.3}s",
            self.yes, self.no, self.maybe, self.errors, self.average_seconds
        )
    }
}

/// Proves every `.trs` file in `dir` (sorted by name).  Unreadable or
/// unparsable files are reported per entry and the run continues.
pub fn run_benchmark(dir: &Path, config: &ProverConfig) -> io::Result<BenchReport> {
    let mut files: Vec<_> = fs::read_dir(dir)?
        .filter_map(|entry| entry.ok())
        .map(|entry| entry.path())
        .filter(|path| path.extension().is_some_and(|ext| ext == "trs"))
        .collect();
    files.sort();

    let mut report = BenchReport::default();
    let mut total = 0.0;
    for path in files {
        let name = path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        let started = Instant::now();
        let outcome = fs::read_to_string(&path)
            .map_err(|e| e.to_string())
            .and_then(|text| parse_relative_trs(&text).map_err(|e| e.to_string()))
            .map(|trs| prove(&trs, config));
        let seconds = started.elapsed().as_secs_f64();
        total += seconds;
        match outcome {
            Ok(result) => {
                match result.verdict {
                    Verdict::Yes => report.yes += 1,
                    Verdict::No => report.no += 1,
                    Verdict::Maybe => report.maybe += 1,
                }
                report.entries.push(BenchEntry {
                    file: name,
                    verdict: Some(result.verdict),
                    error: None,
                    seconds,
                });
            }
            Err(message) => {
                report.errors += 1;
                report.entries.push(BenchEntry {
                    file: name,
                    verdict: None,
                    error: Some(message),
                    seconds,
                });
            }
        }
    }
    if !report.entries.is_empty() {
        report.average_seconds = total / report.entries.len() as f64;
    }
    Ok(report)
}
