//! Aggregation of run reports into a human summary and CSV tables.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("no run reports under {0}")]
    MissingReport(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

fn field<'a>(line: &'a str, key: &str) -> Option<&'a str> {
    line.split_whitespace()
        .find_map(|tok| tok.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
}

/// Scan every run directory, print a per-run check summary, and write two
/// CSV tables next to the runs: eigenvalues.csv with the Gram spectrum per
/// run, and residuals.csv with each refinement-tracked metric keyed by
/// level.
pub fn summarize(out_dir: &Path) -> Result<(), ReportError> {
    let mut runs: Vec<_> = fs::read_dir(out_dir)
        .map_err(|_| ReportError::MissingReport(out_dir.display().to_string()))?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| {
            p.is_dir()
                && p.file_name()
                    .and_then(|n| n.to_str())
                    .is_some_and(|n| n.starts_with("run-"))
        })
        .collect();
    runs.sort();
    if runs.is_empty() {
        return Err(ReportError::MissingReport(out_dir.display().to_string()));
    }

    // metric name -> level -> (run, value); BTreeMap keeps output ordering
    // deterministic.
    let mut metrics: BTreeMap<String, BTreeMap<u32, (String, f64)>> = BTreeMap::new();
    let mut eigen_rows: Vec<(String, Vec<f64>)> = Vec::new();

    for run in &runs {
        let run_name = run.file_name().unwrap().to_string_lossy().to_string();
        println!("{run_name}");
        let mut files: Vec<_> = fs::read_dir(run)?
            .filter_map(|e| e.ok())
            .map(|e| e.path())
            .filter(|p| p.extension().is_some_and(|x| x == "txt"))
            .collect();
        files.sort();
        let mut passed = 0usize;
        let mut failed = 0usize;
        for file in &files {
            let text = fs::read_to_string(file)?;
            let mut level = 0u32;
            for line in text.lines() {
                if let Some(rest) = line.strip_prefix("level ") {
                    level = rest.trim().parse().unwrap_or(0);
                } else if line.starts_with("check ") {
                    let ok = field(line, "status") == Some("pass");
                    if ok {
                        passed += 1;
                    } else {
                        failed += 1;
                        println!("  FAIL {}", line.trim_start_matches("check "));
                    }
                } else if line.starts_with("metric ") {
                    if let (Some(name), Some(value)) = (field(line, "name"), field(line, "value")) {
                        if let Ok(v) = value.parse::<f64>() {
                            metrics
                                .entry(name.to_string())
                                .or_default()
                                .insert(level, (run_name.clone(), v));
                        }
                    }
                } else if line.starts_with("verdict signature") {
                    println!("  signature verdict {}", line.trim_start_matches("verdict signature "));
                } else if line.starts_with("eigenvalues") {
                    let vals: Vec<f64> = line
                        .split_whitespace()
                        .skip(1)
                        .filter_map(|t| t.parse().ok())
                        .collect();
                    if vals.len() == 16 {
                        eigen_rows.push((run_name.clone(), vals));
                    }
                }
            }
        }
        println!("  checks: {passed} passed, {failed} failed");
    }

    if !eigen_rows.is_empty() {
        let mut csv = String::from("run");
        for i in 0..16 {
            csv.push_str(&format!(",eig{i}"));
        }
        csv.push('\n');
        for (run, vals) in &eigen_rows {
            csv.push_str(run);
            for v in vals {
                csv.push_str(&format!(",{v:.12e}"));
            }
            csv.push('\n');
        }
        fs::write(out_dir.join("eigenvalues.csv"), csv)?;
        println!("wrote {}", out_dir.join("eigenvalues.csv").display());
    }

    let mut csv = String::from("metric,level,run,value\n");
    for (name, by_level) in &metrics {
        let series: Vec<_> = by_level.iter().collect();
        for (level, (run, v)) in &series {
            csv.push_str(&format!("{name},{level},{run},{v:.12e}\n"));
        }
        if series.len() >= 2 {
            let vals: Vec<f64> = series.iter().map(|(_, (_, v))| *v).collect();
            let monotone = vals.windows(2).all(|w| w[1] <= w[0]);
            println!(
                "metric {name}: levels {:?} values {:?}{}",
                series.iter().map(|(l, _)| **l).collect::<Vec<_>>(),
                vals,
                if monotone { " (decreasing)" } else { "" }
            );
        }
    }
    fs::write(out_dir.join("residuals.csv"), csv)?;
    println!("wrote {}", out_dir.join("residuals.csv").display());
    Ok(())
}
