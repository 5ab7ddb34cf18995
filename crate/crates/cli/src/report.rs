//! Comparison tables over evaluation artifacts.
//!
//! Cells read `median (IQR)` with two decimals. CSV cells use the shortest
//! representation that parses back to the same `f64`.

use std::collections::{BTreeMap, BTreeSet};

use sepconf::harness::{gap_comparison, EvalRecord};

use crate::artifacts::EvalArtifact;
use crate::error::{CliError, CliResult};

fn instance_ids(a: &EvalArtifact) -> BTreeSet<&str> {
    let e = &a.evaluation;
    e.records.iter().map(|r| r.instance.as_str()).chain(e.failures.iter().map(|f| f.instance.as_str())).collect()
}

/// Every artifact must cover the same instances.
pub fn check_schema(artifacts: &[EvalArtifact]) -> CliResult<Vec<String>> {
    let first = artifacts.first().ok_or_else(|| CliError::usage("report needs at least one artifact"))?;
    let ids = instance_ids(first);
    for a in &artifacts[1..] {
        let other = instance_ids(a);
        if other != ids {
            let only_first: Vec<&str> = ids.difference(&other).copied().collect();
            let only_other: Vec<&str> = other.difference(&ids).copied().collect();
            return Err(CliError::SchemaMismatch(format!(
                "'{}' vs '{}': only in first {only_first:?}, only in second {only_other:?}",
                first.label, a.label
            )));
        }
    }
    Ok(ids.into_iter().map(String::from).collect())
}

pub fn median_iqr_cell(median: f64, iqr: f64) -> String {
    format!("{median:.2} ({iqr:.2})")
}

fn rows(artifacts: &[EvalArtifact], gap: bool) -> Vec<(String, Vec<String>)> {
    let mut out = vec![
        ("Improvement (%)".to_string(), Vec::new()),
        ("Solved".to_string(), Vec::new()),
        ("Censored".to_string(), Vec::new()),
    ];
    for a in artifacts {
        let total = instance_ids(a).len();
        match &a.summary {
            Some(s) => {
                out[0].1.push(median_iqr_cell(s.median, s.iqr));
                out[1].1.push(format!("{}/{total}", s.solved));
                out[2].1.push(s.censored.to_string());
            }
            None => {
                out[0].1.push("n/a".into());
                out[1].1.push(format!("0/{total}"));
                out[2].1.push("0".into());
            }
        }
    }
    if gap {
        // Relative to the first column; positive means the column closes more gap.
        let reference = &artifacts[0].evaluation.records;
        let cells = artifacts
            .iter()
            .enumerate()
            .map(|(i, a)| match i {
                0 => "-".to_string(),
                _ => gap_comparison(reference, &a.evaluation.records)
                    .map(|v| format!("{v:.2}"))
                    .unwrap_or_else(|_| "n/a".into()),
            })
            .collect();
        out.push(("MIP gap difference (%)".to_string(), cells));
    }
    out
}

pub fn render_table(artifacts: &[EvalArtifact], gap: bool) -> CliResult<String> {
    check_schema(artifacts)?;
    let header: Vec<String> =
        std::iter::once("Metric".to_string()).chain(artifacts.iter().map(|a| a.label.clone())).collect();
    let body: Vec<Vec<String>> =
        rows(artifacts, gap).into_iter().map(|(name, cells)| std::iter::once(name).chain(cells).collect()).collect();
    let widths: Vec<usize> = (0..header.len())
        .map(|c| std::iter::once(&header).chain(&body).map(|r| r[c].chars().count()).max().unwrap_or(0))
        .collect();
    let line = |r: &Vec<String>| {
        let cells: Vec<String> = r.iter().zip(&widths).map(|(s, w)| format!("{s:<w$}")).collect();
        cells.join(" | ").trim_end().to_string()
    };
    let mut text = line(&header);
    text.push('\n');
    text.push_str(&widths.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>().join("-|-"));
    text.push('\n');
    for r in &body {
        text.push_str(&line(r));
        text.push('\n');
    }
    Ok(text)
}

/// One row per instance; columns per artifact label.
pub fn render_csv(artifacts: &[EvalArtifact]) -> CliResult<String> {
    let ids = check_schema(artifacts)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["instance".to_string()];
    for a in artifacts {
        for field in ["improvement", "censored", "solved", "t_default", "t_config", "gap_config"] {
            header.push(format!("{}_{field}", a.label));
        }
    }
    w.write_record(&header).map_err(CliError::failure)?;
    let indexed: Vec<BTreeMap<&str, &EvalRecord>> =
        artifacts.iter().map(|a| a.evaluation.records.iter().map(|r| (r.instance.as_str(), r)).collect()).collect();
    for id in &ids {
        let mut row = vec![id.clone()];
        for records in &indexed {
            match records.get(id.as_str()) {
                Some(r) => row.extend([
                    r.improvement.to_string(),
                    r.censored.to_string(),
                    r.solved_config.to_string(),
                    r.t_default.to_string(),
                    r.t_config.to_string(),
                    r.gap_config.to_string(),
                ]),
                None => row.extend(std::iter::repeat_n(String::new(), 6)),
            }
        }
        w.write_record(&row).map_err(CliError::failure)?;
    }
    let bytes = w.into_inner().map_err(CliError::failure)?;
    String::from_utf8(bytes).map_err(CliError::failure)
}

/// Per-instance records of one evaluation.
pub fn evaluation_csv(records: &[EvalRecord]) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "instance",
        "t_default",
        "t_config",
        "improvement",
        "censored",
        "gap_default",
        "gap_config",
        "solved_default",
        "solved_config",
        "timeouts",
    ])
    .map_err(CliError::failure)?;
    for r in records {
        w.write_record([
            r.instance.clone(),
            r.t_default.to_string(),
            r.t_config.to_string(),
            r.improvement.to_string(),
            r.censored.to_string(),
            r.gap_default.to_string(),
            r.gap_config.to_string(),
            r.solved_default.to_string(),
            r.solved_config.to_string(),
            r.timeouts.to_string(),
        ])
        .map_err(CliError::failure)?;
    }
    let bytes = w.into_inner().map_err(CliError::failure)?;
    String::from_utf8(bytes).map_err(CliError::failure)
}
