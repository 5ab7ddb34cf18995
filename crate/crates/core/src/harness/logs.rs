//! Line grammars for solver logs.
//!
//! SCIP (output of `display statistics`):
//!
//! ```text
//! status    := "SCIP Status" ws ":" .* "[" reason "]"
//! time      := "Solving Time (sec)" ws ":" ws float
//! gap       := "Gap" ws ":" ws (float ws "%" | "infinite")
//! sep_head  := "Separators" ws ":" (ws column)+          ; must contain "Applied"
//! sep_row   := ws name ws ":" (ws (int | float | "-"))+  ; until a non-indented line
//! ```
//!
//! Gurobi (`gurobi_cl` log):
//!
//! ```text
//! status    := "Optimal solution found" .* | "Time limit reached" | "Work limit reached"
//!            | "Model is infeasible" .* | "Solution count" .*
//! explored  := "Explored" .* "in" ws float ws "seconds (" float ws "work units)"
//! best      := "Best objective" ws obj "," ws "best bound" ws obj "," ws "gap" ws (float "%" | "-")
//! cuts_head := "Cutting planes:"
//! cut_row   := ws name ":" ws int                       ; until a blank line
//! ```
//!
//! An infinite gap is reported as 1.0.

use std::collections::BTreeMap;
use std::sync::LazyLock;

use regex::Regex;

use super::SolveStatus;

/// Status, effort, gap, and per-separator applied-cut counts read from a log.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ParsedLog {
    pub status: Option<SolveStatus>,
    /// SCIP wall seconds or Gurobi work units.
    pub time: Option<f64>,
    pub gap: Option<f64>,
    /// Statistics row name → cuts applied.
    pub applied: BTreeMap<String, u64>,
}

static SCIP_STATUS: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^SCIP Status\s*:.*\[(.+)\]").unwrap());
static SCIP_TIME: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^Solving Time \(sec\)\s*:\s*([0-9.eE+-]+)").unwrap());
static SCIP_GAP: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^Gap\s*:\s*(infinite|[0-9.eE+-]+)\s*%?").unwrap());
static SCIP_SEP_HEAD: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^Separators\s*:(.*)$").unwrap());
static SCIP_ROW: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^\s+(\S(?:.*\S)?)\s*:(.*)$").unwrap());

static GRB_EXPLORED: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^Explored .* in ([0-9.eE+-]+) seconds \(([0-9.eE+-]+) work units\)").unwrap());
static GRB_BEST: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^Best objective .*, gap (-|[0-9.eE+-]+%)").unwrap());
static GRB_CUT: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^\s+(\S(?:.*\S)?):\s+(\d+)\s*$").unwrap());

fn parse_gap_percent(text: &str) -> Option<f64> {
    let t = text.trim().trim_end_matches('%');
    if t == "infinite" || t == "-" {
        return Some(1.0);
    }
    t.parse::<f64>().ok().map(|v| v / 100.0)
}

pub fn parse_scip_log(text: &str) -> ParsedLog {
    let mut out = ParsedLog::default();
    let mut applied_col: Option<usize> = None;
    for line in text.lines() {
        if let Some(col) = applied_col {
            if let Some(c) = SCIP_ROW.captures(line) {
                let name = c[1].to_string();
                let cells: Vec<&str> = c[2].split_whitespace().collect();
                if name != "cut pool" {
                    let value = cells.get(col).and_then(|v| v.parse::<u64>().ok()).unwrap_or(0);
                    out.applied.insert(name, value);
                }
                continue;
            }
            applied_col = None;
        }
        if let Some(c) = SCIP_STATUS.captures(line) {
            out.status = Some(match c[1].trim() {
                "optimal solution found" | "infeasible" | "unbounded" | "infeasible or unbounded" => {
                    SolveStatus::Optimal
                }
                "gap limit reached" => SolveStatus::GapLimit,
                "time limit reached" => SolveStatus::TimeLimit,
                _ => SolveStatus::Error,
            });
        } else if let Some(c) = SCIP_TIME.captures(line) {
            out.time = c[1].parse().ok();
        } else if let Some(c) = SCIP_GAP.captures(line) {
            out.gap = parse_gap_percent(&c[1]);
        } else if let Some(c) = SCIP_SEP_HEAD.captures(line) {
            applied_col = c[1].split_whitespace().position(|h| h == "Applied");
        }
    }
    out
}

pub fn parse_gurobi_log(text: &str) -> ParsedLog {
    let mut out = ParsedLog::default();
    let mut in_cuts = false;
    for line in text.lines() {
        if in_cuts {
            if let Some(c) = GRB_CUT.captures(line) {
                *out.applied.entry(c[1].to_string()).or_insert(0) += c[2].parse::<u64>().unwrap_or(0);
                continue;
            }
            in_cuts = false;
        }
        let trimmed = line.trim();
        if trimmed == "Cutting planes:" {
            in_cuts = true;
        } else if trimmed.starts_with("Optimal solution found") || trimmed.starts_with("Model is infeasible") {
            out.status = Some(SolveStatus::Optimal);
        } else if trimmed.starts_with("Time limit reached") || trimmed.starts_with("Work limit reached") {
            out.status = Some(SolveStatus::TimeLimit);
        } else if trimmed.starts_with("Interrupt request received") || trimmed.starts_with("Solve interrupted") {
            out.status = Some(SolveStatus::Error);
        } else if let Some(c) = GRB_EXPLORED.captures(trimmed) {
            out.time = c[2].parse().ok();
        } else if let Some(c) = GRB_BEST.captures(trimmed) {
            out.gap = parse_gap_percent(&c[1]);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const SCIP: &str = "\
presolving:
SCIP Status        : problem is solved [optimal solution found]
Solving Time (sec) : 12.34
Solving Nodes      : 17
Gap                : 0.00 %
Separators         :   ExecTime  SetupTime      Calls  RootCalls    Cutoffs    DomReds  FoundCuts ViaPoolAdd  DirectAdd    Applied ViaPoolApp  DirectApp      Conss
  cut pool         :       0.00          -         19         19          -          -        104          -          -          -          -          -          -
  aggregation      :       0.07       0.00         14         14          0          0         31         28          0         12         12          0          0
  clique           :       0.00       0.00          1          1          0          0          0          0          0          0          0          0          0
  gomory           :       0.02       0.00         14         14          0          0         88         60          0          5          5          0          0
Cutselectors       :   ExecTime  SetupTime      Calls  RootCalls    Selected     Forced   Filtered
  hybrid           :       0.00       0.00         20         20         36          0        140
";

    #[test]
    fn scip_summary() {
        let p = parse_scip_log(SCIP);
        assert_eq!(p.status, Some(SolveStatus::Optimal));
        assert_eq!(p.time, Some(12.34));
        assert_eq!(p.gap, Some(0.0));
        let want: BTreeMap<String, u64> =
            [("aggregation", 12), ("clique", 0), ("gomory", 5)].iter().map(|(k, v)| (k.to_string(), *v)).collect();
        assert_eq!(p.applied, want);
    }

    #[test]
    fn scip_limits() {
        let p = parse_scip_log(
            "SCIP Status        : solving was interrupted [time limit reached]\nGap                : infinite\n",
        );
        assert_eq!(p.status, Some(SolveStatus::TimeLimit));
        assert_eq!(p.gap, Some(1.0));
        let p = parse_scip_log(
            "SCIP Status        : solving was interrupted [gap limit reached]\nGap                : 8.50 %\n",
        );
        assert_eq!(p.status, Some(SolveStatus::GapLimit));
        assert!((p.gap.unwrap() - 0.085).abs() < 1e-12);
        assert_eq!(parse_scip_log("garbage").status, None);
    }

    #[test]
    fn gurobi_summary() {
        let log = "\
Cutting planes:
  Gomory: 3
  Cover: 7
  Zero half: 2

Explored 132 nodes (2051 simplex iterations) in 0.81 seconds (0.47 work units)
Thread count was 4 (of 8 available processors)

Solution count 2: 10 11

Optimal solution found (tolerance 1.00e-04)
Best objective 1.000000000000e+01, best bound 1.000000000000e+01, gap 0.0000%
";
        let p = parse_gurobi_log(log);
        assert_eq!(p.status, Some(SolveStatus::Optimal));
        assert_eq!(p.time, Some(0.47));
        assert_eq!(p.gap, Some(0.0));
        assert_eq!(p.applied.get("Zero half"), Some(&2));
        assert_eq!(p.applied.len(), 3);
    }

    #[test]
    fn gurobi_limits() {
        let log = "Explored 9 nodes (1 simplex iterations) in 9.00 seconds (5.00 work units)\n\
                   Work limit reached\nBest objective 1.2e+01, best bound 1.0e+01, gap 16.6667%\n";
        let p = parse_gurobi_log(log);
        assert_eq!(p.status, Some(SolveStatus::TimeLimit));
        assert_eq!(p.time, Some(5.0));
        assert!((p.gap.unwrap() - 0.166667).abs() < 1e-9);
        let p = parse_gurobi_log("Time limit reached\nBest objective -, best bound 1.0e+01, gap -\n");
        assert_eq!(p.gap, Some(1.0));
    }
}
