use serde::{Deserialize, Serialize};

use super::MpsError;

/// Gap above which an instance is considered too hard after the probe solve.
pub const MAX_GAP_AFTER_PROBE: f64 = 0.10;
/// Default solves faster than this (work units) are considered too easy.
pub const MIN_DEFAULT_WORK_UNITS: f64 = 1.0;

/// Per-instance outcome of the probe solves used to filter a benchmark library.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveSummary {
    pub instance: String,
    pub feasible: Option<bool>,
    pub solved_in_presolve: Option<bool>,
    /// Primal-dual gap (fraction) after the 300 s probe.
    pub gap_after_probe: Option<f64>,
    /// Default-configuration solve effort in work units.
    pub default_work_units: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FilterDecision {
    pub keep: bool,
    pub reason: Option<String>,
}

impl FilterDecision {
    fn drop(reason: &str) -> Self {
        FilterDecision { keep: false, reason: Some(reason.to_string()) }
    }
}

/// Drops infeasible, presolve-solved, too-hard (gap > 10 % after the probe)
/// and too-easy (< 1 work unit) instances. Rules are checked in that order.
pub fn miplib_filter(stats: &SolveSummary) -> Result<FilterDecision, MpsError> {
    let feasible = stats.feasible.ok_or(MpsError::MissingField("feasible"))?;
    let presolved = stats.solved_in_presolve.ok_or(MpsError::MissingField("solved_in_presolve"))?;
    let gap = stats.gap_after_probe.ok_or(MpsError::MissingField("gap_after_probe"))?;
    let work = stats.default_work_units.ok_or(MpsError::MissingField("default_work_units"))?;

    if !feasible {
        return Ok(FilterDecision::drop("infeasible"));
    }
    if presolved {
        return Ok(FilterDecision::drop("solved in presolve"));
    }
    if gap > MAX_GAP_AFTER_PROBE {
        return Ok(FilterDecision::drop("gap>10%"));
    }
    if work < MIN_DEFAULT_WORK_UNITS {
        return Ok(FilterDecision::drop("too easy"));
    }
    Ok(FilterDecision { keep: true, reason: None })
}
