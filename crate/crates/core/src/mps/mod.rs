//! MPS reading and MIPLIB 2017 style constraint classification.

mod classify;
mod filter;
mod parse;
mod rational;
mod write;

use std::collections::BTreeMap;
use std::fmt;

use num::BigRational;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use classify::classify_constraint;
pub use filter::{miplib_filter, FilterDecision, SolveSummary};
pub use parse::{parse_mps, parse_mps_str, parse_mps_with, ParseOptions};
pub use rational::{parse_decimal, rational_to_decimal};
pub use write::write_mps;

pub type Rational = BigRational;

#[derive(Debug, Error)]
pub enum MpsError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: unsupported section or feature `{section}`")]
    UnsupportedSection { line: usize, section: String },
    #[error("missing field `{0}`")]
    MissingField(&'static str),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VarKind {
    Continuous,
    Integer,
    Binary,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    /// `None` is minus infinity.
    pub lower: Option<Rational>,
    /// `None` is plus infinity.
    pub upper: Option<Rational>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sense {
    Le,
    Ge,
    Eq,
    /// An `N` row other than the objective.
    Free,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Constraint {
    pub name: String,
    pub sense: Sense,
    pub rhs: Rational,
    /// Raw value from the RANGES section, if any.
    pub range: Option<Rational>,
    pub terms: Vec<(usize, Rational)>,
}

impl Constraint {
    /// Finite sides `(lhs, rhs)` of the row, expanding RANGES per MPS convention.
    pub fn sides(&self) -> (Option<Rational>, Option<Rational>) {
        let b = self.rhs.clone();
        match (self.sense, &self.range) {
            (Sense::Free, _) => (None, None),
            (Sense::Le, None) => (None, Some(b)),
            (Sense::Ge, None) => (Some(b), None),
            (Sense::Eq, None) => (Some(b.clone()), Some(b)),
            (Sense::Le, Some(r)) => (Some(&b - num::Signed::abs(r)), Some(b)),
            (Sense::Ge, Some(r)) => (Some(b.clone()), Some(&b + num::Signed::abs(r))),
            (Sense::Eq, Some(r)) => {
                if num::Signed::is_negative(r) {
                    (Some(&b + r), Some(b))
                } else {
                    (Some(b.clone()), Some(&b + r))
                }
            }
        }
    }

    pub fn is_ranged(&self) -> bool {
        self.sense != Sense::Free
            && self.range.as_ref().is_some_and(|r| !(self.sense == Sense::Eq && num::Zero::is_zero(r)))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ObjSense {
    Min,
    Max,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Objective {
    pub name: String,
    pub sense: ObjSense,
    pub terms: Vec<(usize, Rational)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MilpInstance {
    pub name: String,
    pub variables: Vec<Variable>,
    pub constraints: Vec<Constraint>,
    pub objective: Objective,
    /// Sections skipped in lenient mode (SOS, indicators, ...).
    pub skipped_sections: Vec<String>,
}

impl MilpInstance {
    pub fn n(&self) -> usize {
        self.variables.len()
    }

    pub fn m(&self) -> usize {
        self.constraints.len()
    }
}

/// MIPLIB 2017 constraint categories, in classification order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ConstraintType {
    Empty,
    Free,
    Singleton,
    Aggregation,
    Precedence,
    VariableBound,
    SetPartitioning,
    SetPacking,
    SetCovering,
    Cardinality,
    InvariantKnapsack,
    EquationKnapsack,
    BinPacking,
    Knapsack,
    IntegerKnapsack,
    MixedBinary,
    GeneralLinear,
}

impl ConstraintType {
    pub const ALL: [ConstraintType; 17] = [
        ConstraintType::Empty,
        ConstraintType::Free,
        ConstraintType::Singleton,
        ConstraintType::Aggregation,
        ConstraintType::Precedence,
        ConstraintType::VariableBound,
        ConstraintType::SetPartitioning,
        ConstraintType::SetPacking,
        ConstraintType::SetCovering,
        ConstraintType::Cardinality,
        ConstraintType::InvariantKnapsack,
        ConstraintType::EquationKnapsack,
        ConstraintType::BinPacking,
        ConstraintType::Knapsack,
        ConstraintType::IntegerKnapsack,
        ConstraintType::MixedBinary,
        ConstraintType::GeneralLinear,
    ];

    /// Snake-case name used in reports and CSV headers.
    pub fn key(self) -> &'static str {
        match self {
            ConstraintType::Empty => "empty",
            ConstraintType::Free => "free",
            ConstraintType::Singleton => "singleton",
            ConstraintType::Aggregation => "aggregation",
            ConstraintType::Precedence => "precedence",
            ConstraintType::VariableBound => "variable_bound",
            ConstraintType::SetPartitioning => "set_partitioning",
            ConstraintType::SetPacking => "set_packing",
            ConstraintType::SetCovering => "set_covering",
            ConstraintType::Cardinality => "cardinality",
            ConstraintType::InvariantKnapsack => "invariant_knapsack",
            ConstraintType::EquationKnapsack => "equation_knapsack",
            ConstraintType::BinPacking => "bin_packing",
            ConstraintType::Knapsack => "knapsack",
            ConstraintType::IntegerKnapsack => "integer_knapsack",
            ConstraintType::MixedBinary => "mixed_binary",
            ConstraintType::GeneralLinear => "general_linear",
        }
    }

    /// Human-readable name used in prompts.
    pub fn label(self) -> &'static str {
        match self {
            ConstraintType::Empty => "empty",
            ConstraintType::Free => "free",
            ConstraintType::Singleton => "singleton",
            ConstraintType::Aggregation => "aggregation",
            ConstraintType::Precedence => "precedence",
            ConstraintType::VariableBound => "variable bound",
            ConstraintType::SetPartitioning => "set partitioning",
            ConstraintType::SetPacking => "set packing",
            ConstraintType::SetCovering => "set covering",
            ConstraintType::Cardinality => "cardinality",
            ConstraintType::InvariantKnapsack => "invariant knapsack",
            ConstraintType::EquationKnapsack => "equation knapsack",
            ConstraintType::BinPacking => "bin packing",
            ConstraintType::Knapsack => "knapsack",
            ConstraintType::IntegerKnapsack => "integer knapsack",
            ConstraintType::MixedBinary => "mixed binary",
            ConstraintType::GeneralLinear => "general linear",
        }
    }

    pub fn from_key(key: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|t| t.key() == key)
    }
}

impl fmt::Display for ConstraintType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructureHistogram {
    pub instance: String,
    /// Only types with a non-zero count are present.
    pub counts: BTreeMap<ConstraintType, usize>,
    pub n_vars: usize,
    pub n_constrs: usize,
    pub n_binary: usize,
    pub n_integer: usize,
    pub n_continuous: usize,
}

impl StructureHistogram {
    pub fn count(&self, tag: ConstraintType) -> usize {
        self.counts.get(&tag).copied().unwrap_or(0)
    }

    pub fn total(&self) -> usize {
        self.counts.values().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn csv_header() -> String {
        let mut cols = vec!["instance".to_string(), "n".into(), "m".into()];
        cols.extend(ConstraintType::ALL.iter().map(|t| t.key().to_string()));
        cols.join(",")
    }

    pub fn csv_row(&self) -> String {
        let mut cols = vec![self.instance.clone(), self.n_vars.to_string(), self.n_constrs.to_string()];
        cols.extend(ConstraintType::ALL.iter().map(|&t| self.count(t).to_string()));
        cols.join(",")
    }

    /// Plain-text report, one line per present type.
    pub fn report(&self) -> String {
        let mut out = format!(
            "instance: {}\nvariables: {} (binary {}, integer {}, continuous {})\nconstraints: {}\n",
            self.instance, self.n_vars, self.n_binary, self.n_integer, self.n_continuous, self.n_constrs
        );
        for (tag, count) in &self.counts {
            out.push_str(&format!("  {:<20} {count}\n", tag.key()));
        }
        out
    }
}

/// Classifies every row and counts variable kinds.
pub fn histogram(instance: &MilpInstance) -> StructureHistogram {
    let mut counts = BTreeMap::new();
    for c in &instance.constraints {
        *counts.entry(classify_constraint(c, &instance.variables)).or_insert(0) += 1;
    }
    let kind_count = |k: VarKind| instance.variables.iter().filter(|v| v.kind == k).count();
    StructureHistogram {
        instance: instance.name.clone(),
        counts,
        n_vars: instance.n(),
        n_constrs: instance.m(),
        n_binary: kind_count(VarKind::Binary),
        n_integer: kind_count(VarKind::Integer),
        n_continuous: kind_count(VarKind::Continuous),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn singleton_rows_histogram() {
        let text = "NAME s\nROWS\n N obj\n L a\n L b\n G c\nCOLUMNS\n x a 1 b 2\n x c 3\nRHS\n rhs a 1 b 2\nENDATA\n";
        let inst = parse_mps_str(text).unwrap();
        let h = histogram(&inst);
        assert_eq!(h.count(ConstraintType::Singleton), 3);
        assert_eq!(h.counts.len(), 1);
        assert_eq!(h.total(), 3);
    }

    #[test]
    fn csv_has_one_column_per_type() {
        let header = StructureHistogram::csv_header();
        assert_eq!(header.split(',').count(), 3 + 17);
        assert!(header.starts_with("instance,n,m,empty,free"));
    }

    #[test]
    fn ranged_row_sides() {
        let r = |n: i64| Rational::from_integer(n.into());
        let c = Constraint { name: "r".into(), sense: Sense::Le, rhs: r(5), range: Some(r(-2)), terms: vec![] };
        assert_eq!(c.sides(), (Some(r(3)), Some(r(5))));
        let c = Constraint { sense: Sense::Eq, range: Some(r(-2)), ..c };
        assert_eq!(c.sides(), (Some(r(3)), Some(r(5))));
        let c = Constraint { sense: Sense::Eq, range: Some(r(2)), ..c };
        assert_eq!(c.sides(), (Some(r(5)), Some(r(7))));
        let c = Constraint { sense: Sense::Ge, range: Some(r(-2)), ..c };
        assert_eq!(c.sides(), (Some(r(5)), Some(r(7))));
    }
}
