use num::Zero;

use super::rational::rational_to_decimal;
use super::{MilpInstance, ObjSense, Sense, VarKind};

/// Writes a free-format MPS document. Values are written as exact decimals.
///
/// Used to round-trip instances in tests; rows and columns keep their order.
pub fn write_mps(instance: &MilpInstance) -> String {
    let obj = if instance.objective.name.is_empty() { "obj" } else { instance.objective.name.as_str() };
    let mut out = format!("NAME {}\n", instance.name);
    if instance.objective.sense == ObjSense::Max {
        out.push_str("OBJSENSE\n    MAX\n");
    }
    out.push_str(&format!("ROWS\n N  {obj}\n"));
    for c in &instance.constraints {
        let kind = match c.sense {
            Sense::Le => "L",
            Sense::Ge => "G",
            Sense::Eq => "E",
            Sense::Free => "N",
        };
        out.push_str(&format!(" {kind}  {}\n", c.name));
    }

    // Column-major view of the row terms.
    let mut columns: Vec<Vec<(&str, String)>> = vec![Vec::new(); instance.variables.len()];
    for (j, a) in &instance.objective.terms {
        columns[*j].push((obj, rational_to_decimal(a)));
    }
    for c in &instance.constraints {
        for (j, a) in &c.terms {
            columns[*j].push((&c.name, rational_to_decimal(a)));
        }
    }

    out.push_str("COLUMNS\n");
    let mut in_marker = false;
    for (var, entries) in instance.variables.iter().zip(&columns) {
        let integral = var.kind != VarKind::Continuous;
        if integral != in_marker {
            let tag = if integral { "INTORG" } else { "INTEND" };
            out.push_str(&format!("    MARKER  'MARKER'  '{tag}'\n"));
            in_marker = integral;
        }
        if entries.is_empty() {
            out.push_str(&format!("    {}  {obj}  0\n", var.name));
        }
        for (row, value) in entries {
            out.push_str(&format!("    {}  {row}  {value}\n", var.name));
        }
    }
    if in_marker {
        out.push_str("    MARKER  'MARKER'  'INTEND'\n");
    }

    out.push_str("RHS\n");
    for c in &instance.constraints {
        if !c.rhs.is_zero() {
            out.push_str(&format!("    RHS  {}  {}\n", c.name, rational_to_decimal(&c.rhs)));
        }
    }
    if instance.constraints.iter().any(|c| c.range.is_some()) {
        out.push_str("RANGES\n");
        for c in &instance.constraints {
            if let Some(r) = &c.range {
                out.push_str(&format!("    RNG  {}  {}\n", c.name, rational_to_decimal(r)));
            }
        }
    }

    out.push_str("BOUNDS\n");
    for var in &instance.variables {
        let name = &var.name;
        if var.kind == VarKind::Binary {
            out.push_str(&format!(" BV BND  {name}\n"));
            continue;
        }
        match (&var.lower, &var.upper) {
            (None, None) => out.push_str(&format!(" FR BND  {name}\n")),
            (Some(l), Some(u)) if l == u => out.push_str(&format!(" FX BND  {name}  {}\n", rational_to_decimal(l))),
            (lower, upper) => {
                // Upper first: a negative upper bound resets a zero lower bound.
                if let Some(u) = upper {
                    out.push_str(&format!(" UP BND  {name}  {}\n", rational_to_decimal(u)));
                }
                match lower {
                    None => out.push_str(&format!(" MI BND  {name}\n")),
                    Some(l) if !l.is_zero() || upper.as_ref().is_some_and(|u| u < &num::BigRational::zero()) => {
                        out.push_str(&format!(" LO BND  {name}  {}\n", rational_to_decimal(l)));
                    }
                    Some(_) => {}
                }
            }
        }
    }
    out.push_str("ENDATA\n");
    out
}
