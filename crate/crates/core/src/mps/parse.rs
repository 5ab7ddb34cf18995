use std::collections::HashMap;
use std::io::Read;
use std::path::Path;

use num::{Signed, Zero};

use super::rational::parse_decimal;
use super::{Constraint, MilpInstance, MpsError, ObjSense, Objective, Rational, Sense, VarKind, Variable};

/// Values at or beyond this magnitude are read as infinite bounds.
const INFINITY_THRESHOLD: f64 = 1e20;

const UNSUPPORTED: &[&str] = &[
    "SOS",
    "SETS",
    "INDICATORS",
    "QUADOBJ",
    "QMATRIX",
    "QSECTION",
    "QCMATRIX",
    "CSECTION",
    "PWLOBJ",
    "GENCONS",
    "SCENARIOS",
    "CONE",
];

#[derive(Clone, Debug, Default)]
pub struct ParseOptions {
    /// Skip unsupported sections (recording them on the instance) instead of failing.
    pub skip_unsupported: bool,
}

pub fn parse_mps(path: impl AsRef<Path>) -> Result<MilpInstance, MpsError> {
    parse_mps_with(path, &ParseOptions::default())
}

/// Reads an MPS file, transparently decompressing gzip input.
pub fn parse_mps_with(path: impl AsRef<Path>, options: &ParseOptions) -> Result<MilpInstance, MpsError> {
    let path = path.as_ref();
    let io_err = |source| MpsError::Io { path: path.display().to_string(), source };
    let bytes = std::fs::read(path).map_err(io_err)?;
    let text = if bytes.starts_with(&[0x1f, 0x8b]) {
        let mut out = String::new();
        flate2::read::MultiGzDecoder::new(&bytes[..]).read_to_string(&mut out).map_err(io_err)?;
        out
    } else {
        String::from_utf8(bytes).map_err(|e| io_err(std::io::Error::new(std::io::ErrorKind::InvalidData, e)))?
    };
    let mut instance = parse_text(&text, options)?;
    if instance.name.is_empty() {
        instance.name = instance_name_from_path(path);
    }
    Ok(instance)
}

pub fn parse_mps_str(text: &str) -> Result<MilpInstance, MpsError> {
    parse_text(text, &ParseOptions::default())
}

fn instance_name_from_path(path: &Path) -> String {
    let file = path.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default();
    let mut name = file.as_str();
    for ext in [".gz", ".mps", ".MPS", ".free", ".fixed"] {
        name = name.strip_suffix(ext).unwrap_or(name);
    }
    name.to_string()
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Section {
    None,
    Rows,
    Columns,
    Rhs,
    Ranges,
    Bounds,
    ObjSense,
    Skipped,
}

struct Builder {
    name: String,
    obj_name: Option<String>,
    obj_sense: ObjSense,
    obj_terms: Vec<(usize, Rational)>,
    rows: Vec<Constraint>,
    row_index: HashMap<String, usize>,
    vars: Vec<Variable>,
    var_index: HashMap<String, usize>,
    in_integer_block: bool,
    rhs_set: Option<String>,
    range_set: Option<String>,
    bound_set: Option<String>,
    skipped: Vec<String>,
}

enum RowRef {
    Objective,
    Row(usize),
}

fn perr(line: usize, message: impl Into<String>) -> MpsError {
    MpsError::Parse { line, message: message.into() }
}

fn number(line: usize, token: &str) -> Result<Rational, MpsError> {
    let lower = token.to_ascii_lowercase();
    if matches!(lower.trim_start_matches(['+', '-']), "inf" | "infinity") {
        // Callers that accept infinities check the float value first.
        return Err(perr(line, format!("infinite value `{token}` not allowed here")));
    }
    parse_decimal(token).ok_or_else(|| perr(line, format!("invalid number `{token}`")))
}

/// Parses a bound value; `None` is an infinite value with the returned sign.
fn bound_value(line: usize, token: &str) -> Result<Result<Rational, bool>, MpsError> {
    let lower = token.to_ascii_lowercase();
    let negative = lower.starts_with('-');
    if matches!(lower.trim_start_matches(['+', '-']), "inf" | "infinity") {
        return Ok(Err(negative));
    }
    let value = number(line, token)?;
    let approx: f64 = token.parse().unwrap_or(0.0);
    if approx.abs() >= INFINITY_THRESHOLD {
        return Ok(Err(value.is_negative()));
    }
    Ok(Ok(value))
}

impl Builder {
    fn row(&self, line: usize, name: &str) -> Result<RowRef, MpsError> {
        if self.obj_name.as_deref() == Some(name) {
            return Ok(RowRef::Objective);
        }
        self.row_index.get(name).map(|&i| RowRef::Row(i)).ok_or_else(|| perr(line, format!("unknown row `{name}`")))
    }

    fn var(&self, line: usize, name: &str) -> Result<usize, MpsError> {
        self.var_index.get(name).copied().ok_or_else(|| perr(line, format!("unknown column `{name}`")))
    }

    fn rows_line(&mut self, line: usize, tokens: &[&str]) -> Result<(), MpsError> {
        let [kind, name] = tokens else {
            return Err(perr(line, "ROWS entries need a type and a name"));
        };
        let sense = match kind.to_ascii_uppercase().as_str() {
            "N" if self.obj_name.is_none() => {
                self.obj_name = Some(name.to_string());
                return Ok(());
            }
            "N" => Sense::Free,
            "L" => Sense::Le,
            "G" => Sense::Ge,
            "E" => Sense::Eq,
            other => return Err(perr(line, format!("unknown row type `{other}`"))),
        };
        if self.row_index.contains_key(*name) || self.obj_name.as_deref() == Some(name) {
            return Err(perr(line, format!("duplicate row `{name}`")));
        }
        self.row_index.insert(name.to_string(), self.rows.len());
        self.rows.push(Constraint {
            name: name.to_string(),
            sense,
            rhs: Rational::zero(),
            range: None,
            terms: Vec::new(),
        });
        Ok(())
    }

    fn columns_line(&mut self, line: usize, tokens: &[&str]) -> Result<(), MpsError> {
        if tokens.len() >= 3 && tokens[1].trim_matches('\'').eq_ignore_ascii_case("MARKER") {
            match tokens[2].trim_matches('\'').to_ascii_uppercase().as_str() {
                "INTORG" => self.in_integer_block = true,
                "INTEND" => self.in_integer_block = false,
                other => return Err(perr(line, format!("unknown marker `{other}`"))),
            }
            return Ok(());
        }
        if tokens.len() != 3 && tokens.len() != 5 {
            return Err(perr(line, format!("COLUMNS entry has {} fields", tokens.len())));
        }
        let col = tokens[0];
        let idx = match self.var_index.get(col) {
            Some(&i) => i,
            None => {
                let kind = if self.in_integer_block { VarKind::Integer } else { VarKind::Continuous };
                self.var_index.insert(col.to_string(), self.vars.len());
                self.vars.push(Variable { name: col.to_string(), kind, lower: Some(Rational::zero()), upper: None });
                self.vars.len() - 1
            }
        };
        for pair in tokens[1..].chunks(2) {
            let value = number(line, pair[1])?;
            match self.row(line, pair[0])? {
                RowRef::Objective => self.obj_terms.push((idx, value)),
                RowRef::Row(r) => self.rows[r].terms.push((idx, value)),
            }
        }
        Ok(())
    }

    /// RHS and RANGES share a layout: optional set name, then row/value pairs.
    fn pairs<'t>(
        line: usize,
        tokens: &'t [&'t str],
        current_set: &mut Option<String>,
    ) -> Result<Option<&'t [&'t str]>, MpsError> {
        let (set, rest) = match tokens.len() {
            2 | 4 => (None, tokens),
            3 | 5 => (Some(tokens[0]), &tokens[1..]),
            n => return Err(perr(line, format!("expected row/value pairs, got {n} fields"))),
        };
        if let Some(set) = set {
            match current_set {
                None => *current_set = Some(set.to_string()),
                Some(existing) if existing != set => return Ok(None),
                _ => {}
            }
        }
        Ok(Some(rest))
    }

    fn rhs_line(&mut self, line: usize, tokens: &[&str]) -> Result<(), MpsError> {
        let mut set = self.rhs_set.take();
        let pairs = Self::pairs(line, tokens, &mut set)?;
        self.rhs_set = set;
        let Some(pairs) = pairs else { return Ok(()) };
        for pair in pairs.chunks(2) {
            let value = number(line, pair[1])?;
            match self.row(line, pair[0])? {
                // Objective constants do not affect structure.
                RowRef::Objective => {}
                RowRef::Row(r) => self.rows[r].rhs = value,
            }
        }
        Ok(())
    }

    fn ranges_line(&mut self, line: usize, tokens: &[&str]) -> Result<(), MpsError> {
        let mut set = self.range_set.take();
        let pairs = Self::pairs(line, tokens, &mut set)?;
        self.range_set = set;
        let Some(pairs) = pairs else { return Ok(()) };
        for pair in pairs.chunks(2) {
            let value = number(line, pair[1])?;
            match self.row(line, pair[0])? {
                RowRef::Objective => return Err(perr(line, "RANGES entry on the objective row")),
                RowRef::Row(r) => {
                    if self.rows[r].sense == Sense::Free {
                        return Err(perr(line, "RANGES entry on a free row"));
                    }
                    self.rows[r].range = Some(value);
                }
            }
        }
        Ok(())
    }

    fn bounds_line(&mut self, line: usize, tokens: &[&str]) -> Result<(), MpsError> {
        let kind = tokens.first().map(|t| t.to_ascii_uppercase()).unwrap_or_default();
        let needs_value = matches!(kind.as_str(), "UP" | "LO" | "FX" | "LI" | "UI");
        let (set, col, value) = match (needs_value, tokens.len()) {
            (true, 4) => (Some(tokens[1]), tokens[2], Some(tokens[3])),
            (true, 3) => (None, tokens[1], Some(tokens[2])),
            (false, 4) => (Some(tokens[1]), tokens[2], Some(tokens[3])),
            (false, 3) if self.var_index.contains_key(tokens[1]) && !self.var_index.contains_key(tokens[2]) => {
                (None, tokens[1], Some(tokens[2]))
            }
            (false, 3) => (Some(tokens[1]), tokens[2], None),
            (false, 2) => (None, tokens[1], None),
            (_, n) => return Err(perr(line, format!("BOUNDS entry has {n} fields"))),
        };
        if let Some(set) = set {
            match &self.bound_set {
                None => self.bound_set = Some(set.to_string()),
                Some(existing) if existing != set => return Ok(()),
                _ => {}
            }
        }
        let idx = self.var(line, col)?;
        let value = value.map(|v| bound_value(line, v)).transpose()?;
        let finite = |v: &Option<Result<Rational, bool>>| -> Result<Option<Rational>, MpsError> {
            match v {
                Some(Ok(x)) => Ok(Some(x.clone())),
                Some(Err(true)) => Ok(None),
                Some(Err(false)) => Ok(None),
                None => Err(perr(line, format!("bound type {kind} needs a value"))),
            }
        };
        let var = &mut self.vars[idx];
        match kind.as_str() {
            "UP" | "UI" => {
                if kind == "UI" {
                    var.kind = VarKind::Integer;
                }
                let upper = match &value {
                    Some(Err(true)) => {
                        return Err(perr(line, "upper bound of minus infinity"));
                    }
                    v => finite(v)?,
                };
                if let Some(u) = &upper {
                    if u.is_negative() && var.lower.as_ref().is_some_and(|l| l.is_zero()) {
                        log::warn!(
                            "line {line}: negative upper bound on `{col}` with zero lower bound; lower set to -inf"
                        );
                        var.lower = None;
                    }
                }
                var.upper = upper;
            }
            "LO" | "LI" => {
                if kind == "LI" {
                    var.kind = VarKind::Integer;
                }
                var.lower = match &value {
                    Some(Err(false)) => return Err(perr(line, "lower bound of plus infinity")),
                    v => finite(v)?,
                };
            }
            "FX" => {
                let v = finite(&value)?.ok_or_else(|| perr(line, "infinite fixed bound"))?;
                var.lower = Some(v.clone());
                var.upper = Some(v);
            }
            "FR" => {
                var.lower = None;
                var.upper = None;
            }
            "MI" => var.lower = None,
            "PL" => var.upper = None,
            "BV" => {
                var.kind = VarKind::Integer;
                var.lower = Some(Rational::zero());
                var.upper = Some(Rational::from_integer(1.into()));
            }
            "SC" => return Err(MpsError::UnsupportedSection { line, section: "semi-continuous bound (SC)".into() }),
            other => return Err(perr(line, format!("unknown bound type `{other}`"))),
        }
        Ok(())
    }

    fn finish(mut self) -> Result<MilpInstance, MpsError> {
        for var in &mut self.vars {
            if let (Some(l), Some(u)) = (&var.lower, &var.upper) {
                if l > u {
                    return Err(perr(0, format!("variable `{}` has lower bound above upper bound", var.name)));
                }
            }
            if var.kind == VarKind::Integer
                && var.lower.as_ref().is_some_and(|l| l.is_zero())
                && var.upper.as_ref().is_some_and(|u| *u == Rational::from_integer(1.into()))
            {
                var.kind = VarKind::Binary;
            }
        }
        for row in &mut self.rows {
            row.terms = merge_terms(std::mem::take(&mut row.terms));
        }
        Ok(MilpInstance {
            name: self.name,
            variables: self.vars,
            constraints: self.rows,
            objective: Objective {
                name: self.obj_name.unwrap_or_default(),
                sense: self.obj_sense,
                terms: merge_terms(self.obj_terms),
            },
            skipped_sections: self.skipped,
        })
    }
}

/// Sums duplicate column entries, drops exact zeros, and orders terms by column.
fn merge_terms(terms: Vec<(usize, Rational)>) -> Vec<(usize, Rational)> {
    let mut order: Vec<usize> = Vec::new();
    let mut sums: HashMap<usize, Rational> = HashMap::new();
    for (idx, value) in terms {
        match sums.get_mut(&idx) {
            Some(total) => *total += value,
            None => {
                order.push(idx);
                sums.insert(idx, value);
            }
        }
    }
    order.sort_unstable();
    order
        .into_iter()
        .filter_map(|idx| {
            let value = sums.remove(&idx).expect("present");
            (!value.is_zero()).then_some((idx, value))
        })
        .collect()
}

fn parse_obj_sense(line: usize, token: &str) -> Result<ObjSense, MpsError> {
    match token.to_ascii_uppercase().as_str() {
        "MIN" | "MINIMIZE" | "MINIMISE" => Ok(ObjSense::Min),
        "MAX" | "MAXIMIZE" | "MAXIMISE" => Ok(ObjSense::Max),
        other => Err(perr(line, format!("unknown objective sense `{other}`"))),
    }
}

pub(crate) fn parse_text(text: &str, options: &ParseOptions) -> Result<MilpInstance, MpsError> {
    let mut b = Builder {
        name: String::new(),
        obj_name: None,
        obj_sense: ObjSense::Min,
        obj_terms: Vec::new(),
        rows: Vec::new(),
        row_index: HashMap::new(),
        vars: Vec::new(),
        var_index: HashMap::new(),
        in_integer_block: false,
        rhs_set: None,
        range_set: None,
        bound_set: None,
        skipped: Vec::new(),
    };
    let mut section = Section::None;
    let mut seen_rows = false;
    let mut seen_columns = false;
    let mut ended = false;

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        if raw.trim().is_empty() || raw.starts_with('*') {
            continue;
        }
        let tokens: Vec<&str> = raw.split_whitespace().collect();
        let is_header = !raw.starts_with([' ', '\t']);
        if is_header {
            let keyword = tokens[0].to_ascii_uppercase();
            section = match keyword.as_str() {
                "NAME" => {
                    b.name = tokens[1..].join(" ");
                    Section::None
                }
                "ROWS" => {
                    seen_rows = true;
                    Section::Rows
                }
                "COLUMNS" => {
                    seen_columns = true;
                    Section::Columns
                }
                "RHS" => Section::Rhs,
                "RANGES" => Section::Ranges,
                "BOUNDS" => Section::Bounds,
                "OBJSENSE" => match tokens.get(1) {
                    Some(t) => {
                        b.obj_sense = parse_obj_sense(line, t)?;
                        Section::None
                    }
                    None => Section::ObjSense,
                },
                "OBJSENSE.MAX" | "OBJSENSE.MAXIMIZE" => {
                    b.obj_sense = ObjSense::Max;
                    Section::None
                }
                "OBJNAME" => Section::None,
                "ENDATA" => {
                    ended = true;
                    break;
                }
                k if UNSUPPORTED.contains(&k) => {
                    if options.skip_unsupported {
                        log::warn!("line {line}: skipping unsupported section {k}");
                        b.skipped.push(k.to_string());
                        Section::Skipped
                    } else {
                        return Err(MpsError::UnsupportedSection { line, section: k.to_string() });
                    }
                }
                other => return Err(perr(line, format!("unknown section `{other}`"))),
            };
            continue;
        }
        match section {
            Section::Rows => b.rows_line(line, &tokens)?,
            Section::Columns => b.columns_line(line, &tokens)?,
            Section::Rhs => b.rhs_line(line, &tokens)?,
            Section::Ranges => b.ranges_line(line, &tokens)?,
            Section::Bounds => b.bounds_line(line, &tokens)?,
            Section::ObjSense => b.obj_sense = parse_obj_sense(line, tokens[0])?,
            Section::Skipped => {}
            Section::None => return Err(perr(line, "data line outside of a section")),
        }
    }
    if !seen_rows || !seen_columns {
        return Err(perr(0, "ROWS and COLUMNS sections are required"));
    }
    if !ended {
        log::warn!("MPS input has no ENDATA marker");
    }
    b.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> Rational {
        Rational::from_integer(n.into())
    }

    #[test]
    fn minimal_binary_row() {
        let text = "\
NAME          tiny
ROWS
 N  obj
 L  c1
COLUMNS
    MARKER                 'MARKER'                 'INTORG'
    x         obj       1   c1        1
    y         obj       1   c1        1
    MARKER                 'MARKER'                 'INTEND'
RHS
    rhs       c1        1
BOUNDS
 UP bnd       x         1
 UP bnd       y         1
ENDATA
";
        let inst = parse_mps_str(text).unwrap();
        assert_eq!(inst.name, "tiny");
        assert_eq!((inst.m(), inst.n()), (1, 2));
        assert!(inst.variables.iter().all(|v| v.kind == VarKind::Binary));
        assert_eq!(inst.constraints[0].sense, Sense::Le);
        assert_eq!(inst.constraints[0].rhs, q(1));
        assert_eq!(inst.objective.terms.len(), 2);
    }

    #[test]
    fn marker_makes_integer() {
        let text = "NAME t\nROWS\n N obj\n G c\nCOLUMNS\n MARKER 'MARKER' 'INTORG'\n z c 3\n MARKER 'MARKER' 'INTEND'\n w c 1\nRHS\n RHS c 2\nENDATA\n";
        let inst = parse_mps_str(text).unwrap();
        assert_eq!(inst.variables[0].kind, VarKind::Integer);
        assert_eq!(inst.variables[0].upper, None);
        assert_eq!(inst.variables[1].kind, VarKind::Continuous);
    }

    #[test]
    fn bound_types() {
        let text = "NAME t\nROWS\n N obj\n L c\nCOLUMNS\n a c 1\n b c 1\n d c 1\n e c 1\n f c 1\nRHS\n c 4\nBOUNDS\n FR BND a\n MI BND b\n BV BND d\n FX BND e 2.5\n UP BND f 1e30\nENDATA\n";
        let inst = parse_mps_str(text).unwrap();
        let v = &inst.variables;
        assert_eq!((v[0].lower.clone(), v[0].upper.clone()), (None, None));
        assert_eq!(v[1].lower, None);
        assert_eq!(v[2].kind, VarKind::Binary);
        assert_eq!(v[3].lower, parse_decimal("2.5"));
        assert_eq!(v[3].upper, parse_decimal("2.5"));
        assert_eq!(v[4].upper, None);
        assert_eq!(inst.constraints[0].rhs, q(4));
    }

    #[test]
    fn ranges_and_objsense() {
        let text = "NAME t\nOBJSENSE\n    MAX\nROWS\n N obj\n L r\nCOLUMNS\n x r 1 obj 2\nRHS\n RHS r 5\nRANGES\n RNG r 2\nENDATA\n";
        let inst = parse_mps_str(text).unwrap();
        assert_eq!(inst.objective.sense, ObjSense::Max);
        assert!(inst.constraints[0].is_ranged());
        assert_eq!(inst.constraints[0].sides(), (Some(q(3)), Some(q(5))));
    }

    #[test]
    fn extra_n_rows_are_free_constraints() {
        let text = "NAME t\nROWS\n N obj\n N spare\n E c\nCOLUMNS\n x spare 1 c 1\n y c 1\nRHS\n RHS c 1\nENDATA\n";
        let inst = parse_mps_str(text).unwrap();
        assert_eq!(inst.m(), 2);
        assert_eq!(inst.constraints[0].sense, Sense::Free);
    }

    #[test]
    fn sos_is_reported() {
        let text = "NAME t\nROWS\n N obj\n L c\nCOLUMNS\n x c 1\nRHS\n RHS c 1\nSOS\n S1 SOS s1 1\n    x 1\nENDATA\n";
        match parse_mps_str(text) {
            Err(MpsError::UnsupportedSection { line, section }) => {
                assert_eq!(section, "SOS");
                assert_eq!(line, 9);
            }
            other => panic!("unexpected {other:?}"),
        }
        let inst = parse_text(text, &ParseOptions { skip_unsupported: true }).unwrap();
        assert_eq!(inst.skipped_sections, vec!["SOS".to_string()]);
        assert_eq!(inst.m(), 1);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let text = "NAME t\nROWS\n N obj\n L c\nCOLUMNS\n x nosuchrow 1\nENDATA\n";
        match parse_mps_str(text) {
            Err(MpsError::Parse { line, .. }) => assert_eq!(line, 6),
            other => panic!("unexpected {other:?}"),
        }
        let text = "NAME t\nROWS\n N obj\n L c\nCOLUMNS\n x c abc\nENDATA\n";
        assert!(matches!(parse_mps_str(text), Err(MpsError::Parse { line: 6, .. })));
    }

    #[test]
    fn duplicate_entries_are_summed() {
        let text = "NAME t\nROWS\n N obj\n L c\nCOLUMNS\n x c 1\n x c 2\n y c 1\n y c -1\nENDATA\n";
        let inst = parse_mps_str(text).unwrap();
        assert_eq!(inst.constraints[0].terms, vec![(0, q(3))]);
    }

    #[test]
    fn gzip_input_is_sniffed() {
        use std::io::Write;
        let text = "NAME gz\nROWS\n N obj\n L c\nCOLUMNS\n x c 1\nRHS\n RHS c 1\nENDATA\n";
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("inst.mps.gz");
        let mut enc = flate2::write::GzEncoder::new(Vec::new(), flate2::Compression::default());
        enc.write_all(text.as_bytes()).unwrap();
        std::fs::write(&path, enc.finish().unwrap()).unwrap();
        let inst = parse_mps(&path).unwrap();
        assert_eq!(inst.name, "gz");
        assert_eq!(inst.m(), 1);
    }
}
