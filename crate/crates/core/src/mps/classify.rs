use num::bigint::BigInt;
use num::{Integer, One, Signed, Zero};

use super::{Constraint, ConstraintType, Rational, Sense, VarKind, Variable};

/// One side of a row after normalization: coefficients are coprime integers.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Side {
    Le,
    Ge,
    Eq,
}

struct Row {
    coefs: Vec<BigInt>,
    kinds: Vec<VarKind>,
    side: Side,
    rhs: Rational,
}

/// Assigns a MIPLIB 2017 constraint type. The first matching rule in
/// [`ConstraintType::ALL`] order wins; rows with RANGES are special only
/// when both implied inequalities agree on the tag.
pub fn classify_constraint(c: &Constraint, vars: &[Variable]) -> ConstraintType {
    if c.terms.is_empty() {
        return ConstraintType::Empty;
    }
    if c.sense == Sense::Free {
        return ConstraintType::Free;
    }
    if c.terms.len() == 1 {
        return ConstraintType::Singleton;
    }
    if c.is_ranged() {
        let (lo, hi) = c.sides();
        let (lo, hi) = (lo.expect("ranged rows have both sides"), hi.expect("ranged rows have both sides"));
        if lo == hi {
            return classify_side(c, vars, Side::Eq, lo);
        }
        let lower = classify_side(c, vars, Side::Ge, lo);
        let upper = classify_side(c, vars, Side::Le, hi);
        return if lower == upper { lower } else { ConstraintType::GeneralLinear };
    }
    let side = match c.sense {
        Sense::Le => Side::Le,
        Sense::Ge => Side::Ge,
        Sense::Eq => Side::Eq,
        Sense::Free => unreachable!(),
    };
    classify_side(c, vars, side, c.rhs.clone())
}

fn classify_side(c: &Constraint, vars: &[Variable], side: Side, rhs: Rational) -> ConstraintType {
    let (coefs, rhs) = normalize(&c.terms.iter().map(|(_, a)| a.clone()).collect::<Vec<_>>(), rhs);
    let kinds = c.terms.iter().map(|(j, _)| vars[*j].kind).collect();
    classify_row(&Row { coefs, kinds, side, rhs })
}

/// Scales by a positive factor so the coefficients become coprime integers.
fn normalize(coefs: &[Rational], rhs: Rational) -> (Vec<BigInt>, Rational) {
    let lcm = coefs.iter().fold(BigInt::one(), |acc, a| acc.lcm(a.denom()));
    let ints: Vec<BigInt> = coefs.iter().map(|a| (a * Rational::from_integer(lcm.clone())).to_integer()).collect();
    let gcd = ints.iter().fold(BigInt::zero(), |acc, a| acc.gcd(a));
    let gcd = if gcd.is_zero() { BigInt::one() } else { gcd };
    let scale = Rational::new(lcm, gcd.clone());
    let ints = ints.into_iter().map(|a| a / &gcd).collect();
    (ints, rhs * scale)
}

fn is_int(q: &Rational) -> bool {
    q.is_integer()
}

impl Row {
    fn len(&self) -> usize {
        self.coefs.len()
    }

    fn is_inequality(&self) -> bool {
        self.side != Side::Eq
    }

    fn all_binary(&self) -> bool {
        self.kinds.iter().all(|&k| k == VarKind::Binary)
    }

    fn all_integral(&self) -> bool {
        self.kinds.iter().all(|&k| k != VarKind::Continuous)
    }

    /// Coefficients and rhs in `<=` orientation (negated for `>=` rows).
    fn le_form(&self) -> (Vec<BigInt>, Rational) {
        match self.side {
            Side::Ge => (self.coefs.iter().map(|a| -a).collect(), -self.rhs.clone()),
            _ => (self.coefs.clone(), self.rhs.clone()),
        }
    }

    /// Coefficients and rhs in `>=` orientation (negated for `<=` rows).
    fn ge_form(&self) -> (Vec<BigInt>, Rational) {
        match self.side {
            Side::Le => (self.coefs.iter().map(|a| -a).collect(), -self.rhs.clone()),
            _ => (self.coefs.clone(), self.rhs.clone()),
        }
    }
}

/// Right-hand side after complementing every binary with a negative coefficient.
fn complemented_rhs(coefs: &[BigInt], rhs: &Rational) -> Rational {
    let shift: BigInt = coefs.iter().filter(|a| a.is_negative()).map(|a| -a).sum();
    rhs + Rational::from_integer(shift)
}

fn classify_row(row: &Row) -> ConstraintType {
    use ConstraintType as T;
    let one = Rational::one();
    let two = Rational::from_integer(2.into());

    if row.side == Side::Eq && row.len() == 2 {
        return T::Aggregation;
    }
    if row.is_inequality() && row.len() == 2 {
        if row.kinds[0] == row.kinds[1] && row.coefs[0] == -row.coefs[1].clone() {
            return T::Precedence;
        }
        if row.kinds.contains(&VarKind::Binary) {
            return T::VariableBound;
        }
    }

    let all_binary = row.all_binary();
    let unit = row.coefs.iter().all(|a| a.abs().is_one());
    if all_binary && unit {
        let (le, le_rhs) = row.le_form();
        let (ge, ge_rhs) = row.ge_form();
        let b_le = complemented_rhs(&le, &le_rhs);
        let b_ge = complemented_rhs(&ge, &ge_rhs);
        match row.side {
            Side::Eq => {
                if b_le == one || b_ge == one {
                    return T::SetPartitioning;
                }
            }
            _ => {
                if b_le == one {
                    return T::SetPacking;
                }
                // Covering needs a finite left-hand side on the row as written.
                if row.side == Side::Ge && b_ge == one {
                    return T::SetCovering;
                }
            }
        }
        match row.side {
            Side::Eq => {
                if (is_int(&b_le) && b_le >= two) || (is_int(&b_ge) && b_ge >= two) {
                    return T::Cardinality;
                }
            }
            _ => {
                if is_int(&b_le) && b_le >= two {
                    return T::InvariantKnapsack;
                }
            }
        }
    }
    if all_binary && row.side == Side::Eq {
        return T::EquationKnapsack;
    }
    if all_binary && row.is_inequality() {
        let (le, le_rhs) = row.le_form();
        let b = complemented_rhs(&le, &le_rhs);
        let big = le.iter().any(|a| Rational::from_integer(a.abs()) == b);
        if b.is_positive() && big {
            return T::BinPacking;
        }
        return T::Knapsack;
    }
    if row.all_integral() && row.is_inequality() {
        return T::IntegerKnapsack;
    }
    let has_binary = row.kinds.contains(&VarKind::Binary);
    let has_integer = row.kinds.contains(&VarKind::Integer);
    let has_continuous = row.kinds.contains(&VarKind::Continuous);
    if has_binary && has_continuous && !has_integer {
        return T::MixedBinary;
    }
    T::GeneralLinear
}
