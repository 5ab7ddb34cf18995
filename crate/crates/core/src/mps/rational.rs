use num::bigint::BigInt;
use num::{BigRational, One, Signed, ToPrimitive, Zero};

/// Parses a decimal literal (`-1.25e3`, `.5`, `+7`) exactly.
pub fn parse_decimal(text: &str) -> Option<BigRational> {
    let s = text.trim();
    let (negative, body) = match s.as_bytes().first()? {
        b'-' => (true, &s[1..]),
        b'+' => (false, &s[1..]),
        _ => (false, s),
    };
    let (mantissa, exponent) = match body.find(['e', 'E', 'd', 'D']) {
        Some(pos) => (&body[..pos], body[pos + 1..].parse::<i64>().ok()?),
        None => (body, 0),
    };
    let (int_part, frac_part) = match mantissa.find('.') {
        Some(pos) => (&mantissa[..pos], &mantissa[pos + 1..]),
        None => (mantissa, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let numer: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().ok()? };
    let scale = exponent - frac_part.len() as i64;
    if scale.abs() > 400 {
        return None;
    }
    let ten = BigInt::from(10);
    let mut value = if scale >= 0 {
        BigRational::from_integer(numer * num::pow(ten, scale as usize))
    } else {
        BigRational::new(numer, num::pow(ten, (-scale) as usize))
    };
    if negative {
        value = -value;
    }
    Some(value)
}

/// Exact decimal text when the denominator divides a power of ten, otherwise an `f64` rendering.
pub fn rational_to_decimal(value: &BigRational) -> String {
    if value.is_integer() {
        return value.numer().to_string();
    }
    let mut denom = value.denom().clone();
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    let (mut twos, mut fives) = (0usize, 0usize);
    while (&denom % &two).is_zero() {
        denom /= &two;
        twos += 1;
    }
    while (&denom % &five).is_zero() {
        denom /= &five;
        fives += 1;
    }
    if !denom.is_one() {
        return value.to_f64().map(|f| format!("{f:e}")).unwrap_or_else(|| value.to_string());
    }
    let places = twos.max(fives);
    let scaled = value * BigRational::from_integer(num::pow(BigInt::from(10), places));
    let digits = scaled.to_integer().abs().to_string();
    let digits = format!("{digits:0>width$}", width = places + 1);
    let (int_part, frac_part) = digits.split_at(digits.len() - places);
    let frac_part = frac_part.trim_end_matches('0');
    let sign = if value.is_negative() { "-" } else { "" };
    format!("{sign}{int_part}.{frac_part}")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn parses_exactly() {
        assert_eq!(parse_decimal("0.9999999"), Some(q(9_999_999, 10_000_000)));
        assert_eq!(parse_decimal("-1.25e3"), Some(q(-1250, 1)));
        assert_eq!(parse_decimal(".5"), Some(q(1, 2)));
        assert_eq!(parse_decimal("+7"), Some(q(7, 1)));
        assert_eq!(parse_decimal("3."), Some(q(3, 1)));
        assert_eq!(parse_decimal("2E-2"), Some(q(1, 50)));
        assert_eq!(parse_decimal("abc"), None);
        assert_eq!(parse_decimal("."), None);
        assert_eq!(parse_decimal(""), None);
    }

    #[test]
    fn decimal_rendering() {
        assert_eq!(rational_to_decimal(&q(-1250, 1)), "-1250");
        assert_eq!(rational_to_decimal(&q(1, 50)), "0.02");
        assert_eq!(rational_to_decimal(&q(-3, 8)), "-0.375");
        for s in ["0.9999999", "-12.5", "1e-7", "123456.789"] {
            let v = parse_decimal(s).unwrap();
            assert_eq!(parse_decimal(&rational_to_decimal(&v)), Some(v));
        }
    }
}
