//! Exact decimal parsing and printing.

use lticontract::Rational;
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

/// Parses `[+-]digits[.digits][(e|E)[+-]digits]` or `p/q` exactly.
/// Underscores between digits are accepted, as in TOML literals.
pub fn parse_exact(text: &str) -> Result<Rational, String> {
    let t = text.trim();
    if let Some((p, q)) = t.split_once('/') {
        let num = parse_decimal(p)?;
        let den = parse_decimal(q)?;
        if den.is_zero() {
            return Err(format!("zero denominator in {t:?}"));
        }
        return Ok(num / den);
    }
    parse_decimal(t)
}

fn parse_decimal(text: &str) -> Result<Rational, String> {
    let bad = || format!("not a decimal number: {text:?}");
    let t = text.trim().replace('_', "");
    let (neg, body) = match t.as_bytes().first() {
        Some(b'-') => (true, &t[1..]),
        Some(b'+') => (false, &t[1..]),
        _ => (false, &t[..]),
    };
    let (mantissa, exp) = match body.find(['e', 'E']) {
        Some(i) => (&body[..i], body[i + 1..].parse::<i64>().map_err(|_| bad())?),
        None => (body, 0),
    };
    let (int, frac) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int.is_empty() && frac.is_empty() {
        return Err(bad());
    }
    if !int.bytes().chain(frac.bytes()).all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{int}{frac}");
    let mut num: BigInt = digits.parse().map_err(|_| bad())?;
    if neg {
        num = -num;
    }
    let scale = exp - frac.len() as i64;
    if scale.unsigned_abs() > 10_000 {
        return Err(format!("exponent out of range in {text:?}"));
    }
    let pow = BigInt::from(10).pow(scale.unsigned_abs() as u32);
    Ok(if scale >= 0 {
        Rational::from_integer(num * pow)
    } else {
        Rational::new(num, pow)
    })
}

/// Finite decimal expansion of `q`, or `None` when the reduced
/// denominator has a prime factor other than 2 and 5.
pub fn to_decimal(q: &Rational) -> Option<String> {
    let mut den = q.denom().clone();
    let (two, five) = (BigInt::from(2), BigInt::from(5));
    let (mut a, mut b) = (0u32, 0u32);
    while (&den % &two).is_zero() {
        den /= &two;
        a += 1;
    }
    while (&den % &five).is_zero() {
        den /= &five;
        b += 1;
    }
    if !den.is_one() {
        return None;
    }
    let k = a.max(b);
    let scaled = q.numer() * (BigInt::from(10).pow(k) / q.denom());
    let digits = scaled.abs().to_string();
    let sign = if scaled.is_negative() { "-" } else { "" };
    if k == 0 {
        return Some(format!("{sign}{digits}"));
    }
    let k = k as usize;
    let padded = format!("{digits:0>width$}", width = k + 1);
    let (int, frac) = padded.split_at(padded.len() - k);
    Some(format!("{sign}{int}.{frac}"))
}

/// TOML literal for `q`: a bare number when it has a finite decimal
/// expansion, a quoted `"p/q"` string otherwise.
pub fn to_toml_literal(q: &Rational) -> String {
    match to_decimal(q) {
        Some(s) => s,
        None => format!("\"{}/{}\"", q.numer(), q.denom()),
    }
}

/// Human-readable rendering used in text reports: rounded to ten decimals,
/// trailing zeros removed, and tiny magnitudes shown as `0`.
pub fn fmt_value(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "+inf".into() } else { "-inf".into() };
    }
    let s = format!("{x:.10}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" || s == "0" || s.is_empty() {
        "0".into()
    } else {
        s.to_string()
    }
}
