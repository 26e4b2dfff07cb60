//! Canonical text form of binary64 values.
//!
//! Reals are printed with the fewest significant digits `p` (1 to 17) whose
//! correctly rounded `p`-digit decimal parses back to the same double, laid
//! out positionally (never in exponent form) and always
//! with at least one fractional digit: `0.1`, `10.0`, `0.30000000000000004`.
//! The generated C test driver implements the same layout so that traces
//! can be compared byte for byte.

/// Positional layout of a decimal `0.d1d2..dn x 10^(exp+1)`, i.e. the first
/// digit has weight `10^exp`.
pub fn layout_digits(negative: bool, digits: &str, exp: i32) -> String {
    let digits = digits.trim_end_matches('0');
    let digits = if digits.is_empty() { "0" } else { digits };
    let mut out = String::new();
    if negative {
        out.push('-');
    }
    let n = digits.len() as i32;
    let point = exp + 1;
    if point <= 0 {
        out.push_str("0.");
        for _ in 0..(-point) {
            out.push('0');
        }
        out.push_str(digits);
    } else if point >= n {
        out.push_str(digits);
        for _ in 0..(point - n) {
            out.push('0');
        }
        out.push_str(".0");
    } else {
        out.push_str(&digits[..point as usize]);
        out.push('.');
        out.push_str(&digits[point as usize..]);
    }
    out
}

pub fn format_real(x: f64) -> String {
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    // Same search as the C driver's `%.*e` loop; both round ties to even.
    let a = x.abs();
    let sci = (0..17)
        .map(|p| format!("{a:.p$e}"))
        .find(|s| s.parse::<f64>() == Ok(a))
        .unwrap_or_else(|| format!("{a:.16e}"));
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("exponent");
    let digits: String = mantissa.chars().filter(|c| *c != '.').collect();
    let zero = digits.bytes().all(|b| b == b'0');
    let exp = if zero { 0 } else { exp };
    layout_digits(x.is_sign_negative(), &digits, exp)
}
