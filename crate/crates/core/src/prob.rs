//! Fixed-width rendering of probabilities and relative changes.

use alloc::format;
use alloc::string::String;

use crate::error::{Error, Result};

/// Renders `value` as uppercase E-notation with three fractional mantissa
/// digits and a signed two-digit exponent, e.g. `5.388E-07`.
///
/// Ties in the exact binary value round half to even.
pub fn render_probability(value: f64) -> Result<String> {
    render_sci(value, Some(3))
}

/// Shortest round-trip E-notation with at least three fractional digits.
/// Used by the canonical model writer so that re-parsing is lossless.
pub fn render_lossless(value: f64) -> Result<String> {
    render_sci(value, None)
}

fn render_sci(value: f64, digits: Option<usize>) -> Result<String> {
    if !value.is_finite() {
        return Err(Error::NonFinite);
    }
    let raw = match digits {
        Some(d) => format!("{:.*e}", d, value),
        None => format!("{:e}", value),
    };
    let (mantissa, exponent) = raw
        .split_once('e')
        .expect("LowerExp always emits an exponent");
    let exponent: i32 = exponent.parse().expect("LowerExp exponent is an integer");
    let mut mantissa = String::from(mantissa);
    let fraction = mantissa.split_once('.').map_or(0, |(_, f)| f.len());
    if fraction == 0 {
        mantissa.push('.');
    }
    for _ in fraction..3 {
        mantissa.push('0');
    }
    let sign = if exponent < 0 { '-' } else { '+' };
    Ok(format!(
        "{}E{}{:02}",
        mantissa,
        sign,
        exponent.unsigned_abs()
    ))
}

/// Signed percentage with two decimals (`-70.38%`); exactly zero renders as `0`.
pub fn render_percent(fraction: f64) -> String {
    if fraction == 0.0 {
        return String::from("0");
    }
    let text = format!("{:.2}%", fraction * 100.0);
    if text == "-0.00%" {
        String::from("0.00%")
    } else {
        text
    }
}
