//! Stable text rendering of floating-point values for CSV output.

/// Significant digits used in every emitted file.
pub const SIG_DIGITS: usize = 9;

/// Render `x` with [`SIG_DIGITS`] significant digits, `%g`-style: plain
/// decimal for moderate magnitudes, scientific otherwise, trailing zeros
/// trimmed. Non-finite values render as `NA`.
pub fn fmt_sig(x: f64) -> String {
    if !x.is_finite() {
        return "NA".to_string();
    }
    if x == 0.0 {
        return "0".to_string();
    }
    let sci = format!("{:.*e}", SIG_DIGITS - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if (-5..SIG_DIGITS as i32).contains(&exp) {
        let decimals = (SIG_DIGITS as i32 - 1 - exp).max(0) as usize;
        trim_zeros(format!("{:.*}", decimals, x))
    } else {
        format!("{}e{}", trim_zeros(mantissa.to_string()), exp)
    }
}

/// Optional values render as `NA` when absent.
pub fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "NA".to_string(), fmt_sig)
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// Parse a value written by [`fmt_sig`]; `NA` maps to `None`.
pub fn parse_opt(s: &str) -> Option<Option<f64>> {
    let s = s.trim();
    if s == "NA" {
        Some(None)
    } else {
        s.parse::<f64>().ok().map(Some)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn renders() {
        assert_eq!(fmt_sig(1500.0), "1500");
        assert_eq!(fmt_sig(0.9998), "0.9998");
        assert_eq!(fmt_sig(1.0 / 3.0), "0.333333333");
        assert_eq!(fmt_sig(-2.5e-7), "-2.5e-7");
        assert_eq!(fmt_sig(1.23456789012e12), "1.23456789e12");
        assert_eq!(fmt_sig(f64::NAN), "NA");
        assert_eq!(fmt_sig(0.0), "0");
    }

    proptest! {
        #[test]
        fn nine_digit_round_trip(x in -1e15f64..1e15) {
            let back: f64 = fmt_sig(x).parse().unwrap();
            let tol = 1e-8 * x.abs().max(1e-300);
            prop_assert!((back - x).abs() <= tol, "{} -> {}", x, back);
        }
    }
}
