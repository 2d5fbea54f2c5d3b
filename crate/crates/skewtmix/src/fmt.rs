//! Shortest-form significant-digit float formatting (printf `%g` style):
//! fixed notation for moderate exponents, scientific otherwise, trailing
//! zeros trimmed. Used for trace lines and all CLI numeric output.

/// Format `x` with `digits` significant digits.
pub fn format_sig(x: f64, digits: usize) -> String {
    assert!(digits >= 1);
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    // round to the requested precision first; the exponent below must be
    // that of the rounded value (e.g. 0.99999… → 1.0 changes it)
    let sci = format!("{:.*e}", digits - 1, x);
    let (mant, exp) = sci.split_once('e').expect("scientific form");
    let exp: i32 = exp.parse().expect("exponent");
    if exp < -4 || exp >= digits as i32 {
        let mant = mant.trim_end_matches('0').trim_end_matches('.');
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mant}e{sign}{:02}", exp.abs())
    } else {
        let places = (digits as i32 - 1 - exp).max(0) as usize;
        let fixed = format!("{:.*}", places, x);
        let trimmed = if fixed.contains('.') {
            fixed.trim_end_matches('0').trim_end_matches('.')
        } else {
            &fixed
        };
        if trimmed == "-0" {
            "0".into()
        } else {
            trimmed.into()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::format_sig;

    #[test]
    fn fixed_notation_with_trimming() {
        assert_eq!(format_sig(1777.423, 10), "1777.423");
        assert_eq!(format_sig(1811.14, 10), "1811.14");
        assert_eq!(format_sig(-1343.541, 10), "-1343.541");
        assert_eq!(format_sig(0.0003798128, 10), "0.0003798128");
        assert_eq!(format_sig(250.0, 10), "250");
        assert_eq!(format_sig(0.5, 10), "0.5");
    }

    #[test]
    fn scientific_notation_outside_the_window() {
        assert_eq!(format_sig(1e10, 10), "1e+10");
        assert_eq!(format_sig(1.5e-7, 10), "1.5e-07");
        assert_eq!(format_sig(-2.25e12, 10), "-2.25e+12");
        assert_eq!(format_sig(3.798128e-5, 10), "3.798128e-05");
    }

    #[test]
    fn rounding_changes_the_exponent_correctly() {
        assert_eq!(format_sig(0.99999999999, 10), "1");
        assert_eq!(format_sig(9.9999999999e9, 10), "1e+10");
    }

    #[test]
    fn specials_and_zero() {
        assert_eq!(format_sig(0.0, 10), "0");
        assert_eq!(format_sig(-0.0, 10), "0");
        assert_eq!(format_sig(f64::NAN, 10), "nan");
        assert_eq!(format_sig(f64::INFINITY, 10), "inf");
        assert_eq!(format_sig(f64::NEG_INFINITY, 10), "-inf");
    }

    #[test]
    fn few_digits() {
        assert_eq!(format_sig(1234.5678, 4), "1235");
        assert_eq!(format_sig(0.012345, 2), "0.012");
        assert_eq!(format_sig(98765.0, 3), "9.88e+04");
    }
}
