use crate::error::{Error, Result};

/// Decimal digits of `a > 0` from its shortest round-trip representation,
/// as `d0.d1d2... x 10^exp`.
fn decimal_digits(a: f64) -> (Vec<u8>, i32) {
    let s = format!("{a:e}");
    let (mantissa, exp) = s.split_once('e').expect("`{:e}` always has an exponent");
    let digits = mantissa.bytes().filter(u8::is_ascii_digit).map(|b| b - b'0').collect();
    (digits, exp.parse().expect("integer exponent"))
}

fn digit_at(digits: &[u8], i: i32) -> char {
    if i >= 0 && (i as usize) < digits.len() {
        (b'0' + digits[i as usize]) as char
    } else {
        '0'
    }
}

/// Renders `v` in at most `chars` characters.
///
/// Fixed point with as many truncated decimals as fit; scientific notation
/// (`1.2e5`, `-3e-4`) when `|v| >= 10^(chars-1)` or `|v| < 10^-(chars-2)`.
/// Magnitudes whose exponent does not fit saturate: tiny values print as
/// zero, huge values as the largest representable `9e99..`.
pub fn format_value(v: f64, chars: usize) -> Result<String> {
    if !v.is_finite() {
        return Err(Error::InvalidInput(format!("cannot format non-finite value {v}")));
    }
    if chars < 4 {
        return Err(Error::InvalidInput(format!(
            "need at least 4 characters per value, got {chars}"
        )));
    }
    let zero = || format!("0.{}", "0".repeat(chars - 2));
    if v == 0.0 {
        return Ok(zero());
    }
    let sign = if v < 0.0 { "-" } else { "" };
    let (digits, exp) = decimal_digits(v.abs());
    let c = chars as i32;

    let mut out = String::with_capacity(chars);
    out.push_str(sign);
    if exp < c - 1 && exp > -(c - 1) {
        let int_len = (exp + 1).max(1);
        if exp < 0 {
            out.push('0');
        } else {
            (0..=exp).for_each(|i| out.push(digit_at(&digits, i)));
        }
        let avail = c - sign.len() as i32 - int_len;
        if avail >= 2 {
            out.push('.');
            (1..avail).for_each(|p| out.push(digit_at(&digits, exp + p)));
        }
        return Ok(out);
    }

    let exp_str = exp.to_string();
    let avail = c - sign.len() as i32 - 1 - exp_str.len() as i32;
    if avail < 1 {
        if exp < 0 {
            return Ok(zero());
        }
        let room = chars - sign.len() - 2;
        out.push_str("9e");
        out.push_str(&"9".repeat(room));
        return Ok(out);
    }
    out.push(digit_at(&digits, 0));
    if avail >= 3 {
        out.push('.');
        (1..avail - 1).for_each(|p| out.push(digit_at(&digits, p)));
    }
    out.push('e');
    out.push_str(&exp_str);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    #[test]
    fn examples() {
        assert_eq!(format_value(0.123456, 4).unwrap(), "0.12");
        assert_eq!(format_value(0.0, 4).unwrap(), "0.00");
        assert_eq!(format_value(-0.0, 5).unwrap(), "0.000");
        assert_eq!(format_value(-12345.0, 4).unwrap(), "-1e4");
        assert_eq!(format_value(0.29, 4).unwrap(), "0.29");
        assert_eq!(format_value(0.999, 4).unwrap(), "0.99");
        assert_eq!(format_value(-9.99, 5).unwrap(), "-9.99");
        assert_eq!(format_value(123.4, 4).unwrap(), "123");
        assert_eq!(format_value(-999.5, 4).unwrap(), "-999");
        assert_eq!(format_value(0.005, 4).unwrap(), "5e-3");
        assert_eq!(format_value(12345.0, 5).unwrap(), "1.2e4");
        assert_eq!(format_value(1e-300, 4).unwrap(), "0.00");
        assert_eq!(format_value(-1e300, 4).unwrap(), "-9e9");
        assert_eq!(format_value(7.0, 5).unwrap(), "7.000");
    }

    #[test]
    fn errors() {
        assert!(format_value(f64::NAN, 5).is_err());
        assert!(format_value(f64::INFINITY, 5).is_err());
        assert!(format_value(1.0, 3).is_err());
    }

    proptest! {
        #[test]
        fn fits_budget_and_uses_font_alphabet(v in -1e12f64..1e12, chars in 4usize..9) {
            let s = format_value(v, chars).unwrap();
            prop_assert!(s.len() <= chars, "{} -> {}", v, s);
            prop_assert!(s.chars().all(|c| "0123456789.-e".contains(c)));
        }

        #[test]
        fn fixed_point_truncates_toward_zero(v in -99.0f64..99.0) {
            let s = format_value(v, 6).unwrap();
            if !s.contains('e') {
                let parsed: f64 = s.parse().unwrap();
                prop_assert!(parsed.abs() <= v.abs() + 1e-12);
                prop_assert!((parsed - v).abs() < 0.01 + 1e-9);
            }
        }
    }
}
