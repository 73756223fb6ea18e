//! Decimal formatting with a fixed number of significant digits, in the
//! style of C's `%.Ng` (trailing zeros trimmed, exponent form for very
//! large or small magnitudes).

pub fn format_sig(x: f64, digits: usize) -> String {
    assert!(digits >= 1);
    if !x.is_finite() {
        return if x.is_nan() {
            "NaN".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    if x == 0.0 {
        return if x.is_sign_negative() {
            "-0".into()
        } else {
            "0".into()
        };
    }
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -5 || exp >= digits as i32 {
        let mantissa = trim_zeros(mantissa);
        return format!("{mantissa}e{exp}");
    }
    let decimals = (digits as i32 - 1 - exp).max(0) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::format_sig;
    use proptest::prelude::*;

    #[test]
    fn examples() {
        assert_eq!(format_sig(1.0, 17), "1");
        assert_eq!(format_sig(0.1, 17), "0.10000000000000001");
        assert_eq!(format_sig(0.1, 12), "0.1");
        assert_eq!(format_sig(2.5e-9, 12), "2.5e-9");
        assert_eq!(format_sig(123456.0, 3), "1.23e5");
        assert_eq!(format_sig(-3.25, 12), "-3.25");
        assert_eq!(format_sig(0.0, 12), "0");
        assert_eq!(format_sig(f64::INFINITY, 12), "inf");
    }

    proptest! {
        #[test]
        fn seventeen_digits_round_trip(x in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL) {
            let s = format_sig(x, 17);
            prop_assert_eq!(s.parse::<f64>().unwrap(), x);
        }
    }
}
