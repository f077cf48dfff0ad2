//! Fixed-precision number formatting for CSV and console output.

/// Formats with 12 significant digits, `%g`-style: plain notation for
/// moderate exponents, scientific otherwise, trailing zeros removed.
pub fn sig12(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{:.11e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        trim(&format!("{:.*}", decimals, x)).to_string()
    } else {
        format!("{}e{}", trim(mantissa), exp)
    }
}

fn trim(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::sig12;

    #[test]
    fn formats() {
        assert_eq!(sig12(std::f64::consts::PI), "3.14159265359");
        assert_eq!(sig12(2.4674011002723395), "2.46740110027");
        assert_eq!(sig12(-0.5), "-0.5");
        assert_eq!(sig12(0.0), "0");
        assert_eq!(sig12(1e-7), "1e-7");
        assert_eq!(sig12(1234.5), "1234.5");
        assert_eq!(sig12(9.9999999999999e-1), "1");
        assert_eq!(sig12(0.123456789012345), "0.123456789012");
        assert_eq!(sig12(3e15), "3e15");
    }
}
