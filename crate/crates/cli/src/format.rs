//! Number formatting for CSV output: 9 significant digits, shortest form.

/// Formats like C's `%.9g`.
pub fn sig9(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent in {:e} output");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!(
            "{}e{sign}{:02}",
            trim_zeros(mantissa.to_string()),
            exp.abs()
        )
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

#[cfg(test)]
mod tests {
    use super::sig9;

    #[test]
    fn matches_printf_g() {
        let cases = [
            (0.0, "0"),
            (1.0, "1"),
            (-2.5, "-2.5"),
            (12.345678912345, "12.3456789"),
            (0.000123456789123, "0.000123456789"),
            (1.23456789123e-7, "1.23456789e-07"),
            (123456789.4, "123456789"),
            (1234567891.0, "1.23456789e+09"),
            (9.9999999999, "10"),
            (1.0 / 3.0, "0.333333333"),
        ];
        for (x, want) in cases {
            assert_eq!(sig9(x), want, "{x}");
        }
        assert_eq!(sig9(f64::NAN), "nan");
    }
}
