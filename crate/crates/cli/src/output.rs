//! CSV emission.

use std::fmt::Write;

pub const CSV_HEADER: &str = "t,D_mix,sigma,I_int,I_ext,I_tot,corr_bound";

/// `%.12g`: 12 significant digits, trailing zeros dropped, scientific
/// notation outside `[1e-4, 1e12)`.
pub fn fmt_g12(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..12).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{m}e{sign}{:02}", exp.abs());
    }
    let decimals = (11 - exp) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Rows of `(t, D_mix, sigma, I_int, I_ext, I_tot, corr_bound)`.
pub fn csv(columns: [&[f64]; 7]) -> String {
    let n = columns[0].len();
    debug_assert!(columns.iter().all(|c| c.len() == n));
    let mut out = String::with_capacity(n * 100);
    out.push_str(CSV_HEADER);
    out.push('\n');
    for k in 0..n {
        for (j, c) in columns.iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            write!(out, "{}", fmt_g12(c[k])).expect("write to string");
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g12_matches_printf() {
        let cases = [
            (0.0, "0"),
            (-0.0, "0"),
            (1.0, "1"),
            (0.5, "0.5"),
            (1.0 / 3.0, "0.333333333333"),
            (2.0 / 3.0, "0.666666666667"),
            (123456.789, "123456.789"),
            (1e-5, "1e-05"),
            (1.5e-6, "1.5e-06"),
            (0.000123, "0.000123"),
            (-2.5e-13, "-2.5e-13"),
            (999999999999.0, "999999999999"),
            (1e12, "1e+12"),
            (std::f64::consts::PI, "3.14159265359"),
            (0.9999999999999, "1"),
        ];
        for (x, want) in cases {
            assert_eq!(fmt_g12(x), want, "{x}");
        }
    }

    #[test]
    fn csv_layout() {
        let t = [0.0, 0.5];
        let one = [1.0, 1.0];
        let s = csv([&t, &one, &one, &one, &one, &one, &one]);
        assert_eq!(s, format!("{CSV_HEADER}\n0,1,1,1,1,1,1\n0.5,1,1,1,1,1,1\n"));
    }
}
