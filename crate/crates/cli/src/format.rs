//! Locale-independent numeric output.

/// Significant digits used for every computed quantity written to disk.
pub const SIG_DIGITS: usize = 12;

/// `%.12g`-style rendering: 12 significant digits, ties to even, trailing
/// zeros stripped, scientific notation outside `[1e-5, 1e12)`.
pub fn sig(x: f64) -> String {
    sig_digits(x, SIG_DIGITS)
}

pub fn sig_digits(x: f64, digits: usize) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    let negative = mantissa.starts_with('-');
    let digits_only: String = mantissa.chars().filter(|c| c.is_ascii_digit()).collect();
    let sign = if negative { "-" } else { "" };

    if (-5..digits as i32).contains(&exp) {
        let body = if exp >= 0 {
            let split = exp as usize + 1;
            let (int, frac) = digits_only.split_at(split);
            join_frac(int, frac)
        } else {
            let zeros = "0".repeat((-exp - 1) as usize);
            join_frac("0", &format!("{zeros}{digits_only}"))
        };
        format!("{sign}{body}")
    } else {
        let (lead, rest) = digits_only.split_at(1);
        format!("{sign}{}e{exp}", join_frac(lead, rest))
    }
}

fn join_frac(int: &str, frac: &str) -> String {
    let frac = frac.trim_end_matches('0');
    if frac.is_empty() { int.to_string() } else { format!("{int}.{frac}") }
}

pub fn sig_list(values: &[f64]) -> String {
    values.iter().map(|&v| sig(v)).collect::<Vec<_>>().join(",")
}
