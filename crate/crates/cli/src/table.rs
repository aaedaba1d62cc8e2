//! CSV cell formatting.

/// `%.12g`: 12 significant digits, trailing zeros trimmed, scientific
/// notation outside `1e-4 <= |x| < 1e12`.
pub fn float(x: f64) -> String {
    const SIG: i32 = 12;
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", (SIG - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..SIG).contains(&exp) {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    } else {
        let fixed = format!("{:.*}", (SIG - 1 - exp) as usize, x);
        trim_zeros(&fixed).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn optional(x: Option<f64>) -> String {
    x.map(float).unwrap_or_default()
}
