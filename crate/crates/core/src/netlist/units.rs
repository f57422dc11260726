//! SI suffix handling for netlist numbers.
//!
//! Parsing and formatting both go through decimal text so that a value
//! written by [`format_value`] parses back to the identical `f64`.

const SUFFIXES: [(&str, i32); 8] = [
    ("meg", 6),
    ("f", -15),
    ("p", -12),
    ("n", -9),
    ("u", -6),
    ("m", -3),
    ("k", 3),
    ("", 0),
];

/// Splits a numeric literal into its decimal mantissa text, its explicit
/// exponent, and the trailing remainder.
fn split_number(text: &str) -> Option<(&str, i32, &str)> {
    let bytes = text.as_bytes();
    let mut i = 0;
    if i < bytes.len() && (bytes[i] == b'+' || bytes[i] == b'-') {
        i += 1;
    }
    let digits_start = i;
    while i < bytes.len() && bytes[i].is_ascii_digit() {
        i += 1;
    }
    let mut n_digits = i - digits_start;
    if i < bytes.len() && bytes[i] == b'.' {
        i += 1;
        let frac_start = i;
        while i < bytes.len() && bytes[i].is_ascii_digit() {
            i += 1;
        }
        n_digits += i - frac_start;
    }
    if n_digits == 0 {
        return None;
    }
    let mantissa_end = i;
    let mut exponent = 0i32;
    if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
        let mut j = i + 1;
        if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
            j += 1;
        }
        let exp_digits = j;
        while j < bytes.len() && bytes[j].is_ascii_digit() {
            j += 1;
        }
        if j > exp_digits {
            exponent = text[i + 1..j].parse().ok()?;
            i = j;
        }
    }
    Some((&text[..mantissa_end], exponent, &text[i..]))
}

/// Parses a netlist number such as `4u`, `0.18u`, `1meg`, `10f` or `1e-9`.
///
/// Suffixes are case-insensitive; `m` is milli and `meg` is mega.
pub fn parse_value(text: &str) -> Option<f64> {
    let (mantissa, exponent, rest) = split_number(text)?;
    let rest = rest.to_ascii_lowercase();
    let scale = SUFFIXES
        .iter()
        .find(|(suffix, _)| *suffix == rest)
        .map(|(_, e)| *e)?;
    let value: f64 = format!("{mantissa}e{}", exponent + scale).parse().ok()?;
    value.is_finite().then_some(value)
}

/// Formats a value with the engineering suffix that keeps the mantissa in
/// `[1, 1000)`, falling back to plain exponent notation outside `f..meg`.
pub fn format_value(value: f64) -> String {
    if value == 0.0 {
        return "0".to_string();
    }
    let sci = format!("{:e}", value.abs());
    let (mantissa, exp) = sci.split_once('e').expect("{:e} always has an exponent");
    let exp: i32 = exp.parse().expect("valid exponent");
    let sign = if value < 0.0 { "-" } else { "" };
    let eng = exp.div_euclid(3) * 3;
    let Some((suffix, _)) = SUFFIXES.iter().find(|(_, e)| *e == eng) else {
        return format!("{sign}{sci}");
    };
    let digits: String = mantissa.chars().filter(|c| *c != '.').collect();
    let int_len = (exp - eng) as usize + 1;
    let (int_part, frac_part) = if digits.len() <= int_len {
        (format!("{digits:0<int_len$}"), String::new())
    } else {
        (digits[..int_len].to_string(), digits[int_len..].to_string())
    };
    if frac_part.is_empty() {
        format!("{sign}{int_part}{suffix}")
    } else {
        format!("{sign}{int_part}.{frac_part}{suffix}")
    }
}
