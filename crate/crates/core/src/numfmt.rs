//! Canonical number rendering shared by triples, templates and checks.

/// Round half-to-even to `decimals` places using the exact binary value,
/// rendered without a negative zero.
pub fn round_to(value: f64, decimals: usize) -> String {
    let s = format!("{value:.decimals$}");
    if s.starts_with('-') && s[1..].bytes().all(|b| b == b'0' || b == b'.') {
        s[1..].to_string()
    } else {
        s
    }
}

/// Half-even to at most two decimals, trailing zeros trimmed:
/// `81.2`, `57.13`, `171.4`, `2022`.
pub fn canonical(value: f64) -> String {
    let mut s = round_to(value, 2);
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    s
}

/// Value the canonical string denotes.
pub fn canonical_value(value: f64) -> f64 {
    canonical(value).parse().expect("canonical output parses")
}

/// Number of digits after the decimal point in a plain numeric surface form.
pub fn decimals_of(surface: &str) -> usize {
    surface.split_once('.').map(|(_, frac)| frac.len()).unwrap_or(0)
}
