//! Plain-text report. Floating values carry 9 significant digits.

use std::fmt::Write;

/// `x` with 9 significant digits: fixed notation for moderate magnitudes,
/// scientific otherwise.
pub fn sig9(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    if x == 0.0 {
        return "0.00000000".into();
    }
    let sci = format!("{x:.8e}");
    let exp: i32 = sci[sci.find('e').expect("exponent") + 1..].parse().expect("integer exponent");
    if (-4..9).contains(&exp) {
        format!("{x:.*}", (8 - exp) as usize)
    } else {
        sci
    }
}

pub fn opt9(x: Option<f64>) -> String {
    x.map_or_else(|| "none".into(), sig9)
}

#[derive(Debug, Default)]
pub struct Report {
    text: String,
    checks: Vec<(String, bool)>,
}

impl Report {
    pub fn new(command: &str) -> Self {
        let mut r = Self::default();
        writeln!(r.text, "nehari-cc report").unwrap();
        writeln!(r.text, "command: {command}").unwrap();
        r
    }

    pub fn section(&mut self, title: &str) {
        writeln!(self.text, "\n[{title}]").unwrap();
    }

    pub fn line(&mut self, s: impl AsRef<str>) {
        self.text.push_str(s.as_ref());
        self.text.push('\n');
    }

    pub fn value(&mut self, key: &str, x: f64) {
        self.line(format!("{key} = {}", sig9(x)));
    }

    pub fn text_value(&mut self, key: &str, v: impl std::fmt::Display) {
        self.line(format!("{key} = {v}"));
    }

    pub fn check(&mut self, name: impl Into<String>, ok: bool) {
        self.checks.push((name.into(), ok));
    }

    /// Appends the check list and the resolved config echo.
    pub fn finish(mut self, config_json: &str) -> String {
        if !self.checks.is_empty() {
            self.section("checks");
            let checks = std::mem::take(&mut self.checks);
            for (name, ok) in &checks {
                self.line(format!("{}: {name}", if *ok { "pass" } else { "FAIL" }));
            }
        }
        self.section("config");
        self.line(config_json);
        self.text
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(sig9(16.0), "16.0000000");
        assert_eq!(sig9(0.0763932023), "0.0763932023");
        assert_eq!(sig9(-594.0), "-594.000000");
        assert_eq!(sig9(9.9999999999), "10.0000000");
        assert_eq!(sig9(1.5e-7), "1.50000000e-7");
        assert_eq!(sig9(123456789.0), "123456789");
        assert_eq!(sig9(1.2345678912e9), "1.23456789e9");
        assert_eq!(sig9(0.0), "0.00000000");
    }
}
