use std::fmt::Write;

use seqsched_core::rational::{approx, format_rational};
use seqsched_core::{Ratio, Rational};

/// Line-oriented `key=value` report. Exact values carry a decimal
/// approximation in parentheses unless the report is machine-readable.
pub struct Report {
    machine: bool,
    text: String,
}

impl Report {
    pub fn new(machine: bool) -> Self {
        Report {
            machine,
            text: String::new(),
        }
    }

    pub fn value(&mut self, key: &str, value: &Rational) {
        if self.machine {
            self.line(key, format_rational(value));
        } else {
            self.line(
                key,
                format!("{} ({})", format_rational(value), approx(value)),
            );
        }
    }

    pub fn ratio(&mut self, key: &str, value: &Ratio) {
        match value {
            Ratio::Finite(r) => self.value(key, r),
            Ratio::Unbounded => self.line(key, "unbounded"),
        }
    }

    pub fn values(&mut self, key: &str, values: &[Rational]) {
        let parts: Vec<String> = values.iter().map(format_rational).collect();
        self.line(key, format!("({})", parts.join(",")));
    }

    pub fn line(&mut self, key: &str, value: impl std::fmt::Display) {
        let _ = writeln!(self.text, "{key}={value}");
    }

    pub fn raw(&mut self, text: &str) {
        self.text.push_str(text);
        if !text.ends_with('\n') {
            self.text.push('\n');
        }
    }

    pub fn print(&self) {
        print!("{}", self.text);
    }
}
