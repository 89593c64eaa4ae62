//! Flat key-value rendering for stdout.

use std::fmt::Display;

use streamlab_core::StrategyConfig;

/// An ordered `key = value` report. Keys appear exactly once, in insertion
/// order, so the text output is stable and trivially greppable.
#[derive(Default)]
pub struct Flat {
    lines: Vec<(String, String)>,
}

impl Flat {
    pub fn new() -> Self {
        Flat::default()
    }

    pub fn push(&mut self, key: impl Into<String>, value: impl Display) -> &mut Self {
        self.lines.push((key.into(), value.to_string()));
        self
    }

    pub fn push_opt(&mut self, key: impl Into<String>, value: Option<impl Display>) -> &mut Self {
        if let Some(v) = value {
            self.push(key, v);
        }
        self
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.lines {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(v);
            out.push('\n');
        }
        out
    }

    pub fn print(&self) {
        print_text(&self.render());
    }
}

/// Write to stdout, swallowing errors such as EPIPE so that piping into
/// `head` does not turn into a panic.
pub fn print_text(text: &str) {
    use std::io::Write;
    let _ = std::io::stdout().write_all(text.as_bytes());
}

/// Round to four significant digits, the precision quoted in reports.
pub fn sig4(x: f64) -> String {
    if !x.is_finite() {
        return if x == f64::INFINITY {
            "inf".into()
        } else if x == f64::NEG_INFINITY {
            "-inf".into()
        } else {
            "nan".into()
        };
    }
    if x == 0.0 {
        return "0.000".into();
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = 3 - magnitude;
    if decimals >= 0 {
        format!("{:.*}", decimals as usize, x)
    } else {
        let scale = 10f64.powi(-decimals);
        format!("{}", (x / scale).round() * scale)
    }
}

/// One-line strategy description, e.g. `short-on-off(block=65536)`.
pub fn strategy_label(config: &StrategyConfig) -> String {
    match config.on_off() {
        Some(p) => format!("{}(block={})", config.kind(), p.block_size),
        None => config.kind().to_string(),
    }
}
