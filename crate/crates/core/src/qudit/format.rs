//! Plain-text state literals.
//!
//! ```text
//! # optional comments
//! dims 4 4 2
//! labels 0 1 2          # optional, one party index per subsystem
//! 0,0,0  1  0
//! 1,1,1  1  0
//! 3,3,1 -1  0
//! ```
//!
//! Each term line is `index-tuple amplitude_re amplitude_im`. The tuple is
//! comma separated and may be wrapped in parentheses. Repeated tuples add,
//! and the result is normalized on load.

use std::fmt::Write as _;

use num_complex::Complex64;

use super::{make_state, PureState, QuditError, Result};

fn parse_err(line: usize, message: impl Into<String>) -> QuditError {
    QuditError::Parse {
        line,
        message: message.into(),
    }
}

fn parse_usizes<'a>(line: usize, words: impl Iterator<Item = &'a str>) -> Result<Vec<usize>> {
    words
        .map(|w| {
            w.parse::<usize>()
                .map_err(|_| parse_err(line, format!("expected an integer, got `{w}`")))
        })
        .collect()
}

pub fn parse_state(text: &str) -> Result<PureState> {
    let mut dims: Option<Vec<usize>> = None;
    let mut labels: Option<Vec<usize>> = None;
    let mut terms = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut words = line.split_whitespace();
        let head = words.next().expect("nonempty line");
        match head {
            "dims" => dims = Some(parse_usizes(lineno, words)?),
            "labels" => labels = Some(parse_usizes(lineno, words)?),
            _ => {
                let tuple = head.trim_start_matches('(').trim_end_matches(')');
                let index = parse_usizes(lineno, tuple.split(',').map(str::trim))?;
                let mut number = |name: &str| -> Result<f64> {
                    let w = words
                        .next()
                        .ok_or_else(|| parse_err(lineno, format!("missing {name}")))?;
                    w.parse::<f64>()
                        .map_err(|_| parse_err(lineno, format!("bad {name} `{w}`")))
                };
                let re = number("real part")?;
                let im = number("imaginary part")?;
                if words.next().is_some() {
                    return Err(parse_err(lineno, "trailing tokens"));
                }
                terms.push((index, Complex64::new(re, im)));
            }
        }
    }
    let dims = dims.ok_or_else(|| parse_err(0, "missing `dims` line"))?;
    let state = make_state(dims, &terms)?;
    match labels {
        Some(l) => state.with_labels(l),
        None => Ok(state),
    }
}

/// Writes every nonzero amplitude. Floats use the shortest representation
/// that parses back to the same value.
pub fn write_state(s: &PureState) -> String {
    let mut out = String::new();
    let join = |v: &[usize], sep: &str| v.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(sep);
    let _ = writeln!(out, "dims {}", join(s.dims(), " "));
    let _ = writeln!(out, "labels {}", join(s.labels(), " "));
    for (flat, a) in s.amplitudes().iter().enumerate() {
        if a.re == 0.0 && a.im == 0.0 {
            continue;
        }
        let _ = writeln!(out, "{} {} {}", join(&s.digits(flat), ","), a.re, a.im);
    }
    out
}
