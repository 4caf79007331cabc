//! The line-oriented trace format.
//!
//! One event per line, `<thread>|<op>(<operand>)` with `op` one of `acq`,
//! `rel`, `r`, `w`. Names match `[A-Za-z_][A-Za-z0-9_.-]*`. Blank lines and
//! lines starting with `#` are skipped. Identifiers are numbered in order of
//! first occurrence.

use std::fmt::Write as _;

use thiserror::Error;
use tracerace_core::{Op, OpKind, Trace, TraceBuilder, TraceError, WellFormednessError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: {source}")]
    IllFormed {
        line: usize,
        #[source]
        source: WellFormednessError,
    },
}

impl ParseError {
    pub fn line(&self) -> usize {
        match *self {
            ParseError::Syntax { line, .. } | ParseError::IllFormed { line, .. } => line,
        }
    }
}

pub fn is_valid_name(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | '-'))
}

fn parse_line(text: &str) -> Result<(&str, OpKind, &str), String> {
    let (thread, rest) = text
        .split_once('|')
        .ok_or_else(|| format!("expected `<thread>|<op>(<operand>)`, got {text:?}"))?;
    if !is_valid_name(thread) {
        return Err(format!("invalid thread name {thread:?}"));
    }
    let (op, rest) = rest
        .split_once('(')
        .ok_or_else(|| format!("missing `(` in {text:?}"))?;
    let operand = rest
        .strip_suffix(')')
        .ok_or_else(|| format!("missing closing `)` in {text:?}"))?;
    let kind = match op {
        "acq" => OpKind::Acquire,
        "rel" => OpKind::Release,
        "r" => OpKind::Read,
        "w" => OpKind::Write,
        _ => return Err(format!("unknown operation {op:?}")),
    };
    if !is_valid_name(operand) {
        return Err(format!("invalid operand name {operand:?}"));
    }
    Ok((thread, kind, operand))
}

pub fn parse_trace(src: &str) -> Result<Trace, ParseError> {
    let mut b = TraceBuilder::new();
    let mut lines = Vec::new();
    for (i, raw) in src.lines().enumerate() {
        let text = raw.trim_end_matches('\r');
        if text.trim().is_empty() || text.starts_with('#') {
            continue;
        }
        let (thread, kind, operand) =
            parse_line(text).map_err(|msg| ParseError::Syntax { line: i + 1, msg })?;
        b.push(thread, kind, operand);
        lines.push(i + 1);
    }
    b.build().map_err(|e| match e {
        TraceError::IllFormed(source) => ParseError::IllFormed {
            line: lines[source.event],
            source,
        },
        TraceError::UnknownId { event, what } => ParseError::Syntax {
            line: lines[event],
            msg: format!("unknown {what}"),
        },
    })
}

pub fn write_trace(trace: &Trace) -> String {
    let mut out = String::with_capacity(trace.len() * 12);
    for e in trace.events() {
        let (op, name) = match e.op {
            Op::Acquire(l) => ("acq", trace.lock_name(l)),
            Op::Release(l) => ("rel", trace.lock_name(l)),
            Op::Read(x) => ("r", trace.var_name(x)),
            Op::Write(x) => ("w", trace.var_name(x)),
        };
        let _ = writeln!(out, "{}|{op}({name})", trace.thread_name(e.thread));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use tracerace_core::WellFormednessKind;

    const SIGMA_A: &str = "\
# write-write race
t1|acq(l)
t1|w(x)
t1|rel(l)
t2|w(x)
t2|acq(l)
t2|rel(l)
";

    #[test]
    fn parses_and_round_trips() {
        let t = parse_trace(SIGMA_A).unwrap();
        assert_eq!(t.len(), 6);
        assert_eq!((t.num_threads(), t.num_locks(), t.num_vars()), (2, 1, 1));
        let again = parse_trace(&write_trace(&t)).unwrap();
        assert_eq!(again, t);
        assert!(write_trace(&t).starts_with("t1|acq(l)\n"));
    }

    #[test]
    fn syntax_errors_carry_line_numbers() {
        let err = parse_trace("t1|w(x)\n\nt1|x(y)\n").unwrap_err();
        assert_eq!(err.line(), 3);
        assert!(parse_trace("t1 w(x)").is_err());
        assert!(parse_trace("t1|w(x").is_err());
        assert!(parse_trace("1t|w(x)").is_err());
        assert!(parse_trace("t|w(x y)").is_err());
        assert!(parse_trace("t|w()").is_err());
    }

    #[test]
    fn ill_formed_traces_are_rejected() {
        let err = parse_trace("# c\nt1|acq(l)\nt2|acq(l)\n").unwrap_err();
        assert_eq!(
            err,
            ParseError::IllFormed {
                line: 3,
                source: WellFormednessError {
                    event: 1,
                    kind: WellFormednessKind::Overlap
                }
            }
        );
    }

    #[test]
    fn names() {
        assert!(is_valid_name("_a.b-c9"));
        assert!(!is_valid_name(""));
        assert!(!is_valid_name("a|b"));
        assert!(!is_valid_name("-a"));
    }

    #[test]
    fn crlf_is_accepted() {
        assert_eq!(parse_trace("t|w(x)\r\nu|r(x)\r\n").unwrap().len(), 2);
    }
}
