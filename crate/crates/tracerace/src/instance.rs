//! Instance files for the combinatorial problems.
//!
//! ```text
//! ov2 3 3
//! 101
//! 100
//! 010
//! --
//! 111
//! 011
//! 110
//! ```
//!
//! The header is `ov2 <n> <d>`, `ov3 <n> <d>` or `hs <n> <d>`, followed by
//! the parts (two, three, or `X` then `Y`), each `n` lines of `d` bits,
//! separated by `--`.

use std::fmt::Write as _;

use thiserror::Error;
use tracerace_core::gadgets::{BitVec, HsInstance, InstanceError, OvInstance};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Instance {
    Ov(OvInstance),
    Hs(HsInstance),
}

impl Instance {
    pub fn kind(&self) -> &'static str {
        match self {
            Instance::Ov(i) if i.k() == 2 => "ov2",
            Instance::Ov(i) if i.k() == 3 => "ov3",
            Instance::Ov(_) => "ov",
            Instance::Hs(_) => "hs",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InstanceParseError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error(transparent)]
    Shape(#[from] InstanceError),
}

fn syntax(line: usize, msg: impl Into<String>) -> InstanceParseError {
    InstanceParseError::Syntax {
        line,
        msg: msg.into(),
    }
}

pub fn parse_instance(src: &str) -> Result<Instance, InstanceParseError> {
    let mut lines = src
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (hline, header) = lines
        .next()
        .ok_or_else(|| syntax(1, "empty instance file"))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    let [kind, n, d] = fields[..] else {
        return Err(syntax(hline, "expected `<kind> <n> <d>`"));
    };
    let parts = match kind {
        "ov2" | "hs" => 2,
        "ov3" => 3,
        _ => return Err(syntax(hline, format!("unknown instance kind {kind:?}"))),
    };
    let n: usize = n.parse().map_err(|_| syntax(hline, "bad vector count"))?;
    let d: usize = d.parse().map_err(|_| syntax(hline, "bad dimension"))?;
    if n == 0 || d == 0 {
        return Err(syntax(hline, "vector count and dimension must be positive"));
    }

    let mut vectors: Vec<Vec<BitVec>> = vec![Vec::new()];
    let mut last = hline;
    for (line, text) in lines {
        last = line;
        if text == "--" {
            vectors.push(Vec::new());
            continue;
        }
        let v: BitVec = text
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(syntax(line, format!("not a bit vector: {text:?}"))),
            })
            .collect::<Result<_, _>>()?;
        if v.len() != d {
            return Err(syntax(line, format!("expected {d} bits, got {}", v.len())));
        }
        vectors.last_mut().expect("non-empty").push(v);
    }
    if vectors.len() != parts {
        return Err(syntax(
            last,
            format!("expected {parts} parts, got {}", vectors.len()),
        ));
    }
    if let Some(p) = vectors.iter().position(|p| p.len() != n) {
        return Err(syntax(
            last,
            format!(
                "part {} has {} vectors, expected {n}",
                p + 1,
                vectors[p].len()
            ),
        ));
    }
    Ok(if kind == "hs" {
        let ys = vectors.pop().expect("two parts");
        let xs = vectors.pop().expect("two parts");
        Instance::Hs(HsInstance::new(xs, ys)?)
    } else {
        Instance::Ov(OvInstance::new(vectors)?)
    })
}

fn write_part(out: &mut String, part: &[BitVec]) {
    for v in part {
        out.extend(v.iter().map(|&b| if b { '1' } else { '0' }));
        out.push('\n');
    }
}

/// Parts of unequal size are written with the size of the first part in
/// the header and will not parse back.
pub fn write_instance(inst: &Instance) -> String {
    let parts: Vec<&[BitVec]> = match inst {
        Instance::Ov(i) => i.parts().iter().map(Vec::as_slice).collect(),
        Instance::Hs(i) => vec![i.xs(), i.ys()],
    };
    let d = parts[0][0].len();
    let mut out = String::new();
    let _ = writeln!(out, "{} {} {d}", inst.kind(), parts[0].len());
    for (i, p) in parts.iter().enumerate() {
        if i > 0 {
            out.push_str("--\n");
        }
        write_part(&mut out, p);
    }
    out
}
