//! The `incmat v1` text format.
//!
//! ```text
//! incmat v1
//! t=<int> n=<int>[ d=<int> h=<int> r=<int> x=<int> z=<int> y=<int>]
//! <row 1: exactly n characters from {0,1}>
//! ...
//! <row t>
//! ```
//!
//! Lines end in LF. The metadata block is all-or-nothing and its keys must
//! appear in the order shown.

use crate::error::{Error, Result};
use crate::matrix::PoolingMatrix;

pub const MAGIC: &str = "incmat v1";

/// Design parameters carried in the header.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Metadata {
    pub d: usize,
    pub h: usize,
    pub r: usize,
    pub x: usize,
    pub z: usize,
    pub y: usize,
}

impl Metadata {
    /// `max(d, h)`, the size of the `A`-sets the matrix was built against.
    pub fn big_d(&self) -> usize {
        self.d.max(self.h)
    }

    /// Number of tolerated erroneous outcomes, `floor((x - 1) / 2)`.
    pub fn error_budget(&self) -> usize {
        self.x.saturating_sub(1) / 2
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IncMat {
    pub matrix: PoolingMatrix,
    pub meta: Option<Metadata>,
}

pub fn write_incmat(m: &PoolingMatrix, meta: Option<&Metadata>) -> String {
    let mut out = String::with_capacity((m.cols() + 1) * m.rows() + 64);
    out.push_str(MAGIC);
    out.push('\n');
    out.push_str(&format!("t={} n={}", m.rows(), m.cols()));
    if let Some(md) = meta {
        out.push_str(&format!(
            " d={} h={} r={} x={} z={} y={}",
            md.d, md.h, md.r, md.x, md.z, md.y
        ));
    }
    out.push('\n');
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            out.push(if m.get(i, j) { '1' } else { '0' });
        }
        out.push('\n');
    }
    out
}

fn bad(line: usize, msg: impl Into<String>) -> Error {
    Error::Format {
        line,
        msg: msg.into(),
    }
}

fn parse_kv(line: usize, token: &str, key: &str) -> Result<usize> {
    let value = token
        .strip_prefix(key)
        .and_then(|rest| rest.strip_prefix('='))
        .ok_or_else(|| bad(line, format!("expected `{key}=<int>`, found `{token}`")))?;
    if value.is_empty() || !value.bytes().all(|c| c.is_ascii_digit()) {
        return Err(bad(line, format!("`{key}` must be a nonnegative integer")));
    }
    value
        .parse()
        .map_err(|_| bad(line, format!("`{key}` out of range")))
}

pub fn parse_incmat(text: &str) -> Result<IncMat> {
    let body = text.strip_suffix('\n').unwrap_or(text);
    let lines: Vec<&str> = body.split('\n').collect();
    if lines.first() != Some(&MAGIC) {
        return Err(bad(1, format!("expected `{MAGIC}`")));
    }
    let header = lines
        .get(1)
        .ok_or_else(|| bad(2, "missing dimension line"))?;
    let tokens: Vec<&str> = header.split(' ').collect();
    if tokens.len() != 2 && tokens.len() != 8 {
        return Err(bad(
            2,
            "expected `t=.. n=..` optionally followed by `d=.. h=.. r=.. x=.. z=.. y=..`",
        ));
    }
    let t = parse_kv(2, tokens[0], "t")?;
    let n = parse_kv(2, tokens[1], "n")?;
    if t == 0 || n == 0 {
        return Err(bad(2, "t and n must be positive"));
    }
    let meta = if tokens.len() == 8 {
        Some(Metadata {
            d: parse_kv(2, tokens[2], "d")?,
            h: parse_kv(2, tokens[3], "h")?,
            r: parse_kv(2, tokens[4], "r")?,
            x: parse_kv(2, tokens[5], "x")?,
            z: parse_kv(2, tokens[6], "z")?,
            y: parse_kv(2, tokens[7], "y")?,
        })
    } else {
        None
    };
    let rows = &lines[2..];
    if rows.len() != t {
        return Err(bad(
            lines.len(),
            format!("expected {t} matrix rows, found {}", rows.len()),
        ));
    }
    let mut matrix = PoolingMatrix::zeros(t, n)?;
    for (i, row) in rows.iter().enumerate() {
        let line = i + 3;
        if row.len() != n {
            return Err(bad(
                line,
                format!("expected {n} entries, found {}", row.len()),
            ));
        }
        for (j, c) in row.bytes().enumerate() {
            match c {
                b'0' => {}
                b'1' => matrix.set(i, j, true),
                other => {
                    return Err(bad(
                        line,
                        format!("invalid character {:?} at column {}", other as char, j + 1),
                    ))
                }
            }
        }
    }
    Ok(IncMat { matrix, meta })
}
