//! Plain-text operator files.
//!
//! A file holds one or more named operators. Each starts with a header line
//! `operator <name> dims <d1,d2,...>` followed by one line per matrix row,
//! each row being whitespace-separated `re,im` pairs. Blank lines and lines
//! starting with `#` are ignored. Floats are written with 17 significant
//! digits, so a write-read round trip is exact.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::operator::{c64, CMat, Operator, SubsystemDims};

#[derive(Clone, Debug, PartialEq)]
pub struct NamedOperator {
    pub name: String,
    pub op: Operator,
}

pub fn write_operators(ops: &[NamedOperator]) -> String {
    let mut out = String::new();
    for NamedOperator { name, op } in ops {
        let dims: Vec<String> = op.dims().as_slice().iter().map(usize::to_string).collect();
        writeln!(out, "operator {name} dims {}", dims.join(",")).unwrap();
        let m = op.matrix();
        for i in 0..m.nrows() {
            let row: Vec<String> = (0..m.ncols()).map(|j| format!("{:.16e},{:.16e}", m[(i, j)].re, m[(i, j)].im)).collect();
            writeln!(out, "{}", row.join(" ")).unwrap();
        }
    }
    out
}

fn parse_err(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::Parse(format!("line {line}: {msg}"))
}

fn parse_entry(tok: &str, line: usize) -> Result<c64> {
    let (re, im) = tok.split_once(',').ok_or_else(|| parse_err(line, format!("expected re,im, got `{tok}`")))?;
    let re: f64 = re.trim().parse().map_err(|e| parse_err(line, format!("`{re}`: {e}")))?;
    let im: f64 = im.trim().parse().map_err(|e| parse_err(line, format!("`{im}`: {e}")))?;
    if !re.is_finite() || !im.is_finite() {
        return Err(parse_err(line, "non-finite entry"));
    }
    Ok(c64::new(re, im))
}

pub fn read_operators(text: &str) -> Result<Vec<NamedOperator>> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let mut out = Vec::new();
    while let Some((no, header)) = lines.next() {
        let words: Vec<&str> = header.split_whitespace().collect();
        let [kw, name, dkw, dims] = words[..] else {
            return Err(parse_err(no, "expected `operator <name> dims <d1,...>`"));
        };
        if kw != "operator" || dkw != "dims" {
            return Err(parse_err(no, "expected `operator <name> dims <d1,...>`"));
        }
        let dims: Vec<usize> = dims
            .split(',')
            .map(|d| d.parse().map_err(|e| parse_err(no, format!("dimension `{d}`: {e}"))))
            .collect::<Result<_>>()?;
        let dims = SubsystemDims::new(dims)?;
        let d = dims.total();
        let mut m = CMat::zeros(d, d);
        for i in 0..d {
            let (rno, row) = lines.next().ok_or_else(|| parse_err(no, format!("operator `{name}` has fewer than {d} rows")))?;
            let entries: Vec<c64> = row.split_whitespace().map(|t| parse_entry(t, rno)).collect::<Result<_>>()?;
            if entries.len() != d {
                return Err(parse_err(rno, format!("expected {d} entries, found {}", entries.len())));
            }
            for (j, v) in entries.into_iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        out.push(NamedOperator { name: name.to_string(), op: Operator::new(m, dims)? });
    }
    Ok(out)
}

/// The operator called `name`, or a parse error naming the missing entry.
pub fn find<'a>(ops: &'a [NamedOperator], name: &str) -> Result<&'a Operator> {
    ops.iter()
        .find(|o| o.name == name)
        .map(|o| &o.op)
        .ok_or_else(|| Error::Parse(format!("operator `{name}` not found")))
}
