//! Plain-text matrix dump of a [`MixedIntegerQp`].
//!
//! ```text
//! miqp 1
//! vars <n>
//! rows <r>
//! P <nnz>
//! <i> <j> <value>          one line per stored entry, both triangles
//! q
//! <value>                  n lines
//! A <nnz>
//! <row> <col> <value>
//! row_bounds
//! <lower> <upper>          r lines
//! var_bounds
//! <lb> <ub>                n lines
//! binary <k>
//! <index>                  k lines
//! names
//! <index> <name>           optional, n lines
//! end
//! ```
//!
//! Numbers use the shortest representation that parses back to the same
//! `f64`; infinite bounds are written `inf` and `-inf`. Indices are 0-based.

use std::fmt::Write as _;

use super::{MargotError, VariableMap};
use crate::bnb::MixedIntegerQp;
use crate::qp::{QuadraticProgram, SparseMatrix};

pub fn write_matrix_dump(prob: &MixedIntegerQp, map: Option<&VariableMap>) -> String {
    let qp = &prob.base;
    let mut out = String::new();
    let n = qp.num_vars();
    writeln!(out, "miqp 1").unwrap();
    writeln!(out, "vars {n}").unwrap();
    writeln!(out, "rows {}", qp.num_rows()).unwrap();
    writeln!(out, "P {}", qp.p.entries.len()).unwrap();
    for &(i, j, v) in &qp.p.entries {
        writeln!(out, "{i} {j} {v:?}").unwrap();
    }
    writeln!(out, "q").unwrap();
    for v in &qp.q {
        writeln!(out, "{v:?}").unwrap();
    }
    writeln!(out, "A {}", qp.a.entries.len()).unwrap();
    for &(i, j, v) in &qp.a.entries {
        writeln!(out, "{i} {j} {v:?}").unwrap();
    }
    writeln!(out, "row_bounds").unwrap();
    for (lo, hi) in qp.lower.iter().zip(&qp.upper) {
        writeln!(out, "{lo:?} {hi:?}").unwrap();
    }
    writeln!(out, "var_bounds").unwrap();
    for (lo, hi) in qp.lb.iter().zip(&qp.ub) {
        writeln!(out, "{lo:?} {hi:?}").unwrap();
    }
    writeln!(out, "binary {}", prob.binary_vars.len()).unwrap();
    for j in &prob.binary_vars {
        writeln!(out, "{j}").unwrap();
    }
    if let Some(map) = map {
        writeln!(out, "names").unwrap();
        for k in 0..n {
            writeln!(out, "{k} {}", map.name(k)).unwrap();
        }
    }
    writeln!(out, "end").unwrap();
    out
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    line: usize,
}

impl<'a> Lines<'a> {
    fn err(&self, message: impl Into<String>) -> MargotError {
        MargotError::Dump {
            line: self.line,
            message: message.into(),
        }
    }

    fn next_line(&mut self) -> Result<&'a str, MargotError> {
        for (k, l) in self.inner.by_ref() {
            self.line = k + 1;
            let l = l.trim();
            if !l.is_empty() {
                return Ok(l);
            }
        }
        Err(self.err("unexpected end of input"))
    }

    fn header(&mut self, key: &str) -> Result<Option<usize>, MargotError> {
        let line = self.next_line()?;
        let mut parts = line.split_whitespace();
        if parts.next() != Some(key) {
            return Err(self.err(format!("expected `{key}`, got `{line}`")));
        }
        match parts.next() {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| self.err(format!("bad count `{v}`"))),
        }
    }

    fn counted(&mut self, key: &str) -> Result<usize, MargotError> {
        self.header(key)?
            .ok_or_else(|| self.err(format!("`{key}` needs a count")))
    }

    fn fields<const K: usize>(&mut self) -> Result<[&'a str; K], MargotError> {
        let line = self.next_line()?;
        let parts: Vec<&str> = line.split_whitespace().collect();
        parts
            .try_into()
            .map_err(|_| self.err(format!("expected {K} fields in `{line}`")))
    }

    fn float(&self, s: &str) -> Result<f64, MargotError> {
        s.parse().map_err(|_| self.err(format!("bad number `{s}`")))
    }

    fn index(&self, s: &str, limit: usize) -> Result<usize, MargotError> {
        s.parse()
            .ok()
            .filter(|&i| i < limit)
            .ok_or_else(|| self.err(format!("bad index `{s}`")))
    }

    fn triplets(&mut self, key: &str, rows: usize, cols: usize) -> Result<SparseMatrix, MargotError> {
        let nnz = self.counted(key)?;
        let mut mat = SparseMatrix::zeros(rows, cols);
        for _ in 0..nnz {
            let [i, j, v] = self.fields::<3>()?;
            mat.entries
                .push((self.index(i, rows)?, self.index(j, cols)?, self.float(v)?));
        }
        Ok(mat)
    }

    fn pairs(&mut self, key: &str, count: usize) -> Result<(Vec<f64>, Vec<f64>), MargotError> {
        self.header(key)?;
        let mut lo = Vec::with_capacity(count);
        let mut hi = Vec::with_capacity(count);
        for _ in 0..count {
            let [a, b] = self.fields::<2>()?;
            lo.push(self.float(a)?);
            hi.push(self.float(b)?);
        }
        Ok((lo, hi))
    }
}

/// Parses a dump produced by [`write_matrix_dump`]. The `names` section is
/// skipped.
pub fn read_matrix_dump(text: &str) -> Result<MixedIntegerQp, MargotError> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
        line: 0,
    };
    if lines.header("miqp")? != Some(1) {
        return Err(lines.err("unsupported version"));
    }
    let n = lines.counted("vars")?;
    let r = lines.counted("rows")?;
    let mut qp = QuadraticProgram::new(n);
    qp.p = lines.triplets("P", n, n)?;
    lines.header("q")?;
    for k in 0..n {
        let [v] = lines.fields::<1>()?;
        qp.q[k] = lines.float(v)?;
    }
    qp.a = lines.triplets("A", r, n)?;
    (qp.lower, qp.upper) = lines.pairs("row_bounds", r)?;
    (qp.lb, qp.ub) = lines.pairs("var_bounds", n)?;
    let k = lines.counted("binary")?;
    let mut binaries = Vec::with_capacity(k);
    for _ in 0..k {
        let [j] = lines.fields::<1>()?;
        binaries.push(lines.index(j, n)?);
    }
    loop {
        let line = lines.next_line()?;
        if line == "end" {
            break;
        }
    }
    Ok(MixedIntegerQp::new(qp, binaries)?)
}
