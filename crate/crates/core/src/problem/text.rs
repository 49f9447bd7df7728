//! Plain-text problem format.
//!
//! ```text
//! pdflow-problem 1
//! kind quadratic            # quadratic | toy | logcosh
//! dims <n> <m>              # primal and dual dimensions
//! seed <u64>|none
//! matrix Q <rows> <cols>    # kind-specific blocks follow, in this order
//! <row 0, space separated>
//! ...
//! vector k <len>
//! <values, space separated>
//! matrix A <m> <n>
//! ...
//! vector b <m>
//! ...
//! ```
//!
//! Kind-specific blocks: `quadratic` has `Q` then `k`; `toy` has `coefficients`
//! (length 3); `logcosh` has `shift`. Matrices are row-major. Every number is
//! written with 17 significant digits so a write/read cycle is lossless. Lines
//! starting with `#` and trailing `# ...` comments are ignored on read.

use std::fmt::Write as _;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::{LogCoshObjective, Objective, Problem, QuadraticObjective, ToyObjective};
use crate::error::{Error, Result};

const MAGIC: &str = "pdflow-problem 1";

pub(crate) fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub(crate) fn write_matrix(out: &mut String, name: &str, m: &DMatrix<f64>) {
    let _ = writeln!(out, "matrix {name} {} {}", m.nrows(), m.ncols());
    for row in m.row_iter() {
        let line: Vec<String> = row.iter().map(|&v| fmt_f64(v)).collect();
        let _ = writeln!(out, "{}", line.join(" "));
    }
}

pub(crate) fn write_vector(out: &mut String, name: &str, v: &DVector<f64>) {
    let _ = writeln!(out, "vector {name} {}", v.len());
    let line: Vec<String> = v.iter().map(|&x| fmt_f64(x)).collect();
    let _ = writeln!(out, "{}", line.join(" "));
}

pub fn write_problem(prob: &Problem) -> String {
    let mut out = String::new();
    let (kind, body) = prob.objective().text_body();
    let _ = writeln!(out, "{MAGIC}");
    let _ = writeln!(out, "kind {kind}");
    let _ = writeln!(out, "dims {} {}", prob.dim_x(), prob.dim_y());
    match prob.seed() {
        Some(s) => {
            let _ = writeln!(out, "seed {s}");
        }
        None => {
            let _ = writeln!(out, "seed none");
        }
    }
    out.push_str(&body);
    write_matrix(&mut out, "A", prob.a());
    write_vector(&mut out, "b", prob.b());
    out
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn next_line(&mut self) -> Result<(usize, &'a str)> {
        for (i, raw) in self.inner.by_ref() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if !line.is_empty() {
                return Ok((i + 1, line));
            }
        }
        Err(Error::Parse("unexpected end of problem file".into()))
    }

    fn keyword(&mut self, key: &str) -> Result<(usize, Vec<&'a str>)> {
        let (no, line) = self.next_line()?;
        let mut parts = line.split_whitespace();
        match parts.next() {
            Some(k) if k == key => Ok((no, parts.collect())),
            other => Err(Error::Parse(format!(
                "line {no}: expected `{key}`, found `{}`",
                other.unwrap_or("")
            ))),
        }
    }

    fn numbers(&mut self, expected: usize) -> Result<Vec<f64>> {
        let (no, line) = self.next_line()?;
        let vals = line
            .split_whitespace()
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|_| Error::Parse(format!("line {no}: bad number `{t}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        if vals.len() != expected {
            return Err(Error::Parse(format!(
                "line {no}: expected {expected} values, found {}",
                vals.len()
            )));
        }
        Ok(vals)
    }

    fn matrix(&mut self, name: &str) -> Result<DMatrix<f64>> {
        let (no, args) = self.keyword("matrix")?;
        let (rows, cols) = match args.as_slice() {
            [n, r, c] if *n == name => (parse_usize(r, no)?, parse_usize(c, no)?),
            _ => {
                return Err(Error::Parse(format!(
                    "line {no}: expected `matrix {name} <rows> <cols>`"
                )))
            }
        };
        let mut data = Vec::with_capacity(rows * cols);
        for _ in 0..rows {
            data.extend(self.numbers(cols)?);
        }
        Ok(DMatrix::from_row_slice(rows, cols, &data))
    }

    fn vector(&mut self, name: &str) -> Result<DVector<f64>> {
        let (no, args) = self.keyword("vector")?;
        let len = match args.as_slice() {
            [n, l] if *n == name => parse_usize(l, no)?,
            _ => {
                return Err(Error::Parse(format!(
                    "line {no}: expected `vector {name} <len>`"
                )))
            }
        };
        Ok(DVector::from_vec(self.numbers(len)?))
    }
}

fn parse_usize(tok: &str, no: usize) -> Result<usize> {
    tok.parse()
        .map_err(|_| Error::Parse(format!("line {no}: bad integer `{tok}`")))
}

pub fn read_problem(text: &str) -> Result<Problem> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
    };
    let (no, header) = lines.next_line()?;
    if header != MAGIC {
        return Err(Error::Parse(format!(
            "line {no}: expected header `{MAGIC}`"
        )));
    }
    let (no, kind) = lines.keyword("kind")?;
    let kind = kind
        .first()
        .copied()
        .ok_or_else(|| Error::Parse(format!("line {no}: missing kind")))?;
    let (no, dims) = lines.keyword("dims")?;
    let (n, m) = match dims.as_slice() {
        [n, m] => (parse_usize(n, no)?, parse_usize(m, no)?),
        _ => return Err(Error::Parse(format!("line {no}: expected `dims <n> <m>`"))),
    };
    let (no, seed) = lines.keyword("seed")?;
    let seed = match seed.as_slice() {
        ["none"] => None,
        [s] => Some(
            s.parse::<u64>()
                .map_err(|_| Error::Parse(format!("line {no}: bad seed `{s}`")))?,
        ),
        _ => return Err(Error::Parse(format!("line {no}: expected `seed <u64>|none`"))),
    };

    let objective: Arc<dyn Objective> = match kind {
        "quadratic" => {
            let q = lines.matrix("Q")?;
            let k = lines.vector("k")?;
            Arc::new(QuadraticObjective::new(q, k))
        }
        "toy" => {
            let w = lines.vector("coefficients")?;
            if w.len() != 3 {
                return Err(Error::Parse("toy coefficients must have length 3".into()));
            }
            Arc::new(ToyObjective {
                coefficients: [w[0], w[1], w[2]],
            })
        }
        "logcosh" => Arc::new(LogCoshObjective {
            shift: lines.vector("shift")?,
        }),
        other => return Err(Error::Parse(format!("unknown problem kind `{other}`"))),
    };
    if let Some((q, _)) = objective.quadratic_form() {
        if q.nrows() != n || q.ncols() != n {
            return Err(Error::Parse(format!(
                "Q is {}×{}, header declares n = {n}",
                q.nrows(),
                q.ncols()
            )));
        }
    }
    let a = lines.matrix("A")?;
    let b = lines.vector("b")?;
    if a.nrows() != m || a.ncols() != n {
        return Err(Error::Parse(format!(
            "A is {}×{}, header declares {m}×{n}",
            a.nrows(),
            a.ncols()
        )));
    }
    let prob = Problem::new(objective, a, b)?;
    Ok(match seed {
        Some(s) => prob.with_seed(s),
        None => prob,
    })
}
