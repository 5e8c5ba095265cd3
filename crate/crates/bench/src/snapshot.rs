//! Plain-text instance snapshots for exact replay.
//!
//! A snapshot is a sequence of lines `tag value value ...`. Floats are
//! written in the shortest form that parses back to the identical `f64`,
//! so a reloaded instance reproduces every run bit for bit.
//!
//! ```text
//! aprid-snapshot 1
//! kind qcqp_finite_sum          | bilinear
//! dims <n> <p>                  | <n> <m>
//! lower <n floats>              (qcqp: box of x)
//! upper <n floats>
//! H <p*n floats>                (one line per objective term)
//! c <p floats>
//! Q <n*n floats>                (one line per constraint)
//! a <n floats>
//! b <float>
//! ```
//!
//! Bilinear snapshots carry `A` (row-major, one line), `b`, `c`, `sigma`,
//! and `lower_x upper_x lower_z upper_z`.

use std::fmt::Write as _;
use std::path::Path;

use aprid_core::problems::{BilinearSaddle, QcqpFiniteSum};
use aprid_core::{BoxSet, MinimaxProblem, StochasticProgram};

use crate::error::{BenchError, Result};

const MAGIC: &str = "aprid-snapshot 1";

pub enum Snapshot {
    Qcqp(QcqpFiniteSum),
    Bilinear(BilinearSaddle),
}

fn put(out: &mut String, tag: &str, values: &[f64]) {
    out.push_str(tag);
    for v in values {
        let _ = write!(out, " {v:?}");
    }
    out.push('\n');
}

pub fn write_qcqp(problem: &QcqpFiniteSum) -> String {
    let (n, p, big_n, big_m) = problem.sizes();
    let mut out = format!("{MAGIC}\nkind qcqp_finite_sum\ndims {n} {p}\n");
    let set = StochasticProgram::feasible_set(problem);
    put(&mut out, "lower", set.lower());
    put(&mut out, "upper", set.upper());
    for i in 0..big_n {
        let (h, c) = problem.objective_data(i);
        put(&mut out, "H", h);
        put(&mut out, "c", c);
    }
    for j in 0..big_m {
        let (q, a, b) = problem.constraint_data(j);
        put(&mut out, "Q", q);
        put(&mut out, "a", a);
        put(&mut out, "b", &[b]);
    }
    out
}

pub fn write_bilinear(problem: &BilinearSaddle) -> String {
    let (n, m) = (problem.dim_x(), problem.dim_z());
    let mut out = format!("{MAGIC}\nkind bilinear\ndims {n} {m}\n");
    put(&mut out, "A", problem.matrix());
    put(&mut out, "b", problem.b());
    put(&mut out, "c", problem.c());
    put(&mut out, "sigma", &[problem.noise_sigma()]);
    put(&mut out, "lower_x", problem.set_x().lower());
    put(&mut out, "upper_x", problem.set_x().upper());
    put(&mut out, "lower_z", problem.set_z().lower());
    put(&mut out, "upper_z", problem.set_z().upper());
    out
}

struct Lines<'a> {
    path: &'a Path,
    iter: std::iter::Enumerate<std::str::Lines<'a>>,
    line: usize,
}

impl<'a> Lines<'a> {
    fn err(&self, message: impl Into<String>) -> BenchError {
        BenchError::Parse {
            path: self.path.into(),
            line: self.line,
            message: message.into(),
        }
    }

    /// Next line as `(tag, rest)`; `None` at end of input.
    fn next_line(&mut self) -> Option<(&'a str, &'a str)> {
        for (i, raw) in self.iter.by_ref() {
            self.line = i + 1;
            let t = raw.trim();
            if t.is_empty() {
                continue;
            }
            return Some(t.split_once(' ').unwrap_or((t, "")));
        }
        None
    }

    fn peek_tag(&self) -> Option<&'a str> {
        let line = self.iter.clone().map(|(_, l)| l.trim()).find(|l| !l.is_empty())?;
        Some(line.split_once(' ').map_or(line, |(t, _)| t))
    }

    fn expect(&mut self, tag: &str, len: usize) -> Result<Vec<f64>> {
        let (got, rest) = self.next_line().ok_or_else(|| self.err(format!("unexpected end, wanted '{tag}'")))?;
        if got != tag {
            return Err(self.err(format!("expected '{tag}', found '{got}'")));
        }
        let values: std::result::Result<Vec<f64>, _> = rest.split_whitespace().map(str::parse::<f64>).collect();
        let values = values.map_err(|e| self.err(format!("bad number: {e}")))?;
        if values.len() != len {
            return Err(self.err(format!("'{tag}' needs {len} values, found {}", values.len())));
        }
        Ok(values)
    }
}

pub fn parse_snapshot(text: &str, path: &Path) -> Result<Snapshot> {
    let mut lines = Lines {
        path,
        iter: text.lines().enumerate(),
        line: 0,
    };
    match lines.next_line() {
        Some(("aprid-snapshot", "1")) => {}
        _ => return Err(lines.err("missing 'aprid-snapshot 1' header")),
    }
    let kind = match lines.next_line() {
        Some(("kind", k)) => k,
        _ => return Err(lines.err("missing 'kind' line")),
    };
    let dims: Vec<usize> = match lines.next_line() {
        Some(("dims", rest)) => rest
            .split_whitespace()
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| lines.err("bad dims"))?,
        _ => return Err(lines.err("missing 'dims' line")),
    };
    if dims.len() != 2 || dims.contains(&0) {
        return Err(lines.err("dims needs two positive integers"));
    }
    let (d0, d1) = (dims[0], dims[1]);
    match kind {
        "qcqp_finite_sum" => {
            let (n, p) = (d0, d1);
            let set = BoxSet::new(lines.expect("lower", n)?, lines.expect("upper", n)?)?;
            let (mut h, mut c, mut q, mut a, mut b) = (vec![], vec![], vec![], vec![], vec![]);
            while let Some(tag) = lines.peek_tag() {
                match tag {
                    "H" => {
                        h.extend(lines.expect("H", p * n)?);
                        c.extend(lines.expect("c", p)?);
                    }
                    "Q" => {
                        q.extend(lines.expect("Q", n * n)?);
                        a.extend(lines.expect("a", n)?);
                        b.extend(lines.expect("b", 1)?);
                    }
                    other => {
                        lines.next_line();
                        return Err(lines.err(format!("unexpected tag '{other}'")));
                    }
                }
            }
            Ok(Snapshot::Qcqp(QcqpFiniteSum::from_terms(n, p, h, c, q, a, b, set)?))
        }
        "bilinear" => {
            let (n, m) = (d0, d1);
            let a = lines.expect("A", n * m)?;
            let b = lines.expect("b", n)?;
            let c = lines.expect("c", m)?;
            let sigma = lines.expect("sigma", 1)?[0];
            let set_x = BoxSet::new(lines.expect("lower_x", n)?, lines.expect("upper_x", n)?)?;
            let set_z = BoxSet::new(lines.expect("lower_z", m)?, lines.expect("upper_z", m)?)?;
            Ok(Snapshot::Bilinear(BilinearSaddle::new(a, b, c, set_x, set_z, sigma)?))
        }
        other => Err(lines.err(format!("unknown snapshot kind '{other}'"))),
    }
}

pub fn load_snapshot(path: &Path) -> Result<Snapshot> {
    let text = std::fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?;
    parse_snapshot(&text, path)
}
