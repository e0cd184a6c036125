//! The `flatlp` v1 problem file and the JSON solution output.
//!
//! ```text
//! # maximize x1 + x2 on the unit square
//! 2 4             # n m
//! 1 1             # objective d_1 .. d_n
//! 1 0 1           # a_u1 .. a_un r_u, one line per constraint
//! 0 1 1
//! -1 0 0
//! 0 -1 0
//! point 0.5 0.5   # optional strictly interior point
//! ```
//!
//! `#` starts a comment anywhere; blank lines are ignored; tokens are
//! whitespace separated decimal or scientific reals.

use std::fmt::Write as _;

use crate::error::{LpError, Result};
use crate::model::{LpProblem, Tolerances};
use crate::oracle::OracleOutcome;
use crate::reduce::{SolveConfig, SolveOutcome, Status};
use crate::redundancy::check_interior;

/// Formats a real with 17 significant digits.
pub fn fmt_real(v: f64) -> String {
    format!("{v:.16e}")
}

/// A problem as written in the file, before normalization.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemFile {
    pub objective: Vec<f64>,
    pub rows: Vec<Vec<f64>>,
    pub rhs: Vec<f64>,
    pub point: Option<Vec<f64>>,
}

struct Line<'a> {
    number: usize,
    tokens: Vec<&'a str>,
}

fn parse_err(line: usize, message: impl Into<String>) -> LpError {
    LpError::Parse {
        line,
        message: message.into(),
    }
}

fn parse_reals(line: &Line<'_>, tokens: &[&str]) -> Result<Vec<f64>> {
    tokens
        .iter()
        .map(|t| match t.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(parse_err(line.number, format!("'{t}' is not a finite real"))),
        })
        .collect()
}

impl ProblemFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, raw)| Line {
                number: i + 1,
                tokens: raw.split('#').next().unwrap_or("").split_whitespace().collect(),
            })
            .filter(|l| !l.tokens.is_empty());
        let eof = text.lines().count() + 1;

        let header = lines.next().ok_or_else(|| parse_err(eof, "missing header line 'n m'"))?;
        let [n, m] = header.tokens[..] else {
            return Err(parse_err(header.number, "header must be two integers 'n m'"));
        };
        let n: usize = n
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| parse_err(header.number, format!("'{n}' is not a positive integer")))?;
        let m: usize = m
            .parse()
            .ok()
            .filter(|&m| m > 0)
            .ok_or_else(|| parse_err(header.number, format!("'{m}' is not a positive integer")))?;

        let obj = lines.next().ok_or_else(|| parse_err(eof, "missing objective line"))?;
        if obj.tokens.len() != n {
            return Err(parse_err(
                obj.number,
                format!("objective needs {n} values, found {}", obj.tokens.len()),
            ));
        }
        let objective = parse_reals(&obj, &obj.tokens)?;

        let mut rows = Vec::with_capacity(m);
        let mut rhs = Vec::with_capacity(m);
        for u in 1..=m {
            let line = lines
                .next()
                .ok_or_else(|| parse_err(eof, format!("expected {m} constraints, found {}", u - 1)))?;
            if line.tokens.len() != n + 1 {
                return Err(parse_err(
                    line.number,
                    format!("constraint {u} needs {} values, found {}", n + 1, line.tokens.len()),
                ));
            }
            let mut vals = parse_reals(&line, &line.tokens)?;
            rhs.push(vals.pop().expect("n + 1 values"));
            rows.push(vals);
        }

        let point = match lines.next() {
            None => None,
            Some(line) => {
                if line.tokens[0] != "point" {
                    return Err(parse_err(line.number, "unexpected content after the constraints"));
                }
                if line.tokens.len() != n + 1 {
                    return Err(parse_err(
                        line.number,
                        format!("point needs {n} values, found {}", line.tokens.len() - 1),
                    ));
                }
                Some(parse_reals(&line, &line.tokens[1..])?)
            }
        };
        if let Some(extra) = lines.next() {
            return Err(parse_err(extra.number, "unexpected content after the point line"));
        }
        Ok(ProblemFile {
            objective,
            rows,
            rhs,
            point,
        })
    }

    /// The problem exactly as written (not normalized).
    pub fn raw_problem(&self) -> Result<LpProblem> {
        LpProblem::new(self.objective.clone(), self.rows.clone(), self.rhs.clone())
    }

    pub fn from_problem(problem: &LpProblem, point: Option<&[f64]>) -> Self {
        ProblemFile {
            objective: problem.obj_dir().to_vec(),
            rows: problem.rows().to_vec(),
            rhs: problem.rhs().to_vec(),
            point: point.map(<[f64]>::to_vec),
        }
    }

    /// Serializes with shortest round-trip formatting, so parsing the text
    /// gives back identical values.
    pub fn to_text(&self) -> String {
        let join = |v: &[f64]| v.iter().map(f64::to_string).collect::<Vec<_>>().join(" ");
        let mut out = format!("{} {}\n{}\n", self.objective.len(), self.rows.len(), join(&self.objective));
        for (row, r) in self.rows.iter().zip(&self.rhs) {
            let _ = writeln!(out, "{} {}", join(row), r);
        }
        if let Some(p) = &self.point {
            let _ = writeln!(out, "point {}", join(p));
        }
        out
    }
}

/// Parses a problem file into a normalized problem plus its interior point.
///
/// All-zero rows follow the vacuous-row rule: dropped when satisfiable,
/// [`LpError::InfeasibleDetected`] otherwise. A declared point must be
/// strictly feasible.
pub fn parse_problem_file(text: &str, tol: &Tolerances) -> Result<(LpProblem, Option<Vec<f64>>)> {
    let file = ProblemFile::parse(text)?;
    let (problem, _) = file.raw_problem()?.drop_vacuous_rows(tol.feas)?;
    let problem = problem.normalize_rows()?;
    if let Some(p) = &file.point {
        check_interior(&problem, p, tol.feas)?;
    }
    Ok((problem, file.point))
}

fn json_reals(v: &[f64]) -> String {
    let items: Vec<String> = v.iter().map(|&x| fmt_real(x)).collect();
    format!("[{}]", items.join(","))
}

fn json_ids(v: &[usize]) -> String {
    let items: Vec<String> = v.iter().map(usize::to_string).collect();
    format!("[{}]", items.join(","))
}

/// Solution JSON. Keys in order: `status`, `x` and `z` (optimal only),
/// `stages`, `seed`, `tolerances`. Variables in `stages[].j` are 1-based.
pub fn write_solution_json(outcome: &SolveOutcome, config: &SolveConfig) -> String {
    let mut out = format!("{{\"status\":\"{}\"", outcome.status);
    if outcome.status == Status::Optimal {
        if let (Some(x), Some(z)) = (&outcome.x, outcome.z) {
            let _ = write!(out, ",\"x\":{},\"z\":{}", json_reals(x), fmt_real(z));
        }
    }
    let stages: Vec<String> = outcome
        .stages
        .iter()
        .map(|s| {
            let mut st = String::from("{");
            if let (Some(rec), Some(t)) = (&s.record, s.cosine) {
                let _ = write!(st, "\"k\":{},\"j\":{},\"t\":{},", rec.row_id, rec.pivot + 1, fmt_real(t));
            }
            let _ = write!(st, "\"deleted\":{}}}", json_ids(&s.deleted_redundant));
            st
        })
        .collect();
    let tol = &config.tol;
    let _ = write!(
        out,
        ",\"stages\":[{}],\"seed\":{},\"tolerances\":{{\"feas\":{},\"norm\":{},\"dir\":{}}}}}",
        stages.join(","),
        config.seed,
        fmt_real(tol.feas),
        fmt_real(tol.norm),
        fmt_real(tol.dir)
    );
    out
}

/// Oracle JSON: `status`, then `x`, `z` and `active_set` (row ids) when optimal.
pub fn write_oracle_json(outcome: &OracleOutcome) -> String {
    match outcome {
        OracleOutcome::Optimal { x, z, active_set } => format!(
            "{{\"status\":\"optimal\",\"x\":{},\"z\":{},\"active_set\":{}}}",
            json_reals(x),
            fmt_real(*z),
            json_ids(active_set)
        ),
        OracleOutcome::NoFeasibleVertex => "{\"status\":\"infeasible\"}".to_string(),
    }
}
