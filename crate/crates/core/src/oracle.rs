//! Brute-force LP solver by vertex enumeration.
//!
//! Every subset of `n` rows (where `n` is the number of live variables) is
//! solved as an equality system; feasible solutions are the vertices of the
//! region and the best one is the optimum. The region is assumed bounded:
//! unboundedness is not detected, and a region without vertices reports
//! [`OracleOutcome::NoFeasibleVertex`].

use itertools::Itertools;

use crate::error::{LpError, Result};
use crate::model::{dot, LpProblem};

/// Largest number of row subsets the oracle will enumerate.
pub const ENUMERATION_CAP: u128 = 2_000_000;
/// Scaled pivot magnitude below which a system is declared singular.
pub const SINGULAR_PIVOT: f64 = 1e-10;
/// Feasibility tolerance for candidate vertices.
pub const VERTEX_FEAS_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct VertexCandidate {
    /// Row indices (into the problem's current rows), increasing.
    pub active_set: Vec<usize>,
    pub x: Vec<f64>,
    pub feasible: bool,
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum OracleOutcome {
    Optimal {
        x: Vec<f64>,
        z: f64,
        /// Row ids of the defining rows.
        active_set: Vec<usize>,
    },
    NoFeasibleVertex,
}

/// Solves the square system `a·x = b` by Gaussian elimination with scaled
/// partial pivoting.
pub fn solve_linear_system(a: &[Vec<f64>], b: &[f64]) -> Result<Vec<f64>> {
    let n = a.len();
    if b.len() != n {
        return Err(LpError::DimensionMismatch {
            expected: n,
            got: b.len(),
        });
    }
    let mut m: Vec<Vec<f64>> = Vec::with_capacity(n);
    for (row, &rhs) in a.iter().zip(b) {
        if row.len() != n {
            return Err(LpError::DimensionMismatch {
                expected: n,
                got: row.len(),
            });
        }
        let mut r = row.clone();
        r.push(rhs);
        m.push(r);
    }
    let scale: Vec<f64> = m
        .iter()
        .map(|r| r[..n].iter().fold(0.0f64, |acc, v| acc.max(v.abs())))
        .collect();
    if scale.contains(&0.0) {
        return Err(LpError::Singular);
    }
    let mut scale = scale;

    for col in 0..n {
        let (piv, piv_mag) = (col..n)
            .map(|r| (r, m[r][col].abs() / scale[r]))
            .fold((col, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if piv_mag < SINGULAR_PIVOT {
            return Err(LpError::Singular);
        }
        m.swap(col, piv);
        scale.swap(col, piv);
        for r in col + 1..n {
            let f = m[r][col] / m[col][col];
            if f == 0.0 {
                continue;
            }
            let (top, rest) = m.split_at_mut(r);
            for (t, p) in rest[0][col..].iter_mut().zip(&top[col][col..]) {
                *t -= f * p;
            }
        }
    }

    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| m[r][c] * x[c]).sum();
        x[r] = (m[r][n] - s) / m[r][r];
    }
    Ok(x)
}

/// `C(m, k)`, saturating.
pub fn binomial(m: usize, k: usize) -> u128 {
    if k > m {
        return 0;
    }
    let k = k.min(m - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((m - i) as u128) / (i as u128 + 1);
    }
    acc
}

fn check_cap(problem: &LpProblem) -> Result<()> {
    let combinations = binomial(problem.row_count(), problem.live_count());
    if combinations > ENUMERATION_CAP {
        return Err(LpError::OracleTooLarge {
            combinations,
            cap: ENUMERATION_CAP,
        });
    }
    Ok(())
}

/// Lazily enumerates every vertex candidate of the problem in lexicographic
/// order of active sets. `objective` scores each candidate (`z = offset + objective·x`).
pub fn candidates<'a>(
    problem: &'a LpProblem,
    objective: &'a [f64],
    offset: f64,
) -> Result<impl Iterator<Item = VertexCandidate> + 'a> {
    check_cap(problem)?;
    let live: Vec<usize> = problem.live_indices().collect();
    let n = live.len();
    Ok((0..problem.row_count()).combinations(n).filter_map(move |subset| {
        let a: Vec<Vec<f64>> = subset
            .iter()
            .map(|&u| live.iter().map(|&j| problem.row(u)[j]).collect())
            .collect();
        let b: Vec<f64> = subset.iter().map(|&u| problem.rhs()[u]).collect();
        let y = solve_linear_system(&a, &b).ok()?;
        let mut x = vec![0.0; problem.n_vars()];
        for (&j, v) in live.iter().zip(y) {
            x[j] = v;
        }
        let feasible = problem
            .rows()
            .iter()
            .zip(problem.rhs())
            .all(|(row, r)| r - dot(row, &x) >= -VERTEX_FEAS_TOL);
        let z = offset + dot(objective, &x);
        Some(VertexCandidate {
            active_set: subset,
            x,
            feasible,
            z,
        })
    }))
}

/// Maximizes `offset + objective·x` over the problem's region.
pub fn maximize(problem: &LpProblem, objective: &[f64], offset: f64) -> Result<OracleOutcome> {
    let mut best: Option<VertexCandidate> = None;
    for cand in candidates(problem, objective, offset)?.filter(|c| c.feasible) {
        let better = match &best {
            None => true,
            // Strict improvement beyond round-off; otherwise the earlier
            // (lexicographically smaller) active set stands.
            Some(b) => cand.z > b.z + 1e-12 * b.z.abs().max(1.0),
        };
        if better {
            best = Some(cand);
        }
    }
    Ok(match best {
        Some(c) => OracleOutcome::Optimal {
            active_set: c.active_set.iter().map(|&u| problem.row_ids()[u]).collect(),
            x: c.x,
            z: c.z,
        },
        None => OracleOutcome::NoFeasibleVertex,
    })
}

pub fn oracle_solve(problem: &LpProblem) -> Result<OracleOutcome> {
    maximize(problem, problem.obj_dir(), problem.obj_offset())
}

/// Rank of the constraint matrix restricted to live columns.
pub fn live_rank(problem: &LpProblem) -> usize {
    let live: Vec<usize> = problem.live_indices().collect();
    let mut m: Vec<Vec<f64>> = problem
        .rows()
        .iter()
        .map(|row| live.iter().map(|&j| row[j]).collect())
        .collect();
    let mut rank = 0;
    for col in 0..live.len() {
        let Some(piv) = (rank..m.len())
            .filter(|&r| m[r][col].abs() > SINGULAR_PIVOT)
            .max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))
        else {
            continue;
        };
        m.swap(rank, piv);
        for r in rank + 1..m.len() {
            let f = m[r][col] / m[rank][col];
            let (top, rest) = m.split_at_mut(r);
            for (t, p) in rest[0][col..].iter_mut().zip(&top[rank][col..]) {
                *t -= f * p;
            }
        }
        rank += 1;
    }
    rank
}
