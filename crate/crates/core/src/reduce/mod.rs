//! Flattest-plane dimension reduction.
//!
//! Each stage picks the constraint whose outward normal is closest in angle to
//! the objective direction, treats it as an equality, and eliminates the
//! variable with the largest coefficient in it. The saved planes are replayed
//! in reverse once a single variable remains.

use std::collections::BTreeSet;

use crate::error::{LpError, Result};
use crate::model::{dot, LpProblem, Tolerances, ZERO_ROW_NORM};

mod driver;

pub use driver::{solve, RedundancyMode, SolveConfig, SolveOutcome, Stage, Status};

/// Cosines closer than this are treated as tied.
pub const COSINE_TIE: f64 = 1e-12;

/// The plane a variable was eliminated with.
#[derive(Debug, Clone, PartialEq)]
pub struct EliminationRecord {
    /// Normalized row at elimination time; dead columns are zero.
    pub plane_coeffs: Vec<f64>,
    pub plane_rhs: f64,
    /// Eliminated variable (0-based).
    pub pivot: usize,
    /// 1-based reduction stage.
    pub stage: usize,
    pub row_id: usize,
}

impl EliminationRecord {
    /// `a_k·x - r_k`; zero when `x` lies on the plane.
    pub fn plane_gap(&self, x: &[f64]) -> f64 {
        dot(&self.plane_coeffs, x) - self.plane_rhs
    }
}

/// Cosine between each row normal and the objective direction.
pub fn cosines(problem: &LpProblem, tol: &Tolerances) -> Result<Vec<f64>> {
    let norm = problem.obj_norm();
    if norm <= tol.dir {
        return Err(LpError::DegenerateObjective { norm });
    }
    Ok(problem
        .rows()
        .iter()
        .map(|row| dot(row, problem.obj_dir()) / norm)
        .collect())
}

/// Index of the flattest row among those not in `rejected`.
///
/// Ties within [`COSINE_TIE`] go to the lowest row id. Fails with
/// [`LpError::UnboundedDirection`] when the best cosine is `<= tol_dir`.
pub fn select_flattest(
    t: &[f64],
    row_ids: &[usize],
    rejected: &BTreeSet<usize>,
    tol_dir: f64,
) -> Result<usize> {
    let mut best: Option<usize> = None;
    for (u, &tu) in t.iter().enumerate() {
        if rejected.contains(&u) {
            continue;
        }
        best = match best {
            None => Some(u),
            Some(b) if tu > t[b] + COSINE_TIE => Some(u),
            Some(b) if (tu - t[b]).abs() <= COSINE_TIE && row_ids[u] < row_ids[b] => Some(u),
            keep => keep,
        };
    }
    let k = best.ok_or(LpError::NoCandidates)?;
    if t[k] <= tol_dir {
        return Err(LpError::UnboundedDirection);
    }
    Ok(k)
}

/// Live variable with the largest coefficient magnitude in row `k`; ties go
/// to the lowest index.
pub fn select_pivot(problem: &LpProblem, k: usize) -> Result<usize> {
    let row = problem.row(k);
    let mut best: Option<usize> = None;
    for j in problem.live_indices() {
        if best.is_none_or(|b| row[j].abs() > row[b].abs()) {
            best = Some(j);
        }
    }
    match best {
        Some(j) if problem.row_norm(k) >= ZERO_ROW_NORM => Ok(j),
        _ => Err(LpError::ZeroRow {
            row_id: problem.row_ids()[k],
        }),
    }
}

/// Substitutes plane `k` (as an equality solved for variable `j`) into every
/// other row and the objective, removes row `k`, and kills variable `j`.
///
/// Rows left with no live coefficients are dropped or reported as
/// [`LpError::InfeasibleDetected`]; survivors are renormalized. The objective
/// is not renormalized.
pub fn eliminate(
    problem: &LpProblem,
    k: usize,
    j: usize,
    tol: &Tolerances,
) -> Result<(LpProblem, EliminationRecord)> {
    let row_k = problem.row(k);
    let r_k = problem.rhs()[k];
    let row_id = problem.row_ids()[k];
    let pivot = select_pivot(problem, k)?;
    if !problem.is_live(j) || row_k[j].abs() < row_k[pivot].abs() {
        return Err(LpError::InvalidPivot { row_id, var: j });
    }
    let a_kj = row_k[j];

    let mut rows = Vec::with_capacity(problem.row_count() - 1);
    let mut rhs = Vec::with_capacity(problem.row_count() - 1);
    let mut row_ids = Vec::with_capacity(problem.row_count() - 1);
    for u in (0..problem.row_count()).filter(|&u| u != k) {
        let mut row = problem.row(u).to_vec();
        let factor = row[j] / a_kj;
        for (a, &ak) in row.iter_mut().zip(row_k) {
            *a -= factor * ak;
        }
        row[j] = 0.0;
        rows.push(row);
        rhs.push(problem.rhs()[u] - factor * r_k);
        row_ids.push(problem.row_ids()[u]);
    }

    let d = problem.obj_dir();
    let factor = d[j] / a_kj;
    let mut obj: Vec<f64> = d.iter().zip(row_k).map(|(di, ak)| di - factor * ak).collect();
    obj[j] = 0.0;
    let offset = problem.obj_offset() + factor * r_k;

    let mut live = problem.live_vars().to_vec();
    live[j] = false;
    let stage = problem.n_vars() - problem.live_count() + 1;

    let reduced = LpProblem::from_parts(rows, rhs, obj, offset, live, row_ids);
    let (reduced, _) = reduced.drop_vacuous_rows(tol.feas)?;
    let reduced = reduced.normalize_rows()?;

    let record = EliminationRecord {
        plane_coeffs: row_k.to_vec(),
        plane_rhs: r_k,
        pivot: j,
        stage,
        row_id,
    };
    Ok((reduced, record))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OneDimOutcome {
    Optimal(f64),
    Unbounded,
    Infeasible,
}

/// Maximizes a problem with exactly one live variable.
pub fn solve_1d(problem: &LpProblem, tol: &Tolerances) -> Result<OneDimOutcome> {
    let live: Vec<usize> = problem.live_indices().collect();
    let [v] = live[..] else {
        return Err(LpError::NotOneDimensional { live: live.len() });
    };
    let mut upper = f64::INFINITY;
    let mut lower = f64::NEG_INFINITY;
    for (row, &r) in problem.rows().iter().zip(problem.rhs()) {
        let alpha = row[v];
        if alpha.abs() < ZERO_ROW_NORM {
            if r < -tol.feas {
                return Ok(OneDimOutcome::Infeasible);
            }
        } else if alpha > 0.0 {
            upper = upper.min(r / alpha);
        } else {
            lower = lower.max(r / alpha);
        }
    }
    if lower > upper + tol.feas {
        return Ok(OneDimOutcome::Infeasible);
    }
    let d = problem.obj_dir()[v];
    let outcome = if d > tol.dir {
        if upper.is_finite() {
            OneDimOutcome::Optimal(upper)
        } else {
            OneDimOutcome::Unbounded
        }
    } else if d < -tol.dir {
        if lower.is_finite() {
            OneDimOutcome::Optimal(lower)
        } else {
            OneDimOutcome::Unbounded
        }
    } else if upper.is_finite() {
        OneDimOutcome::Optimal(upper)
    } else if lower.is_finite() {
        OneDimOutcome::Optimal(lower)
    } else {
        OneDimOutcome::Optimal(0.0)
    };
    Ok(outcome)
}

/// Recovers eliminated variables by replaying the saved planes, last first.
pub fn back_substitute(trace: &[EliminationRecord], x_partial: &[Option<f64>]) -> Result<Vec<f64>> {
    let mut x = x_partial.to_vec();
    for rec in trace.iter().rev() {
        let mut sum = 0.0;
        for (i, &a) in rec.plane_coeffs.iter().enumerate() {
            if i == rec.pivot || a == 0.0 {
                continue;
            }
            sum += a * x[i].ok_or(LpError::IncompleteTrace { var: i })?;
        }
        x[rec.pivot] = Some((rec.plane_rhs - sum) / rec.plane_coeffs[rec.pivot]);
    }
    x.iter()
        .enumerate()
        .map(|(i, v)| v.ok_or(LpError::IncompleteTrace { var: i }))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn problem(obj: &[f64], rows: &[&[f64]], rhs: &[f64]) -> LpProblem {
        LpProblem::new(obj.to_vec(), rows.iter().map(|r| r.to_vec()).collect(), rhs.to_vec()).unwrap()
    }

    #[test]
    fn cosine_examples() {
        let p = problem(&[0.0, 1.0], &[&[0.0, 1.0], &[1.0, 0.0], &[-1.0, 0.0]], &[1.0; 3]);
        assert_eq!(cosines(&p, &tol()).unwrap(), vec![1.0, 0.0, 0.0]);

        let p = problem(&[FRAC_1_SQRT_2, FRAC_1_SQRT_2], &[&[1.0, 0.0]], &[1.0]);
        assert!((cosines(&p, &tol()).unwrap()[0] - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);

        let p = problem(&[1.0, 0.0], &[&[-1.0, 0.0]], &[1.0]);
        assert_eq!(cosines(&p, &tol()).unwrap(), vec![-1.0]);

        let p = problem(&[0.0, 0.0], &[&[1.0, 0.0]], &[1.0]);
        assert!(matches!(cosines(&p, &tol()), Err(LpError::DegenerateObjective { .. })));
    }

    #[test]
    fn flattest_examples() {
        let none = BTreeSet::new();
        assert_eq!(select_flattest(&[0.3, 0.9, 0.9], &[1, 2, 3], &none, 1e-10).unwrap(), 1);
        assert_eq!(select_flattest(&[1.0, 0.0, 0.0], &[1, 2, 3], &none, 1e-10).unwrap(), 0);
        assert_eq!(
            select_flattest(&[-0.2, -0.5], &[1, 2], &none, 1e-10),
            Err(LpError::UnboundedDirection)
        );
        let all: BTreeSet<usize> = [0, 1].into();
        assert_eq!(select_flattest(&[0.5, 0.7], &[1, 2], &all, 1e-10), Err(LpError::NoCandidates));
    }

    #[test]
    fn flattest_tie_uses_row_id_not_position() {
        let none = BTreeSet::new();
        assert_eq!(select_flattest(&[0.9, 0.9 + 1e-13], &[7, 3], &none, 1e-10).unwrap(), 1);
        let rejected: BTreeSet<usize> = [1].into();
        assert_eq!(select_flattest(&[0.9, 0.95], &[1, 2], &rejected, 1e-10).unwrap(), 0);
    }

    #[test]
    fn pivot_examples() {
        let p = problem(&[1.0, 0.0], &[&[0.6, -0.8], &[0.5, 0.5], &[0.0, 1.0], &[0.0, 0.0]], &[1.0; 4]);
        assert_eq!(select_pivot(&p, 0).unwrap(), 1);
        assert_eq!(select_pivot(&p, 1).unwrap(), 0);
        assert_eq!(select_pivot(&p, 2).unwrap(), 1);
        assert_eq!(select_pivot(&p, 3), Err(LpError::ZeroRow { row_id: 4 }));
    }

    #[test]
    fn eliminate_worked_example() {
        let p = problem(
            &[FRAC_1_SQRT_2, FRAC_1_SQRT_2],
            &[&[0.0, 1.0], &[FRAC_1_SQRT_2, FRAC_1_SQRT_2]],
            &[1.0, SQRT_2],
        );
        let (q, rec) = eliminate(&p, 0, 1, &tol()).unwrap();
        assert_eq!(q.row_count(), 1);
        assert!((q.row(0)[0] - 1.0).abs() < 1e-12 && q.row(0)[1] == 0.0);
        assert!((q.rhs()[0] - 1.0).abs() < 1e-12);
        assert!((q.obj_dir()[0] - FRAC_1_SQRT_2).abs() < 1e-15 && q.obj_dir()[1] == 0.0);
        assert!((q.obj_offset() - FRAC_1_SQRT_2).abs() < 1e-15);
        assert_eq!(q.live_vars(), &[true, false]);
        assert_eq!(
            rec,
            EliminationRecord {
                plane_coeffs: vec![0.0, 1.0],
                plane_rhs: 1.0,
                pivot: 1,
                stage: 1,
                row_id: 1,
            }
        );
    }

    #[test]
    fn eliminate_zero_coupling_leaves_row() {
        let p = problem(&[0.0, 1.0], &[&[0.0, 1.0], &[1.0, 0.0]], &[1.0, 2.0]);
        let (q, _) = eliminate(&p, 0, 1, &tol()).unwrap();
        assert_eq!(q.row(0), &[1.0, 0.0]);
        assert_eq!(q.rhs(), &[2.0]);
        assert_eq!(q.row_ids(), &[2]);
    }

    #[test]
    fn eliminate_parallel_contradiction() {
        let p = problem(&[0.0, 1.0], &[&[0.0, 1.0], &[0.0, 1.0], &[1.0, 0.0]], &[1.0, 0.5, 1.0]);
        // after x2 = 1 the second row reads 0 <= -0.5
        assert!(matches!(
            eliminate(&p, 0, 1, &tol()),
            Err(LpError::InfeasibleDetected { row_id: 2, .. })
        ));
    }

    #[test]
    fn eliminate_rejects_non_pivot() {
        let p = problem(&[0.0, 1.0], &[&[0.6, 0.8]], &[1.0]);
        assert!(matches!(
            eliminate(&p, 0, 0, &tol()),
            Err(LpError::InvalidPivot { row_id: 1, var: 0 })
        ));
    }

    #[test]
    fn solve_1d_examples() {
        let mut p = problem(&[1.0], &[&[1.0], &[-1.0]], &[1.0, 0.0]);
        p = p.with_objective(&[1.0], 0.5);
        assert_eq!(solve_1d(&p, &tol()).unwrap(), OneDimOutcome::Optimal(1.0));

        let p = problem(&[1.0], &[&[-1.0]], &[0.0]);
        assert_eq!(solve_1d(&p, &tol()).unwrap(), OneDimOutcome::Unbounded);

        let p = problem(&[1.0], &[&[1.0], &[-1.0]], &[0.0, -1.0]);
        assert_eq!(solve_1d(&p, &tol()).unwrap(), OneDimOutcome::Infeasible);
    }

    #[test]
    fn solve_1d_constant_and_negative_objective() {
        let p = problem(&[-1.0], &[&[1.0], &[-1.0]], &[3.0, 2.0]);
        assert_eq!(solve_1d(&p, &tol()).unwrap(), OneDimOutcome::Optimal(-2.0));
        let p = problem(&[0.0], &[&[-1.0]], &[2.0]);
        assert_eq!(solve_1d(&p, &tol()).unwrap(), OneDimOutcome::Optimal(-2.0));
        let p = problem(&[0.0], &[], &[]);
        assert_eq!(solve_1d(&p, &tol()).unwrap(), OneDimOutcome::Optimal(0.0));
        let p = problem(&[1.0, 1.0], &[], &[]);
        assert_eq!(solve_1d(&p, &tol()), Err(LpError::NotOneDimensional { live: 2 }));
    }

    #[test]
    fn back_substitute_examples() {
        let rec = EliminationRecord {
            plane_coeffs: vec![0.0, 1.0],
            plane_rhs: 1.0,
            pivot: 1,
            stage: 1,
            row_id: 1,
        };
        assert_eq!(back_substitute(&[rec], &[Some(1.0), None]).unwrap(), vec![1.0, 1.0]);
        assert_eq!(back_substitute(&[], &[Some(3.0)]).unwrap(), vec![3.0]);

        let trace = [
            EliminationRecord {
                plane_coeffs: vec![0.0, 0.0, 1.0],
                plane_rhs: 1.0,
                pivot: 2,
                stage: 1,
                row_id: 3,
            },
            EliminationRecord {
                plane_coeffs: vec![0.0, 1.0, 0.0],
                plane_rhs: 1.0,
                pivot: 1,
                stage: 2,
                row_id: 2,
            },
        ];
        assert_eq!(back_substitute(&trace, &[Some(1.0), None, None]).unwrap(), vec![1.0, 1.0, 1.0]);
        assert_eq!(
            back_substitute(&trace, &[None, None, None]),
            Err(LpError::IncompleteTrace { var: 0 })
        );
    }

    #[test]
    fn back_substitute_uses_coupled_planes() {
        // x1 + x2 = 2 (pivot x2), then x1 = 0.5
        let rec = EliminationRecord {
            plane_coeffs: vec![FRAC_1_SQRT_2, FRAC_1_SQRT_2],
            plane_rhs: SQRT_2,
            pivot: 1,
            stage: 1,
            row_id: 1,
        };
        let x = back_substitute(std::slice::from_ref(&rec), &[Some(0.5), None]).unwrap();
        assert!((x[1] - 1.5).abs() < 1e-12);
        assert!(rec.plane_gap(&x).abs() < 1e-12);
    }
}
