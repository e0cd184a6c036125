//! Problem representation: `maximize d0 + d·x  subject to  A·x <= r`.
//!
//! Variables are free; bounds must be supplied as explicit rows. Eliminated
//! variables keep their column (width stays `n_vars`) and are marked dead in
//! `live_vars`; their coefficients are exactly zero in every row and in the
//! objective.

use crate::error::{LpError, Result};

/// Rows whose norm over live columns falls below this are treated as vacuous.
pub const ZERO_ROW_NORM: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Allowed constraint violation when testing feasibility.
    pub feas: f64,
    /// Allowed deviation of a normalized row from unit length.
    pub norm: f64,
    /// Minimum objective-direction norm, and the cosine below which no row
    /// is considered to oppose the objective.
    pub dir: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            feas: 1e-7,
            norm: 1e-12,
            dir: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem {
    n_vars: usize,
    rows: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    obj_dir: Vec<f64>,
    obj_offset: f64,
    live_vars: Vec<bool>,
    row_ids: Vec<usize>,
}

impl LpProblem {
    /// Builds a problem with all variables live and row ids `1..=m`.
    /// Rows are stored as given; call [`LpProblem::normalize_rows`] before solving.
    pub fn new(objective: Vec<f64>, rows: Vec<Vec<f64>>, rhs: Vec<f64>) -> Result<Self> {
        let n_vars = objective.len();
        if n_vars == 0 {
            return Err(LpError::DimensionMismatch { expected: 1, got: 0 });
        }
        if rows.len() != rhs.len() {
            return Err(LpError::DimensionMismatch {
                expected: rows.len(),
                got: rhs.len(),
            });
        }
        if let Some(bad) = rows.iter().find(|r| r.len() != n_vars) {
            return Err(LpError::DimensionMismatch {
                expected: n_vars,
                got: bad.len(),
            });
        }
        let row_ids = (1..=rows.len()).collect();
        Ok(LpProblem {
            n_vars,
            rows,
            rhs,
            obj_dir: objective,
            obj_offset: 0.0,
            live_vars: vec![true; n_vars],
            row_ids,
        })
    }

    pub(crate) fn from_parts(
        rows: Vec<Vec<f64>>,
        rhs: Vec<f64>,
        obj_dir: Vec<f64>,
        obj_offset: f64,
        live_vars: Vec<bool>,
        row_ids: Vec<usize>,
    ) -> Self {
        debug_assert_eq!(rows.len(), rhs.len());
        debug_assert_eq!(rows.len(), row_ids.len());
        LpProblem {
            n_vars: obj_dir.len(),
            rows,
            rhs,
            obj_dir,
            obj_offset,
            live_vars,
            row_ids,
        }
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn row(&self, u: usize) -> &[f64] {
        &self.rows[u]
    }

    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }

    pub fn obj_dir(&self) -> &[f64] {
        &self.obj_dir
    }

    pub fn obj_offset(&self) -> f64 {
        self.obj_offset
    }

    pub fn live_vars(&self) -> &[bool] {
        &self.live_vars
    }

    pub fn is_live(&self, j: usize) -> bool {
        self.live_vars[j]
    }

    pub fn live_count(&self) -> usize {
        self.live_vars.iter().filter(|&&l| l).count()
    }

    pub fn live_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.live_vars
            .iter()
            .enumerate()
            .filter_map(|(j, &live)| live.then_some(j))
    }

    /// Original 1-based input index of each current row.
    pub fn row_ids(&self) -> &[usize] {
        &self.row_ids
    }

    /// Euclidean norm of row `u` over live columns.
    pub fn row_norm(&self, u: usize) -> f64 {
        live_norm(&self.rows[u], &self.live_vars)
    }

    pub fn obj_norm(&self) -> f64 {
        live_norm(&self.obj_dir, &self.live_vars)
    }

    /// Divides every row and its right-hand side by the row's norm.
    pub fn normalize_rows(&self) -> Result<Self> {
        let mut out = self.clone();
        for u in 0..out.rows.len() {
            let norm = live_norm(&out.rows[u], &out.live_vars);
            if norm < ZERO_ROW_NORM {
                return Err(LpError::ZeroRow {
                    row_id: out.row_ids[u],
                });
            }
            for a in out.rows[u].iter_mut() {
                *a /= norm;
            }
            out.rhs[u] /= norm;
        }
        Ok(out)
    }

    /// Applies the vacuous-row rule: a row with no live coefficients reads
    /// `0 <= r`. It is dropped when `r >= -tol_feas`; otherwise the region is
    /// empty. Returns the reduced problem and the ids of the dropped rows.
    pub fn drop_vacuous_rows(&self, tol_feas: f64) -> Result<(Self, Vec<usize>)> {
        let mut keep = Vec::with_capacity(self.rows.len());
        let mut dropped = Vec::new();
        for u in 0..self.rows.len() {
            if self.row_norm(u) >= ZERO_ROW_NORM {
                keep.push(u);
            } else if self.rhs[u] >= -tol_feas {
                dropped.push(self.row_ids[u]);
            } else {
                return Err(LpError::InfeasibleDetected {
                    row_id: self.row_ids[u],
                    rhs: self.rhs[u],
                });
            }
        }
        Ok((self.select_rows(&keep), dropped))
    }

    /// Returns `r - A·x`.
    pub fn residual(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x)?;
        Ok(self
            .rows
            .iter()
            .zip(&self.rhs)
            .map(|(row, r)| r - dot(row, x))
            .collect())
    }

    pub fn is_feasible(&self, x: &[f64], tol: f64) -> Result<bool> {
        Ok(self.residual(x)?.iter().all(|&s| s >= -tol))
    }

    /// Row ids whose residual at `x` is below `-tol`.
    pub fn violated_rows(&self, x: &[f64], tol: f64) -> Result<Vec<usize>> {
        Ok(self
            .residual(x)?
            .iter()
            .zip(&self.row_ids)
            .filter(|(s, _)| **s < -tol)
            .map(|(_, id)| *id)
            .collect())
    }

    /// Returns `d0 + d·x`.
    pub fn objective_value(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        Ok(self.obj_offset + dot(&self.obj_dir, x))
    }

    /// Copy with row `u` removed.
    pub fn without_row(&self, u: usize) -> Self {
        let keep: Vec<usize> = (0..self.rows.len()).filter(|&i| i != u).collect();
        self.select_rows(&keep)
    }

    /// Copy with a replaced objective direction; dead columns are zeroed.
    pub fn with_objective(&self, dir: &[f64], offset: f64) -> Self {
        let mut out = self.clone();
        out.obj_dir = dir
            .iter()
            .zip(&self.live_vars)
            .map(|(&d, &live)| if live { d } else { 0.0 })
            .collect();
        out.obj_offset = offset;
        out
    }

    fn select_rows(&self, keep: &[usize]) -> Self {
        LpProblem {
            n_vars: self.n_vars,
            rows: keep.iter().map(|&u| self.rows[u].clone()).collect(),
            rhs: keep.iter().map(|&u| self.rhs[u]).collect(),
            obj_dir: self.obj_dir.clone(),
            obj_offset: self.obj_offset,
            live_vars: self.live_vars.clone(),
            row_ids: keep.iter().map(|&u| self.row_ids[u]).collect(),
        }
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n_vars {
            return Err(LpError::DimensionMismatch {
                expected: self.n_vars,
                got: x.len(),
            });
        }
        Ok(())
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn live_norm(v: &[f64], live: &[bool]) -> f64 {
    v.iter()
        .zip(live)
        .filter(|(_, &l)| l)
        .map(|(a, _)| a * a)
        .sum::<f64>()
        .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square_caps() -> LpProblem {
        LpProblem::new(vec![1.0, 1.0], vec![vec![1.0, 0.0], vec![0.0, 1.0]], vec![1.0, 1.0]).unwrap()
    }

    #[test]
    fn normalize_examples() {
        let p = LpProblem::new(
            vec![1.0, 0.0],
            vec![vec![3.0, 4.0], vec![0.0, 2.0], vec![1.0, 0.0]],
            vec![10.0, 4.0, 1.0],
        )
        .unwrap()
        .normalize_rows()
        .unwrap();
        assert!((p.row(0)[0] - 0.6).abs() < 1e-15 && (p.row(0)[1] - 0.8).abs() < 1e-15);
        assert!((p.rhs()[0] - 2.0).abs() < 1e-15);
        assert_eq!(p.row(1), &[0.0, 1.0]);
        assert_eq!(p.rhs()[1], 2.0);
        assert_eq!(p.row(2), &[1.0, 0.0]);
        assert_eq!(p.rhs()[2], 1.0);
    }

    #[test]
    fn normalize_rejects_zero_row() {
        let p = LpProblem::new(vec![1.0], vec![vec![0.0]], vec![1.0]).unwrap();
        assert_eq!(p.normalize_rows(), Err(LpError::ZeroRow { row_id: 1 }));
    }

    #[test]
    fn residual_examples() {
        let p = unit_square_caps();
        assert_eq!(p.residual(&[1.0, 1.0]).unwrap(), vec![0.0, 0.0]);
        assert_eq!(p.residual(&[0.0, 0.0]).unwrap(), vec![1.0, 1.0]);
        assert_eq!(p.residual(&[2.0, 0.0]).unwrap(), vec![-1.0, 1.0]);
        assert!(matches!(
            p.residual(&[1.0]),
            Err(LpError::DimensionMismatch { expected: 2, got: 1 })
        ));
    }

    #[test]
    fn feasibility_examples() {
        let p = unit_square_caps();
        assert!(p.is_feasible(&[0.5, 0.5], 1e-7).unwrap());
        assert!(p.is_feasible(&[1.0 + 1e-9, 1.0], 1e-7).unwrap());
        assert!(!p.is_feasible(&[2.0, 0.0], 1e-7).unwrap());
        assert_eq!(p.violated_rows(&[2.0, 0.0], 1e-7).unwrap(), vec![1]);
    }

    #[test]
    fn objective_examples() {
        let p = unit_square_caps();
        assert_eq!(p.objective_value(&[1.0, 1.0]).unwrap(), 2.0);

        let h = std::f64::consts::FRAC_1_SQRT_2;
        let constant = p.with_objective(&[0.0, 0.0], h);
        assert_eq!(constant.objective_value(&[5.0, 5.0]).unwrap(), h);

        let diag = p.with_objective(&[h, h], 0.0);
        assert!((diag.objective_value(&[1.0, 1.0]).unwrap() - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn vacuous_rule() {
        let p = LpProblem::new(
            vec![1.0, 0.0],
            vec![vec![0.0, 0.0], vec![1.0, 0.0]],
            vec![0.5, 1.0],
        )
        .unwrap();
        let (q, dropped) = p.drop_vacuous_rows(1e-7).unwrap();
        assert_eq!(dropped, vec![1]);
        assert_eq!(q.row_ids(), &[2]);

        let bad = LpProblem::new(vec![1.0], vec![vec![0.0]], vec![-1.0]).unwrap();
        assert!(matches!(
            bad.drop_vacuous_rows(1e-7),
            Err(LpError::InfeasibleDetected { row_id: 1, .. })
        ));
    }

    #[test]
    fn rejects_ragged_rows() {
        assert!(LpProblem::new(vec![1.0, 1.0], vec![vec![1.0]], vec![1.0]).is_err());
        assert!(LpProblem::new(vec![1.0], vec![vec![1.0]], vec![]).is_err());
        assert!(LpProblem::new(vec![], vec![], vec![]).is_err());
    }
}
