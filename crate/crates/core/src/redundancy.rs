//! Redundancy tests for the current flattest plane.
//!
//! The Monte Carlo test casts rays along the objective direction from feasible
//! sample points; a plane that no ray reaches before some other plane lies
//! above the region and is labelled likely redundant. Rays that do reach it
//! leave hit points on the plane, which become feasible points of the reduced
//! problem after elimination. The exact test answers the same question by
//! vertex enumeration.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{LpError, Result};
use crate::model::{dot, LpProblem};
use crate::oracle::{self, OracleOutcome};
use crate::reduce::EliminationRecord;

/// Directional components at or below this do not count as facing a plane.
pub const FACING_EPS: f64 = 1e-12;
/// Chords shorter than this leave the walk where it is.
pub const MIN_CHORD: f64 = 1e-12;
/// Allowed distance of a hit point from its plane.
pub const ON_PLANE_TOL: f64 = 1e-9;
/// A plane is redundant when its best value over the region falls short of
/// its right-hand side by more than this.
pub const EXACT_MARGIN: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct RayHit {
    /// Index into the problem's current rows.
    pub row: usize,
    pub row_id: usize,
    pub lambda: f64,
    pub point: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum McVerdict {
    /// Some rays struck the plane first; `hits` holds all of them in sample order.
    NonRedundant { hits: Vec<RayHit>, no_hit_rays: usize },
    LikelyRedundant { no_hit_rays: usize },
}

impl McVerdict {
    pub fn no_hit_rays(&self) -> usize {
        match self {
            McVerdict::NonRedundant { no_hit_rays, .. } | McVerdict::LikelyRedundant { no_hit_rays } => *no_hit_rays,
        }
    }
}

/// Checks that every residual at `point` exceeds `tol_feas`.
pub fn check_interior(problem: &LpProblem, point: &[f64], tol_feas: f64) -> Result<()> {
    let residual = problem.residual(point)?;
    match residual
        .iter()
        .zip(problem.row_ids())
        .find(|(s, _)| **s <= tol_feas)
    {
        Some((&residual, &row_id)) => Err(LpError::NotInterior { row_id, residual }),
        None => Ok(()),
    }
}

/// Generates `count` feasible points by hit-and-run started at a strictly
/// interior point.
///
/// Each step draws a uniform direction over the live variables, intersects
/// the line with the region, and jumps to a uniform point of that chord. One
/// output point is taken every `live_count` steps. Steps whose chord is
/// shorter than [`MIN_CHORD`] or unbounded leave the point unchanged.
pub fn hit_and_run_sample<R: Rng + ?Sized>(
    problem: &LpProblem,
    interior_point: &[f64],
    count: usize,
    tol_feas: f64,
    rng: &mut R,
) -> Result<Vec<Vec<f64>>> {
    check_interior(problem, interior_point, tol_feas)?;
    let live: Vec<usize> = problem.live_indices().collect();
    let thinning = live.len().max(1);
    let mut x = interior_point.to_vec();
    let mut out = Vec::with_capacity(count);
    let mut dir = vec![0.0; problem.n_vars()];

    while out.len() < count {
        for _ in 0..thinning {
            let mut norm = 0.0;
            for &j in &live {
                let g: f64 = rng.sample(StandardNormal);
                dir[j] = g;
                norm += g * g;
            }
            let norm = norm.sqrt();
            if norm == 0.0 {
                continue;
            }
            for &j in &live {
                dir[j] /= norm;
            }

            let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
            for (row, &r) in problem.rows().iter().zip(problem.rhs()) {
                let rate = dot(row, &dir);
                let slack = (r - dot(row, &x)).max(0.0);
                if rate > FACING_EPS {
                    hi = hi.min(slack / rate);
                } else if rate < -FACING_EPS {
                    lo = lo.max(slack / rate);
                }
            }
            if !lo.is_finite() || !hi.is_finite() || hi - lo < MIN_CHORD {
                continue;
            }
            let step = rng.random_range(lo..=hi);
            for &j in &live {
                x[j] += step * dir[j];
            }
        }
        out.push(x.clone());
    }
    Ok(out)
}

/// First plane struck by the ray `point + lambda·direction`, `lambda >= 0`.
///
/// Only rows facing the direction can be struck. `None` means no row faces
/// it, so the region is unbounded along `direction`.
pub fn ray_first_hit(problem: &LpProblem, point: &[f64], direction: &[f64]) -> Option<RayHit> {
    let mut best: Option<(usize, f64)> = None;
    for (u, (row, &r)) in problem.rows().iter().zip(problem.rhs()).enumerate() {
        let rate = dot(row, direction);
        if rate <= FACING_EPS {
            continue;
        }
        let lambda = ((r - dot(row, point)) / rate).max(0.0);
        best = match best {
            None => Some((u, lambda)),
            Some((_, bl)) if lambda < bl - FACING_EPS => Some((u, lambda)),
            Some((b, bl)) if (lambda - bl).abs() <= FACING_EPS && problem.row_ids()[u] < problem.row_ids()[b] => {
                Some((u, lambda))
            }
            keep => keep,
        };
    }
    best.map(|(row, lambda)| RayHit {
        row,
        row_id: problem.row_ids()[row],
        lambda,
        point: point.iter().zip(direction).map(|(p, d)| p + lambda * d).collect(),
    })
}

/// Casts one ray per sample point along `direction` and reports whether any
/// ray reaches row `k` before every other row.
///
/// Rays are evaluated in parallel; hits are returned in sample order.
pub fn is_redundant_mc(
    problem: &LpProblem,
    k: usize,
    points: &[Vec<f64>],
    direction: &[f64],
) -> Result<McVerdict> {
    if points.is_empty() {
        return Err(LpError::EmptySample);
    }
    let hits: Vec<Option<RayHit>> = points
        .par_iter()
        .map(|p| ray_first_hit(problem, p, direction))
        .collect();
    let no_hit_rays = hits.iter().filter(|h| h.is_none()).count();
    let on_k: Vec<RayHit> = hits.into_iter().flatten().filter(|h| h.row == k).collect();
    Ok(if on_k.is_empty() {
        McVerdict::LikelyRedundant { no_hit_rays }
    } else {
        McVerdict::NonRedundant {
            hits: on_k,
            no_hit_rays,
        }
    })
}

/// True when plane `k` does not touch the region, i.e. the largest value of
/// `a_k·x` over the region is below `r_k - EXACT_MARGIN`.
///
/// Row `k` stays in the enumerated system: it does not change the answer
/// (the maximum over the other rows exceeds the margin exactly when the
/// maximum over all rows reaches it), and it keeps the region bounded when
/// `k` is one of the rows bounding it. The enumeration stops at the first
/// feasible vertex that reaches the plane.
///
/// Fails with [`LpError::EmptyRegion`] when the live rows have full rank but
/// no feasible vertex exists. When they are rank deficient the region has no
/// vertices at all and the plane is reported as not redundant.
pub fn is_redundant_exact(problem: &LpProblem, k: usize) -> Result<bool> {
    let a_k = problem.row(k);
    let target = problem.rhs()[k] - EXACT_MARGIN;
    let mut any_feasible = false;
    for cand in oracle::candidates(problem, a_k, 0.0)?.filter(|c| c.feasible) {
        if cand.z >= target {
            return Ok(false);
        }
        any_feasible = true;
    }
    if any_feasible {
        return Ok(true);
    }
    if oracle::live_rank(problem) < problem.live_count() {
        return Ok(false);
    }
    Err(LpError::EmptyRegion)
}

/// Largest value of `a_k·x` over the region, via the oracle.
pub fn plane_support(problem: &LpProblem, k: usize) -> Result<Option<f64>> {
    Ok(match oracle::maximize(problem, problem.row(k), 0.0)? {
        OracleOutcome::Optimal { z, .. } => Some(z),
        OracleOutcome::NoFeasibleVertex => None,
    })
}

/// Turns hits on the eliminated plane into points of the reduced problem by
/// zeroing the pivot coordinate, which the plane equation determines.
pub fn reduced_feasible_points(hits: &[RayHit], record: &EliminationRecord) -> Result<Vec<Vec<f64>>> {
    hits.iter()
        .map(|hit| {
            let distance = record.plane_gap(&hit.point).abs();
            if distance > ON_PLANE_TOL {
                return Err(LpError::NotOnPlane {
                    row_id: record.row_id,
                    distance,
                });
            }
            let mut p = hit.point.clone();
            p[record.pivot] = 0.0;
            Ok(p)
        })
        .collect()
}
