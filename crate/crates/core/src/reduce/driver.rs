//! The solve loop: reduce one dimension per stage until a single variable is
//! left, solve that, and back-substitute.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{back_substitute, cosines, eliminate, select_flattest, select_pivot, solve_1d};
use super::{EliminationRecord, OneDimOutcome};
use crate::error::{LpError, Result};
use crate::model::{LpProblem, Tolerances};
use crate::redundancy::{self, McVerdict, RayHit};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RedundancyMode {
    /// Vertex enumeration decides redundancy.
    Exact,
    /// Ray casting from hit-and-run samples decides redundancy.
    MonteCarlo,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveConfig {
    pub tol: Tolerances,
    pub redundancy: RedundancyMode,
    /// Rays per redundancy query.
    pub samples: usize,
    /// Witness hits wanted on a plane before eliminating with it.
    pub min_hits: usize,
    /// Extra sampling rounds when a plane has fewer than `min_hits` witnesses.
    pub retry_cap: usize,
    pub seed: u64,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            tol: Tolerances::default(),
            redundancy: RedundancyMode::Exact,
            samples: 1000,
            min_hits: 32,
            retry_cap: 3,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Status {
    Optimal,
    Infeasible,
    Unbounded,
    Stalled,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Optimal => "optimal",
            Status::Infeasible => "infeasible",
            Status::Unbounded => "unbounded",
            Status::Stalled => "stalled",
        }
    }
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One pass of flattest-plane selection. A stage that ends the solve early
/// has no record.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Stage {
    pub index: usize,
    pub record: Option<EliminationRecord>,
    /// Cosine of the eliminated plane.
    pub cosine: Option<f64>,
    /// Flattest candidates deleted as redundant, in the order tested.
    pub deleted_redundant: Vec<usize>,
    /// Rows that lost all live coefficients during the elimination.
    pub dropped_vacuous: Vec<usize>,
    /// Witness points on the eliminated plane (Monte Carlo mode).
    pub witnesses: usize,
    /// Rays that struck nothing (Monte Carlo mode).
    pub no_hit_rays: usize,
    /// The Monte Carlo verdict was settled by the exact test.
    pub exact_fallback: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOutcome {
    pub status: Status,
    pub x: Option<Vec<f64>>,
    pub z: Option<f64>,
    pub stages: Vec<Stage>,
    /// Objective value tracked through the reductions, `d0 + d·x` of the
    /// final one-variable problem.
    pub reduced_z: Option<f64>,
    pub note: Option<String>,
}

impl SolveOutcome {
    fn terminal(status: Status, stages: Vec<Stage>, note: impl Into<String>) -> Self {
        SolveOutcome {
            status,
            x: None,
            z: None,
            stages,
            reduced_z: None,
            note: Some(note.into()),
        }
    }

    pub fn records(&self) -> impl Iterator<Item = &EliminationRecord> {
        self.stages.iter().filter_map(|s| s.record.as_ref())
    }

    pub fn elimination_count(&self) -> usize {
        self.records().count()
    }
}

enum Verdict {
    Redundant,
    Keep(Vec<RayHit>),
}

/// Monte Carlo bookkeeping carried across stages.
struct Sampler {
    rng: ChaCha8Rng,
    /// Feasible points of the current problem; the first stage starts from
    /// the interior point, later stages from the previous plane's witnesses.
    seeds: Vec<Vec<f64>>,
    /// Set once no interior start can be found; remaining stages use the
    /// exact test.
    exhausted: bool,
}

/// Maximizes the objective by flattest-plane reduction.
///
/// `interior_point` must be strictly feasible when Monte Carlo redundancy is
/// selected. The returned `z` is evaluated with the input objective at the
/// back-substituted point.
pub fn solve(problem: &LpProblem, interior_point: Option<&[f64]>, config: &SolveConfig) -> Result<SolveOutcome> {
    let tol = config.tol;
    let base = match problem.drop_vacuous_rows(tol.feas) {
        Ok((p, _)) => p.normalize_rows()?,
        Err(LpError::InfeasibleDetected { row_id, .. }) => {
            return Ok(SolveOutcome::terminal(
                Status::Infeasible,
                Vec::new(),
                format!("row {row_id} reads 0 <= negative"),
            ))
        }
        Err(e) => return Err(e),
    };

    let mut sampler = match config.redundancy {
        RedundancyMode::Exact => None,
        RedundancyMode::MonteCarlo => {
            let p = interior_point.ok_or(LpError::MissingInteriorPoint)?;
            redundancy::check_interior(&base, p, tol.feas)?;
            Some(Sampler {
                rng: ChaCha8Rng::seed_from_u64(config.seed),
                seeds: vec![p.to_vec()],
                exhausted: false,
            })
        }
    };

    let mut current = base.clone();
    let mut records: Vec<EliminationRecord> = Vec::new();
    let mut stages: Vec<Stage> = Vec::new();
    let mut surrogate = false;

    while current.live_count() > 1 {
        let mut stage = Stage {
            index: stages.len() + 1,
            ..Stage::default()
        };

        if current.obj_norm() <= tol.dir {
            if current.row_count() == 0 {
                break;
            }
            // Constant objective: every feasible point is optimal. Maximize a
            // row normal instead, which that row bounds from above.
            let dir = current.row(0).to_vec();
            current = current.with_objective(&dir, current.obj_offset());
            surrogate = true;
        }
        if current.row_count() == 0 {
            stages.push(stage);
            return Ok(SolveOutcome::terminal(
                Status::Unbounded,
                stages,
                "no constraints remain to oppose the objective",
            ));
        }

        let direction = unit_direction(&current);
        let mut pool = match sampler.as_mut() {
            Some(s) if !s.exhausted => stage_sample(&current, s, config),
            _ => Vec::new(),
        };
        if pool.is_empty() {
            if let Some(s) = sampler.as_mut() {
                s.exhausted = true;
            }
        }

        let (k, hits) = loop {
            let t = cosines(&current, &tol)?;
            let k = match select_flattest(&t, current.row_ids(), &Default::default(), tol.dir) {
                Ok(k) => k,
                Err(LpError::UnboundedDirection) => {
                    stages.push(stage);
                    let status = if surrogate { Status::Stalled } else { Status::Unbounded };
                    return Ok(SolveOutcome::terminal(
                        status,
                        stages,
                        "no remaining row faces the objective direction",
                    ));
                }
                Err(e) => return Err(e),
            };
            let verdict = match sampler.as_mut() {
                Some(s) if !pool.is_empty() => {
                    mc_verdict(&current, k, &direction, &mut pool, s, config, &mut stage)
                }
                _ => exact_verdict(&current, k),
            };
            match verdict {
                Ok(Verdict::Keep(hits)) => {
                    stage.cosine = Some(t[k]);
                    break (k, hits);
                }
                Ok(Verdict::Redundant) => {
                    stage.deleted_redundant.push(current.row_ids()[k]);
                    current = current.without_row(k);
                    if current.row_count() == 0 {
                        stages.push(stage);
                        let status = if surrogate { Status::Stalled } else { Status::Unbounded };
                        return Ok(SolveOutcome::terminal(status, stages, "every candidate plane was redundant"));
                    }
                }
                Err(LpError::EmptyRegion) => {
                    stages.push(stage);
                    return Ok(SolveOutcome::terminal(Status::Infeasible, stages, "region has no feasible vertex"));
                }
                Err(e) => return Err(e),
            }
        };

        let j = select_pivot(&current, k)?;
        let (reduced, record) = match eliminate(&current, k, j, &tol) {
            Ok(r) => r,
            Err(LpError::InfeasibleDetected { row_id, .. }) => {
                stages.push(stage);
                return Ok(SolveOutcome::terminal(
                    Status::Infeasible,
                    stages,
                    format!("row {row_id} became 0 <= negative"),
                ));
            }
            Err(e) => return Err(e),
        };
        stage.dropped_vacuous = current
            .row_ids()
            .iter()
            .filter(|&&id| id != record.row_id && !reduced.row_ids().contains(&id))
            .copied()
            .collect();
        if let Some(s) = sampler.as_mut() {
            stage.witnesses = hits.len();
            s.seeds = redundancy::reduced_feasible_points(&hits, &record)?;
        }
        records.push(record.clone());
        stage.record = Some(record);
        stages.push(stage);
        current = reduced;
    }

    let mut x_partial: Vec<Option<f64>> = (0..problem.n_vars())
        .map(|j| if current.is_live(j) { Some(0.0) } else { None })
        .collect();
    if current.live_count() == 1 {
        let v = current.live_indices().next().expect("one live variable");
        match solve_1d(&current, &tol)? {
            OneDimOutcome::Optimal(value) => x_partial[v] = Some(value),
            OneDimOutcome::Unbounded => {
                let status = if surrogate { Status::Stalled } else { Status::Unbounded };
                return Ok(SolveOutcome::terminal(status, stages, "last variable is unbounded"));
            }
            OneDimOutcome::Infeasible => {
                return Ok(SolveOutcome::terminal(Status::Infeasible, stages, "last variable has an empty interval"));
            }
        }
    }
    let x = back_substitute(&records, &x_partial)?;

    let violated = base.violated_rows(&x, tol.feas)?;
    if !violated.is_empty() {
        return Ok(SolveOutcome::terminal(
            Status::Stalled,
            stages,
            format!("back-substituted point violates rows {violated:?}"),
        ));
    }
    let reduced_z = (!surrogate).then(|| current.objective_value(&x)).transpose()?;
    Ok(SolveOutcome {
        status: Status::Optimal,
        z: Some(problem.objective_value(&x)?),
        x: Some(x),
        stages,
        reduced_z,
        note: surrogate.then(|| "objective is constant on the region".to_string()),
    })
}

fn unit_direction(problem: &LpProblem) -> Vec<f64> {
    let norm = problem.obj_norm();
    problem.obj_dir().iter().map(|d| d / norm).collect()
}

/// Sample points for this stage: the carried seeds topped up by hit-and-run.
/// Empty when no strictly interior start exists.
fn stage_sample(problem: &LpProblem, sampler: &mut Sampler, config: &SolveConfig) -> Vec<Vec<f64>> {
    let Some(start) = interior_start(problem, &sampler.seeds, config.tol.feas) else {
        return Vec::new();
    };
    let mut pool: Vec<Vec<f64>> = sampler.seeds.iter().take(config.samples).cloned().collect();
    let needed = config.samples.saturating_sub(pool.len());
    match redundancy::hit_and_run_sample(problem, &start, needed, config.tol.feas, &mut sampler.rng) {
        Ok(extra) => pool.extend(extra),
        Err(_) => return Vec::new(),
    }
    sampler.seeds = vec![start];
    pool
}

/// Centroid of the seeds when strictly interior, otherwise the seed with the
/// largest minimum residual if that one is.
fn interior_start(problem: &LpProblem, seeds: &[Vec<f64>], tol_feas: f64) -> Option<Vec<f64>> {
    if seeds.is_empty() {
        return None;
    }
    let min_residual = |p: &[f64]| {
        problem
            .residual(p)
            .map(|r| r.into_iter().fold(f64::INFINITY, f64::min))
            .unwrap_or(f64::NEG_INFINITY)
    };
    let n = problem.n_vars();
    let mut centroid = vec![0.0; n];
    for s in seeds {
        for (c, v) in centroid.iter_mut().zip(s) {
            *c += v / seeds.len() as f64;
        }
    }
    if min_residual(&centroid) > tol_feas {
        return Some(centroid);
    }
    seeds
        .iter()
        .map(|s| (min_residual(s), s))
        .filter(|(r, _)| *r > tol_feas)
        .max_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(_, s)| s.clone())
}

fn exact_verdict(problem: &LpProblem, k: usize) -> Result<Verdict> {
    Ok(if redundancy::is_redundant_exact(problem, k)? {
        Verdict::Redundant
    } else {
        Verdict::Keep(Vec::new())
    })
}

fn mc_verdict(
    problem: &LpProblem,
    k: usize,
    direction: &[f64],
    pool: &mut [Vec<f64>],
    sampler: &mut Sampler,
    config: &SolveConfig,
    stage: &mut Stage,
) -> Result<Verdict> {
    let verdict = redundancy::is_redundant_mc(problem, k, pool, direction)?;
    stage.no_hit_rays += verdict.no_hit_rays();
    let mut hits = match verdict {
        McVerdict::LikelyRedundant { .. } => return Ok(Verdict::Redundant),
        McVerdict::NonRedundant { hits, .. } => hits,
    };

    let start = sampler.seeds[0].clone();
    let mut retries = 0;
    while hits.len() < config.min_hits && retries < config.retry_cap {
        retries += 1;
        let fresh = redundancy::hit_and_run_sample(problem, &start, config.samples, config.tol.feas, &mut sampler.rng)?;
        if let McVerdict::NonRedundant { hits: more, no_hit_rays } =
            redundancy::is_redundant_mc(problem, k, &fresh, direction)?
        {
            stage.no_hit_rays += no_hit_rays;
            hits.extend(more);
        }
    }
    if hits.len() < config.min_hits {
        stage.exact_fallback = true;
        match redundancy::is_redundant_exact(problem, k) {
            Ok(true) => return Ok(Verdict::Redundant),
            Ok(false) | Err(LpError::OracleTooLarge { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(Verdict::Keep(hits))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

    fn problem(obj: &[f64], rows: &[&[f64]], rhs: &[f64]) -> LpProblem {
        LpProblem::new(obj.to_vec(), rows.iter().map(|r| r.to_vec()).collect(), rhs.to_vec())
            .unwrap()
            .normalize_rows()
            .unwrap()
    }

    fn unit_square(obj: &[f64]) -> LpProblem {
        problem(obj, &[&[1.0, 0.0], &[0.0, 1.0], &[-1.0, 0.0], &[0.0, -1.0]], &[1.0, 1.0, 0.0, 0.0])
    }

    fn mc() -> SolveConfig {
        SolveConfig {
            redundancy: RedundancyMode::MonteCarlo,
            ..SolveConfig::default()
        }
    }

    #[test]
    fn unit_square_exact() {
        let p = unit_square(&[FRAC_1_SQRT_2, FRAC_1_SQRT_2]);
        let out = solve(&p, None, &SolveConfig::default()).unwrap();
        assert_eq!(out.status, Status::Optimal);
        let x = out.x.as_ref().unwrap();
        assert!((x[0] - 1.0).abs() < 1e-12 && (x[1] - 1.0).abs() < 1e-12);
        assert!((out.z.unwrap() - SQRT_2).abs() < 1e-12);
        assert!((out.reduced_z.unwrap() - SQRT_2).abs() < 1e-12);
        assert_eq!(out.elimination_count(), 1);
        assert_eq!(out.stages[0].record.as_ref().unwrap().row_id, 1);
    }

    #[test]
    fn unit_square_monte_carlo() {
        let p = unit_square(&[FRAC_1_SQRT_2, FRAC_1_SQRT_2]);
        let out = solve(&p, Some(&[0.5, 0.5]), &mc()).unwrap();
        assert_eq!(out.status, Status::Optimal);
        assert!((out.z.unwrap() - SQRT_2).abs() < 1e-12);
        assert!(out.stages[0].witnesses >= 32);
    }

    #[test]
    fn half_plane_is_unbounded() {
        let p = problem(&[0.0, 1.0], &[&[0.0, -1.0]], &[0.0]);
        let out = solve(&p, None, &SolveConfig::default()).unwrap();
        assert_eq!(out.status, Status::Unbounded);
        assert!(out.x.is_none() && out.z.is_none());
    }

    #[test]
    fn no_rows_is_unbounded() {
        let p = problem(&[1.0, 1.0], &[], &[]);
        assert_eq!(solve(&p, None, &SolveConfig::default()).unwrap().status, Status::Unbounded);
    }

    #[test]
    fn empty_region_is_infeasible() {
        let p = problem(
            &[0.0, 1.0],
            &[&[1.0, 0.0], &[-1.0, 0.0], &[0.0, 1.0], &[0.0, -1.0]],
            &[0.0, -1.0, 1.0, 1.0],
        );
        assert_eq!(solve(&p, None, &SolveConfig::default()).unwrap().status, Status::Infeasible);
    }

    #[test]
    fn constant_objective_returns_feasible_point() {
        let p = unit_square(&[0.0, 0.0]);
        let out = solve(&p, None, &SolveConfig::default()).unwrap();
        assert_eq!(out.status, Status::Optimal);
        assert!(p.is_feasible(out.x.as_ref().unwrap(), 1e-7).unwrap());
        assert_eq!(out.z, Some(0.0));
    }

    #[test]
    fn objective_constant_after_elimination() {
        // maximize x2 on a square: after x2 = 1 the reduced objective is zero
        let p = unit_square(&[0.0, 1.0]);
        let out = solve(&p, None, &SolveConfig::default()).unwrap();
        assert_eq!(out.status, Status::Optimal);
        assert_eq!(out.z, Some(1.0));
    }

    #[test]
    fn slab_without_vertices() {
        let p = problem(&[0.0, 1.0], &[&[0.0, 1.0]], &[1.0]);
        let out = solve(&p, None, &SolveConfig::default()).unwrap();
        assert_eq!(out.status, Status::Optimal);
        assert_eq!(out.z, Some(1.0));
    }

    #[test]
    fn one_variable_problem_has_no_stages() {
        let p = problem(&[1.0], &[&[1.0], &[-1.0]], &[3.0, 1.0]);
        let out = solve(&p, None, &SolveConfig::default()).unwrap();
        assert_eq!(out.x, Some(vec![3.0]));
        assert!(out.stages.is_empty());
    }

    #[test]
    fn monte_carlo_needs_interior_point() {
        let p = unit_square(&[0.0, 1.0]);
        assert_eq!(solve(&p, None, &mc()), Err(LpError::MissingInteriorPoint));
        assert!(matches!(
            solve(&p, Some(&[1.0, 0.5]), &mc()),
            Err(LpError::NotInterior { row_id: 1, .. })
        ));
    }

    #[test]
    fn vacuous_input_rows() {
        let p = LpProblem::new(vec![1.0], vec![vec![0.0], vec![1.0]], vec![-1.0, 1.0]).unwrap();
        assert_eq!(solve(&p, None, &SolveConfig::default()).unwrap().status, Status::Infeasible);
        let p = LpProblem::new(vec![1.0], vec![vec![0.0], vec![2.0]], vec![1.0, 1.0]).unwrap();
        assert_eq!(solve(&p, None, &SolveConfig::default()).unwrap().x, Some(vec![0.5]));
    }
}
