//! Random instances and solver-versus-oracle comparison.
//!
//! Generated instances have the origin strictly inside and a box of explicit
//! bound rows, so they are always feasible and bounded.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::Result;
use crate::format::{fmt_real, ProblemFile};
use crate::model::LpProblem;
use crate::oracle::{oracle_solve, OracleOutcome};
use crate::reduce::{solve, SolveConfig, Status};

pub const DEFAULT_BOX_BOUND: f64 = 10.0;

/// Relative objective gap up to which solver and oracle agree.
pub const AGREEMENT_REL_TOL: f64 = 1e-6;

pub const CSV_HEADER: &str = "instance_id,n,m,seed,status_solver,status_oracle,z_solver,z_oracle,abs_gap,agree,stages,deleted_redundant,wall_solver_ms,wall_oracle_ms";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ReportStatus {
    Optimal,
    Infeasible,
    Unbounded,
    Stalled,
    Error,
}

impl ReportStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            ReportStatus::Optimal => "optimal",
            ReportStatus::Infeasible => "infeasible",
            ReportStatus::Unbounded => "unbounded",
            ReportStatus::Stalled => "stalled",
            ReportStatus::Error => "error",
        }
    }
}

impl From<Status> for ReportStatus {
    fn from(s: Status) -> Self {
        match s {
            Status::Optimal => ReportStatus::Optimal,
            Status::Infeasible => ReportStatus::Infeasible,
            Status::Unbounded => ReportStatus::Unbounded,
            Status::Stalled => ReportStatus::Stalled,
        }
    }
}

impl fmt::Display for ReportStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StageSummary {
    /// Row id of the eliminated plane; absent for a stage that ended the solve.
    pub k: Option<usize>,
    /// Eliminated variable, 1-based.
    pub j: Option<usize>,
    pub t: Option<f64>,
    pub deleted: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub instance_id: usize,
    pub n: usize,
    pub m: usize,
    pub seed: u64,
    pub solver_status: ReportStatus,
    pub oracle_status: ReportStatus,
    pub z_solver: Option<f64>,
    pub z_oracle: Option<f64>,
    pub abs_gap: Option<f64>,
    pub agree: bool,
    /// The solver's point satisfies the input rows within the feasibility tolerance.
    pub solver_feasible: bool,
    pub wall_solver_ms: f64,
    pub wall_oracle_ms: f64,
    pub stages: Vec<StageSummary>,
    pub error: Option<String>,
}

impl ComparisonReport {
    fn csv_row(&self, timings: bool) -> String {
        let opt = |v: Option<f64>| v.map(fmt_real).unwrap_or_default();
        let stages = self
            .stages
            .iter()
            .filter_map(|s| Some(format!("{}:{}:{}", s.k?, s.j?, fmt_real(s.t?))))
            .collect::<Vec<_>>()
            .join(";");
        let deleted = self
            .stages
            .iter()
            .enumerate()
            .flat_map(|(i, s)| s.deleted.iter().map(move |id| format!("{}:{}", i + 1, id)))
            .collect::<Vec<_>>()
            .join(";");
        let (ws, wo) = if timings {
            (format!("{:.3}", self.wall_solver_ms), format!("{:.3}", self.wall_oracle_ms))
        } else {
            (String::new(), String::new())
        };
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.instance_id,
            self.n,
            self.m,
            self.seed,
            self.solver_status,
            self.oracle_status,
            opt(self.z_solver),
            opt(self.z_oracle),
            opt(self.abs_gap),
            self.agree,
            stages,
            deleted,
            ws,
            wo
        )
    }
}

/// `m` rows with random unit normals and right-hand sides `slack` in
/// `[0.1, 1.0]` (so the origin is strictly interior), then `2n` box rows
/// `±x_i <= box_bound`, and a random unit objective.
pub fn generate_instance(n: usize, m: usize, seed: u64, box_bound: f64) -> (LpProblem, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(m + 2 * n);
    let mut rhs = Vec::with_capacity(m + 2 * n);
    for _ in 0..m {
        rows.push(random_unit(&mut rng, n));
        rhs.push(rng.random_range(0.1..=1.0));
    }
    for i in 0..n {
        for sign in [1.0, -1.0] {
            let mut row = vec![0.0; n];
            row[i] = sign;
            rows.push(row);
            rhs.push(box_bound);
        }
    }
    let objective = random_unit(&mut rng, n);
    let problem = LpProblem::new(objective, rows, rhs)
        .and_then(|p| p.normalize_rows())
        .expect("generated rows are unit length");
    (problem, vec![0.0; n])
}

fn random_unit<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

pub fn agrees(solver: ReportStatus, oracle: ReportStatus, z_solver: Option<f64>, z_oracle: Option<f64>) -> bool {
    if solver != oracle {
        return false;
    }
    match (z_solver, z_oracle) {
        (Some(zs), Some(zo)) => (zs - zo).abs() <= AGREEMENT_REL_TOL * zo.abs().max(1.0),
        _ => true,
    }
}

/// Runs the solver and the oracle on one problem. Disagreement is reported,
/// never raised.
pub fn compare(problem: &LpProblem, interior_point: Option<&[f64]>, config: &SolveConfig) -> Result<ComparisonReport> {
    let started = Instant::now();
    let outcome = solve(problem, interior_point, config)?;
    let wall_solver_ms = started.elapsed().as_secs_f64() * 1e3;

    let started = Instant::now();
    let oracle = oracle_solve(problem)?;
    let wall_oracle_ms = started.elapsed().as_secs_f64() * 1e3;

    let (oracle_status, z_oracle) = match oracle {
        OracleOutcome::Optimal { z, .. } => (ReportStatus::Optimal, Some(z)),
        OracleOutcome::NoFeasibleVertex => (ReportStatus::Infeasible, None),
    };
    let solver_status = ReportStatus::from(outcome.status);
    let solver_feasible = match &outcome.x {
        Some(x) => problem.is_feasible(x, config.tol.feas)?,
        None => true,
    };
    let abs_gap = match (outcome.z, z_oracle) {
        (Some(a), Some(b)) => Some((a - b).abs()),
        _ => None,
    };
    let stages = outcome
        .stages
        .iter()
        .map(|s| StageSummary {
            k: s.record.as_ref().map(|r| r.row_id),
            j: s.record.as_ref().map(|r| r.pivot + 1),
            t: s.cosine,
            deleted: s.deleted_redundant.clone(),
        })
        .collect();
    Ok(ComparisonReport {
        instance_id: 0,
        n: problem.n_vars(),
        m: problem.row_count(),
        seed: config.seed,
        agree: agrees(solver_status, oracle_status, outcome.z, z_oracle),
        solver_status,
        oracle_status,
        z_solver: outcome.z,
        z_oracle,
        abs_gap,
        solver_feasible,
        wall_solver_ms,
        wall_oracle_ms,
        stages,
        error: None,
    })
}

/// How many random rows an instance with `n` variables gets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MRule {
    /// `k·n` rows, written `kn` (e.g. `3n`).
    PerVariable(usize),
    Fixed(usize),
    /// Uniform in `lo..=hi`, written `lo-hi`.
    Range(usize, usize),
}

impl MRule {
    pub fn rows_for<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> usize {
        match *self {
            MRule::PerVariable(k) => k * n,
            MRule::Fixed(m) => m,
            MRule::Range(lo, hi) => rng.random_range(lo..=hi),
        }
    }
}

impl FromStr for MRule {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let s = s.trim();
        let bad = || format!("invalid m rule '{s}' (expected e.g. 3n, 7 or 3-12)");
        let parsed = if let Some(k) = s.strip_suffix('n') {
            MRule::PerVariable(if k.is_empty() { 1 } else { k.parse().map_err(|_| bad())? })
        } else if let Some((lo, hi)) = s.split_once('-') {
            let (lo, hi) = (lo.parse().map_err(|_| bad())?, hi.parse().map_err(|_| bad())?);
            if lo > hi {
                return Err(bad());
            }
            MRule::Range(lo, hi)
        } else {
            MRule::Fixed(s.parse().map_err(|_| bad())?)
        };
        match parsed {
            MRule::PerVariable(0) | MRule::Fixed(0) | MRule::Range(0, _) => Err(bad()),
            ok => Ok(ok),
        }
    }
}

impl fmt::Display for MRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MRule::PerVariable(k) => write!(f, "{k}n"),
            MRule::Fixed(m) => write!(f, "{m}"),
            MRule::Range(lo, hi) => write!(f, "{lo}-{hi}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchConfig {
    pub n_list: Vec<usize>,
    pub m_rule: MRule,
    /// Instances per entry of `n_list`.
    pub trials: usize,
    pub seed: u64,
    /// Redundancy mode and tolerances; the seed is replaced per instance.
    pub solve: SolveConfig,
    pub box_bound: f64,
    /// Fill the wall-time columns. Off by default so that output is
    /// reproducible byte for byte.
    pub timings: bool,
}

impl Default for BatchConfig {
    fn default() -> Self {
        BatchConfig {
            n_list: vec![2],
            m_rule: MRule::PerVariable(3),
            trials: 100,
            seed: 42,
            solve: SolveConfig::default(),
            box_bound: DEFAULT_BOX_BOUND,
            timings: false,
        }
    }
}

/// A disagreeing instance kept for replay.
#[derive(Debug, Clone, PartialEq)]
pub struct Counterexample {
    pub instance_id: usize,
    pub seed: u64,
    /// The instance in problem-file form, interior point included.
    pub problem_text: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct BatchSummary {
    /// `(n, m) -> (agreeing, total)`.
    pub groups: BTreeMap<(usize, usize), (usize, usize)>,
    pub solver_statuses: BTreeMap<ReportStatus, usize>,
    pub max_gap: Option<f64>,
    pub disagreements: usize,
    /// Optimal solver answers that violate an input row.
    pub infeasible_optima: usize,
    pub instances: usize,
}

impl BatchSummary {
    pub fn agreement_rate(&self) -> f64 {
        if self.instances == 0 {
            1.0
        } else {
            (self.instances - self.disagreements) as f64 / self.instances as f64
        }
    }
}

impl fmt::Display for BatchSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "instances: {}", self.instances)?;
        writeln!(f, "agreement: {:.4}", self.agreement_rate())?;
        for ((n, m), (agree, total)) in &self.groups {
            writeln!(f, "  n={n} m={m}: {agree}/{total} ({:.4})", *agree as f64 / *total as f64)?;
        }
        let statuses: Vec<String> = self.solver_statuses.iter().map(|(s, c)| format!("{s}={c}")).collect();
        writeln!(f, "solver statuses: {}", statuses.join(" "))?;
        match self.max_gap {
            Some(g) => writeln!(f, "max gap: {g:e}")?,
            None => writeln!(f, "max gap: -")?,
        }
        write!(f, "disagreements: {}", self.disagreements)?;
        if self.infeasible_optima > 0 {
            write!(f, "\ninfeasible optimal answers: {}", self.infeasible_optima)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchOutcome {
    pub csv: String,
    pub reports: Vec<ComparisonReport>,
    pub summary: BatchSummary,
    pub counterexamples: Vec<Counterexample>,
}

impl BatchOutcome {
    /// 0 when every instance agrees and every optimal answer is feasible, 2 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.summary.disagreements == 0 && self.summary.infeasible_optima == 0 {
            0
        } else {
            2
        }
    }
}

struct Planned {
    id: usize,
    n: usize,
    m: usize,
    seed: u64,
}

/// Generates and compares `trials` instances for each `n`. Instances run in
/// parallel; rows come out in instance order.
pub fn run_batch(config: &BatchConfig) -> BatchOutcome {
    let mut master = ChaCha8Rng::seed_from_u64(config.seed);
    let mut plan = Vec::new();
    for &n in &config.n_list {
        for _ in 0..config.trials {
            let m = config.m_rule.rows_for(n, &mut master);
            let seed = master.random::<u64>();
            plan.push(Planned {
                id: plan.len() + 1,
                n,
                m,
                seed,
            });
        }
    }

    let results: Vec<(ComparisonReport, Option<Counterexample>)> = plan
        .par_iter()
        .map(|inst| {
            let (problem, interior) = generate_instance(inst.n, inst.m, inst.seed, config.box_bound);
            let solve_config = SolveConfig {
                seed: inst.seed,
                ..config.solve.clone()
            };
            let mut report = compare(&problem, Some(&interior), &solve_config).unwrap_or_else(|e| ComparisonReport {
                instance_id: 0,
                n: inst.n,
                m: problem.row_count(),
                seed: inst.seed,
                solver_status: ReportStatus::Error,
                oracle_status: ReportStatus::Error,
                z_solver: None,
                z_oracle: None,
                abs_gap: None,
                agree: false,
                solver_feasible: true,
                wall_solver_ms: 0.0,
                wall_oracle_ms: 0.0,
                stages: Vec::new(),
                error: Some(e.to_string()),
            });
            report.instance_id = inst.id;
            report.seed = inst.seed;
            let counterexample = (!report.agree || !report.solver_feasible).then(|| Counterexample {
                instance_id: inst.id,
                seed: inst.seed,
                problem_text: ProblemFile::from_problem(&problem, Some(&interior)).to_text(),
            });
            (report, counterexample)
        })
        .collect();

    let mut csv = String::from(CSV_HEADER);
    csv.push('\n');
    let mut summary = BatchSummary::default();
    let mut reports = Vec::with_capacity(results.len());
    let mut counterexamples = Vec::new();
    for (report, cx) in results {
        writeln!(csv, "{}", report.csv_row(config.timings)).expect("writing to a String");
        summary.instances += 1;
        let group = summary.groups.entry((report.n, report.m)).or_default();
        group.1 += 1;
        if report.agree {
            group.0 += 1;
        } else {
            summary.disagreements += 1;
        }
        if !report.solver_feasible {
            summary.infeasible_optima += 1;
        }
        *summary.solver_statuses.entry(report.solver_status).or_default() += 1;
        if let Some(g) = report.abs_gap {
            summary.max_gap = Some(summary.max_gap.map_or(g, |m: f64| m.max(g)));
        }
        reports.push(report);
        counterexamples.extend(cx);
    }
    BatchOutcome {
        csv,
        reports,
        summary,
        counterexamples,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generated_instance_shape() {
        let (p, origin) = generate_instance(2, 5, 42, 10.0);
        assert_eq!(p.row_count(), 9);
        assert_eq!(origin, vec![0.0, 0.0]);
        assert!(p.residual(&origin).unwrap().iter().all(|&s| s >= 0.1));
        for u in 0..p.row_count() {
            assert!((p.row_norm(u) - 1.0).abs() < 1e-12);
        }
        assert!((p.obj_norm() - 1.0).abs() < 1e-12);

        let (p, _) = generate_instance(1, 1, 0, 10.0);
        assert_eq!(p.row_count(), 3);
        assert_eq!(generate_instance(3, 4, 9, 10.0), generate_instance(3, 4, 9, 10.0));
    }

    #[test]
    fn m_rule_parsing() {
        assert_eq!("3n".parse::<MRule>().unwrap(), MRule::PerVariable(3));
        assert_eq!("n".parse::<MRule>().unwrap(), MRule::PerVariable(1));
        assert_eq!("7".parse::<MRule>().unwrap(), MRule::Fixed(7));
        assert_eq!("3-12".parse::<MRule>().unwrap(), MRule::Range(3, 12));
        for bad in ["", "x", "0", "12-3", "0n", "a-b"] {
            assert!(bad.parse::<MRule>().is_err(), "{bad}");
        }
        assert_eq!(MRule::Range(3, 12).to_string(), "3-12");
    }

    #[test]
    fn agreement_rule() {
        use ReportStatus::*;
        assert!(agrees(Optimal, Optimal, Some(1.0), Some(1.0 + 5e-7)));
        assert!(!agrees(Optimal, Optimal, Some(1.0), Some(1.0 + 2e-6)));
        assert!(agrees(Optimal, Optimal, Some(1000.0), Some(1000.0 + 5e-4)));
        assert!(!agrees(Unbounded, Optimal, None, Some(1.0)));
        assert!(agrees(Infeasible, Infeasible, None, None));
    }

    #[test]
    fn empty_batch_is_header_only() {
        let out = run_batch(&BatchConfig {
            trials: 0,
            ..BatchConfig::default()
        });
        assert_eq!(out.csv, format!("{CSV_HEADER}\n"));
        assert_eq!(out.exit_code(), 0);
    }

    #[test]
    fn csv_row_layout() {
        let report = ComparisonReport {
            instance_id: 3,
            n: 2,
            m: 6,
            seed: 9,
            solver_status: ReportStatus::Optimal,
            oracle_status: ReportStatus::Optimal,
            z_solver: Some(1.0),
            z_oracle: Some(1.0),
            abs_gap: Some(0.0),
            agree: true,
            solver_feasible: true,
            wall_solver_ms: 1.5,
            wall_oracle_ms: 2.0,
            stages: vec![StageSummary {
                k: Some(2),
                j: Some(2),
                t: Some(0.8),
                deleted: vec![1, 7],
            }],
            error: None,
        };
        assert_eq!(
            report.csv_row(false),
            "3,2,6,9,optimal,optimal,1.0000000000000000e0,1.0000000000000000e0,0.0000000000000000e0,true,\
             2:2:8.0000000000000004e-1,1:1;1:7,,"
        );
        assert!(report.csv_row(true).ends_with(",1.500,2.000"));
        assert_eq!(report.csv_row(true).split(',').count(), CSV_HEADER.split(',').count());
    }

    fn problem(obj: &[f64], rows: &[&[f64]], rhs: &[f64]) -> LpProblem {
        LpProblem::new(obj.to_vec(), rows.iter().map(|r| r.to_vec()).collect(), rhs.to_vec()).unwrap()
    }

    #[test]
    fn compare_unit_square() {
        let p = problem(&[1.0, 1.0], &[&[1.0, 0.0], &[0.0, 1.0], &[-1.0, 0.0], &[0.0, -1.0]], &[1.0, 1.0, 0.0, 0.0]);
        let r = compare(&p, None, &SolveConfig::default()).unwrap();
        assert!(r.agree);
        assert!(r.abs_gap.unwrap() <= 1e-12);
        assert_eq!(r.solver_status, ReportStatus::Optimal);
    }

    #[test]
    fn compare_lidded_roof_deletes_lid_first() {
        let p = problem(
            &[0.0, 1.0],
            &[&[0.0, 1.0], &[0.6, 0.8], &[-0.6, 0.8], &[1.0, 0.0], &[-1.0, 0.0], &[0.0, -1.0]],
            &[5.0, 0.8, 0.8, 2.0, 2.0, 2.0],
        );
        let r = compare(&p, None, &SolveConfig::default()).unwrap();
        assert!(r.agree);
        assert_eq!(r.stages[0].deleted, vec![1]);
        assert!((r.z_solver.unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn compare_empty_region_agrees() {
        let p = problem(&[1.0], &[&[1.0], &[-1.0]], &[0.0, -1.0]);
        let r = compare(&p, None, &SolveConfig::default()).unwrap();
        assert_eq!(r.solver_status, ReportStatus::Infeasible);
        assert_eq!(r.oracle_status, ReportStatus::Infeasible);
        assert!(r.agree);
    }

    #[test]
    fn two_dimensional_batch_agrees() {
        let out = run_batch(&BatchConfig {
            n_list: vec![2],
            m_rule: MRule::PerVariable(3),
            trials: 200,
            seed: 42,
            ..BatchConfig::default()
        });
        assert_eq!(out.summary.instances, 200);
        assert_eq!(out.summary.agreement_rate(), 1.0);
        assert_eq!(out.exit_code(), 0);
        assert!(out.counterexamples.is_empty());
    }
}
