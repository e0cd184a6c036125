use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use flatlp::format::{fmt_real, parse_problem_file, write_oracle_json, write_solution_json, ProblemFile};
use flatlp::harness::{self, BatchConfig, MRule};
use flatlp::{oracle, oracle_solve, LpError, LpProblem, RedundancyMode, SolveConfig, Status, Tolerances};

const EXIT_USAGE: u8 = 1;
const EXIT_DISAGREE: u8 = 2;
const EXIT_NOT_OPTIMAL: u8 = 3;

#[derive(Parser)]
#[command(name = "flatlp", version, about = "Flattest-plane LP solver with a vertex-enumeration oracle")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a problem file by flattest-plane reduction
    Solve {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
        /// Print the solution as JSON
        #[arg(long)]
        json: bool,
        /// Exit with status 3 unless the result is optimal
        #[arg(long)]
        expect_optimal: bool,
    },
    /// Generate a random bounded instance with the origin inside
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = harness::DEFAULT_BOX_BOUND)]
        box_bound: f64,
        /// Output file (stdout when omitted)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve a problem file by vertex enumeration
    Oracle {
        #[arg(long)]
        input: PathBuf,
    },
    /// Run the solver and the oracle on a problem file and compare
    Compare {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Compare solver and oracle on a batch of generated instances, as CSV
    Bench {
        /// Comma separated variable counts
        #[arg(long, value_delimiter = ',', default_value = "2")]
        n_list: Vec<usize>,
        /// Random rows per instance: `3n`, a fixed count, or a range `3-12`
        #[arg(long, default_value = "3n")]
        m_rule: MRule,
        /// Instances per variable count
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Mode::Exact)]
        mode: Mode,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 32)]
        min_hits: usize,
        #[arg(long, default_value_t = harness::DEFAULT_BOX_BOUND)]
        box_bound: f64,
        /// Fill the wall-time columns (output is then not reproducible)
        #[arg(long)]
        timings: bool,
        /// CSV output file (stdout when omitted)
        #[arg(long)]
        out: Option<PathBuf>,
        /// Directory to write disagreeing instances into
        #[arg(long)]
        counterexamples: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Exact,
    Mc,
}

impl From<Mode> for RedundancyMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Exact => RedundancyMode::Exact,
            Mode::Mc => RedundancyMode::MonteCarlo,
        }
    }
}

#[derive(Args)]
struct SolverArgs {
    /// Redundancy test; defaults to exact unless vertex enumeration would
    /// exceed its cap
    #[arg(long, value_enum)]
    redundancy: Option<Mode>,
    /// Rays per Monte Carlo redundancy query
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    #[arg(long, default_value_t = 32)]
    min_hits: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 1e-7)]
    tol_feas: f64,
    #[arg(long, default_value_t = 1e-12)]
    tol_norm: f64,
    #[arg(long, default_value_t = 1e-10)]
    tol_dir: f64,
}

impl SolverArgs {
    fn config(&self, problem: Option<&LpProblem>) -> SolveConfig {
        let mode = self.redundancy.unwrap_or_else(|| match problem {
            Some(p) if oracle::binomial(p.row_count(), p.live_count()) > oracle::ENUMERATION_CAP => Mode::Mc,
            _ => Mode::Exact,
        });
        SolveConfig {
            tol: Tolerances {
                feas: self.tol_feas,
                norm: self.tol_norm,
                dir: self.tol_dir,
            },
            redundancy: mode.into(),
            samples: self.samples,
            min_hits: self.min_hits,
            seed: self.seed,
            ..SolveConfig::default()
        }
    }
}

#[derive(Debug)]
struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            let rendered = e.to_string();
            let line = rendered.lines().next().unwrap_or("invalid arguments");
            eprintln!("flatlp: {}", line.trim_start_matches("error: "));
            return ExitCode::from(EXIT_USAGE);
        }
    };
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(Failure(msg)) => {
            eprintln!("flatlp: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

/// Loads a problem file. A constraint that reads `0 <= negative` makes the
/// region empty; the raw problem is returned so the solver reports it.
fn load(path: &Path, tol: &Tolerances) -> Result<(LpProblem, Option<Vec<f64>>), Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure(format!("{}: {e}", path.display())))?;
    match parse_problem_file(&text, tol) {
        Ok(loaded) => Ok(loaded),
        Err(LpError::InfeasibleDetected { .. }) => {
            let file = ProblemFile::parse(&text)?;
            Ok((file.raw_problem()?, file.point))
        }
        Err(e) => Err(Failure(format!("{}: {e}", path.display()))),
    }
}

fn write_output(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| Failure(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(command: Command) -> Result<u8, Failure> {
    match command {
        Command::Solve {
            input,
            solver,
            json,
            expect_optimal,
        } => {
            let (problem, point) = load(&input, &solver.config(None).tol)?;
            let config = solver.config(Some(&problem));
            let outcome = flatlp::solve(&problem, point.as_deref(), &config)?;
            if json {
                println!("{}", write_solution_json(&outcome, &config));
            } else {
                println!("status: {}", outcome.status);
                if let (Some(x), Some(z)) = (&outcome.x, outcome.z) {
                    println!("z: {}", fmt_real(z));
                    let xs: Vec<String> = x.iter().map(|&v| fmt_real(v)).collect();
                    println!("x: {}", xs.join(" "));
                }
                for s in &outcome.stages {
                    match &s.record {
                        Some(r) => print!("stage {}: plane {} eliminates x{}", s.index, r.row_id, r.pivot + 1),
                        None => print!("stage {}: no elimination", s.index),
                    }
                    if !s.deleted_redundant.is_empty() {
                        print!(", deleted redundant {:?}", s.deleted_redundant);
                    }
                    println!();
                }
                if let Some(note) = &outcome.note {
                    println!("note: {note}");
                }
            }
            Ok(if expect_optimal && outcome.status != Status::Optimal {
                EXIT_NOT_OPTIMAL
            } else {
                0
            })
        }
        Command::Gen {
            n,
            m,
            seed,
            box_bound,
            out,
        } => {
            if n == 0 || m == 0 {
                return Err(Failure("--n and --m must be positive".into()));
            }
            let (problem, point) = harness::generate_instance(n, m, seed, box_bound);
            let text = format!(
                "# generated: n={n} m={m} seed={seed} box={box_bound}\n{}",
                ProblemFile::from_problem(&problem, Some(&point)).to_text()
            );
            write_output(out.as_deref(), &text)?;
            Ok(0)
        }
        Command::Oracle { input } => {
            let (problem, _) = load(&input, &Tolerances::default())?;
            println!("{}", write_oracle_json(&oracle_solve(&problem)?));
            Ok(0)
        }
        Command::Compare { input, solver } => {
            let (problem, point) = load(&input, &solver.config(None).tol)?;
            let config = solver.config(Some(&problem));
            let report = harness::compare(&problem, point.as_deref(), &config)?;
            let opt = |v: Option<f64>| v.map(fmt_real).unwrap_or_else(|| "-".into());
            println!("solver: {} z={}", report.solver_status, opt(report.z_solver));
            println!("oracle: {} z={}", report.oracle_status, opt(report.z_oracle));
            println!("gap: {}", opt(report.abs_gap));
            println!("agree: {}", report.agree);
            Ok(if report.agree && report.solver_feasible { 0 } else { EXIT_DISAGREE })
        }
        Command::Bench {
            n_list,
            m_rule,
            trials,
            seed,
            mode,
            samples,
            min_hits,
            box_bound,
            timings,
            out,
            counterexamples,
        } => {
            if n_list.contains(&0) {
                return Err(Failure("--n-list entries must be positive".into()));
            }
            let config = BatchConfig {
                n_list,
                m_rule,
                trials,
                seed,
                solve: SolveConfig {
                    redundancy: mode.into(),
                    samples,
                    min_hits,
                    ..SolveConfig::default()
                },
                box_bound,
                timings,
            };
            let outcome = harness::run_batch(&config);
            write_output(out.as_deref(), &outcome.csv)?;
            eprintln!("{}", outcome.summary);
            if let Some(dir) = counterexamples {
                fs::create_dir_all(&dir)?;
                for cx in &outcome.counterexamples {
                    let path = dir.join(format!("instance_{:05}.flatlp", cx.instance_id));
                    let text = format!("# instance {} seed {}\n{}", cx.instance_id, cx.seed, cx.problem_text);
                    fs::write(&path, text)?;
                }
            } else {
                for cx in &outcome.counterexamples {
                    eprintln!("# counterexample instance {} seed {}\n{}", cx.instance_id, cx.seed, cx.problem_text.trim_end());
                }
            }
            Ok(outcome.exit_code() as u8)
        }
    }
}
