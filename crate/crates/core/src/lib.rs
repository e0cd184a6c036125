//! Linear programming by recursive flattest-plane dimension reduction.
//!
//! Problems have the form `maximize d·x subject to A·x <= r` with free
//! variables. The solver repeatedly picks the constraint plane whose outward
//! normal makes the smallest angle with the objective, uses it as an equality
//! to eliminate one variable, and recurses until one variable is left. A
//! vertex-enumeration oracle provides ground truth for every answer, and the
//! [`harness`] module compares the two on generated instances.
//!
//! ```
//! use flatlp::{solve, LpProblem, SolveConfig, Status};
//!
//! // maximize x + y on the unit square
//! let p = LpProblem::new(
//!     vec![1.0, 1.0],
//!     vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![-1.0, 0.0], vec![0.0, -1.0]],
//!     vec![1.0, 1.0, 0.0, 0.0],
//! )
//! .unwrap()
//! .normalize_rows()
//! .unwrap();
//! let out = solve(&p, None, &SolveConfig::default()).unwrap();
//! assert_eq!(out.status, Status::Optimal);
//! assert_eq!(out.x, Some(vec![1.0, 1.0]));
//! ```

pub mod error;
pub mod format;
pub mod harness;
pub mod model;
pub mod oracle;
pub mod reduce;
pub mod redundancy;

pub use error::{LpError, Result};
pub use model::{LpProblem, Tolerances};
pub use oracle::{oracle_solve, OracleOutcome};
pub use reduce::{solve, EliminationRecord, RedundancyMode, SolveConfig, SolveOutcome, Stage, Status};
