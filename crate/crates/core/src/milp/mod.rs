//! LP/MILP kernel.
//!
//! Two backends share one contract:
//!
//! * [`Backend::Native`]: dense bounded revised simplex with Bland's rule as
//!   the anti-cycling fallback, and best-first branch-and-bound branching on
//!   the most fractional variable (lowest index on ties, down-branch first).
//!   Deterministic and dependency free; intended for desk-scale programs.
//! * [`Backend::Highs`]: the HiGHS solver, used for the larger master and
//!   subproblem programs.
//!
//! Duals are reported as `∂objective/∂rhs` for every row, in the program's
//! own sense.

mod highs_backend;
mod lp_format;
mod model;
pub mod native;
#[cfg(test)]
mod tests;

pub use lp_format::{to_lp_format, write_lp_file};
pub use model::{LinExpr, MixedIntegerProgram, Relation, Row, RowId, Sense, VarId, Variable};

use serde::Serialize;

use crate::error::{Error, Result};

/// Primal feasibility tolerance.
pub const FEAS_TOL: f64 = 1e-7;
/// Integrality tolerance.
pub const INT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SolveStatus {
    Optimal,
    GapReached,
    Infeasible,
    Unbounded,
    IterationLimit,
}

impl SolveStatus {
    pub fn has_solution(self) -> bool {
        matches!(self, SolveStatus::Optimal | SolveStatus::GapReached)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, serde::Deserialize)]
pub enum Backend {
    Native,
    Highs,
    /// Native for programs up to [`AUTO_NATIVE_MAX_ROWS`] rows and
    /// [`AUTO_NATIVE_MAX_INTEGERS`] integer columns, HiGHS otherwise.
    #[default]
    Auto,
}

pub const AUTO_NATIVE_MAX_ROWS: usize = 60;
pub const AUTO_NATIVE_MAX_INTEGERS: usize = 12;

#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub backend: Backend,
    pub rel_gap: f64,
    pub iteration_limit: usize,
    pub node_limit: usize,
    /// Wall-clock limit in seconds (HiGHS only).
    pub time_limit: Option<f64>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            backend: Backend::Auto,
            rel_gap: 0.0,
            iteration_limit: 200_000,
            node_limit: 200_000,
            time_limit: None,
        }
    }
}

impl SolveOptions {
    pub fn with_backend(backend: Backend) -> Self {
        SolveOptions {
            backend,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolverSolution {
    pub status: SolveStatus,
    pub objective: f64,
    /// Proof bound: lower bound for minimization, upper bound for maximization.
    pub bound: f64,
    pub x: Vec<f64>,
    /// Row duals, LP only.
    pub duals: Option<Vec<f64>>,
    pub relative_gap: f64,
    pub nodes: u64,
    pub iterations: u64,
}

impl SolverSolution {
    pub(crate) fn without_solution(status: SolveStatus, sense: Sense) -> Self {
        let inf = match sense {
            Sense::Minimize => f64::INFINITY,
            Sense::Maximize => f64::NEG_INFINITY,
        };
        SolverSolution {
            status,
            objective: inf,
            bound: -inf,
            x: Vec::new(),
            duals: None,
            relative_gap: f64::INFINITY,
            nodes: 0,
            iterations: 0,
        }
    }

    pub fn value(&self, v: VarId) -> f64 {
        self.x[v.0]
    }

    /// `Ok(self)` when a primal solution exists, error otherwise.
    pub fn require(self, context: &str) -> Result<Self> {
        if self.status.has_solution() {
            Ok(self)
        } else {
            Err(Error::solver(self.status, context))
        }
    }
}

/// `(incumbent − bound)/max(|incumbent|, 1)` oriented by the objective sense.
pub fn relative_gap(sense: Sense, incumbent: f64, bound: f64) -> f64 {
    let diff = match sense {
        Sense::Minimize => incumbent - bound,
        Sense::Maximize => bound - incumbent,
    };
    (diff.max(0.0)) / incumbent.abs().max(1.0)
}

fn pick_backend(mip: &MixedIntegerProgram, requested: Backend) -> Backend {
    match requested {
        Backend::Auto => {
            if !mip.quadratic.is_empty()
                || mip.num_rows() > AUTO_NATIVE_MAX_ROWS
                || mip.num_integer() > AUTO_NATIVE_MAX_INTEGERS
            {
                Backend::Highs
            } else {
                Backend::Native
            }
        }
        b => b,
    }
}

/// Solves a program without integer columns.
pub fn solve_lp(lp: &MixedIntegerProgram, opts: &SolveOptions) -> Result<SolverSolution> {
    lp.validate()?;
    if !lp.is_lp() {
        return Err(Error::MalformedProgram(
            "solve_lp called on a program with integer columns".into(),
        ));
    }
    match pick_backend(lp, opts.backend) {
        Backend::Native => {
            if !lp.quadratic.is_empty() {
                return Err(Error::MalformedProgram(
                    "native backend does not support quadratic objectives".into(),
                ));
            }
            Ok(native::solve_lp(lp, opts))
        }
        _ => highs_backend::solve(lp, opts),
    }
}

/// Solves a MILP to relative gap `rel_gap`.
pub fn solve_mip(
    mip: &MixedIntegerProgram,
    rel_gap: f64,
    opts: &SolveOptions,
) -> Result<SolverSolution> {
    mip.validate()?;
    if !(0.0..=1.0).contains(&rel_gap) {
        return Err(Error::Domain(format!("relative gap {rel_gap} outside [0, 1]")));
    }
    let opts = SolveOptions {
        rel_gap,
        ..opts.clone()
    };
    if mip.is_lp() {
        return solve_lp(mip, &opts);
    }
    match pick_backend(mip, opts.backend) {
        Backend::Native => {
            if !mip.quadratic.is_empty() {
                return Err(Error::MalformedProgram(
                    "native backend does not support quadratic objectives".into(),
                ));
            }
            Ok(native::solve_mip(mip, &opts))
        }
        _ => highs_backend::solve(mip, &opts),
    }
}
