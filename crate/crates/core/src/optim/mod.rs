//! Convex solvers: a dense simplex method for linear programs and an ADMM
//! solver for the ℓ1 problem over a sign cone intersected with a ball.

mod cone_ball;
mod lp;
mod simplex;

use std::fmt;

pub use cone_ball::{solve_cone_ball_l1, ConeBallOptions};
pub use lp::{analysis_l1_program, solve_lp, solve_lp_with, LinearProgram, LpOptions, LpRoute};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

impl fmt::Display for SolverStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolverStatus::Optimal => "optimal",
            SolverStatus::Infeasible => "infeasible",
            SolverStatus::Unbounded => "unbounded",
            SolverStatus::IterationLimit => "iteration_limit",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverReport {
    pub status: SolverStatus,
    pub iterations: usize,
    pub objective_value: f64,
    pub max_constraint_violation: f64,
}

impl SolverReport {
    pub fn is_optimal(&self) -> bool {
        self.status == SolverStatus::Optimal
    }
}
