//! Exact linear-programming oracle.

pub mod oracle;
pub mod simplex;

pub use oracle::{
    build_lp, oracle_eta0, oracle_feasible, oracle_max_cs, oracle_max_ps, oracle_min_cs,
    oracle_min_ps, StandardFormLP,
};
pub use simplex::{Constraint, Direction, LinearProgram, Sense, Solution, Status};
