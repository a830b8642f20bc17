//! Benchmark and reproduction harness behind the `fracpar` binary.

pub mod alloc;
pub mod cli;
pub mod commands;
pub mod config;
pub mod csv;
pub mod truncation;

pub use commands::{
    cmd_bench, cmd_bounds, cmd_parareal, cmd_solve, cmd_truncation, BenchRecord, BoundsRow,
    SolveRow,
};
pub use config::RunConfig;
