//! Library side of the `chrrp` command: input generators, complexity
//! fitting, the benchmark harness and the subcommands.

pub mod bench;
pub mod commands;
pub mod conformance;
pub mod fit;
pub mod gen;
pub mod programs;
