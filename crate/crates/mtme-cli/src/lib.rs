//! Benchmark companion to `mtme-core`: CSV file formats, replicate
//! statistics, thread-pool evaluation, experiment orchestration and
//! plot-ready exports. The `mtme` binary wires these into subcommands.

pub mod bench;
pub mod csv_io;
pub mod experiment;
pub mod export;
pub mod parallel;
pub mod stats;

pub use bench::{build_domain, build_tasks, DomainKind};
pub use experiment::{run_experiment, ExperimentSpec};
pub use parallel::ParallelEvaluator;
