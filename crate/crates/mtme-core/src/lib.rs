//! Multi-task MAP-Elites: a quality-diversity optimizer that keeps one elite
//! per task across thousands of related tasks.
//!
//! The crate is `no_std`-compatible (with `alloc`); file formats, statistics
//! and the benchmark CLI live in the companion `mtme-cli` crate.
//!
//! Overview of the modules:
//! - [`archive`]: genomes, task descriptors and the elite archive with its
//!   strict-improvement competition rule.
//! - [`tasks`]: task-set generation (CVT via Lloyd's algorithm, or uniform
//!   random) and the Euclidean task distance.
//! - [`variation`]: parent selection and the iso+line variation operator.
//! - [`scheduler`]: tournament-based task selection and UCB1 control of the
//!   tournament size.
//! - [`engine`]: the full algorithm plus the four comparison methods, all
//!   under identical evaluation-budget accounting.
//! - [`domains`]: the variable-morphology planar arm and a synthetic
//!   high-dimensional multi-task family.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

#[cfg(any(test, feature = "std"))]
extern crate std;

pub mod archive;
pub mod config;
pub mod domains;
pub mod engine;
pub mod rng;
pub mod scheduler;
pub mod tasks;
pub mod variation;

pub use archive::{Archive, ArchiveError, ArchiveStats, Elite, Genome, TaskDescriptor};
pub use config::{ConfigError, Method, RunConfig};
pub use domains::{ArmDomain, Domain, SyntheticDomain};
pub use engine::{
    run, BatchRecord, Candidate, EngineError, RunLog, SequentialEvaluator,
};
pub use scheduler::BanditState;
pub use tasks::{TaskGenMode, TaskSet};
pub use variation::VariationParams;
