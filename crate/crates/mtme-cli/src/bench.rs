//! Benchmark domain selection: names, default dimensions and task-set
//! generation for the two built-in domains.

use std::str::FromStr;

use anyhow::{bail, Result};
use mtme_core::domains::{ArmDomain, SyntheticDomain, ARM_DEFAULT_TARGET, SYNTHETIC_DEFAULT_CONSTANTS_SEED};
use mtme_core::tasks::{cvt_default_samples, generate_cvt, generate_uniform, CVT_DEFAULT_ITERATIONS};
use mtme_core::{Domain, TaskSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DomainKind {
    /// Planar arm reaching for (1, 1); tasks are (length scale, joint range).
    Arm,
    /// Rastrigin-like landscape whose optimum moves smoothly with the task.
    Synthetic,
}

impl DomainKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            DomainKind::Arm => "arm",
            DomainKind::Synthetic => "synthetic",
        }
    }

    /// (genome dim, task dim) used when the caller does not override them.
    pub fn default_dims(&self) -> (usize, usize) {
        match self {
            DomainKind::Arm => (10, 2),
            DomainKind::Synthetic => (36, 12),
        }
    }
}

impl FromStr for DomainKind {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "arm" => Ok(DomainKind::Arm),
            "synthetic" => Ok(DomainKind::Synthetic),
            other => bail!("unknown domain {other:?} (expected arm or synthetic)"),
        }
    }
}

pub fn build_domain(kind: DomainKind, d_genome: usize, d_task: usize) -> Result<Box<dyn Domain>> {
    match kind {
        DomainKind::Arm => {
            if d_task != 2 {
                bail!("arm tasks are 2-dimensional (length scale, joint range)");
            }
            Ok(Box::new(ArmDomain::new(d_genome, ARM_DEFAULT_TARGET)))
        }
        DomainKind::Synthetic => Ok(Box::new(SyntheticDomain::new(
            d_genome,
            d_task,
            SYNTHETIC_DEFAULT_CONSTANTS_SEED,
        ))),
    }
}

/// Arm task sets are centroidal Voronoi tessellations of the unit square
/// (evenly spread niches); the synthetic domain uses uniform random tasks.
pub fn build_tasks(kind: DomainKind, n_tasks: usize, d_task: usize, seed: u64) -> TaskSet {
    match kind {
        DomainKind::Arm => generate_cvt(
            n_tasks,
            d_task,
            cvt_default_samples(n_tasks),
            CVT_DEFAULT_ITERATIONS,
            seed,
        ),
        DomainKind::Synthetic => generate_uniform(n_tasks, d_task, seed),
    }
}
