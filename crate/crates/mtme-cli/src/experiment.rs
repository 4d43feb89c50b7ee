//! Experiment orchestration: a plain key=value spec file describes a grid
//! of (method, replicate) runs sharing one task set; replicates run as
//! independent jobs on a thread pool and land in unique subdirectories.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use mtme_core::engine::{run_observed, SequentialEvaluator};
use mtme_core::{Domain, Method, RunConfig, TaskSet};
use rayon::prelude::*;

use crate::bench::{build_domain, build_tasks, DomainKind};
use crate::csv_io::{write_aggregate, write_archive, write_tasks, AggregateRow, LogWriter};

/// Everything one experiment needs. Parsed from a key=value file; keys not
/// listed in the schema are rejected.
#[derive(Clone, Debug)]
pub struct ExperimentSpec {
    pub domain: DomainKind,
    pub methods: Vec<Method>,
    pub n_replicates: u64,
    pub seed_base: u64,
    pub n_tasks: usize,
    pub d_genome: usize,
    pub d_task: usize,
    pub eval_budget: u64,
    pub batch_size: u64,
    pub init_count: u64,
    pub sigma1: f64,
    pub sigma2: f64,
    pub fixed_tournament: Option<usize>,
    /// 0 means the default thread count.
    pub workers: usize,
    pub output_dir: PathBuf,
}

impl ExperimentSpec {
    pub fn new(domain: DomainKind, methods: Vec<Method>, n_replicates: u64, out: PathBuf) -> Self {
        let (d_genome, d_task) = domain.default_dims();
        ExperimentSpec {
            domain,
            methods,
            n_replicates,
            seed_base: 1,
            n_tasks: 500,
            d_genome,
            d_task,
            eval_budget: 100_000,
            batch_size: 64,
            init_count: 100,
            sigma1: 0.01,
            sigma2: 0.2,
            fixed_tournament: None,
            workers: 0,
            output_dir: out,
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut domain = None;
        let mut methods: Vec<Method> = Vec::new();
        let mut n_replicates = 1u64;
        let mut out = None;
        let mut pairs = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                bail!("line {}: expected key=value, got {raw:?}", lineno + 1);
            };
            pairs.push((key.trim().to_string(), value.trim().to_string(), lineno + 1));
        }
        // first pass: the keys that shape the defaults
        for (key, value, lineno) in &pairs {
            let ctx = || format!("line {lineno}: bad value for {key}");
            match key.as_str() {
                "domain" => domain = Some(value.parse::<DomainKind>().with_context(ctx)?),
                "methods" => {
                    for name in value.split(',') {
                        let m = name.trim().parse::<Method>().map_err(|_| {
                            anyhow::anyhow!("line {lineno}: unknown method {name:?}")
                        })?;
                        methods.push(m);
                    }
                }
                "replicates" => n_replicates = value.parse().with_context(ctx)?,
                "out" => out = Some(PathBuf::from(value)),
                _ => {}
            }
        }
        let Some(domain) = domain else { bail!("spec is missing `domain`") };
        if methods.is_empty() {
            bail!("spec is missing `methods`");
        }
        if n_replicates == 0 {
            bail!("`replicates` must be >= 1");
        }
        let mut spec = ExperimentSpec::new(
            domain,
            methods,
            n_replicates,
            out.unwrap_or_else(|| PathBuf::from("experiment_out")),
        );
        for (key, value, lineno) in &pairs {
            let ctx = || format!("line {lineno}: bad value for {key}");
            match key.as_str() {
                "domain" | "methods" | "replicates" | "out" => {}
                "seed_base" => spec.seed_base = value.parse().with_context(ctx)?,
                "tasks" => spec.n_tasks = value.parse().with_context(ctx)?,
                "genome_dim" => spec.d_genome = value.parse().with_context(ctx)?,
                "task_dim" => spec.d_task = value.parse().with_context(ctx)?,
                "evals" => spec.eval_budget = value.parse().with_context(ctx)?,
                "batch" => spec.batch_size = value.parse().with_context(ctx)?,
                "init" => spec.init_count = value.parse().with_context(ctx)?,
                "sigma1" => spec.sigma1 = value.parse().with_context(ctx)?,
                "sigma2" => spec.sigma2 = value.parse().with_context(ctx)?,
                "fixed_tournament" => spec.fixed_tournament = Some(value.parse().with_context(ctx)?),
                "workers" => spec.workers = value.parse().with_context(ctx)?,
                other => bail!("line {lineno}: unknown key {other:?}"),
            }
        }
        Ok(spec)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .with_context(|| format!("read spec {}", path.display()))?;
        Self::parse(&text)
    }

    pub fn run_config(&self, method: Method, replicate: u64) -> RunConfig {
        let mut cfg = RunConfig::new(method, self.n_tasks, self.d_genome, self.d_task);
        cfg.eval_budget = self.eval_budget;
        cfg.batch_size = self.batch_size;
        cfg.init_count = self.init_count;
        cfg.sigma1 = self.sigma1;
        cfg.sigma2 = self.sigma2;
        cfg.fixed_tournament = self.fixed_tournament;
        cfg.seed = self.seed_base + replicate;
        cfg
    }
}

pub fn run_dir_name(method: Method, replicate: u64) -> String {
    format!("{}_r{replicate}", method.as_str())
}

fn run_one_job(
    spec: &ExperimentSpec,
    task_set: &TaskSet,
    domain: &dyn Domain,
    method: Method,
    replicate: u64,
) -> Result<AggregateRow> {
    let cfg = spec.run_config(method, replicate);
    let dir = spec.output_dir.join(run_dir_name(method, replicate));
    fs::create_dir_all(&dir)?;
    let mut log_writer = LogWriter::create(&dir.join("log.csv"))?;
    let mut log_error = None;
    let started = Instant::now();
    let result = run_observed(&cfg, task_set, domain, &SequentialEvaluator, &mut |r| {
        if let Err(e) = log_writer.push(r) {
            log_error.get_or_insert(e);
        }
    });
    let (archive, mut log) = result?;
    if let Some(e) = log_error {
        return Err(e);
    }
    log.wall_time_secs = Some(started.elapsed().as_secs_f64());
    write_archive(&dir.join("archive.csv"), &archive, task_set)?;
    let stats = archive.stats();
    Ok(AggregateRow {
        method: method.as_str().to_string(),
        replicate,
        seed: cfg.seed,
        final_mean_fitness: stats.mean_fitness,
        final_coverage: Some(stats.coverage),
        status: "ok".to_string(),
    })
}

/// Run the full grid. Each replicate of each method is one sequential job;
/// jobs run concurrently on a pool of `spec.workers` threads (0 = default).
/// Failed jobs are recorded in the aggregate instead of aborting the grid.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<PathBuf> {
    fs::create_dir_all(&spec.output_dir)?;
    let task_set = build_tasks(spec.domain, spec.n_tasks, spec.d_task, spec.seed_base);
    write_tasks(&spec.output_dir.join("tasks.csv"), &task_set)?;
    let domain = build_domain(spec.domain, spec.d_genome, spec.d_task)?;

    let jobs: Vec<(Method, u64)> = spec
        .methods
        .iter()
        .flat_map(|&m| (0..spec.n_replicates).map(move |r| (m, r)))
        .collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.workers)
        .build()?;
    let rows: Vec<AggregateRow> = pool.install(|| {
        jobs.par_iter()
            .map(|&(method, replicate)| {
                run_one_job(spec, &task_set, domain.as_ref(), method, replicate).unwrap_or_else(
                    |e| AggregateRow {
                        method: method.as_str().to_string(),
                        replicate,
                        seed: spec.seed_base + replicate,
                        final_mean_fitness: None,
                        final_coverage: None,
                        status: format!("error: {e}").replace(',', ";").replace('\n', " "),
                    },
                )
            })
            .collect()
    });
    write_aggregate(&spec.output_dir.join("aggregate.csv"), &rows)?;
    Ok(spec.output_dir.clone())
}
