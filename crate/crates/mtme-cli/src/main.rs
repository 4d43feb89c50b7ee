use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use mtme_core::engine::{run_observed, BatchEvaluator, SequentialEvaluator};
use mtme_core::Method;

use mtme_cli::csv_io::{
    read_aggregate, read_archive, read_tasks, write_archive, write_tasks, LogWriter,
};
use mtme_cli::export::{cross_evaluate_top_elites, export_genome_plot, export_heatmap, write_cross_eval};
use mtme_cli::stats::{mann_whitney_u, quartiles};
use mtme_cli::{build_domain, build_tasks, DomainKind, ExperimentSpec, ParallelEvaluator};

#[derive(Parser)]
#[command(name = "mtme", about = "Multi-task MAP-Elites benchmark runner", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum DomainArg {
    Arm,
    Synthetic,
}

impl From<DomainArg> for DomainKind {
    fn from(d: DomainArg) -> Self {
        match d {
            DomainArg::Arm => DomainKind::Arm,
            DomainArg::Synthetic => DomainKind::Synthetic,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// One run of one method; writes tasks.csv, log.csv and archive.csv.
    Run(RunArgs),
    /// A grid of (method, replicate) runs described by a key=value spec file.
    Experiment {
        /// Spec file; keys: domain, methods, replicates, seed_base, tasks,
        /// genome_dim, task_dim, evals, batch, init, sigma1, sigma2,
        /// fixed_tournament, workers, out.
        spec: PathBuf,
        /// Overrides the spec's output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Per-method summaries and pairwise rank tests over an experiment's
    /// aggregate.csv.
    Stats {
        /// Experiment output directory (containing aggregate.csv).
        dir: PathBuf,
    },
    /// Plot-ready exports from a finished run directory.
    Export(ExportArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, value_enum)]
    domain: DomainArg,
    #[arg(long, default_value = "mtme")]
    method: Method,
    /// Number of tasks (niches).
    #[arg(long, default_value_t = 500)]
    tasks: usize,
    /// Genome dimensionality; defaults to the domain's standard setting.
    #[arg(long)]
    dim: Option<usize>,
    /// Task-descriptor dimensionality; defaults to the domain's standard
    /// setting (the arm is always 2-D).
    #[arg(long)]
    task_dim: Option<usize>,
    /// Evaluation budget E.
    #[arg(long, default_value_t = 100_000)]
    evals: u64,
    /// Batch size B.
    #[arg(long, default_value_t = 64)]
    batch: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Pin the tournament size instead of adapting it.
    #[arg(long)]
    fixed_tournament: Option<usize>,
    /// Random individuals used for initialization.
    #[arg(long, default_value_t = 100)]
    init: u64,
    /// Worker threads for fitness evaluation (1 = sequential).
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Load tasks from a CSV instead of generating them.
    #[arg(long)]
    task_file: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ExportArgs {
    /// heatmap, genome, or cross-eval.
    #[command(subcommand)]
    what: ExportWhat,
}

#[derive(Subcommand)]
enum ExportWhat {
    /// Fitness map over the task space (SVG for 2-D tasks, CSV always).
    Heatmap {
        /// Run directory containing archive.csv and tasks.csv.
        dir: PathBuf,
        /// Path to tasks.csv if it is not in the run directory.
        #[arg(long)]
        tasks: Option<PathBuf>,
    },
    /// Long-format genome dump (elite_id, param_index, param_value, fitness).
    Genome {
        dir: PathBuf,
        #[arg(long)]
        tasks: Option<PathBuf>,
    },
    /// Evaluate the top elites on all filled niches and report fitness deltas.
    CrossEval {
        dir: PathBuf,
        #[arg(long)]
        tasks: Option<PathBuf>,
        #[arg(long, value_enum)]
        domain: DomainArg,
        #[arg(long, default_value_t = 0.05)]
        top_fraction: f64,
    },
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Run(args) => cmd_run(args),
        Command::Experiment { spec, out } => cmd_experiment(&spec, out),
        Command::Stats { dir } => cmd_stats(&dir),
        Command::Export(args) => cmd_export(args.what),
    }
}

fn cmd_run(args: RunArgs) -> Result<()> {
    let kind: DomainKind = args.domain.into();
    let (default_genome, default_task) = kind.default_dims();
    let d_genome = args.dim.unwrap_or(default_genome);
    let d_task = args.task_dim.unwrap_or(default_task);

    let task_set = match &args.task_file {
        Some(path) => {
            let ts = read_tasks(path)?;
            if ts.len() != args.tasks && args.tasks != 500 {
                bail!("--tasks {} conflicts with {} tasks in {}", args.tasks, ts.len(), path.display());
            }
            ts
        }
        None => build_tasks(kind, args.tasks, d_task, args.seed),
    };
    if task_set.d_task() != d_task {
        bail!("task file dimension {} does not match task_dim {d_task}", task_set.d_task());
    }
    let domain = build_domain(kind, d_genome, task_set.d_task())?;

    let mut cfg = mtme_core::RunConfig::new(args.method, task_set.len(), d_genome, d_task);
    cfg.eval_budget = args.evals;
    cfg.batch_size = args.batch;
    cfg.init_count = args.init;
    cfg.seed = args.seed;
    cfg.fixed_tournament = args.fixed_tournament;

    fs::create_dir_all(&args.out)?;
    write_tasks(&args.out.join("tasks.csv"), &task_set)?;
    let mut log_writer = LogWriter::create(&args.out.join("log.csv"))?;
    let mut log_error = None;

    let parallel;
    let evaluator: &dyn BatchEvaluator = if args.workers > 1 {
        parallel = ParallelEvaluator::new(args.workers);
        &parallel
    } else {
        &SequentialEvaluator
    };

    let started = Instant::now();
    let (archive, mut log) = run_observed(&cfg, &task_set, domain.as_ref(), evaluator, &mut |r| {
        if let Err(e) = log_writer.push(r) {
            log_error.get_or_insert(e);
        }
    })?;
    if let Some(e) = log_error {
        return Err(e);
    }
    log.wall_time_secs = Some(started.elapsed().as_secs_f64());
    write_archive(&args.out.join("archive.csv"), &archive, &task_set)?;

    let stats = archive.stats();
    println!(
        "{}: {} evals, coverage {:.4}, mean fitness {}, max fitness {}, {:.2}s",
        args.method,
        log.total_evals,
        stats.coverage,
        stats.mean_fitness.map_or("NA".into(), |v| format!("{v:.6}")),
        stats.max_fitness.map_or("NA".into(), |v| format!("{v:.6}")),
        log.wall_time_secs.unwrap_or(0.0),
    );
    if log.nonfinite_evals * 100 > cfg.eval_budget {
        eprintln!(
            "error: {} of {} evaluations returned non-finite fitness (> 1%)",
            log.nonfinite_evals, cfg.eval_budget
        );
        std::process::exit(2);
    }
    Ok(())
}

fn cmd_experiment(spec_path: &PathBuf, out: Option<PathBuf>) -> Result<()> {
    let mut spec = ExperimentSpec::from_file(spec_path)?;
    if let Some(out) = out {
        spec.output_dir = out;
    }
    let dir = mtme_cli::run_experiment(&spec)?;
    println!("experiment written to {}", dir.display());
    cmd_stats(&dir)
}

fn cmd_stats(dir: &PathBuf) -> Result<()> {
    let rows = read_aggregate(&dir.join("aggregate.csv"))?;
    let mut by_method: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    let mut failures = 0usize;
    for row in &rows {
        match (row.status.as_str(), row.final_mean_fitness) {
            ("ok", Some(v)) => by_method.entry(row.method.clone()).or_default().push(v),
            _ => failures += 1,
        }
    }
    if failures > 0 {
        eprintln!("warning: {failures} failed replicate(s) excluded");
    }
    if by_method.is_empty() {
        bail!("no successful replicates in {}", dir.display());
    }

    println!("final mean fitness per method (median [q1, q3], n):");
    for (method, values) in &by_method {
        let (q1, med, q3) = quartiles(values);
        println!("  {method:>16}: {med:.6} [{q1:.6}, {q3:.6}] (n={})", values.len());
    }

    let methods: Vec<&String> = by_method.keys().collect();
    if methods.len() > 1 {
        println!("pairwise Mann-Whitney U (two-sided):");
    }
    let mut test_lines = Vec::new();
    for i in 0..methods.len() {
        for j in i + 1..methods.len() {
            let (u, p) = mann_whitney_u(&by_method[methods[i]], &by_method[methods[j]]);
            println!("  {} vs {}: U = {u}, p = {p:.3e}", methods[i], methods[j]);
            test_lines.push(format!("{},{},{u},{p:e}", methods[i], methods[j]));
        }
    }

    let mut out = String::from("method_a,method_b,u,p_two_sided\n");
    for line in test_lines {
        out.push_str(&line);
        out.push('\n');
    }
    fs::write(dir.join("utests.csv"), out)?;
    Ok(())
}

fn load_run_dir(dir: &PathBuf, tasks: Option<PathBuf>) -> Result<(mtme_core::Archive, mtme_core::TaskSet)> {
    let tasks_path = match tasks {
        Some(p) => p,
        None => {
            let local = dir.join("tasks.csv");
            if local.exists() {
                local
            } else {
                // experiment run dirs share their parent's task file
                dir.parent()
                    .map(|p| p.join("tasks.csv"))
                    .filter(|p| p.exists())
                    .with_context(|| format!("no tasks.csv in or above {}", dir.display()))?
            }
        }
    };
    let task_set = read_tasks(&tasks_path)?;
    let archive = read_archive(&dir.join("archive.csv"), &task_set)?;
    Ok((archive, task_set))
}

fn cmd_export(what: ExportWhat) -> Result<()> {
    match what {
        ExportWhat::Heatmap { dir, tasks } => {
            let (archive, task_set) = load_run_dir(&dir, tasks)?;
            let out = export_heatmap(&archive, &task_set, &dir)?;
            println!("wrote {}", out.csv.display());
            if let Some(svg) = out.svg {
                println!("wrote {}", svg.display());
            }
        }
        ExportWhat::Genome { dir, tasks } => {
            let (archive, _) = load_run_dir(&dir, tasks)?;
            let path = dir.join("genomes.csv");
            export_genome_plot(&archive, &path)?;
            println!("wrote {}", path.display());
        }
        ExportWhat::CrossEval { dir, tasks, domain, top_fraction } => {
            let (archive, task_set) = load_run_dir(&dir, tasks)?;
            let d_genome = archive
                .iter_filled()
                .next()
                .map(|(_, e)| e.genome.dim())
                .context("archive is empty")?;
            let dom = build_domain(domain.into(), d_genome, task_set.d_task())?;
            let rows = cross_evaluate_top_elites(&archive, &task_set, dom.as_ref(), top_fraction)?;
            let path = dir.join("cross_eval.csv");
            write_cross_eval(&path, &rows)?;
            let mut deltas: Vec<f64> = rows.iter().map(|r| r.delta).collect();
            deltas.sort_by(|a, b| a.partial_cmp(b).unwrap());
            println!(
                "wrote {} ({} pairs, median delta {:.6})",
                path.display(),
                rows.len(),
                mtme_cli::stats::median(&deltas)
            );
        }
    }
    Ok(())
}
