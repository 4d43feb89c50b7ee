//! The full optimization loop and the four comparison methods, all under
//! identical evaluation-budget accounting.
//!
//! Within one batch the candidates are generated sequentially (cheap, and
//! each one owns an rng stream derived from its global evaluation index),
//! evaluated through a [`BatchEvaluator`] (sequential here; the companion
//! crate provides a thread-pool evaluator), and inserted sequentially by
//! the coordinator. Runs are bit-reproducible regardless of how many
//! workers evaluate a batch.

use alloc::vec::Vec;
use core::fmt;

use rand::Rng;

use crate::archive::{Archive, Genome};
use crate::config::{ConfigError, Method, RunConfig};
use crate::domains::Domain;
use crate::rng::{standard_normal, stream_rng, STREAM_BATCH, STREAM_ES, STREAM_INIT};
use crate::scheduler::{count_batch_successes, tournament_select_task, BanditState};
use crate::tasks::TaskSet;
use crate::variation::{iso_line_variation, select_parents, VariationParams};

/// (1+1)-ES baseline settings: initial step size and the 1/5th-success-rule
/// factors (increase on success, decay toward the 1/5 equilibrium on
/// failure).
pub const ES_STEP_INIT: f64 = 0.3;
pub const ES_STEP_INCREASE: f64 = 1.5;

fn es_step_decrease() -> f64 {
    libm::pow(ES_STEP_INCREASE, -0.25)
}

/// One pending evaluation: a genome and the task it competes on.
#[derive(Clone, Debug, PartialEq)]
pub struct Candidate {
    pub genome: Genome,
    pub task_id: usize,
}

/// Maps a batch of candidates to their fitness values. Implementations may
/// evaluate concurrently; the result order must match the input order.
pub trait BatchEvaluator: Sync {
    fn evaluate_batch(
        &self,
        domain: &dyn Domain,
        task_set: &TaskSet,
        batch: &[Candidate],
    ) -> Vec<f64>;
}

/// In-order, single-threaded evaluation.
pub struct SequentialEvaluator;

impl BatchEvaluator for SequentialEvaluator {
    fn evaluate_batch(
        &self,
        domain: &dyn Domain,
        task_set: &TaskSet,
        batch: &[Candidate],
    ) -> Vec<f64> {
        batch
            .iter()
            .map(|c| domain.evaluate(&c.genome, task_set.params(c.task_id)))
            .collect()
    }
}

/// One row of the per-batch time series.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BatchRecord {
    pub evals: u64,
    pub coverage: f64,
    pub mean_fitness: Option<f64>,
    pub max_fitness: Option<f64>,
    /// 0 for methods without tournament selection (and for the init record).
    pub tournament_size: usize,
    pub successes: u64,
}

/// Per-batch time series plus run-level counters.
#[derive(Clone, Debug, Default)]
pub struct RunLog {
    pub records: Vec<BatchRecord>,
    pub total_evals: u64,
    pub nonfinite_evals: u64,
    pub variation_calls: u64,
    pub candidates_generated: u64,
    /// Filled in by the caller; the core has no clock.
    pub wall_time_secs: Option<f64>,
}

impl RunLog {
    fn push_record(
        &mut self,
        archive: &Archive,
        evals: u64,
        s: usize,
        successes: u64,
        observer: &mut dyn FnMut(&BatchRecord),
    ) {
        let stats = archive.stats();
        let record = BatchRecord {
            evals,
            coverage: stats.coverage,
            mean_fitness: stats.mean_fitness,
            max_fitness: stats.max_fitness,
            tournament_size: s,
            successes,
        };
        observer(&record);
        self.records.push(record);
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EngineError {
    Config(ConfigError),
    /// Every initialization evaluation returned a non-finite fitness.
    EmptyArchiveAfterInit,
    /// me_all_tasks needs at least one whole batch: E >= B * n_tasks.
    BudgetBelowOneAllTasksBatch,
}

impl fmt::Display for EngineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EngineError::Config(e) => write!(f, "invalid config: {e}"),
            EngineError::EmptyArchiveAfterInit => {
                write!(f, "no finite fitness during initialization")
            }
            EngineError::BudgetBelowOneAllTasksBatch => {
                write!(f, "eval budget below one all-tasks batch (B * n_tasks)")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for EngineError {}

impl From<ConfigError> for EngineError {
    fn from(e: ConfigError) -> Self {
        EngineError::Config(e)
    }
}

/// Run the method named in `config` to its evaluation budget. Fully
/// deterministic given `config.seed`.
pub fn run(
    config: &RunConfig,
    task_set: &TaskSet,
    domain: &dyn Domain,
    evaluator: &dyn BatchEvaluator,
) -> Result<(Archive, RunLog), EngineError> {
    run_observed(config, task_set, domain, evaluator, &mut |_| {})
}

/// Like [`run`], invoking `observer` with each batch record as it is
/// produced, so callers can persist the log incrementally.
pub fn run_observed(
    config: &RunConfig,
    task_set: &TaskSet,
    domain: &dyn Domain,
    evaluator: &dyn BatchEvaluator,
    observer: &mut dyn FnMut(&BatchRecord),
) -> Result<(Archive, RunLog), EngineError> {
    config.validate()?;
    assert_eq!(task_set.len(), config.n_tasks, "task set size mismatch");
    assert_eq!(task_set.d_task(), config.d_task, "task dimension mismatch");
    assert_eq!(domain.genome_dim(), config.d_genome, "genome dimension mismatch");
    match config.method {
        Method::Mtme => {
            run_tournament_loop(config, task_set, domain, evaluator, config.fixed_tournament, observer)
        }
        Method::MeRandomTask => {
            run_tournament_loop(config, task_set, domain, evaluator, Some(1), observer)
        }
        Method::MeAllTasks => run_all_tasks(config, task_set, domain, evaluator, observer),
        Method::RandomSampling => run_random_sampling(config, task_set, domain, evaluator, observer),
        Method::EsPerTask => run_es_per_task(config, task_set, domain, evaluator, observer),
    }
}

struct BudgetedInsert<'a> {
    archive: &'a mut Archive,
    log: &'a mut RunLog,
    evals: u64,
}

impl BudgetedInsert<'_> {
    /// Count one evaluation and try the insert. Non-finite fitness is
    /// discarded (the evaluation still counts) and tallied for the caller
    /// to warn about.
    fn apply(&mut self, candidate: Candidate, fitness: f64) -> bool {
        self.evals += 1;
        if !fitness.is_finite() {
            self.log.nonfinite_evals += 1;
            return false;
        }
        self.archive
            .insert(candidate.task_id, candidate.genome, fitness, self.evals)
            .expect("finite fitness")
    }
}

/// MAP-Elites with tournament task selection; covers plain random-task
/// selection too, since a tournament of size 1 is a uniform task choice.
/// `forced_size` pins the tournament size and disables the bandit.
fn run_tournament_loop(
    config: &RunConfig,
    task_set: &TaskSet,
    domain: &dyn Domain,
    evaluator: &dyn BatchEvaluator,
    forced_size: Option<usize>,
    observer: &mut dyn FnMut(&BatchRecord),
) -> Result<(Archive, RunLog), EngineError> {
    let n_tasks = config.n_tasks;
    let mut archive = Archive::new(n_tasks);
    let mut log = RunLog::default();
    let params = VariationParams::new(config.sigma1, config.sigma2);

    // random initialization: K random genomes on uniformly random tasks
    let init_count = config.init_count.min(config.eval_budget);
    let mut batch = Vec::with_capacity(init_count as usize);
    for i in 0..init_count {
        let mut rng = stream_rng(config.seed, STREAM_INIT, i);
        let genome = Genome::random(config.d_genome, &mut rng);
        let task_id = rng.gen_range(0..n_tasks);
        batch.push(Candidate { genome, task_id });
    }
    log.candidates_generated += init_count;
    let fitnesses = evaluator.evaluate_batch(domain, task_set, &batch);
    let mut state = BudgetedInsert {
        archive: &mut archive,
        log: &mut log,
        evals: 0,
    };
    let mut init_successes = 0u64;
    for (candidate, fitness) in batch.into_iter().zip(fitnesses) {
        if state.apply(candidate, fitness) {
            init_successes += 1;
        }
    }
    let mut evals = state.evals;
    log.push_record(&archive, evals, 0, init_successes, observer);
    if archive.is_empty() {
        return Err(EngineError::EmptyArchiveAfterInit);
    }

    let sizes = match forced_size {
        Some(s) => alloc::vec![s.min(n_tasks)],
        None => config.effective_tournament_sizes(),
    };
    let mut bandit = BanditState::new(
        sizes.clone(),
        config.batch_size,
        config.normalize_bandit_reward,
    );

    while evals < config.eval_budget {
        let batch_len = config.batch_size.min(config.eval_budget - evals);
        let arm = bandit.select();
        let s = sizes[arm];

        let mut batch = Vec::with_capacity(batch_len as usize);
        for j in 0..batch_len {
            let mut rng = stream_rng(config.seed, STREAM_BATCH, evals + j);
            let ((p1_task, p1), (_, p2)) = select_parents(&archive, &mut rng);
            let child = iso_line_variation(&p1.genome, &p2.genome, &params, &mut rng);
            log.variation_calls += 1;
            let task_id = tournament_select_task(task_set.params(p1_task), task_set, s, &mut rng);
            batch.push(Candidate {
                genome: child,
                task_id,
            });
        }
        log.candidates_generated += batch_len;

        let fitnesses = evaluator.evaluate_batch(domain, task_set, &batch);
        let mut state = BudgetedInsert {
            archive: &mut archive,
            log: &mut log,
            evals,
        };
        let mut results = Vec::with_capacity(batch.len());
        for (candidate, fitness) in batch.into_iter().zip(fitnesses) {
            results.push(state.apply(candidate, fitness));
        }
        evals = state.evals;
        let successes = count_batch_successes(&results) as u64;
        bandit.update(arm, successes);
        log.push_record(&archive, evals, s, successes, observer);
    }

    log.total_evals = evals;
    Ok((archive, log))
}

/// Random genome on a random task, no variation; the archive keeps the best
/// per task.
fn run_random_sampling(
    config: &RunConfig,
    task_set: &TaskSet,
    domain: &dyn Domain,
    evaluator: &dyn BatchEvaluator,
    observer: &mut dyn FnMut(&BatchRecord),
) -> Result<(Archive, RunLog), EngineError> {
    let mut archive = Archive::new(config.n_tasks);
    let mut log = RunLog::default();
    let mut evals = 0u64;
    while evals < config.eval_budget {
        let batch_len = config.batch_size.min(config.eval_budget - evals);
        let mut batch = Vec::with_capacity(batch_len as usize);
        for j in 0..batch_len {
            let mut rng = stream_rng(config.seed, STREAM_BATCH, evals + j);
            let genome = Genome::random(config.d_genome, &mut rng);
            let task_id = rng.gen_range(0..config.n_tasks);
            batch.push(Candidate { genome, task_id });
        }
        log.candidates_generated += batch_len;
        let fitnesses = evaluator.evaluate_batch(domain, task_set, &batch);
        let mut state = BudgetedInsert {
            archive: &mut archive,
            log: &mut log,
            evals,
        };
        let mut successes = 0u64;
        for (candidate, fitness) in batch.into_iter().zip(fitnesses) {
            if state.apply(candidate, fitness) {
                successes += 1;
            }
        }
        evals = state.evals;
        log.push_record(&archive, evals, 0, successes, observer);
    }
    log.total_evals = evals;
    Ok((archive, log))
}

/// Every candidate is evaluated on every task and competes in every niche.
/// One batch costs B * n_tasks evaluations, so only whole batches run (the
/// leftover budget below one batch is left unspent).
fn run_all_tasks(
    config: &RunConfig,
    task_set: &TaskSet,
    domain: &dyn Domain,
    evaluator: &dyn BatchEvaluator,
    observer: &mut dyn FnMut(&BatchRecord),
) -> Result<(Archive, RunLog), EngineError> {
    let n_tasks = config.n_tasks;
    let per_batch = config.batch_size * n_tasks as u64;
    if per_batch > config.eval_budget {
        return Err(EngineError::BudgetBelowOneAllTasksBatch);
    }
    let mut archive = Archive::new(n_tasks);
    let mut log = RunLog::default();
    let params = VariationParams::new(config.sigma1, config.sigma2);
    let mut evals = 0u64;
    let mut candidate_index = 0u64;

    while evals + per_batch <= config.eval_budget {
        let mut genomes = Vec::with_capacity(config.batch_size as usize);
        for _ in 0..config.batch_size {
            let mut rng = stream_rng(config.seed, STREAM_BATCH, candidate_index);
            candidate_index += 1;
            let genome = if archive.is_empty() {
                Genome::random(config.d_genome, &mut rng)
            } else {
                let ((_, p1), (_, p2)) = select_parents(&archive, &mut rng);
                log.variation_calls += 1;
                iso_line_variation(&p1.genome, &p2.genome, &params, &mut rng)
            };
            genomes.push(genome);
        }
        log.candidates_generated += config.batch_size;

        let mut batch = Vec::with_capacity(per_batch as usize);
        for genome in &genomes {
            for task_id in 0..n_tasks {
                batch.push(Candidate {
                    genome: genome.clone(),
                    task_id,
                });
            }
        }
        let fitnesses = evaluator.evaluate_batch(domain, task_set, &batch);
        let mut state = BudgetedInsert {
            archive: &mut archive,
            log: &mut log,
            evals,
        };
        let mut successes = 0u64;
        for (candidate, fitness) in batch.into_iter().zip(fitnesses) {
            if state.apply(candidate, fitness) {
                successes += 1;
            }
        }
        evals = state.evals;
        log.push_record(&archive, evals, 0, successes, observer);
    }
    log.total_evals = evals;
    Ok((archive, log))
}

struct EsTaskState {
    incumbent: Option<(Genome, f64)>,
    step: f64,
}

/// Independent (1+1)-ES per task with 1/5th-success-rule step-size
/// adaptation, round-robin across tasks so the evals-vs-quality curve is
/// comparable with the other methods. Each task owns an rng stream; the
/// per-task trajectories are unaffected by the other tasks.
fn run_es_per_task(
    config: &RunConfig,
    task_set: &TaskSet,
    domain: &dyn Domain,
    evaluator: &dyn BatchEvaluator,
    observer: &mut dyn FnMut(&BatchRecord),
) -> Result<(Archive, RunLog), EngineError> {
    let n_tasks = config.n_tasks;
    let mut archive = Archive::new(n_tasks);
    let mut log = RunLog::default();
    let decrease = es_step_decrease();

    let mut states: Vec<EsTaskState> = (0..n_tasks)
        .map(|_| EsTaskState {
            incumbent: None,
            step: ES_STEP_INIT,
        })
        .collect();
    let mut rngs: Vec<_> = (0..n_tasks)
        .map(|t| stream_rng(config.seed, STREAM_ES, t as u64))
        .collect();

    let mut evals = 0u64;
    let mut evals_at_last_record = 0u64;
    let mut successes_since_record = 0u64;
    while evals < config.eval_budget {
        let round_len = (config.eval_budget - evals).min(n_tasks as u64) as usize;
        let mut batch = Vec::with_capacity(round_len);
        for (task_id, (state, rng)) in states
            .iter()
            .zip(rngs.iter_mut())
            .enumerate()
            .take(round_len)
        {
            let genome = match &state.incumbent {
                None => Genome::random(config.d_genome, rng),
                Some((x, _)) => {
                    let values = x
                        .iter()
                        .map(|&v| (v + state.step * standard_normal(rng)).clamp(0.0, 1.0))
                        .collect();
                    Genome::new(values)
                }
            };
            batch.push(Candidate { genome, task_id });
        }
        log.candidates_generated += round_len as u64;

        let fitnesses = evaluator.evaluate_batch(domain, task_set, &batch);
        let mut state = BudgetedInsert {
            archive: &mut archive,
            log: &mut log,
            evals,
        };
        for (candidate, fitness) in batch.into_iter().zip(fitnesses) {
            let task_id = candidate.task_id;
            let genome = candidate.genome.clone();
            if state.apply(candidate, fitness) {
                successes_since_record += 1;
            }
            let es = &mut states[task_id];
            match &mut es.incumbent {
                None => {
                    if fitness.is_finite() {
                        es.incumbent = Some((genome, fitness));
                    }
                }
                Some((x, best)) => {
                    if fitness.is_finite() && fitness > *best {
                        *x = genome;
                        *best = fitness;
                        es.step *= ES_STEP_INCREASE;
                    } else {
                        es.step *= decrease;
                    }
                }
            }
        }
        evals = state.evals;
        if evals - evals_at_last_record >= config.batch_size || evals == config.eval_budget {
            log.push_record(&archive, evals, 0, successes_since_record, observer);
            evals_at_last_record = evals;
            successes_since_record = 0;
        }
    }
    log.total_evals = evals;
    Ok((archive, log))
}
