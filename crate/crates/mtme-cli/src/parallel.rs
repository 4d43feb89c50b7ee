//! Thread-pool batch evaluation. The engine generates candidates and
//! inserts results sequentially, so evaluating with any worker count gives
//! bit-identical runs; only wall time changes.

use mtme_core::engine::{BatchEvaluator, Candidate};
use mtme_core::{Domain, TaskSet};
use rayon::prelude::*;

pub struct ParallelEvaluator {
    pool: rayon::ThreadPool,
}

impl ParallelEvaluator {
    pub fn new(workers: usize) -> Self {
        assert!(workers >= 1);
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .expect("thread pool");
        ParallelEvaluator { pool }
    }
}

impl BatchEvaluator for ParallelEvaluator {
    fn evaluate_batch(
        &self,
        domain: &dyn Domain,
        task_set: &TaskSet,
        batch: &[Candidate],
    ) -> Vec<f64> {
        self.pool.install(|| {
            batch
                .par_iter()
                .map(|c| domain.evaluate(&c.genome, task_set.params(c.task_id)))
                .collect()
        })
    }
}
