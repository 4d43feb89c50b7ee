//! Tournament-based task selection and UCB1 control of the tournament size.
//!
//! A batch of B evaluations shares one tournament size s. The reward of a
//! batch is the number of niches invaded (inserts that succeeded); UCB1
//! picks the next size from the empirical mean reward plus the exploration
//! bonus sqrt(2 ln g / n_i).

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::tasks::{closest_task, TaskSet};

/// Per-arm selection and success counters driving UCB1.
#[derive(Clone, Debug)]
pub struct BanditState {
    sizes: Vec<usize>,
    selected: Vec<u64>,
    successes: Vec<u64>,
    generations: u64,
    batch_size: u64,
    normalize: bool,
}

impl BanditState {
    /// `normalize` divides the mean reward by the batch size so it lies in
    /// [0, 1], as canonical UCB1 assumes; pass `false` for the raw variant.
    pub fn new(sizes: Vec<usize>, batch_size: u64, normalize: bool) -> Self {
        assert!(!sizes.is_empty(), "bandit needs at least one arm");
        assert!(batch_size >= 1);
        let k = sizes.len();
        BanditState {
            sizes,
            selected: vec![0; k],
            successes: vec![0; k],
            generations: 0,
            batch_size,
            normalize,
        }
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn selected(&self) -> &[u64] {
        &self.selected
    }

    pub fn successes(&self) -> &[u64] {
        &self.successes
    }

    pub fn generations(&self) -> u64 {
        self.generations
    }

    fn mean_reward(&self, arm: usize) -> f64 {
        let scale = if self.normalize {
            self.selected[arm] * self.batch_size
        } else {
            self.selected[arm]
        };
        self.successes[arm] as f64 / scale as f64
    }

    /// Arm to play next. Untried arms go first (lowest index first); after
    /// that, the UCB1 argmax with ties broken toward the lowest index.
    pub fn select(&self) -> usize {
        if let Some(untried) = self.selected.iter().position(|&n| n == 0) {
            return untried;
        }
        let g = self.generations as f64;
        let mut best = 0usize;
        let mut best_score = f64::NEG_INFINITY;
        for arm in 0..self.sizes.len() {
            let bonus = libm::sqrt(2.0 * libm::log(g) / self.selected[arm] as f64);
            let score = self.mean_reward(arm) + bonus;
            if score > best_score {
                best_score = score;
                best = arm;
            }
        }
        best
    }

    /// Record one played generation: its arm and the batch's success count.
    pub fn update(&mut self, arm: usize, batch_successes: u64) {
        assert!(arm < self.sizes.len(), "arm index out of range");
        self.selected[arm] += 1;
        self.successes[arm] += batch_successes;
        self.generations += 1;
    }
}

/// Draw `s` distinct tasks uniformly from all tasks (filled or empty niches
/// alike) and return the one closest to `parent_params`; ties break toward
/// the lowest id.
pub fn tournament_select_task<R: Rng + ?Sized>(
    parent_params: &[f64],
    task_set: &TaskSet,
    s: usize,
    rng: &mut R,
) -> usize {
    let n = task_set.len();
    assert!(s >= 1 && s <= n, "tournament size must be in [1, n_tasks]");
    let picks: Vec<usize> = rand::seq::index::sample(rng, n, s).into_iter().collect();
    closest_task(&picks, parent_params, task_set)
}

/// Number of inserts that succeeded in a batch (the batch reward r).
pub fn count_batch_successes(insert_results: &[bool]) -> usize {
    insert_results.iter().filter(|&&ok| ok).count()
}
