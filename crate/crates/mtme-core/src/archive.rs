//! Domain types shared by all modules, plus the elite archive.
//!
//! The archive is a dense vector with one slot per task; each slot holds the
//! best-known solution for that task. Competition is by strict fitness
//! improvement, so per-slot fitness is monotone over a run.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::Rng;

/// Candidate solution: fixed-length real vector in the unit hypercube.
#[derive(Clone, Debug, PartialEq)]
pub struct Genome {
    values: Vec<f64>,
}

impl Genome {
    pub fn new(values: Vec<f64>) -> Self {
        Genome { values }
    }

    /// Uniform random genome in `[0, 1)^dim`.
    pub fn random<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Self {
        Genome {
            values: (0..dim).map(|_| rng.gen::<f64>()).collect(),
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

impl core::ops::Deref for Genome {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.values
    }
}

/// Identifies one task/niche: a dense index plus the task's parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct TaskDescriptor {
    pub id: usize,
    pub params: Vec<f64>,
}

/// Best-known solution for one task.
#[derive(Clone, Debug, PartialEq)]
pub struct Elite {
    pub genome: Genome,
    pub fitness: f64,
    pub eval_count_at_insert: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArchiveError {
    /// NaN or infinite fitness cannot enter the archive.
    NonFiniteFitness,
}

impl fmt::Display for ArchiveError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ArchiveError::NonFiniteFitness => write!(f, "fitness must be finite"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for ArchiveError {}

/// Summary over the filled slots. `mean_fitness` and `max_fitness` are
/// `None` (not zero) while the archive is empty.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ArchiveStats {
    pub coverage: f64,
    pub mean_fitness: Option<f64>,
    pub max_fitness: Option<f64>,
}

/// Map from task index to the best (genome, fitness) pair found so far.
#[derive(Clone, Debug)]
pub struct Archive {
    slots: Vec<Option<Elite>>,
    filled_ids: Vec<usize>,
    fitness_sum: f64,
    max_fitness: Option<f64>,
}

impl Archive {
    pub fn new(n_tasks: usize) -> Self {
        assert!(n_tasks >= 1, "archive needs at least one task slot");
        Archive {
            slots: vec![None; n_tasks],
            filled_ids: Vec::new(),
            fitness_sum: 0.0,
            max_fitness: None,
        }
    }

    /// Number of task slots (filled or not).
    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.filled_ids.is_empty()
    }

    pub fn filled_count(&self) -> usize {
        self.filled_ids.len()
    }

    /// Task ids of filled slots, in first-fill order.
    pub fn filled_ids(&self) -> &[usize] {
        &self.filled_ids
    }

    pub fn slot(&self, task_id: usize) -> Option<&Elite> {
        self.slots[task_id].as_ref()
    }

    /// Uniform draw over the filled slots.
    ///
    /// Panics if the archive is empty; callers must insert at least one
    /// elite first.
    pub fn sample_filled<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        assert!(
            !self.filled_ids.is_empty(),
            "cannot sample a parent from an empty archive"
        );
        self.filled_ids[rng.gen_range(0..self.filled_ids.len())]
    }

    /// Competition rule: the candidate takes the slot iff the slot is empty
    /// or its fitness strictly exceeds the incumbent's. Ties keep the
    /// incumbent. Returns whether the slot changed.
    pub fn insert(
        &mut self,
        task_id: usize,
        genome: Genome,
        fitness: f64,
        eval_count: u64,
    ) -> Result<bool, ArchiveError> {
        assert!(
            task_id < self.slots.len(),
            "task_id {} out of range (archive holds {} tasks)",
            task_id,
            self.slots.len()
        );
        if !fitness.is_finite() {
            return Err(ArchiveError::NonFiniteFitness);
        }
        let incumbent_fitness = self.slots[task_id].as_ref().map(|e| e.fitness);
        match incumbent_fitness {
            Some(f) if fitness <= f => Ok(false),
            Some(f) => {
                self.fitness_sum += fitness - f;
                self.bump_max(fitness);
                self.slots[task_id] = Some(Elite {
                    genome,
                    fitness,
                    eval_count_at_insert: eval_count,
                });
                Ok(true)
            }
            None => {
                self.filled_ids.push(task_id);
                self.fitness_sum += fitness;
                self.bump_max(fitness);
                self.slots[task_id] = Some(Elite {
                    genome,
                    fitness,
                    eval_count_at_insert: eval_count,
                });
                Ok(true)
            }
        }
    }

    fn bump_max(&mut self, fitness: f64) {
        self.max_fitness = Some(match self.max_fitness {
            Some(m) if m >= fitness => m,
            _ => fitness,
        });
    }

    /// Coverage plus mean/max fitness over filled slots. The mean is tracked
    /// incrementally; `stats_brute_force` recomputes it from the slots.
    pub fn stats(&self) -> ArchiveStats {
        let filled = self.filled_count();
        ArchiveStats {
            coverage: filled as f64 / self.len() as f64,
            mean_fitness: if filled > 0 {
                Some(self.fitness_sum / filled as f64)
            } else {
                None
            },
            max_fitness: self.max_fitness,
        }
    }

    /// Slot-by-slot recomputation of [`Archive::stats`].
    pub fn stats_brute_force(&self) -> ArchiveStats {
        let mut sum = 0.0;
        let mut max: Option<f64> = None;
        let mut filled = 0usize;
        for elite in self.slots.iter().flatten() {
            sum += elite.fitness;
            filled += 1;
            max = Some(match max {
                Some(m) if m >= elite.fitness => m,
                _ => elite.fitness,
            });
        }
        ArchiveStats {
            coverage: filled as f64 / self.len() as f64,
            mean_fitness: if filled > 0 {
                Some(sum / filled as f64)
            } else {
                None
            },
            max_fitness: max,
        }
    }

    pub fn iter_filled(&self) -> impl Iterator<Item = (usize, &Elite)> {
        self.slots
            .iter()
            .enumerate()
            .filter_map(|(id, slot)| slot.as_ref().map(|e| (id, e)))
    }
}
