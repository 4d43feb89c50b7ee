//! Run configuration shared by the engine and the CLI.

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

/// Default tournament-size arms, covering the decades up to thousand-task
/// maps. Sizes above the task count are dropped at run time.
pub const DEFAULT_TOURNAMENT_SIZES: [usize; 7] = [1, 5, 10, 50, 100, 500, 1000];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    /// Tournament task selection with UCB1-adapted tournament size.
    Mtme,
    /// Each candidate is evaluated on one uniformly random task.
    MeRandomTask,
    /// Each candidate is evaluated on every task.
    MeAllTasks,
    /// Random genomes on random tasks, no variation.
    RandomSampling,
    /// One independent (1+1)-ES per task, round-robin over the budget.
    EsPerTask,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Mtme,
        Method::MeRandomTask,
        Method::MeAllTasks,
        Method::RandomSampling,
        Method::EsPerTask,
    ];

    /// Methods that seed the archive with `init_count` random individuals
    /// before their main loop.
    pub fn uses_init_phase(&self) -> bool {
        matches!(self, Method::Mtme | Method::MeRandomTask)
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Mtme => "mtme",
            Method::MeRandomTask => "me_random_task",
            Method::MeAllTasks => "me_all_tasks",
            Method::RandomSampling => "random_sampling",
            Method::EsPerTask => "es_per_task",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "mtme" => Ok(Method::Mtme),
            "me_random_task" | "me-random-task" => Ok(Method::MeRandomTask),
            "me_all_tasks" | "me-all-tasks" => Ok(Method::MeAllTasks),
            "random_sampling" | "random-sampling" => Ok(Method::RandomSampling),
            "es_per_task" | "es-per-task" => Ok(Method::EsPerTask),
            _ => Err(ConfigError::UnknownMethod),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConfigError {
    UnknownMethod,
    ZeroTasks,
    ZeroGenomeDim,
    ZeroTaskDim,
    ZeroBatchSize,
    ZeroInitCount,
    BudgetBelowInit,
    TournamentSizesEmpty,
    TournamentSizesNotIncreasing,
    TournamentSizeZero,
    FixedTournamentOutOfRange,
    SigmaInvalid,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let msg = match self {
            ConfigError::UnknownMethod => "unknown method name",
            ConfigError::ZeroTasks => "n_tasks must be >= 1",
            ConfigError::ZeroGenomeDim => "d_genome must be >= 1",
            ConfigError::ZeroTaskDim => "d_task must be >= 1",
            ConfigError::ZeroBatchSize => "batch_size must be >= 1",
            ConfigError::ZeroInitCount => "init_count must be >= 1",
            ConfigError::BudgetBelowInit => "eval_budget must be >= init_count",
            ConfigError::TournamentSizesEmpty => "tournament_sizes must be non-empty",
            ConfigError::TournamentSizesNotIncreasing => {
                "tournament_sizes must be strictly increasing"
            }
            ConfigError::TournamentSizeZero => "tournament sizes must be >= 1",
            ConfigError::FixedTournamentOutOfRange => {
                "fixed_tournament must be in [1, n_tasks]"
            }
            ConfigError::SigmaInvalid => "sigma1/sigma2 must be finite and >= 0",
        };
        f.write_str(msg)
    }
}

#[cfg(feature = "std")]
impl std::error::Error for ConfigError {}

/// Everything a single run needs besides the task set and the domain.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub method: Method,
    pub n_tasks: usize,
    pub d_genome: usize,
    pub d_task: usize,
    /// Total evaluation budget E.
    pub eval_budget: u64,
    /// Batch size B; one bandit update per batch.
    pub batch_size: u64,
    /// Number of random individuals for initialization (K).
    pub init_count: u64,
    /// Candidate tournament sizes (the bandit arms), strictly increasing.
    pub tournament_sizes: Vec<usize>,
    /// Isometric mutation strength.
    pub sigma1: f64,
    /// Directional (line) mutation strength.
    pub sigma2: f64,
    pub seed: u64,
    /// When set, disables the bandit and uses this tournament size.
    pub fixed_tournament: Option<usize>,
    /// Divide the bandit's mean reward by B so it lies in [0, 1]; the raw
    /// variant is kept for fidelity experiments.
    pub normalize_bandit_reward: bool,
}

impl RunConfig {
    pub fn new(method: Method, n_tasks: usize, d_genome: usize, d_task: usize) -> Self {
        RunConfig {
            method,
            n_tasks,
            d_genome,
            d_task,
            eval_budget: 100_000,
            batch_size: 64,
            init_count: 100,
            tournament_sizes: DEFAULT_TOURNAMENT_SIZES.to_vec(),
            sigma1: 0.01,
            sigma2: 0.2,
            seed: 1,
            fixed_tournament: None,
            normalize_bandit_reward: true,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.n_tasks == 0 {
            return Err(ConfigError::ZeroTasks);
        }
        if self.d_genome == 0 {
            return Err(ConfigError::ZeroGenomeDim);
        }
        if self.d_task == 0 {
            return Err(ConfigError::ZeroTaskDim);
        }
        if self.batch_size == 0 {
            return Err(ConfigError::ZeroBatchSize);
        }
        if self.init_count == 0 {
            return Err(ConfigError::ZeroInitCount);
        }
        if self.method.uses_init_phase() && self.eval_budget < self.init_count {
            return Err(ConfigError::BudgetBelowInit);
        }
        if self.tournament_sizes.is_empty() {
            return Err(ConfigError::TournamentSizesEmpty);
        }
        if self.tournament_sizes.contains(&0) {
            return Err(ConfigError::TournamentSizeZero);
        }
        if self.tournament_sizes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(ConfigError::TournamentSizesNotIncreasing);
        }
        if !self.sigma1.is_finite()
            || !self.sigma2.is_finite()
            || self.sigma1 < 0.0
            || self.sigma2 < 0.0
        {
            return Err(ConfigError::SigmaInvalid);
        }
        if let Some(s) = self.fixed_tournament {
            if s == 0 || s > self.n_tasks {
                return Err(ConfigError::FixedTournamentOutOfRange);
            }
        }
        Ok(())
    }

    /// Tournament sizes usable with this task count (arms above `n_tasks`
    /// are dropped; falls back to `[1]` if nothing remains).
    pub fn effective_tournament_sizes(&self) -> Vec<usize> {
        let mut sizes: Vec<usize> = self
            .tournament_sizes
            .iter()
            .copied()
            .filter(|&s| s <= self.n_tasks)
            .collect();
        if sizes.is_empty() {
            sizes.push(1);
        }
        sizes
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn defaults_validate() {
        let cfg = RunConfig::new(Method::Mtme, 500, 10, 2);
        assert_eq!(cfg.validate(), Ok(()));
        assert_eq!(cfg.effective_tournament_sizes(), vec![1, 5, 10, 50, 100, 500]);
    }

    #[test]
    fn budget_below_init_rejected() {
        let mut cfg = RunConfig::new(Method::Mtme, 10, 2, 2);
        cfg.eval_budget = 50;
        cfg.init_count = 100;
        assert_eq!(cfg.validate(), Err(ConfigError::BudgetBelowInit));
    }

    #[test]
    fn tournament_sizes_must_increase() {
        let mut cfg = RunConfig::new(Method::Mtme, 10, 2, 2);
        cfg.tournament_sizes = vec![1, 5, 5];
        assert_eq!(cfg.validate(), Err(ConfigError::TournamentSizesNotIncreasing));
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.as_str().parse::<Method>().unwrap(), m);
        }
        assert!("nope".parse::<Method>().is_err());
    }
}
