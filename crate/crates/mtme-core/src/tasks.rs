//! Task-set generation and the task distance used by tournament selection.
//!
//! Tasks live in `[0, 1]^d_task`. They are spread either evenly with a
//! centroidal Voronoi tessellation (Lloyd's algorithm over uniform samples)
//! or uniformly at random. Both generators are bit-reproducible given a
//! seed.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::archive::TaskDescriptor;
use crate::rng::{stream_rng, STREAM_TASKS};

/// Lloyd iteration defaults; the convergence threshold is the maximum
/// centroid movement between rounds.
pub const CVT_DEFAULT_ITERATIONS: usize = 30;
pub const CVT_MOVEMENT_TOLERANCE: f64 = 1e-6;

/// Default sample count for `n` centroids.
pub fn cvt_default_samples(n: usize) -> usize {
    100_000.max(20 * n)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TaskGenMode {
    Cvt,
    UniformRandom,
    /// Loaded from an external file.
    External,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TaskSet {
    descriptors: Vec<TaskDescriptor>,
    d_task: usize,
    generation_mode: TaskGenMode,
}

impl TaskSet {
    pub fn from_params(params: Vec<Vec<f64>>, mode: TaskGenMode) -> Self {
        assert!(!params.is_empty(), "task set needs at least one task");
        let d_task = params[0].len();
        assert!(d_task >= 1, "task dimension must be >= 1");
        let descriptors = params
            .into_iter()
            .enumerate()
            .map(|(id, p)| {
                assert_eq!(p.len(), d_task, "inconsistent task dimensions");
                TaskDescriptor { id, params: p }
            })
            .collect();
        TaskSet {
            descriptors,
            d_task,
            generation_mode: mode,
        }
    }

    pub fn len(&self) -> usize {
        self.descriptors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.descriptors.is_empty()
    }

    pub fn d_task(&self) -> usize {
        self.d_task
    }

    pub fn generation_mode(&self) -> TaskGenMode {
        self.generation_mode
    }

    pub fn get(&self, id: usize) -> &TaskDescriptor {
        &self.descriptors[id]
    }

    pub fn params(&self, id: usize) -> &[f64] {
        &self.descriptors[id].params
    }

    pub fn iter(&self) -> impl Iterator<Item = &TaskDescriptor> {
        self.descriptors.iter()
    }
}

/// `n` i.i.d. uniform tasks in `[0, 1]^d_task`.
pub fn generate_uniform(n: usize, d_task: usize, seed: u64) -> TaskSet {
    assert!(n >= 1, "n must be >= 1");
    assert!(d_task >= 1, "d_task must be >= 1");
    let mut rng = stream_rng(seed, STREAM_TASKS, 0);
    let params = (0..n)
        .map(|_| (0..d_task).map(|_| rng.gen::<f64>()).collect())
        .collect();
    TaskSet::from_params(params, TaskGenMode::UniformRandom)
}

/// CVT centroids via Lloyd's algorithm over uniform samples of the unit
/// hypercube.
pub fn generate_cvt(
    n: usize,
    d_task: usize,
    n_samples: usize,
    n_iterations: usize,
    seed: u64,
) -> TaskSet {
    generate_cvt_trace(n, d_task, n_samples, n_iterations, seed).0
}

/// As [`generate_cvt`], also returning the quantization energy (mean squared
/// sample-to-centroid distance) observed at each Lloyd iteration.
pub fn generate_cvt_trace(
    n: usize,
    d_task: usize,
    n_samples: usize,
    n_iterations: usize,
    seed: u64,
) -> (TaskSet, Vec<f64>) {
    assert!(n >= 1, "n must be >= 1");
    assert!(d_task >= 1, "d_task must be >= 1");
    assert!(n_samples >= 10 * n, "need at least 10 samples per centroid");
    let mut rng = stream_rng(seed, STREAM_TASKS, 1);

    let samples: Vec<f64> = (0..n_samples * d_task).map(|_| rng.gen::<f64>()).collect();

    // init from n distinct samples
    let mut centroids: Vec<f64> = Vec::with_capacity(n * d_task);
    for idx in rand::seq::index::sample(&mut rng, n_samples, n) {
        centroids.extend_from_slice(&samples[idx * d_task..(idx + 1) * d_task]);
    }

    let mut energies = Vec::with_capacity(n_iterations);
    let mut sums = vec![0.0f64; n * d_task];
    let mut counts = vec![0usize; n];

    for _ in 0..n_iterations {
        sums.iter_mut().for_each(|s| *s = 0.0);
        counts.iter_mut().for_each(|c| *c = 0);
        let mut energy = 0.0;

        for s in 0..n_samples {
            let point = &samples[s * d_task..(s + 1) * d_task];
            let mut best = 0usize;
            let mut best_d2 = f64::INFINITY;
            for c in 0..n {
                let centroid = &centroids[c * d_task..(c + 1) * d_task];
                let mut d2 = 0.0;
                for k in 0..d_task {
                    let diff = point[k] - centroid[k];
                    d2 += diff * diff;
                }
                if d2 < best_d2 {
                    best_d2 = d2;
                    best = c;
                }
            }
            energy += best_d2;
            counts[best] += 1;
            for k in 0..d_task {
                sums[best * d_task + k] += point[k];
            }
        }
        energies.push(energy / n_samples as f64);

        let mut max_move2 = 0.0f64;
        for c in 0..n {
            if counts[c] == 0 {
                // re-seed the dead centroid from a random sample
                let idx = rng.gen_range(0..n_samples);
                centroids[c * d_task..(c + 1) * d_task]
                    .copy_from_slice(&samples[idx * d_task..(idx + 1) * d_task]);
                max_move2 = f64::INFINITY;
                continue;
            }
            let inv = 1.0 / counts[c] as f64;
            let mut move2 = 0.0;
            for k in 0..d_task {
                let new = sums[c * d_task + k] * inv;
                let diff = new - centroids[c * d_task + k];
                move2 += diff * diff;
                centroids[c * d_task + k] = new;
            }
            max_move2 = max_move2.max(move2);
        }
        if libm::sqrt(max_move2) < CVT_MOVEMENT_TOLERANCE {
            break;
        }
    }

    let params = (0..n)
        .map(|c| centroids[c * d_task..(c + 1) * d_task].to_vec())
        .collect();
    (TaskSet::from_params(params, TaskGenMode::Cvt), energies)
}

/// Euclidean distance between task parameter vectors.
pub fn task_distance(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "task dimension mismatch");
    let mut d2 = 0.0;
    for (x, y) in a.iter().zip(b) {
        let diff = x - y;
        d2 += diff * diff;
    }
    libm::sqrt(d2)
}

/// Candidate id minimizing the task distance to `reference`; ties break
/// toward the lowest id so replays are deterministic.
pub fn closest_task(candidate_ids: &[usize], reference: &[f64], task_set: &TaskSet) -> usize {
    assert!(!candidate_ids.is_empty(), "no tournament candidates");
    let mut best_id = usize::MAX;
    let mut best_d = f64::INFINITY;
    for &id in candidate_ids {
        let d = task_distance(task_set.params(id), reference);
        if d < best_d || (d == best_d && id < best_id) {
            best_d = d;
            best_id = id;
        }
    }
    best_id
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;
    use rand::Rng;

    #[test]
    fn single_centroid_is_cube_center() {
        for d in [1usize, 2, 3] {
            let ts = generate_cvt(1, d, 100_000, 10, 11);
            for &p in ts.params(0) {
                assert!((p - 0.5).abs() < 0.02, "dim {d}: centroid {p}");
            }
        }
    }

    #[test]
    fn two_centroids_on_a_line_are_quartiles() {
        // analytic 1-D 2-quantizer optimum is {0.25, 0.75}; cross-check with
        // a brute-force k-means over a dense grid
        let grid: Vec<f64> = (0..10_000).map(|i| (i as f64 + 0.5) / 10_000.0).collect();
        let (mut c0, mut c1) = (0.1, 0.9);
        for _ in 0..100 {
            let (mut s0, mut n0, mut s1, mut n1) = (0.0, 0usize, 0.0, 0usize);
            for &x in &grid {
                if (x - c0).abs() <= (x - c1).abs() {
                    s0 += x;
                    n0 += 1;
                } else {
                    s1 += x;
                    n1 += 1;
                }
            }
            c0 = s0 / n0 as f64;
            c1 = s1 / n1 as f64;
        }
        assert!((c0 - 0.25).abs() < 1e-3 && (c1 - 0.75).abs() < 1e-3);

        let ts = generate_cvt(2, 1, 100_000, 30, 5);
        let mut got = [ts.params(0)[0], ts.params(1)[0]];
        got.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((got[0] - 0.25).abs() < 0.02, "{got:?}");
        assert!((got[1] - 0.75).abs() < 0.02, "{got:?}");
    }

    #[test]
    fn cvt_is_deterministic() {
        let a = generate_cvt(16, 2, 2_000, 20, 99);
        let b = generate_cvt(16, 2, 2_000, 20, 99);
        assert_eq!(a, b);
    }

    #[test]
    fn cvt_energy_is_non_increasing() {
        let (_, energies) = generate_cvt_trace(32, 2, 5_000, 25, 42);
        for w in energies.windows(2) {
            assert!(w[1] <= w[0] + 1e-12, "energy increased: {w:?}");
        }
    }

    #[test]
    fn uniform_mean_is_half() {
        let ts = generate_uniform(100_000, 2, 21);
        for k in 0..2 {
            let mean: f64 =
                ts.iter().map(|t| t.params[k]).sum::<f64>() / ts.len() as f64;
            assert!((mean - 0.5).abs() < 0.01, "mean {mean}");
        }
    }

    #[test]
    fn uniform_is_deterministic() {
        assert_eq!(generate_uniform(100, 3, 7), generate_uniform(100, 3, 7));
    }

    #[test]
    #[should_panic(expected = "n must be >= 1")]
    fn zero_tasks_rejected() {
        generate_uniform(0, 2, 1);
    }

    #[test]
    fn distance_examples() {
        assert_eq!(task_distance(&[0.0, 0.0], &[0.0, 0.0]), 0.0);
        assert!((task_distance(&[0.0, 0.0], &[0.6, 0.8]) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn distance_is_symmetric() {
        let mut rng = stream_rng(4, STREAM_TASKS, 9);
        for _ in 0..1000 {
            let a: Vec<f64> = (0..3).map(|_| rng.gen::<f64>()).collect();
            let b: Vec<f64> = (0..3).map(|_| rng.gen::<f64>()).collect();
            assert_eq!(task_distance(&a, &b), task_distance(&b, &a));
        }
    }

    #[test]
    #[should_panic(expected = "dimension mismatch")]
    fn distance_dimension_mismatch_panics() {
        task_distance(&[0.0], &[0.0, 1.0]);
    }

    #[test]
    fn closest_task_examples() {
        let ts = TaskSet::from_params(
            vec![vec![0.0, 0.0], vec![0.3, 0.0], vec![0.1, 0.0], vec![0.0, 0.1]],
            TaskGenMode::UniformRandom,
        );
        // singleton
        assert_eq!(closest_task(&[1], &[0.0, 0.0], &ts), 1);
        // argmin
        assert_eq!(closest_task(&[1, 2], &[0.0, 0.0], &ts), 2);
        // tie at distance 0.1 -> lowest id
        assert_eq!(closest_task(&[3, 2], &[0.0, 0.0], &ts), 2);
    }

    proptest! {
        // closest_task agrees with an independent scan (guards future
        // indexing optimizations)
        #[test]
        fn closest_matches_brute_force(
            params in proptest::collection::vec(
                proptest::collection::vec(0.0f64..1.0, 2), 1..20),
            reference in proptest::collection::vec(0.0f64..1.0, 2)
        ) {
            let n = params.len();
            let ts = TaskSet::from_params(params, TaskGenMode::UniformRandom);
            let ids: Vec<usize> = (0..n).collect();
            let got = closest_task(&ids, &reference, &ts);
            let mut expect = 0;
            for id in 0..n {
                if task_distance(ts.params(id), &reference)
                    < task_distance(ts.params(expect), &reference)
                {
                    expect = id;
                }
            }
            prop_assert_eq!(got, expect);
        }
    }
}
