//! Fitness functions: the variable-morphology planar arm and a synthetic
//! high-dimensional multi-task family.

use alloc::vec::Vec;

use rand::Rng;

use crate::rng::{stream_rng, STREAM_CONSTANTS};

/// A task-parameterized fitness function f(genome, task). Implementations
/// must be pure and deterministic; they are evaluated concurrently.
pub trait Domain: Sync {
    fn genome_dim(&self) -> usize;

    /// Higher is better. `task_params` is one row of the task set.
    fn evaluate(&self, genome: &[f64], task_params: &[f64]) -> f64;
}

// ---------------------------------------------------------------------------
// Planar arm
// ---------------------------------------------------------------------------

/// Planar kinematic arm with `d` equal links. A task is `[L, alpha_max]`
/// in [0, 1]^2: the link-length scale and the joint-limit scale. Fitness is
/// the negative distance from the arm tip to the target.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ArmDomain {
    pub d: usize,
    pub target: [f64; 2],
}

pub const ARM_DEFAULT_TARGET: [f64; 2] = [1.0, 1.0];

impl ArmDomain {
    pub fn new(d: usize, target: [f64; 2]) -> Self {
        assert!(d >= 1, "arm needs at least one joint");
        ArmDomain { d, target }
    }
}

impl Domain for ArmDomain {
    fn genome_dim(&self) -> usize {
        self.d
    }

    fn evaluate(&self, genome: &[f64], task_params: &[f64]) -> f64 {
        assert_eq!(task_params.len(), 2, "arm task is [L, alpha_max]");
        arm_fitness(genome, task_params[0], task_params[1], &self.target)
    }
}

/// Map a genome in [0, 1]^d to joint angles (radians) and the per-link
/// length (meters). The division by d keeps the total arm length at
/// `L` meters regardless of dimensionality:
/// angle_i = (1/d) * (g_i - 0.5) * alpha_max * 2*pi, link = L / d.
pub fn arm_normalize(genome: &[f64], link_scale: f64, joint_scale: f64) -> (Vec<f64>, f64) {
    let d = genome.len();
    let scale = joint_scale * 2.0 * core::f64::consts::PI / d as f64;
    let angles = genome.iter().map(|g| (g - 0.5) * scale).collect();
    (angles, link_scale / d as f64)
}

/// Tip position of the arm.
///
/// Each link step is "translate along x by the link length, then rotate by
/// the joint angle", so the first link lies along the untransformed x-axis
/// and the tip is the cumulative-angle sum
/// `sum_i link * (cos Theta_i, sin Theta_i)` with `Theta_i` the sum of the
/// first `i` angles (the last angle rotates nothing past the tip).
/// [`arm_tip_matrix_chain`] keeps the explicit homogeneous-transform
/// product as an independent route to the same point.
pub fn arm_forward_kinematics(angles: &[f64], link_len: f64) -> [f64; 2] {
    let mut theta = 0.0;
    let mut x = 0.0;
    let mut y = 0.0;
    for &a in angles {
        x += link_len * libm::cos(theta);
        y += link_len * libm::sin(theta);
        theta += a;
    }
    [x, y]
}

/// Tip position via the iterated 4x4 homogeneous-transform product
/// M_{i+1} = M_i * A(angle_i), p = M_d * (0, 0, 0, 1)^T, where A rotates
/// about z and carries the link translation in its last column.
pub fn arm_tip_matrix_chain(angles: &[f64], link_len: f64) -> [f64; 2] {
    let mut m = [
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 1.0, 0.0, 0.0],
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
    ];
    for &a in angles {
        let (s, c) = (libm::sin(a), libm::cos(a));
        let step = [
            [c, -s, 0.0, link_len],
            [s, c, 0.0, 0.0],
            [0.0, 0.0, 1.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
        ];
        let mut out = [[0.0f64; 4]; 4];
        for (i, out_row) in out.iter_mut().enumerate() {
            for (j, out_cell) in out_row.iter_mut().enumerate() {
                *out_cell = (0..4).map(|k| m[i][k] * step[k][j]).sum();
            }
        }
        m = out;
    }
    [m[0][3], m[1][3]]
}

/// Negative Euclidean distance from the arm tip to the target; 0 is
/// perfect.
pub fn arm_fitness(genome: &[f64], link_scale: f64, joint_scale: f64, target: &[f64; 2]) -> f64 {
    let (angles, link_len) = arm_normalize(genome, link_scale, joint_scale);
    let tip = arm_forward_kinematics(&angles, link_len);
    let dx = tip[0] - target[0];
    let dy = tip[1] - target[1];
    -libm::sqrt(dx * dx + dy * dy)
}

// ---------------------------------------------------------------------------
// Synthetic multi-task family
// ---------------------------------------------------------------------------

/// Seed for the fixed per-dimension weights and phases below; changing it
/// defines a different task family.
pub const SYNTHETIC_DEFAULT_CONSTANTS_SEED: u64 = 0x6b9d_3f72_a1c5_e804;

const SYNTHETIC_AMPLITUDE: f64 = 0.9;
const SYNTHETIC_FREQUENCY: f64 = 6.0 * core::f64::consts::PI;

/// Rugged multi-task family standing in for physics-based locomotion:
/// a shifted Rastrigin-style landscape whose optimum moves smoothly with
/// the task descriptor, so nearby tasks have nearby solutions.
///
/// f(theta, tau) = -(1/d) * sum_i [ t_i^2 - 0.9 cos(6 pi t_i) + 0.9 ],
/// t_i = theta_i - o_i(tau), with the task-dependent optimum
/// o_i(tau) = 0.5 + 0.3 sin(2 pi <w_i, tau> + phi_i). The weights `w_i`
/// and phases `phi_i` are fixed constants drawn once from the constants
/// seed. The maximum is 0, at theta = o(tau).
#[derive(Clone, Debug)]
pub struct SyntheticDomain {
    d_genome: usize,
    d_task: usize,
    /// Row-major `d_genome x d_task`.
    weights: Vec<f64>,
    phases: Vec<f64>,
}

impl SyntheticDomain {
    pub fn new(d_genome: usize, d_task: usize, constants_seed: u64) -> Self {
        assert!(d_genome >= 1 && d_task >= 1);
        let mut rng = stream_rng(constants_seed, STREAM_CONSTANTS, 0);
        // Weight scale balances task relatedness: small enough that nearby
        // tasks share a basin (elites transfer), large enough that optima
        // still differ across the task space (transfer is imperfect).
        let w_scale = 0.1 / libm::sqrt(d_task as f64);
        let weights = (0..d_genome * d_task)
            .map(|_| (2.0 * rng.gen::<f64>() - 1.0) * w_scale)
            .collect();
        let phases = (0..d_genome)
            .map(|_| rng.gen::<f64>() * 2.0 * core::f64::consts::PI)
            .collect();
        SyntheticDomain {
            d_genome,
            d_task,
            weights,
            phases,
        }
    }

    /// The benchmark default: 36-D genome, 12-D task.
    pub fn default_scale() -> Self {
        SyntheticDomain::new(36, 12, SYNTHETIC_DEFAULT_CONSTANTS_SEED)
    }

    pub fn d_task(&self) -> usize {
        self.d_task
    }

    /// The task's global optimum o(tau), componentwise in [0.2, 0.8].
    pub fn optimum(&self, task_params: &[f64]) -> Vec<f64> {
        assert_eq!(task_params.len(), self.d_task, "task dimension mismatch");
        (0..self.d_genome).map(|i| self.optimum_component(i, task_params)).collect()
    }

    fn optimum_component(&self, i: usize, task_params: &[f64]) -> f64 {
        let row = &self.weights[i * self.d_task..(i + 1) * self.d_task];
        let dot: f64 = row.iter().zip(task_params).map(|(w, t)| w * t).sum();
        0.5 + 0.3 * libm::sin(2.0 * core::f64::consts::PI * dot + self.phases[i])
    }

    /// Frobenius norm of the weight matrix. The optimum vector moves at
    /// most 0.3 * 2 pi * this norm per unit of task distance, since each
    /// component is 0.3 * sin of a linear form with gradient 2 pi * w_i.
    pub fn weight_matrix_norm(&self) -> f64 {
        libm::sqrt(self.weights.iter().map(|w| w * w).sum())
    }
}

impl Domain for SyntheticDomain {
    fn genome_dim(&self) -> usize {
        self.d_genome
    }

    fn evaluate(&self, genome: &[f64], task_params: &[f64]) -> f64 {
        assert_eq!(genome.len(), self.d_genome, "genome dimension mismatch");
        assert_eq!(task_params.len(), self.d_task, "task dimension mismatch");
        let mut sum = 0.0;
        for (i, &theta) in genome.iter().enumerate() {
            let t = theta - self.optimum_component(i, task_params);
            sum += t * t - SYNTHETIC_AMPLITUDE * libm::cos(SYNTHETIC_FREQUENCY * t)
                + SYNTHETIC_AMPLITUDE;
        }
        -sum / self.d_genome as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tasks::{generate_uniform, task_distance};
    use alloc::vec;
    use alloc::vec::Vec;
    use core::f64::consts::PI;
    use rand::Rng;

    #[test]
    fn normalize_centered_genome_is_straight() {
        let (angles, link) = arm_normalize(&[0.5; 10], 1.0, 1.0);
        assert!(angles.iter().all(|&a| a == 0.0));
        assert_eq!(link, 0.1);
    }

    #[test]
    fn normalize_formula_direct_substitution() {
        // genome component 1.0, alpha_max = 1, d = 10 -> (1/10)*0.5*2pi
        let (angles, _) = arm_normalize(&[1.0; 10], 1.0, 1.0);
        assert!((angles[0] - PI / 10.0).abs() < 1e-15);
    }

    #[test]
    fn straight_chain_tip() {
        let tip = arm_forward_kinematics(&[0.0; 7], 0.2);
        assert!((tip[0] - 1.4).abs() < 1e-12 && tip[1].abs() < 1e-15);
    }

    #[test]
    fn two_link_tip_fixed_by_symbolic_product() {
        // A(a0) * A(a1) * origin = (l + l cos a0, l sin a0): the first link
        // lies along the untransformed x-axis, the second is rotated by the
        // first angle, and the last angle never moves the tip
        let tip = arm_forward_kinematics(&[PI / 2.0, 0.0], 0.5);
        assert!((tip[0] - 0.5).abs() < 1e-15, "{tip:?}");
        assert!((tip[1] - 0.5).abs() < 1e-15, "{tip:?}");
        let chain = arm_tip_matrix_chain(&[PI / 2.0, 0.0], 0.5);
        assert!((chain[0] - 0.5).abs() < 1e-12 && (chain[1] - 0.5).abs() < 1e-12);
        // changing only the last angle leaves the tip unchanged
        let other = arm_forward_kinematics(&[PI / 2.0, 1.234], 0.5);
        assert_eq!(tip, other);
    }

    #[test]
    fn matrix_chain_matches_cumulative_sum() {
        let mut rng = stream_rng(1, STREAM_CONSTANTS, 77);
        for &d in &[2usize, 5, 10, 20] {
            for _ in 0..2500 {
                let angles: Vec<f64> =
                    (0..d).map(|_| (rng.gen::<f64>() - 0.5) * 2.0 * PI).collect();
                let link = rng.gen::<f64>() / d as f64;
                let a = arm_forward_kinematics(&angles, link);
                let b = arm_tip_matrix_chain(&angles, link);
                assert!((a[0] - b[0]).abs() <= 1e-12 && (a[1] - b[1]).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn straight_arm_fitness() {
        // genome all 0.5, L = 1, d = 10, target (1, 1): tip (1, 0)
        let f = arm_fitness(&[0.5; 10], 1.0, 1.0, &[1.0, 1.0]);
        assert!((f + 1.0).abs() < 1e-12, "{f}");
    }

    #[test]
    fn zero_length_arm() {
        let mut rng = stream_rng(2, STREAM_CONSTANTS, 77);
        for _ in 0..20 {
            let genome: Vec<f64> = (0..10).map(|_| rng.gen()).collect();
            let f = arm_fitness(&genome, 0.0, 1.0, &[1.0, 1.0]);
            assert!((f + core::f64::consts::SQRT_2).abs() < 1e-12);
        }
    }

    #[test]
    fn fitness_triangle_bound() {
        let mut rng = stream_rng(3, STREAM_CONSTANTS, 77);
        for _ in 0..1000 {
            let genome: Vec<f64> = (0..10).map(|_| rng.gen()).collect();
            let l: f64 = rng.gen();
            let f = arm_fitness(&genome, l, rng.gen(), &[1.0, 1.0]);
            assert!(f >= -(l + core::f64::consts::SQRT_2) - 1e-12);
            assert!(f <= 0.0);
        }
    }

    #[test]
    fn straight_arm_tip_invariant_under_dimension() {
        // total length is preserved by the normalization, so the straight
        // genome reaches (L, 0) at every d
        for d in [1usize, 2, 5, 10, 50] {
            let genome = vec![0.5; d];
            let (angles, link) = arm_normalize(&genome, 0.7, 1.0);
            let tip = arm_forward_kinematics(&angles, link);
            assert!((tip[0] - 0.7).abs() < 1e-12 && tip[1].abs() < 1e-15, "d={d}");
        }
    }

    #[test]
    fn synthetic_optimum_scores_zero() {
        let dom = SyntheticDomain::default_scale();
        let tasks = generate_uniform(20, 12, 31);
        for t in tasks.iter() {
            let opt = dom.optimum(&t.params);
            let f = dom.evaluate(&opt, &t.params);
            assert!(f.abs() < 1e-12, "{f}");
            assert!(opt.iter().all(|&o| (0.2..=0.8).contains(&o)));
        }
    }

    #[test]
    fn synthetic_one_sixth_offset_value() {
        // one coordinate off by 1/6: that term is (1/6)^2 - 0.9 cos(pi)
        // + 0.9 = 1.82778, fitness -1.82778/36
        let dom = SyntheticDomain::default_scale();
        let task: Vec<f64> = vec![0.37; 12];
        let mut theta = dom.optimum(&task);
        theta[5] += 1.0 / 6.0;
        let f = dom.evaluate(&theta, &task);
        let expected = -((1.0f64 / 6.0).powi(2) + 1.8) / 36.0;
        assert!((f - expected).abs() < 1e-12, "{f} vs {expected}");
        assert!((expected + 0.050771604938).abs() < 1e-9);
    }

    #[test]
    fn synthetic_never_positive_and_zero_only_at_optimum() {
        // per-term non-negativity: t^2 - 0.9 cos(6 pi t) + 0.9 >= 0 with
        // equality iff t = 0, checked by a dense 1-D scan
        for i in -20_000..=20_000i64 {
            let t = i as f64 * 5e-5;
            let term = t * t - 0.9 * (6.0 * PI * t).cos() + 0.9;
            assert!(term >= 0.0, "t={t}: {term}");
            if t.abs() > 1e-3 {
                assert!(term > 0.0, "t={t}");
            }
        }
    }

    #[test]
    fn synthetic_optimum_is_lipschitz_in_task() {
        let dom = SyntheticDomain::default_scale();
        let bound_scale = 0.3 * 2.0 * PI * dom.weight_matrix_norm();
        let tasks = generate_uniform(200, 12, 32);
        for pair in tasks.iter().collect::<Vec<_>>().chunks(2) {
            if pair.len() < 2 {
                break;
            }
            let (a, b) = (pair[0], pair[1]);
            let oa = dom.optimum(&a.params);
            let ob = dom.optimum(&b.params);
            let d_opt = task_distance(&oa, &ob);
            let d_task = task_distance(&a.params, &b.params);
            assert!(
                d_opt <= bound_scale * d_task + 1e-12,
                "{d_opt} > {bound_scale} * {d_task}"
            );
        }
    }

    #[test]
    fn domains_are_deterministic() {
        let dom = SyntheticDomain::default_scale();
        let task = vec![0.5; 12];
        let genome = vec![0.4; 36];
        assert_eq!(dom.evaluate(&genome, &task), dom.evaluate(&genome, &task));
        let arm_genome = vec![0.3; 10];
        assert_eq!(
            arm_fitness(&arm_genome, 0.8, 0.6, &[1.0, 1.0]),
            arm_fitness(&arm_genome, 0.8, 0.6, &[1.0, 1.0])
        );
    }

    use crate::rng::{stream_rng, STREAM_CONSTANTS};
}
