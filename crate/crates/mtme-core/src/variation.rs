//! Parent selection and the iso+line variation operator.

use alloc::vec::Vec;

use rand::Rng;

use crate::archive::{Archive, Elite, Genome};
use crate::rng::standard_normal;

/// Strengths of the isometric and directional mutations.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VariationParams {
    pub sigma1: f64,
    pub sigma2: f64,
}

impl VariationParams {
    pub fn new(sigma1: f64, sigma2: f64) -> Self {
        assert!(
            sigma1.is_finite() && sigma2.is_finite() && sigma1 >= 0.0 && sigma2 >= 0.0,
            "sigma1/sigma2 must be finite and non-negative"
        );
        VariationParams { sigma1, sigma2 }
    }
}

/// Two parents drawn uniformly and independently from the filled slots
/// (they may coincide). Panics on an empty archive; the engine inserts the
/// initial individuals before the first call.
pub fn select_parents<'a, R: Rng + ?Sized>(
    archive: &'a Archive,
    rng: &mut R,
) -> ((usize, &'a Elite), (usize, &'a Elite)) {
    let a = archive.sample_filled(rng);
    let b = archive.sample_filled(rng);
    (
        (a, archive.slot(a).expect("sampled slot is filled")),
        (b, archive.slot(b).expect("sampled slot is filled")),
    )
}

/// child = x_i + sigma1 * g + sigma2 * (x_j - x_i) * s, clipped to [0, 1].
///
/// `g` is a vector of i.i.d. standard normals; `s` is a single standard
/// normal shared across all dimensions (the line term is rank-1). Draw
/// order is fixed: the `d` isometric normals first, then the line scalar.
pub fn iso_line_variation<R: Rng + ?Sized>(
    x_i: &[f64],
    x_j: &[f64],
    params: &VariationParams,
    rng: &mut R,
) -> Genome {
    assert_eq!(x_i.len(), x_j.len(), "genome dimension mismatch");
    let d = x_i.len();
    let iso: Vec<f64> = (0..d).map(|_| standard_normal(rng)).collect();
    let line = standard_normal(rng);
    let values = (0..d)
        .map(|k| {
            let v = x_i[k] + params.sigma1 * iso[k] + params.sigma2 * (x_j[k] - x_i[k]) * line;
            v.clamp(0.0, 1.0)
        })
        .collect();
    Genome::new(values)
}
