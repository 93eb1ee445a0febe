//! Seeded random test matrices. Every grid point draws from its own
//! ChaCha stream so results do not depend on evaluation order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::linalg::{adjoint, mm, opnorm, vec_norm, Mat, Vector, C64};

pub fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Stable stream index for a parameter tuple.
pub fn tuple_index(params: &[usize]) -> u64 {
    params
        .iter()
        .fold(0xcbf2_9ce4_8422_2325u64, |h, &p| {
            (h ^ p as u64).wrapping_mul(0x0000_0100_0000_01b3)
        })
}

fn gaussian(rng: &mut ChaCha8Rng) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re, im)
}

pub fn gaussian_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Mat {
    Mat::from_shape_fn((rows, cols), |_| gaussian(rng))
}

/// Complex Gaussian matrix scaled to unit operator norm.
pub fn unit_matrix(rng: &mut ChaCha8Rng, d: usize) -> Mat {
    let a = gaussian_matrix(rng, d, d);
    let s = opnorm(&a);
    a.mapv(|z| z / s)
}

/// Random positive semidefinite matrix `G G*` of unit norm.
pub fn positive_matrix(rng: &mut ChaCha8Rng, d: usize) -> Mat {
    let g = gaussian_matrix(rng, d, d);
    let p = mm(&g, &adjoint(&g));
    let s = opnorm(&p);
    p.mapv(|z| z / s)
}

pub fn unit_vector(rng: &mut ChaCha8Rng, d: usize) -> Vector {
    let v = Vector::from_shape_fn(d, |_| gaussian(rng));
    let s = vec_norm(&v);
    v.mapv(|z| z / s)
}
