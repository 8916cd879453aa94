//! Deterministic point sets spread toward the boundary of the disk.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::scalars::WeightParameter;
use crate::{DiskPoint, Error, Result};

/// Minimum pairwise distance between sampled points.
pub const MIN_SEPARATION: f64 = 1e-3;

const MAX_REJECTIONS: usize = 10_000;

/// Random generator for trial `trial` of a run seeded with `seed`. Each trial
/// owns an independent stream, so parallel and serial runs draw the same points.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// `n` points with `r = sqrt(u)^{1/(2+max(α,0))}`, `u` and the angle uniform,
/// resampling any point closer than [`MIN_SEPARATION`] to an earlier one.
pub fn hyperbolic_sample(
    n: usize,
    alpha: WeightParameter,
    rng: &mut impl Rng,
) -> Result<Vec<DiskPoint>> {
    let push = 1.0 / (2.0 + alpha.value().max(0.0));
    let mut points: Vec<DiskPoint> = Vec::with_capacity(n);
    let mut rejections = 0;
    while points.len() < n {
        let u: f64 = rng.random();
        let theta: f64 = rng.random::<f64>() * std::f64::consts::TAU;
        let r = u.sqrt().powf(push);
        let p = DiskPoint::from_polar(r, theta)?;
        if points.iter().all(|q| (q.value() - p.value()).norm() >= MIN_SEPARATION) {
            points.push(p);
        } else {
            rejections += 1;
            if rejections > MAX_REJECTIONS {
                return Err(Error::NoConvergence(format!(
                    "could not place {n} points at separation {MIN_SEPARATION}"
                )));
            }
        }
    }
    Ok(points)
}
