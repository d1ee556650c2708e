//! Randomized estimators on the sphere and in Gaussian space.
//!
//! Every estimator is a pure function of its inputs, the seed and the sample
//! count; see [`estimator`] for how the sample stream is split.

pub mod estimator;
mod noise;
mod oracle;
mod quadratic;

pub use estimator::{derive_seed, estimate_mean, substream, McEstimate, BATCH_SIZE};
pub use noise::{
    gaussian_moment, gaussian_moment_ratio, noise_operator_check, sphere_moment,
    sphere_moment_ratio, HarmonicTestFn, NoiseCheck, NoisePoint,
};
pub use oracle::{MembershipOracle, Predicate, ZonalShape};
pub use quadratic::{
    quadratic_nonpositive_measure, quadratic_nonpositive_measure_eigen, TracelessQuadratic,
    NONPOSITIVE_CONSTANT,
};

use rand::Rng;
use rand_distr::StandardNormal;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::zonal::{g_t_zonal, spectrum, GtValue, ZonalProfile};

/// Stream tags keeping estimators that share a seed independent.
pub(crate) mod task {
    pub const G_T: u64 = 1;
    pub const NOISE_POINTS: u64 = 2;
    pub const NOISE_INNER: u64 = 3;
    pub const MOMENT_RATIO: u64 = 4;
    pub const NONPOSITIVE: u64 = 5;
    pub const NONPOSITIVE_EIGEN: u64 = 6;
    pub const GAUSS_MOMENT: u64 = 7;
    pub const SPHERE_MOMENT: u64 = 8;
    pub const SPHERE_RATIO: u64 = 9;
}

/// Fills `x` with independent standard normals.
pub fn fill_gaussian<R: Rng + ?Sized>(rng: &mut R, x: &mut [f64]) {
    for v in x.iter_mut() {
        *v = rng.sample(StandardNormal);
    }
}

/// Fills `x` with a uniform point of `S^{len-1}` (normalized Gaussian).
pub fn fill_sphere<R: Rng + ?Sized>(rng: &mut R, x: &mut [f64]) {
    loop {
        fill_gaussian(rng, x);
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            x.iter_mut().for_each(|v| *v /= norm);
            return;
        }
    }
}

/// A uniform point of `S^{n-1}`.
pub fn sample_sphere<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Vec<f64>> {
    if n < 1 {
        return Err(Error::Domain("sphere dimension n must be >= 1".into()));
    }
    let mut x = vec![0.0; n];
    fill_sphere(rng, &mut x);
    Ok(x)
}

/// Writes a pair with `⟨x, y⟩ = t`, `x` uniform and `y = t x + √(1-t²) u`
/// with `u` uniform on the unit sphere of `x^⊥`. The pair has the law of
/// `(g x0, g y0)` for Haar-random `g`.
pub(crate) fn fill_pair<R: Rng + ?Sized>(t: f64, rng: &mut R, x: &mut [f64], y: &mut [f64]) {
    fill_sphere(rng, x);
    let s = (1.0 - t * t).max(0.0).sqrt();
    if s == 0.0 {
        y.iter_mut().zip(x.iter()).for_each(|(b, a)| *b = t * a);
        return;
    }
    loop {
        fill_gaussian(rng, y);
        let proj: f64 = y.iter().zip(x.iter()).map(|(a, b)| a * b).sum();
        y.iter_mut().zip(x.iter()).for_each(|(b, a)| *b -= proj * a);
        let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 1e-12 {
            y.iter_mut()
                .zip(x.iter())
                .for_each(|(b, a)| *b = t * a + s * (*b / norm));
            return;
        }
    }
}

/// A pair of unit vectors with scalar product `t`.
pub fn sample_pair<R: Rng + ?Sized>(t: f64, n: usize, rng: &mut R) -> Result<(Vec<f64>, Vec<f64>)> {
    if n < 2 {
        return Err(Error::Domain("pair sampling needs n >= 2".into()));
    }
    if t.is_nan() || t.abs() > 1.0 {
        return Err(Error::Domain(format!("scalar product t = {t} outside [-1, 1]")));
    }
    let mut x = vec![0.0; n];
    let mut y = vec![0.0; n];
    fill_pair(t, rng, &mut x, &mut y);
    Ok((x, y))
}

/// Unbiased estimate of `G_t(1_A, 1_B)`: the probability that `x ∈ A` and
/// `y ∈ B` for a random pair with `⟨x, y⟩ = t`.
pub fn mc_g_t(
    f: &MembershipOracle,
    h: &MembershipOracle,
    t: f64,
    samples: u64,
    seed: u64,
) -> Result<McEstimate> {
    if f.n() != h.n() {
        return Err(Error::DimensionMismatch {
            expected: f.n(),
            got: h.n(),
        });
    }
    if samples == 0 {
        return Err(Error::Domain("samples must be >= 1".into()));
    }
    let n = f.n();
    // validates t and n
    sample_pair(t, n, &mut substream(seed, task::G_T, u64::MAX))?;
    Ok(estimate_mean(samples, seed, task::G_T, |rng| {
        let mut x = vec![0.0; n];
        let mut y = vec![0.0; n];
        fill_pair(t, rng, &mut x, &mut y);
        if f.contains(&x) && h.contains(&y) {
            1.0
        } else {
            0.0
        }
    }))
}

/// Zonal `G_t` against its Monte Carlo estimate for two sets zonal about
/// the same axis.
#[derive(Debug, Clone, Serialize)]
pub struct GtCrossCheck {
    pub n: usize,
    pub t: f64,
    pub d_max: usize,
    pub zonal: GtValue,
    pub mc: McEstimate,
    /// `|mc - zonal| ≤ 3 stderr + tail_bound` (plus `1e-12` for rounding).
    pub agrees: bool,
}

pub fn gt_cross_check(
    f: &ZonalProfile,
    h: &ZonalProfile,
    t: f64,
    d_max: usize,
    samples: u64,
    seed: u64,
) -> Result<GtCrossCheck> {
    let zonal = g_t_zonal(&spectrum(f, d_max)?, &spectrum(h, d_max)?, t)?;
    let fo = MembershipOracle::from_zonal_e1(f.clone())?;
    let ho = MembershipOracle::from_zonal_e1(h.clone())?;
    let mc = mc_g_t(&fo, &ho, t, samples, seed)?;
    let agrees = (mc.mean - zonal.value).abs() <= 3.0 * mc.stderr + zonal.tail_bound + 1e-12;
    Ok(GtCrossCheck {
        n: f.n(),
        t,
        d_max,
        zonal,
        mc,
        agrees,
    })
}
