//! Reproducible batched estimation.
//!
//! Samples are split into fixed batches of [`BATCH_SIZE`]. Batch `b` of task
//! `task` draws from its own ChaCha8 stream keyed by `(seed, task)` with
//! stream id `b`, and batch statistics are merged in batch order. The result
//! is therefore a pure function of `(seed, task, samples)`, whatever rayon's
//! scheduling does.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub const BATCH_SIZE: usize = 4096;

/// RNG for stream `stream` of task `task` under `seed`.
pub fn substream(seed: u64, task: u64, stream: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&task.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(stream);
    rng
}

/// Mixes `(seed, index)` into an unrelated seed (splitmix64 finalizer), for
/// running many estimators from one user seed.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A Monte Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub samples: u64,
    pub seed: u64,
}

impl McEstimate {
    /// `|mean - target| <= k · stderr + slack`.
    pub fn agrees_with(&self, target: f64, k: f64, slack: f64) -> bool {
        (self.mean - target).abs() <= k * self.stderr + slack
    }

    pub fn relative_stderr(&self) -> f64 {
        if self.mean == 0.0 {
            0.0
        } else {
            self.stderr / self.mean.abs()
        }
    }
}

/// Running means and co-moments of a `K`-vector (Welford, Chan merge).
#[derive(Debug, Clone, Copy)]
pub(crate) struct Moments<const K: usize> {
    count: u64,
    mean: [f64; K],
    comoment: [[f64; K]; K],
}

impl<const K: usize> Default for Moments<K> {
    fn default() -> Self {
        Self {
            count: 0,
            mean: [0.0; K],
            comoment: [[0.0; K]; K],
        }
    }
}

impl<const K: usize> Moments<K> {
    pub(crate) fn push(&mut self, x: [f64; K]) {
        self.count += 1;
        let c = self.count as f64;
        let mut delta = [0.0; K];
        for i in 0..K {
            delta[i] = x[i] - self.mean[i];
            self.mean[i] += delta[i] / c;
        }
        for i in 0..K {
            for j in 0..K {
                self.comoment[i][j] += delta[i] * (x[j] - self.mean[j]);
            }
        }
    }

    pub(crate) fn merge(&mut self, other: &Self) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let (na, nb) = (self.count as f64, other.count as f64);
        let total = na + nb;
        let mut delta = [0.0; K];
        for i in 0..K {
            delta[i] = other.mean[i] - self.mean[i];
        }
        for i in 0..K {
            for j in 0..K {
                self.comoment[i][j] += other.comoment[i][j] + delta[i] * delta[j] * na * nb / total;
            }
        }
        for i in 0..K {
            self.mean[i] += delta[i] * nb / total;
        }
        self.count += other.count;
    }

    pub(crate) fn count(&self) -> u64 {
        self.count
    }

    pub(crate) fn mean(&self) -> [f64; K] {
        self.mean
    }

    /// Sample covariance (denominator `count - 1`).
    pub(crate) fn covariance(&self, i: usize, j: usize) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.comoment[i][j] / (self.count - 1) as f64
        }
    }
}

/// Accumulates `draw` over `samples` draws, batched and merged in order.
pub(crate) fn accumulate<const K: usize, F>(samples: u64, seed: u64, task: u64, draw: F) -> Moments<K>
where
    F: Fn(&mut ChaCha8Rng) -> [f64; K] + Sync,
{
    let batch = BATCH_SIZE as u64;
    let batches = samples.div_ceil(batch);
    let parts: Vec<Moments<K>> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = substream(seed, task, b);
            let len = batch.min(samples - b * batch);
            let mut m = Moments::default();
            for _ in 0..len {
                m.push(draw(&mut rng));
            }
            m
        })
        .collect();
    let mut total = Moments::default();
    for p in &parts {
        total.merge(p);
    }
    total
}

/// Mean of a scalar statistic with standard error `sd / √samples`.
pub fn estimate_mean<F>(samples: u64, seed: u64, task: u64, draw: F) -> McEstimate
where
    F: Fn(&mut ChaCha8Rng) -> f64 + Sync,
{
    let m = accumulate::<1, _>(samples, seed, task, |rng| [draw(rng)]);
    let n = m.count().max(1) as f64;
    McEstimate {
        mean: m.mean()[0],
        stderr: (m.covariance(0, 0) / n).sqrt(),
        samples: m.count(),
        seed,
    }
}
