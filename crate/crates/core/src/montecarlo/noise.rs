use serde::Serialize;

use super::estimator::{accumulate, estimate_mean, substream, McEstimate};
use super::quadratic::TracelessQuadratic;
use super::{fill_gaussian, fill_sphere, task};
use crate::error::{Error, Result};
use crate::gegenbauer::{gegenbauer_eval, HarmonicIndex};

/// A homogeneous harmonic polynomial on `R^n`.
#[derive(Debug, Clone)]
pub enum HarmonicTestFn {
    /// `|x|^d P_{n,d}(x_1/|x|)`, the zonal harmonic about `e_1` extended
    /// homogeneously.
    Zonal(HarmonicIndex),
    Quadratic(TracelessQuadratic),
}

impl HarmonicTestFn {
    pub fn zonal(n: usize, d: usize) -> Result<Self> {
        Ok(Self::Zonal(HarmonicIndex::new(n, d)?))
    }

    pub fn n(&self) -> usize {
        match self {
            Self::Zonal(idx) => idx.n(),
            Self::Quadratic(q) => q.n(),
        }
    }

    pub fn degree(&self) -> usize {
        match self {
            Self::Zonal(idx) => idx.d(),
            Self::Quadratic(_) => 2,
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Self::Quadratic(q) => q.eval(x),
            Self::Zonal(idx) => {
                let d = idx.d();
                if d == 0 {
                    return 1.0;
                }
                let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                if r == 0.0 {
                    return 0.0;
                }
                let t = (x[0] / r).clamp(-1.0, 1.0);
                r.powi(d as i32) * gegenbauer_eval(*idx, t).expect("t clamped to [-1, 1]")
            }
        }
    }
}

/// One sampled point of a noise-operator check.
#[derive(Debug, Clone, Serialize)]
pub struct NoisePoint {
    pub f_x: f64,
    pub target: f64,
    pub estimate: McEstimate,
    pub agrees: bool,
}

/// Outcome of checking `T_ρ f = ρ^d f` at sampled Gaussian points.
#[derive(Debug, Clone, Serialize)]
pub struct NoiseCheck {
    pub n: usize,
    pub d: usize,
    pub rho: f64,
    pub expected_factor: f64,
    /// Least-squares fit of `T_ρ f(x) ≈ c f(x)` over the points.
    pub factor: f64,
    pub factor_stderr: f64,
    pub points: Vec<NoisePoint>,
    pub passed: bool,
}

/// Estimates `E_y f(ρ x + √(1-ρ²) y)` at `points` Gaussian points `x` with
/// `samples` draws each, and compares with `ρ^d f(x)` at three standard
/// errors.
pub fn noise_operator_check(
    f: &HarmonicTestFn,
    rho: f64,
    points: usize,
    samples: u64,
    seed: u64,
) -> Result<NoiseCheck> {
    if !(0.0..=1.0).contains(&rho) {
        return Err(Error::Domain(format!("rho = {rho} outside [0, 1]")));
    }
    if points == 0 || samples == 0 {
        return Err(Error::Domain("points and samples must be >= 1".into()));
    }
    let n = f.n();
    let d = f.degree();
    let expected = rho.powi(d as i32);
    let sigma = (1.0 - rho * rho).max(0.0).sqrt();
    let mut rng = substream(seed, task::NOISE_POINTS, 0);
    let mut out = Vec::with_capacity(points);
    let (mut num, mut den, mut var) = (0.0, 0.0, 0.0);
    for i in 0..points {
        let mut x = vec![0.0; n];
        fill_gaussian(&mut rng, &mut x);
        let f_x = f.eval(&x);
        let target = expected * f_x;
        let inner_task = task::NOISE_INNER << 32 | i as u64;
        let estimate = estimate_mean(samples, seed, inner_task, |r| {
            let mut y = vec![0.0; n];
            fill_gaussian(r, &mut y);
            y.iter_mut().zip(&x).for_each(|(b, a)| *b = rho * a + sigma * *b);
            f.eval(&y)
        });
        let slack = 1e-12 * (1.0 + target.abs());
        let agrees = estimate.agrees_with(target, 3.0, slack);
        num += f_x * estimate.mean;
        den += f_x * f_x;
        var += f_x * f_x * estimate.stderr * estimate.stderr;
        out.push(NoisePoint {
            f_x,
            target,
            estimate,
            agrees,
        });
    }
    let (factor, factor_stderr) = if den > 0.0 {
        (num / den, var.sqrt() / den)
    } else {
        (expected, 0.0)
    };
    let factor_ok = (factor - expected).abs() <= 3.0 * factor_stderr + 1e-12;
    Ok(NoiseCheck {
        n,
        d,
        rho,
        expected_factor: expected,
        factor,
        factor_stderr,
        passed: factor_ok,
        points: out,
    })
}

/// `A^{1/q} / B^{1/2}` from the joint moments of `(|Y|^q, Y²)`, with a
/// delta-method standard error.
fn norm_ratio<F>(q: f64, samples: u64, seed: u64, task: u64, draw: F) -> McEstimate
where
    F: Fn(&mut rand_chacha::ChaCha8Rng) -> f64 + Sync,
{
    let m = accumulate::<2, _>(samples, seed, task, |rng| {
        let y = draw(rng);
        let sq = y * y;
        [if q == 2.0 { sq } else { y.abs().powf(q) }, sq]
    });
    let [a, b] = m.mean();
    if b == 0.0 {
        return McEstimate {
            mean: f64::NAN,
            stderr: f64::NAN,
            samples: m.count(),
            seed,
        };
    }
    let ratio = a.powf(1.0 / q) / b.sqrt();
    let ga = ratio / (q * a);
    let gb = -ratio / (2.0 * b);
    let var = ga * ga * m.covariance(0, 0) + 2.0 * ga * gb * m.covariance(0, 1) + gb * gb * m.covariance(1, 1);
    McEstimate {
        mean: ratio,
        stderr: (var.max(0.0) / m.count() as f64).sqrt(),
        samples: m.count(),
        seed,
    }
}

fn check_q(q: f64, min: f64) -> Result<()> {
    if !(q >= min) || !q.is_finite() {
        return Err(Error::Domain(format!("moment order q = {q} must be >= {min}")));
    }
    Ok(())
}

/// `‖f‖_{L^q(γ)} / ‖f‖_{L^2(γ)}` for `f(x) = xᵀ M x` under the standard
/// Gaussian.
pub fn gaussian_moment_ratio(
    q: &TracelessQuadratic,
    moment_q: f64,
    samples: u64,
    seed: u64,
) -> Result<McEstimate> {
    check_q(moment_q, 2.0)?;
    let n = q.n();
    Ok(norm_ratio(moment_q, samples, seed, task::MOMENT_RATIO, |rng| {
        let mut x = vec![0.0; n];
        fill_gaussian(rng, &mut x);
        q.eval(&x)
    }))
}

/// `E |f(X)|^q` for standard Gaussian `X`.
pub fn gaussian_moment(f: &HarmonicTestFn, q: f64, samples: u64, seed: u64) -> Result<McEstimate> {
    check_q(q, 1.0)?;
    let n = f.n();
    Ok(estimate_mean(samples, seed, task::GAUSS_MOMENT, |rng| {
        let mut x = vec![0.0; n];
        fill_gaussian(rng, &mut x);
        f.eval(&x).abs().powf(q)
    }))
}

/// `E |f(x)|^q` for uniform `x` on the sphere.
pub fn sphere_moment(f: &HarmonicTestFn, q: f64, samples: u64, seed: u64) -> Result<McEstimate> {
    check_q(q, 1.0)?;
    let n = f.n();
    Ok(estimate_mean(samples, seed, task::SPHERE_MOMENT, |rng| {
        let mut x = vec![0.0; n];
        fill_sphere(rng, &mut x);
        f.eval(&x).abs().powf(q)
    }))
}

/// `‖f‖_{L^q(S^{n-1})} / ‖f‖_{L^2(S^{n-1})}`.
pub fn sphere_moment_ratio(f: &HarmonicTestFn, q: f64, samples: u64, seed: u64) -> Result<McEstimate> {
    check_q(q, 2.0)?;
    let n = f.n();
    Ok(norm_ratio(q, samples, seed, task::SPHERE_RATIO, |rng| {
        let mut x = vec![0.0; n];
        fill_sphere(rng, &mut x);
        f.eval(&x)
    }))
}
