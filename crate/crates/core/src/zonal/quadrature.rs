//! Integration against the marginal law of one coordinate of a uniform point
//! on `S^{n-1}`, `p_n(t) ∝ (1 - t^2)^{(n-3)/2}` on `[-1, 1]`.

use nalgebra::DMatrix;
use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::gegenbauer::fill_table;

/// Gauss rule for the probability measure `p_n(t) dt`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadratureRule {
    n: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    order: usize,
}

/// Builds the `order`-point Gauss rule for weight `(1 - t^2)^{(n-3)/2}`,
/// normalized to total mass one.
///
/// Golub-Welsch on the Jacobi matrix of the monic Gegenbauer family with
/// `λ = (n - 2)/2`, whose recurrence coefficients are
/// `b_k^2 = k (k + 2λ - 1) / (4 (k + λ)(k + λ - 1))` (`b_1^2 = 1/2` when `λ = 0`).
pub fn make_quadrature(n: usize, order: usize) -> Result<QuadratureRule> {
    if n < 2 {
        return Err(Error::Domain(format!("ambient dimension n = {n} < 2")));
    }
    if order < 1 {
        return Err(Error::Domain("quadrature order must be >= 1".into()));
    }
    let lambda = (n as f64 - 2.0) / 2.0;
    let mut jacobi = DMatrix::<f64>::zeros(order, order);
    for k in 1..order {
        let kf = k as f64;
        let b_sq = if n == 2 && k == 1 {
            0.5
        } else {
            kf * (kf + 2.0 * lambda - 1.0) / (4.0 * (kf + lambda) * (kf + lambda - 1.0))
        };
        let b = b_sq.sqrt();
        jacobi[(k - 1, k)] = b;
        jacobi[(k, k - 1)] = b;
    }
    let eigen = jacobi
        .try_symmetric_eigen(1e-15, 10_000)
        .ok_or_else(|| Error::Eigen(format!("no convergence for n = {n}, order = {order}")))?;

    let mut pairs: Vec<(f64, f64)> = eigen
        .eigenvalues
        .iter()
        .zip(eigen.eigenvectors.row(0).iter())
        .map(|(&x, &v)| (x, v * v))
        .collect();
    if pairs.iter().any(|(x, w)| !x.is_finite() || !w.is_finite()) {
        return Err(Error::Eigen(format!("non-finite nodes for n = {n}, order = {order}")));
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    // Nodes of a symmetric weight come in ± pairs; enforce it exactly.
    for i in 0..order / 2 {
        let j = order - 1 - i;
        let x = 0.5 * (pairs[j].0 - pairs[i].0);
        let w = 0.5 * (pairs[j].1 + pairs[i].1);
        pairs[i] = (-x, w);
        pairs[j] = (x, w);
    }
    if order % 2 == 1 {
        pairs[order / 2].0 = 0.0;
    }
    let total: f64 = pairs.iter().map(|p| p.1).sum();
    let (nodes, weights) = pairs.into_iter().map(|(x, w)| (x, w / total)).unzip();
    Ok(QuadratureRule {
        n,
        nodes,
        weights,
        order,
    })
}

/// Default rule for spectra up to degree `d_max`: order `max(64, 4 d_max)`.
pub fn default_rule(n: usize, d_max: usize) -> Result<QuadratureRule> {
    make_quadrature(n, (4 * d_max).max(64))
}

impl QuadratureRule {
    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Highest polynomial degree integrated exactly.
    pub fn exactness(&self) -> usize {
        2 * self.order - 1
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&t, &w)| w * f(t))
            .sum()
    }
}

/// `ln` of the normalizing constant of `sin^{n-2}(θ)` on `[0, π]`:
/// `Γ(n/2) / (√π Γ((n-1)/2))`.
fn ln_angular_normalizer(n: usize) -> f64 {
    let nf = n as f64;
    ln_gamma(nf / 2.0) - ln_gamma((nf - 1.0) / 2.0) - 0.5 * std::f64::consts::PI.ln()
}

/// Density of `t = cos θ` pushed to the angle: `c_n sin^{n-2} θ`.
#[derive(Debug, Clone)]
pub(crate) struct AngularDensity {
    n: usize,
    ln_norm: f64,
}

impl AngularDensity {
    pub(crate) fn new(n: usize) -> Self {
        Self {
            n,
            ln_norm: ln_angular_normalizer(n),
        }
    }

    #[inline]
    pub(crate) fn at(&self, theta: f64) -> f64 {
        if self.n == 2 {
            return self.ln_norm.exp();
        }
        let s = theta.sin();
        if s <= 0.0 {
            return 0.0;
        }
        (self.ln_norm + (self.n as f64 - 2.0) * s.ln()).exp()
    }
}

const PANEL_NODES: usize = 16;

/// Composite Gauss-Legendre integration in the angle `θ = acos t`.
///
/// Under `t = cos θ` the measure `p_n(t) dt` becomes `c_n sin^{n-2} θ dθ`,
/// which is smooth on `[0, π]` for every `n`. Integrands that are polynomials
/// of degree `≤ d_max` in `t` become trigonometric polynomials of degree at
/// most `d_max + n - 2`; panels are sized so each carries a bounded number of
/// oscillations.
#[derive(Debug, Clone)]
pub(crate) struct AngularIntegrator {
    n: usize,
    density: AngularDensity,
    panels_per_pi: usize,
    gl_nodes: Vec<f64>,
    gl_weights: Vec<f64>,
}

impl AngularIntegrator {
    pub(crate) fn new(n: usize, d_max: usize) -> Result<Self> {
        // Legendre nodes are the n = 3 rule (constant weight), rescaled to mass 2.
        let legendre = make_quadrature(3, PANEL_NODES)?;
        let panels_per_pi = (d_max + n).div_ceil(2).clamp(8, 40_000);
        let mut integ = Self {
            n,
            density: AngularDensity::new(n),
            panels_per_pi,
            gl_nodes: legendre.nodes,
            gl_weights: legendre.weights.iter().map(|w| 2.0 * w).collect(),
        };
        // lnΓ(n/2) - lnΓ((n-1)/2) loses absolute accuracy for large n;
        // renormalize so the composite rule sees total mass exactly one.
        let total = integ.mass(-1.0, 1.0);
        integ.density.ln_norm -= total.ln();
        Ok(integ)
    }

    /// Adds `∫_{lo}^{hi} P_{n,d}(t) p_n(t) dt` into `acc[d]` for `d < acc.len()`.
    pub(crate) fn accumulate_moments(&self, lo: f64, hi: f64, acc: &mut [f64]) {
        let lo = lo.clamp(-1.0, 1.0);
        let hi = hi.clamp(-1.0, 1.0);
        if hi <= lo {
            return;
        }
        let (theta_a, theta_b) = (hi.acos(), lo.acos());
        let span = theta_b - theta_a;
        let panels = ((self.panels_per_pi as f64 * span / std::f64::consts::PI).ceil() as usize)
            .max(1);
        let width = span / panels as f64;
        let mut table = vec![0.0; acc.len()];
        for p in 0..panels {
            let left = theta_a + p as f64 * width;
            let half = 0.5 * width;
            let mid = left + half;
            for (&x, &w) in self.gl_nodes.iter().zip(&self.gl_weights) {
                let theta = mid + half * x;
                let weight = w * half * self.density.at(theta);
                if weight == 0.0 {
                    continue;
                }
                fill_table(self.n, theta.cos(), &mut table);
                for (a, v) in acc.iter_mut().zip(&table) {
                    *a += weight * v;
                }
            }
        }
    }

    pub(crate) fn mass(&self, lo: f64, hi: f64) -> f64 {
        let mut acc = [0.0];
        self.accumulate_moments(lo, hi, &mut acc);
        acc[0]
    }
}
