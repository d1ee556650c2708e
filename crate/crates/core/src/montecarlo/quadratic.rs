use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use super::estimator::{estimate_mean, McEstimate};
use super::{fill_gaussian, fill_sphere, task};
use crate::error::{Error, Result};

/// Lower bound `1/(3^4 · 5)` on the non-positive measure of a nonzero
/// degree-2 harmonic.
pub const NONPOSITIVE_CONSTANT: f64 = 1.0 / 405.0;

const SYMMETRY_TOL: f64 = 1e-12;

/// The degree-2 harmonic `x ↦ xᵀ M x` for symmetric traceless `M`.
#[derive(Debug, Clone, PartialEq)]
pub struct TracelessQuadratic {
    matrix: DMatrix<f64>,
}

impl TracelessQuadratic {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        let n = matrix.nrows();
        if n == 0 || matrix.ncols() != n {
            return Err(Error::Domain(format!(
                "quadratic form needs a square nonempty matrix, got {}x{}",
                n,
                matrix.ncols()
            )));
        }
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("matrix has non-finite entries".into()));
        }
        for i in 0..n {
            for j in 0..i {
                let gap = (matrix[(i, j)] - matrix[(j, i)]).abs();
                if gap > SYMMETRY_TOL {
                    return Err(Error::Domain(format!(
                        "matrix not symmetric at ({i}, {j}): gap {gap:e}"
                    )));
                }
            }
        }
        let trace = matrix.trace();
        if trace.abs() > SYMMETRY_TOL {
            return Err(Error::Domain(format!("|trace| = {:e} exceeds 1e-12", trace.abs())));
        }
        Ok(Self { matrix })
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(diag)))
    }

    /// GOE draw with its trace removed.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Self> {
        if n < 2 {
            return Err(Error::Domain("traceless quadratics need n >= 2".into()));
        }
        let mut a = DMatrix::<f64>::zeros(n, n);
        for j in 0..n {
            for i in 0..=j {
                let v: f64 = rng.sample(StandardNormal);
                let v = if i == j { v } else { v / 2f64.sqrt() };
                a[(i, j)] = v;
                a[(j, i)] = v;
            }
        }
        Self::new(remove_trace(a))
    }

    /// `diag(n-1, -1, ..., -1)`: positive only on a thin double cap.
    pub fn rank_one_stress(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Domain("traceless quadratics need n >= 2".into()));
        }
        let mut diag = vec![-1.0; n];
        diag[0] = (n - 1) as f64;
        Self::from_diagonal(&diag)
    }

    /// The stress matrix plus a GOE perturbation of relative size `scale`.
    pub fn near_rank_one<R: Rng + ?Sized>(n: usize, scale: f64, rng: &mut R) -> Result<Self> {
        let base = Self::rank_one_stress(n)?;
        let noise = Self::random(n, rng)?;
        Self::new(remove_trace(base.matrix + noise.matrix * scale))
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn is_zero(&self) -> bool {
        self.matrix.iter().all(|&v| v == 0.0)
    }

    pub fn negated(&self) -> Self {
        Self {
            matrix: -self.matrix.clone(),
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let n = self.n();
        let mut acc = 0.0;
        for j in 0..n {
            let col = self.matrix.column(j);
            let mut s = 0.0;
            for i in 0..n {
                s += col[i] * x[i];
            }
            acc += s * x[j];
        }
        acc
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let eig = self
            .matrix
            .clone()
            .try_symmetric_eigen(1e-15, 10_000)
            .ok_or_else(|| Error::Eigen("symmetric eigen-solve did not converge".into()))?;
        let mut v: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        v.sort_by(f64::total_cmp);
        Ok(v)
    }
}

fn remove_trace(mut a: DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let shift = a.trace() / n as f64;
    for i in 0..n {
        a[(i, i)] -= shift;
    }
    // force exact symmetry
    let t = a.transpose();
    (a + t) * 0.5
}

fn check_nonzero(q: &TracelessQuadratic) -> Result<()> {
    if q.is_zero() {
        return Err(Error::Precondition("quadratic form must be nonzero".into()));
    }
    Ok(())
}

/// `μ{x ∈ S^{n-1} : xᵀ M x ≤ 0}` by uniform sampling on the sphere.
pub fn quadratic_nonpositive_measure(
    q: &TracelessQuadratic,
    samples: u64,
    seed: u64,
) -> Result<McEstimate> {
    check_nonzero(q)?;
    let n = q.n();
    Ok(estimate_mean(samples, seed, task::NONPOSITIVE, |rng| {
        let mut x = vec![0.0; n];
        fill_sphere(rng, &mut x);
        (q.eval(&x) <= 0.0) as u8 as f64
    }))
}

/// Same measure through the spectrum: `Pr[Σ λ_i X_i² ≤ 0]` for Gaussian `X`.
pub fn quadratic_nonpositive_measure_eigen(
    q: &TracelessQuadratic,
    samples: u64,
    seed: u64,
) -> Result<McEstimate> {
    check_nonzero(q)?;
    let lambda = q.eigenvalues()?;
    Ok(estimate_mean(samples, seed, task::NONPOSITIVE_EIGEN, |rng| {
        let mut x = vec![0.0; lambda.len()];
        fill_gaussian(rng, &mut x);
        let s: f64 = lambda.iter().zip(&x).map(|(l, v)| l * v * v).sum();
        (s <= 0.0) as u8 as f64
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::montecarlo::substream;
    use statrs::function::beta::beta_reg;

    #[test]
    fn validation() {
        assert!(TracelessQuadratic::from_diagonal(&[1.0, -1.0]).is_ok());
        assert!(TracelessQuadratic::from_diagonal(&[1.0, 1.0]).is_err());
        let asym = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.5, 0.0]);
        assert!(TracelessQuadratic::new(asym).is_err());
        assert!(TracelessQuadratic::new(DMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn random_draws_are_valid() {
        let mut rng = substream(5, 0, 0);
        for n in [2, 3, 10, 40] {
            let q = TracelessQuadratic::random(n, &mut rng).unwrap();
            assert!(q.matrix().trace().abs() <= 1e-12);
            let q = TracelessQuadratic::near_rank_one(n, 1e-3, &mut rng).unwrap();
            assert_eq!(q.matrix(), &q.matrix().transpose());
        }
    }

    #[test]
    fn eval_matches_diagonal_form() {
        let q = TracelessQuadratic::from_diagonal(&[2.0, -0.5, -1.5]).unwrap();
        let x = [0.3, -0.4, 0.5];
        let expected = 2.0 * 0.09 - 0.5 * 0.16 - 1.5 * 0.25;
        assert!((q.eval(&x) - expected).abs() < 1e-15);
        let ev = q.eigenvalues().unwrap();
        assert!((ev[0] + 1.5).abs() < 1e-14 && (ev[2] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn antisymmetric_pair_is_one_half() {
        let q = TracelessQuadratic::from_diagonal(&[1.0, -1.0, 0.0, 0.0]).unwrap();
        let e = quadratic_nonpositive_measure(&q, 200_000, 3).unwrap();
        assert!(e.agrees_with(0.5, 3.0, 0.0), "{e:?}");
    }

    #[test]
    fn complementary_events_cover_sphere() {
        let mut rng = substream(8, 0, 0);
        let q = TracelessQuadratic::random(6, &mut rng).unwrap();
        let a = quadratic_nonpositive_measure(&q, 50_000, 4).unwrap();
        let b = quadratic_nonpositive_measure(&q.negated(), 50_000, 4).unwrap();
        assert!(a.mean + b.mean >= 1.0);
    }

    #[test]
    fn rank_one_stress_matches_beta_marginal() {
        // x_1² ~ Beta(1/2, (n-1)/2) on the sphere; the event is x_1² ≤ 1/n.
        for n in [3, 8, 25] {
            let q = TracelessQuadratic::rank_one_stress(n).unwrap();
            let exact = beta_reg(0.5, (n as f64 - 1.0) / 2.0, 1.0 / n as f64);
            let s = quadratic_nonpositive_measure(&q, 200_000, 1).unwrap();
            let e = quadratic_nonpositive_measure_eigen(&q, 200_000, 1).unwrap();
            assert!(s.agrees_with(exact, 3.0, 0.0), "n={n} {s:?} vs {exact}");
            assert!(e.agrees_with(exact, 3.0, 0.0), "n={n} {e:?} vs {exact}");
        }
    }

    #[test]
    fn zero_form_rejected() {
        let q = TracelessQuadratic::from_diagonal(&[0.0, 0.0]).unwrap();
        assert!(quadratic_nonpositive_measure(&q, 10, 0).is_err());
    }
}
