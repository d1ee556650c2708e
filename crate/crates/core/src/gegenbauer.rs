//! Normalized Gegenbauer (ultraspherical) polynomials `P_{n,d}`.
//!
//! `P_{n,d}` is the degree-`d` polynomial orthogonal with respect to
//! `(1 - t^2)^{(n-3)/2} dt` on `[-1, 1]`, normalized so that `P_{n,d}(1) = 1`.
//! It is the eigenvalue of the fixed-inner-product averaging operator on
//! degree-`d` spherical harmonics in `R^n`.
//!
//! Production evaluation uses the three-term recurrence
//!
//! ```text
//! P_{n,0} = 1,  P_{n,1}(t) = t,
//! (d + n - 3) P_{n,d}(t) = (2d + n - 4) t P_{n,d-1}(t) - (d - 1) P_{n,d-2}(t)
//! ```
//!
//! and [`gegenbauer_eval_explicit`] evaluates the classical alternating sum
//! as an independent check.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// Largest degree accepted by [`gegenbauer_eval_explicit`].
pub const EXPLICIT_MAX_DEGREE: usize = 30;

/// Ambient dimension `n` and harmonic degree `d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HarmonicIndex {
    n: usize,
    d: usize,
}

impl HarmonicIndex {
    pub fn new(n: usize, d: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Domain(format!("ambient dimension n = {n} < 2")));
        }
        Ok(Self { n, d })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn d(&self) -> usize {
        self.d
    }
}

fn check_argument(t: f64) -> Result<()> {
    if t.is_nan() || t.abs() > 1.0 {
        return Err(Error::Domain(format!("argument t = {t} outside [-1, 1]")));
    }
    Ok(())
}

/// Evaluates `P_{n,d}(t)` by the three-term recurrence.
pub fn gegenbauer_eval(idx: HarmonicIndex, t: f64) -> Result<f64> {
    check_argument(t)?;
    Ok(recurrence(idx.n, idx.d, t))
}

fn recurrence(n: usize, d: usize, t: f64) -> f64 {
    if d == 0 {
        return 1.0;
    }
    let nf = n as f64;
    let mut prev = 1.0;
    let mut curr = t;
    for k in 2..=d {
        let kf = k as f64;
        let next = ((2.0 * kf + nf - 4.0) * t * curr - (kf - 1.0) * prev) / (kf + nf - 3.0);
        prev = curr;
        curr = next;
    }
    curr
}

/// Fills `out[d] = P_{n,d}(t)` for `d = 0..out.len()`.
///
/// The argument is not range-checked; callers inside the crate only pass
/// quadrature nodes and cosines.
pub(crate) fn fill_table(n: usize, t: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    out[0] = 1.0;
    if out.len() == 1 {
        return;
    }
    out[1] = t;
    let nf = n as f64;
    for k in 2..out.len() {
        let kf = k as f64;
        out[k] = ((2.0 * kf + nf - 4.0) * t * out[k - 1] - (kf - 1.0) * out[k - 2])
            / (kf + nf - 3.0);
    }
}

/// All values `P_{n,0}(t), ..., P_{n,d_max}(t)`.
pub fn gegenbauer_table(n: usize, d_max: usize, t: f64) -> Result<Vec<f64>> {
    HarmonicIndex::new(n, d_max)?;
    check_argument(t)?;
    let mut out = vec![0.0; d_max + 1];
    fill_table(n, t, &mut out);
    Ok(out)
}

/// Evaluates `P_{n,d}(t)` by direct summation of the explicit formula
///
/// ```text
/// P_{n,d}(t) = 1 / C(n+d-3, d) * sum_{l=0}^{d/2} (-1)^l
///              Gamma(d - l + λ) / (Gamma(λ) l! (d - 2l)!) (2t)^{d-2l},   λ = (n-2)/2.
/// ```
///
/// The alternating sum cancels heavily (the absolute terms grow like
/// `(1 + √2)^d` at `|t| = 1`), so terms are formed and summed in
/// double-double arithmetic. With `C(2λ+d-1, d) = 2λ (2λ+1)...(2λ+d-1) / d!`
/// and `Γ(d-l+λ)/Γ(λ) = λ (λ+1)...(λ+d-l-1)` the common factor `λ` cancels
/// against `2λ`, leaving
///
/// ```text
/// c_l = (d!/2) · prod_{j=1}^{d-l-1} (λ+j) / (prod_{i=1}^{d-1} (2λ+i) · l! · (d-2l)!)
/// ```
///
/// which is finite for every `n >= 2`, including `n = 2`. Term magnitudes
/// are screened in log space (log-gamma) before any product is formed.
pub fn gegenbauer_eval_explicit(idx: HarmonicIndex, t: f64) -> Result<f64> {
    let (n, d) = (idx.n, idx.d);
    if d > EXPLICIT_MAX_DEGREE {
        return Err(Error::Domain(format!(
            "explicit formula limited to d <= {EXPLICIT_MAX_DEGREE}, got d = {d}"
        )));
    }
    if !t.is_finite() {
        return Err(Error::Domain(format!("non-finite argument t = {t}")));
    }
    if d == 0 {
        return Ok(1.0);
    }
    let lambda = (n as f64 - 2.0) / 2.0;
    let df = d as f64;
    let ln_two_t = (2.0 * t).abs().ln();

    let factorial = |k: usize| (1..=k).fold(DoubleDouble::from(1.0), |acc, i| acc * i as f64);
    let common_den = (1..d).fold(DoubleDouble::from(1.0), |acc, i| acc * (2.0 * lambda + i as f64));
    let common_num = factorial(d) * 0.5;
    let two_t = DoubleDouble::from(2.0 * t);

    let mut sum = DoubleDouble::from(0.0);
    for l in 0..=d / 2 {
        let lf = l as f64;
        let power = d - 2 * l;
        let ln_mag = ln_gamma(df + 1.0) - std::f64::consts::LN_2
            + (ln_gamma(df - lf + lambda) - ln_gamma(lambda + 1.0))
            - (ln_gamma(2.0 * lambda + df) - ln_gamma(2.0 * lambda + 1.0))
            - ln_gamma(lf + 1.0)
            - ln_gamma(df - 2.0 * lf + 1.0)
            + if power > 0 { power as f64 * ln_two_t } else { 0.0 };
        if ln_mag > 700.0 {
            return Err(Error::Overflow(format!(
                "explicit Gegenbauer term l = {l} for n = {n}, d = {d}"
            )));
        }
        let rising = (1..d - l).fold(DoubleDouble::from(1.0), |acc, j| acc * (lambda + j as f64));
        let den = common_den * factorial(l) * factorial(power);
        let mut term = common_num * rising / den;
        for _ in 0..power {
            term = term * two_t;
        }
        sum = if l % 2 == 0 { sum + term } else { sum - term };
    }
    let value = sum.to_f64();
    if !value.is_finite() {
        return Err(Error::Overflow(format!("explicit Gegenbauer sum n = {n}, d = {d}")));
    }
    Ok(value)
}

/// Unevaluated sum `hi + lo` carrying about 106 bits of mantissa.
#[derive(Debug, Clone, Copy)]
struct DoubleDouble {
    hi: f64,
    lo: f64,
}

impl From<f64> for DoubleDouble {
    fn from(x: f64) -> Self {
        Self { hi: x, lo: 0.0 }
    }
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> DoubleDouble {
    let s = a + b;
    DoubleDouble {
        hi: s,
        lo: b - (s - a),
    }
}

impl DoubleDouble {
    fn to_f64(self) -> f64 {
        self.hi + self.lo
    }
}

impl std::ops::Add for DoubleDouble {
    type Output = Self;
    fn add(self, y: Self) -> Self {
        let (s, e) = two_sum(self.hi, y.hi);
        let (t, f) = two_sum(self.lo, y.lo);
        let r = quick_two_sum(s, e + t);
        quick_two_sum(r.hi, r.lo + f)
    }
}

impl std::ops::Neg for DoubleDouble {
    type Output = Self;
    fn neg(self) -> Self {
        Self {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl std::ops::Sub for DoubleDouble {
    type Output = Self;
    fn sub(self, y: Self) -> Self {
        self + (-y)
    }
}

impl std::ops::Mul for DoubleDouble {
    type Output = Self;
    fn mul(self, y: Self) -> Self {
        let p = self.hi * y.hi;
        let e = self.hi.mul_add(y.hi, -p);
        quick_two_sum(p, e + (self.hi * y.lo + self.lo * y.hi))
    }
}

impl std::ops::Mul<f64> for DoubleDouble {
    type Output = Self;
    fn mul(self, y: f64) -> Self {
        self * DoubleDouble::from(y)
    }
}

impl std::ops::Div for DoubleDouble {
    type Output = Self;
    fn div(self, y: Self) -> Self {
        let q1 = self.hi / y.hi;
        let r = self - y * q1;
        let q2 = r.hi / y.hi;
        let r = r - y * q2;
        let q3 = r.hi / y.hi;
        quick_two_sum(q1, q2) + DoubleDouble::from(q3)
    }
}

/// `P_{n,d}(0)` via `P_{n,d}(0) = -(d-1)/(n-3+d) P_{n,d-2}(0)`; zero for odd `d`.
pub fn gegenbauer_zero(idx: HarmonicIndex) -> f64 {
    if idx.d % 2 == 1 {
        return 0.0;
    }
    let nf = idx.n as f64;
    let mut value = 1.0;
    let mut d = 2;
    while d <= idx.d {
        let df = d as f64;
        value *= -(df - 1.0) / (nf - 3.0 + df);
        d += 2;
    }
    value
}

fn binomial(m: u128, k: u128) -> Option<u128> {
    if k > m {
        return Some(0);
    }
    let k = k.min(m - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (m - i) is divisible by (i + 1) because acc = C(m, i).
        acc = acc.checked_mul(m - i)? / (i + 1);
    }
    Some(acc)
}

/// `dim H_{n,d} = C(n+d-1, n-1) - C(n+d-3, n-1)` in exact integer arithmetic.
pub fn dim_harmonic(idx: HarmonicIndex) -> Result<u128> {
    let (n, d) = (idx.n as u128, idx.d as u128);
    let overflow = || Error::Overflow(format!("dim H_{{{},{}}}", idx.n, idx.d));
    let top = binomial(n + d - 1, n - 1).ok_or_else(overflow)?;
    let lower = if d >= 2 {
        binomial(n + d - 3, n - 1).ok_or_else(overflow)?
    } else {
        0
    };
    Ok(top - lower)
}

/// Floating-point `dim H_{n,d}`, usable where the exact value overflows.
///
/// Uses `dim H_{n,d} = (2d + n - 2)/(n - 2) * prod_{i=1}^{d} (n - 3 + i)/i` for `n >= 3`.
pub fn dim_harmonic_f64(idx: HarmonicIndex) -> f64 {
    let (n, d) = (idx.n, idx.d);
    if d == 0 {
        return 1.0;
    }
    if n == 2 {
        return 2.0;
    }
    let nf = n as f64;
    let mut acc = (2.0 * d as f64 + nf - 2.0) / (nf - 2.0);
    for i in 1..=d {
        acc *= (nf - 3.0 + i as f64) / i as f64;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn idx(n: usize, d: usize) -> HarmonicIndex {
        HarmonicIndex::new(n, d).unwrap()
    }

    #[test]
    fn degree_one_is_identity() {
        for n in [2, 3, 7, 50] {
            for t in [-1.0, -0.3, 0.0, 0.8] {
                assert_eq!(gegenbauer_eval(idx(n, 1), t).unwrap(), t);
            }
        }
    }

    #[test]
    fn degree_two_closed_form() {
        for n in 2..40 {
            let expected = -1.0 / (n as f64 - 1.0);
            assert!((gegenbauer_eval(idx(n, 2), 0.0).unwrap() - expected).abs() < 1e-15);
        }
        // (n t^2 - 1)/(n - 1) at n = 5, t = 1/2
        assert!((gegenbauer_eval(idx(5, 2), 0.5).unwrap() - 0.0625).abs() < 1e-15);
    }

    #[test]
    fn normalized_at_one() {
        for n in 2..=60 {
            for d in 0..=30 {
                assert!((gegenbauer_eval(idx(n, d), 1.0).unwrap() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn n_two_is_chebyshev() {
        for d in 0..20 {
            for t in [-0.9, -0.2, 0.1, 0.55, 1.0] {
                let cheb = (d as f64 * f64::acos(t)).cos();
                assert!((gegenbauer_eval(idx(2, d), t).unwrap() - cheb).abs() < 1e-12);
                assert!((gegenbauer_eval_explicit(idx(2, d), t).unwrap() - cheb).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn n_three_is_legendre() {
        // P_4(x) = (35x^4 - 30x^2 + 3)/8
        let x: f64 = 0.37;
        let p4 = (35.0 * x.powi(4) - 30.0 * x * x + 3.0) / 8.0;
        assert!((gegenbauer_eval(idx(3, 4), x).unwrap() - p4).abs() < 1e-14);
    }

    #[test]
    fn explicit_examples() {
        assert_eq!(gegenbauer_eval_explicit(idx(4, 0), 0.3).unwrap(), 1.0);
        assert!((gegenbauer_eval_explicit(idx(6, 2), 0.0).unwrap() + 0.2).abs() < 1e-13);
        assert!((gegenbauer_eval_explicit(idx(7, 4), 0.0).unwrap() - 0.0625).abs() < 1e-13);
    }

    #[test]
    fn explicit_rejects_large_degree() {
        assert!(matches!(
            gegenbauer_eval_explicit(idx(5, 31), 0.2),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn zero_values() {
        for n in 2..100 {
            let nf = n as f64;
            for d in [1, 3, 5, 9] {
                assert_eq!(gegenbauer_zero(idx(n, d)), 0.0);
            }
            let p6 = -15.0 / ((nf * nf - 1.0) * (nf + 3.0));
            assert!((gegenbauer_zero(idx(n, 6)) - p6).abs() < 1e-15);
        }
        assert!((gegenbauer_zero(idx(10, 4)) - 3.0 / 99.0).abs() < 1e-15);
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(HarmonicIndex::new(1, 2), Err(Error::Domain(_))));
        assert!(matches!(gegenbauer_eval(idx(4, 2), 1.5), Err(Error::Domain(_))));
        assert!(matches!(gegenbauer_eval(idx(4, 2), f64::NAN), Err(Error::Domain(_))));
    }

    #[test]
    fn dimension_formula() {
        for n in 2..30 {
            assert_eq!(dim_harmonic(idx(n, 0)).unwrap(), 1);
            assert_eq!(dim_harmonic(idx(n, 1)).unwrap(), n as u128);
        }
        for d in 0..40 {
            assert_eq!(dim_harmonic(idx(3, d)).unwrap(), 2 * d as u128 + 1);
        }
        assert_eq!(dim_harmonic(idx(3, 5)).unwrap(), 11);
        // degree-2 harmonics: traceless symmetric matrices
        assert_eq!(dim_harmonic(idx(10, 2)).unwrap(), 54);
    }

    #[test]
    fn dimension_overflow_is_reported() {
        assert!(matches!(dim_harmonic(idx(10_000, 40)), Err(Error::Overflow(_))));
    }

    #[test]
    fn float_dimension_matches_exact() {
        for n in 2..60 {
            for d in 0..25 {
                let exact = dim_harmonic(idx(n, d)).unwrap() as f64;
                let approx = dim_harmonic_f64(idx(n, d));
                assert!((approx - exact).abs() <= 1e-12 * exact, "n={n} d={d}");
            }
        }
    }
}
