//! Bound calculators and verifier suites for the hypercontractive and
//! level-d inequalities on the sphere, the Gegenbauer zero bound, the
//! Gaussian/sphere norm conversion and the density budget of the slicing
//! induction.

use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::gegenbauer::{gegenbauer_zero, HarmonicIndex};
use crate::montecarlo::{
    derive_seed, gaussian_moment, gaussian_moment_ratio, quadratic_nonpositive_measure,
    sphere_moment, sphere_moment_ratio, substream, HarmonicTestFn, McEstimate,
    TracelessQuadratic, NONPOSITIVE_CONSTANT,
};
use crate::zonal::{spectrum, ZonalProfile};

/// Constant in the level-d bound `α² (K ln(1/α) / d)^d`.
pub const LEVEL_D_CONSTANT: f64 = 100.0;

/// Arguments of the level-d bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LevelDParams {
    alpha: f64,
    d: usize,
    n: usize,
    constant: f64,
}

impl LevelDParams {
    pub fn new(alpha: f64, d: usize, n: usize) -> Result<Self> {
        Self::with_constant(alpha, d, n, LEVEL_D_CONSTANT)
    }

    /// Checks `0 < α ≤ 1/2`, `α ≥ 2^{-n}`, `d ≤ ln(1/α)`.
    pub fn with_constant(alpha: f64, d: usize, n: usize, constant: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::Precondition(format!("n >= 2 violated: n = {n}")));
        }
        if !(alpha > 0.0 && alpha <= 0.5) {
            return Err(Error::Precondition(format!("0 < alpha <= 1/2 violated: alpha = {alpha}")));
        }
        let floor = (-(n as f64) * std::f64::consts::LN_2).exp();
        if alpha < floor {
            return Err(Error::Precondition(format!(
                "alpha >= 2^-n violated: alpha = {alpha}, 2^-{n} = {floor:e}"
            )));
        }
        let log_inv = -alpha.ln();
        if d as f64 > log_inv {
            return Err(Error::Precondition(format!(
                "d <= ln(1/alpha) violated: d = {d}, ln(1/alpha) = {log_inv}"
            )));
        }
        if !(constant > 0.0) {
            return Err(Error::Precondition(format!("constant > 0 violated: {constant}")));
        }
        Ok(Self { alpha, d, n, constant })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Largest admissible degree, `⌊ln(1/α)⌋`.
    pub fn max_degree(alpha: f64) -> usize {
        (-alpha.ln()).floor().max(0.0) as usize
    }
}

/// `α² (K ln(1/α) / d)^d`, and `α²` at `d = 0`.
pub fn level_d_bound(p: &LevelDParams) -> f64 {
    let a2 = p.alpha * p.alpha;
    if p.d == 0 {
        return a2;
    }
    let d = p.d as f64;
    a2 * (p.constant * (-p.alpha.ln()) / d).powf(d)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LevelDStatus {
    Holds,
    Violated,
    NotApplicable,
}

#[derive(Debug, Clone, Serialize)]
pub struct LevelDReport {
    pub n: usize,
    pub d: usize,
    /// Density of the profile as given.
    pub density: f64,
    /// Whether the check ran on `f` or on `1 - f`.
    pub applied_to: &'static str,
    pub alpha: f64,
    pub status: LevelDStatus,
    pub measured: Option<f64>,
    pub bound: Option<f64>,
    pub reason: Option<String>,
}

impl LevelDReport {
    pub fn holds(&self) -> bool {
        self.status != LevelDStatus::Violated
    }
}

/// Compares `‖f^{=d}‖²` with the level-d bound for an indicator profile.
///
/// When the density exceeds `1/2` the check is applied to `1 - f`. A
/// precondition failure on `(α, d)` yields `NotApplicable`, not an error.
pub fn check_level_d(profile: &ZonalProfile, d: usize) -> Result<LevelDReport> {
    check_level_d_with(profile, d, LEVEL_D_CONSTANT)
}

pub fn check_level_d_with(profile: &ZonalProfile, d: usize, constant: f64) -> Result<LevelDReport> {
    if !profile.is_indicator() {
        return Err(Error::Profile("level-d check needs an indicator profile".into()));
    }
    let n = profile.n();
    let base = spectrum(profile, d)?;
    let density = base.coeffs()[0];
    let (target, applied_to) = if density > 0.5 {
        (profile.complement(), "1-f")
    } else {
        (profile.clone(), "f")
    };
    let alpha = if density > 0.5 { 1.0 - density } else { density };
    let mut report = LevelDReport {
        n,
        d,
        density,
        applied_to,
        alpha,
        status: LevelDStatus::NotApplicable,
        measured: None,
        bound: None,
        reason: None,
    };
    let params = match LevelDParams::with_constant(alpha, d, n, constant) {
        Ok(p) => p,
        Err(e) => {
            report.reason = Some(e.to_string());
            return Ok(report);
        }
    };
    let measured = spectrum(&target, d)?.component_norm_sq(d)?;
    let bound = level_d_bound(&params);
    report.status = if measured <= bound * (1.0 + 1e-9) + 1e-12 {
        LevelDStatus::Holds
    } else {
        LevelDStatus::Violated
    };
    report.measured = Some(measured);
    report.bound = Some(bound);
    Ok(report)
}

/// Level-d checks over cap complements and bands of density `1 - ε`, for
/// every admissible degree.
pub fn level_d_suite(epsilons: &[f64], ns: &[usize]) -> Result<Vec<LevelDReport>> {
    let mut out = Vec::new();
    for &n in ns {
        for &eps in epsilons {
            let fixtures = [
                ZonalProfile::cap_complement(n, eps)?,
                ZonalProfile::band_with_density(n, 1.0 - eps)?,
            ];
            for profile in &fixtures {
                for d in 0..=LevelDParams::max_degree(eps) {
                    out.push(check_level_d(profile, d)?);
                }
            }
        }
    }
    Ok(out)
}

/// `(q - 1)^{d/2} e^{d² q / n}`, the sphere moment bound for degree-d
/// harmonics.
pub fn sphere_moment_bound(n: usize, d: usize, q: f64) -> Result<f64> {
    if !(q >= 2.0) {
        return Err(Error::Domain(format!("q = {q} must be >= 2")));
    }
    if n == 0 {
        return Err(Error::Domain("n must be >= 1".into()));
    }
    let d = d as f64;
    Ok((q - 1.0).powf(d / 2.0) * (d * d * q / n as f64).exp())
}

/// `(Γ(n/2) / (2^{dq/2} Γ((dq + n)/2)))^{1/q}`: the ratio of the sphere
/// `L^q` norm to the Gaussian `L^q` norm of a homogeneous degree-d function.
pub fn norm_conversion_factor(n: usize, d: usize, q: f64) -> Result<f64> {
    if !(q >= 1.0) || !q.is_finite() {
        return Err(Error::Domain(format!("q = {q} must be >= 1")));
    }
    if n == 0 {
        return Err(Error::Domain("n must be >= 1".into()));
    }
    let nf = n as f64;
    let dq = d as f64 * q;
    let ln = ln_gamma(nf / 2.0) - dq / 2.0 * std::f64::consts::LN_2 - ln_gamma((dq + nf) / 2.0);
    Ok((ln / q).exp())
}

#[derive(Debug, Clone, Serialize)]
pub struct ZeroBoundViolation {
    pub n: usize,
    pub d: usize,
    pub value: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ZeroBoundReport {
    pub checked: usize,
    /// Largest `|P_{n,d}(0)| · n³ / 15` seen.
    pub max_ratio: f64,
    pub violations: Vec<ZeroBoundViolation>,
}

/// Checks `|P_{n,d}(0)| ≤ |P_{n,6}(0)| ≤ 15/n³` for even `d ≥ 6` in range.
pub fn zero_bound_sweep(ns: std::ops::RangeInclusive<usize>, ds: std::ops::RangeInclusive<usize>) -> Result<ZeroBoundReport> {
    let mut report = ZeroBoundReport {
        checked: 0,
        max_ratio: 0.0,
        violations: Vec::new(),
    };
    for n in ns {
        let nf = n as f64;
        let cap = 15.0 / (nf * nf * nf);
        let six = gegenbauer_zero(HarmonicIndex::new(n, 6)?).abs();
        for d in ds.clone().filter(|d| d % 2 == 0 && *d >= 6) {
            let value = gegenbauer_zero(HarmonicIndex::new(n, d)?).abs();
            report.checked += 1;
            report.max_ratio = report.max_ratio.max(value / cap);
            if value > six || six > cap {
                report.violations.push(ZeroBoundViolation {
                    n,
                    d,
                    value,
                    bound: six.min(cap),
                });
            }
        }
    }
    Ok(report)
}

/// Parameters of the density budget along the slicing induction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BudgetParams {
    pub epsilon: f64,
    pub n: usize,
    pub n0: usize,
    pub c: f64,
    pub eps0: f64,
}

pub const DEFAULT_EPS0: f64 = 0.01;
pub const DEFAULT_C: f64 = 10.0;

impl BudgetParams {
    pub fn new(epsilon: f64, n: usize, n0: usize, c: f64) -> Result<Self> {
        Self::with_eps0(epsilon, n, n0, c, DEFAULT_EPS0)
    }

    pub fn with_eps0(epsilon: f64, n: usize, n0: usize, c: f64, eps0: f64) -> Result<Self> {
        if !(eps0 > 0.0 && eps0 <= 0.5) {
            return Err(Error::Precondition(format!("0 < eps0 <= 1/2 violated: eps0 = {eps0}")));
        }
        if !(epsilon > 0.0 && epsilon <= eps0) {
            return Err(Error::Precondition(format!(
                "0 < epsilon <= eps0 violated: epsilon = {epsilon}, eps0 = {eps0}"
            )));
        }
        if n0 < 1 || n0 > n {
            return Err(Error::Precondition(format!("1 <= n0 <= n violated: n0 = {n0}, n = {n}")));
        }
        if !(c >= 0.0) || !c.is_finite() {
            return Err(Error::Precondition(format!("C >= 0 violated: C = {c}")));
        }
        Ok(Self {
            epsilon,
            n,
            n0,
            c,
            eps0,
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BudgetStep {
    pub k: usize,
    /// Dimension `n - k` of the sphere being sliced.
    pub dim: usize,
    pub loss: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BudgetStatus {
    Ok,
    Exhausted,
}

#[derive(Debug, Clone, Serialize)]
pub struct BudgetReport {
    pub params: BudgetParams,
    pub alpha: f64,
    pub final_density_lower_bound: f64,
    pub status: BudgetStatus,
    /// First step whose bound fell below `1 - 2ε`.
    pub failing_step: Option<usize>,
    /// Whether the final bound reaches `1 - 1/(2 n0)`, the density at which
    /// a random orthonormal `n0`-frame lies in the set with probability at
    /// least one half.
    pub terminal_ok: bool,
    pub per_step: Vec<BudgetStep>,
}

/// `sup_{0 < x ≤ y} x ln²(1/x)`; the function increases up to `e^{-2}`.
fn worst_entropy_loss(y: f64) -> f64 {
    let peak = (-2.0f64).exp();
    let x = y.min(peak);
    let l = x.ln();
    x * l * l
}

/// Runs `1 - ε_{k+1} ≥ 1 - ε_k - C ε_k ln²(1/ε_k)/(n-k)² - C/(n-k)³` from
/// `α = 1 - ε` down to dimension `n0`, bounding each `ε_k` by `2ε`.
///
/// The substitution is only sound while the running bound stays at or above
/// `1 - 2ε`; the first step where it does not is reported as exhausted.
pub fn budget_chain(p: &BudgetParams) -> BudgetReport {
    let alpha = 1.0 - p.epsilon;
    let floor = 1.0 - 2.0 * p.epsilon;
    let entropy = worst_entropy_loss(2.0 * p.epsilon);
    let steps = p.n - p.n0;
    let mut bound = alpha;
    let mut failing_step = None;
    let mut per_step = Vec::with_capacity(steps);
    for k in 0..steps {
        let dim = (p.n - k) as f64;
        let loss = p.c * entropy / (dim * dim) + p.c / (dim * dim * dim);
        bound -= loss;
        if failing_step.is_none() && bound < floor {
            failing_step = Some(k);
        }
        per_step.push(BudgetStep {
            k,
            dim: p.n - k,
            loss,
            bound,
        });
    }
    BudgetReport {
        params: *p,
        alpha,
        final_density_lower_bound: bound,
        status: if failing_step.is_some() {
            BudgetStatus::Exhausted
        } else {
            BudgetStatus::Ok
        },
        failing_step,
        terminal_ok: bound >= 1.0 - 1.0 / (2.0 * p.n0 as f64),
        per_step,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct HypercontractivityCase {
    pub n: usize,
    pub gaussian_ratio: McEstimate,
    pub gaussian_bound: f64,
    pub sphere_ratio: McEstimate,
    pub sphere_bound: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct HypercontractivityReport {
    pub q: f64,
    pub cases: Vec<HypercontractivityCase>,
    pub max_gaussian_ratio: f64,
    pub passed: bool,
}

/// For `count` random traceless quadratics: Gaussian `‖f‖_q/‖f‖_2 ≤ (q-1)`
/// up to three relative standard errors, and the sphere ratio below the
/// sphere moment bound (same allowance).
pub fn hypercontractivity_suite(
    count: usize,
    ns: &[usize],
    q: f64,
    samples: u64,
    seed: u64,
) -> Result<HypercontractivityReport> {
    if ns.is_empty() {
        return Err(Error::Domain("need at least one dimension".into()));
    }
    let mut cases = Vec::with_capacity(count);
    for i in 0..count {
        let n = ns[i % ns.len()];
        let mut rng = substream(seed, FIXTURE_TASK, i as u64);
        let quad = TracelessQuadratic::random(n, &mut rng)?;
        let s = derive_seed(seed, i as u64);
        let g = gaussian_moment_ratio(&quad, q, samples, s)?;
        let gaussian_bound = q - 1.0;
        let sphere = sphere_moment_ratio(&HarmonicTestFn::Quadratic(quad), q, samples, s)?;
        let sphere_bound = sphere_moment_bound(n, 2, q)?;
        let holds = g.mean <= gaussian_bound * (1.0 + 3.0 * g.relative_stderr())
            && sphere.mean <= sphere_bound * (1.0 + 3.0 * sphere.relative_stderr());
        cases.push(HypercontractivityCase {
            n,
            gaussian_ratio: g,
            gaussian_bound,
            sphere_ratio: sphere,
            sphere_bound,
            holds,
        });
    }
    let max_gaussian_ratio = cases.iter().map(|c| c.gaussian_ratio.mean).fold(0.0, f64::max);
    Ok(HypercontractivityReport {
        q,
        passed: cases.iter().all(|c| c.holds),
        max_gaussian_ratio,
        cases,
    })
}

const FIXTURE_TASK: u64 = 1 << 40;

#[derive(Debug, Clone, Serialize)]
pub struct NonpositiveCase {
    pub n: usize,
    pub kind: &'static str,
    pub estimate: McEstimate,
}

#[derive(Debug, Clone, Serialize)]
pub struct NonpositiveReport {
    pub constant: f64,
    pub min_mean: f64,
    pub cases: Vec<NonpositiveCase>,
    pub passed: bool,
}

/// `μ{xᵀ M x ≤ 0}` over `count` traceless quadratics cycling through `ns`
/// and through three families: GOE, the rank-one stress matrix and small
/// GOE perturbations of it. Passes if every estimate is at least
/// [`NONPOSITIVE_CONSTANT`] up to three standard errors.
pub fn nonpositive_suite(count: usize, ns: &[usize], samples: u64, seed: u64) -> Result<NonpositiveReport> {
    if ns.is_empty() {
        return Err(Error::Domain("need at least one dimension".into()));
    }
    let mut cases = Vec::with_capacity(count);
    for i in 0..count {
        let n = ns[i % ns.len()];
        let mut rng = substream(seed, FIXTURE_TASK, i as u64);
        let (kind, quad) = match (i / ns.len()) % 3 {
            0 => ("random", TracelessQuadratic::random(n, &mut rng)?),
            1 => ("rank_one_stress", TracelessQuadratic::rank_one_stress(n)?),
            _ => ("near_rank_one", TracelessQuadratic::near_rank_one(n, 0.01, &mut rng)?),
        };
        let estimate = quadratic_nonpositive_measure(&quad, samples, derive_seed(seed, i as u64))?;
        cases.push(NonpositiveCase { n, kind, estimate });
    }
    let min_mean = cases.iter().map(|c| c.estimate.mean).fold(f64::INFINITY, f64::min);
    let passed = cases
        .iter()
        .all(|c| c.estimate.mean + 3.0 * c.estimate.stderr >= NONPOSITIVE_CONSTANT);
    Ok(NonpositiveReport {
        constant: NONPOSITIVE_CONSTANT,
        min_mean,
        cases,
        passed,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SphereMomentCase {
    pub n: usize,
    pub d: usize,
    pub q: f64,
    pub ratio: McEstimate,
    pub bound: f64,
    pub holds: bool,
}

/// Sphere `‖f‖_q/‖f‖_2` for zonal harmonics against [`sphere_moment_bound`].
pub fn sphere_moment_suite(
    ns: &[usize],
    ds: &[usize],
    qs: &[f64],
    samples: u64,
    seed: u64,
) -> Result<Vec<SphereMomentCase>> {
    let mut out = Vec::new();
    let mut i = 0u64;
    for &n in ns {
        for &d in ds {
            let f = HarmonicTestFn::zonal(n, d)?;
            for &q in qs {
                let ratio = sphere_moment_ratio(&f, q, samples, derive_seed(seed, i))?;
                i += 1;
                let bound = sphere_moment_bound(n, d, q)?;
                out.push(SphereMomentCase {
                    n,
                    d,
                    q,
                    holds: ratio.mean <= bound * (1.0 + 3.0 * ratio.relative_stderr()),
                    ratio,
                    bound,
                });
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct ConversionCheck {
    pub n: usize,
    pub d: usize,
    pub sphere_sq: McEstimate,
    pub gaussian_sq: McEstimate,
    pub factor: f64,
    /// `|sphere_sq - factor² · gaussian_sq|` against three combined
    /// standard errors.
    pub holds: bool,
}

/// Sphere `L²` norm of the degree-d zonal harmonic versus the conversion
/// factor times its Gaussian `L²` norm, compared in squared form.
pub fn conversion_check(n: usize, d: usize, samples: u64, seed: u64) -> Result<ConversionCheck> {
    let f = HarmonicTestFn::zonal(n, d)?;
    let sphere_sq = sphere_moment(&f, 2.0, samples, seed)?;
    let gaussian_sq = gaussian_moment(&f, 2.0, samples, seed)?;
    let factor = norm_conversion_factor(n, d, 2.0)?;
    let f2 = factor * factor;
    let diff = (sphere_sq.mean - f2 * gaussian_sq.mean).abs();
    let se = (sphere_sq.stderr.powi(2) + (f2 * gaussian_sq.stderr).powi(2)).sqrt();
    Ok(ConversionCheck {
        n,
        d,
        holds: diff <= 3.0 * se + 1e-12,
        sphere_sq,
        gaussian_sq,
        factor,
    })
}
