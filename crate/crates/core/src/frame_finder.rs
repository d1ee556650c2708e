//! Greedy extraction of an orthogonal frame from a dense set.
//!
//! Level by level, candidates are drawn from the set inside the current
//! subsphere and the one whose orthogonal slice keeps the most mass is kept;
//! the search then recurses into that slice. Once the subsphere has
//! dimension `n0`, Haar-random orthonormal frames of the subspace are tried
//! until one lies entirely in the set.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::montecarlo::{
    derive_seed, estimate_mean, fill_gaussian, fill_sphere, substream, McEstimate,
    MembershipOracle,
};
use crate::zonal::{density, g_t_zonal, make_quadrature, spectrum, GtValue, ZonalProfile};

const CANDIDATE_TASK: u64 = 1 << 48;
const TERMINAL_TASK: u64 = 2 << 48;
const SLICE_TASK: u64 = 3 << 48;
const AVERAGE_TASK: u64 = 4 << 48;

/// Restriction on which points of the set may be chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CandidateFilter {
    None,
    /// Only points where the degree-2 component of the (restricted) set's
    /// indicator is non-positive. Needs a zonal oracle.
    Degree2NonPositive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FinderConfig {
    pub candidates_per_level: usize,
    pub slice_samples: u64,
    pub n0: usize,
    pub terminal_trials: usize,
    pub seed: u64,
    pub max_rejections: u64,
    pub candidate_filter: CandidateFilter,
}

impl Default for FinderConfig {
    fn default() -> Self {
        Self {
            candidates_per_level: 32,
            slice_samples: 4096,
            n0: 4,
            terminal_trials: 200,
            seed: 0,
            max_rejections: 100_000,
            candidate_filter: CandidateFilter::None,
        }
    }
}

impl FinderConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.candidates_per_level == 0
            || self.slice_samples == 0
            || self.terminal_trials == 0
            || self.max_rejections == 0
        {
            return Err(Error::Precondition(
                "candidates_per_level, slice_samples, terminal_trials and max_rejections must be positive"
                    .into(),
            ));
        }
        if self.n0 < 2 {
            return Err(Error::Precondition(format!("n0 >= 2 violated: n0 = {}", self.n0)));
        }
        Ok(())
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(v: &mut [f64]) -> f64 {
    let norm = dot(v, v).sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    norm
}

/// Working subspace of the recursion together with the points chosen so far.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubspaceFrame {
    ambient_n: usize,
    basis: Vec<Vec<f64>>,
    chosen: Vec<Vec<f64>>,
}

impl SubspaceFrame {
    /// The whole of `R^n` with nothing chosen.
    pub fn full(n: usize) -> Self {
        let basis = (0..n)
            .map(|i| {
                let mut e = vec![0.0; n];
                e[i] = 1.0;
                e
            })
            .collect();
        Self {
            ambient_n: n,
            basis,
            chosen: Vec::new(),
        }
    }

    /// A subspace spanned by `basis` (orthonormalized here).
    pub fn from_basis(ambient_n: usize, basis: Vec<Vec<f64>>) -> Result<Self> {
        if basis.iter().any(|b| b.len() != ambient_n) {
            return Err(Error::DimensionMismatch {
                expected: ambient_n,
                got: basis.iter().map(Vec::len).find(|&l| l != ambient_n).unwrap_or(0),
            });
        }
        let mut out: Vec<Vec<f64>> = Vec::with_capacity(basis.len());
        for mut v in basis {
            orthogonalize(&mut v, &out);
            if normalize(&mut v) < 1e-8 {
                return Err(Error::Domain("basis vectors are linearly dependent".into()));
            }
            out.push(v);
        }
        Ok(Self {
            ambient_n,
            basis: out,
            chosen: Vec::new(),
        })
    }

    #[inline]
    pub fn ambient_n(&self) -> usize {
        self.ambient_n
    }

    /// Dimension of the working subspace.
    #[inline]
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<f64>] {
        &self.basis
    }

    pub fn chosen(&self) -> &[Vec<f64>] {
        &self.chosen
    }

    /// `Σ c_i b_i`.
    pub fn embed(&self, coords: &[f64]) -> Vec<f64> {
        let mut v = vec![0.0; self.ambient_n];
        for (c, b) in coords.iter().zip(&self.basis) {
            v.iter_mut().zip(b).for_each(|(x, y)| *x += c * y);
        }
        v
    }

    /// `Bᵀ x`.
    pub fn coords(&self, x: &[f64]) -> Vec<f64> {
        self.basis.iter().map(|b| dot(b, x)).collect()
    }

    /// Distance from `x` to the subspace.
    pub fn residual(&self, x: &[f64]) -> f64 {
        let p = self.embed(&self.coords(x));
        x.iter()
            .zip(&p)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    /// Uniform point of the unit sphere of the subspace.
    pub(crate) fn sample_unit<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let mut c = vec![0.0; self.dim()];
        fill_sphere(rng, &mut c);
        let mut v = self.embed(&c);
        normalize(&mut v);
        v
    }

    /// The subspace `V ∩ x^⊥` with `x` appended to the chosen points.
    ///
    /// A Householder reflection in subspace coordinates maps `x` to a
    /// coordinate axis; its other columns span the complement. The result is
    /// re-orthonormalized against all chosen points to remove drift.
    pub fn descend(&self, x: &[f64]) -> Result<Self> {
        let k = self.dim();
        if k < 2 {
            return Err(Error::Precondition("cannot descend below dimension 1".into()));
        }
        let mut c = self.coords(x);
        if normalize(&mut c) < 1e-9 {
            return Err(Error::Precondition("point has no component in the subspace".into()));
        }
        let mut v = c.clone();
        v[0] += if c[0] >= 0.0 { 1.0 } else { -1.0 };
        let vv = dot(&v, &v);
        let mut x_unit = x.to_vec();
        normalize(&mut x_unit);
        let mut chosen = self.chosen.clone();
        chosen.push(x_unit);
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(k - 1);
        for i in 1..k {
            // column i of I - 2 v vᵀ / vᵀv
            let col: Vec<f64> = (0..k)
                .map(|j| (if i == j { 1.0 } else { 0.0 }) - 2.0 * v[j] * v[i] / vv)
                .collect();
            let mut b = self.embed(&col);
            orthogonalize(&mut b, &chosen);
            orthogonalize(&mut b, &basis);
            normalize(&mut b);
            basis.push(b);
        }
        Ok(Self {
            ambient_n: self.ambient_n,
            basis,
            chosen,
        })
    }
}

/// Two passes of modified Gram-Schmidt against orthonormal `against`.
fn orthogonalize(v: &mut [f64], against: &[Vec<f64>]) {
    for _ in 0..2 {
        for a in against {
            let p = dot(v, a);
            v.iter_mut().zip(a).for_each(|(x, y)| *x -= p * y);
        }
    }
}

fn check_point(oracle: &MembershipOracle, x: &[f64], frame: &SubspaceFrame) -> Result<()> {
    if oracle.n() != frame.ambient_n {
        return Err(Error::DimensionMismatch {
            expected: frame.ambient_n,
            got: oracle.n(),
        });
    }
    if x.len() != frame.ambient_n {
        return Err(Error::DimensionMismatch {
            expected: frame.ambient_n,
            got: x.len(),
        });
    }
    if (dot(x, x).sqrt() - 1.0).abs() > 1e-9 {
        return Err(Error::Precondition("point is not a unit vector".into()));
    }
    let r = frame.residual(x);
    if r > 1e-9 {
        return Err(Error::Precondition(format!(
            "point lies off the working subspace (residual {r:e})"
        )));
    }
    if !oracle.contains(x) {
        return Err(Error::Precondition("point is not a member of the set".into()));
    }
    Ok(())
}

/// `μ(A ∩ V ∩ x^⊥)` within the unit sphere of `V ∩ x^⊥`, `V` the working
/// subspace.
pub fn slice_density(
    oracle: &MembershipOracle,
    x: &[f64],
    frame: &SubspaceFrame,
    samples: u64,
    seed: u64,
) -> Result<McEstimate> {
    check_point(oracle, x, frame)?;
    if samples == 0 {
        return Err(Error::Domain("samples must be >= 1".into()));
    }
    let slice = frame.descend(x)?;
    Ok(estimate_mean(samples, seed, SLICE_TASK, |rng| {
        let y = slice.sample_unit(rng);
        oracle.contains(&y) as u8 as f64
    }))
}

/// One scored candidate.
#[derive(Debug, Clone, Serialize)]
pub struct Selection {
    pub x: Vec<f64>,
    pub estimate: McEstimate,
    pub candidate_means: Vec<f64>,
}

/// Indicator profile of `A ∪ -A` for an indicator profile of `A`.
fn symmetrized(profile: &ZonalProfile) -> Result<ZonalProfile> {
    let Some(iv) = profile.intervals() else {
        return Err(Error::Profile("only indicator profiles can be symmetrized".into()));
    };
    let mut all: Vec<(f64, f64)> = iv.flat_map(|(a, b)| [(a, b), (-b, -a)]).collect();
    all.sort_by(|p, q| p.0.total_cmp(&q.0));
    let mut merged: Vec<(f64, f64)> = Vec::new();
    for (a, b) in all {
        match merged.last_mut() {
            Some(last) if a <= last.1 => last.1 = last.1.max(b),
            _ => merged.push((a, b)),
        }
    }
    let bps = merged.into_iter().flat_map(|(a, b)| [a, b]).collect();
    ZonalProfile::indicator(profile.n(), bps, true)
}

type PointFilter = Box<dyn Fn(&[f64]) -> bool>;

/// The degree-2 component of the effective set restricted to the working
/// subspace, as a function of the ambient point.
fn degree2_filter(
    oracle: &MembershipOracle,
    frame: &SubspaceFrame,
) -> Result<PointFilter> {
    let Some(shape) = oracle.zonal() else {
        return Err(Error::Precondition(
            "the degree-2 candidate filter needs a zonal oracle".into(),
        ));
    };
    let profile = if oracle.symmetrize() {
        symmetrized(&shape.profile)?
    } else {
        shape.profile.clone()
    };
    let k = frame.dim();
    let mut axis = frame.embed(&frame.coords(&shape.axis));
    let r = normalize(&mut axis);
    let restricted = profile.restrict(k, r)?;
    let g2 = spectrum(&restricted, 2)?.coeffs()[2];
    let kf = k as f64;
    Ok(Box::new(move |x: &[f64]| {
        // P_{k,2}(s) = (k s² - 1)/(k - 1); only its sign matters.
        let s = dot(x, &axis);
        g2 * (kf * s * s - 1.0) <= 0.0
    }))
}

/// Draws `candidates_per_level` members of the set inside the working
/// subsphere, scores each by its slice density and keeps the best (first
/// on ties).
pub fn select_next(
    oracle: &MembershipOracle,
    frame: &SubspaceFrame,
    cfg: &FinderConfig,
    level: usize,
) -> Result<Selection> {
    cfg.validate()?;
    if frame.dim() < cfg.n0 + 1 {
        return Err(Error::Precondition(format!(
            "working dimension {} must exceed n0 = {}",
            frame.dim(),
            cfg.n0
        )));
    }
    if oracle.n() != frame.ambient_n {
        return Err(Error::DimensionMismatch {
            expected: frame.ambient_n,
            got: oracle.n(),
        });
    }
    let filter: PointFilter = match cfg.candidate_filter {
        CandidateFilter::None => Box::new(|_| true),
        CandidateFilter::Degree2NonPositive => degree2_filter(oracle, frame)?,
    };
    let mut rng = substream(cfg.seed, CANDIDATE_TASK, level as u64);
    let mut candidates = Vec::with_capacity(cfg.candidates_per_level);
    let mut misses = 0u64;
    while candidates.len() < cfg.candidates_per_level {
        let y = frame.sample_unit(&mut rng);
        let member = if oracle.symmetrize() {
            oracle.sign_correct(&y)
        } else {
            oracle.raw(&y).then_some(y)
        };
        match member {
            Some(x) if filter(&x) => {
                candidates.push(x);
                misses = 0;
            }
            _ => {
                misses += 1;
                if misses >= cfg.max_rejections {
                    return Err(Error::TooSparse { attempts: misses as usize });
                }
            }
        }
    }
    let scores: Vec<McEstimate> = candidates
        .par_iter()
        .enumerate()
        .map(|(j, x)| {
            let seed = derive_seed(cfg.seed, (level as u64) << 32 | j as u64);
            slice_density(oracle, x, frame, cfg.slice_samples, seed)
        })
        .collect::<Result<_>>()?;
    let mut best = 0;
    for (j, s) in scores.iter().enumerate() {
        if s.mean > scores[best].mean {
            best = j;
        }
    }
    Ok(Selection {
        x: candidates.swap_remove(best),
        estimate: scores[best],
        candidate_means: scores.iter().map(|s| s.mean).collect(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct TerminalStats {
    pub trials: usize,
    /// Most members seen in a single trial frame.
    pub best_members: usize,
    pub mean_member_fraction: f64,
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum TerminalOutcome {
    Found {
        vectors: Vec<Vec<f64>>,
        trials_used: usize,
    },
    Failed(TerminalStats),
}

/// Haar-random orthogonal `k × k` matrix: QR of a Gaussian matrix with the
/// signs of `R`'s diagonal moved into `Q`.
pub fn haar_orthogonal<R: rand::Rng + ?Sized>(k: usize, rng: &mut R) -> DMatrix<f64> {
    let mut data = vec![0.0; k * k];
    fill_gaussian(rng, &mut data);
    let qr = DMatrix::from_vec(k, k, data).qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..k {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// Tries random orthonormal frames of the working subspace until one lies
/// in the set (each vector sign-corrected when the oracle symmetrizes).
pub fn terminal_search(
    oracle: &MembershipOracle,
    frame: &SubspaceFrame,
    cfg: &FinderConfig,
) -> Result<TerminalOutcome> {
    cfg.validate()?;
    let k = frame.dim();
    let expected = cfg.n0.min(frame.ambient_n);
    if k != expected {
        return Err(Error::Precondition(format!(
            "terminal search needs working dimension {expected}, got {k}"
        )));
    }
    let mut rng = substream(cfg.seed, TERMINAL_TASK, 0);
    let mut best_members = 0;
    let mut member_total = 0usize;
    for trial in 0..cfg.terminal_trials {
        let q = haar_orthogonal(k, &mut rng);
        let mut vectors = Vec::with_capacity(k);
        for j in 0..k {
            let coords: Vec<f64> = q.column(j).iter().copied().collect();
            let mut v = frame.embed(&coords);
            orthogonalize(&mut v, frame.chosen());
            normalize(&mut v);
            let member = if oracle.symmetrize() {
                oracle.sign_correct(&v)
            } else {
                oracle.raw(&v).then_some(v)
            };
            if let Some(m) = member {
                vectors.push(m);
            }
        }
        best_members = best_members.max(vectors.len());
        member_total += vectors.len();
        if vectors.len() == k {
            return Ok(TerminalOutcome::Found {
                vectors,
                trials_used: trial + 1,
            });
        }
    }
    Ok(TerminalOutcome::Failed(TerminalStats {
        trials: cfg.terminal_trials,
        best_members,
        mean_member_fraction: member_total as f64 / (cfg.terminal_trials * k) as f64,
    }))
}

#[derive(Debug, Clone, Serialize)]
pub struct LevelRecord {
    pub dim: usize,
    pub slice_density: McEstimate,
}

/// `n` pairwise orthogonal unit vectors, all members of the set.
#[derive(Debug, Clone, Serialize)]
pub struct OrthoFrame {
    pub vectors: Vec<Vec<f64>>,
    pub levels: Vec<LevelRecord>,
    pub terminal_trials_used: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct FrameVerification {
    pub count: usize,
    pub max_abs_dot: f64,
    pub max_norm_deviation: f64,
    pub all_members: bool,
    pub passed: bool,
}

impl OrthoFrame {
    /// Checks pairwise `|⟨v_i, v_j⟩| ≤ 1e-9`, `|‖v_i‖ - 1| ≤ 1e-12`, that
    /// there are `n` vectors and that each lies in `A` itself.
    pub fn verify(&self, oracle: &MembershipOracle) -> FrameVerification {
        let v = &self.vectors;
        let mut max_abs_dot: f64 = 0.0;
        for i in 0..v.len() {
            for j in 0..i {
                max_abs_dot = max_abs_dot.max(dot(&v[i], &v[j]).abs());
            }
        }
        let max_norm_deviation = v
            .iter()
            .map(|x| (dot(x, x).sqrt() - 1.0).abs())
            .fold(0.0, f64::max);
        let all_members = v.iter().all(|x| x.len() == oracle.n() && oracle.raw(x));
        FrameVerification {
            count: v.len(),
            max_abs_dot,
            max_norm_deviation,
            all_members,
            passed: v.len() == oracle.n()
                && max_abs_dot <= 1e-9
                && max_norm_deviation <= 1e-12
                && all_members,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FinderFailure {
    pub level_reached: usize,
    pub densities: Vec<f64>,
    pub reason: String,
    pub terminal: Option<TerminalStats>,
}

impl std::fmt::Display for FinderFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "frame search failed at level {}: {}", self.level_reached, self.reason)
    }
}

/// Runs `n - n0` greedy levels and a terminal search.
pub fn find_orthogonal_frame(
    oracle: &MembershipOracle,
    cfg: &FinderConfig,
) -> std::result::Result<OrthoFrame, FinderFailure> {
    let fail = |level, densities: &[f64], reason: String| FinderFailure {
        level_reached: level,
        densities: densities.to_vec(),
        reason,
        terminal: None,
    };
    if let Err(e) = cfg.validate() {
        return Err(fail(0, &[], e.to_string()));
    }
    let n = oracle.n();
    if n < 1 {
        return Err(fail(0, &[], "ambient dimension must be >= 1".into()));
    }
    let mut frame = SubspaceFrame::full(n);
    let mut levels = Vec::new();
    let mut densities = Vec::new();
    let stop = cfg.n0.min(n);
    let mut level = 0;
    while frame.dim() > stop {
        let sel = select_next(oracle, &frame, cfg, level).map_err(|e| fail(level, &densities, e.to_string()))?;
        frame = frame
            .descend(&sel.x)
            .map_err(|e| fail(level, &densities, e.to_string()))?;
        densities.push(sel.estimate.mean);
        levels.push(LevelRecord {
            dim: frame.dim() + 1,
            slice_density: sel.estimate,
        });
        level += 1;
    }
    match terminal_search(oracle, &frame, cfg) {
        Ok(TerminalOutcome::Found {
            vectors,
            trials_used,
        }) => {
            let mut all = frame.chosen().to_vec();
            all.extend(vectors);
            Ok(OrthoFrame {
                vectors: all,
                levels,
                terminal_trials_used: trials_used,
            })
        }
        Ok(TerminalOutcome::Failed(stats)) => Err(FinderFailure {
            level_reached: level,
            densities,
            reason: format!("no member frame in {} terminal trials", stats.trials),
            terminal: Some(stats),
        }),
        Err(e) => Err(fail(level, &densities, e.to_string())),
    }
}

/// `E_{x ∈ A} μ(A ∩ x^⊥)` for `x` uniform in `A`: `outer` points by
/// rejection sampling, each slice estimated with `inner` samples.
pub fn slice_average(oracle: &MembershipOracle, outer: u64, inner: u64, seed: u64) -> Result<McEstimate> {
    let n = oracle.n();
    if n < 2 {
        return Err(Error::Domain("slices need n >= 2".into()));
    }
    if outer == 0 || inner == 0 {
        return Err(Error::Domain("sample counts must be >= 1".into()));
    }
    let full = SubspaceFrame::full(n);
    // Refuse sets too thin for rejection sampling before fanning out.
    let mut probe = substream(seed, AVERAGE_TASK, u64::MAX);
    if !(0..1_000_000).any(|_| oracle.contains(&full.sample_unit(&mut probe))) {
        return Err(Error::TooSparse { attempts: 1_000_000 });
    }
    Ok(estimate_mean(outer, seed, AVERAGE_TASK, |rng| {
        let x = loop {
            let x = full.sample_unit(rng);
            if oracle.contains(&x) {
                break x;
            }
        };
        let slice = full.descend(&x).expect("n >= 2");
        let hits = (0..inner)
            .filter(|_| oracle.contains(&slice.sample_unit(rng)))
            .count();
        hits as f64 / inner as f64
    }))
}

/// `E_{x ∈ A}[μ(A ∩ x^⊥)] · μ(A)` against the zonal `G_0(f, f)`.
#[derive(Debug, Clone, Serialize)]
pub struct SlicingCheck {
    pub n: usize,
    pub density: f64,
    pub average_slice: McEstimate,
    pub lhs: f64,
    pub lhs_stderr: f64,
    pub g0: GtValue,
    pub agrees: bool,
}

pub fn slicing_identity_check(
    profile: &ZonalProfile,
    d_max: usize,
    outer: u64,
    inner: u64,
    seed: u64,
) -> Result<SlicingCheck> {
    let n = profile.n();
    let mu = density(profile, &make_quadrature(n, 1)?)?;
    let fs = spectrum(profile, d_max)?;
    let g0 = g_t_zonal(&fs, &fs, 0.0)?;
    let oracle = MembershipOracle::from_zonal_e1(profile.clone())?;
    let average_slice = slice_average(&oracle, outer, inner, seed)?;
    let lhs = average_slice.mean * mu;
    let lhs_stderr = average_slice.stderr * mu;
    Ok(SlicingCheck {
        n,
        density: mu,
        agrees: (lhs - g0.value).abs() <= 3.0 * lhs_stderr + g0.tail_bound,
        average_slice,
        lhs,
        lhs_stderr,
        g0,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct FrameRun {
    pub seed: u64,
    pub success: bool,
    pub verification: Option<FrameVerification>,
    pub failure: Option<FinderFailure>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FrameSuite {
    pub n: usize,
    pub runs: Vec<FrameRun>,
    pub successes: usize,
    pub success_rate: f64,
    /// Every returned frame passed [`OrthoFrame::verify`].
    pub all_verified: bool,
}

/// Runs the finder once per seed, verifying every returned frame.
pub fn frame_suite(oracle: &MembershipOracle, base: &FinderConfig, seeds: &[u64]) -> FrameSuite {
    let runs: Vec<FrameRun> = seeds
        .iter()
        .map(|&seed| {
            let cfg = FinderConfig {
                seed,
                ..base.clone()
            };
            match find_orthogonal_frame(oracle, &cfg) {
                Ok(frame) => {
                    let v = frame.verify(oracle);
                    FrameRun {
                        seed,
                        success: v.passed,
                        verification: Some(v),
                        failure: None,
                    }
                }
                Err(f) => FrameRun {
                    seed,
                    success: false,
                    verification: None,
                    failure: Some(f),
                },
            }
        })
        .collect();
    let successes = runs.iter().filter(|r| r.success).count();
    FrameSuite {
        n: oracle.n(),
        all_verified: runs
            .iter()
            .all(|r| r.verification.as_ref().is_none_or(|v| v.passed)),
        success_rate: successes as f64 / runs.len().max(1) as f64,
        successes,
        runs,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zonal::{cap_measure, cap_threshold};

    fn band(n: usize, tau: f64) -> MembershipOracle {
        MembershipOracle::from_zonal_e1(ZonalProfile::band(n, tau).unwrap()).unwrap()
    }

    fn e(n: usize, i: usize) -> Vec<f64> {
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        v
    }

    #[test]
    fn descend_keeps_orthonormality() {
        let mut rng = substream(1, 0, 0);
        let mut f = SubspaceFrame::full(9);
        while f.dim() > 2 {
            let x = f.sample_unit(&mut rng);
            f = f.descend(&x).unwrap();
            for (i, a) in f.basis().iter().enumerate() {
                assert!((dot(a, a) - 1.0).abs() < 1e-12);
                for b in &f.basis()[..i] {
                    assert!(dot(a, b).abs() < 1e-12);
                }
                for c in f.chosen() {
                    assert!(dot(a, c).abs() < 1e-12);
                }
            }
            assert_eq!(f.dim() + f.chosen().len(), 9);
        }
    }

    #[test]
    fn slice_of_full_sphere_is_full() {
        let o = MembershipOracle::full_sphere(6);
        let est = slice_density(&o, &e(6, 2), &SubspaceFrame::full(6), 1000, 3).unwrap();
        assert_eq!(est.mean, 1.0);
    }

    #[test]
    fn band_slice_through_equator_point() {
        // x = e_2 ⟂ e_1: the slice is the band |t| < τ on S^3.
        let (n, tau) = (5, 0.4);
        let o = band(n, tau);
        let est = slice_density(&o, &e(n, 1), &SubspaceFrame::full(n), 200_000, 8).unwrap();
        let exact = 1.0 - 2.0 * cap_measure(n - 1, tau).unwrap();
        assert!(est.agrees_with(exact, 3.0, 0.0), "{est:?} vs {exact}");
    }

    #[test]
    fn cap_complement_slice_grows() {
        let (n, eps) = (8, 0.05);
        let o = MembershipOracle::from_zonal_e1(ZonalProfile::cap_complement(n, eps).unwrap()).unwrap();
        let est = slice_density(&o, &e(n, 3), &SubspaceFrame::full(n), 100_000, 2).unwrap();
        let tau = cap_threshold(n, eps).unwrap();
        let exact = 1.0 - cap_measure(n - 1, tau).unwrap();
        assert!(exact >= 0.9);
        assert!(est.agrees_with(exact, 3.0, 0.0), "{est:?} vs {exact}");
    }

    #[test]
    fn slice_preconditions() {
        let o = band(4, 0.3);
        let f = SubspaceFrame::full(4);
        assert!(slice_density(&o, &e(4, 0), &f, 10, 0).is_err());
        let sub = f.descend(&e(4, 1)).unwrap();
        assert!(slice_density(&o, &e(4, 1), &sub, 10, 0).is_err());
        assert!(slice_density(&o, &[0.0, 2.0, 0.0, 0.0], &f, 10, 0).is_err());
    }

    #[test]
    fn select_next_is_argmax() {
        let o = band(8, 1.5 / 8f64.sqrt());
        let cfg = FinderConfig::with_seed(4);
        let s = select_next(&o, &SubspaceFrame::full(8), &cfg, 0).unwrap();
        let top = s.candidate_means.iter().cloned().fold(f64::MIN, f64::max);
        assert_eq!(s.estimate.mean, top);
        assert!(o.raw(&s.x));
        let full = MembershipOracle::full_sphere(6);
        let s = select_next(&full, &SubspaceFrame::full(6), &cfg, 0).unwrap();
        assert_eq!(s.estimate.mean, 1.0);
    }

    #[test]
    fn select_next_reports_sparse_sets() {
        let empty = MembershipOracle::new(5, "empty", std::sync::Arc::new(|_| false));
        let cfg = FinderConfig {
            max_rejections: 500,
            ..FinderConfig::default()
        };
        let err = select_next(&empty, &SubspaceFrame::full(5), &cfg, 0).unwrap_err();
        assert_eq!(err, Error::TooSparse { attempts: 500 });
    }

    #[test]
    fn scoring_is_thread_count_independent() {
        let o = band(7, 0.6);
        let cfg = FinderConfig::with_seed(10);
        let a = select_next(&o, &SubspaceFrame::full(7), &cfg, 2).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| select_next(&o, &SubspaceFrame::full(7), &cfg, 2).unwrap());
        assert_eq!(a.x, b.x);
        assert_eq!(a.candidate_means, b.candidate_means);
    }

    #[test]
    fn haar_matrix_is_orthogonal() {
        let mut rng = substream(2, 0, 0);
        let q = haar_orthogonal(5, &mut rng);
        let err = (q.transpose() * &q - DMatrix::identity(5, 5)).abs().max();
        assert!(err < 1e-14);
    }

    #[test]
    fn terminal_search_on_full_sphere_succeeds_first() {
        let o = MembershipOracle::full_sphere(4);
        let cfg = FinderConfig::default();
        match terminal_search(&o, &SubspaceFrame::full(4), &cfg).unwrap() {
            TerminalOutcome::Found { trials_used, vectors } => {
                assert_eq!(trials_used, 1);
                assert_eq!(vectors.len(), 4);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn terminal_search_in_band_equator() {
        // n0 = 3 inside the equator x_1 = 0, which the band contains.
        let n = 6;
        let o = band(n, 1.0 / (n as f64).sqrt());
        let sub = SubspaceFrame::from_basis(n, vec![e(n, 1), e(n, 3), e(n, 5)]).unwrap();
        let cfg = FinderConfig {
            n0: 3,
            ..FinderConfig::default()
        };
        let TerminalOutcome::Found { vectors, .. } = terminal_search(&o, &sub, &cfg).unwrap() else {
            panic!("no frame");
        };
        for (i, a) in vectors.iter().enumerate() {
            assert!(o.raw(a));
            for b in &vectors[..i] {
                assert!(dot(a, b).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn terminal_failure_carries_stats() {
        let o = MembershipOracle::from_zonal_e1(ZonalProfile::cap(4, 0.9).unwrap()).unwrap();
        let cfg = FinderConfig {
            terminal_trials: 20,
            ..FinderConfig::default()
        };
        let TerminalOutcome::Failed(stats) = terminal_search(&o, &SubspaceFrame::full(4), &cfg).unwrap() else {
            panic!("a thin cap cannot hold an orthogonal frame");
        };
        assert_eq!(stats.trials, 20);
        assert!(stats.best_members <= 1);
    }

    #[test]
    fn full_sphere_frame() {
        let o = MembershipOracle::full_sphere(10);
        let f = find_orthogonal_frame(&o, &FinderConfig::with_seed(1)).unwrap();
        assert!(f.verify(&o).passed);
        assert_eq!(f.levels.len(), 6);
    }

    #[test]
    fn band_frame_is_deterministic() {
        let o = band(8, 1.5 / 8f64.sqrt()).with_symmetrize(true);
        let cfg = FinderConfig::with_seed(3);
        let a = find_orthogonal_frame(&o, &cfg).unwrap();
        let b = find_orthogonal_frame(&o, &cfg).unwrap();
        assert!(a.verify(&o).passed, "{:?}", a.verify(&o));
        assert_eq!(a.vectors, b.vectors);
    }

    #[test]
    fn sign_correction_lands_in_a() {
        // A = cap complement without the symmetric closure taken into account:
        // the symmetrized set is the sphere, the output must still be in A.
        let o = MembershipOracle::from_zonal_e1(ZonalProfile::cap_complement(6, 0.3).unwrap())
            .unwrap()
            .with_symmetrize(true);
        let f = find_orthogonal_frame(&o, &FinderConfig::with_seed(5)).unwrap();
        assert!(f.verify(&o).passed);
    }

    #[test]
    fn degree2_filter_mode() {
        let o = band(8, 1.5 / 8f64.sqrt()).with_symmetrize(true);
        let cfg = FinderConfig {
            candidate_filter: CandidateFilter::Degree2NonPositive,
            ..FinderConfig::with_seed(2)
        };
        let f = find_orthogonal_frame(&o, &cfg).unwrap();
        assert!(f.verify(&o).passed);
        let plain = MembershipOracle::new(8, "plain", std::sync::Arc::new(|_| true));
        assert!(find_orthogonal_frame(&plain, &cfg).is_err());
    }

    #[test]
    fn slicing_identity_for_band() {
        let p = ZonalProfile::band(5, 1.0 / 5f64.sqrt()).unwrap();
        let c = slicing_identity_check(&p, 20, 20_000, 64, 6).unwrap();
        assert!(c.agrees, "{c:?}");
    }

    #[test]
    fn suite_counts_successes() {
        let s = frame_suite(&MembershipOracle::full_sphere(6), &FinderConfig::default(), &[1, 2, 3]);
        assert_eq!(s.successes, 3);
        assert!(s.all_verified);
    }

    #[test]
    fn symmetrized_profile_merges_mirrors() {
        let cap = ZonalProfile::cap(3, 0.5).unwrap();
        assert_eq!(symmetrized(&cap).unwrap().breakpoints().unwrap(), &[-1.0, -0.5, 0.5, 1.0]);
        let cc = ZonalProfile::cap_complement(3, 0.2).unwrap();
        assert_eq!(symmetrized(&cc).unwrap().breakpoints().unwrap(), &[-1.0, 1.0]);
    }

    #[test]
    fn small_ambient_dimension_goes_straight_to_terminal() {
        let o = MembershipOracle::full_sphere(3);
        let f = find_orthogonal_frame(&o, &FinderConfig::with_seed(0)).unwrap();
        assert_eq!(f.vectors.len(), 3);
        assert!(f.levels.is_empty());
    }

    #[test]
    fn invalid_config_is_a_failure_report() {
        let cfg = FinderConfig {
            n0: 1,
            ..FinderConfig::default()
        };
        let err = find_orthogonal_frame(&MembershipOracle::full_sphere(5), &cfg).unwrap_err();
        assert_eq!(err.level_reached, 0);
        assert!(err.reason.contains("n0"));
    }
}
