use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::quadrature::AngularIntegrator;
use crate::error::{Error, Result};

/// Profile value `g(t)` of a sampled (non-indicator) zonal function.
pub type ProfileFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum ProfileKind {
    /// Indicator of a union of closed intervals. Breakpoints come in pairs:
    /// `[b0, b1] ∪ [b2, b3] ∪ ...`.
    Indicator(Vec<f64>),
    Sampled(ProfileFn),
}

impl fmt::Debug for ProfileKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProfileKind::Indicator(b) => f.debug_tuple("Indicator").field(b).finish(),
            ProfileKind::Sampled(_) => f.write_str("Sampled(<fn>)"),
        }
    }
}

/// An axially symmetric function on `S^{n-1}`, `x ↦ g(⟨x, axis⟩)`, stored
/// by its profile `g` on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct ZonalProfile {
    n: usize,
    kind: ProfileKind,
    symmetric: bool,
}

/// JSON form of an indicator profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileSpec {
    pub n: usize,
    pub kind: String,
    pub breakpoints: Vec<f64>,
    #[serde(default)]
    pub symmetric: bool,
}

const SYMMETRY_TOL: f64 = 1e-12;

fn check_n(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::Domain(format!("ambient dimension n = {n} < 2")));
    }
    Ok(())
}

fn mirror_symmetric(b: &[f64]) -> bool {
    let m = b.len();
    (0..m).all(|i| (b[i] + b[m - 1 - i]).abs() <= SYMMETRY_TOL)
}

impl ZonalProfile {
    /// Indicator of `[b0, b1] ∪ [b2, b3] ∪ ...`.
    pub fn indicator(n: usize, breakpoints: Vec<f64>, symmetric: bool) -> Result<Self> {
        check_n(n)?;
        if breakpoints.len() % 2 != 0 {
            return Err(Error::Profile(format!(
                "breakpoints must come in pairs, got {}",
                breakpoints.len()
            )));
        }
        if breakpoints.iter().any(|b| !b.is_finite() || b.abs() > 1.0) {
            return Err(Error::Profile("breakpoints must lie in [-1, 1]".into()));
        }
        if breakpoints.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::Profile("breakpoints must be sorted".into()));
        }
        if symmetric && !mirror_symmetric(&breakpoints) {
            return Err(Error::Profile(
                "symmetric flag set but breakpoints are not mirror-symmetric".into(),
            ));
        }
        Ok(Self {
            n,
            kind: ProfileKind::Indicator(breakpoints),
            symmetric,
        })
    }

    /// A sampled profile. `symmetric` asserts `g(-t) = g(t)`; it is spot-checked.
    pub fn sampled(n: usize, g: ProfileFn, symmetric: bool) -> Result<Self> {
        check_n(n)?;
        if symmetric {
            for k in 0..=64 {
                let t = k as f64 / 64.0;
                if (g(t) - g(-t)).abs() > SYMMETRY_TOL * (1.0 + g(t).abs()) {
                    return Err(Error::Profile(format!(
                        "symmetric flag set but g({t}) != g(-{t})"
                    )));
                }
            }
        }
        Ok(Self {
            n,
            kind: ProfileKind::Sampled(g),
            symmetric,
        })
    }

    pub fn full(n: usize) -> Result<Self> {
        Self::indicator(n, vec![-1.0, 1.0], true)
    }

    /// Double cap `{|t| > threshold}`.
    pub fn double_cap(n: usize, threshold: f64) -> Result<Self> {
        check_threshold(threshold)?;
        Self::indicator(n, vec![-1.0, -threshold, threshold, 1.0], true)
    }

    /// Band `{|t| < threshold}`.
    pub fn band(n: usize, threshold: f64) -> Result<Self> {
        check_threshold(threshold)?;
        Self::indicator(n, vec![-threshold, threshold], true)
    }

    /// Single cap `{t > threshold}`.
    pub fn cap(n: usize, threshold: f64) -> Result<Self> {
        if threshold.is_nan() || threshold.abs() > 1.0 {
            return Err(Error::Profile(format!("cap threshold {threshold} outside [-1, 1]")));
        }
        Self::indicator(n, vec![threshold, 1.0], false)
    }

    /// Single cap of measure `measure` around the axis.
    pub fn cap_with_measure(n: usize, measure: f64) -> Result<Self> {
        Self::cap(n, cap_threshold(n, measure)?)
    }

    /// Complement of a cap of measure `eps`: `{t <= τ}` with `μ{t > τ} = eps`.
    pub fn cap_complement(n: usize, eps: f64) -> Result<Self> {
        let tau = cap_threshold(n, eps)?;
        Self::indicator(n, vec![-1.0, tau], false)
    }

    /// Band `{|t| < τ}` of total measure `1 - eps`; its complement is a
    /// double cap of measure `eps`.
    pub fn band_with_density(n: usize, density: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&density) {
            return Err(Error::Profile(format!("band density {density} outside [0, 1]")));
        }
        // μ{|t| >= τ} = 2 μ{t > τ} = 1 - density
        let tau = cap_threshold(n, (1.0 - density) / 2.0)?;
        Self::band(n, tau)
    }

    /// Constant profile `g ≡ c`.
    pub fn constant(n: usize, c: f64) -> Result<Self> {
        Self::sampled(n, Arc::new(move |_| c), true)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> &ProfileKind {
        &self.kind
    }

    #[inline]
    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn is_indicator(&self) -> bool {
        matches!(self.kind, ProfileKind::Indicator(_))
    }

    pub fn breakpoints(&self) -> Option<&[f64]> {
        match &self.kind {
            ProfileKind::Indicator(b) => Some(b),
            ProfileKind::Sampled(_) => None,
        }
    }

    /// The included intervals of an indicator profile.
    pub fn intervals(&self) -> Option<impl Iterator<Item = (f64, f64)> + '_> {
        self.breakpoints()
            .map(|b| b.chunks_exact(2).map(|c| (c[0], c[1])))
    }

    pub fn value(&self, t: f64) -> f64 {
        match &self.kind {
            ProfileKind::Indicator(b) => {
                if b.chunks_exact(2).any(|c| c[0] <= t && t <= c[1]) {
                    1.0
                } else {
                    0.0
                }
            }
            ProfileKind::Sampled(g) => g(t),
        }
    }

    /// Membership for indicator profiles (value above 1/2 for sampled ones).
    pub fn contains(&self, t: f64) -> bool {
        self.value(t) > 0.5
    }

    /// `1 - g`. Indicator complements stay indicators.
    pub fn complement(&self) -> Self {
        match &self.kind {
            ProfileKind::Indicator(b) => {
                let mut out = Vec::with_capacity(b.len() + 2);
                let mut cursor = -1.0;
                for c in b.chunks_exact(2) {
                    if c[0] > cursor {
                        out.push(cursor);
                        out.push(c[0]);
                    }
                    cursor = c[1];
                }
                if cursor < 1.0 {
                    out.push(cursor);
                    out.push(1.0);
                }
                Self {
                    n: self.n,
                    kind: ProfileKind::Indicator(out),
                    symmetric: self.symmetric,
                }
            }
            ProfileKind::Sampled(g) => {
                let g = Arc::clone(g);
                Self {
                    n: self.n,
                    kind: ProfileKind::Sampled(Arc::new(move |t| 1.0 - g(t))),
                    symmetric: self.symmetric,
                }
            }
        }
    }

    /// Restriction to a subsphere on which the axis has norm `axis_norm`
    /// (the projection of the axis onto the subspace).
    ///
    /// For `x` in the subspace, `⟨x, axis⟩ = axis_norm · ⟨x, â⟩` with `â` the
    /// normalized projected axis, so the restricted set is zonal about `â`
    /// with breakpoints divided by `axis_norm`.
    pub fn restrict(&self, sub_n: usize, axis_norm: f64) -> Result<Self> {
        check_n(sub_n)?;
        let ProfileKind::Indicator(b) = &self.kind else {
            return Err(Error::Profile("only indicator profiles can be restricted".into()));
        };
        if axis_norm <= 1e-12 {
            let inside = self.contains(0.0);
            return Self::indicator(sub_n, if inside { vec![-1.0, 1.0] } else { vec![] }, true);
        }
        let mut out = Vec::with_capacity(b.len());
        for c in b.chunks_exact(2) {
            let lo = (c[0] / axis_norm).max(-1.0);
            let hi = (c[1] / axis_norm).min(1.0);
            if lo <= hi && lo < 1.0 && hi > -1.0 {
                out.push(lo);
                out.push(hi);
            }
        }
        Self::indicator(sub_n, out, self.symmetric)
    }

    pub fn to_spec(&self) -> Result<ProfileSpec> {
        match &self.kind {
            ProfileKind::Indicator(b) => Ok(ProfileSpec {
                n: self.n,
                kind: "indicator".into(),
                breakpoints: b.clone(),
                symmetric: self.symmetric,
            }),
            ProfileKind::Sampled(_) => Err(Error::Profile(
                "sampled profiles have no JSON representation".into(),
            )),
        }
    }

    pub fn from_spec(spec: &ProfileSpec) -> Result<Self> {
        if spec.kind != "indicator" {
            return Err(Error::Profile(format!(
                "unsupported profile kind {:?} (expected \"indicator\")",
                spec.kind
            )));
        }
        Self::indicator(spec.n, spec.breakpoints.clone(), spec.symmetric)
    }

    pub fn to_json(&self) -> Result<String> {
        let spec = self.to_spec()?;
        serde_json::to_string(&spec).map_err(|e| Error::Profile(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: ProfileSpec =
            serde_json::from_str(text).map_err(|e| Error::Profile(e.to_string()))?;
        Self::from_spec(&spec)
    }
}

fn check_threshold(threshold: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&threshold) {
        return Err(Error::Profile(format!("threshold {threshold} outside [0, 1]")));
    }
    Ok(())
}

/// `μ{x ∈ S^{n-1} : x_1 > threshold}`.
pub fn cap_measure(n: usize, threshold: f64) -> Result<f64> {
    check_n(n)?;
    let integ = AngularIntegrator::new(n, 0)?;
    Ok(integ.mass(threshold, 1.0))
}

/// Threshold `τ` with `μ{x_1 > τ} = measure`, found by bisection.
pub fn cap_threshold(n: usize, measure: f64) -> Result<f64> {
    check_n(n)?;
    if !(0.0..=1.0).contains(&measure) {
        return Err(Error::Profile(format!("cap measure {measure} outside [0, 1]")));
    }
    let integ = AngularIntegrator::new(n, 0)?;
    let (mut lo, mut hi) = (-1.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if integ.mass(mid, 1.0) > measure {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}
