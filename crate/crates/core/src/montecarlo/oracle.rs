use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::zonal::ZonalProfile;

/// Point-in-set predicate on unit vectors of `R^n`.
pub type Predicate = Arc<dyn Fn(&[f64]) -> bool + Send + Sync>;

/// Zonal description attached to oracles built from profiles.
#[derive(Debug, Clone)]
pub struct ZonalShape {
    pub profile: ZonalProfile,
    pub axis: Vec<f64>,
}

/// A deterministic membership test for a set `A ⊂ S^{n-1}`.
///
/// With `symmetrize` set the oracle answers for `A ∪ (-A)`; use
/// [`MembershipOracle::sign_correct`] to map a member of the symmetrized
/// set back into `A`. Sets must have a boundary of measure zero: points are
/// tested exactly as given.
#[derive(Clone)]
pub struct MembershipOracle {
    n: usize,
    name: String,
    predicate: Predicate,
    symmetrize: bool,
    declared_density: Option<f64>,
    zonal: Option<ZonalShape>,
}

impl fmt::Debug for MembershipOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MembershipOracle")
            .field("n", &self.n)
            .field("name", &self.name)
            .field("symmetrize", &self.symmetrize)
            .field("declared_density", &self.declared_density)
            .finish_non_exhaustive()
    }
}

impl MembershipOracle {
    pub fn new(n: usize, name: impl Into<String>, predicate: Predicate) -> Self {
        Self {
            n,
            name: name.into(),
            predicate,
            symmetrize: false,
            declared_density: None,
            zonal: None,
        }
    }

    pub fn full_sphere(n: usize) -> Self {
        Self::new(n, "full", Arc::new(|_| true)).with_declared_density(1.0)
    }

    /// `{x : g(⟨x, axis⟩) > 1/2}` for a zonal profile.
    pub fn from_zonal(profile: ZonalProfile, axis: Vec<f64>) -> Result<Self> {
        let n = profile.n();
        if axis.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: axis.len(),
            });
        }
        let norm = axis.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::Domain("zonal axis must be a nonzero vector".into()));
        }
        let axis: Vec<f64> = axis.iter().map(|a| a / norm).collect();
        let p = profile.clone();
        let a = axis.clone();
        let predicate: Predicate = Arc::new(move |x: &[f64]| {
            let t: f64 = x.iter().zip(&a).map(|(u, v)| u * v).sum();
            p.contains(t.clamp(-1.0, 1.0))
        });
        let mut oracle = Self::new(n, "zonal", predicate);
        oracle.zonal = Some(ZonalShape { profile, axis });
        Ok(oracle)
    }

    /// Zonal oracle about the first coordinate axis.
    pub fn from_zonal_e1(profile: ZonalProfile) -> Result<Self> {
        let mut axis = vec![0.0; profile.n()];
        axis[0] = 1.0;
        Self::from_zonal(profile, axis)
    }

    pub fn with_symmetrize(mut self, symmetrize: bool) -> Self {
        self.symmetrize = symmetrize;
        self
    }

    pub fn with_declared_density(mut self, density: f64) -> Self {
        self.declared_density = Some(density);
        self
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    #[inline]
    pub fn symmetrize(&self) -> bool {
        self.symmetrize
    }

    pub fn declared_density(&self) -> Option<f64> {
        self.declared_density
    }

    pub fn zonal(&self) -> Option<&ZonalShape> {
        self.zonal.as_ref()
    }

    /// Membership in `A` itself, ignoring `symmetrize`.
    #[inline]
    pub fn raw(&self, x: &[f64]) -> bool {
        (self.predicate)(x)
    }

    /// Membership in the effective set (`A ∪ -A` when symmetrized).
    pub fn contains(&self, x: &[f64]) -> bool {
        if self.raw(x) {
            return true;
        }
        if !self.symmetrize {
            return false;
        }
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        self.raw(&neg)
    }

    /// Returns `x` or `-x`, whichever lies in `A`.
    pub fn sign_correct(&self, x: &[f64]) -> Option<Vec<f64>> {
        if self.raw(x) {
            return Some(x.to_vec());
        }
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        self.raw(&neg).then_some(neg)
    }
}
