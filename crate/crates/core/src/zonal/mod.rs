//! Zonal (axially symmetric) sets and functions on `S^{n-1}`.
//!
//! A zonal function `f(x) = g(⟨x, e⟩)` has a single harmonic component per
//! degree, namely `f^{=d}(x) = dim H_{n,d} · ĝ_d · P_{n,d}(⟨x, e⟩)` with the
//! Funk-Hecke coefficient `ĝ_d = ∫ g(t) P_{n,d}(t) p_n(t) dt`. Everything the
//! averaging operator `G_t` needs then reduces to one-dimensional integrals.
//!
//! Indicator profiles are integrated exactly piece by piece (composite
//! Gauss-Legendre in the angle on every interval where the indicator is 1),
//! so the discontinuities never sit inside a quadrature panel. Sampled
//! profiles use the global Gauss rule.

mod profile;
mod quadrature;

pub use profile::{cap_measure, cap_threshold, ProfileFn, ProfileKind, ProfileSpec, ZonalProfile};
pub use quadrature::{default_rule, make_quadrature, QuadratureRule};

pub(crate) use quadrature::AngularIntegrator;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gegenbauer::{dim_harmonic_f64, fill_table, gegenbauer_table, HarmonicIndex};

/// Default truncation degree for indicator spectra.
pub const DEFAULT_D_MAX: usize = 20;

/// Parseval slack tolerated before a spectrum is rejected.
pub const PARSEVAL_TOL: f64 = 1e-8;

/// Truncated Funk-Hecke spectrum of a zonal function.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HarmonicSpectrum {
    n: usize,
    d_max: usize,
    coeffs: Vec<f64>,
    norm_sq: f64,
    tail_norm_sq: f64,
}

impl HarmonicSpectrum {
    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn d_max(&self) -> usize {
        self.d_max
    }

    /// `ĝ_0, ..., ĝ_{D_max}`.
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// `‖g‖²` as integrated.
    #[inline]
    pub fn norm_sq(&self) -> f64 {
        self.norm_sq
    }

    /// Energy above `D_max`: `‖g‖² - Σ dim · ĝ_d²`, clamped at zero.
    #[inline]
    pub fn tail_norm_sq(&self) -> f64 {
        self.tail_norm_sq
    }

    fn dim(&self, d: usize) -> f64 {
        dim_harmonic_f64(HarmonicIndex::new(self.n, d).expect("n >= 2 by construction"))
    }

    /// `‖f^{=d}‖² = dim H_{n,d} · ĝ_d²`.
    pub fn component_norm_sq(&self, d: usize) -> Result<f64> {
        if d > self.d_max {
            return Err(Error::Truncation {
                degree: d,
                d_max: self.d_max,
            });
        }
        Ok(self.dim(d) * self.coeffs[d] * self.coeffs[d])
    }

    /// Profile of the projection `f^{=d}` evaluated at `t = ⟨x, axis⟩`.
    pub fn projection_profile(&self, d: usize, t: f64) -> Result<f64> {
        if d > self.d_max {
            return Err(Error::Truncation {
                degree: d,
                d_max: self.d_max,
            });
        }
        let p = crate::gegenbauer::gegenbauer_eval(HarmonicIndex::new(self.n, d)?, t)?;
        Ok(self.dim(d) * self.coeffs[d] * p)
    }

    /// Energy the truncation at `d_max` leaves out, including coefficients
    /// above `d_max` that this spectrum does carry.
    fn tail_beyond(&self, d_max: usize) -> f64 {
        let extra: f64 = (d_max + 1..=self.d_max)
            .map(|d| self.dim(d) * self.coeffs[d] * self.coeffs[d])
            .sum();
        self.tail_norm_sq + extra
    }
}

fn check_rule(profile: &ZonalProfile, rule: &QuadratureRule) -> Result<()> {
    if rule.n() != profile.n() {
        return Err(Error::DimensionMismatch {
            expected: profile.n(),
            got: rule.n(),
        });
    }
    Ok(())
}

/// `μ(A)` for an indicator profile, `∫ g(t) p_n(t) dt` in general.
pub fn density(profile: &ZonalProfile, rule: &QuadratureRule) -> Result<f64> {
    check_rule(profile, rule)?;
    match profile.kind() {
        ProfileKind::Indicator(_) => {
            let integ = AngularIntegrator::new(profile.n(), 0)?;
            Ok(profile
                .intervals()
                .expect("indicator")
                .map(|(lo, hi)| integ.mass(lo, hi))
                .sum())
        }
        ProfileKind::Sampled(g) => Ok(rule.integrate(|t| g(t))),
    }
}

/// Funk-Hecke coefficients `ĝ_0..ĝ_{D_max}` with the Parseval tail.
///
/// Fails with [`Error::Parseval`] if the captured energy exceeds `‖g‖²` by
/// more than [`PARSEVAL_TOL`], which means the integration was too coarse.
pub fn funk_hecke_spectrum(
    profile: &ZonalProfile,
    rule: &QuadratureRule,
    d_max: usize,
) -> Result<HarmonicSpectrum> {
    check_rule(profile, rule)?;
    let n = profile.n();
    let (coeffs, norm_sq) = match profile.kind() {
        ProfileKind::Indicator(_) => {
            let integ = AngularIntegrator::new(n, d_max)?;
            let mut acc = vec![0.0; d_max + 1];
            for (lo, hi) in profile.intervals().expect("indicator") {
                integ.accumulate_moments(lo, hi, &mut acc);
            }
            // g² = g for indicators
            let norm_sq = acc[0];
            (acc, norm_sq)
        }
        ProfileKind::Sampled(g) => {
            let mut acc = vec![0.0; d_max + 1];
            let mut table = vec![0.0; d_max + 1];
            let mut norm_sq = 0.0;
            for (&t, &w) in rule.nodes().iter().zip(rule.weights()) {
                let gv = g(t);
                norm_sq += w * gv * gv;
                fill_table(n, t, &mut table);
                for (a, p) in acc.iter_mut().zip(&table) {
                    *a += w * gv * p;
                }
            }
            (acc, norm_sq)
        }
    };
    let captured: f64 = coeffs
        .iter()
        .enumerate()
        .map(|(d, c)| dim_harmonic_f64(HarmonicIndex::new(n, d).expect("n >= 2")) * c * c)
        .sum();
    let excess = captured - norm_sq;
    if excess > PARSEVAL_TOL {
        return Err(Error::Parseval {
            captured,
            norm_sq,
            excess,
        });
    }
    Ok(HarmonicSpectrum {
        n,
        d_max,
        coeffs,
        norm_sq,
        tail_norm_sq: (norm_sq - captured).max(0.0),
    })
}

/// Spectrum with the default rule for `d_max`.
pub fn spectrum(profile: &ZonalProfile, d_max: usize) -> Result<HarmonicSpectrum> {
    let rule = default_rule(profile.n(), d_max)?;
    funk_hecke_spectrum(profile, &rule, d_max)
}

fn check_pair(fs: &HarmonicSpectrum, hs: &HarmonicSpectrum) -> Result<()> {
    if fs.n != hs.n {
        return Err(Error::DimensionMismatch {
            expected: fs.n,
            got: hs.n,
        });
    }
    Ok(())
}

/// `⟨f^{=d}, h^{=d}⟩ = dim H_{n,d} · f̂_d · ĥ_d` for zonal `f, h` sharing an axis.
pub fn projection_inner_product(
    fs: &HarmonicSpectrum,
    hs: &HarmonicSpectrum,
    d: usize,
) -> Result<f64> {
    check_pair(fs, hs)?;
    let d_max = fs.d_max.min(hs.d_max);
    if d > d_max {
        return Err(Error::Truncation { degree: d, d_max });
    }
    Ok(fs.dim(d) * fs.coeffs[d] * hs.coeffs[d])
}

/// Truncated value of `G_t(f, h)` with a Cauchy-Schwarz bound on the rest.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GtValue {
    pub value: f64,
    pub tail_bound: f64,
}

/// `G_t(f, h) = Σ_d P_{n,d}(t) ⟨f^{=d}, h^{=d}⟩`, summed to the common `D_max`.
///
/// The remainder is bounded by `sup_{d > D_max} |P_{n,d}(t)| · √(tail_f · tail_h)`.
/// At `t = 0` with every remaining degree `≥ 6` the supremum is at most
/// `15/n³`; elsewhere the uniform bound `1` is used.
pub fn g_t_zonal(fs: &HarmonicSpectrum, hs: &HarmonicSpectrum, t: f64) -> Result<GtValue> {
    check_pair(fs, hs)?;
    let d_max = fs.d_max.min(hs.d_max);
    let p = gegenbauer_table(fs.n, d_max, t)?;
    let value = (0..=d_max)
        .map(|d| p[d] * fs.dim(d) * fs.coeffs[d] * hs.coeffs[d])
        .sum();
    let nf = fs.n as f64;
    let surrogate = if t == 0.0 && d_max + 1 >= 6 {
        (15.0 / (nf * nf * nf)).min(1.0)
    } else {
        1.0
    };
    let tail_bound = surrogate * (fs.tail_beyond(d_max) * hs.tail_beyond(d_max)).sqrt();
    Ok(GtValue { value, tail_bound })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    fn rule(n: usize) -> QuadratureRule {
        default_rule(n, DEFAULT_D_MAX).unwrap()
    }

    #[test]
    fn double_cap_density_n3() {
        let a0 = ZonalProfile::double_cap(3, 1.0 / 2f64.sqrt()).unwrap();
        let mu = density(&a0, &rule(3)).unwrap();
        assert!((mu - (1.0 - 1.0 / 2f64.sqrt())).abs() < 1e-13);
    }

    #[test]
    fn band_density_n3() {
        let a1 = ZonalProfile::band(3, 1.0 / 3f64.sqrt()).unwrap();
        assert!((density(&a1, &rule(3)).unwrap() - 1.0 / 3f64.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn dimension_mismatch() {
        let p = ZonalProfile::full(4).unwrap();
        assert!(matches!(
            density(&p, &rule(5)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn constant_profile_spectrum() {
        let one = ZonalProfile::constant(6, 1.0).unwrap();
        let s = funk_hecke_spectrum(&one, &rule(6), 10).unwrap();
        assert!((s.coeffs()[0] - 1.0).abs() < 1e-14);
        assert!(s.coeffs()[1..].iter().all(|c| c.abs() < 1e-14));
        assert!(s.tail_norm_sq() < 1e-13);
    }

    #[test]
    fn linear_profile_spectrum() {
        for n in [2, 3, 7, 30] {
            let lin = ZonalProfile::sampled(n, Arc::new(|t| t), false).unwrap();
            let s = funk_hecke_spectrum(&lin, &rule(n), 8).unwrap();
            let nf = n as f64;
            assert!((s.coeffs()[1] - 1.0 / nf).abs() < 1e-14);
            assert!((s.component_norm_sq(1).unwrap() - 1.0 / nf).abs() < 1e-14);
            for (d, c) in s.coeffs().iter().enumerate() {
                if d != 1 {
                    assert!(c.abs() < 1e-14, "n={n} d={d} c={c}");
                }
            }
        }
    }

    #[test]
    fn symmetric_profiles_have_no_odd_coefficients() {
        for n in [3, 5, 10] {
            for p in [
                ZonalProfile::band(n, 0.3).unwrap(),
                ZonalProfile::double_cap(n, 0.6).unwrap(),
            ] {
                let s = funk_hecke_spectrum(&p, &rule(n), 20).unwrap();
                for d in (1..=20).step_by(2) {
                    assert!(s.coeffs()[d].abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn zeroth_coefficient_is_density() {
        let p = ZonalProfile::cap_with_measure(7, 0.2).unwrap();
        let r = rule(7);
        let s = funk_hecke_spectrum(&p, &r, 20).unwrap();
        assert!((s.coeffs()[0] - density(&p, &r).unwrap()).abs() < 1e-10);
        assert!((s.coeffs()[0] - 0.2).abs() < 1e-10);
    }

    #[test]
    fn parseval_holds_for_fixtures() {
        for n in [2, 3, 5, 10, 50] {
            for p in [
                ZonalProfile::band(n, 1.0 / (n as f64).sqrt()).unwrap(),
                ZonalProfile::double_cap(n, 0.5f64.sqrt()).unwrap(),
                ZonalProfile::cap_with_measure(n, 0.2).unwrap(),
            ] {
                let s = funk_hecke_spectrum(&p, &rule(n), 20).unwrap();
                let captured: f64 = (0..=20).map(|d| s.component_norm_sq(d).unwrap()).sum();
                let mu = density(&p, &rule(n)).unwrap();
                assert!((captured + s.tail_norm_sq() - mu).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn parseval_violation_is_reported() {
        // A 3-node rule aliases degrees above 5; discrete orthogonality is lost.
        let p = ZonalProfile::sampled(3, Arc::new(|t: f64| (9.0 * t).cos()), true).unwrap();
        let coarse = make_quadrature(3, 3).unwrap();
        let res = funk_hecke_spectrum(&p, &coarse, 8);
        assert!(matches!(res, Err(Error::Parseval { .. })), "{res:?}");
    }

    #[test]
    fn band_degree_two_coefficient_closed_form() {
        // n = 3: p_3 = 1/2 on [-1, 1], P_{3,2} = (3t² - 1)/2.
        // ĝ_2 = ∫_{-τ}^{τ} (3t² - 1)/4 dt = (τ³ - τ)/2.
        let tau = 1.0 / 3f64.sqrt();
        let p = ZonalProfile::band(3, tau).unwrap();
        let s = funk_hecke_spectrum(&p, &rule(3), 4).unwrap();
        let g2 = (tau.powi(3) - tau) / 2.0;
        assert!((s.coeffs()[2] - g2).abs() < 1e-14);
        let ip = projection_inner_product(&s, &s, 2).unwrap();
        assert!((ip - 5.0 * g2 * g2).abs() < 1e-14);
    }

    #[test]
    fn inner_product_with_constant() {
        let one = funk_hecke_spectrum(&ZonalProfile::constant(5, 1.0).unwrap(), &rule(5), 10)
            .unwrap();
        let band = funk_hecke_spectrum(&ZonalProfile::band(5, 0.4).unwrap(), &rule(5), 10)
            .unwrap();
        for d in 1..=10 {
            assert!(projection_inner_product(&one, &band, d).unwrap().abs() < 1e-14);
        }
        assert!(projection_inner_product(&one, &band, 11).is_err());
        let other = funk_hecke_spectrum(&ZonalProfile::band(6, 0.4).unwrap(), &rule(6), 10)
            .unwrap();
        assert!(projection_inner_product(&band, &other, 2).is_err());
    }

    #[test]
    fn g_one_is_norm() {
        let p = ZonalProfile::cap_with_measure(5, 0.3).unwrap();
        let s = spectrum(&p, 20).unwrap();
        let g = g_t_zonal(&s, &s, 1.0).unwrap();
        assert!((g.value + g.tail_bound - 0.3).abs() < 1e-10);
    }

    #[test]
    fn g_t_of_constants() {
        let one = spectrum(&ZonalProfile::constant(4, 1.0).unwrap(), 20).unwrap();
        for t in [-1.0, -0.3, 0.0, 0.9] {
            let g = g_t_zonal(&one, &one, t).unwrap();
            assert!((g.value - 1.0).abs() < 1e-13);
            assert!(g.tail_bound < 1e-6);
        }
    }

    #[test]
    fn g_t_zero_uses_sharp_surrogate() {
        let p = ZonalProfile::band(10, 0.2).unwrap();
        let s = spectrum(&p, 20).unwrap();
        let g0 = g_t_zonal(&s, &s, 0.0).unwrap();
        let g_half = g_t_zonal(&s, &s, 0.5).unwrap();
        assert!((g0.tail_bound - 15.0 / 1000.0 * s.tail_norm_sq()).abs() < 1e-18);
        assert!((g_half.tail_bound - s.tail_norm_sq()).abs() < 1e-18);
    }

    #[test]
    fn mixed_truncations_fold_into_tail() {
        let p = ZonalProfile::band(5, 0.3).unwrap();
        let short = spectrum(&p, 6).unwrap();
        let long = spectrum(&p, 20).unwrap();
        let a = g_t_zonal(&short, &long, 0.5).unwrap();
        let b = g_t_zonal(&short, &short, 0.5).unwrap();
        assert!((a.value - b.value).abs() < 1e-14);
        assert!((a.tail_bound - b.tail_bound).abs() < 1e-12);
    }
}
