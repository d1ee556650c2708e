use std::path::Path;

use clap::Args;

use super::{usage, CliError};
use crate::zonal::ZonalProfile;

pub const SET_NAMES: &[&str] = &["full", "double_cap", "band", "cap", "cap_complement"];

/// A named zonal set about `e_1`, or a profile JSON file.
#[derive(Debug, Clone, Default, Args)]
pub struct SetArgs {
    /// full, double_cap, band, cap, cap_complement, or a profile JSON path.
    #[arg(long, visible_alias = "profile", value_name = "NAME|PATH")]
    pub set: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    /// Threshold of double_cap (default 1/√2), band (default 1/√n) or cap.
    #[arg(long)]
    pub tau: Option<f64>,
    /// Missing measure of cap_complement (default 0.05) or band.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Measure of cap (default 0.2).
    #[arg(long)]
    pub measure: Option<f64>,
}

impl SetArgs {
    pub fn is_given(&self) -> bool {
        self.set.is_some()
    }

    pub fn require_n(&self) -> Result<usize, CliError> {
        self.n.ok_or_else(|| usage("--n is required"))
    }

    /// The profile named by `--set`.
    pub fn profile(&self) -> Result<ZonalProfile, CliError> {
        let name = self.set.as_deref().ok_or_else(|| usage("--set is required"))?;
        self.profile_named(name)
    }

    /// A profile by name or path, using this set's `n` and parameters.
    pub fn profile_named(&self, name: &str) -> Result<ZonalProfile, CliError> {
        if name.ends_with(".json") || Path::new(name).is_file() {
            return self.load_file(name);
        }
        let n = self.require_n()?;
        let forbid = |flag: &str, given: bool| -> Result<(), CliError> {
            if given {
                Err(usage(format!("--{flag} does not apply to set `{name}`")))
            } else {
                Ok(())
            }
        };
        let profile = match name {
            "full" => {
                forbid("tau", self.tau.is_some())?;
                forbid("eps", self.eps.is_some())?;
                forbid("measure", self.measure.is_some())?;
                ZonalProfile::full(n)?
            }
            "double_cap" => {
                forbid("eps", self.eps.is_some())?;
                forbid("measure", self.measure.is_some())?;
                ZonalProfile::double_cap(n, self.tau.unwrap_or(std::f64::consts::FRAC_1_SQRT_2))?
            }
            "band" => {
                forbid("measure", self.measure.is_some())?;
                match (self.tau, self.eps) {
                    (Some(_), Some(_)) => return Err(usage("give --tau or --eps for band, not both")),
                    (None, Some(eps)) => ZonalProfile::band_with_density(n, 1.0 - eps)?,
                    (tau, None) => ZonalProfile::band(n, tau.unwrap_or(1.0 / (n as f64).sqrt()))?,
                }
            }
            "cap" => {
                forbid("eps", self.eps.is_some())?;
                match (self.tau, self.measure) {
                    (Some(_), Some(_)) => return Err(usage("give --tau or --measure for cap, not both")),
                    (Some(tau), None) => ZonalProfile::cap(n, tau)?,
                    (None, m) => ZonalProfile::cap_with_measure(n, m.unwrap_or(0.2))?,
                }
            }
            "cap_complement" => {
                forbid("tau", self.tau.is_some())?;
                forbid("measure", self.measure.is_some())?;
                ZonalProfile::cap_complement(n, self.eps.unwrap_or(0.05))?
            }
            other => {
                return Err(usage(format!(
                    "unknown set `{other}` (expected one of {} or a .json profile)",
                    SET_NAMES.join(", ")
                )))
            }
        };
        Ok(profile)
    }

    fn load_file(&self, path: &str) -> Result<ZonalProfile, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{path}: {e}")))?;
        let profile = ZonalProfile::from_json(&text)?;
        if let Some(n) = self.n {
            if n != profile.n() {
                return Err(usage(format!("--n {n} contradicts n = {} in {path}", profile.n())));
            }
        }
        if self.tau.is_some() || self.eps.is_some() || self.measure.is_some() {
            return Err(usage("--tau/--eps/--measure do not apply to profile files"));
        }
        Ok(profile)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(set: &str, n: usize) -> SetArgs {
        SetArgs {
            set: Some(set.into()),
            n: Some(n),
            ..SetArgs::default()
        }
    }

    #[test]
    fn named_defaults() {
        let b = args("band", 4).profile().unwrap();
        assert_eq!(b.breakpoints().unwrap(), &[-0.5, 0.5]);
        let d = args("double_cap", 3).profile().unwrap();
        assert!((d.breakpoints().unwrap()[2] - 0.5f64.sqrt()).abs() < 1e-15);
        assert!(args("cap", 5).profile().is_ok());
        assert!(args("cap_complement", 5).profile().is_ok());
        assert!(args("full", 5).profile().is_ok());
    }

    #[test]
    fn rejects_mismatched_parameters() {
        let mut a = args("full", 5);
        a.tau = Some(0.2);
        assert!(a.profile().is_err());
        assert!(args("torus", 5).profile().is_err());
        let no_n = SetArgs {
            set: Some("band".into()),
            ..SetArgs::default()
        };
        assert!(no_n.profile().is_err());
    }

    #[test]
    fn profile_files() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.json");
        std::fs::write(&path, r#"{"n":3,"kind":"indicator","breakpoints":[-0.5,0.5],"symmetric":true}"#).unwrap();
        let mut a = SetArgs {
            set: Some(path.to_string_lossy().into_owned()),
            ..SetArgs::default()
        };
        assert_eq!(a.profile().unwrap().n(), 3);
        a.n = Some(4);
        assert!(a.profile().is_err());
    }
}
