use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};

use super::{
    usage, CliError, Command, FilterArg, FindFrameArgs, GegenbauerArgs, GtArgs, SpectrumArgs,
    Status, Suite, VerifyArgs,
};
use crate::frame_finder::{
    find_orthogonal_frame, slicing_identity_check, CandidateFilter, FinderConfig,
};
use crate::gegenbauer::{
    dim_harmonic, dim_harmonic_f64, gegenbauer_eval, gegenbauer_eval_explicit, gegenbauer_zero,
    HarmonicIndex, EXPLICIT_MAX_DEGREE,
};
use crate::inequalities::{
    budget_chain, check_level_d, conversion_check, zero_bound_sweep, hypercontractivity_suite,
    level_d_suite, nonpositive_suite, sphere_moment_suite, BudgetParams, BudgetStatus,
    LevelDParams, LevelDStatus, DEFAULT_C, DEFAULT_EPS0,
};
use crate::montecarlo::{
    derive_seed, gt_cross_check, noise_operator_check, quadratic_nonpositive_measure_eigen,
    substream, HarmonicTestFn, MembershipOracle, TracelessQuadratic,
};
use crate::zonal::{density, make_quadrature, spectrum, ZonalProfile};

type Outcome = Result<(Status, Value), CliError>;

fn to_value<T: Serialize>(v: &T) -> Result<Value, CliError> {
    serde_json::to_value(v).map_err(|e| CliError::Io(format!("serialization: {e}")))
}

fn status(ok: bool) -> Status {
    if ok {
        Status::Ok
    } else {
        Status::Fail
    }
}

fn need_seed(seed: Option<u64>, what: &str) -> Result<u64, CliError> {
    seed.ok_or_else(|| usage(format!("--seed is required for {what}")))
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), CliError> {
    let io = |e: csv::Error| CliError::Io(format!("{}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    for r in rows {
        w.serialize(r).map_err(io)?;
    }
    w.flush().map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn profile_value(p: &ZonalProfile) -> Value {
    p.to_spec().map(|s| json!(s)).unwrap_or(Value::Null)
}

pub(super) fn run(command: &Command, seed: Option<u64>) -> Outcome {
    match command {
        Command::Gegenbauer(a) => gegenbauer(a),
        Command::Spectrum(a) => spectrum_cmd(a),
        Command::Gt(a) => gt(a, seed),
        Command::Verify(a) => verify(a, seed),
        Command::FindFrame(a) => find_frame(a, seed),
    }
}

#[derive(Serialize)]
struct ZeroRow {
    d: usize,
    p_zero: f64,
    bound: f64,
}

fn gegenbauer(a: &GegenbauerArgs) -> Outcome {
    if let Some(d_max) = a.sweep_zero {
        let nf = a.n as f64;
        let bound = 15.0 / (nf * nf * nf);
        let rows = (0..=d_max)
            .map(|d| {
                Ok(ZeroRow {
                    d,
                    p_zero: gegenbauer_zero(HarmonicIndex::new(a.n, d)?),
                    bound,
                })
            })
            .collect::<crate::Result<Vec<_>>>()?;
        if let Some(path) = &a.csv {
            write_csv(path, &rows)?;
        }
        return Ok((Status::Ok, json!({ "n": a.n, "rows": rows })));
    }
    let (Some(d), Some(t)) = (a.d, a.t) else {
        return Err(usage("gegenbauer needs --d and --t (or --sweep-zero)"));
    };
    let idx = HarmonicIndex::new(a.n, d)?;
    let value = gegenbauer_eval(idx, t)?;
    let explicit = if d <= EXPLICIT_MAX_DEGREE {
        gegenbauer_eval_explicit(idx, t).ok()
    } else {
        None
    };
    let dim = dim_harmonic(idx).ok().map(|v| v.to_string());
    if let Some(path) = &a.csv {
        write_csv(path, &[json!({"n": a.n, "d": d, "t": t, "value": value})])?;
    }
    Ok((
        Status::Ok,
        json!({
            "n": a.n,
            "d": d,
            "t": t,
            "value": value,
            "explicit": explicit,
            "zero": gegenbauer_zero(idx),
            "dim": dim,
        }),
    ))
}

#[derive(Serialize)]
struct SpectrumRow {
    d: usize,
    coeff: f64,
    dim: f64,
    component_norm_sq: f64,
}

fn spectrum_cmd(a: &SpectrumArgs) -> Outcome {
    let profile = a.set.profile()?;
    let s = spectrum(&profile, a.d_max)?;
    let rows = (0..=a.d_max)
        .map(|d| {
            Ok(SpectrumRow {
                d,
                coeff: s.coeffs()[d],
                dim: dim_harmonic_f64(HarmonicIndex::new(s.n(), d)?),
                component_norm_sq: s.component_norm_sq(d)?,
            })
        })
        .collect::<crate::Result<Vec<_>>>()?;
    if let Some(path) = &a.csv {
        write_csv(path, &rows)?;
    }
    Ok((
        Status::Ok,
        json!({
            "profile": profile_value(&profile),
            "n": s.n(),
            "d_max": s.d_max(),
            "density": s.coeffs()[0],
            "norm_sq": s.norm_sq(),
            "tail_norm_sq": s.tail_norm_sq(),
            "components": rows,
        }),
    ))
}

fn gt(a: &GtArgs, seed: Option<u64>) -> Outcome {
    let seed = need_seed(seed, "gt")?;
    let f = a.set.profile()?;
    let h = match &a.h {
        Some(name) => a.set.profile_named(name)?,
        None => f.clone(),
    };
    let check = gt_cross_check(&f, &h, a.t, a.d_max, a.samples, seed)?;
    Ok((
        status(check.agrees),
        json!({ "f": profile_value(&f), "h": profile_value(&h), "check": check }),
    ))
}

fn verify(a: &VerifyArgs, seed: Option<u64>) -> Outcome {
    let seed = if a.suite.randomized() {
        Some(need_seed(seed, "randomized suites")?)
    } else {
        seed
    };
    let (ok, mut result) = match a.suite {
        Suite::Gegenbauer => suite_gegenbauer(a)?,
        Suite::ZeroBound => suite_zero_bound(a)?,
        Suite::Densities => suite_densities(a)?,
        Suite::LevelD => suite_level_d(a)?,
        Suite::Gt => suite_gt(a, seed.unwrap())?,
        Suite::Hypercontractivity => suite_hypercontractivity(a, seed.unwrap())?,
        Suite::Noise => suite_noise(a, seed.unwrap())?,
        Suite::Quadratic => suite_quadratic(a, seed.unwrap())?,
        Suite::Slicing => suite_slicing(a, seed.unwrap())?,
        Suite::Frames => suite_frames(a, seed.unwrap())?,
        Suite::Budget => suite_budget(a)?,
    };
    if let Value::Object(map) = &mut result {
        map.insert("suite".into(), to_value(&a.suite)?);
        map.insert("passed".into(), Value::Bool(ok));
    }
    Ok((status(ok), result))
}

type SuiteOutcome = Result<(bool, Value), CliError>;

fn suite_gegenbauer(a: &VerifyArgs) -> SuiteOutcome {
    let n_max = a.n_max.unwrap_or(50);
    let d_max = a.d_max.unwrap_or(20);
    let ts: Vec<f64> = (0..100).map(|i| -1.0 + 2.0 * i as f64 / 99.0).collect();
    let mut oracle_err: f64 = 0.0;
    let mut parity_err: f64 = 0.0;
    let mut max_abs: f64 = 0.0;
    for n in 2..=n_max {
        for d in 0..=d_max.min(EXPLICIT_MAX_DEGREE) {
            let idx = HarmonicIndex::new(n, d)?;
            for &t in &ts {
                let r = gegenbauer_eval(idx, t)?;
                let e = gegenbauer_eval_explicit(idx, t)?;
                oracle_err = oracle_err.max((r - e).abs() / r.abs().max(1.0));
                let m = gegenbauer_eval(idx, -t)?;
                let sign = if d % 2 == 0 { 1.0 } else { -1.0 };
                parity_err = parity_err.max((m - sign * r).abs());
                max_abs = max_abs.max(r.abs());
            }
        }
    }
    let mut closed_err: f64 = 0.0;
    for n in 2..=100usize {
        let nf = n as f64;
        let forms = [
            (2, -1.0 / (nf - 1.0)),
            (4, 3.0 / (nf * nf - 1.0)),
            (6, -15.0 / ((nf * nf - 1.0) * (nf + 3.0))),
        ];
        for (d, exact) in forms {
            let idx = HarmonicIndex::new(n, d)?;
            closed_err = closed_err
                .max((gegenbauer_eval(idx, 0.0)? - exact).abs())
                .max((gegenbauer_zero(idx) - exact).abs());
        }
    }
    let mut norm_err: f64 = 0.0;
    for n in 2..=200 {
        for d in 0..=30 {
            norm_err = norm_err.max((gegenbauer_eval(HarmonicIndex::new(n, d)?, 1.0)? - 1.0).abs());
        }
    }
    let mut orth_err: f64 = 0.0;
    for n in [2, 3, 5, 10, 50] {
        let rule = make_quadrature(n, 32)?;
        for d in 0..=15 {
            for e in 0..d {
                let (p, q) = (HarmonicIndex::new(n, d)?, HarmonicIndex::new(n, e)?);
                let v = rule.integrate(|t| gegenbauer_eval(p, t).unwrap() * gegenbauer_eval(q, t).unwrap());
                orth_err = orth_err.max(v.abs());
            }
        }
    }
    let ok = oracle_err <= 1e-10
        && closed_err <= 1e-12
        && norm_err <= 1e-12
        && max_abs <= 1.0 + 1e-9
        && parity_err <= 1e-12
        && orth_err <= 1e-10;
    Ok((
        ok,
        json!({
            "n_max": n_max,
            "d_max": d_max,
            "arguments": ts.len(),
            "max_oracle_rel_error": oracle_err,
            "max_closed_form_error": closed_err,
            "max_normalization_error": norm_err,
            "max_abs_value": max_abs,
            "max_parity_error": parity_err,
            "max_orthogonality_error": orth_err,
        }),
    ))
}

fn suite_zero_bound(a: &VerifyArgs) -> SuiteOutcome {
    let n_max = a.n_max.unwrap_or(500);
    let d_max = a.d_max.unwrap_or(40);
    let r = zero_bound_sweep(2..=n_max, 6..=d_max)?;
    if let Some(path) = &a.csv {
        let mut rows = Vec::new();
        for n in 2..=n_max {
            let nf = n as f64;
            for d in (6..=d_max).step_by(2) {
                rows.push(json!({"n": n, "d": d, "abs_p_zero": gegenbauer_zero(HarmonicIndex::new(n, d)?).abs(), "bound": 15.0 / (nf * nf * nf)}));
            }
        }
        write_csv(path, &rows)?;
    }
    Ok((r.violations.is_empty(), to_value(&r)?))
}

#[derive(Serialize)]
struct DensityRow {
    n: usize,
    double_cap: f64,
    band: f64,
}

const DENSITY_NS: &[usize] = &[3, 5, 10, 20, 50, 100, 200, 500, 1000, 2000, 5000, 10_000];

fn zonal_density(p: &ZonalProfile) -> Result<f64, CliError> {
    Ok(density(p, &make_quadrature(p.n(), 1)?)?)
}

fn suite_densities(a: &VerifyArgs) -> SuiteOutcome {
    let a0 = zonal_density(&ZonalProfile::double_cap(3, std::f64::consts::FRAC_1_SQRT_2)?)?;
    let a1 = zonal_density(&ZonalProfile::band(10_000, 0.01)?)?;
    let a0_expected = 1.0 - std::f64::consts::FRAC_1_SQRT_2;
    let a0_ok = (a0 - a0_expected).abs() <= 1e-6;
    let a1_ok = (a1 - 0.6827).abs() <= 0.01;
    let rows = DENSITY_NS
        .iter()
        .map(|&n| {
            Ok(DensityRow {
                n,
                double_cap: zonal_density(&ZonalProfile::double_cap(n, std::f64::consts::FRAC_1_SQRT_2)?)?,
                band: zonal_density(&ZonalProfile::band(n, 1.0 / (n as f64).sqrt())?)?,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    if let Some(path) = &a.csv {
        write_csv(path, &rows)?;
    }
    Ok((
        a0_ok && a1_ok,
        json!({
            "double_cap_n3": {"value": a0, "expected": a0_expected, "tolerance": 1e-6, "ok": a0_ok},
            "band_n10000": {"value": a1, "expected": 0.6827, "tolerance": 0.01, "ok": a1_ok},
            "sweep": rows,
        }),
    ))
}

fn summarize_level_d(reports: &[crate::inequalities::LevelDReport]) -> Value {
    let count = |s| reports.iter().filter(|r| r.status == s).count();
    json!({
        "holds": count(LevelDStatus::Holds),
        "violated": count(LevelDStatus::Violated),
        "not_applicable": count(LevelDStatus::NotApplicable),
    })
}

fn suite_level_d(a: &VerifyArgs) -> SuiteOutcome {
    let reports = if a.set.is_given() {
        let profile = a.set.profile()?;
        let dens = zonal_density(&profile)?;
        let alpha = dens.min(1.0 - dens);
        let top = if alpha > 0.0 { LevelDParams::max_degree(alpha) } else { 0 };
        (0..=top)
            .map(|d| check_level_d(&profile, d))
            .collect::<crate::Result<Vec<_>>>()?
    } else {
        let eps: Vec<f64> = a.set.eps.map_or(vec![0.01, 0.05, 0.1, 0.3], |e| vec![e]);
        let ns: Vec<usize> = a.set.n.map_or(vec![5, 10, 20, 50], |n| vec![n]);
        level_d_suite(&eps, &ns)?
    };
    let ok = reports.iter().all(|r| r.holds());
    Ok((ok, json!({ "summary": summarize_level_d(&reports), "checks": reports })))
}

/// The three fixture sets used by the randomized suites: the double cap
/// `|t| > 1/√2`, the band `|t| < 1/√n` and a cap of measure 0.2.
fn fixture_sets(n: usize) -> crate::Result<Vec<(&'static str, ZonalProfile)>> {
    Ok(vec![
        ("double_cap", ZonalProfile::double_cap(n, std::f64::consts::FRAC_1_SQRT_2)?),
        ("band", ZonalProfile::band(n, 1.0 / (n as f64).sqrt())?),
        ("cap", ZonalProfile::cap_with_measure(n, 0.2)?),
    ])
}

fn suite_gt(a: &VerifyArgs, seed: u64) -> SuiteOutcome {
    let samples = a.samples.unwrap_or(1_000_000);
    let d_max = a.d_max.unwrap_or(crate::zonal::DEFAULT_D_MAX);
    let ns: Vec<usize> = a.set.n.map_or(vec![3, 5, 10], |n| vec![n]);
    let mut checks = Vec::new();
    let mut i = 0;
    for &n in &ns {
        let sets = if a.set.is_given() {
            vec![("custom", a.set.profile()?)]
        } else {
            fixture_sets(n)?
        };
        for (name, p) in sets {
            for t in [-0.5, 0.0, 0.5, 1.0] {
                let c = gt_cross_check(&p, &p, t, d_max, samples, derive_seed(seed, i))?;
                i += 1;
                checks.push(json!({ "set": name, "check": c }));
            }
        }
    }
    let ok = checks.iter().all(|c| c["check"]["agrees"] == Value::Bool(true));
    Ok((ok, json!({ "samples": samples, "d_max": d_max, "checks": checks })))
}

fn suite_hypercontractivity(a: &VerifyArgs, seed: u64) -> SuiteOutcome {
    let samples = a.samples.unwrap_or(200_000);
    let count = a.count.unwrap_or(50);
    let ns: Vec<usize> = a.set.n.map_or(vec![3, 5, 10, 20], |n| vec![n]);
    let gauss = hypercontractivity_suite(count, &ns, 4.0, samples, seed)?;
    let moment_ns: Vec<usize> = a.set.n.map_or(vec![5, 10, 20], |n| vec![n]);
    let sphere = sphere_moment_suite(&moment_ns, &[1, 2, 4], &[3.0, 4.0], samples, derive_seed(seed, 1 << 20))?;
    let mut conversions = Vec::new();
    for (i, &n) in moment_ns.iter().enumerate() {
        for (j, d) in [1, 2, 4].into_iter().enumerate() {
            conversions.push(conversion_check(n, d, samples, derive_seed(seed, (2 << 20) + (i * 3 + j) as u64))?);
        }
    }
    let ok = gauss.passed && sphere.iter().all(|c| c.holds) && conversions.iter().all(|c| c.holds);
    Ok((
        ok,
        json!({ "gaussian": gauss, "sphere_moments": sphere, "conversions": conversions }),
    ))
}

fn suite_noise(a: &VerifyArgs, seed: u64) -> SuiteOutcome {
    let samples = a.samples.unwrap_or(20_000);
    let n = a.set.n.unwrap_or(5);
    let points = a.count.unwrap_or(8);
    let mut checks = Vec::new();
    let mut i = 0;
    for d in 0..=4 {
        let f = HarmonicTestFn::zonal(n, d)?;
        for rho in [0.0, 0.5, 0.9, 1.0] {
            checks.push(noise_operator_check(&f, rho, points, samples, derive_seed(seed, i))?);
            i += 1;
        }
    }
    if n >= 2 {
        let q = TracelessQuadratic::random(n, &mut substream(seed, 1 << 40, 0))?;
        checks.push(noise_operator_check(&HarmonicTestFn::Quadratic(q), 0.5, points, samples, derive_seed(seed, i))?);
    }
    let ok = checks.iter().all(|c| c.passed);
    Ok((ok, json!({ "checks": checks })))
}

fn suite_quadratic(a: &VerifyArgs, seed: u64) -> SuiteOutcome {
    let samples = a.samples.unwrap_or(100_000);
    let count = a.count.unwrap_or(200);
    let ns: Vec<usize> = a.set.n.map_or(vec![2, 3, 4, 5, 8, 10, 16, 20], |n| vec![n]);
    let report = nonpositive_suite(count, &ns, samples, seed)?;
    let mut eigen = Vec::new();
    for (i, &n) in ns.iter().enumerate() {
        let q = TracelessQuadratic::rank_one_stress(n)?;
        let e = quadratic_nonpositive_measure_eigen(&q, samples, derive_seed(seed, (1 << 30) + i as u64))?;
        eigen.push(json!({ "n": n, "estimate": e }));
    }
    Ok((report.passed, json!({ "report": report, "stress_eigen_route": eigen })))
}

fn suite_slicing(a: &VerifyArgs, seed: u64) -> SuiteOutcome {
    let outer = a.outer.unwrap_or(20_000);
    let inner = a.inner.unwrap_or(64);
    let d_max = a.d_max.unwrap_or(crate::zonal::DEFAULT_D_MAX);
    let ns: Vec<usize> = a.set.n.map_or(vec![5, 10], |n| vec![n]);
    let mut checks = Vec::new();
    let mut i = 0;
    for &n in &ns {
        let sets = if a.set.is_given() {
            vec![("custom", a.set.profile()?)]
        } else {
            fixture_sets(n)?
        };
        for (name, p) in sets {
            let c = slicing_identity_check(&p, d_max, outer, inner, derive_seed(seed, i))?;
            i += 1;
            checks.push(json!({ "set": name, "check": c }));
        }
    }
    let ok = checks.iter().all(|c| c["check"]["agrees"] == Value::Bool(true));
    Ok((ok, json!({ "outer": outer, "inner": inner, "checks": checks })))
}

struct FrameFixture {
    name: &'static str,
    profile: ZonalProfile,
    symmetrize: bool,
}

/// Frame fixtures: a band wide enough to hold n-frames (`τ = 1.5/√n`; the
/// band `|t| < 1/√n` holds none), the cap complement of measure 0.95 with
/// and without symmetrization, and the full sphere.
fn frame_fixtures() -> crate::Result<Vec<FrameFixture>> {
    Ok(vec![
        FrameFixture {
            name: "band_wide",
            profile: ZonalProfile::band(8, 1.5 / 8f64.sqrt())?,
            symmetrize: true,
        },
        FrameFixture {
            name: "cap_complement",
            profile: ZonalProfile::cap_complement(12, 0.05)?,
            symmetrize: true,
        },
        FrameFixture {
            name: "cap_complement_unsymmetrized",
            profile: ZonalProfile::cap_complement(12, 0.05)?,
            symmetrize: false,
        },
        FrameFixture {
            name: "full",
            profile: ZonalProfile::full(16)?,
            symmetrize: true,
        },
    ])
}

fn frame_run_value(oracle: &MembershipOracle, cfg: &FinderConfig) -> (bool, Value) {
    match find_orthogonal_frame(oracle, cfg) {
        Ok(frame) => {
            let v = frame.verify(oracle);
            (
                v.passed,
                json!({
                    "seed": cfg.seed,
                    "success": v.passed,
                    "vectors": frame.vectors,
                    "levels": frame.levels,
                    "terminal_trials_used": frame.terminal_trials_used,
                    "verification": v,
                }),
            )
        }
        Err(f) => (false, json!({ "seed": cfg.seed, "success": false, "failure": f })),
    }
}

fn finder_config(a: &VerifyArgs) -> FinderConfig {
    FinderConfig {
        n0: a.n0.unwrap_or(4),
        ..FinderConfig::default()
    }
}

fn suite_frames(a: &VerifyArgs, seed: u64) -> SuiteOutcome {
    let runs = a.runs.unwrap_or(10);
    let fixtures = if a.set.is_given() {
        vec![FrameFixture {
            name: "custom",
            profile: a.set.profile()?,
            symmetrize: true,
        }]
    } else {
        frame_fixtures()?
    };
    let base = finder_config(a);
    let mut ok = true;
    let mut out = Vec::new();
    for (fi, fx) in fixtures.into_iter().enumerate() {
        let oracle = MembershipOracle::from_zonal_e1(fx.profile.clone())?.with_symmetrize(fx.symmetrize);
        let mut successes = 0;
        let mut results = Vec::new();
        for r in 0..runs {
            let cfg = FinderConfig {
                seed: derive_seed(seed, ((fi as u64) << 16) + r as u64),
                ..base.clone()
            };
            let (success, v) = frame_run_value(&oracle, &cfg);
            successes += success as usize;
            results.push(v);
        }
        let rate = successes as f64 / runs.max(1) as f64;
        ok &= rate >= 0.9;
        out.push(json!({
            "set": fx.name,
            "profile": profile_value(&fx.profile),
            "n": fx.profile.n(),
            "symmetrize": fx.symmetrize,
            "successes": successes,
            "success_rate": rate,
            "runs": results,
        }));
    }
    Ok((ok, json!({ "config": base, "fixtures": out })))
}

fn suite_budget(a: &VerifyArgs) -> SuiteOutcome {
    let p = BudgetParams::with_eps0(
        a.set.eps.unwrap_or(0.01),
        a.set.n.unwrap_or(1_000_000),
        a.n0.unwrap_or(1000),
        a.c.unwrap_or(DEFAULT_C),
        a.eps0.unwrap_or(DEFAULT_EPS0),
    )?;
    let mut r = budget_chain(&p);
    if let Some(path) = &a.csv {
        write_csv(path, &r.per_step)?;
    }
    if !a.per_step {
        r.per_step.clear();
    }
    Ok((r.status == BudgetStatus::Ok, to_value(&r)?))
}

fn find_frame(a: &FindFrameArgs, seed: Option<u64>) -> Outcome {
    let seed = need_seed(seed, "find-frame")?;
    let profile = a.set.profile()?;
    let oracle = MembershipOracle::from_zonal_e1(profile.clone())?.with_symmetrize(!a.no_symmetrize);
    let cfg = FinderConfig {
        candidates_per_level: a.candidates,
        slice_samples: a.slice_samples,
        n0: a.n0,
        terminal_trials: a.terminal_trials,
        seed,
        max_rejections: a.max_rejections,
        candidate_filter: match a.filter {
            FilterArg::None => CandidateFilter::None,
            FilterArg::Degree2 => CandidateFilter::Degree2NonPositive,
        },
    };
    cfg.validate()?;
    let (ok, run) = frame_run_value(&oracle, &cfg);
    Ok((
        status(ok),
        json!({
            "profile": profile_value(&profile),
            "n": profile.n(),
            "symmetrize": !a.no_symmetrize,
            "config": cfg,
            "run": run,
        }),
    ))
}
