//! Manifest-driven experiment runner: a list of (check, preset, parameters)
//! items, a seed for the random data, and CSV/JSON report emission with a
//! byte-reproducibility contract.

use crate::data::{random_smooth, rough_profile, ManufacturedSolution, SmoothFieldSpec};
use crate::estimates::{
    check_comparison, check_continuity_in_data, check_evolution_law, check_interpolation_estimates,
    check_joint_continuity, check_sup_bound, measure_derivative_decay,
};
use crate::evolve::{duhamel_check, expanding_domain_study, SolverConfig};
use crate::exec;
use crate::grid::{GridFunction, UniformGrid};
use crate::hypotheses::{check_hypotheses, HypothesisSet};
use crate::measures::{
    analyze_coupling, build_system_measures, check_asymptotics, check_domination,
    check_fixed_points, check_gradient_decay, check_invariance, check_lp_bound,
    scalar_invariant_density_1d, scalar_invariant_density_stationary, CouplingAnalysis,
    MeasureVector,
};
use crate::operator::{m_bar, ScalarPart};
use crate::preset::{load_preset, Preset, PRESET_NAMES};
use crate::report::{VerificationReport, SUITE_CSV_HEADER};
use crate::resolvent::{
    check_interpolation_inequality, check_resolvent_bound, check_resolvent_consistency,
    check_resolvent_identity, manufactured_elliptic_recovery, manufactured_parabolic_recovery,
    parabolic_schauder_experiment, schauder_experiment, ResolventMethod,
};
use crate::tolerances;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::Path;

pub const CHECK_NAMES: [&str; 25] = [
    "hypotheses",
    "coupling-analysis",
    "comparison",
    "sup-bound",
    "decay",
    "interpolation-decay",
    "evolution-law",
    "continuity-data",
    "joint-continuity",
    "duhamel",
    "expanding-domain",
    "resolvent-consistency",
    "resolvent-identity",
    "resolvent-bound",
    "schauder-elliptic",
    "schauder-parabolic",
    "schauder-manufactured",
    "interpolation-inequality",
    "stationary-density",
    "invariance",
    "asymptotics",
    "lp-bound",
    "domination",
    "fixed-points",
    "gradient-decay",
];

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestItem {
    pub check: String,
    pub preset: String,
    #[serde(default)]
    pub params: serde_json::Value,
}

/// Ordered list of checks plus the seed for all random data. Identical
/// manifest + seed reproduce all outputs byte-for-byte.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuiteManifest {
    pub seed: u64,
    pub items: Vec<ManifestItem>,
}

impl SuiteManifest {
    pub fn validate(&self) -> Result<()> {
        for (i, item) in self.items.iter().enumerate() {
            if !CHECK_NAMES.contains(&item.check.as_str()) {
                return Err(Error::InvalidConfig(format!(
                    "item {i}: unknown check `{}`",
                    item.check
                )));
            }
            if !PRESET_NAMES.contains(&item.preset.as_str()) {
                return Err(Error::InvalidConfig(format!(
                    "item {i}: unknown preset `{}`",
                    item.preset
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteSummary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    pub reports: Vec<VerificationReport>,
}

impl SuiteSummary {
    pub fn all_passed(&self) -> bool {
        self.failed == 0
    }
}

fn p_f64(params: &serde_json::Value, key: &str) -> Option<f64> {
    params.get(key).and_then(|v| v.as_f64())
}

fn p_usize(params: &serde_json::Value, key: &str) -> Option<usize> {
    params.get(key).and_then(|v| v.as_u64()).map(|v| v as usize)
}

fn p_str<'a>(params: &'a serde_json::Value, key: &str) -> Option<&'a str> {
    params.get(key).and_then(|v| v.as_str())
}

struct Env {
    preset: Preset,
    grid: UniformGrid,
    cfg: SolverConfig,
    seed: u64,
}

fn environment(item: &ManifestItem, seed: u64) -> Result<Env> {
    let preset = load_preset(&item.preset)?;
    let n_g = p_usize(&item.params, "n_g").unwrap_or(preset.grid_points);
    let grid = UniformGrid::new(preset.domain, n_g)?;
    let mut cfg = SolverConfig::default();
    if let Some(theta) = p_f64(&item.params, "scheme_theta") {
        cfg = cfg.with_theta(theta);
    }
    cfg.dt = p_f64(&item.params, "dt");
    Ok(Env {
        preset,
        grid,
        cfg,
        seed,
    })
}

/// Measure pipeline shared by the section-5 checks.
fn measure_pipeline(env: &Env) -> Result<(CouplingAnalysis, MeasureVector)> {
    let op = &env.preset.operator;
    let sample_grid = UniformGrid::new(env.preset.domain, 17)?;
    let points: Vec<Vec<f64>> = (0..sample_grid.len())
        .map(|i| sample_grid.point(i))
        .collect();
    let analysis = analyze_coupling(op, &points)?;
    let scalar = ScalarPart {
        op,
        comp: 0,
        with_diagonal_potential: false,
    };
    let mu = scalar_invariant_density_stationary(&scalar, env.grid)?;
    let mv = build_system_measures(&analysis, &mu)?;
    Ok((analysis, mv))
}

fn random_field(env: &Env, localized: bool, offset: u64) -> GridFunction {
    random_smooth(
        env.grid,
        env.preset.operator.comps,
        &SmoothFieldSpec {
            localized,
            ..Default::default()
        },
        env.seed.wrapping_add(offset),
    )
}

/// Execute one manifest item.
pub fn run_check(item: &ManifestItem, seed: u64) -> Result<VerificationReport> {
    let env = environment(item, seed)?;
    let op = &env.preset.operator;
    let preset_name = env.preset.name.as_str();
    let (s0, t1) = env.preset.interval;
    let params = &item.params;
    match item.check.as_str() {
        "hypotheses" => {
            let which = match p_str(params, "which").unwrap_or("base") {
                "base" => HypothesisSet::Base,
                "smooth" => HypothesisSet::Smooth,
                "special-case" => HypothesisSet::SpecialCase,
                other => {
                    return Err(Error::InvalidConfig(format!(
                        "unknown hypothesis set `{other}`"
                    )))
                }
            };
            let mut report = check_hypotheses(
                op,
                which,
                env.preset.interval,
                env.preset.domain,
                &env.preset.sampling(),
            )?;
            if which == HypothesisSet::Base && env.preset.expected.enforce_class_conditions {
                report
                    .verdicts
                    .extend(crate::hypotheses::example_class_conditions(op));
            }
            let failing = report.verdicts.iter().filter(|(_, v)| !v.holds()).count();
            Ok(
                VerificationReport::new("hypotheses", preset_name, failing as f64, 0.0, 0.0)
                    .with_details(serde_json::to_value(&report)?),
            )
        }
        "coupling-analysis" => {
            let sample_grid = UniformGrid::new(env.preset.domain, 17)?;
            let points: Vec<Vec<f64>> = (0..sample_grid.len())
                .map(|i| sample_grid.point(i))
                .collect();
            let analysis = analyze_coupling(op, &points)?;
            let mut worst: f64 = if analysis.pass() { 0.0 } else { 1.0 };
            if let Some(expected) = &env.preset.expected.eigenvalues {
                let mut exp = expected.clone();
                exp.sort_by(|a, b| a.partial_cmp(b).unwrap());
                for per_point in analysis.eigen_c.iter().chain(&analysis.eigen_cp) {
                    for (ev, ex) in per_point.iter().zip(&exp) {
                        worst = worst.max((ev.0 - ex).abs()).max(ev.1.abs());
                    }
                }
            }
            Ok(VerificationReport::new(
                "coupling-analysis",
                preset_name,
                worst,
                0.0,
                tolerances::EXACT,
            )
            .with_details(serde_json::to_value(&analysis)?))
        }
        "comparison" => {
            let t = p_f64(params, "t").unwrap_or((t1 - s0).min(0.25));
            let f = random_field(&env, false, 1);
            check_comparison(op, s0, s0 + t, &f, &env.cfg, preset_name)
        }
        "sup-bound" => {
            let t = p_f64(params, "t").unwrap_or((t1 - s0).min(0.5));
            let trials = p_usize(params, "trials").unwrap_or(5);
            let m_j = env.preset.m_j()?;
            let mut cfg = env.cfg;
            if cfg.dt.is_none() {
                cfg = cfg.with_theta(0.5).with_dt(1e-3);
            }
            let mut worst: Option<VerificationReport> = None;
            for i in 0..trials {
                let f = random_field(&env, false, 10 + i as u64);
                let rep = check_sup_bound(op, s0, s0 + t, &f, m_j, &cfg, preset_name)?;
                worst = Some(match worst {
                    None => rep,
                    Some(prev) if rep.worst_violation > prev.worst_violation => rep,
                    Some(prev) => prev,
                });
            }
            Ok(worst.expect("at least one trial"))
        }
        "decay" => {
            let h_ord = p_usize(params, "h").unwrap_or(0);
            let k_ord = p_usize(params, "k").unwrap_or(1);
            let m_j = env.preset.m_j()?;
            let mbar = m_bar(m_j);
            let width = 5.0 * env.grid.spacing;
            let f = rough_profile(env.grid, h_ord, width);
            let f = GridFunction {
                grid: env.grid,
                data: vec![f.data[0].clone(); op.comps],
            };
            let dt = env.cfg.dt.unwrap_or(env.grid.spacing * env.grid.spacing);
            let cfg = env.cfg.with_theta(0.5).with_dt(dt);
            let horizon = p_f64(params, "t").unwrap_or(0.4);
            let fit = measure_derivative_decay(op, s0, s0 + horizon, &f, h_ord, k_ord, mbar, &cfg)?;
            let mut rep = VerificationReport::new(
                "decay",
                preset_name,
                fit.target_exponent - fit.slope,
                0.0,
                tolerances::SLOPE_TOL,
            )
            .with_details(serde_json::to_value(&fit)?);
            // Control band for the scalar heat case (h,k) = (0,1).
            if preset_name == "heat-scalar" && h_ord == 0 && k_ord == 1 {
                let in_band = fit.slope >= -0.65 && fit.slope <= -0.35;
                if !in_band {
                    rep.verdict = crate::report::Verdict::Fail;
                }
            }
            Ok(rep)
        }
        "interpolation-decay" => {
            let beta = p_f64(params, "beta").unwrap_or(0.0);
            let theta = p_f64(params, "theta").unwrap_or(1.5);
            let m_j = env.preset.m_j()?;
            let mbar = m_bar(m_j);
            let width = 5.0 * env.grid.spacing;
            let f = rough_profile(env.grid, beta.floor() as usize, width);
            let f = GridFunction {
                grid: env.grid,
                data: vec![f.data[0].clone(); op.comps],
            };
            let dt = env.cfg.dt.unwrap_or(env.grid.spacing * env.grid.spacing);
            let cfg = env.cfg.with_theta(0.5).with_dt(dt);
            // Three frozen times: the constant is claimed uniform over
            // bounded time sets, so the fitted intercepts are compared
            // (recorded; uniformity over a continuum is untestable).
            let tbars = [s0, 0.5 * (s0 + t1), t1];
            let mut fits = Vec::new();
            for tb in tbars {
                fits.push(check_interpolation_estimates(
                    op, tb, theta, beta, &f, mbar, &cfg,
                )?);
            }
            let worst = fits
                .iter()
                .map(|f| f.target_exponent - f.slope)
                .fold(f64::NEG_INFINITY, f64::max);
            let intercepts: Vec<f64> = fits.iter().map(|f| f.intercept).collect();
            let spread = intercepts.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
                - intercepts.iter().cloned().fold(f64::INFINITY, f64::min);
            Ok(VerificationReport::new(
                "interpolation-decay",
                preset_name,
                worst,
                0.0,
                tolerances::SLOPE_TOL,
            )
            .with_details(serde_json::json!({
                "frozen_times": tbars,
                "slopes": fits.iter().map(|f| f.slope).collect::<Vec<_>>(),
                "intercepts": intercepts,
                "intercept_spread": spread,
                "target_exponent": fits[0].target_exponent,
                "lags": fits[0].lags,
            })))
        }
        "evolution-law" => {
            let f = random_field(&env, false, 2);
            let t = p_f64(params, "t").unwrap_or((t1 - s0).min(0.3));
            let r = s0 + 0.37 * t;
            let dt = env.cfg.dt.unwrap_or(4e-3);
            let coarse =
                check_evolution_law(op, s0, r, s0 + t, &f, &env.cfg.with_dt(dt), preset_name)?;
            let fine = check_evolution_law(
                op,
                s0,
                r,
                s0 + t,
                &f,
                &env.cfg.with_dt(0.5 * dt),
                preset_name,
            )?;
            let gain = coarse.measured_left / fine.measured_left.max(1e-300);
            let pass = coarse.passed() && fine.passed() && gain >= tolerances::REFINEMENT_GAIN;
            let mut rep = coarse.clone();
            rep.details = serde_json::json!({
                "residual_dt": coarse.measured_left,
                "residual_dt_half": fine.measured_left,
                "gain": gain,
            });
            if !pass {
                rep.verdict = crate::report::Verdict::Fail;
            }
            Ok(rep)
        }
        "continuity-data" => {
            let f = random_field(&env, false, 3);
            let radius = env.preset.domain.radius;
            let fractions = [0.4, 0.6, 0.8, 0.95];
            let seq: Vec<GridFunction> = fractions
                .iter()
                .map(|frac| {
                    let cut = frac * radius;
                    GridFunction::from_fn(env.grid, op.comps, |k, x| {
                        let mut w = 1.0;
                        for &xi in x {
                            let s = xi.abs() / cut;
                            w *= if s <= 0.8 {
                                1.0
                            } else if s >= 1.0 {
                                0.0
                            } else {
                                (0.5 * std::f64::consts::PI * (s - 0.8) / 0.2).cos().powi(2)
                            };
                        }
                        w * f.data[k][env.grid.flat_index(
                            &x.iter()
                                .map(|xi| ((xi + radius) / env.grid.spacing).round() as usize)
                                .collect::<Vec<_>>(),
                        )]
                    })
                })
                .collect();
            let t = p_f64(params, "t").unwrap_or(0.2);
            check_continuity_in_data(
                op,
                s0,
                s0 + t,
                &seq,
                &f,
                0.25 * radius,
                &env.cfg,
                1e-2 * f.sup_norm(),
                preset_name,
            )
        }
        "joint-continuity" => {
            let f = random_field(&env, false, 4);
            check_joint_continuity(
                op,
                &f,
                env.preset.interval,
                &[0.05, 0.15],
                &env.cfg,
                preset_name,
            )
        }
        "duhamel" => {
            let f = random_field(&env, false, 5);
            let t = p_f64(params, "t").unwrap_or(0.3);
            let q = p_usize(params, "quad_points").unwrap_or(16);
            duhamel_check(
                op,
                s0,
                s0 + t,
                &f,
                &env.cfg,
                q,
                tolerances::DUHAMEL,
                preset_name,
            )
        }
        "expanding-domain" => {
            let radii = params
                .get("radii")
                .and_then(|v| v.as_array())
                .map(|a| a.iter().filter_map(|x| x.as_f64()).collect::<Vec<_>>())
                .unwrap_or_else(|| vec![4.0, 6.0, 8.0]);
            let inner = p_f64(params, "inner").unwrap_or(2.0);
            let t = p_f64(params, "t").unwrap_or(0.5);
            let largest = radii[radii.len() - 1];
            let n = (2.0 * largest / env.grid.spacing).round() as usize + 1;
            let big =
                UniformGrid::new(crate::grid::BoxDomain::new(largest, env.grid.dim()), n | 1)?;
            let f = GridFunction::from_fn(big, op.comps, |k, x| {
                let r2: f64 = x.iter().map(|v| v * v).sum();
                (1.0 - 0.3 * k as f64) * (-r2 / 0.5).exp()
            });
            let study =
                expanding_domain_study(op, s0, s0 + t, &f, &radii, inner, &env.cfg, &[s0 + t])?;
            let worst = study
                .sup_diffs
                .last()
                .and_then(|row| row.iter().cloned().reduce(f64::max))
                .unwrap_or(0.0);
            let mut rep =
                VerificationReport::new("expanding-domain", preset_name, worst, 0.0, f64::INFINITY)
                    .with_details(serde_json::to_value(&study)?);
            rep.tolerance = 1e-3;
            if !study.pass {
                rep.verdict = crate::report::Verdict::Fail;
            }
            Ok(rep)
        }
        "resolvent-consistency" => {
            let m_j = env.preset.m_j()?;
            let offset = p_f64(params, "lambda_offset").unwrap_or(1.0);
            let f = random_field(&env, true, 6);
            let cfg = env.cfg.with_theta(0.5);
            check_resolvent_consistency(op, s0, m_j + offset, &f, m_j, &cfg, preset_name)
        }
        "resolvent-identity" => {
            let m_j = env.preset.m_j()?;
            let f = random_field(&env, true, 7);
            let direct = check_resolvent_identity(
                op,
                s0,
                2.0 * m_j.abs() + 1.0,
                2.0 * m_j.abs() + 3.0,
                &f,
                m_j,
                &env.cfg,
                ResolventMethod::Direct,
                0,
                preset_name,
            )?;
            // Quadrature refinement: halving the step must shrink the
            // residual by the refinement gain.
            let cfg_q = env.cfg.with_theta(0.5);
            let quad0 = check_resolvent_identity(
                op,
                s0,
                m_j + 1.0,
                m_j + 3.0,
                &f,
                m_j,
                &cfg_q,
                ResolventMethod::Quadrature,
                0,
                preset_name,
            )?;
            let quad1 = check_resolvent_identity(
                op,
                s0,
                m_j + 1.0,
                m_j + 3.0,
                &f,
                m_j,
                &cfg_q,
                ResolventMethod::Quadrature,
                1,
                preset_name,
            )?;
            let gain = quad0.measured_left / quad1.measured_left.max(1e-300);
            let pass = direct.passed() && gain >= tolerances::REFINEMENT_GAIN;
            let mut rep = direct.clone();
            rep.details = serde_json::json!({
                "direct_residual": direct.measured_left,
                "quadrature_residual": quad0.measured_left,
                "quadrature_refined_residual": quad1.measured_left,
                "refinement_gain": gain,
            });
            if !pass {
                rep.verdict = crate::report::Verdict::Fail;
            }
            Ok(rep)
        }
        "resolvent-bound" => {
            let m_j = env.preset.m_j()?;
            let trials = p_usize(params, "trials").unwrap_or(10);
            let offset = p_f64(params, "lambda_offset").unwrap_or(1.0);
            check_resolvent_bound(
                op,
                s0,
                m_j + offset,
                trials,
                env.grid,
                m_j,
                &env.cfg,
                env.seed.wrapping_add(8),
                preset_name,
            )
        }
        "schauder-elliptic" => {
            let theta = p_f64(params, "theta").unwrap_or(0.5);
            let m_j = env.preset.m_j()?;
            let coarse = env.grid;
            let fine = UniformGrid::new(env.preset.domain, 2 * coarse.points_per_axis - 1)?;
            let source = ManufacturedSolution::sample(op.comps, op.dim, env.preset.domain.radius)
                .with_time(0.3, 1.1);
            schauder_experiment(
                op,
                &source,
                m_j + 2.0,
                theta,
                env.preset.interval,
                (coarse, fine),
                m_j,
                &env.cfg,
                preset_name,
            )
        }
        "schauder-parabolic" => {
            let theta = p_f64(params, "theta").unwrap_or(0.5);
            let coarse = env.grid;
            let fine = UniformGrid::new(env.preset.domain, 2 * coarse.points_per_axis - 1)?;
            let f0 = ManufacturedSolution::sample(op.comps, op.dim, env.preset.domain.radius);
            let g = ManufacturedSolution::sample(op.comps, op.dim, env.preset.domain.radius)
                .with_time(0.4, 2.0);
            let cfg = env.cfg.with_theta(0.5);
            parabolic_schauder_experiment(
                op,
                &f0,
                &g,
                theta,
                (s0, s0 + 0.25),
                (coarse, fine),
                &cfg,
                preset_name,
            )
        }
        "schauder-manufactured" => {
            let m_j = env.preset.m_j()?;
            let u0 = ManufacturedSolution::sample(op.comps, op.dim, env.preset.domain.radius);
            let elliptic = manufactured_elliptic_recovery(
                op,
                s0,
                m_j + 2.0,
                &u0,
                env.grid,
                m_j,
                &env.cfg,
                preset_name,
            )?;
            let u0t = u0.clone().with_time(0.3, 1.5);
            let cfg = env
                .cfg
                .with_theta(0.5)
                .with_dt(p_f64(params, "dt").unwrap_or(1e-3));
            let parabolic = manufactured_parabolic_recovery(
                op,
                &u0t,
                (s0, s0 + 0.25),
                env.grid,
                &cfg,
                preset_name,
            )?;
            let worst = elliptic.measured_left.max(parabolic.measured_left);
            Ok(VerificationReport::new(
                "schauder-manufactured",
                preset_name,
                worst,
                0.0,
                tolerances::MANUFACTURED_C2,
            )
            .with_details(serde_json::json!({
                "elliptic_c2_error": elliptic.measured_left,
                "parabolic_c2_error": parabolic.measured_left,
            })))
        }
        "interpolation-inequality" => {
            let theta = p_f64(params, "theta").unwrap_or(0.5);
            let trials = p_usize(params, "trials").unwrap_or(5);
            let m_j = env.preset.m_j()?;
            let coarse = env.grid;
            let fine = UniformGrid::new(env.preset.domain, 2 * coarse.points_per_axis - 1)?;
            check_interpolation_inequality(
                op,
                s0,
                theta,
                trials,
                (coarse, fine),
                m_j,
                &env.cfg,
                env.seed.wrapping_add(9),
                preset_name,
            )
        }
        "stationary-density" => {
            let scalar = ScalarPart {
                op,
                comp: 0,
                with_diagonal_potential: false,
            };
            let mu = scalar_invariant_density_stationary(&scalar, env.grid)?;
            let exact =
                scalar_invariant_density_1d(&op.diffusion[0][0], &op.drift[0][0], env.grid)?;
            let w = env.grid.trapezoid_weights();
            let l1: f64 = (0..env.grid.len())
                .map(|i| (mu.data[0][i] - exact.data[0][i]).abs() * w[i])
                .sum();
            Ok(VerificationReport::new(
                "stationary-density",
                preset_name,
                l1,
                0.0,
                tolerances::DENSITY_L1,
            ))
        }
        "invariance" => {
            let (_, mv) = measure_pipeline(&env)?;
            let ts = vec![0.1, 0.5, 1.0, 2.0];
            let batch: Vec<GridFunction> = (0..3)
                .map(|i| random_field(&env, true, 20 + i as u64))
                .collect();
            check_invariance(op, &mv, &batch, &ts, &env.cfg, preset_name)
        }
        "asymptotics" => {
            let (_, mv) = measure_pipeline(&env)?;
            let f = random_field(&env, true, 30);
            let horizon = p_f64(params, "horizon").unwrap_or(4.0);
            check_asymptotics(op, &f, &mv, horizon, &env.cfg, preset_name)
        }
        "lp-bound" => {
            let (_, mv) = measure_pipeline(&env)?;
            let p = p_f64(params, "p").unwrap_or(2.0);
            let t = p_f64(params, "t").unwrap_or(0.5);
            check_lp_bound(
                op,
                &mv,
                p,
                t,
                p_usize(params, "trials").unwrap_or(10),
                &env.cfg,
                env.seed.wrapping_add(40),
                preset_name,
            )
        }
        "domination" => {
            let f = random_field(&env, true, 50);
            check_domination(op, &f, &[0.1, 0.25, 0.5], &env.cfg, preset_name)
        }
        "fixed-points" => {
            let (analysis, _) = measure_pipeline(&env)?;
            check_fixed_points(
                op,
                &analysis,
                &[0.25, 0.5, 1.0],
                env.grid,
                &env.cfg,
                preset_name,
            )
        }
        "gradient-decay" => {
            let scalar = ScalarPart {
                op,
                comp: 0,
                with_diagonal_potential: false,
            };
            let mu = scalar_invariant_density_stationary(&scalar, env.grid)?;
            let f = random_field(&env, true, 60);
            let horizon = p_f64(params, "horizon").unwrap_or(4.0);
            check_gradient_decay(op, &f, &mu, horizon, &env.cfg, preset_name)
        }
        other => Err(Error::InvalidConfig(format!("unknown check `{other}`"))),
    }
}

/// Execute a manifest: every check runs (errors are captured as failed
/// reports), per-check JSON plus a summary CSV and index are written when an
/// output directory is given.
pub fn run_suite(manifest: &SuiteManifest, out_dir: Option<&Path>) -> Result<SuiteSummary> {
    manifest.validate()?;
    let reports: Vec<VerificationReport> = exec::map_indexed(manifest.items.len(), |i| {
        let item = &manifest.items[i];
        let seed = manifest.seed.wrapping_add(7919 * i as u64);
        match run_check(item, seed) {
            Ok(report) => report,
            Err(e) => VerificationReport::failed(&item.check, &item.preset, f64::INFINITY, 0.0)
                .with_details(serde_json::json!({ "error": e.to_string() })),
        }
    });
    let passed = reports.iter().filter(|r| r.passed()).count();
    let summary = SuiteSummary {
        total: reports.len(),
        passed,
        failed: reports.len() - passed,
        reports,
    };
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir)?;
        let mut csv = String::from(SUITE_CSV_HEADER);
        for (i, report) in summary.reports.iter().enumerate() {
            let f = std::fs::File::create(
                dir.join(format!("{i:03}_{}__{}.json", report.check, report.preset)),
            )?;
            serde_json::to_writer_pretty(f, report)?;
            csv.push_str(&report.csv_row());
        }
        let mut csv_file = std::fs::File::create(dir.join("summary.csv"))?;
        csv_file.write_all(csv.as_bytes())?;
        let index = serde_json::json!({
            "total": summary.total,
            "passed": summary.passed,
            "failed": summary.failed,
            "items": summary.reports.iter().map(|r| serde_json::json!({
                "check": r.check,
                "preset": r.preset,
                "verdict": r.verdict,
                "worst_violation": r.worst_violation,
                "tolerance": r.tolerance,
            })).collect::<Vec<_>>(),
        });
        let f = std::fs::File::create(dir.join("index.json"))?;
        serde_json::to_writer_pretty(f, &index)?;
    }
    Ok(summary)
}

fn item(check: &str, preset: &str, params: serde_json::Value) -> ManifestItem {
    ManifestItem {
        check: check.into(),
        preset: preset.into(),
        params,
    }
}

/// The shipped manifest: the full verification matrix at desk scale.
pub fn default_manifest() -> SuiteManifest {
    use serde_json::json;
    let mut items = Vec::new();
    items.push(item("coupling-analysis", "example2-gamma0", json!({})));
    for preset in PRESET_NAMES {
        items.push(item("hypotheses", preset, json!({"which": "base"})));
    }
    items.push(item(
        "hypotheses",
        "example1-d1m2",
        json!({"which": "smooth"}),
    ));
    items.push(item(
        "hypotheses",
        "decoupled-negative-coupling",
        json!({"which": "smooth"}),
    ));
    items.push(item(
        "hypotheses",
        "example2-gamma0",
        json!({"which": "special-case"}),
    ));
    items.push(item(
        "hypotheses",
        "ou-scalar",
        json!({"which": "special-case"}),
    ));
    for preset in PRESET_NAMES {
        let params = if preset == "example1-d2m2" {
            json!({"n_g": 81, "t": 0.1})
        } else {
            json!({})
        };
        items.push(item("comparison", preset, params));
    }
    for preset in PRESET_NAMES {
        let params = if preset == "example1-d2m2" {
            json!({"n_g": 61, "t": 0.1, "dt": 2e-3})
        } else if preset == "decoupled-negative-coupling" {
            json!({"t": 0.25, "dt": 5e-4})
        } else {
            json!({})
        };
        items.push(item("sup-bound", preset, params));
    }
    items.push(item(
        "decay",
        "heat-scalar",
        json!({"h": 0, "k": 1, "n_g": 1601, "t": 0.6, "dt": 2.5e-4}),
    ));
    for (h, k) in [(0, 1), (0, 2), (1, 2), (0, 3)] {
        items.push(item("decay", "example1-d1m2", json!({"h": h, "k": k})));
    }
    items.push(item(
        "interpolation-decay",
        "heat-scalar",
        json!({"beta": 0.0, "theta": 1.5}),
    ));
    items.push(item(
        "interpolation-decay",
        "example1-d1m2",
        json!({"beta": 1.0, "theta": 2.5}),
    ));
    items.push(item("evolution-law", "example1-d1m2", json!({})));
    items.push(item("continuity-data", "example1-d1m2", json!({})));
    items.push(item("joint-continuity", "example1-d1m2", json!({})));
    items.push(item("duhamel", "example1-d1m2", json!({})));
    items.push(item(
        "duhamel",
        "decoupled-negative-coupling",
        json!({"t": 0.2}),
    ));
    items.push(item("expanding-domain", "example1-d1m2", json!({})));
    for preset in [
        "heat-scalar",
        "ou-scalar",
        "example1-d1m2",
        "example2-gamma0",
        "decoupled-negative-coupling",
    ] {
        items.push(item(
            "resolvent-consistency",
            preset,
            json!({"lambda_offset": 1.0}),
        ));
        items.push(item(
            "resolvent-consistency",
            preset,
            json!({"lambda_offset": 5.0}),
        ));
    }
    items.push(item(
        "resolvent-consistency",
        "example1-d2m2",
        json!({"n_g": 61, "lambda_offset": 5.0, "dt": 0.01}),
    ));
    items.push(item("resolvent-identity", "example1-d1m2", json!({})));
    items.push(item("resolvent-identity", "example2-gamma0", json!({})));
    items.push(item("resolvent-bound", "example1-d1m2", json!({})));
    items.push(item("resolvent-bound", "example2-gamma0", json!({})));
    items.push(item(
        "schauder-elliptic",
        "example1-d1m2",
        json!({"theta": 0.5}),
    ));
    items.push(item(
        "schauder-parabolic",
        "example1-d1m2",
        json!({"theta": 0.5}),
    ));
    items.push(item("schauder-manufactured", "example1-d1m2", json!({})));
    items.push(item(
        "interpolation-inequality",
        "example1-d1m2",
        json!({"theta": 0.5}),
    ));
    items.push(item("stationary-density", "ou-scalar", json!({})));
    items.push(item("stationary-density", "example2-gamma0", json!({})));
    items.push(item("invariance", "example2-gamma0", json!({})));
    items.push(item("asymptotics", "example2-gamma0", json!({})));
    for p in [1.0, 2.0, 4.0] {
        items.push(item("lp-bound", "example2-gamma0", json!({"p": p})));
    }
    items.push(item("domination", "example2-gamma0", json!({})));
    items.push(item("fixed-points", "example2-gamma0", json!({})));
    items.push(item("gradient-decay", "example2-gamma0", json!({})));
    items.push(item("gradient-decay", "ou-scalar", json!({})));
    SuiteManifest {
        seed: 20260810,
        items,
    }
}
