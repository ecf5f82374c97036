//! Executable verification of the quantitative evolution estimates: the
//! comparison principle against the auxiliary family, the exponential sup
//! bound, smoothing-rate fits for the derivative estimates, the evolution
//! law, and continuity in the data and in the frozen time.

use crate::evolve::{solve_cauchy, solve_frozen, SolverConfig};
use crate::exec;
use crate::grid::{ck_norm, ctheta_norm, GridFunction, HOLDER_PAIR_CAP};
use crate::linalg::line_fit;
use crate::operator::{CoefficientField, OperatorFamily};
use crate::report::{VerificationReport, Witness};
use crate::tolerances;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Evenly spaced snapshot times in (s, T].
pub fn default_snapshots(s: f64, t_end: f64, count: usize) -> Vec<f64> {
    (1..=count)
        .map(|i| s + (t_end - s) * i as f64 / count as f64)
        .collect()
}

/// Comparison principle: componentwise |(G(t,s) f)_j| <= (G^P(t,s)|f|)_j up
/// to the scheme's consistency error `c_cmp (h^2 + dt)`.
pub fn check_comparison(
    op: &OperatorFamily,
    s: f64,
    t_end: f64,
    f: &GridFunction,
    cfg: &SolverConfig,
    preset: &str,
) -> Result<VerificationReport> {
    let aux = op.derive_auxiliary();
    let snaps = default_snapshots(s, t_end, 5);
    let u = solve_cauchy(op, s, t_end, f, None, cfg, &snaps)?;
    let up = solve_cauchy(&aux, s, t_end, &f.abs(), None, cfg, &snaps)?;
    let dt = cfg.effective_dt(&f.grid, t_end - s);
    let h = f.grid.spacing;
    let tol = tolerances::CMP_FACTOR * (h * h + dt);
    let mut worst = f64::NEG_INFINITY;
    let mut witness = Witness {
        t: s,
        x: vec![0.0; f.grid.dim()],
        component: None,
    };
    for (i, t) in u.times.iter().enumerate() {
        if i == 0 {
            continue; // the initial snapshot is the datum itself
        }
        for k in 0..op.comps {
            let (idx, v) = exec::argmax_indexed(f.grid.len(), |p| {
                u.snapshots[i].data[k][p].abs() - up.snapshots[i].data[k][p]
            });
            if v > worst {
                worst = v;
                witness = Witness {
                    t: *t,
                    x: f.grid.point(idx),
                    component: Some(k),
                };
            }
        }
    }
    Ok(VerificationReport::new("comparison", preset, worst, 0.0, tol).with_witness(witness))
}

/// Sup bound: max_k sup |u_k(t,.)| <= e^{M_J (t-s)} max_k ||f_k|| with
/// relative slack; reports the sharpness ratio.
pub fn check_sup_bound(
    op: &OperatorFamily,
    s: f64,
    t_end: f64,
    f: &GridFunction,
    m_j: f64,
    cfg: &SolverConfig,
    preset: &str,
) -> Result<VerificationReport> {
    let snaps = default_snapshots(s, t_end, 5);
    let aux = op.derive_auxiliary();
    let u = solve_cauchy(op, s, t_end, f, None, cfg, &snaps)?;
    let up = solve_cauchy(&aux, s, t_end, &f.abs(), None, cfg, &snaps)?;
    let fnorm = f.sup_norm();
    if fnorm == 0.0 {
        return Ok(VerificationReport::new(
            "sup-bound",
            preset,
            0.0,
            0.0,
            tolerances::SUP_REL,
        ));
    }
    let mut worst_ratio = 0.0f64;
    let mut witness = Witness {
        t: s,
        x: vec![],
        component: None,
    };
    for run in [&u, &up] {
        for (i, t) in run.times.iter().enumerate() {
            if i == 0 {
                continue;
            }
            let bound = (m_j * (t - s)).exp() * fnorm;
            let ratio = run.snapshots[i].sup_norm() / bound;
            if ratio > worst_ratio {
                worst_ratio = ratio;
                witness.t = *t;
            }
        }
    }
    Ok(
        VerificationReport::new("sup-bound", preset, worst_ratio, 1.0, tolerances::SUP_REL)
            .with_witness(witness)
            .with_details(serde_json::json!({ "m_j": m_j, "sharpness_ratio": worst_ratio })),
    )
}

/// A smoothing-rate fit: norms of G(s+delta, s)f against the lag delta on a
/// geometric window, slope fitted in log-log after removing e^{Mbar delta}.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecayFit {
    pub lags: Vec<f64>,
    pub norms: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    /// -(k - h)/2 (or -(theta - beta)/2).
    pub target_exponent: f64,
    pub slope_tol: f64,
    pub pass: bool,
}

impl DecayFit {
    fn from_measurements(lags: Vec<f64>, norms: Vec<f64>, m_bar: f64, target: f64) -> Result<Self> {
        let decades = (lags[lags.len() - 1] / lags[0]).log10();
        if lags.len() < 8 || decades < 1.0 - 1e-9 {
            return Err(Error::InsufficientDecade {
                decades,
                points: lags.len(),
            });
        }
        let xs: Vec<f64> = lags.iter().map(|d| d.ln()).collect();
        let ys: Vec<f64> = norms
            .iter()
            .zip(&lags)
            .map(|(n, d)| n.ln() - m_bar * d)
            .collect();
        let (slope, intercept) = line_fit(&xs, &ys);
        // One-sided criterion: the estimate is an upper bound, so only
        // slower-than-allowed decay falsifies it.
        let pass = slope >= target - tolerances::SLOPE_TOL;
        Ok(DecayFit {
            lags,
            norms,
            slope,
            intercept,
            target_exponent: target,
            slope_tol: tolerances::SLOPE_TOL,
            pass,
        })
    }
}

/// Geometric lag grid inside [20 dt, (T-s)/4].
pub fn decay_lags(s: f64, t_end: f64, dt: f64, points: usize) -> Vec<f64> {
    let lo = 20.0 * dt;
    let hi = 0.25 * (t_end - s);
    let ratio = (hi / lo).powf(1.0 / (points - 1) as f64);
    (0..points).map(|i| lo * ratio.powi(i as i32)).collect()
}

/// Fit the decay of ||G(s+delta, s) f||_{C^k} for data with O(1) C^h norm;
/// norms taken on the inner half-box with one-sided stencils.
#[allow(clippy::too_many_arguments)]
pub fn measure_derivative_decay(
    op: &dyn CoefficientField,
    s: f64,
    t_end: f64,
    f: &GridFunction,
    h_order: usize,
    k_order: usize,
    m_bar: f64,
    cfg: &SolverConfig,
) -> Result<DecayFit> {
    assert!(h_order <= k_order && k_order <= 3);
    let dt = cfg.effective_dt(&f.grid, t_end - s);
    let lags = decay_lags(s, t_end, dt, 10);
    let snaps: Vec<f64> = lags.iter().map(|d| s + d).collect();
    let run = solve_cauchy(op, s, t_end, f, None, cfg, &snaps)?;
    let inner_radius = 0.5 * f.grid.domain.radius;
    let norms: Vec<f64> = snaps
        .iter()
        .map(|t| {
            let state = run.at(*t).restrict(inner_radius)?;
            ck_norm(&state, k_order)
        })
        .collect::<Result<_>>()?;
    let target = -((k_order - h_order) as f64) / 2.0;
    DecayFit::from_measurements(lags, norms, m_bar, target)
}

/// Fractional-norm variant for the frozen semigroup: fits the decay of
/// ||T_tbar(tau) f||_{C^theta} against tau for data in C^beta.
#[allow(clippy::too_many_arguments)]
pub fn check_interpolation_estimates(
    op: &dyn CoefficientField,
    tbar: f64,
    theta: f64,
    beta: f64,
    f: &GridFunction,
    m_bar: f64,
    cfg: &SolverConfig,
) -> Result<DecayFit> {
    assert!((0.0..=3.0).contains(&theta) && (0.0..=3.0).contains(&beta) && beta <= theta);
    assert!(
        theta.fract() > 1e-12 || beta.fract() > 1e-12,
        "at least one of theta, beta must be non-integer"
    );
    let horizon = 0.5;
    let dt = cfg.effective_dt(&f.grid, horizon);
    let lags = decay_lags(0.0, horizon, dt, 10);
    let snaps: Vec<f64> = lags.clone();
    let run = solve_frozen(op, tbar, horizon, f, cfg, &snaps)?;
    let inner_radius = 0.5 * f.grid.domain.radius;
    let norms: Vec<f64> = snaps
        .iter()
        .map(|t| {
            let state = run.at(*t).restrict(inner_radius)?;
            ctheta_norm(&state, theta, HOLDER_PAIR_CAP)
        })
        .collect::<Result<_>>()?;
    let target = -(theta - beta) / 2.0;
    DecayFit::from_measurements(lags, norms, m_bar, target)
}

/// Evolution law G(t,r) G(r,s) f = G(t,s) f, with the scheme-consistency
/// tolerance `c dt (t - s)`.
#[allow(clippy::too_many_arguments)]
pub fn check_evolution_law(
    op: &dyn CoefficientField,
    s: f64,
    r: f64,
    t: f64,
    f: &GridFunction,
    cfg: &SolverConfig,
    preset: &str,
) -> Result<VerificationReport> {
    assert!(s <= r && r <= t);
    let direct = solve_cauchy(op, s, t, f, None, cfg, &[t])?;
    let composed = if r <= s + 1e-14 {
        solve_cauchy(op, r.max(s), t, f, None, cfg, &[t])?
    } else if r >= t - 1e-14 {
        direct.clone()
    } else {
        let first = solve_cauchy(op, s, r, f, None, cfg, &[r])?;
        solve_cauchy(op, r, t, first.last(), None, cfg, &[t])?
    };
    let resid = direct.last().sup_diff(composed.last());
    let dt = cfg.effective_dt(&f.grid, t - s);
    let tol = tolerances::SCHEME_FACTOR * dt * (t - s);
    Ok(
        VerificationReport::new("evolution-law", preset, resid, 0.0, tol)
            .with_details(serde_json::json!({ "dt": dt, "residual": resid })),
    )
}

/// Continuity in the data: for f_n -> f locally uniformly with uniform sup
/// bounds, the solutions converge on a compact window.
#[allow(clippy::too_many_arguments)]
pub fn check_continuity_in_data(
    op: &dyn CoefficientField,
    s: f64,
    t_end: f64,
    f_seq: &[GridFunction],
    f: &GridFunction,
    window_radius: f64,
    cfg: &SolverConfig,
    tol: f64,
    preset: &str,
) -> Result<VerificationReport> {
    let snaps = default_snapshots(s, t_end, 3);
    let reference = solve_cauchy(op, s, t_end, f, None, cfg, &snaps)?;
    let eps: Vec<f64> = f_seq
        .iter()
        .map(|fn_| -> Result<f64> {
            let run = solve_cauchy(op, s, t_end, fn_, None, cfg, &snaps)?;
            let mut worst = 0.0f64;
            for (i, _) in run.times.iter().enumerate() {
                let a = run.snapshots[i].restrict(window_radius)?;
                let b = reference.snapshots[i].restrict(window_radius)?;
                worst = worst.max(a.sup_diff(&b));
            }
            Ok(worst)
        })
        .collect::<Result<_>>()?;
    let decreasing = eps.windows(2).all(|w| w[1] <= w[0] + 1e-14);
    let last = *eps.last().expect("nonempty sequence");
    let mut report = VerificationReport::new("continuity-data", preset, last, 0.0, tol)
        .with_details(serde_json::json!({ "eps": eps, "decreasing": decreasing }));
    if !decreasing {
        report.verdict = crate::report::Verdict::Fail;
    }
    Ok(report)
}

/// Joint continuity of (t, tau) -> T_t(tau) f: the modulus of continuity in
/// the frozen time decreases under t-lattice refinement (three levels).
#[allow(clippy::too_many_arguments)]
pub fn check_joint_continuity(
    op: &dyn CoefficientField,
    f: &GridFunction,
    t_window: (f64, f64),
    taus: &[f64],
    cfg: &SolverConfig,
    preset: &str,
) -> Result<VerificationReport> {
    let tau_max = taus.iter().copied().fold(0.0, f64::max);
    let inner = 0.5 * f.grid.domain.radius;
    let mut moduli = Vec::new();
    for level in 0..3usize {
        let pieces = 4 * (1 << level);
        let ts: Vec<f64> = (0..=pieces)
            .map(|i| t_window.0 + (t_window.1 - t_window.0) * i as f64 / pieces as f64)
            .collect();
        let runs: Vec<Result<Vec<GridFunction>>> = exec::map_indexed(ts.len(), |i| {
            let run = solve_frozen(op, ts[i], tau_max, f, cfg, taus)?;
            taus.iter()
                .map(|tau| run.at(*tau).restrict(inner))
                .collect()
        });
        let mut states = Vec::new();
        for r in runs {
            states.push(r?);
        }
        let mut modulus = 0.0f64;
        for w in states.windows(2) {
            for (a, b) in w[0].iter().zip(&w[1]) {
                modulus = modulus.max(a.sup_diff(b));
            }
        }
        moduli.push(modulus);
    }
    let ok = moduli.windows(2).all(|w| w[1] <= w[0] + 1e-12);
    let mut report = VerificationReport::new(
        "joint-continuity",
        preset,
        *moduli.last().unwrap(),
        0.0,
        moduli[0].max(1e-12),
    )
    .with_details(serde_json::json!({ "moduli": moduli }));
    if !ok {
        report.verdict = crate::report::Verdict::Fail;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{random_smooth, SmoothFieldSpec};
    use crate::grid::{BoxDomain, UniformGrid};

    #[test]
    fn decay_lags_span_a_decade() {
        let lags = decay_lags(0.0, 0.4, 4e-4, 10);
        assert_eq!(lags.len(), 10);
        assert!(lags[9] / lags[0] >= 10.0);
    }

    #[test]
    fn insufficient_decade_is_flagged() {
        let lags: Vec<f64> = (0..10).map(|i| 0.01 + 0.001 * i as f64).collect();
        let norms = vec![1.0; 10];
        let err = DecayFit::from_measurements(lags, norms, 0.0, -0.5);
        assert!(matches!(err, Err(Error::InsufficientDecade { .. })));
    }

    #[test]
    fn evolution_law_trivial_splits() {
        let op = crate::evolve::tests::ou_1d();
        let g = UniformGrid::new(BoxDomain::new(3.0, 1), 81).unwrap();
        let f = random_smooth(g, 1, &SmoothFieldSpec::default(), 5);
        let cfg = SolverConfig::default().with_dt(5e-3);
        // r = s and r = t give zero residual by construction.
        let r0 = check_evolution_law(&op, 0.0, 0.0, 0.2, &f, &cfg, "ou").unwrap();
        assert!(r0.measured_left <= 1e-12);
        let r1 = check_evolution_law(&op, 0.0, 0.2, 0.2, &f, &cfg, "ou").unwrap();
        assert_eq!(r1.measured_left, 0.0);
    }

    #[test]
    fn continuity_in_data_exact_for_constant_sequence() {
        let op = crate::evolve::tests::ou_1d();
        let g = UniformGrid::new(BoxDomain::new(3.0, 1), 81).unwrap();
        let f = random_smooth(g, 1, &SmoothFieldSpec::default(), 9);
        let cfg = SolverConfig::default().with_dt(5e-3);
        let seq = vec![f.clone(), f.clone(), f.clone()];
        let rep = check_continuity_in_data(&op, 0.0, 0.2, &seq, &f, 1.5, &cfg, 1e-9, "ou").unwrap();
        assert!(rep.passed());
        assert_eq!(rep.measured_left, 0.0);
    }

    #[test]
    fn scaled_sequence_decays_linearly() {
        // f_n = f (1 + 1/n): eps_n = ||G f|| / n exactly, by linearity.
        let op = crate::evolve::tests::ou_1d();
        let g = UniformGrid::new(BoxDomain::new(3.0, 1), 81).unwrap();
        let f = random_smooth(g, 1, &SmoothFieldSpec::default(), 13);
        let cfg = SolverConfig::default().with_dt(5e-3);
        let seq: Vec<GridFunction> = (1..=4).map(|n| f.scale(1.0 + 1.0 / n as f64)).collect();
        let rep = check_continuity_in_data(&op, 0.0, 0.2, &seq, &f, 1.5, &cfg, 1.0, "ou").unwrap();
        let eps = rep.details["eps"].as_array().unwrap();
        let e1 = eps[0].as_f64().unwrap();
        let e4 = eps[3].as_f64().unwrap();
        assert!((e1 / e4 - 4.0).abs() < 0.05, "ratio {}", e1 / e4);
    }

    #[test]
    fn joint_continuity_modulus_vanishes_for_autonomous() {
        let op = crate::evolve::tests::ou_1d();
        let g = UniformGrid::new(BoxDomain::new(3.0, 1), 61).unwrap();
        let f = random_smooth(g, 1, &SmoothFieldSpec::default(), 17);
        let cfg = SolverConfig::default().with_dt(1e-2);
        let rep = check_joint_continuity(&op, &f, (0.0, 1.0), &[0.05, 0.1], &cfg, "ou").unwrap();
        assert!(rep.passed());
        let moduli = rep.details["moduli"].as_array().unwrap();
        for m in moduli {
            assert_eq!(m.as_f64().unwrap(), 0.0);
        }
    }
}
