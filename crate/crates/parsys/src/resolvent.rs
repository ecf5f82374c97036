//! The resolvent of the frozen operator two independent ways — Laplace
//! quadrature of the semigroup and a direct sparse elliptic solve — plus the
//! Schauder-regularity experiments and the interpolation inequality of the
//! domain characterization.

use crate::data::{random_smooth, ManufacturedSolution, SmoothFieldSpec};
use crate::evolve::{solve_cauchy, solve_frozen, DiscreteOperator, EvolveContext, SolverConfig};
use crate::grid::{ck_norm, ctheta_norm, GridFunction, UniformGrid, HOLDER_PAIR_CAP};
use crate::linalg::bicgstab;
use crate::operator::{CoefficientField, Frozen, OperatorFamily};
use crate::report::VerificationReport;
use crate::tolerances;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ResolventMethod {
    Quadrature,
    Direct,
}

/// Resolvent solve output with its residual certificate.
#[derive(Debug, Clone)]
pub struct ResolventResult {
    pub lambda: f64,
    pub tbar: f64,
    pub method: ResolventMethod,
    pub solution: GridFunction,
    /// ||lambda u - A u - f||_inf on the inner half-box.
    pub residual: f64,
    /// Quadrature truncation horizon (quadrature method only).
    pub t_trunc: Option<f64>,
    /// Number of quadrature nodes (quadrature method only).
    pub nodes: Option<usize>,
}

fn operator_residual(
    op: &dyn CoefficientField,
    tbar: f64,
    lambda: f64,
    u: &GridFunction,
    f: &GridFunction,
) -> Result<f64> {
    let frozen = Frozen {
        inner: op,
        at: tbar,
    };
    let au = DiscreteOperator::assemble(&frozen, 0.0, u.grid).apply(u);
    let resid = u.linear_comb(lambda, &au, -1.0).linear_comb(1.0, f, -1.0);
    let inner = resid.restrict(0.5 * u.grid.domain.radius)?;
    Ok(inner.sup_norm())
}

/// Trapezoid Laplace quadrature of the frozen semigroup on a geometric
/// time grid (rho = 0.8 toward zero), truncated where the analytic tail
/// bound drops below `QUADRATURE_TAIL * ||f||`. `refinement` halves the grid
/// spacing that many times.
#[allow(clippy::too_many_arguments)]
pub fn resolvent_quadrature(
    op: &dyn CoefficientField,
    tbar: f64,
    lambda: f64,
    f: &GridFunction,
    m_bound: f64,
    cfg: &SolverConfig,
    refinement: usize,
) -> Result<ResolventResult> {
    let margin = tolerances::LAMBDA_MARGIN;
    if lambda <= m_bound + margin {
        return Err(Error::LambdaTooSmall {
            lambda,
            m_bound,
            margin,
        });
    }
    let gap = lambda - m_bound;
    let t_trunc = (-(tolerances::QUADRATURE_TAIL * gap).ln() / gap).max(0.5);
    let scale = 0.5f64.powi(refinement as i32);
    let dt = scale * cfg.effective_dt(&f.grid, t_trunc.min(1.0));
    // Refinement halves the stepping error along with the quadrature grid.
    let cfg = &cfg.with_dt(dt.min(cfg.effective_dt(&f.grid, t_trunc.min(1.0))));
    // Interval endpoints: geometric growth out of the singular layer at
    // tau = 0, capped at 0.2/lambda so the composite Simpson error in the
    // smooth tail stays below the tail budget.
    let cap = scale * 0.2 / lambda;
    let mut ends: Vec<f64> = vec![dt.min(cap)];
    while *ends.last().unwrap() < t_trunc {
        let tau = *ends.last().unwrap();
        ends.push((tau * 1.25).min(tau + cap).min(t_trunc));
    }
    // Snapshot times: endpoints plus Simpson midpoints.
    let mut nodes: Vec<f64> = Vec::with_capacity(2 * ends.len());
    let mut prev = 0.0;
    for &tau in &ends {
        nodes.push(0.5 * (prev + tau));
        nodes.push(tau);
        prev = tau;
    }
    let run = solve_frozen(op, tbar, t_trunc, f, cfg, &nodes)?;
    // Composite Simpson of e^{-lambda tau} T(tau) f over [0, t_trunc].
    let mut acc = GridFunction::zeros(f.grid, f.comps());
    let mut prev_t = 0.0;
    let mut prev_g = f.clone(); // e^0 T(0) f
    for &tau in &ends {
        let mid = 0.5 * (prev_t + tau);
        let gm = run.at(mid).scale((-lambda * mid).exp());
        let g = run.at(tau).scale((-lambda * tau).exp());
        let w = (tau - prev_t) / 6.0;
        let simpson = prev_g.linear_comb(1.0, &gm, 4.0).linear_comb(1.0, &g, 1.0);
        acc = acc.linear_comb(1.0, &simpson, w);
        prev_t = tau;
        prev_g = g;
    }
    let residual = operator_residual(op, tbar, lambda, &acc, f)?;
    Ok(ResolventResult {
        lambda,
        tbar,
        method: ResolventMethod::Quadrature,
        solution: acc,
        residual,
        t_trunc: Some(t_trunc),
        nodes: Some(nodes.len() + 1),
    })
}

/// Direct elliptic solve of `(lambda I - A(tbar)) u = f` with Neumann
/// closure: banded factorization in d = 1, preconditioned BiCGSTAB in d = 2.
pub fn elliptic_direct(
    op: &dyn CoefficientField,
    tbar: f64,
    lambda: f64,
    f: &GridFunction,
    m_bound: f64,
    cfg: &SolverConfig,
) -> Result<ResolventResult> {
    if lambda <= m_bound {
        return Err(Error::LambdaTooSmall {
            lambda,
            m_bound,
            margin: 0.0,
        });
    }
    let frozen = Frozen {
        inner: op,
        at: tbar,
    };
    let grid = f.grid;
    let mut ctx = EvolveContext::new(&frozen, grid, *cfg);
    ctx.check_ellipticity(0.0)?;
    let disc = DiscreteOperator::assemble(&frozen, 0.0, grid);
    let rhs = f.to_point_major();
    let m = f.comps();
    let x = if grid.dim() == 1 {
        let banded = disc.banded(lambda, -1.0);
        let lu = banded.factor().map_err(|_| Error::LinearSolveFailed {
            residual: f64::NAN,
            iters: 0,
            tol: cfg.linear_tol,
        })?;
        lu.solve(&rhs)
    } else {
        let blocks = disc.node_blocks(lambda, -1.0);
        let apply = |v: &[f64], out: &mut [f64]| disc.apply_shifted(lambda, -1.0, v, out);
        let precond = |r: &[f64], out: &mut [f64]| {
            crate::evolve::apply_node_blocks(&blocks, m, r, out);
        };
        let (x, stats) = bicgstab(
            &apply,
            &precond,
            &rhs,
            &vec![0.0; rhs.len()],
            cfg.linear_tol,
            cfg.max_linear_iters,
        );
        if !stats.converged {
            return Err(Error::LinearSolveFailed {
                residual: stats.residual,
                iters: stats.iters,
                tol: cfg.linear_tol,
            });
        }
        x
    };
    let u = GridFunction::from_point_major(grid, m, &x);
    let residual = operator_residual(op, tbar, lambda, &u, f)?;
    Ok(ResolventResult {
        lambda,
        tbar,
        method: ResolventMethod::Direct,
        solution: u,
        residual,
        t_trunc: None,
        nodes: None,
    })
}

/// Resolvent identity `R(l) f - R(m) f = (m - l) R(l) R(m) f`.
#[allow(clippy::too_many_arguments)]
pub fn check_resolvent_identity(
    op: &dyn CoefficientField,
    tbar: f64,
    lambda: f64,
    mu: f64,
    f: &GridFunction,
    m_bound: f64,
    cfg: &SolverConfig,
    method: ResolventMethod,
    refinement: usize,
    preset: &str,
) -> Result<VerificationReport> {
    let solve = |l: f64, g: &GridFunction| -> Result<GridFunction> {
        Ok(match method {
            ResolventMethod::Direct => elliptic_direct(op, tbar, l, g, m_bound, cfg)?.solution,
            ResolventMethod::Quadrature => {
                resolvent_quadrature(op, tbar, l, g, m_bound, cfg, refinement)?.solution
            }
        })
    };
    let rl = solve(lambda, f)?;
    let rm = solve(mu, f)?;
    let rlm = solve(lambda, &rm)?;
    let lhs = rl.linear_comb(1.0, &rm, -1.0);
    let rhs = rlm.scale(mu - lambda);
    let resid = lhs
        .restrict(0.5 * f.grid.domain.radius)?
        .sup_diff(&rhs.restrict(0.5 * f.grid.domain.radius)?);
    let tol = tolerances::RESOLVENT_IDENTITY * f.sup_norm();
    Ok(
        VerificationReport::new("resolvent-identity", preset, resid, 0.0, tol)
            .with_details(serde_json::json!({ "lambda": lambda, "mu": mu, "method": method })),
    )
}

/// Norm bound `||R(lambda) f|| <= (lambda - M)^{-1} ||f||` over random smooth
/// data (max-of-components sup norm).
#[allow(clippy::too_many_arguments)]
pub fn check_resolvent_bound(
    op: &dyn CoefficientField,
    tbar: f64,
    lambda: f64,
    trials: usize,
    grid: UniformGrid,
    m_bound: f64,
    cfg: &SolverConfig,
    seed: u64,
    preset: &str,
) -> Result<VerificationReport> {
    let mut worst = 0.0f64;
    for trial in 0..trials {
        let f = random_smooth(
            grid,
            op.comps(),
            &SmoothFieldSpec::default(),
            seed + trial as u64,
        );
        let f = f.scale(1.0 / f.sup_norm());
        let r = elliptic_direct(op, tbar, lambda, &f, m_bound, cfg)?;
        let ratio = r.solution.sup_norm() * (lambda - m_bound);
        worst = worst.max(ratio);
    }
    Ok(VerificationReport::new(
        "resolvent-bound",
        preset,
        worst,
        1.0,
        tolerances::RESOLVENT_NORM_REL,
    )
    .with_details(serde_json::json!({ "lambda": lambda, "trials": trials })))
}

/// Cross-method agreement of the two resolvent constructions on the inner
/// half-box.
#[allow(clippy::too_many_arguments)]
pub fn check_resolvent_consistency(
    op: &dyn CoefficientField,
    tbar: f64,
    lambda: f64,
    f: &GridFunction,
    m_bound: f64,
    cfg: &SolverConfig,
    preset: &str,
) -> Result<VerificationReport> {
    let quad = resolvent_quadrature(op, tbar, lambda, f, m_bound, cfg, 0)?;
    let dir = elliptic_direct(op, tbar, lambda, f, m_bound, cfg)?;
    let inner = 0.5 * f.grid.domain.radius;
    let diff = quad
        .solution
        .restrict(inner)?
        .sup_diff(&dir.solution.restrict(inner)?);
    let tol = tolerances::RESOLVENT_AGREE.max(10.0 * cfg.linear_tol);
    Ok(
        VerificationReport::new("resolvent-consistency", preset, diff, 0.0, tol).with_details(
            serde_json::json!({
                "lambda": lambda,
                "residual_quadrature": quad.residual,
                "residual_direct": dir.residual,
                "t_trunc": quad.t_trunc,
            }),
        ),
    )
}

/// Elliptic Schauder experiment: the ratio `sup_t ||u(t)||_{C^{2+theta}} /
/// sup_t ||f(t)||_{C^theta}` must be stable under one grid refinement (the
/// constant itself is not known).
#[allow(clippy::too_many_arguments)]
pub fn schauder_experiment(
    op: &OperatorFamily,
    f_source: &ManufacturedSolution,
    lambda: f64,
    theta: f64,
    interval: (f64, f64),
    grids: (UniformGrid, UniformGrid),
    m_bound: f64,
    cfg: &SolverConfig,
    preset: &str,
) -> Result<VerificationReport> {
    assert!(theta > 0.0 && theta < 1.0);
    let times: Vec<f64> = (0..5)
        .map(|i| interval.0 + (interval.1 - interval.0) * i as f64 / 4.0)
        .collect();
    let ratio_on = |grid: UniformGrid| -> Result<f64> {
        let inner = 0.5 * grid.domain.radius;
        let mut worst_u = 0.0f64;
        let mut worst_f = 0.0f64;
        for &t in &times {
            let f = f_source.field(grid, t);
            let u = elliptic_direct(op, t, lambda, &f, m_bound, cfg)?.solution;
            worst_u = worst_u.max(ctheta_norm(
                &u.restrict(inner)?,
                2.0 + theta,
                HOLDER_PAIR_CAP,
            )?);
            worst_f = worst_f.max(ctheta_norm(&f.restrict(inner)?, theta, HOLDER_PAIR_CAP)?);
        }
        Ok(worst_u / worst_f)
    };
    let coarse = ratio_on(grids.0)?;
    let fine = ratio_on(grids.1)?;
    let drift = (fine - coarse).abs() / coarse;
    Ok(VerificationReport::new(
        "schauder-elliptic",
        preset,
        drift,
        0.0,
        tolerances::SCHAUDER_STABILITY,
    )
    .with_details(serde_json::json!({
        "ratio_coarse": coarse,
        "ratio_fine": fine,
        "lambda": lambda,
        "theta": theta,
    })))
}

/// Manufactured elliptic recovery: f := lambda u0 - A u0 computed
/// analytically; the discrete solve must recover u0 in the C^2 norm.
#[allow(clippy::too_many_arguments)]
pub fn manufactured_elliptic_recovery(
    op: &OperatorFamily,
    tbar: f64,
    lambda: f64,
    u0: &ManufacturedSolution,
    grid: UniformGrid,
    m_bound: f64,
    cfg: &SolverConfig,
    preset: &str,
) -> Result<VerificationReport> {
    let exact = u0.field(grid, tbar);
    let au = u0.apply_operator(op, grid, tbar);
    let f = exact.linear_comb(lambda, &au, -1.0);
    let u = elliptic_direct(op, tbar, lambda, &f, m_bound, cfg)?.solution;
    let inner = 0.5 * grid.domain.radius;
    let err = u.linear_comb(1.0, &exact, -1.0).restrict(inner)?;
    let c2 = ck_norm(&err, 2)?;
    Ok(VerificationReport::new(
        "schauder-manufactured-elliptic",
        preset,
        c2,
        0.0,
        tolerances::MANUFACTURED_C2,
    )
    .with_details(serde_json::json!({ "lambda": lambda })))
}

/// Parabolic Schauder experiment: inhomogeneous Cauchy problem with smooth
/// data; measures the regularity ratio, its refinement stability and the
/// theta/2-Hölder modulus of t -> u(t) in C^2 on the inner box.
#[allow(clippy::too_many_arguments)]
pub fn parabolic_schauder_experiment(
    op: &OperatorFamily,
    f0: &ManufacturedSolution,
    g_source: &ManufacturedSolution,
    theta: f64,
    interval: (f64, f64),
    grids: (UniformGrid, UniformGrid),
    cfg: &SolverConfig,
    preset: &str,
) -> Result<VerificationReport> {
    let (s, t_end) = interval;
    let snaps: Vec<f64> = (1..=8).map(|i| s + (t_end - s) * i as f64 / 8.0).collect();
    let run_on = |grid: UniformGrid| -> Result<(f64, f64)> {
        let inner = 0.5 * grid.domain.radius;
        let f = f0.field(grid, s);
        let forcing = |t: f64| g_source.field(grid, t);
        let run = solve_cauchy(op, s, t_end, &f, Some(&forcing), cfg, &snaps)?;
        let mut worst_u = 0.0f64;
        let f_norm = ctheta_norm(&f.restrict(inner)?, 2.0 + theta, HOLDER_PAIR_CAP)?;
        let mut g_norm = 0.0f64;
        let mut inner_states = Vec::new();
        for (i, _) in run.times.iter().enumerate() {
            let state = run.snapshots[i].restrict(inner)?;
            worst_u = worst_u.max(ctheta_norm(&state, 2.0 + theta, HOLDER_PAIR_CAP)?);
            inner_states.push(state);
            let g = g_source.field(grid, run.times[i]).restrict(inner)?;
            g_norm = g_norm.max(ctheta_norm(&g, theta, HOLDER_PAIR_CAP)?);
        }
        let denom = f_norm + g_norm;
        // Time-Hölder modulus of u in C^2 on the inner box.
        let mut modulus = 0.0f64;
        for i in 0..inner_states.len() {
            for j in (i + 1)..inner_states.len() {
                let dtau = (run.times[j] - run.times[i]).abs();
                if dtau < 1e-12 {
                    continue;
                }
                let diff = inner_states[j].linear_comb(1.0, &inner_states[i], -1.0);
                modulus = modulus.max(ck_norm(&diff, 2)? / dtau.powf(0.5 * theta));
            }
        }
        Ok((worst_u / denom, modulus))
    };
    let (rc, mc) = run_on(grids.0)?;
    let (rf, mf) = run_on(grids.1)?;
    let drift = (rf - rc).abs() / rc;
    let modulus_stable = mf <= mc * 1.25 + 1e-12;
    let mut report = VerificationReport::new(
        "schauder-parabolic",
        preset,
        drift,
        0.0,
        tolerances::SCHAUDER_STABILITY,
    )
    .with_details(serde_json::json!({
        "ratio_coarse": rc,
        "ratio_fine": rf,
        "time_holder_modulus_coarse": mc,
        "time_holder_modulus_fine": mf,
        "theta": theta,
    }));
    if !modulus_stable {
        report.verdict = crate::report::Verdict::Fail;
    }
    Ok(report)
}

/// Manufactured parabolic recovery: g := D_t u0 - A u0 analytically; the
/// solve from u0(s) must track u0(t) in C^2.
#[allow(clippy::too_many_arguments)]
pub fn manufactured_parabolic_recovery(
    op: &OperatorFamily,
    u0: &ManufacturedSolution,
    interval: (f64, f64),
    grid: UniformGrid,
    cfg: &SolverConfig,
    preset: &str,
) -> Result<VerificationReport> {
    let (s, t_end) = interval;
    let f = u0.field(grid, s);
    let forcing = |t: f64| -> GridFunction {
        let dt_field = GridFunction::from_fn(grid, u0.modes.len(), |k, x| u0.dt(k, t, x));
        let au = u0.apply_operator(op, grid, t);
        dt_field.linear_comb(1.0, &au, -1.0)
    };
    let run = solve_cauchy(op, s, t_end, &f, Some(&forcing), cfg, &[t_end])?;
    let exact = u0.field(grid, t_end);
    let inner = 0.5 * grid.domain.radius;
    let err = run.last().linear_comb(1.0, &exact, -1.0).restrict(inner)?;
    let c2 = ck_norm(&err, 2)?;
    Ok(VerificationReport::new(
        "schauder-manufactured-parabolic",
        preset,
        c2,
        0.0,
        tolerances::MANUFACTURED_C2,
    ))
}

/// Interpolation inequality of the domain characterization:
/// `||f||_{C^theta} <= C ||f||_inf^{1-theta/2} ||f||_{D(A)}^{theta/2}`,
/// tested on resolvent images of random data: the ratio must be bounded
/// across trials and stable under refinement.
#[allow(clippy::too_many_arguments)]
pub fn check_interpolation_inequality(
    op: &OperatorFamily,
    tbar: f64,
    theta: f64,
    trials: usize,
    grids: (UniformGrid, UniformGrid),
    m_bound: f64,
    cfg: &SolverConfig,
    seed: u64,
    preset: &str,
) -> Result<VerificationReport> {
    assert!(theta > 0.0 && theta < 2.0);
    let lambda = m_bound + 2.0;
    let ratio_on = |grid: UniformGrid| -> Result<f64> {
        let inner = 0.5 * grid.domain.radius;
        let frozen = Frozen {
            inner: op,
            at: tbar,
        };
        let disc = DiscreteOperator::assemble(&frozen, 0.0, grid);
        let mut worst = 0.0f64;
        for trial in 0..trials {
            let g = random_smooth(
                grid,
                op.comps,
                &SmoothFieldSpec::default(),
                seed + trial as u64,
            );
            let f = elliptic_direct(op, tbar, lambda, &g, m_bound, cfg)?.solution;
            let af = disc.apply(&f);
            let f_in = f.restrict(inner)?;
            let num = ctheta_norm(&f_in, theta, HOLDER_PAIR_CAP)?;
            let sup = f_in.sup_norm();
            let dom = sup + af.restrict(inner)?.sup_norm();
            let ratio = num / (sup.powf(1.0 - 0.5 * theta) * dom.powf(0.5 * theta));
            worst = worst.max(ratio);
        }
        Ok(worst)
    };
    let coarse = ratio_on(grids.0)?;
    let fine = ratio_on(grids.1)?;
    let drift = (fine - coarse).abs() / coarse;
    Ok(VerificationReport::new(
        "interpolation-inequality",
        preset,
        drift,
        0.0,
        tolerances::SCHAUDER_STABILITY,
    )
    .with_details(serde_json::json!({
        "ratio_coarse": coarse,
        "ratio_fine": fine,
        "theta": theta,
    })))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::BoxDomain;

    fn grid1(n: usize, r: f64) -> UniformGrid {
        UniformGrid::new(BoxDomain::new(r, 1), n).unwrap()
    }

    #[test]
    fn lambda_too_small_is_rejected() {
        let op = crate::evolve::tests::heat_1d();
        let g = grid1(41, 2.0);
        let f = GridFunction::from_fn(g, 1, |_, _| 1.0);
        let err = resolvent_quadrature(&op, 0.0, 0.3, &f, 0.0, &SolverConfig::default(), 0);
        assert!(matches!(err, Err(Error::LambdaTooSmall { .. })));
    }

    #[test]
    fn near_degenerate_diffusion_constant_data() {
        // Constants are semigroup-invariant: R(lambda) f = f / lambda.
        let mut op = crate::evolve::tests::heat_1d();
        op.diffusion[0][0] = crate::coeff::CoefficientExpr::constant(1e-6);
        let g = grid1(81, 2.0);
        let f = GridFunction::from_fn(g, 1, |_, _| 1.0);
        let lambda = 2.0;
        let r = resolvent_quadrature(
            &op,
            0.0,
            lambda,
            &f,
            0.0,
            &SolverConfig::default().with_dt(1e-2),
            0,
        )
        .unwrap();
        let mut worst = 0.0f64;
        for v in &r.solution.data[0] {
            worst = worst.max((v - 1.0 / lambda).abs());
        }
        assert!(worst <= 1e-6, "constants: worst {worst:.2e}");
    }

    #[test]
    fn direct_solve_zero_rhs_gives_zero() {
        let op = crate::evolve::tests::ou_1d();
        let g = grid1(81, 3.0);
        let f = GridFunction::zeros(g, 1);
        let r = elliptic_direct(&op, 0.0, 1.0, &f, 0.0, &SolverConfig::default()).unwrap();
        assert_eq!(r.solution.sup_norm(), 0.0);
    }

    #[test]
    fn green_function_oracle_heat_lambda_one() {
        // (1 - d^2/dx^2)^{-1} f = (1/2) int e^{-|x-y|} f(y) dy.
        let op = crate::evolve::tests::heat_1d();
        let g = grid1(801, 16.0);
        let f = GridFunction::from_fn(g, 1, |_, x| (-x[0] * x[0] / 0.5).exp());
        let r = elliptic_direct(&op, 0.0, 1.0, &f, 0.0, &SolverConfig::default()).unwrap();
        let w = g.trapezoid_weights();
        let inner = r.solution.restrict(4.0).unwrap();
        let mut worst = 0.0f64;
        for i in 0..inner.grid.len() {
            let x = inner.grid.point(i)[0];
            let conv: f64 = (0..g.len())
                .map(|j| {
                    let y = g.point(j)[0];
                    0.5 * (-(x - y).abs()).exp() * f.data[0][j] * w[j]
                })
                .sum();
            worst = worst.max((inner.data[0][i] - conv).abs());
        }
        assert!(worst <= 1e-3, "Green oracle sup error {worst:.2e}");
    }

    #[test]
    fn homogeneity_of_both_methods() {
        let op = crate::evolve::tests::ou_1d();
        let g = grid1(101, 4.0);
        let f = random_smooth(g, 1, &SmoothFieldSpec::default(), 3);
        let cfg = SolverConfig::default().with_dt(5e-3);
        let alpha = -2.7;
        for method in [ResolventMethod::Direct, ResolventMethod::Quadrature] {
            let solve = |field: &GridFunction| -> GridFunction {
                match method {
                    ResolventMethod::Direct => {
                        elliptic_direct(&op, 0.0, 1.5, field, 0.0, &cfg)
                            .unwrap()
                            .solution
                    }
                    ResolventMethod::Quadrature => {
                        resolvent_quadrature(&op, 0.0, 1.5, field, 0.0, &cfg, 0)
                            .unwrap()
                            .solution
                    }
                }
            };
            let a = solve(&f.scale(alpha));
            let b = solve(&f).scale(alpha);
            assert!(a.sup_diff(&b) <= 1e-11, "{method:?}");
        }
    }

    #[test]
    fn identity_trivial_for_equal_lambdas() {
        let op = crate::evolve::tests::ou_1d();
        let g = grid1(81, 3.0);
        let f = random_smooth(g, 1, &SmoothFieldSpec::default(), 21);
        let rep = check_resolvent_identity(
            &op,
            0.0,
            2.0,
            2.0,
            &f,
            0.0,
            &SolverConfig::default(),
            ResolventMethod::Direct,
            0,
            "ou",
        )
        .unwrap();
        assert!(rep.measured_left <= 1e-11);
    }

    #[test]
    fn abelian_limit_lambda_r_lambda_to_identity() {
        let op = crate::evolve::tests::ou_1d();
        let g = grid1(101, 4.0);
        let f = random_smooth(
            g,
            1,
            &SmoothFieldSpec {
                localized: true,
                ..Default::default()
            },
            5,
        );
        let cfg = SolverConfig::default();
        let mut prev = f64::INFINITY;
        for lambda in [4.0, 16.0, 64.0] {
            let r = elliptic_direct(&op, 0.0, lambda, &f, 0.0, &cfg).unwrap();
            let dev = r.solution.scale(lambda).sup_diff(&f);
            assert!(
                dev < prev,
                "lambda R(lambda) f -> f not improving at {lambda}"
            );
            prev = dev;
        }
    }
}
