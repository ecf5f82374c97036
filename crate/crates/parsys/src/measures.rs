//! Systems of signed invariant measures for the autonomous shared-diffusion
//! case: spectra and kernels of the coupling matrices, the scalar stationary
//! density (closed form in d = 1, discrete adjoint nullspace in general),
//! the weighted system mu_k = eta_k mu, and the long-time checks
//! (invariance, asymptotics, L^p bounds, domination, fixed points, gradient
//! decay).

use crate::coeff::CoefficientExpr;
use crate::evolve::{solve_frozen, SolverConfig};
use crate::grid::{derivative, GridFunction, UniformGrid};
use crate::linalg::{adaptive_simpson, eigenvalues, kernel_vector, Banded, BandedLu};
use crate::operator::{CoefficientField, OperatorFamily, ScalarPart};
use crate::report::{VerificationReport, Witness};
use crate::tolerances;
use crate::{Error, Result};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

/// Spectra and kernels of C(x) and C^P(x) over a sample of points.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CouplingAnalysis {
    pub points: Vec<Vec<f64>>,
    /// Eigenvalues (re, im) of C at each sample, sorted by real part.
    pub eigen_c: Vec<Vec<(f64, f64)>>,
    pub eigen_cp: Vec<Vec<(f64, f64)>>,
    /// Common kernel of C, unit norm, last nonzero component positive.
    pub eta: Vec<f64>,
    /// Common kernel of C^P, unit norm, componentwise positive.
    pub xi: Vec<f64>,
    /// Max real part among nonzero eigenvalues over all samples (negative
    /// with margin when the spectral claim holds).
    pub spectral_margin: f64,
    pub real_parts_nonpositive: bool,
    pub zero_simple: bool,
    pub no_imaginary_nonzero: bool,
    pub eta_constant: bool,
}

impl CouplingAnalysis {
    pub fn pass(&self) -> bool {
        self.real_parts_nonpositive
            && self.zero_simple
            && self.no_imaginary_nonzero
            && self.eta_constant
    }
}

/// Dense eigendecompositions of the coupling matrices at the sample points.
pub fn analyze_coupling(op: &OperatorFamily, points: &[Vec<f64>]) -> Result<CouplingAnalysis> {
    if !op.is_autonomous() {
        return Err(Error::InvalidConfig(
            "coupling analysis needs an autonomous operator".into(),
        ));
    }
    let m = op.comps;
    let aux = op.derive_auxiliary();
    let mut eigen_c = Vec::new();
    let mut eigen_cp = Vec::new();
    let mut margin = f64::NEG_INFINITY;
    let mut real_ok = true;
    let mut zero_simple = true;
    let mut no_imag = true;
    let mut eta_ref: Option<Vec<f64>> = None;
    let mut eta_constant = true;
    let mut xi = vec![0.0; m];
    for x in points {
        let mut c = vec![0.0; m * m];
        let mut cp = vec![0.0; m * m];
        op.coupling_at(0.0, x, &mut c);
        aux.coupling_at(0.0, x, &mut cp);
        let cm = DMatrix::from_row_slice(m, m, &c);
        let cpm = DMatrix::from_row_slice(m, m, &cp);
        let scale = cm.iter().map(|v| v.abs()).fold(1e-300, f64::max);
        let ev = eigenvalues(&cm);
        let evp = eigenvalues(&cpm);
        let mut zeros = 0usize;
        for &(re, im) in &ev {
            let mag = re.hypot(im);
            if mag <= 1e-10 * scale.max(1.0) {
                zeros += 1;
                continue;
            }
            if re > 1e-10 * scale.max(1.0) {
                real_ok = false;
            }
            if re.abs() <= 1e-10 && im.abs() > 1e-8 {
                no_imag = false;
            }
            margin = margin.max(re);
        }
        if zeros != 1 {
            zero_simple = false;
        }
        let (eta_x, _, _) = kernel_vector(&cm);
        match &eta_ref {
            None => eta_ref = Some(eta_x.iter().copied().collect()),
            Some(r) => {
                let dot: f64 = r.iter().zip(eta_x.iter()).map(|(a, b)| a * b).sum();
                if (dot.abs() - 1.0).abs() > 1e-8 {
                    eta_constant = false;
                }
            }
        }
        let (xi_x, _, _) = kernel_vector(&cpm);
        xi = xi_x.iter().copied().collect();
        eigen_c.push(ev);
        eigen_cp.push(evp);
    }
    let mut eta = eta_ref.unwrap_or_else(|| vec![0.0; m]);
    if let Some(last) = eta.iter().rev().find(|v| v.abs() > 1e-12) {
        if *last < 0.0 {
            eta.iter_mut().for_each(|v| *v = -*v);
        }
    }
    // xi componentwise positive by convention (Perron direction of C^P).
    let flip = xi.iter().sum::<f64>() < 0.0;
    if flip {
        xi.iter_mut().for_each(|v| *v = -*v);
    }
    Ok(CouplingAnalysis {
        points: points.to_vec(),
        eigen_c,
        eigen_cp,
        eta,
        xi,
        spectral_margin: margin,
        real_parts_nonpositive: real_ok,
        zero_simple,
        no_imaginary_nonzero: no_imag,
        eta_constant,
    })
}

fn outer_mass_check(mu: &GridFunction, weights: &[f64]) -> Result<()> {
    let grid = mu.grid;
    let cut = 0.9 * grid.domain.radius;
    let mut outer = 0.0;
    for i in 0..grid.len() {
        if grid.point(i).iter().any(|v| v.abs() >= cut) {
            outer += mu.data[0][i] * weights[i];
        }
    }
    if outer > tolerances::OUTER_MASS {
        return Err(Error::NonIntegrable {
            outer_mass: outer,
            limit: tolerances::OUTER_MASS,
        });
    }
    Ok(())
}

/// Closed-form stationary density of the 1-d scalar operator
/// `q u'' + b u'`: mu(x) proportional to exp(int_0^x b/q) / q, evaluated by
/// adaptive quadrature and normalized on the truncated domain. This is the
/// zero-flux stationary state of the adjoint equation (q mu)'' - (b mu)' = 0.
pub fn scalar_invariant_density_1d(
    q: &CoefficientExpr,
    b: &CoefficientExpr,
    grid: UniformGrid,
) -> Result<GridFunction> {
    let mu = scalar_invariant_density_1d_unaudited(q, b, grid);
    outer_mass_check(&mu, &grid.trapezoid_weights())?;
    Ok(mu)
}

/// The same density without the truncation audit: the zero-flux stationary
/// state of the box problem itself (e.g. the uniform density for zero
/// drift), regardless of whether the box is a trustworthy surrogate for the
/// whole space.
pub fn scalar_invariant_density_1d_unaudited(
    q: &CoefficientExpr,
    b: &CoefficientExpr,
    grid: UniformGrid,
) -> GridFunction {
    assert_eq!(grid.dim(), 1);
    let n = grid.points_per_axis;
    let ratio = |x: f64| b.eval(0.0, &[x]) / q.eval(0.0, &[x]);
    // Cumulative integral of b/q from the origin, cell by cell.
    let mid = (n - 1) / 2;
    let mut integral = vec![0.0; n];
    for i in mid..n - 1 {
        integral[i + 1] =
            integral[i] + adaptive_simpson(&ratio, grid.coord(i), grid.coord(i + 1), 1e-13);
    }
    for i in (0..mid).rev() {
        integral[i] =
            integral[i + 1] - adaptive_simpson(&ratio, grid.coord(i), grid.coord(i + 1), 1e-13);
    }
    let max_i = integral.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut vals: Vec<f64> = (0..n)
        .map(|i| (integral[i] - max_i).exp() / q.eval(0.0, &[grid.coord(i)]))
        .collect();
    let weights = grid.trapezoid_weights();
    let mass: f64 = vals.iter().zip(&weights).map(|(v, w)| v * w).sum();
    vals.iter_mut().for_each(|v| *v /= mass);
    GridFunction {
        grid,
        data: vec![vals],
    }
}

/// Conservative-form discrete adjoint with zero-flux faces, as a banded
/// matrix in the flat ordering. d = 1 general; d = 2 requires diagonal
/// diffusion.
fn adjoint_matrix(op: &dyn CoefficientField, grid: UniformGrid) -> Result<Banded> {
    let n = grid.points_per_axis;
    let h = grid.spacing;
    let d = grid.dim();
    let q_at = |x: &[f64], axis: usize| -> f64 {
        let mut q = vec![0.0; d * d];
        op.diffusion_at(0, 0.0, x, &mut q);
        q[axis * d + axis]
    };
    let b_at = |x: &[f64], axis: usize| -> f64 {
        let mut b = vec![0.0; d];
        op.drift_at(0, 0.0, x, &mut b);
        b[axis]
    };
    if d == 2 {
        let probe = grid.point(grid.len() / 3);
        let mut q = vec![0.0; 4];
        op.diffusion_at(0, 0.0, &probe, &mut q);
        if q[1].abs() > 1e-14 {
            return Err(Error::InvalidConfig(
                "stationary adjoint solver supports diagonal diffusion in d = 2".into(),
            ));
        }
    }
    let band = if d == 1 { 1 } else { n };
    let mut mat = Banded::zeros(grid.len(), band, band);
    // Flux difference along each axis: (A* mu)_i += (F_{i+1/2} - F_{i-1/2})/h
    // with F_{i+1/2} = ((q mu)_{i+1} - (q mu)_i)/h - b_{i+1/2} (mu_i + mu_{i+1})/2
    // and zero flux at the domain faces.
    for idx in 0..grid.len() {
        let mi = grid.multi_index(idx);
        let x = grid.point(idx);
        for axis in 0..d {
            let stride = grid.stride(axis);
            // Face toward +axis.
            if mi[axis] + 1 < n {
                let jdx = idx + stride;
                let xj = grid.point(jdx);
                let mut xm = x.clone();
                xm[axis] = 0.5 * (x[axis] + xj[axis]);
                let bm = b_at(&xm, axis);
                // F+ = (q_j mu_j - q_i mu_i)/h - bm (mu_i + mu_j)/2, added with +1/h.
                mat.add(idx, jdx, q_at(&xj, axis) / (h * h) - bm / (2.0 * h));
                mat.add(idx, idx, -q_at(&x, axis) / (h * h) - bm / (2.0 * h));
            }
            // Face toward -axis.
            if mi[axis] > 0 {
                let jdx = idx - stride;
                let xj = grid.point(jdx);
                let mut xm = x.clone();
                xm[axis] = 0.5 * (x[axis] + xj[axis]);
                let bm = b_at(&xm, axis);
                // F- = (q_i mu_i - q_j mu_j)/h - bm (mu_j + mu_i)/2, subtracted with -1/h.
                mat.add(idx, jdx, q_at(&xj, axis) / (h * h) + bm / (2.0 * h));
                mat.add(idx, idx, -q_at(&x, axis) / (h * h) + bm / (2.0 * h));
            }
        }
    }
    Ok(mat)
}

fn transpose_banded(a: &Banded) -> Banded {
    let mut out = Banded::zeros(a.n, a.ku, a.kl);
    for i in 0..a.n {
        for j in i.saturating_sub(a.kl)..=(i + a.ku).min(a.n - 1) {
            let v = a.get(i, j);
            if v != 0.0 {
                out.set(j, i, v);
            }
        }
    }
    out
}

/// Two smallest singular values of a factored (shifted) matrix by block
/// inverse power iteration on inv(A) inv(A^T).
fn smallest_singular_pair(lu: &BandedLu, lut: &BandedLu, n: usize) -> (f64, f64) {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
    let mut v1: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut v2: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let normalize = |v: &mut Vec<f64>| {
        let nrm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        v.iter_mut().for_each(|a| *a /= nrm);
        nrm
    };
    let mut theta1 = 0.0;
    let mut theta2 = 0.0;
    for _ in 0..25 {
        // v <- A^{-1} A^{-T} v  (one power step on inv(A A^T)).
        let step = |v: &[f64]| -> Vec<f64> {
            let mut w = lut.solve(v);
            lu.solve_in_place(&mut w);
            w
        };
        v1 = step(&v1);
        theta1 = normalize(&mut v1);
        v2 = step(&v2);
        let proj: f64 = v1.iter().zip(&v2).map(|(a, b)| a * b).sum();
        for i in 0..n {
            v2[i] -= proj * v1[i];
        }
        theta2 = normalize(&mut v2);
    }
    (theta1.powf(-0.5), theta2.powf(-0.5))
}

/// Stationary density as the nullspace of the discrete adjoint (inverse
/// iteration with a tiny shift), normalized to unit mass.
pub fn scalar_invariant_density_stationary(
    op: &dyn CoefficientField,
    grid: UniformGrid,
) -> Result<GridFunction> {
    let mu = scalar_invariant_density_stationary_unaudited(op, grid)?;
    outer_mass_check(&mu, &grid.trapezoid_weights())?;
    Ok(mu)
}

/// The discrete stationary state without the truncation audit.
pub fn scalar_invariant_density_stationary_unaudited(
    op: &dyn CoefficientField,
    grid: UniformGrid,
) -> Result<GridFunction> {
    // Degeneracy is structural; probe it at a capped resolution so the
    // singular-value estimate never needs a second large factorization.
    let probe_grid = if grid.len() > 20_000 {
        UniformGrid::new(grid.domain, (grid.points_per_axis / 2) | 1)?
    } else {
        grid
    };
    {
        let a = adjoint_matrix(op, probe_grid)?;
        let n = probe_grid.len();
        let scale = (0..n).map(|i| a.get(i, i).abs()).fold(1e-300, f64::max);
        let sigma = 1e-8 * scale;
        let mut shifted = a;
        for i in 0..n {
            shifted.add(i, i, -sigma);
        }
        let lu = shifted
            .clone()
            .factor()
            .map_err(|e| Error::InvalidConfig(format!("adjoint factorization failed: {e}")))?;
        let lut = transpose_banded(&shifted)
            .factor()
            .map_err(|e| Error::InvalidConfig(format!("adjoint^T factorization failed: {e}")))?;
        let (sigma_min, sigma_next) = smallest_singular_pair(&lu, &lut, n);
        if sigma_next < 1e3 * sigma_min {
            return Err(Error::DegenerateNullspace {
                sigma_min,
                sigma_next,
            });
        }
    }
    let a = adjoint_matrix(op, grid)?;
    let n = grid.len();
    let scale = (0..n).map(|i| a.get(i, i).abs()).fold(1e-300, f64::max);
    let sigma = 1e-8 * scale;
    let mut shifted = a;
    for i in 0..n {
        shifted.add(i, i, -sigma);
    }
    let lu = shifted
        .factor()
        .map_err(|e| Error::InvalidConfig(format!("adjoint factorization failed: {e}")))?;
    let mut v = vec![1.0; n];
    for _ in 0..5 {
        lu.solve_in_place(&mut v);
        let nrm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        v.iter_mut().for_each(|a| *a /= nrm);
    }
    let total: f64 = v.iter().sum();
    if total < 0.0 {
        v.iter_mut().for_each(|a| *a = -*a);
    }
    let min = v.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if min < -1e-8 * max {
        return Err(Error::InvalidConfig(format!(
            "stationary state changes sign (min {min:.3e}, max {max:.3e})"
        )));
    }
    v.iter_mut().for_each(|a| *a = a.max(0.0));
    let weights = grid.trapezoid_weights();
    let mass: f64 = v.iter().zip(&weights).map(|(a, w)| a * w).sum();
    v.iter_mut().for_each(|a| *a /= mass);
    Ok(GridFunction {
        grid,
        data: vec![v],
    })
}

/// A system (mu_1, ..., mu_m) of signed measures as densities: mu_k =
/// eta_k mu with sum eta_k^2 = 1; |mu_k| = xi_k mu.
#[derive(Debug, Clone)]
pub struct MeasureVector {
    pub density: GridFunction,
    pub eta: Vec<f64>,
    pub xi: Vec<f64>,
}

impl MeasureVector {
    /// Integral sum_k int g_k d mu_k.
    pub fn pair(&self, g: &GridFunction) -> f64 {
        let w = self.density.grid.trapezoid_weights();
        let mu = &self.density.data[0];
        let mut acc = 0.0;
        for (k, &eta_k) in self.eta.iter().enumerate() {
            acc += eta_k
                * g.data[k]
                    .iter()
                    .zip(mu.iter().zip(&w))
                    .map(|(gv, (m, wv))| gv * m * wv)
                    .sum::<f64>();
        }
        acc
    }

    /// L^p norm against the total variations |mu_k| = xi_k mu.
    pub fn lp_norm(&self, g: &GridFunction, p: f64) -> f64 {
        let w = self.density.grid.trapezoid_weights();
        let mu = &self.density.data[0];
        let mut acc = 0.0;
        for (k, &xi_k) in self.xi.iter().enumerate() {
            acc += xi_k
                * g.data[k]
                    .iter()
                    .zip(mu.iter().zip(&w))
                    .map(|(gv, (m, wv))| gv.abs().powf(p) * m * wv)
                    .sum::<f64>();
        }
        acc.powf(1.0 / p)
    }
}

/// Weighted system from the coupling analysis and a scalar density; verifies
/// the componentwise identity |mu_k| = xi_k mu.
pub fn build_system_measures(
    analysis: &CouplingAnalysis,
    mu: &GridFunction,
) -> Result<MeasureVector> {
    if !analysis.eta_constant {
        return Err(Error::InvalidConfig(
            "kernel direction is not constant across samples".into(),
        ));
    }
    if !analysis.zero_simple {
        // Degenerate row/column structure (e.g. C identically zero): the
        // kernel is not one-dimensional and no distinguished eta exists.
        return Err(Error::InvalidConfig(
            "zero is not a simple eigenvalue of the coupling matrix".into(),
        ));
    }
    let eta = analysis.eta.clone();
    let xi = analysis.xi.clone();
    for (k, &e) in eta.iter().enumerate() {
        if (e.abs() - xi[k]).abs() > tolerances::EXACT {
            return Err(Error::InvalidConfig(format!(
                "|eta_{k}| = {} does not match xi_{k} = {}",
                e.abs(),
                xi[k]
            )));
        }
    }
    let w = mu.grid.trapezoid_weights();
    let mass: f64 = mu.data[0].iter().zip(&w).map(|(v, wv)| v * wv).sum();
    if (mass - 1.0).abs() > tolerances::MASS_DEFECT {
        return Err(Error::InvalidConfig(format!(
            "density mass {mass} is not 1"
        )));
    }
    Ok(MeasureVector {
        density: mu.clone(),
        eta,
        xi,
    })
}

/// Invariance: sum_k int (T(t) f)_k d mu_k = sum_k int f_k d mu_k for each t.
pub fn check_invariance(
    op: &OperatorFamily,
    mv: &MeasureVector,
    batch: &[GridFunction],
    ts: &[f64],
    cfg: &SolverConfig,
    preset: &str,
) -> Result<VerificationReport> {
    let horizon = ts.iter().cloned().fold(0.0, f64::max);
    let mut worst = 0.0f64;
    let mut witness_t = 0.0;
    for f in batch {
        let run = solve_frozen(op, 0.0, horizon, f, cfg, ts)?;
        let rhs = mv.pair(f);
        for &t in ts {
            let lhs = mv.pair(run.at(t));
            let dev = (lhs - rhs).abs() / f.sup_norm().max(1e-300);
            if dev > worst {
                worst = dev;
                witness_t = t;
            }
        }
    }
    Ok(
        VerificationReport::new("invariance", preset, worst, 0.0, tolerances::INVARIANCE)
            .with_witness(Witness {
                t: witness_t,
                x: vec![],
                component: None,
            }),
    )
}

/// Long-time behaviour: T(t) f -> M_f eta locally uniformly, with
/// M_f = sum_k int f_k d mu_k.
pub fn check_asymptotics(
    op: &OperatorFamily,
    f: &GridFunction,
    mv: &MeasureVector,
    horizon: f64,
    cfg: &SolverConfig,
    preset: &str,
) -> Result<VerificationReport> {
    let m_f = mv.pair(f);
    let times: Vec<f64> = (0..5).map(|i| horizon * 0.5f64.powi(4 - i)).collect();
    let run = solve_frozen(op, 0.0, horizon, f, cfg, &times)?;
    let quarter = 0.25 * f.grid.domain.radius;
    let limit = GridFunction::from_fn(f.grid, op.comps, |k, _| m_f * mv.eta[k]);
    let e0 = f.restrict(quarter)?.sup_diff(&limit.restrict(quarter)?);
    let mut errors = vec![e0];
    for &t in &times {
        errors.push(
            run.at(t)
                .restrict(quarter)?
                .sup_diff(&limit.restrict(quarter)?),
        );
    }
    let decreasing = errors.windows(2).all(|w| w[1] <= w[0] + 1e-12);
    let final_ratio = errors[errors.len() - 1] / errors[0].max(1e-300);
    let mut report = VerificationReport::new(
        "asymptotics",
        preset,
        final_ratio,
        0.0,
        tolerances::ASYMPTOTIC_FACTOR,
    )
    .with_details(serde_json::json!({ "m_f": m_f, "errors": errors, "horizon": horizon }));
    if !decreasing {
        report.verdict = crate::report::Verdict::Fail;
    }
    Ok(report)
}

/// L^p bound ||T(t)||_{L^p_mu} <= 2^{(p-1)/p}.
#[allow(clippy::too_many_arguments)]
pub fn check_lp_bound(
    op: &OperatorFamily,
    mv: &MeasureVector,
    p: f64,
    t: f64,
    trials: usize,
    cfg: &SolverConfig,
    seed: u64,
    preset: &str,
) -> Result<VerificationReport> {
    use crate::data::{random_smooth, SmoothFieldSpec};
    let bound = 2f64.powf((p - 1.0) / p);
    let mut worst = 0.0f64;
    for trial in 0..trials {
        let f = random_smooth(
            mv.density.grid,
            op.comps,
            &SmoothFieldSpec {
                localized: true,
                ..Default::default()
            },
            seed + trial as u64,
        );
        let run = solve_frozen(op, 0.0, t, &f, cfg, &[t])?;
        let num = mv.lp_norm(run.at(t), p);
        let den = mv.lp_norm(&f, p).max(1e-300);
        worst = worst.max(num / (den * bound));
    }
    Ok(
        VerificationReport::new("lp-bound", preset, worst, 1.0, tolerances::LP_REL)
            .with_details(serde_json::json!({ "p": p, "t": t, "bound": bound })),
    )
}

/// Domination by the scalar semigroup:
/// max(||T(t)f(x)||^2, ||T^P(t)f(x)||^2) <= (T(t) ||f||^2)(x).
pub fn check_domination(
    op: &OperatorFamily,
    f: &GridFunction,
    ts: &[f64],
    cfg: &SolverConfig,
    preset: &str,
) -> Result<VerificationReport> {
    let horizon = ts.iter().cloned().fold(0.0, f64::max);
    let aux = op.derive_auxiliary();
    let grid = f.grid;
    let run = solve_frozen(op, 0.0, horizon, f, cfg, ts)?;
    let run_p = solve_frozen(&aux, 0.0, horizon, f, cfg, ts)?;
    let scalar = ScalarPart {
        op,
        comp: 0,
        with_diagonal_potential: false,
    };
    let f_sq = GridFunction {
        grid,
        data: vec![(0..grid.len())
            .map(|i| (0..op.comps).map(|k| f.data[k][i] * f.data[k][i]).sum())
            .collect()],
    };
    let run_sq = solve_frozen(&scalar, 0.0, horizon, &f_sq, cfg, ts)?;
    let h = grid.spacing;
    let dt = cfg.effective_dt(&grid, horizon);
    let tol = tolerances::CMP_FACTOR * (h * h + dt) * f.sup_norm().powi(2).max(1.0);
    let inner = 0.5 * grid.domain.radius;
    let mut worst = f64::NEG_INFINITY;
    let mut witness = Witness {
        t: 0.0,
        x: vec![],
        component: None,
    };
    for &t in ts {
        let u = run.at(t).restrict(inner)?;
        let up = run_p.at(t).restrict(inner)?;
        let sq = run_sq.at(t).restrict(inner)?;
        for i in 0..u.grid.len() {
            let nu: f64 = (0..op.comps).map(|k| u.data[k][i] * u.data[k][i]).sum();
            let np: f64 = (0..op.comps).map(|k| up.data[k][i] * up.data[k][i]).sum();
            let v = nu.max(np) - sq.data[0][i];
            if v > worst {
                worst = v;
                witness = Witness {
                    t,
                    x: u.grid.point(i),
                    component: None,
                };
            }
        }
    }
    Ok(VerificationReport::new("domination", preset, worst, 0.0, tol).with_witness(witness))
}

/// Fixed points: T(t) eta = eta and T^P(t) xi = xi, plus the algebraic
/// kernel identities at the samples.
pub fn check_fixed_points(
    op: &OperatorFamily,
    analysis: &CouplingAnalysis,
    ts: &[f64],
    grid: UniformGrid,
    cfg: &SolverConfig,
    preset: &str,
) -> Result<VerificationReport> {
    let m = op.comps;
    let aux = op.derive_auxiliary();
    // Algebraic part: C(x) eta = 0 and C^P(x) xi = 0 at all samples.
    let mut algebra = 0.0f64;
    for x in &analysis.points {
        let mut c = vec![0.0; m * m];
        let mut cp = vec![0.0; m * m];
        op.coupling_at(0.0, x, &mut c);
        aux.coupling_at(0.0, x, &mut cp);
        for k in 0..m {
            let ce: f64 = (0..m).map(|h| c[k * m + h] * analysis.eta[h]).sum();
            let cx: f64 = (0..m).map(|h| cp[k * m + h] * analysis.xi[h]).sum();
            algebra = algebra.max(ce.abs()).max(cx.abs());
        }
    }
    if algebra > tolerances::EXACT {
        return Ok(VerificationReport::failed(
            "fixed-points",
            preset,
            algebra,
            tolerances::EXACT,
        ));
    }
    let horizon = ts.iter().cloned().fold(0.0, f64::max);
    let eta_field = GridFunction::from_fn(grid, m, |k, _| analysis.eta[k]);
    let xi_field = GridFunction::from_fn(grid, m, |k, _| analysis.xi[k]);
    let run_eta = solve_frozen(op, 0.0, horizon, &eta_field, cfg, ts)?;
    let run_xi = solve_frozen(&aux, 0.0, horizon, &xi_field, cfg, ts)?;
    let mut worst = 0.0f64;
    for &t in ts {
        worst = worst.max(run_eta.at(t).sup_diff(&eta_field));
        worst = worst.max(run_xi.at(t).sup_diff(&xi_field));
    }
    Ok(
        VerificationReport::new("fixed-points", preset, worst, 0.0, tolerances::FIXED_POINT)
            .with_details(serde_json::json!({ "algebraic_residual": algebra })),
    )
}

/// The mu-weighted gradient energy of T(t) f vanishes in time.
pub fn check_gradient_decay(
    op: &OperatorFamily,
    f: &GridFunction,
    mu: &GridFunction,
    horizon: f64,
    cfg: &SolverConfig,
    preset: &str,
) -> Result<VerificationReport> {
    let times: Vec<f64> = (0..5).map(|i| horizon * 0.5f64.powi(4 - i)).collect();
    let run = solve_frozen(op, 0.0, horizon, f, cfg, &times)?;
    let energy = |g: &GridFunction| -> Result<f64> {
        let w = g.grid.trapezoid_weights();
        let mut acc = 0.0;
        for axis in 0..g.grid.dim() {
            let mut orders = vec![0usize; g.grid.dim()];
            orders[axis] = 1;
            let dg = derivative(g, &orders)?;
            for k in 0..g.comps() {
                acc += dg.data[k]
                    .iter()
                    .zip(mu.data[0].iter().zip(&w))
                    .map(|(v, (m, wv))| v * v * m * wv)
                    .sum::<f64>();
            }
        }
        Ok(acc)
    };
    let mut energies = vec![energy(f)?];
    for &t in &times {
        energies.push(energy(run.at(t))?);
    }
    let decreasing = energies.windows(2).all(|w| w[1] <= w[0] + 1e-12);
    let ratio = energies[energies.len() - 1] / energies[0].max(1e-300);
    let mut report = VerificationReport::new(
        "gradient-decay",
        preset,
        ratio,
        0.0,
        tolerances::GRADIENT_DECAY_FACTOR,
    )
    .with_details(serde_json::json!({ "energies": energies, "times": times }));
    if !decreasing {
        report.verdict = crate::report::Verdict::Fail;
    }
    Ok(report)
}
