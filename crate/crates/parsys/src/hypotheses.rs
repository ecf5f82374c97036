//! Executable verification of the standing assumptions on an operator
//! family: ellipticity, Lyapunov control of the auxiliary family, coupling
//! irreducibility, bounded row sums, the smoothness-class growth conditions
//! behind the derivative estimates, and the autonomous special case with
//! nonpositive auxiliary coupling and a common kernel direction.
//!
//! Exponent inequalities are decided exactly from the radial-power structure
//! where possible; everything quantitative is sampled on the configured
//! domain with a monotonicity probe at three nested radii standing in for
//! the supremum over the whole space.

use crate::coeff::CoefficientExpr;
use crate::grid::BoxDomain;
use crate::linalg::kernel_vector;
use crate::operator::row_sum_bound;
use crate::operator::{
    min_sym_eig, AuxiliaryFamily, CoefficientField, OperatorFamily, RowSumBound, SamplingSpec,
};
use crate::{Error, Result};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

/// Which hypothesis set to check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HypothesisSet {
    /// Well-posedness assumptions (regularity, ellipticity, Lyapunov,
    /// irreducibility, bounded row sums).
    Base,
    /// Additional growth/smoothness conditions for the derivative estimates.
    Smooth,
    /// Autonomous shared-diffusion case with nonpositive auxiliary coupling.
    SpecialCase,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum HypVerdict {
    Holds,
    ViolatedAt { t: f64, x: Vec<f64>, detail: String },
    NotCheckableSymbolically,
}

impl HypVerdict {
    pub fn holds(&self) -> bool {
        matches!(self, HypVerdict::Holds)
    }
}

/// Constants measured while checking (suprema over the sampled set).
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct MeasuredConstants {
    /// Infimum of the minimum diffusion eigenvalues.
    pub mu0: Option<f64>,
    /// Row-sum bound of the auxiliary coupling.
    pub m_j: Option<f64>,
    /// Smallest feasible Lyapunov rate for phi = (1+|x|^2) 1.
    pub lambda_j: Option<f64>,
    /// Per-component drift/diffusion growth constants (script M_k).
    pub script_m: Option<Vec<f64>>,
    /// Per-component diffusion-derivative constants L_k.
    pub l: Option<Vec<f64>>,
    /// Coupling-derivative constant C-bar.
    pub c_bar: Option<f64>,
    /// Growth-bound constant of the quadratic form condition.
    pub growth_c: Option<f64>,
    /// Scalar Lyapunov pair (a, c) of the autonomous case.
    pub lyapunov_ac: Option<(f64, f64)>,
    /// Common kernel direction of C(x), unit norm.
    pub kernel_eta: Option<Vec<f64>>,
}

/// Per-hypothesis verdicts plus measured constants.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub which: HypothesisSet,
    pub verdicts: Vec<(String, HypVerdict)>,
    pub constants: MeasuredConstants,
}

impl HypothesisReport {
    pub fn all_hold(&self) -> bool {
        self.verdicts.iter().all(|(_, v)| v.holds())
    }

    pub fn verdict(&self, key: &str) -> Option<&HypVerdict> {
        self.verdicts.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }
}

/// Monotone growth over three nested radii: each step grows by a meaningful
/// margin and the final value is positive (heading above any bound).
fn growing(values: &[f64; 3]) -> bool {
    (0..2).all(|i| values[i + 1] > values[i] + 1e-9 + 1e-3 * values[i].abs()) && values[2] > 0.0
}

/// Supremum of `f(t, x)` over the sampled interval and three nested radii;
/// returns ([sup_R, sup_2R, sup_4R], witness at the configured radius).
fn nested_sup(
    f: &(dyn Fn(f64, &[f64]) -> f64 + Sync),
    interval: (f64, f64),
    domain: BoxDomain,
    sampling: &SamplingSpec,
) -> ([f64; 3], (f64, Vec<f64>), f64) {
    let mut sups = [f64::NEG_INFINITY; 3];
    let mut witness = (interval.0, vec![0.0; domain.dim]);
    let mut sup_config = f64::NEG_INFINITY;
    for (i, factor) in [1.0, 2.0, 4.0].into_iter().enumerate() {
        let spec = if i == 0 {
            SamplingSpec {
                domain,
                ..*sampling
            }
        } else {
            SamplingSpec {
                domain: domain.scaled(factor),
                points_per_axis: 41,
                time_samples: sampling.time_samples,
            }
        };
        for (t, x) in spec.iter_samples(interval) {
            let v = f(t, &x);
            if v > sups[i] {
                sups[i] = v;
            }
            if i == 0 && v > sup_config {
                sup_config = v;
                witness = (t, x);
            }
        }
    }
    (sups, witness, sup_config)
}

fn strongly_connected(adj: &[Vec<bool>]) -> bool {
    let m = adj.len();
    if m <= 1 {
        return true;
    }
    let bfs = |forward: bool| -> Vec<bool> {
        let mut seen = vec![false; m];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for w in 0..m {
                let edge = if forward { adj[v][w] } else { adj[w][v] };
                if edge && !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen
    };
    bfs(true).iter().all(|&s| s) && bfs(false).iter().all(|&s| s)
}

/// Coupling graph: edge k -> h when c_kh is not identically zero on samples.
pub fn coupling_graph(
    op: &OperatorFamily,
    interval: (f64, f64),
    sampling: &SamplingSpec,
) -> Vec<Vec<bool>> {
    let m = op.comps;
    let samples = sampling.iter_samples(interval);
    (0..m)
        .map(|k| {
            (0..m)
                .map(|h| {
                    k != h
                        && samples
                            .iter()
                            .any(|(t, x)| op.coupling[k][h].eval(*t, x).abs() > 1e-14)
                })
                .collect()
        })
        .collect()
}

/// Irreducibility by strong connectivity of the coupling graph.
pub fn irreducible(op: &OperatorFamily, interval: (f64, f64), sampling: &SamplingSpec) -> bool {
    strongly_connected(&coupling_graph(op, interval, sampling))
}

fn frob(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

fn grad_norm(e: &CoefficientExpr, t: f64, x: &[f64]) -> f64 {
    frob(&e.grad(t, x))
}

fn hess_norm(e: &CoefficientExpr, t: f64, x: &[f64]) -> f64 {
    let h = e.hess(t, x);
    h.iter()
        .map(|row| row.iter().map(|v| v * v).sum::<f64>())
        .sum::<f64>()
        .sqrt()
}

fn third_norm(e: &CoefficientExpr, t: f64, x: &[f64]) -> f64 {
    frob(&e.third(t, x))
}

/// Largest eigenvalue of the symmetrized drift Jacobian (the dissipativity
/// function r^k).
fn drift_dissipativity(op: &OperatorFamily, k: usize, t: f64, x: &[f64]) -> f64 {
    let d = op.dim;
    let mut sym = vec![0.0; d * d];
    for (j, e) in op.drift[k].iter().enumerate() {
        let g = e.grad(t, x);
        for i in 0..d {
            sym[j * d + i] += 0.5 * g[i];
            sym[i * d + j] += 0.5 * g[i];
        }
    }
    -min_sym_eig(&sym.iter().map(|v| -v).collect::<Vec<_>>(), d)
}

struct ClassInfo {
    /// Exponents of the diffusion entries, per component (d*d row-major);
    /// None when an entry is outside the pure radial form.
    q_exponents: Vec<Option<Vec<f64>>>,
    /// Definite sign of each coupling coefficient over the interval.
    coupling_signs: Vec<Vec<Option<i8>>>,
}

fn class_info(op: &OperatorFamily) -> ClassInfo {
    let q_exponents = op
        .diffusion
        .iter()
        .map(|q| {
            q.iter()
                .map(|e| {
                    if e.axis.is_none() {
                        Some(e.radial_power)
                    } else {
                        None
                    }
                })
                .collect::<Option<Vec<f64>>>()
        })
        .collect();
    let coupling_signs = op
        .coupling
        .iter()
        .map(|row| {
            row.iter()
                .map(|e| {
                    if e.is_zero() {
                        Some(0)
                    } else {
                        e.time
                            .definite_sign()
                            .map(|s| if e.coef > 0.0 { s } else { -s })
                    }
                })
                .collect()
        })
        .collect();
    ClassInfo {
        q_exponents,
        coupling_signs,
    }
}

/// Exponent conditions of the radial-power family: (a)-(d) plus the
/// strengthened (a'), (b') for the derivative estimates. `None` entries mean
/// the condition could not be decided symbolically.
pub fn example_class_conditions(op: &OperatorFamily) -> Vec<(String, HypVerdict)> {
    let info = class_info(op);
    let mut out = Vec::new();
    let origin = vec![0.0; op.dim];
    let violated = |detail: &str| HypVerdict::ViolatedAt {
        t: 0.0,
        x: origin.clone(),
        detail: detail.to_string(),
    };

    // (a): nonnegative exponents, positive drift strength (b = -theta x ...).
    let mut a_ok = true;
    let mut a_detail = String::new();
    for e in op.all_exprs() {
        if e.radial_power < 0.0 {
            a_ok = false;
            a_detail = "negative radial exponent".into();
        }
    }
    for (k, b) in op.drift.iter().enumerate() {
        for e in b {
            if e.axis.is_none() && !e.is_zero() {
                a_ok = false;
                a_detail = format!("drift of component {k} is not of the form -theta x_i (...)");
            }
            if e.coef > 0.0 {
                a_ok = false;
                a_detail =
                    format!("drift strength of component {k} is not positive (eta > 0 required)");
            }
        }
    }
    out.push((
        "exa-a".to_string(),
        if a_ok {
            HypVerdict::Holds
        } else {
            violated(&a_detail)
        },
    ));

    // (b): negative diagonal coupling, strictly dominated off-diagonal
    // exponents.
    let mut b_verdict = HypVerdict::Holds;
    'outer: for k in 0..op.comps {
        match info.coupling_signs[k][k] {
            Some(s) if s < 0 => {}
            Some(_) => {
                b_verdict = violated(&format!("theta_{k}{k} is not negative on the interval"));
                break 'outer;
            }
            None => {
                b_verdict = HypVerdict::NotCheckableSymbolically;
                break 'outer;
            }
        }
        for h in 0..op.comps {
            if h != k && !op.coupling[k][h].is_zero() {
                let gkh = op.coupling[k][h].radial_power;
                let gkk = op.coupling[k][k].radial_power;
                if gkh >= gkk {
                    b_verdict = violated(&format!(
                        "gamma_{k}{h} = {gkh} is not below gamma_{k}{k} = {gkk}"
                    ));
                    break 'outer;
                }
            }
        }
    }
    out.push(("exa-b".to_string(), b_verdict));

    // (c): diagonal exponents dominate and the constant part is elliptic.
    let mut c_verdict = HypVerdict::Holds;
    for k in 0..op.comps {
        match &info.q_exponents[k] {
            None => {
                c_verdict = HypVerdict::NotCheckableSymbolically;
                break;
            }
            Some(exps) => {
                let d = op.dim;
                let alpha_min = (0..d)
                    .map(|i| exps[i * d + i])
                    .fold(f64::INFINITY, f64::min);
                let off_max = (0..d)
                    .flat_map(|i| (0..d).map(move |j| (i, j)))
                    .filter(|(i, j)| i != j && !op.diffusion[k][i * d + j].is_zero())
                    .map(|(i, j)| exps[i * d + j])
                    .fold(f64::NEG_INFINITY, f64::max);
                if off_max > alpha_min {
                    c_verdict = violated(&format!(
                        "component {k}: off-diagonal diffusion exponent {off_max} exceeds alpha_min = {alpha_min}"
                    ));
                    break;
                }
                // min_i zeta_ii - max_i sqrt(sum_{j != i} zeta_ij^2) > 0,
                // sampled over the time factors.
                let mut worst = f64::INFINITY;
                for ts in 0..=8 {
                    let t = ts as f64 / 8.0;
                    let zeta = |i: usize, j: usize| {
                        let e = &op.diffusion[k][i * d + j];
                        e.coef * e.time.eval(t)
                    };
                    let min_diag = (0..d).map(|i| zeta(i, i)).fold(f64::INFINITY, f64::min);
                    let max_off = (0..d)
                        .map(|i| {
                            (0..d)
                                .filter(|&j| j != i)
                                .map(|j| zeta(i, j).powi(2))
                                .sum::<f64>()
                                .sqrt()
                        })
                        .fold(f64::NEG_INFINITY, f64::max);
                    worst = worst.min(min_diag - max_off);
                }
                if worst <= 0.0 {
                    c_verdict = violated(&format!(
                        "component {k}: constant part is not elliptic ({worst})"
                    ));
                    break;
                }
            }
        }
    }
    out.push(("exa-c".to_string(), c_verdict));

    // (d): diffusion exponents capped by 1 + max(gamma_kk, beta).
    let mut d_verdict = HypVerdict::Holds;
    for k in 0..op.comps {
        if let Some(exps) = &info.q_exponents[k] {
            let d = op.dim;
            let alpha_max = (0..d)
                .map(|i| exps[i * d + i])
                .fold(f64::NEG_INFINITY, f64::max);
            let gamma_kk = op.coupling[k][k].radial_power;
            let beta_max = op.drift[k]
                .iter()
                .map(|e| e.radial_power)
                .fold(f64::NEG_INFINITY, f64::max);
            if alpha_max > 1.0 + gamma_kk.max(beta_max) {
                d_verdict = violated(&format!(
                    "component {k}: alpha_max = {alpha_max} exceeds 1 + max(gamma, beta)"
                ));
                break;
            }
        } else {
            d_verdict = HypVerdict::NotCheckableSymbolically;
            break;
        }
    }
    out.push(("exa-d".to_string(), d_verdict));

    // (a'): one drift strength and exponent per component.
    let mut ap = HypVerdict::Holds;
    for (k, b) in op.drift.iter().enumerate() {
        let same = b
            .iter()
            .all(|e| e.coef == b[0].coef && e.radial_power == b[0].radial_power);
        if !same {
            ap = violated(&format!("component {k}: drift is not isotropic"));
            break;
        }
    }
    out.push(("exa-aprime".to_string(), ap));

    // (b'): all diffusion exponents within 1/2 of the diagonal minimum.
    let mut bp = HypVerdict::Holds;
    for k in 0..op.comps {
        if let Some(exps) = &info.q_exponents[k] {
            let d = op.dim;
            let alpha_min = (0..d)
                .map(|i| exps[i * d + i])
                .fold(f64::INFINITY, f64::min);
            let all_max = (0..d * d)
                .filter(|ij| !op.diffusion[k][*ij].is_zero())
                .map(|ij| exps[ij])
                .fold(f64::NEG_INFINITY, f64::max);
            if all_max > alpha_min + 0.5 {
                bp = violated(&format!(
                    "component {k}: diffusion exponent spread exceeds 1/2"
                ));
                break;
            }
        } else {
            bp = HypVerdict::NotCheckableSymbolically;
            break;
        }
    }
    out.push(("exa-bprime".to_string(), bp));
    out
}

/// Check a hypothesis set by exact exponent inequalities where the
/// radial-power structure permits and by sampling everywhere else.
pub fn check_hypotheses(
    op: &OperatorFamily,
    which: HypothesisSet,
    interval: (f64, f64),
    domain: BoxDomain,
    sampling: &SamplingSpec,
) -> Result<HypothesisReport> {
    if matches!(which, HypothesisSet::Base | HypothesisSet::Smooth) && op.has_tabulated_time() {
        return Err(Error::OutOfClass(
            "sign conditions cannot be decided for tabulated time factors".into(),
        ));
    }
    let mut verdicts: Vec<(String, HypVerdict)> = Vec::new();
    let mut constants = MeasuredConstants::default();
    let aux = op.derive_auxiliary();

    // Ellipticity: common to all sets.
    let mu0 = check_ellipticity(op, interval, domain, sampling, &mut verdicts);
    constants.mu0 = Some(mu0);

    match which {
        HypothesisSet::Base => {
            verdicts.insert(0, ("regularity".into(), HypVerdict::Holds));
            check_lyapunov_vector(
                &aux,
                interval,
                domain,
                sampling,
                &mut verdicts,
                &mut constants,
            );
            let irr = irreducible(op, interval, sampling);
            verdicts.push((
                "irreducibility".into(),
                if irr {
                    HypVerdict::Holds
                } else {
                    HypVerdict::ViolatedAt {
                        t: interval.0,
                        x: vec![0.0; op.dim],
                        detail: "coupling graph is not strongly connected".into(),
                    }
                },
            ));
            check_row_sums(
                &aux,
                interval,
                domain,
                sampling,
                &mut verdicts,
                &mut constants,
            );
        }
        HypothesisSet::Smooth => {
            verdicts.insert(0, ("regularity-c3".into(), HypVerdict::Holds));
            check_row_sums(
                &aux,
                interval,
                domain,
                sampling,
                &mut verdicts,
                &mut constants,
            );
            check_growth_condition(
                op,
                interval,
                domain,
                sampling,
                &mut verdicts,
                &mut constants,
            );
            check_derivative_bounds(
                op,
                &aux,
                interval,
                domain,
                sampling,
                &mut verdicts,
                &mut constants,
            );
        }
        HypothesisSet::SpecialCase => {
            let structural = op.is_autonomous() && op.has_shared_scalar_part();
            verdicts.insert(
                0,
                (
                    "autonomous-shared-part".into(),
                    if structural {
                        HypVerdict::Holds
                    } else {
                        HypVerdict::ViolatedAt {
                            t: interval.0,
                            x: vec![0.0; op.dim],
                            detail: "operator must be autonomous with one shared diffusion/drift"
                                .into(),
                        }
                    },
                ),
            );
            check_nonpositive_auxiliary(&aux, domain, sampling, &mut verdicts);
            check_scalar_lyapunov(op, domain, sampling, &mut verdicts, &mut constants);
            check_common_kernel(op, domain, sampling, &mut verdicts, &mut constants);
            let irr = irreducible(op, interval, sampling);
            verdicts.push((
                "irreducibility".into(),
                if irr {
                    HypVerdict::Holds
                } else {
                    HypVerdict::ViolatedAt {
                        t: interval.0,
                        x: vec![0.0; op.dim],
                        detail: "coupling graph is not strongly connected".into(),
                    }
                },
            ));
        }
    }
    Ok(HypothesisReport {
        which,
        verdicts,
        constants,
    })
}

fn check_ellipticity(
    op: &OperatorFamily,
    interval: (f64, f64),
    domain: BoxDomain,
    sampling: &SamplingSpec,
    verdicts: &mut Vec<(String, HypVerdict)>,
) -> f64 {
    let mut mu0 = f64::INFINITY;
    let mut witness = (interval.0, vec![0.0; op.dim], 0usize);
    let spec = SamplingSpec {
        domain,
        ..*sampling
    };
    for (t, x) in spec.iter_samples(interval) {
        for k in 0..op.comps {
            let me = op.min_diffusion_eig(k, t, &x);
            if me < mu0 {
                mu0 = me;
                witness = (t, x.clone(), k);
            }
        }
    }
    verdicts.push((
        "ellipticity".into(),
        if mu0 > 0.0 {
            HypVerdict::Holds
        } else {
            HypVerdict::ViolatedAt {
                t: witness.0,
                x: witness.1,
                detail: format!("component {}: min eigenvalue {mu0:.3e}", witness.2),
            }
        },
    ));
    mu0
}

/// Lyapunov condition with phi(x) = (1 + |x|^2) 1: smallest feasible
/// lambda_J on the configured domain, with the nested-radius growth probe.
fn check_lyapunov_vector(
    aux: &AuxiliaryFamily,
    interval: (f64, f64),
    domain: BoxDomain,
    sampling: &SamplingSpec,
    verdicts: &mut Vec<(String, HypVerdict)>,
    constants: &mut MeasuredConstants,
) {
    let d = aux.dim();
    let m = aux.comps();
    let ratio = |t: f64, x: &[f64]| -> f64 {
        let phi = 1.0 + x.iter().map(|v| v * v).sum::<f64>();
        let mut worst = f64::NEG_INFINITY;
        let mut q = vec![0.0; d * d];
        let mut b = vec![0.0; d];
        let sums = aux.row_sums(t, x);
        for k in 0..m {
            aux.diffusion_at(k, t, x, &mut q);
            aux.drift_at(k, t, x, &mut b);
            let tr: f64 = (0..d).map(|i| q[i * d + i]).sum();
            let bx: f64 = b.iter().zip(x).map(|(bi, xi)| bi * xi).sum();
            let val = 2.0 * tr + 2.0 * bx + phi * sums[k];
            worst = worst.max(val / phi);
        }
        worst
    };
    let (sups, witness, lambda) = nested_sup(&ratio, interval, domain, sampling);
    constants.lambda_j = Some(lambda);
    verdicts.push((
        "lyapunov".into(),
        if growing(&sups) {
            HypVerdict::ViolatedAt {
                t: witness.0,
                x: witness.1,
                detail: format!("A^P phi / phi keeps growing at nested radii: {sups:?}"),
            }
        } else {
            HypVerdict::Holds
        },
    ));
}

fn check_row_sums(
    aux: &AuxiliaryFamily,
    interval: (f64, f64),
    domain: BoxDomain,
    sampling: &SamplingSpec,
    verdicts: &mut Vec<(String, HypVerdict)>,
    constants: &mut MeasuredConstants,
) {
    match row_sum_bound(aux, interval, domain, sampling) {
        Ok(RowSumBound { m_j, .. }) => {
            constants.m_j = Some(m_j);
            verdicts.push(("row-sums-bounded".into(), HypVerdict::Holds));
        }
        Err(Error::UnboundedAbove { row, values }) => {
            verdicts.push((
                "row-sums-bounded".into(),
                HypVerdict::ViolatedAt {
                    t: interval.0,
                    x: vec![4.0 * domain.radius; domain.dim],
                    detail: format!("row {row} grows: {values:?}"),
                },
            ));
        }
        Err(_) => unreachable!("row_sum_bound only fails with UnboundedAbove"),
    }
}

/// Growth condition: max(|(Q^k x)_i|, |Tr Q^k|, <b^k, x>) <= C (1+|x|^2) mu^k.
fn check_growth_condition(
    op: &OperatorFamily,
    interval: (f64, f64),
    domain: BoxDomain,
    sampling: &SamplingSpec,
    verdicts: &mut Vec<(String, HypVerdict)>,
    constants: &mut MeasuredConstants,
) {
    let d = op.dim;
    let ratio = |t: f64, x: &[f64]| -> f64 {
        let phi = 1.0 + x.iter().map(|v| v * v).sum::<f64>();
        let mut worst = f64::NEG_INFINITY;
        let mut q = vec![0.0; d * d];
        let mut b = vec![0.0; d];
        for k in 0..op.comps {
            op.diffusion_at(k, t, x, &mut q);
            op.drift_at(k, t, x, &mut b);
            let mu = min_sym_eig(&q, d).max(1e-300);
            let tr: f64 = (0..d).map(|i| q[i * d + i]).sum();
            let qx_max = (0..d)
                .map(|i| (0..d).map(|j| q[i * d + j] * x[j]).sum::<f64>().abs())
                .fold(0.0f64, f64::max);
            let bx: f64 = b.iter().zip(x).map(|(bi, xi)| bi * xi).sum();
            let lhs = qx_max.max(tr.abs()).max(bx);
            worst = worst.max(lhs / (phi * mu));
        }
        worst
    };
    let (sups, witness, c) = nested_sup(&ratio, interval, domain, sampling);
    constants.growth_c = Some(c);
    verdicts.push((
        "growth-bound".into(),
        if growing(&sups) {
            HypVerdict::ViolatedAt {
                t: witness.0,
                x: witness.1,
                detail: format!("growth ratio keeps increasing at nested radii: {sups:?}"),
            }
        } else {
            HypVerdict::Holds
        },
    ));
}

/// Derivative bounds: |D^h q| <= L mu, dissipativity + drift derivatives
/// controlled by mu, coupling derivatives controlled by 1 + |M_k|.
#[allow(clippy::too_many_arguments)]
fn check_derivative_bounds(
    op: &OperatorFamily,
    aux: &AuxiliaryFamily,
    interval: (f64, f64),
    domain: BoxDomain,
    sampling: &SamplingSpec,
    verdicts: &mut Vec<(String, HypVerdict)>,
    constants: &mut MeasuredConstants,
) {
    let d = op.dim;
    let m = op.comps;
    let mut l_k = vec![f64::NEG_INFINITY; m];
    let mut script_m = vec![f64::NEG_INFINITY; m];
    let mut c_bar = f64::NEG_INFINITY;

    for k in 0..m {
        let l_ratio = |t: f64, x: &[f64]| -> f64 {
            let mut q = vec![0.0; d * d];
            op.diffusion_at(k, t, x, &mut q);
            let mu = min_sym_eig(&q, d).max(1e-300);
            let mut worst: f64 = 0.0;
            for e in &op.diffusion[k] {
                worst = worst.max(grad_norm(e, t, x));
                worst = worst.max(hess_norm(e, t, x));
                worst = worst.max(third_norm(e, t, x));
            }
            worst / mu
        };
        let (sups_l, wit_l, l_val) = nested_sup(&l_ratio, interval, domain, sampling);
        l_k[k] = l_val;
        if growing(&sups_l) {
            verdicts.push((
                format!("diffusion-derivatives-{k}"),
                HypVerdict::ViolatedAt {
                    t: wit_l.0,
                    x: wit_l.1,
                    detail: format!("|D q| / mu grows at nested radii: {sups_l:?}"),
                },
            ));
        } else {
            verdicts.push((format!("diffusion-derivatives-{k}"), HypVerdict::Holds));
        }

        let m_ratio = |t: f64, x: &[f64]| -> f64 {
            let mut q = vec![0.0; d * d];
            op.diffusion_at(k, t, x, &mut q);
            let mu = min_sym_eig(&q, d).max(1e-300);
            let r = drift_dissipativity(op, k, t, x);
            let b2: f64 = op.drift[k]
                .iter()
                .map(|e| hess_norm(e, t, x).powi(2))
                .sum::<f64>()
                .sqrt();
            let b3: f64 = op.drift[k]
                .iter()
                .map(|e| third_norm(e, t, x).powi(2))
                .sum::<f64>()
                .sqrt();
            (r + b2 + b3) / mu
        };
        let (sups_m, wit_m, m_val) = nested_sup(&m_ratio, interval, domain, sampling);
        script_m[k] = m_val;
        if growing(&sups_m) {
            verdicts.push((
                format!("drift-dissipativity-{k}"),
                HypVerdict::ViolatedAt {
                    t: wit_m.0,
                    x: wit_m.1,
                    detail: format!("(r + |D^2 b| + |D^3 b|)/mu grows at nested radii: {sups_m:?}"),
                },
            ));
        } else {
            verdicts.push((format!("drift-dissipativity-{k}"), HypVerdict::Holds));
        }
    }

    let c_ratio = |t: f64, x: &[f64]| -> f64 {
        let sums = aux.row_sums(t, x);
        let mut worst = f64::NEG_INFINITY;
        for k in 0..m {
            let denom = 1.0 + sums[k].abs();
            let mut num: f64 = 0.0;
            for e in &op.coupling[k] {
                num = num
                    .max(grad_norm(e, t, x))
                    .max(hess_norm(e, t, x))
                    .max(third_norm(e, t, x));
            }
            worst = worst.max(num / denom);
        }
        worst
    };
    let (sups_c, wit_c, c_val) = nested_sup(&c_ratio, interval, domain, sampling);
    c_bar = c_bar.max(c_val);
    if growing(&sups_c) {
        verdicts.push((
            "coupling-derivatives".into(),
            HypVerdict::ViolatedAt {
                t: wit_c.0,
                x: wit_c.1,
                detail: format!("|D c| / (1 + |M_k|) grows at nested radii: {sups_c:?}"),
            },
        ));
    } else {
        verdicts.push(("coupling-derivatives".into(), HypVerdict::Holds));
    }

    constants.l = Some(l_k);
    constants.script_m = Some(script_m);
    constants.c_bar = Some(c_bar);
}

/// <C^P(x) y, y> <= 0 for all y: the symmetrized auxiliary coupling must be
/// negative semidefinite at every sample.
fn check_nonpositive_auxiliary(
    aux: &AuxiliaryFamily,
    domain: BoxDomain,
    sampling: &SamplingSpec,
    verdicts: &mut Vec<(String, HypVerdict)>,
) {
    let m = aux.comps();
    let mut worst = f64::NEG_INFINITY;
    let mut witness = vec![0.0; domain.dim];
    let spec = SamplingSpec {
        domain,
        ..*sampling
    };
    for (_, x) in spec.iter_samples((0.0, 0.0)) {
        let mut c = vec![0.0; m * m];
        aux.coupling_at(0.0, &x, &mut c);
        let mut sym = vec![0.0; m * m];
        for k in 0..m {
            for h in 0..m {
                sym[k * m + h] = 0.5 * (c[k * m + h] + c[h * m + k]);
            }
        }
        let neg: Vec<f64> = sym.iter().map(|v| -v).collect();
        let max_eig = -min_sym_eig(&neg, m);
        if max_eig > worst {
            worst = max_eig;
            witness = x.clone();
        }
    }
    verdicts.push((
        "auxiliary-nonpositive".into(),
        if worst <= 1e-10 {
            HypVerdict::Holds
        } else {
            HypVerdict::ViolatedAt {
                t: 0.0,
                x: witness,
                detail: format!("max eigenvalue of sym C^P is {worst:.3e}"),
            }
        },
    ));
}

/// Scalar Lyapunov condition of the autonomous case: A phi <= a - c phi for
/// phi = 1 + |x|^2 and some a, c > 0 (c from the outer region, a as the
/// resulting global offset).
fn check_scalar_lyapunov(
    op: &OperatorFamily,
    domain: BoxDomain,
    sampling: &SamplingSpec,
    verdicts: &mut Vec<(String, HypVerdict)>,
    constants: &mut MeasuredConstants,
) {
    let d = op.dim;
    let a_phi = |x: &[f64]| -> f64 {
        let mut q = vec![0.0; d * d];
        let mut b = vec![0.0; d];
        op.diffusion_at(0, 0.0, x, &mut q);
        op.drift_at(0, 0.0, x, &mut b);
        let tr: f64 = (0..d).map(|i| q[i * d + i]).sum();
        let bx: f64 = b.iter().zip(x).map(|(bi, xi)| bi * xi).sum();
        2.0 * tr + 2.0 * bx
    };
    let probe = |x: &[f64]| {
        let phi = 1.0 + x.iter().map(|v| v * v).sum::<f64>();
        a_phi(x) / phi
    };
    // c from the outer region of a doubled domain: drift domination there.
    let spec = SamplingSpec {
        domain: domain.scaled(2.0),
        points_per_axis: 81,
        time_samples: 1,
    };
    let mut outer_ratio = f64::NEG_INFINITY;
    for (_, x) in spec.iter_samples((0.0, 0.0)) {
        let norm: f64 = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm >= domain.radius {
            outer_ratio = outer_ratio.max(probe(&x));
        }
    }
    let c = -outer_ratio;
    if c <= 0.0 {
        verdicts.push((
            "scalar-lyapunov".into(),
            HypVerdict::ViolatedAt {
                t: 0.0,
                x: vec![domain.radius; d],
                detail: format!("no positive decay rate: outer A phi / phi = {outer_ratio:.3e}"),
            },
        ));
        return;
    }
    let mut a = f64::NEG_INFINITY;
    let spec_in = SamplingSpec {
        domain: domain.scaled(2.0),
        ..*sampling
    };
    for (_, x) in spec_in.iter_samples((0.0, 0.0)) {
        let phi = 1.0 + x.iter().map(|v| v * v).sum::<f64>();
        a = a.max(a_phi(&x) + c * phi);
    }
    constants.lyapunov_ac = Some((a, c));
    verdicts.push(("scalar-lyapunov".into(), HypVerdict::Holds));
}

/// Existence of a common kernel direction eta of C(x) across samples.
fn check_common_kernel(
    op: &OperatorFamily,
    domain: BoxDomain,
    sampling: &SamplingSpec,
    verdicts: &mut Vec<(String, HypVerdict)>,
    constants: &mut MeasuredConstants,
) {
    let m = op.comps;
    let spec = SamplingSpec {
        domain,
        ..*sampling
    };
    let mut reference: Option<Vec<f64>> = None;
    for (_, x) in spec.iter_samples((0.0, 0.0)) {
        let mut c = vec![0.0; m * m];
        op.coupling_at(0.0, &x, &mut c);
        let mat = DMatrix::from_row_slice(m, m, &c);
        let scale = mat.iter().map(|v| v.abs()).fold(0.0, f64::max).max(1e-300);
        let (v, sigma_min, _) = kernel_vector(&mat);
        if sigma_min > 1e-8 * scale {
            verdicts.push((
                "common-kernel".into(),
                HypVerdict::ViolatedAt {
                    t: 0.0,
                    x: x.clone(),
                    detail: format!("C(x) has trivial kernel (sigma_min = {sigma_min:.3e})"),
                },
            ));
            return;
        }
        match &reference {
            None => reference = Some(v.iter().copied().collect()),
            Some(r) => {
                let dot: f64 = r.iter().zip(v.iter()).map(|(a, b)| a * b).sum();
                if (dot.abs() - 1.0).abs() > 1e-8 {
                    verdicts.push((
                        "common-kernel".into(),
                        HypVerdict::ViolatedAt {
                            t: 0.0,
                            x: x.clone(),
                            detail: format!(
                                "kernel direction drifts across samples (|cos| = {})",
                                dot.abs()
                            ),
                        },
                    ));
                    return;
                }
            }
        }
    }
    let mut eta = reference.expect("at least one sample");
    // Sign convention: last nonzero component positive.
    if let Some(last) = eta.iter().rev().find(|v| v.abs() > 1e-12) {
        if *last < 0.0 {
            for v in eta.iter_mut() {
                *v = -*v;
            }
        }
    }
    constants.kernel_eta = Some(eta);
    verdicts.push(("common-kernel".into(), HypVerdict::Holds));
}
