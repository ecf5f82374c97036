//! The operator family: m second-order expressions with equation-dependent
//! diffusion `Q^k`, drift `b^k`, and zero-order coupling matrix `C`, together
//! with the derived auxiliary families (off-diagonal absolute values, and the
//! shifted variant used by the derivative estimates).

use crate::coeff::CoefficientExpr;
use crate::exec;
use crate::grid::{holder_seminorm, BoxDomain, GridFunction, UniformGrid, HOLDER_PAIR_CAP};
use crate::{Error, Result};
use nalgebra::{DMatrix, DVector};

/// Coefficient access used by the discretization: everything the solver needs
/// to evaluate at a time and point. Implementations are pure and `Sync`.
pub trait CoefficientField: Sync {
    fn dim(&self) -> usize;
    fn comps(&self) -> usize;
    /// Row-major d*d diffusion matrix of component k.
    fn diffusion_at(&self, k: usize, t: f64, x: &[f64], out: &mut [f64]);
    /// Drift vector of component k.
    fn drift_at(&self, k: usize, t: f64, x: &[f64], out: &mut [f64]);
    /// Row-major m*m coupling matrix.
    fn coupling_at(&self, t: f64, x: &[f64], out: &mut [f64]);
    /// True when no coefficient depends on t.
    fn is_autonomous(&self) -> bool;

    /// Minimum eigenvalue of the diffusion matrix of component k.
    fn min_diffusion_eig(&self, k: usize, t: f64, x: &[f64]) -> f64 {
        let d = self.dim();
        let mut q = vec![0.0; d * d];
        self.diffusion_at(k, t, x, &mut q);
        min_sym_eig(&q, d)
    }
}

pub(crate) fn min_sym_eig(q: &[f64], d: usize) -> f64 {
    match d {
        1 => q[0],
        2 => {
            let half_tr = 0.5 * (q[0] + q[3]);
            let det = ((q[0] - q[3]) * 0.5).hypot(q[1]);
            half_tr - det
        }
        _ => {
            let m = DMatrix::from_row_slice(d, d, q);
            m.symmetric_eigenvalues().min()
        }
    }
}

/// The triple (Q^k, b^k, C) as evaluable, differentiable coefficient fields.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorFamily {
    pub dim: usize,
    pub comps: usize,
    /// diffusion[k] is the row-major d*d matrix of component k.
    pub diffusion: Vec<Vec<CoefficientExpr>>,
    /// drift[k] is the d-vector of component k.
    pub drift: Vec<Vec<CoefficientExpr>>,
    /// coupling[k][h] = c_kh.
    pub coupling: Vec<Vec<CoefficientExpr>>,
}

/// Values of all coefficients at one (t, x).
#[derive(Debug, Clone)]
pub struct OperatorValues {
    pub q: Vec<DMatrix<f64>>,
    pub b: Vec<DVector<f64>>,
    pub c: DMatrix<f64>,
}

impl OperatorFamily {
    pub fn new(
        dim: usize,
        comps: usize,
        diffusion: Vec<Vec<CoefficientExpr>>,
        drift: Vec<Vec<CoefficientExpr>>,
        coupling: Vec<Vec<CoefficientExpr>>,
    ) -> Result<Self> {
        if diffusion.len() != comps || drift.len() != comps || coupling.len() != comps {
            return Err(Error::InvalidConfig(
                "coefficient arrays must have m entries".into(),
            ));
        }
        for q in &diffusion {
            if q.len() != dim * dim {
                return Err(Error::InvalidConfig("each Q^k must be a d*d matrix".into()));
            }
            for i in 0..dim {
                for j in (i + 1)..dim {
                    if q[i * dim + j] != q[j * dim + i] {
                        return Err(Error::InvalidConfig(
                            "Q^k must be symmetric as an expression".into(),
                        ));
                    }
                }
            }
        }
        for b in &drift {
            if b.len() != dim {
                return Err(Error::InvalidConfig("each b^k must have d entries".into()));
            }
        }
        for row in &coupling {
            if row.len() != comps {
                return Err(Error::InvalidConfig("C must be m*m".into()));
            }
        }
        Ok(OperatorFamily {
            dim,
            comps,
            diffusion,
            drift,
            coupling,
        })
    }

    /// All coefficient values at (t, x); Q^k symmetric by construction.
    pub fn eval(&self, t: f64, x: &[f64]) -> OperatorValues {
        let d = self.dim;
        let m = self.comps;
        let q = (0..m)
            .map(|k| DMatrix::from_fn(d, d, |i, j| self.diffusion[k][i * d + j].eval(t, x)))
            .collect();
        let b = (0..m)
            .map(|k| DVector::from_fn(d, |i, _| self.drift[k][i].eval(t, x)))
            .collect();
        let c = DMatrix::from_fn(m, m, |k, h| self.coupling[k][h].eval(t, x));
        OperatorValues { q, b, c }
    }

    pub fn is_autonomous(&self) -> bool {
        self.all_exprs().all(|e| e.time.is_const())
    }

    pub fn has_tabulated_time(&self) -> bool {
        self.all_exprs().any(|e| e.time.is_table())
    }

    pub fn all_exprs(&self) -> impl Iterator<Item = &CoefficientExpr> {
        self.diffusion
            .iter()
            .chain(self.drift.iter())
            .chain(self.coupling.iter())
            .flatten()
    }

    /// True when every equation has the same diffusion and drift expressions
    /// (the shared scalar part of the invariant-measure setting).
    pub fn has_shared_scalar_part(&self) -> bool {
        self.diffusion.iter().all(|q| *q == self.diffusion[0])
            && self.drift.iter().all(|b| *b == self.drift[0])
    }

    /// Replace off-diagonal coupling entries by their absolute values.
    pub fn derive_auxiliary(&self) -> AuxiliaryFamily {
        let mut base = self.clone();
        for (k, row) in base.coupling.iter_mut().enumerate() {
            for (h, e) in row.iter_mut().enumerate() {
                if h != k {
                    e.abs = true;
                }
            }
        }
        AuxiliaryFamily { base, tilde: false }
    }
}

impl CoefficientField for OperatorFamily {
    fn dim(&self) -> usize {
        self.dim
    }
    fn comps(&self) -> usize {
        self.comps
    }
    fn diffusion_at(&self, k: usize, t: f64, x: &[f64], out: &mut [f64]) {
        for (o, e) in out.iter_mut().zip(&self.diffusion[k]) {
            *o = e.eval(t, x);
        }
    }
    fn drift_at(&self, k: usize, t: f64, x: &[f64], out: &mut [f64]) {
        for (o, e) in out.iter_mut().zip(&self.drift[k]) {
            *o = e.eval(t, x);
        }
    }
    fn coupling_at(&self, t: f64, x: &[f64], out: &mut [f64]) {
        let m = self.comps;
        for k in 0..m {
            for h in 0..m {
                out[k * m + h] = self.coupling[k][h].eval(t, x);
            }
        }
    }
    fn is_autonomous(&self) -> bool {
        OperatorFamily::is_autonomous(self)
    }
}

/// Auxiliary family: same diffusion and drift, coupling `C^P` with
/// off-diagonal absolute values. With `tilde` set, every entry of row k is
/// shifted by `(1 + |M_k(t,x)|)/m`, where `M_k` is the row sum of `C^P`.
#[derive(Debug, Clone, PartialEq)]
pub struct AuxiliaryFamily {
    pub base: OperatorFamily,
    pub tilde: bool,
}

impl AuxiliaryFamily {
    pub fn dim(&self) -> usize {
        self.base.dim
    }
    pub fn comps(&self) -> usize {
        self.base.comps
    }

    /// Row sums M_k(t, x) of C^P.
    pub fn row_sums(&self, t: f64, x: &[f64]) -> Vec<f64> {
        let m = self.base.comps;
        let mut c = vec![0.0; m * m];
        CoefficientField::coupling_at(&self.base, t, x, &mut c);
        (0..m).map(|k| (0..m).map(|h| c[k * m + h]).sum()).collect()
    }

    /// Further derivation is idempotent: the off-diagonal entries are already
    /// absolute values.
    pub fn derive_auxiliary(&self) -> AuxiliaryFamily {
        AuxiliaryFamily {
            base: self.base.derive_auxiliary().base,
            tilde: self.tilde,
        }
    }

    /// The shifted family of the gradient-estimate machinery. Verifies the
    /// row-sum identity `sum_j ~c_kj = 1 + 2 (M_k)^+` on a sample of the
    /// interval and domain.
    pub fn derive_tilde(&self, interval: (f64, f64), domain: BoxDomain) -> AuxiliaryFamily {
        let out = AuxiliaryFamily {
            base: self.base.clone(),
            tilde: true,
        };
        let m = self.base.comps as f64;
        let sampling = SamplingSpec::default_for(domain);
        for (t, x) in sampling.iter_samples(interval) {
            let sums = self.row_sums(t, &x);
            let mut c = vec![0.0; self.base.comps * self.base.comps];
            out.coupling_at(t, &x, &mut c);
            for (k, mk) in sums.iter().enumerate() {
                let tilde_sum: f64 = (0..self.base.comps)
                    .map(|h| c[k * self.base.comps + h])
                    .sum();
                let expected = 1.0 + 2.0 * mk.max(0.0);
                assert!(
                    (tilde_sum - expected).abs() <= 1e-12 * (1.0 + expected.abs()) + 1e-12,
                    "tilde row-sum identity violated at t={t}, x={x:?}: {tilde_sum} vs {expected}"
                );
                let _ = m;
            }
        }
        out
    }
}

impl CoefficientField for AuxiliaryFamily {
    fn dim(&self) -> usize {
        self.base.dim
    }
    fn comps(&self) -> usize {
        self.base.comps
    }
    fn diffusion_at(&self, k: usize, t: f64, x: &[f64], out: &mut [f64]) {
        CoefficientField::diffusion_at(&self.base, k, t, x, out)
    }
    fn drift_at(&self, k: usize, t: f64, x: &[f64], out: &mut [f64]) {
        CoefficientField::drift_at(&self.base, k, t, x, out)
    }
    fn coupling_at(&self, t: f64, x: &[f64], out: &mut [f64]) {
        let m = self.base.comps;
        CoefficientField::coupling_at(&self.base, t, x, out);
        if self.tilde {
            for k in 0..m {
                let mk: f64 = (0..m).map(|h| out[k * m + h]).sum();
                let shift = (1.0 + mk.abs()) / m as f64;
                for h in 0..m {
                    out[k * m + h] += shift;
                }
            }
        }
    }
    fn is_autonomous(&self) -> bool {
        self.base.is_autonomous()
    }
}

/// Operator with coefficients frozen at a fixed time (the autonomous family
/// behind the semigroup `T_tbar`).
pub struct Frozen<'a, F: CoefficientField + ?Sized> {
    pub inner: &'a F,
    pub at: f64,
}

impl<F: CoefficientField + ?Sized> CoefficientField for Frozen<'_, F> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn comps(&self) -> usize {
        self.inner.comps()
    }
    fn diffusion_at(&self, k: usize, _t: f64, x: &[f64], out: &mut [f64]) {
        self.inner.diffusion_at(k, self.at, x, out)
    }
    fn drift_at(&self, k: usize, _t: f64, x: &[f64], out: &mut [f64]) {
        self.inner.drift_at(k, self.at, x, out)
    }
    fn coupling_at(&self, _t: f64, x: &[f64], out: &mut [f64]) {
        self.inner.coupling_at(self.at, x, out)
    }
    fn is_autonomous(&self) -> bool {
        true
    }
}

/// Scalar restriction: diffusion and drift of one component, with an optional
/// diagonal potential `c_kk` (the decoupled evolution of the
/// variation-of-constants reconstruction).
pub struct ScalarPart<'a> {
    pub op: &'a OperatorFamily,
    pub comp: usize,
    pub with_diagonal_potential: bool,
}

impl CoefficientField for ScalarPart<'_> {
    fn dim(&self) -> usize {
        self.op.dim
    }
    fn comps(&self) -> usize {
        1
    }
    fn diffusion_at(&self, _k: usize, t: f64, x: &[f64], out: &mut [f64]) {
        CoefficientField::diffusion_at(self.op, self.comp, t, x, out)
    }
    fn drift_at(&self, _k: usize, t: f64, x: &[f64], out: &mut [f64]) {
        CoefficientField::drift_at(self.op, self.comp, t, x, out)
    }
    fn coupling_at(&self, t: f64, x: &[f64], out: &mut [f64]) {
        out[0] = if self.with_diagonal_potential {
            self.op.coupling[self.comp][self.comp].eval(t, x)
        } else {
            0.0
        };
    }
    fn is_autonomous(&self) -> bool {
        self.op.is_autonomous()
    }
}

/// Sampling specification: a tensor sample grid over a box plus a number of
/// time samples.
#[derive(Debug, Clone, Copy)]
pub struct SamplingSpec {
    pub domain: BoxDomain,
    pub points_per_axis: usize,
    pub time_samples: usize,
}

impl SamplingSpec {
    pub fn default_for(domain: BoxDomain) -> Self {
        let points = if domain.dim == 1 { 81 } else { 21 };
        SamplingSpec {
            domain,
            points_per_axis: points,
            time_samples: 5,
        }
    }

    pub fn grid(&self) -> UniformGrid {
        UniformGrid::new(self.domain, self.points_per_axis | 1).expect("sampling grid")
    }

    pub fn times(&self, interval: (f64, f64)) -> Vec<f64> {
        let (s, t) = interval;
        if self.time_samples <= 1 || (t - s).abs() < 1e-15 {
            return vec![s];
        }
        (0..self.time_samples)
            .map(|i| s + (t - s) * i as f64 / (self.time_samples - 1) as f64)
            .collect()
    }

    pub fn iter_samples(&self, interval: (f64, f64)) -> Vec<(f64, Vec<f64>)> {
        let grid = self.grid();
        let mut out = Vec::new();
        for t in self.times(interval) {
            for idx in 0..grid.len() {
                out.push((t, grid.point(idx)));
            }
        }
        out
    }
}

/// Result of the row-sum bound: the constant `M_J`, per-row suprema, and the
/// sampled row-sum field at the last time sample.
#[derive(Debug, Clone)]
pub struct RowSumBound {
    pub m_j: f64,
    pub per_row: Vec<f64>,
    /// Row-sum field M_k over the sampling grid, maximized over time samples.
    pub field: GridFunction,
}

/// `M_J = max_k sup_{(t,x)} sum_j c^P_kj(t,x)` over the sampled interval and
/// box, with a monotonicity probe at three nested radii: a row whose supremum
/// keeps growing (and is positive at the largest probe) fails the
/// bounded-above hypothesis.
pub fn row_sum_bound(
    aux: &AuxiliaryFamily,
    interval: (f64, f64),
    domain: BoxDomain,
    sampling: &SamplingSpec,
) -> Result<RowSumBound> {
    let m = aux.comps();
    // Growth probe on nested radii (coarse sampling).
    let probe_radii = [domain.radius, 2.0 * domain.radius, 4.0 * domain.radius];
    let mut probe_sups = vec![[f64::NEG_INFINITY; 3]; m];
    for (i, &r) in probe_radii.iter().enumerate() {
        let spec = SamplingSpec {
            domain: BoxDomain::new(r, domain.dim),
            points_per_axis: 41,
            time_samples: sampling.time_samples,
        };
        for (t, x) in spec.iter_samples(interval) {
            let sums = aux.row_sums(t, &x);
            for k in 0..m {
                probe_sups[k][i] = probe_sups[k][i].max(sums[k]);
            }
        }
    }
    for (k, sups) in probe_sups.iter().enumerate() {
        let growing = (0..2).all(|i| sups[i + 1] > sups[i] + 1e-9 + 1e-3 * sups[i].abs());
        if growing && sups[2] > 0.0 {
            return Err(Error::UnboundedAbove {
                row: k,
                values: sups.to_vec(),
            });
        }
    }
    // Supremum over the configured domain.
    let grid = sampling.grid();
    let times = sampling.times(interval);
    let mut field = GridFunction::zeros(grid, m);
    for comp in &mut field.data {
        comp.fill(f64::NEG_INFINITY);
    }
    let mut per_row = vec![f64::NEG_INFINITY; m];
    for &t in &times {
        let sums_at = exec::map_indexed(grid.len(), |idx| aux.row_sums(t, &grid.point(idx)));
        for (idx, sums) in sums_at.iter().enumerate() {
            for k in 0..m {
                field.data[k][idx] = field.data[k][idx].max(sums[k]);
                per_row[k] = per_row[k].max(sums[k]);
            }
        }
    }
    let m_j = per_row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(RowSumBound {
        m_j,
        per_row,
        field,
    })
}

/// `Mbar = (1 + M + 2 M^+)/2`, the exponential rate of the derivative
/// estimates.
pub fn m_bar(m_j: f64) -> f64 {
    0.5 * (1.0 + m_j + 2.0 * m_j.max(0.0))
}

/// Discrete Hölder norms of the coefficients over a box: the maximum over
/// all coefficient entries of `sup + Hölder quotient` (pairs capped at
/// `HOLDER_PAIR_CAP` cells), and the same norm for the difference
/// `A(t) - A(s)`.
pub fn coefficient_norms(
    op: &OperatorFamily,
    t: f64,
    s: f64,
    alpha: f64,
    domain: BoxDomain,
    points_per_axis: usize,
) -> Result<(f64, f64)> {
    assert!(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0,1)");
    let grid = UniformGrid::new(domain, points_per_axis | 1)?;
    let entry_norm = |f: &(dyn Fn(&[f64]) -> f64 + Sync)| -> f64 {
        let gf = GridFunction {
            grid,
            data: vec![exec::map_indexed(grid.len(), |i| f(&grid.point(i)))],
        };
        gf.sup_norm() + holder_seminorm(&gf, alpha, HOLDER_PAIR_CAP)
    };
    let mut norm_t = 0.0f64;
    let mut norm_diff = 0.0f64;
    for e in op.all_exprs() {
        norm_t = norm_t.max(entry_norm(&|x| e.eval(t, x)));
        norm_diff = norm_diff.max(entry_norm(&|x| e.eval(t, x) - e.eval(s, x)));
    }
    Ok((norm_t, norm_diff))
}
