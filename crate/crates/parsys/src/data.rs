//! Initial data for experiments: fixed-seed smooth random fields (low-order
//! trigonometric sums), Gaussian bumps, step-profile data for the decay fits,
//! and expression-defined fields.

use crate::grid::{GridFunction, UniformGrid};
use crate::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Smooth random field: trigonometric sum over tensor cosine modes (zero
/// normal derivative at the faces, so the data is compatible with the
/// Neumann closure).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SmoothFieldSpec {
    pub amplitude: f64,
    /// Highest mode index per axis.
    pub bandwidth: usize,
    /// Multiply by a smooth window supported in the inner half-box.
    pub localized: bool,
}

impl Default for SmoothFieldSpec {
    fn default() -> Self {
        SmoothFieldSpec {
            amplitude: 1.0,
            bandwidth: 3,
            localized: false,
        }
    }
}

/// Smooth window: 1 on 60% of the half-box, decaying to 0 at the half-box
/// boundary with a cos^2 ramp.
fn half_box_window(x: &[f64], radius: f64) -> f64 {
    let inner = 0.5 * radius;
    let mut w = 1.0;
    for &xi in x {
        let s = xi.abs() / inner;
        w *= if s <= 0.6 {
            1.0
        } else if s >= 1.0 {
            0.0
        } else {
            let r = (s - 0.6) / 0.4;
            (0.5 * std::f64::consts::PI * r).cos().powi(2)
        };
    }
    w
}

/// Deterministic smooth random field with `comps` components.
pub fn random_smooth(
    grid: UniformGrid,
    comps: usize,
    spec: &SmoothFieldSpec,
    seed: u64,
) -> GridFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = grid.dim();
    let r = grid.domain.radius;
    let b = spec.bandwidth.max(1);
    let mut modes: Vec<Vec<usize>> = Vec::new();
    let total = (b + 1).pow(d as u32);
    for flat in 0..total {
        let mut rem = flat;
        let mut nu = vec![0usize; d];
        for a in (0..d).rev() {
            nu[a] = rem % (b + 1);
            rem /= b + 1;
        }
        modes.push(nu);
    }
    let scale = 1.0 / (modes.len() as f64).sqrt();
    let coeffs: Vec<Vec<f64>> = (0..comps)
        .map(|_| modes.iter().map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect();
    GridFunction::from_fn(grid, comps, |k, x| {
        let mut acc = 0.0;
        for (a, nu) in coeffs[k].iter().zip(&modes) {
            let mut prod = 1.0;
            for (i, &ni) in nu.iter().enumerate() {
                prod *= (ni as f64 * std::f64::consts::PI * (x[i] + r) / (2.0 * r)).cos();
            }
            acc += a * prod;
        }
        let mut v = spec.amplitude * acc * scale;
        if spec.localized {
            v *= half_box_window(x, r);
        }
        v
    })
}

/// Data for the smoothing-rate fits: a field whose h-th derivative is a
/// smoothed step of transition width `width` (profile tanh(x_1 / width)),
/// so the discrete C^h norm is O(1) and resolution-stable while higher
/// norms scale like width^(h-k).
pub fn rough_profile(grid: UniformGrid, h_order: usize, width: f64) -> GridFunction {
    assert!(h_order <= 3);
    let n = grid.points_per_axis;
    let hx = grid.spacing;
    // 1-d profile along axis 0 by repeated cumulative integration of tanh,
    // each antiderivative vanishing at the origin.
    let mut line: Vec<f64> = (0..n).map(|i| (grid.coord(i) / width).tanh()).collect();
    for _ in 0..h_order {
        let mut integral = vec![0.0; n];
        let mid = (n - 1) / 2;
        for i in mid..n - 1 {
            integral[i + 1] = integral[i] + 0.5 * hx * (line[i] + line[i + 1]);
        }
        for i in (0..mid).rev() {
            integral[i] = integral[i + 1] - 0.5 * hx * (line[i] + line[i + 1]);
        }
        line = integral;
    }
    GridFunction::from_fn(grid, 1, |_, x| {
        let i = ((x[0] + grid.domain.radius) / hx).round() as usize;
        line[i.min(n - 1)]
    })
}

/// Analytic manufactured solution: per component a sum of tensor cosine
/// modes (Neumann-compatible), optionally modulated in time by
/// `1 + time_amp sin(time_freq t)`. Derivatives are closed-form, so exact
/// forcing terms for elliptic and parabolic recovery tests come for free.
#[derive(Debug, Clone)]
pub struct ManufacturedSolution {
    /// modes[k] = list of (per-axis mode indices, amplitude).
    pub modes: Vec<Vec<(Vec<usize>, f64)>>,
    pub radius: f64,
    pub time_amp: f64,
    pub time_freq: f64,
}

impl ManufacturedSolution {
    /// A default two-mode profile per component.
    pub fn sample(comps: usize, dim: usize, radius: f64) -> Self {
        let modes = (0..comps)
            .map(|k| {
                let mut base = vec![1usize; dim];
                base[0] = 1 + k % 2;
                let mut second = vec![0usize; dim];
                second[dim - 1] = 2;
                vec![(base, 1.0), (second, 0.4)]
            })
            .collect();
        ManufacturedSolution {
            modes,
            radius,
            time_amp: 0.0,
            time_freq: 1.0,
        }
    }

    pub fn with_time(mut self, amp: f64, freq: f64) -> Self {
        self.time_amp = amp;
        self.time_freq = freq;
        self
    }

    fn a(&self, t: f64) -> f64 {
        1.0 + self.time_amp * (self.time_freq * t).sin()
    }

    fn a_dot(&self, t: f64) -> f64 {
        self.time_amp * self.time_freq * (self.time_freq * t).cos()
    }

    fn omega(&self, nu: usize) -> f64 {
        nu as f64 * std::f64::consts::PI / (2.0 * self.radius)
    }

    pub fn value(&self, k: usize, t: f64, x: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (nu, amp) in &self.modes[k] {
            let mut prod = *amp;
            for (i, &ni) in nu.iter().enumerate() {
                prod *= (self.omega(ni) * (x[i] + self.radius)).cos();
            }
            acc += prod;
        }
        self.a(t) * acc
    }

    pub fn grad(&self, k: usize, t: f64, x: &[f64]) -> Vec<f64> {
        let d = x.len();
        let mut out = vec![0.0; d];
        for (nu, amp) in &self.modes[k] {
            for (j, slot) in out.iter_mut().enumerate() {
                let mut prod = *amp;
                for (i, &ni) in nu.iter().enumerate() {
                    let w = self.omega(ni);
                    let arg = w * (x[i] + self.radius);
                    prod *= if i == j { -w * arg.sin() } else { arg.cos() };
                }
                *slot += prod;
            }
        }
        for v in out.iter_mut() {
            *v *= self.a(t);
        }
        out
    }

    pub fn hess(&self, k: usize, t: f64, x: &[f64]) -> Vec<f64> {
        let d = x.len();
        let mut out = vec![0.0; d * d];
        for (nu, amp) in &self.modes[k] {
            for j in 0..d {
                for l in 0..d {
                    let mut prod = *amp;
                    for (i, &ni) in nu.iter().enumerate() {
                        let w = self.omega(ni);
                        let arg = w * (x[i] + self.radius);
                        let order = (i == j) as usize + (i == l) as usize;
                        prod *= match order {
                            0 => arg.cos(),
                            1 => -w * arg.sin(),
                            _ => -w * w * arg.cos(),
                        };
                    }
                    out[j * d + l] += prod;
                }
            }
        }
        for v in out.iter_mut() {
            *v *= self.a(t);
        }
        out
    }

    pub fn dt(&self, k: usize, t: f64, x: &[f64]) -> f64 {
        self.a_dot(t) / self.a(t) * self.value(k, t, x)
    }

    pub fn field(&self, grid: UniformGrid, t: f64) -> GridFunction {
        GridFunction::from_fn(grid, self.modes.len(), |k, x| self.value(k, t, x))
    }

    /// The operator applied analytically: (A(t) u)(x) for the family's
    /// evaluated coefficients.
    pub fn apply_operator(
        &self,
        op: &crate::operator::OperatorFamily,
        grid: UniformGrid,
        t: f64,
    ) -> GridFunction {
        use crate::operator::CoefficientField;
        let d = grid.dim();
        let m = self.modes.len();
        GridFunction::from_fn(grid, m, |k, x| {
            let mut q = vec![0.0; d * d];
            let mut b = vec![0.0; d];
            let mut c = vec![0.0; m * m];
            op.diffusion_at(k, t, x, &mut q);
            op.drift_at(k, t, x, &mut b);
            op.coupling_at(t, x, &mut c);
            let hess = self.hess(k, t, x);
            let grad = self.grad(k, t, x);
            let mut acc = 0.0;
            for i in 0..d {
                for j in 0..d {
                    acc += q[i * d + j] * hess[i * d + j];
                }
                acc += b[i] * grad[i];
            }
            for h in 0..m {
                acc += c[k * m + h] * self.value(h, t, x);
            }
            acc
        })
    }
}

/// Initial-datum kinds of the experiment spec JSON.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum InitialData {
    Gaussian {
        /// Per-component amplitudes.
        amp: Vec<f64>,
        sigma: f64,
        #[serde(default)]
        center: Option<Vec<f64>>,
    },
    Constant {
        values: Vec<f64>,
    },
    RandomSmooth {
        comps: usize,
        #[serde(default)]
        amplitude: Option<f64>,
        #[serde(default)]
        bandwidth: Option<usize>,
        #[serde(default)]
        localized: bool,
        seed: u64,
    },
    /// One expression per component over variables x, y and r2 = |x|^2.
    Expression {
        exprs: Vec<String>,
    },
}

impl InitialData {
    pub fn build(&self, grid: UniformGrid) -> Result<GridFunction> {
        match self {
            InitialData::Gaussian { amp, sigma, center } => {
                let c = center.clone().unwrap_or_else(|| vec![0.0; grid.dim()]);
                if c.len() != grid.dim() {
                    return Err(Error::InvalidConfig(
                        "gaussian center has wrong dimension".into(),
                    ));
                }
                let s2 = 2.0 * sigma * sigma;
                Ok(GridFunction::from_fn(grid, amp.len(), |k, x| {
                    let r2: f64 = x.iter().zip(&c).map(|(a, b)| (a - b) * (a - b)).sum();
                    amp[k] * (-r2 / s2).exp()
                }))
            }
            InitialData::Constant { values } => {
                Ok(GridFunction::from_fn(grid, values.len(), |k, _| values[k]))
            }
            InitialData::RandomSmooth {
                comps,
                amplitude,
                bandwidth,
                localized,
                seed,
            } => {
                let spec = SmoothFieldSpec {
                    amplitude: amplitude.unwrap_or(1.0),
                    bandwidth: bandwidth.unwrap_or(3),
                    localized: *localized,
                };
                Ok(random_smooth(grid, *comps, &spec, *seed))
            }
            InitialData::Expression { exprs } => {
                let mut data = Vec::with_capacity(exprs.len());
                for src in exprs {
                    let expr: meval::Expr = src.parse().map_err(|e| {
                        Error::InvalidConfig(format!("bad expression `{src}`: {e}"))
                    })?;
                    let mut ctx = meval::Context::new();
                    let mut comp = Vec::with_capacity(grid.len());
                    for idx in 0..grid.len() {
                        let x = grid.point(idx);
                        ctx.var("x", x[0]);
                        ctx.var("y", if grid.dim() > 1 { x[1] } else { 0.0 });
                        ctx.var("r2", x.iter().map(|v| v * v).sum::<f64>());
                        let v = expr
                            .eval_with_context(&ctx)
                            .map_err(|e| Error::InvalidConfig(format!("eval `{src}`: {e}")))?;
                        comp.push(v);
                    }
                    data.push(comp);
                }
                Ok(GridFunction { grid, data })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::BoxDomain;
    use approx::assert_abs_diff_eq;

    fn grid1(n: usize, r: f64) -> UniformGrid {
        UniformGrid::new(BoxDomain::new(r, 1), n).unwrap()
    }

    #[test]
    fn random_fields_are_seed_deterministic() {
        let g = grid1(81, 2.0);
        let spec = SmoothFieldSpec::default();
        let a = random_smooth(g, 2, &spec, 42);
        let b = random_smooth(g, 2, &spec, 42);
        assert_eq!(a.data, b.data);
        let c = random_smooth(g, 2, &spec, 43);
        assert!(a.sup_diff(&c) > 0.0);
    }

    #[test]
    fn localized_field_vanishes_outside_half_box() {
        let g = grid1(161, 4.0);
        let spec = SmoothFieldSpec {
            localized: true,
            ..Default::default()
        };
        let f = random_smooth(g, 1, &spec, 7);
        for i in 0..g.len() {
            if g.point(i)[0].abs() >= 2.0 {
                assert_eq!(f.data[0][i], 0.0);
            }
        }
    }

    #[test]
    fn rough_profile_has_unit_h_derivative_scale() {
        let g = grid1(401, 4.0);
        let w = 5.0 * g.spacing;
        for h in 0..=2usize {
            let f = rough_profile(g, h, w);
            let dh = crate::grid::derivative_magnitude(&f, h).unwrap().sup_norm();
            assert!((dh - 1.0).abs() < 0.1, "order {h}: |D^h f| = {dh}");
        }
    }

    #[test]
    fn expression_initial_data() {
        let g = grid1(21, 1.0);
        let init = InitialData::Expression {
            exprs: vec!["sin(x) + r2".into()],
        };
        let f = init.build(g).unwrap();
        let x = g.point(3)[0];
        assert_abs_diff_eq!(f.data[0][3], x.sin() + x * x, epsilon = 1e-12);
    }

    #[test]
    fn gaussian_and_constant_kinds() {
        let g = grid1(21, 1.0);
        let f = InitialData::Gaussian {
            amp: vec![2.0, -1.0],
            sigma: 0.5,
            center: None,
        }
        .build(g)
        .unwrap();
        assert_eq!(f.comps(), 2);
        assert_abs_diff_eq!(f.data[0][10], 2.0, epsilon = 1e-12);
        let c = InitialData::Constant { values: vec![3.0] }
            .build(g)
            .unwrap();
        assert!(c.data[0].iter().all(|&v| v == 3.0));
    }
}
