//! Coefficients of the radial-power class: scalar fields of the form
//! `coef * tf(t) * (1+|x|^2)^alpha`, optionally multiplied by one coordinate
//! `x_i` (drift entries `-theta x_i (1+|x|^2)^beta`), with closed-form spatial
//! derivatives up to third order.

use serde::{Deserialize, Serialize};

/// Hölder-continuous scalar function of time, in one of three named forms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TimeFactor {
    /// Identically 1 (put the magnitude in the constant factor).
    Const,
    /// `1 + amp * sin(freq * t + phase)`; oscillates around 1 so small
    /// amplitudes keep signs and ellipticity.
    Sin { amp: f64, freq: f64, phase: f64 },
    /// Piecewise-linear interpolation of `[t, value]` pairs, clamped outside
    /// the tabulated range.
    Table(Vec<(f64, f64)>),
}

impl TimeFactor {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            TimeFactor::Const => 1.0,
            TimeFactor::Sin { amp, freq, phase } => 1.0 + amp * (freq * t + phase).sin(),
            TimeFactor::Table(pts) => {
                assert!(!pts.is_empty(), "empty time table");
                if t <= pts[0].0 {
                    return pts[0].1;
                }
                if t >= pts[pts.len() - 1].0 {
                    return pts[pts.len() - 1].1;
                }
                let j = pts.partition_point(|&(tp, _)| tp <= t);
                let (t0, v0) = pts[j - 1];
                let (t1, v1) = pts[j];
                v0 + (v1 - v0) * (t - t0) / (t1 - t0)
            }
        }
    }

    pub fn is_table(&self) -> bool {
        matches!(self, TimeFactor::Table(_))
    }

    pub fn is_const(&self) -> bool {
        matches!(self, TimeFactor::Const)
    }

    /// Sign of the factor over a whole interval, when decidable without
    /// sampling a tabulated form: +1, -1, or None if it may change sign.
    pub fn definite_sign(&self) -> Option<i8> {
        match self {
            TimeFactor::Const => Some(1),
            TimeFactor::Sin { amp, .. } => {
                if amp.abs() < 1.0 {
                    Some(1)
                } else {
                    None
                }
            }
            TimeFactor::Table(_) => None,
        }
    }
}

/// One coefficient field `coef * tf(t) * (1+|x|^2)^radial_power`, optionally
/// times `x_axis`; `abs` wraps the whole value in `|.|` (the auxiliary-matrix
/// off-diagonal entries).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientExpr {
    pub coef: f64,
    pub time: TimeFactor,
    /// Exponent alpha >= 0 of (1+|x|^2)^alpha.
    pub radial_power: f64,
    /// When set, multiply by the coordinate x_i.
    pub axis: Option<usize>,
    #[serde(default)]
    pub abs: bool,
}

impl CoefficientExpr {
    pub fn constant(c: f64) -> Self {
        CoefficientExpr {
            coef: c,
            time: TimeFactor::Const,
            radial_power: 0.0,
            axis: None,
            abs: false,
        }
    }

    pub fn radial(c: f64, alpha: f64) -> Self {
        assert!(alpha >= 0.0, "radial power must be nonnegative");
        CoefficientExpr {
            coef: c,
            time: TimeFactor::Const,
            radial_power: alpha,
            axis: None,
            abs: false,
        }
    }

    /// Drift entry `-theta * x_i * (1+|x|^2)^beta`.
    pub fn drift(theta: f64, beta: f64, axis: usize) -> Self {
        CoefficientExpr {
            coef: -theta,
            time: TimeFactor::Const,
            radial_power: beta,
            axis: Some(axis),
            abs: false,
        }
    }

    pub fn with_time(mut self, tf: TimeFactor) -> Self {
        self.time = tf;
        self
    }

    pub fn into_abs(mut self) -> Self {
        self.abs = true;
        self
    }

    pub fn is_zero(&self) -> bool {
        self.coef == 0.0
    }

    fn scale(&self, t: f64) -> f64 {
        self.coef * self.time.eval(t)
    }

    pub fn eval(&self, t: f64, x: &[f64]) -> f64 {
        let r = 1.0 + x.iter().map(|v| v * v).sum::<f64>();
        let mut v = self.scale(t) * r.powf(self.radial_power);
        if let Some(i) = self.axis {
            v *= x[i];
        }
        if self.abs {
            v.abs()
        } else {
            v
        }
    }

    /// Gradient with respect to x.
    pub fn grad(&self, t: f64, x: &[f64]) -> Vec<f64> {
        let d = x.len();
        let a = self.radial_power;
        let r = 1.0 + x.iter().map(|v| v * v).sum::<f64>();
        let s = self.scale(t) * self.abs_sign(t, x);
        let g = r.powf(a);
        let gp = if a == 0.0 {
            0.0
        } else {
            2.0 * a * r.powf(a - 1.0)
        };
        (0..d)
            .map(|j| {
                let dg = gp * x[j];
                match self.axis {
                    None => s * dg,
                    Some(i) => {
                        let delta = if i == j { g } else { 0.0 };
                        s * (delta + x[i] * dg)
                    }
                }
            })
            .collect()
    }

    /// Second derivatives D_{jk}.
    pub fn hess(&self, t: f64, x: &[f64]) -> Vec<Vec<f64>> {
        let d = x.len();
        let a = self.radial_power;
        let r = 1.0 + x.iter().map(|v| v * v).sum::<f64>();
        let s = self.scale(t) * self.abs_sign(t, x);
        let c1 = if a == 0.0 {
            0.0
        } else {
            2.0 * a * r.powf(a - 1.0)
        };
        let c2 = if a == 0.0 {
            0.0
        } else {
            4.0 * a * (a - 1.0) * r.powf(a - 2.0)
        };
        let dg = |j: usize| c1 * x[j];
        let d2g = |j: usize, k: usize| {
            let delta = if j == k { c1 } else { 0.0 };
            delta + c2 * x[j] * x[k]
        };
        (0..d)
            .map(|j| {
                (0..d)
                    .map(|k| match self.axis {
                        None => s * d2g(j, k),
                        Some(i) => {
                            let mut v = x[i] * d2g(j, k);
                            if i == j {
                                v += dg(k);
                            }
                            if i == k {
                                v += dg(j);
                            }
                            s * v
                        }
                    })
                    .collect()
            })
            .collect()
    }

    /// Third derivatives D_{jkl}, returned as a flat d^3 array indexed
    /// `(j*d + k)*d + l`.
    pub fn third(&self, t: f64, x: &[f64]) -> Vec<f64> {
        let d = x.len();
        let a = self.radial_power;
        let r = 1.0 + x.iter().map(|v| v * v).sum::<f64>();
        let s = self.scale(t) * self.abs_sign(t, x);
        let c1 = if a == 0.0 {
            0.0
        } else {
            2.0 * a * r.powf(a - 1.0)
        };
        let c2 = if a == 0.0 {
            0.0
        } else {
            4.0 * a * (a - 1.0) * r.powf(a - 2.0)
        };
        let c3 = if a == 0.0 {
            0.0
        } else {
            8.0 * a * (a - 1.0) * (a - 2.0) * r.powf(a - 3.0)
        };
        let d2g = |j: usize, k: usize| {
            let delta = if j == k { c1 } else { 0.0 };
            delta + c2 * x[j] * x[k]
        };
        let d3g = |j: usize, k: usize, l: usize| {
            let mut v = c3 * x[j] * x[k] * x[l];
            if j == k {
                v += c2 * x[l];
            }
            if j == l {
                v += c2 * x[k];
            }
            if k == l {
                v += c2 * x[j];
            }
            v
        };
        let mut out = vec![0.0; d * d * d];
        for j in 0..d {
            for k in 0..d {
                for l in 0..d {
                    let v = match self.axis {
                        None => d3g(j, k, l),
                        Some(i) => {
                            let mut v = x[i] * d3g(j, k, l);
                            if i == j {
                                v += d2g(k, l);
                            }
                            if i == k {
                                v += d2g(j, l);
                            }
                            if i == l {
                                v += d2g(j, k);
                            }
                            v
                        }
                    };
                    out[(j * d + k) * d + l] = s * v;
                }
            }
        }
        out
    }

    /// Sign correction used when the expression is abs-wrapped: derivatives of
    /// |c| equal sign(c) times derivatives of c wherever c != 0.
    fn abs_sign(&self, t: f64, x: &[f64]) -> f64 {
        if !self.abs {
            return 1.0;
        }
        let raw = {
            let mut v = self.scale(t);
            if let Some(i) = self.axis {
                v *= x[i];
            }
            v
        };
        if raw > 0.0 {
            1.0
        } else if raw < 0.0 {
            -1.0
        } else {
            0.0
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn sample_exprs() -> Vec<CoefficientExpr> {
        vec![
            CoefficientExpr::radial(1.3, 0.5),
            CoefficientExpr::radial(-0.7, 1.0),
            CoefficientExpr::radial(2.0, 2.5).with_time(TimeFactor::Sin {
                amp: 0.25,
                freq: 1.3,
                phase: 0.4,
            }),
            CoefficientExpr::drift(1.1, 0.5, 0),
            CoefficientExpr::drift(0.9, 1.5, 1),
            CoefficientExpr::constant(3.0),
        ]
    }

    fn fd_grad(e: &CoefficientExpr, t: f64, x: &[f64], h: f64) -> Vec<f64> {
        (0..x.len())
            .map(|j| {
                let mut xp = x.to_vec();
                let mut xm = x.to_vec();
                xp[j] += h;
                xm[j] -= h;
                (e.eval(t, &xp) - e.eval(t, &xm)) / (2.0 * h)
            })
            .collect()
    }

    #[test]
    fn analytic_gradient_matches_central_differences() {
        // Spec tolerance: relative error <= 1e-6 at h = 1e-4 on |x| <= 5.
        let h = 1e-4;
        let pts = [
            vec![0.3, -1.2],
            vec![2.0, 4.5],
            vec![-4.9, 0.0],
            vec![0.0, 0.0],
        ];
        for e in sample_exprs() {
            for x in &pts {
                let g = e.grad(0.7, x);
                let fd = fd_grad(&e, 0.7, x, h);
                for j in 0..x.len() {
                    let scale = g[j].abs().max(1.0);
                    assert!(
                        (g[j] - fd[j]).abs() / scale <= 1e-6,
                        "expr {e:?} at {x:?}: {} vs {}",
                        g[j],
                        fd[j]
                    );
                }
            }
        }
    }

    #[test]
    fn analytic_hessian_matches_fd_of_gradient() {
        let h = 1e-4;
        for e in sample_exprs() {
            let x = [1.4, -2.3];
            let hess = e.hess(0.2, &x);
            for j in 0..2 {
                for k in 0..2 {
                    let mut xp = x.to_vec();
                    let mut xm = x.to_vec();
                    xp[k] += h;
                    xm[k] -= h;
                    let fd = (e.grad(0.2, &xp)[j] - e.grad(0.2, &xm)[j]) / (2.0 * h);
                    let scale = hess[j][k].abs().max(1.0);
                    assert!((hess[j][k] - fd).abs() / scale <= 1e-6);
                }
            }
        }
    }

    #[test]
    fn analytic_third_matches_fd_of_hessian() {
        let h = 1e-4;
        for e in sample_exprs() {
            let x = [0.8, 1.7];
            let d = 2;
            let third = e.third(0.0, &x);
            for j in 0..d {
                for k in 0..d {
                    for l in 0..d {
                        let mut xp = x.to_vec();
                        let mut xm = x.to_vec();
                        xp[l] += h;
                        xm[l] -= h;
                        let fd = (e.hess(0.0, &xp)[j][k] - e.hess(0.0, &xm)[j][k]) / (2.0 * h);
                        let v = third[(j * d + k) * d + l];
                        let scale = v.abs().max(1.0);
                        assert!((v - fd).abs() / scale <= 1e-5);
                    }
                }
            }
        }
    }

    #[test]
    fn radial_evaluation_example() {
        // zeta = 1, alpha = 1 at x = 1: (1 + 1)^1 = 2.
        let e = CoefficientExpr::radial(1.0, 1.0);
        assert_abs_diff_eq!(e.eval(0.0, &[1.0]), 2.0, epsilon = 1e-15);
    }

    #[test]
    fn table_interpolates_and_clamps() {
        let tf = TimeFactor::Table(vec![(0.0, 0.0), (1.0, 1.0)]);
        assert_abs_diff_eq!(tf.eval(0.5), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(tf.eval(-1.0), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(tf.eval(2.0), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn abs_wrapping_flips_negative_values() {
        let e = CoefficientExpr::radial(-2.0, 0.5).into_abs();
        assert!(e.eval(0.0, &[1.0]) > 0.0);
        // Idempotent: wrapping twice changes nothing.
        let e2 = e.clone().into_abs();
        assert_eq!(e, e2);
    }

    #[test]
    fn time_factor_json_forms() {
        let c: TimeFactor = serde_json::from_str("\"const\"").unwrap();
        assert_eq!(c, TimeFactor::Const);
        let s: TimeFactor =
            serde_json::from_str(r#"{"sin":{"amp":0.5,"freq":2.0,"phase":0.0}}"#).unwrap();
        assert_eq!(
            s,
            TimeFactor::Sin {
                amp: 0.5,
                freq: 2.0,
                phase: 0.0
            }
        );
        let t: TimeFactor = serde_json::from_str(r#"{"table":[[0.0,1.0],[1.0,2.0]]}"#).unwrap();
        assert!(t.is_table());
    }
}
