//! Small numerical kernels: banded LU, preconditioned BiCGSTAB, finite
//! difference weights, quadrature and fitting helpers.

use crate::exec;
use nalgebra::{DMatrix, DVector};

/// General banded matrix in LAPACK band storage with room for fill-in from
/// row pivoting: `ab[kl + ku + i - j][j] = A[i][j]`, plus `kl` extra
/// superdiagonals above for the factorization.
#[derive(Debug, Clone)]
pub struct Banded {
    pub n: usize,
    pub kl: usize,
    pub ku: usize,
    /// (2*kl + ku + 1) rows by n columns, row-major.
    ab: Vec<f64>,
    rows: usize,
}

impl Banded {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let rows = 2 * kl + ku + 1;
        Banded {
            n,
            kl,
            ku,
            ab: vec![0.0; rows * n],
            rows,
        }
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> usize {
        // The storage covers kl + ku above the diagonal: row pivoting fills
        // U up to that width.
        debug_assert!(i + self.ku + self.kl >= j && j + self.kl >= i);
        (self.kl + self.ku + i - j) * self.n + j
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i + self.ku + self.kl >= j && j + self.kl >= i {
            self.ab[self.slot(i, j)]
        } else {
            0.0
        }
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let s = self.slot(i, j);
        self.ab[s] = v;
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let s = self.slot(i, j);
        self.ab[s] += v;
    }

    pub fn matvec(&self, x: &[f64], out: &mut [f64]) {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        for i in 0..n {
            let j0 = i.saturating_sub(kl);
            let j1 = (i + ku).min(n - 1);
            let mut acc = 0.0;
            for j in j0..=j1 {
                acc += self.ab[(kl + ku + i - j) * n + j] * x[j];
            }
            out[i] = acc;
        }
    }

    /// LU factorization with partial pivoting (the dgbtrf scheme: pivoting
    /// widens the upper band to kl + ku).
    pub fn factor(mut self) -> Result<BandedLu, String> {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        let kv = kl + ku;
        let mut piv = vec![0usize; n];
        for j in 0..n {
            // Pivot search in column j among rows j..=min(j+kl, n-1).
            let i_max = (j + kl).min(n - 1);
            let mut p = j;
            let mut best = self.get(j, j).abs();
            for i in (j + 1)..=i_max {
                let v = self.get(i, j).abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == 0.0 {
                return Err(format!("banded LU: zero pivot at column {j}"));
            }
            piv[j] = p;
            if p != j {
                // Swap rows p and j within the band (columns j..=min(j+kv, n-1)).
                let jn = (j + kv).min(n - 1);
                for c in j..=jn {
                    let sj = (kl + ku + j - c) * n + c;
                    let sp = (kl + ku + p - c) * n + c;
                    self.ab.swap(sj, sp);
                }
            }
            let pivot = self.get(j, j);
            let jn = (j + kv).min(n - 1);
            for i in (j + 1)..=i_max {
                let l = self.get(i, j) / pivot;
                self.set(i, j, l);
                if l != 0.0 {
                    for c in (j + 1)..=jn {
                        let up = self.ab[(kl + ku + j - c) * n + c];
                        if up != 0.0 {
                            self.ab[(kl + ku + i - c) * n + c] -= l * up;
                        }
                    }
                }
            }
        }
        let _ = self.rows;
        Ok(BandedLu { mat: self, piv })
    }
}

/// Factored banded matrix.
#[derive(Debug, Clone)]
pub struct BandedLu {
    mat: Banded,
    piv: Vec<usize>,
}

impl BandedLu {
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.mat.n;
        let kl = self.mat.kl;
        let kv = self.mat.kl + self.mat.ku;
        // Forward substitution with the stored multipliers.
        for j in 0..n {
            let p = self.piv[j];
            if p != j {
                b.swap(j, p);
            }
            let i_max = (j + kl).min(n - 1);
            let bj = b[j];
            if bj != 0.0 {
                for i in (j + 1)..=i_max {
                    b[i] -= self.mat.get(i, j) * bj;
                }
            }
        }
        // Back substitution on U (band width kv above the diagonal).
        for j in (0..n).rev() {
            let jn = (j + kv).min(n - 1);
            let mut acc = b[j];
            for c in (j + 1)..=jn {
                acc -= self.mat.get(j, c) * b[c];
            }
            b[j] = acc / self.mat.get(j, j);
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}

/// Outcome of an iterative solve.
#[derive(Debug, Clone, Copy)]
pub struct IterativeStats {
    pub iters: usize,
    pub residual: f64,
    pub converged: bool,
}

/// Preconditioned BiCGSTAB for a matrix-free operator. `apply(x, out)` must
/// compute `out = A x`; `precond(r, out)` computes `out = M^{-1} r`.
/// Convergence: ||r||_2 <= tol * max(1, ||b||_2).
pub fn bicgstab(
    apply: &dyn Fn(&[f64], &mut [f64]),
    precond: &dyn Fn(&[f64], &mut [f64]),
    b: &[f64],
    x0: &[f64],
    tol: f64,
    max_iters: usize,
) -> (Vec<f64>, IterativeStats) {
    let n = b.len();
    let mut x = x0.to_vec();
    let mut r = vec![0.0; n];
    apply(&x, &mut r);
    for i in 0..n {
        r[i] = b[i] - r[i];
    }
    let bnorm = norm2(b).max(1.0);
    let target = tol * bnorm;
    let mut rnorm = norm2(&r);
    if rnorm <= target {
        return (
            x,
            IterativeStats {
                iters: 0,
                residual: rnorm,
                converged: true,
            },
        );
    }
    let r0 = r.clone();
    let (mut rho, mut alpha, mut omega) = (1.0f64, 1.0f64, 1.0f64);
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut phat = vec![0.0; n];
    let mut shat = vec![0.0; n];
    let mut t = vec![0.0; n];
    let mut iters = 0;
    for it in 1..=max_iters {
        iters = it;
        let rho_new = dot(&r0, &r);
        if rho_new.abs() < 1e-300 {
            break;
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for i in 0..n {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
        }
        precond(&p, &mut phat);
        apply(&phat, &mut v);
        alpha = rho / dot(&r0, &v);
        let mut s = r.clone();
        for i in 0..n {
            s[i] -= alpha * v[i];
        }
        if norm2(&s) <= target {
            for i in 0..n {
                x[i] += alpha * phat[i];
            }
            apply(&x, &mut r);
            for i in 0..n {
                r[i] = b[i] - r[i];
            }
            rnorm = norm2(&r);
            return (
                x,
                IterativeStats {
                    iters,
                    residual: rnorm,
                    converged: rnorm <= target,
                },
            );
        }
        precond(&s, &mut shat);
        apply(&shat, &mut t);
        let tt = dot(&t, &t);
        if tt == 0.0 {
            break;
        }
        omega = dot(&t, &s) / tt;
        for i in 0..n {
            x[i] += alpha * phat[i] + omega * shat[i];
            r[i] = s[i] - omega * t[i];
        }
        rnorm = norm2(&r);
        if rnorm <= target {
            return (
                x,
                IterativeStats {
                    iters,
                    residual: rnorm,
                    converged: true,
                },
            );
        }
        if omega.abs() < 1e-300 {
            break;
        }
    }
    // Recompute the true residual before reporting.
    apply(&x, &mut t);
    for i in 0..n {
        t[i] = b[i] - t[i];
    }
    rnorm = norm2(&t);
    (
        x,
        IterativeStats {
            iters,
            residual: rnorm,
            converged: rnorm <= target,
        },
    )
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn norm_inf(a: &[f64]) -> f64 {
    exec::max_indexed_seq(a.len(), |i| a[i].abs())
}

/// Fornberg finite-difference weights: for nodes `x` and evaluation point
/// `z`, returns `w[k][j]` with `sum_j w[k][j] f(x_j) ~ f^{(k)}(z)` for
/// k = 0..=m.
pub fn fd_weights(z: f64, x: &[f64], m: usize) -> Vec<Vec<f64>> {
    let n = x.len();
    assert!(n > m, "need more nodes than the derivative order");
    let mut c = vec![vec![0.0; n]; m + 1];
    let mut c1 = 1.0;
    let mut c4 = x[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mi = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i] - z;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mi).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mi).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// Least-squares straight line through (x_i, y_i): returns (slope, intercept).
pub fn line_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    let sx: f64 = x.iter().sum();
    let sy: f64 = y.iter().sum();
    let sxx: f64 = x.iter().map(|v| v * v).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let denom = n * sxx - sx * sx;
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    (slope, intercept)
}

/// Adaptive Simpson quadrature of `f` on [a, b].
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        ((b - a) / 6.0 * (fa + 4.0 * fm + fb), fm)
    }
    #[allow(clippy::too_many_arguments)]
    fn rec(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        whole: f64,
        fm: f64,
        tol: f64,
        depth: usize,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (left, flm) = simpson(f, a, fa, m, fm);
        let (right, frm) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            rec(f, a, fa, m, fm, left, flm, 0.5 * tol, depth - 1)
                + rec(f, m, fm, b, fb, right, frm, 0.5 * tol, depth - 1)
        }
    }
    let fa = f(a);
    let fb = f(b);
    let (whole, fm) = simpson(f, a, fa, b, fb);
    rec(f, a, fa, b, fb, whole, fm, tol, 40)
}

/// Matrix exponential by scaling and squaring with a Taylor core; small
/// matrices only (coupling blocks and dense oracles).
pub fn expm(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let norm = a.iter().map(|v| v.abs()).fold(0.0, f64::max) * n as f64;
    let s = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as i32
    } else {
        0
    };
    let scaled = a / 2f64.powi(s);
    let mut term = DMatrix::<f64>::identity(n, n);
    let mut sum = DMatrix::<f64>::identity(n, n);
    for k in 1..=24 {
        term = (&term * &scaled) / k as f64;
        sum += &term;
    }
    let mut out = sum;
    for _ in 0..s {
        out = &out * &out;
    }
    out
}

/// Complex eigenvalues of a real square matrix, as (re, im) pairs sorted by
/// real part then imaginary part.
pub fn eigenvalues(a: &DMatrix<f64>) -> Vec<(f64, f64)> {
    let ev = a.clone().complex_eigenvalues();
    let mut out: Vec<(f64, f64)> = ev.iter().map(|c| (c.re, c.im)).collect();
    out.sort_by(|a, b| a.partial_cmp(b).unwrap());
    out
}

/// Right null vector of a square matrix via SVD (unit norm), together with the
/// two smallest singular values.
pub fn kernel_vector(a: &DMatrix<f64>) -> (DVector<f64>, f64, f64) {
    let n = a.ncols();
    let svd = a.clone().svd(true, true);
    let sv = &svd.singular_values;
    let mut idx: Vec<usize> = (0..sv.len()).collect();
    idx.sort_by(|&i, &j| sv[i].partial_cmp(&sv[j]).unwrap());
    let i_min = idx[0];
    let sigma_min = sv[i_min];
    let sigma_next = if idx.len() > 1 {
        sv[idx[1]]
    } else {
        f64::INFINITY
    };
    let vt = svd.v_t.expect("svd with v_t");
    let v = DVector::from_iterator(n, (0..n).map(|j| vt[(i_min, j)]));
    (v, sigma_min, sigma_next)
}
