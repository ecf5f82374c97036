//! Uniform tensor grids on truncated boxes, finite-difference stencils up to
//! third order, Neumann ghost closure and discrete norm machinery.
//!
//! Boxes stand in for the exhausting balls of the whole-space construction:
//! they are convex (the only property the comparison argument uses) and make
//! tensor grids and even reflection exact. Reports label them "box radius R".

use crate::exec;
use crate::linalg::fd_weights;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Symmetric box `[-R, R]^d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxDomain {
    pub radius: f64,
    pub dim: usize,
}

impl BoxDomain {
    pub fn new(radius: f64, dim: usize) -> Self {
        assert!(radius > 0.0 && dim >= 1);
        BoxDomain { radius, dim }
    }

    /// Box with the same dimension and `factor` times the radius.
    pub fn scaled(&self, factor: f64) -> Self {
        BoxDomain {
            radius: self.radius * factor,
            dim: self.dim,
        }
    }
}

/// Uniform tensor grid with an odd number of points per axis (so the origin
/// is a grid point).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniformGrid {
    pub domain: BoxDomain,
    /// Points per axis, odd, >= 5.
    pub points_per_axis: usize,
    pub spacing: f64,
}

/// Default grid resolutions keeping each verification run at desk scale.
pub const DEFAULT_POINTS_1D: usize = 401;
pub const DEFAULT_POINTS_2D: usize = 101;

impl UniformGrid {
    pub fn new(domain: BoxDomain, points_per_axis: usize) -> Result<Self> {
        if points_per_axis < 5 || points_per_axis.is_multiple_of(2) {
            return Err(Error::GridTooCoarse(format!(
                "points_per_axis must be odd and >= 5, got {points_per_axis}"
            )));
        }
        let spacing = 2.0 * domain.radius / (points_per_axis - 1) as f64;
        Ok(UniformGrid {
            domain,
            points_per_axis,
            spacing,
        })
    }

    /// Default desk-scale grid for a domain: 401 points in d=1, 101 per axis
    /// in d=2.
    pub fn default_for(domain: BoxDomain) -> Self {
        let n = if domain.dim == 1 {
            DEFAULT_POINTS_1D
        } else {
            DEFAULT_POINTS_2D
        };
        UniformGrid::new(domain, n).expect("defaults are valid")
    }

    pub fn dim(&self) -> usize {
        self.domain.dim
    }

    pub fn len(&self) -> usize {
        self.points_per_axis.pow(self.dim() as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn coord(&self, i: usize) -> f64 {
        -self.domain.radius + i as f64 * self.spacing
    }

    /// Cartesian coordinates of the flat index (row-major over axes).
    pub fn point(&self, idx: usize) -> Vec<f64> {
        match self.dim() {
            1 => vec![self.coord(idx)],
            2 => {
                let n = self.points_per_axis;
                vec![self.coord(idx / n), self.coord(idx % n)]
            }
            d => {
                let n = self.points_per_axis;
                let mut rem = idx;
                let mut out = vec![0.0; d];
                for a in (0..d).rev() {
                    out[a] = self.coord(rem % n);
                    rem /= n;
                }
                out
            }
        }
    }

    /// Multi-index of a flat index.
    pub fn multi_index(&self, idx: usize) -> Vec<usize> {
        let n = self.points_per_axis;
        let d = self.dim();
        let mut rem = idx;
        let mut out = vec![0usize; d];
        for a in (0..d).rev() {
            out[a] = rem % n;
            rem /= n;
        }
        out
    }

    #[inline]
    pub fn flat_index(&self, mi: &[usize]) -> usize {
        let n = self.points_per_axis;
        mi.iter().fold(0usize, |acc, &i| acc * n + i)
    }

    /// Stride of one step along `axis` in the flat ordering.
    #[inline]
    pub fn stride(&self, axis: usize) -> usize {
        self.points_per_axis.pow((self.dim() - 1 - axis) as u32)
    }

    /// Trapezoid quadrature weights (tensor product).
    pub fn trapezoid_weights(&self) -> Vec<f64> {
        let n = self.points_per_axis;
        let axis: Vec<f64> = (0..n)
            .map(|i| {
                if i == 0 || i == n - 1 {
                    0.5 * self.spacing
                } else {
                    self.spacing
                }
            })
            .collect();
        match self.dim() {
            1 => axis,
            2 => {
                let mut w = vec![0.0; n * n];
                for i in 0..n {
                    for j in 0..n {
                        w[i * n + j] = axis[i] * axis[j];
                    }
                }
                w
            }
            _ => {
                let mut w = vec![1.0; self.len()];
                for (idx, wv) in w.iter_mut().enumerate() {
                    for &mi in &self.multi_index(idx) {
                        *wv *= axis[mi];
                    }
                }
                w
            }
        }
    }

    /// The coincident sub-grid of radius `inner_radius` (must be a whole
    /// number of cells). Returns the sub-grid and the multi-offset of its
    /// first point.
    pub fn subgrid(&self, inner_radius: f64) -> Result<(UniformGrid, usize)> {
        let cells = inner_radius / self.spacing;
        let k = cells.round();
        if (cells - k).abs() > 1e-9 || inner_radius > self.domain.radius + 1e-12 {
            return Err(Error::NotNested(format!(
                "inner radius {inner_radius} is not a whole number of cells (h = {})",
                self.spacing
            )));
        }
        let k = k as usize;
        let n_in = 2 * k + 1;
        if n_in < 5 {
            return Err(Error::GridTooCoarse(format!(
                "inner grid would have {n_in} points per axis"
            )));
        }
        let offset = (self.points_per_axis - 1) / 2 - k;
        let inner = UniformGrid {
            domain: BoxDomain::new(k as f64 * self.spacing, self.dim()),
            points_per_axis: n_in,
            spacing: self.spacing,
        };
        Ok((inner, offset))
    }
}

/// An m-component field of reals over the points of a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    pub grid: UniformGrid,
    /// data[k][idx], component-major.
    pub data: Vec<Vec<f64>>,
}

impl GridFunction {
    pub fn zeros(grid: UniformGrid, comps: usize) -> Self {
        GridFunction {
            grid,
            data: vec![vec![0.0; grid.len()]; comps],
        }
    }

    pub fn from_fn(
        grid: UniformGrid,
        comps: usize,
        f: impl Fn(usize, &[f64]) -> f64 + Sync,
    ) -> Self {
        let data = (0..comps)
            .map(|k| exec::map_indexed(grid.len(), |idx| f(k, &grid.point(idx))))
            .collect();
        GridFunction { grid, data }
    }

    pub fn comps(&self) -> usize {
        self.data.len()
    }

    pub fn component(&self, k: usize) -> &[f64] {
        &self.data[k]
    }

    /// Componentwise absolute value `|f| = (|f_1|, ..., |f_m|)`.
    pub fn abs(&self) -> GridFunction {
        GridFunction {
            grid: self.grid,
            data: self
                .data
                .iter()
                .map(|c| c.iter().map(|v| v.abs()).collect())
                .collect(),
        }
    }

    pub fn scale(&self, a: f64) -> GridFunction {
        GridFunction {
            grid: self.grid,
            data: self
                .data
                .iter()
                .map(|c| c.iter().map(|v| a * v).collect())
                .collect(),
        }
    }

    pub fn linear_comb(&self, a: f64, other: &GridFunction, b: f64) -> GridFunction {
        assert_eq!(self.comps(), other.comps());
        GridFunction {
            grid: self.grid,
            data: (0..self.comps())
                .map(|k| {
                    self.data[k]
                        .iter()
                        .zip(&other.data[k])
                        .map(|(x, y)| a * x + b * y)
                        .collect()
                })
                .collect(),
        }
    }

    /// Max over components of the sup norm.
    pub fn sup_norm(&self) -> f64 {
        self.data
            .iter()
            .map(|c| exec::max_indexed_seq(c.len(), |i| c[i].abs()))
            .fold(0.0, f64::max)
    }

    /// Sup norm of each component.
    pub fn sup_norm_per_comp(&self) -> Vec<f64> {
        self.data
            .iter()
            .map(|c| exec::max_indexed_seq(c.len(), |i| c[i].abs()))
            .collect()
    }

    pub fn sup_diff(&self, other: &GridFunction) -> f64 {
        assert_eq!(self.comps(), other.comps());
        (0..self.comps())
            .map(|k| {
                exec::max_indexed_seq(self.data[k].len(), |i| {
                    (self.data[k][i] - other.data[k][i]).abs()
                })
            })
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|c| c.iter().all(|v| v.is_finite()))
    }

    /// Restriction to a coincident sub-grid.
    pub fn restrict(&self, inner_radius: f64) -> Result<GridFunction> {
        let (inner, offset) = self.grid.subgrid(inner_radius)?;
        let n = self.grid.points_per_axis;
        let ni = inner.points_per_axis;
        let d = self.grid.dim();
        let data = self
            .data
            .iter()
            .map(|c| {
                (0..inner.len())
                    .map(|idx| {
                        let mut rem = idx;
                        let mut outer = 0usize;
                        let mut pow = 1usize;
                        // Build the outer flat index axis by axis (last axis fastest).
                        for _ in 0..d {
                            let mi = rem % ni;
                            outer += (mi + offset) * pow;
                            pow *= n;
                            rem /= ni;
                        }
                        c[outer]
                    })
                    .collect()
            })
            .collect();
        Ok(GridFunction { grid: inner, data })
    }

    /// Flatten to point-major layout `flat[idx*m + k]` (linear solver order).
    pub fn to_point_major(&self) -> Vec<f64> {
        let m = self.comps();
        let np = self.grid.len();
        let mut out = vec![0.0; m * np];
        for k in 0..m {
            for idx in 0..np {
                out[idx * m + k] = self.data[k][idx];
            }
        }
        out
    }

    pub fn from_point_major(grid: UniformGrid, comps: usize, flat: &[f64]) -> Self {
        let np = grid.len();
        assert_eq!(flat.len(), comps * np);
        let data = (0..comps)
            .map(|k| (0..np).map(|idx| flat[idx * comps + k]).collect())
            .collect();
        GridFunction { grid, data }
    }

    /// Integral of component `k` against trapezoid weights.
    pub fn trapezoid(&self, k: usize, weights: &[f64]) -> f64 {
        self.data[k].iter().zip(weights).map(|(v, w)| v * w).sum()
    }
}

/// A scalar field extended by one ghost layer per face, closing homogeneous
/// Neumann conditions by even reflection.
pub struct GhostField<'a> {
    pub grid: &'a UniformGrid,
    pub values: &'a [f64],
}

impl GhostField<'_> {
    /// Value at a multi-index where each entry may be -1 or n (ghost).
    #[inline]
    pub fn get(&self, mi: &[isize]) -> f64 {
        let n = self.grid.points_per_axis as isize;
        let mut flat = 0usize;
        for &i in mi {
            let i = if i < 0 {
                (-i) as usize // reflect across node 0: ghost -1 -> 1
            } else if i >= n {
                (2 * n - 2 - i) as usize // ghost n -> n-2
            } else {
                i as usize
            };
            flat = flat * self.grid.points_per_axis + i;
        }
        self.values[flat]
    }
}

/// Materialized ghost extension of a scalar component (explicit array with
/// the reflected layer, mostly useful for tests and serialization).
pub fn neumann_close(grid: &UniformGrid, values: &[f64]) -> Vec<f64> {
    let n = grid.points_per_axis;
    let d = grid.dim();
    let ne = n + 2;
    let mut out = vec![0.0; ne.pow(d as u32)];
    let gf = GhostField { grid, values };
    let mut mi = vec![0isize; d];
    for (flat, slot) in out.iter_mut().enumerate() {
        let mut rem = flat;
        for a in (0..d).rev() {
            mi[a] = (rem % ne) as isize - 1;
            rem /= ne;
        }
        *slot = gf.get(&mi);
    }
    out
}

/// Finite-difference stencil table for one axis: per-point windows and
/// weights for derivative orders 1..=3, second-order accurate, centered in
/// the interior and shifted near the faces.
#[derive(Debug, Clone)]
pub struct StencilTable {
    pub n: usize,
    /// weights[order-1][i] = (start index, weights)
    pub weights: Vec<Vec<(usize, Vec<f64>)>>,
}

impl StencilTable {
    pub fn build(n: usize, h: f64) -> StencilTable {
        let mut weights = Vec::with_capacity(3);
        for order in 1..=3usize {
            // Centered width for second order; shifted windows keep
            // order + 2 nodes so the accuracy stays second order.
            let half = order.div_ceil(2);
            let centered = 2 * half + 1;
            let shifted = order + 2;
            let mut per_point = Vec::with_capacity(n);
            for i in 0..n {
                let (start, len) = if i >= half && i + half < n {
                    (i - half, centered)
                } else {
                    let len = shifted.max(centered);
                    let start = if i < half { 0 } else { n - len };
                    (start, len)
                };
                let nodes: Vec<f64> = (0..len).map(|j| (start + j) as f64 * h).collect();
                let w = fd_weights(i as f64 * h, &nodes, order);
                per_point.push((start, w[order].clone()));
            }
            weights.push(per_point);
        }
        StencilTable { n, weights }
    }

    /// Apply the order-`p` derivative along a 1-d line of values.
    pub fn apply_line(&self, p: usize, line: &[f64], out: &mut [f64]) {
        let table = &self.weights[p - 1];
        for i in 0..self.n {
            let (start, w) = &table[i];
            out[i] = w
                .iter()
                .enumerate()
                .map(|(j, wj)| wj * line[start + j])
                .sum();
        }
    }
}

/// Partial derivative of every component of `u` for a spatial multi-index
/// (one entry per axis, total order <= 3). Uses one-sided stencils near the
/// faces, never the ghost layer, so norm measurements are reflection-free.
pub fn derivative(u: &GridFunction, orders: &[usize]) -> Result<GridFunction> {
    let d = u.grid.dim();
    assert_eq!(orders.len(), d);
    let total: usize = orders.iter().sum();
    if total > 3 {
        return Err(Error::InvalidConfig(format!(
            "derivative order {total} > 3"
        )));
    }
    let n = u.grid.points_per_axis;
    let max_order = orders.iter().copied().max().unwrap_or(0);
    if n < 2 * max_order + 1 || n < max_order + 2 {
        return Err(Error::GridTooCoarse(format!(
            "order {max_order} derivative needs more than {n} points per axis"
        )));
    }
    let table = StencilTable::build(n, u.grid.spacing);
    let mut out = u.clone();
    for (axis, &p) in orders.iter().enumerate() {
        if p == 0 {
            continue;
        }
        out = apply_axis_derivative(&out, &table, axis, p);
    }
    Ok(out)
}

fn apply_axis_derivative(
    u: &GridFunction,
    table: &StencilTable,
    axis: usize,
    p: usize,
) -> GridFunction {
    let grid = u.grid;
    let n = grid.points_per_axis;
    let stride = grid.stride(axis);
    let lines = grid.len() / n;
    let data: Vec<Vec<f64>> = u
        .data
        .iter()
        .map(|comp| {
            let rows = exec::map_indexed(lines, |line_no| {
                // Decompose the line number into the flat base index with the
                // `axis` coordinate zeroed.
                let outer = line_no / stride;
                let inner = line_no % stride;
                let base = outer * stride * n + inner;
                let mut line = vec![0.0; n];
                for i in 0..n {
                    line[i] = comp[base + i * stride];
                }
                let mut dl = vec![0.0; n];
                table.apply_line(p, &line, &mut dl);
                (base, dl)
            });
            let mut out = vec![0.0; grid.len()];
            for (base, dl) in rows {
                for (i, v) in dl.into_iter().enumerate() {
                    out[base + i * stride] = v;
                }
            }
            out
        })
        .collect();
    GridFunction { grid, data }
}

/// All spatial multi-indices (per-axis orders) of total order `p`.
pub fn multi_indices(d: usize, p: usize) -> Vec<Vec<usize>> {
    fn rec(d: usize, p: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if d == 1 {
            prefix.push(p);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for i in 0..=p {
            prefix.push(i);
            rec(d - 1, p - i, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(d, p, &mut Vec::new(), &mut out);
    out
}

/// Number of entries of the order-`p` derivative tensor (with repetitions)
/// that a multi-index (i1,...,id) with sum p represents: the multinomial
/// coefficient p! / (i1! ... id!).
fn multiplicity(mi: &[usize]) -> f64 {
    let p: usize = mi.iter().sum();
    let fact = |k: usize| (1..=k).product::<usize>() as f64;
    mi.iter().map(|&i| fact(i)).fold(fact(p), |acc, f| acc / f)
}

/// Pointwise magnitude of the order-`p` derivative of component `k`:
/// sqrt of the sum over the full index set {1..d}^p of squared entries
/// (mixed entries counted with multiplicity, matching |D^p f|).
pub fn derivative_magnitude(u: &GridFunction, p: usize) -> Result<GridFunction> {
    let d = u.grid.dim();
    if p == 0 {
        return Ok(GridFunction {
            grid: u.grid,
            data: u
                .data
                .iter()
                .map(|c| c.iter().map(|v| v.abs()).collect())
                .collect(),
        });
    }
    let mut sq = GridFunction::zeros(u.grid, u.comps());
    for mi in multi_indices(d, p) {
        let mult = multiplicity(&mi);
        let dv = derivative(u, &mi)?;
        for k in 0..u.comps() {
            for (s, v) in sq.data[k].iter_mut().zip(&dv.data[k]) {
                *s += mult * v * v;
            }
        }
    }
    for comp in &mut sq.data {
        for v in comp.iter_mut() {
            *v = v.sqrt();
        }
    }
    Ok(sq)
}

/// Discrete C^k norm: sum over orders j = 0..=k of the max-over-components
/// sup of |D^j u|.
pub fn ck_norm(u: &GridFunction, k: usize) -> Result<f64> {
    let mut total = 0.0;
    for j in 0..=k {
        total += derivative_magnitude(u, j)?.sup_norm();
    }
    Ok(total)
}

/// Discrete Hölder seminorm with exponent `theta` in (0,1): max over
/// components of the largest quotient |u(x)-u(y)| / |x-y|^theta over pairs
/// with separation at most `r0_cells` grid cells per axis.
pub fn holder_seminorm(u: &GridFunction, theta: f64, r0_cells: usize) -> f64 {
    assert!(theta > 0.0 && theta < 1.0, "theta must lie in (0,1)");
    let grid = &u.grid;
    let n = grid.points_per_axis;
    let h = grid.spacing;
    let d = grid.dim();
    let r0 = r0_cells as isize;
    // Enumerate half of the offset ball once (lexicographically positive).
    let mut offsets: Vec<(Vec<isize>, f64)> = Vec::new();
    match d {
        1 => {
            for o in 1..=r0 {
                offsets.push((vec![o], (o as f64 * h).powf(theta)));
            }
        }
        2 => {
            for oi in -r0..=r0 {
                for oj in -r0..=r0 {
                    if (oi, oj) <= (0, 0) {
                        continue;
                    }
                    let dist = ((oi * oi + oj * oj) as f64).sqrt() * h;
                    if dist <= r0 as f64 * h + 1e-12 {
                        offsets.push((vec![oi, oj], dist.powf(theta)));
                    }
                }
            }
        }
        _ => unimplemented!("holder seminorm for d > 2"),
    }
    let mut worst = 0.0f64;
    for comp in &u.data {
        let best = exec::max_indexed(grid.len(), |idx| {
            let mi = grid.multi_index(idx);
            let mut local = 0.0f64;
            for (off, denom) in &offsets {
                let mut ok = true;
                let mut flat = 0usize;
                for a in 0..d {
                    let j = mi[a] as isize + off[a];
                    if j < 0 || j >= n as isize {
                        ok = false;
                        break;
                    }
                    flat = flat * n + j as usize;
                }
                if ok {
                    let q = (comp[idx] - comp[flat]).abs() / denom;
                    if q > local {
                        local = q;
                    }
                }
            }
            local
        });
        worst = worst.max(best);
    }
    worst
}

/// Default pair-separation cap for discrete Hölder quotients, in cells.
pub const HOLDER_PAIR_CAP: usize = 8;

/// Discrete C^theta norm for fractional theta in [0, 3]: on integers it is
/// [`ck_norm`]; otherwise `ck_norm(u, floor) + max over order-floor
/// derivatives of their (theta - floor)-Hölder seminorm`.
pub fn ctheta_norm(u: &GridFunction, theta: f64, r0_cells: usize) -> Result<f64> {
    assert!((0.0..=3.0).contains(&theta));
    let k = theta.floor() as usize;
    let sigma = theta - k as f64;
    if sigma < 1e-12 {
        return ck_norm(u, k);
    }
    let base = ck_norm(u, k)?;
    let mut semi = 0.0f64;
    for mi in multi_indices(u.grid.dim(), k) {
        let dv = derivative(u, &mi)?;
        semi = semi.max(holder_seminorm(&dv, sigma, r0_cells));
    }
    Ok(base + semi)
}

/// Per-component norms bundle.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiscreteNorms {
    pub sup_per_comp: Vec<f64>,
    pub sup: f64,
    /// C^k norms for k = 0..=3.
    pub ck: Vec<f64>,
    pub holder_theta: Option<(f64, f64)>,
}

pub fn discrete_norms(
    u: &GridFunction,
    theta: Option<f64>,
    r0_cells: usize,
) -> Result<DiscreteNorms> {
    let sup_per_comp = u.sup_norm_per_comp();
    let sup = sup_per_comp.iter().copied().fold(0.0, f64::max);
    let mut ck = Vec::with_capacity(4);
    for k in 0..=3 {
        ck.push(ck_norm(u, k)?);
    }
    let holder_theta = theta.map(|t| (t, holder_seminorm(u, t, r0_cells)));
    Ok(DiscreteNorms {
        sup_per_comp,
        sup,
        ck,
        holder_theta,
    })
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn grid1(n: usize, r: f64) -> UniformGrid {
        UniformGrid::new(BoxDomain::new(r, 1), n).unwrap()
    }

    #[test]
    fn rejects_even_or_tiny_grids() {
        assert!(UniformGrid::new(BoxDomain::new(1.0, 1), 4).is_err());
        assert!(UniformGrid::new(BoxDomain::new(1.0, 1), 6).is_err());
        assert!(UniformGrid::new(BoxDomain::new(1.0, 1), 5).is_ok());
    }

    #[test]
    fn cubic_third_derivative_is_exact() {
        let g = grid1(21, 2.0);
        let u = GridFunction::from_fn(g, 1, |_, x| x[0].powi(3));
        let d3 = derivative(&u, &[3]).unwrap();
        for v in &d3.data[0] {
            assert_abs_diff_eq!(*v, 6.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn constant_has_zero_derivatives() {
        let g = grid1(21, 1.5);
        let u = GridFunction::from_fn(g, 2, |k, _| if k == 0 { 3.0 } else { -1.0 });
        for p in 1..=3 {
            let dv = derivative(&u, &[p]).unwrap();
            assert!(dv.sup_norm() < 1e-10);
        }
    }

    #[test]
    fn sine_first_derivative_in_taylor_bound() {
        let g = grid1(41, 2.0);
        let h = g.spacing;
        let u = GridFunction::from_fn(g, 1, |_, x| x[0].sin());
        let d1 = derivative(&u, &[1]).unwrap();
        // Value at the origin (interior, centered): error bounded by h^2/6 * sup|f'''| * 1.01.
        let mid = (g.points_per_axis - 1) / 2;
        let err = (d1.data[0][mid] - 1.0).abs();
        assert!(
            err <= h * h / 6.0 * 1.01,
            "err = {err:.3e}, bound = {:.3e}",
            h * h / 6.0 * 1.01
        );
    }

    #[test]
    fn polynomial_exactness_orders_1_2_3() {
        let g = grid1(31, 1.0);
        // Degree-2 for first/second derivative, degree-3 for third.
        let u2 = GridFunction::from_fn(g, 1, |_, x| 2.0 * x[0] * x[0] - x[0] + 0.5);
        let interior = |i: usize| i >= 2 && i + 2 < g.points_per_axis;
        let d1 = derivative(&u2, &[1]).unwrap();
        let d2 = derivative(&u2, &[2]).unwrap();
        for i in 0..g.points_per_axis {
            if interior(i) {
                let x = g.coord(i);
                assert_abs_diff_eq!(d1.data[0][i], 4.0 * x - 1.0, epsilon = 1e-10);
                assert_abs_diff_eq!(d2.data[0][i], 4.0, epsilon = 1e-10);
            }
        }
        let u3 = GridFunction::from_fn(g, 1, |_, x| x[0].powi(3));
        let d3 = derivative(&u3, &[3]).unwrap();
        for i in 0..g.points_per_axis {
            if interior(i) {
                assert_abs_diff_eq!(d3.data[0][i], 6.0, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn mixed_derivative_of_product() {
        let g = UniformGrid::new(BoxDomain::new(1.0, 2), 21).unwrap();
        let u = GridFunction::from_fn(g, 1, |_, x| x[0] * x[0] * x[1]);
        let dxy = derivative(&u, &[1, 1]).unwrap();
        let mid = g.len() / 2;
        let p = g.point(mid);
        assert_abs_diff_eq!(dxy.data[0][mid], 2.0 * p[0], epsilon = 1e-9);
    }

    #[test]
    fn ghost_layer_is_even_reflection() {
        let g = grid1(9, 1.0);
        let u = GridFunction::from_fn(g, 1, |_, x| x[0] * x[0]);
        let gf = GhostField {
            grid: &g,
            values: &u.data[0],
        };
        // ghost at R + h equals the value at R - h
        assert_abs_diff_eq!(gf.get(&[9]), u.data[0][7], epsilon = 0.0);
        assert_abs_diff_eq!(gf.get(&[-1]), u.data[0][1], epsilon = 0.0);
        // constants reflect to the same constant
        let c = GridFunction::from_fn(g, 1, |_, _| 7.5);
        let gc = GhostField {
            grid: &g,
            values: &c.data[0],
        };
        assert_abs_diff_eq!(gc.get(&[-1]), 7.5, epsilon = 0.0);
    }

    #[test]
    fn ghost_closure_idempotent_and_normal_derivative_zero() {
        use rand::{Rng, SeedableRng};
        let g = grid1(11, 1.0);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let vals: Vec<f64> = (0..g.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let ext = neumann_close(&g, &vals);
        // Discrete normal derivative at both faces: (u_{+1} - u_{-1})/2h with ghosts.
        let h = g.spacing;
        let n = g.points_per_axis;
        let left = (ext[2] - ext[0]) / (2.0 * h);
        let right = (ext[n + 1] - ext[n - 1]) / (2.0 * h);
        assert_abs_diff_eq!(left, 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(right, 0.0, epsilon = 1e-14);
        // Re-application is stable: interior of the extension equals the original.
        for i in 0..n {
            assert_eq!(ext[i + 1], vals[i]);
        }
    }

    #[test]
    fn ck_norm_monotone_and_linear_example() {
        let g = grid1(41, 1.0);
        let u = GridFunction::from_fn(g, 1, |_, x| x[0]);
        // sup|u| + sup|u'| = 1 + 1 on [-1,1]
        assert_abs_diff_eq!(ck_norm(&u, 1).unwrap(), 2.0, epsilon = 1e-10);
        let mut prev = 0.0;
        for k in 0..=3 {
            let v = ck_norm(&u, k).unwrap();
            assert!(v >= prev - 1e-12);
            prev = v;
        }
        let z = GridFunction::zeros(g, 2);
        for k in 0..=3 {
            assert_eq!(ck_norm(&z, k).unwrap(), 0.0);
        }
    }

    #[test]
    fn holder_seminorm_matches_bruteforce() {
        let g = grid1(33, 1.0);
        let u = GridFunction::from_fn(g, 1, |_, x| x[0].abs());
        let theta = 0.5;
        let cap = HOLDER_PAIR_CAP;
        let fast = holder_seminorm(&u, theta, cap);
        // Brute force over all pairs within the cap.
        let n = g.points_per_axis;
        let mut brute = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                if j - i <= cap {
                    let dist = (j - i) as f64 * g.spacing;
                    let q = (u.data[0][i] - u.data[0][j]).abs() / dist.powf(theta);
                    brute = brute.max(q);
                }
            }
        }
        assert_abs_diff_eq!(fast, brute, epsilon = 1e-13);
    }

    #[test]
    fn restrict_preserves_shared_points() {
        let g = grid1(41, 2.0);
        let u = GridFunction::from_fn(g, 1, |_, x| (3.0 * x[0]).sin());
        let v = u.restrict(1.0).unwrap();
        assert_eq!(v.grid.points_per_axis, 21);
        for i in 0..v.grid.len() {
            let x = v.grid.point(i)[0];
            assert_abs_diff_eq!(v.data[0][i], (3.0 * x).sin(), epsilon = 1e-14);
        }
        // Non-nested radius errors out.
        assert!(u.restrict(0.95).is_err());
    }

    #[test]
    fn restrict_2d_preserves_values() {
        let g = UniformGrid::new(BoxDomain::new(2.0, 2), 21).unwrap();
        let u = GridFunction::from_fn(g, 2, |k, x| x[0] + 2.0 * x[1] + k as f64);
        let v = u.restrict(1.0).unwrap();
        for i in 0..v.grid.len() {
            let p = v.grid.point(i);
            assert_abs_diff_eq!(v.data[1][i], p[0] + 2.0 * p[1] + 1.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn trapezoid_weights_integrate_constants() {
        let g = UniformGrid::new(BoxDomain::new(1.5, 2), 31).unwrap();
        let w = g.trapezoid_weights();
        let total: f64 = w.iter().sum();
        assert_abs_diff_eq!(total, 9.0, epsilon = 1e-12);
    }
}
