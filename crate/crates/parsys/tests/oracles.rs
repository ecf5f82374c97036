//! Cross-module oracle tests: closed-form and dense-algebra references for
//! the solver, the resolvent, the variation-of-constants reconstruction and
//! the invariant-measure checks.

use nalgebra::{DMatrix, DVector};
use parsys::coeff::CoefficientExpr;
use parsys::data::{random_smooth, SmoothFieldSpec};
use parsys::evolve::{
    apply_operator, duhamel_check, expanding_domain_study, solve_frozen, step, SolverConfig,
};
use parsys::grid::{BoxDomain, GridFunction, UniformGrid};
use parsys::linalg::{expm, kernel_vector};
use parsys::measures::{
    analyze_coupling, build_system_measures, check_gradient_decay, check_invariance,
    scalar_invariant_density_stationary,
};
use parsys::operator::{AuxiliaryFamily, CoefficientField, OperatorFamily, ScalarPart};
use parsys::preset::load_preset;
use parsys::resolvent::elliptic_direct;

fn grid1(n: usize, r: f64) -> UniformGrid {
    UniformGrid::new(BoxDomain::new(r, 1), n).unwrap()
}

fn constant_coupling_op(q: &[f64], c: &[&[f64]]) -> OperatorFamily {
    let m = c.len();
    let diffusion = (0..m)
        .map(|k| vec![CoefficientExpr::constant(q[k])])
        .collect();
    let drift = (0..m)
        .map(|_| vec![CoefficientExpr::constant(0.0)])
        .collect();
    let coupling = c
        .iter()
        .map(|row| row.iter().map(|&v| CoefficientExpr::constant(v)).collect())
        .collect();
    OperatorFamily::new(1, m, diffusion, drift, coupling).unwrap()
}

fn eta_field(grid: UniformGrid, eta: &[f64]) -> GridFunction {
    GridFunction::from_fn(grid, eta.len(), |k, _| eta[k])
}

#[test]
fn example2_tilde_row_sums() {
    // Row 1 of C^P sums to 0 (M_1 = 0); row 3 sums to sqrt3 - 1 > 0.
    let preset = load_preset("example2-gamma0").unwrap();
    let aux = preset.operator.derive_auxiliary();
    let tilde = AuxiliaryFamily {
        base: aux.base.clone(),
        tilde: true,
    };
    let s3 = 3f64.sqrt();
    let mut c = vec![0.0; 9];
    tilde.coupling_at(0.0, &[1.3], &mut c);
    let row = |k: usize| (0..3).map(|h| c[k * 3 + h]).sum::<f64>();
    approx::assert_abs_diff_eq!(row(0), 1.0, epsilon = 1e-12);
    approx::assert_abs_diff_eq!(row(2), 1.0 + 2.0 * (s3 - 1.0), epsilon = 1e-12);
}

#[test]
fn coupling_term_annihilates_kernel_direction() {
    // Applying the operator to the constant kernel field gives zero:
    // derivatives vanish and C eta = 0.
    let preset = load_preset("example2-gamma0").unwrap();
    let grid = grid1(81, 4.0);
    let norm = 7f64.sqrt();
    let s3 = 3f64.sqrt();
    let eta = [-s3 / norm, 1.0 / norm, s3 / norm];
    let u = eta_field(grid, &eta);
    let au = apply_operator(&preset.operator, 0.0, &u).unwrap();
    assert!(au.sup_norm() <= 1e-12, "A eta = {:.3e}", au.sup_norm());
}

#[test]
fn kernel_field_is_a_fixed_point_of_the_step() {
    let preset = load_preset("example2-gamma0").unwrap();
    let grid = grid1(81, 4.0);
    let norm = 7f64.sqrt();
    let s3 = 3f64.sqrt();
    let eta = [-s3 / norm, 1.0 / norm, s3 / norm];
    let u = eta_field(grid, &eta);
    let cfg = SolverConfig::default();
    let next = step(&preset.operator, 0.0, 0.05, &u, None, &cfg).unwrap();
    assert!(
        next.sup_diff(&u) <= cfg.linear_tol * 10.0,
        "step moved eta by {:.3e}",
        next.sup_diff(&u)
    );
}

#[test]
fn frozen_semigroup_law_within_scheme_error() {
    let preset = load_preset("example1-d1m2").unwrap();
    let grid = grid1(201, 4.0);
    let f = random_smooth(grid, 2, &SmoothFieldSpec::default(), 11);
    let dt = 5e-3;
    let cfg = SolverConfig::default().with_dt(dt);
    let (tau1, tau2) = (0.08, 0.15);
    let joint = solve_frozen(&preset.operator, 0.3, tau1 + tau2, &f, &cfg, &[tau1 + tau2]).unwrap();
    let first = solve_frozen(&preset.operator, 0.3, tau1, &f, &cfg, &[tau1]).unwrap();
    let second = solve_frozen(&preset.operator, 0.3, tau2, first.last(), &cfg, &[tau2]).unwrap();
    let diff = joint.last().sup_diff(second.last());
    assert!(diff <= 2.0 * dt * 10.0, "semigroup law residual {diff:.3e}");
}

#[test]
fn expanding_domain_tiny_differences_for_localized_data_short_horizon() {
    let preset = load_preset("example1-d1m2").unwrap();
    let h = 0.025;
    let big = grid1((2.0 * 6.0 / h) as usize + 1, 6.0);
    let f = GridFunction::from_fn(big, 2, |_, x| (-x[0] * x[0] / 0.05).exp());
    let cfg = SolverConfig::default().with_dt(1e-3);
    let study = expanding_domain_study(
        &preset.operator,
        0.0,
        0.01,
        &f,
        &[4.0, 5.0, 6.0],
        1.0,
        &cfg,
        &[0.01],
    )
    .unwrap();
    assert!(study.pass);
    for row in &study.sup_diffs {
        for v in row {
            assert!(*v <= 1e-8, "difference {v:.3e} not below 1e-8");
        }
    }
}

#[test]
fn duhamel_with_diagonal_coupling_matches_solver() {
    // C diagonal: the reconstruction integral vanishes and the scalar
    // evolutions reproduce the coupled solve up to stepping differences.
    let op = constant_coupling_op(&[1.0, 2.0], &[&[-1.0, 0.0], &[0.0, -2.0]]);
    let grid = grid1(201, 4.0);
    let f = random_smooth(grid, 2, &SmoothFieldSpec::default(), 3);
    // Quadrature nodes land on step boundaries, so the scalar and coupled
    // trajectories take identical steps and agree to solver precision.
    let cfg = SolverConfig::default().with_dt(2.5e-3);
    let rep = duhamel_check(&op, 0.0, 0.3, &f, &cfg, 8, 1e-9, "diag").unwrap();
    assert!(
        rep.passed(),
        "diagonal reconstruction defect {:.3e}",
        rep.measured_left
    );
}

#[test]
fn duhamel_against_matrix_exponential_on_constant_data() {
    // Spatially constant data and constant 2x2 coupling: the coupled solve
    // equals e^{t C} f0 (dense oracle), and the reconstruction must match.
    let c = [[-0.8, -1.7], [0.6, -1.1]];
    let op = constant_coupling_op(&[1.0, 1.0], &[&c[0], &c[1]]);
    let grid = grid1(101, 3.0);
    let f0 = [0.7, -1.2];
    let f = GridFunction::from_fn(grid, 2, |k, _| f0[k]);
    let t = 0.4;
    let cfg = SolverConfig::default().with_theta(0.5).with_dt(1e-3);
    let rep = duhamel_check(&op, 0.0, t, &f, &cfg, 16, 5e-3, "expm").unwrap();
    assert!(rep.passed());
    let run = parsys::evolve::solve_cauchy(&op, 0.0, t, &f, None, &cfg, &[t]).unwrap();
    let cm = DMatrix::from_row_slice(2, 2, &[c[0][0], c[0][1], c[1][0], c[1][1]]);
    let exact = expm(&(cm * t)) * DVector::from_column_slice(&f0);
    for k in 0..2 {
        for v in &run.last().data[k] {
            approx::assert_abs_diff_eq!(*v, exact[k], epsilon = 1e-6);
        }
    }
}

#[test]
fn resolvent_of_kernel_direction_is_eta_over_lambda() {
    let preset = load_preset("example2-gamma0").unwrap();
    let grid = grid1(201, 6.0);
    let norm = 7f64.sqrt();
    let s3 = 3f64.sqrt();
    let eta = [-s3 / norm, 1.0 / norm, s3 / norm];
    let f = eta_field(grid, &eta);
    let lambda = 2.5;
    let r = elliptic_direct(
        &preset.operator,
        0.0,
        lambda,
        &f,
        3f64.sqrt() - 1.0,
        &SolverConfig::default(),
    )
    .unwrap();
    let expected = f.scale(1.0 / lambda);
    assert!(r.solution.sup_diff(&expected) <= 1e-10);
}

#[test]
fn resolvent_of_constants_is_one_over_lambda_without_coupling() {
    let op = constant_coupling_op(&[1.0], &[&[0.0]]);
    let grid = grid1(101, 3.0);
    let f = GridFunction::from_fn(grid, 1, |_, _| 1.0);
    let lambda = 3.0;
    let r = elliptic_direct(&op, 0.0, lambda, &f, 0.0, &SolverConfig::default()).unwrap();
    for v in &r.solution.data[0] {
        approx::assert_abs_diff_eq!(*v, 1.0 / lambda, epsilon = 1e-11);
    }
}

#[test]
fn resolvent_matches_dense_inverse_for_constant_coupling() {
    // Spatially constant data: R(lambda) f = (lambda I - C)^{-1} f0.
    let c = [[-1.0, -0.5], [0.9, -2.0]];
    let op = constant_coupling_op(&[1.0, 1.5], &[&c[0], &c[1]]);
    let grid = grid1(101, 3.0);
    let f0 = [1.0, 0.4];
    let f = GridFunction::from_fn(grid, 2, |k, _| f0[k]);
    let lambda = 2.0;
    let r = elliptic_direct(&op, 0.0, lambda, &f, 0.5, &SolverConfig::default()).unwrap();
    let cm = DMatrix::from_row_slice(2, 2, &[c[0][0], c[0][1], c[1][0], c[1][1]]);
    let exact = (DMatrix::identity(2, 2) * lambda - cm)
        .try_inverse()
        .unwrap()
        * DVector::from_column_slice(&f0);
    for k in 0..2 {
        for v in &r.solution.data[k] {
            approx::assert_abs_diff_eq!(*v, exact[k], epsilon = 1e-10);
        }
    }
}

#[test]
fn interpolation_ratio_is_one_for_constants_without_coupling() {
    // f constant, C = 0: ||f||_{C^theta} = ||f||_inf and A f = 0, so the
    // interpolation quotient equals 1 exactly.
    use parsys::grid::{ctheta_norm, HOLDER_PAIR_CAP};
    let grid = grid1(101, 3.0);
    let f = GridFunction::from_fn(grid, 1, |_, _| 2.0);
    let theta = 0.5;
    let num = ctheta_norm(&f, theta, HOLDER_PAIR_CAP).unwrap();
    let sup = f.sup_norm();
    let ratio = num / (sup.powf(1.0 - theta / 2.0) * sup.powf(theta / 2.0));
    approx::assert_abs_diff_eq!(ratio, 1.0, epsilon = 1e-14);
}

#[test]
fn ou_gradient_energy_decays_at_rate_two() {
    // Scalar OU with f = sin x: the weighted gradient energy decays like
    // e^{-2t} (first Hermite mode dominates).
    let op = constant_coupling_op(&[1.0], &[&[0.0]]);
    let mut op = op;
    op.drift[0][0] = CoefficientExpr::drift(1.0, 0.0, 0);
    let grid = grid1(321, 6.0);
    let scalar = ScalarPart {
        op: &op,
        comp: 0,
        with_diagonal_potential: false,
    };
    let mu = scalar_invariant_density_stationary(&scalar, grid).unwrap();
    let f = GridFunction::from_fn(grid, 1, |_, x| x[0].sin());
    let cfg = SolverConfig::default().with_theta(0.5).with_dt(2e-3);
    let rep = check_gradient_decay(&op, &f, &mu, 2.0, &cfg, "ou").unwrap();
    let energies: Vec<f64> = rep.details["energies"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    let times: Vec<f64> = rep.details["times"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    // Fit ln E against t over the sampled horizon (skip E(0) at index 0).
    let xs: Vec<f64> = times.clone();
    let ys: Vec<f64> = energies[1..].iter().map(|e| e.ln()).collect();
    let n = xs.len() as f64;
    let sx: f64 = xs.iter().sum();
    let sy: f64 = ys.iter().sum();
    let sxx: f64 = xs.iter().map(|v| v * v).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(a, b)| a * b).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    assert!(
        (slope + 2.0).abs() <= 0.4,
        "gradient-energy rate {slope:.3} vs -2 (20%)"
    );
}

#[test]
fn kernel_vectors_agree_with_row_reduction() {
    // Brute-force nullspace by Gaussian elimination for m <= 4.
    fn nullspace_row_reduction(mat: &DMatrix<f64>) -> DVector<f64> {
        let m = mat.nrows();
        let mut a = mat.clone();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..m {
            let (best, val) = (row..m)
                .map(|r| (r, a[(r, col)].abs()))
                .max_by(|x, y| x.1.partial_cmp(&y.1).unwrap())
                .unwrap();
            if val < 1e-12 {
                continue;
            }
            a.swap_rows(row, best);
            let p = a[(row, col)];
            for r in 0..m {
                if r != row {
                    let factor = a[(r, col)] / p;
                    for c2 in 0..m {
                        a[(r, c2)] -= factor * a[(row, c2)];
                    }
                }
            }
            pivots.push((row, col));
            row += 1;
        }
        let free: Vec<usize> = (0..m)
            .filter(|c| !pivots.iter().any(|(_, pc)| pc == c))
            .collect();
        assert_eq!(free.len(), 1, "expected a one-dimensional kernel");
        let fc = free[0];
        let mut v = DVector::zeros(m);
        v[fc] = 1.0;
        for &(pr, pc) in &pivots {
            v[pc] = -a[(pr, fc)] / a[(pr, pc)];
        }
        v.normalize_mut();
        v
    }
    let s3 = 3f64.sqrt();
    let c = DMatrix::from_row_slice(3, 3, &[-1.0, 0.0, -1.0, 0.0, -3.0, s3, -1.0, s3, -2.0]);
    let (svd_v, _, _) = kernel_vector(&c);
    let rr_v = nullspace_row_reduction(&c);
    let dot: f64 = svd_v.iter().zip(rr_v.iter()).map(|(a, b)| a * b).sum();
    assert!((dot.abs() - 1.0).abs() <= 1e-10);
}

#[test]
fn degenerate_zero_coupling_rejected_by_measure_builder() {
    let op = constant_coupling_op(&[1.0, 1.0], &[&[0.0, 0.0], &[0.0, 0.0]]);
    let mut op = op;
    op.drift[0][0] = CoefficientExpr::drift(1.0, 0.0, 0);
    op.drift[1][0] = CoefficientExpr::drift(1.0, 0.0, 0);
    let grid = grid1(201, 6.0);
    let points: Vec<Vec<f64>> = (0..5).map(|i| vec![i as f64 - 2.0]).collect();
    let analysis = analyze_coupling(&op, &points).unwrap();
    assert!(!analysis.zero_simple);
    let scalar = ScalarPart {
        op: &op,
        comp: 0,
        with_diagonal_potential: false,
    };
    let mu = scalar_invariant_density_stationary(&scalar, grid).unwrap();
    assert!(build_system_measures(&analysis, &mu).is_err());
}

#[test]
fn invariance_functional_is_exactly_linear_in_the_data() {
    let preset = load_preset("example2-gamma0").unwrap();
    let grid = grid1(241, 6.0);
    let sample = grid1(9, 6.0);
    let points: Vec<Vec<f64>> = (0..sample.len()).map(|i| sample.point(i)).collect();
    let analysis = analyze_coupling(&preset.operator, &points).unwrap();
    let scalar = ScalarPart {
        op: &preset.operator,
        comp: 0,
        with_diagonal_potential: false,
    };
    let mu = scalar_invariant_density_stationary(&scalar, grid).unwrap();
    let mv = build_system_measures(&analysis, &mu).unwrap();
    let f = random_smooth(
        grid,
        3,
        &SmoothFieldSpec {
            localized: true,
            ..Default::default()
        },
        9,
    );
    let cfg = SolverConfig::default().with_dt(5e-3);
    let r1 = check_invariance(
        &preset.operator,
        &mv,
        std::slice::from_ref(&f),
        &[0.2],
        &cfg,
        "x",
    )
    .unwrap();
    let r2 = check_invariance(&preset.operator, &mv, &[f.scale(-3.0)], &[0.2], &cfg, "x").unwrap();
    // The defect is normalized by ||f||, and both sides are linear, so the
    // normalized reports coincide to rounding.
    approx::assert_abs_diff_eq!(r1.measured_left, r2.measured_left, epsilon = 1e-12);
    // Pairing with the kernel field integrates to sum eta_k^2 = 1.
    let norm = 7f64.sqrt();
    let s3 = 3f64.sqrt();
    let eta = [-s3 / norm, 1.0 / norm, s3 / norm];
    let ef = eta_field(grid, &eta);
    approx::assert_abs_diff_eq!(mv.pair(&ef), 1.0, epsilon = 1e-9);
}
