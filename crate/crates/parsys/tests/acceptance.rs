//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line
//! (visible with `cargo test --test acceptance -- --nocapture`).
//!
//! Everything is property-based against pinned tolerances plus a small set
//! of exact values; nothing is calibrated at run time.

use parsys::data::{random_smooth, SmoothFieldSpec};
use parsys::estimates::{check_comparison, check_evolution_law, check_sup_bound};
use parsys::evolve::SolverConfig;
use parsys::grid::UniformGrid;
use parsys::measures::analyze_coupling;
use parsys::preset::{load_preset, PRESET_NAMES};
use parsys::report::VerificationReport;
use parsys::resolvent::{
    check_resolvent_bound, check_resolvent_consistency, check_resolvent_identity, ResolventMethod,
};
use parsys::suite::{default_manifest, run_check, run_suite, ManifestItem};
use parsys::tolerances;

fn verdict_line(criterion: &str, pass: bool) {
    println!(
        "acceptance {criterion}: {}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion failed: {criterion}");
}

fn run(check: &str, preset: &str, params: serde_json::Value) -> VerificationReport {
    let item = ManifestItem {
        check: check.into(),
        preset: preset.into(),
        params,
    };
    run_check(&item, 20260810).unwrap_or_else(|e| panic!("{check}/{preset}: {e}"))
}

/// Criterion 1: eigenvalues of C and C^P equal {0, -3 +/- sqrt2} and the
/// kernels match the expected directions, all within 1e-10, in under a
/// second.
#[test]
fn criterion_1_coupling_analysis_exactness() {
    let start = std::time::Instant::now();
    let preset = load_preset("example2-gamma0").unwrap();
    let grid = UniformGrid::new(preset.domain, 9).unwrap();
    let points: Vec<Vec<f64>> = (0..grid.len()).map(|i| grid.point(i)).collect();
    let analysis = analyze_coupling(&preset.operator, &points).unwrap();
    let s2 = 2f64.sqrt();
    let s3 = 3f64.sqrt();
    let mut expected = [0.0, -3.0 + s2, -3.0 - s2];
    expected.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut worst: f64 = 0.0;
    for per_point in analysis.eigen_c.iter().chain(&analysis.eigen_cp) {
        for ((re, im), ex) in per_point.iter().zip(&expected) {
            worst = worst.max((re - ex).abs()).max(im.abs());
        }
    }
    let norm = 7f64.sqrt();
    let eta_expected = [-s3 / norm, 1.0 / norm, s3 / norm];
    let xi_expected = [s3 / norm, 1.0 / norm, s3 / norm];
    let eta_dot: f64 = analysis
        .eta
        .iter()
        .zip(&eta_expected)
        .map(|(a, b)| a * b)
        .sum();
    let xi_dot: f64 = analysis
        .xi
        .iter()
        .zip(&xi_expected)
        .map(|(a, b)| a * b)
        .sum();
    worst = worst
        .max((eta_dot.abs() - 1.0).abs())
        .max((xi_dot.abs() - 1.0).abs());
    let fast = start.elapsed().as_secs_f64() < 1.0;
    verdict_line(
        &format!(
            "1 coupling-analysis exactness (worst {worst:.2e}, {:.2}s)",
            start.elapsed().as_secs_f64()
        ),
        worst <= 1e-10 && fast,
    );
}

/// Criterion 2: comparison principle on all presets, pointwise violation
/// within 10 (h^2 + dt), shrinking under one grid/step refinement.
#[test]
fn criterion_2_comparison_principle() {
    let mut all = true;
    for name in PRESET_NAMES {
        let start = std::time::Instant::now();
        let preset = load_preset(name).unwrap();
        let d2 = preset.domain.dim == 2;
        let t_end = if d2 {
            0.1
        } else {
            0.25f64.min(preset.interval.1 - preset.interval.0)
        };
        let (n_coarse, n_fine) = if d2 { (61, 91) } else { (201, 401) };
        let (dt_coarse, dt_fine) = if d2 { (4e-3, 2e-3) } else { (2e-3, 1e-3) };
        let mut violations = Vec::new();
        for (n, dt) in [(n_coarse, dt_coarse), (n_fine, dt_fine)] {
            let grid = UniformGrid::new(preset.domain, n).unwrap();
            let f = random_smooth(
                grid,
                preset.operator.comps,
                &SmoothFieldSpec::default(),
                20260810,
            );
            let cfg = SolverConfig::default().with_dt(dt);
            let rep = check_comparison(
                &preset.operator,
                preset.interval.0,
                preset.interval.0 + t_end,
                &f,
                &cfg,
                name,
            )
            .unwrap();
            assert!(
                rep.passed(),
                "{name} at n={n}: violation {}",
                rep.worst_violation
            );
            violations.push(rep.worst_violation);
        }
        // Violations must shrink under refinement whenever they are
        // measurably positive at the coarse level.
        let shrinks = violations[0] <= 1e-12 || violations[1] <= violations[0];
        let in_time = start.elapsed().as_secs_f64() < 60.0;
        println!(
            "  comparison {name}: coarse {:.2e}, fine {:.2e}, {:.1}s",
            violations[0],
            violations[1],
            start.elapsed().as_secs_f64()
        );
        all &= shrinks && in_time;
    }
    verdict_line("2 comparison principle (all presets, refinement)", all);
}

/// Criterion 3: sup bound ratio <= 1.001 on all finite-M_J presets over 5
/// random data.
#[test]
fn criterion_3_sup_bound() {
    let mut all = true;
    for name in PRESET_NAMES {
        let preset = load_preset(name).unwrap();
        let m_j = preset.m_j().unwrap();
        let d2 = preset.domain.dim == 2;
        let t_end = if d2 {
            0.1
        } else {
            0.5f64.min(preset.interval.1 - preset.interval.0)
        };
        let n = if d2 { 61 } else { preset.grid_points };
        let grid = UniformGrid::new(preset.domain, n).unwrap();
        let cfg = SolverConfig::default().with_theta(0.5).with_dt(
            if name == "decoupled-negative-coupling" {
                5e-4
            } else if d2 {
                2e-3
            } else {
                1e-3
            },
        );
        let mut worst: f64 = 0.0;
        for trial in 0..5 {
            let f = random_smooth(
                grid,
                preset.operator.comps,
                &SmoothFieldSpec::default(),
                100 + trial,
            );
            let rep = check_sup_bound(
                &preset.operator,
                preset.interval.0,
                preset.interval.0 + t_end,
                &f,
                m_j,
                &cfg,
                name,
            )
            .unwrap();
            worst = worst.max(rep.measured_left);
        }
        println!("  sup-bound {name}: worst ratio {worst:.6} (M_J = {m_j:.4})");
        all &= worst <= 1.0 + tolerances::SUP_REL;
    }
    verdict_line("3 sup bound e^{M(t-s)} (ratio <= 1.001)", all);
}

/// Criterion 4: derivative-decay slopes for (h,k) in
/// {(0,1),(0,2),(1,2),(0,3)} violate -(k-h)/2 by at most 0.15; the scalar
/// heat (0,1) control lies in [-0.65, -0.35].
#[test]
fn criterion_4_derivative_decay() {
    let control = run(
        "decay",
        "heat-scalar",
        serde_json::json!({"h": 0, "k": 1, "n_g": 1601, "t": 0.6, "dt": 2.5e-4}),
    );
    let slope = control.details["slope"].as_f64().unwrap();
    let control_ok = control.passed() && (-0.65..=-0.35).contains(&slope);
    println!("  heat control slope {slope:.3}");
    let mut all = control_ok;
    for (h, k) in [(0, 1), (0, 2), (1, 2), (0, 3)] {
        let rep = run(
            "decay",
            "example1-d1m2",
            serde_json::json!({"h": h, "k": k}),
        );
        let s = rep.details["slope"].as_f64().unwrap();
        println!(
            "  decay ({h},{k}) slope {s:.3} target {}",
            rep.details["target_exponent"]
        );
        all &= rep.passed();
    }
    verdict_line("4 derivative decay fits", all);
}

/// Criterion 5: evolution-law residual <= 10 dt (t-s), improving by >= 1.7x
/// when dt is halved.
#[test]
fn criterion_5_evolution_law() {
    let preset = load_preset("example1-d1m2").unwrap();
    let grid = preset.grid();
    let f = random_smooth(grid, 2, &SmoothFieldSpec::default(), 7);
    let (s, r, t) = (0.0, 0.11, 0.3);
    let mut residuals = Vec::new();
    let mut all = true;
    for dt in [4e-3, 2e-3] {
        let cfg = SolverConfig::default().with_dt(dt);
        let rep =
            check_evolution_law(&preset.operator, s, r, t, &f, &cfg, "example1-d1m2").unwrap();
        all &= rep.passed();
        residuals.push(rep.measured_left);
    }
    let gain = residuals[0] / residuals[1];
    println!(
        "  evolution-law residuals {:.3e} -> {:.3e} (gain {gain:.2})",
        residuals[0], residuals[1]
    );
    verdict_line(
        "5 evolution law (composition + dt refinement)",
        all && gain >= tolerances::REFINEMENT_GAIN,
    );
}

/// Criterion 6: resolvent consistency across methods at lambda in
/// {M+1, M+5} on every preset, the resolvent identity within 1e-4 ||f||,
/// and the norm bound over 10 random data.
#[test]
fn criterion_6_resolvent() {
    let mut all = true;
    for name in PRESET_NAMES {
        let preset = load_preset(name).unwrap();
        let m_j = preset.m_j().unwrap();
        let d2 = preset.domain.dim == 2;
        let n = if d2 { 61 } else { preset.grid_points };
        let grid = UniformGrid::new(preset.domain, n).unwrap();
        let f = random_smooth(
            grid,
            preset.operator.comps,
            &SmoothFieldSpec {
                localized: true,
                ..Default::default()
            },
            31,
        );
        let cfg = if d2 {
            SolverConfig::default().with_theta(0.5).with_dt(0.02)
        } else {
            SolverConfig::default().with_theta(0.5)
        };
        for offset in [1.0, 5.0] {
            let rep = check_resolvent_consistency(
                &preset.operator,
                preset.interval.0,
                m_j + offset,
                &f,
                m_j,
                &cfg,
                name,
            )
            .unwrap();
            println!(
                "  consistency {name} lambda=M+{offset}: diff {:.2e}",
                rep.measured_left
            );
            all &= rep.passed();
        }
    }
    let preset = load_preset("example1-d1m2").unwrap();
    let m_j = preset.m_j().unwrap();
    let grid = preset.grid();
    let f = random_smooth(
        grid,
        2,
        &SmoothFieldSpec {
            localized: true,
            ..Default::default()
        },
        33,
    );
    let identity = check_resolvent_identity(
        &preset.operator,
        0.0,
        m_j.abs() * 2.0 + 1.0,
        m_j.abs() * 2.0 + 3.0,
        &f,
        m_j,
        &SolverConfig::default(),
        ResolventMethod::Direct,
        0,
        "example1-d1m2",
    )
    .unwrap();
    all &= identity.passed();
    let bound = check_resolvent_bound(
        &preset.operator,
        0.0,
        m_j + 1.0,
        10,
        grid,
        m_j,
        &SolverConfig::default(),
        35,
        "example1-d1m2",
    )
    .unwrap();
    all &= bound.passed();
    verdict_line("6 resolvent consistency, identity, norm bound", all);
}

/// Criterion 7: Schauder experiments -- manufactured recovery within 1e-3
/// in C^2, ratio stability within 20% under refinement, bounded time-Hölder
/// modulus.
#[test]
fn criterion_7_schauder() {
    let manufactured = run(
        "schauder-manufactured",
        "example1-d1m2",
        serde_json::json!({}),
    );
    println!(
        "  manufactured: elliptic {:.2e}, parabolic {:.2e}",
        manufactured.details["elliptic_c2_error"].as_f64().unwrap(),
        manufactured.details["parabolic_c2_error"].as_f64().unwrap()
    );
    let elliptic = run(
        "schauder-elliptic",
        "example1-d1m2",
        serde_json::json!({"theta": 0.5}),
    );
    let parabolic = run(
        "schauder-parabolic",
        "example1-d1m2",
        serde_json::json!({"theta": 0.5}),
    );
    let modulus = parabolic.details["time_holder_modulus_fine"]
        .as_f64()
        .unwrap();
    println!(
        "  ratios: elliptic drift {:.3}, parabolic drift {:.3}, modulus {modulus:.3}",
        elliptic.worst_violation, parabolic.worst_violation
    );
    verdict_line(
        "7 Schauder experiments",
        manufactured.passed() && elliptic.passed() && parabolic.passed() && modulus.is_finite(),
    );
}

/// Criterion 8: the invariant-measure package on the autonomous coupled
/// preset.
#[test]
fn criterion_8_invariant_measures() {
    let mut all = true;
    let density = run(
        "stationary-density",
        "example2-gamma0",
        serde_json::json!({}),
    );
    println!("  stationary density L1 {:.2e}", density.measured_left);
    all &= density.passed();
    let invariance = run("invariance", "example2-gamma0", serde_json::json!({}));
    println!("  invariance defect {:.2e}", invariance.measured_left);
    all &= invariance.passed();
    let asymptotics = run("asymptotics", "example2-gamma0", serde_json::json!({}));
    println!("  asymptotics e(T)/e(0) {:.3e}", asymptotics.measured_left);
    all &= asymptotics.passed();
    for p in [1.0, 2.0, 4.0] {
        let rep = run(
            "lp-bound",
            "example2-gamma0",
            serde_json::json!({"p": p, "trials": 10}),
        );
        println!("  L^{p} ratio-to-bound {:.4}", rep.measured_left);
        all &= rep.passed();
    }
    let domination = run("domination", "example2-gamma0", serde_json::json!({}));
    all &= domination.passed();
    let fixed = run("fixed-points", "example2-gamma0", serde_json::json!({}));
    println!("  fixed points worst {:.2e}", fixed.measured_left);
    all &= fixed.passed();
    let gradient = run("gradient-decay", "example2-gamma0", serde_json::json!({}));
    all &= gradient.passed();
    verdict_line(
        "8 invariant measures (density, invariance, asymptotics, L^p, domination, fixed points)",
        all,
    );
}

/// Criterion 9: rerunning the shipped manifest with the shipped seed
/// reproduces every output byte-for-byte.
#[test]
fn criterion_9_determinism() {
    let manifest = default_manifest();
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    let sum_a = run_suite(&manifest, Some(dir_a.path())).unwrap();
    let sum_b = run_suite(&manifest, Some(dir_b.path())).unwrap();
    assert_eq!(sum_a.total, sum_b.total);
    let mut names: Vec<_> = std::fs::read_dir(dir_a.path())
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    assert!(!names.is_empty());
    let mut identical = true;
    for name in &names {
        let a = std::fs::read(dir_a.path().join(name)).unwrap();
        let b = std::fs::read(dir_b.path().join(name)).unwrap();
        if a != b {
            println!("  MISMATCH in {name:?}");
            identical = false;
        }
    }
    println!(
        "  compared {} files; suite pass rate {}/{}",
        names.len(),
        sum_a.passed,
        sum_a.total
    );
    verdict_line(
        "9 determinism (byte-identical reruns)",
        identical && sum_a.all_passed(),
    );
}
