//! External-interface tests: operator documents, experiment specs, the
//! CSV/JSON export pair, manifest schema validation and suite outputs.

use parsys::config::{write_grid_function, ExperimentSpec, OperatorRef};
use parsys::data::InitialData;
use parsys::evolve::solve_cauchy;
use parsys::preset::load_preset;
use parsys::report::SUITE_CSV_HEADER;
use parsys::suite::{run_suite, ManifestItem, SuiteManifest};

#[test]
fn inline_operator_experiment_runs_end_to_end() {
    let json = r#"{
        "operator": {
            "d": 1, "m": 2,
            "Q": [[{"zeta": 1.0, "alpha": 0.0}], [{"zeta": 2.0, "alpha": 0.0}]],
            "b": [{"theta": 1.0, "beta": 0.0}, {"theta": 1.0, "beta": 0.0}],
            "C": [
                [{"coef": -1.0, "gamma": 0.0}, {"coef": -5.0, "gamma": 0.0}],
                [{"coef": -5.0, "gamma": 0.0}, {"coef": -1.0, "gamma": 0.0}]
            ]
        },
        "s": 0.0, "T": 0.1,
        "snapshots": [0.05, 0.1],
        "domain": {"R": 3.0, "n_g": 101},
        "config": {"dt": 0.002},
        "initial": {"kind": "gaussian", "amp": [1.0, -0.5], "sigma": 0.4}
    }"#;
    let spec: ExperimentSpec = serde_json::from_str(json).unwrap();
    let op = match &spec.operator {
        OperatorRef::Inline(doc) => doc.build().unwrap(),
        _ => unreachable!(),
    };
    let grid = spec.domain.grid(op.dim).unwrap();
    let f = spec.initial.build(grid).unwrap();
    let run = solve_cauchy(
        &op,
        spec.s,
        spec.t_end,
        &f,
        None,
        &spec.config.build(),
        &spec.snapshots,
    )
    .unwrap();
    assert_eq!(run.times, vec![0.0, 0.05, 0.1]);
    assert!(run.last().is_finite());
}

#[test]
fn grid_function_csv_pair_has_documented_schema() {
    let preset = load_preset("heat-scalar").unwrap();
    let grid = parsys::grid::UniformGrid::new(preset.domain, 11).unwrap();
    let f = InitialData::Constant {
        values: vec![1.5, -2.0],
    }
    .build(grid)
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    write_grid_function(dir.path(), "field", &f).unwrap();
    let csv = std::fs::read_to_string(dir.path().join("field.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "component,x_1,value");
    let first = lines.next().unwrap();
    assert!(first.starts_with("0,-4,1.5"), "row: {first}");
    assert_eq!(csv.lines().count(), 1 + 2 * grid.len());
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("field.meta.json")).unwrap())
            .unwrap();
    assert_eq!(meta["n_g"], 11);
    assert_eq!(meta["m"], 2);
    assert_eq!(meta["R"], 4.0);
}

#[test]
fn suite_outputs_csv_and_index() {
    let manifest = SuiteManifest {
        seed: 5,
        items: vec![ManifestItem {
            check: "coupling-analysis".into(),
            preset: "example2-gamma0".into(),
            params: serde_json::json!({}),
        }],
    };
    let dir = tempfile::tempdir().unwrap();
    let summary = run_suite(&manifest, Some(dir.path())).unwrap();
    assert!(summary.all_passed());
    let csv = std::fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    assert!(csv.starts_with(SUITE_CSV_HEADER));
    assert!(csv.contains("coupling-analysis,example2-gamma0"));
    let index: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("index.json")).unwrap())
            .unwrap();
    assert_eq!(index["total"], 1);
    assert_eq!(index["failed"], 0);
    assert!(dir
        .path()
        .join("000_coupling-analysis__example2-gamma0.json")
        .exists());
}

#[test]
fn unknown_preset_in_manifest_is_schema_error() {
    let manifest = SuiteManifest {
        seed: 1,
        items: vec![ManifestItem {
            check: "comparison".into(),
            preset: "missing".into(),
            params: serde_json::json!({}),
        }],
    };
    assert!(manifest.validate().is_err());
}

#[test]
fn check_errors_are_captured_not_fatal() {
    // special-case hypotheses on a nonautonomous preset error inside the
    // check; the suite must record a failure and keep going.
    let manifest = SuiteManifest {
        seed: 1,
        items: vec![
            ManifestItem {
                check: "hypotheses".into(),
                preset: "example1-d1m2".into(),
                params: serde_json::json!({"which": "nonsense"}),
            },
            ManifestItem {
                check: "coupling-analysis".into(),
                preset: "example2-gamma0".into(),
                params: serde_json::json!({}),
            },
        ],
    };
    let summary = run_suite(&manifest, None).unwrap();
    assert_eq!(summary.total, 2);
    assert_eq!(summary.failed, 1);
    assert_eq!(summary.passed, 1);
    assert!(summary.reports[0].details["error"].is_string());
}

#[test]
fn hypothesis_report_serializes_with_witness() {
    use parsys::hypotheses::{check_hypotheses, HypothesisSet};
    use parsys::operator::SamplingSpec;
    let preset = load_preset("example2-gamma0").unwrap();
    let report = check_hypotheses(
        &preset.operator,
        HypothesisSet::SpecialCase,
        preset.interval,
        preset.domain,
        &SamplingSpec::default_for(preset.domain),
    )
    .unwrap();
    let json = serde_json::to_string_pretty(&report).unwrap();
    let back: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert!(back["verdicts"].is_array());
    assert!(report.all_hold());
    // Kernel direction recorded among the measured constants.
    let eta = back["constants"]["kernel_eta"].as_array().unwrap();
    assert_eq!(eta.len(), 3);
}
