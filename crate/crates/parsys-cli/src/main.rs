//! Command-line driver: preset validation, evolution experiments, the
//! verification suite, resolvent construction, invariant measures and decay
//! fits. All inputs are JSON, tabular outputs are CSV.
//!
//! Exit codes: 0 all-pass, 1 any check failed, 2 configuration error.

use clap::{Parser, Subcommand};
use parsys::config::{write_evolution_result, write_grid_function, ExperimentSpec, OperatorRef};
use parsys::evolve::{solve_cauchy, SolverConfig};
use parsys::grid::UniformGrid;
use parsys::hypotheses::check_hypotheses;
use parsys::measures::{
    analyze_coupling, build_system_measures, scalar_invariant_density_stationary,
};
use parsys::operator::ScalarPart;
use parsys::preset::load_preset;
use parsys::report::Verdict;
use parsys::resolvent::{elliptic_direct, resolvent_quadrature};
use parsys::suite::{default_manifest, run_check, run_suite, ManifestItem, SuiteManifest};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "parsys",
    about = "Verification laboratory for weakly coupled parabolic systems",
    version
)]
struct Cli {
    /// Output directory for reports and CSV files.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Worker threads (overrides PARSYS_WORKERS; 1 = sequential).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load a preset, self-validate it, and check its declared hypothesis
    /// sets.
    Validate { preset: String },
    /// Run an evolution experiment from a JSON spec.
    Evolve { spec: PathBuf },
    /// Run a verification manifest (or the shipped default manifest).
    Verify {
        /// Manifest JSON; omit to run the shipped default.
        manifest: Option<PathBuf>,
        /// Write the shipped default manifest to --out and exit.
        #[arg(long)]
        emit_default: bool,
    },
    /// Resolvent construction for a preset.
    Resolvent {
        #[arg(long)]
        preset: String,
        /// Offsets above the measured row-sum bound M_J, comma separated.
        #[arg(long, value_delimiter = ',', default_value = "1.0,5.0")]
        lambda_offsets: Vec<f64>,
        #[arg(long, default_value = "direct")]
        method: String,
        /// Frozen time.
        #[arg(long, default_value_t = 0.0)]
        tbar: f64,
        /// Scheme parameter of the semigroup quadrature solves.
        #[arg(long, default_value_t = 0.5)]
        theta: f64,
    },
    /// Invariant-measure pipeline for an autonomous preset.
    Invariant {
        #[arg(long)]
        preset: String,
    },
    /// Derivative-decay fit for a preset.
    Decay {
        #[arg(long)]
        preset: String,
        #[arg(long, default_value_t = 0)]
        h: usize,
        #[arg(long, default_value_t = 1)]
        k: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    parsys::exec::configure_workers(cli.workers);
    match run(cli) {
        Ok(all_pass) => {
            if all_pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> parsys::Result<bool> {
    std::fs::create_dir_all(&cli.out)?;
    match cli.command {
        Command::Validate { preset } => {
            let p = load_preset(&preset)?;
            println!("preset {}: self-validation OK (M_J = {})", p.name, p.m_j()?);
            let mut all = true;
            for which in &p.hypothesis_sets {
                let mut report =
                    check_hypotheses(&p.operator, *which, p.interval, p.domain, &p.sampling())?;
                if matches!(which, parsys::hypotheses::HypothesisSet::Base)
                    && p.expected.enforce_class_conditions
                {
                    report
                        .verdicts
                        .extend(parsys::hypotheses::example_class_conditions(&p.operator));
                }
                for (key, verdict) in &report.verdicts {
                    let ok = verdict.holds();
                    all &= ok;
                    println!(
                        "  [{which:?}] {key}: {}",
                        if ok { "holds" } else { "VIOLATED" }
                    );
                }
                let f = std::fs::File::create(
                    cli.out
                        .join(format!("hypotheses_{}_{:?}.json", p.name, which)),
                )?;
                serde_json::to_writer_pretty(f, &report)?;
            }
            Ok(all)
        }
        Command::Evolve { spec } => {
            let text = std::fs::read_to_string(&spec)?;
            let spec: ExperimentSpec = serde_json::from_str(&text)?;
            let op = match &spec.operator {
                OperatorRef::Preset(name) => load_preset(name)?.operator,
                OperatorRef::Inline(cfgdoc) => cfgdoc.build()?,
            };
            let grid = spec.domain.grid(op.dim)?;
            let f = spec.initial.build(grid)?;
            let cfg = spec.config.build();
            let result = solve_cauchy(&op, spec.s, spec.t_end, &f, None, &cfg, &spec.snapshots)?;
            write_evolution_result(&cli.out, &result)?;
            println!(
                "evolved to T = {} with {} snapshots -> {}",
                spec.t_end,
                result.times.len(),
                cli.out.display()
            );
            Ok(true)
        }
        Command::Verify {
            manifest,
            emit_default,
        } => {
            if emit_default {
                let path = cli.out.join("manifest.json");
                let f = std::fs::File::create(&path)?;
                serde_json::to_writer_pretty(f, &default_manifest())?;
                println!("wrote {}", path.display());
                return Ok(true);
            }
            let manifest: SuiteManifest = match manifest {
                Some(path) => serde_json::from_str(&std::fs::read_to_string(path)?)?,
                None => default_manifest(),
            };
            let summary = run_suite(&manifest, Some(&cli.out))?;
            for report in &summary.reports {
                println!(
                    "{} / {}: violation {:+.3e} (tol {:.1e}) -> {}",
                    report.check,
                    report.preset,
                    report.worst_violation,
                    report.tolerance,
                    report.verdict
                );
            }
            println!(
                "{}/{} passed; reports in {}",
                summary.passed,
                summary.total,
                cli.out.display()
            );
            Ok(summary.all_passed())
        }
        Command::Resolvent {
            preset,
            lambda_offsets,
            method,
            tbar,
            theta,
        } => {
            let p = load_preset(&preset)?;
            let m_j = p.m_j()?;
            let grid = p.grid();
            let f = parsys::data::random_smooth(
                grid,
                p.operator.comps,
                &parsys::data::SmoothFieldSpec {
                    localized: true,
                    ..Default::default()
                },
                1,
            );
            let cfg = SolverConfig::default().with_theta(theta);
            let mut all = true;
            for offset in lambda_offsets {
                let lambda = m_j + offset;
                let result = match method.as_str() {
                    "direct" => elliptic_direct(&p.operator, tbar, lambda, &f, m_j, &cfg)?,
                    "quadrature" => {
                        resolvent_quadrature(&p.operator, tbar, lambda, &f, m_j, &cfg, 0)?
                    }
                    other => {
                        return Err(parsys::Error::InvalidConfig(format!(
                            "unknown method `{other}` (direct | quadrature)"
                        )))
                    }
                };
                let stem = format!("resolvent_{}_{}_{lambda}", p.name, method);
                write_grid_function(&cli.out, &stem, &result.solution)?;
                let meta = serde_json::json!({
                    "preset": p.name,
                    "lambda": lambda,
                    "tbar": tbar,
                    "method": method,
                    "residual": result.residual,
                    "t_trunc": result.t_trunc,
                    "nodes": result.nodes,
                });
                let fjson = std::fs::File::create(cli.out.join(format!("{stem}.json")))?;
                serde_json::to_writer_pretty(fjson, &meta)?;
                println!(
                    "lambda = {lambda}: residual {:.3e} -> {stem}.csv",
                    result.residual
                );
                all &= result.residual.is_finite();
            }
            Ok(all)
        }
        Command::Invariant { preset } => {
            let p = load_preset(&preset)?;
            let grid = p.grid();
            let sample = UniformGrid::new(p.domain, 17)?;
            let points: Vec<Vec<f64>> = (0..sample.len()).map(|i| sample.point(i)).collect();
            let analysis = analyze_coupling(&p.operator, &points)?;
            let fa = std::fs::File::create(cli.out.join(format!("coupling_{}.json", p.name)))?;
            serde_json::to_writer_pretty(fa, &analysis)?;
            let scalar = ScalarPart {
                op: &p.operator,
                comp: 0,
                with_diagonal_potential: false,
            };
            let mu = scalar_invariant_density_stationary(&scalar, grid)?;
            let mv = build_system_measures(&analysis, &mu)?;
            write_grid_function(&cli.out, &format!("density_{}", p.name), &mv.density)?;
            let fw = std::fs::File::create(cli.out.join(format!("weights_{}.json", p.name)))?;
            serde_json::to_writer_pretty(
                fw,
                &serde_json::json!({ "eta": mv.eta, "xi": mv.xi, "spectral_margin": analysis.spectral_margin }),
            )?;
            println!(
                "invariant system for {}: eta = {:?}, spectral margin {:.4}",
                p.name, mv.eta, analysis.spectral_margin
            );
            Ok(analysis.pass())
        }
        Command::Decay { preset, h, k } => {
            let item = ManifestItem {
                check: "decay".into(),
                preset,
                params: serde_json::json!({ "h": h, "k": k }),
            };
            let report = run_check(&item, 20260810)?;
            let f =
                std::fs::File::create(cli.out.join(format!("decay_{}_{h}{k}.json", item.preset)))?;
            serde_json::to_writer_pretty(f, &report)?;
            println!(
                "decay ({h},{k}) on {}: slope {} -> {}",
                item.preset, report.details["slope"], report.verdict
            );
            Ok(report.verdict == Verdict::Pass)
        }
    }
}
