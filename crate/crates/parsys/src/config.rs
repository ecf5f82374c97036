//! JSON-facing configuration: operator documents, experiment specs, and the
//! export format of solved trajectories.

use crate::coeff::{CoefficientExpr, TimeFactor};
use crate::data::InitialData;
use crate::evolve::{EvolutionResult, SolverConfig};
use crate::grid::{BoxDomain, GridFunction, UniformGrid};
use crate::operator::OperatorFamily;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::Path;

fn default_tf() -> TimeFactor {
    TimeFactor::Const
}

/// Diffusion entry `zeta * tf(t) * (1+|x|^2)^alpha`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QEntry {
    pub zeta: f64,
    pub alpha: f64,
    #[serde(default = "default_tf")]
    pub time_factor: TimeFactor,
}

/// Drift entry `-theta * tf(t) * x_i * (1+|x|^2)^beta` (one per component,
/// isotropic across axes).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BEntry {
    pub theta: f64,
    pub beta: f64,
    #[serde(default = "default_tf")]
    pub time_factor: TimeFactor,
}

/// Coupling entry `coef * tf(t) * (1+|x|^2)^gamma`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CEntry {
    pub coef: f64,
    pub gamma: f64,
    #[serde(default = "default_tf")]
    pub time_factor: TimeFactor,
}

/// Operator document: `{d, m, Q, b, C}` with Q[k] a row-major d*d entry
/// list, b one entry per component, C an m*m entry matrix.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OperatorConfig {
    pub d: usize,
    pub m: usize,
    #[serde(rename = "Q")]
    pub q: Vec<Vec<QEntry>>,
    pub b: Vec<BEntry>,
    #[serde(rename = "C")]
    pub c: Vec<Vec<CEntry>>,
}

impl OperatorConfig {
    pub fn build(&self) -> Result<OperatorFamily> {
        let d = self.d;
        let m = self.m;
        if self.q.len() != m || self.b.len() != m || self.c.len() != m {
            return Err(Error::InvalidConfig(
                "Q, b, C must each have m entries".into(),
            ));
        }
        let mut diffusion = Vec::with_capacity(m);
        for (k, qk) in self.q.iter().enumerate() {
            if qk.len() != d * d {
                return Err(Error::InvalidConfig(format!(
                    "Q[{k}] must list d*d = {} entries row-major, got {}",
                    d * d,
                    qk.len()
                )));
            }
            for i in 0..d {
                for j in (i + 1)..d {
                    let a = &qk[i * d + j];
                    let b = &qk[j * d + i];
                    if a.zeta != b.zeta || a.alpha != b.alpha || a.time_factor != b.time_factor {
                        return Err(Error::InvalidConfig(format!(
                            "Q[{k}] is not symmetric at ({i},{j})"
                        )));
                    }
                }
            }
            diffusion.push(
                qk.iter()
                    .map(|e| {
                        CoefficientExpr::radial(e.zeta, e.alpha).with_time(e.time_factor.clone())
                    })
                    .collect(),
            );
        }
        let drift = self
            .b
            .iter()
            .map(|e| {
                (0..d)
                    .map(|axis| {
                        CoefficientExpr::drift(e.theta, e.beta, axis)
                            .with_time(e.time_factor.clone())
                    })
                    .collect()
            })
            .collect();
        let coupling = self
            .c
            .iter()
            .map(|row| {
                row.iter()
                    .map(|e| {
                        CoefficientExpr::radial(e.coef, e.gamma).with_time(e.time_factor.clone())
                    })
                    .collect()
            })
            .collect();
        OperatorFamily::new(d, m, diffusion, drift, coupling)
    }
}

/// Operator reference in experiment specs: a preset name or an inline
/// document.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OperatorRef {
    Preset(String),
    Inline(OperatorConfig),
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DomainConfig {
    #[serde(rename = "R")]
    pub radius: f64,
    pub n_g: usize,
}

impl DomainConfig {
    pub fn grid(&self, dim: usize) -> Result<UniformGrid> {
        UniformGrid::new(BoxDomain::new(self.radius, dim), self.n_g)
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct SolverConfigSpec {
    pub theta: Option<f64>,
    pub dt: Option<f64>,
    pub linear_tol: Option<f64>,
    pub max_linear_iters: Option<usize>,
}

impl SolverConfigSpec {
    pub fn build(&self) -> SolverConfig {
        let mut cfg = SolverConfig::default();
        if let Some(theta) = self.theta {
            cfg = cfg.with_theta(theta);
        }
        cfg.dt = self.dt;
        if let Some(tol) = self.linear_tol {
            cfg.linear_tol = tol;
        }
        if let Some(iters) = self.max_linear_iters {
            cfg.max_linear_iters = iters;
        }
        cfg
    }
}

/// One evolution experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub operator: OperatorRef,
    pub s: f64,
    #[serde(rename = "T")]
    pub t_end: f64,
    #[serde(default)]
    pub snapshots: Vec<f64>,
    pub domain: DomainConfig,
    #[serde(default)]
    pub config: SolverConfigSpec,
    pub initial: InitialData,
}

/// Flat CSV of a grid function: component, x_1..x_d, value.
pub fn write_grid_function_csv(path: &Path, u: &GridFunction) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    let d = u.grid.dim();
    write!(out, "component")?;
    for a in 1..=d {
        write!(out, ",x_{a}")?;
    }
    writeln!(out, ",value")?;
    for (k, comp) in u.data.iter().enumerate() {
        for (idx, v) in comp.iter().enumerate() {
            write!(out, "{k}")?;
            for c in u.grid.point(idx) {
                write!(out, ",{c}")?;
            }
            writeln!(out, ",{v}")?;
        }
    }
    Ok(())
}

/// Metadata sidecar of the CSV export.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridFunctionMeta {
    #[serde(rename = "R")]
    pub radius: f64,
    pub n_g: usize,
    pub m: usize,
    pub dim: usize,
}

pub fn write_grid_function(dir: &Path, stem: &str, u: &GridFunction) -> Result<()> {
    write_grid_function_csv(&dir.join(format!("{stem}.csv")), u)?;
    let meta = GridFunctionMeta {
        radius: u.grid.domain.radius,
        n_g: u.grid.points_per_axis,
        m: u.comps(),
        dim: u.grid.dim(),
    };
    let f = std::fs::File::create(dir.join(format!("{stem}.meta.json")))?;
    serde_json::to_writer_pretty(f, &meta)?;
    Ok(())
}

/// Export a trajectory: one CSV per snapshot plus a JSON with times, config
/// and solver diagnostics.
pub fn write_evolution_result(dir: &Path, result: &EvolutionResult) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    for (i, state) in result.snapshots.iter().enumerate() {
        write_grid_function_csv(&dir.join(format!("snapshot_{i:03}.csv")), state)?;
    }
    let meta = serde_json::json!({
        "times": result.times,
        "R": result.grid.domain.radius,
        "n_g": result.grid.points_per_axis,
        "dim": result.grid.dim(),
        "m": result.snapshots[0].comps(),
        "config": result.config,
        "steps": result.diags.len(),
        "max_linear_iters": result.diags.iter().map(|d| d.iters).max().unwrap_or(0),
        "max_linear_residual": result.diags.iter().map(|d| d.residual).fold(0.0, f64::max),
    });
    let f = std::fs::File::create(dir.join("result.json"))?;
    serde_json::to_writer_pretty(f, &meta)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn operator_document_round_trip() {
        let json = r#"{
            "d": 1, "m": 2,
            "Q": [[{"zeta": 1.0, "alpha": 0.5}], [{"zeta": 1.3, "alpha": 0.5}]],
            "b": [{"theta": 1.0, "beta": 0.5}, {"theta": 1.2, "beta": 0.5}],
            "C": [
                [{"coef": -1.0, "gamma": 0.5, "time_factor": {"sin": {"amp": 0.2, "freq": 1.0, "phase": 0.0}}},
                 {"coef": -0.5, "gamma": 0.0}],
                [{"coef": 0.4, "gamma": 0.0}, {"coef": -1.5, "gamma": 0.5}]
            ]
        }"#;
        let cfg: OperatorConfig = serde_json::from_str(json).unwrap();
        let op = cfg.build().unwrap();
        assert_eq!(op.comps, 2);
        // b_1(0, x=1) = -1.0 * 1 * sqrt(2)
        let vals = op.eval(0.0, &[1.0]);
        approx::assert_abs_diff_eq!(vals.b[0][0], -2f64.sqrt(), epsilon = 1e-14);
        approx::assert_abs_diff_eq!(vals.c[(0, 1)], -0.5, epsilon = 1e-14);
    }

    #[test]
    fn asymmetric_diffusion_rejected() {
        let json = r#"{
            "d": 2, "m": 1,
            "Q": [[{"zeta": 1.0, "alpha": 0.0}, {"zeta": 0.2, "alpha": 0.0},
                   {"zeta": 0.3, "alpha": 0.0}, {"zeta": 1.0, "alpha": 0.0}]],
            "b": [{"theta": 1.0, "beta": 0.0}],
            "C": [[{"coef": 0.0, "gamma": 0.0}]]
        }"#;
        let cfg: OperatorConfig = serde_json::from_str(json).unwrap();
        assert!(cfg.build().is_err());
    }

    #[test]
    fn experiment_spec_parses() {
        let json = r#"{
            "operator": "heat-scalar",
            "s": 0.0, "T": 0.5,
            "snapshots": [0.25, 0.5],
            "domain": {"R": 4.0, "n_g": 101},
            "config": {"theta": 0.5, "dt": 0.001},
            "initial": {"kind": "gaussian", "amp": [1.0], "sigma": 0.5}
        }"#;
        let spec: ExperimentSpec = serde_json::from_str(json).unwrap();
        assert!(matches!(spec.operator, OperatorRef::Preset(ref p) if p == "heat-scalar"));
        let cfg = spec.config.build();
        assert_eq!(cfg.theta, 0.5);
    }
}
