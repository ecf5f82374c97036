//! The shipped operator corpus: concrete instances of the radial-power
//! family and the autonomous coupled example, each with an expected-values
//! block that is re-derived on load (a corrupted preset cannot silently feed
//! experiments).

use crate::coeff::TimeFactor;
use crate::config::{BEntry, CEntry, OperatorConfig, QEntry};
use crate::grid::{BoxDomain, UniformGrid};
use crate::hypotheses::{example_class_conditions, HypothesisSet};
use crate::measures::analyze_coupling;
use crate::operator::{row_sum_bound, OperatorFamily, SamplingSpec};
use crate::tolerances;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Expected values with provenance, reproduced on load.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ExpectedValues {
    /// Row-sum bound over the default interval and domain.
    pub m_j: Option<f64>,
    /// Kernel direction of the coupling matrix (unnormalized).
    pub eta: Option<Vec<f64>>,
    /// Kernel direction of the auxiliary coupling matrix (unnormalized).
    pub xi: Option<Vec<f64>>,
    /// Real eigenvalues of the constant coupling matrix.
    pub eigenvalues: Option<Vec<f64>>,
    /// Enforce the radial-power family conditions (a)-(d), (a'), (b').
    #[serde(default)]
    pub enforce_class_conditions: bool,
}

/// A named operator with its defaults and self-validating expected block.
#[derive(Debug, Clone)]
pub struct Preset {
    pub name: String,
    pub config: OperatorConfig,
    pub operator: OperatorFamily,
    pub hypothesis_sets: Vec<HypothesisSet>,
    pub domain: BoxDomain,
    pub grid_points: usize,
    pub interval: (f64, f64),
    pub expected: ExpectedValues,
}

impl Preset {
    pub fn grid(&self) -> UniformGrid {
        UniformGrid::new(self.domain, self.grid_points).expect("preset grid")
    }

    pub fn sampling(&self) -> SamplingSpec {
        SamplingSpec::default_for(self.domain)
    }

    /// Measured row-sum bound over the default interval and domain.
    pub fn m_j(&self) -> Result<f64> {
        let aux = self.operator.derive_auxiliary();
        Ok(row_sum_bound(&aux, self.interval, self.domain, &self.sampling())?.m_j)
    }

    /// Re-derive the expected block; any mismatch is a self-validation
    /// failure.
    pub fn validate(&self) -> Result<()> {
        let fail = |reason: String| Error::SelfValidationFailed {
            name: self.name.clone(),
            reason,
        };
        if self.expected.enforce_class_conditions {
            for (key, verdict) in example_class_conditions(&self.operator) {
                if !verdict.holds() {
                    return Err(fail(format!(
                        "radial-power condition {key} does not hold: {verdict:?}"
                    )));
                }
            }
        }
        if let Some(expected_mj) = self.expected.m_j {
            let measured = self.m_j()?;
            if (measured - expected_mj).abs() > 1e-9 {
                return Err(fail(format!("M_J = {measured}, expected {expected_mj}")));
            }
        }
        if self.expected.eta.is_some()
            || self.expected.xi.is_some()
            || self.expected.eigenvalues.is_some()
        {
            let points: Vec<Vec<f64>> = (0..5)
                .map(|i| {
                    vec![-self.domain.radius + i as f64 * self.domain.radius / 2.0; self.domain.dim]
                })
                .collect();
            let analysis = analyze_coupling(&self.operator, &points)?;
            if let Some(eta) = &self.expected.eta {
                let scale = eta.iter().map(|v| v * v).sum::<f64>().sqrt();
                let unit: Vec<f64> = eta.iter().map(|v| v / scale).collect();
                let dot: f64 = unit.iter().zip(&analysis.eta).map(|(a, b)| a * b).sum();
                if (dot.abs() - 1.0).abs() > tolerances::EXACT {
                    return Err(fail(format!(
                        "kernel eta = {:?}, expected direction {:?}",
                        analysis.eta, unit
                    )));
                }
            }
            if let Some(xi) = &self.expected.xi {
                let scale = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
                let unit: Vec<f64> = xi.iter().map(|v| v / scale).collect();
                let dot: f64 = unit.iter().zip(&analysis.xi).map(|(a, b)| a * b).sum();
                if (dot.abs() - 1.0).abs() > tolerances::EXACT {
                    return Err(fail(format!(
                        "kernel xi = {:?}, expected direction {:?}",
                        analysis.xi, unit
                    )));
                }
            }
            if let Some(eigs) = &self.expected.eigenvalues {
                let mut expected = eigs.clone();
                expected.sort_by(|a, b| a.partial_cmp(b).unwrap());
                for per_point in analysis.eigen_c.iter().chain(&analysis.eigen_cp) {
                    if per_point.len() != expected.len() {
                        return Err(fail("eigenvalue count mismatch".into()));
                    }
                    for (ev, ex) in per_point.iter().zip(&expected) {
                        if ev.1.abs() > tolerances::EXACT || (ev.0 - ex).abs() > tolerances::EXACT {
                            return Err(fail(format!(
                                "eigenvalue {:?} vs expected {ex} (tolerance {})",
                                ev,
                                tolerances::EXACT
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

pub const PRESET_NAMES: [&str; 6] = [
    "heat-scalar",
    "ou-scalar",
    "example1-d1m2",
    "example1-d2m2",
    "example2-gamma0",
    "decoupled-negative-coupling",
];

fn q_const(zeta: f64) -> QEntry {
    QEntry {
        zeta,
        alpha: 0.0,
        time_factor: TimeFactor::Const,
    }
}

fn c_const(coef: f64) -> CEntry {
    CEntry {
        coef,
        gamma: 0.0,
        time_factor: TimeFactor::Const,
    }
}

struct PresetParts {
    config: OperatorConfig,
    hypothesis_sets: Vec<HypothesisSet>,
    domain: BoxDomain,
    grid_points: usize,
    interval: (f64, f64),
    expected: ExpectedValues,
}

/// Build a preset without validating it (exposed for tests that corrupt the
/// expected block on purpose).
pub fn build_preset(name: &str) -> Result<Preset> {
    let sqrt3 = 3f64.sqrt();
    let parts = match name {
        "heat-scalar" => PresetParts {
            config: OperatorConfig {
                d: 1,
                m: 1,
                q: vec![vec![q_const(1.0)]],
                b: vec![BEntry {
                    theta: 0.0,
                    beta: 0.0,
                    time_factor: TimeFactor::Const,
                }],
                c: vec![vec![c_const(0.0)]],
            },
            hypothesis_sets: vec![HypothesisSet::Base],
            domain: BoxDomain::new(4.0, 1),
            grid_points: 401,
            interval: (0.0, 1.0),
            expected: ExpectedValues {
                m_j: Some(0.0),
                ..Default::default()
            },
        },
        "ou-scalar" => PresetParts {
            config: OperatorConfig {
                d: 1,
                m: 1,
                q: vec![vec![q_const(1.0)]],
                b: vec![BEntry {
                    theta: 1.0,
                    beta: 0.0,
                    time_factor: TimeFactor::Const,
                }],
                c: vec![vec![c_const(0.0)]],
            },
            hypothesis_sets: vec![HypothesisSet::Base, HypothesisSet::SpecialCase],
            domain: BoxDomain::new(6.0, 1),
            grid_points: 481,
            interval: (0.0, 1.0),
            expected: ExpectedValues {
                m_j: Some(0.0),
                ..Default::default()
            },
        },
        "example1-d1m2" => {
            let tf1 = TimeFactor::Sin {
                amp: 0.2,
                freq: 1.0,
                phase: 0.0,
            };
            let tf2 = TimeFactor::Sin {
                amp: 0.2,
                freq: 1.3,
                phase: 0.5,
            };
            let tfb = TimeFactor::Sin {
                amp: 0.15,
                freq: 0.7,
                phase: 0.0,
            };
            PresetParts {
                config: OperatorConfig {
                    d: 1,
                    m: 2,
                    q: vec![
                        vec![QEntry {
                            zeta: 1.0,
                            alpha: 0.5,
                            time_factor: tf1.clone(),
                        }],
                        vec![QEntry {
                            zeta: 1.3,
                            alpha: 0.5,
                            time_factor: tf2,
                        }],
                    ],
                    b: vec![
                        BEntry {
                            theta: 1.0,
                            beta: 0.5,
                            time_factor: TimeFactor::Const,
                        },
                        BEntry {
                            theta: 1.2,
                            beta: 0.5,
                            time_factor: tfb,
                        },
                    ],
                    c: vec![
                        vec![
                            CEntry {
                                coef: -1.0,
                                gamma: 0.5,
                                time_factor: tf1,
                            },
                            c_const(-0.5),
                        ],
                        vec![
                            c_const(0.4),
                            CEntry {
                                coef: -1.5,
                                gamma: 0.5,
                                time_factor: TimeFactor::Const,
                            },
                        ],
                    ],
                },
                hypothesis_sets: vec![HypothesisSet::Base, HypothesisSet::Smooth],
                domain: BoxDomain::new(4.0, 1),
                grid_points: 401,
                interval: (0.0, 1.0),
                expected: ExpectedValues {
                    m_j: Some(-0.5),
                    enforce_class_conditions: true,
                    ..Default::default()
                },
            }
        }
        "example1-d2m2" => {
            let tf1 = TimeFactor::Sin {
                amp: 0.2,
                freq: 1.0,
                phase: 0.0,
            };
            let q1 = vec![
                QEntry {
                    zeta: 1.0,
                    alpha: 0.5,
                    time_factor: tf1.clone(),
                },
                QEntry {
                    zeta: 0.15,
                    alpha: 0.5,
                    time_factor: tf1.clone(),
                },
                QEntry {
                    zeta: 0.15,
                    alpha: 0.5,
                    time_factor: tf1.clone(),
                },
                QEntry {
                    zeta: 1.1,
                    alpha: 0.5,
                    time_factor: tf1.clone(),
                },
            ];
            let q2 = vec![
                QEntry {
                    zeta: 1.3,
                    alpha: 0.5,
                    time_factor: TimeFactor::Const,
                },
                QEntry {
                    zeta: -0.2,
                    alpha: 0.5,
                    time_factor: TimeFactor::Const,
                },
                QEntry {
                    zeta: -0.2,
                    alpha: 0.5,
                    time_factor: TimeFactor::Const,
                },
                QEntry {
                    zeta: 1.2,
                    alpha: 0.5,
                    time_factor: TimeFactor::Const,
                },
            ];
            PresetParts {
                config: OperatorConfig {
                    d: 2,
                    m: 2,
                    q: vec![q1, q2],
                    b: vec![
                        BEntry {
                            theta: 1.0,
                            beta: 0.5,
                            time_factor: TimeFactor::Const,
                        },
                        BEntry {
                            theta: 1.2,
                            beta: 0.5,
                            time_factor: TimeFactor::Const,
                        },
                    ],
                    c: vec![
                        vec![
                            CEntry {
                                coef: -1.0,
                                gamma: 0.5,
                                time_factor: tf1,
                            },
                            c_const(-0.5),
                        ],
                        vec![
                            c_const(0.4),
                            CEntry {
                                coef: -1.5,
                                gamma: 0.5,
                                time_factor: TimeFactor::Const,
                            },
                        ],
                    ],
                },
                hypothesis_sets: vec![HypothesisSet::Base, HypothesisSet::Smooth],
                domain: BoxDomain::new(4.0, 2),
                grid_points: 101,
                interval: (0.0, 1.0),
                expected: ExpectedValues {
                    m_j: Some(-0.5),
                    enforce_class_conditions: true,
                    ..Default::default()
                },
            }
        }
        "example2-gamma0" => PresetParts {
            config: OperatorConfig {
                d: 1,
                m: 3,
                q: vec![vec![q_const(1.0)], vec![q_const(1.0)], vec![q_const(1.0)]],
                b: vec![
                    BEntry {
                        theta: 1.0,
                        beta: 0.0,
                        time_factor: TimeFactor::Const,
                    },
                    BEntry {
                        theta: 1.0,
                        beta: 0.0,
                        time_factor: TimeFactor::Const,
                    },
                    BEntry {
                        theta: 1.0,
                        beta: 0.0,
                        time_factor: TimeFactor::Const,
                    },
                ],
                c: vec![
                    vec![c_const(-1.0), c_const(0.0), c_const(-1.0)],
                    vec![c_const(0.0), c_const(-3.0), c_const(sqrt3)],
                    vec![c_const(-1.0), c_const(sqrt3), c_const(-2.0)],
                ],
            },
            hypothesis_sets: vec![HypothesisSet::Base, HypothesisSet::SpecialCase],
            domain: BoxDomain::new(6.0, 1),
            grid_points: 481,
            interval: (0.0, 1.0),
            expected: ExpectedValues {
                m_j: Some(sqrt3 - 1.0),
                eta: Some(vec![-sqrt3, 1.0, sqrt3]),
                xi: Some(vec![sqrt3, 1.0, sqrt3]),
                eigenvalues: Some(vec![0.0, -3.0 + 2f64.sqrt(), -3.0 - 2f64.sqrt()]),
                ..Default::default()
            },
        },
        "decoupled-negative-coupling" => PresetParts {
            config: OperatorConfig {
                d: 1,
                m: 2,
                q: vec![vec![q_const(1.0)], vec![q_const(2.0)]],
                b: vec![
                    BEntry {
                        theta: 1.0,
                        beta: 0.0,
                        time_factor: TimeFactor::Const,
                    },
                    BEntry {
                        theta: 1.0,
                        beta: 0.0,
                        time_factor: TimeFactor::Const,
                    },
                ],
                c: vec![
                    vec![c_const(-1.0), c_const(-5.0)],
                    vec![c_const(-5.0), c_const(-1.0)],
                ],
            },
            hypothesis_sets: vec![HypothesisSet::Base, HypothesisSet::Smooth],
            domain: BoxDomain::new(4.0, 1),
            grid_points: 401,
            interval: (0.0, 0.25),
            expected: ExpectedValues {
                m_j: Some(4.0),
                ..Default::default()
            },
        },
        other => return Err(Error::UnknownPreset(other.into())),
    };
    let operator = parts.config.build()?;
    Ok(Preset {
        name: name.into(),
        config: parts.config,
        operator,
        hypothesis_sets: parts.hypothesis_sets,
        domain: parts.domain,
        grid_points: parts.grid_points,
        interval: parts.interval,
        expected: parts.expected,
    })
}

/// Load a preset and run its self-validation.
pub fn load_preset(name: &str) -> Result<Preset> {
    let preset = build_preset(name)?;
    preset.validate()?;
    Ok(preset)
}
