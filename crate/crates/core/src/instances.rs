//! Built-in example algebroids.
//!
//! Every builtin is an action algebroid `𝔤 ⋉ M` with the flat connection
//! (`Γ = 0`) and constant structure functions, so the Cartan condition holds
//! by construction. Each carries the verdicts it is expected to produce.

use std::collections::BTreeMap;

use ndarray::Array3;
use serde::Serialize;
use thiserror::Error;

use crate::axioms::check_anchor_morphism;
use crate::expr::{ExprError, ScalarField};
use crate::geometry::{AlgebroidSpec, Chart, FieldTensor, GeometryError, Tolerances};
use crate::metric::{ExistenceStatus, UniquenessClass};

pub const BUILTIN_NAMES: [&str; 5] = [
    "zero_anchor_bundle",
    "scaled_translations",
    "identity_anchor",
    "so2_linear",
    "so3_euclidean",
];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InstanceError {
    #[error("unknown builtin instance `{0}` (known: {known})", known = BUILTIN_NAMES.join(", "))]
    UnknownInstance(String),
    #[error("parameter `{name}`: {msg}")]
    BadParam { name: String, msg: String },
    #[error(
        "structure constants are not antisymmetric (C^{c}_{a}{b} + C^{c}_{b}{a} = {residual})"
    )]
    NotAntisymmetric {
        a: usize,
        b: usize,
        c: usize,
        residual: f64,
    },
    #[error("action fields do not represent the bracket: residual {residual:e} at {point:?}")]
    NotAnAction { residual: f64, point: Vec<f64> },
    #[error("action field {field} component {component}: {source}")]
    Expr {
        field: usize,
        component: usize,
        #[source]
        source: ExprError,
    },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Action algebroid of a Lie algebra with structure constants `constants[[c, a, b]]`
/// acting through `fields[a][i] = ρ^i_a`, with `Γ = 0`.
///
/// The chart must already carry its samples; the bracket representation
/// `[ρ_a, ρ_b] = C^c_{ab} ρ_c` is checked at each of them.
pub fn build_action_algebroid(
    constants: &Array3<f64>,
    fields: &[Vec<String>],
    chart: Chart,
    g: FieldTensor,
    kappa: FieldTensor,
    tol: Tolerances,
) -> Result<AlgebroidSpec, InstanceError> {
    let m = constants.shape()[0];
    let n = chart.dim();
    for c in 0..m {
        for a in 0..m {
            for b in a..m {
                let r = constants[[c, a, b]] + constants[[c, b, a]];
                if r.abs() >= tol.residual {
                    return Err(InstanceError::NotAntisymmetric {
                        a,
                        b,
                        c,
                        residual: r,
                    });
                }
            }
        }
    }
    if fields.len() != m || fields.iter().any(|f| f.len() != n) {
        return Err(GeometryError::Shape {
            what: format!("action fields ({m} fields of {n} components)"),
            expected: n * m,
            got: fields.iter().map(Vec::len).sum(),
        }
        .into());
    }
    let names = chart.names().to_vec();
    let mut anchor = Vec::with_capacity(n * m);
    for i in 0..n {
        for (a, field) in fields.iter().enumerate() {
            anchor.push(ScalarField::parse(&field[i], &names).map_err(|source| {
                InstanceError::Expr {
                    field: a,
                    component: i,
                    source,
                }
            })?);
        }
    }
    let structure = constants
        .iter()
        .map(|&v| ScalarField::constant(v, &names))
        .collect();
    let spec = AlgebroidSpec::load(
        chart,
        m,
        FieldTensor::new(vec![n, m], anchor)?,
        FieldTensor::new(vec![m, m, m], structure)?,
        FieldTensor::zeros(vec![m, n, m], &names),
        g,
        kappa,
        tol,
    )?;
    let mut worst = (0.0f64, Vec::new());
    for x in spec.chart.samples() {
        let f = spec.eval_frame(x)?;
        let r = check_anchor_morphism(&f)
            .iter()
            .fold(0.0f64, |acc, v| acc.max(v.abs()));
        if r > worst.0 {
            worst = (r, x.clone());
        }
    }
    if worst.0 >= tol.residual {
        return Err(InstanceError::NotAnAction {
            residual: worst.0,
            point: worst.1,
        });
    }
    Ok(spec)
}

/// What a builtin is known to produce, for the acceptance checks.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpectedVerdicts {
    pub axioms_pass: bool,
    pub existence: ExistenceStatus,
    /// `None` when the existence bound fails and no metric exists.
    pub uniqueness: Option<UniquenessClass>,
}

#[derive(Debug, Clone)]
pub struct BuiltinInstance {
    pub name: String,
    /// Resolved parameter values, defaults included.
    pub params: BTreeMap<String, String>,
    pub spec: AlgebroidSpec,
    pub expected: ExpectedVerdicts,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Sampling {
    /// Seeded pseudo-random points added on top of the box corners and center.
    pub random: usize,
    pub seed: u64,
}

impl Default for Sampling {
    fn default() -> Self {
        Self {
            random: 50,
            seed: 0,
        }
    }
}

struct Params<'a> {
    given: &'a BTreeMap<String, String>,
    resolved: BTreeMap<String, String>,
}

impl<'a> Params<'a> {
    fn new(given: &'a BTreeMap<String, String>) -> Self {
        Self {
            given,
            resolved: BTreeMap::new(),
        }
    }

    fn raw(&mut self, key: &str, default: &str) -> String {
        let v = self
            .given
            .get(key)
            .cloned()
            .unwrap_or_else(|| default.to_string());
        self.resolved.insert(key.to_string(), v.clone());
        v
    }

    fn float(&mut self, key: &str, default: f64) -> Result<f64, InstanceError> {
        let raw = self.raw(key, &format!("{default}"));
        raw.trim()
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| InstanceError::BadParam {
                name: key.into(),
                msg: format!("`{raw}` is not a finite number"),
            })
    }

    fn positive(&mut self, key: &str, default: f64) -> Result<f64, InstanceError> {
        let v = self.float(key, default)?;
        if v > 0.0 {
            Ok(v)
        } else {
            Err(InstanceError::BadParam {
                name: key.into(),
                msg: format!("must be positive, got {v}"),
            })
        }
    }

    fn count(&mut self, key: &str, default: usize, max: usize) -> Result<usize, InstanceError> {
        let raw = self.raw(key, &default.to_string());
        match raw.trim().parse::<usize>() {
            Ok(v) if (1..=max).contains(&v) => Ok(v),
            _ => Err(InstanceError::BadParam {
                name: key.into(),
                msg: format!("`{raw}` is not an integer in 1..={max}"),
            }),
        }
    }

    fn finish(self, name: &str) -> Result<BTreeMap<String, String>, InstanceError> {
        if let Some(extra) = self.given.keys().find(|k| !self.resolved.contains_key(*k)) {
            return Err(InstanceError::BadParam {
                name: extra.clone(),
                msg: format!("not a parameter of `{name}`"),
            });
        }
        Ok(self.resolved)
    }
}

fn sampled_cube(n: usize, half_width: f64, sampling: Sampling) -> Result<Chart, InstanceError> {
    let mut chart = Chart::cube(n, half_width)?;
    let points = [
        chart.corners_and_center(),
        chart.random_points(sampling.random, sampling.seed),
    ]
    .concat();
    chart.add_samples(points)?;
    Ok(chart)
}

/// so(3) with `C^c_{ab} = ε_{abc}`.
pub fn so3_constants() -> Array3<f64> {
    Array3::from_shape_fn((3, 3, 3), |(c, a, b)| match (a, b, c) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    })
}

/// Infinitesimal rotations of R³ with `[ρ_a, ρ_b] = ε_{abc} ρ_c`.
pub fn so3_rotation_fields() -> Vec<Vec<String>> {
    [["0", "x3", "-x2"], ["-x3", "0", "x1"], ["x2", "-x1", "0"]]
        .iter()
        .map(|f| f.iter().map(|s| s.to_string()).collect())
        .collect()
}

/// Expected existence status for a largest eigenvalue attained on the samples.
fn expected_existence(max_eig: f64, tol: f64) -> ExistenceStatus {
    if max_eig > 1.0 + tol {
        ExistenceStatus::Fails
    } else if (max_eig - 1.0).abs() <= tol {
        ExistenceStatus::BoundarySaturated
    } else {
        ExistenceStatus::Holds
    }
}

pub fn builtin(
    name: &str,
    given: &BTreeMap<String, String>,
    sampling: Sampling,
    tol: Tolerances,
) -> Result<BuiltinInstance, InstanceError> {
    let mut params = Params::new(given);
    let (spec, expected) = match name {
        "zero_anchor_bundle" => {
            let n = params.count("n", 1, 4)?;
            let h = params.positive("half_width", 1.0)?;
            let algebra = params.raw("algebra", "su2");
            let constants = match algebra.as_str() {
                "su2" => so3_constants(),
                "abelian" => {
                    let m = params.count("rank", 1, 6)?;
                    Array3::zeros((m, m, m))
                }
                other => {
                    return Err(InstanceError::BadParam {
                        name: "algebra".into(),
                        msg: format!("`{other}` is not one of su2, abelian"),
                    })
                }
            };
            let m = constants.shape()[0];
            let chart = sampled_cube(n, h, sampling)?;
            let names = chart.names().to_vec();
            let fields = vec![vec!["0".to_string(); n]; m];
            let spec = build_action_algebroid(
                &constants,
                &fields,
                chart,
                FieldTensor::identity(n, &names),
                FieldTensor::identity(m, &names),
                tol,
            )?;
            (
                spec,
                ExpectedVerdicts {
                    axioms_pass: true,
                    existence: ExistenceStatus::Holds,
                    uniqueness: Some(UniquenessClass::Unique),
                },
            )
        }
        "scaled_translations" => {
            let eps = params.float("eps", 0.6)?;
            let h = params.positive("half_width", 1.0)?;
            let chart = sampled_cube(1, h, sampling)?;
            let names = chart.names().to_vec();
            let spec = build_action_algebroid(
                &Array3::zeros((1, 1, 1)),
                &[vec![format!("{eps}")]],
                chart,
                FieldTensor::identity(1, &names),
                FieldTensor::identity(1, &names),
                tol,
            )?;
            let existence = expected_existence(eps * eps, tol.residual);
            let uniqueness = existence.bound_holds().then(|| {
                if eps * eps <= tol.residual || existence == ExistenceStatus::BoundarySaturated {
                    UniquenessClass::Unique
                } else {
                    UniquenessClass::TwoSolutions
                }
            });
            (
                spec,
                ExpectedVerdicts {
                    axioms_pass: true,
                    existence,
                    uniqueness,
                },
            )
        }
        "identity_anchor" => {
            let n = params.count("n", 1, 4)?;
            let h = params.positive("half_width", 1.0)?;
            let chart = sampled_cube(n, h, sampling)?;
            let names = chart.names().to_vec();
            let fields: Vec<Vec<String>> = (0..n)
                .map(|a| {
                    (0..n)
                        .map(|i| if i == a { "1" } else { "0" }.to_string())
                        .collect()
                })
                .collect();
            let spec = build_action_algebroid(
                &Array3::zeros((n, n, n)),
                &fields,
                chart,
                FieldTensor::identity(n, &names),
                FieldTensor::identity(n, &names),
                tol,
            )?;
            (
                spec,
                ExpectedVerdicts {
                    axioms_pass: true,
                    existence: ExistenceStatus::BoundarySaturated,
                    uniqueness: Some(UniquenessClass::Unique),
                },
            )
        }
        "so2_linear" => {
            let h = params.positive("half_width", 0.7)?;
            let chart = sampled_cube(2, h, sampling)?;
            let names = chart.names().to_vec();
            let spec = build_action_algebroid(
                &Array3::zeros((1, 1, 1)),
                &[vec!["-x2".to_string(), "x1".to_string()]],
                chart,
                FieldTensor::identity(2, &names),
                FieldTensor::identity(1, &names),
                tol,
            )?;
            // eigenvalues of ρρ* are {0, |x|²}; the maximum sits at a corner
            let existence = expected_existence(2.0 * h * h, tol.residual);
            (
                spec,
                ExpectedVerdicts {
                    axioms_pass: true,
                    existence,
                    uniqueness: existence.bound_holds().then_some(UniquenessClass::Unique),
                },
            )
        }
        "so3_euclidean" => {
            let h = params.positive("half_width", 0.5)?;
            let chart = sampled_cube(3, h, sampling)?;
            let names = chart.names().to_vec();
            let spec = build_action_algebroid(
                &so3_constants(),
                &so3_rotation_fields(),
                chart,
                FieldTensor::identity(3, &names),
                FieldTensor::identity(3, &names),
                tol,
            )?;
            // ρρ* = |x|² − x xᵀ has eigenvalues {0, |x|², |x|²}
            let existence = expected_existence(3.0 * h * h, tol.residual);
            (
                spec,
                ExpectedVerdicts {
                    axioms_pass: true,
                    existence,
                    uniqueness: existence.bound_holds().then_some(UniquenessClass::Unique),
                },
            )
        }
        other => return Err(InstanceError::UnknownInstance(other.to_string())),
    };
    Ok(BuiltinInstance {
        name: name.to_string(),
        params: params.finish(name)?,
        spec,
        expected,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::axioms::{run_axiom_suite, AxiomCheck};
    use crate::metric::{classify_uniqueness, existence_condition};

    fn make(name: &str, params: &[(&str, &str)]) -> Result<BuiltinInstance, InstanceError> {
        let given = params
            .iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect();
        builtin(name, &given, Sampling::default(), Tolerances::default())
    }

    #[test]
    fn every_builtin_matches_its_expected_verdicts() {
        for name in BUILTIN_NAMES {
            let inst = make(name, &[]).unwrap();
            let frames = inst.spec.frames().unwrap();
            let axioms = run_axiom_suite(&frames, 1e-9);
            assert_eq!(
                axioms.positive_quadratic_cartan, inst.expected.axioms_pass,
                "{name}"
            );
            assert!(axioms.residual(AxiomCheck::Cartan).max_abs < 1e-9);
            let ex = existence_condition(&frames, 1e-9).unwrap();
            assert_eq!(ex.status, inst.expected.existence, "{name}: {ex:?}");
            if let Some(class) = inst.expected.uniqueness {
                assert_eq!(
                    classify_uniqueness(&frames, 1e-9).unwrap().class,
                    class,
                    "{name}"
                );
            }
        }
    }

    #[test]
    fn documented_expectations() {
        let id = make("identity_anchor", &[("n", "1")]).unwrap();
        assert_eq!(id.expected.existence, ExistenceStatus::BoundarySaturated);
        assert_eq!(id.expected.uniqueness, Some(UniquenessClass::Unique));
        let so2 = make("so2_linear", &[("half_width", "2")]).unwrap();
        assert_eq!(so2.expected.existence, ExistenceStatus::Fails);
        assert_eq!(so2.expected.uniqueness, None);
        let tr = make("scaled_translations", &[("eps", "0.6")]).unwrap();
        assert_eq!(tr.expected.existence, ExistenceStatus::Holds);
        assert_eq!(tr.expected.uniqueness, Some(UniquenessClass::TwoSolutions));
        assert_eq!(tr.params.get("half_width").map(String::as_str), Some("1"));
        let frames = tr.spec.frames().unwrap();
        assert!(frames.iter().all(|f| f.p[(0, 0)] == 0.6));
        assert_eq!(frames.len(), 3 + 50);
    }

    #[test]
    fn rotations_are_killing_for_euclidean_metric() {
        let so2 = make("so2_linear", &[]).unwrap();
        let axioms = run_axiom_suite(&so2.spec.frames().unwrap(), 1e-9);
        assert_eq!(axioms.residual(AxiomCheck::Killing).max_abs, 0.0);
    }

    #[test]
    fn parameter_errors() {
        assert!(matches!(
            make("nope", &[]),
            Err(InstanceError::UnknownInstance(_))
        ));
        assert!(matches!(
            make("so2_linear", &[("half_width", "-1")]),
            Err(InstanceError::BadParam { .. })
        ));
        assert!(matches!(
            make("so2_linear", &[("eps", "1")]),
            Err(InstanceError::BadParam { .. })
        ));
        assert!(matches!(
            make("identity_anchor", &[("n", "x")]),
            Err(InstanceError::BadParam { .. })
        ));
        assert!(make(
            "zero_anchor_bundle",
            &[("algebra", "abelian"), ("rank", "2")]
        )
        .is_ok());
    }

    #[test]
    fn flipped_generator_is_not_an_action() {
        let mut fields = so3_rotation_fields();
        fields[0] = fields[0]
            .iter()
            .map(|s| match s.strip_prefix('-') {
                Some(rest) => rest.to_string(),
                None if s == "0" => s.clone(),
                None => format!("-{s}"),
            })
            .collect();
        let mut chart = Chart::cube(3, 1.0).unwrap();
        chart.add_samples(chart.random_points(10, 3)).unwrap();
        let names = chart.names().to_vec();
        let err = build_action_algebroid(
            &so3_constants(),
            &fields,
            chart,
            FieldTensor::identity(3, &names),
            FieldTensor::identity(3, &names),
            Tolerances::default(),
        )
        .unwrap_err();
        assert!(matches!(err, InstanceError::NotAnAction { .. }), "{err}");
    }

    #[test]
    fn non_antisymmetric_constants_rejected() {
        let mut c = Array3::zeros((2, 2, 2));
        c[[0, 0, 1]] = 1.0;
        let mut chart = Chart::cube(1, 1.0).unwrap();
        chart.add_samples(vec![vec![0.0]]).unwrap();
        let names = chart.names().to_vec();
        let err = build_action_algebroid(
            &c,
            &[vec!["0".into()], vec!["0".into()]],
            chart,
            FieldTensor::identity(1, &names),
            FieldTensor::identity(2, &names),
            Tolerances::default(),
        )
        .unwrap_err();
        assert!(matches!(err, InstanceError::NotAntisymmetric { .. }));
    }
}
