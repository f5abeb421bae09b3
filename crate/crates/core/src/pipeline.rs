//! The full check run over one instance.

use std::collections::BTreeMap;
use std::path::PathBuf;

use rayon::prelude::*;
use serde_json::{json, Value};

use crate::axioms::run_axiom_suite;
use crate::config::{ConfigError, InstanceFile};
use crate::geometry::{AlgebroidSpec, PointFrame, Tolerances};
use crate::instances::{builtin, ExpectedVerdicts, Sampling};
use crate::metric::{
    assemble_eta0, averaged_metric, classify_uniqueness, democratic_metric, existence_condition,
    psi_minus, psi_plus, two_metric_bound, verify_eta0, AnchorSpectrum, Classification,
    ExistenceStatus, MetricError,
};
use crate::report::{matrix_rows, CheckReport, StageResult, StageStatus};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage {
    Axioms,
    Existence,
    Construction,
    Verification,
    Uniqueness,
    Averaged,
    Democratic,
    TwoMetric,
}

impl Stage {
    pub const ALL: [Stage; 8] = [
        Stage::Axioms,
        Stage::Existence,
        Stage::Construction,
        Stage::Verification,
        Stage::Uniqueness,
        Stage::Averaged,
        Stage::Democratic,
        Stage::TwoMetric,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Axioms => "axioms",
            Stage::Existence => "existence",
            Stage::Construction => "construction",
            Stage::Verification => "verification",
            Stage::Uniqueness => "uniqueness",
            Stage::Averaged => "averaged",
            Stage::Democratic => "democratic",
            Stage::TwoMetric => "two_metric",
        }
    }

    pub fn parse(name: &str) -> Option<Stage> {
        Stage::ALL.into_iter().find(|s| s.name() == name.trim())
    }

    /// Needs a verdict on the existence bound before it can run.
    fn needs_existence(self) -> bool {
        matches!(
            self,
            Stage::Construction | Stage::Verification | Stage::Uniqueness | Stage::Averaged
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum InstanceSource {
    File(PathBuf),
    Builtin {
        name: String,
        params: BTreeMap<String, String>,
    },
}

/// Everything that determines a run. `None` fields fall back to the file's
/// `[run]` table and then to the defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub source: InstanceSource,
    /// Seeded random samples added to the box corners and center.
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub stages: Option<Vec<String>>,
    /// Run the metric stages even when the axioms fail.
    pub force: bool,
    /// Worker threads; `None` uses all cores.
    pub threads: Option<usize>,
}

impl RunConfig {
    pub fn builtin(name: &str, params: &[(&str, &str)]) -> Self {
        Self::new(InstanceSource::Builtin {
            name: name.to_string(),
            params: params
                .iter()
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .collect(),
        })
    }

    pub fn new(source: InstanceSource) -> Self {
        Self {
            source,
            samples: None,
            seed: None,
            tol: None,
            stages: None,
            force: false,
            threads: None,
        }
    }
}

pub const DEFAULT_SAMPLES: usize = 50;
pub const DEFAULT_SEED: u64 = 0;

struct Resolved {
    spec: AlgebroidSpec,
    instance: Value,
    tol: Tolerances,
    stages: Vec<Stage>,
}

fn resolve(config: &RunConfig) -> Result<Resolved, ConfigError> {
    let file = match &config.source {
        InstanceSource::File(path) => Some(InstanceFile::read(path)?),
        InstanceSource::Builtin { .. } => None,
    };
    let run = file.as_ref().map(|f| f.run().clone()).unwrap_or_default();
    let samples = config.samples.or(run.samples).unwrap_or(DEFAULT_SAMPLES);
    let seed = config.seed.or(run.seed).unwrap_or(DEFAULT_SEED);
    let residual = config
        .tol
        .or(run.tol)
        .unwrap_or(Tolerances::default().residual);
    if samples == 0 {
        return Err(invalid("samples", "must be at least 1"));
    }
    if !(residual.is_finite() && residual > 0.0) {
        return Err(invalid(
            "tol",
            format!("must be a positive number, got {residual}"),
        ));
    }
    if config.threads == Some(0) {
        return Err(invalid("threads", "must be at least 1"));
    }
    let stages = match config.stages.as_ref().or(run.stages.as_ref()) {
        None => Stage::ALL.to_vec(),
        Some(names) => {
            let mut out = names
                .iter()
                .map(|n| {
                    Stage::parse(n).ok_or_else(|| invalid("stages", format!("unknown stage `{n}`")))
                })
                .collect::<Result<Vec<_>, _>>()?;
            out.sort();
            out.dedup();
            out
        }
    };
    let tol = Tolerances {
        residual,
        ..Tolerances::default()
    };
    let sampling = Sampling {
        random: samples,
        seed,
    };
    let (spec, mut instance) = match (&config.source, file) {
        (InstanceSource::File(path), Some(file)) => (
            file.build(sampling, tol)?,
            json!({ "source": "file", "name": path.display().to_string() }),
        ),
        (InstanceSource::Builtin { name, params }, _) => {
            let b = builtin(name, params, sampling, tol)?;
            (
                b.spec,
                json!({
                    "source": "builtin",
                    "name": b.name,
                    "params": b.params,
                    "expected": expected_value(&b.expected),
                }),
            )
        }
        (InstanceSource::File(_), None) => unreachable!("file source is always read"),
    };
    let meta = json!({
        "n": spec.n(),
        "m": spec.m(),
        "box": spec.chart.bounds(),
        "coordinates": spec.chart.names(),
        "samples": spec.chart.samples().len(),
        "random_samples": samples,
        "seed": seed,
        "tol": tol.residual,
        "tol_positive_definite": tol.positive_definite,
        "stages": stages.iter().map(|s| s.name()).collect::<Vec<_>>(),
    });
    if let (Value::Object(obj), Value::Object(extra)) = (&mut instance, meta) {
        obj.extend(extra);
    }
    Ok(Resolved {
        spec,
        instance,
        tol,
        stages,
    })
}

fn expected_value(e: &ExpectedVerdicts) -> Value {
    serde_json::to_value(e).unwrap_or(Value::Null)
}

fn invalid(location: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        location: location.to_string(),
        message: message.into(),
    }
}

/// Run every enabled stage in dependency order. `Err` means the input could
/// not be turned into an algebroid (exit code 2); check failures are reported
/// inside the `CheckReport` (exit code 1).
pub fn run(config: &RunConfig) -> Result<CheckReport, ConfigError> {
    let pool = {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(t) = config.threads {
            b = b.num_threads(t);
        }
        b.build().map_err(|e| invalid("threads", e.to_string()))?
    };
    pool.install(|| run_in_pool(config))
}

fn run_in_pool(config: &RunConfig) -> Result<CheckReport, ConfigError> {
    let r = resolve(config)?;
    let frames = r.spec.frames()?;
    let tol = r.tol.residual;
    let enabled = |s: Stage| r.stages.contains(&s);
    let mut stages = Vec::new();
    let mut classification = None;

    let mut blocked: Option<&str> = None;
    if enabled(Stage::Axioms) {
        let stage = axioms_stage(&frames, tol);
        if stage.status == StageStatus::Fail && !config.force {
            blocked = Some("axioms failed");
        }
        stages.push(stage);
    }

    let existence = if r
        .stages
        .iter()
        .any(|s| s.needs_existence() || *s == Stage::Existence)
    {
        match &blocked {
            Some(_) => None,
            None => Some(existence_condition(&frames, tol)),
        }
    } else {
        None
    };

    for stage in r.stages.iter().copied().filter(|s| *s != Stage::Axioms) {
        if let Some(reason) = blocked {
            stages.push(StageResult::skipped(stage.name(), reason));
            continue;
        }
        let bound_fails = matches!(existence, Some(Ok(ref v)) if v.status == ExistenceStatus::Fails)
            || matches!(existence, Some(Err(_)));
        let result = match stage {
            Stage::Axioms => continue,
            Stage::Existence => existence_stage(existence.as_ref().expect("computed when enabled")),
            s if s.needs_existence() && bound_fails => {
                StageResult::skipped(s.name(), "existence bound fails")
            }
            Stage::Construction => construction_stage(&frames, tol),
            Stage::Verification => verification_stage(&frames, tol),
            Stage::Uniqueness => {
                let (stage, c) = uniqueness_stage(&frames, tol);
                classification = c;
                stage
            }
            Stage::Averaged => averaged_stage(&frames, tol),
            Stage::Democratic => democratic_stage(&frames, tol),
            Stage::TwoMetric => two_metric_stage(&frames, tol),
        };
        stages.push(result);
    }
    Ok(CheckReport::new(r.instance, stages, classification))
}

fn errored(name: &'static str, e: &MetricError) -> StageResult {
    StageResult {
        name,
        status: StageStatus::Fail,
        max_residual: None,
        worst_point: None,
        details: json!({ "error": e.to_string() }),
    }
}

/// Largest value and its point; the earliest sample wins ties, NaN counts as largest.
fn worst(values: impl IntoIterator<Item = (f64, Vec<f64>)>) -> Option<(f64, Vec<f64>)> {
    let mut best: Option<(f64, Vec<f64>)> = None;
    for (v, x) in values {
        let replace = match &best {
            None => true,
            Some((b, _)) => !b.is_nan() && (v > *b || v.is_nan()),
        };
        if replace {
            best = Some((v, x));
        }
    }
    best
}

fn status(pass: bool) -> StageStatus {
    if pass {
        StageStatus::Pass
    } else {
        StageStatus::Fail
    }
}

fn axioms_stage(frames: &[PointFrame], tol: f64) -> StageResult {
    let report = run_axiom_suite(frames, tol);
    let top = worst(
        report
            .residuals
            .iter()
            .map(|r| (r.max_abs, r.worst_point.clone())),
    );
    StageResult {
        name: Stage::Axioms.name(),
        status: status(report.positive_quadratic_cartan),
        max_residual: top.as_ref().map(|t| t.0),
        worst_point: top.map(|t| t.1),
        details: json!({
            "checks": report.residuals,
            "positive_quadratic_cartan": report.positive_quadratic_cartan,
        }),
    }
}

fn existence_stage(v: &Result<crate::metric::ExistenceVerdict, MetricError>) -> StageResult {
    match v {
        Err(e) => errored(Stage::Existence.name(), e),
        Ok(v) => StageResult {
            name: Stage::Existence.name(),
            status: status(v.status.bound_holds()),
            max_residual: None,
            worst_point: Some(v.worst_point.clone()),
            details: json!({ "status": v.status, "max_eig": v.max_eig }),
        },
    }
}

fn construction_stage(frames: &[PointFrame], tol: f64) -> StageResult {
    let rows: Vec<Result<Value, MetricError>> = frames
        .par_iter()
        .enumerate()
        .map(|(k, f)| {
            let spec = AnchorSpectrum::of_frame(f)?;
            let plus = psi_plus(f, tol)?;
            let minus = match psi_minus(f, tol) {
                Ok(m) => Some(matrix_rows(&m)),
                Err(MetricError::NotTransitiveAtPoint { .. }) => None,
                Err(e) => return Err(e),
            };
            Ok(json!({
                "index": k,
                "x": f.x,
                "eigenvalues": spec.eigenvalues(),
                "psi_plus": matrix_rows(&plus),
                "psi_minus": minus,
            }))
        })
        .collect();
    let rows = match rows.into_iter().collect::<Result<Vec<_>, _>>() {
        Ok(r) => r,
        Err(e) => return errored(Stage::Construction.name(), &e),
    };
    let with_minus = rows.iter().filter(|r| !r["psi_minus"].is_null()).count();
    StageResult {
        name: Stage::Construction.name(),
        status: StageStatus::Pass,
        max_residual: None,
        worst_point: None,
        details: json!({
            "psi_plus_samples": rows.len(),
            "psi_minus_samples": with_minus,
            "samples": rows,
        }),
    }
}

fn verification_stage(frames: &[PointFrame], tol: f64) -> StageResult {
    type Row = (Value, bool, f64);
    let rows: Vec<Result<Row, MetricError>> = frames
        .par_iter()
        .enumerate()
        .map(|(k, f)| {
            let plus = verify_eta0(f, &assemble_eta0(f, &psi_plus(f, tol)?), tol)?;
            let minus = match psi_minus(f, tol) {
                Ok(m) => Some(verify_eta0(f, &assemble_eta0(f, &m), tol)?),
                Err(MetricError::NotTransitiveAtPoint { .. }) => None,
                Err(e) => return Err(e),
            };
            let pass = plus.pass && minus.as_ref().is_none_or(|v| v.pass);
            let r = minus.as_ref().map_or(plus.max_residual(), |v| {
                plus.max_residual().max(v.max_residual())
            });
            Ok((
                json!({ "index": k, "x": f.x, "plus": plus, "minus": minus }),
                pass,
                r,
            ))
        })
        .collect();
    let rows = match rows.into_iter().collect::<Result<Vec<_>, _>>() {
        Ok(r) => r,
        Err(e) => return errored(Stage::Verification.name(), &e),
    };
    let pass = rows.iter().all(|r| r.1);
    let top = worst(rows.iter().zip(frames).map(|(r, f)| (r.2, f.x.clone())));
    StageResult {
        name: Stage::Verification.name(),
        status: status(pass),
        max_residual: top.as_ref().map(|t| t.0),
        worst_point: top.map(|t| t.1),
        details: json!({ "samples": rows.into_iter().map(|r| r.0).collect::<Vec<_>>() }),
    }
}

fn uniqueness_stage(frames: &[PointFrame], tol: f64) -> (StageResult, Option<Classification>) {
    match classify_uniqueness(frames, tol) {
        Err(e) => (errored(Stage::Uniqueness.name(), &e), None),
        Ok(c) => {
            let pass = !c.dichotomy_violation && c.coincidence_consistent;
            let stage = StageResult {
                name: Stage::Uniqueness.name(),
                status: status(pass),
                max_residual: None,
                worst_point: None,
                details: json!({
                    "class": c.class,
                    "dichotomy_violation": c.dichotomy_violation,
                    "coincidence_consistent": c.coincidence_consistent,
                }),
            };
            (stage, Some(c))
        }
    }
}

fn averaged_stage(frames: &[PointFrame], tol: f64) -> StageResult {
    let diffs: Result<Vec<f64>, MetricError> = frames
        .par_iter()
        .map(|f| {
            let direct = assemble_eta0(f, &psi_plus(f, tol)?);
            Ok(averaged_metric(f, tol)?.max_abs_diff(&direct))
        })
        .collect();
    match diffs {
        Err(e) => errored(Stage::Averaged.name(), &e),
        Ok(d) => {
            let top = worst(d.iter().zip(frames).map(|(v, f)| (*v, f.x.clone())));
            let max = top.as_ref().map_or(0.0, |t| t.0);
            StageResult {
                name: Stage::Averaged.name(),
                status: status(max < tol),
                max_residual: Some(max),
                worst_point: top.map(|t| t.1),
                details: json!({ "compared_with": "psi_plus", "samples": d.len() }),
            }
        }
    }
}

fn democratic_stage(frames: &[PointFrame], tol: f64) -> StageResult {
    let results: Result<Vec<_>, MetricError> = frames
        .par_iter()
        .map(|f| democratic_metric(f, tol))
        .collect();
    match results {
        Err(e) => errored(Stage::Democratic.name(), &e),
        Ok(d) => {
            let top = worst(
                d.iter()
                    .zip(frames)
                    .map(|(m, f)| (m.fiber_residual.max(m.base_residual), f.x.clone())),
            );
            let rebound = worst(
                d.iter()
                    .zip(frames)
                    .map(|(m, f)| (m.rebound_max_eig, f.x.clone())),
            );
            StageResult {
                name: Stage::Democratic.name(),
                status: status(d.iter().all(|m| m.pass)),
                max_residual: top.as_ref().map(|t| t.0),
                worst_point: top.map(|t| t.1),
                details: json!({
                    "positive_definite": d.iter().all(|m| m.positive_definite),
                    "fiber_residual": d.iter().map(|m| m.fiber_residual).fold(0.0, f64::max),
                    "base_residual": d.iter().map(|m| m.base_residual).fold(0.0, f64::max),
                    "rebound_max_eig": rebound.as_ref().map(|t| t.0),
                    "rebound_worst_point": rebound.map(|t| t.1),
                    "rebound_holds": d.iter().all(|m| m.rebound_max_eig <= 1.0 + tol),
                }),
            }
        }
    }
}

fn two_metric_stage(frames: &[PointFrame], tol: f64) -> StageResult {
    let results: Result<Vec<_>, MetricError> = frames
        .par_iter()
        .map(|f| two_metric_bound(f, tol))
        .collect();
    match results {
        Err(e) => errored(Stage::TwoMetric.name(), &e),
        Ok(b) => {
            let top = worst(b.iter().zip(frames).map(|(v, f)| (v.max_eig, f.x.clone())));
            StageResult {
                name: Stage::TwoMetric.name(),
                status: StageStatus::Info,
                max_residual: None,
                worst_point: top.as_ref().map(|t| t.1.clone()),
                details: json!({
                    "holds": b.iter().all(|v| v.holds),
                    "max_eig": top.map(|t| t.0),
                }),
            }
        }
    }
}
