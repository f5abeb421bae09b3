//! TOML instance files.
//!
//! ```toml
//! [chart]
//! dim = 2
//! names = ["x", "y"]            # optional, defaults to x1..xn
//! box = [[-1, 1], [-1, 1]]
//! samples = [[0.5, 0.25]]       # optional extra points
//!
//! [algebroid]
//! rank = 1
//! anchor = ["-y", "x"]          # row-major n×m, entry (i, a) is ρ^i_a
//! structure = [[1, 2, 3, "1"]]  # (a, b, c, C^c_ab), 1-based; (b, a, c) is filled in
//! connection = [[1, 1, 1, "x"]] # (i, a, b, Γ^b_ia), 1-based
//!
//! [metrics]
//! g = "identity"
//! kappa = [["1"]]
//!
//! [run]
//! samples = 50
//! seed = 0
//! tol = 1e-9
//! stages = ["axioms", "existence"]
//! ```
//!
//! Expression entries may be strings or plain numbers.

use std::collections::BTreeSet;
use std::path::Path;

use serde::Deserialize;
use thiserror::Error;

use crate::expr::{ExprError, ScalarField};
use crate::geometry::{AlgebroidSpec, Chart, FieldTensor, GeometryError, Tolerances};
use crate::instances::{InstanceError, Sampling};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("malformed instance file: {0}")]
    Parse(String),
    #[error("{location}: {message}")]
    Invalid { location: String, message: String },
    #[error("{location}: {source}")]
    Expr {
        location: String,
        #[source]
        source: ExprError,
    },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Instance(#[from] InstanceError),
}

fn invalid(location: impl Into<String>, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        location: location.into(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum Entry {
    Text(String),
    Number(f64),
}

impl Entry {
    fn field(&self, coords: &[String], location: String) -> Result<ScalarField, ConfigError> {
        match self {
            Entry::Number(v) => Ok(ScalarField::constant(*v, coords)),
            Entry::Text(s) => ScalarField::parse(s, coords)
                .map_err(|source| ConfigError::Expr { location, source }),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum MatrixDoc {
    Shorthand(String),
    Rows(Vec<Vec<Entry>>),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChartDoc {
    dim: usize,
    names: Option<Vec<String>>,
    #[serde(rename = "box")]
    bounds: Vec<(f64, f64)>,
    #[serde(default)]
    samples: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct AlgebroidDoc {
    rank: usize,
    anchor: Vec<Entry>,
    #[serde(default)]
    structure: Vec<(usize, usize, usize, Entry)>,
    #[serde(default)]
    connection: Vec<(usize, usize, usize, Entry)>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct MetricsDoc {
    g: Option<MatrixDoc>,
    kappa: Option<MatrixDoc>,
}

/// Settings from the `[run]` table. Command-line flags take precedence.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub stages: Option<Vec<String>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    chart: ChartDoc,
    algebroid: AlgebroidDoc,
    #[serde(default)]
    metrics: MetricsDoc,
    #[serde(default)]
    run: RunSection,
}

/// A parsed but not yet sampled instance file.
#[derive(Debug, Clone)]
pub struct InstanceFile {
    doc: Document,
}

impl InstanceFile {
    pub fn read(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let doc: Document = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        Ok(Self { doc })
    }

    pub fn run(&self) -> &RunSection {
        &self.doc.run
    }

    /// Samples are the explicit `[chart] samples`, then the box corners and
    /// center, then `sampling.random` seeded points.
    pub fn build(&self, sampling: Sampling, tol: Tolerances) -> Result<AlgebroidSpec, ConfigError> {
        let chart = self.chart(sampling)?;
        let names = chart.names().to_vec();
        let n = chart.dim();
        let a = &self.doc.algebroid;
        let m = a.rank;
        if m == 0 {
            return Err(invalid("algebroid.rank", "must be at least 1"));
        }

        if a.anchor.len() != n * m {
            return Err(invalid(
                "algebroid.anchor",
                format!(
                    "expected {n}×{m} = {} entries, got {}",
                    n * m,
                    a.anchor.len()
                ),
            ));
        }
        let anchor = a
            .anchor
            .iter()
            .enumerate()
            .map(|(k, e)| {
                e.field(
                    &names,
                    format!("algebroid.anchor[{k}] (i={}, a={})", k / m + 1, k % m + 1),
                )
            })
            .collect::<Result<Vec<_>, _>>()?;
        let anchor = FieldTensor::new(vec![n, m], anchor)?;

        let mut structure = FieldTensor::zeros(vec![m, m, m], &names);
        let mut given = BTreeSet::new();
        for (k, (ia, ib, ic, e)) in a.structure.iter().enumerate() {
            let location = format!("algebroid.structure[{k}]");
            let [ia, ib, ic] = one_based(&location, [(*ia, m), (*ib, m), (*ic, m)])?;
            if !given.insert((ia, ib, ic)) {
                return Err(invalid(location, "entry given twice"));
            }
            structure.set(&[ic, ia, ib], e.field(&names, location)?);
        }
        for &(ia, ib, ic) in &given {
            if ia != ib && !given.contains(&(ib, ia, ic)) {
                let src = structure.get(&[ic, ia, ib]).source().to_string();
                let neg = ScalarField::parse(&format!("-({src})"), &names).map_err(|source| {
                    ConfigError::Expr {
                        location: "algebroid.structure".into(),
                        source,
                    }
                })?;
                structure.set(&[ic, ib, ia], neg);
            }
        }

        let mut connection = FieldTensor::zeros(vec![m, n, m], &names);
        let mut seen = BTreeSet::new();
        for (k, (i, ia, ib, e)) in a.connection.iter().enumerate() {
            let location = format!("algebroid.connection[{k}]");
            let [i, ia, ib] = one_based(&location, [(*i, n), (*ia, m), (*ib, m)])?;
            if !seen.insert((i, ia, ib)) {
                return Err(invalid(location, "entry given twice"));
            }
            connection.set(&[ib, i, ia], e.field(&names, location)?);
        }

        let g = matrix(self.doc.metrics.g.as_ref(), "metrics.g", n, &names)?;
        let kappa = matrix(self.doc.metrics.kappa.as_ref(), "metrics.kappa", m, &names)?;
        Ok(AlgebroidSpec::load(
            chart, m, anchor, structure, connection, g, kappa, tol,
        )?)
    }

    fn chart(&self, sampling: Sampling) -> Result<Chart, ConfigError> {
        let c = &self.doc.chart;
        if c.dim == 0 {
            return Err(invalid("chart.dim", "must be at least 1"));
        }
        if c.bounds.len() != c.dim {
            return Err(invalid(
                "chart.box",
                format!("expected {} intervals, got {}", c.dim, c.bounds.len()),
            ));
        }
        let names = match &c.names {
            Some(names) if names.len() != c.dim => {
                return Err(invalid(
                    "chart.names",
                    format!("expected {} names, got {}", c.dim, names.len()),
                ))
            }
            Some(names) => names.clone(),
            None => (1..=c.dim).map(|i| format!("x{i}")).collect(),
        };
        let mut chart = Chart::new(names, c.bounds.clone())?;
        let points = [
            c.samples.clone(),
            chart.corners_and_center(),
            chart.random_points(sampling.random, sampling.seed),
        ]
        .concat();
        chart.add_samples(points)?;
        Ok(chart)
    }
}

fn one_based<const K: usize>(
    location: &str,
    idx: [(usize, usize); K],
) -> Result<[usize; K], ConfigError> {
    let mut out = [0; K];
    for (slot, (v, max)) in out.iter_mut().zip(idx) {
        if v == 0 || v > max {
            return Err(invalid(location, format!("index {v} outside 1..={max}")));
        }
        *slot = v - 1;
    }
    Ok(out)
}

fn matrix(
    doc: Option<&MatrixDoc>,
    location: &str,
    k: usize,
    names: &[String],
) -> Result<FieldTensor, ConfigError> {
    match doc {
        None => Ok(FieldTensor::identity(k, names)),
        Some(MatrixDoc::Shorthand(s)) if s == "identity" => Ok(FieldTensor::identity(k, names)),
        Some(MatrixDoc::Shorthand(s)) => Err(invalid(
            location,
            format!("`{s}` is not a matrix; use \"identity\" or a list of rows"),
        )),
        Some(MatrixDoc::Rows(rows)) => {
            if rows.len() != k || rows.iter().any(|r| r.len() != k) {
                return Err(invalid(location, format!("expected a {k}×{k} matrix")));
            }
            let fields = rows
                .iter()
                .enumerate()
                .flat_map(|(i, r)| r.iter().enumerate().map(move |(j, e)| (i, j, e)))
                .map(|(i, j, e)| e.field(names, format!("{location}[{}][{}]", i + 1, j + 1)))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(FieldTensor::new(vec![k, k], fields)?)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::axioms::{run_axiom_suite, AxiomCheck};

    const SO3: &str = r#"
[chart]
dim = 3
box = [[-0.5, 0.5], [-0.5, 0.5], [-0.5, 0.5]]

[algebroid]
rank = 3
anchor = ["0", "-x3", "x2",
          "x3", 0, "-x1",
          "-x2", "x1", "0"]
structure = [[1, 2, 3, "1"], [2, 3, 1, 1], [3, 1, 2, "1"]]

[metrics]
g = "identity"
kappa = [[1, 0, 0], [0, 1, 0], [0, 0, 1]]

[run]
samples = 10
seed = 4
"#;

    fn build(text: &str) -> Result<AlgebroidSpec, ConfigError> {
        InstanceFile::parse(text)?.build(Sampling { random: 5, seed: 1 }, Tolerances::default())
    }

    #[test]
    fn so3_file_is_a_quadratic_algebroid() {
        let file = InstanceFile::parse(SO3).unwrap();
        assert_eq!(file.run().samples, Some(10));
        let spec = build(SO3).unwrap();
        assert_eq!(spec.chart.samples().len(), 9 + 5);
        let f = spec.eval_frame(&[0.1, 0.2, 0.3]).unwrap();
        assert_eq!(f.c[[0, 2, 1]], -1.0);
        assert_eq!(f.c[[2, 0, 1]], 1.0);
        let report = run_axiom_suite(&spec.frames().unwrap(), 1e-9);
        for check in AxiomCheck::ALL {
            assert!(report.residual(check).pass, "{check:?}");
        }
    }

    #[test]
    fn connection_entries_are_placed_by_index_meaning() {
        let text = r#"
[chart]
dim = 2
names = ["u", "v"]
box = [[0, 1], [0, 1]]
samples = [[0.5, 0.5]]
[algebroid]
rank = 2
anchor = [0, 0, 0, 0]
connection = [[2, 1, 2, "u*v"]]
"#;
        let spec = build(text).unwrap();
        assert_eq!(spec.chart.samples()[0], vec![0.5, 0.5]);
        let f = spec.eval_frame(&[0.5, 0.5]).unwrap();
        assert_eq!(f.gamma[[1, 1, 0]], 0.25);
        assert_eq!(f.gamma.iter().filter(|v| **v != 0.0).count(), 1);
    }

    #[test]
    fn errors_carry_locations() {
        let bad_expr = SO3.replace("\"-x3\", \"x2\"", "\"-x3\", \"x2 +\"");
        match build(&bad_expr) {
            Err(ConfigError::Expr {
                location,
                source: ExprError::Syntax { .. },
            }) => {
                assert!(location.starts_with("algebroid.anchor[2]"), "{location}")
            }
            other => panic!("{other:?}"),
        }
        let unknown = SO3.replace("\"x1\", \"0\"", "\"y\", \"0\"");
        assert!(matches!(
            build(&unknown),
            Err(ConfigError::Expr {
                source: ExprError::UnknownIdentifier { .. },
                ..
            })
        ));
        let twice = SO3.replace("[3, 1, 2, \"1\"]", "[1, 2, 3, \"1\"]");
        assert!(matches!(build(&twice), Err(ConfigError::Invalid { .. })));
        let range = SO3.replace("[3, 1, 2, \"1\"]", "[4, 1, 2, \"1\"]");
        match build(&range) {
            Err(ConfigError::Invalid { location, .. }) => {
                assert_eq!(location, "algebroid.structure[2]")
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            build("[chart]\ndim = "),
            Err(ConfigError::Parse(_))
        ));
        let extra = SO3.replace("[run]", "[run]\nthreads = 3");
        assert!(matches!(build(&extra), Err(ConfigError::Parse(_))));
        let not_pd = SO3.replace(
            "[[1, 0, 0], [0, 1, 0], [0, 0, 1]]",
            "[[1, 0, 0], [0, -1, 0], [0, 0, 1]]",
        );
        assert!(matches!(build(&not_pd), Err(ConfigError::Geometry(_))));
    }
}
