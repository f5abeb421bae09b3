//! Algebroid data over one coordinate chart.
//!
//! Index conventions used throughout the crate (all 0-based in code):
//!
//! * anchor `ρ^i_a`: `frame.p[(i, a)]`, partials `frame.dp[[i, a, j]] = ∂_j ρ^i_a`
//! * structure functions `C^c_{ab}`: `frame.c[[c, a, b]]`, `[e_a, e_b] = C^c_{ab} e_c`
//! * connection `Γ^b_{ia}`: `frame.gamma[[b, i, a]]`, `∇_{∂_i} e_a = Γ^b_{ia} e_b`
//! * base metric `g_{ij}` and fiber metric `κ_{ab}` with partials on the last axis.

use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::{Array3, Array4, ArrayD, IxDyn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::expr::{ExprError, ScalarField};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("invalid chart: {0}")]
    Chart(String),
    #[error("{invariant} violated (residual {residual:e}) at {point:?}")]
    Validation {
        invariant: String,
        residual: f64,
        point: Vec<f64>,
    },
    #[error("shape mismatch for {what}: expected {expected} entries, got {got}")]
    Shape {
        what: String,
        expected: usize,
        got: usize,
    },
    #[error("{location}: {source}")]
    Expr {
        location: String,
        #[source]
        source: ExprError,
    },
}

/// The local model of the base: named coordinates, a sampling box and sample points.
#[derive(Debug, Clone)]
pub struct Chart {
    names: Vec<String>,
    bounds: Vec<(f64, f64)>,
    samples: Vec<Vec<f64>>,
}

impl Chart {
    pub fn new(names: Vec<String>, bounds: Vec<(f64, f64)>) -> Result<Self, GeometryError> {
        if names.len() != bounds.len() {
            return Err(GeometryError::Chart(format!(
                "{} coordinate names but {} box intervals",
                names.len(),
                bounds.len()
            )));
        }
        for (i, name) in names.iter().enumerate() {
            if names[..i].contains(name) {
                return Err(GeometryError::Chart(format!(
                    "duplicate coordinate `{name}`"
                )));
            }
            if !name
                .chars()
                .next()
                .is_some_and(|c| c.is_alphabetic() || c == '_')
                || !name.chars().all(|c| c.is_alphanumeric() || c == '_')
                || matches!(name.as_str(), "sin" | "cos" | "exp" | "sqrt")
            {
                return Err(GeometryError::Chart(format!(
                    "invalid coordinate name `{name}`"
                )));
            }
        }
        for (name, &(lo, hi)) in names.iter().zip(&bounds) {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(GeometryError::Chart(format!(
                    "degenerate interval [{lo}, {hi}] for `{name}`"
                )));
            }
        }
        Ok(Self {
            names,
            bounds,
            samples: Vec::new(),
        })
    }

    /// Chart with coordinates `x1..xn` on the cube `[-h, h]^n`.
    pub fn cube(n: usize, half_width: f64) -> Result<Self, GeometryError> {
        Self::new(
            (1..=n).map(|i| format!("x{i}")).collect(),
            vec![(-half_width, half_width); n],
        )
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn samples(&self) -> &[Vec<f64>] {
        &self.samples
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(&self.bounds)
                .all(|(&v, &(lo, hi))| lo <= v && v <= hi)
    }

    pub fn add_samples(&mut self, points: Vec<Vec<f64>>) -> Result<(), GeometryError> {
        for p in &points {
            if !self.contains(p) {
                return Err(GeometryError::Chart(format!(
                    "sample {p:?} lies outside the box"
                )));
            }
        }
        self.samples.extend(points);
        Ok(())
    }

    /// All `2^n` corners of the box plus its center.
    pub fn corners_and_center(&self) -> Vec<Vec<f64>> {
        let n = self.dim();
        let mut out: Vec<Vec<f64>> = (0..1usize << n)
            .map(|mask| {
                self.bounds
                    .iter()
                    .enumerate()
                    .map(|(i, &(lo, hi))| if mask >> i & 1 == 1 { hi } else { lo })
                    .collect()
            })
            .collect();
        out.push(
            self.bounds
                .iter()
                .map(|&(lo, hi)| 0.5 * (lo + hi))
                .collect(),
        );
        out
    }

    /// `count` uniform points in the box from a ChaCha8 stream seeded by `seed`.
    pub fn random_points(&self, count: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count)
            .map(|_| {
                self.bounds
                    .iter()
                    .map(|&(lo, hi)| lo + (hi - lo) * rng.gen::<f64>())
                    .collect()
            })
            .collect()
    }
}

/// A dense tensor of scalar fields, stored row-major.
#[derive(Debug, Clone)]
pub struct FieldTensor {
    shape: Vec<usize>,
    fields: Vec<ScalarField>,
}

impl FieldTensor {
    pub fn new(shape: Vec<usize>, fields: Vec<ScalarField>) -> Result<Self, GeometryError> {
        let expected: usize = shape.iter().product();
        if fields.len() != expected {
            return Err(GeometryError::Shape {
                what: format!("tensor of shape {shape:?}"),
                expected,
                got: fields.len(),
            });
        }
        Ok(Self { shape, fields })
    }

    pub fn zeros(shape: Vec<usize>, coords: &[String]) -> Self {
        let len = shape.iter().product();
        Self {
            shape,
            fields: vec![ScalarField::constant(0.0, coords); len],
        }
    }

    pub fn identity(k: usize, coords: &[String]) -> Self {
        let fields = (0..k * k)
            .map(|idx| ScalarField::constant(if idx / k == idx % k { 1.0 } else { 0.0 }, coords))
            .collect();
        Self {
            shape: vec![k, k],
            fields,
        }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn fields(&self) -> &[ScalarField] {
        &self.fields
    }

    fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter()
            .zip(&self.shape)
            .fold(0, |acc, (&i, &dim)| acc * dim + i)
    }

    pub fn get(&self, idx: &[usize]) -> &ScalarField {
        &self.fields[self.flat_index(idx)]
    }

    pub fn set(&mut self, idx: &[usize], f: ScalarField) {
        let k = self.flat_index(idx);
        self.fields[k] = f;
    }

    /// Values (shape `S`) and partials (shape `S × n`) at `x`.
    fn eval_jet(&self, x: &[f64], what: &str) -> Result<(ArrayD<f64>, ArrayD<f64>), GeometryError> {
        let n = x.len();
        let mut values = Vec::with_capacity(self.fields.len());
        let mut derivs = Vec::with_capacity(self.fields.len() * n);
        for (k, f) in self.fields.iter().enumerate() {
            let (v, g) = f.eval_with_grad(x).map_err(|source| GeometryError::Expr {
                location: format!("{what}{:?}", self.unflatten(k)),
                source,
            })?;
            values.push(v);
            derivs.extend(g);
        }
        let mut dshape = self.shape.clone();
        dshape.push(n);
        Ok((
            ArrayD::from_shape_vec(IxDyn(&self.shape), values).expect("shape"),
            ArrayD::from_shape_vec(IxDyn(&dshape), derivs).expect("shape"),
        ))
    }

    fn unflatten(&self, mut k: usize) -> Vec<usize> {
        let mut idx = vec![0; self.shape.len()];
        for (slot, &dim) in idx.iter_mut().zip(&self.shape).rev() {
            *slot = k % dim;
            k /= dim;
        }
        idx
    }
}

/// Tolerances shared by validation and all residual checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Absolute tolerance on residuals.
    pub residual: f64,
    /// Minimum eigenvalue for a metric to count as positive-definite.
    pub positive_definite: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            residual: 1e-9,
            positive_definite: 1e-12,
        }
    }
}

/// Anchor, bracket, connection and the two metrics of a candidate
/// quadratic Lie algebroid, as fields over a chart.
#[derive(Debug, Clone)]
pub struct AlgebroidSpec {
    pub chart: Chart,
    pub rank: usize,
    /// `n × m`
    pub anchor: FieldTensor,
    /// `[c, a, b]`
    pub structure: FieldTensor,
    /// `[b, i, a]`
    pub connection: FieldTensor,
    /// `n × n`
    pub base_metric: FieldTensor,
    /// `m × m`
    pub fiber_metric: FieldTensor,
}

/// All input tensors and their first partials at one point.
#[derive(Debug, Clone)]
pub struct PointFrame {
    pub x: Vec<f64>,
    pub p: DMatrix<f64>,
    pub dp: Array3<f64>,
    pub c: Array3<f64>,
    pub dc: Array4<f64>,
    pub gamma: Array3<f64>,
    pub dgamma: Array4<f64>,
    pub g: DMatrix<f64>,
    pub dg: Array3<f64>,
    pub kappa: DMatrix<f64>,
    pub dkappa: Array3<f64>,
}

impl PointFrame {
    pub fn n(&self) -> usize {
        self.p.nrows()
    }

    pub fn m(&self) -> usize {
        self.p.ncols()
    }
}

fn to_matrix(a: &ArrayD<f64>) -> DMatrix<f64> {
    let s = a.shape();
    DMatrix::from_fn(s[0], s[1], |i, j| a[[i, j]])
}

pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return f64::INFINITY;
    }
    SymmetricEigen::new(m.clone()).eigenvalues.min()
}

impl AlgebroidSpec {
    /// Checks shapes, then the pointwise invariants at every chart sample:
    /// antisymmetry of `C`, symmetry and positivity of `g` and `κ`.
    #[allow(clippy::too_many_arguments)]
    pub fn load(
        chart: Chart,
        rank: usize,
        anchor: FieldTensor,
        structure: FieldTensor,
        connection: FieldTensor,
        base_metric: FieldTensor,
        fiber_metric: FieldTensor,
        tol: Tolerances,
    ) -> Result<Self, GeometryError> {
        let n = chart.dim();
        let m = rank;
        for (what, t, shape) in [
            ("anchor", &anchor, vec![n, m]),
            ("structure", &structure, vec![m, m, m]),
            ("connection", &connection, vec![m, n, m]),
            ("g", &base_metric, vec![n, n]),
            ("kappa", &fiber_metric, vec![m, m]),
        ] {
            if t.shape() != shape.as_slice() {
                return Err(GeometryError::Shape {
                    what: format!("{what} (shape {shape:?})"),
                    expected: shape.iter().product(),
                    got: t.fields().len(),
                });
            }
            if let Some(f) = t.fields().iter().find(|f| f.coords() != chart.names()) {
                return Err(GeometryError::Chart(format!(
                    "{what} entry `{}` is bound to coordinates {:?}",
                    f.source(),
                    f.coords()
                )));
            }
        }
        let spec = Self {
            chart,
            rank,
            anchor,
            structure,
            connection,
            base_metric,
            fiber_metric,
        };
        spec.validate(tol)?;
        Ok(spec)
    }

    pub fn n(&self) -> usize {
        self.chart.dim()
    }

    pub fn m(&self) -> usize {
        self.rank
    }

    fn validate(&self, tol: Tolerances) -> Result<(), GeometryError> {
        let m = self.m();
        let mut worst: [(f64, Vec<f64>); 3] = Default::default();
        let mut pd_fail: Option<(String, f64, Vec<f64>)> = None;
        for x in self.chart.samples() {
            let f = self.eval_frame(x)?;
            let mut anti = 0.0f64;
            for c in 0..m {
                for a in 0..m {
                    for b in a..m {
                        anti = anti.max((f.c[[c, a, b]] + f.c[[c, b, a]]).abs());
                    }
                }
            }
            let sym = |mat: &DMatrix<f64>| (mat - mat.transpose()).amax();
            for (slot, r) in worst.iter_mut().zip([anti, sym(&f.g), sym(&f.kappa)]) {
                if r > slot.0 || slot.1.is_empty() {
                    *slot = (r, x.clone());
                }
            }
            if pd_fail.is_none() {
                for (which, mat) in [("g", &f.g), ("kappa", &f.kappa)] {
                    let sym_part = 0.5 * (mat + mat.transpose());
                    let e = min_eigenvalue(&sym_part);
                    if e.is_nan() || e <= tol.positive_definite {
                        pd_fail = Some((which.to_string(), e, x.clone()));
                        break;
                    }
                }
            }
        }
        for ((r, point), invariant) in worst.iter().zip([
            "antisymmetry of structure functions C^c_ab = -C^c_ba",
            "symmetry of base metric g",
            "symmetry of fiber metric kappa",
        ]) {
            if *r >= tol.residual {
                return Err(GeometryError::Validation {
                    invariant: invariant.to_string(),
                    residual: *r,
                    point: point.clone(),
                });
            }
        }
        if let Some((which, e, point)) = pd_fail {
            return Err(GeometryError::Validation {
                invariant: format!("positivity of {which} (minimum eigenvalue {e:e})"),
                residual: e,
                point,
            });
        }
        Ok(())
    }

    pub fn eval_frame(&self, x: &[f64]) -> Result<PointFrame, GeometryError> {
        let dim3 = |a: ArrayD<f64>| a.into_dimensionality::<ndarray::Ix3>().expect("rank 3");
        let dim4 = |a: ArrayD<f64>| a.into_dimensionality::<ndarray::Ix4>().expect("rank 4");
        let (p, dp) = self.anchor.eval_jet(x, "anchor")?;
        let (c, dc) = self.structure.eval_jet(x, "structure")?;
        let (gamma, dgamma) = self.connection.eval_jet(x, "connection")?;
        let (g, dg) = self.base_metric.eval_jet(x, "g")?;
        let (kappa, dkappa) = self.fiber_metric.eval_jet(x, "kappa")?;
        Ok(PointFrame {
            x: x.to_vec(),
            p: to_matrix(&p),
            dp: dim3(dp),
            c: dim3(c),
            dc: dim4(dc),
            gamma: dim3(gamma),
            dgamma: dim4(dgamma),
            g: to_matrix(&g),
            dg: dim3(dg),
            kappa: to_matrix(&kappa),
            dkappa: dim3(dkappa),
        })
    }

    /// Frames at every chart sample, in sample order.
    pub fn frames(&self) -> Result<Vec<PointFrame>, GeometryError> {
        self.chart
            .samples()
            .par_iter()
            .map(|x| self.eval_frame(x))
            .collect()
    }
}

/// `(ᵅ∇_{e_a} e_b)^c = C^c_{ab} + ρ^i_b Γ^c_{ia}`, indexed `[a, b, c]`.
pub fn alpha_connection(f: &PointFrame) -> Array3<f64> {
    let (n, m) = (f.n(), f.m());
    Array3::from_shape_fn((m, m, m), |(a, b, c)| {
        f.c[[c, a, b]]
            + (0..n)
                .map(|i| f.p[(i, b)] * f.gamma[[c, i, a]])
                .sum::<f64>()
    })
}

/// `(ᵗ∇_{e_a} ∂_i)^j = Γ^b_{ia} ρ^j_b − ∂_i ρ^j_a`, indexed `[a, i, j]`.
pub fn tau_connection(f: &PointFrame) -> Array3<f64> {
    let (n, m) = (f.n(), f.m());
    Array3::from_shape_fn((m, n, n), |(a, i, j)| {
        (0..m)
            .map(|b| f.gamma[[b, i, a]] * f.p[(j, b)])
            .sum::<f64>()
            - f.dp[[j, a, i]]
    })
}

/// Basic curvature `R(e_a, e_b)(∂_i)^c`, indexed `[a, b, i, c]`:
///
/// `∇_i[e_a,e_b] − [∇_i e_a, e_b] − [e_a, ∇_i e_b] − ∇_{ᵗ∇_b ∂_i} e_a + ∇_{ᵗ∇_a ∂_i} e_b`
///
/// with `[f e_d, e_b] = f [e_d, e_b] − (ρ(e_b) f) e_d`.
pub fn basic_curvature(f: &PointFrame) -> Array4<f64> {
    let (n, m) = (f.n(), f.m());
    let tau = tau_connection(f);
    // ρ(e_a)·h for a field h with partials dh[j]
    let along =
        |a: usize, dh: &dyn Fn(usize) -> f64| (0..n).map(|j| f.p[(j, a)] * dh(j)).sum::<f64>();
    Array4::from_shape_fn((m, m, n, m), |(a, b, i, c)| {
        let d_bracket = f.dc[[c, a, b, i]]
            + (0..m)
                .map(|d| f.c[[d, a, b]] * f.gamma[[c, i, d]])
                .sum::<f64>();
        let left = (0..m)
            .map(|d| f.gamma[[d, i, a]] * f.c[[c, d, b]])
            .sum::<f64>()
            - along(b, &|j| f.dgamma[[c, i, a, j]]);
        let right = (0..m)
            .map(|d| f.gamma[[d, i, b]] * f.c[[c, a, d]])
            .sum::<f64>()
            + along(a, &|j| f.dgamma[[c, i, b, j]]);
        let shift_a = (0..n)
            .map(|j| tau[[b, i, j]] * f.gamma[[c, j, a]])
            .sum::<f64>();
        let shift_b = (0..n)
            .map(|j| tau[[a, i, j]] * f.gamma[[c, j, b]])
            .sum::<f64>();
        d_bracket - left - right - shift_a + shift_b
    })
}
