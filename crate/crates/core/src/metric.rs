//! Compatible bi-invariant metrics at the identity section.
//!
//! At a point `x` the tangent space of the groupoid along the units splits as
//! `TM ⊕ A`, with `A` identified with the target-vertical directions. Vectors
//! are written `(v, ξ)` with `v ∈ R^n`, `ξ ∈ R^m`, and a metric `η₀` is stored
//! as the blocks `TT`, `TA`, `AA`.
//!
//! The operator `ρρ*` on `TM` is self-adjoint for `g` only, so every spectral
//! computation runs in a `g`-orthonormal frame: with `g = L Lᵀ` the matrix
//! `S = Lᵀ (P κ⁻¹ Pᵀ) L` is symmetric and `f(ρρ*) = L⁻ᵀ Q f(Λ) Qᵀ Lᵀ`.

use nalgebra::{Cholesky, DMatrix, Dyn, SymmetricEigen};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::geometry::PointFrame;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricError {
    #[error("{which} is not positive-definite")]
    SingularMetric { which: &'static str },
    #[error("bound rho rho* <= 1 violated: largest eigenvalue {max_eig}")]
    BoundViolation { max_eig: f64 },
    #[error("rho rho* has eigenvalue {min_eig} (not transitive at this point)")]
    NotTransitiveAtPoint { min_eig: f64 },
}

fn cholesky(m: &DMatrix<f64>, which: &'static str) -> Result<Cholesky<f64, Dyn>, MetricError> {
    Cholesky::new(m.clone()).ok_or(MetricError::SingularMetric { which })
}

fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    0.5 * (m + m.transpose())
}

fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).amax()
}

/// `ρ* = κ⁻¹ Pᵀ g`, the adjoint of the anchor for `g` and `κ`.
pub fn conjugate_anchor(
    p: &DMatrix<f64>,
    g: &DMatrix<f64>,
    kappa: &DMatrix<f64>,
) -> Result<DMatrix<f64>, MetricError> {
    cholesky(g, "g")?;
    Ok(cholesky(kappa, "kappa")?.solve(&(p.transpose() * g)))
}

pub fn rho_star(f: &PointFrame) -> Result<DMatrix<f64>, MetricError> {
    conjugate_anchor(&f.p, &f.g, &f.kappa)
}

/// Spectral decomposition of `ρρ*` in a `g`-orthonormal frame.
#[derive(Debug, Clone)]
pub struct AnchorSpectrum {
    /// Lower Cholesky factor of `g`.
    l: DMatrix<f64>,
    vectors: DMatrix<f64>,
    /// Ascending.
    eigenvalues: Vec<f64>,
    rho_star: DMatrix<f64>,
}

impl AnchorSpectrum {
    pub fn new(
        p: &DMatrix<f64>,
        g: &DMatrix<f64>,
        kappa: &DMatrix<f64>,
    ) -> Result<Self, MetricError> {
        let l = cholesky(g, "g")?.l();
        let kchol = cholesky(kappa, "kappa")?;
        let rho_star = kchol.solve(&(p.transpose() * g));
        // Lᵀ P κ⁻¹ Pᵀ L = (Lᵀ P) κ⁻¹ (Lᵀ P)ᵀ
        let lp = l.transpose() * p;
        let s = symmetrize(&(&lp * kchol.solve(&lp.transpose())));
        let eig = SymmetricEigen::new(s);
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let eigenvalues = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let vectors = DMatrix::from_fn(eig.eigenvectors.nrows(), order.len(), |i, j| {
            eig.eigenvectors[(i, order[j])]
        });
        Ok(Self {
            l,
            vectors,
            eigenvalues,
            rho_star,
        })
    }

    pub fn of_frame(f: &PointFrame) -> Result<Self, MetricError> {
        Self::new(&f.p, &f.g, &f.kappa)
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }

    pub fn rho_star(&self) -> &DMatrix<f64> {
        &self.rho_star
    }

    /// `h(ρρ*)` as an `n × n` matrix acting on `TM`.
    pub fn apply(&self, h: impl Fn(f64) -> f64) -> DMatrix<f64> {
        let n = self.l.nrows();
        let mut scaled = self.vectors.clone();
        for (j, &lam) in self.eigenvalues.iter().enumerate() {
            let v = h(lam);
            scaled.column_mut(j).scale_mut(v);
        }
        let inner = scaled * self.vectors.transpose();
        let lt = self.l.transpose();
        let mut out = &inner * &lt;
        if n > 0 {
            lt.solve_upper_triangular_mut(&mut out);
        }
        out
    }

    /// Eigenvalues clamped onto `[0, 1]` for square roots of `1 − ρρ*`.
    /// Anything above `1 + tol` is a bound violation.
    fn clamped_unit(&self, tol: f64) -> Result<Self, MetricError> {
        let max = self.max_eigenvalue();
        if max > 1.0 + tol {
            return Err(MetricError::BoundViolation { max_eig: max });
        }
        let mut out = self.clone();
        for lam in &mut out.eigenvalues {
            *lam = lam.clamp(0.0, 1.0);
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExistenceStatus {
    Holds,
    BoundarySaturated,
    Fails,
}

impl ExistenceStatus {
    /// The square root of `1 − ρρ*` exists on the samples.
    pub fn bound_holds(self) -> bool {
        !matches!(self, ExistenceStatus::Fails)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExistenceVerdict {
    pub status: ExistenceStatus,
    pub max_eig: f64,
    pub worst_point: Vec<f64>,
}

/// Largest eigenvalue of `ρρ*` over the frames, and whether `1 − ρρ*` has a
/// square root everywhere (`Holds`), touches the boundary `ρρ* = 1` somewhere
/// (`BoundarySaturated`), or leaves the unit ball (`Fails`).
pub fn existence_condition(
    frames: &[PointFrame],
    tol: f64,
) -> Result<ExistenceVerdict, MetricError> {
    let maxima: Vec<f64> = frames
        .par_iter()
        .map(|f| AnchorSpectrum::of_frame(f).map(|s| s.max_eigenvalue()))
        .collect::<Result<_, _>>()?;
    let mut max_eig = f64::NEG_INFINITY;
    let mut worst = 0;
    for (k, &e) in maxima.iter().enumerate() {
        if e > max_eig {
            max_eig = e;
            worst = k;
        }
    }
    let status = if maxima.is_empty() {
        max_eig = 0.0;
        ExistenceStatus::Holds
    } else if max_eig > 1.0 + tol {
        ExistenceStatus::Fails
    } else if maxima.iter().any(|e| (e - 1.0).abs() <= tol) {
        ExistenceStatus::BoundarySaturated
    } else {
        ExistenceStatus::Holds
    };
    Ok(ExistenceVerdict {
        status,
        max_eig,
        worst_point: frames.get(worst).map(|f| f.x.clone()).unwrap_or_default(),
    })
}

/// `(1 − ρρ*)^{1/2}`, self-adjoint and positive semi-definite for `g`.
pub fn sqrt_one_minus(f: &PointFrame, tol: f64) -> Result<DMatrix<f64>, MetricError> {
    let spec = AnchorSpectrum::of_frame(f)?.clamped_unit(tol)?;
    Ok(spec.apply(|lam| (1.0 - lam).sqrt()))
}

/// `Ψ₊ = −ρ* (1 + (1 − ρρ*)^{1/2})⁻¹`; defined wherever the bound holds.
pub fn psi_plus(f: &PointFrame, tol: f64) -> Result<DMatrix<f64>, MetricError> {
    let spec = AnchorSpectrum::of_frame(f)?.clamped_unit(tol)?;
    let inv = spec.apply(|lam| 1.0 / (1.0 + (1.0 - lam).sqrt()));
    Ok(-(spec.rho_star() * inv))
}

/// `Ψ₋ = −ρ* (1 − (1 − ρρ*)^{1/2})⁻¹`; needs `ρρ* > 0` at the point.
pub fn psi_minus(f: &PointFrame, tol: f64) -> Result<DMatrix<f64>, MetricError> {
    let spec = AnchorSpectrum::of_frame(f)?;
    let min = spec.min_eigenvalue();
    if min <= tol {
        // bound violations take precedence
        spec.clamped_unit(tol)?;
        return Err(MetricError::NotTransitiveAtPoint { min_eig: min });
    }
    let spec = spec.clamped_unit(tol)?;
    // 1 − √(1−λ) = λ / (1 + √(1−λ)) avoids cancellation for small λ
    let inv = spec.apply(|lam| (1.0 + (1.0 - lam).sqrt()) / lam);
    Ok(-(spec.rho_star() * inv))
}

/// `η₀` at one point, split over `TM ⊕ A`.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricBlocks {
    /// `n × n`
    pub tt: DMatrix<f64>,
    /// `n × m`
    pub ta: DMatrix<f64>,
    /// `m × m`
    pub aa: DMatrix<f64>,
}

impl MetricBlocks {
    pub fn block_diagonal(g: &DMatrix<f64>, kappa: &DMatrix<f64>) -> Self {
        Self {
            tt: g.clone(),
            ta: DMatrix::zeros(g.nrows(), kappa.nrows()),
            aa: kappa.clone(),
        }
    }

    pub fn from_full(full: &DMatrix<f64>, n: usize) -> Self {
        let m = full.nrows() - n;
        Self {
            tt: full.view((0, 0), (n, n)).into_owned(),
            ta: full.view((0, n), (n, m)).into_owned(),
            aa: full.view((n, n), (m, m)).into_owned(),
        }
    }

    pub fn n(&self) -> usize {
        self.tt.nrows()
    }

    pub fn m(&self) -> usize {
        self.aa.nrows()
    }

    pub fn assemble(&self) -> DMatrix<f64> {
        let (n, m) = (self.n(), self.m());
        let mut out = DMatrix::zeros(n + m, n + m);
        out.view_mut((0, 0), (n, n)).copy_from(&self.tt);
        out.view_mut((0, n), (n, m)).copy_from(&self.ta);
        out.view_mut((n, 0), (m, n)).copy_from(&self.ta.transpose());
        out.view_mut((n, n), (m, m)).copy_from(&self.aa);
        out
    }

    pub fn is_positive_definite(&self) -> bool {
        Cholesky::new(self.assemble()).is_some()
    }

    /// Largest entrywise difference over all three blocks.
    pub fn max_abs_diff(&self, other: &MetricBlocks) -> f64 {
        max_abs_diff(&self.tt, &other.tt)
            .max(max_abs_diff(&self.ta, &other.ta))
            .max(max_abs_diff(&self.aa, &other.aa))
    }
}

/// The differential of groupoid inversion along the units,
/// `(v, ξ) ↦ (v + ρξ, −ξ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Involution {
    matrix: DMatrix<f64>,
}

impl Involution {
    pub fn new(p: &DMatrix<f64>) -> Self {
        let (n, m) = p.shape();
        let mut matrix = DMatrix::zeros(n + m, n + m);
        matrix.view_mut((0, 0), (n, n)).fill_with_identity();
        matrix.view_mut((0, n), (n, m)).copy_from(p);
        matrix.view_mut((n, n), (m, m)).fill_with_identity();
        matrix.view_mut((n, n), (m, m)).neg_mut();
        Self { matrix }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// `Iᵀ η I`, the metric pulled back along the involution.
    pub fn pull_back(&self, eta: &DMatrix<f64>) -> DMatrix<f64> {
        self.matrix.transpose() * eta * &self.matrix
    }
}

/// `η₀` from a bundle map `Ψ: TM → A` (`m × n`):
/// `η₀(v, ξ) = −κ(Ψv, ξ)`, `η₀(ξ, ξ) = κ(ξ, ξ)`, `η₀(v, v) = g((1 + Ψ*Ψ)v, v)`.
pub fn assemble_eta0(f: &PointFrame, psi: &DMatrix<f64>) -> MetricBlocks {
    let kpsi = &f.kappa * psi;
    MetricBlocks {
        tt: symmetrize(&(&f.g + psi.transpose() * &kpsi)),
        ta: -kpsi.transpose(),
        aa: f.kappa.clone(),
    }
}

/// Base metric induced through the source map: lift `TM` into the
/// `η`-orthogonal complement of `V(s) = {(ρξ, −ξ)}` by explicit projection and
/// restrict `η` there. Returns `None` if `η` is degenerate on `V(s)`.
fn submersion_metric(eta: &DMatrix<f64>, p: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let (n, m) = p.shape();
    let mut vs = DMatrix::zeros(n + m, m);
    vs.view_mut((0, 0), (n, m)).copy_from(p);
    vs.view_mut((n, 0), (m, m)).fill_with_identity();
    vs.view_mut((n, 0), (m, m)).neg_mut();
    let mut e = DMatrix::zeros(n + m, n);
    e.view_mut((0, 0), (n, n)).fill_with_identity();
    let gram = vs.transpose() * eta * &vs;
    let coeff = Cholesky::new(gram)?.solve(&(vs.transpose() * eta * &e));
    // ds(w) = v since ds kills V(s)
    let w = e - vs * coeff;
    Some(symmetrize(&(w.transpose() * eta * &w)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Eta0Verification {
    /// `max |Iᵀ η I − η|`
    pub involution_isometry: f64,
    /// `max |η|_{A×A} − κ|`
    pub fiber_block: f64,
    /// `max |g_induced − g|` for the source map restricted to `V(s)⊥`
    pub submersion: f64,
    /// `max |(1 + Ψ*Ψ)ρ + 2Ψ*|`
    pub psi_identity: f64,
    /// `max |((1 + Ψ*Ψ)⁻¹ − ½)² − ¼(1 − ρρ*)|`
    pub quadratic_identity: f64,
    pub positive_definite: bool,
    pub pass: bool,
}

impl Eta0Verification {
    pub fn max_residual(&self) -> f64 {
        [
            self.involution_isometry,
            self.fiber_block,
            self.submersion,
            self.psi_identity,
            self.quadratic_identity,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// Check the compatibility conditions on an assembled `η₀`. `Ψ` is recovered
/// from the off-diagonal block, so the identities test `η` itself.
pub fn verify_eta0(
    f: &PointFrame,
    eta: &MetricBlocks,
    tol: f64,
) -> Result<Eta0Verification, MetricError> {
    let n = f.n();
    let full = eta.assemble();
    let inv = Involution::new(&f.p);
    let involution_isometry = max_abs_diff(&inv.pull_back(&full), &full);
    let fiber_block = max_abs_diff(&eta.aa, &f.kappa);
    let submersion =
        submersion_metric(&full, &f.p).map_or(f64::INFINITY, |gi| max_abs_diff(&gi, &f.g));

    let gchol = cholesky(&f.g, "g")?;
    let kchol = cholesky(&f.kappa, "kappa")?;
    let psi = -kchol.solve(&eta.ta.transpose());
    let psi_adj = gchol.solve(&(psi.transpose() * &f.kappa));
    let one_plus = DMatrix::identity(n, n) + &psi_adj * &psi;
    let psi_identity = (&one_plus * &f.p + 2.0 * &psi_adj).amax();
    let rrs = &f.p * kchol.solve(&(f.p.transpose() * &f.g));
    let quadratic_identity = match one_plus.clone().try_inverse() {
        Some(inv) => {
            let shifted = inv - 0.5 * DMatrix::identity(n, n);
            let lhs = &shifted * &shifted;
            let rhs = 0.25 * (DMatrix::identity(n, n) - rrs);
            max_abs_diff(&lhs, &rhs)
        }
        None => f64::INFINITY,
    };
    let positive_definite = eta.is_positive_definite();
    let mut out = Eta0Verification {
        involution_isometry,
        fiber_block,
        submersion,
        psi_identity,
        quadratic_identity,
        positive_definite,
        pass: false,
    };
    out.pass = positive_definite && out.max_residual() < tol;
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum UniquenessClass {
    Unique,
    TwoSolutions,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Classification {
    pub class: UniquenessClass,
    /// Why the metric is unique: `non_transitive` and/or `saturated`.
    pub reasons: Vec<&'static str>,
    pub samples: usize,
    pub non_transitive_samples: usize,
    pub saturated_samples: usize,
    pub transitive_everywhere: bool,
    pub saturated_everywhere: bool,
    /// Saturation holds on some samples but not on others.
    pub dichotomy_violation: bool,
    /// `Ψ₊ = Ψ₋` exactly at the saturated samples.
    pub coincidence_consistent: bool,
    pub coincidence_mismatches: Vec<Vec<f64>>,
    pub scope: &'static str,
}

/// Tolerance for comparing `Ψ₊` with `Ψ₋`. Their difference scales like
/// `√(1 − λ)`, so an eigenvalue within `tol` of 1 gives matrices within `~2√tol`.
pub fn coincidence_tolerance(tol: f64) -> f64 {
    4.0 * tol.sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct SampleClass {
    transitive: bool,
    saturated: bool,
    coincide: bool,
}

fn sample_class(f: &PointFrame, tol: f64) -> Result<SampleClass, MetricError> {
    let spec = AnchorSpectrum::of_frame(f)?;
    spec.clamped_unit(tol)?;
    let transitive = spec.min_eigenvalue() > tol;
    let saturated =
        !spec.eigenvalues().is_empty() && spec.eigenvalues().iter().all(|l| (l - 1.0).abs() <= tol);
    let coincide = match psi_minus(f, tol) {
        Ok(minus) => max_abs_diff(&psi_plus(f, tol)?, &minus) <= coincidence_tolerance(tol),
        Err(MetricError::NotTransitiveAtPoint { .. }) => false,
        Err(e) => return Err(e),
    };
    Ok(SampleClass {
        transitive,
        saturated,
        coincide,
    })
}

/// Number of compatible metrics, decided on the sampled set.
pub fn classify_uniqueness(frames: &[PointFrame], tol: f64) -> Result<Classification, MetricError> {
    let classes: Vec<SampleClass> = frames
        .par_iter()
        .map(|f| sample_class(f, tol))
        .collect::<Result<_, _>>()?;
    let total = classes.len();
    let non_transitive = classes.iter().filter(|c| !c.transitive).count();
    let saturated = classes.iter().filter(|c| c.saturated).count();
    let mismatches: Vec<Vec<f64>> = classes
        .iter()
        .zip(frames)
        .filter(|(c, _)| c.coincide != c.saturated)
        .map(|(_, f)| f.x.clone())
        .collect();
    let mut reasons = Vec::new();
    if non_transitive > 0 {
        reasons.push("non_transitive");
    }
    if saturated > 0 {
        reasons.push("saturated");
    }
    let class = if reasons.is_empty() {
        UniquenessClass::TwoSolutions
    } else {
        UniquenessClass::Unique
    };
    Ok(Classification {
        class,
        reasons,
        samples: total,
        non_transitive_samples: non_transitive,
        saturated_samples: saturated,
        transitive_everywhere: non_transitive == 0,
        saturated_everywhere: total > 0 && saturated == total,
        dichotomy_violation: saturated > 0 && saturated < total,
        coincidence_consistent: mismatches.is_empty(),
        coincidence_mismatches: mismatches,
        scope: "on the sampled set",
    })
}

/// Replace `g ⊕ κ` by `g(R·,·) ⊕ κ(C·,·)` with `R = 2(1 + (1 − ρρ*)^{1/2})⁻¹`,
/// `C = 1 − ½ρ*Rρ`, then average with its pull-back under the involution.
pub fn averaged_metric(f: &PointFrame, tol: f64) -> Result<MetricBlocks, MetricError> {
    let spec = AnchorSpectrum::of_frame(f)?.clamped_unit(tol)?;
    let m = f.m();
    let r = spec.apply(|lam| 2.0 / (1.0 + (1.0 - lam).sqrt()));
    let c = DMatrix::identity(m, m) - 0.5 * spec.rho_star() * &r * &f.p;
    let initial = MetricBlocks {
        tt: symmetrize(&(r.transpose() * &f.g)),
        ta: DMatrix::zeros(f.n(), m),
        aa: symmetrize(&(c.transpose() * &f.kappa)),
    }
    .assemble();
    let inv = Involution::new(&f.p);
    let averaged = 0.5 * (&initial + inv.pull_back(&initial));
    Ok(MetricBlocks::from_full(&symmetrize(&averaged), f.n()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DemocraticMetric {
    pub blocks: MetricBlocks,
    /// `g(R′·,·)` with `R′ = (1 + ¼ρρ*)⁻¹`
    pub g_prime: DMatrix<f64>,
    /// `κ(C′·,·)` with `C′ = 1 + ¼ρ*ρ`
    pub kappa_prime: DMatrix<f64>,
    pub fiber_residual: f64,
    pub base_residual: f64,
    pub positive_definite: bool,
    /// Largest eigenvalue of `ρρ*` for the conjugation taken with `(g′, κ′)`.
    pub rebound_max_eig: f64,
    pub pass: bool,
}

/// `V₊ = TM` with `g`, `V₋ = {(−½ρξ, ξ)}` with `κ` pushed along `ξ ↦ (−½ρξ, ξ)`,
/// and `V₊ ⊥ V₋`. Needs no bound on `ρρ*`.
pub fn democratic_metric(f: &PointFrame, tol: f64) -> Result<DemocraticMetric, MetricError> {
    let (n, m) = (f.n(), f.m());
    let spec = AnchorSpectrum::of_frame(f)?;

    // change of basis B: (v, ξ) in V₊ ⊕ V₋ ↦ (v − ½ρξ, ξ); η = B⁻ᵀ (g ⊕ κ) B⁻¹
    let mut b_inv = DMatrix::identity(n + m, n + m);
    b_inv.view_mut((0, n), (n, m)).copy_from(&(0.5 * &f.p));
    let diag = MetricBlocks::block_diagonal(&f.g, &f.kappa).assemble();
    let full = symmetrize(&(b_inv.transpose() * diag * &b_inv));
    let blocks = MetricBlocks::from_full(&full, n);

    let r_prime = spec.apply(|lam| 1.0 / (1.0 + 0.25 * lam));
    let g_prime = symmetrize(&(r_prime.transpose() * &f.g));
    let c_prime = DMatrix::identity(m, m) + 0.25 * spec.rho_star() * &f.p;
    let kappa_prime = symmetrize(&(c_prime.transpose() * &f.kappa));

    let fiber_residual = max_abs_diff(&blocks.aa, &kappa_prime);
    let base_residual =
        submersion_metric(&full, &f.p).map_or(f64::INFINITY, |gi| max_abs_diff(&gi, &g_prime));
    let positive_definite = blocks.is_positive_definite();
    let rebound_max_eig = AnchorSpectrum::new(&f.p, &g_prime, &kappa_prime)?.max_eigenvalue();
    let pass = positive_definite
        && fiber_residual < tol
        && base_residual < tol
        && rebound_max_eig <= 1.0 + tol;
    Ok(DemocraticMetric {
        blocks,
        g_prime,
        kappa_prime,
        fiber_residual,
        base_residual,
        positive_definite,
        rebound_max_eig,
        pass,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwoMetricBound {
    pub holds: bool,
    pub max_eig: f64,
}

/// Sufficient condition `ρρ* < 4` for extending to a 2-metric.
pub fn two_metric_bound(f: &PointFrame, tol: f64) -> Result<TwoMetricBound, MetricError> {
    let max_eig = AnchorSpectrum::of_frame(f)?.max_eigenvalue();
    Ok(TwoMetricBound {
        holds: max_eig < 4.0 - tol,
        max_eig,
    })
}
