//! Pointwise residuals of the Lie algebroid axioms, the Cartan condition and
//! invariance of the base and fiber metrics, aggregated over a sample set.

use ndarray::{Array3, Array4};
use rayon::prelude::*;
use serde::Serialize;

use crate::geometry::{alpha_connection, basic_curvature, tau_connection, PointFrame};

/// `ρ^j_a ∂_j ρ^i_b − ρ^j_b ∂_j ρ^i_a − ρ^i_c C^c_{ab}`, indexed `[i, a, b]`.
pub fn check_anchor_morphism(f: &PointFrame) -> Array3<f64> {
    let (n, m) = (f.n(), f.m());
    Array3::from_shape_fn((n, m, m), |(i, a, b)| {
        let bracket: f64 = (0..n)
            .map(|j| f.p[(j, a)] * f.dp[[i, b, j]] - f.p[(j, b)] * f.dp[[i, a, j]])
            .sum();
        let image: f64 = (0..m).map(|c| f.p[(i, c)] * f.c[[c, a, b]]).sum();
        bracket - image
    })
}

/// Cyclic sum over `(a, b, c)` of `C^e_{ad} C^d_{bc} + ρ^j_a ∂_j C^e_{bc}`, indexed `[e, a, b, c]`.
pub fn check_jacobi(f: &PointFrame) -> Array4<f64> {
    let (n, m) = (f.n(), f.m());
    let term = |e: usize, a: usize, b: usize, c: usize| -> f64 {
        let quad: f64 = (0..m).map(|d| f.c[[e, a, d]] * f.c[[d, b, c]]).sum();
        let deriv: f64 = (0..n).map(|j| f.p[(j, a)] * f.dc[[e, b, c, j]]).sum();
        quad + deriv
    };
    Array4::from_shape_fn((m, m, m, m), |(e, a, b, c)| {
        term(e, a, b, c) + term(e, b, c, a) + term(e, c, a, b)
    })
}

/// The connection is Cartan iff its basic curvature vanishes.
pub fn check_cartan(f: &PointFrame) -> Array4<f64> {
    basic_curvature(f)
}

/// `(ᵗ∇_{e_a} g)(∂_i, ∂_j)`, indexed `[a, i, j]`.
pub fn check_killing(f: &PointFrame) -> Array3<f64> {
    let (n, m) = (f.n(), f.m());
    let tau = tau_connection(f);
    Array3::from_shape_fn((m, n, n), |(a, i, j)| {
        let along: f64 = (0..n).map(|k| f.p[(k, a)] * f.dg[[i, j, k]]).sum();
        let corr: f64 = (0..n)
            .map(|k| tau[[a, i, k]] * f.g[(k, j)] + tau[[a, j, k]] * f.g[(i, k)])
            .sum();
        along - corr
    })
}

/// `(ᵅ∇_{e_a} κ)(e_b, e_c)`, indexed `[a, b, c]`.
pub fn check_metric(f: &PointFrame) -> Array3<f64> {
    let (n, m) = (f.n(), f.m());
    let alpha = alpha_connection(f);
    Array3::from_shape_fn((m, m, m), |(a, b, c)| {
        let along: f64 = (0..n).map(|i| f.p[(i, a)] * f.dkappa[[b, c, i]]).sum();
        let corr: f64 = (0..m)
            .map(|d| alpha[[a, b, d]] * f.kappa[(d, c)] + alpha[[a, c, d]] * f.kappa[(b, d)])
            .sum();
        along - corr
    })
}

fn max_abs<'a>(values: impl IntoIterator<Item = &'a f64>) -> f64 {
    values.into_iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AxiomCheck {
    AnchorMorphism,
    Jacobi,
    Cartan,
    Killing,
    Metric,
}

impl AxiomCheck {
    pub const ALL: [AxiomCheck; 5] = [
        AxiomCheck::AnchorMorphism,
        AxiomCheck::Jacobi,
        AxiomCheck::Cartan,
        AxiomCheck::Killing,
        AxiomCheck::Metric,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AxiomCheck::AnchorMorphism => "anchor_morphism",
            AxiomCheck::Jacobi => "jacobi",
            AxiomCheck::Cartan => "cartan",
            AxiomCheck::Killing => "killing",
            AxiomCheck::Metric => "metric",
        }
    }

    /// Largest absolute entry of this check's residual tensor at one frame.
    pub fn evaluate(self, f: &PointFrame) -> f64 {
        match self {
            AxiomCheck::AnchorMorphism => max_abs(&check_anchor_morphism(f)),
            AxiomCheck::Jacobi => max_abs(&check_jacobi(f)),
            AxiomCheck::Cartan => max_abs(&check_cartan(f)),
            AxiomCheck::Killing => max_abs(&check_killing(f)),
            AxiomCheck::Metric => max_abs(&check_metric(f)),
        }
    }
}

/// Worst residual of one check over the sample set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Residual {
    pub name: &'static str,
    pub max_abs: f64,
    pub worst_point: Vec<f64>,
    pub pass: bool,
}

impl Residual {
    /// Reduce per-sample maxima. Ties keep the earliest sample, so the result
    /// does not depend on how samples were scheduled.
    pub fn from_samples(name: &'static str, per_sample: &[(f64, &[f64])], tol: f64) -> Self {
        let mut max_abs = 0.0f64;
        let mut worst_point = per_sample
            .first()
            .map(|(_, x)| x.to_vec())
            .unwrap_or_default();
        let mut finite = true;
        for &(r, x) in per_sample {
            if !r.is_finite() {
                finite = false;
            }
            if r > max_abs || (r.is_nan() && !max_abs.is_nan()) {
                max_abs = r;
                worst_point = x.to_vec();
            }
        }
        Self {
            name,
            max_abs,
            worst_point,
            pass: finite && max_abs < tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxiomReport {
    pub residuals: Vec<Residual>,
    /// Every residual passed; positivity of `g` and `κ` is a load-time invariant.
    pub positive_quadratic_cartan: bool,
}

impl AxiomReport {
    pub fn residual(&self, check: AxiomCheck) -> &Residual {
        self.residuals
            .iter()
            .find(|r| r.name == check.name())
            .expect("every check is reported")
    }
}

pub fn run_axiom_suite(frames: &[PointFrame], tol: f64) -> AxiomReport {
    let per_sample: Vec<[f64; 5]> = frames
        .par_iter()
        .map(|f| AxiomCheck::ALL.map(|c| c.evaluate(f)))
        .collect();
    let residuals: Vec<Residual> = AxiomCheck::ALL
        .iter()
        .enumerate()
        .map(|(k, check)| {
            let pairs: Vec<(f64, &[f64])> = per_sample
                .iter()
                .zip(frames)
                .map(|(r, f)| (r[k], f.x.as_slice()))
                .collect();
            Residual::from_samples(check.name(), &pairs, tol)
        })
        .collect();
    let positive_quadratic_cartan = residuals.iter().all(|r| r.pass);
    AxiomReport {
        residuals,
        positive_quadratic_cartan,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::test_support::spec;
    use crate::geometry::AlgebroidSpec;

    const TOL: f64 = 1e-9;

    // C^c_{ab} = ε_{abc}, flattened over [c, a, b]
    fn levi_civita() -> Vec<String> {
        let mut out = Vec::new();
        for c in 0..3 {
            for a in 0..3 {
                for b in 0..3 {
                    out.push(format!("{}", epsilon(a, b, c)));
                }
            }
        }
        out
    }

    fn epsilon(a: usize, b: usize, c: usize) -> i32 {
        match (a, b, c) {
            (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1,
            (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1,
            _ => 0,
        }
    }

    // ρ_1 = (0, x3, −x2), ρ_2 = (−x3, 0, x1), ρ_3 = (x2, −x1, 0) as columns of the n × m anchor
    const SO3_ANCHOR: [&str; 9] = ["0", "-x3", "x2", "x3", "0", "-x1", "-x2", "x1", "0"];

    fn so3(kappa: Option<&[&str]>, structure: &[String]) -> AlgebroidSpec {
        let s: Vec<&str> = structure.iter().map(String::as_str).collect();
        spec(3, 3, 1.0, &SO3_ANCHOR, Some(&s), None, None, kappa).unwrap()
    }

    fn suite(s: &AlgebroidSpec) -> AxiomReport {
        run_axiom_suite(&s.frames().unwrap(), TOL)
    }

    fn worst(s: &AlgebroidSpec, check: AxiomCheck) -> f64 {
        suite(s).residual(check).max_abs
    }

    #[test]
    fn zero_anchor_passes_everything() {
        let s = spec(1, 1, 1.0, &["0"], None, None, None, None).unwrap();
        let report = suite(&s);
        assert!(report.positive_quadratic_cartan, "{report:?}");
        assert_eq!(report.residuals.len(), 5);
    }

    #[test]
    fn rotation_anchor_is_morphism() {
        let s = spec(2, 1, 1.0, &["-x2", "x1"], None, None, None, None).unwrap();
        assert_eq!(worst(&s, AxiomCheck::AnchorMorphism), 0.0);
        let s = so3(None, &levi_civita());
        assert!(worst(&s, AxiomCheck::AnchorMorphism) < TOL);
    }

    #[test]
    fn jacobi_brute_force() {
        let s = spec(
            1,
            2,
            1.0,
            &["0", "0"],
            Some(&["0", "1", "-1", "0", "0", "2", "-2", "0"]),
            None,
            None,
            None,
        )
        .unwrap();
        assert_eq!(worst(&s, AxiomCheck::Jacobi), 0.0);
        assert_eq!(worst(&so3(None, &levi_civita()), AxiomCheck::Jacobi), 0.0);

        // rescaling one structure constant (C^1_{23} = 1.1) stays a Lie algebra
        let mut c = levi_civita();
        c[5] = "1.1".into(); // [c=0, a=1, b=2]
        c[7] = "-1.1".into(); // [c=0, a=2, b=1]
        let cs: Vec<&str> = c.iter().map(String::as_str).collect();
        let s = spec(1, 3, 1.0, &["0", "0", "0"], Some(&cs), None, None, None).unwrap();
        assert!(worst(&s, AxiomCheck::Jacobi) < 1e-15);

        // [e3, e1] = e2 + e1: brute-force cyclic sum for e = 3, (a, b, c) = (1, 2, 3)
        // gives C^3_{1d}C^d_{23} + C^3_{2d}C^d_{31} + C^3_{3d}C^d_{12} = 0 − 1 + 0
        let mut c = levi_civita();
        c[6] = "1".into(); // [c=0, a=2, b=0]
        c[2] = "-1".into(); // [c=0, a=0, b=2]
        let s = spec(
            1,
            3,
            1.0,
            &["0", "0", "0"],
            Some(&c.iter().map(String::as_str).collect::<Vec<_>>()),
            None,
            None,
            None,
        )
        .unwrap();
        let f = s.eval_frame(&[0.0]).unwrap();
        let r = check_jacobi(&f);
        assert_eq!(r[[2, 0, 1, 2]], -1.0);
        assert!(!suite(&s).positive_quadratic_cartan);
    }

    #[test]
    fn cartan_for_flat_and_non_cartan_connections() {
        assert_eq!(worst(&so3(None, &levi_civita()), AxiomCheck::Cartan), 0.0);
        let su2 = levi_civita();
        let su2: Vec<&str> = su2.iter().map(String::as_str).collect();
        let s = spec(1, 3, 1.0, &["0", "0", "0"], Some(&su2), None, None, None).unwrap();
        assert_eq!(worst(&s, AxiomCheck::Cartan), 0.0);

        // Γ_1 = diag(1, 0, 0) is not a derivation of so(3)
        let mut gamma = vec!["0"; 9];
        gamma[0] = "1"; // [b=0, i=0, a=0]
        let s = spec(
            1,
            3,
            1.0,
            &["0", "0", "0"],
            Some(&su2),
            Some(&gamma),
            None,
            None,
        )
        .unwrap();
        let f = s.eval_frame(&[0.0]).unwrap();
        // ∇[e2,e3] − [∇e2,e3] − [e2,∇e3] = Γe1 = e1
        assert_eq!(check_cartan(&f)[[1, 2, 0, 0]], 1.0);
        assert!(!suite(&s).positive_quadratic_cartan);
    }

    #[test]
    fn rank_one_curvature_vanishes() {
        let s = spec(1, 1, 1.0, &["1"], None, Some(&["x1"]), None, None).unwrap();
        assert_eq!(worst(&s, AxiomCheck::Cartan), 0.0);
    }

    #[test]
    fn killing_euclidean_vs_deformed() {
        let s = spec(2, 1, 1.0, &["-x2", "x1"], None, None, None, None).unwrap();
        assert_eq!(worst(&s, AxiomCheck::Killing), 0.0);
        let s = spec(
            2,
            1,
            1.0,
            &["-x2", "x1"],
            None,
            None,
            Some(&["1+x1^2", "0", "0", "1"]),
            None,
        )
        .unwrap();
        let r = check_killing(&s.eval_frame(&[1.0, 0.0]).unwrap());
        // L_ρ g at (1,0): entry (1,2) = ∂₁ρ² g₂₂ + ∂₂ρ¹ g₁₁ = 1 − 2
        assert_eq!(r[[0, 0, 1]], -1.0);
        assert_eq!(r[[0, 0, 0]], 0.0);
    }

    #[test]
    fn metric_invariance() {
        let s = spec(1, 1, 1.0, &["0"], None, None, None, Some(&["2"])).unwrap();
        assert_eq!(worst(&s, AxiomCheck::Metric), 0.0);
        assert_eq!(worst(&so3(None, &levi_civita()), AxiomCheck::Metric), 0.0);
        let deformed = ["1", "0", "0", "0", "1", "0", "0", "0", "2"];
        let s = so3(Some(&deformed), &levi_civita());
        let r = check_metric(&s.eval_frame(&[0.1, 0.2, 0.3]).unwrap());
        // a=1, b=2, c=3: −ε₁₂₃κ₃₃ − ε₁₃₂κ₂₂ = −2 + 1
        assert_eq!(r[[0, 1, 2]], -1.0);
    }

    #[test]
    fn so3_suite_passes() {
        let report = suite(&so3(None, &levi_civita()));
        assert!(report.positive_quadratic_cartan, "{report:?}");
    }

    #[test]
    fn residuals_scale_linearly_with_metrics() {
        let base = spec(
            2,
            1,
            1.0,
            &["-x2", "x1"],
            None,
            None,
            Some(&["1+x1^2", "0", "0", "1"]),
            None,
        )
        .unwrap();
        let doubled = spec(
            2,
            1,
            1.0,
            &["-x2", "x1"],
            None,
            None,
            Some(&["2*(1+x1^2)", "0", "0", "2"]),
            None,
        )
        .unwrap();
        let a = worst(&base, AxiomCheck::Killing);
        let b = worst(&doubled, AxiomCheck::Killing);
        assert!(a > 0.0);
        assert!((b - 2.0 * a).abs() < 1e-12);

        let deformed = ["1", "0", "0", "0", "1", "0", "0", "0", "2"];
        let deformed2 = ["2", "0", "0", "0", "2", "0", "0", "0", "4"];
        let a = worst(&so3(Some(&deformed), &levi_civita()), AxiomCheck::Metric);
        let b = worst(&so3(Some(&deformed2), &levi_civita()), AxiomCheck::Metric);
        assert!(a > 0.0);
        assert!((b - 2.0 * a).abs() < 1e-12);
    }

    #[test]
    fn residuals_invariant_under_basis_permutation() {
        // relabel e1 -> e2 -> e3 -> e1 in a deformed so(3) with non-trivial residuals
        let perm = [1usize, 2, 0];
        let c = levi_civita();
        let kappa = ["1", "0", "0", "0", "3", "0", "0", "0", "2"];
        let mut c_p = vec![String::new(); 27];
        let mut anchor_p = vec![""; 9];
        let mut kappa_p = vec![""; 9];
        for cc in 0..3 {
            for a in 0..3 {
                for b in 0..3 {
                    c_p[perm[cc] * 9 + perm[a] * 3 + perm[b]] = c[cc * 9 + a * 3 + b].clone();
                }
            }
        }
        for i in 0..3 {
            for a in 0..3 {
                anchor_p[i * 3 + perm[a]] = SO3_ANCHOR[i * 3 + a];
                kappa_p[perm[i] * 3 + perm[a]] = kappa[i * 3 + a];
            }
        }
        let cs: Vec<&str> = c.iter().map(String::as_str).collect();
        let cps: Vec<&str> = c_p.iter().map(String::as_str).collect();
        let original = spec(3, 3, 1.0, &SO3_ANCHOR, Some(&cs), None, None, Some(&kappa)).unwrap();
        let permuted = spec(3, 3, 1.0, &anchor_p, Some(&cps), None, None, Some(&kappa_p)).unwrap();
        let (ra, rb) = (suite(&original), suite(&permuted));
        for check in AxiomCheck::ALL {
            let (a, b) = (ra.residual(check).max_abs, rb.residual(check).max_abs);
            assert!((a - b).abs() < 1e-12, "{}: {a} vs {b}", check.name());
        }
        assert!(ra.residual(AxiomCheck::Metric).max_abs > 0.1);
    }

    #[test]
    fn residual_reduction_keeps_first_worst() {
        let p = [vec![0.0], vec![1.0], vec![2.0]];
        let r = Residual::from_samples("x", &[(0.5, &p[0]), (2.0, &p[1]), (2.0, &p[2])], 1.0);
        assert_eq!(r.max_abs, 2.0);
        assert_eq!(r.worst_point, vec![1.0]);
        assert!(!r.pass);
        let r = Residual::from_samples("x", &[(f64::NAN, &p[0])], 1.0);
        assert!(!r.pass);
    }
}
