use std::collections::BTreeMap;

use alglab_core::axioms::{run_axiom_suite, AxiomCheck};
use alglab_core::geometry::{basic_curvature, Tolerances};
use alglab_core::instances::{builtin, Sampling, BUILTIN_NAMES};
use alglab_core::metric::{
    assemble_eta0, averaged_metric, democratic_metric, existence_condition, psi_minus, psi_plus,
    verify_eta0, ExistenceStatus, MetricError,
};
use alglab_core::pipeline::{run, RunConfig};
use alglab_core::report::StageStatus;
use proptest::prelude::*;

fn params(pairs: &[(&str, String)]) -> BTreeMap<String, String> {
    pairs
        .iter()
        .map(|(k, v)| (k.to_string(), v.clone()))
        .collect()
}

fn check_builtin(name: &str, given: BTreeMap<String, String>, seed: u64) {
    let inst = builtin(
        name,
        &given,
        Sampling { random: 12, seed },
        Tolerances::default(),
    )
    .unwrap();
    let frames = inst.spec.frames().unwrap();
    for f in &frames {
        let k = basic_curvature(f);
        assert!(
            k.iter().all(|v| v.abs() < 1e-9),
            "{name} curvature at {:?}",
            f.x
        );
    }
    let axioms = run_axiom_suite(&frames, 1e-9);
    for c in AxiomCheck::ALL {
        assert!(axioms.residual(c).pass, "{name} {c:?}");
    }
    let ex = existence_condition(&frames, 1e-9).unwrap();
    assert_eq!(ex.status, inst.expected.existence, "{name} {given:?}");
    for f in &frames {
        let d = democratic_metric(f, 1e-9).unwrap();
        assert!(d.pass, "{name} democratic at {:?}: {d:?}", f.x);
        if ex.status == ExistenceStatus::Fails {
            continue;
        }
        let plus = psi_plus(f, 1e-9).unwrap();
        let eta = assemble_eta0(f, &plus);
        assert!(verify_eta0(f, &eta, 1e-9).unwrap().pass);
        assert!(averaged_metric(f, 1e-9).unwrap().max_abs_diff(&eta) < 1e-9);
        match psi_minus(f, 1e-9) {
            Ok(minus) => assert!(
                verify_eta0(f, &assemble_eta0(f, &minus), 1e-9)
                    .unwrap()
                    .pass
            ),
            Err(MetricError::NotTransitiveAtPoint { .. }) => {}
            Err(e) => panic!("{e}"),
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn so3_boxes(h in 0.05f64..0.9, seed in any::<u64>()) {
        check_builtin("so3_euclidean", params(&[("half_width", h.to_string())]), seed);
    }

    #[test]
    fn so2_boxes(h in 0.05f64..2.5, seed in any::<u64>()) {
        check_builtin("so2_linear", params(&[("half_width", h.to_string())]), seed);
    }

    #[test]
    fn translations(eps in -2.0f64..2.0, seed in any::<u64>()) {
        check_builtin("scaled_translations", params(&[("eps", eps.to_string())]), seed);
    }

    #[test]
    fn identity_and_zero(n in 1usize..4, seed in any::<u64>()) {
        check_builtin("identity_anchor", params(&[("n", n.to_string())]), seed);
        check_builtin("zero_anchor_bundle", params(&[("n", n.to_string())]), seed);
        check_builtin(
            "zero_anchor_bundle",
            params(&[("algebra", "abelian".into()), ("rank", (n + 1).to_string())]),
            seed,
        );
    }
}

#[test]
fn default_runs_only_fail_through_existence() {
    for name in BUILTIN_NAMES {
        let r = run(&RunConfig::builtin(name, &[])).unwrap();
        assert_eq!(r.exit_code, 0, "{name}\n{}", r.to_text());
    }
    for (name, params) in [
        ("so2_linear", [("half_width", "2")]),
        ("so3_euclidean", [("half_width", "1")]),
        ("scaled_translations", [("eps", "1.9")]),
    ] {
        let r = run(&RunConfig::builtin(name, &params)).unwrap();
        assert_eq!(r.exit_code, 1);
        let failed: Vec<_> = r
            .stages
            .iter()
            .filter(|s| s.status == StageStatus::Fail)
            .map(|s| s.name)
            .collect();
        assert_eq!(failed, ["existence"], "{name}");
    }
}
