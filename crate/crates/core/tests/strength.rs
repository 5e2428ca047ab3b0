use std::f64::consts::FRAC_PI_2;

use proptest::prelude::*;
use qsa_core::analysis::{
    error_scaling, perturbation_distance, strength_target, strength_toric, OffsetMode, Pulses, StrengthParams,
};
use qsa_core::lattice::{plaquette_schedule, Boundary, LatticeSpec};
use qsa_core::schedule::{compile, ConnectivityGraph, PulseProgram, Strategy as Route};
use qsa_core::{PauliString, QsaError};

fn program(target: &str) -> PulseProgram {
    let t: PauliString = target.parse().unwrap();
    let g = ConnectivityGraph::complete(t.n_sites());
    compile(&t, &g, Route::Auto).unwrap().with_tg(0.3).pulse_program().unwrap()
}

proptest! {
    #[test]
    fn strength_conserves_the_phase(g in -5.0f64..5.0, t in 0.01f64..10.0, tau in 0.0f64..2.0, tp in 0.0f64..2.0, n in 1u32..50) {
        let p = StrengthParams::tau(g, t, tau, tp, n);
        let gp = strength_target(&p).unwrap();
        let stretched = t + n as f64 * (tau + tp);
        prop_assert!((gp * stretched - g * t).abs() <= 1e-12 * (1.0 + (g * t).abs()));
        prop_assert!(gp.abs() <= g.abs() + 1e-15);
    }

    #[test]
    fn omega_form_agrees_with_tau_form(g in 0.1f64..5.0, t in 0.1f64..5.0, w in 0.5f64..20.0, wp in 0.5f64..20.0, n in 1u32..10) {
        let by_omega = StrengthParams::omega(g, t, -w, wp, n);
        let by_tau = StrengthParams::tau(g, t, FRAC_PI_2 / w, FRAC_PI_2 / wp, n);
        let a = strength_target(&by_omega).unwrap();
        let b = strength_target(&by_tau).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * b.abs());
    }

    #[test]
    fn strength_decreases_with_overhead(g in 0.1f64..5.0, t in 0.1f64..5.0, tau in 0.01f64..1.0, tp in 0.01f64..1.0, n in 1u32..20) {
        let base = strength_target(&StrengthParams::tau(g, t, tau, tp, n)).unwrap();
        prop_assert!(strength_target(&StrengthParams::tau(g, t, tau, tp, n + 1)).unwrap() < base);
        prop_assert!(strength_target(&StrengthParams::tau(g, t, tau * 1.5, tp, n)).unwrap() < base);
        prop_assert!(strength_target(&StrengthParams::tau(g, t, tau, tp * 1.5, n)).unwrap() < base);
    }
}

#[test]
fn strength_examples() {
    let p = StrengthParams::tau(1.0, 1.0, 0.0, 0.0, 3);
    assert_eq!(strength_target(&p).unwrap(), 1.0);
    let p = StrengthParams::tau(2.0, 1.0, 0.25, 0.25, 2);
    assert!((strength_target(&p).unwrap() - 1.0).abs() < 1e-15);
    let toric = StrengthParams::tau(1.0, 1.0, 0.5, 0.5, 1);
    assert!((strength_toric(&toric).unwrap() - 1.0 / 8.0).abs() < 1e-15);
    assert!(strength_toric(&StrengthParams::tau(1.0, 1.0, 0.5, 0.5, 2)).is_err());
}

#[test]
fn strength_domain_errors() {
    let bad = [
        StrengthParams::tau(1.0, 0.0, 0.1, 0.1, 1),
        StrengthParams::tau(1.0, 1.0, -0.1, 0.1, 1),
        StrengthParams::tau(1.0, 1.0, 0.1, 0.1, 0),
        StrengthParams::tau(f64::NAN, 1.0, 0.1, 0.1, 1),
        StrengthParams::omega(1.0, 1.0, 1.0, 1.0, 1),
        StrengthParams::omega(1.0, 1.0, -1.0, -1.0, 1),
    ];
    for p in bad {
        assert!(matches!(strength_target(&p), Err(QsaError::Domain(_))), "{p:?}");
    }
}

#[test]
fn params_json_uses_a_form_tag() {
    let p = StrengthParams::omega(1.0, 2.0, -3.0, 4.0, 5);
    let v = serde_json::to_value(&p).unwrap();
    assert_eq!(v["pulses"]["form"], "omega");
    let back: StrengthParams = serde_json::from_value(v).unwrap();
    assert_eq!(back, p);
    assert!(matches!(back.pulses, Pulses::Omega { .. }));
}

#[test]
fn zero_offset_gives_zero_distance() {
    assert_eq!(perturbation_distance(&program("XZY"), 0.0).unwrap(), 0.0);
}

#[test]
fn offsets_stay_within_the_pulse_budget() {
    for target in ["XX", "XZZX", "ZZZZZZ"] {
        let prog = program(target);
        for delta in [1e-2, 1e-4, 1e-6] {
            let d = perturbation_distance(&prog, delta).unwrap();
            assert!(d > 0.0);
            assert!(d <= prog.len() as f64 * delta * (1.0 + 1e-9), "{target} {delta}");
        }
    }
}

#[test]
fn common_offsets_scale_linearly() {
    let spec = LatticeSpec::wen(3, 3, Boundary::Open);
    let prog = plaquette_schedule(&spec, 1, 1, 0.25)
        .unwrap()
        .unwrap()
        .pulse_program()
        .unwrap();
    let r = error_scaling("plaquette", &prog, &[1e-2, 1e-3, 1e-4], OffsetMode::Common).unwrap();
    assert!((r.slope - 1.0).abs() <= 0.05, "{}", r.slope);
    assert_eq!(r.pulses, prog.len());
    assert_eq!(r.max_offsets, vec![1e-2, 1e-3, 1e-4]);
}

#[test]
fn random_offsets_are_bounded_and_reproducible() {
    let prog = program("XZZX");
    let mode = OffsetMode::Random { seed: 5 };
    let a = error_scaling("xzzx", &prog, &[1e-2, 1e-3, 1e-4], mode).unwrap();
    let b = error_scaling("xzzx", &prog, &[1e-2, 1e-3, 1e-4], mode).unwrap();
    assert_eq!(a, b);
    for (k, &delta) in a.deltas.iter().enumerate() {
        assert!(a.max_offsets[k] <= delta);
        assert!(a.distances[k] <= prog.len() as f64 * a.max_offsets[k] * (1.0 + 1e-9));
    }
    assert!((a.slope - 1.0).abs() <= 0.1, "{}", a.slope);
}

#[test]
fn scaling_input_validation() {
    let prog = program("XX");
    for deltas in [&[1e-2][..], &[1e-3, 1e-2], &[0.5, 1e-2], &[1e-2, 0.0], &[1e-2, 1e-2]] {
        assert!(
            matches!(error_scaling("xx", &prog, deltas, OffsetMode::Common), Err(QsaError::Domain(_))),
            "{deltas:?}"
        );
    }
}
