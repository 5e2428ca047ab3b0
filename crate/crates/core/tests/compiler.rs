mod common;

use proptest::prelude::*;
use qsa_core::dense::{distance, expm, schedule_unitary};
use qsa_core::pauli::sum_commutes;
use qsa_core::propagator::AttachmentSpec;
use qsa_core::schedule::{
    compile, compile_resolved, depth_bound, replay_symbolic, validate, ConnectivityGraph, QsaSchedule, Resolved,
    Strategy as Route,
};
use qsa_core::{Pauli, PauliString, WeightedPauliSum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn ps(s: &str) -> PauliString {
    s.parse().unwrap()
}

fn non_identity() -> impl Strategy<Value = Pauli> {
    prop_oneof![Just(Pauli::X), Just(Pauli::Y), Just(Pauli::Z)]
}

fn target(n: usize) -> impl Strategy<Value = PauliString> {
    prop::collection::vec(non_identity(), n).prop_map(|l| PauliString::new(l, 0).unwrap())
}

fn attached_sites(s: &QsaSchedule) -> Vec<usize> {
    s.layers.iter().flatten().map(|a| a.attached_site()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn compiled_schedules_replay_and_validate(n in 2usize..=12, seed in any::<u64>(), letters in prop::collection::vec(non_identity(), 12)) {
        let t = PauliString::new(letters[..n].to_vec(), 0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = common::random_graph(&mut rng, n);
        let s = compile(&t, &g, Route::Auto).unwrap();
        prop_assert_eq!(replay_symbolic(&s).unwrap(), t);
        prop_assert!(validate(&s, &g).is_clean());
    }

    #[test]
    fn complete_graph_depth_is_optimal(t in (2usize..=20).prop_flat_map(target)) {
        let n = t.n_sites();
        let (s, how) = compile_resolved(&t, &ConnectivityGraph::complete(n), Route::Auto).unwrap();
        prop_assert_eq!(how, Resolved::Doubling);
        prop_assert_eq!(s.depth(), depth_bound(n, Route::Doubling).unwrap());
    }

    #[test]
    fn line_depths_are_optimal(t in (2usize..=14).prop_flat_map(target)) {
        let n = t.n_sites();
        let g = ConnectivityGraph::path(n);
        for strategy in [Route::LineEndpoints, Route::SingleEndpoint] {
            let s = compile(&t, &g, strategy).unwrap();
            prop_assert_eq!(s.depth(), depth_bound(n, strategy).unwrap());
            prop_assert!(validate(&s, &g).is_clean());
        }
    }

    #[test]
    fn letters_only_change_letters(a in (2usize..=12).prop_flat_map(target), b_letters in prop::collection::vec(non_identity(), 12)) {
        let n = a.n_sites();
        let b = PauliString::new(b_letters[..n].to_vec(), 0).unwrap();
        let g = ConnectivityGraph::path_with_next_nearest(n);
        let sa = compile(&a, &g, Route::Auto).unwrap();
        let sb = compile(&b, &g, Route::Auto).unwrap();
        prop_assert_eq!(sa.depth(), sb.depth());
        prop_assert_eq!(sa.seed.string.support(), sb.seed.string.support());
        prop_assert_eq!(attached_sites(&sa), attached_sites(&sb));
        let conn = |s: &QsaSchedule| s.layers.iter().flatten().map(|x| x.connector_site()).collect::<Vec<_>>();
        prop_assert_eq!(conn(&sa), conn(&sb));
    }

    #[test]
    fn identity_sites_are_never_driven(letters in prop::collection::vec(prop_oneof![Just(Pauli::I), Just(Pauli::X), Just(Pauli::Y), Just(Pauli::Z)], 3..=10)) {
        let t = PauliString::new(letters, 0).unwrap();
        prop_assume!(t.weight() >= 2);
        let g = ConnectivityGraph::complete(t.n_sites());
        let s = compile(&t, &g, Route::Auto).unwrap();
        let support = t.support();
        let mut touched = s.seed.string.support();
        for a in s.layers.iter().flatten() {
            touched.push(a.connector_site());
            touched.push(a.attached_site());
        }
        touched.extend(s.final_swappers.iter().map(|w| w.site()));
        prop_assert!(touched.iter().all(|x| support.contains(x)));
    }

    #[test]
    fn consecutive_layers_obstruct(t in (5usize..=12).prop_flat_map(target)) {
        let s = compile(&t, &ConnectivityGraph::complete(t.n_sites()), Route::Auto).unwrap();
        for l in 0..s.depth() {
            let gens = s.layer_generators(l).unwrap();
            for (i, a) in gens.iter().enumerate() {
                for b in &gens[i + 1..] {
                    prop_assert!(sum_commutes(a, b).unwrap());
                }
            }
        }
        for l in 1..s.depth() {
            let prev: Vec<(&AttachmentSpec, WeightedPauliSum)> =
                s.layers[l - 1].iter().zip(s.layer_generators(l - 1).unwrap()).collect();
            for (spec, g) in s.layers[l].iter().zip(s.layer_generators(l).unwrap()) {
                for (p, pg) in &prev {
                    let sites = [p.connector_site(), p.attached_site()];
                    if sites.contains(&spec.connector_site()) || sites.contains(&spec.attached_site()) {
                        prop_assert!(!sum_commutes(pg, &g).unwrap());
                    }
                }
            }
        }
    }
}

#[test]
fn plaquette_schedule_shape() {
    let s = compile(&ps("XZZX"), &ConnectivityGraph::complete(4), Route::Auto).unwrap();
    assert_eq!(s.depth(), 1);
    assert_eq!(s.layers[0].len(), 2);
    assert_eq!(s.seed.string.support(), vec![1, 2]);
    assert_eq!(replay_symbolic(&s).unwrap(), ps("XZZX"));
    assert!(validate(&s, &ConnectivityGraph::complete(4)).is_clean());
}

#[test]
fn eight_site_doubling_matches_dense() {
    let t = PauliString::new(vec![Pauli::X; 8], 0).unwrap();
    let s = compile(&t, &ConnectivityGraph::complete(8), Route::Doubling)
        .unwrap()
        .with_tg(0.1);
    assert_eq!(s.depth(), 2);
    let want = expm(&WeightedPauliSum::from_string(&t).unwrap(), 0.1).unwrap();
    assert!(distance(&schedule_unitary(&s).unwrap(), &want).unwrap() <= 1e-10);
}

#[test]
fn ten_sites_on_next_nearest_line() {
    let t = PauliString::new(vec![Pauli::Z; 10], 0).unwrap();
    let g = ConnectivityGraph::path_with_next_nearest(10);
    let s = compile(&t, &g, Route::LineEndpoints).unwrap();
    assert_eq!(s.depth(), 4);
    assert!(validate(&s, &g).is_clean());
}

#[test]
fn depth_bound_examples() {
    assert_eq!(depth_bound(4, Route::Doubling).unwrap(), 1);
    assert_eq!(depth_bound(10, Route::LineEndpoints).unwrap(), 4);
    assert_eq!(depth_bound(5, Route::SingleEndpoint).unwrap(), 3);
}

#[test]
fn validator_names_violations() {
    let g = ConnectivityGraph::complete(4);
    let mut s = compile(&ps("XZZX"), &g, Route::Auto).unwrap();
    let first = s.layers[0][0];
    s.layers[0][1] = AttachmentSpec::new(first.connector_site(), first.beta(), first.alpha(), 3, Pauli::X).unwrap();
    let names: Vec<&str> = validate(&s, &g).violations.iter().map(|v| v.name()).collect();
    assert!(names.contains(&"layer_disjointness"));

    let mut stale = compile(&ps("XZZX"), &g, Route::Auto).unwrap();
    let a = stale.layers[0][0];
    let seed_site = stale
        .seed
        .string
        .support()
        .into_iter()
        .find(|&x| x != a.connector_site())
        .unwrap();
    stale.layers[0][0] = AttachmentSpec::new(a.connector_site(), a.alpha(), a.beta(), seed_site, Pauli::X).unwrap();
    let names: Vec<&str> = validate(&stale, &g).violations.iter().map(|v| v.name()).collect();
    assert!(names.contains(&"freshness"));
}

#[test]
fn random_schedules_validate_and_match_dense() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..40 {
        let n = 2 + (rand::Rng::random_range(&mut rng, 0..6));
        let s = common::random_schedule(&mut rng, n);
        assert!(validate(&s, &ConnectivityGraph::complete(n)).is_clean());
        let want = expm(&WeightedPauliSum::from_string(&s.target).unwrap(), s.seed.tg).unwrap();
        assert!(distance(&schedule_unitary(&s).unwrap(), &want).unwrap() <= 1e-10);
    }
}

#[test]
fn schedule_json_round_trip() {
    let s = compile(&ps("XZYZX"), &ConnectivityGraph::path_with_next_nearest(5), Route::Auto).unwrap();
    let text = serde_json::to_string(&s).unwrap();
    let back: QsaSchedule = serde_json::from_str(&text).unwrap();
    assert_eq!(back, s);
}
