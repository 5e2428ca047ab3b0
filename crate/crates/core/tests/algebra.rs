use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};

use num_complex::Complex64;
use proptest::prelude::*;
use qsa_core::dense::{distance, expm, to_matrix, DenseOperator};
use qsa_core::pauli::{commutes, multiply, square, sum_commutes};
use qsa_core::propagator::{
    apply_swap, conjugate, conjugate_strict, make_attachment, make_swapper, AttachmentSpec, InvolutionRotation,
    SwapperSpec,
};
use qsa_core::{Pauli, PauliString, QsaError, WeightedPauliSum};

fn ps(s: &str) -> PauliString {
    s.parse().unwrap()
}

fn letter() -> impl Strategy<Value = Pauli> {
    prop_oneof![Just(Pauli::I), Just(Pauli::X), Just(Pauli::Y), Just(Pauli::Z)]
}

fn non_identity() -> impl Strategy<Value = Pauli> {
    prop_oneof![Just(Pauli::X), Just(Pauli::Y), Just(Pauli::Z)]
}

fn string(n: usize) -> impl Strategy<Value = PauliString> {
    (prop::collection::vec(letter(), n), 0u8..4).prop_map(|(l, k)| PauliString::new(l, k).unwrap())
}

fn strings(count: usize) -> impl Strategy<Value = Vec<PauliString>> {
    (1usize..=8).prop_flat_map(move |n| prop::collection::vec(string(n), count))
}

fn scaled_identity(n: usize, c: Complex64) -> DenseOperator {
    DenseOperator::identity(n).unwrap().scale(c)
}

fn attachment(n: usize) -> impl Strategy<Value = AttachmentSpec> {
    (0..n, 1..n, non_identity(), 1usize..3, non_identity()).prop_map(move |(c, off, alpha, b, m)| {
        let others: Vec<Pauli> = Pauli::NON_IDENTITY.into_iter().filter(|&p| p != alpha).collect();
        AttachmentSpec::new(c, alpha, others[b - 1], (c + off) % n, m).unwrap()
    })
}

proptest! {
    #[test]
    fn product_is_associative(v in strings(3)) {
        let ab_c = multiply(&multiply(&v[0], &v[1]).unwrap(), &v[2]).unwrap();
        let a_bc = multiply(&v[0], &multiply(&v[1], &v[2]).unwrap()).unwrap();
        prop_assert_eq!(ab_c, a_bc);
    }

    #[test]
    fn product_matches_dense_matrices(v in strings(2)) {
        let ab = to_matrix(&multiply(&v[0], &v[1]).unwrap()).unwrap();
        let dense = to_matrix(&v[0]).unwrap().mul(&to_matrix(&v[1]).unwrap()).unwrap();
        prop_assert!(distance(&ab, &dense).unwrap() <= 1e-12);
    }

    #[test]
    fn phases_add_mod_four(v in strings(2)) {
        let bare = |p: &PauliString| p.clone().with_phase(0);
        let full = multiply(&v[0], &v[1]).unwrap();
        let base = multiply(&bare(&v[0]), &bare(&v[1])).unwrap();
        prop_assert_eq!(full.phase(), (base.phase() + v[0].phase() + v[1].phase()) % 4);
    }

    #[test]
    fn commutation_matches_dense_commutator(v in strings(2)) {
        let a = to_matrix(&v[0]).unwrap();
        let b = to_matrix(&v[1]).unwrap();
        let comm = distance(&a.mul(&b).unwrap(), &b.mul(&a).unwrap()).unwrap();
        prop_assert_eq!(commutes(&v[0], &v[1]).unwrap(), comm <= 1e-12);
    }

    #[test]
    fn self_product_is_phase_squared(v in strings(1)) {
        let a = &v[0];
        let sq = multiply(a, a).unwrap();
        prop_assert!(sq.is_identity());
        prop_assert_eq!(sq.phase(), (2 * a.phase()) % 4);
    }

    #[test]
    fn literal_round_trip(v in strings(1)) {
        let text = v[0].to_string();
        prop_assert_eq!(text.parse::<PauliString>().unwrap(), v[0].clone());
    }

    #[test]
    fn generators_are_involutions(spec in attachment(5), site in 0usize..5, a in non_identity(), k in 1usize..3) {
        prop_assert!(square(&spec.generator(5).unwrap()).is_identity());
        let others: Vec<Pauli> = Pauli::NON_IDENTITY.into_iter().filter(|&p| p != a).collect();
        let sw = SwapperSpec::new(site, a, others[k - 1]).unwrap();
        prop_assert!(square(&sw.generator(5).unwrap()).is_identity());
    }

    #[test]
    fn swap_twice_is_identity(q in string(4), site in 0usize..4, k in 1usize..3) {
        let found = q.letter(site);
        prop_assume!(!found.is_identity());
        let others: Vec<Pauli> = Pauli::NON_IDENTITY.into_iter().filter(|&p| p != found).collect();
        let sw = SwapperSpec::new(site, found, others[k - 1]).unwrap();
        let once = apply_swap(&q, &sw).unwrap();
        prop_assert_eq!(once.letter(site), others[k - 1]);
        prop_assert_eq!(apply_swap(&once, &sw).unwrap(), q);
    }

    #[test]
    fn conjugation_is_multiplicative(q in string(3), q2 in string(3), spec in attachment(3)) {
        let q = q.with_phase(0);
        let q2 = q2.with_phase(0);
        let r = make_attachment(&spec, 3).unwrap().forward;
        let prod = multiply(&q, &q2).unwrap();
        prop_assume!(prod.is_hermitian());
        let lhs = to_matrix(&conjugate(&prod, &r).unwrap()).unwrap();
        let dense_prod = to_matrix(&conjugate(&q, &r).unwrap()).unwrap()
            .mul(&to_matrix(&conjugate(&q2, &r).unwrap()).unwrap()).unwrap();
        prop_assert!(distance(&lhs, &dense_prod).unwrap() <= 1e-12);
    }

    #[test]
    fn conjugation_matches_dense(q in string(3), spec in attachment(3)) {
        let q = q.with_phase(0);
        let r = make_attachment(&spec, 3).unwrap().forward;
        let u = expm(r.generator(), r.angle()).unwrap();
        let want = u.mul(&to_matrix(&q).unwrap()).unwrap().mul(&u.adjoint()).unwrap();
        let got = to_matrix(&conjugate(&q, &r).unwrap()).unwrap();
        prop_assert!(distance(&got, &want).unwrap() <= 1e-12);
    }

    #[test]
    fn propagator_lifting(q in string(5), spec in attachment(5), tg in -3.0f64..3.0) {
        let q = q.with_phase(0);
        prop_assume!(!q.is_identity());
        let r = make_attachment(&spec, 5).unwrap().forward;
        let Ok(lifted) = conjugate_strict(&q, &r) else { return Ok(()); };
        let u = expm(r.generator(), r.angle()).unwrap();
        let inner = expm(&WeightedPauliSum::from_string(&q).unwrap(), tg).unwrap();
        let lhs = u.mul(&inner).unwrap().mul(&u.adjoint()).unwrap();
        let rhs = expm(&WeightedPauliSum::from_string(&lifted).unwrap(), tg).unwrap();
        prop_assert!(distance(&lhs, &rhs).unwrap() <= 1e-10);
    }

    #[test]
    fn attachment_moves_connector_letter(
        stable in string(4),
        spec in attachment(4),
    ) {
        let mut q = stable.with_phase(0);
        q.set_letter(spec.connector_site(), spec.alpha());
        q.set_letter(spec.attached_site(), Pauli::I);
        let r = make_attachment(&spec, 4).unwrap().forward;
        let out = conjugate_strict(&q, &r).unwrap();
        prop_assert_eq!(out.letter(spec.connector_site()), spec.beta());
        prop_assert_eq!(out.letter(spec.attached_site()), spec.attached_letter());
        for site in 0..4 {
            if site != spec.connector_site() && site != spec.attached_site() {
                prop_assert_eq!(out.letter(site), q.letter(site));
            }
        }
    }
}

#[test]
fn two_site_product_example() {
    assert_eq!(multiply(&ps("XZ"), &ps("ZZ")).unwrap(), ps("-iYI"));
}

#[test]
fn attachment_sum_commutation_examples() {
    let r = FRAC_1_SQRT_2;
    let h = |a: &str, b: &str| WeightedPauliSum::new(5, [(r, ps(a)), (r, ps(b))]).unwrap();
    let h1 = h("IXXII", "IIZII");
    let h2 = h("IIIXX", "IIIZI");
    let h0 = h("XXIII", "IZIII");
    assert!(sum_commutes(&h1, &h2).unwrap());
    assert!(!sum_commutes(&h0, &h1).unwrap());
    assert!(sum_commutes(&h1, &h1).unwrap());
}

#[test]
fn attachment_forward_pulse_is_i_times_generator() {
    let spec = AttachmentSpec::new(2, Pauli::Z, Pauli::X, 0, Pauli::X).unwrap();
    let pair = make_attachment(&spec, 3).unwrap();
    let g = spec.generator(3).unwrap();
    let want = WeightedPauliSum::new(3, [(FRAC_1_SQRT_2, ps("IIZ")), (FRAC_1_SQRT_2, ps("XIX"))]).unwrap();
    assert_eq!(g, want);
    let u = expm(pair.forward.generator(), pair.forward.angle()).unwrap();
    let ih = to_matrix(&g).unwrap().scale(Complex64::new(0.0, 1.0));
    assert!(distance(&u, &ih).unwrap() <= 1e-12);
    assert!((pair.forward.angle() + FRAC_PI_2).abs() < 1e-15);
}

#[test]
fn swapper_pulses_cancel() {
    let spec = SwapperSpec::new(1, Pauli::Z, Pauli::Y).unwrap();
    let g = spec.generator(2).unwrap();
    let want = WeightedPauliSum::new(2, [(FRAC_1_SQRT_2, ps("IZ")), (FRAC_1_SQRT_2, ps("IY"))]).unwrap();
    assert_eq!(g, want);
    let pair = make_swapper(&spec, 2).unwrap();
    let f = expm(pair.forward.generator(), pair.forward.angle()).unwrap();
    let i = expm(pair.inverse.generator(), pair.inverse.angle()).unwrap();
    let id = scaled_identity(2, Complex64::new(1.0, 0.0));
    assert!(distance(&f.mul(&i).unwrap(), &id).unwrap() <= 1e-12);
}

#[test]
fn plaquette_conjugation_chain() {
    let first = AttachmentSpec::new(2, Pauli::Z, Pauli::X, 0, Pauli::X).unwrap();
    let r1 = make_attachment(&first, 4).unwrap().forward;
    assert_eq!(conjugate_strict(&ps("IXXI"), &r1).unwrap(), ps("XXZI"));
    let second = AttachmentSpec::new(1, Pauli::Z, Pauli::X, 3, Pauli::X).unwrap();
    let r2 = make_attachment(&second, 4).unwrap().forward;
    assert_eq!(conjugate_strict(&ps("XXZI"), &r2).unwrap(), ps("XZZX"));
}

#[test]
fn disjoint_string_is_unchanged() {
    let r = InvolutionRotation::from_string(&ps("IZ"), 0.7).unwrap();
    assert_eq!(conjugate_strict(&ps("XI"), &r).unwrap(), ps("XI"));
}

#[test]
fn swap_errors() {
    assert!(SwapperSpec::new(0, Pauli::X, Pauli::X).is_err());
    let sw = SwapperSpec::new(1, Pauli::X, Pauli::Y).unwrap();
    assert!(matches!(apply_swap(&ps("XZ"), &sw), Err(QsaError::ConnectorMismatch { .. })));
    let zy = SwapperSpec::new(1, Pauli::Z, Pauli::Y).unwrap();
    assert_eq!(apply_swap(&ps("XZX"), &zy).unwrap(), ps("XYX"));
}
