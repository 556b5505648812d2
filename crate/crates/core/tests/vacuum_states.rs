mod common;

use common::{all_words, c, element, k2, k3, pairing_oracle, word};
use num_complex::Complex64;
use proptest::prelude::*;
use qcmt::algebra::m;
use qcmt::gaussian::two_point;
use qcmt::gns::{positivity_probe, random_element};
use qcmt::kernels::{
    invariance_defect, kernel_as_gaussian, poincare_act, FieldKernelSpec, PoincareElement, Wavepacket,
};
use qcmt::vacuum::{
    commutation_witness, condition, extended_basis, extended_expect, extended_expect_element, extended_gram,
    extended_positivity_probe, random_extended_element, ExtendedElement, ExtendedWord,
};
use qcmt::{AlgebraElement, GaussianKernel, GaussianState, Index, State, Word};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn ext(k: &GaussianKernel, text: &str) -> ExtendedWord {
    ExtendedWord::parse(text, |s| k.find(s)).unwrap()
}

#[test]
fn factorization_examples() {
    let k = k2();
    let s = GaussianState::new(k.clone()).unwrap();
    assert_eq!(extended_expect(&s, &ExtendedWord::projector()).unwrap(), c(1.0, 0.0));
    assert_eq!(extended_expect(&s, &ext(&k, "M1*V*M2")).unwrap(), c(0.0, 0.0));
    let v = extended_expect(&s, &ext(&k, "V*M1*M2*V")).unwrap();
    assert_eq!(v, two_point(&k, &k.indices()[0], &k.indices()[1]).unwrap());
    assert_eq!(v, c(0.5, 0.0));
    // M1 M2 V M1 M2 factorizes into (1,2)²
    assert_eq!(extended_expect(&s, &ext(&k, "M1*M2*V*M1*M2")).unwrap(), c(0.25, 0.0));
}

#[test]
fn projector_is_idempotent_and_self_adjoint() {
    let k = k2();
    let v = ExtendedWord::projector();
    assert_eq!(v.concat(&v), v);
    assert_eq!(v.adjoint(), v);
    assert_eq!(ext(&k, "V*V*M1*V*V"), ext(&k, "V*M1*V"));
    assert_eq!(ext(&k, "M1*V*V*M2").projector_count(), 1);
    let a = ext(&k, "M1*M2");
    let b = ext(&k, "M2*M2*M1");
    let avb = a.concat(&v).concat(&b);
    assert_eq!(avb.adjoint(), b.adjoint().concat(&v).concat(&a.adjoint()));
}

#[test]
fn v_free_words_agree_with_base_state() {
    let k = k3();
    let s = GaussianState::new(k.clone()).unwrap();
    for w in all_words(k.indices(), 4) {
        assert_eq!(
            extended_expect(&s, &ExtendedWord::plain(w.clone())).unwrap(),
            s.expect_word(&w).unwrap()
        );
    }
}

#[test]
fn witness_examples() {
    let k = k2();
    let s = GaussianState::new(k.clone()).unwrap();
    let (i1, i2) = (k.indices()[0].clone(), k.indices()[1].clone());
    let (split, joined) = commutation_witness(&s, &i1, &i2).unwrap();
    assert_eq!(split, extended_expect(&s, &ext(&k, "M1*V*M2")).unwrap());
    assert_eq!(joined, extended_expect(&s, &ext(&k, "V*M1*M2")).unwrap());
    assert_eq!((split, joined), (c(0.0, 0.0), c(0.5, 0.0)));
    assert_ne!(split, joined);

    let (split, joined) = commutation_witness(&s, &i1, &i1).unwrap();
    assert_eq!((split, joined), (c(0.0, 0.0), c(1.0, 0.0)));

    let diag = GaussianKernel::real(&[&[1.0, 0.0], &[0.0, 1.0]]).unwrap();
    let s = GaussianState::new(diag.clone()).unwrap();
    let w = commutation_witness(&s, &diag.indices()[0], &diag.indices()[1]).unwrap();
    assert_eq!(w, (c(0.0, 0.0), c(0.0, 0.0)));
}

#[test]
fn witness_in_commutative_classical_state() {
    // the Gibbs kernel has zero commutator, yet V fails to commute with M_q
    let k = qcmt::koopman::gibbs_oscillator_kernel(1.0, 1.0, 1.0).unwrap();
    let s = GaussianState::new(k.clone()).unwrap();
    let q = k.indices()[0].clone();
    let (split, joined) = commutation_witness(&s, &q, &q).unwrap();
    assert_eq!(split, c(0.0, 0.0));
    assert_eq!(joined, c(1.0, 0.0));
}

#[test]
fn conditioning_examples() {
    let k = k2();
    let s = GaussianState::new(k.clone()).unwrap();
    let x = m(&k.indices()[0]);
    let cond = condition(s.clone(), &x).unwrap();
    let m2m2 = word(&k, "M2*M2");
    let expected = pairing_oracle(&k, &word(&k, "M1*M2*M2*M1")) / pairing_oracle(&k, &word(&k, "M1*M1"));
    assert_eq!(expected, c(1.5, 0.0));
    assert!((cond.expect_word(&m2m2).unwrap() - expected).norm() < 1e-12);
    assert!((cond.expect_word(&Word::identity()).unwrap() - c(1.0, 0.0)).norm() < 1e-15);

    let trivial = condition(s.clone(), &AlgebraElement::one()).unwrap();
    for w in all_words(k.indices(), 4) {
        assert!((trivial.expect_word(&w).unwrap() - s.expect_word(&w).unwrap()).norm() < 1e-15);
    }

    // M1 - M2 is null when K = [[1,1],[1,1]]
    let degenerate = GaussianKernel::real(&[&[1.0, 1.0], &[1.0, 1.0]]).unwrap();
    let s = GaussianState::new(degenerate.clone()).unwrap();
    let x = &m(&degenerate.indices()[0]) - &m(&degenerate.indices()[1]);
    assert!(condition(s, &x).is_err());
}

#[test]
fn conditioned_state_sees_projector_inside_sandwich() {
    let k = k2();
    let s = GaussianState::new(k.clone()).unwrap();
    let x = m(&k.indices()[0]);
    let cond = condition(s.clone(), &x).unwrap();
    // ρ_G(M1 V M1) / ρ(M1 M1) = ρ(M1)² = 0
    let v: ExtendedElement = ExtendedWord::projector().into();
    assert_eq!(cond.expect_extended(&v).unwrap(), c(0.0, 0.0));
}

fn conditioners(k: &GaussianKernel) -> Vec<AlgebraElement> {
    let i = k.indices();
    vec![
        m(&i[0]),
        &m(&i[1]) + &(&m(&i[0]) * &m(&i[2])).scale(c(0.3, -0.4)),
        &AlgebraElement::one() + &(&m(&i[2]) * &m(&i[2])).scale(c(0.0, 1.0)),
    ]
}

#[test]
fn conditioned_states_satisfy_state_axioms() {
    let k = k3();
    let s = GaussianState::new(k.clone()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for x in conditioners(&k) {
        let cond = condition(s.clone(), &x).unwrap();
        assert!((cond.expect(&AlgebraElement::one()).unwrap() - c(1.0, 0.0)).norm() < 1e-12);
        for _ in 0..40 {
            let a = random_element(k.indices(), 3, &mut rng);
            let b = random_element(k.indices(), 3, &mut rng);
            let z = c(0.7, -1.1);
            let lin = cond.expect(&(&a + &b.scale(z))).unwrap();
            let sep = cond.expect(&a).unwrap() + z * cond.expect(&b).unwrap();
            assert!((lin - sep).norm() < 1e-9 * (1.0 + sep.norm()));
            let adj = cond.expect(&a.adjoint()).unwrap();
            assert!((adj - cond.expect(&a).unwrap().conj()).norm() < 1e-9 * (1.0 + adj.norm()));
        }
        let worst = positivity_probe(&cond, k.indices(), 100, 2, &mut rng).unwrap();
        assert!(worst >= -1e-10, "{worst}");
    }
}

#[test]
fn extended_state_is_positive() {
    for k in [k2(), k3(), GaussianKernel::real(&[&[1.0, 1.0], &[1.0, 1.0]]).unwrap()] {
        let s = GaussianState::new(k.clone()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let worst = extended_positivity_probe(&s, k.indices(), 300, 2, &mut rng).unwrap();
        assert!(worst >= -1e-10, "{worst}");

        let segments = all_words(k.indices(), 1);
        let words = extended_basis(&segments, 2);
        let report = extended_gram(&words, &s, 1e-10).unwrap();
        assert!(report.hermiticity_defect() <= 1e-12);
        assert!(report.min_eigenvalue() >= -1e-10, "{}", report.min_eigenvalue());
    }
}

#[test]
fn extended_elements_follow_algebra_rules() {
    let k = k3();
    let s = GaussianState::new(k.clone()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..50 {
        let a = random_extended_element(k.indices(), 2, &mut rng);
        let b = random_extended_element(k.indices(), 2, &mut rng);
        assert_eq!((&a * &b).adjoint(), &b.adjoint() * &a.adjoint());
        let va = extended_expect_element(&s, &a.adjoint()).unwrap();
        assert!((va - extended_expect_element(&s, &a).unwrap().conj()).norm() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn factorization_over_projector(a in element(k3().indices().to_vec(), 3), b in element(k3().indices().to_vec(), 3)) {
        let s = GaussianState::new(k3()).unwrap();
        let v: ExtendedElement = ExtendedWord::projector().into();
        let avb = &(&ExtendedElement::from(&a) * &v) * &ExtendedElement::from(&b);
        let lhs = extended_expect_element(&s, &avb).unwrap();
        let rhs: Complex64 = s.expect(&a).unwrap() * s.expect(&b).unwrap();
        prop_assert!((lhs - rhs).norm() <= 1e-9 * (1.0 + rhs.norm()));
    }

    #[test]
    fn conditioned_positivity(x in element(k2().indices().to_vec(), 2), seed in any::<u64>()) {
        let s = GaussianState::new(k2()).unwrap();
        prop_assume!(s.expect(&(&x.adjoint() * &x)).unwrap().re > 1e-6);
        let cond = condition(s, &x).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let worst = positivity_probe(&cond, k2().indices(), 20, 2, &mut rng).unwrap();
        prop_assert!(worst >= -1e-10, "{}", worst);
    }
}

#[test]
fn field_kernel_invariance_hook() {
    let packets = vec![
        Wavepacket::gaussian([0.0, 0.0], 1.0, [0.0, 0.0]).unwrap(),
        Wavepacket::gaussian([0.4, 1.0], 0.9, [0.5, -0.3]).unwrap(),
    ];
    let spec = FieldKernelSpec::vacuum(1.0, 1.0).unwrap();
    let base = kernel_as_gaussian(&spec, &packets).unwrap();
    for g in [
        PoincareElement::boost(0.5),
        PoincareElement::translation(0.7, -1.3),
        PoincareElement::new(-0.25, [0.2, 0.4]),
    ] {
        assert!(invariance_defect(&spec, &packets, &g).unwrap() <= 1e-6);
        // (g(i), g(j)) = (i, j) entry by entry on the Gaussian kernel
        let moved: Vec<Wavepacket> = packets.iter().map(|p| poincare_act(&g, p)).collect();
        let kg = kernel_as_gaussian(&spec, &moved).unwrap();
        let diff = (kg.matrix() - base.matrix())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        assert!(diff <= 1e-6, "{diff}");
        let s = GaussianState::new(kg.clone()).unwrap();
        let i: Vec<Index> = kg.indices().to_vec();
        let w = Word::new(vec![i[0].clone(), i[1].clone()]);
        let base_state = GaussianState::new(base.clone()).unwrap();
        let w0 = Word::new(vec![base.indices()[0].clone(), base.indices()[1].clone()]);
        assert!((s.expect_word(&w).unwrap() - base_state.expect_word(&w0).unwrap()).norm() <= 1e-6);
    }
    let thermal = FieldKernelSpec::thermal(1.0, 1.0, 1.0).unwrap();
    assert!(invariance_defect(&thermal, &packets, &PoincareElement::boost(0.5)).unwrap() > 1e-3);
}
