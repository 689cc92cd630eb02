use czgate::channel::{gate_superop, KrausFamily, QuantizedMask, Superoperator};
use czgate::dynamics::{pulse_action, BasisIndex, Ion, LevelPair, Level, Protocol, Pulse, Transition};
use czgate::field::{certified_tail, choose_window, evaluate_sum, poisson_weight, CoherentField, SumSpec};
use czgate::linalg::{hermiticity_defect, kron_conj, max_abs_diff, unvectorize, vectorize, Matrix12};
use czgate::metrics::{expected_state, failure_probability, InitialQubitState};
use num_complex::Complex64;
use proptest::prelude::*;
use std::sync::OnceLock;

fn gate() -> &'static Superoperator {
    static GATE: OnceLock<Superoperator> = OnceLock::new();
    GATE.get_or_init(|| gate_superop(&Protocol::cz_cnot(1e3, 1e-14).unwrap(), QuantizedMask::ALL_QUANTIZED).unwrap())
}

fn complex() -> impl Strategy<Value = Complex64> {
    (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(re, im)| Complex64::new(re, im))
}

fn matrix() -> impl Strategy<Value = Matrix12> {
    proptest::collection::vec(complex(), 144).prop_map(Matrix12::from_iterator)
}

fn amplitudes() -> impl Strategy<Value = [Complex64; 4]> {
    [complex(), complex(), complex(), complex()]
        .prop_filter("nonzero", |a| a.iter().map(|z| z.norm_sqr()).sum::<f64>() > 1e-3)
}

fn level() -> impl Strategy<Value = Level> {
    prop_oneof![Just(Level::Zero), Just(Level::One), Just(Level::Aux)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn vec_identity(e in matrix(), rho in matrix()) {
        let lhs = vectorize(&(e * rho * e.adjoint()));
        let rhs = kron_conj(&e, &e) * vectorize(&rho);
        prop_assert!(max_abs_diff(&lhs, &rhs) < 1e-12);
        prop_assert_eq!(unvectorize(&vectorize(&rho)), rho);
    }

    #[test]
    fn pulse_columns_are_normalized(
        area in 0.0..4.0f64,
        phase in -3.2..3.2f64,
        nbar in 1.0..1e6f64,
        n in 0u64..2_000_000,
        s in 0usize..12,
        sideband in any::<bool>(),
        upper_phonon in 0u8..2,
        upper in level(),
        lower in level(),
    ) {
        prop_assume!(upper != lower);
        let field = CoherentField::new(nbar, 1e-10).unwrap();
        let transition = if sideband { Transition::Sideband { upper_phonon } } else { Transition::Carrier };
        let pulse = Pulse::new(transition, Ion::Y, LevelPair::new(upper, lower), area, phase, field).unwrap();
        let a = pulse_action(&pulse, BasisIndex::from_index(s).unwrap(), n);
        let p = a.probability();
        // a lower state at n = 0 has θ₀ = 0 and no flip branch
        prop_assert!((p - 1.0).abs() < 1e-12, "{}", p);
    }

    #[test]
    fn failure_probability_is_phase_invariant_and_bounded(
        amps in amplitudes(),
        phase in -3.2..3.2f64,
        t in 0u64..12,
    ) {
        let (a, _) = InitialQubitState::from_amplitudes("a", amps).unwrap();
        let rot = Complex64::from_polar(1.0, phase);
        let (b, _) = InitialQubitState::from_amplitudes("b", amps.map(|z| z * rot)).unwrap();
        let pa = failure_probability(gate(), &a, t).unwrap();
        let pb = failure_probability(gate(), &b, t).unwrap();
        prop_assert!((pa - pb).abs() < 1e-12);
        prop_assert!((-1e-12..=1.0 + 1e-8).contains(&pa), "{}", pa);
        if t == 0 {
            prop_assert!(pa.abs() < 1e-14);
        }
    }

    #[test]
    fn channel_preserves_hermiticity(amps in amplitudes()) {
        let (s, _) = InitialQubitState::from_amplitudes("s", amps).unwrap();
        let out = gate().apply(&s.density());
        prop_assert!(hermiticity_defect(&out) < 1e-14);
    }

    #[test]
    fn expected_state_has_period_two(amps in amplitudes(), t in 0u64..1000) {
        let (s, _) = InitialQubitState::from_amplitudes("s", amps).unwrap();
        prop_assert_eq!(expected_state(&s, t), expected_state(&s, t + 2));
        prop_assert!((expected_state(&s, t).norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn chosen_window_meets_its_budget(nbar in 0.05..1e9f64, exp in 1.0..15.0f64) {
        let eps = 10f64.powf(-exp);
        let w = choose_window(nbar, eps).unwrap();
        prop_assert!(certified_tail(nbar, w) <= eps);
        prop_assert!(w.contains(nbar.floor() as u64));
    }

    #[test]
    fn poisson_weights_follow_the_ratio_recurrence(nbar in 0.1..1e7f64, offset in -5.0..5.0f64) {
        let n = (nbar + offset * nbar.sqrt()).max(0.0).floor() as u64;
        let w0 = poisson_weight(nbar, n);
        let w1 = poisson_weight(nbar, n + 1);
        prop_assume!(w0 > 1e-250);
        let ratio = w1 / w0 * (n + 1) as f64 / nbar;
        prop_assert!((ratio - 1.0).abs() < 1e-12, "{}", ratio);
    }

    #[test]
    fn poisson_mass_sums_to_one(nbar in 0.1..1e5f64) {
        let f = CoherentField::new(nbar, 1e-15).unwrap();
        let est = evaluate_sum(&SumSpec::unity(), &f, 1e-13).unwrap();
        prop_assert!((est.value - 1.0).abs() < 1e-13);
    }
}

#[test]
fn quantized_families_are_complete_across_means() {
    for nbar in [0.5, 3.0, 40.0, 1e5] {
        for pulse in Protocol::cz_cnot(nbar, 1e-14).unwrap().steps {
            let fam = KrausFamily::from_pulse(&pulse).unwrap();
            assert!(fam.completeness_defect() < 1e-13, "{nbar}: {}", fam.completeness_defect());
        }
    }
}
