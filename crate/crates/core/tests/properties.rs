//! Randomized invariants of the affine algebra, encoders, spec files and engine.

mod common;

use affine_am::affine::{AffineOperator, AffineState};
use affine_am::encoders::{digit_append, encode_value, exponent_encoder, polynomial_encoder, DigitTarget};
use affine_am::engine::{evaluate_exact, evaluate_worst_case, monte_carlo, EngineConfig, Objective};
use affine_am::machine::VerifierSpec;
use affine_am::protocols::build_middle;
use affine_am::rational::{abs, format_rational, int, one, parse_rational, rat, zero, Rational};
use proptest::prelude::*;

fn small() -> impl Strategy<Value = Rational> {
    (-6i64..=6, 1i64..=5).prop_map(|(n, d)| rat(n, d))
}

/// Entries of a `dim x dim` matrix whose last row is then chosen to balance each column.
fn operator(dim: usize) -> impl Strategy<Value = AffineOperator> {
    prop::collection::vec(small(), dim * (dim - 1)).prop_map(move |free| {
        let mut rows: Vec<Vec<Rational>> = free.chunks(dim).map(|c| c.to_vec()).collect();
        let last = (0..dim)
            .map(|c| one() - rows.iter().map(|r| r[c].clone()).sum::<Rational>())
            .collect();
        rows.push(last);
        AffineOperator::new(rows).unwrap()
    })
}

fn state(dim: usize) -> impl Strategy<Value = AffineState> {
    prop::collection::vec(small(), dim - 1).prop_map(|mut v| {
        let s: Rational = v.iter().sum();
        v.push(one() - s);
        AffineState::new(v).unwrap()
    })
}

fn op_and_state() -> impl Strategy<Value = (AffineOperator, AffineOperator, AffineState)> {
    (2usize..=4).prop_flat_map(|d| (operator(d), operator(d), state(d)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn apply_keeps_the_sum_at_one((m, _, v) in op_and_state()) {
        let w = m.apply(&v).unwrap();
        prop_assert_eq!(w.entries().iter().sum::<Rational>(), one());
    }

    #[test]
    fn compose_matches_sequential_application((g, f, v) in op_and_state()) {
        let gf = AffineOperator::compose(&g, &f).unwrap();
        prop_assert!(gf.column_sum_violations().is_empty());
        prop_assert_eq!(gf.apply(&v).unwrap(), g.apply(&f.apply(&v).unwrap()).unwrap());
        prop_assert_eq!(AffineOperator::chain(&[&f, &g]).unwrap(), gf);
    }

    #[test]
    fn inverse_is_affine_and_undoes((m, _, v) in op_and_state()) {
        if let Ok(inv) = m.inverse() {
            prop_assert!(inv.column_sum_violations().is_empty());
            prop_assert!(AffineOperator::compose(&inv, &m).unwrap().is_identity());
            prop_assert_eq!(inv.apply(&m.apply(&v).unwrap()).unwrap(), v);
        }
    }

    #[test]
    fn weighting_is_a_distribution((_, _, v) in op_and_state()) {
        let w = v.weight();
        prop_assert_eq!(w.probabilities.iter().sum::<Rational>(), one());
        prop_assert!(w.probabilities.iter().all(|p| *p >= zero()));
        prop_assert!(w.l1_norm >= one());
        for (p, e) in w.probabilities.iter().zip(v.entries()) {
            prop_assert_eq!(p * &w.l1_norm, abs(e));
        }
    }

    #[test]
    fn rational_text_round_trips(n in any::<i64>(), d in 1i64..=i64::MAX) {
        let x = rat(n, d);
        prop_assert_eq!(parse_rational(&format_rational(&x)).unwrap(), x);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2_000))]

    #[test]
    fn digits_fold_to_their_value(base in 2u32..=12, raw in prop::collection::vec(0u32..1000, 0..12)) {
        let digits: Vec<u32> = raw.iter().map(|d| d % base).collect();
        let v = encode_value(&digits, base).unwrap();
        let expected = digits.iter().fold(zero(), |acc, &d| acc * int(base as i64) + int(d as i64));
        prop_assert_eq!(v.entry(0), &one());
        prop_assert_eq!(v.entry(1), &expected);
        prop_assert_eq!(v.entry(2), &-expected.clone());
    }

    #[test]
    fn second_and_third_banks_are_independent(
        base in 2u32..=6,
        ops in prop::collection::vec((any::<bool>(), 0u32..6), 0..10),
    ) {
        let mut v = AffineState::basis(4, 0);
        let (mut a, mut b) = (zero(), zero());
        for &(second, d) in &ops {
            let d = d % base;
            let n = int(base as i64);
            if second {
                v = digit_append(base, d, DigitTarget::Second).unwrap().apply(&v).unwrap();
                a = a * &n + int(d as i64);
            } else {
                v = digit_append(base, d, DigitTarget::Third).unwrap().apply(&v).unwrap();
                b = b * &n + int(d as i64);
            }
        }
        prop_assert_eq!(v.entry(1), &a);
        prop_assert_eq!(v.entry(2), &b);
        prop_assert_eq!(v.entry(3), &(-a - b));
    }

    #[test]
    fn polynomial_encoder_tracks_p(coeffs in prop::collection::vec(small(), 1..=4), l in 0usize..10) {
        let degree = coeffs.len() - 1;
        let bank = polynomial_encoder(&coeffs, degree);
        let x = int(l as i64);
        let expected = coeffs.iter().rev().fold(zero(), |acc, c| acc * &x + c);
        let v = bank.after(l);
        prop_assert_eq!(bank.value(&v), expected);
        prop_assert_eq!(v.entries().iter().sum::<Rational>(), one());
    }

    #[test]
    fn exponent_encoder_tracks_powers(n in 1i64..=9, d in 1i64..=9, l in 0usize..12) {
        let a = rat(n.min(d), d);
        let v = exponent_encoder(&a).after(l);
        let mut p = one();
        for _ in 0..l {
            p *= &a;
        }
        prop_assert_eq!(v.entry(0), &p);
        prop_assert_eq!(v.entry(1), &(one() - p));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn spec_json_round_trips(seed in any::<u64>()) {
        let spec = common::random_spec(seed);
        let text = spec.to_json();
        let back = VerifierSpec::from_json(&text).unwrap();
        prop_assert_eq!(&back, &spec);
        prop_assert_eq!(back.to_json(), text);
    }

    #[test]
    fn exact_masses_sum_to_one_and_optimum_dominates(seed in any::<u64>(), salt in any::<u64>()) {
        let spec = common::random_spec(seed);
        let mut r = common::rng(salt);
        let word = common::random_word(&mut r, 4);
        let tape = spec.tape_str(&word).unwrap();
        let cfg = EngineConfig { horizon: 40, node_cap: 200_000 };
        let prover = common::random_sequence(&mut r, spec.comm_alphabet.len());
        let exact = evaluate_exact(&spec, &tape, &prover, &cfg).unwrap();
        prop_assert_eq!(exact.total(), one());
        let best = evaluate_worst_case(&spec, &tape, &Objective::accept(), &cfg).unwrap();
        prop_assert!(best.value >= exact.p_accept);
        prop_assert_eq!(best.value, best.result.p_accept);
    }

    #[test]
    fn sampling_is_seeded(seed in any::<u64>(), salt in any::<u64>()) {
        let spec = common::random_spec(seed);
        let mut r = common::rng(salt);
        let tape = spec.tape_str(&common::random_word(&mut r, 4)).unwrap();
        let prover = common::random_sequence(&mut r, spec.comm_alphabet.len());
        let cfg = EngineConfig { horizon: 40, node_cap: 200_000 };
        let a = monte_carlo(&spec, &tape, &prover, 50, salt, &cfg).unwrap();
        let b = monte_carlo(&spec, &tape, &prover, 50, salt, &cfg).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(a.outcomes, b.outcomes);
        prop_assert_eq!(a.accepts + a.rejects + a.unresolved, 50);
    }

    #[test]
    fn middle_bounds_hold_for_any_epsilon(n in 1i64..=99, bits in prop::collection::vec(any::<bool>(), 0..9)) {
        let eps = rat(n, 200);
        let bundle = build_middle(&eps).unwrap();
        let word: String = bits.iter().map(|&b| if b { '1' } else { '0' }).collect();
        let cfg = EngineConfig::default();
        let tape = bundle.tape(&word).unwrap();
        let best = evaluate_worst_case(&bundle.verifier, &tape, &Objective::accept(), &cfg).unwrap();
        if bundle.is_member(&word).unwrap() {
            prop_assert_eq!(bundle.evaluate_honest(&word, &cfg).unwrap().p_accept, one());
        } else {
            prop_assert!(best.value <= eps);
        }
    }
}
