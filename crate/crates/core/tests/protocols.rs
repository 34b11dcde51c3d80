//! Completeness and soundness of the bundled protocols on small inputs.

use affine_am::engine::{
    evaluate_exact, evaluate_worst_case, evaluate_worst_case_rounds, round_fixpoint, EngineConfig, Objective,
};
use affine_am::protocols::{
    build_atm, build_kg, build_mpal, build_reduction, build_weak_tm, AtmProver, ChoiceRule, KgInstance, Kind,
    ProtocolBundle,
};
use affine_am::rational::{one, rat};
use affine_am::tm::sample_machines;

fn cfg() -> EngineConfig {
    EngineConfig::default()
}

fn words(alphabet: &[char], max_len: usize) -> Vec<String> {
    let mut all = vec![String::new()];
    let mut layer = vec![String::new()];
    for _ in 0..max_len {
        layer = layer.iter().flat_map(|w| alphabet.iter().map(move |c| format!("{w}{c}"))).collect();
        all.extend(layer.iter().cloned());
    }
    all
}

/// Honest overall acceptance is exactly 1 on members.
fn complete_on(bundle: &ProtocolBundle, inputs: &[String]) -> usize {
    let mut members = 0;
    for w in inputs {
        if !bundle.is_member(w).unwrap() {
            continue;
        }
        members += 1;
        let (r, closure) = bundle.honest_overall(w, &cfg()).unwrap();
        let overall = closure.map(|c| c.overall_accept).unwrap_or(r.p_accept);
        assert_eq!(overall, one(), "{} on {w:?}", bundle.name);
    }
    members
}

#[test]
fn mpal_is_sound_against_the_optimal_prover() {
    let eps = rat(1, 4);
    let bundle = build_mpal(&['a', 'b'], &eps).unwrap();
    let inputs = words(&['a', 'b', '$'], 4);
    assert!(complete_on(&bundle, &inputs) > 0);
    for w in inputs.iter().filter(|w| !bundle.is_member(w).unwrap()) {
        let tape = bundle.tape(w).unwrap();
        let best = evaluate_worst_case(&bundle.verifier, &tape, &Objective::accept(), &cfg()).unwrap();
        assert!(best.value <= eps, "{w:?}: {}", best.value);
    }
}

#[test]
fn weak_tm_accepts_machine_members() {
    let machines = sample_machines();
    for name in ["zero-n-one-n", "palindrome"] {
        let bundle = build_weak_tm(&machines[name], &rat(1, 3)).unwrap();
        assert!(complete_on(&bundle, &words(&['0', '1'], 4)) > 0, "{name}");
    }
}

/// Optimal-prover search on the stream verifier is out of reach, so soundness is checked
/// against every deterministic resolution of the existential branches.
#[test]
fn atm_rounds_are_complete_and_sound() {
    let eps = rat(1, 3);
    let bundle = build_atm(&sample_machines()["toy-atm"], &eps).unwrap();
    let Kind::Stream(info) = &bundle.kind else { panic!("stream bundle") };
    let inputs = words(&['0', '1'], 2);
    assert!(complete_on(&bundle, &inputs) > 0);
    for w in inputs.iter().filter(|w| !bundle.is_member(w).unwrap()) {
        let tape = bundle.tape(w).unwrap();
        let configs = AtmProver::honest(info, &bundle.verifier, w).unwrap().existential_configs();
        assert!(configs.len() < 12, "{w:?}: {} existential configurations", configs.len());
        for mask in 0u32..(1 << configs.len()) {
            let table = configs.iter().enumerate().map(|(i, c)| (c.clone(), (mask >> i & 1) as u8)).collect();
            let prover = AtmProver::new(info, &bundle.verifier, w, ChoiceRule::Table(table)).unwrap();
            let r = evaluate_exact(&bundle.verifier, &tape, &prover, &cfg()).unwrap();
            let overall = round_fixpoint(&r.round_summary()).unwrap().overall_accept;
            assert!(overall <= eps, "{w:?} mask {mask}: {overall}");
        }
    }
}

#[test]
fn kg_members_and_near_misses() {
    let eps = rat(1, 3);
    let bundle = build_kg(&eps).unwrap();
    // e = c - a and f = c - b make the game a member; bumping the target breaks it.
    let member = KgInstance::from_values(10, &[(3, 5, 7, 5)]).to_string();
    let miss = KgInstance::from_values(11, &[(3, 5, 7, 5)]).to_string();
    assert_eq!(complete_on(&bundle, &[member.clone()]), 1);
    assert!(!bundle.is_member(&miss).unwrap());
    let tape = bundle.tape(&miss).unwrap();
    let wc = evaluate_worst_case_rounds(&bundle.verifier, &tape, &cfg()).unwrap();
    assert!(wc.overall_accept <= eps, "{}", wc.overall_accept);
}

#[test]
fn reduction_follows_the_machine_output() {
    let eps = rat(1, 3);
    let bundle = build_reduction(&sample_machines()["toy-reduction"], &eps).unwrap();
    let inputs = words(&['0', '1'], 2);
    let members = complete_on(&bundle, &inputs);
    assert!(members > 0 && members < inputs.len());
}
