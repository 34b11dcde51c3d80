//! One pass/fail line per acceptance criterion. Exits nonzero if any criterion fails.

mod common;

use std::time::Instant;

use affine_am::encoders::{encode_value, exponent_encoder, polynomial_encoder};
use affine_am::engine::{
    evaluate_exact, evaluate_worst_case, evaluate_worst_case_rounds, monte_carlo, round_fixpoint, trace,
    EngineConfig, Objective, SequenceProver,
};
use affine_am::machine::{final_weighting, step, Node, VerifierSpec};
use affine_am::protocols::stream::{continuation_register, StreamInfo};
use affine_am::protocols::{
    build_kg, build_middle, build_mpal, build_reduction, build_weak_tm, continuation_report, mpal_residuals,
    with_continuation_check, ClaimProver, ContinuationCase, HonestProver, KgInstance, Kind, ProtocolBundle,
};
use affine_am::rational::{format_rational, int, rat, Rational};
use affine_am::tm::{toy_reduction, zero_n_one_n, ConfigSymbol, Next, TMConfiguration};
use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use rand::Rng;

type Check = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn words(alphabet: &[char], max_len: usize) -> Vec<String> {
    let mut out = vec![String::new()];
    let mut layer = vec![String::new()];
    for _ in 0..max_len {
        layer = layer
            .iter()
            .flat_map(|w| alphabet.iter().map(move |&c| format!("{w}{c}")))
            .collect();
        out.extend(layer.iter().cloned());
    }
    out
}

fn e<E: std::fmt::Display>(x: E) -> String {
    x.to_string()
}

fn middle() -> Check {
    let cfg = EngineConfig::default();
    let mut checked = 0;
    for eps in [rat(1, 3), rat(1, 5), rat(1, 10)] {
        let b = build_middle(&eps).map_err(e)?;
        let delta = (rat(1, 1) - &eps) / (&eps * int(2));
        for w in words(&['0', '1'], 8) {
            let tape = b.tape(&w).map_err(e)?;
            let n = w.len() as i64;
            if b.is_member(&w).map_err(e)? {
                let p = b.evaluate_honest(&w, &cfg).map_err(e)?.p_accept;
                ensure(p == int(1), || format!("eps {eps}: member {w:?} accepts {p}"))?;
            } else {
                let expected = w
                    .chars()
                    .enumerate()
                    .filter(|&(_, c)| c == '1')
                    .map(|(i, _)| {
                        let j = i as i64 + 1;
                        rat(1, 1) / (int(1) + int(2) * int((2 * j - n - 1).abs()) * &delta)
                    })
                    .max()
                    .unwrap_or_else(Rational::zero);
                let wc = evaluate_worst_case(&b.verifier, &tape, &Objective::accept(), &cfg).map_err(e)?;
                ensure(wc.value == expected, || {
                    format!("eps {eps}: {w:?} worst case {} expected {}", wc.value, expected)
                })?;
                ensure(wc.value <= eps, || format!("eps {eps}: {w:?} worst case {} above eps", wc.value))?;
            }
            checked += 1;
        }
    }
    Ok(format!("{checked} (eps, word) pairs exact"))
}

fn mpal() -> Check {
    let cfg = EngineConfig::default();
    let eps = rat(1, 3);
    let b = build_mpal(&['a', 'b'], &eps).map_err(e)?;
    let mut members = 0;
    let mut non_members = 0;
    let mut worst = Rational::zero();
    let mut low_residuals: Vec<(String, usize, Rational)> = Vec::new();
    for w in words(&['a', 'b', '$'], 7) {
        if b.is_member(&w).map_err(e)? {
            let p = b.evaluate_honest(&w, &cfg).map_err(e)?.p_accept;
            ensure(p == int(1), || format!("member {w:?} accepts {p}"))?;
            members += 1;
            continue;
        }
        non_members += 1;
        let tape = b.tape(&w).map_err(e)?;
        let wc = evaluate_worst_case(&b.verifier, &tape, &Objective::accept(), &cfg).map_err(e)?;
        ensure(wc.value <= eps, || format!("{w:?} worst case {}", wc.value))?;
        worst = worst.max(wc.value);
        for (j, _, residual) in mpal_residuals(&b, &w).map_err(e)? {
            if residual < int(1) {
                low_residuals.push((w.clone(), j, residual));
            }
        }
    }
    let summary = format!("{members} members accept 1; {non_members} non-members, max worst case {}", format_rational(&worst));
    if low_residuals.is_empty() {
        Ok(format!("{summary}; every residual >= 1"))
    } else {
        let examples: Vec<String> = low_residuals
            .iter()
            .take(4)
            .map(|(w, j, r)| format!("{w:?} claim {j}: {}", format_rational(r)))
            .collect();
        Err(format!(
            "{summary}; residual below 1 on {} branches, e.g. {}",
            low_residuals.len(),
            examples.join(", ")
        ))
    }
}

fn stream_parts(b: &ProtocolBundle) -> &StreamInfo {
    match &b.kind {
        Kind::Stream(i) => i,
        _ => unreachable!("stream bundle"),
    }
}

fn weak_tm() -> Check {
    let cfg = EngineConfig::default();
    let eps = rat(1, 3);
    let b = build_weak_tm(&zero_n_one_n(), &eps).map_err(e)?;
    let info = stream_parts(&b);
    let (m, codec) = (&info.machine, &info.codec);
    let c = int(1);
    let mut members = 0;
    let mut tampers = 0;
    let mut caught_early = 0;
    for w in words(&['0', '1'], 6) {
        let tape = b.tape(&w).map_err(e)?;
        let member = b.is_member(&w).map_err(e)?;
        if member {
            let r = b.evaluate_honest(&w, &cfg).map_err(e)?;
            ensure(r.p_accept == int(1), || format!("member {w:?} accepts {}", r.p_accept))?;
            members += 1;
        }
        let s = m.honest_stream(&w, 10_000).map_err(e)?;
        for i in 1..s.configs.len() {
            let expected_next = match m.next_config(&s.configs[i - 1]).map_err(e)? {
                Next::Single(n) => n,
                _ => unreachable!("deterministic machine"),
            };
            let target = codec.value(&expected_next);
            let mut prefix = codec.encode_stream(&s.configs[..i]);
            for pos in 0..s.configs[i].len() {
                let original = s.configs[i].symbols[pos];
                let replacements: Vec<ConfigSymbol> = match original {
                    ConfigSymbol::Tape(_) => (0..m.symbol_count() as u16).map(ConfigSymbol::Tape).collect(),
                    ConfigSymbol::State(_) => (0..m.state_count() as u16).map(ConfigSymbol::State).collect(),
                };
                for rep in replacements.into_iter().filter(|&r| r != original) {
                    let mut tampered: TMConfiguration = s.configs[i].clone();
                    tampered.symbols[pos] = rep;
                    let delta = &target - codec.value(&tampered);
                    let mut symbols = std::mem::take(&mut prefix);
                    let keep = symbols.len();
                    symbols.extend(codec.encode_config(&tampered));
                    symbols.push(codec.hash());
                    // After the comparison the request symbol ends the run as an invalid reply.
                    let p = SequenceProver { symbols, tail: 0 };
                    let r = evaluate_exact(&b.verifier, &tape, &p, &cfg).map_err(e)?;
                    prefix = p.symbols;
                    prefix.truncate(keep);
                    let before = r.halted_with_prefix("reject:Transition") + r.halted_with_prefix("reject:Format");
                    if before == int(1) {
                        caught_early += 1;
                        continue;
                    }
                    ensure(before.is_zero(), || format!("{w:?} block {i}: partial early rejection {before}"))?;
                    let pass = int(1) - r.halted_with_prefix("reject:Compare");
                    let expected = int(1) / (int(1) + int(2) * &c * Rational::from_integer(delta.abs()));
                    ensure(pass == expected, || {
                        format!("{w:?} block {i} pos {pos}: pass {pass}, expected {expected} (gap {delta})")
                    })?;
                    ensure(pass <= eps, || format!("{w:?} block {i}: pass {pass} above eps"))?;
                    tampers += 1;
                }
            }
        }
        if member && !w.is_empty() {
            // c_0 #, then the symbols of c_1 without its separator, forever.
            let mut symbols = codec.encode_stream(&s.configs[..1]);
            symbols.extend(codec.encode_config(&s.configs[1]));
            let p = SequenceProver {
                symbols,
                tail: codec.gamma(ConfigSymbol::Tape(m.right)),
            };
            let short = EngineConfig { horizon: 3_000, ..cfg };
            let r = evaluate_exact(&b.verifier, &tape, &p, &short).map_err(e)?;
            ensure(r.p_unresolved > int(0) && r.p_accept.is_zero(), || {
                format!("withheld # on {w:?}: unresolved {}, accept {}", r.p_unresolved, r.p_accept)
            })?;
        }
    }
    Ok(format!(
        "{members} members accept 1; {tampers} block tampers pass exactly 1/(1+2|gap|), {caught_early} rejected before the comparison; withheld # leaves the run unresolved"
    ))
}

fn continuation() -> Check {
    let mut lines = Vec::new();
    let weak = build_weak_tm(&zero_n_one_n(), &rat(1, 3)).map_err(e)?;
    for eps in [rat(1, 3), rat(1, 2)] {
        let m = int(1) / &eps;
        for k in [1u32, 2] {
            let case = ContinuationCase::Exponential { k, c: 1 };
            for n in 1..=5usize {
                let r = continuation_report(case, &eps, n).map_err(e)?;
                let expected = int(1) / (&m * Rational::from_integer(BigInt::from(2).pow(k * n as u32)));
                ensure(r.p == expected, || format!("exp k={k} eps={eps} |w|={n}: p {} vs {expected}", r.p))?;
                ensure(r.within_bound, || {
                    format!("exp k={k} eps={eps} |w|={n}: false reject {}", r.false_reject)
                })?;
            }
            let strong = with_continuation_check(&weak, case, &eps).map_err(e)?;
            let reg = strong.verifier.registers.last().expect("check register");
            ensure(*reg == continuation_register(case, &eps).map_err(e)?, || "built register differs".into())?;
        }
        for k in [2u32, 3] {
            let case = ContinuationCase::Polynomial { k, c: 1 };
            let mut devs = Vec::new();
            for n in 1..=5usize {
                let r = continuation_report(case, &eps, n).map_err(e)?;
                ensure(r.within_bound, || {
                    format!("poly k={k} eps={eps} |w|={n}: false reject {}", r.false_reject)
                })?;
                devs.push(format!("{}|{}", format_rational(&r.p), format_rational(&r.closed_form)));
            }
            lines.push(format!("poly k={k} eps={eps} p|closed form: {}", devs.join(" ")));
        }
    }
    let strong = with_continuation_check(&weak, ContinuationCase::Exponential { k: 1, c: 1 }, &rat(1, 3)).map_err(e)?;
    let r = strong.evaluate_honest("", &EngineConfig::default()).map_err(e)?;
    ensure(r.p_accept == int(1), || "empty input".into())?;
    Ok(format!("exponential p exact and completeness holds; {}", lines.join("; ")))
}

/// Alternating reading: for all x_1 there is y_1 ... for all x_n there is y_n.
fn kg_oracle(target: i64, pairs: &[(i64, i64, i64, i64)], acc: i64) -> bool {
    match pairs.split_first() {
        None => acc == target,
        Some((&(a, b, e, f), rest)) => [a, b]
            .iter()
            .all(|x| [e, f].iter().any(|y| kg_oracle(target, rest, acc + x + y))),
    }
}

fn knapsack() -> Check {
    let cfg = EngineConfig::default();
    let eps = rat(1, 3);
    let b = build_kg(&eps).map_err(e)?;
    let mut r = common::rng(5);
    let mut members = 0;
    let mut non_members = 0;
    let mut worst_round = Rational::zero();
    let mut worst_overall = Rational::zero();
    for idx in 0..60 {
        let n = idx % 3 + 1;
        // Thirds: members by construction (e_i = c_i - a_i, f_i = c_i - b_i), near misses
        // of those, and unconstrained instances.
        let mode = (idx / 3) % 3;
        let hi = 31 / (2 * n as u64);
        let (pairs, target): (Vec<(u64, u64, u64, u64)>, u64) = if mode < 2 {
            let mut total = 0;
            let pairs = (0..n)
                .map(|_| {
                    let (a, b) = (r.gen_range(0..=hi), r.gen_range(0..=hi));
                    let c = r.gen_range(a.max(b)..=a.max(b) + hi);
                    total += c;
                    (a, b, c - a, c - b)
                })
                .collect();
            (pairs, if mode == 0 { total } else { total + 1 })
        } else {
            let pairs = (0..n)
                .map(|_| (r.gen_range(0..32), r.gen_range(0..32), r.gen_range(0..32), r.gen_range(0..32)))
                .collect();
            (pairs, r.gen_range(0..32))
        };
        let k = KgInstance::from_values(target, &pairs);
        let word = k.to_string();
        let signed: Vec<(i64, i64, i64, i64)> =
            pairs.iter().map(|&(a, b, e, f)| (a as i64, b as i64, e as i64, f as i64)).collect();
        let oracle = kg_oracle(target as i64, &signed, 0);
        ensure(b.is_member(&word).map_err(e)? == oracle, || format!("{word}: membership disagrees with the oracle"))?;
        let tape = b.tape(&word).map_err(e)?;
        if oracle {
            let (_, closure) = b.honest_overall(&word, &cfg).map_err(e)?;
            let overall = closure.expect("restart protocol").overall_accept;
            ensure(overall == int(1), || format!("member {word} overall {overall}"))?;
            members += 1;
        } else {
            let bound = rat(2, 3) * &eps / int(1 << n);
            let wc = evaluate_worst_case(&b.verifier, &tape, &Objective::accept(), &cfg).map_err(e)?;
            ensure(wc.value <= bound, || format!("{word}: per-round {} above {bound}", wc.value))?;
            let rounds = evaluate_worst_case_rounds(&b.verifier, &tape, &cfg).map_err(e)?;
            ensure(rounds.overall_accept <= eps, || format!("{word}: overall {}", rounds.overall_accept))?;
            worst_round = worst_round.max(wc.value * int(1 << n));
            worst_overall = worst_overall.max(rounds.overall_accept);
            non_members += 1;
        }
    }
    ensure(members > 0 && non_members > 0, || "instance mix is one-sided".into())?;
    Ok(format!(
        "{members} members overall 1; {non_members} non-members, max 2^n x per-round {}, max overall {}",
        format_rational(&worst_round),
        format_rational(&worst_overall)
    ))
}

fn reduction() -> Check {
    let cfg = EngineConfig::default();
    let eps = rat(1, 3);
    let b = build_reduction(&toy_reduction(), &eps).map_err(e)?;
    let mut members = Vec::new();
    for w in words(&['0', '1'], 4) {
        let val = w.chars().fold(0u32, |v, c| 2 * v + u32::from(c == '1'));
        let member = b.is_member(&w).map_err(e)?;
        ensure(member == (!w.is_empty() && val == 2), || format!("{w:?}: membership"))?;
        if member {
            let (r, closure) = b.honest_overall(&w, &cfg).map_err(e)?;
            let overall = closure.expect("restart protocol").overall_accept;
            ensure(overall == int(1) && r.p_reject.is_zero(), || format!("member {w:?} overall {overall}"))?;
            members.push(w);
        }
    }
    let mut tampers = 0;
    let mut min_round = int(1);
    let mut min_overall = int(1);
    for w in members.iter().take(2) {
        let tape = b.tape(w).map_err(e)?;
        let HonestProver::Reduction(honest) = b.honest_prover(w).map_err(e)? else {
            unreachable!("reduction prover")
        };
        for i in 0..honest.stream.len() {
            for g in 0..b.verifier.comm_alphabet.len() as u16 {
                if g == honest.stream[i] {
                    continue;
                }
                let r = evaluate_exact(&b.verifier, &tape, &honest.with_tamper(i, g), &cfg).map_err(e)?;
                let closure = round_fixpoint(&r.round_summary()).map_err(e)?;
                ensure(r.p_reject >= int(1) - &eps, || {
                    format!("{w:?} symbol {i} -> {}: per-round reject {}", b.verifier.comm_alphabet[g as usize], r.p_reject)
                })?;
                ensure(closure.overall_reject >= int(1) - &eps, || {
                    format!("{w:?} symbol {i}: overall reject {}", closure.overall_reject)
                })?;
                min_round = min_round.min(r.p_reject.clone());
                min_overall = min_overall.min(closure.overall_reject);
                tampers += 1;
            }
        }
    }
    Ok(format!(
        "members {members:?} accept 1; {tampers} single-symbol tampers, min per-round reject {}, min overall reject {}",
        format_rational(&min_round),
        format_rational(&min_overall)
    ))
}

fn encoders() -> Check {
    let mut count = 0;
    for base in 2..=4u32 {
        let mut seen = std::collections::HashMap::new();
        let mut layer: Vec<Vec<u32>> = vec![vec![]];
        for len in 0..=6 {
            for digits in &layer {
                let v = encode_value(digits, base).map_err(e)?;
                let value = digits.iter().fold(BigInt::zero(), |acc, &d| acc * base + d);
                ensure(*v.entry(1) == Rational::from_integer(value), || format!("base {base} {digits:?}"))?;
                if digits.iter().all(|&d| d != 0) {
                    if let Some(prev) = seen.insert(v.entries().to_vec(), digits.clone()) {
                        return Err(format!("base {base}: {prev:?} and {digits:?} collide"));
                    }
                }
                count += 1;
            }
            if len < 6 {
                layer = layer.iter().flat_map(|d| (0..base).map(move |x| [d.clone(), vec![x]].concat())).collect();
            }
        }
        // Within one length every digit string, zeros included, is distinct.
        let fixed: std::collections::HashSet<Vec<Rational>> =
            layer.iter().map(|d| encode_value(d, base).unwrap().entries().to_vec()).collect();
        ensure(fixed.len() == layer.len(), || format!("base {base}: collision at length 6"))?;
    }
    let mut r = common::rng(7);
    for d in 0..=4usize {
        for _ in 0..3 {
            let coeffs: Vec<Rational> = (0..=d).map(|_| rat(r.gen_range(-9..=9), r.gen_range(1..=4))).collect();
            let bank = polynomial_encoder(&coeffs, d);
            let mut v = bank.initial_state();
            for l in 0..=20i64 {
                let expected: Rational = coeffs.iter().enumerate().map(|(i, c)| c * int(l.pow(i as u32))).sum();
                ensure(bank.value(&v) == expected, || format!("d={d} l={l}"))?;
                v = bank.step.apply(&v).map_err(e)?;
            }
        }
    }
    for a in [rat(1, 2), rat(2, 3), rat(3, 1), rat(-1, 2), rat(5, 7)] {
        let enc = exponent_encoder(&a);
        let mut v = enc.after(0);
        let mut expected = int(1);
        for l in 0..=64 {
            ensure(*v.entry(0) == expected, || format!("a={a} l={l}"))?;
            v = enc.operator.apply(&v).map_err(e)?;
            expected *= &a;
        }
    }
    Ok(format!("{count} digit strings; polynomial d<=4, l<=20; exponent l<=64"))
}

fn walk_sums(spec: &VerifierSpec, word: &str, seed: u64) -> Result<usize, String> {
    let tape = spec.tape_str(word).map_err(e)?;
    let mut r = common::rng(seed);
    let mut cfg = spec.initial_config();
    let gammas = spec.comm_alphabet.len() as u16;
    let mut checked = 0;
    for _ in 0..40 {
        let branches = if cfg.awaiting_final {
            final_weighting(spec, &cfg).map_err(e)?
        } else {
            let reply = spec.is_communicating(cfg.state).map(|_| r.gen_range(0..gammas));
            step(spec, &cfg, &tape, reply).map_err(e)?
        };
        let total: Rational = branches.iter().map(|b| &b.probability).sum();
        ensure(total == int(1), || format!("{}: branches sum to {total}", spec.name))?;
        checked += 1;
        let pick = r.gen_range(0..branches.len());
        match &branches[pick].node {
            Node::Running(next) => cfg = next.clone(),
            Node::Halted { .. } => break,
        }
    }
    Ok(checked)
}

fn engine() -> Check {
    let short = EngineConfig { horizon: 40, node_cap: 200_000 };
    let mut steps = 0;
    let mut dominance = 0;
    for seed in 0..150u64 {
        let spec = common::random_spec(seed);
        let mut r = common::rng(seed + 1000);
        let gammas = spec.comm_alphabet.len();
        for _ in 0..2 {
            let w = common::random_word(&mut r, 4);
            steps += walk_sums(&spec, &w, r.gen())?;
            let tape = spec.tape_str(&w).map_err(e)?;
            let wc = evaluate_worst_case(&spec, &tape, &Objective::accept(), &short).map_err(e)?;
            let check = |res: affine_am::engine::EvalResult, what: &str| -> Result<(), String> {
                ensure(res.total() == int(1), || format!("{}: masses sum to {}", spec.name, res.total()))?;
                ensure(res.p_accept <= wc.value, || {
                    format!("{} on {w:?}: {what} accepts {} above expectimax {}", spec.name, res.p_accept, wc.value)
                })
            };
            for g in 0..gammas as u16 {
                check(evaluate_exact(&spec, &tape, &SequenceProver { symbols: vec![], tail: g }, &short).map_err(e)?, "constant")?;
            }
            for _ in 0..3 {
                check(evaluate_exact(&spec, &tape, &common::random_sequence(&mut r, gammas), &short).map_err(e)?, "sequence")?;
            }
            let adaptive = common::random_adaptive(r.gen(), gammas);
            check(evaluate_exact(&spec, &tape, &adaptive, &short).map_err(e)?, "adaptive")?;
            dominance += 1;
        }
    }
    let cfg = EngineConfig::default();
    let trials = 100_000;
    let mut mc = Vec::new();
    let mid = build_middle(&rat(1, 3)).map_err(e)?;
    let pal = build_mpal(&['a', 'b'], &rat(1, 3)).map_err(e)?;
    let kg = build_kg(&rat(1, 3)).map_err(e)?;
    let fixtures: Vec<(&str, &ProtocolBundle, &str, Option<HonestProver>)> = vec![
        ("middle", &mid, "10", Some(HonestProver::Claim(ClaimProver { claim: Some(0) }))),
        ("mpal", &pal, "a$b", Some(HonestProver::Claim(ClaimProver { claim: Some(1) }))),
        ("knapsack", &kg, "1", None),
    ];
    for (name, b, w, prover) in fixtures {
        let tape = b.tape(w).map_err(e)?;
        let prover = match prover {
            Some(p) => p,
            None => b.honest_prover(w).map_err(e)?,
        };
        let exact = evaluate_exact(&b.verifier, &tape, &prover, &cfg).map_err(e)?;
        let p = if b.round_structured {
            round_fixpoint(&exact.round_summary()).map_err(e)?.overall_accept
        } else {
            exact.p_accept
        };
        let report = monte_carlo(&b.verifier, &tape, &prover, trials, 11, &cfg).map_err(e)?;
        let pf = affine_am::rational::to_f64(&p);
        let sigma = (pf * (1.0 - pf) / trials as f64).sqrt();
        let freq = report.accept_frequency();
        ensure((freq - pf).abs() <= 3.0 * sigma, || format!("{name}: MC {freq} vs exact {pf} (sigma {sigma})"))?;
        let t1 = trace(&b.verifier, &tape, &prover, 99, &cfg).map_err(e)?;
        let t2 = trace(&b.verifier, &tape, &prover, 99, &cfg).map_err(e)?;
        ensure(t1 == t2, || format!("{name}: traces with equal seeds differ"))?;
        mc.push(format!("{name} {freq:.4} vs {pf:.4}"));
    }
    Ok(format!(
        "{steps} steps sum to 1; expectimax dominates on {dominance} cases; MC: {}; seeded traces identical",
        mc.join(", ")
    ))
}

fn main() {
    let criteria: [(&str, fn() -> Check); 8] = [
        ("middle language", middle),
        ("marked palindromes", mpal),
        ("weak TM stream", weak_tm),
        ("continuation check", continuation),
        ("knapsack game", knapsack),
        ("reduction pipeline", reduction),
        ("encoders", encoders),
        ("engine properties", engine),
    ];
    let only: Option<usize> = std::env::var("ACCEPTANCE_ONLY").ok().and_then(|s| s.parse().ok());
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        if only.is_some_and(|o| o != i + 1) {
            continue;
        }
        let start = Instant::now();
        let result = f();
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("PASS {} {name} ({secs:.1}s): {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {} {name} ({secs:.1}s): {why}", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
