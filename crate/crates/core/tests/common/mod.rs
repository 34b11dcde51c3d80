//! Randomized small verifiers and explicit provers shared by the integration tests.
#![allow(dead_code)]

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

use affine_am::affine::AffineOperator;
use affine_am::engine::{FnProver, SequenceProver, Transcript};
use affine_am::machine::{
    compile, validate, Action, ControlRole, Controller, GammaId, Mode, RegisterSpec, SpecHeader, TapeSymbol,
    VerifierSpec,
};
use affine_am::rational::{rat, Rational};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Column-stochastic-sum operator with small entries; the last row balances.
pub fn random_operator(r: &mut impl Rng, dim: usize) -> AffineOperator {
    let mut rows = vec![vec![Rational::from_integer(0.into()); dim]; dim];
    for col in 0..dim {
        let mut sum = Rational::from_integer(0.into());
        for row in rows.iter_mut().take(dim - 1) {
            let x = if r.gen_bool(0.3) {
                rat(r.gen_range(-3..=3), r.gen_range(1..=4))
            } else {
                rat(r.gen_range(-2..=2), 1)
            };
            sum += &x;
            row[col] = x;
        }
        rows[dim - 1][col] = rat(1, 1) - sum;
    }
    AffineOperator::new(rows).expect("columns balanced")
}

pub fn random_state(r: &mut impl Rng, dim: usize) -> Vec<Rational> {
    let mut v: Vec<Rational> = (0..dim - 1).map(|_| rat(r.gen_range(-5..=5), r.gen_range(1..=3))).collect();
    let s: Rational = v.iter().sum();
    v.push(rat(1, 1) - s);
    v
}

struct RandomController {
    salt: u64,
    normal: u8,
    two_way: bool,
    dims: Vec<usize>,
    banks: Vec<usize>,
    gammas: usize,
}

/// States: `0..normal` normal, then query, accept, reject, and restart (two-way only).
impl RandomController {
    fn query(&self) -> u8 {
        self.normal
    }
    fn accept(&self) -> u8 {
        self.normal + 1
    }
    fn reject(&self) -> u8 {
        self.normal + 2
    }
    fn restart(&self) -> u8 {
        self.normal + 3
    }

    fn rng_for(&self, key: impl Hash) -> ChaCha8Rng {
        let mut h = DefaultHasher::new();
        (self.salt, key).hash(&mut h);
        rng(h.finish())
    }

    fn pick_state(&self, r: &mut ChaCha8Rng) -> u8 {
        // One-way verifiers only have the (non-halting) accepting role.
        let n = if self.two_way { self.normal + 4 } else { self.normal + 2 };
        // Bias toward normal states so runs have some length.
        if r.gen_bool(0.6) {
            r.gen_range(0..self.normal)
        } else {
            r.gen_range(0..n)
        }
    }
}

fn symbol_key(s: TapeSymbol) -> u32 {
    match s {
        TapeSymbol::LeftEnd => 0,
        TapeSymbol::RightEnd => 1,
        TapeSymbol::Input(c) => c as u32 + 2,
    }
}

impl Controller for RandomController {
    type State = u8;

    fn initial(&self) -> u8 {
        0
    }

    fn role(&self, s: &u8) -> ControlRole {
        match *s {
            s if s < self.normal => ControlRole::Normal,
            s if s == self.query() => ControlRole::Query(0),
            s if s == self.accept() => ControlRole::Accept,
            s if s == self.reject() => ControlRole::Reject,
            _ => ControlRole::Restart,
        }
    }

    fn on_reply(&self, s: &u8, reply: GammaId) -> u8 {
        let mut r = self.rng_for(("reply", *s, reply));
        r.gen_range(0..self.normal)
    }

    fn actions(&self, s: &u8, symbol: TapeSymbol) -> Vec<Action> {
        let mut r = self.rng_for(("act", *s, symbol_key(symbol)));
        self.banks
            .iter()
            .map(|&n| {
                if self.two_way && r.gen_bool(0.3) {
                    Action::Weight
                } else {
                    Action::Apply(r.gen_range(0..n) as u16)
                }
            })
            .collect()
    }

    fn next(&self, s: &u8, symbol: TapeSymbol, outcomes: &[u32]) -> (u8, i8) {
        let mut r = self.rng_for(("next", *s, symbol_key(symbol), outcomes.to_vec()));
        let t = self.pick_state(&mut r);
        let mv = if !self.two_way {
            1
        } else {
            let mv: i8 = r.gen_range(-1..=1);
            match symbol {
                TapeSymbol::LeftEnd => mv.max(0),
                TapeSymbol::RightEnd => mv.min(0),
                _ => mv,
            }
        };
        (t, mv)
    }
}

/// A small random verifier over the input alphabet `{a, b}` and `gammas` reply symbols.
pub fn random_spec(seed: u64) -> VerifierSpec {
    let mut r = rng(seed);
    let two_way = r.gen_bool(0.5);
    let registers = r.gen_range(1..=2);
    let mut regs = Vec::new();
    for i in 0..registers {
        let dim = r.gen_range(2..=3);
        let mut reg = RegisterSpec::new(&format!("r{i}"), dim);
        for k in 0..r.gen_range(1..=3) {
            reg.push(&format!("M{k}"), random_operator(&mut r, dim));
        }
        reg.accepting = (0..dim).filter(|_| r.gen_bool(0.5)).collect();
        if reg.accepting.is_empty() {
            reg.accepting.push(r.gen_range(0..dim));
        }
        regs.push(reg);
    }
    let gammas = r.gen_range(2..=3);
    let ctl = RandomController {
        salt: r.gen(),
        normal: r.gen_range(2..=4),
        two_way,
        dims: regs.iter().map(|g| g.dim).collect(),
        banks: regs.iter().map(|g| g.operators.len()).collect(),
        gammas,
    };
    let header = SpecHeader {
        name: format!("random-{seed}"),
        mode: if two_way { Mode::TwoWay } else { Mode::OneWay },
        input_alphabet: vec!['a', 'b'],
        comm_alphabet: (0..gammas).map(|g| format!("g{g}")).collect(),
        registers: regs,
    };
    let spec = compile(header, &ctl, 64).expect("small controller");
    let problems = validate(&spec);
    assert!(problems.is_empty(), "random spec {seed}: {problems:?}");
    spec
}

pub fn random_word(r: &mut impl Rng, max_len: usize) -> String {
    let n = r.gen_range(0..=max_len);
    (0..n).map(|_| if r.gen_bool(0.5) { 'a' } else { 'b' }).collect()
}

/// A fixed random reply sequence.
pub fn random_sequence(r: &mut impl Rng, gammas: usize) -> SequenceProver {
    SequenceProver {
        symbols: (0..12).map(|_| r.gen_range(0..gammas) as GammaId).collect(),
        tail: r.gen_range(0..gammas) as GammaId,
    }
}

/// Replies depending on the whole transcript (its length and last event).
pub fn random_adaptive(salt: u64, gammas: usize) -> FnProver<impl Fn(&Transcript, GammaId) -> GammaId> {
    FnProver(move |t: &Transcript, _q: GammaId| {
        let mut h = DefaultHasher::new();
        (salt, t.events.len(), format!("{:?}", t.events.last())).hash(&mut h);
        (h.finish() % gammas as u64) as GammaId
    })
}
