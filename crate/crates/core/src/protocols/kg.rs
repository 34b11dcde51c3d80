//! Knapsack game instances and their two-way verifier.
//!
//! Instance text: `S` in binary, then blocks `A(a,b)E(e,f)`. Per block the verifier
//! flips a public coin to pick `x` from `(a, b)`, subtracts it from `S` in the working
//! register, then asks the prover which of `(e, f)` to take and has it spell that number
//! digit by digit against the tape before subtracting it too. At the end the working
//! register holds `(1, R, 0, -R)`; on outcome 1 the restart register decides between
//! accepting and starting a new round.

use std::fmt;

use num_bigint::BigInt;
use num_traits::Zero;

use crate::affine::AffineOperator;
use crate::encoders::{digit_append, ratio_operator, DigitTarget};
use crate::engine::{ProverStrategy, TranscriptEvent};
use crate::machine::{Action, ControlRole, GammaId, Mode, RegisterSpec, SpecHeader, TapeSymbol, VerifierSpec};
use crate::rational::Rational;

use super::{actions, check_epsilon, compile_planner, half, Kind, Plan, Planner, ProtocolBundle, ProtocolError, Then};

pub const TAG_QUERY: &str = "?tag";
pub const DIGIT_QUERY: &str = "?digit";

pub(crate) fn kg_alphabet() -> Vec<char> {
    vec!['0', '1', 'A', 'E', '(', ')', ',']
}

fn comm_alphabet() -> Vec<String> {
    [TAG_QUERY, DIGIT_QUERY, "0", "1", "#"].map(String::from).to_vec()
}

/// One quantifier block `A(a,b)E(e,f)`, numbers kept as their binary digit strings.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct KgPair {
    pub a: String,
    pub b: String,
    pub e: String,
    pub f: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct KgInstance {
    pub target: String,
    pub pairs: Vec<KgPair>,
}

fn binary(s: &str) -> BigInt {
    BigInt::parse_bytes(s.as_bytes(), 2).expect("validated binary digits")
}

impl KgInstance {
    pub fn parse(text: &str) -> Result<Self, ProtocolError> {
        let bad = |why: &str| ProtocolError::MalformedInstance(format!("{why} in {text:?}"));
        let chars: Vec<char> = text.chars().collect();
        let mut pos = 0;
        let number = |pos: &mut usize| -> Result<String, ProtocolError> {
            let start = *pos;
            while *pos < chars.len() && matches!(chars[*pos], '0' | '1') {
                *pos += 1;
            }
            if *pos == start {
                return Err(bad("expected a binary number"));
            }
            Ok(chars[start..*pos].iter().collect())
        };
        let expect = |pos: &mut usize, c: char| -> Result<(), ProtocolError> {
            if chars.get(*pos) != Some(&c) {
                return Err(bad(&format!("expected {c:?} at {}", *pos)));
            }
            *pos += 1;
            Ok(())
        };
        let target = number(&mut pos)?;
        let mut pairs = Vec::new();
        while pos < chars.len() {
            expect(&mut pos, 'A')?;
            expect(&mut pos, '(')?;
            let a = number(&mut pos)?;
            expect(&mut pos, ',')?;
            let b = number(&mut pos)?;
            expect(&mut pos, ')')?;
            expect(&mut pos, 'E')?;
            expect(&mut pos, '(')?;
            let e = number(&mut pos)?;
            expect(&mut pos, ',')?;
            let f = number(&mut pos)?;
            expect(&mut pos, ')')?;
            pairs.push(KgPair { a, b, e, f });
        }
        Ok(Self { target, pairs })
    }

    /// Instance from plain values, written without leading zeros.
    pub fn from_values(target: u64, pairs: &[(u64, u64, u64, u64)]) -> Self {
        let b = |v: u64| format!("{v:b}");
        Self {
            target: b(target),
            pairs: pairs
                .iter()
                .map(|&(a, bb, e, f)| KgPair {
                    a: b(a),
                    b: b(bb),
                    e: b(e),
                    f: b(f),
                })
                .collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.pairs.len()
    }

    fn wins_from(&self, i: usize, rest: &BigInt) -> bool {
        if i == self.pairs.len() {
            return rest.is_zero();
        }
        let p = &self.pairs[i];
        [&p.a, &p.b].iter().all(|x| {
            let r = rest - binary(x);
            [&p.e, &p.f].iter().any(|y| self.wins_from(i + 1, &(&r - binary(y))))
        })
    }

    /// Alternating semantics: each `y_i` may depend on `x_1..x_i` only.
    pub fn game_member(&self) -> bool {
        self.wins_from(0, &binary(&self.target))
    }

    /// Flat reading: for every full `x` some full `y` hits the target.
    pub fn flat_member(&self) -> bool {
        let n = self.pairs.len();
        let s = binary(&self.target);
        (0..1u64 << n).all(|xs| {
            (0..1u64 << n).any(|ys| {
                let mut r = s.clone();
                for (i, p) in self.pairs.iter().enumerate() {
                    r -= binary(if xs >> i & 1 == 0 { &p.a } else { &p.b });
                    r -= binary(if ys >> i & 1 == 0 { &p.e } else { &p.f });
                }
                r.is_zero()
            })
        })
    }

    /// `R = S - sum (x_i + y_i)` for choice bits (0 picks `a`/`e`, 1 picks `b`/`f`).
    pub fn residual(&self, xs: &[u8], ys: &[u8]) -> BigInt {
        let mut r = binary(&self.target);
        for (i, p) in self.pairs.iter().enumerate() {
            r -= binary(if xs[i] == 0 { &p.a } else { &p.b });
            r -= binary(if ys[i] == 0 { &p.e } else { &p.f });
        }
        r
    }

    /// Choice for `y_i` after `x_1..x_i` and `y_1..y_{i-1}` that keeps the game won,
    /// if there is one.
    pub fn winning_choice(&self, xs: &[u8], ys: &[u8]) -> Option<u8> {
        let i = ys.len();
        let p = self.pairs.get(i)?;
        let mut r = binary(&self.target);
        for (k, q) in self.pairs[..=i].iter().enumerate() {
            r -= binary(if xs[k] == 0 { &q.a } else { &q.b });
            if k < i {
                r -= binary(if ys[k] == 0 { &q.e } else { &q.f });
            }
        }
        [(0u8, &p.e), (1, &p.f)]
            .into_iter()
            .find(|(_, y)| self.wins_from(i + 1, &(&r - binary(y))))
            .map(|(t, _)| t)
    }
}

impl fmt::Display for KgInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.target)?;
        for p in &self.pairs {
            write!(f, "A({},{})E({},{})", p.a, p.b, p.e, p.f)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum KgPart {
    E,
    F,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum KgState {
    Start,
    ReadS { seen: bool },
    OpenA,
    Flip,
    InA { take: bool, seen: bool },
    InB { take: bool, seen: bool },
    ExpectE,
    OpenE,
    AskTag,
    Exist { part: KgPart, active: bool, seen: bool },
    AskDigit { part: KgPart, seen: bool },
    Check { part: KgPart, reply: GammaId, seen: bool },
    AfterPair,
    Boost,
    Weigh,
    Accept,
    Restart,
    Reject(&'static str),
}

/// Register indices and bank entries shared by the standalone verifier and the
/// streaming subroutine of the reduction pipeline.
#[derive(Debug, Clone)]
pub(crate) struct KgOps {
    pub work: usize,
    pub coin: usize,
    pub restart: usize,
    /// `S` digits into entry 2, indexed by bit.
    pub s_digit: [u16; 2],
    /// Digits into entry 3.
    pub x_digit: [u16; 2],
    pub subtract: u16,
    pub prepare_coin: u16,
    pub halve: u16,
    pub boost: u16,
}

/// Work (4 entries), coin (2) and restart (2) registers for the game check.
pub(crate) fn kg_registers(epsilon: &Rational, first: usize) -> (Vec<RegisterSpec>, KgOps, Rational) {
    let delta = epsilon * Rational::new(2.into(), 3.into());
    let mut work = RegisterSpec::new("work", 4);
    let s0 = work.push("S0", digit_append(2, 0, DigitTarget::Second).expect("digit"));
    let s1 = work.push("S1", digit_append(2, 1, DigitTarget::Second).expect("digit"));
    let x0 = work.push("X0", digit_append(2, 0, DigitTarget::Third).expect("digit"));
    let x1 = work.push("X1", digit_append(2, 1, DigitTarget::Third).expect("digit"));
    let d = work.push(
        "D",
        AffineOperator::from_i64_rows(&[&[1, 0, 0, 0], &[0, 1, -1, 0], &[0, 0, 0, 0], &[0, 0, 2, 1]])
            .expect("D is affine"),
    );
    let mut coin = RegisterSpec::new("coin", 2);
    let h = half();
    let u = coin.push(
        "U",
        AffineOperator::new(vec![vec![h.clone(), h.clone()], vec![h.clone(), h.clone()]]).expect("U"),
    );
    let mut restart = RegisterSpec::new("restart", 2);
    let halve = restart.push("H", ratio_operator(&h));
    let boost = restart.push("M_delta", ratio_operator(&delta));
    let ops = KgOps {
        work: first,
        coin: first + 1,
        restart: first + 2,
        s_digit: [s0, s1],
        x_digit: [x0, x1],
        subtract: d,
        prepare_coin: u,
        halve,
        boost,
    };
    (vec![work, coin, restart], ops, delta)
}

struct KgPlanner {
    registers: usize,
    ops: KgOps,
    g_zero: GammaId,
    g_one: GammaId,
    g_end: GammaId,
    tag: GammaId,
    digit: GammaId,
}

impl KgPlanner {
    fn reject(&self, why: &'static str) -> Plan<KgState> {
        Plan::go(actions(self.registers, &[]), KgState::Reject(why), 0)
    }

    fn go(&self, set: &[(usize, Action)], s: KgState, mv: i8) -> Plan<KgState> {
        Plan::go(actions(self.registers, set), s, mv)
    }

    /// Weight the working register at the right end-marker.
    fn finish(&self) -> Plan<KgState> {
        let mut targets = vec![(KgState::Reject("residual"), 0); 4];
        targets[0] = (KgState::Boost, 0);
        Plan {
            actions: actions(self.registers, &[(self.ops.work, Action::Weight)]),
            then: Then::ByOutcome {
                register: self.ops.work,
                targets,
            },
        }
    }
}

fn bit(c: char) -> Option<usize> {
    match c {
        '0' => Some(0),
        '1' => Some(1),
        _ => None,
    }
}

impl Planner for KgPlanner {
    type State = KgState;

    fn initial(&self) -> KgState {
        KgState::Start
    }

    fn role(&self, s: &KgState) -> ControlRole {
        match s {
            KgState::AskTag => ControlRole::Query(self.tag),
            KgState::AskDigit { .. } => ControlRole::Query(self.digit),
            KgState::Accept => ControlRole::Accept,
            KgState::Restart => ControlRole::Restart,
            KgState::Reject(_) => ControlRole::Reject,
            _ => ControlRole::Normal,
        }
    }

    fn on_reply(&self, s: &KgState, reply: GammaId) -> KgState {
        match s {
            KgState::AskTag if reply == self.g_zero => KgState::Exist {
                part: KgPart::E,
                active: true,
                seen: false,
            },
            KgState::AskTag if reply == self.g_one => KgState::Exist {
                part: KgPart::E,
                active: false,
                seen: false,
            },
            KgState::AskDigit { part, seen } => KgState::Check {
                part: part.clone(),
                reply,
                seen: *seen,
            },
            _ => KgState::Reject("reply"),
        }
    }

    fn plan(&self, s: &KgState, symbol: TapeSymbol) -> Plan<KgState> {
        use KgState::*;
        use TapeSymbol::*;
        let o = &self.ops;
        match (s, symbol) {
            (Start, LeftEnd) => self.go(&[], ReadS { seen: false }, 1),
            (ReadS { .. }, Input(c)) if bit(c).is_some() => {
                let d = bit(c).unwrap();
                self.go(&[(o.work, Action::Apply(o.s_digit[d]))], ReadS { seen: true }, 1)
            }
            (ReadS { seen: true }, Input('A')) | (AfterPair, Input('A')) => self.go(&[], OpenA, 1),
            (ReadS { seen: true }, RightEnd) | (AfterPair, RightEnd) => self.finish(),
            (OpenA, Input('(')) => self.go(
                &[
                    (o.coin, Action::Apply(o.prepare_coin)),
                    (o.restart, Action::Apply(o.halve)),
                ],
                Flip,
                1,
            ),
            (Flip, _) => Plan {
                actions: actions(self.registers, &[(o.coin, Action::Weight)]),
                then: Then::ByOutcome {
                    register: o.coin,
                    targets: vec![
                        (InA { take: true, seen: false }, 0),
                        (InA { take: false, seen: false }, 0),
                    ],
                },
            },
            (InA { take, .. }, Input(c)) | (InB { take, .. }, Input(c)) if bit(c).is_some() => {
                let d = bit(c).unwrap();
                let set: Vec<(usize, Action)> = if *take {
                    vec![(o.work, Action::Apply(o.x_digit[d]))]
                } else {
                    vec![]
                };
                let next = if matches!(s, InA { .. }) {
                    InA { take: *take, seen: true }
                } else {
                    InB { take: *take, seen: true }
                };
                self.go(&set, next, 1)
            }
            (InA { take, seen: true }, Input(',')) => self.go(&[], InB { take: !take, seen: false }, 1),
            (InB { seen: true, .. }, Input(')')) => {
                self.go(&[(o.work, Action::Apply(o.subtract))], ExpectE, 1)
            }
            (ExpectE, Input('E')) => self.go(&[], OpenE, 1),
            (OpenE, Input('(')) => self.go(&[], AskTag, 1),
            (Exist { part, active: true, seen }, Input(c)) if bit(c).is_some() || c == ',' || c == ')' => {
                self.go(&[], AskDigit { part: part.clone(), seen: *seen }, 0)
            }
            (Exist { part, active: false, .. }, Input(c)) if bit(c).is_some() => self.go(
                &[],
                Exist {
                    part: part.clone(),
                    active: false,
                    seen: true,
                },
                1,
            ),
            (Exist { part: KgPart::E, active: false, seen: true }, Input(',')) => self.go(
                &[],
                Exist {
                    part: KgPart::F,
                    active: true,
                    seen: false,
                },
                1,
            ),
            (Exist { part: KgPart::F, active: false, seen: true }, Input(')')) => self.go(&[], AfterPair, 1),
            (Check { part, reply, .. }, Input(c)) if bit(c).is_some() => {
                let d = bit(c).unwrap();
                let expected = if d == 0 { self.g_zero } else { self.g_one };
                if *reply != expected {
                    return self.reject("digit");
                }
                self.go(
                    &[(o.work, Action::Apply(o.x_digit[d]))],
                    Exist {
                        part: part.clone(),
                        active: true,
                        seen: true,
                    },
                    1,
                )
            }
            (Check { part, reply, seen }, Input(c)) if (c == ',' && *part == KgPart::E) || (c == ')' && *part == KgPart::F) => {
                if *reply != self.g_end {
                    return self.reject("digit");
                }
                if !seen {
                    return self.reject("malformed");
                }
                let next = match part {
                    KgPart::E => Exist {
                        part: KgPart::F,
                        active: false,
                        seen: false,
                    },
                    KgPart::F => AfterPair,
                };
                self.go(&[(o.work, Action::Apply(o.subtract))], next, 1)
            }
            (Boost, _) => self.go(&[(o.restart, Action::Apply(o.boost))], Weigh, 0),
            (Weigh, _) => Plan {
                actions: actions(self.registers, &[(o.restart, Action::Weight)]),
                then: Then::ByOutcome {
                    register: o.restart,
                    targets: vec![(Accept, 0), (Restart, 0)],
                },
            },
            _ => self.reject("malformed"),
        }
    }

    fn name(&self, s: &KgState) -> String {
        match s {
            KgState::Reject(why) => format!("reject:{why}"),
            KgState::Accept => "accept".into(),
            KgState::Restart => "restart".into(),
            other => format!("{other:?}"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct KgInfo {
    pub coin_register: usize,
}

impl KgInfo {
    pub fn honest(&self, verifier: &VerifierSpec, word: &str) -> KgProver {
        KgProver::new(verifier, KgInstance::parse(word).ok(), self.coin_register)
    }
}

/// Honest game player: picks a `y_i` that keeps the game won and spells it.
#[derive(Debug, Clone)]
pub struct KgProver {
    pub instance: Option<KgInstance>,
    coin_register: usize,
    tag: GammaId,
    g_zero: GammaId,
    g_one: GammaId,
    g_end: GammaId,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct KgMemory {
    pub coins: Vec<u8>,
    pub tags: Vec<u8>,
    pub digits: usize,
    pub last_query: Option<GammaId>,
}

impl KgProver {
    pub fn new(verifier: &VerifierSpec, instance: Option<KgInstance>, coin_register: usize) -> Self {
        let g = |s: &str| verifier.gamma(s).expect("knapsack alphabet");
        Self {
            instance,
            coin_register,
            tag: g(TAG_QUERY),
            g_zero: g("0"),
            g_one: g("1"),
            g_end: g("#"),
        }
    }
}

impl ProverStrategy for KgProver {
    type Memory = KgMemory;

    fn initial_memory(&self) -> KgMemory {
        KgMemory::default()
    }

    fn observe(&self, memory: &mut KgMemory, event: &TranscriptEvent) {
        match event {
            TranscriptEvent::Moved { outcomes, .. } => {
                if let Some(&t) = outcomes.get(self.coin_register) {
                    if t != 0 {
                        memory.coins.push(t as u8 - 1);
                    }
                }
            }
            TranscriptEvent::Query(g) => memory.last_query = Some(*g),
            TranscriptEvent::Reply(r) => {
                if memory.last_query == Some(self.tag) {
                    memory.tags.push(if *r == self.g_one { 1 } else { 0 });
                    memory.digits = 0;
                } else {
                    memory.digits += 1;
                }
            }
        }
    }

    fn reply(&self, memory: &KgMemory, query: GammaId) -> GammaId {
        let Some(inst) = &self.instance else {
            return self.g_end;
        };
        if query == self.tag {
            if memory.coins.len() <= memory.tags.len() {
                return self.g_zero;
            }
            return match inst.winning_choice(&memory.coins, &memory.tags) {
                Some(1) => self.g_one,
                _ => self.g_zero,
            };
        }
        let (Some(&t), Some(pair)) = (memory.tags.last(), memory.tags.len().checked_sub(1).and_then(|i| inst.pairs.get(i))) else {
            return self.g_end;
        };
        let digits = if t == 0 { &pair.e } else { &pair.f };
        match digits.as_bytes().get(memory.digits) {
            Some(b'0') => self.g_zero,
            Some(_) => self.g_one,
            None => self.g_end,
        }
    }
}

pub fn build_kg(epsilon: &Rational) -> Result<ProtocolBundle, ProtocolError> {
    check_epsilon(epsilon)?;
    let (registers, ops, _delta) = kg_registers(epsilon, 0);
    let comm = comm_alphabet();
    let g = |s: &str| comm.iter().position(|x| x == s).unwrap() as GammaId;
    let planner = KgPlanner {
        registers: registers.len(),
        g_zero: g("0"),
        g_one: g("1"),
        g_end: g("#"),
        tag: g(TAG_QUERY),
        digit: g(DIGIT_QUERY),
        ops: ops.clone(),
    };
    let header = SpecHeader {
        name: "kg".into(),
        mode: Mode::TwoWay,
        input_alphabet: kg_alphabet(),
        comm_alphabet: comm.clone(),
        registers,
    };
    let verifier = compile_planner(header, &planner, 256)?;
    Ok(ProtocolBundle {
        name: "kg".into(),
        verifier,
        epsilon: epsilon.clone(),
        round_structured: true,
        kind: Kind::Kg(KgInfo { coin_register: ops.coin }),
    })
}
