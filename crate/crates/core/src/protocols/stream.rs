//! Verifiers that read a Turing machine computation `c_0 # c_1 # ...` from the prover.
//!
//! Two 4-entry registers alternate. While block `c_i` streams in, the "current"
//! register folds `val(c_i)` into entry 3 and the "next" register folds
//! `val(next(c_i))` into entry 2; the successor is produced on the fly from a one-symbol
//! buffer around the state symbol. At `#` the current register (which then holds
//! `val(next(c_{i-1}))` and `val(c_i)`) is amplified by `T_C`, subtracted by `S` and
//! weighted: outcome 1 passes, anything else rejects.
//!
//! The same skeleton carries the continuation check (a counting register swept along
//! the idle input head), the alternating variant (coin for universal branches, prover
//! for existential ones, plus a restart register) and the reduction pipeline (a
//! linear-length check and a streaming knapsack game on the produced output).

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::binomial;
use num_traits::{One, Pow, Zero};
use serde::Serialize;

use crate::affine::{AffineOperator, AffineState};
use crate::encoders::{binomial_update, digit_append, ratio_operator, DigitTarget};
use crate::engine::{ProverStrategy, SequenceProver, TranscriptEvent};
use crate::machine::{Action, ControlRole, GammaId, Mode, RegisterSpec, SpecHeader, TapeSymbol, VerifierSpec};
use crate::rational::{format_rational, Rational};
use crate::tm::{
    normalize_alternating, ConfigSymbol, Flavor, Next, Quantifier, TMConfiguration, TuringMachine,
    TuringMachineSpec,
};

use super::kg::{kg_alphabet, kg_registers, KgInstance, KgOps, TAG_QUERY};
use super::{actions, check_epsilon, compile_planner, half, one_minus, HonestProver, Kind, Plan, Planner, ProtocolBundle, ProtocolError, Then};

pub const REQUEST: &str = "?";
pub const CHOICE_QUERY: &str = "?choice";
const STATE_CAP: usize = 2_000_000;
/// Step bound for reference runs of the simulated machine.
pub const MACHINE_STEPS: usize = 100_000;

/// Maps configuration symbols to communication symbols and encoding digits.
///
/// Tape symbol `t` gets digit `t + 1`, state `q` gets `T + q + 1`, base `T + Q + 1`;
/// no symbol has digit 0, so values of different-length strings never collide.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StreamCodec {
    pub tape_symbols: usize,
    pub states: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamSymbol {
    Config(ConfigSymbol),
    Hash,
    Other,
}

impl StreamCodec {
    pub fn new(m: &TuringMachine) -> Self {
        Self {
            tape_symbols: m.symbol_count(),
            states: m.state_count(),
        }
    }

    pub fn base(&self) -> u32 {
        (self.tape_symbols + self.states + 1) as u32
    }

    pub fn digit(&self, s: ConfigSymbol) -> u32 {
        match s {
            ConfigSymbol::Tape(t) => t as u32 + 1,
            ConfigSymbol::State(q) => (self.tape_symbols + q as usize + 1) as u32,
        }
    }

    pub fn gamma(&self, s: ConfigSymbol) -> GammaId {
        self.digit(s) as GammaId
    }

    pub fn hash(&self) -> GammaId {
        (self.tape_symbols + self.states + 1) as GammaId
    }

    pub fn decode(&self, g: GammaId) -> StreamSymbol {
        let g = g as usize;
        let t = self.tape_symbols;
        match g {
            0 => StreamSymbol::Other,
            g if g <= t => StreamSymbol::Config(ConfigSymbol::Tape((g - 1) as u16)),
            g if g <= t + self.states => StreamSymbol::Config(ConfigSymbol::State((g - t - 1) as u16)),
            g if g == t + self.states + 1 => StreamSymbol::Hash,
            _ => StreamSymbol::Other,
        }
    }

    /// `?`, tape symbols, `[state]` names, `#`, then `extras` not already present.
    pub fn alphabet(&self, m: &TuringMachine, extras: &[&str]) -> Vec<String> {
        let mut out = vec![REQUEST.to_string()];
        out.extend(m.spec.tape_alphabet.iter().map(|c| c.to_string()));
        out.extend(m.spec.states.iter().map(|q| format!("[{q}]")));
        out.push("#".into());
        for e in extras {
            if !out.iter().any(|x| x == e) {
                out.push(e.to_string());
            }
        }
        out
    }

    pub fn value(&self, c: &TMConfiguration) -> BigInt {
        let base = BigInt::from(self.base());
        c.symbols
            .iter()
            .fold(BigInt::zero(), |v, &s| v * &base + BigInt::from(self.digit(s)))
    }

    pub fn encode_config(&self, c: &TMConfiguration) -> Vec<GammaId> {
        c.symbols.iter().map(|&s| self.gamma(s)).collect()
    }

    /// Every configuration followed by `#`.
    pub fn encode_stream(&self, configs: &[TMConfiguration]) -> Vec<GammaId> {
        let mut out = Vec::new();
        for c in configs {
            out.extend(self.encode_config(c));
            out.push(self.hash());
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ContinuationCase {
    /// Budget `c |w|^k` prover symbols.
    Polynomial { k: u32, c: u64 },
    /// Budget `c 2^(k |w|)` prover symbols.
    Exponential { k: u32, c: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContinuationSetup {
    pub case: ContinuationCase,
    pub epsilon: Rational,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StreamVariant {
    Weak,
    Alternating,
    Reduction,
}

#[derive(Debug, Clone)]
pub struct StreamInfo {
    pub machine: TuringMachine,
    pub codec: StreamCodec,
    pub variant: StreamVariant,
    pub continuation: Option<ContinuationSetup>,
    pub(crate) coin_register: Option<usize>,
}

impl StreamInfo {
    pub fn is_member(&self, word: &str) -> Result<bool, ProtocolError> {
        let m = &self.machine;
        Ok(match self.variant {
            StreamVariant::Weak => m.run(word, MACHINE_STEPS)? == Some(true),
            StreamVariant::Alternating => m.alternating_accepts(&m.initial_config(word)?, MACHINE_STEPS),
            StreamVariant::Reduction => {
                let s = m.honest_stream(word, MACHINE_STEPS)?;
                s.accepted() && KgInstance::parse(&s.output()).map(|k| k.game_member()).unwrap_or(false)
            }
        })
    }

    pub fn honest(&self, verifier: &VerifierSpec, word: &str) -> Result<HonestProver, ProtocolError> {
        Ok(match self.variant {
            StreamVariant::Weak => HonestProver::Sequence(self.honest_sequence(word)?),
            StreamVariant::Alternating => HonestProver::Atm(AtmProver::honest(self, verifier, word)?),
            StreamVariant::Reduction => HonestProver::Reduction(ReductionProver::honest(self, verifier, word)?),
        })
    }

    /// The honest transmission of a deterministic machine, then `#` forever.
    pub fn honest_sequence(&self, word: &str) -> Result<SequenceProver, ProtocolError> {
        let s = self.machine.honest_stream(word, MACHINE_STEPS)?;
        Ok(SequenceProver {
            symbols: self.codec.encode_stream(&s.configs),
            tail: self.codec.hash(),
        })
    }
}

/// Why a stream verifier rejected; reject states are named `reject:<reason>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RejectReason {
    /// `c_0` differs from the initial configuration.
    Initial,
    /// A block is not of the form `u q v`.
    Format,
    /// The machine has no (or an impossible) move at the announced boundary.
    Transition,
    /// A successor comparison failed.
    Compare,
    /// A halting rejecting configuration was reached.
    Halt,
    /// A request symbol was sent as data, or a choice or tag reply was invalid.
    Reply,
    Continuation,
    /// A block of the reduction stream has the wrong length.
    Length,
    /// The reduction output is not a well-formed knapsack instance.
    Instance,
    /// The knapsack target was missed.
    Residual,
    /// Empty input on a machine that rejects it.
    Empty,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Parse {
    Before { last: Option<u16> },
    AtState { last: Option<u16>, q: u16 },
    After { q: u16 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum KgStream {
    S { seen: bool },
    OpenA,
    InA { take: bool, seen: bool },
    InB { take: bool, seen: bool },
    ExpectE,
    OpenE,
    InE { active: bool, seen: bool },
    InF { active: bool, seen: bool },
    After,
}

impl KgStream {
    fn complete(self) -> bool {
        matches!(self, KgStream::S { seen: true } | KgStream::After)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct Ctx {
    parse: Parse,
    block0: bool,
    /// A symbol of the current block was received.
    received: bool,
    /// The head reached `$` during a lockstep or length sweep.
    full: bool,
    /// false: register 0 is "next" (A operators), register 1 is "current".
    swap: bool,
    kg: KgStream,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Task {
    /// Apply operators, head stays.
    Ops(Vec<(usize, u16)>),
    /// Block 0: the scanned cell must hold this machine symbol.
    Lock(u16),
    LenStep,
    /// Move left until `¢`.
    Rewind,
    Move(i8),
    Count,
    Probe,
    CheckWeigh,
    /// Weigh the coin; outcome `i + 1` continues with `options[i]`.
    Flip(Box<[Vec<Task>; 2]>),
    AskChoice(Box<[Vec<Task>; 2]>),
    Compare(usize),
    WeighRestart,
    WeighWork,
    KgFeed(char),
    KgFlip,
    KgAskTag,
    Halt(Option<RejectReason>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum St {
    Start,
    ProbeEmpty,
    Ask(Ctx),
    Run(Ctx, Vec<Task>),
    Choice(Ctx, Box<[Vec<Task>; 2]>, Vec<Task>),
    Tag(Ctx, Vec<Task>),
    Accept,
    Restart,
    Reject(RejectReason),
}

#[derive(Debug, Clone)]
struct Bank {
    a: Vec<u16>,
    b: Vec<u16>,
    tc: u16,
    s: u16,
}

#[derive(Debug, Clone)]
struct CheckOps {
    reg: usize,
    dim: usize,
    count: u16,
    end: u16,
    reset: u16,
}

#[derive(Debug, Clone)]
struct AtmOps {
    coin: usize,
    prepare: u16,
    restart: usize,
    halve: u16,
    boost: u16,
}

struct StreamPlanner<'a> {
    m: &'a TuringMachine,
    codec: StreamCodec,
    variant: StreamVariant,
    registers: usize,
    bank: Bank,
    check: Option<CheckOps>,
    atm: Option<AtmOps>,
    kg: Option<KgOps>,
    b0: GammaId,
    b1: GammaId,
    tag_zero: GammaId,
    tag_one: GammaId,
    empty_accepts: bool,
}

fn tape_symbol_of(m: &TuringMachine, sym: TapeSymbol) -> Option<u16> {
    match sym {
        TapeSymbol::LeftEnd => Some(m.left),
        TapeSymbol::RightEnd => Some(m.right),
        TapeSymbol::Input(c) => m.symbol_index(c),
    }
}

impl StreamPlanner<'_> {
    fn next_reg(&self, ctx: &Ctx) -> usize {
        usize::from(ctx.swap)
    }

    fn cur_reg(&self, ctx: &Ctx) -> usize {
        usize::from(!ctx.swap)
    }

    fn a_op(&self, ctx: &Ctx, s: ConfigSymbol) -> Task {
        Task::Ops(vec![(self.next_reg(ctx), self.bank.a[self.codec.digit(s) as usize])])
    }

    /// Operators appending the boundary block of `next(c)` for one rule.
    fn boundary(&self, ctx: &Ctx, last: Option<u16>, rule: &crate::tm::Rule) -> Result<Vec<Task>, RejectReason> {
        let u = last.map(ConfigSymbol::Tape);
        let x = ConfigSymbol::Tape(rule.write);
        let q = ConfigSymbol::State(rule.next);
        let order: Vec<ConfigSymbol> = match rule.shift {
            1 => u.into_iter().chain([x, q]).collect(),
            0 => u.into_iter().chain([q, x]).collect(),
            _ => match u {
                Some(u) => vec![q, u, x],
                None => return Err(RejectReason::Transition),
            },
        };
        let mut tasks: Vec<Task> = order.into_iter().map(|s| self.a_op(ctx, s)).collect();
        if let Some(c) = rule.output {
            if self.variant == StreamVariant::Reduction {
                tasks.push(Task::KgFeed(c));
            }
        }
        Ok(tasks)
    }

    /// Handles one prover symbol given as the reply to `?`.
    fn receive(&self, mut ctx: Ctx, g: GammaId) -> Result<(Ctx, Vec<Task>), RejectReason> {
        let m = self.m;
        let halve = self.atm.as_ref().map(|a| (a.restart, a.halve));
        let mut first: Vec<(usize, u16)> = halve.into_iter().collect();
        let mut tasks = Vec::new();
        match self.codec.decode(g) {
            StreamSymbol::Other => return Err(RejectReason::Reply),
            StreamSymbol::Config(s) => {
                if ctx.block0 {
                    let ok = match (ctx.received, s) {
                        (false, ConfigSymbol::State(q)) => q == m.initial,
                        (true, ConfigSymbol::Tape(_)) => !ctx.full,
                        _ => false,
                    };
                    if !ok {
                        return Err(RejectReason::Initial);
                    }
                } else {
                    first.push((self.cur_reg(&ctx), self.bank.b[self.codec.digit(s) as usize]));
                    if self.variant == StreamVariant::Reduction && ctx.full && matches!(s, ConfigSymbol::Tape(_)) {
                        return Err(RejectReason::Length);
                    }
                }
                let mut boundary = Vec::new();
                ctx.parse = match (ctx.parse.clone(), s) {
                    (Parse::Before { last }, ConfigSymbol::Tape(t)) => {
                        if let Some(u) = last {
                            boundary.push(self.a_op(&ctx, ConfigSymbol::Tape(u)));
                        }
                        Parse::Before { last: Some(t) }
                    }
                    (Parse::Before { last }, ConfigSymbol::State(q)) => Parse::AtState { last, q },
                    (Parse::AtState { last, q }, ConfigSymbol::Tape(b)) => {
                        if !m.is_halting(q) {
                            let rules = m.rules(q, b);
                            match (rules, m.label(q)) {
                                ([], _) => return Err(RejectReason::Transition),
                                ([r], _) => boundary.extend(self.boundary(&ctx, last, r)?),
                                ([r0, r1], Some(quant)) if self.variant == StreamVariant::Alternating => {
                                    let options = Box::new([self.boundary(&ctx, last, r0)?, self.boundary(&ctx, last, r1)?]);
                                    if quant == Quantifier::Universal {
                                        let atm = self.atm.as_ref().expect("alternating registers");
                                        boundary.push(Task::Ops(vec![(atm.coin, atm.prepare)]));
                                        boundary.push(Task::Flip(options));
                                    } else {
                                        boundary.push(Task::AskChoice(options));
                                    }
                                }
                                _ => return Err(RejectReason::Transition),
                            }
                        }
                        Parse::After { q }
                    }
                    (Parse::After { q }, ConfigSymbol::Tape(t)) => {
                        if !m.is_halting(q) {
                            boundary.push(self.a_op(&ctx, ConfigSymbol::Tape(t)));
                        }
                        Parse::After { q }
                    }
                    (_, ConfigSymbol::State(_)) => return Err(RejectReason::Format),
                };
                if !first.is_empty() {
                    tasks.push(Task::Ops(first));
                }
                tasks.extend(boundary);
                if let ConfigSymbol::Tape(t) = s {
                    if ctx.block0 {
                        tasks.push(Task::Lock(t));
                    } else if self.variant == StreamVariant::Reduction {
                        tasks.push(Task::LenStep);
                    }
                }
                if !ctx.block0 && self.check.is_some() {
                    tasks.push(Task::Count);
                    tasks.push(Task::Probe);
                }
                ctx.received = true;
            }
            StreamSymbol::Hash => {
                let Parse::After { q } = ctx.parse else {
                    return Err(RejectReason::Format);
                };
                if ctx.block0 && !ctx.full {
                    return Err(RejectReason::Initial);
                }
                if self.variant == StreamVariant::Reduction && !ctx.full {
                    return Err(RejectReason::Length);
                }
                let was_block0 = ctx.block0;
                if !was_block0 {
                    let cur = self.cur_reg(&ctx);
                    first.push((cur, self.bank.tc));
                    tasks.push(Task::Ops(first));
                    tasks.push(Task::Ops(vec![(cur, self.bank.s)]));
                    tasks.push(Task::Compare(cur));
                } else if !first.is_empty() {
                    tasks.push(Task::Ops(first));
                }
                if q == m.accept {
                    match self.variant {
                        StreamVariant::Weak => tasks.push(Task::Halt(None)),
                        StreamVariant::Alternating => {
                            let atm = self.atm.as_ref().expect("alternating registers");
                            tasks.push(Task::Ops(vec![(atm.restart, atm.boost)]));
                            tasks.push(Task::WeighRestart);
                        }
                        StreamVariant::Reduction => {
                            if !ctx.kg.complete() {
                                tasks.push(Task::Halt(Some(RejectReason::Instance)));
                            } else {
                                tasks.push(Task::WeighWork);
                            }
                        }
                    }
                    return Ok((ctx, tasks));
                }
                if Some(q) == m.reject {
                    tasks.push(Task::Halt(Some(RejectReason::Halt)));
                    return Ok((ctx, tasks));
                }
                ctx.swap = !ctx.swap;
                ctx.parse = Parse::Before { last: None };
                ctx.block0 = false;
                ctx.received = false;
                ctx.full = false;
                if self.variant == StreamVariant::Reduction {
                    tasks.push(Task::Rewind);
                } else if self.check.is_some() {
                    if was_block0 {
                        tasks.push(Task::Rewind);
                        tasks.push(Task::Move(1));
                    } else {
                        tasks.push(Task::Count);
                        tasks.push(Task::Probe);
                    }
                }
            }
        }
        Ok((ctx, tasks))
    }

    /// Turns a context and task list into a state: queries and halts at the front of
    /// the list become their own states.
    fn settle(&self, ctx: Ctx, mut todo: Vec<Task>) -> St {
        if todo.is_empty() {
            return St::Ask(ctx);
        }
        match todo[0].clone() {
            Task::AskChoice(options) => {
                todo.remove(0);
                St::Choice(ctx, options, todo)
            }
            Task::KgAskTag => {
                todo.remove(0);
                St::Tag(ctx, todo)
            }
            Task::Halt(None) => St::Accept,
            Task::Halt(Some(r)) => St::Reject(r),
            _ => St::Run(ctx, todo),
        }
    }

    fn noop(&self) -> Vec<Action> {
        actions(self.registers, &[])
    }

    fn apply(&self, ops: &[(usize, u16)]) -> Vec<Action> {
        let set: Vec<(usize, Action)> = ops.iter().map(|&(r, o)| (r, Action::Apply(o))).collect();
        actions(self.registers, &set)
    }

    fn weigh(&self, reg: usize, targets: Vec<(St, i8)>) -> Plan<St> {
        Plan {
            actions: actions(self.registers, &[(reg, Action::Weight)]),
            then: Then::ByOutcome { register: reg, targets },
        }
    }

    /// Processes one output symbol of the reduction machine in the streaming game.
    fn kg_feed(&self, ctx: &mut Ctx, c: char, rest: &mut Vec<Task>) -> Result<Vec<(usize, u16)>, RejectReason> {
        use KgStream::*;
        let o = self.kg.as_ref().expect("reduction registers");
        let bit = match c {
            '0' => Some(0usize),
            '1' => Some(1),
            _ => None,
        };
        let mut ops = Vec::new();
        ctx.kg = match (ctx.kg, c, bit) {
            (S { .. }, _, Some(d)) => {
                ops.push((o.work, o.s_digit[d]));
                S { seen: true }
            }
            (S { seen: true } | After, 'A', _) => OpenA,
            (OpenA, '(', _) => {
                ops.push((o.coin, o.prepare_coin));
                ops.push((o.restart, o.halve));
                rest.insert(0, Task::KgFlip);
                OpenA
            }
            (InA { take, .. }, _, Some(d)) => {
                if take {
                    ops.push((o.work, o.x_digit[d]));
                }
                InA { take, seen: true }
            }
            (InB { take, .. }, _, Some(d)) => {
                if take {
                    ops.push((o.work, o.x_digit[d]));
                }
                InB { take, seen: true }
            }
            (InA { take, seen: true }, ',', _) => InB { take: !take, seen: false },
            (InB { seen: true, .. }, ')', _) => {
                ops.push((o.work, o.subtract));
                ExpectE
            }
            (ExpectE, 'E', _) => OpenE,
            (OpenE, '(', _) => {
                rest.insert(0, Task::KgAskTag);
                OpenE
            }
            (InE { active, .. }, _, Some(d)) => {
                if active {
                    ops.push((o.work, o.x_digit[d]));
                }
                InE { active, seen: true }
            }
            (InF { active, .. }, _, Some(d)) => {
                if active {
                    ops.push((o.work, o.x_digit[d]));
                }
                InF { active, seen: true }
            }
            (InE { active, seen: true }, ',', _) => InF { active: !active, seen: false },
            (InF { seen: true, .. }, ')', _) => {
                ops.push((o.work, o.subtract));
                After
            }
            _ => return Err(RejectReason::Instance),
        };
        Ok(ops)
    }
}

impl Planner for StreamPlanner<'_> {
    type State = St;

    fn initial(&self) -> St {
        St::Start
    }

    fn role(&self, s: &St) -> ControlRole {
        match s {
            St::Ask(_) => ControlRole::Query(0),
            St::Choice(..) => ControlRole::Query(CHOICE_GAMMA_PLACEHOLDER),
            St::Tag(..) => ControlRole::Query(TAG_GAMMA_PLACEHOLDER),
            St::Accept => ControlRole::Accept,
            St::Restart => ControlRole::Restart,
            St::Reject(_) => ControlRole::Reject,
            _ => ControlRole::Normal,
        }
    }

    fn on_reply(&self, s: &St, reply: GammaId) -> St {
        match s {
            St::Ask(ctx) => match self.receive(ctx.clone(), reply) {
                Ok((ctx, todo)) => self.settle(ctx, todo),
                Err(r) => St::Reject(r),
            },
            St::Choice(ctx, options, rest) => {
                let pick = if reply == self.b0 {
                    0
                } else if reply == self.b1 {
                    1
                } else {
                    return St::Reject(RejectReason::Reply);
                };
                let mut todo = options[pick].clone();
                todo.extend(rest.iter().cloned());
                self.settle(ctx.clone(), todo)
            }
            St::Tag(ctx, rest) => {
                let active = if reply == self.tag_zero {
                    true
                } else if reply == self.tag_one {
                    false
                } else {
                    return St::Reject(RejectReason::Reply);
                };
                let mut ctx = ctx.clone();
                ctx.kg = KgStream::InE { active, seen: false };
                self.settle(ctx, rest.clone())
            }
            _ => St::Reject(RejectReason::Reply),
        }
    }

    fn plan(&self, s: &St, symbol: TapeSymbol) -> Plan<St> {
        let fresh = || Ctx {
            parse: Parse::Before { last: None },
            block0: true,
            received: false,
            full: false,
            swap: false,
            kg: KgStream::S { seen: false },
        };
        match s {
            St::Start => {
                if self.check.is_some() {
                    Plan::go(self.noop(), St::ProbeEmpty, 1)
                } else {
                    Plan::go(self.noop(), St::Ask(fresh()), 0)
                }
            }
            St::ProbeEmpty => match symbol {
                TapeSymbol::RightEnd if self.empty_accepts => Plan::go(self.noop(), St::Accept, 0),
                TapeSymbol::RightEnd => Plan::go(self.noop(), St::Reject(RejectReason::Empty), 0),
                _ => Plan::go(self.noop(), St::Ask(fresh()), -1),
            },
            St::Run(ctx, todo) => self.run(ctx, todo, symbol),
            _ => Plan::go(self.noop(), St::Reject(RejectReason::Reply), 0),
        }
    }

    fn name(&self, s: &St) -> String {
        match s {
            St::Accept => "accept".into(),
            St::Restart => "restart".into(),
            St::Reject(r) => format!("reject:{r:?}"),
            other => format!("{other:?}"),
        }
    }
}

// Query symbols are resolved per spec in `role_gamma`; these mark the two extra queries.
const CHOICE_GAMMA_PLACEHOLDER: GammaId = GammaId::MAX;
const TAG_GAMMA_PLACEHOLDER: GammaId = GammaId::MAX - 1;

impl StreamPlanner<'_> {
    fn run(&self, ctx: &Ctx, todo: &[Task], symbol: TapeSymbol) -> Plan<St> {
        let mut ctx = ctx.clone();
        let task = todo[0].clone();
        let mut rest: Vec<Task> = todo[1..].to_vec();
        let go = |me: &Self, ctx: Ctx, rest: Vec<Task>, acts: Vec<Action>, mv: i8| Plan::go(acts, me.settle(ctx, rest), mv);
        match task {
            Task::Ops(ops) => go(self, ctx, rest, self.apply(&ops), 0),
            Task::Lock(t) => {
                if tape_symbol_of(self.m, symbol) != Some(t) {
                    return Plan::go(self.noop(), St::Reject(RejectReason::Initial), 0);
                }
                if symbol == TapeSymbol::RightEnd {
                    ctx.full = true;
                    go(self, ctx, rest, self.noop(), 0)
                } else {
                    go(self, ctx, rest, self.noop(), 1)
                }
            }
            Task::LenStep => {
                if symbol == TapeSymbol::RightEnd {
                    ctx.full = true;
                    go(self, ctx, rest, self.noop(), 0)
                } else {
                    go(self, ctx, rest, self.noop(), 1)
                }
            }
            Task::Rewind => {
                if symbol == TapeSymbol::LeftEnd {
                    go(self, ctx, rest, self.noop(), 0)
                } else {
                    go(self, ctx, todo.to_vec(), self.noop(), -1)
                }
            }
            Task::Move(mv) => go(self, ctx, rest, self.noop(), mv),
            Task::Count => {
                let c = self.check.as_ref().expect("check register");
                match symbol {
                    TapeSymbol::Input(_) => go(self, ctx, rest, self.apply(&[(c.reg, c.count)]), 1),
                    // Only reachable on inputs the sweep does not cover.
                    _ => go(self, ctx, rest, self.noop(), 0),
                }
            }
            Task::Probe => {
                let c = self.check.as_ref().expect("check register");
                if symbol == TapeSymbol::RightEnd {
                    let mut todo = vec![
                        Task::CheckWeigh,
                        Task::Ops(vec![(c.reg, c.reset)]),
                        Task::Rewind,
                        Task::Move(1),
                    ];
                    todo.extend(rest);
                    go(self, ctx, todo, self.apply(&[(c.reg, c.end)]), 0)
                } else {
                    go(self, ctx, rest, self.noop(), 0)
                }
            }
            Task::CheckWeigh => {
                let c = self.check.as_ref().expect("check register");
                let pass = self.settle(ctx, rest);
                let mut targets = vec![(pass, 0); c.dim];
                targets[0] = (St::Reject(RejectReason::Continuation), 0);
                self.weigh(c.reg, targets)
            }
            Task::Flip(options) => {
                let atm = self.atm.as_ref().expect("alternating registers");
                let targets = options
                    .iter()
                    .map(|o| {
                        let mut t = o.clone();
                        t.extend(rest.iter().cloned());
                        (self.settle(ctx.clone(), t), 0)
                    })
                    .collect();
                self.weigh(atm.coin, targets)
            }
            Task::Compare(reg) => {
                let pass = self.settle(ctx, rest);
                let mut targets = vec![(St::Reject(RejectReason::Compare), 0); 4];
                targets[0] = (pass, 0);
                self.weigh(reg, targets)
            }
            Task::WeighRestart => {
                let reg = match (&self.atm, &self.kg) {
                    (Some(a), _) => a.restart,
                    (None, Some(k)) => k.restart,
                    _ => unreachable!("restart register present"),
                };
                self.weigh(reg, vec![(St::Accept, 0), (St::Restart, 0)])
            }
            Task::WeighWork => {
                let k = self.kg.as_ref().expect("reduction registers");
                let pass = self.settle(ctx, vec![Task::Ops(vec![(k.restart, k.boost)]), Task::WeighRestart]);
                let mut targets = vec![(St::Reject(RejectReason::Residual), 0); 4];
                targets[0] = (pass, 0);
                self.weigh(k.work, targets)
            }
            Task::KgFeed(c) => match self.kg_feed(&mut ctx, c, &mut rest) {
                Ok(ops) => go(self, ctx, rest, self.apply(&ops), 0),
                Err(r) => Plan::go(self.noop(), St::Reject(r), 0),
            },
            Task::KgFlip => {
                let k = self.kg.as_ref().expect("reduction registers");
                let targets = [true, false]
                    .into_iter()
                    .map(|take| {
                        let mut c = ctx.clone();
                        c.kg = KgStream::InA { take, seen: false };
                        (self.settle(c, rest.clone()), 0)
                    })
                    .collect();
                self.weigh(k.coin, targets)
            }
            Task::AskChoice(_) | Task::KgAskTag | Task::Halt(_) => {
                unreachable!("settled into their own states")
            }
        }
    }
}

fn comparison_bank(reg: &mut RegisterSpec, codec: &StreamCodec, epsilon: &Rational) -> Bank {
    let base = codec.base();
    let mut a = vec![0u16; base as usize];
    let mut b = vec![0u16; base as usize];
    for d in 1..base {
        a[d as usize] = reg.push(&format!("A_{d}"), digit_append(base, d, DigitTarget::Second).expect("digit in range"));
        b[d as usize] = reg.push(&format!("B_{d}"), digit_append(base, d, DigitTarget::Third).expect("digit in range"));
    }
    // C = (1 - eps) / (2 eps)
    let c = one_minus(epsilon) / (epsilon * Rational::from_integer(2.into()));
    let z = Rational::zero;
    let o = Rational::one;
    let tc = AffineOperator::new(vec![
        vec![o(), z(), z(), z()],
        vec![z(), c.clone(), z(), z()],
        vec![z(), z(), c.clone(), z()],
        vec![z(), one_minus(&c), one_minus(&c), o()],
    ])
    .expect("T_C is affine");
    let tc = reg.push("T_C", tc);
    let s = reg.push(
        "S",
        AffineOperator::from_i64_rows(&[&[1, 0, 0, 0], &[0, 1, -1, 0], &[0, -1, 1, 0], &[0, 1, 1, 1]]).expect("S is affine"),
    );
    Bank { a, b, tc, s }
}

fn comparison_registers(codec: &StreamCodec, epsilon: &Rational) -> (Vec<RegisterSpec>, Bank) {
    let mut r1 = RegisterSpec::new("config-1", 4);
    let bank = comparison_bank(&mut r1, codec, epsilon);
    let mut r2 = r1.clone();
    r2.name = "config-2".into();
    (vec![r1, r2], bank)
}

/// Count, end and reset operators of the continuation register.
pub fn continuation_register(case: ContinuationCase, epsilon: &Rational) -> Result<RegisterSpec, ProtocolError> {
    let (k, c) = match case {
        ContinuationCase::Polynomial { k, c } | ContinuationCase::Exponential { k, c } => (k, c),
    };
    if c == 0 {
        return Err(ProtocolError::Budget("c must be positive".into()));
    }
    if *epsilon <= Rational::zero() || *epsilon > half() {
        return Err(ProtocolError::EpsilonRange(format_rational(epsilon)));
    }
    let m = Rational::from_integer(c.into()) / epsilon;
    let mut reg;
    match case {
        ContinuationCase::Exponential { .. } => {
            if k == 0 {
                return Err(ProtocolError::Budget("k must be positive".into()));
            }
            reg = RegisterSpec::new("continuation", 2);
            let ratio = Rational::new(1.into(), BigInt::from(2).pow(k));
            reg.push("count", ratio_operator(&ratio));
            reg.push("end", ratio_operator(&(Rational::one() / &m)));
            reg.push("reset", AffineOperator::from_i64_rows(&[&[1, 1], &[0, 0]]).expect("reset"));
        }
        ContinuationCase::Polynomial { .. } => {
            if k < 2 {
                return Err(ProtocolError::Budget(format!(
                    "polynomial degree {k} gives a check that always fires"
                )));
            }
            let k = k as usize;
            let dim = k + 3;
            reg = RegisterSpec::new("continuation", dim);
            reg.push("count", binomial_update(k));
            // Keep entry 0, scale entries 1..k-1 by (m/2) C(k-1, j), drop the rest into
            // the balancing entry.
            let mut rows = vec![vec![Rational::zero(); dim]; dim];
            rows[0][0] = Rational::one();
            for j in 1..k {
                let coef = &m / Rational::from_integer(2.into())
                    * Rational::from_integer(binomial(BigInt::from(k - 1), BigInt::from(j)));
                rows[dim - 1][j] = one_minus(&coef);
                rows[j][j] = coef;
            }
            for j in k..dim {
                rows[dim - 1][j] = Rational::one();
            }
            reg.push("end", AffineOperator::new(rows).expect("end gadget is affine"));
            let mut reset = vec![vec![Rational::zero(); dim]; dim];
            reset[0] = vec![Rational::one(); dim];
            reg.push("reset", AffineOperator::new(reset).expect("reset is affine"));
        }
    }
    Ok(reg)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ContinuationReport {
    pub case: ContinuationCase,
    pub word_len: usize,
    /// Rejection probability of one check, from weighting the built register.
    #[serde(with = "crate::rational::serde_rational")]
    pub p: Rational,
    /// The closed form `1/(m 2^(k|w|))` resp. `1/(m |w|^(k-1))`.
    #[serde(with = "crate::rational::serde_rational")]
    pub closed_form: Rational,
    #[serde(serialize_with = "as_decimal")]
    pub budget: BigInt,
    #[serde(serialize_with = "as_decimal")]
    pub checks: BigInt,
    /// `1 - (1 - p)^checks`.
    #[serde(with = "crate::rational::serde_rational")]
    pub false_reject: Rational,
    #[serde(with = "crate::rational::serde_rational")]
    pub epsilon: Rational,
    pub within_bound: bool,
}

fn as_decimal<S: serde::Serializer>(n: &BigInt, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(n)
}

/// Exact check statistics for inputs of length `word_len`.
pub fn continuation_report(case: ContinuationCase, epsilon: &Rational, word_len: usize) -> Result<ContinuationReport, ProtocolError> {
    if word_len == 0 {
        return Err(ProtocolError::Budget("checks are undefined for the empty input".into()));
    }
    let reg = continuation_register(case, epsilon)?;
    let op = |name: &str| &reg.operators[reg.find(name).expect("bank entry") as usize].matrix;
    let mut v = AffineState::basis(reg.dim, 0);
    for _ in 0..word_len {
        v = op("count").apply(&v)?;
    }
    v = op("end").apply(&v)?;
    let p = v.weight().probabilities[0].clone();
    let n = BigInt::from(word_len);
    let (k, c) = match case {
        ContinuationCase::Polynomial { k, c } | ContinuationCase::Exponential { k, c } => (k, c),
    };
    let m = Rational::from_integer(c.into()) / epsilon;
    let (budget, closed_form) = match case {
        ContinuationCase::Exponential { .. } => {
            let pow = BigInt::from(2).pow(k as usize * word_len);
            (BigInt::from(c) * &pow, Rational::one() / (&m * Rational::from_integer(pow)))
        }
        ContinuationCase::Polynomial { .. } => (
            BigInt::from(c) * n.clone().pow(k),
            Rational::one() / (&m * Rational::from_integer(n.clone().pow(k - 1))),
        ),
    };
    let checks = &budget / &n;
    let exponent: usize = checks.clone().try_into().map_err(|_| ProtocolError::Budget("too many checks".into()))?;
    let false_reject = Rational::one() - Pow::pow(one_minus(&p), exponent);
    let within_bound = false_reject <= *epsilon;
    Ok(ContinuationReport {
        case,
        word_len,
        p,
        closed_form,
        budget,
        checks,
        false_reject,
        epsilon: epsilon.clone(),
        within_bound,
    })
}

/// Input lengths the builder certifies the completeness inequality for.
pub const CERTIFIED_LENGTHS: std::ops::RangeInclusive<usize> = 1..=6;

struct Build<'a> {
    m: &'a TuringMachine,
    variant: StreamVariant,
    epsilon: &'a Rational,
    continuation: Option<ContinuationSetup>,
    restart: Option<RestartParams>,
}

/// Restart register of the alternating verifier: `ratio` per received symbol, `delta`
/// at an accepting configuration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RestartParams {
    pub ratio: Rational,
    pub delta: Rational,
}

impl RestartParams {
    pub fn standard(epsilon: &Rational) -> Self {
        Self {
            ratio: half(),
            delta: epsilon.clone(),
        }
    }
}

fn build_stream(b: Build<'_>) -> Result<ProtocolBundle, ProtocolError> {
    let m = b.m;
    let codec = StreamCodec::new(m);
    let (mut registers, bank) = comparison_registers(&codec, b.epsilon);
    let mut extras: Vec<&str> = Vec::new();
    let mut atm = None;
    let mut kg = None;
    let mut check = None;
    let mut coin_register = None;
    match b.variant {
        StreamVariant::Weak => {}
        StreamVariant::Alternating => {
            extras.extend([CHOICE_QUERY, "b0", "b1"]);
            let mut coin = RegisterSpec::new("coin", 2);
            let h = half();
            let prepare = coin.push(
                "U",
                AffineOperator::new(vec![vec![h.clone(), h.clone()], vec![h.clone(), h.clone()]]).expect("U"),
            );
            let params = b.restart.clone().unwrap_or_else(|| RestartParams::standard(b.epsilon));
            let mut restart = RegisterSpec::new("restart", 2);
            let halve = restart.push("H", ratio_operator(&params.ratio));
            let boost = restart.push("M_delta", ratio_operator(&params.delta));
            registers.push(coin);
            registers.push(restart);
            coin_register = Some(2);
            atm = Some(AtmOps {
                coin: 2,
                prepare,
                restart: 3,
                halve,
                boost,
            });
        }
        StreamVariant::Reduction => {
            extras.extend([TAG_QUERY, "0", "1"]);
            let (regs, ops, _) = kg_registers(b.epsilon, 2);
            registers.extend(regs);
            coin_register = Some(ops.coin);
            kg = Some(ops);
        }
    }
    if let Some(setup) = &b.continuation {
        let reg = continuation_register(setup.case, &setup.epsilon)?;
        let index = registers.len();
        check = Some(CheckOps {
            reg: index,
            dim: reg.dim,
            count: reg.find("count").expect("count"),
            end: reg.find("end").expect("end"),
            reset: reg.find("reset").expect("reset"),
        });
        registers.push(reg);
    }
    let comm = codec.alphabet(m, &extras);
    let name = match b.variant {
        StreamVariant::Weak if b.continuation.is_some() => format!("strong-tm:{}", m.spec.name),
        StreamVariant::Weak => format!("weak-tm:{}", m.spec.name),
        StreamVariant::Alternating => format!("atm:{}", m.spec.name),
        StreamVariant::Reduction => format!("reduction:{}", m.spec.name),
    };
    let g = |s: &str| comm.iter().position(|x| x == s).map(|i| i as GammaId).unwrap_or(GammaId::MAX);
    let empty_accepts = match b.variant {
        StreamVariant::Weak => m.run("", MACHINE_STEPS)? == Some(true),
        _ => false,
    };
    let planner = StreamPlanner {
        m,
        codec: codec.clone(),
        variant: b.variant,
        registers: registers.len(),
        bank,
        check,
        atm,
        kg,
        b0: g("b0"),
        b1: g("b1"),
        tag_zero: g("0"),
        tag_one: g("1"),
        empty_accepts,
    };
    let header = SpecHeader {
        name: name.clone(),
        mode: Mode::TwoWay,
        input_alphabet: m.spec.input_alphabet.clone(),
        comm_alphabet: comm.clone(),
        registers,
    };
    let mut verifier = compile_planner(header, &planner, STATE_CAP)?;
    // Point the two extra query kinds at their symbols.
    for st in &mut verifier.states {
        if let crate::machine::StateRole::Communicating { writes, .. } = &mut st.role {
            if *writes == CHOICE_GAMMA_PLACEHOLDER {
                *writes = g(CHOICE_QUERY);
            } else if *writes == TAG_GAMMA_PLACEHOLDER {
                *writes = g(TAG_QUERY);
            }
        }
    }
    Ok(ProtocolBundle {
        name,
        verifier,
        epsilon: b.epsilon.clone(),
        round_structured: b.variant != StreamVariant::Weak,
        kind: Kind::Stream(Box::new(StreamInfo {
            machine: m.clone(),
            codec,
            variant: b.variant,
            continuation: b.continuation,
            coin_register,
        })),
    })
}

pub fn build_weak_tm(machine: &TuringMachineSpec, epsilon: &Rational) -> Result<ProtocolBundle, ProtocolError> {
    check_epsilon(epsilon)?;
    if machine.flavor != Flavor::Deterministic {
        return Err(ProtocolError::Flavor("deterministic"));
    }
    let m = TuringMachine::new(machine.clone())?;
    build_stream(Build {
        m: &m,
        variant: StreamVariant::Weak,
        epsilon,
        continuation: None,
        restart: None,
    })
}

/// Adds the continuation register to a weak machine bundle. `epsilon` is the error
/// budget of the check (in `(0, 1/2]`); the completeness inequality is certified for
/// the input lengths in [`CERTIFIED_LENGTHS`].
pub fn with_continuation_check(
    bundle: &ProtocolBundle,
    case: ContinuationCase,
    epsilon: &Rational,
) -> Result<ProtocolBundle, ProtocolError> {
    let Kind::Stream(info) = &bundle.kind else {
        return Err(ProtocolError::Unsupported(bundle.name.clone()));
    };
    if info.variant != StreamVariant::Weak || info.continuation.is_some() {
        return Err(ProtocolError::Unsupported(bundle.name.clone()));
    }
    for n in CERTIFIED_LENGTHS {
        let r = continuation_report(case, epsilon, n)?;
        if !r.within_bound {
            return Err(ProtocolError::Budget(format!(
                "|w| = {n}: 1 - (1 - {})^{} = {} exceeds {}",
                format_rational(&r.p),
                r.checks,
                format_rational(&r.false_reject),
                format_rational(epsilon)
            )));
        }
    }
    build_stream(Build {
        m: &info.machine,
        variant: StreamVariant::Weak,
        epsilon: &bundle.epsilon,
        continuation: Some(ContinuationSetup {
            case,
            epsilon: epsilon.clone(),
        }),
        restart: None,
    })
}

pub fn build_atm(machine: &TuringMachineSpec, epsilon: &Rational) -> Result<ProtocolBundle, ProtocolError> {
    build_atm_with(machine, epsilon, RestartParams::standard(epsilon))
}

pub fn build_atm_with(
    machine: &TuringMachineSpec,
    epsilon: &Rational,
    restart: RestartParams,
) -> Result<ProtocolBundle, ProtocolError> {
    check_epsilon(epsilon)?;
    if machine.flavor != Flavor::Alternating {
        return Err(ProtocolError::Flavor("alternating"));
    }
    for r in [&restart.ratio, &restart.delta] {
        if *r <= Rational::zero() || *r > Rational::one() {
            return Err(ProtocolError::Input(format!("restart parameter {} outside (0, 1]", format_rational(r))));
        }
    }
    let m = TuringMachine::new(normalize_alternating(machine)?)?;
    build_stream(Build {
        m: &m,
        variant: StreamVariant::Alternating,
        epsilon,
        continuation: None,
        restart: Some(restart),
    })
}

pub fn build_reduction(machine: &TuringMachineSpec, epsilon: &Rational) -> Result<ProtocolBundle, ProtocolError> {
    check_epsilon(epsilon)?;
    if machine.flavor != Flavor::Deterministic {
        return Err(ProtocolError::Flavor("deterministic"));
    }
    if machine.reject.is_some() {
        return Err(ProtocolError::OutputConvention(
            "the accepting state must be the only halting state".into(),
        ));
    }
    let alphabet = kg_alphabet();
    if let Some(r) = machine.rules.iter().find(|r| r.output.is_some_and(|c| !alphabet.contains(&c))) {
        return Err(ProtocolError::OutputConvention(format!(
            "rule {} on {:?} outputs {:?}",
            r.state,
            r.read,
            r.output.unwrap()
        )));
    }
    let m = TuringMachine::new(machine.clone())?;
    build_stream(Build {
        m: &m,
        variant: StreamVariant::Reduction,
        epsilon,
        continuation: None,
        restart: None,
    })
}

/// How an alternating-machine prover resolves existential branches.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ChoiceRule {
    /// A branch from which the machine accepts, if any.
    Winning,
    /// Fixed choice per rendered configuration, 0 when absent.
    Table(BTreeMap<String, u8>),
}

/// Streams a computation of an alternating machine, following the verifier's coins on
/// universal steps and `rule` on existential ones.
#[derive(Debug, Clone)]
pub struct AtmProver {
    machine: TuringMachine,
    codec: StreamCodec,
    coin_register: usize,
    pub rule: ChoiceRule,
    /// Replace symbol `position` of block `block` by `symbol`.
    pub tamper: Option<(usize, usize, GammaId)>,
    request: GammaId,
    choice: GammaId,
    b0: GammaId,
    b1: GammaId,
    start: TMConfiguration,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AtmMemory {
    pub config: TMConfiguration,
    pub block: usize,
    pub pos: usize,
    pub branch: Option<u8>,
    last_query: Option<GammaId>,
}

impl AtmProver {
    pub fn new(info: &StreamInfo, verifier: &VerifierSpec, word: &str, rule: ChoiceRule) -> Result<Self, ProtocolError> {
        let g = |s: &str| verifier.gamma(s).unwrap_or(GammaId::MAX);
        Ok(Self {
            machine: info.machine.clone(),
            codec: info.codec.clone(),
            coin_register: info.coin_register.unwrap_or(usize::MAX),
            rule,
            tamper: None,
            request: g(REQUEST),
            choice: g(CHOICE_QUERY),
            b0: g("b0"),
            b1: g("b1"),
            start: info.machine.initial_config(word)?,
        })
    }

    pub fn honest(info: &StreamInfo, verifier: &VerifierSpec, word: &str) -> Result<Self, ProtocolError> {
        Self::new(info, verifier, word, ChoiceRule::Winning)
    }

    fn choose(&self, c: &TMConfiguration) -> u8 {
        match &self.rule {
            ChoiceRule::Winning => match self.machine.next_config(c) {
                Ok(Next::Branches(bs)) => bs
                    .iter()
                    .position(|b| self.machine.alternating_accepts(b, MACHINE_STEPS))
                    .unwrap_or(0) as u8,
                _ => 0,
            },
            ChoiceRule::Table(t) => t.get(&self.machine.render(c)).copied().unwrap_or(0),
        }
    }

    /// Existential configurations reachable from the start under any coins and choices.
    pub fn existential_configs(&self) -> Vec<String> {
        let m = &self.machine;
        let mut out = Vec::new();
        let mut stack = vec![self.start.clone()];
        let mut seen = std::collections::HashSet::new();
        while let Some(c) = stack.pop() {
            if !seen.insert(c.clone()) {
                continue;
            }
            let q = c.state().expect("valid configuration");
            match m.next_config(&c) {
                Ok(Next::Single(n)) => stack.push(n),
                Ok(Next::Branches(bs)) => {
                    if m.label(q) == Some(Quantifier::Existential) {
                        out.push(m.render(&c));
                    }
                    stack.extend(bs);
                }
                Err(_) => {}
            }
        }
        out.sort();
        out
    }
}

impl ProverStrategy for AtmProver {
    type Memory = AtmMemory;

    fn initial_memory(&self) -> AtmMemory {
        AtmMemory {
            config: self.start.clone(),
            block: 0,
            pos: 0,
            branch: None,
            last_query: None,
        }
    }

    fn observe(&self, memory: &mut AtmMemory, event: &TranscriptEvent) {
        match event {
            TranscriptEvent::Moved { outcomes, .. } => {
                if let Some(&t) = outcomes.get(self.coin_register) {
                    if t != 0 {
                        memory.branch = Some(t as u8 - 1);
                    }
                }
            }
            TranscriptEvent::Query(g) => memory.last_query = Some(*g),
            TranscriptEvent::Reply(r) => {
                if memory.last_query == Some(self.choice) {
                    memory.branch = Some(u8::from(*r == self.b1));
                } else if memory.last_query == Some(self.request) {
                    memory.pos += 1;
                    if memory.pos > memory.config.len() {
                        let next = match self.machine.next_config(&memory.config) {
                            Ok(Next::Single(n)) => n,
                            Ok(Next::Branches(mut bs)) => bs.swap_remove(memory.branch.unwrap_or(0).min(1) as usize),
                            Err(_) => memory.config.clone(),
                        };
                        memory.config = next;
                        memory.block += 1;
                        memory.pos = 0;
                        memory.branch = None;
                    }
                }
            }
        }
    }

    fn reply(&self, memory: &AtmMemory, query: GammaId) -> GammaId {
        if query == self.choice {
            return if self.choose(&memory.config) == 1 { self.b1 } else { self.b0 };
        }
        if let Some((b, p, g)) = self.tamper {
            if b == memory.block && p == memory.pos {
                return g;
            }
        }
        match memory.config.symbols.get(memory.pos) {
            Some(&s) => self.codec.gamma(s),
            None => self.codec.hash(),
        }
    }
}

/// Honest prover of the reduction pipeline: the machine's computation, and winning
/// answers to the game's tag queries on its output.
#[derive(Debug, Clone)]
pub struct ReductionProver {
    pub stream: Vec<GammaId>,
    pub instance: Option<KgInstance>,
    /// Replace stream symbol `index` by `symbol`.
    pub tamper: Option<(usize, GammaId)>,
    coin_register: usize,
    request: GammaId,
    tag: GammaId,
    zero: GammaId,
    one: GammaId,
    hash: GammaId,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct ReductionMemory {
    pub sent: usize,
    pub coins: Vec<u8>,
    pub tags: Vec<u8>,
    last_query: Option<GammaId>,
}

impl ReductionProver {
    pub fn honest(info: &StreamInfo, verifier: &VerifierSpec, word: &str) -> Result<Self, ProtocolError> {
        let s = info.machine.honest_stream(word, MACHINE_STEPS)?;
        let g = |x: &str| verifier.gamma(x).unwrap_or(GammaId::MAX);
        Ok(Self {
            stream: info.codec.encode_stream(&s.configs),
            instance: KgInstance::parse(&s.output()).ok(),
            tamper: None,
            coin_register: info.coin_register.unwrap_or(usize::MAX),
            request: g(REQUEST),
            tag: g(TAG_QUERY),
            zero: g("0"),
            one: g("1"),
            hash: info.codec.hash(),
        })
    }

    pub fn with_tamper(&self, index: usize, symbol: GammaId) -> Self {
        Self {
            tamper: Some((index, symbol)),
            ..self.clone()
        }
    }
}

impl ProverStrategy for ReductionProver {
    type Memory = ReductionMemory;

    fn initial_memory(&self) -> ReductionMemory {
        ReductionMemory::default()
    }

    fn observe(&self, memory: &mut ReductionMemory, event: &TranscriptEvent) {
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
                    memory.tags.push(u8::from(*r == self.one));
                } else if memory.last_query == Some(self.request) {
                    memory.sent += 1;
                }
            }
        }
    }

    fn reply(&self, memory: &ReductionMemory, query: GammaId) -> GammaId {
        if query == self.tag {
            let pick = match &self.instance {
                Some(k) if memory.coins.len() > memory.tags.len() => k.winning_choice(&memory.coins, &memory.tags),
                _ => None,
            };
            return if pick == Some(1) { self.one } else { self.zero };
        }
        if let Some((i, g)) = self.tamper {
            if i == memory.sent {
                return g;
            }
        }
        self.stream.get(memory.sent).copied().unwrap_or(self.hash)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{evaluate_exact, EngineConfig};
    use crate::machine::validate;
    use crate::rational::{int, rat};
    use crate::tm::{toy_atm, toy_reduction, zero_n_one_n};

    #[test]
    fn weak_machine_examples() {
        let cfg = EngineConfig::default();
        let b = build_weak_tm(&zero_n_one_n(), &rat(1, 3)).unwrap();
        assert!(validate(&b.verifier).is_empty(), "{:?}", validate(&b.verifier));
        assert_eq!(b.evaluate_honest("01", &cfg).unwrap().p_accept, int(1));
        assert_eq!(b.evaluate_honest("", &cfg).unwrap().p_accept, int(1));
        let r = b.evaluate_honest("0", &cfg).unwrap();
        assert_eq!(r.p_accept, int(0));
        assert_eq!(r.halted_with_prefix("reject:Halt"), int(1));
        assert!(build_weak_tm(&toy_atm(), &rat(1, 3)).is_err());
    }

    #[test]
    fn tampered_block_passes_with_one_third() {
        let cfg = EngineConfig::default();
        let b = build_weak_tm(&zero_n_one_n(), &rat(1, 3)).unwrap();
        let Kind::Stream(info) = &b.kind else { panic!() };
        let s = info.machine.honest_stream("01", 100).unwrap();
        let codec = &info.codec;
        let mut symbols = codec.encode_config(&s.configs[0]);
        symbols.push(codec.hash());
        let mut c1 = codec.encode_config(&s.configs[1]);
        let last = c1.len() - 1;
        c1[last] = codec.gamma(ConfigSymbol::Tape(info.machine.left));
        symbols.extend(c1);
        symbols.push(codec.hash());
        let p = SequenceProver { symbols, tail: codec.hash() };
        let r = evaluate_exact(&b.verifier, &b.tape("01").unwrap(), &p, &cfg).unwrap();
        assert_eq!(Rational::one() - r.halted_with_prefix("reject:Compare"), rat(1, 3));
    }

    #[test]
    fn withheld_separator_never_resolves() {
        let b = build_weak_tm(&zero_n_one_n(), &rat(1, 3)).unwrap();
        let Kind::Stream(info) = &b.kind else { panic!() };
        let s = info.machine.honest_stream("01", 100).unwrap();
        let mut symbols = info.codec.encode_config(&s.configs[0]);
        symbols.push(info.codec.hash());
        symbols.push(info.codec.gamma(ConfigSymbol::State(info.machine.initial)));
        let p = SequenceProver {
            symbols,
            tail: info.codec.gamma(ConfigSymbol::Tape(info.machine.left)),
        };
        let cfg = EngineConfig { horizon: 500, node_cap: 100_000 };
        let r = evaluate_exact(&b.verifier, &b.tape("01").unwrap(), &p, &cfg).unwrap();
        assert_eq!(r.p_accept, int(0));
        assert_eq!(r.p_unresolved, int(1));
    }

    #[test]
    fn continuation_examples() {
        let r = continuation_report(ContinuationCase::Exponential { k: 1, c: 1 }, &rat(1, 2), 3).unwrap();
        assert_eq!(r.p, rat(1, 16));
        assert!(r.within_bound);
        let r = continuation_report(ContinuationCase::Polynomial { k: 2, c: 1 }, &rat(1, 3), 4).unwrap();
        assert_eq!(r.p, rat(1, 13));
        assert!(r.p <= r.closed_form);
        assert!(continuation_report(ContinuationCase::Exponential { k: 1, c: 1 }, &rat(1, 3), 0).is_err());
        let weak = build_weak_tm(&zero_n_one_n(), &rat(1, 3)).unwrap();
        assert!(matches!(
            with_continuation_check(&weak, ContinuationCase::Polynomial { k: 1, c: 1 }, &rat(1, 3)),
            Err(ProtocolError::Budget(_))
        ));
        let strong = with_continuation_check(&weak, ContinuationCase::Exponential { k: 1, c: 1 }, &rat(1, 3)).unwrap();
        assert!(validate(&strong.verifier).is_empty(), "{:?}", validate(&strong.verifier).iter().take(5).collect::<Vec<_>>());
        let cfg = EngineConfig::default();
        let r = strong.evaluate_honest("01", &cfg).unwrap();
        // The honest stream is far longer than the certified budget on this machine.
        assert!(r.p_accept > int(0));
        assert_eq!(&r.p_accept + r.halted_with_prefix("reject:Continuation"), int(1));
        assert_eq!(strong.evaluate_honest("", &cfg).unwrap().p_accept, int(1));
        assert_eq!(strong.evaluate_honest("0", &cfg).unwrap().p_accept, int(0));
    }

    #[test]
    fn alternating_examples() {
        let cfg = EngineConfig::default();
        let b = build_atm(&toy_atm(), &rat(1, 3)).unwrap();
        assert!(validate(&b.verifier).is_empty());
        assert!(b.is_member("0").unwrap());
        assert!(!b.is_member("1").unwrap());
        let (r, close) = b.honest_overall("0", &cfg).unwrap();
        assert_eq!(r.p_reject, int(0));
        assert_eq!(close.unwrap().overall_accept, int(1));
        assert!(build_atm(&zero_n_one_n(), &rat(1, 3)).is_err());
    }

    #[test]
    fn reduction_examples() {
        let cfg = EngineConfig::default();
        let b = build_reduction(&toy_reduction(), &rat(1, 3)).unwrap();
        assert!(validate(&b.verifier).is_empty());
        assert!(b.is_member("10").unwrap());
        assert!(!b.is_member("11").unwrap());
        let (r, close) = b.honest_overall("10", &cfg).unwrap();
        assert_eq!(r.p_reject, int(0));
        assert_eq!(close.unwrap().overall_accept, int(1));
        let (_, close) = b.honest_overall("11", &cfg).unwrap();
        assert!(close.unwrap().overall_accept <= rat(1, 3));
    }
}
