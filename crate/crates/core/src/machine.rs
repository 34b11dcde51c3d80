//! Verifier automata: one-way ADfA and two-way 2ADfA with communication states.
//!
//! A step runs the affine part (one action per register: apply an operator from the
//! register's bank or weight it) and then the classical part, which picks the next state
//! and head move from the outcome vector. Communicating states emit a symbol, take the
//! prover's reply and change state without touching the tape or the registers.

use std::collections::HashMap;
use std::hash::Hash;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::affine::{AffineError, AffineOperator, AffineState};
use crate::rational::Rational;

pub type StateId = u32;
pub type GammaId = u16;

/// Tape symbol indices: 0 is the left end-marker, 1 the right end-marker, then the input
/// alphabet in declaration order.
pub const LEFT_END: u16 = 0;
pub const RIGHT_END: u16 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MachineError {
    #[error("state {0} expects a prover reply")]
    MissingReply(String),
    #[error("reply {reply} is outside the communication alphabet of size {size}")]
    InvalidReplySymbol { reply: GammaId, size: usize },
    #[error("state {0} does not communicate but a reply was supplied")]
    UnexpectedReply(String),
    #[error("configuration is halted in state {0}")]
    Halted(String),
    #[error("no transition for state {state} on symbol {symbol}")]
    MissingTransition { state: String, symbol: String },
    #[error("head left the tape (position {0})")]
    HeadOutOfRange(i64),
    #[error("symbol {0:?} is not in the input alphabet")]
    Alphabet(char),
    #[error("final weighting requested in two-way mode")]
    Mode,
    #[error("configuration is waiting for its final weighting")]
    AwaitingFinal,
    #[error("operator index {op} missing from register {register}")]
    MissingOperator { register: usize, op: u16 },
    #[error("controller produced more than {0} states")]
    StateCap(usize),
    #[error("controller returned {got} actions, expected {expected}")]
    ActionCount { got: usize, expected: usize },
    #[error(transparent)]
    Affine(#[from] AffineError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    OneWay,
    TwoWay,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NamedOperator {
    pub name: String,
    pub matrix: AffineOperator,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegisterSpec {
    pub name: String,
    pub dim: usize,
    pub operators: Vec<NamedOperator>,
    /// Accepting outcomes for the one-way final weighting (0-based basis indices).
    #[serde(default)]
    pub accepting: Vec<usize>,
}

impl RegisterSpec {
    /// New register whose bank starts with the identity at index 0.
    pub fn new(name: &str, dim: usize) -> Self {
        Self {
            name: name.to_string(),
            dim,
            operators: vec![NamedOperator {
                name: "I".into(),
                matrix: AffineOperator::identity(dim),
            }],
            accepting: Vec::new(),
        }
    }

    /// Adds an operator and returns its index.
    pub fn push(&mut self, name: &str, matrix: AffineOperator) -> u16 {
        self.operators.push(NamedOperator {
            name: name.to_string(),
            matrix,
        });
        (self.operators.len() - 1) as u16
    }

    pub fn find(&self, name: &str) -> Option<u16> {
        self.operators
            .iter()
            .position(|o| o.name == name)
            .map(|i| i as u16)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum StateRole {
    Normal,
    /// Writes `writes`, then moves to `on_reply[reply]`.
    Communicating { writes: GammaId, on_reply: Vec<StateId> },
    /// Halts and accepts (two-way). In one-way mode this marks S_a: the run continues
    /// and the final weighting happens if the state is reached on the right end-marker.
    Accept,
    Reject,
    Restart,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateSpec {
    pub name: String,
    pub role: StateRole,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Action {
    Apply(u16),
    Weight,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Target {
    pub state: StateId,
    #[serde(rename = "move")]
    pub head_move: i8,
}

/// `targets` is indexed by the outcomes of the weighted registers, read as a mixed-radix
/// number over those registers in order (outcome `tau` contributes digit `tau - 1`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transition {
    pub actions: Vec<Action>,
    pub targets: Vec<Target>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifierSpec {
    pub name: String,
    pub mode: Mode,
    pub input_alphabet: Vec<char>,
    pub comm_alphabet: Vec<String>,
    pub registers: Vec<RegisterSpec>,
    pub states: Vec<StateSpec>,
    pub initial: StateId,
    /// `transitions[state][symbol]`; `None` for halting and communicating states.
    pub transitions: Vec<Vec<Option<Transition>>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Tape {
    pub cells: Vec<u16>,
}

impl Tape {
    pub fn input_len(&self) -> usize {
        self.cells.len() - 2
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MachineConfiguration {
    pub state: StateId,
    pub head: u32,
    pub registers: Vec<AffineState>,
    pub steps: u64,
    /// One-way only: the right end-marker was consumed in S_a.
    pub awaiting_final: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Accept,
    Reject,
    Restart,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Node {
    Running(MachineConfiguration),
    Halted { verdict: Verdict, state: StateId, steps: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Branch {
    pub probability: Rational,
    /// `tau_i` per register, 0 when the register was not weighted.
    pub outcomes: Vec<u32>,
    pub head_move: i8,
    pub node: Node,
}

impl VerifierSpec {
    pub fn symbol_count(&self) -> usize {
        self.input_alphabet.len() + 2
    }

    pub fn symbol_name(&self, symbol: u16) -> String {
        match symbol {
            LEFT_END => "¢".into(),
            RIGHT_END => "$".into(),
            s => self.input_alphabet[(s - 2) as usize].to_string(),
        }
    }

    pub fn state_name(&self, s: StateId) -> &str {
        &self.states[s as usize].name
    }

    pub fn role(&self, s: StateId) -> &StateRole {
        &self.states[s as usize].role
    }

    pub fn find_state(&self, name: &str) -> Option<StateId> {
        self.states
            .iter()
            .position(|s| s.name == name)
            .map(|i| i as StateId)
    }

    pub fn gamma(&self, symbol: &str) -> Option<GammaId> {
        self.comm_alphabet
            .iter()
            .position(|g| g == symbol)
            .map(|i| i as GammaId)
    }

    pub fn tape(&self, word: &[char]) -> Result<Tape, MachineError> {
        let mut cells = Vec::with_capacity(word.len() + 2);
        cells.push(LEFT_END);
        for &c in word {
            let i = self
                .input_alphabet
                .iter()
                .position(|&a| a == c)
                .ok_or(MachineError::Alphabet(c))?;
            cells.push(i as u16 + 2);
        }
        cells.push(RIGHT_END);
        Ok(Tape { cells })
    }

    pub fn tape_str(&self, word: &str) -> Result<Tape, MachineError> {
        self.tape(&word.chars().collect::<Vec<_>>())
    }

    pub fn initial_config(&self) -> MachineConfiguration {
        MachineConfiguration {
            state: self.initial,
            head: 0,
            registers: self
                .registers
                .iter()
                .map(|r| AffineState::basis(r.dim, 0))
                .collect(),
            steps: 0,
            awaiting_final: false,
        }
    }

    fn halting_verdict(&self, s: StateId) -> Option<Verdict> {
        if self.mode == Mode::OneWay {
            return None;
        }
        match self.role(s) {
            StateRole::Accept => Some(Verdict::Accept),
            StateRole::Reject => Some(Verdict::Reject),
            StateRole::Restart => Some(Verdict::Restart),
            _ => None,
        }
    }

    pub fn is_communicating(&self, s: StateId) -> Option<GammaId> {
        match self.role(s) {
            StateRole::Communicating { writes, .. } => Some(*writes),
            _ => None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// One verifier step. The result lists every successor with its exact probability;
/// zero-probability outcomes are dropped.
pub fn step(
    spec: &VerifierSpec,
    cfg: &MachineConfiguration,
    tape: &Tape,
    reply: Option<GammaId>,
) -> Result<Vec<Branch>, MachineError> {
    if cfg.awaiting_final {
        return Err(MachineError::AwaitingFinal);
    }
    let name = || spec.state_name(cfg.state).to_string();
    if let StateRole::Communicating { on_reply, .. } = spec.role(cfg.state) {
        let reply = reply.ok_or_else(|| MachineError::MissingReply(name()))?;
        if reply as usize >= spec.comm_alphabet.len() || reply as usize >= on_reply.len() {
            return Err(MachineError::InvalidReplySymbol {
                reply,
                size: spec.comm_alphabet.len(),
            });
        }
        let next = on_reply[reply as usize];
        let steps = cfg.steps + 1;
        let node = match spec.halting_verdict(next) {
            Some(verdict) => Node::Halted {
                verdict,
                state: next,
                steps,
            },
            None => Node::Running(MachineConfiguration {
                state: next,
                steps,
                ..cfg.clone()
            }),
        };
        return Ok(vec![Branch {
            probability: Rational::one(),
            outcomes: vec![0; spec.registers.len()],
            head_move: 0,
            node,
        }]);
    }
    if spec.halting_verdict(cfg.state).is_some() {
        return Err(MachineError::Halted(name()));
    }
    if reply.is_some() {
        return Err(MachineError::UnexpectedReply(name()));
    }
    let symbol = tape.cells[cfg.head as usize];
    let tr = spec.transitions[cfg.state as usize][symbol as usize]
        .as_ref()
        .ok_or_else(|| MachineError::MissingTransition {
            state: name(),
            symbol: spec.symbol_name(symbol),
        })?;
    if tr.actions.len() != spec.registers.len() {
        return Err(MachineError::ActionCount {
            got: tr.actions.len(),
            expected: spec.registers.len(),
        });
    }

    // Affine phase.
    let mut registers = Vec::with_capacity(spec.registers.len());
    let mut weighted: Vec<(usize, Vec<Rational>)> = Vec::new();
    for (i, (action, v)) in tr.actions.iter().zip(&cfg.registers).enumerate() {
        match action {
            Action::Apply(op) => {
                let bank = &spec.registers[i].operators;
                let o = bank
                    .get(*op as usize)
                    .ok_or(MachineError::MissingOperator { register: i, op: *op })?;
                if *op == 0 && o.matrix.is_identity() {
                    registers.push(v.clone());
                } else {
                    registers.push(o.matrix.apply(v)?);
                }
            }
            Action::Weight => {
                weighted.push((i, v.weight().probabilities));
                registers.push(v.clone());
            }
        }
    }

    // Classical phase, one branch per nonzero outcome combination.
    let mut branches = Vec::new();
    let mut combo = vec![0usize; weighted.len()];
    loop {
        let mut p = Rational::one();
        let mut index = 0usize;
        let mut outcomes = vec![0u32; spec.registers.len()];
        let mut regs = registers.clone();
        for (k, (reg, probs)) in weighted.iter().enumerate() {
            p *= &probs[combo[k]];
            index = index * probs.len() + combo[k];
            outcomes[*reg] = combo[k] as u32 + 1;
            regs[*reg] = AffineState::basis(probs.len(), combo[k]);
        }
        if !p.is_zero() {
            let target = tr.targets.get(index).ok_or_else(|| MachineError::MissingTransition {
                state: name(),
                symbol: format!("{} with outcomes {:?}", spec.symbol_name(symbol), outcomes),
            })?;
            branches.push(successor(spec, cfg, tape, symbol, *target, regs, outcomes, p)?);
        }
        // Advance the mixed-radix counter.
        let mut k = weighted.len();
        loop {
            if k == 0 {
                return Ok(branches);
            }
            k -= 1;
            combo[k] += 1;
            if combo[k] < weighted[k].1.len() {
                break;
            }
            combo[k] = 0;
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn successor(
    spec: &VerifierSpec,
    cfg: &MachineConfiguration,
    tape: &Tape,
    symbol: u16,
    target: Target,
    registers: Vec<AffineState>,
    outcomes: Vec<u32>,
    probability: Rational,
) -> Result<Branch, MachineError> {
    let steps = cfg.steps + 1;
    let head_move = if spec.mode == Mode::OneWay { 1 } else { target.head_move };
    let node = if spec.mode == Mode::OneWay && symbol == RIGHT_END {
        if matches!(spec.role(target.state), StateRole::Accept) {
            Node::Running(MachineConfiguration {
                state: target.state,
                head: cfg.head,
                registers,
                steps,
                awaiting_final: true,
            })
        } else {
            Node::Halted {
                verdict: Verdict::Reject,
                state: target.state,
                steps,
            }
        }
    } else {
        let head = cfg.head as i64 + head_move as i64;
        if head < 0 || head >= tape.len() as i64 {
            return Err(MachineError::HeadOutOfRange(head));
        }
        match spec.halting_verdict(target.state) {
            Some(verdict) => Node::Halted {
                verdict,
                state: target.state,
                steps,
            },
            None => Node::Running(MachineConfiguration {
                state: target.state,
                head: head as u32,
                registers,
                steps,
                awaiting_final: false,
            }),
        }
    };
    Ok(Branch {
        probability,
        outcomes,
        head_move,
        node,
    })
}

/// The single weighting of a one-way run: accept iff every register lands in its
/// accepting set.
pub fn final_weighting(
    spec: &VerifierSpec,
    cfg: &MachineConfiguration,
) -> Result<Vec<Branch>, MachineError> {
    if spec.mode != Mode::OneWay {
        return Err(MachineError::Mode);
    }
    let dists: Vec<Vec<Rational>> = cfg.registers.iter().map(|v| v.weight().probabilities).collect();
    let mut branches = Vec::new();
    let mut combo = vec![0usize; dists.len()];
    loop {
        let p: Rational = combo
            .iter()
            .zip(&dists)
            .map(|(&c, d)| d[c].clone())
            .product();
        if !p.is_zero() {
            let accept = combo
                .iter()
                .zip(&spec.registers)
                .all(|(&c, r)| r.accepting.contains(&c));
            branches.push(Branch {
                probability: p,
                outcomes: combo.iter().map(|&c| c as u32 + 1).collect(),
                head_move: 0,
                node: Node::Halted {
                    verdict: if accept { Verdict::Accept } else { Verdict::Reject },
                    state: cfg.state,
                    steps: cfg.steps + 1,
                },
            });
        }
        let mut k = dists.len();
        loop {
            if k == 0 {
                return Ok(branches);
            }
            k -= 1;
            combo[k] += 1;
            if combo[k] < dists[k].len() {
                break;
            }
            combo[k] = 0;
        }
    }
}

/// Checks structural invariants; an empty list means the verifier is well formed.
pub fn validate(spec: &VerifierSpec) -> Vec<String> {
    let mut out = Vec::new();
    let n_states = spec.states.len();
    let n_symbols = spec.symbol_count();
    if spec.initial as usize >= n_states {
        out.push(format!("initial state {} does not exist", spec.initial));
    }
    if spec.transitions.len() != n_states {
        out.push(format!(
            "transition table has {} rows for {} states",
            spec.transitions.len(),
            n_states
        ));
    }
    let mut names = HashMap::new();
    for (i, s) in spec.states.iter().enumerate() {
        if let Some(j) = names.insert(s.name.as_str(), i) {
            out.push(format!("states {j} and {i} share the name {:?}", s.name));
        }
    }
    for (ri, r) in spec.registers.iter().enumerate() {
        if r.dim == 0 {
            out.push(format!("register {ri} has dimension 0"));
        }
        for (oi, op) in r.operators.iter().enumerate() {
            if op.matrix.dim() != r.dim {
                out.push(format!(
                    "register {ri} operator {oi} ({}) has dimension {}, expected {}",
                    op.name,
                    op.matrix.dim(),
                    r.dim
                ));
            }
            for (c, sum) in op.matrix.column_sum_violations() {
                out.push(format!(
                    "register {ri} operator {oi} ({}) column {c} sums to {}",
                    op.name,
                    crate::rational::format_rational(&sum)
                ));
            }
        }
        for &a in &r.accepting {
            if a >= r.dim {
                out.push(format!("register {ri} accepting outcome {a} out of range"));
            }
        }
        if spec.mode == Mode::OneWay && r.accepting.is_empty() {
            out.push(format!("register {ri} has an empty accepting set"));
        }
    }
    let valid_state = |s: StateId| (s as usize) < n_states;
    for (si, s) in spec.states.iter().enumerate() {
        let row = spec.transitions.get(si);
        let needs_table = match &s.role {
            StateRole::Normal => true,
            StateRole::Accept => spec.mode == Mode::OneWay,
            StateRole::Reject | StateRole::Restart => {
                if spec.mode == Mode::OneWay {
                    out.push(format!(
                        "state {} has a halting role that one-way mode does not allow",
                        s.name
                    ));
                }
                false
            }
            StateRole::Communicating { writes, on_reply } => {
                if *writes as usize >= spec.comm_alphabet.len() {
                    out.push(format!("state {} writes an unknown symbol {writes}", s.name));
                }
                if on_reply.len() != spec.comm_alphabet.len() {
                    out.push(format!(
                        "state {} has {} reply targets for {} symbols",
                        s.name,
                        on_reply.len(),
                        spec.comm_alphabet.len()
                    ));
                }
                for &t in on_reply {
                    if !valid_state(t) {
                        out.push(format!("state {} replies into missing state {t}", s.name));
                    }
                }
                false
            }
        };
        let Some(row) = row else { continue };
        if !needs_table {
            if row.iter().any(|t| t.is_some()) {
                out.push(format!("state {} has transitions it never uses", s.name));
            }
            continue;
        }
        if row.len() != n_symbols {
            out.push(format!(
                "state {} has {} symbol entries, expected {n_symbols}",
                s.name,
                row.len()
            ));
            continue;
        }
        for (sym, tr) in row.iter().enumerate() {
            let at = || format!("state {} on {}", s.name, spec.symbol_name(sym as u16));
            let Some(tr) = tr else {
                out.push(format!("{}: missing transition", at()));
                continue;
            };
            if tr.actions.len() != spec.registers.len() {
                out.push(format!(
                    "{}: {} actions for {} registers",
                    at(),
                    tr.actions.len(),
                    spec.registers.len()
                ));
                continue;
            }
            let mut combos = 1usize;
            for (ri, a) in tr.actions.iter().enumerate() {
                match a {
                    Action::Apply(op) => {
                        if *op as usize >= spec.registers[ri].operators.len() {
                            out.push(format!("{}: register {ri} has no operator {op}", at()));
                        }
                    }
                    Action::Weight => {
                        if spec.mode == Mode::OneWay {
                            out.push(format!("{}: weighting before the end in one-way mode", at()));
                        }
                        combos = combos.saturating_mul(spec.registers[ri].dim);
                    }
                }
            }
            if tr.targets.len() != combos {
                out.push(format!(
                    "{}: {} targets for {combos} outcome combinations",
                    at(),
                    tr.targets.len()
                ));
            }
            for t in &tr.targets {
                if !valid_state(t.state) {
                    out.push(format!("{}: target state {} missing", at(), t.state));
                }
                match spec.mode {
                    Mode::OneWay => {
                        if t.head_move != 1 {
                            out.push(format!("{}: one-way head move {}", at(), t.head_move));
                        }
                    }
                    Mode::TwoWay => {
                        if !(-1..=1).contains(&t.head_move) {
                            out.push(format!("{}: head move {}", at(), t.head_move));
                        }
                        if sym as u16 == LEFT_END && t.head_move == -1 {
                            out.push(format!("{}: moves left of the left end-marker", at()));
                        }
                        if sym as u16 == RIGHT_END && t.head_move == 1 {
                            out.push(format!("{}: moves right of the right end-marker", at()));
                        }
                    }
                }
            }
        }
    }
    out
}

/// Symbol under the head as seen by a [`Controller`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TapeSymbol {
    LeftEnd,
    RightEnd,
    Input(char),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ControlRole {
    Normal,
    Query(GammaId),
    Accept,
    Reject,
    Restart,
}

/// Verifier logic written as code. [`compile`] explores the reachable controller states
/// and emits the equivalent explicit transition tables.
pub trait Controller {
    type State: Clone + Eq + Hash + std::fmt::Debug;

    fn initial(&self) -> Self::State;
    fn role(&self, s: &Self::State) -> ControlRole;
    fn on_reply(&self, s: &Self::State, reply: GammaId) -> Self::State;
    fn actions(&self, s: &Self::State, symbol: TapeSymbol) -> Vec<Action>;
    /// `outcomes[i]` is the weighting outcome of register `i` (0 if not weighted).
    fn next(&self, s: &Self::State, symbol: TapeSymbol, outcomes: &[u32]) -> (Self::State, i8);

    fn name(&self, s: &Self::State) -> String {
        format!("{s:?}")
    }
}

/// Everything of a spec except its states and tables.
#[derive(Debug, Clone)]
pub struct SpecHeader {
    pub name: String,
    pub mode: Mode,
    pub input_alphabet: Vec<char>,
    pub comm_alphabet: Vec<String>,
    pub registers: Vec<RegisterSpec>,
}

pub fn compile<C: Controller>(
    header: SpecHeader,
    ctl: &C,
    state_cap: usize,
) -> Result<VerifierSpec, MachineError> {
    let mut ids: HashMap<C::State, StateId> = HashMap::new();
    let mut order: Vec<C::State> = Vec::new();
    let intern = |s: C::State, ids: &mut HashMap<C::State, StateId>, order: &mut Vec<C::State>| {
        if let Some(&i) = ids.get(&s) {
            return Ok(i);
        }
        if order.len() >= state_cap {
            return Err(MachineError::StateCap(state_cap));
        }
        let id = order.len() as StateId;
        ids.insert(s.clone(), id);
        order.push(s);
        Ok(id)
    };
    let symbols: Vec<TapeSymbol> = [TapeSymbol::LeftEnd, TapeSymbol::RightEnd]
        .into_iter()
        .chain(header.input_alphabet.iter().map(|&c| TapeSymbol::Input(c)))
        .collect();
    let dims: Vec<usize> = header.registers.iter().map(|r| r.dim).collect();
    let initial = intern(ctl.initial(), &mut ids, &mut order)?;
    let mut states = Vec::new();
    let mut transitions = Vec::new();
    let mut cursor = 0usize;
    while cursor < order.len() {
        let s = order[cursor].clone();
        cursor += 1;
        let name = ctl.name(&s);
        match ctl.role(&s) {
            ControlRole::Query(g) => {
                let mut on_reply = Vec::with_capacity(header.comm_alphabet.len());
                for r in 0..header.comm_alphabet.len() {
                    on_reply.push(intern(ctl.on_reply(&s, r as GammaId), &mut ids, &mut order)?);
                }
                states.push(StateSpec {
                    name,
                    role: StateRole::Communicating { writes: g, on_reply },
                });
                transitions.push(vec![None; symbols.len()]);
            }
            role @ (ControlRole::Reject | ControlRole::Restart) => {
                states.push(StateSpec {
                    name,
                    role: if role == ControlRole::Reject {
                        StateRole::Reject
                    } else {
                        StateRole::Restart
                    },
                });
                transitions.push(vec![None; symbols.len()]);
            }
            ControlRole::Accept if header.mode == Mode::TwoWay => {
                states.push(StateSpec {
                    name,
                    role: StateRole::Accept,
                });
                transitions.push(vec![None; symbols.len()]);
            }
            role => {
                let mut row = Vec::with_capacity(symbols.len());
                for &sym in &symbols {
                    let actions = ctl.actions(&s, sym);
                    if actions.len() != dims.len() {
                        return Err(MachineError::ActionCount {
                            got: actions.len(),
                            expected: dims.len(),
                        });
                    }
                    let weighted: Vec<usize> = actions
                        .iter()
                        .enumerate()
                        .filter(|(_, a)| matches!(a, Action::Weight))
                        .map(|(i, _)| i)
                        .collect();
                    let combos: usize = weighted.iter().map(|&i| dims[i]).product();
                    let mut targets = Vec::with_capacity(combos);
                    for index in 0..combos {
                        let mut outcomes = vec![0u32; dims.len()];
                        let mut rest = index;
                        for &i in weighted.iter().rev() {
                            outcomes[i] = (rest % dims[i]) as u32 + 1;
                            rest /= dims[i];
                        }
                        let (next, mv) = ctl.next(&s, sym, &outcomes);
                        targets.push(Target {
                            state: intern(next, &mut ids, &mut order)?,
                            head_move: mv,
                        });
                    }
                    row.push(Some(Transition { actions, targets }));
                }
                states.push(StateSpec {
                    name,
                    role: if role == ControlRole::Accept {
                        StateRole::Accept
                    } else {
                        StateRole::Normal
                    },
                });
                transitions.push(row);
            }
        }
    }
    Ok(VerifierSpec {
        name: header.name,
        mode: header.mode,
        input_alphabet: header.input_alphabet,
        comm_alphabet: header.comm_alphabet,
        registers: header.registers,
        states,
        initial,
        transitions,
    })
}

/// `Apply(0)` (the identity) for every register.
pub fn keep_all(registers: usize) -> Vec<Action> {
    vec![Action::Apply(0); registers]
}
