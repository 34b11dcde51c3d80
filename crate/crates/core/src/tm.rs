//! Single-tape Turing machines over the region `¢ w $`, configuration strings `u q v`
//! and the successor function.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const LEFT_MARKER: char = '¢';
pub const RIGHT_MARKER: char = '$';

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TmError {
    #[error("symbol {0:?} is not in the input alphabet")]
    Alphabet(char),
    #[error("configuration is halted")]
    Halted,
    #[error("no transition from state {state} on {symbol:?}")]
    NoTransition { state: String, symbol: char },
    #[error("invalid machine: {0}")]
    Invalid(String),
    #[error("malformed configuration: {0}")]
    Malformed(String),
    #[error("expected a {0} machine")]
    Flavor(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Flavor {
    Deterministic,
    Alternating,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Quantifier {
    Existential,
    Universal,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TmRule {
    pub state: String,
    pub read: char,
    pub write: char,
    pub next: String,
    pub shift: i8,
    /// Symbol appended to the write-once output when this rule fires.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<char>,
}

/// Machine description as stored in files.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TuringMachineSpec {
    pub name: String,
    pub flavor: Flavor,
    pub states: Vec<String>,
    pub initial: String,
    pub accept: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reject: Option<String>,
    pub input_alphabet: Vec<char>,
    /// Full tape alphabet including both end-markers and the input alphabet.
    pub tape_alphabet: Vec<char>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub labels: BTreeMap<String, Quantifier>,
    pub rules: Vec<TmRule>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Rule {
    pub write: u16,
    pub next: u16,
    pub shift: i8,
    pub output: Option<char>,
}

/// A validated machine with indexed states and symbols.
#[derive(Debug, Clone)]
pub struct TuringMachine {
    pub spec: TuringMachineSpec,
    pub initial: u16,
    pub accept: u16,
    pub reject: Option<u16>,
    pub left: u16,
    pub right: u16,
    labels: Vec<Option<Quantifier>>,
    delta: HashMap<(u16, u16), Vec<Rule>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ConfigSymbol {
    Tape(u16),
    State(u16),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TMConfiguration {
    pub symbols: Vec<ConfigSymbol>,
}

impl TMConfiguration {
    pub fn state_position(&self) -> Option<usize> {
        self.symbols
            .iter()
            .position(|s| matches!(s, ConfigSymbol::State(_)))
    }

    pub fn state(&self) -> Option<u16> {
        self.state_position().map(|p| match self.symbols[p] {
            ConfigSymbol::State(q) => q,
            ConfigSymbol::Tape(_) => unreachable!(),
        })
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }
}

/// Successor of a configuration: one for deterministic steps, two ordered branches at a
/// branching state of an alternating machine.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Next {
    Single(TMConfiguration),
    Branches(Vec<TMConfiguration>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamEnd {
    Accept,
    Reject,
    /// No rule applies to the last configuration.
    Stuck,
    Truncated,
}

#[derive(Debug, Clone)]
pub struct Stream {
    pub configs: Vec<TMConfiguration>,
    /// Output symbol emitted by the step leaving each configuration (same length as
    /// `configs` minus one).
    pub outputs: Vec<Option<char>>,
    pub end: StreamEnd,
}

impl Stream {
    pub fn accepted(&self) -> bool {
        self.end == StreamEnd::Accept
    }

    pub fn output(&self) -> String {
        self.outputs.iter().flatten().collect()
    }
}

impl TuringMachine {
    pub fn new(spec: TuringMachineSpec) -> Result<Self, TmError> {
        let inv = |m: String| Err(TmError::Invalid(m));
        let state_ix: HashMap<&str, u16> = spec
            .states
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_str(), i as u16))
            .collect();
        if state_ix.len() != spec.states.len() {
            return inv("duplicate state names".into());
        }
        let sym_ix: HashMap<char, u16> = spec
            .tape_alphabet
            .iter()
            .enumerate()
            .map(|(i, &c)| (c, i as u16))
            .collect();
        if sym_ix.len() != spec.tape_alphabet.len() {
            return inv("duplicate tape symbols".into());
        }
        let (Some(&left), Some(&right)) = (sym_ix.get(&LEFT_MARKER), sym_ix.get(&RIGHT_MARKER)) else {
            return inv("tape alphabet must contain both end-markers".into());
        };
        for c in &spec.input_alphabet {
            if !sym_ix.contains_key(c) || *c == LEFT_MARKER || *c == RIGHT_MARKER {
                return inv(format!("input symbol {c:?} not a plain tape symbol"));
            }
        }
        let st = |name: &str| {
            state_ix
                .get(name)
                .copied()
                .ok_or_else(|| TmError::Invalid(format!("unknown state {name}")))
        };
        let initial = st(&spec.initial)?;
        let accept = st(&spec.accept)?;
        let reject = spec.reject.as_deref().map(st).transpose()?;
        if initial == accept || Some(initial) == reject {
            return inv("initial state must not halt".into());
        }
        let mut labels = vec![None; spec.states.len()];
        for (name, q) in &spec.labels {
            labels[st(name)? as usize] = Some(*q);
        }
        let mut delta: HashMap<(u16, u16), Vec<Rule>> = HashMap::new();
        for r in &spec.rules {
            let q = st(&r.state)?;
            let next = st(&r.next)?;
            let sym = |c: char| {
                sym_ix
                    .get(&c)
                    .copied()
                    .ok_or_else(|| TmError::Invalid(format!("unknown tape symbol {c:?}")))
            };
            let read = sym(r.read)?;
            let write = sym(r.write)?;
            if q == accept || Some(q) == reject {
                return inv(format!("rule leaves halting state {}", r.state));
            }
            if !(-1..=1).contains(&r.shift) {
                return inv(format!("shift {} out of range", r.shift));
            }
            if read == left && (write != left || r.shift != 1) {
                return inv(format!("state {} must keep ¢ and move right", r.state));
            }
            if read == right && (write != right || r.shift == 1) {
                return inv(format!("state {} must keep $ and not move right", r.state));
            }
            if read != left && read != right && (write == left || write == right) {
                return inv(format!("state {} writes an end-marker", r.state));
            }
            delta.entry((q, read)).or_default().push(Rule {
                write,
                next,
                shift: r.shift,
                output: r.output,
            });
        }
        for ((q, b), rules) in &delta {
            let name = &spec.states[*q as usize];
            let max = match spec.flavor {
                Flavor::Deterministic => 1,
                Flavor::Alternating => 2,
            };
            if rules.len() > max {
                return inv(format!(
                    "state {name} has {} rules on {:?}",
                    rules.len(),
                    spec.tape_alphabet[*b as usize]
                ));
            }
        }
        Ok(Self {
            spec,
            initial,
            accept,
            reject,
            left,
            right,
            labels,
            delta,
        })
    }

    pub fn state_count(&self) -> usize {
        self.spec.states.len()
    }

    pub fn symbol_count(&self) -> usize {
        self.spec.tape_alphabet.len()
    }

    pub fn state_name(&self, q: u16) -> &str {
        &self.spec.states[q as usize]
    }

    pub fn symbol(&self, s: u16) -> char {
        self.spec.tape_alphabet[s as usize]
    }

    pub fn symbol_index(&self, c: char) -> Option<u16> {
        self.spec
            .tape_alphabet
            .iter()
            .position(|&x| x == c)
            .map(|i| i as u16)
    }

    pub fn state_index(&self, name: &str) -> Option<u16> {
        self.spec
            .states
            .iter()
            .position(|x| x == name)
            .map(|i| i as u16)
    }

    pub fn is_halting(&self, q: u16) -> bool {
        q == self.accept || Some(q) == self.reject
    }

    pub fn label(&self, q: u16) -> Option<Quantifier> {
        self.labels[q as usize]
    }

    pub fn rules(&self, q: u16, b: u16) -> &[Rule] {
        self.delta.get(&(q, b)).map(|v| v.as_slice()).unwrap_or(&[])
    }

    pub fn initial_config(&self, w: &str) -> Result<TMConfiguration, TmError> {
        let mut symbols = vec![ConfigSymbol::State(self.initial), ConfigSymbol::Tape(self.left)];
        for c in w.chars() {
            if !self.spec.input_alphabet.contains(&c) {
                return Err(TmError::Alphabet(c));
            }
            symbols.push(ConfigSymbol::Tape(self.symbol_index(c).expect("validated")));
        }
        symbols.push(ConfigSymbol::Tape(self.right));
        Ok(TMConfiguration { symbols })
    }

    /// Applies one rule at the state symbol of `c`.
    pub fn apply_rule(&self, c: &TMConfiguration, rule: &Rule) -> Result<TMConfiguration, TmError> {
        let p = c
            .state_position()
            .ok_or_else(|| TmError::Malformed("no state symbol".into()))?;
        if p + 1 >= c.symbols.len() {
            return Err(TmError::Malformed("state symbol at the end".into()));
        }
        let mut s = c.symbols.clone();
        let x = ConfigSymbol::Tape(rule.write);
        let q = ConfigSymbol::State(rule.next);
        match rule.shift {
            0 => {
                s[p] = q;
                s[p + 1] = x;
            }
            1 => {
                s[p] = x;
                s[p + 1] = q;
            }
            _ => {
                if p == 0 {
                    return Err(TmError::Malformed("head moves left of the tape".into()));
                }
                // u' a q b v'' becomes u' q' a x v''.
                let a = s[p - 1];
                s[p - 1] = q;
                s[p] = a;
                s[p + 1] = x;
            }
        }
        Ok(TMConfiguration { symbols: s })
    }

    pub fn next_config(&self, c: &TMConfiguration) -> Result<Next, TmError> {
        let p = c
            .state_position()
            .ok_or_else(|| TmError::Malformed("no state symbol".into()))?;
        let q = c.state().expect("state found");
        if self.is_halting(q) {
            return Err(TmError::Halted);
        }
        let b = match c.symbols.get(p + 1) {
            Some(ConfigSymbol::Tape(b)) => *b,
            _ => return Err(TmError::Malformed("no scanned symbol".into())),
        };
        let rules = self.rules(q, b);
        match rules {
            [] => Err(TmError::NoTransition {
                state: self.state_name(q).into(),
                symbol: self.symbol(b),
            }),
            [r] if self.spec.flavor == Flavor::Deterministic || self.label(q).is_none() => {
                Ok(Next::Single(self.apply_rule(c, r)?))
            }
            rs => Ok(Next::Branches(
                rs.iter()
                    .map(|r| self.apply_rule(c, r))
                    .collect::<Result<_, _>>()?,
            )),
        }
    }

    /// The rule `next_config` would use, for deterministic steps.
    pub fn step_rule(&self, c: &TMConfiguration) -> Option<Rule> {
        let p = c.state_position()?;
        let q = c.state()?;
        match c.symbols.get(p + 1)? {
            ConfigSymbol::Tape(b) => self.rules(q, *b).first().copied(),
            ConfigSymbol::State(_) => None,
        }
    }

    /// `c_0, c_1, ...` up to the first halting configuration or `max_steps` steps.
    pub fn honest_stream(&self, w: &str, max_steps: usize) -> Result<Stream, TmError> {
        if self.spec.flavor != Flavor::Deterministic {
            return Err(TmError::Flavor("deterministic"));
        }
        let mut configs = vec![self.initial_config(w)?];
        let mut outputs = Vec::new();
        self.continue_stream(&mut configs, &mut outputs, max_steps)
            .map(|end| Stream { configs, outputs, end })
    }

    /// Extends a stream from its last configuration, deterministically.
    pub fn continue_stream(
        &self,
        configs: &mut Vec<TMConfiguration>,
        outputs: &mut Vec<Option<char>>,
        max_steps: usize,
    ) -> Result<StreamEnd, TmError> {
        for _ in 0..max_steps {
            let c = configs.last().expect("stream is nonempty");
            let q = c.state().ok_or_else(|| TmError::Malformed("no state".into()))?;
            if q == self.accept {
                return Ok(StreamEnd::Accept);
            }
            if Some(q) == self.reject {
                return Ok(StreamEnd::Reject);
            }
            let Some(rule) = self.step_rule(c) else {
                return Ok(StreamEnd::Stuck);
            };
            let n = self.apply_rule(c, &rule)?;
            outputs.push(rule.output);
            configs.push(n);
        }
        let q = configs.last().and_then(|c| c.state());
        Ok(match q {
            Some(q) if q == self.accept => StreamEnd::Accept,
            Some(q) if Some(q) == self.reject => StreamEnd::Reject,
            _ => StreamEnd::Truncated,
        })
    }

    /// Runs a deterministic machine; `None` if it does not halt within `max_steps`.
    pub fn run(&self, w: &str, max_steps: usize) -> Result<Option<bool>, TmError> {
        let s = self.honest_stream(w, max_steps)?;
        Ok(match s.end {
            StreamEnd::Accept => Some(true),
            StreamEnd::Reject | StreamEnd::Stuck => Some(false),
            StreamEnd::Truncated => None,
        })
    }

    /// Alternating acceptance: existential states need one accepting branch, universal
    /// states need all of them. Missing transitions and the depth bound count as reject.
    pub fn alternating_accepts(&self, c: &TMConfiguration, max_depth: usize) -> bool {
        let Some(q) = c.state() else { return false };
        if q == self.accept {
            return true;
        }
        if self.is_halting(q) || max_depth == 0 {
            return false;
        }
        match self.next_config(c) {
            Ok(Next::Single(n)) => self.alternating_accepts(&n, max_depth - 1),
            Ok(Next::Branches(bs)) => match self.label(q) {
                Some(Quantifier::Universal) => {
                    bs.iter().all(|b| self.alternating_accepts(b, max_depth - 1))
                }
                _ => bs.iter().any(|b| self.alternating_accepts(b, max_depth - 1)),
            },
            Err(_) => false,
        }
    }

    /// Leaves of the computation tree as (number of branching steps, accepted).
    pub fn computation_tree_leaves(&self, w: &str, max_depth: usize) -> Result<Vec<(usize, bool)>, TmError> {
        let mut leaves = Vec::new();
        let mut stack = vec![(self.initial_config(w)?, 0usize, 0usize)];
        while let Some((c, depth, branching)) = stack.pop() {
            let q = c.state().expect("valid configuration");
            if self.is_halting(q) || depth >= max_depth {
                leaves.push((branching, q == self.accept));
                continue;
            }
            match self.next_config(&c) {
                Ok(Next::Single(n)) => stack.push((n, depth + 1, branching)),
                Ok(Next::Branches(bs)) => {
                    for b in bs.into_iter().rev() {
                        stack.push((b, depth + 1, branching + 1));
                    }
                }
                Err(_) => leaves.push((branching, false)),
            }
        }
        Ok(leaves)
    }

    /// Renders with state names in brackets, e.g. `¢[q1]01$`.
    pub fn render(&self, c: &TMConfiguration) -> String {
        c.symbols
            .iter()
            .map(|s| match s {
                ConfigSymbol::Tape(t) => self.symbol(*t).to_string(),
                ConfigSymbol::State(q) => format!("[{}]", self.state_name(*q)),
            })
            .collect()
    }

    /// Inverse of [`render`](Self::render).
    pub fn parse_config(&self, text: &str) -> Result<TMConfiguration, TmError> {
        let mut symbols = Vec::new();
        let mut chars = text.chars();
        while let Some(c) = chars.next() {
            if c == '[' {
                let name: String = chars.by_ref().take_while(|&x| x != ']').collect();
                let q = self
                    .state_index(&name)
                    .ok_or_else(|| TmError::Malformed(format!("unknown state {name}")))?;
                symbols.push(ConfigSymbol::State(q));
            } else {
                let t = self
                    .symbol_index(c)
                    .ok_or_else(|| TmError::Malformed(format!("unknown symbol {c:?}")))?;
                symbols.push(ConfigSymbol::Tape(t));
            }
        }
        Ok(TMConfiguration { symbols })
    }
}

impl fmt::Display for TuringMachineSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} ({:?}, {} states, {} rules)",
            self.name,
            self.flavor,
            self.states.len(),
            self.rules.len()
        )
    }
}

/// Pads single-successor rules of labeled states to two identical branches and checks
/// that existential and universal states alternate.
pub fn normalize_alternating(spec: &TuringMachineSpec) -> Result<TuringMachineSpec, TmError> {
    if spec.flavor != Flavor::Alternating {
        return Err(TmError::Flavor("alternating"));
    }
    let mut out = spec.clone();
    let mut by_key: BTreeMap<(String, char), Vec<TmRule>> = BTreeMap::new();
    for r in &spec.rules {
        by_key.entry((r.state.clone(), r.read)).or_default().push(r.clone());
    }
    let halting = |s: &str| s == spec.accept || Some(s) == spec.reject.as_deref();
    out.rules.clear();
    for ((state, _), mut rules) in by_key {
        if let Some(label) = spec.labels.get(&state) {
            if rules.len() == 1 {
                rules.push(rules[0].clone());
            }
            for r in &rules {
                if halting(&r.next) {
                    continue;
                }
                match spec.labels.get(&r.next) {
                    Some(l) if l != label => {}
                    _ => {
                        return Err(TmError::Invalid(format!(
                            "{state} -> {} does not alternate",
                            r.next
                        )))
                    }
                }
            }
        }
        out.rules.extend(rules);
    }
    Ok(out)
}

fn rule(state: &str, read: char, write: char, next: &str, shift: i8) -> TmRule {
    TmRule {
        state: state.into(),
        read,
        write,
        next: next.into(),
        shift,
        output: None,
    }
}

fn names(xs: &[&str]) -> Vec<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

/// In-place recognizer of `0^n 1^n` (n >= 0): mark a 0 with X, the matching 1 with Y.
pub fn zero_n_one_n() -> TuringMachineSpec {
    let mut rules = vec![rule("q0", '¢', '¢', "q1", 1)];
    rules.extend([
        rule("q1", '0', 'X', "q2", 1),
        rule("q1", 'Y', 'Y', "q4", 1),
        rule("q1", '$', '$', "qa", 0),
        rule("q1", '1', '1', "qr", 0),
        rule("q2", '0', '0', "q2", 1),
        rule("q2", 'Y', 'Y', "q2", 1),
        rule("q2", '1', 'Y', "q3", -1),
        rule("q2", '$', '$', "qr", 0),
        rule("q3", '0', '0', "q3", -1),
        rule("q3", 'Y', 'Y', "q3", -1),
        rule("q3", 'X', 'X', "q1", 1),
        rule("q4", 'Y', 'Y', "q4", 1),
        rule("q4", '$', '$', "qa", 0),
        rule("q4", '0', '0', "qr", 0),
        rule("q4", '1', '1', "qr", 0),
    ]);
    TuringMachineSpec {
        name: "zero-n-one-n".into(),
        flavor: Flavor::Deterministic,
        states: names(&["q0", "q1", "q2", "q3", "q4", "qa", "qr"]),
        initial: "q0".into(),
        accept: "qa".into(),
        reject: Some("qr".into()),
        input_alphabet: vec!['0', '1'],
        tape_alphabet: vec!['¢', '$', '0', '1', 'X', 'Y'],
        labels: BTreeMap::new(),
        rules,
    }
}

/// In-place palindrome recognizer over {0,1}: cross off matching end symbols.
pub fn palindrome() -> TuringMachineSpec {
    let mut rules = vec![rule("p0", '¢', '¢', "p1", 1)];
    rules.extend([
        rule("p1", '0', 'X', "c0", 1),
        rule("p1", '1', 'X', "c1", 1),
        rule("p1", 'X', 'X', "pa", 0),
        rule("p1", '$', '$', "pa", 0),
    ]);
    for (c, k, keep, bad) in [("c0", "k0", '0', '1'), ("c1", "k1", '1', '0')] {
        rules.extend([
            rule(c, '0', '0', c, 1),
            rule(c, '1', '1', c, 1),
            rule(c, 'X', 'X', k, -1),
            rule(c, '$', '$', k, -1),
            rule(k, keep, 'X', "back", -1),
            rule(k, bad, bad, "pr", 0),
            rule(k, 'X', 'X', "pa", 0),
        ]);
    }
    rules.extend([
        rule("back", '0', '0', "back", -1),
        rule("back", '1', '1', "back", -1),
        rule("back", 'X', 'X', "p1", 1),
    ]);
    TuringMachineSpec {
        name: "palindrome".into(),
        flavor: Flavor::Deterministic,
        states: names(&["p0", "p1", "c0", "c1", "k0", "k1", "back", "pa", "pr"]),
        initial: "p0".into(),
        accept: "pa".into(),
        reject: Some("pr".into()),
        input_alphabet: vec!['0', '1'],
        tape_alphabet: vec!['¢', '$', '0', '1', 'X'],
        labels: BTreeMap::new(),
        rules,
    }
}

/// One universal step at ¢ into two existential states that each inspect the first
/// input symbol. Accepts exactly the words starting with 0.
pub fn toy_atm() -> TuringMachineSpec {
    let mut rules = vec![rule("a0", '¢', '¢', "e0", 1), rule("a0", '¢', '¢', "e1", 1)];
    // e0 can win only on a leading 0, e1 on any leading symbol.
    for (state, on0, on1) in [("e0", ["ya", "yr"], ["yr", "yr"]), ("e1", ["yr", "ya"], ["ya", "yr"])] {
        for n in on0 {
            rules.push(rule(state, '0', '0', n, 0));
        }
        for n in on1 {
            rules.push(rule(state, '1', '1', n, 0));
        }
        for _ in 0..2 {
            rules.push(rule(state, '$', '$', "yr", 0));
        }
    }
    let labels = BTreeMap::from([
        ("a0".to_string(), Quantifier::Universal),
        ("e0".to_string(), Quantifier::Existential),
        ("e1".to_string(), Quantifier::Existential),
    ]);
    TuringMachineSpec {
        name: "toy-atm".into(),
        flavor: Flavor::Alternating,
        states: names(&["a0", "e0", "e1", "ya", "yr"]),
        initial: "a0".into(),
        accept: "ya".into(),
        reject: Some("yr".into()),
        input_alphabet: vec!['0', '1'],
        tape_alphabet: vec!['¢', '$', '0', '1'],
        labels,
        rules,
    }
}

/// Suffix the toy reduction appends after copying its input.
pub const TOY_REDUCTION_SUFFIX: &str = "A(1,10)E(1,0)";

/// Linear-space reduction: copies `w` to the output as the knapsack target, then emits
/// one quantifier pair, giving a member instance exactly when `w` has binary value 2.
pub fn toy_reduction() -> TuringMachineSpec {
    let suffix: Vec<char> = TOY_REDUCTION_SUFFIX.chars().collect();
    let mut states = names(&["r0", "r1"]);
    let mut rules = vec![rule("r0", '¢', '¢', "r1", 1)];
    for d in ['0', '1'] {
        rules.push(TmRule {
            output: Some(d),
            ..rule("r1", d, d, "r1", 1)
        });
    }
    rules.push(rule("r1", '$', '$', "s0", 0));
    for (i, &c) in suffix.iter().enumerate() {
        let here = format!("s{i}");
        let next = if i + 1 == suffix.len() {
            "done".to_string()
        } else {
            format!("s{}", i + 1)
        };
        states.push(here.clone());
        rules.push(TmRule {
            output: Some(c),
            ..rule(&here, '$', '$', &next, 0)
        });
    }
    states.push("done".into());
    TuringMachineSpec {
        name: "toy-reduction".into(),
        flavor: Flavor::Deterministic,
        states,
        initial: "r0".into(),
        accept: "done".into(),
        reject: None,
        input_alphabet: vec!['0', '1'],
        tape_alphabet: vec!['¢', '$', '0', '1'],
        labels: BTreeMap::new(),
        rules,
    }
}

pub fn sample_machines() -> BTreeMap<&'static str, TuringMachineSpec> {
    BTreeMap::from([
        ("zero-n-one-n", zero_n_one_n()),
        ("palindrome", palindrome()),
        ("toy-atm", toy_atm()),
        ("toy-reduction", toy_reduction()),
    ])
}
