//! Evaluating prover/verifier games.
//!
//! The verifier's coins are public: after every step the prover learns the new state,
//! the head move and all weighting outcomes. A deterministic prover that picks, at each
//! reply node, the reply maximizing the objective of the remaining game is therefore
//! optimal against every other strategy, randomized or not. [`evaluate_worst_case`]
//! computes that expectimax value exactly.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Debug;
use std::hash::Hash;

use num_bigint::{BigInt, BigUint, RandBigInt};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::machine::{
    final_weighting, step, Branch, GammaId, MachineConfiguration, MachineError, Node, StateId,
    Tape, Verdict, VerifierSpec,
};
use crate::rational::{format_rational, int, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("explored {count} nodes, more than the cap of {cap}")]
    BranchExplosion { count: usize, cap: usize },
    #[error("prover replied {reply}, outside the communication alphabet of size {size}")]
    InvalidReply { reply: GammaId, size: usize },
    #[error("round never halts: accept and reject probabilities are both 0")]
    Divergence,
    #[error("round summary does not sum to 1")]
    RoundSum,
    #[error(transparent)]
    Machine(#[from] MachineError),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum TranscriptEvent {
    /// A verifier step: new state, head move, and `tau_i` per register (0 if not weighted).
    Moved {
        state: StateId,
        head_move: i8,
        outcomes: Vec<u32>,
    },
    Query(GammaId),
    Reply(GammaId),
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Transcript {
    pub events: Vec<TranscriptEvent>,
}

/// A deterministic prover. Its view of the interaction is the public transcript,
/// compressed into `Memory`; two runs with equal memory must get equal replies.
pub trait ProverStrategy {
    type Memory: Clone + Eq + Hash + Debug;

    fn initial_memory(&self) -> Self::Memory;
    fn observe(&self, memory: &mut Self::Memory, event: &TranscriptEvent);
    fn reply(&self, memory: &Self::Memory, query: GammaId) -> GammaId;
}

/// Prover given as a function of the full transcript.
pub struct FnProver<F>(pub F);

impl<F: Fn(&Transcript, GammaId) -> GammaId> ProverStrategy for FnProver<F> {
    type Memory = Transcript;

    fn initial_memory(&self) -> Transcript {
        Transcript::default()
    }

    fn observe(&self, memory: &mut Transcript, event: &TranscriptEvent) {
        memory.events.push(event.clone());
    }

    fn reply(&self, memory: &Transcript, query: GammaId) -> GammaId {
        (self.0)(memory, query)
    }
}

/// Prover that ignores the transcript and sends a fixed symbol sequence, then repeats
/// `tail` forever.
#[derive(Debug, Clone)]
pub struct SequenceProver {
    pub symbols: Vec<GammaId>,
    pub tail: GammaId,
}

impl ProverStrategy for SequenceProver {
    type Memory = usize;

    fn initial_memory(&self) -> usize {
        0
    }

    fn observe(&self, memory: &mut usize, event: &TranscriptEvent) {
        if matches!(event, TranscriptEvent::Reply(_)) {
            *memory += 1;
        }
    }

    fn reply(&self, memory: &usize, _query: GammaId) -> GammaId {
        self.symbols.get(*memory).copied().unwrap_or(self.tail)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EngineConfig {
    pub horizon: u64,
    pub node_cap: usize,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            horizon: 100_000,
            node_cap: 5_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EvalResult {
    #[serde(with = "crate::rational::serde_rational")]
    pub p_accept: Rational,
    #[serde(with = "crate::rational::serde_rational")]
    pub p_reject: Rational,
    #[serde(with = "crate::rational::serde_rational")]
    pub p_restart: Rational,
    #[serde(with = "crate::rational::serde_rational")]
    pub p_unresolved: Rational,
    /// Expected halting step, counting unresolved paths as halting at the horizon.
    #[serde(with = "crate::rational::serde_rational")]
    pub expected_steps_lower_bound: Rational,
    pub horizon: u64,
    pub nodes: usize,
    /// Halting mass per halting state name (exact evaluation only).
    #[serde(skip)]
    pub halted_by_state: BTreeMap<String, Rational>,
}

impl EvalResult {
    fn empty(horizon: u64) -> Self {
        Self {
            p_accept: Rational::zero(),
            p_reject: Rational::zero(),
            p_restart: Rational::zero(),
            p_unresolved: Rational::zero(),
            expected_steps_lower_bound: Rational::zero(),
            horizon,
            nodes: 0,
            halted_by_state: BTreeMap::new(),
        }
    }

    pub fn total(&self) -> Rational {
        &self.p_accept + &self.p_reject + &self.p_restart + &self.p_unresolved
    }

    /// Acceptance probability as an interval: unresolved paths may still accept.
    pub fn accept_interval(&self) -> (Rational, Rational) {
        (self.p_accept.clone(), &self.p_accept + &self.p_unresolved)
    }

    /// Halting mass of every state whose name starts with `prefix`.
    pub fn halted_with_prefix(&self, prefix: &str) -> Rational {
        self.halted_by_state
            .iter()
            .filter(|(k, _)| k.starts_with(prefix))
            .map(|(_, v)| v.clone())
            .sum()
    }

    pub fn round_summary(&self) -> RoundSummary {
        RoundSummary {
            p_accept: self.p_accept.clone(),
            p_reject: &self.p_reject + &self.p_unresolved,
            p_restart: self.p_restart.clone(),
        }
    }

    fn add_leaf(&mut self, verdict: Verdict, label: &str, p: &Rational, steps: u64) {
        match verdict {
            Verdict::Accept => self.p_accept += p,
            Verdict::Reject => self.p_reject += p,
            Verdict::Restart => self.p_restart += p,
        }
        self.expected_steps_lower_bound += p * int(steps as i64);
        *self
            .halted_by_state
            .entry(label.to_string())
            .or_insert_with(Rational::zero) += p;
    }
}

fn leaf_label(spec: &VerifierSpec, state: StateId, final_weight: bool) -> String {
    if final_weight {
        format!("{}:weighting", spec.state_name(state))
    } else {
        spec.state_name(state).to_string()
    }
}

/// Successors of a running configuration: the final weighting, a communication step
/// with `reply`, or an ordinary tape step.
fn expand(
    spec: &VerifierSpec,
    tape: &Tape,
    cfg: &MachineConfiguration,
    reply: Option<GammaId>,
) -> Result<Vec<Branch>, MachineError> {
    if cfg.awaiting_final {
        final_weighting(spec, cfg)
    } else {
        step(spec, cfg, tape, reply)
    }
}

fn check_reply(spec: &VerifierSpec, reply: GammaId) -> Result<(), EngineError> {
    if reply as usize >= spec.comm_alphabet.len() {
        return Err(EngineError::InvalidReply {
            reply,
            size: spec.comm_alphabet.len(),
        });
    }
    Ok(())
}

/// Exact outcome probabilities against `prover`, enumerating every coin outcome up to
/// `config.horizon` steps. Paths with equal configuration and equal prover memory are
/// merged.
pub fn evaluate_exact<P: ProverStrategy>(
    spec: &VerifierSpec,
    tape: &Tape,
    prover: &P,
    config: &EngineConfig,
) -> Result<EvalResult, EngineError> {
    let mut result = EvalResult::empty(config.horizon);
    let mut frontier: HashMap<(MachineConfiguration, P::Memory), Rational> = HashMap::new();
    frontier.insert((spec.initial_config(), prover.initial_memory()), Rational::one());
    for _ in 0..config.horizon {
        if frontier.is_empty() {
            break;
        }
        result.nodes += frontier.len();
        if result.nodes > config.node_cap {
            return Err(EngineError::BranchExplosion {
                count: result.nodes,
                cap: config.node_cap,
            });
        }
        let mut next: HashMap<(MachineConfiguration, P::Memory), Rational> = HashMap::new();
        for ((cfg, memory), p) in frontier {
            let mut memory = memory;
            let reply = match spec.is_communicating(cfg.state) {
                Some(query) if !cfg.awaiting_final => {
                    let r = prover.reply(&memory, query);
                    check_reply(spec, r)?;
                    prover.observe(&mut memory, &TranscriptEvent::Query(query));
                    prover.observe(&mut memory, &TranscriptEvent::Reply(r));
                    Some(r)
                }
                _ => None,
            };
            for b in expand(spec, tape, &cfg, reply)? {
                let q = &p * &b.probability;
                match b.node {
                    Node::Halted { verdict, state, steps } => {
                        let label = leaf_label(spec, state, cfg.awaiting_final);
                        result.add_leaf(verdict, &label, &q, steps);
                    }
                    Node::Running(c) => {
                        let mut m = memory.clone();
                        prover.observe(
                            &mut m,
                            &TranscriptEvent::Moved {
                                state: c.state,
                                head_move: b.head_move,
                                outcomes: b.outcomes,
                            },
                        );
                        *next.entry((c, m)).or_insert_with(Rational::zero) += q;
                    }
                }
            }
        }
        frontier = next;
    }
    for p in frontier.values() {
        result.p_unresolved += p;
        result.expected_steps_lower_bound += p * int(config.horizon as i64);
    }
    debug_assert!(result.total().is_one());
    Ok(result)
}

/// Linear objective over the four outcome masses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Objective {
    pub accept: Rational,
    pub reject: Rational,
    pub restart: Rational,
    pub unresolved: Rational,
}

impl Objective {
    pub fn accept() -> Self {
        Self {
            accept: Rational::one(),
            reject: Rational::zero(),
            restart: Rational::zero(),
            unresolved: Rational::zero(),
        }
    }

    /// Maximizing `-P(reject)`: the prover tries to avoid rejection.
    pub fn avoid_reject() -> Self {
        Self {
            accept: Rational::zero(),
            reject: -Rational::one(),
            restart: Rational::zero(),
            unresolved: Rational::zero(),
        }
    }

    fn value(&self, v: &Masses) -> Rational {
        &self.accept * &v.accept
            + &self.reject * &v.reject
            + &self.restart * &v.restart
            + &self.unresolved * &v.unresolved
    }
}

#[derive(Debug, Clone, Default)]
struct Masses {
    accept: Rational,
    reject: Rational,
    restart: Rational,
    unresolved: Rational,
    steps: Rational,
}

impl Masses {
    fn leaf(verdict: Verdict, steps: u64) -> Self {
        let mut m = Masses {
            steps: int(steps as i64),
            ..Default::default()
        };
        match verdict {
            Verdict::Accept => m.accept = Rational::one(),
            Verdict::Reject => m.reject = Rational::one(),
            Verdict::Restart => m.restart = Rational::one(),
        }
        m
    }

    fn add_scaled(&mut self, p: &Rational, other: &Masses) {
        self.accept += p * &other.accept;
        self.reject += p * &other.reject;
        self.restart += p * &other.restart;
        self.unresolved += p * &other.unresolved;
        self.steps += p * &other.steps;
    }
}

/// Expectimax result: the optimal value, the outcome masses it produces, and the reply
/// chosen at every reply node that the optimal play can reach.
#[derive(Debug, Clone)]
pub struct WorstCase {
    pub value: Rational,
    pub result: EvalResult,
    pub strategy: HashMap<MachineConfiguration, GammaId>,
}

struct Solver<'a> {
    spec: &'a VerifierSpec,
    tape: &'a Tape,
    objective: &'a Objective,
    config: &'a EngineConfig,
    memo: HashMap<MachineConfiguration, (Masses, Option<GammaId>)>,
}

impl Solver<'_> {
    fn solve(&mut self, cfg: &MachineConfiguration) -> Result<Masses, EngineError> {
        if cfg.steps >= self.config.horizon {
            return Ok(Masses {
                unresolved: Rational::one(),
                steps: int(self.config.horizon as i64),
                ..Default::default()
            });
        }
        if let Some((m, _)) = self.memo.get(cfg) {
            return Ok(m.clone());
        }
        if self.memo.len() >= self.config.node_cap {
            return Err(EngineError::BranchExplosion {
                count: self.memo.len() + 1,
                cap: self.config.node_cap,
            });
        }
        let (masses, choice) = match self.spec.is_communicating(cfg.state) {
            Some(_) if !cfg.awaiting_final => {
                let mut best: Option<(Rational, Masses, GammaId)> = None;
                for r in 0..self.spec.comm_alphabet.len() as GammaId {
                    let m = self.children(cfg, Some(r))?;
                    let v = self.objective.value(&m);
                    // Strictly greater keeps the earliest reply on ties.
                    if best.as_ref().is_none_or(|(bv, _, _)| v > *bv) {
                        best = Some((v, m, r));
                    }
                }
                let (_, m, r) = best.expect("nonempty communication alphabet");
                (m, Some(r))
            }
            _ => (self.children(cfg, None)?, None),
        };
        self.memo.insert(cfg.clone(), (masses.clone(), choice));
        Ok(masses)
    }

    fn children(
        &mut self,
        cfg: &MachineConfiguration,
        reply: Option<GammaId>,
    ) -> Result<Masses, EngineError> {
        let mut total = Masses::default();
        for b in expand(self.spec, self.tape, cfg, reply)? {
            let m = match &b.node {
                Node::Halted { verdict, steps, .. } => Masses::leaf(*verdict, *steps),
                Node::Running(c) => self.solve(c)?,
            };
            total.add_scaled(&b.probability, &m);
        }
        Ok(total)
    }
}

const SOLVER_STACK: usize = 1 << 30;

/// Optimal prover against `objective` by expectimax: expectation over weighting
/// outcomes, maximum over replies (ties go to the earliest symbol of the alphabet).
pub fn evaluate_worst_case(
    spec: &VerifierSpec,
    tape: &Tape,
    objective: &Objective,
    config: &EngineConfig,
) -> Result<WorstCase, EngineError> {
    std::thread::scope(|scope| {
        std::thread::Builder::new()
            .stack_size(SOLVER_STACK)
            .spawn_scoped(scope, || worst_case_inner(spec, tape, objective, config))
            .expect("spawn solver thread")
            .join()
            .expect("solver thread panicked")
    })
}

fn worst_case_inner(
    spec: &VerifierSpec,
    tape: &Tape,
    objective: &Objective,
    config: &EngineConfig,
) -> Result<WorstCase, EngineError> {
    let mut solver = Solver {
        spec,
        tape,
        objective,
        config,
        memo: HashMap::new(),
    };
    let root = spec.initial_config();
    let m = if config.horizon == 0 {
        Masses {
            unresolved: Rational::one(),
            ..Default::default()
        }
    } else {
        solver.solve(&root)?
    };
    let strategy = solver
        .memo
        .iter()
        .filter_map(|(c, (_, r))| r.map(|r| (c.clone(), r)))
        .collect();
    Ok(WorstCase {
        value: objective.value(&m),
        result: EvalResult {
            p_accept: m.accept,
            p_reject: m.reject,
            p_restart: m.restart,
            p_unresolved: m.unresolved,
            expected_steps_lower_bound: m.steps,
            horizon: config.horizon,
            nodes: solver.memo.len(),
            halted_by_state: BTreeMap::new(),
        },
        strategy,
    })
}

/// Replays an expectimax strategy as an ordinary prover by tracking the configuration.
pub struct OptimalProver<'a> {
    pub spec: &'a VerifierSpec,
    pub tape: &'a Tape,
    pub strategy: &'a HashMap<MachineConfiguration, GammaId>,
}

impl ProverStrategy for OptimalProver<'_> {
    /// Current configuration plus the reply just sent (consumed by the next move).
    type Memory = (Option<MachineConfiguration>, Option<GammaId>);

    fn initial_memory(&self) -> Self::Memory {
        (Some(self.spec.initial_config()), None)
    }

    fn observe(&self, memory: &mut Self::Memory, event: &TranscriptEvent) {
        match event {
            TranscriptEvent::Query(_) => {}
            TranscriptEvent::Reply(r) => memory.1 = Some(*r),
            TranscriptEvent::Moved { state, outcomes, .. } => {
                let next = memory.0.as_ref().and_then(|cfg| {
                    expand(self.spec, self.tape, cfg, memory.1.take())
                        .ok()?
                        .into_iter()
                        .find_map(|b| match b.node {
                            Node::Running(c) if c.state == *state && &b.outcomes == outcomes => {
                                Some(c)
                            }
                            _ => None,
                        })
                });
                *memory = (next, None);
            }
        }
    }

    fn reply(&self, memory: &Self::Memory, _query: GammaId) -> GammaId {
        memory
            .0
            .as_ref()
            .and_then(|c| self.strategy.get(c).copied())
            .unwrap_or(0)
    }
}

/// Per-round outcome masses of a restart-structured protocol.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RoundSummary {
    #[serde(with = "crate::rational::serde_rational")]
    pub p_accept: Rational,
    #[serde(with = "crate::rational::serde_rational")]
    pub p_reject: Rational,
    #[serde(with = "crate::rational::serde_rational")]
    pub p_restart: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RoundClosure {
    #[serde(with = "crate::rational::serde_rational")]
    pub overall_accept: Rational,
    #[serde(with = "crate::rational::serde_rational")]
    pub overall_reject: Rational,
    #[serde(with = "crate::rational::serde_rational")]
    pub expected_rounds: Rational,
}

/// Closes the geometric series of independent rounds.
pub fn round_fixpoint(r: &RoundSummary) -> Result<RoundClosure, EngineError> {
    if !(&r.p_accept + &r.p_reject + &r.p_restart).is_one() {
        return Err(EngineError::RoundSum);
    }
    let halting = &r.p_accept + &r.p_reject;
    if halting.is_zero() {
        return Err(EngineError::Divergence);
    }
    Ok(RoundClosure {
        overall_accept: &r.p_accept / &halting,
        overall_reject: &r.p_reject / &halting,
        expected_rounds: Rational::one() / (Rational::one() - &r.p_restart),
    })
}

#[derive(Debug, Clone)]
pub struct RoundWorstCase {
    /// Best overall acceptance `a / (1 - restart)` over all prover strategies.
    pub overall_accept: Rational,
    /// Per-round masses of the maximizing strategy.
    pub round: EvalResult,
    pub iterations: usize,
}

/// Worst-case overall acceptance of a restart-structured protocol. A stationary prover
/// is optimal, so this maximizes `a / (a + r + u)` over single-round strategies with
/// Dinkelbach iteration on the linear objective `a - lambda (a + r + u)`.
pub fn evaluate_worst_case_rounds(
    spec: &VerifierSpec,
    tape: &Tape,
    config: &EngineConfig,
) -> Result<RoundWorstCase, EngineError> {
    let mut lambda = Rational::zero();
    let mut iterations = 0;
    loop {
        iterations += 1;
        let objective = Objective {
            accept: Rational::one() - &lambda,
            reject: -lambda.clone(),
            restart: Rational::zero(),
            unresolved: -lambda.clone(),
        };
        let wc = evaluate_worst_case(spec, tape, &objective, config)?;
        let r = &wc.result;
        let denom = &r.p_accept + &r.p_reject + &r.p_unresolved;
        if denom.is_zero() {
            return Err(EngineError::Divergence);
        }
        if wc.value <= Rational::zero() {
            return Ok(RoundWorstCase {
                overall_accept: lambda,
                round: wc.result,
                iterations,
            });
        }
        lambda = &r.p_accept / denom;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrialOutcome {
    Accept,
    Reject,
    Unresolved,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonteCarloReport {
    pub trials: u64,
    pub accepts: u64,
    pub rejects: u64,
    pub unresolved: u64,
    pub restarts: u64,
    pub mean_steps: f64,
    pub variance_steps: f64,
    #[serde(skip)]
    pub outcomes: Vec<TrialOutcome>,
}

impl MonteCarloReport {
    pub fn accept_frequency(&self) -> f64 {
        self.accepts as f64 / self.trials as f64
    }
}

/// Draws an index from an exact rational distribution by inverting its CDF on a uniform
/// integer below the common denominator.
pub fn sample_index<R: Rng>(probabilities: &[&Rational], rng: &mut R) -> usize {
    if probabilities.len() == 1 {
        return 0;
    }
    let lcm = probabilities
        .iter()
        .fold(BigInt::one(), |acc, p| acc.lcm(p.denom()));
    let lcm_u = lcm.to_biguint().expect("denominators are positive");
    let u = match lcm_u.to_u64() {
        Some(n) => BigUint::from(rng.gen_range(0..n)),
        None => rng.gen_biguint_below(&lcm_u),
    };
    let u = BigInt::from(u);
    let mut acc = BigInt::zero();
    for (i, p) in probabilities.iter().enumerate() {
        acc += p.numer() * (&lcm / p.denom());
        if u < acc {
            return i;
        }
    }
    probabilities.len() - 1
}

struct Walker<'a, P: ProverStrategy> {
    spec: &'a VerifierSpec,
    tape: &'a Tape,
    prover: &'a P,
    cfg: MachineConfiguration,
    memory: P::Memory,
}

enum WalkStep {
    Running,
    Halted(Verdict, u64),
}

impl<P: ProverStrategy> Walker<'_, P> {
    fn restart(&mut self, steps: u64) {
        self.cfg = self.spec.initial_config();
        self.cfg.steps = steps;
        self.memory = self.prover.initial_memory();
    }

    fn advance<R: Rng>(
        &mut self,
        rng: &mut R,
        mut log: Option<&mut Vec<TraceEntry>>,
    ) -> Result<WalkStep, EngineError> {
        let spec = self.spec;
        let reply = match spec.is_communicating(self.cfg.state) {
            Some(query) if !self.cfg.awaiting_final => {
                let r = self.prover.reply(&self.memory, query);
                check_reply(spec, r)?;
                self.prover.observe(&mut self.memory, &TranscriptEvent::Query(query));
                self.prover.observe(&mut self.memory, &TranscriptEvent::Reply(r));
                Some(r)
            }
            _ => None,
        };
        let branches = expand(spec, self.tape, &self.cfg, reply)?;
        let probs: Vec<&Rational> = branches.iter().map(|b| &b.probability).collect();
        let pick = sample_index(&probs, rng);
        let b = branches.into_iter().nth(pick).expect("sampled index in range");
        if let Some(log) = log.as_deref_mut() {
            log.push(TraceEntry {
                step: self.cfg.steps,
                state: spec.state_name(self.cfg.state).to_string(),
                head: self.cfg.head,
                symbol: spec.symbol_name(self.tape.cells[self.cfg.head as usize]),
                query: reply.and(spec.is_communicating(self.cfg.state)).map(|q| spec.comm_alphabet[q as usize].clone()),
                reply: reply.map(|r| spec.comm_alphabet[r as usize].clone()),
                outcomes: b.outcomes.clone(),
                probability: format_rational(&b.probability),
                registers: self
                    .cfg
                    .registers
                    .iter()
                    .map(|v| format!("{v:?}"))
                    .collect(),
            });
        }
        match b.node {
            Node::Halted { verdict, steps, .. } => Ok(WalkStep::Halted(verdict, steps)),
            Node::Running(c) => {
                self.prover.observe(
                    &mut self.memory,
                    &TranscriptEvent::Moved {
                        state: c.state,
                        head_move: b.head_move,
                        outcomes: b.outcomes,
                    },
                );
                self.cfg = c;
                Ok(WalkStep::Running)
            }
        }
    }
}

/// Independent sampled runs. A Restart leaf starts the protocol again within the same
/// trial (fresh verifier and prover, step count carried over); the horizon bounds the
/// total steps of a trial.
pub fn monte_carlo<P: ProverStrategy>(
    spec: &VerifierSpec,
    tape: &Tape,
    prover: &P,
    trials: u64,
    seed: u64,
    config: &EngineConfig,
) -> Result<MonteCarloReport, EngineError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = MonteCarloReport {
        trials,
        accepts: 0,
        rejects: 0,
        unresolved: 0,
        restarts: 0,
        mean_steps: 0.0,
        variance_steps: 0.0,
        outcomes: Vec::with_capacity(trials as usize),
    };
    let mut halted_steps: Vec<f64> = Vec::new();
    for _ in 0..trials {
        let mut w = Walker {
            spec,
            tape,
            prover,
            cfg: spec.initial_config(),
            memory: prover.initial_memory(),
        };
        let outcome = loop {
            if w.cfg.steps >= config.horizon {
                break TrialOutcome::Unresolved;
            }
            match w.advance(&mut rng, None)? {
                WalkStep::Running => {}
                WalkStep::Halted(Verdict::Restart, steps) => {
                    report.restarts += 1;
                    w.restart(steps);
                }
                WalkStep::Halted(v, steps) => {
                    halted_steps.push(steps as f64);
                    break if v == Verdict::Accept {
                        TrialOutcome::Accept
                    } else {
                        TrialOutcome::Reject
                    };
                }
            }
        };
        match outcome {
            TrialOutcome::Accept => report.accepts += 1,
            TrialOutcome::Reject => report.rejects += 1,
            TrialOutcome::Unresolved => report.unresolved += 1,
        }
        report.outcomes.push(outcome);
    }
    if !halted_steps.is_empty() {
        let n = halted_steps.len() as f64;
        let mean = halted_steps.iter().sum::<f64>() / n;
        report.mean_steps = mean;
        report.variance_steps = halted_steps.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / n;
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceEntry {
    pub step: u64,
    pub state: String,
    pub head: u32,
    pub symbol: String,
    pub query: Option<String>,
    pub reply: Option<String>,
    pub outcomes: Vec<u32>,
    pub probability: String,
    pub registers: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Trace {
    pub entries: Vec<TraceEntry>,
    pub outcome: TrialOutcome,
    pub restarts: u64,
}

/// One sampled path with every step logged.
pub fn trace<P: ProverStrategy>(
    spec: &VerifierSpec,
    tape: &Tape,
    prover: &P,
    seed: u64,
    config: &EngineConfig,
) -> Result<Trace, EngineError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut w = Walker {
        spec,
        tape,
        prover,
        cfg: spec.initial_config(),
        memory: prover.initial_memory(),
    };
    let mut entries = Vec::new();
    let mut restarts = 0;
    let outcome = loop {
        if w.cfg.steps >= config.horizon {
            break TrialOutcome::Unresolved;
        }
        match w.advance(&mut rng, Some(&mut entries))? {
            WalkStep::Running => {}
            WalkStep::Halted(Verdict::Restart, steps) => {
                restarts += 1;
                w.restart(steps);
            }
            WalkStep::Halted(Verdict::Accept, _) => break TrialOutcome::Accept,
            WalkStep::Halted(Verdict::Reject, _) => break TrialOutcome::Reject,
        }
    };
    Ok(Trace {
        entries,
        outcome,
        restarts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    #[test]
    fn round_fixpoint_examples() {
        let d = rat(2, 9);
        let c = round_fixpoint(&RoundSummary {
            p_accept: d.clone(),
            p_reject: Rational::zero(),
            p_restart: Rational::one() - &d,
        })
        .unwrap();
        assert!(c.overall_accept.is_one());
        let c = round_fixpoint(&RoundSummary {
            p_accept: Rational::zero(),
            p_reject: rat(1, 4),
            p_restart: rat(3, 4),
        })
        .unwrap();
        assert!(c.overall_accept.is_zero());
        let c = round_fixpoint(&RoundSummary {
            p_accept: rat(1, 30),
            p_reject: rat(1, 15),
            p_restart: rat(9, 10),
        })
        .unwrap();
        assert_eq!(c.overall_accept, rat(1, 3));
        assert_eq!(c.expected_rounds, int(10));
        assert_eq!(
            round_fixpoint(&RoundSummary {
                p_accept: Rational::zero(),
                p_reject: Rational::zero(),
                p_restart: Rational::one(),
            }),
            Err(EngineError::Divergence)
        );
    }

    #[test]
    fn sampling_is_exact_and_seeded() {
        let ps = [rat(1, 3), rat(1, 6), rat(1, 2)];
        let refs: Vec<&Rational> = ps.iter().collect();
        let mut a = ChaCha8Rng::seed_from_u64(7);
        let mut b = ChaCha8Rng::seed_from_u64(7);
        let xs: Vec<usize> = (0..200).map(|_| sample_index(&refs, &mut a)).collect();
        let ys: Vec<usize> = (0..200).map(|_| sample_index(&refs, &mut b)).collect();
        assert_eq!(xs, ys);
        let mut counts = [0usize; 3];
        let mut r = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..60_000 {
            counts[sample_index(&refs, &mut r)] += 1;
        }
        assert!((counts[0] as f64 / 60_000.0 - 1.0 / 3.0).abs() < 0.01);
        assert!((counts[1] as f64 / 60_000.0 - 1.0 / 6.0).abs() < 0.01);
        let zero_first = [rat(0, 1), rat(1, 1)];
        let refs: Vec<&Rational> = zero_first.iter().collect();
        assert!((0..100).all(|_| sample_index(&refs, &mut r) == 1));
    }

    #[test]
    fn huge_denominators_sample() {
        let big = Rational::new(BigInt::one(), BigInt::from(3) << 100u32);
        let ps = [big.clone(), Rational::one() - &big];
        let refs: Vec<&Rational> = ps.iter().collect();
        let mut r = ChaCha8Rng::seed_from_u64(3);
        assert!((0..100).all(|_| sample_index(&refs, &mut r) == 1));
    }
}
