//! Complete verifiers with their honest provers and reference deciders.

use std::fmt::Debug;
use std::hash::Hash;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::affine::AffineError;
use crate::engine::{
    evaluate_exact, round_fixpoint, EngineConfig, EngineError, EvalResult, ProverStrategy,
    RoundClosure, SequenceProver, TranscriptEvent,
};
use crate::machine::{
    compile, Action, ControlRole, Controller, GammaId, MachineError, SpecHeader, Tape,
    TapeSymbol, VerifierSpec,
};
use crate::rational::{format_rational, Rational};
use crate::tm::TmError;

pub mod kg;
pub mod middle;
pub mod mpal;
pub mod stream;

pub use kg::{build_kg, KgInstance, KgProver};
pub use middle::{build_middle, build_middle_with, ClaimProver, MiddleReading};
pub use mpal::{build_mpal, build_mpal_with, mpal_residuals};
pub use stream::{
    build_atm, build_atm_with, build_reduction, build_weak_tm, continuation_report, with_continuation_check,
    AtmProver, ChoiceRule, ContinuationCase, ContinuationReport, ReductionProver, RestartParams,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProtocolError {
    #[error("epsilon {0} must lie strictly between 0 and 1/2")]
    EpsilonRange(String),
    #[error("expected a {0} machine")]
    Flavor(&'static str),
    #[error("malformed knapsack-game instance: {0}")]
    MalformedInstance(String),
    #[error("output convention violated: {0}")]
    OutputConvention(String),
    #[error("continuation check budget violated: {0}")]
    Budget(String),
    #[error("bad input: {0}")]
    Input(String),
    #[error("operation not supported by protocol {0}")]
    Unsupported(String),
    #[error(transparent)]
    Tm(#[from] TmError),
    #[error(transparent)]
    Affine(#[from] AffineError),
    #[error(transparent)]
    Machine(#[from] MachineError),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

pub fn check_epsilon(epsilon: &Rational) -> Result<(), ProtocolError> {
    let half = Rational::new(1.into(), 2.into());
    if *epsilon <= Rational::zero() || *epsilon >= half {
        return Err(ProtocolError::EpsilonRange(format_rational(epsilon)));
    }
    Ok(())
}

/// Per-protocol data needed for provers and membership.
#[derive(Debug, Clone)]
pub enum Kind {
    Middle(middle::MiddleInfo),
    Mpal(mpal::MpalInfo),
    Stream(Box<stream::StreamInfo>),
    Kg(kg::KgInfo),
}

#[derive(Debug, Clone)]
pub struct ProtocolBundle {
    pub name: String,
    pub verifier: VerifierSpec,
    pub epsilon: Rational,
    /// Rounds end in Restart leaves and are closed with [`round_fixpoint`].
    pub round_structured: bool,
    pub kind: Kind,
}

impl ProtocolBundle {
    pub fn tape(&self, word: &str) -> Result<Tape, ProtocolError> {
        Ok(self.verifier.tape_str(word)?)
    }

    pub fn is_member(&self, word: &str) -> Result<bool, ProtocolError> {
        match &self.kind {
            Kind::Middle(i) => Ok(i.is_member(word)),
            Kind::Mpal(i) => Ok(i.is_member(word)),
            Kind::Stream(i) => i.is_member(word),
            Kind::Kg(_) => Ok(KgInstance::parse(word).map(|k| k.game_member()).unwrap_or(false)),
        }
    }

    pub fn honest_prover(&self, word: &str) -> Result<HonestProver, ProtocolError> {
        match &self.kind {
            Kind::Middle(i) => Ok(HonestProver::Claim(i.honest(word))),
            Kind::Mpal(i) => Ok(HonestProver::Claim(i.honest(word))),
            Kind::Stream(i) => i.honest(&self.verifier, word),
            Kind::Kg(i) => Ok(HonestProver::Kg(i.honest(&self.verifier, word))),
        }
    }

    /// Exact evaluation of one round against the honest prover.
    pub fn evaluate_honest(&self, word: &str, config: &EngineConfig) -> Result<EvalResult, ProtocolError> {
        let tape = self.tape(word)?;
        let prover = self.honest_prover(word)?;
        Ok(evaluate_exact(&self.verifier, &tape, &prover, config)?)
    }

    /// Overall acceptance with the honest prover: the round closure for restart
    /// protocols, the plain acceptance probability otherwise.
    pub fn honest_overall(&self, word: &str, config: &EngineConfig) -> Result<(EvalResult, Option<RoundClosure>), ProtocolError> {
        let r = self.evaluate_honest(word, config)?;
        let closure = if self.round_structured {
            Some(round_fixpoint(&r.round_summary())?)
        } else {
            None
        };
        Ok((r, closure))
    }
}

/// Honest provers of every bundled protocol behind one type.
#[derive(Debug, Clone)]
pub enum HonestProver {
    Claim(ClaimProver),
    Sequence(SequenceProver),
    Atm(AtmProver),
    Kg(KgProver),
    Reduction(ReductionProver),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum HonestMemory {
    Count(usize),
    Atm(stream::AtmMemory),
    Kg(kg::KgMemory),
    Reduction(stream::ReductionMemory),
}

impl ProverStrategy for HonestProver {
    type Memory = HonestMemory;

    fn initial_memory(&self) -> HonestMemory {
        match self {
            HonestProver::Claim(p) => HonestMemory::Count(p.initial_memory()),
            HonestProver::Sequence(p) => HonestMemory::Count(p.initial_memory()),
            HonestProver::Atm(p) => HonestMemory::Atm(p.initial_memory()),
            HonestProver::Kg(p) => HonestMemory::Kg(p.initial_memory()),
            HonestProver::Reduction(p) => HonestMemory::Reduction(p.initial_memory()),
        }
    }

    fn observe(&self, memory: &mut HonestMemory, event: &TranscriptEvent) {
        match (self, memory) {
            (HonestProver::Claim(p), HonestMemory::Count(m)) => p.observe(m, event),
            (HonestProver::Sequence(p), HonestMemory::Count(m)) => p.observe(m, event),
            (HonestProver::Atm(p), HonestMemory::Atm(m)) => p.observe(m, event),
            (HonestProver::Kg(p), HonestMemory::Kg(m)) => p.observe(m, event),
            (HonestProver::Reduction(p), HonestMemory::Reduction(m)) => p.observe(m, event),
            _ => unreachable!("memory belongs to another prover"),
        }
    }

    fn reply(&self, memory: &HonestMemory, query: GammaId) -> GammaId {
        match (self, memory) {
            (HonestProver::Claim(p), HonestMemory::Count(m)) => p.reply(m, query),
            (HonestProver::Sequence(p), HonestMemory::Count(m)) => p.reply(m, query),
            (HonestProver::Atm(p), HonestMemory::Atm(m)) => p.reply(m, query),
            (HonestProver::Kg(p), HonestMemory::Kg(m)) => p.reply(m, query),
            (HonestProver::Reduction(p), HonestMemory::Reduction(m)) => p.reply(m, query),
            _ => unreachable!("memory belongs to another prover"),
        }
    }
}

/// Successor of a planned step: fixed, or looked up by one register's outcome.
#[derive(Debug, Clone)]
pub(crate) enum Then<S> {
    Go(S, i8),
    ByOutcome { register: usize, targets: Vec<(S, i8)> },
}

#[derive(Debug, Clone)]
pub(crate) struct Plan<S> {
    pub actions: Vec<Action>,
    pub then: Then<S>,
}

impl<S> Plan<S> {
    pub fn go(actions: Vec<Action>, s: S, mv: i8) -> Self {
        Plan {
            actions,
            then: Then::Go(s, mv),
        }
    }
}

/// Verifier logic as a planner: one plan per (state, scanned symbol).
pub(crate) trait Planner {
    type State: Clone + Eq + Hash + Debug;

    fn initial(&self) -> Self::State;
    fn role(&self, s: &Self::State) -> ControlRole;
    fn on_reply(&self, s: &Self::State, reply: GammaId) -> Self::State;
    fn plan(&self, s: &Self::State, symbol: TapeSymbol) -> Plan<Self::State>;
    fn name(&self, s: &Self::State) -> String {
        format!("{s:?}")
    }
}

/// Second field: two-way mode, where moves off the tape are clamped.
struct Planned<'a, P>(&'a P, bool);

impl<P: Planner> Controller for Planned<'_, P> {
    type State = P::State;

    fn initial(&self) -> P::State {
        self.0.initial()
    }

    fn role(&self, s: &P::State) -> ControlRole {
        self.0.role(s)
    }

    fn on_reply(&self, s: &P::State, reply: GammaId) -> P::State {
        self.0.on_reply(s, reply)
    }

    fn actions(&self, s: &P::State, symbol: TapeSymbol) -> Vec<Action> {
        self.0.plan(s, symbol).actions
    }

    fn next(&self, s: &P::State, symbol: TapeSymbol, outcomes: &[u32]) -> (P::State, i8) {
        let (s, m) = match self.0.plan(s, symbol).then {
            Then::Go(s, m) => (s, m),
            Then::ByOutcome { register, targets } => {
                targets[outcomes[register] as usize - 1].clone()
            }
        };
        // Plans for cells a state never scans may point off the tape; keep the tables valid.
        let m = match symbol {
            TapeSymbol::LeftEnd if self.1 => m.max(0),
            TapeSymbol::RightEnd if self.1 => m.min(0),
            _ => m,
        };
        (s, m)
    }

    fn name(&self, s: &P::State) -> String {
        self.0.name(s)
    }
}

pub(crate) fn compile_planner<P: Planner>(
    header: SpecHeader,
    planner: &P,
    state_cap: usize,
) -> Result<VerifierSpec, MachineError> {
    let two_way = header.mode == crate::machine::Mode::TwoWay;
    compile(header, &Planned(planner, two_way), state_cap)
}

/// Identity on every register, with selected overrides.
pub(crate) fn actions(n: usize, set: &[(usize, Action)]) -> Vec<Action> {
    let mut a = vec![Action::Apply(0); n];
    for &(i, x) in set {
        a[i] = x;
    }
    a
}

pub(crate) fn half() -> Rational {
    Rational::new(1.into(), 2.into())
}

pub(crate) fn one_minus(r: &Rational) -> Rational {
    Rational::one() - r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    #[test]
    fn epsilon_range() {
        assert!(check_epsilon(&rat(1, 3)).is_ok());
        assert!(check_epsilon(&rat(1, 2)).is_err());
        assert!(check_epsilon(&rat(2, 3)).is_err());
        assert!(check_epsilon(&rat(0, 1)).is_err());
    }
}
