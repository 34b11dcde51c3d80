//! One-way verifier for `{ x s y : |x| = |y| }` with a single 3-entry register.
//!
//! Before each symbol the prover says whether it is the middle one. Up to the claimed
//! middle the verifier applies `A` (counting up), after it `A^-1` (counting down), so
//! the register ends at `(1, m, -m)` with `m = |x| - |y|`. The final `M_F` scales the
//! counter by `delta` so that a wrong claim survives the weighting with probability
//! `1 / (1 + 2|m| delta)`.

use crate::affine::AffineOperator;
use crate::engine::{ProverStrategy, TranscriptEvent};
use crate::machine::{Action, ControlRole, GammaId, Mode, RegisterSpec, SpecHeader, TapeSymbol};
use crate::rational::Rational;

use super::{actions, check_epsilon, compile_planner, one_minus, Kind, Plan, Planner, ProtocolBundle, ProtocolError};

pub const ASK: GammaId = 0;
pub const NO: GammaId = 1;
pub const YES: GammaId = 2;

pub(crate) fn claim_alphabet() -> Vec<String> {
    vec!["?".into(), "no".into(), "yes".into()]
}

/// Which symbols may sit in the middle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MiddleReading {
    /// Only this distinguished symbol.
    Marked(char),
    /// Any symbol (the language then only constrains the length).
    AnySymbol,
}

#[derive(Debug, Clone)]
pub struct MiddleInfo {
    pub reading: MiddleReading,
    pub alphabet: Vec<char>,
}

impl MiddleInfo {
    pub fn is_member(&self, word: &str) -> bool {
        let w: Vec<char> = word.chars().collect();
        if w.len() % 2 == 0 {
            return false;
        }
        match self.reading {
            MiddleReading::Marked(m) => w[w.len() / 2] == m,
            MiddleReading::AnySymbol => true,
        }
    }

    pub fn honest(&self, word: &str) -> ClaimProver {
        let n = word.chars().count();
        ClaimProver {
            claim: (n % 2 == 1).then_some(n / 2),
        }
    }
}

/// Says "yes" at query number `claim` (0-based) and "no" everywhere else.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClaimProver {
    pub claim: Option<usize>,
}

impl ProverStrategy for ClaimProver {
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
        if Some(*memory) == self.claim {
            YES
        } else {
            NO
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub(crate) enum MidState {
    Start,
    Ask,
    GotNo,
    GotYes,
    Second,
    Final,
    Dead,
}

struct MiddlePlanner {
    reading: MiddleReading,
    count_up: u16,
    count_down: u16,
    finish: u16,
}

impl Planner for MiddlePlanner {
    type State = MidState;

    fn initial(&self) -> MidState {
        MidState::Start
    }

    fn role(&self, s: &MidState) -> ControlRole {
        match s {
            MidState::Ask => ControlRole::Query(ASK),
            MidState::Final => ControlRole::Accept,
            _ => ControlRole::Normal,
        }
    }

    fn on_reply(&self, _s: &MidState, reply: GammaId) -> MidState {
        match reply {
            NO => MidState::GotNo,
            YES => MidState::GotYes,
            _ => MidState::Dead,
        }
    }

    fn plan(&self, s: &MidState, symbol: TapeSymbol) -> Plan<MidState> {
        use MidState::*;
        let keep = || actions(1, &[]);
        let apply = |op| actions(1, &[(0, Action::Apply(op))]);
        let input = matches!(symbol, TapeSymbol::Input(_));
        match (s, symbol) {
            (Start, TapeSymbol::LeftEnd) => Plan::go(keep(), Ask, 1),
            (GotNo, _) if input => Plan::go(apply(self.count_up), Ask, 1),
            (GotYes, TapeSymbol::Input(c)) => {
                let ok = match self.reading {
                    MiddleReading::Marked(m) => c == m,
                    MiddleReading::AnySymbol => true,
                };
                Plan::go(keep(), if ok { Second } else { Dead }, 1)
            }
            (Second, TapeSymbol::RightEnd) => Plan::go(apply(self.finish), Final, 1),
            (Second, _) if input => Plan::go(apply(self.count_down), Second, 1),
            _ => Plan::go(keep(), Dead, 1),
        }
    }
}

/// Binary alphabet with `'1'` as the marked middle symbol.
pub fn build_middle(epsilon: &Rational) -> Result<ProtocolBundle, ProtocolError> {
    build_middle_with(epsilon, &['0', '1'], MiddleReading::Marked('1'))
}

pub fn build_middle_with(
    epsilon: &Rational,
    alphabet: &[char],
    reading: MiddleReading,
) -> Result<ProtocolBundle, ProtocolError> {
    check_epsilon(epsilon)?;
    if let MiddleReading::Marked(m) = reading {
        if !alphabet.contains(&m) {
            return Err(ProtocolError::Input(format!("marked symbol {m:?} not in the alphabet")));
        }
    }
    // delta = (1 - eps) / (2 eps)
    let delta = one_minus(epsilon) / (epsilon * Rational::from_integer(2.into()));
    let a = AffineOperator::from_i64_rows(&[&[1, 0, 0], &[1, 1, 0], &[-1, 0, 1]]).expect("affine");
    let a_inv = a.inverse().expect("A is invertible");
    let z = Rational::from_integer(0.into());
    let o = Rational::from_integer(1.into());
    let m_f = AffineOperator::new(vec![
        vec![o.clone(), one_minus(&delta), one_minus(&delta)],
        vec![z.clone(), delta.clone(), z.clone()],
        vec![z.clone(), z, delta],
    ])
    .expect("M_F is affine");
    let mut reg = RegisterSpec::new("counter", 3);
    let count_up = reg.push("A", a);
    let count_down = reg.push("A^-1", a_inv);
    let finish = reg.push("M_F", m_f);
    reg.accepting = vec![0];
    let header = SpecHeader {
        name: "middle".into(),
        mode: Mode::OneWay,
        input_alphabet: alphabet.to_vec(),
        comm_alphabet: claim_alphabet(),
        registers: vec![reg],
    };
    let planner = MiddlePlanner {
        reading,
        count_up,
        count_down,
        finish,
    };
    let verifier = compile_planner(header, &planner, 64)?;
    Ok(ProtocolBundle {
        name: "middle".into(),
        verifier,
        epsilon: epsilon.clone(),
        round_structured: false,
        kind: Kind::Middle(MiddleInfo {
            reading,
            alphabet: alphabet.to_vec(),
        }),
    })
}
