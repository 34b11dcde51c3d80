//! One-way verifier for marked palindromes `x s x^R` with an `(n+2)`-entry register.
//!
//! Symbol `k` of the x-alphabet owns the register entry `k + 1` and the k-th prime
//! `p_k`. Before the claimed middle each symbol applies `P_k` (multiply entry 0 by
//! `p_k`), after it `P_k^-1`. Unique factorization makes the product the identity
//! exactly when the second half mirrors the first.

use num_traits::{One, Signed, Zero};

use crate::affine::{AffineOperator, AffineState};
use crate::machine::{Action, ControlRole, GammaId, Mode, RegisterSpec, SpecHeader, TapeSymbol};
use crate::rational::Rational;

use super::middle::{claim_alphabet, ClaimProver, MiddleReading, ASK, NO, YES};
use super::{actions, check_epsilon, compile_planner, one_minus, Kind, Plan, Planner, ProtocolBundle, ProtocolError};

#[derive(Debug, Clone)]
pub struct MpalInfo {
    /// The x-alphabet, in prime order.
    pub alphabet: Vec<char>,
    pub reading: MiddleReading,
}

impl MpalInfo {
    pub fn is_member(&self, word: &str) -> bool {
        let w: Vec<char> = word.chars().collect();
        if w.len() % 2 == 0 {
            return false;
        }
        let mid = w.len() / 2;
        let middle_ok = match self.reading {
            MiddleReading::Marked(m) => w[mid] == m,
            MiddleReading::AnySymbol => true,
        };
        middle_ok
            && (0..mid).all(|i| w[i] == w[w.len() - 1 - i] && self.alphabet.contains(&w[i]))
    }

    pub fn honest(&self, word: &str) -> ClaimProver {
        let n = word.chars().count();
        ClaimProver {
            claim: (n % 2 == 1).then_some(n / 2),
        }
    }
}

pub fn first_primes(n: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(n);
    let mut c = 2u64;
    while out.len() < n {
        if out.iter().all(|p| c % p != 0) {
            out.push(c);
        }
        c += 1;
    }
    out
}

/// `P_k` on the `(e_0, e_k)` plane of a `dim`-entry register.
fn prime_operator(dim: usize, k: usize, p: &Rational) -> AffineOperator {
    let mut rows = AffineOperator::identity(dim).rows();
    rows[0][0] = p.clone();
    rows[k][0] = Rational::one() - p;
    AffineOperator::new(rows).expect("P_k is affine")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum PalState {
    Start,
    Ask,
    GotNo,
    GotYes,
    Second,
    Final,
    Dead,
}

struct MpalPlanner {
    alphabet: Vec<char>,
    reading: MiddleReading,
    /// Bank indices of `P_k` and `P_k^-1`, aligned with `alphabet`.
    forward: Vec<u16>,
    backward: Vec<u16>,
    finish: u16,
}

impl Planner for MpalPlanner {
    type State = PalState;

    fn initial(&self) -> PalState {
        PalState::Start
    }

    fn role(&self, s: &PalState) -> ControlRole {
        match s {
            PalState::Ask => ControlRole::Query(ASK),
            PalState::Final => ControlRole::Accept,
            _ => ControlRole::Normal,
        }
    }

    fn on_reply(&self, _s: &PalState, reply: GammaId) -> PalState {
        match reply {
            NO => PalState::GotNo,
            YES => PalState::GotYes,
            _ => PalState::Dead,
        }
    }

    fn plan(&self, s: &PalState, symbol: TapeSymbol) -> Plan<PalState> {
        use PalState::*;
        let keep = || actions(1, &[]);
        let apply = |op| actions(1, &[(0, Action::Apply(op))]);
        let k = match symbol {
            TapeSymbol::Input(c) => self.alphabet.iter().position(|&a| a == c),
            _ => None,
        };
        match (s, symbol, k) {
            (Start, TapeSymbol::LeftEnd, _) => Plan::go(keep(), Ask, 1),
            (GotNo, _, Some(k)) => Plan::go(apply(self.forward[k]), Ask, 1),
            (GotYes, TapeSymbol::Input(c), _) => {
                let ok = match self.reading {
                    MiddleReading::Marked(m) => c == m,
                    MiddleReading::AnySymbol => true,
                };
                Plan::go(keep(), if ok { Second } else { Dead }, 1)
            }
            (Second, TapeSymbol::RightEnd, _) => Plan::go(apply(self.finish), Final, 1),
            (Second, _, Some(k)) => Plan::go(apply(self.backward[k]), Second, 1),
            _ => Plan::go(keep(), Dead, 1),
        }
    }
}

/// Marker `'$'` between the halves.
pub fn build_mpal(alphabet: &[char], epsilon: &Rational) -> Result<ProtocolBundle, ProtocolError> {
    build_mpal_with(alphabet, epsilon, MiddleReading::Marked('$'))
}

pub fn build_mpal_with(
    alphabet: &[char],
    epsilon: &Rational,
    reading: MiddleReading,
) -> Result<ProtocolBundle, ProtocolError> {
    check_epsilon(epsilon)?;
    if alphabet.is_empty() {
        return Err(ProtocolError::Input("alphabet must not be empty".into()));
    }
    let mut input_alphabet = alphabet.to_vec();
    if let MiddleReading::Marked(m) = reading {
        if alphabet.contains(&m) {
            return Err(ProtocolError::Input(format!("marker {m:?} must lie outside the alphabet")));
        }
        input_alphabet.push(m);
    }
    let n = alphabet.len();
    let dim = n + 2;
    // delta = 2 (1 - eps) / eps
    let delta = one_minus(epsilon) * Rational::from_integer(2.into()) / epsilon;
    let mut reg = RegisterSpec::new("pal", dim);
    let mut forward = Vec::with_capacity(n);
    let mut backward = Vec::with_capacity(n);
    for (k, (&c, p)) in alphabet.iter().zip(first_primes(n)).enumerate() {
        let p = prime_operator(dim, k + 1, &Rational::from_integer(p.into()));
        let inv = p.inverse().expect("P_k is invertible");
        forward.push(reg.push(&format!("P_{c}"), p));
        backward.push(reg.push(&format!("P_{c}^-1"), inv));
    }
    let mut rows = vec![vec![Rational::zero(); dim]; dim];
    rows[0][0] = Rational::one();
    for j in 1..=n {
        rows[j][j] = delta.clone();
        rows[dim - 1][j] = one_minus(&delta);
    }
    rows[dim - 1][dim - 1] = Rational::one();
    let finish = reg.push("M_F", AffineOperator::new(rows).expect("M_F is affine"));
    reg.accepting = vec![0];
    let header = SpecHeader {
        name: "mpal".into(),
        mode: Mode::OneWay,
        input_alphabet,
        comm_alphabet: claim_alphabet(),
        registers: vec![reg],
    };
    let planner = MpalPlanner {
        alphabet: alphabet.to_vec(),
        reading,
        forward,
        backward,
        finish,
    };
    let verifier = compile_planner(header, &planner, 64)?;
    Ok(ProtocolBundle {
        name: "mpal".into(),
        verifier,
        epsilon: epsilon.clone(),
        round_structured: false,
        kind: Kind::Mpal(MpalInfo {
            alphabet: alphabet.to_vec(),
            reading,
        }),
    })
}

/// For every middle claim that passes the deterministic checks, the register just
/// before `M_F` and the residual `sum_k |v_{k+1}|` over the symbol entries.
pub fn mpal_residuals(
    bundle: &ProtocolBundle,
    word: &str,
) -> Result<Vec<(usize, AffineState, Rational)>, ProtocolError> {
    let Kind::Mpal(info) = &bundle.kind else {
        return Err(ProtocolError::Unsupported(bundle.name.clone()));
    };
    let reg = &bundle.verifier.registers[0];
    let w: Vec<char> = word.chars().collect();
    let index = |c: char| info.alphabet.iter().position(|&a| a == c);
    let mut out = Vec::new();
    for j in 0..w.len() {
        let middle_ok = match info.reading {
            MiddleReading::Marked(m) => w[j] == m,
            MiddleReading::AnySymbol => true,
        };
        if !middle_ok {
            continue;
        }
        let ks: Option<Vec<(usize, bool)>> = w
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != j)
            .map(|(i, &c)| index(c).map(|k| (k, i < j)))
            .collect();
        let Some(ks) = ks else { continue };
        let mut v = AffineState::basis(reg.dim, 0);
        for (k, before) in ks {
            let c = info.alphabet[k];
            let name = if before { format!("P_{c}") } else { format!("P_{c}^-1") };
            let op = reg.find(&name).expect("bank holds every P_k");
            v = reg.operators[op as usize].matrix.apply(&v).expect("dims match");
        }
        let residual: Rational = v.entries()[1..=info.alphabet.len()].iter().map(|x| x.abs()).sum();
        out.push((j, v, residual));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{evaluate_worst_case, EngineConfig, Objective};
    use crate::machine::validate;
    use crate::rational::{int, rat};

    #[test]
    fn primes() {
        assert_eq!(first_primes(5), vec![2, 3, 5, 7, 11]);
    }

    #[test]
    fn examples() {
        let cfg = EngineConfig::default();
        let b = build_mpal(&['a', 'b'], &rat(1, 3)).unwrap();
        assert!(validate(&b.verifier).is_empty());
        assert_eq!(b.verifier.registers[0].dim, 4);
        assert_eq!(b.evaluate_honest("a$a", &cfg).unwrap().p_accept, int(1));
        let wc = evaluate_worst_case(&b.verifier, &b.tape("a$b").unwrap(), &Objective::accept(), &cfg).unwrap();
        assert_eq!(wc.value, rat(2, 33));
        let res = mpal_residuals(&b, "a$b").unwrap();
        assert_eq!(res.len(), 1);
        assert_eq!(res[0].2, rat(7, 3));
        assert!(build_mpal(&['a', '$'], &rat(1, 3)).is_err());
    }

    #[test]
    fn any_symbol_reading() {
        let b = build_mpal_with(&['a', 'b'], &rat(1, 3), MiddleReading::AnySymbol).unwrap();
        assert!(b.is_member("aba").unwrap());
        assert!(!b.is_member("abb").unwrap());
        let cfg = EngineConfig::default();
        assert_eq!(b.evaluate_honest("abbba", &cfg).unwrap().p_accept, int(1));
    }
}
