//! Experiment configuration files and protocol lookup.

use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};

use affine_am::protocols::{
    build_atm, build_kg, build_middle, build_middle_with, build_mpal, build_mpal_with, build_reduction,
    build_weak_tm, check_epsilon, with_continuation_check, ContinuationCase, MiddleReading, ProtocolBundle,
};
use affine_am::rational::{parse_rational, Rational};
use affine_am::tm::{sample_machines, TuringMachineSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum, Default)]
#[serde(rename_all = "kebab-case")]
pub enum EvalMode {
    /// Honest prover, exact (round closure for restart protocols).
    #[default]
    Exact,
    /// Optimal cheating prover.
    Worst,
    /// Seeded sampling against the honest prover.
    Mc,
    /// Honest prover, closed over restart rounds.
    Rounds,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Inputs {
    Words(Vec<String>),
    AllUpTo(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CaseName {
    Polynomial,
    Exponential,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContinuationConfig {
    pub case: CaseName,
    pub k: u32,
    pub c: u64,
    /// Error budget of the check; defaults to the protocol's epsilon.
    #[serde(default)]
    pub epsilon: Option<String>,
}

fn default_horizon() -> u64 {
    100_000
}
fn default_node_cap() -> usize {
    5_000_000
}
fn default_trials() -> u64 {
    10_000
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// `middle`, `middle-any`, `mpal`, `mpal-any`, `kg`, `weak-tm`, `strong-tm`, `atm`,
    /// `reduction`; the machine protocols also accept `name:machine`.
    pub protocol: String,
    /// Bundled machine name or path to a machine JSON file.
    #[serde(default)]
    pub machine: Option<String>,
    pub epsilon: String,
    /// x-alphabet of `mpal`.
    #[serde(default)]
    pub alphabet: Option<Vec<char>>,
    #[serde(default)]
    pub continuation: Option<ContinuationConfig>,
    pub inputs: Inputs,
    #[serde(default)]
    pub mode: EvalMode,
    #[serde(default = "default_horizon")]
    pub horizon: u64,
    #[serde(default = "default_node_cap")]
    pub node_cap: usize,
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default)]
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| anyhow!("{}:{}:{}: {e}", path.display(), e.line(), e.column()))
    }

    pub fn epsilon(&self) -> Result<Rational> {
        let eps = parse_rational(&self.epsilon).with_context(|| "field `epsilon`")?;
        check_epsilon(&eps)?;
        Ok(eps)
    }

    pub fn validate(&self) -> Result<()> {
        self.epsilon()?;
        if self.horizon == 0 {
            bail!("field `horizon`: must be at least 1");
        }
        if self.mode == EvalMode::Mc && self.trials == 0 {
            bail!("field `trials`: must be at least 1 in mc mode");
        }
        Ok(())
    }
}

pub fn load_machine(name: &str) -> Result<TuringMachineSpec> {
    if let Some(m) = sample_machines().remove(name) {
        return Ok(m);
    }
    let text = std::fs::read_to_string(name).with_context(|| format!("no bundled machine or file named {name:?}"))?;
    serde_json::from_str(&text).map_err(|e| anyhow!("{name}:{}:{}: {e}", e.line(), e.column()))
}

pub const PROTOCOLS: &[(&str, &str)] = &[
    ("middle", "x 1 y with |x| = |y| over {0,1}, one-way, 3-entry register"),
    ("middle-any", "odd-length words over {0,1} (any middle symbol)"),
    ("mpal", "marked palindromes x $ x^R, one-way, (n+2)-entry register"),
    ("mpal-any", "odd palindromes without a marker"),
    ("kg", "knapsack game instances, two-way, restart rounds"),
    ("weak-tm", "deterministic machine computations (default zero-n-one-n)"),
    ("strong-tm", "weak-tm plus the continuation check"),
    ("atm", "alternating machine computations (default toy-atm)"),
    ("reduction", "machine output fed to the knapsack game (default toy-reduction)"),
];

/// Splits `name:machine`, falling back to the config's machine field and then to the
/// protocol's bundled default.
fn machine_for(protocol: &str, explicit: Option<&str>, default: &str) -> Result<TuringMachineSpec> {
    let from_name = protocol.split_once(':').map(|(_, m)| m);
    load_machine(from_name.or(explicit).unwrap_or(default))
}

pub fn build_bundle(cfg: &ExperimentConfig) -> Result<ProtocolBundle> {
    let eps = cfg.epsilon()?;
    let base = cfg.protocol.split(':').next().unwrap_or_default();
    let machine = cfg.machine.as_deref();
    let alphabet = cfg.alphabet.clone().unwrap_or_else(|| vec!['a', 'b']);
    Ok(match base {
        "middle" => build_middle(&eps)?,
        "middle-any" => build_middle_with(&eps, &['0', '1'], MiddleReading::AnySymbol)?,
        "mpal" => build_mpal(&alphabet, &eps)?,
        "mpal-any" => build_mpal_with(&alphabet, &eps, MiddleReading::AnySymbol)?,
        "kg" => build_kg(&eps)?,
        "weak-tm" => build_weak_tm(&machine_for(&cfg.protocol, machine, "zero-n-one-n")?, &eps)?,
        "strong-tm" => {
            let weak = build_weak_tm(&machine_for(&cfg.protocol, machine, "zero-n-one-n")?, &eps)?;
            let (case, check_eps) = match &cfg.continuation {
                None => (ContinuationCase::Exponential { k: 1, c: 1 }, eps.clone()),
                Some(c) => {
                    let case = match c.case {
                        CaseName::Polynomial => ContinuationCase::Polynomial { k: c.k, c: c.c },
                        CaseName::Exponential => ContinuationCase::Exponential { k: c.k, c: c.c },
                    };
                    let e = match &c.epsilon {
                        Some(s) => parse_rational(s).with_context(|| "field `continuation.epsilon`")?,
                        None => eps.clone(),
                    };
                    (case, e)
                }
            };
            with_continuation_check(&weak, case, &check_eps)?
        }
        "atm" => build_atm(&machine_for(&cfg.protocol, machine, "toy-atm")?, &eps)?,
        "reduction" => build_reduction(&machine_for(&cfg.protocol, machine, "toy-reduction")?, &eps)?,
        other => bail!(
            "unknown protocol {other:?}; expected one of {}",
            PROTOCOLS.iter().map(|p| p.0).collect::<Vec<_>>().join(", ")
        ),
    })
}

/// Every word over `alphabet` of length at most `max_len`, shortest first.
pub fn all_words(alphabet: &[char], max_len: usize) -> Vec<String> {
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

#[cfg(test)]
mod tests {
    use super::*;

    fn config(text: &str) -> Result<ExperimentConfig> {
        Ok(serde_json::from_str(text)?)
    }

    #[test]
    fn parses_and_validates() {
        let c = config(r#"{"protocol":"middle","epsilon":"1/3","inputs":{"all_up_to":3}}"#).unwrap();
        assert_eq!(c.mode, EvalMode::Exact);
        assert!(c.validate().is_ok());
        let bad = config(r#"{"protocol":"middle","epsilon":"2/3","inputs":{"words":["1"]}}"#).unwrap();
        assert!(bad.validate().unwrap_err().to_string().contains("epsilon"));
        assert!(config(r#"{"protocol":"middle","epsilon":"1/3","inputs":{"words":[]},"typo":1}"#).is_err());
    }

    #[test]
    fn words_and_bundles() {
        assert_eq!(all_words(&['0', '1'], 2), vec!["", "0", "1", "00", "01", "10", "11"]);
        let c = config(r#"{"protocol":"weak-tm:palindrome","epsilon":"1/3","inputs":{"words":[]}}"#).unwrap();
        assert!(build_bundle(&c).unwrap().name.contains("palindrome"));
        let c = config(r#"{"protocol":"nope","epsilon":"1/3","inputs":{"words":[]}}"#).unwrap();
        assert!(build_bundle(&c).is_err());
    }
}
