//! Per-input evaluation rows and the run summary.

use anyhow::{Context, Result};
use serde::Serialize;

use affine_am::engine::{
    evaluate_worst_case, evaluate_worst_case_rounds, monte_carlo, round_fixpoint, EngineConfig, Objective,
};
use affine_am::protocols::{Kind, ProtocolBundle};
use affine_am::rational::{format_rational, parse_rational, to_f64, Rational};

use crate::config::EvalMode;

#[derive(Debug, Clone, Serialize)]
pub struct Row {
    pub input: String,
    pub member: bool,
    pub mode: String,
    pub p_accept: String,
    pub p_accept_dec: String,
    pub p_reject: String,
    pub p_reject_dec: String,
    pub p_restart: String,
    pub p_restart_dec: String,
    pub p_unresolved: String,
    pub p_unresolved_dec: String,
    /// Acceptance after closing restart rounds (equal to `p_accept` otherwise).
    pub overall_accept: String,
    pub overall_accept_dec: String,
    pub bound: String,
    pub bound_ok: bool,
    pub expected_steps: String,
    pub expected_rounds: String,
    pub nodes: String,
    pub trials: String,
    /// Half-width of the three-standard-error interval around a sampled acceptance.
    pub ci: String,
    pub mean_steps: String,
    pub variance_steps: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub protocol: String,
    pub epsilon: String,
    pub mode: EvalMode,
    pub horizon: u64,
    pub node_cap: usize,
    pub seed: u64,
    pub trials: u64,
    pub prover: String,
    pub inputs: usize,
    pub members: usize,
    pub non_members: usize,
    /// Largest overall acceptance seen on a non-member.
    pub max_non_member_accept: String,
    /// Smallest overall acceptance seen on a member.
    pub min_member_accept: String,
    pub violations: Vec<String>,
    pub all_bounds_ok: bool,
}

fn dec(x: &Rational) -> String {
    format!("{:.6}", to_f64(x))
}

fn frac(x: &Rational) -> (String, String) {
    (format_rational(x), dec(x))
}

pub struct RunSettings {
    pub mode: EvalMode,
    pub engine: EngineConfig,
    pub trials: u64,
    pub seed: u64,
}

/// Members must be accepted with certainty, except that a continuation check may
/// false-reject with probability up to its own epsilon.
fn member_floor(bundle: &ProtocolBundle) -> Rational {
    match &bundle.kind {
        Kind::Stream(info) => match &info.continuation {
            Some(c) => Rational::from_integer(1.into()) - &c.epsilon,
            None => Rational::from_integer(1.into()),
        },
        _ => Rational::from_integer(1.into()),
    }
}

/// Evaluates one input against the member floor, or for non-members against epsilon
/// (for Monte Carlo, within three standard errors).
pub fn evaluate(bundle: &ProtocolBundle, word: &str, s: &RunSettings) -> Result<Row> {
    let member = bundle.is_member(word)?;
    let eps = &bundle.epsilon;
    let floor = member_floor(bundle);
    let one = Rational::from_integer(1.into());
    let tape = bundle.tape(word).with_context(|| format!("input {word:?}"))?;
    let mut row = Row {
        input: word.to_string(),
        member,
        mode: format!("{:?}", s.mode).to_lowercase(),
        p_accept: String::new(),
        p_accept_dec: String::new(),
        p_reject: String::new(),
        p_reject_dec: String::new(),
        p_restart: String::new(),
        p_restart_dec: String::new(),
        p_unresolved: String::new(),
        p_unresolved_dec: String::new(),
        overall_accept: String::new(),
        overall_accept_dec: String::new(),
        bound: match (member, floor == one) {
            (true, true) => "=1".into(),
            (true, false) => format!(">={}", format_rational(&floor)),
            (false, _) => format!("<={}", format_rational(eps)),
        },
        bound_ok: false,
        expected_steps: String::new(),
        expected_rounds: String::new(),
        nodes: String::new(),
        trials: String::new(),
        ci: String::new(),
        mean_steps: String::new(),
        variance_steps: String::new(),
    };

    if s.mode == EvalMode::Mc {
        let prover = bundle.honest_prover(word)?;
        let mc = monte_carlo(&bundle.verifier, &tape, &prover, s.trials, s.seed, &s.engine)?;
        let n = mc.trials as f64;
        let p = mc.accept_frequency();
        row.p_accept = format!("{}/{}", mc.accepts, mc.trials);
        row.p_accept_dec = format!("{p:.6}");
        row.p_reject = format!("{}/{}", mc.rejects, mc.trials);
        row.p_reject_dec = format!("{:.6}", mc.rejects as f64 / n);
        row.p_unresolved = format!("{}/{}", mc.unresolved, mc.trials);
        row.p_unresolved_dec = format!("{:.6}", mc.unresolved as f64 / n);
        row.p_restart = mc.restarts.to_string();
        row.overall_accept = row.p_accept.clone();
        row.overall_accept_dec = row.p_accept_dec.clone();
        row.trials = mc.trials.to_string();
        row.mean_steps = format!("{:.3}", mc.mean_steps);
        row.variance_steps = format!("{:.3}", mc.variance_steps);
        let stderr = (p * (1.0 - p) / n).sqrt().max(1.0 / n);
        row.ci = format!("{:.6}", 3.0 * stderr);
        row.bound_ok = if member && floor == one {
            mc.rejects == 0
        } else if member {
            p + 3.0 * stderr >= to_f64(&floor)
        } else {
            p <= to_f64(eps) + 3.0 * stderr
        };
        return Ok(row);
    }

    let zero = Rational::from_integer(0.into());
    let (result, overall, rounds) = match s.mode {
        EvalMode::Worst if bundle.round_structured => {
            let wc = evaluate_worst_case_rounds(&bundle.verifier, &tape, &s.engine)?;
            let rounds = (wc.round.p_unresolved == zero)
                .then(|| round_fixpoint(&wc.round.round_summary()).map(|c| c.expected_rounds))
                .transpose()?;
            (wc.round, wc.overall_accept, rounds)
        }
        EvalMode::Worst => {
            let wc = evaluate_worst_case(&bundle.verifier, &tape, &Objective::accept(), &s.engine)?;
            let v = wc.result.p_accept.clone();
            (wc.result, v, None)
        }
        _ => {
            let r = bundle.evaluate_honest(word, &s.engine)?;
            if bundle.round_structured && r.p_unresolved == zero {
                let c = round_fixpoint(&r.round_summary())?;
                (r, c.overall_accept, Some(c.expected_rounds))
            } else {
                let v = r.p_accept.clone();
                (r, v, None)
            }
        }
    };
    (row.p_accept, row.p_accept_dec) = frac(&result.p_accept);
    (row.p_reject, row.p_reject_dec) = frac(&result.p_reject);
    (row.p_restart, row.p_restart_dec) = frac(&result.p_restart);
    (row.p_unresolved, row.p_unresolved_dec) = frac(&result.p_unresolved);
    (row.overall_accept, row.overall_accept_dec) = frac(&overall);
    row.expected_steps = format_rational(&result.expected_steps_lower_bound);
    row.expected_rounds = rounds.map(|r| format_rational(&r)).unwrap_or_else(|| "1/1".into());
    row.nodes = result.nodes.to_string();
    row.bound_ok = if member { overall >= floor } else { overall <= *eps };
    Ok(row)
}

pub fn summarize(bundle: &ProtocolBundle, settings: &RunSettings, rows: &[Row]) -> Summary {
    let parse = |r: &Row| parse_rational(&r.overall_accept).ok();
    let pick = |member: bool, better: fn(&Rational, &Rational) -> bool| {
        rows.iter()
            .filter(|r| r.member == member)
            .fold(None::<&Row>, |best, r| match best {
                Some(b) if !matches!((parse(r), parse(b)), (Some(x), Some(y)) if better(&x, &y)) => Some(b),
                _ => Some(r),
            })
            .map(|r| r.overall_accept.clone())
            .unwrap_or_default()
    };
    let members = rows.iter().filter(|r| r.member).count();
    let violations: Vec<String> = rows.iter().filter(|r| !r.bound_ok).map(|r| r.input.clone()).collect();
    Summary {
        protocol: bundle.name.clone(),
        epsilon: format_rational(&bundle.epsilon),
        mode: settings.mode,
        horizon: settings.engine.horizon,
        node_cap: settings.engine.node_cap,
        seed: settings.seed,
        trials: if settings.mode == EvalMode::Mc { settings.trials } else { 0 },
        prover: match settings.mode {
            EvalMode::Worst => "optimal".into(),
            _ => "honest".into(),
        },
        inputs: rows.len(),
        members,
        non_members: rows.len() - members,
        max_non_member_accept: pick(false, |a, b| a > b),
        min_member_accept: pick(true, |a, b| a < b),
        all_bounds_ok: violations.is_empty(),
        violations,
    }
}

pub fn write_csv<W: std::io::Write>(out: W, rows: &[Row]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
