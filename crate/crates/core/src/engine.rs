//! The bounded doping-test loop and test-case selection strategies.
//!
//! Each step either stops, sends an input, or waits for an output. A pending
//! output always preempts the strategy. Observed outputs (δ on timeout) are
//! judged against the bounded acceptance oracle; the run ends in `Fail` on
//! the first rejected output, in `TrivialPass` once the history leaves every
//! standard input tube, and in `Pass` otherwise.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;
use std::time::Duration;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::budget::NodeBudget;
use crate::contract::Contract;
use crate::error::{Error, Result};
use crate::model::{Symbol, Trace};
use crate::oracle::{Oracle, Tube};
use crate::sut::SutConnection;
use crate::value::Value;

/// Default timeout after which a silent system is judged quiescent.
pub const DEFAULT_TIMEOUT: Duration = Duration::from_millis(500);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Case {
    Stop,
    SendInput,
    AwaitOutput,
}

/// Test-case selection.
pub trait Strategy {
    fn choose_case(&mut self, history: &Trace, oracle: &Oracle, tube: &Tube) -> Case;
    fn choose_input(&mut self, history: &Trace, oracle: &Oracle, tube: &Tube) -> Value;

    /// Called when a pending output preempted the strategy.
    fn forced_await(&mut self) {}
}

/// Why a run could not witness anything about the standard.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TrivialReason {
    /// The input at `position` is more than κ_in away from every standard
    /// input still in the tube.
    InputOutsideTube { position: usize, input: Value },
    /// An output or δ was observed at `position` where every close standard
    /// trace demands an input.
    OutputWhereInputExpected { position: usize },
}

impl fmt::Display for TrivialReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TrivialReason::InputOutsideTube { position, input } => write!(
                f,
                "input {input} at step {position} deviates more than kappa_in from every standard input"
            ),
            TrivialReason::OutputWhereInputExpected { position } => write!(
                f,
                "output awaited at step {position} where the standard demands an input"
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Failure {
    /// 1-based step of the rejected output.
    pub position: usize,
    pub output: Symbol,
    /// Rendered acceptance set at that step.
    pub acceptable: String,
    /// A standard trace whose demanded outputs the observation misses.
    pub witness: Option<Trace>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail(Failure),
    TrivialPass(TrivialReason),
}

impl Verdict {
    pub fn is_pass(&self) -> bool {
        matches!(self, Verdict::Pass)
    }

    pub fn is_fail(&self) -> bool {
        matches!(self, Verdict::Fail(_))
    }

    pub fn is_trivial(&self) -> bool {
        matches!(self, Verdict::TrivialPass(_))
    }

    pub fn tag(&self) -> &'static str {
        match self {
            Verdict::Pass => "PASS",
            Verdict::Fail(_) => "FAIL",
            Verdict::TrivialPass(_) => "TRIVIAL",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Pass => f.write_str("PASS"),
            Verdict::Fail(fail) => write!(
                f,
                "FAIL output {} at step {} not in {}",
                fail.output, fail.position, fail.acceptable
            ),
            Verdict::TrivialPass(reason) => write!(f, "TRIVIAL {reason}"),
        }
    }
}

/// The outcome of one test run: the observed history and the verdict.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunRecord {
    pub bound: usize,
    pub history: Trace,
    pub verdict: Verdict,
}

#[derive(Serialize)]
struct Summary<'a> {
    verdict: &'static str,
    bound: usize,
    steps: usize,
    history: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    fail_step: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    fail_output: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    acceptable: Option<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    witness: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    trivial: Option<&'a TrivialReason>,
}

impl RunRecord {
    /// `STEP n SEND i:v` / `STEP n RECV o:v|q` lines followed by the verdict line.
    pub fn log_lines(&self) -> Vec<String> {
        let mut lines: Vec<String> = self
            .history
            .iter()
            .enumerate()
            .map(|(k, s)| {
                let dir = if s.is_input() { "SEND" } else { "RECV" };
                format!("STEP {} {dir} {s}", k + 1)
            })
            .collect();
        lines.push(format!("VERDICT {}", self.verdict));
        lines
    }

    pub fn summary_json(&self) -> String {
        let fail = match &self.verdict {
            Verdict::Fail(f) => Some(f),
            _ => None,
        };
        let summary = Summary {
            verdict: self.verdict.tag(),
            bound: self.bound,
            steps: self.history.len(),
            history: self.history.iter().map(Symbol::to_string).collect(),
            fail_step: fail.map(|f| f.position),
            fail_output: fail.map(|f| f.output.to_string()),
            acceptable: fail.map(|f| f.acceptable.as_str()),
            witness: fail
                .and_then(|f| f.witness.as_ref())
                .map(|w| w.iter().map(Symbol::to_string).collect()),
            trivial: match &self.verdict {
                Verdict::TrivialPass(r) => Some(r),
                _ => None,
            },
        };
        serde_json::to_string(&summary).expect("summary is serialisable")
    }

    /// The log lines plus the JSON summary, newline-terminated.
    pub fn render_log(&self) -> String {
        let mut out = self.log_lines().join("\n");
        out.push('\n');
        out.push_str(&self.summary_json());
        out.push('\n');
        out
    }

    pub fn write_log(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.render_log()).map_err(|e| Error::io(path, e))
    }
}

/// Runtime knobs of [`dt_run`].
#[derive(Debug, Clone, Copy)]
pub struct RunConfig {
    pub bound: usize,
    pub timeout: Duration,
    pub budget: NodeBudget,
}

impl RunConfig {
    pub fn new(bound: usize) -> Self {
        RunConfig {
            bound,
            timeout: DEFAULT_TIMEOUT,
            budget: NodeBudget::DEFAULT,
        }
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        self.timeout = timeout;
        self
    }

    pub fn with_budget(mut self, budget: NodeBudget) -> Self {
        self.budget = budget;
        self
    }
}

/// Runs one bounded doping test against `sut`.
///
/// Inputs chosen by the strategy and outputs received from the system are
/// snapped onto the contract grids; a value that cannot be snapped is an
/// error rather than a verdict.
pub fn dt_run(
    contract: &Contract,
    sut: &mut dyn SutConnection,
    strategy: &mut dyn Strategy,
    config: RunConfig,
) -> Result<RunRecord> {
    let oracle = Oracle::with_budget(contract, config.bound, config.budget);
    dt_run_with(&oracle, sut, strategy, config)
}

/// As [`dt_run`], reusing an oracle (and its memo) across runs.
pub fn dt_run_with(
    oracle: &Oracle,
    sut: &mut dyn SutConnection,
    strategy: &mut dyn Strategy,
    config: RunConfig,
) -> Result<RunRecord> {
    let contract = oracle.contract();
    let bound = oracle.bound();
    sut.reset()?;
    let mut history = Trace::new();
    let mut tube = oracle.tube();
    let finish = |history: Trace, verdict| Ok(RunRecord { bound, history, verdict });
    loop {
        if history.len() >= bound {
            return finish(history, Verdict::Pass);
        }
        let case = if sut.output_pending()? {
            strategy.forced_await();
            Case::AwaitOutput
        } else {
            strategy.choose_case(&history, oracle, &tube)
        };
        match case {
            Case::Stop => return finish(history, Verdict::Pass),
            Case::SendInput => {
                let raw = strategy.choose_input(&history, oracle, &tube);
                let v = contract.input_domain().snap(raw)?;
                sut.send(v)?;
                let sym = Symbol::Input(v);
                history.push(sym);
                tube = oracle.advance(&tube, &sym);
                if tube.is_empty() {
                    let reason = TrivialReason::InputOutsideTube {
                        position: history.len(),
                        input: v,
                    };
                    return finish(history, Verdict::TrivialPass(reason));
                }
            }
            Case::AwaitOutput => {
                let raw = sut.receive(config.timeout)?;
                let o = match raw {
                    Symbol::Input(_) => return Err(Error::Model("system produced an input".into())),
                    other => contract.snap_symbol(&other)?,
                };
                let obligations = oracle.obligations(&tube)?;
                if !obligations.accepts(&o) {
                    let failure = Failure {
                        position: history.len() + 1,
                        output: o,
                        acceptable: oracle.acceptance_of(&obligations).to_string(),
                        witness: oracle.rejection_witness(&obligations, &o),
                    };
                    history.push(o);
                    return finish(history, Verdict::Fail(failure));
                }
                history.push(o);
                tube = oracle.advance(&tube, &o);
                if tube.is_empty() {
                    let reason = TrivialReason::OutputWhereInputExpected {
                        position: history.len(),
                    };
                    return finish(history, Verdict::TrivialPass(reason));
                }
            }
        }
    }
}

/// Weights of the three cases for [`RandomStrategy`].
#[derive(Debug, Clone, Copy)]
pub struct CaseWeights {
    pub stop: f64,
    pub send: f64,
    pub await_output: f64,
}

impl Default for CaseWeights {
    fn default() -> Self {
        CaseWeights {
            stop: 0.05,
            send: 0.65,
            await_output: 0.30,
        }
    }
}

/// Seeded random test-case selection. With probability `near` (1 by
/// default) the input is drawn uniformly from the grid points within κ_in of
/// a standard input still in the tube, when there are any; otherwise it is
/// drawn uniformly from the whole input grid.
pub struct RandomStrategy {
    rng: ChaCha8Rng,
    weights: CaseWeights,
    near: f64,
}

pub fn random_strategy(seed: u64) -> RandomStrategy {
    RandomStrategy {
        rng: ChaCha8Rng::seed_from_u64(seed),
        weights: CaseWeights::default(),
        near: 1.0,
    }
}

impl RandomStrategy {
    pub fn with_weights(mut self, weights: CaseWeights) -> Self {
        self.weights = weights;
        self
    }

    /// Probability of picking an input close to a standard input.
    pub fn with_near_probability(mut self, near: f64) -> Self {
        self.near = near;
        self
    }
}

impl Strategy for RandomStrategy {
    fn choose_case(&mut self, _history: &Trace, _oracle: &Oracle, _tube: &Tube) -> Case {
        let w = self.weights;
        let x = self.rng.gen::<f64>() * (w.stop + w.send + w.await_output);
        if x < w.stop {
            Case::Stop
        } else if x < w.stop + w.send {
            Case::SendInput
        } else {
            Case::AwaitOutput
        }
    }

    fn choose_input(&mut self, _history: &Trace, oracle: &Oracle, tube: &Tube) -> Value {
        let contract = oracle.contract();
        let domain = contract.input_domain();
        if self.rng.gen::<f64>() < self.near {
            let near: Vec<Value> = tube
                .enabled_inputs(contract.standard().lts())
                .into_iter()
                .flat_map(|u| domain.points_within(u, contract.kappa_in()).collect::<Vec<_>>())
                .collect::<BTreeSet<Value>>()
                .into_iter()
                .collect();
            if !near.is_empty() {
                return near[self.rng.gen_range(0..near.len())];
            }
        }
        domain.point(self.rng.gen_range(0..domain.len()))
    }
}

/// One line of a predefined test script.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScriptStep {
    Send(Value),
    Wait,
}

/// Predefined test: sends the scripted inputs in order and waits where the
/// script says `wait`. An output that arrives on its own satisfies the next
/// `wait`. Once the script is exhausted it keeps waiting for
/// outputs until the bound; an empty script stops at once.
pub struct ScriptedStrategy {
    steps: Vec<ScriptStep>,
    next: usize,
}

pub fn scripted_strategy(steps: Vec<ScriptStep>) -> ScriptedStrategy {
    ScriptedStrategy { steps, next: 0 }
}

/// Parses a script: one decimal input or `wait` per line; blank lines and
/// `#` comments are skipped.
pub fn parse_script(text: &str) -> Result<Vec<ScriptStep>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .map(|(n, l)| match l.trim() {
            "wait" => Ok(ScriptStep::Wait),
            v => v
                .parse::<Value>()
                .map(ScriptStep::Send)
                .map_err(|e| Error::Parse(format!("line {}: {e}", n + 1))),
        })
        .collect()
}

pub fn load_script(path: &Path) -> Result<Vec<ScriptStep>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_script(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

impl Strategy for ScriptedStrategy {
    fn choose_case(&mut self, _history: &Trace, _oracle: &Oracle, _tube: &Tube) -> Case {
        match self.steps.get(self.next) {
            None if self.steps.is_empty() => Case::Stop,
            None => Case::AwaitOutput,
            Some(ScriptStep::Send(_)) => Case::SendInput,
            Some(ScriptStep::Wait) => {
                self.next += 1;
                Case::AwaitOutput
            }
        }
    }

    fn choose_input(&mut self, _history: &Trace, _oracle: &Oracle, _tube: &Tube) -> Value {
        match self.steps.get(self.next) {
            Some(ScriptStep::Send(v)) => {
                self.next += 1;
                *v
            }
            _ => unreachable!("choose_input follows a SendInput case"),
        }
    }

    fn forced_await(&mut self) {
        if self.steps.get(self.next) == Some(&ScriptStep::Wait) {
            self.next += 1;
        }
    }
}

/// Replays a recorded trace: sends its inputs, waits where it has outputs or
/// δ, and stops when it is exhausted.
pub struct ReplayStrategy {
    trace: Trace,
}

pub fn replay_strategy(trace: Trace) -> ReplayStrategy {
    ReplayStrategy { trace }
}

impl Strategy for ReplayStrategy {
    fn choose_case(&mut self, history: &Trace, _oracle: &Oracle, _tube: &Tube) -> Case {
        match self.trace.symbols().get(history.len()) {
            None => Case::Stop,
            Some(Symbol::Input(_)) => Case::SendInput,
            Some(_) => Case::AwaitOutput,
        }
    }

    fn choose_input(&mut self, history: &Trace, _oracle: &Oracle, _tube: &Tube) -> Value {
        match self.trace.symbols().get(history.len()) {
            Some(Symbol::Input(v)) => *v,
            _ => unreachable!("choose_input follows a SendInput case"),
        }
    }
}
