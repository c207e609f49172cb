//! Connections to systems under test.

use std::collections::VecDeque;
use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::thread;
use std::time::Duration;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{Lts, StateId, Symbol, Trace};
use crate::value::Value;

/// A black-box system that consumes inputs and produces outputs.
///
/// Outputs produced while an input is being sent are buffered and delivered
/// by later calls to [`SutConnection::receive`].
pub trait SutConnection {
    /// Returns the system to its initial state.
    fn reset(&mut self) -> Result<()>;

    fn send(&mut self, input: Value) -> Result<()>;

    /// True iff an output is available without waiting.
    fn output_pending(&mut self) -> Result<bool>;

    /// The next output, or δ when none arrives before `timeout`.
    fn receive(&mut self, timeout: Duration) -> Result<Symbol>;
}

/// Mirrors each input back: an input with at most two decimals yields `x`
/// or `2x` by a fair coin; any other input yields `u·x` with `u` uniform on
/// `[1, 4]`, rounded to six decimals.
pub struct NoisyMirror {
    seed: u64,
    rng: ChaCha8Rng,
    queue: VecDeque<Value>,
}

impl NoisyMirror {
    pub fn new(seed: u64) -> Self {
        NoisyMirror {
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
            queue: VecDeque::new(),
        }
    }

    fn respond(&mut self, x: Value) -> Value {
        if x.decimals() <= 2 {
            if self.rng.gen_bool(0.5) {
                x
            } else {
                x + x
            }
        } else {
            let u: f64 = self.rng.gen_range(1.0..=4.0);
            Value::from_f64(u * x.to_f64())
        }
    }
}

impl SutConnection for NoisyMirror {
    fn reset(&mut self) -> Result<()> {
        self.rng = ChaCha8Rng::seed_from_u64(self.seed);
        self.queue.clear();
        Ok(())
    }

    fn send(&mut self, input: Value) -> Result<()> {
        let out = self.respond(input);
        self.queue.push_back(out);
        Ok(())
    }

    fn output_pending(&mut self) -> Result<bool> {
        Ok(!self.queue.is_empty())
    }

    fn receive(&mut self, _timeout: Duration) -> Result<Symbol> {
        Ok(self.queue.pop_front().map_or(Symbol::Quiescence, Symbol::Output))
    }
}

/// Plays an explicit LTS, resolving nondeterminism with a seeded coin at the
/// moment each step is taken.
///
/// An output is pending when the current state can emit an output but has
/// no δ transition and no input transitions; otherwise the strategy may send
/// inputs, and `receive` picks among the state's outputs and δ (δ when the
/// state has neither).
pub struct LtsPlayer {
    lts: Lts,
    seed: u64,
    rng: ChaCha8Rng,
    state: StateId,
}

impl LtsPlayer {
    pub fn new(lts: Lts, seed: u64) -> Self {
        let state = lts.initial();
        LtsPlayer {
            lts,
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
            state,
        }
    }

    pub fn state(&self) -> StateId {
        self.state
    }

    fn emitting(&self) -> Vec<(Symbol, StateId)> {
        self.lts
            .transitions(self.state)
            .iter()
            .filter(|(l, _)| l.is_output_side())
            .copied()
            .collect()
    }
}

impl SutConnection for LtsPlayer {
    fn reset(&mut self) -> Result<()> {
        self.rng = ChaCha8Rng::seed_from_u64(self.seed);
        self.state = self.lts.initial();
        Ok(())
    }

    fn send(&mut self, input: Value) -> Result<()> {
        let next: Vec<StateId> = self.lts.successors(self.state, &Symbol::Input(input)).collect();
        if next.is_empty() {
            return Err(Error::Model(format!(
                "input {input} is not enabled in state {}",
                self.lts.name(self.state)
            )));
        }
        self.state = next[self.rng.gen_range(0..next.len())];
        Ok(())
    }

    fn output_pending(&mut self) -> Result<bool> {
        let edges = self.lts.transitions(self.state);
        let outputs = edges.iter().any(|(l, _)| matches!(l, Symbol::Output(_)));
        let other = edges.iter().any(|(l, _)| !matches!(l, Symbol::Output(_)));
        Ok(outputs && !other)
    }

    fn receive(&mut self, _timeout: Duration) -> Result<Symbol> {
        let options = self.emitting();
        if options.is_empty() {
            return Ok(Symbol::Quiescence);
        }
        let (label, next) = options[self.rng.gen_range(0..options.len())];
        self.state = next;
        Ok(label)
    }
}

/// Replays the outputs of a recorded trace, checking that inputs arrive in
/// the recorded order.
pub struct ReplaySut {
    trace: Trace,
    cursor: usize,
}

impl ReplaySut {
    pub fn new(trace: Trace) -> Self {
        ReplaySut { trace, cursor: 0 }
    }
}

impl SutConnection for ReplaySut {
    fn reset(&mut self) -> Result<()> {
        self.cursor = 0;
        Ok(())
    }

    fn send(&mut self, input: Value) -> Result<()> {
        match self.trace.symbols().get(self.cursor) {
            Some(Symbol::Input(v)) if *v == input => {
                self.cursor += 1;
                Ok(())
            }
            other => Err(Error::Model(format!(
                "replay expected {} at step {}, got input {input}",
                other.map_or("end of trace".to_string(), Symbol::to_string),
                self.cursor + 1
            ))),
        }
    }

    fn output_pending(&mut self) -> Result<bool> {
        Ok(matches!(self.trace.symbols().get(self.cursor), Some(Symbol::Output(_))))
    }

    fn receive(&mut self, _timeout: Duration) -> Result<Symbol> {
        match self.trace.symbols().get(self.cursor) {
            Some(s) if s.is_output_side() => {
                self.cursor += 1;
                Ok(*s)
            }
            _ => Ok(Symbol::Quiescence),
        }
    }
}

/// A child process speaking a line protocol: the tester writes `IN <v>`,
/// the process answers with zero or more `OUT <v>` lines. Silence past the
/// timeout counts as δ.
pub struct ExternalProcess {
    command: String,
    child: Option<Child>,
    stdin: Option<ChildStdin>,
    lines: Option<Receiver<String>>,
    buffered: VecDeque<Value>,
}

impl ExternalProcess {
    /// `command` runs through `sh -c`.
    pub fn new(command: &str) -> Self {
        ExternalProcess {
            command: command.to_string(),
            child: None,
            stdin: None,
            lines: None,
            buffered: VecDeque::new(),
        }
    }

    fn spawn(&mut self) -> Result<()> {
        let io_err = |e| Error::io(&self.command, e);
        let mut child = Command::new("sh")
            .arg("-c")
            .arg(&self.command)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(io_err)?;
        let stdout = child.stdout.take().expect("piped stdout");
        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                let Ok(line) = line else { break };
                if tx.send(line).is_err() {
                    break;
                }
            }
        });
        self.stdin = child.stdin.take();
        self.child = Some(child);
        self.lines = Some(rx);
        self.buffered.clear();
        Ok(())
    }

    fn kill(&mut self) {
        self.stdin = None;
        if let Some(mut child) = self.child.take() {
            let _ = child.kill();
            let _ = child.wait();
        }
        self.lines = None;
    }

    fn parse_line(line: &str) -> Result<Option<Value>> {
        let line = line.trim();
        if line.is_empty() {
            return Ok(None);
        }
        match line.split_once(' ') {
            Some(("OUT", v)) => Ok(Some(v.trim().parse()?)),
            _ => Err(Error::Parse(format!("unexpected line from system: `{line}`"))),
        }
    }

    fn drain(&mut self) -> Result<()> {
        let Some(rx) = &self.lines else { return Ok(()) };
        let got: Vec<String> = rx.try_iter().collect();
        for line in got {
            if let Some(v) = Self::parse_line(&line)? {
                self.buffered.push_back(v);
            }
        }
        Ok(())
    }
}

impl SutConnection for ExternalProcess {
    fn reset(&mut self) -> Result<()> {
        self.kill();
        self.spawn()
    }

    fn send(&mut self, input: Value) -> Result<()> {
        if self.stdin.is_none() {
            self.spawn()?;
        }
        self.drain()?;
        let stdin = self.stdin.as_mut().expect("spawned");
        writeln!(stdin, "IN {input}")
            .and_then(|_| stdin.flush())
            .map_err(|e| Error::io(&self.command, e))
    }

    fn output_pending(&mut self) -> Result<bool> {
        self.drain()?;
        Ok(!self.buffered.is_empty())
    }

    fn receive(&mut self, timeout: Duration) -> Result<Symbol> {
        self.drain()?;
        if let Some(v) = self.buffered.pop_front() {
            return Ok(Symbol::Output(v));
        }
        let Some(rx) = &self.lines else {
            return Ok(Symbol::Quiescence);
        };
        let deadline = std::time::Instant::now() + timeout;
        loop {
            let left = deadline.saturating_duration_since(std::time::Instant::now());
            match rx.recv_timeout(left) {
                Ok(line) => {
                    if let Some(v) = Self::parse_line(&line)? {
                        return Ok(Symbol::Output(v));
                    }
                }
                Err(RecvTimeoutError::Timeout) => return Ok(Symbol::Quiescence),
                Err(RecvTimeoutError::Disconnected) => {
                    // a closed stream stays silent
                    thread::sleep(left);
                    return Ok(Symbol::Quiescence);
                }
            }
        }
    }
}

impl Drop for ExternalProcess {
    fn drop(&mut self) {
        self.kill();
    }
}
