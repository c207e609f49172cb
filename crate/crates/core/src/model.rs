//! Labels, traces, projections and explicit finite labelled transition
//! systems with quiescence.
//!
//! An [`Lts`] is a finite graph whose edges carry a [`Symbol`]: an input, an
//! output, or the quiescence label δ. States are opaque string identifiers
//! mapped onto dense [`StateId`]s. A [`StandardLts`] is an LTS that has been
//! made δ-complete, either by [`quiescence_closure`] or by compiling recorded
//! traces with [`StandardLts::from_traces`].

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::path::Path;

use crate::budget::NodeBudget;
use crate::error::{Error, Result};
use crate::value::Value;

/// One observable step: an input, an output or quiescence (δ).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Symbol {
    Input(Value),
    Output(Value),
    Quiescence,
}

impl Symbol {
    pub fn is_input(&self) -> bool {
        matches!(self, Symbol::Input(_))
    }

    /// Outputs and δ are both observations made on the output side.
    pub fn is_output_side(&self) -> bool {
        !self.is_input()
    }

    pub fn value(&self) -> Option<Value> {
        match self {
            Symbol::Input(v) | Symbol::Output(v) => Some(*v),
            Symbol::Quiescence => None,
        }
    }

    pub fn project_input(&self) -> ProjectedSymbol {
        match self {
            Symbol::Input(v) => ProjectedSymbol::Input(*v),
            _ => ProjectedSymbol::MaskedInput,
        }
    }

    pub fn project_output(&self) -> ProjectedSymbol {
        match self {
            Symbol::Input(_) => ProjectedSymbol::MaskedOutput,
            Symbol::Output(v) => ProjectedSymbol::Output(*v),
            Symbol::Quiescence => ProjectedSymbol::Quiescence,
        }
    }

    /// Parses the compact label syntax `i:<v>`, `o:<v>` or `q`.
    pub fn parse_label(s: &str) -> Result<Symbol> {
        let s = s.trim();
        if s == "q" {
            return Ok(Symbol::Quiescence);
        }
        match s.split_once(':') {
            Some(("i", v)) => Ok(Symbol::Input(v.parse()?)),
            Some(("o", v)) => Ok(Symbol::Output(v.parse()?)),
            _ => Err(Error::Parse(format!("invalid label `{s}`"))),
        }
    }

    /// Parses one canonical trace record: `i <v>`, `o <v>` or `q`.
    pub fn parse_record(s: &str) -> Result<Symbol> {
        let mut parts = s.split_whitespace();
        let head = parts.next();
        let value = parts.next();
        if parts.next().is_some() {
            return Err(Error::Parse(format!("trailing fields in `{s}`")));
        }
        match (head, value) {
            (Some("q"), None) => Ok(Symbol::Quiescence),
            (Some("i"), Some(v)) => Ok(Symbol::Input(v.parse()?)),
            (Some("o"), Some(v)) => Ok(Symbol::Output(v.parse()?)),
            _ => Err(Error::Parse(format!("invalid trace record `{s}`"))),
        }
    }

    /// Renders the canonical trace-file record (`i 1.5`, `o 3`, `q`).
    pub fn record(&self) -> String {
        match self {
            Symbol::Input(v) => format!("i {v}"),
            Symbol::Output(v) => format!("o {v}"),
            Symbol::Quiescence => "q".to_string(),
        }
    }
}

/// Label syntax, as used in LTS files and run logs.
impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Symbol::Input(v) => write!(f, "i:{v}"),
            Symbol::Output(v) => write!(f, "o:{v}"),
            Symbol::Quiescence => f.write_str("q"),
        }
    }
}

/// A symbol after projecting a trace onto its inputs or its outputs.
///
/// `MaskedInput` (–i) stands in for an output-side step in an input projection
/// and `MaskedOutput` (–o) for an input step in an output projection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ProjectedSymbol {
    Input(Value),
    MaskedInput,
    Output(Value),
    MaskedOutput,
    Quiescence,
}

impl ProjectedSymbol {
    pub fn is_input_side(&self) -> bool {
        matches!(self, ProjectedSymbol::Input(_) | ProjectedSymbol::MaskedInput)
    }
}

impl fmt::Display for ProjectedSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProjectedSymbol::Input(v) => write!(f, "i:{v}"),
            ProjectedSymbol::MaskedInput => f.write_str("-i"),
            ProjectedSymbol::Output(v) => write!(f, "o:{v}"),
            ProjectedSymbol::MaskedOutput => f.write_str("-o"),
            ProjectedSymbol::Quiescence => f.write_str("q"),
        }
    }
}

/// A finite sequence of symbols. Positions are 1-based in the prose of this
/// crate; `prefix(k)` keeps the first `k` symbols.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Trace(Vec<Symbol>);

impl Trace {
    pub fn new() -> Self {
        Trace(Vec::new())
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn push(&mut self, s: Symbol) {
        self.0.push(s);
    }

    pub fn pushed(&self, s: Symbol) -> Trace {
        let mut t = self.clone();
        t.push(s);
        t
    }

    pub fn prefix(&self, k: usize) -> Trace {
        Trace(self.0[..k.min(self.0.len())].to_vec())
    }

    pub fn last(&self) -> Option<&Symbol> {
        self.0.last()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Symbol> {
        self.0.iter()
    }

    pub fn project_inputs(&self) -> Vec<ProjectedSymbol> {
        project_inputs(&self.0)
    }

    pub fn project_outputs(&self) -> Vec<ProjectedSymbol> {
        project_outputs(&self.0)
    }
}

impl From<Vec<Symbol>> for Trace {
    fn from(v: Vec<Symbol>) -> Self {
        Trace(v)
    }
}

impl FromIterator<Symbol> for Trace {
    fn from_iter<I: IntoIterator<Item = Symbol>>(iter: I) -> Self {
        Trace(iter.into_iter().collect())
    }
}

impl<'a> IntoIterator for &'a Trace {
    type Item = &'a Symbol;
    type IntoIter = std::slice::Iter<'a, Symbol>;
    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

/// Comma-separated trace records; the empty trace renders as `<empty>`.
impl fmt::Display for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("<empty>");
        }
        for (k, s) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str(", ")?;
            }
            f.write_str(&s.record())?;
        }
        Ok(())
    }
}

/// Position k holds the input at k, or –i when the step was an output or δ.
pub fn project_inputs(trace: &[Symbol]) -> Vec<ProjectedSymbol> {
    trace.iter().map(Symbol::project_input).collect()
}

/// Position k holds the output or δ at k, or –o when the step was an input.
pub fn project_outputs(trace: &[Symbol]) -> Vec<ProjectedSymbol> {
    trace.iter().map(Symbol::project_output).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StateId(pub usize);

/// An explicit finite LTS with inputs, outputs and optional δ transitions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lts {
    names: Vec<String>,
    index: HashMap<String, StateId>,
    inputs: BTreeSet<Value>,
    outputs: BTreeSet<Value>,
    // kept sorted so iteration order is deterministic
    edges: Vec<Vec<(Symbol, StateId)>>,
    initial: StateId,
}

impl Lts {
    /// Creates an LTS holding only its initial state.
    pub fn new(initial: &str) -> Self {
        let mut lts = Lts {
            names: Vec::new(),
            index: HashMap::new(),
            inputs: BTreeSet::new(),
            outputs: BTreeSet::new(),
            edges: Vec::new(),
            initial: StateId(0),
        };
        lts.initial = lts.add_state(initial);
        lts
    }

    /// Returns the id of `name`, creating the state if needed.
    pub fn add_state(&mut self, name: &str) -> StateId {
        if let Some(id) = self.index.get(name) {
            return *id;
        }
        let id = StateId(self.names.len());
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), id);
        self.edges.push(Vec::new());
        id
    }

    pub fn declare_input(&mut self, v: Value) {
        self.inputs.insert(v);
    }

    pub fn declare_output(&mut self, v: Value) {
        self.outputs.insert(v);
    }

    /// Adds a transition, extending the alphabet with its label. Duplicate
    /// transitions are ignored.
    pub fn add_transition(&mut self, from: StateId, label: Symbol, to: StateId) {
        match label {
            Symbol::Input(v) => self.declare_input(v),
            Symbol::Output(v) => self.declare_output(v),
            Symbol::Quiescence => {}
        }
        let out = &mut self.edges[from.0];
        if let Err(pos) = out.binary_search(&(label, to)) {
            out.insert(pos, (label, to));
        }
    }

    /// Convenience wrapper over [`Lts::add_state`] and [`Lts::add_transition`].
    pub fn add(&mut self, from: &str, label: Symbol, to: &str) {
        let f = self.add_state(from);
        let t = self.add_state(to);
        self.add_transition(f, label, t);
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    pub fn state_count(&self) -> usize {
        self.names.len()
    }

    pub fn states(&self) -> impl Iterator<Item = StateId> {
        (0..self.names.len()).map(StateId)
    }

    pub fn name(&self, id: StateId) -> &str {
        &self.names[id.0]
    }

    pub fn state(&self, name: &str) -> Option<StateId> {
        self.index.get(name).copied()
    }

    pub fn inputs(&self) -> &BTreeSet<Value> {
        &self.inputs
    }

    pub fn outputs(&self) -> &BTreeSet<Value> {
        &self.outputs
    }

    pub fn transitions(&self, s: StateId) -> &[(Symbol, StateId)] {
        &self.edges[s.0]
    }

    pub fn transition_count(&self) -> usize {
        self.edges.iter().map(Vec::len).sum()
    }

    pub fn successors(&self, s: StateId, label: &Symbol) -> impl Iterator<Item = StateId> + '_ {
        let label = *label;
        self.edges[s.0]
            .iter()
            .filter(move |(l, _)| *l == label)
            .map(|(_, t)| *t)
    }

    pub fn has_quiescence(&self) -> bool {
        self.edges
            .iter()
            .any(|out| out.iter().any(|(l, _)| *l == Symbol::Quiescence))
    }

    /// True iff the state has an outgoing output or δ transition.
    pub fn can_emit(&self, s: StateId) -> bool {
        self.edges[s.0].iter().any(|(l, _)| l.is_output_side())
    }

    /// True iff every state has at least one outgoing transition, so every
    /// finite trace can be extended.
    pub fn is_deadlock_free(&self) -> bool {
        self.edges.iter().all(|out| !out.is_empty())
    }

    /// True iff every state accepts every value of `inputs`.
    pub fn is_input_enabled_on<'a>(&self, inputs: impl Iterator<Item = &'a Value> + Clone) -> bool {
        self.states().all(|s| {
            inputs
                .clone()
                .all(|v| self.successors(s, &Symbol::Input(*v)).next().is_some())
        })
    }

    /// Set of states reachable from the initial state via exactly `trace`.
    pub fn after(&self, trace: &[Symbol]) -> BTreeSet<StateId> {
        let mut current: BTreeSet<StateId> = BTreeSet::from([self.initial]);
        for sym in trace {
            current = current
                .iter()
                .flat_map(|s| self.successors(*s, sym))
                .collect();
            if current.is_empty() {
                break;
            }
        }
        current
    }

    /// Union of output and δ labels enabled at `states`.
    pub fn out_set<'a>(&self, states: impl IntoIterator<Item = &'a StateId>) -> BTreeSet<Symbol> {
        states
            .into_iter()
            .flat_map(|s| self.edges[s.0].iter())
            .filter(|(l, _)| l.is_output_side())
            .map(|(l, _)| *l)
            .collect()
    }

    /// All traces of length exactly `len`, with the states each reaches.
    fn layer(&self, len: usize, budget: NodeBudget) -> Result<BTreeMap<Trace, BTreeSet<StateId>>> {
        let mut meter = budget.meter();
        let mut layer: BTreeMap<Trace, BTreeSet<StateId>> =
            BTreeMap::from([(Trace::new(), BTreeSet::from([self.initial]))]);
        for _ in 0..len {
            let mut next: BTreeMap<Trace, BTreeSet<StateId>> = BTreeMap::new();
            for (t, states) in &layer {
                for s in states {
                    for (l, to) in &self.edges[s.0] {
                        let entry = next.entry(t.pushed(*l)).or_default();
                        if entry.is_empty() {
                            meter.charge(1)?;
                        }
                        entry.insert(*to);
                    }
                }
            }
            layer = next;
        }
        Ok(layer)
    }

    /// All traces of length exactly `len`.
    pub fn traces_exact(&self, len: usize, budget: NodeBudget) -> Result<BTreeSet<Trace>> {
        Ok(self.layer(len, budget)?.into_keys().collect())
    }

    /// All traces of length at most `depth`, including the empty trace.
    pub fn traces_up_to(&self, depth: usize, budget: NodeBudget) -> Result<BTreeSet<Trace>> {
        let mut meter = budget.meter();
        let mut all = BTreeSet::from([Trace::new()]);
        let mut frontier: BTreeMap<Trace, BTreeSet<StateId>> =
            BTreeMap::from([(Trace::new(), BTreeSet::from([self.initial]))]);
        for _ in 0..depth {
            let mut next: BTreeMap<Trace, BTreeSet<StateId>> = BTreeMap::new();
            for (t, states) in &frontier {
                for s in states {
                    for (l, to) in &self.edges[s.0] {
                        next.entry(t.pushed(*l)).or_default().insert(*to);
                    }
                }
            }
            meter.charge(next.len())?;
            all.extend(next.keys().cloned());
            frontier = next;
        }
        Ok(all)
    }

    /// The smallest trace (label order) whose input projection is `word`.
    pub fn trace_with_input_projection(&self, word: &[ProjectedSymbol]) -> Option<Trace> {
        let mut dead: HashSet<(StateId, usize)> = HashSet::new();
        let mut path = Vec::with_capacity(word.len());
        if self.follow(self.initial, word, 0, &mut path, &mut dead) {
            Some(Trace(path))
        } else {
            None
        }
    }

    fn follow(
        &self,
        s: StateId,
        word: &[ProjectedSymbol],
        pos: usize,
        path: &mut Vec<Symbol>,
        dead: &mut HashSet<(StateId, usize)>,
    ) -> bool {
        if pos == word.len() {
            return true;
        }
        if dead.contains(&(s, pos)) {
            return false;
        }
        for (l, to) in &self.edges[s.0] {
            if l.project_input() != word[pos] {
                continue;
            }
            path.push(*l);
            if self.follow(*to, word, pos + 1, path, dead) {
                return true;
            }
            path.pop();
        }
        dead.insert((s, pos));
        false
    }

    /// Parses the line-oriented LTS format.
    ///
    /// ```text
    /// initial s0
    /// input 1 2
    /// output 1
    /// s0<TAB>i:1<TAB>s1
    /// s1<TAB>o:1<TAB>s2
    /// ```
    ///
    /// Lines containing a tab are transitions; other lines are headers.
    /// Blank lines and lines starting with `#` are ignored.
    pub fn parse(text: &str) -> Result<Lts> {
        let at = |line: usize, msg: String| Error::Parse(format!("line {line}: {msg}"));
        let mut initial: Option<String> = None;
        let mut inputs = BTreeSet::new();
        let mut outputs = BTreeSet::new();
        let mut transitions = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line_no = n + 1;
            let line = raw.trim_end_matches('\r');
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            if line.contains('\t') {
                let fields: Vec<&str> = line.split('\t').map(str::trim).collect();
                if fields.len() != 3 || fields.iter().any(|f| f.is_empty()) {
                    return Err(at(line_no, "expected `state<TAB>label<TAB>state`".into()));
                }
                let label = Symbol::parse_label(fields[1]).map_err(|e| at(line_no, e.to_string()))?;
                transitions.push((line_no, fields[0].to_string(), label, fields[2].to_string()));
                continue;
            }
            let mut words = line.split_whitespace();
            match words.next() {
                Some("initial") => {
                    let name = words
                        .next()
                        .ok_or_else(|| at(line_no, "missing initial state".into()))?;
                    initial = Some(name.to_string());
                }
                Some("input") => {
                    for w in words {
                        inputs.insert(w.parse::<Value>().map_err(|e| at(line_no, e.to_string()))?);
                    }
                }
                Some("output") => {
                    for w in words {
                        outputs.insert(w.parse::<Value>().map_err(|e| at(line_no, e.to_string()))?);
                    }
                }
                _ => return Err(at(line_no, format!("unrecognised line `{line}`"))),
            }
        }
        let initial = initial.ok_or_else(|| Error::Parse("missing `initial` header".into()))?;
        let mut lts = Lts::new(&initial);
        lts.inputs = inputs;
        lts.outputs = outputs;
        for (line_no, from, label, to) in transitions {
            let declared = match label {
                Symbol::Input(v) => lts.inputs.contains(&v),
                Symbol::Output(v) => lts.outputs.contains(&v),
                Symbol::Quiescence => true,
            };
            if !declared {
                return Err(at(line_no, format!("label {label} is not in the declared alphabet")));
            }
            lts.add(&from, label, &to);
        }
        Ok(lts)
    }

    pub fn load(path: &Path) -> Result<Lts> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Lts::parse(&text).map_err(|e| match e {
            Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Renders the LTS in the format accepted by [`Lts::parse`].
    pub fn render(&self) -> String {
        let mut out = format!("initial {}\n", self.name(self.initial));
        let join = |set: &BTreeSet<Value>| {
            set.iter().map(Value::to_string).collect::<Vec<_>>().join(" ")
        };
        out.push_str(&format!("input {}\n", join(&self.inputs)));
        out.push_str(&format!("output {}\n", join(&self.outputs)));
        for s in self.states() {
            for (l, t) in self.transitions(s) {
                out.push_str(&format!("{}\t{}\t{}\n", self.name(s), l, self.name(*t)));
            }
        }
        out
    }
}

/// A δ-complete standard behaviour.
///
/// `closed` records that δ has been made explicit: for closures of explicit
/// systems every state can emit an output or δ; for standards compiled from
/// recorded traces δ loops sit where recorded traces end.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StandardLts {
    lts: Lts,
    closed: bool,
}

impl StandardLts {
    /// Wraps an LTS without closing it.
    pub fn open(lts: Lts) -> Self {
        StandardLts { lts, closed: false }
    }

    pub fn lts(&self) -> &Lts {
        &self.lts
    }

    pub fn into_lts(self) -> Lts {
        self.lts
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    /// Compiles recorded traces into a tree sharing the root, so that its
    /// maximal traces are exactly the recorded traces followed by δ forever.
    /// Duplicate traces collapse onto a single path.
    pub fn from_traces<'a>(traces: impl IntoIterator<Item = &'a Trace>) -> StandardLts {
        let mut lts = Lts::new("n");
        let mut ends = BTreeSet::new();
        let mut children: HashMap<(StateId, Symbol), StateId> = HashMap::new();
        for trace in traces {
            let mut at = lts.initial();
            for sym in trace {
                at = match children.get(&(at, *sym)) {
                    Some(next) => *next,
                    None => {
                        let name = format!("n{}", lts.state_count());
                        let next = lts.add_state(&name);
                        lts.add_transition(at, *sym, next);
                        children.insert((at, *sym), next);
                        next
                    }
                };
            }
            ends.insert(at);
        }
        for s in ends {
            lts.add_transition(s, Symbol::Quiescence, s);
        }
        StandardLts { lts, closed: true }
    }

    pub fn after(&self, trace: &[Symbol]) -> BTreeSet<StateId> {
        self.lts.after(trace)
    }

    pub fn out_set<'a>(&self, states: impl IntoIterator<Item = &'a StateId>) -> BTreeSet<Symbol> {
        self.lts.out_set(states)
    }

    pub fn traces_exact(&self, len: usize, budget: NodeBudget) -> Result<BTreeSet<Trace>> {
        self.lts.traces_exact(len, budget)
    }
}

/// Adds a δ self-loop to exactly those states that cannot emit an output.
///
/// An existing δ loop counts as "can proceed", so closing an already closed
/// system adds nothing.
pub fn quiescence_closure(lts: &Lts) -> StandardLts {
    let mut closed = lts.clone();
    let quiescent: Vec<StateId> = closed.states().filter(|s| !closed.can_emit(*s)).collect();
    for s in quiescent {
        closed.add_transition(s, Symbol::Quiescence, s);
    }
    StandardLts {
        lts: closed,
        closed: true,
    }
}

/// Outcome of the bounded "standard for" check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StandardCheck {
    pub holds: bool,
    /// Depth up to which the check was carried out.
    pub depth: usize,
    /// A trace of the implementation sharing its input projection with a
    /// trace of the candidate without being a trace of the candidate.
    pub counterexample: Option<Trace>,
}

/// Checks, up to `depth`, that every trace of `implementation` whose input
/// projection occurs in `candidate` is itself a trace of `candidate`.
///
/// A negative answer is definitive; a positive one holds up to `depth`.
pub fn is_standard_for(
    candidate: &Lts,
    implementation: &Lts,
    depth: usize,
    budget: NodeBudget,
) -> Result<StandardCheck> {
    let cand = candidate.traces_up_to(depth, budget)?;
    let imp = implementation.traces_up_to(depth, budget)?;
    let projections: HashSet<Vec<ProjectedSymbol>> = cand.iter().map(Trace::project_inputs).collect();
    let counterexample = imp
        .iter()
        .find(|t| projections.contains(&t.project_inputs()) && !cand.contains(*t))
        .cloned();
    Ok(StandardCheck {
        holds: counterexample.is_none(),
        depth,
        counterexample,
    })
}
