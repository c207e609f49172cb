//! The bounded acceptance oracle, the bounded reference implementation built
//! from it, and brute-force bounded checks for ioco and robust cleanness.
//!
//! The oracle never enumerates histories. It tracks a [`Tube`]: the standard
//! input projections that stay within κ_in of the history so far, grouped by
//! the set of standard states they reach. At an output position each group
//! contributes the output sets that every length-`b` completion of it
//! demands; an output is acceptable iff it lies within κ_out of some member of
//! every demanded set.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::rc::Rc;

use crate::budget::{Meter, NodeBudget};
use crate::contract::{Contract, ValueDomain};
use crate::error::{Error, Result};
use crate::model::{Lts, ProjectedSymbol, StateId, Symbol, Trace};
use crate::value::Value;

#[derive(Debug)]
struct Link {
    head: ProjectedSymbol,
    tail: Word,
}

type Word = Option<Rc<Link>>;

fn cons(head: ProjectedSymbol, tail: &Word) -> Word {
    Some(Rc::new(Link {
        head,
        tail: tail.clone(),
    }))
}

fn unroll(word: &Word) -> Vec<ProjectedSymbol> {
    let mut out = Vec::new();
    let mut at = word;
    while let Some(link) = at {
        out.push(link.head);
        at = &link.tail;
    }
    out
}

/// Identifies a tube up to the futures it allows: one sorted state set per group.
pub type TubeKey = Vec<Vec<StateId>>;

/// Standard input projections within κ_in of a history, grouped by the
/// standard states they reach.
#[derive(Debug, Clone)]
pub struct Tube {
    len: usize,
    // value: one representative projection, stored last letter first
    classes: BTreeMap<Vec<StateId>, Word>,
}

impl Tube {
    /// Length of the history this tube follows.
    pub fn len(&self) -> usize {
        self.len
    }

    /// True once the history has left every standard input tube; every
    /// output is then acceptable.
    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn class_count(&self) -> usize {
        self.classes.len()
    }

    pub fn key(&self) -> TubeKey {
        self.classes.keys().cloned().collect()
    }

    /// Standard inputs enabled at any tracked state.
    pub fn enabled_inputs(&self, lts: &Lts) -> BTreeSet<Value> {
        self.classes
            .keys()
            .flatten()
            .flat_map(|s| lts.transitions(*s))
            .filter_map(|(l, _)| match l {
                Symbol::Input(v) => Some(*v),
                _ => None,
            })
            .collect()
    }

    /// True iff some tracked state can emit an output or δ.
    pub fn expects_output(&self, lts: &Lts) -> bool {
        self.classes.keys().flatten().any(|s| lts.can_emit(*s))
    }

    /// One representative standard input projection per group.
    pub fn representatives(&self) -> Vec<Vec<ProjectedSymbol>> {
        self.classes
            .values()
            .map(|w| {
                let mut v = unroll(w);
                v.reverse();
                v
            })
            .collect()
    }
}

/// A set of output-side observations all of which some standard completion
/// can produce, together with that completion's input projection.
#[derive(Debug, Clone)]
pub struct Obligation {
    outs: BTreeSet<Symbol>,
    prefix: Word,
    completion: Word,
}

impl Obligation {
    pub fn outs(&self) -> &BTreeSet<Symbol> {
        &self.outs
    }

    /// The full-length standard input projection behind this obligation.
    pub fn input_projection(&self) -> Vec<ProjectedSymbol> {
        let mut word = unroll(&self.prefix);
        word.reverse();
        word.push(ProjectedSymbol::MaskedInput);
        word.extend(unroll(&self.completion));
        word
    }

    fn admits(&self, o: &Symbol, kappa_out: Value) -> bool {
        match o {
            Symbol::Output(v) => self
                .outs
                .range(Symbol::Output(*v - kappa_out)..=Symbol::Output(*v + kappa_out))
                .next()
                .is_some(),
            Symbol::Quiescence => self.outs.contains(&Symbol::Quiescence),
            Symbol::Input(_) => false,
        }
    }

    fn acceptance(&self, domain: ValueDomain, kappa_out: Value) -> AcceptanceSet {
        let mut intervals: Vec<(Value, Value)> = Vec::new();
        for e in &self.outs {
            if let Symbol::Output(v) = e {
                let lo = (*v - kappa_out).max(domain.lower());
                let hi = (*v + kappa_out).min(domain.upper());
                if lo > hi {
                    continue;
                }
                match intervals.last_mut() {
                    Some(last) if lo <= last.1 => last.1 = last.1.max(hi),
                    _ => intervals.push((lo, hi)),
                }
            }
        }
        AcceptanceSet {
            domain,
            quiescence: self.outs.contains(&Symbol::Quiescence),
            intervals,
            vacuous: false,
        }
    }
}

/// Everything an output at the current position must satisfy.
#[derive(Debug, Clone)]
pub struct Obligations {
    position: usize,
    kappa_out: Value,
    items: Vec<Obligation>,
}

impl Obligations {
    /// Position (0-based) of the output being judged.
    pub fn position(&self) -> usize {
        self.position
    }

    /// No standard branch constrains this position.
    pub fn is_vacuous(&self) -> bool {
        self.items.is_empty()
    }

    pub fn items(&self) -> &[Obligation] {
        &self.items
    }

    pub fn accepts(&self, o: &Symbol) -> bool {
        o.is_output_side() && self.items.iter().all(|ob| ob.admits(o, self.kappa_out))
    }

    fn failing(&self, o: &Symbol) -> impl Iterator<Item = &Obligation> + '_ {
        let o = *o;
        self.items.iter().filter(move |ob| !ob.admits(&o, self.kappa_out))
    }
}

/// The bounded acceptance set: outputs on the grid (as closed intervals) plus
/// possibly δ.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AcceptanceSet {
    domain: ValueDomain,
    quiescence: bool,
    intervals: Vec<(Value, Value)>,
    vacuous: bool,
}

impl AcceptanceSet {
    fn everything(domain: ValueDomain) -> Self {
        AcceptanceSet {
            domain,
            quiescence: true,
            intervals: vec![(domain.lower(), domain.upper())],
            vacuous: true,
        }
    }

    fn intersect(&self, other: &AcceptanceSet) -> AcceptanceSet {
        let mut out = Vec::new();
        let (mut a, mut b) = (0, 0);
        while a < self.intervals.len() && b < other.intervals.len() {
            let (l1, h1) = self.intervals[a];
            let (l2, h2) = other.intervals[b];
            let lo = l1.max(l2);
            let hi = h1.min(h2);
            if lo <= hi {
                out.push((lo, hi));
            }
            if h1 < h2 {
                a += 1;
            } else {
                b += 1;
            }
        }
        AcceptanceSet {
            domain: self.domain,
            quiescence: self.quiescence && other.quiescence,
            intervals: out,
            vacuous: self.vacuous && other.vacuous,
        }
    }

    /// True when no standard branch constrained the position, so the set is
    /// all of Out ∪ {δ}.
    pub fn is_vacuous(&self) -> bool {
        self.vacuous
    }

    pub fn allows_quiescence(&self) -> bool {
        self.quiescence
    }

    /// Closed real intervals whose grid points are accepted.
    pub fn intervals(&self) -> &[(Value, Value)] {
        &self.intervals
    }

    pub fn contains(&self, s: &Symbol) -> bool {
        match s {
            Symbol::Output(v) => self.domain.contains(*v) && self.intervals.iter().any(|(lo, hi)| lo <= v && v <= hi),
            Symbol::Quiescence => self.quiescence,
            Symbol::Input(_) => false,
        }
    }

    /// Accepted grid outputs in ascending order.
    pub fn outputs(&self) -> impl Iterator<Item = Value> + '_ {
        self.intervals
            .iter()
            .flat_map(|(lo, hi)| self.domain.points_between(*lo, *hi))
    }

    /// Accepted outputs followed by δ when accepted.
    pub fn symbols(&self) -> impl Iterator<Item = Symbol> + '_ {
        self.outputs()
            .map(Symbol::Output)
            .chain(self.quiescence.then_some(Symbol::Quiescence))
    }

    pub fn is_empty(&self) -> bool {
        !self.quiescence && self.outputs().next().is_none()
    }

    pub fn to_set(&self) -> BTreeSet<Symbol> {
        self.symbols().collect()
    }
}

impl fmt::Display for AcceptanceSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = self
            .intervals
            .iter()
            .map(|(lo, hi)| if lo == hi { format!("{{{lo}}}") } else { format!("[{lo}, {hi}]") })
            .collect();
        if self.quiescence {
            parts.push("q".into());
        }
        if parts.is_empty() {
            f.write_str("{}")
        } else {
            f.write_str(&parts.join(" | "))
        }
    }
}

type Pairs = Vec<(StateId, Symbol)>;
type Collection = Rc<Vec<(BTreeSet<Symbol>, Word)>>;

/// The bounded acceptance oracle for one contract and bound `b`.
pub struct Oracle<'c> {
    contract: &'c Contract,
    bound: usize,
    deadlock_free: bool,
    memo: RefCell<HashMap<(Pairs, usize), Collection>>,
    meter: RefCell<Meter>,
}

impl<'c> Oracle<'c> {
    pub fn new(contract: &'c Contract, bound: usize) -> Self {
        Oracle::with_budget(contract, bound, NodeBudget::DEFAULT)
    }

    pub fn with_budget(contract: &'c Contract, bound: usize, budget: NodeBudget) -> Self {
        Oracle {
            contract,
            bound,
            deadlock_free: contract.standard().lts().is_deadlock_free(),
            memo: RefCell::new(HashMap::new()),
            meter: RefCell::new(budget.meter()),
        }
    }

    pub fn contract(&self) -> &'c Contract {
        self.contract
    }

    pub fn bound(&self) -> usize {
        self.bound
    }

    fn lts(&self) -> &'c Lts {
        self.contract.standard().lts()
    }

    /// The tube of the empty history.
    pub fn tube(&self) -> Tube {
        Tube {
            len: 0,
            classes: BTreeMap::from([(vec![self.lts().initial()], None)]),
        }
    }

    /// The tube after appending `sym` to the history.
    pub fn advance(&self, tube: &Tube, sym: &Symbol) -> Tube {
        let lts = self.lts();
        let mut classes: BTreeMap<Vec<StateId>, Word> = BTreeMap::new();
        for (states, word) in &tube.classes {
            match sym {
                Symbol::Input(v) => {
                    let mut by_letter: BTreeMap<Value, BTreeSet<StateId>> = BTreeMap::new();
                    for s in states {
                        for (l, t) in lts.transitions(*s) {
                            if let Symbol::Input(u) = l {
                                if self.contract.inputs_close(*u, *v) {
                                    by_letter.entry(*u).or_default().insert(*t);
                                }
                            }
                        }
                    }
                    for (u, next) in by_letter {
                        classes
                            .entry(next.into_iter().collect())
                            .or_insert_with(|| cons(ProjectedSymbol::Input(u), word));
                    }
                }
                _ => {
                    let next: BTreeSet<StateId> = states
                        .iter()
                        .flat_map(|s| lts.transitions(*s))
                        .filter(|(l, _)| l.is_output_side())
                        .map(|(_, t)| *t)
                        .collect();
                    if !next.is_empty() {
                        classes
                            .entry(next.into_iter().collect())
                            .or_insert_with(|| cons(ProjectedSymbol::MaskedInput, word));
                    }
                }
            }
        }
        Tube {
            len: tube.len + 1,
            classes,
        }
    }

    pub fn tube_after(&self, history: &[Symbol]) -> Tube {
        history.iter().fold(self.tube(), |t, s| self.advance(&t, s))
    }

    /// The obligations an output at position `tube.len()` must meet.
    pub fn obligations(&self, tube: &Tube) -> Result<Obligations> {
        if tube.len >= self.bound {
            return Err(Error::Bound {
                len: tube.len,
                bound: self.bound,
            });
        }
        let lts = self.lts();
        let remaining = self.bound - tube.len - 1;
        let mut items = Vec::new();
        for (states, word) in &tube.classes {
            let pairs: BTreeSet<(StateId, Symbol)> = states
                .iter()
                .flat_map(|s| lts.transitions(*s))
                .filter(|(l, _)| l.is_output_side())
                .map(|(l, t)| (*t, *l))
                .collect();
            if pairs.is_empty() {
                continue;
            }
            for (outs, completion) in self.collection(pairs.into_iter().collect(), remaining)?.iter() {
                items.push(Obligation {
                    outs: outs.clone(),
                    prefix: word.clone(),
                    completion: completion.clone(),
                });
            }
        }
        let items = minimal(items, |ob| &ob.outs);
        Ok(Obligations {
            position: tube.len,
            kappa_out: self.contract.kappa_out(),
            items,
        })
    }

    /// The minimal output sets produced by completions of length `remaining`
    /// from `pairs` (successor state, emitted label).
    fn collection(&self, pairs: Pairs, remaining: usize) -> Result<Collection> {
        let key = (pairs, remaining);
        if let Some(hit) = self.memo.borrow().get(&key) {
            return Ok(hit.clone());
        }
        self.meter.borrow_mut().charge(1)?;
        let (pairs, remaining) = &key;
        let lts = self.lts();
        let labels: BTreeSet<Symbol> = pairs.iter().map(|(_, l)| *l).collect();
        let result: Vec<(BTreeSet<Symbol>, Word)> = if *remaining == 0 {
            vec![(labels, None)]
        } else if self.deadlock_free && labels.len() == 1 {
            vec![(labels, self.any_completion(pairs[0].0, *remaining))]
        } else {
            let mut by_letter: BTreeMap<ProjectedSymbol, BTreeSet<(StateId, Symbol)>> = BTreeMap::new();
            for (t, l) in pairs {
                for (lab, next) in lts.transitions(*t) {
                    by_letter.entry(lab.project_input()).or_default().insert((*next, *l));
                }
            }
            let mut all = Vec::new();
            for (letter, group) in by_letter {
                let sub = self.collection(group.into_iter().collect(), remaining - 1)?;
                all.extend(sub.iter().map(|(outs, w)| (outs.clone(), cons(letter, w))));
            }
            minimal(all, |(outs, _)| outs)
        };
        let result = Rc::new(result);
        self.memo.borrow_mut().insert(key, result.clone());
        Ok(result)
    }

    fn any_completion(&self, from: StateId, len: usize) -> Word {
        let lts = self.lts();
        let mut letters = Vec::with_capacity(len);
        let mut at = from;
        for _ in 0..len {
            let (l, t) = lts.transitions(at)[0];
            letters.push(l.project_input());
            at = t;
        }
        letters.into_iter().rev().fold(None, |w, l| cons(l, &w))
    }

    pub fn acceptance(&self, tube: &Tube) -> Result<AcceptanceSet> {
        let obligations = self.obligations(tube)?;
        Ok(self.acceptance_of(&obligations))
    }

    pub fn acceptance_of(&self, obligations: &Obligations) -> AcceptanceSet {
        let domain = *self.contract.output_domain();
        let mut acc = AcceptanceSet::everything(domain);
        for ob in &obligations.items {
            acc = acc.intersect(&ob.acceptance(domain, obligations.kappa_out));
        }
        acc
    }

    pub fn accepts(&self, tube: &Tube, o: &Symbol) -> Result<bool> {
        Ok(self.obligations(tube)?.accepts(o))
    }

    fn concrete(&self, ob: &Obligation) -> Trace {
        self.lts()
            .trace_with_input_projection(&ob.input_projection())
            .expect("obligation words are standard input projections")
    }

    /// A full-length standard trace whose required outputs `o` misses; the
    /// smallest such trace among the failing obligations.
    pub fn rejection_witness(&self, obligations: &Obligations, o: &Symbol) -> Option<Trace> {
        obligations.failing(o).map(|ob| self.concrete(ob)).min()
    }

    /// Standard traces whose demands cannot be met together: a pair with
    /// disjoint acceptance when one exists, otherwise all of them.
    pub fn conflicting_branches(&self, obligations: &Obligations) -> Vec<Trace> {
        let domain = *self.contract.output_domain();
        let sets: Vec<AcceptanceSet> = obligations
            .items
            .iter()
            .map(|ob| ob.acceptance(domain, obligations.kappa_out))
            .collect();
        for a in 0..sets.len() {
            for b in a + 1..sets.len() {
                if sets[a].intersect(&sets[b]).is_empty() {
                    return vec![self.concrete(&obligations.items[a]), self.concrete(&obligations.items[b])];
                }
            }
        }
        obligations.items.iter().map(|ob| self.concrete(ob)).collect()
    }
}

/// Keeps the members whose set has no proper subset (or earlier equal set)
/// among the others.
fn minimal<T>(items: Vec<T>, set: impl Fn(&T) -> &BTreeSet<Symbol>) -> Vec<T> {
    let mut order: Vec<usize> = (0..items.len()).collect();
    order.sort_by_key(|k| set(&items[*k]).len());
    let mut keep: Vec<usize> = Vec::new();
    for k in order {
        if !keep.iter().any(|j| set(&items[*j]).is_subset(set(&items[k]))) {
            keep.push(k);
        }
    }
    keep.sort_unstable();
    let mut slots: Vec<Option<T>> = items.into_iter().map(Some).collect();
    keep.into_iter().map(|k| slots[k].take().unwrap()).collect()
}

/// `acc_b(h)` computed from scratch.
pub fn acc_b(contract: &Contract, history: &[Symbol], bound: usize) -> Result<AcceptanceSet> {
    let oracle = Oracle::new(contract, bound);
    oracle.acceptance(&oracle.tube_after(history))
}

/// The reference implementation unfolded up to `depth`: states are
/// histories, every grid input is enabled and the enabled outputs are the
/// bounded acceptance set.
#[derive(Debug, Clone)]
pub struct BoundedReference {
    depth: usize,
    enabled: BTreeMap<Trace, BTreeSet<Symbol>>,
}

pub fn build_reference_bounded(contract: &Contract, depth: usize, budget: NodeBudget) -> Result<BoundedReference> {
    let oracle = Oracle::with_budget(contract, depth, budget);
    let mut meter = budget.meter();
    let mut enabled = BTreeMap::new();
    let inputs: Vec<Symbol> = contract.input_domain().points().map(Symbol::Input).collect();
    let mut stack = vec![(Trace::new(), oracle.tube())];
    while let Some((h, tube)) = stack.pop() {
        meter.charge(1)?;
        if h.len() == depth {
            enabled.insert(h, BTreeSet::new());
            continue;
        }
        let mut labels: BTreeSet<Symbol> = inputs.iter().copied().collect();
        labels.extend(oracle.acceptance(&tube)?.symbols());
        for l in &labels {
            stack.push((h.pushed(*l), oracle.advance(&tube, l)));
        }
        enabled.insert(h, labels);
    }
    Ok(BoundedReference { depth, enabled })
}

impl BoundedReference {
    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn len(&self) -> usize {
        self.enabled.len()
    }

    pub fn is_empty(&self) -> bool {
        self.enabled.is_empty()
    }

    /// Histories ordered by length, then lexicographically.
    pub fn histories(&self) -> Vec<&Trace> {
        let mut hs: Vec<&Trace> = self.enabled.keys().collect();
        hs.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        hs
    }

    pub fn enabled(&self, history: &Trace) -> Option<&BTreeSet<Symbol>> {
        self.enabled.get(history)
    }

    /// Enabled outputs and δ after `history`; empty for unknown histories.
    pub fn out_set(&self, history: &Trace) -> BTreeSet<Symbol> {
        self.enabled
            .get(history)
            .map(|e| e.iter().filter(|l| l.is_output_side()).copied().collect())
            .unwrap_or_default()
    }

    /// An explicit LTS with one state per history.
    pub fn to_lts(&self) -> Lts {
        let names: BTreeMap<&Trace, String> = self
            .histories()
            .into_iter()
            .enumerate()
            .map(|(k, h)| (h, format!("r{k}")))
            .collect();
        let mut lts = Lts::new(&names[&Trace::new()]);
        for (h, labels) in &self.enabled {
            for l in labels {
                lts.add(&names[h], *l, &names[&h.pushed(*l)]);
            }
        }
        lts
    }

    /// One line per history: `history | enabled: labels`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for h in self.histories() {
            let labels: Vec<String> = self.enabled[h].iter().map(Symbol::to_string).collect();
            out.push_str(&format!("{h} | enabled: {}\n", labels.join(" ")));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IocoVerdict {
    ConformsUpTo { depth: usize },
    Violation { history: Trace, output: Symbol },
}

/// Checks `out(impl after σ) ⊆ out(R after σ)` for every history σ of the
/// reference shorter than its depth, shortest histories first.
pub fn ioco_check_bounded(implementation: &Lts, reference: &BoundedReference) -> IocoVerdict {
    for h in reference.histories() {
        if h.len() >= reference.depth() {
            break;
        }
        let after = implementation.after(h.symbols());
        if after.is_empty() {
            continue;
        }
        let allowed = reference.out_set(h);
        if let Some(o) = implementation.out_set(&after).into_iter().find(|o| !allowed.contains(o)) {
            return IocoVerdict::Violation {
                history: h.clone(),
                output: o,
            };
        }
    }
    IocoVerdict::ConformsUpTo {
        depth: reference.depth(),
    }
}

/// Witnesses of a violated cleanness condition: standard trace σ, trace σ′
/// of the implementation and the 1-based position k.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CounterExample {
    pub condition: u8,
    pub sigma: Trace,
    pub sigma_prime: Trace,
    pub k: usize,
}

impl fmt::Display for CounterExample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "condition {} fails at k={}: standard [{}] vs [{}]",
            self.condition, self.k, self.sigma, self.sigma_prime
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Cleanness {
    CleanUpTo { depth: usize },
    CounterExample(CounterExample),
}

impl Cleanness {
    pub fn is_clean(&self) -> bool {
        matches!(self, Cleanness::CleanUpTo { .. })
    }
}

/// Exhaustively checks both ∀∃ cleanness conditions over all traces of
/// length `depth` of `implementation` (which should be δ-complete).
/// Condition 2 is reported first when both fail for the same pair.
pub fn robustly_clean_bounded(
    implementation: &Lts,
    contract: &Contract,
    depth: usize,
    budget: NodeBudget,
) -> Result<Cleanness> {
    let traces = implementation.traces_exact(depth, budget)?;
    let standard = contract.standard();
    let kappa_in = contract.kappa_in();
    let kappa_out = contract.kappa_out();

    // output observations per input projection and position
    let mut by_projection: HashMap<Vec<ProjectedSymbol>, Vec<BTreeSet<ProjectedSymbol>>> = HashMap::new();
    for t in &traces {
        let slots = by_projection
            .entry(t.project_inputs())
            .or_insert_with(|| vec![BTreeSet::new(); depth]);
        for (k, p) in t.project_outputs().into_iter().enumerate() {
            slots[k].insert(p);
        }
    }
    let matched = |proj: &[ProjectedSymbol], k: usize, target: &ProjectedSymbol| -> Result<bool> {
        let Some(slots) = by_projection.get(proj) else {
            return Ok(false);
        };
        for p in &slots[k] {
            if contract.d_out().output(target, p)?.within(kappa_out) {
                return Ok(true);
            }
        }
        Ok(false)
    };

    for sigma in traces.iter().filter(|t| !standard.after(t.symbols()).is_empty()) {
        let si = sigma.project_inputs();
        let so = sigma.project_outputs();
        for sigma_prime in &traces {
            let pi = sigma_prime.project_inputs();
            let po = sigma_prime.project_outputs();
            for k in 0..depth {
                if !contract.d_in().input(&si[k], &pi[k])?.within(kappa_in) {
                    break;
                }
                if !matched(&si, k, &po[k])? {
                    return Ok(Cleanness::CounterExample(CounterExample {
                        condition: 2,
                        sigma: sigma.clone(),
                        sigma_prime: sigma_prime.clone(),
                        k: k + 1,
                    }));
                }
                if !matched(&pi, k, &so[k])? {
                    return Ok(Cleanness::CounterExample(CounterExample {
                        condition: 1,
                        sigma: sigma.clone(),
                        sigma_prime: sigma_prime.clone(),
                        k: k + 1,
                    }));
                }
            }
        }
    }
    Ok(Cleanness::CleanUpTo { depth })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contract::Thresholds;
    use crate::model::quiescence_closure;
    use crate::model::tests::{branching, i, o, v, Q};

    fn grid(lo: &str, hi: &str, step: &str) -> ValueDomain {
        ValueDomain::new(v(lo), v(hi), v(step)).unwrap()
    }

    fn branching_contract() -> Contract {
        Contract::new(
            grid("2", "8", "0.5"),
            grid("2", "9", "0.5"),
            Thresholds::new(v("1"), v("1")).unwrap(),
            quiescence_closure(&branching()),
        )
        .unwrap()
    }

    fn single(trace: &[Symbol], kin: &str, kout: &str) -> Contract {
        Contract::from_recorded(
            grid("0", "4", "0.5"),
            grid("0", "4", "0.5"),
            Thresholds::new(v(kin), v(kout)).unwrap(),
            &[Trace::from(trace.to_vec())],
        )
        .unwrap()
    }

    fn outs(lo: &str, hi: &str) -> BTreeSet<Symbol> {
        grid("2", "9", "0.5")
            .points()
            .filter(|x| *x >= v(lo) && *x <= v(hi))
            .map(Symbol::Output)
            .collect()
    }

    #[test]
    fn branching_acceptance_sets() {
        let c = branching_contract();
        // inputs in [i - κ_in, i) enable o + [-κ_out, 2κ_out]
        for x in ["4", "4.5"] {
            let acc = acc_b(&c, &[i(x)], 3).unwrap();
            assert_eq!(acc.to_set(), outs("4", "7"), "after i:{x}");
        }
        // inputs in [i, i + 2κ_in] enable o + [0, 2κ_out]
        for x in ["5", "5.5", "6", "6.5", "7"] {
            let acc = acc_b(&c, &[i(x)], 3).unwrap();
            assert_eq!(acc.to_set(), outs("5", "7"), "after i:{x}");
        }
        // other inputs leave everything open
        for x in ["2", "3.5", "7.5", "8"] {
            let acc = acc_b(&c, &[i(x)], 3).unwrap();
            assert!(acc.is_vacuous());
            assert_eq!(acc.to_set().len(), grid("2", "9", "0.5").len() + 1);
        }
        // initially only δ is demanded
        assert_eq!(acc_b(&c, &[], 3).unwrap().to_set(), BTreeSet::from([Q]));
    }

    #[test]
    fn single_trace_tube() {
        let c = single(&[i("1"), o("1")], "0.2", "0.5");
        // the standard demands an input first, so nothing constrains position 1
        assert!(acc_b(&c, &[], 3).unwrap().is_vacuous());
        assert_eq!(
            acc_b(&c, &[i("1")], 3).unwrap().to_set(),
            BTreeSet::from([Symbol::Output(v("0.5")), o("1"), o("1.5")])
        );
        assert_eq!(acc_b(&c, &[i("1"), o("1.5")], 3).unwrap().to_set(), BTreeSet::from([Q]));
        assert!(acc_b(&c, &[i("3")], 3).unwrap().is_vacuous());
        assert!(matches!(acc_b(&c, &[i("1")], 1), Err(Error::Bound { len: 1, bound: 1 })));
    }

    #[test]
    fn nearby_input_accepts_outputs_around_the_standard() {
        let c = Contract::from_recorded(
            grid("0", "4", "0.1"),
            grid("0", "4", "0.5"),
            Thresholds::new(v("0.2"), v("0.5")).unwrap(),
            &[Trace::from(vec![i("1"), o("1"), Q])],
        )
        .unwrap();
        assert_eq!(
            acc_b(&c, &[i("1.1")], 3).unwrap().to_set(),
            BTreeSet::from([o("0.5"), o("1"), o("1.5")])
        );
    }

    #[test]
    fn tube_classes_and_representatives() {
        let c = branching_contract();
        let oracle = Oracle::new(&c, 3);
        let t = oracle.advance(&oracle.tube(), &i("5.5"));
        assert_eq!(t.class_count(), 2);
        let reps = t.representatives();
        assert!(reps.contains(&vec![ProjectedSymbol::Input(v("5"))]));
        assert!(reps.contains(&vec![ProjectedSymbol::Input(v("6"))]));
        assert!(t.expects_output(c.standard().lts()));
        assert!(oracle.advance(&t, &o("5")).len() == 2);
    }

    #[test]
    fn rejection_witness_is_a_standard_trace() {
        let c = branching_contract();
        let oracle = Oracle::new(&c, 3);
        let t = oracle.tube_after(&[i("5")]);
        let obligations = oracle.obligations(&t).unwrap();
        assert!(!obligations.accepts(&o("8")));
        let w = oracle.rejection_witness(&obligations, &o("8")).unwrap();
        assert_eq!(w.len(), 3);
        assert!(!c.standard().after(w.symbols()).is_empty());
        // {o:6} is the tightest demand, coming from the i:6 branch
        assert_eq!(w.symbols()[..2], [i("6"), o("6")]);
        assert!(oracle.rejection_witness(&obligations, &o("6")).is_none());
    }

    #[test]
    fn reference_dump_and_determinism() {
        let c = single(&[i("1"), o("1")], "0", "0");
        let r = build_reference_bounded(&c, 2, NodeBudget::DEFAULT).unwrap();
        let dump = r.dump();
        assert!(dump.starts_with("<empty> | enabled: i:0 i:0.5 i:1"));
        assert!(dump.lines().any(|l| l == "i 1 | enabled: i:0 i:0.5 i:1 i:1.5 i:2 i:2.5 i:3 i:3.5 i:4 o:1"));
        let lts = r.to_lts();
        for s in lts.states() {
            let labels: Vec<Symbol> = lts.transitions(s).iter().map(|(l, _)| *l).collect();
            let unique: BTreeSet<Symbol> = labels.iter().copied().collect();
            assert_eq!(labels.len(), unique.len());
        }
        assert!(build_reference_bounded(&c, 3, NodeBudget(50)).is_err());
    }

    #[test]
    fn ioco_examples() {
        let c = single(&[i("1"), o("1")], "0.5", "0.5");
        let r = build_reference_bounded(&c, 3, NodeBudget::DEFAULT).unwrap();
        let std = c.standard().lts().clone();
        assert_eq!(ioco_check_bounded(&std, &r), IocoVerdict::ConformsUpTo { depth: 3 });

        let mut extra = std.clone();
        let after = std.after(&[i("1")]);
        let at = std.name(*after.iter().next().unwrap()).to_string();
        extra.add(&at, o("4"), "sink");
        extra.add("sink", Q, "sink");
        assert_eq!(
            ioco_check_bounded(&extra, &r),
            IocoVerdict::Violation {
                history: Trace::from(vec![i("1")]),
                output: o("4"),
            }
        );

        // an implementation producing only some of the standard outputs conforms
        let two = Contract::from_recorded(
            grid("0", "4", "0.5"),
            grid("0", "4", "0.5"),
            Thresholds::new(v("0.5"), v("0.5")).unwrap(),
            &[Trace::from(vec![i("1"), o("1")]), Trace::from(vec![i("1"), o("1.5")])],
        )
        .unwrap();
        let r2 = build_reference_bounded(&two, 3, NodeBudget::DEFAULT).unwrap();
        let mut fewer = Lts::new("a");
        fewer.add("a", i("1"), "b");
        fewer.add("b", o("1"), "c");
        fewer.add("c", Q, "c");
        assert_eq!(ioco_check_bounded(&fewer, &r2), IocoVerdict::ConformsUpTo { depth: 3 });
    }

    #[test]
    fn standard_is_clean_wrt_itself() {
        let c = single(&[i("1"), o("1")], "0.2", "0.5");
        assert!(robustly_clean_bounded(c.standard().lts(), &c, 4, NodeBudget::DEFAULT).unwrap().is_clean());
        let br = branching_contract();
        assert!(robustly_clean_bounded(br.standard().lts(), &br, 4, NodeBudget::DEFAULT).unwrap().is_clean());
    }

    #[test]
    fn doped_implementation_fails_condition_two() {
        // standard: i:1 then o:1; doped: i:2 (within κ_in = 1) then o:10
        let c = Contract::new(
            grid("0", "4", "1"),
            grid("0", "10", "1"),
            Thresholds::new(v("1"), v("0.5")).unwrap(),
            quiescence_closure(&{
                let mut s = Lts::new("s0");
                s.add("s0", i("1"), "s1");
                s.add("s1", o("1"), "s2");
                s
            }),
        )
        .unwrap();
        let mut doped = Lts::new("d0");
        doped.add("d0", i("1"), "d1");
        doped.add("d1", o("1"), "d2");
        doped.add("d0", i("2"), "d3");
        doped.add("d3", o("10"), "d2");
        doped.add("d2", Q, "d2");
        doped.add("d0", Q, "d0");
        let doped = quiescence_closure(&doped).into_lts();
        match robustly_clean_bounded(&doped, &c, 3, NodeBudget::DEFAULT).unwrap() {
            Cleanness::CounterExample(cex) => {
                assert_eq!(cex.condition, 2);
                assert_eq!(cex.k, 2);
                assert_eq!(cex.sigma.symbols()[..2], [i("1"), o("1")]);
                assert_eq!(cex.sigma_prime.symbols()[..2], [i("2"), o("10")]);
            }
            clean => panic!("expected a counterexample, got {clean:?}"),
        }
    }

    #[test]
    fn bounded_reference_is_clean() {
        let c = single(&[i("1"), o("1")], "0.5", "0.5");
        let r = build_reference_bounded(&c, 3, NodeBudget::DEFAULT).unwrap();
        assert!(robustly_clean_bounded(&r.to_lts(), &c, 3, NodeBudget::DEFAULT).unwrap().is_clean());
    }

    #[test]
    fn minimal_keeps_antichain() {
        let a = BTreeSet::from([o("1")]);
        let ab = BTreeSet::from([o("1"), o("2")]);
        let c = BTreeSet::from([Q]);
        let kept = minimal(vec![ab.clone(), a.clone(), c.clone(), a.clone()], |s| s);
        assert_eq!(kept, vec![a, c]);
    }
}
