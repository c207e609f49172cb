//! Contracts: value domains, past-forgetful distances, thresholds and the
//! standard behaviour, plus bounded satisfiability checking.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use crate::budget::NodeBudget;
use crate::error::{Error, Result};
use crate::model::{quiescence_closure, Lts, ProjectedSymbol, StandardLts, Symbol, Trace};
use crate::monitor::{load_trace, TraceFormat};
use crate::oracle::{robustly_clean_bounded, Cleanness, CounterExample, Oracle, Tube, TubeKey};
use crate::value::{Dist, Value};

/// A bounded, discretised value set `{lower, lower + step, …} ∩ [lower, upper]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ValueDomain {
    lower: Value,
    upper: Value,
    step: Value,
}

impl ValueDomain {
    pub fn new(lower: Value, upper: Value, step: Value) -> Result<Self> {
        if lower > upper {
            return Err(Error::Contract(format!("domain lower {lower} exceeds upper {upper}")));
        }
        if step <= Value::ZERO {
            return Err(Error::Contract(format!("domain step {step} must be positive")));
        }
        Ok(ValueDomain { lower, upper, step })
    }

    pub fn lower(&self) -> Value {
        self.lower
    }

    pub fn upper(&self) -> Value {
        self.upper
    }

    pub fn step(&self) -> Value {
        self.step
    }

    /// Number of grid points.
    pub fn len(&self) -> usize {
        ((self.upper - self.lower).micros() / self.step.micros()) as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn point(&self, k: usize) -> Value {
        Value::from_micros(self.lower.micros() + k as i64 * self.step.micros())
    }

    pub fn points(&self) -> impl Iterator<Item = Value> + '_ {
        (0..self.len()).map(|k| self.point(k))
    }

    /// Exact grid membership.
    pub fn contains(&self, v: Value) -> bool {
        v >= self.lower && v <= self.upper && (v - self.lower).micros() % self.step.micros() == 0
    }

    /// Snaps `v` to the nearest grid point, rejecting it when that point is
    /// more than half a step away. Ties round upwards.
    pub fn snap(&self, v: Value) -> Result<Value> {
        let step = self.step.micros();
        let offset = (v - self.lower).micros();
        let k = (offset * 2 + step).div_euclid(2 * step).clamp(0, self.len() as i64 - 1);
        let snapped = self.point(k as usize);
        if snapped.abs_diff(v).micros() * 2 > step {
            return Err(Error::OutOfDomain {
                value: v.to_string(),
                lower: self.lower.to_string(),
                upper: self.upper.to_string(),
            });
        }
        Ok(snapped)
    }

    /// Grid points whose distance to `centre` is at most `radius`.
    pub fn points_within(&self, centre: Value, radius: Value) -> impl Iterator<Item = Value> + '_ {
        self.points_between(centre - radius, centre + radius)
    }

    /// Grid points in the closed interval `[lo, hi]`.
    pub fn points_between(&self, lo: Value, hi: Value) -> impl Iterator<Item = Value> + '_ {
        let step = self.step.micros();
        let lo = (lo - self.lower).micros();
        let hi = (hi - self.lower).micros();
        let first = (lo.div_euclid(step) + i64::from(lo.rem_euclid(step) != 0)).max(0);
        let last = hi.div_euclid(step).min(self.len() as i64 - 1);
        (first..=last).map(|k| self.point(k as usize))
    }
}

/// The family of past-forgetful distances: only the last symbols of two
/// prefixes are compared.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Distance {
    /// `|v(a) − v(b)|` for two concrete values, 0 for two identical masks or
    /// two δ, +∞ for any mixed pair.
    #[default]
    LastAbsDiff,
}

impl Distance {
    pub fn parse(name: &str) -> Result<Self> {
        match name.trim() {
            "last_abs" => Ok(Distance::LastAbsDiff),
            other => Err(Error::Contract(format!("unknown distance `{other}`"))),
        }
    }

    /// Input-side distance between two projected symbols.
    pub fn input(&self, a: &ProjectedSymbol, b: &ProjectedSymbol) -> Result<Dist> {
        use ProjectedSymbol::*;
        match (a, b) {
            (Input(x), Input(y)) => Ok(Dist::Finite(x.abs_diff(*y))),
            (MaskedInput, MaskedInput) => Ok(Dist::ZERO),
            (Input(_), MaskedInput) | (MaskedInput, Input(_)) => Ok(Dist::Infinite),
            _ => Err(Error::DistanceDomain(format!("input distance of {a} and {b}"))),
        }
    }

    /// Output-side distance extended with δ: δ only matches δ.
    pub fn output(&self, a: &ProjectedSymbol, b: &ProjectedSymbol) -> Result<Dist> {
        use ProjectedSymbol::*;
        match (a, b) {
            (Output(x), Output(y)) => Ok(Dist::Finite(x.abs_diff(*y))),
            (Quiescence, Quiescence) | (MaskedOutput, MaskedOutput) => Ok(Dist::ZERO),
            (Output(_) | Quiescence | MaskedOutput, Output(_) | Quiescence | MaskedOutput) => {
                Ok(Dist::Infinite)
            }
            _ => Err(Error::DistanceDomain(format!("output distance of {a} and {b}"))),
        }
    }
}

/// Last-symbol input distance `d_In`.
pub fn d_in_last(a: &ProjectedSymbol, b: &ProjectedSymbol) -> Result<Dist> {
    Distance::LastAbsDiff.input(a, b)
}

/// Last-symbol output distance extended with δ, `d_Outδ`.
pub fn d_out_delta(a: &ProjectedSymbol, b: &ProjectedSymbol) -> Result<Dist> {
    Distance::LastAbsDiff.output(a, b)
}

/// True iff at every position of `h_plus` its input projection is within
/// `kappa_in` of `sigma_i`.
pub fn prefix_inputs_within(h_plus: &Trace, sigma_i: &[ProjectedSymbol], kappa_in: Value) -> bool {
    assert!(sigma_i.len() >= h_plus.len(), "sigma_i shorter than the history");
    h_plus
        .iter()
        .zip(sigma_i)
        .all(|(s, p)| matches!(d_in_last(&s.project_input(), p), Ok(d) if d.within(kappa_in)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Thresholds {
    pub kappa_in: Value,
    pub kappa_out: Value,
}

impl Thresholds {
    pub fn new(kappa_in: Value, kappa_out: Value) -> Result<Self> {
        if kappa_in.is_negative() || kappa_out.is_negative() {
            return Err(Error::Contract("thresholds must be nonnegative".into()));
        }
        Ok(Thresholds { kappa_in, kappa_out })
    }
}

/// A doping contract ⟨In, Out, S, d_In, d_Out, κ_in, κ_out⟩ over a closed
/// standard.
#[derive(Debug, Clone)]
pub struct Contract {
    input_domain: ValueDomain,
    output_domain: ValueDomain,
    d_in: Distance,
    d_out: Distance,
    thresholds: Thresholds,
    standard: StandardLts,
}

impl Contract {
    pub fn new(
        input_domain: ValueDomain,
        output_domain: ValueDomain,
        thresholds: Thresholds,
        standard: StandardLts,
    ) -> Result<Self> {
        if !standard.is_closed() {
            return Err(Error::Contract("the standard must be quiescence-closed".into()));
        }
        let lts = standard.lts();
        if let Some(v) = lts.inputs().iter().find(|v| !input_domain.contains(**v)) {
            return Err(Error::Contract(format!("standard input {v} is not on the input grid")));
        }
        if let Some(v) = lts.outputs().iter().find(|v| !output_domain.contains(**v)) {
            return Err(Error::Contract(format!("standard output {v} is not on the output grid")));
        }
        Ok(Contract {
            input_domain,
            output_domain,
            d_in: Distance::LastAbsDiff,
            d_out: Distance::LastAbsDiff,
            thresholds,
            standard,
        })
    }

    /// Builds a contract whose standard is compiled from recorded traces,
    /// snapping every recorded value onto the grids first.
    pub fn from_recorded(
        input_domain: ValueDomain,
        output_domain: ValueDomain,
        thresholds: Thresholds,
        traces: &[Trace],
    ) -> Result<Self> {
        let snapped = traces
            .iter()
            .map(|t| snap_trace(t, &input_domain, &output_domain))
            .collect::<Result<Vec<_>>>()?;
        Contract::new(
            input_domain,
            output_domain,
            thresholds,
            StandardLts::from_traces(&snapped),
        )
    }

    pub fn input_domain(&self) -> &ValueDomain {
        &self.input_domain
    }

    pub fn output_domain(&self) -> &ValueDomain {
        &self.output_domain
    }

    pub fn thresholds(&self) -> Thresholds {
        self.thresholds
    }

    pub fn kappa_in(&self) -> Value {
        self.thresholds.kappa_in
    }

    pub fn kappa_out(&self) -> Value {
        self.thresholds.kappa_out
    }

    pub fn d_in(&self) -> Distance {
        self.d_in
    }

    pub fn d_out(&self) -> Distance {
        self.d_out
    }

    pub fn standard(&self) -> &StandardLts {
        &self.standard
    }

    pub fn with_thresholds(&self, thresholds: Thresholds) -> Contract {
        Contract {
            thresholds,
            ..self.clone()
        }
    }

    /// Whether two concrete input values are within κ_in of each other.
    pub(crate) fn inputs_close(&self, a: Value, b: Value) -> bool {
        a.abs_diff(b) <= self.thresholds.kappa_in
    }

    /// Out_δ: every output grid point plus δ.
    pub fn out_delta(&self) -> impl Iterator<Item = Symbol> + '_ {
        self.output_domain
            .points()
            .map(Symbol::Output)
            .chain(std::iter::once(Symbol::Quiescence))
    }

    pub fn snap_symbol(&self, s: &Symbol) -> Result<Symbol> {
        Ok(match s {
            Symbol::Input(v) => Symbol::Input(self.input_domain.snap(*v)?),
            Symbol::Output(v) => Symbol::Output(self.output_domain.snap(*v)?),
            Symbol::Quiescence => Symbol::Quiescence,
        })
    }

    pub fn snap_trace(&self, t: &Trace) -> Result<Trace> {
        snap_trace(t, &self.input_domain, &self.output_domain)
    }

    /// Loads an INI-style contract file. Standard paths are resolved
    /// relative to the file's directory.
    ///
    /// ```ini
    /// [thresholds]
    /// kappa_in = 0.2
    /// kappa_out = 0.5
    /// [input_domain]
    /// lower = 0
    /// upper = 30
    /// step = 0.001
    /// [output_domain]
    /// lower = 0
    /// upper = 120
    /// step = 0.001
    /// [distance]
    /// in = last_abs
    /// out = last_abs
    /// [standard]
    /// trace = run-std1.txt
    /// trace = run-std2.txt
    /// ```
    ///
    /// `[standard]` takes either repeated `trace` keys (with optional
    /// `format = canonical|speed-nox` and `inputs = N`) or one `lts` key.
    pub fn load(path: &Path) -> Result<Contract> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Contract::parse_ini(&text, &base)
    }

    pub fn parse_ini(text: &str, base: &Path) -> Result<Contract> {
        let ini = ini::Ini::load_from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let section = |name: &str| {
            ini.section(Some(name))
                .ok_or_else(|| Error::Contract(format!("missing [{name}] section")))
        };
        let value = |sec: &str, key: &str| -> Result<Value> {
            section(sec)?
                .get(key)
                .ok_or_else(|| Error::Contract(format!("missing `{key}` in [{sec}]")))?
                .parse::<Value>()
        };
        let domain = |sec: &str| -> Result<ValueDomain> {
            ValueDomain::new(value(sec, "lower")?, value(sec, "upper")?, value(sec, "step")?)
        };
        let thresholds = Thresholds::new(value("thresholds", "kappa_in")?, value("thresholds", "kappa_out")?)?;
        let input_domain = domain("input_domain")?;
        let output_domain = domain("output_domain")?;
        let (d_in, d_out) = match ini.section(Some("distance")) {
            Some(d) => (
                Distance::parse(d.get("in").unwrap_or("last_abs"))?,
                Distance::parse(d.get("out").unwrap_or("last_abs"))?,
            ),
            None => (Distance::LastAbsDiff, Distance::LastAbsDiff),
        };

        let std_sec = section("standard")?;
        let traces: Vec<PathBuf> = std_sec.get_all("trace").map(|p| base.join(p)).collect();
        let lts = std_sec.get("lts").map(|p| base.join(p));
        let mut contract = match (traces.is_empty(), lts) {
            (false, None) => {
                let format = match std_sec.get("format") {
                    Some(f) => f.parse::<TraceFormat>()?,
                    None => TraceFormat::Canonical,
                };
                let format = match (format, std_sec.get("inputs")) {
                    (TraceFormat::SpeedNox { .. }, Some(n)) => TraceFormat::SpeedNox {
                        inputs: n
                            .trim()
                            .parse()
                            .map_err(|_| Error::Contract(format!("bad input count `{n}`")))?,
                    },
                    (f, _) => f,
                };
                let recorded = traces
                    .iter()
                    .map(|p| load_trace(p, format).map(|r| r.symbols))
                    .collect::<Result<Vec<_>>>()?;
                Contract::from_recorded(input_domain, output_domain, thresholds, &recorded)?
            }
            (true, Some(p)) => {
                let lts = Lts::load(&p)?;
                if lts.has_quiescence() {
                    return Err(Error::Contract(format!(
                        "{}: standard LTS must not contain δ; closure is applied on load",
                        p.display()
                    )));
                }
                Contract::new(input_domain, output_domain, thresholds, quiescence_closure(&lts))?
            }
            _ => {
                return Err(Error::Contract(
                    "[standard] needs one or more `trace` keys or exactly one `lts` key".into(),
                ))
            }
        };
        contract.d_in = d_in;
        contract.d_out = d_out;
        Ok(contract)
    }
}

fn snap_trace(t: &Trace, input: &ValueDomain, output: &ValueDomain) -> Result<Trace> {
    t.iter()
        .map(|s| {
            Ok(match s {
                Symbol::Input(v) => Symbol::Input(input.snap(*v)?),
                Symbol::Output(v) => Symbol::Output(output.snap(*v)?),
                Symbol::Quiescence => Symbol::Quiescence,
            })
        })
        .collect()
}

/// Result of [`check_satisfiable_bounded`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Satisfiability {
    SatisfiableUpTo { depth: usize },
    Unsatisfiable(UnsatWitness),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum UnsatWitness {
    /// After `history` no output or δ is within κ_out of every standard
    /// branch whose inputs stay within κ_in; `conflicting` lists standard
    /// traces of those branches (a disjoint pair when one exists).
    NoAcceptableOutput {
        history: Trace,
        conflicting: Vec<Trace>,
    },
    /// The standard itself violates robust cleanness.
    StandardNotClean(CounterExample),
}

impl Satisfiability {
    pub fn is_satisfiable(&self) -> bool {
        matches!(self, Satisfiability::SatisfiableUpTo { .. })
    }
}

/// Searches, up to `depth`, for a history within κ_in of the standard after
/// which no output can satisfy every κ_in-close standard branch, and checks
/// that the standard is robustly clean with respect to itself.
///
/// Histories are explored per distinct κ_in-tube, so inputs that lead to the
/// same set of close standard branches are visited once.
pub fn check_satisfiable_bounded(contract: &Contract, depth: usize, budget: NodeBudget) -> Result<Satisfiability> {
    let oracle = Oracle::with_budget(contract, depth, budget);
    let mut layer: BTreeMap<TubeKey, (Tube, Trace)> = BTreeMap::new();
    let root = oracle.tube();
    layer.insert(root.key(), (root, Trace::new()));
    let mut explored = 0usize;
    for _ in 0..depth {
        let mut next: BTreeMap<TubeKey, (Tube, Trace)> = BTreeMap::new();
        for (tube, history) in layer.values() {
            if tube.is_empty() {
                continue;
            }
            explored += 1;
            if explored > budget.0 {
                return Err(Error::Budget(budget.0));
            }
            let obligations = oracle.obligations(tube)?;
            let accepted: Vec<Symbol> = contract.out_delta().filter(|o| obligations.accepts(o)).collect();
            if accepted.is_empty() {
                return Ok(Satisfiability::Unsatisfiable(UnsatWitness::NoAcceptableOutput {
                    history: history.clone(),
                    conflicting: oracle.conflicting_branches(&obligations),
                }));
            }
            let mut push = |sym: Symbol| {
                let t = oracle.advance(tube, &sym);
                if !t.is_empty() {
                    next.entry(t.key()).or_insert_with(|| (t, history.pushed(sym)));
                }
            };
            push(accepted[0]);
            let candidates: BTreeSet<Value> = tube
                .enabled_inputs(contract.standard().lts())
                .into_iter()
                .flat_map(|u| contract.input_domain().points_within(u, contract.kappa_in()).collect::<Vec<_>>())
                .collect();
            for u in candidates {
                push(Symbol::Input(u));
            }
        }
        layer = next;
    }
    match robustly_clean_bounded(contract.standard().lts(), contract, depth, budget)? {
        Cleanness::CleanUpTo { .. } => Ok(Satisfiability::SatisfiableUpTo { depth }),
        Cleanness::CounterExample(cex) => Ok(Satisfiability::Unsatisfiable(UnsatWitness::StandardNotClean(cex))),
    }
}
