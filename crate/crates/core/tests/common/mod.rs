#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use dopetest::model::ProjectedSymbol;
use dopetest::{quiescence_closure, Contract, Lts, StandardLts, Symbol, Thresholds, Trace, Value, ValueDomain};
use rand::Rng;

pub fn fixture(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(rel)
}

pub fn v(s: &str) -> Value {
    s.parse().unwrap()
}

fn grid(n: usize) -> ValueDomain {
    ValueDomain::new(Value::ZERO, Value::from_int(n as i64 - 1), Value::from_int(1)).unwrap()
}

fn random_label(rng: &mut impl Rng, n_in: usize, n_out: usize) -> Symbol {
    let x = rng.gen::<f64>();
    if x < 0.5 {
        Symbol::Input(Value::from_int(rng.gen_range(0..n_in) as i64))
    } else if x < 0.9 {
        Symbol::Output(Value::from_int(rng.gen_range(0..n_out) as i64))
    } else {
        Symbol::Quiescence
    }
}

/// A small random contract: at most five grid points per domain, and a
/// standard made of up to three recorded traces.
pub fn random_contract(rng: &mut impl Rng) -> Contract {
    random_contract_with(rng, true)
}

/// Like [`random_contract`], but the standard is a closed random LTS.
pub fn random_lts_contract(rng: &mut impl Rng) -> Contract {
    random_contract_with(rng, false)
}

fn random_contract_with(rng: &mut impl Rng, recorded: bool) -> Contract {
    let n_in = rng.gen_range(2..=5);
    let n_out = rng.gen_range(2..=5);
    let kappa = |rng: &mut dyn rand::RngCore| Value::from_int(rng.gen_range(0..=1));
    let thresholds = Thresholds::new(kappa(rng), kappa(rng)).unwrap();
    let standard = if recorded {
        let traces: Vec<Trace> = (0..rng.gen_range(1..=3))
            .map(|_| {
                (0..rng.gen_range(1..=4))
                    .map(|_| random_label(rng, n_in, n_out))
                    .collect()
            })
            .collect();
        StandardLts::from_traces(&traces)
    } else {
        let states = rng.gen_range(1..=4);
        let mut lts = Lts::new("q0");
        for _ in 0..rng.gen_range(1..=6) {
            let from = format!("q{}", rng.gen_range(0..states));
            let to = format!("q{}", rng.gen_range(0..states));
            let label = match random_label(rng, n_in, n_out) {
                Symbol::Quiescence => Symbol::Output(Value::ZERO),
                l => l,
            };
            lts.add(&from, label, &to);
        }
        quiescence_closure(&lts)
    };
    Contract::new(grid(n_in), grid(n_out), thresholds, standard).unwrap()
}

/// A random implementation over the contract's grids, input-enabled on the
/// input grid, with quiescence where nothing can be emitted.
pub fn random_implementation(rng: &mut impl Rng, contract: &Contract) -> Lts {
    let states = rng.gen_range(1..=4);
    let mut lts = Lts::new("p0");
    for s in 0..states {
        let from = format!("p{s}");
        for x in contract.input_domain().points() {
            let to = format!("p{}", rng.gen_range(0..states));
            lts.add(&from, Symbol::Input(x), &to);
        }
        for _ in 0..rng.gen_range(0..=2) {
            let k = rng.gen_range(0..contract.output_domain().len());
            let to = format!("p{}", rng.gen_range(0..states));
            lts.add(&from, Symbol::Output(contract.output_domain().point(k)), &to);
        }
    }
    quiescence_closure(&lts).into_lts()
}

/// All traces of exactly `len` steps, by plain depth-first search.
pub fn brute_traces(lts: &Lts, len: usize) -> BTreeSet<Vec<Symbol>> {
    fn go(lts: &Lts, s: dopetest::model::StateId, len: usize, path: &mut Vec<Symbol>, out: &mut BTreeSet<Vec<Symbol>>) {
        if path.len() == len {
            out.insert(path.clone());
            return;
        }
        for (l, t) in lts.transitions(s) {
            path.push(*l);
            go(lts, *t, len, path, out);
            path.pop();
        }
    }
    let mut out = BTreeSet::new();
    go(lts, lts.initial(), len, &mut Vec::new(), &mut out);
    out
}

fn in_proj(s: &Symbol) -> ProjectedSymbol {
    match s {
        Symbol::Input(v) => ProjectedSymbol::Input(*v),
        _ => ProjectedSymbol::MaskedInput,
    }
}

fn in_close(a: &ProjectedSymbol, b: &ProjectedSymbol, kappa: Value) -> bool {
    match (a, b) {
        (ProjectedSymbol::Input(x), ProjectedSymbol::Input(y)) => x.abs_diff(*y) <= kappa,
        (ProjectedSymbol::MaskedInput, ProjectedSymbol::MaskedInput) => true,
        _ => false,
    }
}

fn out_close(a: &Symbol, b: &Symbol, kappa: Value) -> bool {
    match (a, b) {
        (Symbol::Output(x), Symbol::Output(y)) => x.abs_diff(*y) <= kappa,
        (Symbol::Quiescence, Symbol::Quiescence) => true,
        _ => false,
    }
}

/// Standard traces of length `bound`, grouped by input projection.
pub struct BruteStandard {
    groups: BTreeMap<Vec<ProjectedSymbol>, Vec<Vec<Symbol>>>,
}

impl BruteStandard {
    pub fn new(contract: &Contract, bound: usize) -> Self {
        let mut groups: BTreeMap<Vec<ProjectedSymbol>, Vec<Vec<Symbol>>> = BTreeMap::new();
        for t in brute_traces(contract.standard().lts(), bound) {
            groups.entry(t.iter().map(in_proj).collect()).or_default().push(t);
        }
        BruteStandard { groups }
    }

    /// The acceptance set by direct quantification over input projections.
    pub fn acc(&self, contract: &Contract, h: &[Symbol]) -> BTreeSet<Symbol> {
        let pos = h.len();
        let hp: Vec<ProjectedSymbol> = h.iter().map(in_proj).collect();
        let candidates: Vec<Symbol> = contract
            .output_domain()
            .points()
            .map(Symbol::Output)
            .chain([Symbol::Quiescence])
            .collect();
        candidates
            .into_iter()
            .filter(|o| {
                self.groups.iter().all(|(sigma_i, traces)| {
                    let premise = sigma_i[pos] == ProjectedSymbol::MaskedInput
                        && hp.iter().zip(sigma_i).all(|(a, b)| in_close(a, b, contract.kappa_in()));
                    !premise || traces.iter().any(|t| out_close(o, &t[pos], contract.kappa_out()))
                })
            })
            .collect()
    }
}

/// `p` as a decimal, for readable assertion messages.
pub fn pct(p: f64) -> String {
    format!("{:.3}", p)
}
