//! Bounded satisfiability: a standard whose branches contradict each other
//! versus a single recorded trace.

use std::path::Path;

use dopetest::{check_satisfiable_bounded, Contract, NodeBudget, Satisfiability, UnsatWitness};

fn main() -> dopetest::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/lts");
    for ini in ["conflicting.ini", "single.ini"] {
        let contract = Contract::load(&dir.join(ini))?;
        match check_satisfiable_bounded(&contract, 4, NodeBudget::default())? {
            Satisfiability::SatisfiableUpTo { depth } => println!("{ini}: satisfiable up to depth {depth}"),
            Satisfiability::Unsatisfiable(UnsatWitness::NoAcceptableOutput { history, conflicting }) => {
                println!("{ini}: nothing acceptable after [{history}]");
                for t in conflicting {
                    println!("  [{t}]");
                }
            }
            Satisfiability::Unsatisfiable(UnsatWitness::StandardNotClean(cex)) => {
                println!("{ini}: standard not clean, {cex}")
            }
        }
    }
    Ok(())
}
