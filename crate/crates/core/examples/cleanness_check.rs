//! Exhaustive bounded checks of explicit implementations: robust cleanness
//! and ioco against the reference.

use std::path::Path;

use dopetest::oracle::{ioco_check_bounded, robustly_clean_bounded, Cleanness, IocoVerdict};
use dopetest::{build_reference_bounded, quiescence_closure, Contract, Lts, NodeBudget};

fn main() -> dopetest::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/lts");
    let contract = Contract::load(&dir.join("single.ini"))?;
    let depth = 4;
    let reference = build_reference_bounded(&contract, depth, NodeBudget::default())?;
    for file in ["clean.lts", "doped.lts"] {
        let lts = quiescence_closure(&Lts::load(&dir.join(file))?).into_lts();
        match robustly_clean_bounded(&lts, &contract, depth, NodeBudget::default())? {
            Cleanness::CleanUpTo { depth } => println!("{file}: robustly clean up to depth {depth}"),
            Cleanness::CounterExample(cex) => println!("{file}: {cex}"),
        }
        match ioco_check_bounded(&lts, &reference) {
            IocoVerdict::ConformsUpTo { depth } => println!("{file}: ioco up to depth {depth}"),
            IocoVerdict::Violation { history, output } => println!("{file}: {output} after [{history}] not allowed"),
        }
    }
    Ok(())
}
