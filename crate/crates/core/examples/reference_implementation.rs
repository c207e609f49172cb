//! Materialises the bounded reference implementation of a small contract
//! and checks that it is robustly clean.

use std::path::Path;

use dopetest::oracle::robustly_clean_bounded;
use dopetest::{build_reference_bounded, Contract, NodeBudget};

fn main() -> dopetest::Result<()> {
    let contract = Contract::load(&Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/lts/branching.ini"))?;
    let depth = 2;
    let reference = build_reference_bounded(&contract, depth, NodeBudget::default())?;
    for line in reference.dump().lines().filter(|l| !l.ends_with("enabled: ")).take(16) {
        println!("{line}");
    }
    let lts = reference.to_lts();
    println!("{} states, {} transitions", lts.state_count(), lts.transition_count());
    println!("clean: {}", robustly_clean_bounded(&lts, &contract, depth, NodeBudget::default())?.is_clean());
    Ok(())
}
