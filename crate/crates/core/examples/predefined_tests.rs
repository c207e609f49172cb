//! Scripted tests: the four noisy-mirror scenarios.

use std::path::Path;

use dopetest::engine::load_script;
use dopetest::{dt_run, scripted_strategy, Contract, NoisyMirror, RunConfig};

fn main() -> dopetest::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/numbers");
    let contract = Contract::load(&dir.join("noisy.ini"))?;
    for script in ["good-test1.trace", "good-test2.trace", "bad-test1.trace", "bad-test2.trace"] {
        let steps = load_script(&dir.join(script))?;
        let record = dt_run(
            &contract,
            &mut NoisyMirror::new(1),
            &mut scripted_strategy(steps),
            RunConfig::new(21),
        )?;
        println!("{script}: {}", record.verdict);
    }
    Ok(())
}
