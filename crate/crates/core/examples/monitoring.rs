//! Offline monitoring of recorded noisy-mirror runs.

use std::path::Path;

use dopetest::{load_trace, monitor_verdict, Contract, TraceFormat};

fn main() -> dopetest::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/numbers");
    let contract = Contract::load(&dir.join("noisy.ini"))?;
    for file in ["run-pass.txt", "run-fail.txt"] {
        let recorded = load_trace(&dir.join(file), TraceFormat::Canonical)?;
        let record = monitor_verdict(&recorded.symbols, &contract)?;
        println!("{file}: {}", record.verdict);
        println!("{}", record.summary_json());
    }
    Ok(())
}
