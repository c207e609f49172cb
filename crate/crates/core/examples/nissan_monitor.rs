//! The doped diesel car: monitor the three cycle recordings against the
//! NEDC contract for both NOx tolerances.

use std::path::Path;
use std::time::Instant;

use dopetest::monitor::DEFAULT_SPEED_INPUTS;
use dopetest::nedc::Profile;
use dopetest::{load_trace, monitor_verdict, Contract, TraceFormat};

fn main() -> dopetest::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/nissan");
    let format = TraceFormat::SpeedNox { inputs: DEFAULT_SPEED_INPUTS };
    for ini in ["nissan.ini", "nissan-88.ini"] {
        let contract = Contract::load(&dir.join(ini))?;
        println!("{ini} (kappa_in {}, kappa_out {})", contract.kappa_in(), contract.kappa_out());
        for p in Profile::ALL {
            let start = Instant::now();
            let recorded = load_trace(&dir.join(p.file_name()), format)?;
            let record = monitor_verdict(&recorded.symbols, &contract)?;
            println!("  {:<14} {:>4} mg/km  {}  ({:.1?})", p.file_name(), p.nox(), record.verdict, start.elapsed());
        }
    }
    Ok(())
}
