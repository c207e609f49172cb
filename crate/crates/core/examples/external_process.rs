//! Drives a shell process over the line protocol: `IN <v>` goes to the
//! child, `OUT <v>` comes back.

use std::path::Path;
use std::time::Duration;

use dopetest::engine::parse_script;
use dopetest::{dt_run, scripted_strategy, Contract, ExternalProcess, RunConfig};

fn main() -> dopetest::Result<()> {
    let contract = Contract::load(&Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/lts/single.ini"))?;
    // echoes inputs, except that 2 is answered with 3
    let child = r#"while read cmd x; do if [ "$x" = 2 ]; then echo "OUT 3"; else echo "OUT $x"; fi; done"#;
    for script in ["1\nwait\n1.5\nwait\n", "1\nwait\n2\nwait\n"] {
        let record = dt_run(
            &contract,
            &mut ExternalProcess::new(child),
            &mut scripted_strategy(parse_script(script)?),
            RunConfig::new(4).with_timeout(Duration::from_millis(300)),
        )?;
        print!("{}", record.render_log());
    }
    Ok(())
}
