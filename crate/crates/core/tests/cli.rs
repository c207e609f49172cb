mod common;

use std::process::Command;

use common::fixture;

fn dopetest(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_dopetest"))
        .args(args)
        .output()
        .expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn path(rel: &str) -> String {
    fixture(rel).to_string_lossy().into_owned()
}

#[test]
fn monitor_exit_codes_follow_verdicts() {
    let contract = path("nissan/nissan.ini");
    for (trace, code, tag) in [("NEDC.txt", 0, "VERDICT PASS"), ("PowerNEDC.txt", 0, "VERDICT PASS"), ("SineNEDC.txt", 1, "VERDICT FAIL")] {
        let (status, stdout, _) = dopetest(&[
            "monitor",
            "--contract",
            &contract,
            "--trace",
            &path(&format!("nissan/{trace}")),
            "--format",
            "speed-nox",
        ]);
        assert_eq!(status, code, "{trace}: {stdout}");
        assert!(stdout.starts_with(tag), "{trace}: {stdout}");
    }
}

#[test]
fn sine_failure_reports_acceptable_range() {
    let (_, stdout, _) = dopetest(&[
        "monitor",
        "--contract",
        &path("nissan/nissan-88.ini"),
        "--trace",
        &path("nissan/SineNEDC.txt"),
        "--format",
        "speed-nox",
    ]);
    let json: serde_json::Value = serde_json::from_str(stdout.lines().nth(1).unwrap()).unwrap();
    assert_eq!(json["verdict"], "FAIL");
    assert_eq!(json["fail_step"], 1181);
    assert_eq!(json["fail_output"], "o:584");
    assert_eq!(json["acceptable"], "[92, 268]");
}

#[test]
fn canonical_monitoring_of_noisy_runs() {
    let contract = path("numbers/noisy.ini");
    let (code, stdout, _) = dopetest(&["monitor", "--contract", &contract, "--trace", &path("numbers/run-pass.txt")]);
    assert_eq!(code, 0, "{stdout}");
    let (code, stdout, _) = dopetest(&["monitor", "--contract", &contract, "--trace", &path("numbers/run-fail.txt")]);
    assert_eq!(code, 1);
    assert!(stdout.contains("\"fail_step\":16"), "{stdout}");
}

#[test]
fn seeded_random_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let run = |seed: &str, log: &str| {
        let log = dir.path().join(log);
        let (code, stdout, _) = dopetest(&[
            "test",
            "--contract",
            &path("numbers/noisy.ini"),
            "--sut",
            "builtin:noisy-mirror",
            "--seed",
            seed,
            "--bound",
            "15",
            "--log",
            log.to_str().unwrap(),
        ]);
        let written = std::fs::read_to_string(&log).unwrap();
        assert_eq!(written, stdout);
        (code, stdout)
    };
    let a = run("42", "a.log");
    let b = run("42", "b.log");
    assert_eq!(a, b);
    let lines: Vec<&str> = a.1.lines().collect();
    assert!(lines[lines.len() - 2].starts_with("VERDICT"), "{}", a.1);
    assert!(lines[lines.len() - 1].starts_with("{\"verdict\""), "{}", a.1);
    let differs = (0..10).any(|s| run(&s.to_string(), "c.log").1 != a.1);
    assert!(differs);
}

#[test]
fn scripted_runs_against_noisy_mirror() {
    let contract = path("numbers/noisy.ini");
    let go = |script: &str| {
        dopetest(&[
            "test",
            "--contract",
            &contract,
            "--sut",
            "builtin:noisy-mirror",
            "--strategy",
            &format!("script:{}", path(&format!("numbers/{script}"))),
            "--bound",
            "21",
        ])
    };
    let (code, out, _) = go("good-test1.trace");
    assert_eq!(code, 0);
    assert!(out.contains("\nVERDICT PASS\n"), "{out}");
    let (code, out, _) = go("bad-test1.trace");
    assert_eq!(code, 0);
    assert!(out.contains("VERDICT TRIVIAL input 25 at step 3"), "{out}");
    let (code, out, _) = go("bad-test2.trace");
    assert_eq!(code, 0);
    assert!(out.contains("VERDICT TRIVIAL output awaited at step 7"), "{out}");
}

#[test]
fn lts_system_and_external_process() {
    let contract = path("lts/single.ini");
    let (code, out, _) = dopetest(&[
        "test",
        "--contract",
        &contract,
        "--sut",
        &format!("lts:{}", path("lts/clean.lts")),
        "--strategy",
        &format!("script:{}", path("lts/single-script.txt")),
        "--bound",
        "4",
    ]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("STEP 4 RECV o:2\nVERDICT PASS\n"), "{out}");
    let (code, out, err) = dopetest(&[
        "test",
        "--contract",
        &contract,
        "--sut",
        "exec:while read cmd x; do echo \"OUT $x\"; done",
        "--strategy",
        &format!("script:{}", path("lts/single-script.txt")),
        "--bound",
        "4",
    ]);
    assert_eq!(code, 0, "{out}{err}");
    assert!(out.contains("STEP 2 RECV o:1\nSTEP 3 SEND i:2\nSTEP 4 RECV o:2\nVERDICT PASS\n"), "{out}");
}

#[test]
fn satisfiability_and_reference() {
    let (code, out, _) = dopetest(&["satisfiable", "--contract", &path("lts/conflicting.ini"), "--depth", "3"]);
    assert_eq!(code, 1);
    assert!(out.starts_with("UNSATISFIABLE: no output is acceptable after [i 1]"), "{out}");
    let (code, out, _) = dopetest(&["satisfiable", "--contract", &path("lts/single.ini"), "--depth", "4"]);
    assert_eq!((code, out.as_str()), (0, "SATISFIABLE up to depth 4\n"));

    let (code, dump, _) = dopetest(&["ref", "--contract", &path("lts/branching.ini"), "--depth", "2", "--dump"]);
    assert_eq!(code, 0);
    assert!(dump.lines().next().unwrap().starts_with("<empty> | enabled:"), "{dump}");
    assert!(dump.contains("i 4 | enabled:"));
    let (_, again, _) = dopetest(&["ref", "--contract", &path("lts/branching.ini"), "--depth", "2", "--dump"]);
    assert_eq!(dump, again);
    let (_, summary, _) = dopetest(&["ref", "--contract", &path("lts/branching.ini"), "--depth", "2"]);
    assert_eq!(summary, format!("{} histories up to depth 2\n", dump.lines().count()));
}

#[test]
fn check_modes() {
    let contract = path("lts/single.ini");
    let (code, out, _) = dopetest(&["check", "--impl", &path("lts/doped.lts"), "--contract", &contract, "--depth", "4"]);
    assert_eq!(code, 1);
    assert!(out.contains("NOT CLEAN condition 2"), "{out}");
    assert!(out.contains("IOCO violation"), "{out}");
    let (code, out, _) = dopetest(&[
        "check", "--impl", &path("lts/clean.lts"), "--contract", &contract, "--depth", "4", "--mode", "clean",
    ]);
    assert_eq!((code, out.as_str()), (0, "CLEAN up to depth 4\n"));
}

#[test]
fn errors_exit_with_two() {
    let (code, _, err) = dopetest(&["monitor", "--contract", "/nonexistent.ini", "--trace", "/nonexistent"]);
    assert_eq!(code, 2);
    assert!(err.starts_with("error:"), "{err}");
    let (code, _, _) = dopetest(&["frobnicate"]);
    assert_eq!(code, 2);
    let (code, _, err) = dopetest(&[
        "test", "--contract", &path("numbers/noisy.ini"), "--sut", "nothing", "--bound", "3",
    ]);
    assert_eq!(code, 2);
    assert!(err.contains("unknown system"), "{err}");
}

#[test]
fn node_budget_exhaustion_is_an_error() {
    let out = Command::new(env!("CARGO_BIN_EXE_dopetest"))
        .args(["ref", "--contract", &path("lts/branching.ini"), "--depth", "4"])
        .env("DOPETEST_NODE_BUDGET", "10")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("budget"));
}

#[test]
fn in_process_entry_point() {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = dopetest::cli::run(
        ["dopetest", "satisfiable", "--contract", &path("numbers/noisy-std1.ini"), "--depth", "2"],
        &mut out,
        &mut err,
    );
    assert_eq!(code, dopetest::cli::EXIT_PASS);
    assert_eq!(String::from_utf8(out).unwrap(), "SATISFIABLE up to depth 2\n");
    assert!(err.is_empty());
}
