//! Behavior of the installed binary itself: flag surface, exit codes, CSV
//! shape. Everything here runs offline (`--endpoint local`).

use std::process::Command;

fn hecloud(args: &[&str]) -> (i32, String, String) {
    let output = Command::new(env!("CARGO_BIN_EXE_hecloud"))
        .args(args)
        .output()
        .expect("spawn hecloud");
    (
        output.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&output.stdout).into_owned(),
        String::from_utf8_lossy(&output.stderr).into_owned(),
    )
}

#[test]
fn add_local_prints_sum_and_is_deterministic() {
    // gsw summands must stay inside its default 16-value message space.
    for (scheme, a, b, sum) in [
        ("chen", "200", "100", "300"),
        ("gsw", "7", "8", "15"),
        ("qotp", "200", "100", "300"),
    ] {
        let args = [
            "add", "--scheme", scheme, "--a", a, "--b", b, "--endpoint", "local", "--seed", "7",
        ];
        let (code, stdout, stderr) = hecloud(&args);
        assert_eq!(code, 0, "{scheme}: {stderr}");
        assert_eq!(stdout.trim(), sum, "{scheme}");
        let (_, again, _) = hecloud(&args);
        assert_eq!(stdout, again, "{scheme} output must be stable per seed");
    }
}

#[test]
fn usage_errors_exit_2() {
    let (code, _, _) = hecloud(&["add", "--scheme", "chen", "--a", "1"]);
    assert_eq!(code, 2); // missing --b
    let (code, _, _) = hecloud(&["add", "--scheme", "nope", "--a", "1", "--b", "2"]);
    assert_eq!(code, 2);
    let (code, _, stderr) = hecloud(&["serve", "--port", "0"]);
    assert_eq!(code, 2, "{stderr}");
}

#[test]
fn gsw_range_guard_exits_4() {
    let (code, _, stderr) = hecloud(&[
        "add", "--scheme", "gsw", "--a", "9", "--b", "9", "--endpoint", "local",
    ]);
    assert_eq!(code, 4, "{stderr}");
    assert!(stderr.contains("message space"), "{stderr}");
}

#[test]
fn unreachable_endpoint_exits_3() {
    let (code, _, _) = hecloud(&[
        "add", "--scheme", "qotp", "--a", "1", "--b", "2", "--endpoint", "http://127.0.0.1:9",
    ]);
    assert_eq!(code, 3);
}

#[test]
fn bench_input_sweep_writes_all_widths() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("qotp_input.csv");
    let (code, _, stderr) = hecloud(&[
        "bench", "--sweep", "input", "--scheme", "qotp", "--runs", "1", "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{stderr}");
    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "scheme,sweep,param,phase,run,wall_ns,ct_bytes,peak_alloc_bytes"
    );
    for w in 1..=32u32 {
        assert!(
            text.lines().any(|l| l.starts_with(&format!("qotp,input,{w},total,"))),
            "missing width {w}"
        );
    }
}

#[test]
fn bench_key_sweep_records_every_k_for_qotp() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("qotp_key.csv");
    let (code, _, stderr) = hecloud(&[
        "bench", "--sweep", "key", "--scheme", "qotp", "--runs", "2", "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{stderr}");
    let text = std::fs::read_to_string(&out).unwrap();
    for k in 3..=12u32 {
        assert!(
            text.lines().any(|l| l.starts_with(&format!("qotp,key,{k},total,"))),
            "missing k {k}"
        );
    }
}
