//! Black-box tests against the built `dpass` binary.

use std::fs;
use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

fn dpass() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dpass"))
}

fn run(args: &[&str]) -> Output {
    dpass().args(args).output().expect("spawn dpass")
}

fn stdout_utf8(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn write_file(path: &Path, content: &str) {
    fs::write(path, content).unwrap();
}

const CLEAN_SCENARIO: &str = "\
noise_floor_db = -90
seed = 7
trace_len_samples = 1400
packet.0.start_sample = 600
packet.0.duration_min = 60
packet.0.center_mhz = 5890
packet.0.bw_mhz = 10
packet.0.rx_power_db = -70
";

const WIFI_PROFILE: &str = "\
center_mhz = 5885
bw_mhz = 20
alternates_mhz = 5180, 5500
can_sleep = false
kind = wifi-ap
";

fn json_lines(text: &str) -> Vec<serde_json::Value> {
    text.lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

fn lines_of_type<'a>(lines: &'a [serde_json::Value], ty: &str) -> Vec<&'a serde_json::Value> {
    lines.iter().filter(|v| v["type"] == ty).collect()
}

#[test]
fn encode_worked_example() {
    let out = run(&["encode", "--duration", "50", "--center", "5890", "--bw", "10"]);
    assert!(out.status.success());
    let text = stdout_utf8(&out);
    assert!(text.contains("DPASS{dur=60min,center=5890MHz,bw=10MHz}"), "{text}");
    assert!(text.contains("symbols: S5- S5+ S4+ S5+ S2- S3- S0+ S0+"), "{text}");

    let out = run(&["encode", "--duration", "50", "--center", "5890", "--bw", "10", "--json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout_utf8(&out)).unwrap();
    assert_eq!(v["duration_min"], 60);
    assert_eq!(v["center_freq_mhz"], 5890);
    assert_eq!(v["bandwidth_mhz"], 10);
    assert_eq!(v["airtime_us"], 2_520_000);
    assert_eq!(v["symbols"][0], "S5-");
    assert_eq!(v["symbols"].as_array().unwrap().len(), 8);
}

#[test]
fn encode_minimum_request_and_bad_values() {
    let out = run(&["encode", "--duration", "5", "--center", "0", "--bw", "10"]);
    assert!(out.status.success());
    assert!(stdout_utf8(&out).contains("symbols: S5- S5+ S0+ S0+ S0+ S0+ S0+ S0+"));

    let out = run(&["encode", "--duration", "400", "--center", "0", "--bw", "10"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("duration"));

    let out = run(&["encode", "--duration", "60", "--center", "10000", "--bw", "10"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn synth_is_seed_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let sc = dir.path().join("sc.txt");
    write_file(&sc, "noise_spread_db = 4\ntrace_len_samples = 500\n");
    let (a, b, c) = (
        dir.path().join("a.csv"),
        dir.path().join("b.csv"),
        dir.path().join("c.csv"),
    );
    for (path, seed) in [(&a, "9"), (&b, "9"), (&c, "10")] {
        let out = run(&[
            "synth",
            "--scenario",
            sc.to_str().unwrap(),
            "--out",
            path.to_str().unwrap(),
            "--seed",
            seed,
        ]);
        assert!(out.status.success());
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert_ne!(fs::read(&a).unwrap(), fs::read(&c).unwrap());
}

#[test]
fn synth_detect_round_trip_with_actions() {
    let dir = tempfile::tempdir().unwrap();
    let sc = dir.path().join("sc.txt");
    let prof = dir.path().join("wifi.txt");
    let trace = dir.path().join("tr.csv");
    write_file(&sc, CLEAN_SCENARIO);
    write_file(&prof, WIFI_PROFILE);

    let out = run(&[
        "synth",
        "--scenario",
        sc.to_str().unwrap(),
        "--out",
        trace.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(fs::read_to_string(&trace).unwrap().starts_with("t_us,rssi_db\n"));

    let out = run(&[
        "detect",
        "--trace",
        trace.to_str().unwrap(),
        "--profile",
        prof.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let lines = json_lines(&stdout_utf8(&out));
    assert_eq!(lines_of_type(&lines, "symbol").len(), 8);
    let packets = lines_of_type(&lines, "packet");
    assert_eq!(packets.len(), 1);
    assert_eq!(packets[0]["duration_min"], 60);
    assert_eq!(packets[0]["center_freq_mhz"], 5890);
    assert_eq!(packets[0]["bandwidth_mhz"], 10);
    let actions = lines_of_type(&lines, "action");
    assert_eq!(actions.len(), 1);
    assert_eq!(actions[0]["action"], "switch_channel");
    assert_eq!(actions[0]["target_mhz"], 5180);
}

#[test]
fn detect_from_stdin_matches_file() {
    let dir = tempfile::tempdir().unwrap();
    let sc = dir.path().join("sc.txt");
    let trace = dir.path().join("tr.csv");
    write_file(&sc, CLEAN_SCENARIO);
    run(&[
        "synth",
        "--scenario",
        sc.to_str().unwrap(),
        "--out",
        trace.to_str().unwrap(),
    ]);

    let from_file = run(&["detect", "--trace", trace.to_str().unwrap()]);
    let mut child = dpass()
        .arg("detect")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(&fs::read(&trace).unwrap())
        .unwrap();
    let from_stdin = child.wait_with_output().unwrap();
    assert!(from_stdin.status.success());
    assert_eq!(from_file.stdout, from_stdin.stdout);
    assert!(!from_file.stdout.is_empty());
}

#[test]
fn binary_and_csv_traces_detect_identically() {
    let dir = tempfile::tempdir().unwrap();
    let sc = dir.path().join("sc.txt");
    // noisy but quantized, so the f32 binary format loses nothing
    write_file(&sc, &format!("noise_spread_db = 5.57\n{CLEAN_SCENARIO}"));
    let csv = dir.path().join("tr.csv");
    let bin = dir.path().join("tr.bin");
    for (path, fmt) in [(&csv, "csv"), (&bin, "bin")] {
        let out = run(&[
            "synth",
            "--scenario",
            sc.to_str().unwrap(),
            "--out",
            path.to_str().unwrap(),
            "--format",
            fmt,
        ]);
        assert!(out.status.success());
    }
    assert_eq!(fs::metadata(&bin).unwrap().len(), 1400 * 12);
    let a = run(&["detect", "--trace", csv.to_str().unwrap()]);
    let b = run(&["detect", "--trace", bin.to_str().unwrap(), "--format", "bin"]);
    assert!(a.status.success() && b.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert!(!a.stdout.is_empty());
}

#[test]
fn malformed_trace_lines_are_tolerated_up_to_one_percent() {
    let dir = tempfile::tempdir().unwrap();
    let mut good = String::from("t_us,rssi_db\n");
    for i in 0..400u64 {
        good.push_str(&format!("{},-90\n", i * 5_000));
    }

    // one bad line in 401 records: skipped with a warning, still succeeds
    let one_bad = dir.path().join("one.csv");
    write_file(&one_bad, &format!("{good}oops\n"));
    let out = run(&["detect", "--trace", one_bad.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(String::from_utf8(out.stderr).unwrap().contains("skipping"));

    // 40 bad lines in 440: over the 1% budget, input-format error
    let many_bad = dir.path().join("many.csv");
    write_file(&many_bad, &format!("{good}{}", "oops\n".repeat(40)));
    let out = run(&["detect", "--trace", many_bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));

    // missing header is a hard input error
    let headerless = dir.path().join("raw.csv");
    write_file(&headerless, "0,-90\n5000,-90\n");
    let out = run(&["detect", "--trace", headerless.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn detect_bad_paths_are_usage_errors() {
    let out = run(&["detect", "--trace", "/nonexistent/tr.csv"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["synth", "--scenario", "/nonexistent/sc.txt", "--out", "-"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn scenario_errors_are_input_errors() {
    let dir = tempfile::tempdir().unwrap();
    let sc = dir.path().join("sc.txt");

    write_file(&sc, "definitely_not_a_key = 1\ntrace_len_samples = 100\n");
    let out = run(&["synth", "--scenario", sc.to_str().unwrap(), "--out", "-"]);
    assert_eq!(out.status.code(), Some(3));

    // packet runs past the trace end
    write_file(
        &sc,
        "trace_len_samples = 100\npacket.0.start_sample = 0\npacket.0.duration_min = 60\n\
         packet.0.center_mhz = 5890\npacket.0.bw_mhz = 10\npacket.0.rx_power_db = -70\n",
    );
    let out = run(&["synth", "--scenario", sc.to_str().unwrap(), "--out", "-"]);
    assert_eq!(out.status.code(), Some(3));

    // synth needs a length
    write_file(&sc, "noise_floor_db = -90\n");
    let out = run(&["synth", "--scenario", sc.to_str().unwrap(), "--out", "-"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn mc_reports_json_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let sc = dir.path().join("mc.txt");
    write_file(
        &sc,
        "noise_spread_db = 5.570043140052503\n\
         mc.duration_min = 60\nmc.center_mhz = 5890\nmc.bw_mhz = 10\n\
         mc.rx_power_db = -70\nmc.gap_min_samples = 300\nmc.gap_max_samples = 700\n",
    );
    let args = ["mc", "--scenario", sc.to_str().unwrap(), "--packets", "12", "--seed", "3"];
    let a = run(&args);
    assert!(a.status.success());
    let report: serde_json::Value = serde_json::from_str(&stdout_utf8(&a)).unwrap();
    assert_eq!(report["tx_packets"], 12);
    assert_eq!(report["rx_packets"], 12);
    assert_eq!(report["false_positives"], 0);
    assert!(report["latency"]["mean_samples"].as_f64().unwrap() >= 504.0);
    let b = run(&args);
    assert_eq!(a.stdout, b.stdout);

    // zero packets still reports cleanly
    let out = run(&["mc", "--scenario", sc.to_str().unwrap(), "--packets", "0"]);
    let report: serde_json::Value = serde_json::from_str(&stdout_utf8(&out)).unwrap();
    assert_eq!(report["tx_packets"], 0);
    assert_eq!(report["rx_packets"], 0);

    // an mc run needs the mc section
    let plain = dir.path().join("plain.txt");
    write_file(&plain, "noise_floor_db = -90\n");
    let out = run(&["mc", "--scenario", plain.to_str().unwrap(), "--packets", "1"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn noise_only_trace_yields_no_packet_lines() {
    let dir = tempfile::tempdir().unwrap();
    let sc = dir.path().join("sc.txt");
    write_file(&sc, "noise_spread_db = 5.57\nseed = 21\ntrace_len_samples = 20000\n");
    let trace = dir.path().join("tr.csv");
    run(&[
        "synth",
        "--scenario",
        sc.to_str().unwrap(),
        "--out",
        trace.to_str().unwrap(),
    ]);
    let out = run(&["detect", "--trace", trace.to_str().unwrap()]);
    assert!(out.status.success());
    let lines = json_lines(&stdout_utf8(&out));
    assert!(lines_of_type(&lines, "packet").is_empty());
    assert!(lines_of_type(&lines, "action").is_empty());
}
