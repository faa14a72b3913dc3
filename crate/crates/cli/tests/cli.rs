use std::fs;
use std::process::{Command, Output};

fn rcm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rcm"))
        .args(args)
        .env_remove("RCM_CONFIG")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn trace_succeeds_and_is_deterministic() {
    let a = rcm(&["trace", "--seed", "3"]);
    assert_eq!(a.status.code(), Some(0));
    let text = stdout(&a);
    assert!(text.contains("\nmutualAuth = true\n"));
    assert_eq!(text.lines().last(), Some("reportAccepted = true"));
    let b = rcm(&["trace", "--seed", "3"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn tampered_trace_is_a_protocol_rejection() {
    let o = rcm(&["trace", "--tamper", "m2.Y1"]);
    assert_eq!(o.status.code(), Some(3));
    let text = stdout(&o);
    assert!(
        text.lines().last().unwrap().contains("AuthResponseInvalid"),
        "{text}"
    );
    assert!(!text.contains("mutualAuth = true"));

    let o = rcm(&["trace", "--backend", "toy", "--tamper", "m4.l5"]);
    assert_eq!(o.status.code(), Some(3));

    let o = rcm(&["trace", "--tamper", "m9.zz"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn simulate_config_errors_and_io_errors() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "[rsu]\nspacing_m = 700.0\n").unwrap();
    let o = rcm(&["simulate", "--config", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("rsu.spacing_m"));

    let unknown = dir.path().join("unknown.toml");
    fs::write(&unknown, "[street]\nlenght_m = 5.0\n").unwrap();
    let o = rcm(&["simulate", "--config", unknown.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("lenght_m"));

    let missing = dir.path().join("missing.toml");
    let o = rcm(&["simulate", "--config", missing.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));

    let o = rcm(&[
        "simulate",
        "--duration-s",
        "5",
        "--out",
        "/nonexistent-dir/x.csv",
    ]);
    assert_eq!(o.status.code(), Some(4));

    let o = rcm(&["simulate", "--bogus-flag"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn simulate_single_run_and_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("s.toml");
    fs::write(
        &cfg,
        "[vehicles]\ncount = 6\n[sim]\nduration_s = 30.0\nseed = 9\n",
    )
    .unwrap();
    let log = dir.path().join("log.csv");
    let o = Command::new(env!("CARGO_BIN_EXE_rcm"))
        .args(["simulate", "--log", log.to_str().unwrap()])
        .env("RCM_CONFIG", &cfg)
        .output()
        .unwrap();
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let text = stdout(&o);
    let mut lines = text.lines();
    assert!(lines
        .next()
        .unwrap()
        .starts_with("vehicles,seed,backend,packets_sent"));
    assert!(lines.next().unwrap().starts_with("6,9,toy,"));
    let log_text = fs::read_to_string(&log).unwrap();
    assert!(log_text.starts_with("time_us,event,packet,message,src,dst,bytes,detail"));

    let out = dir.path().join("sweep.csv");
    let o = rcm(&[
        "simulate",
        "--sweep",
        "--counts",
        "5,10",
        "--seeds",
        "2",
        "--duration-s",
        "20",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(fs::read_to_string(&out).unwrap().lines().count(), 5);
}

#[test]
fn overhead_reports_divergences() {
    let o = rcm(&["overhead"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("mutual_authentication,rsu,3,1,0,4,4T_M + 4T_H,4T_M + 4T_H,152,152"));
    assert!(text.contains("report_generation,vehicle,0,0,0,1,T_H,T_H,44,44"));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("divergence: mutual_authentication/vehicle ops"));
    assert!(err.contains(
        "divergence: mutual_authentication/vehicle transmitted: measured 172, reference 280"
    ));
    assert!(
        err.contains("divergence: report_generation/rsu transmitted: measured 324, reference 216")
    );
}

#[test]
fn store_round_trip_and_failures() {
    let dir = tempfile::tempdir().unwrap();
    let snap = dir.path().join("store.txt");
    let snap_s = snap.to_str().unwrap();
    let o = rcm(&[
        "store",
        "dump",
        "--backend",
        "toy",
        "--seed",
        "4",
        "--reports",
        "7",
        "--out",
        snap_s,
    ]);
    assert_eq!(o.status.code(), Some(0));
    let o = rcm(&["store", "load", snap_s, "--backend", "toy", "--seed", "4"]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert_eq!(
        stdout(&o),
        "class,reports,alerted,created_at_ms\n0,3,true,1004\n1,2,false,1014\n2,2,false,1024\n"
    );

    let o = rcm(&[
        "store",
        "load",
        snap_s,
        "--backend",
        "bls12-381",
        "--seed",
        "4",
    ]);
    assert_eq!(o.status.code(), Some(2));

    let text = fs::read_to_string(&snap).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    let last = lines.last_mut().unwrap();
    let flipped = if last.ends_with('0') { '1' } else { '0' };
    last.pop();
    last.push(flipped);
    let corrupt = dir.path().join("corrupt.txt");
    fs::write(&corrupt, lines.join("\n")).unwrap();
    let o = rcm(&[
        "store",
        "load",
        corrupt.to_str().unwrap(),
        "--backend",
        "toy",
        "--seed",
        "4",
    ]);
    assert_eq!(o.status.code(), Some(3));

    let o = rcm(&["store", "load", "/nonexistent/snap.txt"]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn setup_and_small_attack_suite() {
    let o = rcm(&["setup", "--backend", "toy", "--seed", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("group=toy-z8191-g3\n"));
    assert!(text.contains("\ntau=2\n"));

    let o = rcm(&[
        "attack",
        "--backend",
        "toy",
        "--trials",
        "20",
        "--no-tamper",
        "--unlink-trials",
        "100",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("attack,expected,trials,successes,rejection_point,note\n"));
    assert_eq!(text.lines().count(), 1 + 11 + 2);
}
