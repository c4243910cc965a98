use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use layered_qkd::analysis::{Decision, SessionSummary, VerificationReport};
use layered_qkd::cli::{parse_listing, FactorizeReport, RunManifest};
use layered_qkd::protocol::RoundRecord;
use layered_qkd::qudit::DistributionTable;

fn lqkd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lqkd"))
        .args(args)
        .env_remove("LQKD_SEED")
        .output()
        .expect("spawn lqkd")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn run_in(dir: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["run", "--out", dir.to_str().unwrap()];
    args.extend_from_slice(extra);
    lqkd(&args)
}

#[test]
fn bd_no_eve_accepts_with_nonempty_layer_keys() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_in(tmp.path(), &["--protocol", "bd-ssskd", "--rounds", "100000", "--seed", "42"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let keys = tmp.path().join("keys");
    for layer in ["L1", "L2"] {
        let f = keys.join(format!("{layer}_key_CC-C.alice.hex"));
        assert!(fs::metadata(&f).unwrap().len() > 0, "{f:?}");
    }
    let a = fs::read_to_string(keys.join("L2_key_CC-C.alice.symbols")).unwrap();
    let b2 = fs::read_to_string(keys.join("L2_key_CC-C.bob2.symbols")).unwrap();
    assert_eq!(a, b2);

    let summary: SessionSummary =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary.verdict.decision, Decision::Accept);

    let records = fs::read_to_string(tmp.path().join("records.jsonl")).unwrap();
    let parsed: Vec<RoundRecord> = records.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(parsed.len(), 100_000);
    let again: String = parsed.iter().map(|r| r.to_json() + "\n").collect();
    assert_eq!(again, records);
}

#[test]
fn csskd_with_eve_exits_two() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_in(
        tmp.path(),
        &["--protocol", "c-sskd", "--rounds", "50000", "--seed", "7", "--eve", "intercept-resend:alice,bob:computational"],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(stdout(&out).contains("decision abort"));
}

#[test]
fn usage_and_config_errors_exit_one() {
    let tmp = tempfile::tempdir().unwrap();
    let cases: &[&[&str]] = &[
        &["--protocol", "p9"],
        &["--eve", "intercept-resend:bob1"],
        &["--eve", "intercept-resend:alice:computational"],
        &["--rounds", "0"],
        &["--basis-prob", "0.5,0.5"],
        &["--policy", "key=0.9,secret=0.9"],
        &["--check-fraction", "1.5"],
        &["--workers", "0"],
    ];
    for args in cases {
        let out = run_in(tmp.path(), args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
    let blocker = tmp.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let out = run_in(&blocker.join("sub"), &["--rounds", "10"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn workers_do_not_change_outputs() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let base = ["--protocol", "c-sskd", "--rounds", "30000", "--seed", "5"];
    let one = run_in(a.path(), &[&base[..], &["--workers", "1"]].concat());
    let eight = run_in(b.path(), &[&base[..], &["--workers", "8"]].concat());
    assert_eq!(one.status.code(), eight.status.code());
    for f in ["records.jsonl", "summary.json", "keys/all_key_all.alice.hex"] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn manifest_replays_the_run() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let csv = a.path().join("rates.csv");
    let out = run_in(
        a.path(),
        &["--protocol", "p3", "--rounds", "20000", "--seed", "9", "--basis-prob", "0.6", "--csv", csv.to_str().unwrap()],
    );
    assert!(out.status.success() || out.status.code() == Some(2));
    let manifest_path = a.path().join("manifest.json");
    let manifest: RunManifest = serde_json::from_str(&fs::read_to_string(&manifest_path).unwrap()).unwrap();
    assert_eq!(manifest.settings.session.seed, 9);
    assert_eq!(manifest.settings.session.basis_probabilities, [0.6; 3]);
    assert!(manifest.outputs.iter().any(|p| p.ends_with("rates.csv")));
    let csv_text = fs::read_to_string(&csv).unwrap();
    assert!(csv_text.starts_with("layer,class,kind,subpopulation,rounds,alphabet,bits,rate,bits_per_round,qber\n"));

    let replay = run_in(b.path(), &["--config", manifest_path.to_str().unwrap()]);
    assert_eq!(replay.status.code(), out.status.code());
    for f in ["records.jsonl", "summary.json"] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn toml_config_and_flag_precedence() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.toml");
    fs::write(
        &cfg,
        "protocol = \"p1\"\nrounds = 4000\nseed = 3\neve = \"intercept-resend:bob1:conjugate\"\n[check]\nmin_samples = 50\n",
    )
    .unwrap();
    let out_dir = tmp.path().join("o");
    let out = run_in(&out_dir, &["--config", cfg.to_str().unwrap(), "--rounds", "3000"]);
    assert!(out.status.code() == Some(0) || out.status.code() == Some(2));
    let m: RunManifest = serde_json::from_str(&fs::read_to_string(out_dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m.settings.session.rounds, 3000);
    assert_eq!(m.settings.session.seed, 3);
    assert_eq!(m.settings.check.min_samples, 50);
    assert_eq!(m.settings.session.eve.to_string(), "intercept-resend:bob1:conjugate");
    assert_eq!(m.input_config.as_deref(), Some(cfg.as_path()));
}

#[test]
fn seed_from_environment() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let env_run = Command::new(env!("CARGO_BIN_EXE_lqkd"))
        .args(["run", "--protocol", "p2", "--rounds", "2000", "--out", a.path().to_str().unwrap()])
        .env("LQKD_SEED", "77")
        .output()
        .unwrap();
    assert!(env_run.status.code().is_some());
    let flag_run = run_in(b.path(), &["--protocol", "p2", "--rounds", "2000", "--seed", "77"]);
    assert_eq!(env_run.status.code(), flag_run.status.code());
    assert_eq!(
        fs::read(a.path().join("records.jsonl")).unwrap(),
        fs::read(b.path().join("records.jsonl")).unwrap()
    );
}

#[test]
fn oracle_examples() {
    let out = lqkd(&["oracle", "--state", "eq8", "--bases", "comp,comp,comp"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let rows: Vec<_> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows, ["0,0,0 0.25", "1,1,1 0.25", "2,2,0 0.25", "3,3,1 0.25"]);

    let text = stdout(&lqkd(&["oracle", "--state", "eq6", "--bases", "conj,comp,conj"]));
    let marginal = text.lines().find(|l| l.starts_with("# marginal 1:")).unwrap();
    assert!(marginal.contains("3=0.571428571429"), "{marginal}");
    assert!((parse_listing(&text).unwrap().total() - 1.0).abs() < 1e-10);

    let text = stdout(&lqkd(&["oracle", "--state", "bell", "--bases", "conj,conj"]));
    let rows: Vec<_> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows, ["0,0 0.5", "1,1 0.5"]);

    let json = stdout(&lqkd(&["oracle", "--state", "bell", "--bases", "conj,conj", "--eve", "intercept-resend:0:computational", "--json"]));
    let t: DistributionTable = serde_json::from_str(&json).unwrap();
    assert_eq!(t.len(), 4);

    assert_eq!(lqkd(&["oracle", "--state", "eq42", "--bases", "comp"]).status.code(), Some(1));
    assert_eq!(lqkd(&["oracle", "--state", "bell", "--bases", "comp,diag"]).status.code(), Some(1));
}

#[test]
fn oracle_state_file() {
    let tmp = tempfile::tempdir().unwrap();
    let f = tmp.path().join("ghz.txt");
    fs::write(&f, "dims 2 2 2\n0,0,0 1 0\n1,1,1 1 0\n").unwrap();
    let out = lqkd(&["oracle", "--state-file", f.to_str().unwrap(), "--bases", "comp,comp,comp"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).lines().filter(|l| !l.starts_with('#')).count(), 2);
    fs::write(&f, "dims 3\n0 1 0\n").unwrap();
    let out = lqkd(&["factorize", "--state-file", f.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn verify_tables_exit_codes() {
    assert_eq!(lqkd(&["verify-tables", "--table", "3"]).status.code(), Some(0));
    assert_eq!(lqkd(&["verify-tables", "--table", "5"]).status.code(), Some(0));
    let t4 = lqkd(&["verify-tables", "--table", "4"]);
    assert_eq!(t4.status.code(), Some(3));
    assert!(stdout(&t4).contains("T4 DISCREPANCY"));
    assert_eq!(lqkd(&["verify-tables"]).status.code(), Some(3));
    assert_eq!(lqkd(&["verify-tables", "--table", "6"]).status.code(), Some(1));

    let json = stdout(&lqkd(&["verify-tables", "--json"]));
    let reports: Vec<VerificationReport> = serde_json::from_str(&json).unwrap();
    let consistent: Vec<_> = reports.iter().map(|r| r.is_consistent()).collect();
    assert_eq!(consistent, [true, false, true]);
    assert_eq!(serde_json::to_string_pretty(&reports).unwrap() + "\n", json);
}

#[test]
fn factorize_examples() {
    let text = stdout(&lqkd(&["factorize", "--state", "eq1"]));
    assert!(text.contains("{0,2} | {1,3,4}") && text.lines().any(|l| l.starts_with("{0,2} | {1,3,4}") && l.ends_with("product")));
    assert!(text.contains("verdict reducible"));
    for id in ["eq8", "eq3"] {
        let json = stdout(&lqkd(&["factorize", "--state", id, "--json"]));
        let r: FactorizeReport = serde_json::from_str(&json).unwrap();
        assert!(!r.reducible, "{id}");
        assert_eq!(r.cuts.len(), 15);
        assert!(r.min_ratio >= 1e-3);
    }
}
