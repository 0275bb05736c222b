use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, SQRT_2};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use bellrank::report::{ERROR_SCHEMA, REPORT_SCHEMA};
use bellrank_core::behavior::Outcome;
use bellrank_core::simulators::{pr_box_behavior, sample_trial_records, singlet_behavior, SingletAngles};
use serde_json::Value;
use tempfile::TempDir;

fn bellrank(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bellrank"))
        .arg("--out-dir")
        .arg(out)
        .args(args)
        .env_remove("BELLRANK_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn assert_valid(schema: &str, instance: &Value) {
    let schema: Value = serde_json::from_str(schema).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    let errors: Vec<String> =
        validator.iter_errors(instance).map(|e| format!("{} at {}", e, e.instance_path)).collect();
    assert!(errors.is_empty(), "schema violations: {errors:#?}");
}

/// Runs a subcommand that must succeed and returns its schema-checked report.
fn report(out: &Path, args: &[&str], name: &str) -> Value {
    let output = bellrank(out, args);
    assert!(output.status.success(), "{args:?}: {}", String::from_utf8_lossy(&output.stderr));
    let json: Value = serde_json::from_slice(&std::fs::read(out.join(name)).unwrap()).unwrap();
    assert_valid(REPORT_SCHEMA, &json);
    json
}

/// Runs a subcommand that must fail and returns its schema-checked error object.
fn failure(out: &Path, args: &[&str], code: i32) -> Value {
    let output = bellrank(out, args);
    assert_eq!(output.status.code(), Some(code), "{args:?}: {}", String::from_utf8_lossy(&output.stderr));
    let err: Value = serde_json::from_slice(&output.stderr).expect("stderr is one JSON object");
    assert_valid(ERROR_SCHEMA, &err);
    err
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn simulate_counts(dir: &TempDir, label: &str, scenario: &[&str], n: &str) -> PathBuf {
    let out = dir.path().join(label);
    let mut args = vec!["simulate"];
    args.extend_from_slice(scenario);
    args.extend_from_slice(&["--n", n, "--seed", "1", "--quiet"]);
    report(&out, &args, "simulate_report.json");
    out.join("counts.csv")
}

const COVERAGE_LHV: &str =
    "0.625,0.025,0.025,0.025,0.025,0.025,0.025,0.025,0.025,0.025,0.025,0.025,0.025,0.025,0.025,0.025";

#[test]
fn pr_box_round_trip_is_supra_quantum() {
    let dir = tempfile::tempdir().unwrap();
    let counts = simulate_counts(&dir, "sim", &["--pr-box"], "1000");
    let out = dir.path().join("chsh");
    let r = report(&out, &["chsh", path_str(&counts), "--quiet"], "chsh_report.json");
    let a = &r["analysis"];
    assert_eq!(a["chsh"]["classification"], "SUPRA_QUANTUM");
    assert_eq!(a["chsh"]["s_max_abs"], 4.0);
    assert_eq!(a["n_trials"], 4000);
    assert_eq!(a["conventions_examined"], 8);
    assert_eq!(a["bootstrap"]["intervals"].as_array().unwrap().len(), 8);
    assert_eq!(r["manifest"]["inputs"][0]["sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn singlet_round_trip_recovers_tsirelson() {
    let dir = tempfile::tempdir().unwrap();
    let counts = simulate_counts(
        &dir,
        "sim",
        &["--singlet", "0", "1.5707963267948966", "0.7853981633974483", "2.356194490192345"],
        "100000",
    );
    let sim: Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("sim/simulate_report.json")).unwrap()).unwrap();
    let truth = sim["analysis"]["truth"]["chsh"]["s_max_abs"].as_f64().unwrap();
    assert!((truth - 2.0 * SQRT_2).abs() < 1e-12);

    let out = dir.path().join("chsh");
    let r = report(&out, &["chsh", path_str(&counts), "--quiet"], "chsh_report.json");
    let s = r["analysis"]["chsh"]["s_max_abs"].as_f64().unwrap();
    assert!((s - 2.0 * SQRT_2).abs() < 0.03, "S = {s}");
    // The positive member of the best ± convention pair covers 2√2.
    let covered = r["analysis"]["bootstrap"]["intervals"].as_array().unwrap().iter().any(|iv| {
        let (lo, hi) = (iv["interval"]["lower"].as_f64().unwrap(), iv["interval"]["upper"].as_f64().unwrap());
        lo <= 2.0 * SQRT_2 && 2.0 * SQRT_2 <= hi
    });
    assert!(covered);
}

#[test]
fn lhv_round_trip_is_local_and_excludes_tsirelson() {
    let dir = tempfile::tempdir().unwrap();
    let counts = simulate_counts(&dir, "sim", &["--lhv", COVERAGE_LHV], "10000");
    let out = dir.path().join("chsh");
    let r = report(&out, &["chsh", path_str(&counts), "--convention", "+++-", "--quiet"], "chsh_report.json");
    let a = &r["analysis"];
    assert_eq!(a["chsh"]["classification"], "LOCAL");
    let iv = &a["bootstrap"]["intervals"][0]["interval"];
    assert!(iv["upper"].as_f64().unwrap() < 2.0 * SQRT_2);
    assert!(iv["lower"].as_f64().unwrap() <= 1.2 && 1.2 <= iv["upper"].as_f64().unwrap(), "{iv}");
}

#[test]
fn simulate_outputs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let run = |label: &str| {
        let out = dir.path().join(label);
        let r =
            report(&out, &["simulate", "--pr-box", "--n", "1000", "--seed", "7", "--quiet"], "simulate_report.json");
        (r["analysis"].to_string(), std::fs::read(out.join("counts.csv")).unwrap())
    };
    assert_eq!(run("a"), run("b"));
}

#[test]
fn stdout_echoes_the_report_unless_quiet() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let output = bellrank(&out, &["simulate", "--pr-box", "--n", "10"]);
    assert!(output.status.success());
    assert_eq!(output.stdout, std::fs::read(out.join("simulate_report.json")).unwrap());
    let quiet = bellrank(&out, &["simulate", "--pr-box", "--n", "10", "--quiet"]);
    assert!(quiet.stdout.is_empty());
}

fn trials_csv(records: &[bellrank_core::inference::TrialRecord]) -> String {
    let mut s = String::from("participant_id,x,y,a,b\n");
    for r in records {
        writeln!(s, "{},{},{},{},{}", r.participant_id, r.x, r.y, r.a.value(), r.b.value()).unwrap();
    }
    s
}

#[test]
fn trials_input_reports_participants_and_tests() {
    let dir = tempfile::tempdir().unwrap();
    let singlet = singlet_behavior(&SingletAngles::new(0.0, FRAC_PI_2, FRAC_PI_4, 3.0 * FRAC_PI_4));
    let mut records = Vec::new();
    for (k, id) in ["p1", "p2", "p3", "p4"].iter().enumerate() {
        records.extend(sample_trial_records(&singlet, 50, k as u64, id).unwrap());
    }
    // p5 never sees setting pair (1, 1) and must be excluded.
    let partial = sample_trial_records(&pr_box_behavior(), 5, 9, "p5").unwrap();
    records.extend(partial.into_iter().filter(|r| (r.x, r.y) != (1, 1)));
    let path = dir.path().join("trials.csv");
    std::fs::write(&path, trials_csv(&records)).unwrap();

    let out = dir.path().join("o");
    let r = report(
        &out,
        &["chsh", path_str(&path), "--t-test", "--permutations", "199", "--seed", "4", "--quiet"],
        "chsh_report.json",
    );
    let a = &r["analysis"];
    assert_eq!(a["input_kind"], "trials");
    assert_eq!(a["participants"]["included"].as_array().unwrap().len(), 4);
    assert_eq!(a["participants"]["excluded"][0]["participant_id"], "p5");
    let t = &a["naive_t_test_for_comparison"];
    assert_eq!(t["n_participants"], 4);
    assert_eq!(t["result"]["df"], 3);
    assert_eq!(t["convention_selected_from_data"], true);
    assert!(t["caveat"].as_str().unwrap().contains("comparison"));
    let p = a["permutation_test"]["result"]["p"].as_f64().unwrap();
    assert!((1.0 / 200.0..=1.0).contains(&p));
    assert_eq!(r["manifest"]["seeds"]["seed"], 4);
}

#[test]
fn bit_outcomes_match_plus_minus_encoding() {
    let dir = tempfile::tempdir().unwrap();
    let pm = simulate_counts(&dir, "sim", &["--pr-box"], "50");
    let text = std::fs::read_to_string(&pm).unwrap();
    let mut bits = String::from("x,y,a,b,count\n");
    for line in text.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        let bit = |v: &str| Outcome::from_value(v.parse().unwrap()).unwrap().bit();
        writeln!(bits, "{},{},{},{},{}", f[0], f[1], bit(f[2]), bit(f[3]), f[4]).unwrap();
    }
    let bit_path = dir.path().join("bits.csv");
    std::fs::write(&bit_path, bits).unwrap();

    let a = report(&dir.path().join("pm"), &["chsh", path_str(&pm), "--quiet"], "chsh_report.json");
    let b = report(
        &dir.path().join("bits"),
        &["chsh", path_str(&bit_path), "--bit-outcomes", "--quiet"],
        "chsh_report.json",
    );
    assert_eq!(a["analysis"]["chsh"], b["analysis"]["chsh"]);
    assert_eq!(b["analysis"]["outcome_encoding"], "bits");
}

#[test]
fn malformed_csv_is_a_schema_violation() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    std::fs::write(&path, "x,y,a,b,count\n0,0,1,1,10\n0,1,1,2,3\n").unwrap();
    let err = failure(&dir.path().join("o"), &["chsh", path_str(&path)], 2);
    assert_eq!(err["error"], "SchemaViolation");
    assert_eq!(err["line"], 3);

    std::fs::write(&path, "x,y,outcome\n").unwrap();
    assert_eq!(failure(&dir.path().join("o"), &["chsh", path_str(&path)], 2)["error"], "SchemaViolation");
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    assert_eq!(failure(&out, &["simulate", "--pr-box"], 2)["error"], "UsageError");
    assert_eq!(failure(&out, &["frobnicate"], 2)["error"], "UsageError");

    let table = dir.path().join("ranks.csv");
    std::fs::write(&table, "rank,count\n1,100\n2,50\n3,33\n").unwrap();
    let err = failure(&out, &["fit", path_str(&table), "--families", "zipf"], 2);
    assert_eq!(err["error"], "UsageError");
    assert!(err["message"].as_str().unwrap().contains("two"));
    assert_eq!(failure(&out, &["fit", path_str(&table), "--families", "zipf,nope"], 2)["error"], "UsageError");

    let counts = simulate_counts(&dir, "sim", &["--pr-box"], "10");
    assert_eq!(failure(&out, &["chsh", path_str(&counts), "--t-test"], 2)["error"], "UsageError");
    assert_eq!(failure(&out, &["chsh", "does-not-exist.csv"], 2)["error"], "IoError");
}

#[test]
fn help_and_version_exit_zero() {
    let dir = tempfile::tempdir().unwrap();
    for flag in ["--help", "--version"] {
        let output = bellrank(dir.path(), &[flag]);
        assert!(output.status.success());
        assert!(!output.stdout.is_empty());
    }
}

#[test]
fn signalling_counts_are_analysis_infeasible() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("signal.csv");
    // Alice always answers +1 when y = 0 and −1 when y = 1.
    std::fs::write(&path, "x,y,a,b,count\n0,0,1,1,10\n0,1,-1,1,10\n1,0,1,1,10\n1,1,-1,1,10\n").unwrap();
    let err = failure(&dir.path().join("o"), &["chsh", path_str(&path), "--local-tolerance", "1e-9"], 1);
    assert_eq!(err["error"], "AnalysisInfeasible");
    assert_eq!(err["kind"], "SignallingInput");
}

#[test]
fn local_model_block_for_local_data() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("local.csv");
    // A deterministic strategy: a = b = +1 everywhere.
    std::fs::write(&path, "x,y,a,b,count\n0,0,1,1,5\n0,1,1,1,5\n1,0,1,1,5\n1,1,1,1,5\n").unwrap();
    let r = report(
        &dir.path().join("o"),
        &["chsh", path_str(&path), "--local-tolerance", "1e-9", "--quiet"],
        "chsh_report.json",
    );
    let lm = &r["analysis"]["local_model"]["result"];
    assert_eq!(lm["status"], "feasible");
    let total: f64 = lm["weights"].as_array().unwrap().iter().map(|w| w.as_f64().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-9);
}

fn zipf_text(n: usize) -> String {
    // Deterministic Zipf(1)-like text: word k repeated ⌊600/k⌋ times, interleaved.
    let mut words = Vec::new();
    for k in 1..=n {
        for _ in 0..(600 / k).max(1) {
            words.push(format!("Word{k},"));
        }
    }
    words.join(" ")
}

#[test]
fn corpus_then_fit_on_rank_table() {
    let dir = tempfile::tempdir().unwrap();
    let text = dir.path().join("text.txt");
    std::fs::write(&text, zipf_text(300)).unwrap();
    let stop = dir.path().join("stop.txt");
    std::fs::write(&stop, "WORD1\n").unwrap();

    let cout = dir.path().join("corpus");
    let c = report(
        &cout,
        &["corpus", path_str(&text), "--case-fold", "--strip-punctuation", "--stopwords", path_str(&stop), "--quiet"],
        "corpus_report.json",
    );
    let a = &c["analysis"];
    // Case-folded stopwords remove the most frequent word.
    assert_eq!(a["top_tokens"][0]["token"], "word2");
    assert_eq!(a["preprocess"]["lemmatization"], false);
    assert_eq!(c["manifest"]["inputs"].as_array().unwrap().len(), 2);
    let config: Value = serde_json::from_slice(&std::fs::read(cout.join("preprocess_config.json")).unwrap()).unwrap();
    assert_eq!(config, a["preprocess"]);

    let fout = dir.path().join("fit");
    let f = report(
        &fout,
        &["fit", path_str(&cout.join("rank_table.csv")), "--families", "zipf,be_rank,mb_exponential", "--quiet"],
        "fit_report.json",
    );
    let fa = &f["analysis"];
    assert_eq!(fa["source"], "rank_table");
    let ranking = fa["ranking"].as_array().unwrap();
    assert_eq!(ranking.len(), 3);
    let aics: Vec<f64> = ranking.iter().map(|r| r["aic"].as_f64().unwrap()).collect();
    assert!(aics.windows(2).all(|w| w[0] <= w[1]));
    assert_eq!(fa["best_by_aic"], ranking[0]["spec"]["family"]);
    assert!(fa["regime"].is_object());

    let curves = std::fs::read_to_string(fout.join("fit_curves.csv")).unwrap();
    let header = curves.lines().next().unwrap();
    assert!(header.starts_with("rank,observed,expected_"));
    assert!(header.ends_with("be_small_i_approx,be_tail_approx"));
    assert_eq!(curves.lines().count() as u64, 1 + fa["support"].as_u64().unwrap());
}

#[test]
fn fit_raw_text_with_holdout() {
    let dir = tempfile::tempdir().unwrap();
    let text = dir.path().join("text.txt");
    std::fs::write(&text, zipf_text(200)).unwrap();
    let out = dir.path().join("o");
    let r = report(
        &out,
        &["fit", path_str(&text), "--raw-text", "--families", "zipf,zipf_mandelbrot", "--holdout", "0.25", "--quiet"],
        "fit_report.json",
    );
    let h = &r["analysis"]["holdout"];
    let (train, test, oov) =
        (h["train_n"].as_u64().unwrap(), h["test_n"].as_u64().unwrap(), h["oov_count"].as_u64().unwrap());
    assert_eq!(train + test + oov, r["analysis"]["corpus"]["n_tokens"].as_u64().unwrap());
    assert_eq!(h["per_family"].as_array().unwrap().len(), 2);
    assert_eq!(r["analysis"]["source"], "raw_text");
}

#[test]
fn protocol_run_writes_a_log() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let r = report(
        &out,
        &["simulate", "--lhv", COVERAGE_LHV, "--protocol", "--session-policy", "per-block", "--n", "200", "--quiet"],
        "simulate_report.json",
    );
    assert_eq!(r["analysis"]["protocol"]["session_policy"], "PER_BLOCK");
    let log = std::fs::read_to_string(out.join("protocol_log.jsonl")).unwrap();
    assert_eq!(log.lines().count(), 200);
    let first: Value = serde_json::from_str(log.lines().next().unwrap()).unwrap();
    assert_eq!(first["trial"], 0);
    assert_eq!(first["alice_session"], first["x"]);
}

#[test]
fn schema_rejects_tampered_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let mut r = report(&out, &["simulate", "--pr-box", "--n", "10", "--quiet"], "simulate_report.json");
    let schema: Value = serde_json::from_str(REPORT_SCHEMA).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    r["analysis"]["truth"]["chsh"]["classification"] = "MAYBE".into();
    assert!(!validator.is_valid(&r));
    r["analysis"]["truth"]["chsh"]["classification"] = "SUPRA_QUANTUM".into();
    assert!(validator.is_valid(&r));
    r["manifest"]["subcommand"] = "chsh".into();
    assert!(!validator.is_valid(&r), "a simulate payload must not pass as a chsh report");
}
