//! End-to-end tests of the `llike` binary: the documented command examples,
//! exit codes, output formats and the determinism guarantees.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_llike")
}

fn run(args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .output()
        .expect("binary should run")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

struct TempDir(PathBuf);

impl TempDir {
    fn new(tag: &str) -> TempDir {
        let path = std::env::temp_dir().join(format!("llike-it-{tag}-{}", std::process::id()));
        std::fs::create_dir_all(&path).unwrap();
        TempDir(path)
    }

    fn file(&self, name: &str) -> PathBuf {
        self.0.join(name)
    }
}

impl Drop for TempDir {
    fn drop(&mut self) {
        std::fs::remove_dir_all(&self.0).ok();
    }
}

fn write_set(dir: &TempDir, name: &str, values: &[u64]) -> PathBuf {
    let path = dir.file(name);
    let body: String = values.iter().map(|v| format!("{v}\n")).collect();
    std::fs::write(&path, body).unwrap();
    path
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn decompose_file_set() {
    let dir = TempDir::new("dec");
    let set = write_set(&dir, "a.txt", &[6, 5, 7, 11]);
    let out = run(&["decompose", "--set", path_str(&set)]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("composites (1): 6"), "{text}");
    assert!(text.contains("primes (3): 5 7 11"), "{text}");
    assert!(text.contains("spf: 6 -> 2"), "{text}");
}

#[test]
fn decompose_family_without_composites() {
    let out = run(&["decompose", "--family", "all-primes", "--xmax", "10"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("composites (0)"), "{text}");
    assert!(text.contains("primes (4): 2 3 5 7"), "{text}");
}

#[test]
fn decompose_rejects_non_coprime_set() {
    let dir = TempDir::new("bad");
    let set = write_set(&dir, "bad.txt", &[6, 10]);
    let out = run(&["decompose", "--set", path_str(&set)]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.contains('6') && err.contains("10"), "{err}");
}

#[test]
fn mean_of_the_first_ten_integers() {
    let out = run(&[
        "mean",
        "--family",
        "all-primes",
        "--variant",
        "big-omega",
        "--x",
        "10",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(
        stdout(&out).contains("count=0 value=0.0"),
        "{}",
        stdout(&out)
    );
}

#[test]
fn degenerate_correlation_spec_is_a_usage_error() {
    let out = run(&[
        "correlate",
        "--family",
        "all-primes",
        "--x",
        "100",
        "--k",
        "2",
        "--a",
        "1,2",
        "--h",
        "1,2",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("degenerate"), "{}", stderr(&out));
}

#[test]
fn missing_required_value_is_a_usage_error() {
    let out = run(&["mean", "--family", "all-primes"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["semigroup", "--family", "all-primes"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["mean", "--x", "10"]);
    assert_eq!(out.status.code(), Some(2), "no set source given");
}

#[test]
fn verify_passes_and_reports() {
    let out = run(&["verify", "--seed", "42", "--nmax", "600", "--sets", "3"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("all identities hold"), "{text}");
    assert_eq!(text.matches("PASS").count(), 4, "{text}");
}

#[test]
fn grid_json_embeds_resolved_config_and_is_worker_invariant() {
    let dir = TempDir::new("grid");
    let out1 = dir.file("w1.json");
    let out4 = dir.file("w4.json");
    for (path, workers) in [(&out1, "1"), (&out4, "4")] {
        let out = run(&[
            "grid",
            "--family",
            "all-primes",
            "--grid",
            "100,1000,10000",
            "--a",
            "1,1",
            "--h",
            "1,2",
            "--workers",
            workers,
            "--out",
            path_str(path),
        ]);
        assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    }
    let b1 = std::fs::read(&out1).unwrap();
    let b4 = std::fs::read(&out4).unwrap();
    assert_eq!(b1, b4, "grid output must not depend on --workers");

    let parsed: serde_json::Value = serde_json::from_slice(&b1).unwrap();
    assert_eq!(parsed["config"]["command"], "grid");
    assert_eq!(parsed["config"]["coeffs"], serde_json::json!([1, 1]));
    assert_eq!(parsed["config"]["variant"], "big-omega");
    assert_eq!(parsed["report"]["entries"].as_array().unwrap().len(), 3);
}

#[test]
fn config_file_supplies_defaults_and_flags_override() {
    let dir = TempDir::new("cfg");
    let cfg = dir.file("run.json");
    std::fs::write(
        &cfg,
        r#"{"family": "all-primes", "variant": "big-omega", "x": 100}"#,
    )
    .unwrap();
    let out = run(&["mean", "--config", path_str(&cfg)]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).contains("x=100 count=-2"), "{}", stdout(&out));

    let out = run(&["mean", "--config", path_str(&cfg), "--x", "1000"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(
        stdout(&out).contains("x=1000 count=-14"),
        "{}",
        stdout(&out)
    );
}

#[test]
fn sieve_dump_binary_round_trips() {
    let dir = TempDir::new("dump");
    let dump = dir.file("t.bin");
    let out = run(&[
        "sieve-dump",
        "--family",
        "all-primes",
        "--lo",
        "1",
        "--hi",
        "500",
        "--out",
        path_str(&dump),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let bytes = std::fs::read(&dump).unwrap();
    assert_eq!(&bytes[..4], b"LLSV");
    let table = llike_core::report::read_sieve_dump(&mut bytes.as_slice()).unwrap();
    let set = llike_core::builtin_family(
        &llike_core::FamilySpec::AllPrimes,
        llike_core::Variant::BigOmega,
        500,
    )
    .unwrap();
    let expected = llike_core::sieve::sieve_range(&set, 1, 500).unwrap();
    assert_eq!(table, expected);
}

#[test]
fn sieve_dump_csv_lists_counts() {
    let dir = TempDir::new("dumpcsv");
    let set = write_set(&dir, "six.txt", &[6]);
    let out = run(&[
        "sieve-dump",
        "--set",
        path_str(&set),
        "--lo",
        "70",
        "--hi",
        "74",
        "--with-c-part",
        "--format",
        "csv",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.starts_with("n,omega,big_omega,lambda,n_c"), "{text}");
    assert!(text.contains("72,1,2,1,36"), "{text}");
}

#[test]
fn semigroup_csv_matches_expected_enumeration() {
    let dir = TempDir::new("sg");
    let set = write_set(&dir, "c.txt", &[6, 35]);
    let out = run(&[
        "semigroup",
        "--set",
        path_str(&set),
        "--x",
        "250",
        "--format",
        "csv",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines,
        vec![
            "element,exponents",
            "1,",
            "6,6/1",
            "35,35/1",
            "36,6/2",
            "210,6/1 35/1",
            "216,6/3",
        ]
    );
}

#[test]
fn bounds_sweep_csv_and_svg() {
    let dir = TempDir::new("bounds");
    let csv = dir.file("b.csv");
    let svg = dir.file("b.svg");
    let out = run(&[
        "bounds",
        "--family",
        "all-primes",
        "--x-grid",
        "100,1000,10000",
        "--format",
        "csv",
        "--out",
        path_str(&csv),
        "--svg",
        path_str(&svg),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(
        text.starts_with("x,k,recip_sum,envelope,measured,ratio"),
        "{text}"
    );
    assert_eq!(text.lines().count(), 4);
    let svg_text = std::fs::read_to_string(&svg).unwrap();
    assert!(svg_text.starts_with("<svg"));
    assert!(svg_text.contains("measured") && svg_text.contains("envelope"));
}

#[test]
fn mean_with_expansion_reports_exact_match() {
    let out = run(&[
        "mean",
        "--family",
        "augmented-primes",
        "--inject",
        "6",
        "--x",
        "10000",
        "--tail-threshold",
        "36",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("exact_match=true"), "{text}");
    assert!(text.contains("bound_holds=true"), "{text}");
}

#[test]
fn dump_range_cap_and_set_bound_violations_exit_2() {
    let out = run(&[
        "sieve-dump",
        "--family",
        "all-primes",
        "--lo",
        "1",
        "--hi",
        "999999999",
        "--out",
        "/dev/null",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("cap"), "{}", stderr(&out));

    let out = run(&[
        "mean",
        "--family",
        "all-primes",
        "--xmax",
        "50",
        "--x",
        "100",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("bound"), "{}", stderr(&out));
}

#[test]
fn segment_length_env_does_not_change_results() {
    let base = run(&["mean", "--family", "all-primes", "--x", "100000"]);
    let alt = Command::new(bin())
        .args(["mean", "--family", "all-primes", "--x", "100000"])
        .env("LLIKE_SEGMENT_LEN", "8192")
        .output()
        .unwrap();
    assert_eq!(base.status.code(), Some(0));
    assert_eq!(alt.status.code(), Some(0));
    // same count despite a different segmentation
    assert_eq!(
        stdout(&base).lines().next().unwrap().split("count=").nth(1),
        String::from_utf8_lossy(&alt.stdout)
            .lines()
            .next()
            .unwrap()
            .split("count=")
            .nth(1)
            .map(|s| s.to_string())
            .as_deref()
    );
}
