use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/tests/fixtures")
        .join(name)
}

fn flips(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_flips"))
        .args(args)
        .output()
        .expect("spawn flips")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Value of a `key=value` line.
fn field<'a>(text: &'a str, key: &str) -> Option<&'a str> {
    text.lines()
        .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
}

#[test]
fn run_two_rule_fixture() {
    let out = flips(&[
        "run",
        "--rules",
        s(&fixture("two_rule.frs")),
        "--input",
        s(&fixture("two_rule.obs")),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "8 8 8 8\n");
}

#[test]
fn run_zero_observation() {
    let dir = tempfile::tempdir().unwrap();
    let obs = dir.path().join("zero.obs");
    fs::write(&obs, "0 0 0 0\n").unwrap();
    let out = flips(&["run", "--rules", s(&fixture("two_rule.frs")), "--input", s(&obs)]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "0 0 0 0\n");
}

#[test]
fn malformed_rules_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let rules = dir.path().join("bad.frs");
    fs::write(&rules, "elements 2\nlevels 16\nantecedents 1\nrule\nA1 1 16\nC 1 1\n").unwrap();
    let out = flips(&["run", "--rules", s(&rules), "--input", s(&fixture("two_rule.obs"))]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("line 5"), "{err}");
}

#[test]
fn missing_file_exit_three() {
    let out = flips(&["run", "--rules", "/no/such/file.frs", "--input", "/no/such.obs"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn unknown_flag_exit_two() {
    let out = flips(&["run", "--bogus"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sim_full_size_matches_run_and_traces() {
    let dir = tempfile::tempdir().unwrap();
    let obs = dir.path().join("obs");
    let row: Vec<String> = (0..31).map(|i| ((i * 7) % 16).to_string()).collect();
    fs::write(&obs, row.join(" ") + "\n").unwrap();
    let trace = dir.path().join("trace.csv");
    let rules = fixture("published_format.frs");

    let sim = flips(&["sim", "--rules", s(&rules), "--input", s(&obs), "--trace", s(&trace)]);
    assert_eq!(sim.status.code(), Some(0));
    let text = stdout(&sim);
    assert_eq!(field(&text, "cycles"), Some("256"));

    let run = flips(&["run", "--rules", s(&rules), "--input", s(&obs)]);
    assert_eq!(text.lines().next(), stdout(&run).lines().next());

    let csv = fs::read_to_string(&trace).unwrap();
    assert!(csv.starts_with("cycle,phase,input_bit,output_bit,valid,alpha_0"));
    assert_eq!(csv.lines().count(), 256 + 1);
}

#[test]
fn sim_rejects_multi_antecedent() {
    let dir = tempfile::tempdir().unwrap();
    let rules = dir.path().join("two.frs");
    fs::write(&rules, "elements 2\nlevels 16\nantecedents 2\nrule\nA1 1 2\nA2 3 4\nC 5 6\n").unwrap();
    let obs = dir.path().join("obs");
    fs::write(&obs, "1 1\n2 2\n").unwrap();
    let out = flips(&["sim", "--rules", s(&rules), "--input", s(&obs)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("single-antecedent"));

    let golden = flips(&["run", "--rules", s(&rules), "--input", s(&obs)]);
    assert_eq!(stdout(&golden), "1 1\n");
}

#[test]
fn check_passes_and_is_reproducible() {
    let a = flips(&["check", "--trials", "10000", "--seed", "17"]);
    assert_eq!(a.status.code(), Some(0));
    let text = stdout(&a);
    assert_eq!(field(&text, "verdict"), Some("pass"));
    assert_eq!(field(&text, "trials"), Some("10000"));
    let b = flips(&["check", "--trials", "10000", "--seed", "17"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn check_fixed_rules() {
    let out = flips(&["check", "--rules", s(&fixture("two_rule.frs")), "--trials", "300"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(field(&stdout(&out), "elements"), Some("4"));
}

#[test]
fn check_reports_corrupted_rom() {
    let out = flips(&["check", "--trials", "200", "--seed", "1", "--flip-rom-bit", "0"]);
    assert_eq!(out.status.code(), Some(1));
    let text = stdout(&out);
    assert_eq!(field(&text, "verdict"), Some("fail"));
    assert!(field(&text, "counterexample_trial").is_some());
    assert_ne!(field(&text, "golden"), field(&text, "chip"));
}

#[test]
fn bench_reports_simulated_flips() {
    let out = flips(&["bench", "--duration", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert_eq!(field(&text, "simulated_flips"), Some("81250"));
    assert_eq!(field(&text, "cycles_per_inference"), Some("256"));
    assert_eq!(field(&text, "simulated_clock_hz"), Some("20800000"));
    assert_eq!(field(&text, "host_chip_repetitions"), Some("3"));
    let min: f64 = field(&text, "host_golden_flips_min").unwrap().parse().unwrap();
    let max: f64 = field(&text, "host_golden_flips_max").unwrap().parse().unwrap();
    assert!(min > 0.0 && min <= max);

    let half = flips(&["bench", "--duration", "1", "--clock-hz", "10400000"]);
    assert_eq!(field(&stdout(&half), "simulated_flips"), Some("40625"));

    let small = flips(&["bench", "--duration", "1", "--rules", s(&fixture("two_rule.frs"))]);
    let text = stdout(&small);
    assert_eq!(field(&text, "cycles_per_inference"), Some("40"));
    assert_eq!(field(&text, "simulated_flips"), Some("520000"));
}

#[test]
fn bench_rejects_short_duration() {
    let out = flips(&["bench", "--duration", "0.5"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn rom_dump_and_load() {
    let dir = tempfile::tempdir().unwrap();
    let image = dir.path().join("rules.from");
    let out = flips(&[
        "romdump",
        "--rules",
        s(&fixture("published_format.frs")),
        "--output",
        s(&image),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(field(&stdout(&out), "bits_per_rule"), Some("124"));
    assert_eq!(
        fs::read(&image).unwrap(),
        fs::read(fixture("published_format.from")).unwrap()
    );

    let loaded = flips(&["romload", "--input", s(&image)]);
    assert_eq!(loaded.status.code(), Some(0));
    let text = stdout(&loaded);
    assert!(text.contains("A1 2 4 15 9 6 3 1 0"));
    assert_eq!(text.matches("\nrule\n").count(), 16);

    let truncated = dir.path().join("short.from");
    let bytes = fs::read(&image).unwrap();
    fs::write(&truncated, &bytes[..100]).unwrap();
    let bad = flips(&["romload", "--input", s(&truncated)]);
    assert_eq!(bad.status.code(), Some(2));
}
