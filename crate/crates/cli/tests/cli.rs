use std::path::Path;
use std::process::{Command, Output};

use chsh_cli::record::{RunRecord, RunResult, CSV_HEADER};
use serde_json::Value;

fn chsh(args: &[&str]) -> Output {
    chsh_env(args, None)
}

fn chsh_env(args: &[&str], seed_env: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_chsh"));
    cmd.args(args).env_remove("CHSH_SEED");
    if let Some(s) = seed_env {
        cmd.env("CHSH_SEED", s);
    }
    cmd.output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "failed: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn validator() -> jsonschema::Validator {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schema/run_record.schema.json");
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    jsonschema::draft202012::new(&schema).expect("schema compiles")
}

/// Parses, schema-checks and round-trips a record.
fn record(text: &str) -> RunRecord {
    let value: Value = serde_json::from_str(text).unwrap();
    let v = validator();
    let errors: Vec<String> = v.iter_errors(&value).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "schema violations: {errors:?}");
    let rec = RunRecord::from_json(text).unwrap();
    assert_eq!(RunRecord::from_json(&rec.to_json()).unwrap(), rec);
    assert_eq!(rec.to_json(), text);
    rec
}

#[test]
fn help_lists_defaults_and_exits_zero() {
    let text = stdout(&chsh(&["--help"]));
    for needle in ["check-breaking", "reproduce-table", "superactivate", "epsilon = 0.1", "restarts = 20", "CHSH_SEED"] {
        assert!(text.contains(needle), "{needle}");
    }
    assert!(stdout(&chsh(&["sweep", "--help"])).contains("[default: 0.4:0.5]"));
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad_cfg = dir.path().join("bad.cfg");
    std::fs::write(&bad_cfg, "restarts=2\nwobble=1\n").unwrap();
    let bad_cfg = bad_cfg.to_str().unwrap();
    for args in [
        vec![],
        vec!["frobnicate"],
        vec!["check-breaking", "ad"],
        vec!["check-breaking", "xx:0.5"],
        vec!["check-breaking", "ad:1.01"],
        vec!["activate", "single", "ad:0.5", "ad:0.5"],
        vec!["activate", "uni", "ad:0.5"],
        vec!["activate", "uni", "ad:0.5", "ad:0.5", "--symmetric"],
        vec!["sweep", "single", "ad", "ad"],
        vec!["superactivate", "ad:0.5", "er:0.5"],
        vec!["sweep", "bi", "ad", "ad", "--step", "0"],
        vec!["--restarts", "0", "check-breaking", "ad:0.5"],
        vec!["--config", bad_cfg, "check-breaking", "ad:0.5"],
        vec!["--config", "/nonexistent/file.cfg", "check-breaking", "ad:0.5"],
    ] {
        let o = chsh(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
    assert_eq!(chsh_env(&["check-breaking", "ad:0.5"], Some("seven")).status.code(), Some(2));
}

#[test]
fn check_breaking_examples() {
    let text = stdout(&chsh(&["--restarts", "4", "check-breaking", "ad:0.5", "dep:0.8", "er:1.0"]));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("ad:0.5") && lines[0].contains("breaking=true"));
    assert!(lines[0].contains("threshold=0.5000000000"));
    assert!(lines[1].contains("breaking=false") && lines[1].contains("numerical=2.2627"));
    assert!(lines[2].contains("breaking=false"));
    assert!(text.lines().all(|l| l.ends_with("consistent=true")));

    let rec = record(&stdout(&chsh(&["--restarts", "2", "--json", "check-breaking", "dep:0.8"])));
    let RunResult::Breaking(checks) = &rec.result else { panic!("wrong result kind") };
    assert!((checks[0].numerical_value - 2.0 * 2f64.sqrt() * 0.8).abs() < 1e-6);
    assert!(rec.descriptor.is_some());
}

#[test]
fn activate_record_is_valid_and_reproducible() {
    let args = ["activate", "bi", "ad:0.5", "ad:0.5", "--restarts", "6", "--seed", "11"];
    let first = stdout(&chsh(&args));
    assert_eq!(first, stdout(&chsh(&args)));
    let rec = record(&first);
    assert_eq!((rec.command.as_str(), rec.seed, rec.config.restarts), ("activate", 11, 6));
    assert_eq!(rec.wall_time, None);
    assert_eq!(rec.version, env!("CARGO_PKG_VERSION"));
    let RunResult::Activation(a) = &rec.result else { panic!("wrong result kind") };
    assert!(a.best_value >= 2.011, "{}", a.best_value);
    assert!(a.activated && a.breaking_status_1 && a.breaking_status_2);
    assert_eq!(Some(&a.descriptor), rec.descriptor.as_ref());
}

#[test]
fn seed_comes_from_env_unless_flag_given() {
    let args = ["activate", "single", "dep:0.8", "--restarts", "1"];
    let from_env = record(&stdout(&chsh_env(&args, Some("42"))));
    assert_eq!((from_env.seed, from_env.config.seed), (42, 42));
    let mut with_flag = args.to_vec();
    with_flag.extend(["--seed", "5"]);
    assert_eq!(record(&stdout(&chsh_env(&with_flag, Some("42")))).seed, 5);
    assert_eq!(record(&stdout(&chsh(&args))).seed, 0);
}

#[test]
fn config_file_with_flag_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# search settings\nepsilon = 0.2\nrestarts = 2\nseed = 3\nmax_iterations = 300\n").unwrap();
    let cfg = cfg.to_str().unwrap();
    let rec = record(&stdout(&chsh(&["--config", cfg, "activate", "single", "ad:0.7"])));
    assert_eq!((rec.config.epsilon, rec.config.restarts, rec.seed), (0.2, 2, 3));
    let rec = record(&stdout(&chsh(&["--config", cfg, "--restarts", "1", "--seed", "8", "activate", "single", "ad:0.7"])));
    assert_eq!((rec.config.epsilon, rec.config.restarts, rec.seed), (0.2, 1, 8));
    assert_eq!(rec.config.max_iterations, 300);
}

#[test]
fn timing_fills_wall_time() {
    let rec = record(&stdout(&chsh(&["activate", "single", "dep:0.8", "--restarts", "1", "--timing"])));
    assert!(rec.wall_time.is_some_and(|t| t >= 0.0));
}

#[test]
fn schema_rejects_malformed_records() {
    let text = stdout(&chsh(&["activate", "single", "dep:0.8", "--restarts", "1"]));
    let good: Value = serde_json::from_str(&text).unwrap();
    let v = validator();
    assert!(v.is_valid(&good));
    let mut missing = good.clone();
    missing.as_object_mut().unwrap().remove("version");
    let mut extra = good.clone();
    extra["config"]["colour"] = Value::from(1);
    let mut wrong = good.clone();
    wrong["descriptor"]["kind"] = Value::from("tridirectional");
    let mut two = good.clone();
    two["result"]["sweep"] = Value::Null;
    for bad in [missing, extra, wrong, two] {
        assert!(!v.is_valid(&bad));
    }
}

#[test]
fn sweep_csv_layout_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let base = ["sweep", "bi", "ad", "ad", "--p1", "0.48:0.5", "--p2", "0.48:0.5", "--step", "0.01", "--restarts", "4", "--seed", "9"];
    for path in [&a, &b] {
        let mut args = base.to_vec();
        args.extend(["--out", path.to_str().unwrap()]);
        assert_eq!(stdout(&chsh(&args)), "");
    }
    let csv = std::fs::read_to_string(&a).unwrap();
    assert_eq!(csv.as_bytes(), std::fs::read(&b).unwrap().as_slice());
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some(CSV_HEADER));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 9);
    let keys: Vec<(f64, f64)> = rows.iter().map(|r| (r[0].parse().unwrap(), r[1].parse().unwrap())).collect();
    let mut sorted = keys.clone();
    sorted.sort_by(|x, y| x.partial_cmp(y).unwrap());
    assert_eq!(keys, sorted);
    assert_eq!(rows[0][0], "0.4800000000");
    for r in &rows {
        assert_eq!(r.len(), 4);
        let digits = r[2].chars().filter(char::is_ascii_digit).count();
        assert_eq!(digits, 10, "{}", r[2]);
        assert!(r[3] == "true" || r[3] == "false");
    }
    let corner: f64 = rows[8][2].parse().unwrap();
    assert!(corner >= 2.011, "{corner}");

    // stdout when --out is absent
    assert_eq!(stdout(&chsh(&base)), csv);
}

#[test]
fn sweep_with_large_step_has_one_row_and_json_record() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("one.csv");
    let args = ["sweep", "uni", "ad", "dep", "--p1", "0.5:0.5", "--p2", "0.7:0.71", "--step", "0.5", "--restarts", "2", "--json", "--out", out.to_str().unwrap()];
    let rec = record(&stdout(&chsh(&args)));
    let RunResult::Sweep(grid) = &rec.result else { panic!("wrong result kind") };
    assert_eq!(grid.points.len(), 1);
    assert!(rec.descriptor.is_none());
    assert_eq!(std::fs::read_to_string(&out).unwrap().lines().count(), 2);
}

#[test]
fn superactivate_symmetric_and_asymmetric() {
    let rec = record(&stdout(&chsh(&["superactivate", "ad:0.5", "--restarts", "6", "--seed", "2"])));
    let RunResult::Superactivation(s) = &rec.result else { panic!("wrong result kind") };
    assert!(s.symmetric_constraint && s.symmetric);
    assert!(s.v >= 2.0117, "{}", s.v);
    assert!(s.scheme_value >= 2.0058, "{}", s.scheme_value);
    assert!((s.scheme_value - (2.0 * s.v + 4.0) / 4.0).abs() <= 1e-6);

    let rec = record(&stdout(&chsh(&["superactivate", "ad:0.5", "loss:0.5", "--restarts", "2", "--seed", "2"])));
    let RunResult::Superactivation(s) = &rec.result else { panic!("wrong result kind") };
    assert!(!s.symmetric_constraint && !s.symmetric);
    assert!((s.scheme_value - s.predicted_scheme_value).abs() <= 1e-6);
}

#[test]
fn reproduce_table_rows() {
    let rec = record(&stdout(&chsh(&["reproduce-table", "--json", "--seed", "2026"])));
    let RunResult::Table(rows) = &rec.result else { panic!("wrong result kind") };
    assert_eq!(rows.len(), 6);
    for row in rows {
        assert!(row.pass, "{row:?}");
        assert!(row.achieved >= row.published - 5e-3);
    }
    let er = rows.iter().find(|r| r.published == 2.00164).expect("erasure row");
    assert_eq!(er.descriptor.channel1.to_string(), "er:0.5");
}
