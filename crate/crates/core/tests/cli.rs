use std::process::{Command, Output};

use noma_aloha::cli::Manifest;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_noma-aloha"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn data_rows(doc: &str) -> Vec<Vec<String>> {
    doc.lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn num(cell: &str) -> f64 {
    cell.parse().unwrap()
}

#[test]
fn ladder_worked_example() {
    let doc = stdout(&["ladder", "--gamma-db", "3.0103", "--q", "4"]);
    let rows = data_rows(&doc);
    assert_eq!(rows[0], ["q", "v", "v_db"]);
    let levels: Vec<f64> = rows[1..].iter().map(|r| num(&r[1])).collect();
    for (got, want) in levels.iter().zip([54.0, 18.0, 6.0, 2.0]) {
        assert!((got - want).abs() < 0.01, "{levels:?}");
    }
    let m = Manifest::parse(&doc);
    assert_eq!(m.get("subcommand"), Some("ladder"));
    assert_eq!(m.get("gamma_db"), Some("3.0103"));
    assert!(m.get("gamma_linear").is_some());
}

#[test]
fn ladder_single_level() {
    let rows = data_rows(&stdout(&["ladder", "--gamma-db", "0", "--q", "1"]));
    assert_eq!(rows.len(), 2);
    assert_eq!(num(&rows[1][1]), 1.0);
    assert_eq!(num(&rows[1][2]), 0.0);
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(run(&["ladder", "--q", "0"]).status.code(), Some(2));
    assert_eq!(run(&["ladder"]).status.code(), Some(2));
    assert_eq!(run(&["ladder", "--q", "41"]).status.code(), Some(2));
    assert_eq!(run(&["simulate", "--q", "2", "--lambda", "-1"]).status.code(), Some(2));
    assert_eq!(
        run(&["simulate", "--q", "2", "--lambda", "1", "--channels", "0"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(run(&["bogus"]).status.code(), Some(2));
    assert_eq!(run(&["figure2", "--q-list", "0..2"]).status.code(), Some(2));
}

#[test]
fn oracle_rejects_large_q() {
    let out = run(&["oracle", "--q", "7", "--lambda", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("simulate"));
}

#[test]
fn oracle_report() {
    let doc = stdout(&["oracle", "--q", "1", "--lambda", "1", "--gamma-db", "3.0103"]);
    let rows = data_rows(&doc);
    let header = &rows[0];
    let row = &rows[1];
    let col = |name: &str| num(&row[header.iter().position(|h| h == name).unwrap()]);
    assert!((col("value") - (-1f64).exp()).abs() <= 1e-10);
    assert_eq!(col("upper"), col("lower"));
    assert_eq!(col("enumerated_states"), col("m_max") + 1.0);
}

#[test]
fn bounds_report() {
    let doc = stdout(&["bounds", "--q", "4", "--lambda", "2", "--channels", "3"]);
    let rows = data_rows(&doc);
    let col = |name: &str| num(&rows[1][rows[0].iter().position(|h| h == name).unwrap()]);
    assert!((col("lower") - 0.9135).abs() < 1e-4);
    assert_eq!(col("upper_total"), 3.0 * col("upper"));
    assert_eq!(col("lambda_lb_peak"), 2.0);
    assert!(Manifest::parse(&doc)
        .get("asymptotic_peak")
        .unwrap()
        .contains("approximation"));
}

#[test]
fn simulate_conventional_aloha_and_determinism() {
    let args = [
        "simulate",
        "--q",
        "1",
        "--gamma-db",
        "4",
        "--lambda",
        "1",
        "--slots",
        "1000000",
        "--seed",
        "7",
    ];
    let first = stdout(&args);
    assert_eq!(first, stdout(&args));
    let rows = data_rows(&first);
    let mean = num(&rows[1][3]);
    let se = num(&rows[1][4]);
    assert!((mean - (-1f64).exp()).abs() <= 4.0 * se);
    let m = Manifest::parse(&first);
    assert!(m.get("rng").unwrap().starts_with("chacha8-v1"));
    assert_eq!(m.get("seed"), Some("7"));
}

#[test]
fn strict_decoder_flag() {
    let base = [
        "simulate", "--q", "4", "--lambda", "4", "--slots", "1000000", "--seed", "11",
    ];
    let mean = |decoder: &str| {
        let mut args = base.to_vec();
        args.extend(["--decoder", decoder]);
        num(&data_rows(&stdout(&args))[1][3])
    };
    assert!(mean("strict") <= mean("paper"));
}

#[test]
fn figure1_zero_row_and_file_output() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fig1.csv");
    let path_str = path.to_str().unwrap();
    let out = run(&[
        "figure1",
        "--q",
        "4",
        "--lambda-grid",
        "0,1",
        "--slots",
        "20000",
        "--output",
        path_str,
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let doc = std::fs::read_to_string(&path).unwrap();
    let rows = data_rows(&doc);
    assert_eq!(rows[0], ["lambda", "upper", "lower", "sim_mean", "sim_se", "n_slots"]);
    assert_eq!(rows[1][..4], ["0", "0", "0", "0"]);
    assert!(!doc.contains('\r'));
}

#[test]
fn unwritable_output_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("missing").join("out.csv");
    let out = run(&["ladder", "--q", "2", "--output", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn figure2_first_row_is_conventional_aloha() {
    let doc = stdout(&["figure2", "--q-list", "1", "--slots", "200000"]);
    let rows = data_rows(&doc);
    assert_eq!(
        rows[0],
        [
            "q",
            "lambda_ub",
            "lambda_lb",
            "upper_at_lub",
            "lower_at_llb",
            "sim_at_lub",
            "se_ub",
            "sim_at_llb",
            "se_lb"
        ]
    );
    let r: Vec<f64> = rows[1].iter().map(|c| num(c)).collect();
    assert!((r[1] - 1.0).abs() < 1e-6);
    assert_eq!(r[2], 1.0);
    let e = (-1f64).exp();
    assert!((r[3] - e).abs() < 1e-10);
    assert!((r[4] - e).abs() < 1e-15);
    assert!((r[5] - e).abs() <= 4.0 * r[6]);
    assert!((r[7] - e).abs() <= 4.0 * r[8]);
}

#[test]
fn manifest_reproduces_output() {
    let doc = stdout(&[
        "figure1",
        "--q",
        "2",
        "--lambda-grid",
        "0.5:1.5:0.5",
        "--slots",
        "30000",
        "--seed",
        "42",
    ]);
    let m = Manifest::parse(&doc);
    let slots = m.get("slots").unwrap();
    let seed = m.get("seed").unwrap();
    let args = [
        "figure1",
        "--q",
        m.get("q").unwrap(),
        "--gamma-db",
        m.get("gamma_db").unwrap(),
        "--lambda-grid",
        m.get("lambda_grid").unwrap(),
        "--slots",
        slots,
        "--seed",
        seed,
        "--decoder",
        m.get("decoder").unwrap(),
    ];
    assert_eq!(stdout(&args), doc);
}

#[test]
fn thread_flag_does_not_change_output() {
    let base = ["figure2", "--q-list", "1..3", "--slots", "50000", "--seed", "9"];
    let one = stdout(&[&["--threads", "1"], &base[..]].concat());
    let four = stdout(&[&["--threads", "4"], &base[..]].concat());
    assert_eq!(one, four);
}
