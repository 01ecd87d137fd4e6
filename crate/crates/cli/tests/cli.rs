use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fca-outlier"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// 200 records on three attributes; every 20th is far off on `b` and `c`.
fn write_data(dir: &Path) -> PathBuf {
    let path = dir.join("data.csv");
    let mut text = String::from("rid,a,b,c,class\n");
    for i in 0..200u32 {
        let outlier = i % 20 == 7;
        let a = ((i * 37) % 101) as f64 / 10.0;
        let mut b = (i as f64 * 0.7).sin() * 3.0;
        let mut c = ((i * 13) % 17) as f64 - 8.0;
        if outlier {
            b = 9.0 + (i % 3) as f64;
            c = -20.0 - (i % 5) as f64;
        }
        text.push_str(&format!("id{i},{a},{b},{c},{}\n", outlier as u8));
    }
    fs::write(&path, text).unwrap();
    path
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn parse_csv_scores(text: &str) -> Vec<(String, String)> {
    text.lines()
        .skip(1)
        .map(|l| {
            let mut it = l.split(',');
            (
                it.next().unwrap().to_string(),
                it.next().unwrap().to_string(),
            )
        })
        .collect()
}

const COMMON: [&str; 8] = [
    "--label-column",
    "class",
    "--id-column",
    "rid",
    "--bins",
    "8",
    "--seed",
    "7",
];

#[test]
fn help_and_usage_errors() {
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&[]).status.code(), Some(1));
    assert_eq!(run(&["eval", "--input", "x.csv"]).status.code(), Some(1));
    assert_eq!(
        run(&["eval", "--input", "x.csv", "--bins", "abc"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
}

#[test]
fn data_errors_exit_with_two_and_name_the_cell() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("missing.csv");
    let o = run(&[
        "eval",
        "--input",
        p(&missing),
        "--label-column",
        "y",
        "--bins",
        "4",
    ]);
    assert_eq!(o.status.code(), Some(2));

    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "a,b,y\n1,2,0\n3,oops,1\n").unwrap();
    let o = run(&[
        "eval",
        "--input",
        p(&bad),
        "--label-column",
        "y",
        "--bins",
        "4",
    ]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(
        err.contains("bad.csv") && err.contains("row 3") && err.contains("\"b\""),
        "{err}"
    );
}

#[test]
fn bad_configuration_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let data = write_data(dir.path());
    let mut args = vec!["eval", "--input", p(&data)];
    args.extend(COMMON);
    args.extend(["--gamma", "0"]);
    assert_eq!(run(&args).status.code(), Some(1));
}

#[test]
fn eval_is_deterministic_and_thread_independent() {
    let dir = TempDir::new().unwrap();
    let data = write_data(dir.path());
    let mut args = vec!["eval", "--input", p(&data)];
    args.extend(COMMON);
    let first = run(&args);
    assert_eq!(
        first.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&first.stderr)
    );
    let second = run(&args);
    assert_eq!(first.stdout, second.stdout);

    let mut one = args.clone();
    one.extend(["--threads", "1"]);
    let mut four = args.clone();
    four.extend(["--threads", "4"]);
    assert_eq!(run(&one).stdout, run(&four).stdout);

    let metrics: serde_json::Value = serde_json::from_slice(&first.stdout).unwrap();
    assert!(metrics["auc"].as_f64().unwrap() > 0.9);
    assert_eq!(metrics["n_test"], 40);
    assert_eq!(metrics["seed"], 7);
    assert!(String::from_utf8_lossy(&first.stderr).contains("gamma="));
}

fn assert_fit_then_score_matches_eval(fit: &str, extra: &[&str]) {
    let dir = TempDir::new().unwrap();
    let data = write_data(dir.path());
    let eval_scores = dir.path().join("eval.csv");
    let model = dir.path().join("m.model");

    let mut args = vec![
        "eval",
        "--input",
        p(&data),
        "--scores-output",
        p(&eval_scores),
    ];
    args.extend(COMMON);
    args.extend(extra);
    if fit == "fit-sup" {
        args.push("--supervised");
    }
    assert_eq!(run(&args).status.code(), Some(0));

    let mut args = vec![fit, "--input", p(&data), "--output", p(&model)];
    args.extend(COMMON);
    args.extend(extra);
    let o = run(&args);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );

    let o = run(&[
        "score",
        "--model",
        p(&model),
        "--input",
        p(&data),
        "--label-column",
        "class",
        "--id-column",
        "rid",
        "--format",
        "csv",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let all: std::collections::HashMap<String, String> =
        parse_csv_scores(&stdout(&o)).into_iter().collect();
    let expected = parse_csv_scores(&fs::read_to_string(&eval_scores).unwrap());
    assert_eq!(expected.len(), 40);
    for (id, s) in expected {
        assert_eq!(all[&id], s, "score of {id}");
    }
}

#[test]
fn fit_unsup_then_score_reproduces_eval() {
    assert_fit_then_score_matches_eval("fit-unsup", &[]);
}

#[test]
fn fit_sup_then_score_reproduces_eval() {
    assert_fit_then_score_matches_eval(
        "fit-sup",
        &[
            "--epochs",
            "60",
            "--lr",
            "0.05",
            "--loss-orientation",
            "swapped",
        ],
    );
}

#[test]
fn explain_export_and_info() {
    let dir = TempDir::new().unwrap();
    let data = write_data(dir.path());
    let model = dir.path().join("m.model");
    let trace = dir.path().join("loss.csv");
    let mut args = vec![
        "fit-sup",
        "--input",
        p(&data),
        "--output",
        p(&model),
        "--loss-trace",
        p(&trace),
    ];
    args.extend(COMMON);
    args.extend(["--epochs", "30", "--loss-orientation", "swapped"]);
    assert_eq!(run(&args).status.code(), Some(0));
    assert_eq!(fs::read_to_string(&trace).unwrap().lines().count(), 31);

    let o = run(&[
        "explain",
        "--model",
        p(&model),
        "--object",
        "id7",
        "--input",
        p(&data),
        "--label-column",
        "class",
        "--id-column",
        "rid",
        "--top-k",
        "3",
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let e: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(e["object_id"], "id7");
    assert!(e["entries"].as_array().unwrap().len() <= 3);

    let o = run(&[
        "explain",
        "--model",
        p(&model),
        "--object",
        "id7",
        "--input",
        p(&data),
        "--label-column",
        "class",
        "--id-column",
        "rid",
        "--text",
    ]);
    assert!(stdout(&o).starts_with("Object id7"));

    let o = run(&["explain", "--model", p(&model), "--global"]);
    let g: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(g["entries"].as_array().unwrap().len(), 7);

    // Training objects carry the file's ids.
    let o = run(&["explain", "--model", p(&model), "--object", "id0"]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let o = run(&["explain", "--model", p(&model), "--object", "nope"]);
    assert_eq!(o.status.code(), Some(1));

    let o = run(&[
        "export-hist",
        "--model",
        p(&model),
        "--agenda",
        "b-c",
        "--format",
        "csv",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("closure_size,count\n"));

    let o = run(&[
        "export-heatmap",
        "--model",
        p(&model),
        "--x",
        "b",
        "--y",
        "2",
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let h: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(h["attribute_j"], "c");
    assert_eq!(h["cells"].as_array().unwrap().len(), 8);

    let o = run(&["info", "--model", p(&model)]);
    let info: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(info["kind"], "supervised");
    assert_eq!(info["bins"], 8);
    assert_eq!(info["agendas"].as_array().unwrap().len(), 7);
}

#[test]
fn agenda_file_and_score_column_check() {
    let dir = TempDir::new().unwrap();
    let data = write_data(dir.path());
    let agendas = dir.path().join("agendas.txt");
    fs::write(&agendas, "# expert view\nb, c\na\nfull\n").unwrap();
    let model = dir.path().join("m.model");
    let mut args = vec![
        "fit-unsup",
        "--input",
        p(&data),
        "--output",
        p(&model),
        "--agendas",
        p(&agendas),
    ];
    args.extend(COMMON);
    assert_eq!(run(&args).status.code(), Some(0));
    let info: serde_json::Value =
        serde_json::from_slice(&run(&["info", "--model", p(&model)]).stdout).unwrap();
    assert_eq!(info["agendas"].as_array().unwrap().len(), 3);

    let other = dir.path().join("other.csv");
    fs::write(&other, "a,b,z\n1,2,3\n").unwrap();
    let o = run(&["score", "--model", p(&model), "--input", p(&other)]);
    assert_eq!(o.status.code(), Some(2));
}
