use std::path::Path;
use std::process::{Command, Output};

fn margot(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_margot"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

const DATASET: &str = r#"
[dataset]
format = "generator"

[dataset.spec]
name = "tiny"
depth = 2
num_points = 24
bounds = [[0.0, 1.0], [0.0, 1.0]]
nodes = [
    { w = [1.0, 0.0], b = -0.5, margin = 0.05 },
    { w = [0.0, 1.0], b = -0.5, margin = 0.05 },
    { w = [0.0, 1.0], b = -0.3, margin = 0.05 },
]
"#;

fn write_config(dir: &Path, name: &str, head: &str, model: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, format!("{head}\n{DATASET}\n[model]\n{model}\n")).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn train_then_evaluate_and_plot() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "run.toml",
        "seed = 1\ntest_fraction = 0.25\nsearch_log = true\ndump_matrix = true",
        "variant = \"margot\"\ndepth = 2\nc_levels = [10.0, 10.0]",
    );
    let out_dir = dir.path().join("out");
    let out = margot(&["train", "--config", &config, "--out", out_dir.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    for file in ["report.json", "model.json", "plot.svg", "problem.miqp", "search.log"] {
        assert!(out_dir.join(file).exists(), "missing {file}");
    }
    let log = std::fs::read_to_string(out_dir.join("search.log")).unwrap();
    let first = log.lines().next().unwrap();
    let fields: Vec<&str> = first.split_whitespace().collect();
    assert_eq!(fields[0], "node");
    assert!(fields[1].parse::<u64>().is_ok());
    for (f, key) in fields[2..].iter().zip(["lb=", "ub=", "gap=", "depth="]) {
        assert!(f.starts_with(key), "{first}");
    }

    let model = out_dir.join("model.json");
    let out = margot(&["evaluate", "--config", &config, "--model", model.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(report["test"]["acc"].as_f64().is_some());

    let out = margot(&["plot", "--config", &config, "--model", model.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let svg = String::from_utf8(out.stdout).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("class=\"split\""));
    assert_eq!(svg, std::fs::read_to_string(out_dir.join("plot.svg")).unwrap());
}

#[test]
fn report_goes_to_stdout_without_output_dir() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "run.toml", "seed = 2", "variant = \"margot\"\ndepth = 1\nc_levels = [1.0]");
    let out = margot(&["train", "--config", &config, "--seed", "5", "--time-limit", "30"]);
    assert_eq!(code(&out), 0);
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["status"], "Optimal");
    assert_eq!(report["provenance"]["seed"], 5);
}

#[test]
fn infeasible_model_exits_with_2() {
    let dir = tempfile::tempdir().unwrap();
    // M_H below epsilon leaves no room for either routing direction
    let config = write_config(
        dir.path(),
        "run.toml",
        "seed = 0\nwarm_start = false",
        "variant = \"margot\"\ndepth = 2\nc_levels = [1.0, 1.0]\nm_h = 1e-4",
    );
    let out = margot(&["train", "--config", &config]);
    assert_eq!(code(&out), 2, "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["status"], "Infeasible");
}

#[test]
fn time_limit_without_incumbent_exits_with_3() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "run.toml",
        "seed = 0\nwarm_start = false",
        "variant = \"margot\"\ndepth = 3\nc_levels = [1e4, 1e4, 1e4]",
    );
    let out = margot(&["train", "--config", &config, "--time-limit", "1e-9"]);
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn configuration_problems_exit_with_4() {
    let dir = tempfile::tempdir().unwrap();
    let no_c = write_config(dir.path(), "a.toml", "seed = 0", "variant = \"margot\"\ndepth = 2");
    let bad_key = write_config(dir.path(), "b.toml", "seed = 0\ncolour = 1", "variant = \"margot\"\ndepth = 1\nc_levels = [1.0]");
    let cases: Vec<Vec<&str>> = vec![
        vec!["train", "--config", "/nonexistent/run.toml"],
        vec!["train", "--config", &no_c],
        vec!["cv", "--config", &bad_key],
        vec!["train", "--config", &bad_key, "--time-limit", "-1"],
        vec!["frobnicate"],
        vec!["train"],
        vec!["dims", "0", "2", "10"],
    ];
    for args in cases {
        let out = margot(&args);
        assert_eq!(code(&out), 4, "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn dims_and_synth() {
    let out = margot(&["dims", "2", "3", "10", "--variant", "hfs"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let value = |label: &str| -> usize {
        text.lines()
            .find(|l| l.starts_with(label))
            .and_then(|l| l.split_whitespace().last())
            .unwrap()
            .parse()
            .unwrap()
    };
    assert_eq!(value("continuous"), (3 + 1 + 10) * 3);
    assert_eq!(value("binary"), 10 * 2 + 3 * 3);
    assert_eq!(value("routing"), 2 * 10);
    assert_eq!(value("linking"), 2 * 3 * 3);
    assert_eq!(value("budget"), 3);

    let a = margot(&["synth", "4-partitions", "--seed", "9"]);
    let b = margot(&["synth", "4-partitions", "--seed", "9"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let csv = String::from_utf8(a.stdout).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "x1,x2,label");
    assert_eq!(csv.lines().count(), 1 + 108);
    assert_eq!(code(&margot(&["synth", "7-partitions"])), 4);
}
