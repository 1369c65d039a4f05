use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn knntree(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_knntree"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn summary(output: &Output) -> Value {
    assert!(
        output.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    serde_json::from_slice(&output.stdout).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn three_point_tree() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "p.csv", "0\n1\n3\n");
    let out = dir.path().join("tree.json");
    let edges = dir.path().join("edges.csv");
    let result = knntree(&[
        "tree",
        "--input",
        &input,
        "--k",
        "1",
        "--out",
        out.to_str().unwrap(),
        "--edges",
        edges.to_str().unwrap(),
    ]);
    let s = summary(&result);
    assert_eq!(s["n"], 3);
    assert_eq!(s["d"], 1);
    assert_eq!(s["k"], 1);
    assert_eq!(s["leaf_count"], 1);
    assert_eq!(s["f_max"], 1.0 / 6.0);
    assert_eq!(std::fs::read_to_string(edges).unwrap(), "0,1\n1,2\n");

    let doc: Value = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    let levels: Vec<f64> = doc["vertex_level"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    assert_eq!(levels, vec![1.0 / 6.0, 1.0 / 6.0, 1.0 / 12.0]);
    assert_eq!(doc["roots"].as_array().unwrap().len(), 1);
}

#[test]
fn header_row_is_skipped() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "p.csv", "x,y\n0,0\n1,0\n0,2\n5,5\n");
    let s = summary(&knntree(&["tree", "--input", &input, "--header", "--k", "2"]));
    assert_eq!(s["n"], 4);
    assert_eq!(s["d"], 2);
}

#[test]
fn empty_csv_is_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "empty.csv", "");
    let result = knntree(&["tree", "--input", &input, "--k", "1"]);
    assert_eq!(result.status.code(), Some(2));
}

#[test]
fn bad_parameters_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "p.csv", "0\n1\n3\n");
    let result = knntree(&["tree", "--input", &input, "--k", "5"]);
    assert_eq!(result.status.code(), Some(3));
    let result = knntree(&["prune", "--input", &input, "--k", "1", "--epsilon", "fixed:-1"]);
    assert_eq!(result.status.code(), Some(3));
    let result = knntree(&["tree", "--input", &input, "--k", "1", "--theta", "0"]);
    assert_eq!(result.status.code(), Some(3));
}

#[test]
fn unknown_experiment_is_usage_error() {
    let result = knntree(&["experiment", "fig4"]);
    assert_eq!(result.status.code(), Some(3));
    assert!(!result.stderr.is_empty());
}

#[test]
fn runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(
        dir.path(),
        "spec.json",
        &serde_json::to_string(&knn_cluster_tree::synth::MixtureSpec::two_modes()).unwrap(),
    );
    let run = |name: &str| {
        let out = dir.path().join(name);
        let leaves = dir.path().join(format!("{name}.leaves"));
        let result = knntree(&[
            "prune",
            "--mixture",
            &spec,
            "--n",
            "300",
            "--seed",
            "4",
            "--out",
            out.to_str().unwrap(),
            "--leaves",
            leaves.to_str().unwrap(),
        ]);
        assert!(result.status.success());
        (
            result.stdout,
            std::fs::read(out).unwrap(),
            std::fs::read(leaves).unwrap(),
        )
    };
    assert_eq!(run("a.json"), run("b.json"));
}

#[test]
fn prune_limits() {
    let dir = tempfile::tempdir().unwrap();
    let rows: String = knn_cluster_tree::synth::MixtureSpec::two_modes()
        .sample(200, 9)
        .unwrap()
        .iter()
        .map(|p| format!("{},{}\n", p[0], p[1]))
        .collect();
    let input = write(dir.path(), "p.csv", &rows);
    let tree = summary(&knntree(&["tree", "--input", &input, "--k", "6"]));
    let zero = summary(&knntree(&["prune", "--input", &input, "--k", "6", "--epsilon", "fixed:0"]));
    assert_eq!(zero["leaf_count"], tree["leaf_count"]);
    assert_eq!(zero["epsilon_tilde"], 0.0);
    let huge = summary(&knntree(&["prune", "--input", &input, "--k", "6", "--epsilon", "fixed:1e9"]));
    assert_eq!(huge["leaf_count"], 1);
    let modes = knntree(&["modes", "--input", &input, "--k", "6", "--epsilon", "fixed:1e9"]);
    assert_eq!(String::from_utf8(modes.stdout).unwrap(), "1\n");
}

#[test]
fn fig3_left_means_do_not_increase() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fig3_left.csv");
    let result = knntree(&["experiment", "fig3_left", "--seeds", "10", "--out", out.to_str().unwrap()]);
    assert!(result.status.success());
    let mut reader = csv::Reader::from_path(out).unwrap();
    let mut means: Vec<(String, f64, f64)> = Vec::new();
    for record in reader.deserialize::<std::collections::HashMap<String, String>>() {
        let record = record.unwrap();
        if record["row_kind"] == "mean" {
            means.push((
                record["graph"].clone(),
                record["epsilon_tilde"].parse().unwrap(),
                record["mean_leaf_count"].parse().unwrap(),
            ));
        }
    }
    for kind in ["knn", "mutual"] {
        let series: Vec<&(String, f64, f64)> = means.iter().filter(|m| m.0 == kind).collect();
        assert_eq!(series.len(), 32);
        assert!(series.windows(2).all(|w| w[0].1 < w[1].1 && w[0].2 >= w[1].2));
    }
}
