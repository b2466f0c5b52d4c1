use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::{json, Value};

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn finex(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_finex")).args(args).output().unwrap()
}

fn likert(cmd: &str, extra: &[&str]) -> Output {
    let (input, labels) = (data("likert.csv"), data("likert_labels.txt"));
    let mut args = vec![cmd, "--input", &input, "--labels", &labels];
    args.extend_from_slice(extra);
    finex(&args)
}

fn stdout_json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn population_values() {
    let v = stdout_json(&likert("population", &["--m", "100"]));
    assert_eq!(v["command"], "population");
    assert_eq!(v["labels"], json!(["1", "2", "3", "4", "5"]));
    assert_eq!(v["histogram"], json!([3, 2, 0, 5, 0]));
    assert_eq!(v["prediction"]["values"], json!(["27/100", "1/5", "3/50", "41/100", "3/50"]));
    assert_eq!(v["prediction"]["mode"], "HT-approx");
    assert_eq!(v["bounds"]["beta"], "0/1");
}

#[test]
fn exact_population_under_uniform_prior() {
    let v = stdout_json(&likert("population", &["--m", "100", "--exact"]));
    assert_eq!(v["prediction"]["mode"], "exact");
    assert_eq!(v["prediction"]["values"], json!(["27/100", "1/5", "3/50", "41/100", "3/50"]));
}

#[test]
fn float_mode() {
    let v = stdout_json(&likert("population", &["--m", "100", "--mode", "float"]));
    let values: Vec<f64> = v["prediction"]["values"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_f64().unwrap())
        .collect();
    for (a, b) in values.iter().zip([0.27, 0.2, 0.06, 0.41, 0.06]) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn output_is_deterministic() {
    for cmd in ["predict", "population", "beta"] {
        let a = likert(cmd, &["--m", "100"]);
        let b = likert(cmd, &["--m", "100"]);
        assert!(a.status.success());
        assert_eq!(a.stdout, b.stdout, "{cmd}");
    }
}

#[test]
fn text_titles() {
    let out = likert("population", &["--m", "100", "--output", "text"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines.contains(&"Survey of size 10"));
    assert!(lines.contains(&"Prediction based on a survey of size 10"));
    assert!(lines.iter().any(|l| l.trim() == "Proportion of the electorate"));
}

#[test]
fn beta_and_crude_gamma() {
    let v = stdout_json(&likert("beta", &["--m", "100"]));
    assert_eq!(v["bounds"]["gamma"], "1/2");
    assert_eq!(v["prediction"]["gamma_crude"], "0/1");
    assert_eq!(v["prediction"]["crude_gamma_held"], false);
    assert_eq!(v["prediction"]["resolution"]["under_powered"], true);
    assert_eq!(v["prediction"]["resolution"]["recommended_k"], 1);
}

#[test]
fn zero_probability_sample_exits_3() {
    let out = likert("predict", &["--m", "100", "--prior", "iid:1/2,1/2,0,0,0"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("f_H^m would need to be revised"));
}

#[test]
fn validation_errors_exit_2() {
    let out = likert("population", &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("--m"));

    let out = likert("population", &["--m", "5"]);
    assert_eq!(out.status.code(), Some(2));

    let out = likert("population", &["--m", "100", "--prior", "beta"]);
    assert_eq!(out.status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "label\n1\n6\n").unwrap();
    let labels = data("likert_labels.txt");
    let out = finex(&["population", "--input", bad.to_str().unwrap(), "--labels", &labels, "--m", "10"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 3: unknown label '6'"));

    let out = finex(&["population", "--m", "10"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn atoms_prior() {
    let dir = tempfile::tempdir().unwrap();
    let atoms = dir.path().join("prior.json");
    std::fs::write(
        &atoms,
        r#"{"m": 3, "k": 2, "labels": ["no", "yes"],
            "atoms": [{"histogram": [3, 0], "weight": "1/4"}, {"histogram": [1, 2], "weight": 0.75}]}"#,
    )
    .unwrap();
    let survey = dir.path().join("survey.csv");
    std::fs::write(&survey, "label\nyes\n").unwrap();
    let prior = format!("atoms:{}", atoms.display());
    let out = finex(&[
        "predict",
        "--input",
        survey.to_str().unwrap(),
        "--labels",
        &data("yes_no.txt"),
        "--prior",
        &prior,
    ]);
    let v = stdout_json(&out);
    assert_eq!(v["m"], 3);
    assert_eq!(v["prediction"]["fstar"], json!(["1/2", "1/2"]));
    assert_eq!(v["prediction"]["ftilde"], json!(["1/3", "2/3"]));
}

#[test]
fn groups_command() {
    let dir = tempfile::tempdir().unwrap();
    let survey = dir.path().join("groups.csv");
    let mut csv = String::from("label,group\n");
    for l in ["4", "1", "2", "4", "1", "4", "2", "4", "1", "4"] {
        csv.push_str(&format!("{l},a\n"));
    }
    for l in 1..=5 {
        csv.push_str(&format!("{l},b\n"));
    }
    std::fs::write(&survey, csv).unwrap();
    let out = finex(&[
        "groups",
        "--input",
        survey.to_str().unwrap(),
        "--labels",
        &data("likert_labels.txt"),
        "--group-sizes",
        "a=60,b=40",
    ]);
    let v = stdout_json(&out);
    assert_eq!(v["m"], 100);
    assert_eq!(v["prediction"]["values"][0], "73/300");
}

#[test]
fn merge_demo() {
    let dir = tempfile::tempdir().unwrap();
    let survey = dir.path().join("six.csv");
    std::fs::write(&survey, "label\n1\n1\n2\n4\n5\n").unwrap();
    let labels = dir.path().join("six.txt");
    std::fs::write(&labels, "1,2,3,4,5,6").unwrap();
    let out = finex(&[
        "merge-demo",
        "--input",
        survey.to_str().unwrap(),
        "--labels",
        labels.to_str().unwrap(),
        "--m",
        "100",
        "--merge",
        "1->1,2->1,3->2,4->2,5->3,6->3",
    ]);
    let v = stdout_json(&out);
    assert_eq!(v["prediction"]["tv"], "1/22");
    assert_eq!(v["prediction"]["merged_histogram"], json!([3, 1, 1]));
}

#[test]
fn verify_generated_suite() {
    let out = finex(&["verify", "--suite", "frt", "--seed", "7", "--cases", "5"]);
    let v = stdout_json(&out);
    assert_eq!(v["prediction"]["passed"], true);
    assert_eq!(v["prediction"]["source"], "generated");
}

#[test]
fn simulate_is_reproducible() {
    let labels = data("likert_labels.txt");
    let args = ["simulate", "--labels", &labels, "--m", "20", "--n", "8", "--seed", "3"];
    let a = finex(&args);
    assert!(a.status.success(), "{}", stderr(&a));
    assert_eq!(a.stdout, finex(&args).stdout);
}

#[test]
fn plot_data_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("plot.csv");
    let out = likert("population", &["--m", "100", "--plot-data", path.to_str().unwrap()]);
    assert!(out.status.success());
    let csv = std::fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 6);
    assert!(lines[0].starts_with("label,"));
    assert!(lines[1].starts_with("1,3,"));
}
