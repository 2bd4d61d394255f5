use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn juicespec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_juicespec"))
        .args(args)
        .output()
        .unwrap()
}

fn code(args: &[&str]) -> i32 {
    juicespec(args).status.code().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn synth_twice_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    for out in [&a, &b] {
        assert_eq!(
            code(&[
                "synth",
                "--seed",
                "42",
                "--juices",
                "31",
                "--replicates",
                "3",
                "--out",
                s(out)
            ]),
            0
        );
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn evaluate_writes_metrics_and_predictions() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data.csv");
    let out = dir.path().join("r");
    assert_eq!(code(&["synth", "--out", s(&data)]), 0);
    let args = [
        "evaluate",
        "--data",
        s(&data),
        "--task",
        "region",
        "--model",
        "svm",
        "--cv",
        "loso",
        "--seed",
        "7",
    ];
    let mut with_out = args.to_vec();
    with_out.extend(["--out", s(&out)]);
    assert_eq!(code(&with_out), 0);

    let metrics: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("metrics.json")).unwrap()).unwrap();
    assert!(metrics["metrics"]["accuracy"].is_f64());
    assert!(metrics["metrics"]["f1"].is_f64());
    let predictions = fs::read_to_string(out.join("predictions.csv")).unwrap();
    assert_eq!(predictions.lines().next(), Some("sample_id,fold,y,y_hat"));
    assert_eq!(predictions.lines().count(), 1 + 93);

    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 7);
    assert_eq!(manifest["conventions"]["f1"], "macro average over classes present in y");
    assert_eq!(manifest["input"]["sha256"].as_str().unwrap().len(), 64);
    assert!(!out.join("metrics.json.partial").exists());
}

#[test]
fn single_region_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("one.csv");
    assert_eq!(
        code(&["synth", "--regions", "1", "--vineyards", "2", "--out", s(&data)]),
        0
    );
    let out = juicespec(&[
        "evaluate",
        "--data",
        s(&data),
        "--task",
        "region",
        "--cv",
        "loso",
        "--out",
        s(dir.path()),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("two classes"));
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data.csv");
    assert_eq!(code(&["synth", "--juices", "8", "--out", s(&data)]), 0);
    let d = s(&data);
    let o = s(dir.path());
    assert_eq!(code(&["frobnicate"]), 2);
    assert_eq!(code(&["evaluate", "--data", d]), 2);
    assert_eq!(code(&["evaluate", "--data", d, "--out", o, "--task", "sweetness"]), 2);
    assert_eq!(
        code(&["evaluate", "--data", d, "--out", o, "--task", "region", "--model", "knn"]),
        2
    );
    assert_eq!(
        code(&["evaluate", "--data", d, "--out", o, "--task", "region", "--cv", "kfold"]),
        2
    );
    assert_eq!(
        code(&["evaluate", "--data", d, "--out", o, "--task", "region", "--window", "250-300"]),
        2
    );
    assert_eq!(
        code(&["evaluate", "--data", d, "--out", o, "--task", "region", "--window", "100:300"]),
        2
    );
    assert_eq!(code(&["rank", "--data", d, "--out", o, "--top", "0"]), 2);
    assert_eq!(code(&["report", "--data", o, "--format", "pdf"]), 2);
    assert_eq!(code(&["--threads", "0", "validate", "--data", d]), 2);

    let config = dir.path().join("bad.cfg");
    fs::write(&config, "svm.gamma = 1\n").unwrap();
    assert_eq!(
        code(&[
            "evaluate",
            "--data",
            d,
            "--out",
            o,
            "--task",
            "region",
            "--config",
            s(&config)
        ]),
        2
    );
    fs::write(&config, "svm.c\n").unwrap();
    assert_eq!(
        code(&[
            "evaluate",
            "--data",
            d,
            "--out",
            o,
            "--task",
            "region",
            "--config",
            s(&config)
        ]),
        2
    );
}

#[test]
fn bad_data_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "sample_id,foo\nx,1\n").unwrap();
    assert_eq!(code(&["validate", "--data", s(&bad)]), 1);
    assert_eq!(code(&["validate", "--data", s(&dir.path().join("missing.csv"))]), 1);
    assert_eq!(code(&["report", "--data", s(dir.path())]), 1);
}

#[test]
fn config_file_overrides_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data.csv");
    assert_eq!(code(&["synth", "--juices", "8", "--out", s(&data)]), 0);
    let config = dir.path().join("rf.cfg");
    fs::write(
        &config,
        "# fewer, shallower trees\nrf.n_trees = 7\n\nrf.max_depth = 2\n",
    )
    .unwrap();
    let out = dir.path().join("r");
    let args = [
        "evaluate",
        "--data",
        s(&data),
        "--task",
        "bitterness",
        "--model",
        "rf",
        "--config",
        s(&config),
    ];
    let mut args = args.to_vec();
    args.extend(["--out", s(&out)]);
    assert_eq!(code(&args), 0);
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["run"]["hyperparameters"]["forest"]["n_trees"], 7);
    assert_eq!(manifest["run"]["hyperparameters"]["forest"]["max_depth"], 2);
}

#[test]
fn rank_and_report_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data.csv");
    assert_eq!(code(&["synth", "--out", s(&data)]), 0);
    let rank = dir.path().join("rank");
    let out = juicespec(&[
        "rank",
        "--data",
        s(&data),
        "--task",
        "bitterness",
        "--top",
        "3",
        "--out",
        s(&rank),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let topk = fs::read_to_string(rank.join("topk.csv")).unwrap();
    assert_eq!(String::from_utf8(out.stdout).unwrap(), topk);
    let lines: Vec<&str> = topk.lines().collect();
    assert_eq!(lines[0], "rank,bitterness_rf,bitterness_svm");
    assert_eq!(lines[1], "1,204,204");
    assert_eq!(lines.len(), 4);
    let importance = fs::read_to_string(rank.join("importance.csv")).unwrap();
    assert!(importance.starts_with("target,method,column_name,wavelength_nm,raw_score,normalized_score\n"));

    let eval = dir.path().join("eval");
    let args = [
        "evaluate",
        "--data",
        s(&data),
        "--task",
        "region,bitterness",
        "--model",
        "svm,rf",
        "--cv",
        "all",
    ];
    let mut args = args.to_vec();
    args.extend(["--out", s(&eval)]);
    assert_eq!(code(&args), 0);
    assert!(eval
        .join("region")
        .join("loso")
        .join("rf")
        .join("metrics.json")
        .exists());
    let report = juicespec(&["report", "--data", s(&eval)]);
    assert_eq!(report.status.code(), Some(0));
    let text = String::from_utf8(report.stdout).unwrap();
    assert!(text.contains("| SVR |"));
    assert!(text.contains("| SVM |"));
    assert!(text.contains("Region LOSO Accuracy"));
    assert!(text.contains("Bitterness LOJO MAE"));
}
