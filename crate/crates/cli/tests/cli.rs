use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn fraudgan(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fraudgan"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) {
    let out = fraudgan(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

const SMALL_GAN: [&str; 8] = [
    "--gan",
    "max_iterations=20",
    "--gan",
    "probe_every=10",
    "--gan",
    "noise_dim=8",
    "--probe-rounds",
    "5",
];

#[test]
fn missing_dataset_is_a_config_error_with_usage() {
    let dir = tempfile::tempdir().unwrap();
    let out = fraudgan(&["train-gan", "--framework", "wgan", "--out", path(dir.path())]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("no dataset"), "{err}");
    assert!(err.contains("Usage: fraudgan train-gan"), "{err}");
}

#[test]
fn unknown_flag_and_bad_value_exit_2() {
    assert_eq!(fraudgan(&["evaluate", "--bogus"]).status.code(), Some(2));
    assert_eq!(fraudgan(&["evaluate", "--synth", "100,10,2,1", "--folds", "many"]).status.code(), Some(2));
    assert_eq!(fraudgan(&["evaluate", "--methods", "none,magic"]).status.code(), Some(2));
}

#[test]
fn unreadable_data_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.csv");
    let out = fraudgan(&["evaluate", "--data", path(&missing), "--out", path(dir.path())]);
    assert_eq!(out.status.code(), Some(3));
    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "V1,Class\n1.0,0\nx,1\n").unwrap();
    let out = fraudgan(&["evaluate", "--data", path(&bad), "--out", path(dir.path())]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn divergent_training_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec![
        "train-gan",
        "--synth",
        "200,40,2,2",
        "--framework",
        "gan",
        "--gan",
        "learning_rate=1e300",
        "--out",
        path(dir.path()),
    ];
    args.extend(SMALL_GAN);
    assert_eq!(fraudgan(&args).status.code(), Some(4));
}

#[test]
fn table1_preset_reaches_the_model_file() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec![
        "train-gan",
        "--synth",
        "200,40,2,2",
        "--framework",
        "wgan",
        "--preset",
        "table1",
        "--out",
        path(dir.path()),
    ];
    args.extend(SMALL_GAN);
    ok(&args);
    let model = fs::read_to_string(dir.path().join("model_wgan.txt")).unwrap();
    for line in ["learning_rate=0.011", "dropout=0.5", "hidden_nodes=63"] {
        assert!(model.lines().any(|l| l == line), "missing {line}");
    }
    let log = fs::read_to_string(dir.path().join("trainlog_wgan.csv")).unwrap();
    assert_eq!(log.lines().count(), 21);
}

#[test]
fn same_seed_gives_identical_trainlogs() {
    let dir = tempfile::tempdir().unwrap();
    for run in ["a", "b"] {
        let out = dir.path().join(run);
        let mut args = vec!["train-gan", "--synth", "200,40,2,2", "--framework", "cgan", "--out", path(&out)];
        args.extend(SMALL_GAN);
        ok(&args);
    }
    let read = |run: &str| fs::read(dir.path().join(run).join("trainlog_cgan.csv")).unwrap();
    assert_eq!(read("a"), read("b"));
}

#[test]
fn evaluate_rerun_from_manifest_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first");
    let mut args = vec![
        "evaluate",
        "--synth",
        "400,40,2,2",
        "--methods",
        "none,smote,wgan",
        "--folds",
        "4",
        "--jobs",
        "2",
        "--out",
        path(&first),
    ];
    args.extend(SMALL_GAN);
    ok(&args);
    let manifest = first.join("manifest.txt");
    let second = dir.path().join("second");
    ok(&["evaluate", "--config", path(&manifest), "--jobs", "1", "--out", path(&second)]);
    for name in ["reports.csv", "aggregate.csv", "roc.svg", "trainlog_wgan.csv"] {
        assert_eq!(
            fs::read(first.join(name)).unwrap(),
            fs::read(second.join(name)).unwrap(),
            "{name} differs"
        );
    }
    let aggregate = fs::read_to_string(first.join("aggregate.csv")).unwrap();
    assert_eq!(aggregate.lines().count(), 4);
    assert!(fs::read_to_string(&manifest).unwrap().contains("checksum.reports.csv="));
}

#[test]
fn single_method_aggregate_has_one_row() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["evaluate", "--synth", "300,30,2,2", "--methods", "none", "--folds", "3", "--out", path(dir.path())]);
    let aggregate = fs::read_to_string(dir.path().join("aggregate.csv")).unwrap();
    assert_eq!(aggregate.lines().count(), 2);
    assert!(aggregate.lines().nth(1).unwrap().starts_with("none,lr,3,"));
}

#[test]
fn trained_model_feeds_generate_balance_and_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let data_dir = dir.path().join("data");
    ok(&["synth-data", "--synth", "300,30,2,2", "--out", path(&data_dir)]);
    let data = data_dir.join("data.csv");
    let gan_dir = dir.path().join("gan");
    let mut args = vec!["train-gan", "--data", path(&data), "--framework", "wgan", "--out", path(&gan_dir)];
    args.extend(SMALL_GAN);
    ok(&args);
    let model = gan_dir.join("model_wgan.txt");

    let gen_dir = dir.path().join("gen");
    ok(&["generate", "--model", path(&model), "--count", "17", "--out", path(&gen_dir)]);
    let generated = fs::read_to_string(gen_dir.join("generated.csv")).unwrap();
    assert_eq!(generated.lines().count(), 18);

    let bal_dir = dir.path().join("bal");
    ok(&["balance", "--data", path(&data), "--method", "wgan", "--model", path(&model), "--out", path(&bal_dir)]);
    let balanced = fs::read_to_string(bal_dir.join("balanced.csv")).unwrap();
    assert_eq!(balanced.lines().filter(|l| l.ends_with(",1")).count(), 300);
    assert_eq!(balanced.lines().filter(|l| l.ends_with(",0")).count(), 300);

    let sweep_dir = dir.path().join("sweep");
    ok(&["sweep", "--data", path(&data), "--model", path(&model), "--out", path(&sweep_dir)]);
    let sweep = fs::read_to_string(sweep_dir.join("sweep.csv")).unwrap();
    assert_eq!(sweep.lines().next().unwrap(), "source,fraction,metric,value");
    assert_eq!(sweep.lines().filter(|l| l.contains(",auc,")).count(), 15);

    let out = fraudgan(&["sweep", "--data", path(&data), "--out", path(&sweep_dir)]);
    assert_eq!(out.status.code(), Some(2));
}
