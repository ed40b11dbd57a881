use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn sgan(out_dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sgan"))
        .args([
            "--variant",
            "2VP",
            "--t-obs",
            "4",
            "--t-pred",
            "4",
            "--epochs",
            "2",
        ])
        .args([
            "--set",
            "n_scenes=8",
            "--set",
            "n_test_scenes=3",
            "--n-samples",
            "3",
        ])
        .arg("--out-dir")
        .arg(out_dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(out: &Output) -> String {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn train_eval_predict_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();

    ok(&sgan(out, &["train"]));
    assert!(out.join("model.ckpt").exists());

    let stdout = ok(&sgan(out, &["eval", "--baselines"]));
    let metrics = fs::read_to_string(out.join("metrics.csv")).unwrap();
    let models: Vec<&str> = metrics
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap())
        .collect();
    assert_eq!(models, ["2VP", "linear", "lstm-only"]);
    assert!(stdout.starts_with("fold,model,n_samples,ade,fde,collision_rate,seconds"));

    let dump = out.join("samples.txt");
    ok(&sgan(out, &["predict", "-o", dump.to_str().unwrap()]));
    let rows = sgan::data::read_dump(&fs::read_to_string(&dump).unwrap(), &dump).unwrap();
    // 3 scenes x 3 samples x 4 steps for every person.
    assert_eq!(rows.len() % (3 * 4), 0);
    assert!(rows
        .iter()
        .all(|r| (1..=4).contains(&r.t) && r.sample_id < 3));

    let sweep = out.join("sweep.txt");
    ok(&sgan(
        out,
        &[
            "sweep",
            "--direction",
            "1",
            "--alphas=-1,0,1",
            "-o",
            sweep.to_str().unwrap(),
        ],
    ));
    let rows = sgan::data::read_dump(&fs::read_to_string(&sweep).unwrap(), &sweep).unwrap();
    assert_eq!(rows.iter().map(|r| r.sample_id).max(), Some(2));
}

#[test]
fn bench_prints_csv() {
    let dir = tempfile::tempdir().unwrap();
    let stdout = ok(&sgan(
        dir.path(),
        &["bench", "--sizes", "3", "--horizons", "4", "--reps", "1"],
    ));
    let mut lines = stdout.lines();
    assert_eq!(
        lines.next(),
        Some("model,n_people,t_pred,seconds,pool_calls")
    );
    assert_eq!(lines.count(), 4);
}

#[test]
fn conflicting_flags_fail_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let out = sgan(dir.path(), &["--k", "5", "train"]);
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(
        stderr.starts_with("error:") && stderr.contains("k = 5"),
        "{stderr}"
    );
    assert!(!dir.path().join("model.ckpt").exists());
}
