//! End-to-end runs of the `soundq` binary.

use std::path::Path;
use std::process::{Command, Output, Stdio};

use sha2::{Digest, Sha256};
use soundq::metrics::{analyze_records, AnalysisConfig, MetricRecord};
use soundq::signal::read_wav;
use soundq::stimuli::{jittered_spec, synth, test_tone, StimulusClass, TestTone};

fn soundq(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_soundq")).current_dir(dir).args(args).output().expect("binary runs")
}

fn sha(path: &Path) -> String {
    hex::encode(Sha256::digest(std::fs::read(path).unwrap()))
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn synth_is_byte_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["a.wav", "b.wav"] {
        let o = soundq(dir.path(), &["synth", "engine-boom", "--seed", "7", "-o", name]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    assert_eq!(sha(&dir.path().join("a.wav")), sha(&dir.path().join("b.wav")));
    let spec = jittered_spec(StimulusClass::EngineBoom, 7, 0);
    assert_eq!(read_wav(dir.path().join("a.wav")).unwrap().samples(), {
        let s = synth(&spec).unwrap();
        s.samples().iter().map(|&x| x as f32 as f64).collect::<Vec<_>>()
    });
}

#[test]
fn tone_above_nyquist_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let o = soundq(dir.path(), &["synth", "wind-whistle", "--tone-freq", "9000", "--sample-rate", "16000", "-o", "w.wav"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(!dir.path().join("w.wav").exists());
}

#[test]
fn flag_for_another_class_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let o = soundq(dir.path(), &["synth", "road-noise", "--tone-freq", "3000", "-o", "r.wav"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unwritable_output_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = soundq(dir.path(), &["synth", "road-noise", "-o", "missing/dir/r.wav"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn analyze_matches_library_bitwise() {
    let dir = tempfile::tempdir().unwrap();
    let o = soundq(dir.path(), &["synth", "road-noise", "--seed", "1", "-o", "r.wav"]);
    assert_eq!(o.status.code(), Some(0));
    let o = soundq(dir.path(), &["analyze", "r.wav"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let cli: Vec<MetricRecord> = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(cli.len(), 8);
    assert!(cli.iter().all(|r| r.value.is_some_and(f64::is_finite)));

    let sig = read_wav(dir.path().join("r.wav")).unwrap();
    let lib: Vec<MetricRecord> =
        analyze_records(&sig, &AnalysisConfig::default()).into_iter().map(|o| o.result.unwrap()).collect();
    assert_eq!(cli.len(), lib.len());
    for (c, l) in cli.iter().zip(&lib) {
        assert_eq!(c.metric, l.metric);
        assert_eq!(c.value.map(f64::to_bits), l.value.map(f64::to_bits), "{}", c.metric);
    }
}

#[test]
fn analyze_reads_stdin_and_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    soundq(dir.path(), &["synth", "wind-whistle", "-o", "w.wav"]);
    let mut child = Command::new(env!("CARGO_BIN_EXE_soundq"))
        .current_dir(dir.path())
        .args(["analyze", "-", "--format", "csv", "-o", "w.csv"])
        .stdin(Stdio::piped())
        .spawn()
        .unwrap();
    std::io::Write::write_all(&mut child.stdin.take().unwrap(), &std::fs::read(dir.path().join("w.wav")).unwrap())
        .unwrap();
    assert!(child.wait().unwrap().success());
    let text = std::fs::read_to_string(dir.path().join("w.csv")).unwrap();
    assert!(text.starts_with("metric,value,unit,variant,params_hash\n"), "{text}");
    assert_eq!(text.lines().count(), 9);
    assert!(!text.contains('\r'));
    assert!(dir.path().join("w.manifest.json").exists());
}

#[test]
fn analyze_of_silence_fails_with_reasons() {
    let dir = tempfile::tempdir().unwrap();
    let sig = test_tone(TestTone::Silence, 2.0, 48_000).unwrap();
    soundq::signal::write_wav(&sig, dir.path().join("s.wav")).unwrap();
    let o = soundq(dir.path(), &["analyze", "s.wav"]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("absolute gate"), "{err}");
    assert!(err.contains("roughness_proxy"), "{err}");
}

#[test]
fn analyze_of_missing_file_is_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(soundq(dir.path(), &["analyze", "nope.wav"]).status.code(), Some(2));
}

#[test]
fn dataset_train_eval_pca_chain() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let o = soundq(d, &["dataset", "--n", "12", "--seed", "5", "-o", "ds.csv"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = std::fs::read_to_string(d.join("ds.csv")).unwrap();
    assert!(csv.starts_with("n,s,r,f,t,pa,label\n"));
    assert_eq!(csv.lines().count(), 37);
    assert!(d.join("ds.json").exists());

    for kind in ["rf", "logreg", "svm"] {
        let model = format!("{kind}.json");
        let o = soundq(d, &["train", kind, "--dataset", "ds.csv", "-o", &model, "--trees", "20"]);
        let want = if kind == "rf" { 0 } else { 2 };
        if kind != "rf" {
            // --trees does not apply to this kind.
            assert_eq!(o.status.code(), Some(want), "{kind}: {}", stderr(&o));
            let o = soundq(d, &["train", kind, "--dataset", "ds.csv", "-o", &model]);
            assert_eq!(o.status.code(), Some(0), "{kind}: {}", stderr(&o));
        } else {
            assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        }
        let eval = format!("eval_{kind}.json");
        let conf = format!("confusion_{kind}.csv");
        let o = soundq(d, &["eval", "--model", &model, "--dataset", "ds.csv", "-o", &eval, "--confusion", &conf]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        let stdout = String::from_utf8_lossy(&o.stdout);
        let line = stdout.lines().find(|l| l.starts_with("accuracy: ")).unwrap();
        assert_eq!(line.len(), "accuracy: 0.00".len(), "{line}");

        let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(d.join(&eval)).unwrap()).unwrap();
        let confusion: Vec<Vec<u64>> = serde_json::from_value(report["confusion"].clone()).unwrap();
        let trace: u64 = (0..3).map(|i| confusion[i][i]).sum();
        let total: u64 = confusion.iter().flatten().sum();
        assert_eq!(report["accuracy"].as_f64().unwrap(), trace as f64 / total as f64);
        assert_eq!(std::fs::read_to_string(d.join(&conf)).unwrap().lines().count(), 4);
    }

    let o = soundq(d, &["pca", "--dataset", "ds.csv", "-k", "2", "-o", "pca.csv"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(std::fs::read_to_string(d.join("pca.csv")).unwrap().lines().count(), 37);

    // A model evaluated against a different dataset is refused.
    soundq(d, &["dataset", "--n", "12", "--seed", "6", "-o", "other.csv"]);
    let o = soundq(d, &["eval", "--model", "rf.json", "--dataset", "other.csv", "-o", "x.json", "--confusion", "x.csv"]);
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
}

#[test]
fn chain_rerun_reproduces_manifests() {
    let run = |d: &Path| {
        assert!(soundq(d, &["dataset", "--n", "10", "--seed", "3", "-o", "ds.csv"]).status.success());
        assert!(soundq(d, &["train", "rf", "--dataset", "ds.csv", "--trees", "15", "-o", "m.json"]).status.success());
        assert!(soundq(d, &["eval", "--model", "m.json", "--dataset", "ds.csv"]).status.success());
        ["ds.csv", "ds.json", "ds.manifest.json", "m.json", "m.manifest.json", "eval.json", "eval.manifest.json", "confusion.csv"]
            .map(|f| sha(&d.join(f)))
    };
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    assert_eq!(run(a.path()), run(b.path()));
}

#[test]
fn repro_twice_gives_identical_outputs() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [a.path(), b.path()] {
        let o = soundq(d, &["repro", "-o", "out", "--n", "20", "--trees", "20"]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(a.path().join("out/manifest.json")).unwrap()).unwrap();
    let outputs = manifest["outputs"].as_array().unwrap();
    assert!(outputs.len() >= 20);
    for entry in outputs {
        let rel = entry["path"].as_str().unwrap();
        let (x, y) = (a.path().join("out").join(rel), b.path().join("out").join(rel));
        assert_eq!(sha(&x), sha(&y), "{rel}");
        assert_eq!(sha(&x), entry["sha256"].as_str().unwrap(), "{rel}");
    }
    assert_eq!(
        std::fs::read(a.path().join("out/manifest.json")).unwrap(),
        std::fs::read(b.path().join("out/manifest.json")).unwrap()
    );
    let scatter = std::fs::read_to_string(a.path().join("out/pca_scatter.csv")).unwrap();
    assert_eq!(scatter.lines().count(), 61);
}

#[test]
fn config_file_overrides_defaults_and_unknown_keys_fail() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("good.toml"), "[dataset]\nn_per_class = 10\nbase_seed = 9\n").unwrap();
    let o = soundq(d, &["--config", "good.toml", "dataset", "-o", "ds.csv"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(std::fs::read_to_string(d.join("ds.csv")).unwrap().lines().count(), 31);
    std::fs::write(d.join("bad.toml"), "[dataset]\nrows = 10\n").unwrap();
    assert_eq!(soundq(d, &["--config", "bad.toml", "dataset"]).status.code(), Some(2));
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(soundq(dir.path(), &["frobnicate"]).status.code(), Some(2));
    assert_eq!(soundq(dir.path(), &["train", "knn"]).status.code(), Some(2));
    assert_eq!(soundq(dir.path(), &["synth", "jet-engine", "-o", "x.wav"]).status.code(), Some(2));
}
