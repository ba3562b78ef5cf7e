//! Acceptance criteria, one pass/fail line each. Runs without the libtest
//! harness so the lines are visible in plain `cargo test` output.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use sha2::{Digest, Sha256};
use soundq::cli::repro::{repro, ReproOptions};
use soundq::cli::config::Config;
use soundq::metrics::{
    annoyance, fluctuation_proxy, lufs_integrated, roughness_proxy, sharpness_centroid, tonality_proxy,
    AnalysisConfig, AnnoyanceThresholds, ProgramLoudness,
};
use soundq::ml::forest::best_split;
use soundq::ml::logreg::loss_and_gradient;
use soundq::ml::pca::covariance;
use soundq::ml::{build_dataset, evaluate, spearman, train, Dataset, DatasetConfig, ForestParams, ModelSpec, Pca};
use soundq::stimuli::{jittered_spec, synth, test_tone, white_noise, StimulusClass, TestTone};
use soundq::Signal;

const FS: u32 = 48_000;

type Check = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Check + 'a>);

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn e2s<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn am(mod_freq: f64, depth: f64, secs: f64) -> Signal {
    test_tone(TestTone::AmTone { carrier: 1000.0, mod_freq, depth }, secs, FS).unwrap()
}

fn criterion_1(ds: &Dataset, build_time: Duration) -> Check {
    let start = Instant::now();
    let model = train(ds, &ModelSpec::RandomForest(ForestParams::default())).map_err(e2s)?;
    let report = evaluate(&model, ds).map_err(e2s)?;
    let total = build_time + start.elapsed();
    ensure(report.accuracy >= 0.90, format!("accuracy {:.4} < 0.90", report.accuracy))?;
    ensure(total <= Duration::from_secs(60), format!("dataset and forest took {total:?}"))?;
    Ok(format!("rf accuracy {:.4} on {} test rows, dataset + forest {:.2?}", report.accuracy, report.test_rows, total))
}

fn criterion_2() -> Check {
    let lufs = |amp: f64| -> Result<ProgramLoudness, String> {
        lufs_integrated(&test_tone(TestTone::Sine { freq: 997.0, amplitude: amp }, 10.0, FS).unwrap()).map_err(e2s)
    };
    let full = lufs(1.0)?.value().ok_or("full-scale sine undefined")?;
    let quiet = lufs(0.1)?.value().ok_or("-20 dB sine undefined")?;
    ensure((full + 3.01).abs() <= 0.10, format!("full scale {full:.4} LUFS"))?;
    ensure((quiet + 23.01).abs() <= 0.10, format!("-20 dB {quiet:.4} LUFS"))?;
    let silence = lufs_integrated(&test_tone(TestTone::Silence, 10.0, FS).unwrap()).map_err(e2s)?;
    ensure(silence == ProgramLoudness::Undefined, format!("silence gave {silence:?}"))?;
    Ok(format!("{full:.4} / {quiet:.4} LUFS, silence undefined"))
}

fn criterion_3() -> Check {
    let cfg = AnalysisConfig::default();
    let r1 = roughness_proxy(&am(70.0, 1.0, 2.0), &cfg).map_err(e2s)?.value;
    let r05 = roughness_proxy(&am(70.0, 0.5, 2.0), &cfg).map_err(e2s)?.value;
    let ratio = r1 / r05;
    ensure((ratio - 2.0).abs() <= 0.10, format!("R(1)/R(0.5) = {ratio:.4}"))?;
    Ok(format!("R(1)/R(0.5) = {ratio:.4}"))
}

fn criterion_4() -> Check {
    let cfg = AnalysisConfig::default();
    let (slow, fast) = (am(4.0, 0.5, 4.0), am(70.0, 0.5, 4.0));
    let f_slow = fluctuation_proxy(&slow, &cfg).map_err(e2s)?.value;
    let f_fast = fluctuation_proxy(&fast, &cfg).map_err(e2s)?.value;
    let r_slow = roughness_proxy(&slow, &cfg).map_err(e2s)?.value;
    let r_fast = roughness_proxy(&fast, &cfg).map_err(e2s)?.value;
    ensure(f_slow >= 10.0 * f_fast, format!("F(4 Hz) {f_slow:.3e} vs F(70 Hz) {f_fast:.3e}"))?;
    ensure(r_fast >= 10.0 * r_slow, format!("R(70 Hz) {r_fast:.3e} vs R(4 Hz) {r_slow:.3e}"))?;
    Ok(format!("F ratio {:.1}, R ratio {:.1}", f_slow / f_fast.max(f64::MIN_POSITIVE), r_fast / r_slow.max(f64::MIN_POSITIVE)))
}

fn criterion_5() -> Check {
    let cfg = AnalysisConfig::default();
    for seed in 0..10 {
        let t = tonality_proxy(&white_noise(seed, 2.0, FS).unwrap(), &cfg).map_err(e2s)?;
        ensure(t.value.value == 0.0, format!("white noise seed {seed}: T = {}", t.value.value))?;
    }
    // A periodic-Hann Welch estimate spreads a bin-centred line of power
    // A²/2 over an equivalent noise bandwidth of 1.5 bins, while unit-variance
    // noise has one-sided density 2/fs. Choosing A²/2 = 100·1.5·Δf·2/fs puts
    // the line 20 dB above the local noise density.
    let seg = cfg.welch_segment as f64;
    let df = FS as f64 / seg;
    let bin = (1000.0 / df).round();
    let freq = bin * df;
    let amplitude = (2.0 * 100.0 * 1.5 * df * 2.0 / FS as f64).sqrt();
    let sig = test_tone(TestTone::ToneInNoise { freq, amplitude, noise_std: 1.0, seed: 77 }, 4.0, FS).unwrap();
    let t = tonality_proxy(&sig, &cfg).map_err(e2s)?;
    let peak = t.peaks.first().ok_or("no tonal peak detected")?;
    ensure(t.value.value >= 10.0, format!("tone T = {:.3}", t.value.value))?;
    ensure((peak.freq - freq).abs() <= df, format!("peak at {:.2} Hz, tone at {freq:.2} Hz", peak.freq))?;
    Ok(format!("noise T = 0 x10; tone T = {:.2}, peak {:.2} Hz (tone {freq:.2})", t.value.value, peak.freq))
}

fn criterion_6() -> Check {
    let (n, s, r, f) = (3.7, 1.9, 0.42, 0.013);
    let same = AnnoyanceThresholds { s0: s, r0: r, f0: f };
    let pa = annoyance(n, s, r, f, &same).map_err(e2s)?.value;
    ensure(pa == n, format!("PA {pa} != N {n}"))?;
    let zero = AnnoyanceThresholds { s0: 0.0, r0: 0.0, f0: 0.0 };
    let hand = annoyance(2.0, 3.0, 0.0, 0.0, &zero).map_err(e2s)?.value;
    let expect = 2.0 * (1.0 + 3f64.sqrt());
    ensure((hand - expect).abs() <= 1e-9, format!("hand case {hand} vs {expect}"))?;
    ensure((hand - 5.4641).abs() <= 1e-4, format!("hand case {hand} vs 5.4641"))?;
    Ok(format!("PA = N exactly; hand case {hand:.10}"))
}

/// Eigenvalues of a symmetric 3×3 matrix from the trigonometric solution of
/// its characteristic cubic.
fn cubic_eigenvalues(a: [[f64; 3]; 3]) -> [f64; 3] {
    let p1 = a[0][1].powi(2) + a[0][2].powi(2) + a[1][2].powi(2);
    let q = (a[0][0] + a[1][1] + a[2][2]) / 3.0;
    let p2 = (a[0][0] - q).powi(2) + (a[1][1] - q).powi(2) + (a[2][2] - q).powi(2) + 2.0 * p1;
    let p = (p2 / 6.0).sqrt();
    let b = |i: usize, j: usize| (a[i][j] - if i == j { q } else { 0.0 }) / p;
    let det = b(0, 0) * (b(1, 1) * b(2, 2) - b(1, 2) * b(2, 1)) - b(0, 1) * (b(1, 0) * b(2, 2) - b(1, 2) * b(2, 0))
        + b(0, 2) * (b(1, 0) * b(2, 1) - b(1, 1) * b(2, 0));
    let phi = (det / 2.0).clamp(-1.0, 1.0).acos() / 3.0;
    let l1 = q + 2.0 * p * phi.cos();
    let l3 = q + 2.0 * p * (phi + 2.0 * std::f64::consts::PI / 3.0).cos();
    [l1, 3.0 * q - l1 - l3, l3]
}

fn criterion_7(ds: &Dataset) -> Check {
    let (train_x, _) = ds.train_matrix();
    let pca = Pca::fit(&train_x, 2).map_err(e2s)?;
    let explained: f64 = pca.explained.iter().sum();
    ensure(explained >= 0.60, format!("explained {explained:.4}"))?;

    let mut sums = [[0.0; 2]; 3];
    let mut counts = [0usize; 3];
    for i in 0..ds.len() {
        let c = ds.label(i).index();
        let p = pca.transform(&ds.standardized(i));
        sums[c][0] += p[0];
        sums[c][1] += p[1];
        counts[c] += 1;
    }
    let cent: Vec<[f64; 2]> = (0..3).map(|c| [sums[c][0] / counts[c] as f64, sums[c][1] / counts[c] as f64]).collect();
    let mut min_dist = f64::INFINITY;
    for a in 0..3 {
        for b in a + 1..3 {
            let d = ((cent[a][0] - cent[b][0]).powi(2) + (cent[a][1] - cent[b][1]).powi(2)).sqrt();
            ensure(d > 0.0, format!("centroids {a} and {b} coincide"))?;
            min_dist = min_dist.min(d);
        }
    }

    // Separability precondition over the dataset's own stimuli.
    let n = ds.config.n_per_class;
    let mut mean_centroid = [0.0; 3];
    for class in StimulusClass::ALL {
        for j in 0..n {
            let spec = jittered_spec(class, ds.config.base_seed, (class.index() * n + j) as u64);
            mean_centroid[class.index()] += sharpness_centroid(&synth(&spec).map_err(e2s)?).map_err(e2s)?.value / n as f64;
        }
    }
    let [boom, whistle, road] = mean_centroid;
    ensure(road < boom && boom < whistle, format!("centroid means road {road:.3}, boom {boom:.3}, whistle {whistle:.3}"))?;

    let rows: Vec<[f64; 3]> = (0..40)
        .map(|i| {
            let t = i as f64;
            [t.sin() * 3.0 + 0.1 * t, (1.7 * t).cos() + 0.5 * t.sin(), (0.3 * t).sin() - 0.2 * (2.3 * t).cos()]
        })
        .collect();
    let (_, cov) = covariance(&rows).map_err(e2s)?;
    let a = [0, 1, 2].map(|i| [0, 1, 2].map(|j| cov[(i, j)]));
    let oracle = cubic_eigenvalues(a);
    let fitted = Pca::fit(&rows, 3).map_err(e2s)?;
    let err = fitted.eigenvalues.iter().zip(oracle).map(|(l, o)| (l - o).abs()).fold(0.0, f64::max);
    ensure(err <= 1e-8, format!("eigenvalue error {err:.3e}"))?;

    Ok(format!(
        "explained {explained:.4}, min centroid distance {min_dist:.3}, centroid kHz road {road:.3} < boom {boom:.3} < whistle {whistle:.3}, eigen error {err:.1e}"
    ))
}

fn criterion_8() -> Check {
    // Logistic-regression gradient against central differences.
    let x: Vec<[f64; 3]> = (0..12).map(|i| [(i as f64 * 0.7).sin(), (i as f64 * 1.3).cos(), i as f64 / 12.0 - 0.5]).collect();
    let y: Vec<usize> = (0..12).map(|i| i % 3).collect();
    let w: Vec<Vec<f64>> = (0..3).map(|k| (0..3).map(|j| 0.3 * (k as f64 - j as f64) + 0.1).collect()).collect();
    let b = vec![0.2, -0.1, 0.05];
    let l2 = 0.1;
    let (_, grad) = loss_and_gradient(&w, &b, &x, &y, l2);
    let h = 1e-6;
    let mut worst = 0.0f64;
    for k in 0..3 {
        for j in 0..3 {
            let (mut wp, mut wm) = (w.clone(), w.clone());
            wp[k][j] += h;
            wm[k][j] -= h;
            let fd = (loss_and_gradient(&wp, &b, &x, &y, l2).0 - loss_and_gradient(&wm, &b, &x, &y, l2).0) / (2.0 * h);
            worst = worst.max((fd - grad.weights[k][j]).abs() / fd.abs().max(grad.weights[k][j].abs()).max(1e-12));
        }
        let (mut bp, mut bm) = (b.clone(), b.clone());
        bp[k] += h;
        bm[k] -= h;
        let fd = (loss_and_gradient(&w, &bp, &x, &y, l2).0 - loss_and_gradient(&w, &bm, &x, &y, l2).0) / (2.0 * h);
        worst = worst.max((fd - grad.bias[k]).abs() / fd.abs().max(grad.bias[k].abs()).max(1e-12));
    }
    ensure(worst <= 1e-5, format!("gradient relative error {worst:.3e}"))?;

    // Single split against an exhaustive scan scored by Gini proportions.
    let table: Vec<[f64; 2]> = vec![[0.1, 5.0], [0.4, 3.0], [0.35, 4.0], [0.8, 1.0], [0.9, 2.5], [0.2, 0.5], [0.6, 4.5]];
    let labels = [0, 1, 1, 2, 2, 0, 1];
    let gini = |idx: &[usize]| -> f64 {
        let n = idx.len() as f64;
        if idx.is_empty() {
            return 0.0;
        }
        1.0 - (0..3).map(|c| (idx.iter().filter(|&&i| labels[i] == c).count() as f64 / n).powi(2)).sum::<f64>()
    };
    let mut brute = (f64::INFINITY, 0usize, 0.0);
    for f in 0..2 {
        let mut vals: Vec<f64> = table.iter().map(|r| r[f]).collect();
        vals.sort_by(f64::total_cmp);
        vals.dedup();
        for pair in vals.windows(2) {
            let t = pair[0] + (pair[1] - pair[0]) / 2.0;
            let l: Vec<usize> = (0..table.len()).filter(|&i| table[i][f] <= t).collect();
            let r: Vec<usize> = (0..table.len()).filter(|&i| table[i][f] > t).collect();
            let score = l.len() as f64 * gini(&l) + r.len() as f64 * gini(&r);
            if score < brute.0 - 1e-12 {
                brute = (score, f, t);
            }
        }
    }
    let rows: Vec<usize> = (0..table.len()).collect();
    let got = best_split(&table, &labels, &rows, &[0, 1], 3).ok_or("no split found")?;
    ensure(got.feature == brute.1 && got.threshold == brute.2, format!("split {got:?} vs brute {brute:?}"))?;

    let s1 = spearman(&[1.0, 2.0, 3.0, 4.0, 5.0], &[1.0, 2.0, 3.0, 5.0, 4.0]).map_err(e2s)?;
    let s2 = spearman(&[1.0, 1.0, 2.0], &[1.0, 2.0, 2.0]).map_err(e2s)?;
    ensure(s1 == Some(0.9), format!("spearman hand case {s1:?}"))?;
    ensure(s2 == Some(0.5), format!("spearman tie case {s2:?}"))?;
    Ok(format!("gradient rel err {worst:.1e}; split f{} @ {}; spearman 0.9 / 0.5", got.feature, got.threshold))
}

fn hash_tree(root: &Path) -> BTreeMap<String, String> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else if matches!(path.extension().and_then(|e| e.to_str()), Some("csv" | "json")) {
                let rel = path.strip_prefix(root).unwrap().to_string_lossy().into_owned();
                out.insert(rel, hex::encode(Sha256::digest(std::fs::read(&path).unwrap())));
            }
        }
    }
    out
}

fn criterion_9(suite_start: Instant) -> Check {
    let tmp = tempfile::tempdir().map_err(e2s)?;
    let mut hashes = Vec::new();
    for run in ["a", "b"] {
        let opts = ReproOptions::from_config(&Config::default(), tmp.path().join(run));
        repro(&opts, vec!["soundq".into(), "repro".into()]).map_err(e2s)?;
        hashes.push(hash_tree(&opts.out_dir));
    }
    ensure(!hashes[0].is_empty(), "repro wrote no CSV/JSON files")?;
    let differing: Vec<&String> = hashes[0].keys().filter(|k| hashes[1].get(*k) != hashes[0].get(*k)).collect();
    ensure(differing.is_empty() && hashes[0].len() == hashes[1].len(), format!("differing outputs: {differing:?}"))?;
    let elapsed = suite_start.elapsed();
    ensure(elapsed <= Duration::from_secs(300), format!("suite took {elapsed:?}"))?;
    Ok(format!("{} CSV/JSON files identical across two runs; suite {:.1?}", hashes[0].len(), elapsed))
}

fn main() {
    let start = Instant::now();
    let dataset = build_dataset(&DatasetConfig::default(), &AnalysisConfig::default()).expect("default dataset builds");
    let build_time = start.elapsed();
    let checks: Vec<Criterion> = vec![
        ("classification accuracy", Box::new(|| criterion_1(&dataset, build_time))),
        ("LUFS calibration", Box::new(criterion_2)),
        ("roughness linearity in depth", Box::new(criterion_3)),
        ("modulation band selectivity", Box::new(criterion_4)),
        ("tonality detector", Box::new(criterion_5)),
        ("annoyance identity", Box::new(criterion_6)),
        ("PCA sanity", Box::new(|| criterion_7(&dataset))),
        ("numerical oracles", Box::new(criterion_8)),
        ("determinism", Box::new(move || criterion_9(start))),
    ];
    let mut failed = 0;
    for (i, (name, check)) in checks.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("criterion {} PASS {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {} FAIL {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", checks.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
