//! Regenerates the data behind every figure and table: example waveforms
//! and their metric summary, concept curves, the dataset, the PCA scatter
//! and classifier evaluations, plus a manifest hashing all of it.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use serde_json::json;

use super::config::Config;
use super::manifest::RunManifest;
use super::svg::{self, Series};
use crate::error::{Error, Result};
use crate::metrics::{
    analyze_all, annoyance, fluctuation_proxy, loudness_rms, loudness_zwicker_proxy, lufs_integrated, roughness_proxy,
    sharpness_centroid, sharpness_weight, sharpness_weighted, smoothed_psd_db, specific_loudness, tonality_from_psd,
    AnalysisConfig, FEATURE_VARIANTS,
};
use crate::ml::dataset::CLASSES;
use crate::ml::{
    build_dataset, evaluate, train, Dataset, DatasetConfig, EvalReport, ForestParams, LogregParams, ModelSpec, Pca,
    SvmParams,
};
use crate::signal::{bark_band_energies, welch_psd, Signal, ZeroPhaseFilter, BARK_BANDS, FILTER_ORDER};
use crate::stimuli::{jittered_spec, synth, StimulusClass, StimulusSpec};

/// Leading stretch of each example waveform written out.
const WAVEFORM_SECONDS: f64 = 0.1;
/// Upper frequency shown in the tonal-prominence curve.
const TONAL_CURVE_MAX_HZ: f64 = 8000.0;

pub fn filters_json() -> serde_json::Value {
    json!({
        "family": "butterworth",
        "order_per_edge": FILTER_ORDER,
        "application": "zero-phase forward-backward, odd-extension padding",
        "bandpass": "highpass and lowpass cascade",
    })
}

#[derive(Debug, Clone)]
pub struct ReproOptions {
    pub out_dir: PathBuf,
    pub dataset: DatasetConfig,
    pub analysis: AnalysisConfig,
    pub logreg: LogregParams,
    pub forest: ForestParams,
    pub svm: SvmParams,
}

impl ReproOptions {
    pub fn from_config(config: &Config, out_dir: PathBuf) -> Self {
        Self {
            out_dir,
            dataset: config.dataset,
            analysis: config.analysis.clone(),
            logreg: config.logreg,
            forest: config.forest,
            svm: config.svm,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ReproSummary {
    /// Test accuracy per model kind.
    pub accuracy: BTreeMap<String, f64>,
    pub pca_explained: Vec<f64>,
    /// Every file written except the manifest, in manifest order.
    pub outputs: Vec<PathBuf>,
}

fn csv_writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>> {
    Ok(csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(BufWriter::new(File::create(path)?)))
}

fn write_rows(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.flush()?;
    Ok(())
}

fn num(v: f64) -> String {
    v.to_string()
}

pub fn write_confusion_csv(path: &Path, report: &EvalReport) -> Result<()> {
    let mut header = vec!["true"];
    header.extend(StimulusClass::ALL.iter().map(|c| c.name()));
    let rows = StimulusClass::ALL.iter().map(|c| {
        let mut r = vec![c.name().to_string()];
        r.extend(report.confusion[c.index()].iter().map(|v| v.to_string()));
        r
    });
    write_rows(path, &header, rows)
}

/// Every row of the dataset projected onto the train-fitted components.
pub fn write_pca_scatter(path: &Path, ds: &Dataset, pca: &Pca) -> Result<()> {
    let names: Vec<String> = (1..=pca.components.len()).map(|i| format!("pc{i}")).collect();
    let mut header: Vec<&str> = names.iter().map(String::as_str).collect();
    header.push("label");
    let rows = (0..ds.len()).map(|i| {
        let mut r: Vec<String> = pca.transform(&ds.standardized(i)).into_iter().map(num).collect();
        r.push(ds.label(i).name().to_string());
        r
    });
    write_rows(path, &header, rows)
}

struct Outputs {
    root: PathBuf,
    files: Vec<PathBuf>,
}

impl Outputs {
    fn path(&mut self, rel: &str) -> PathBuf {
        let p = self.root.join(rel);
        self.files.push(p.clone());
        p
    }

    fn svg(&mut self, rel: &str, body: String) -> Result<()> {
        let p = self.path(rel);
        fs::write(p, body)?;
        Ok(())
    }
}

fn io_context(e: Error, what: &Path) -> Error {
    match e {
        Error::Io(io) => Error::Io(std::io::Error::new(io.kind(), format!("{}: {io}", what.display()))),
        other => other,
    }
}

pub fn repro(opts: &ReproOptions, command: Vec<String>) -> Result<ReproSummary> {
    let root = opts.out_dir.clone();
    for sub in ["", "waveforms", "concepts"] {
        fs::create_dir_all(root.join(sub)).map_err(|e| io_context(e.into(), &root))?;
    }
    let mut out = Outputs { root: root.clone(), files: Vec::new() };
    let cfg = &opts.analysis;
    let n = opts.dataset.n_per_class;

    // Example cases are the first dataset row of each class.
    let cases: Vec<(StimulusSpec, Signal)> = StimulusClass::ALL
        .iter()
        .map(|&c| {
            let spec = jittered_spec(c, opts.dataset.base_seed, (c.index() * n) as u64);
            synth(&spec).map(|s| (spec, s))
        })
        .collect::<Result<_>>()?;

    for (spec, sig) in &cases {
        let name = spec.class().name();
        let keep = ((WAVEFORM_SECONDS * sig.sample_rate() as f64).round() as usize).min(sig.len());
        let fs = sig.sample_rate() as f64;
        let pts: Vec<(f64, f64)> = sig.samples()[..keep].iter().enumerate().map(|(i, &x)| (i as f64 / fs, x)).collect();
        let path = out.path(&format!("waveforms/{name}.csv"));
        write_rows(&path, &["time_s", "amplitude"], pts.iter().map(|&(t, x)| vec![num(t), num(x)]))?;
        out.svg(
            &format!("waveforms/{name}.svg"),
            svg::line_plot(&format!("{name} waveform"), "time (s)", "amplitude", &[Series { name, points: pts }], false),
        )?;
    }

    let summary_header = [
        "case",
        "loudness_rms",
        "lufs_integrated",
        "loudness_zwicker_proxy",
        "sharpness_centroid",
        "sharpness_weighted",
        "roughness_proxy",
        "fluctuation_proxy",
        "tonality_proxy",
        "annoyance",
    ];
    let mut summary = Vec::new();
    for (spec, sig) in &cases {
        let fv = analyze_all(sig, cfg)?;
        let lufs = lufs_integrated(sig)?.value().map(num).unwrap_or_default();
        let pa = annoyance(
            loudness_zwicker_proxy(sig, cfg)?.value,
            sharpness_weighted(sig, cfg)?.value,
            roughness_proxy(sig, cfg)?.value,
            fluctuation_proxy(sig, cfg)?.value,
            &cfg.thresholds,
        )?;
        summary.push(vec![
            spec.class().name().to_string(),
            num(loudness_rms(sig)?.value),
            lufs,
            num(fv.n),
            num(sharpness_centroid(sig)?.value),
            num(fv.s),
            num(fv.r),
            num(fv.f),
            num(fv.t),
            num(pa.value),
        ]);
    }
    let p = out.path("metrics_summary.csv");
    write_rows(&p, &summary_header, summary)?;

    // Concept curves.
    let specific: Vec<[f64; BARK_BANDS]> = cases
        .iter()
        .map(|(_, s)| bark_band_energies(s, cfg.welch()).map(|e| specific_loudness(&e, cfg)))
        .collect::<Result<_>>()?;
    let mut header = vec!["band", "z_center"];
    header.extend(StimulusClass::ALL.iter().map(|c| c.name()));
    let p = out.path("concepts/bark_loudness.csv");
    write_rows(
        &p,
        &header,
        (0..BARK_BANDS).map(|z| {
            let mut r = vec![z.to_string(), num(z as f64 + 0.5)];
            r.extend(specific.iter().map(|s| num(s[z])));
            r
        }),
    )?;
    let series: Vec<Series> = StimulusClass::ALL
        .iter()
        .zip(&specific)
        .map(|(c, s)| Series { name: c.name(), points: (0..BARK_BANDS).map(|z| (z as f64 + 0.5, s[z])).collect() })
        .collect();
    out.svg("concepts/bark_loudness.svg", svg::line_plot("Specific loudness per Bark band", "critical-band rate (Bark)", "N' (sone-proxy)", &series, false))?;

    let g: Vec<(f64, f64)> = (0..=480).map(|i| i as f64 * 0.05).map(|z| (z, sharpness_weight(z))).collect();
    let p = out.path("concepts/sharpness_weighting.csv");
    write_rows(&p, &["z", "g"], g.iter().map(|&(z, v)| vec![num(z), num(v)]))?;
    out.svg("concepts/sharpness_weighting.svg", svg::line_plot("Sharpness weighting g(z)", "critical-band rate (Bark)", "g", &[Series { name: "g", points: g }], false))?;

    let rate = crate::signal::CANONICAL_SAMPLE_RATE;
    let band = ZeroPhaseFilter::bandpass(cfg.roughness_band_hz.0, cfg.roughness_band_hz.1, rate)?;
    let slow = ZeroPhaseFilter::lowpass(cfg.fluctuation_cutoff_hz, rate)?;
    let freqs: Vec<f64> = (0..=240).map(|i| 10f64.powf(i as f64 / 80.0)).collect();
    let db = |f: &ZeroPhaseFilter, x: f64| 10.0 * f.zero_phase_gain(x).max(1e-30).log10();
    let p = out.path("concepts/modulation_band_response.csv");
    write_rows(&p, &["mod_freq_hz", "roughness_gain_db", "fluctuation_gain_db"], freqs.iter().map(|&x| vec![num(x), num(db(&band, x)), num(db(&slow, x))]))?;
    out.svg(
        "concepts/modulation_band_response.svg",
        svg::line_plot(
            "Envelope filter responses",
            "modulation frequency (Hz)",
            "gain (dB)",
            &[
                Series { name: "roughness band", points: freqs.iter().map(|&x| (x, db(&band, x).max(-80.0))).collect() },
                Series { name: "fluctuation lowpass", points: freqs.iter().map(|&x| (x, db(&slow, x).max(-80.0))).collect() },
            ],
            true,
        ),
    )?;

    let whistle = &cases[StimulusClass::WindWhistle.index()].1;
    let psd = welch_psd(whistle, cfg.welch())?;
    let (level, baseline) = smoothed_psd_db(&psd, cfg.tonality_smoothing_bark, cfg.tonality_floor_db);
    let tonality = tonality_from_psd(&psd, cfg);
    let shown: Vec<usize> = (0..level.len()).filter(|&i| psd.bin_freqs[i + 1] <= TONAL_CURVE_MAX_HZ).collect();
    let p = out.path("concepts/tonal_prominence.csv");
    write_rows(
        &p,
        &["freq_hz", "level_db", "baseline_db", "prominence_db"],
        shown.iter().map(|&i| vec![num(psd.bin_freqs[i + 1]), num(level[i]), num(baseline[i]), num(level[i] - baseline[i])]),
    )?;
    out.svg(
        "concepts/tonal_prominence.svg",
        svg::line_plot(
            &format!("Tonal prominence (T = {:.1})", tonality.value.value),
            "frequency (Hz)",
            "PSD (dB)",
            &[
                Series { name: "PSD", points: shown.iter().map(|&i| (psd.bin_freqs[i + 1], level[i])).collect() },
                Series { name: "2-Bark baseline", points: shown.iter().map(|&i| (psd.bin_freqs[i + 1], baseline[i])).collect() },
            ],
            false,
        ),
    )?;

    // Dataset, projection and classifiers.
    let ds = build_dataset(&opts.dataset, cfg)?;
    let p = out.path("dataset.csv");
    let side = ds.write(&p)?;
    out.files.push(side);

    let (x, _) = ds.train_matrix();
    let pca = Pca::fit(&x, 2)?;
    let p = out.path("pca_scatter.csv");
    write_pca_scatter(&p, &ds, &pca)?;
    let p = out.path("pca.json");
    super::commands::write_json(&p, &pca)?;
    let groups: Vec<Series> = StimulusClass::ALL
        .iter()
        .map(|&c| Series {
            name: c.name(),
            points: (0..ds.len())
                .filter(|&i| ds.label(i) == c)
                .map(|i| {
                    let v = pca.transform(&ds.standardized(i));
                    (v[0], v[1])
                })
                .collect(),
        })
        .collect();
    out.svg(
        "pca_scatter.svg",
        svg::scatter(
            &format!("PCA ({:.1}% of variance)", 100.0 * pca.explained.iter().sum::<f64>()),
            &format!("PC1 ({:.1}%)", 100.0 * pca.explained[0]),
            &format!("PC2 ({:.1}%)", 100.0 * pca.explained[1]),
            &groups,
        ),
    )?;

    let mut accuracy = BTreeMap::new();
    let mut reports = BTreeMap::new();
    for (short, spec) in [
        ("logreg", ModelSpec::Logreg(opts.logreg)),
        ("rf", ModelSpec::RandomForest(opts.forest)),
        ("svm", ModelSpec::Svm(opts.svm)),
    ] {
        let model = train(&ds, &spec)?;
        let report = evaluate(&model, &ds)?;
        let p = out.path(&format!("model_{short}.json"));
        model.write(&p)?;
        let p = out.path(&format!("eval_{short}.json"));
        super::commands::write_json(&p, &report)?;
        if short == "rf" {
            let p = out.path("confusion_rf.csv");
            write_confusion_csv(&p, &report)?;
            let names: Vec<&str> = StimulusClass::ALL.iter().map(|c| c.name()).collect();
            let values: Vec<Vec<f64>> = (0..CLASSES).map(|r| report.confusion[r].iter().map(|&v| v as f64).collect()).collect();
            out.svg(
                "confusion_rf.svg",
                svg::heatmap(&format!("Random forest, accuracy {:.2}", report.accuracy), &names, &names, &values),
            )?;
        }
        accuracy.insert(model.kind_name().to_string(), report.accuracy);
        reports.insert(model.kind_name().to_string(), report);
    }

    let mut m = RunManifest::new(command);
    m.seeds.insert("base_seed".into(), opts.dataset.base_seed);
    m.seeds.insert("forest_seed".into(), opts.forest.seed);
    m.seeds.insert("svm_seed".into(), opts.svm.seed);
    m.parameters = json!({
        "analysis": cfg,
        "filters": filters_json(),
        "feature_variants": FEATURE_VARIANTS,
        "dataset": opts.dataset,
        "logreg": opts.logreg,
        "forest": opts.forest,
        "svm": opts.svm,
        "pca_components": 2,
        "example_cases": cases.iter().map(|(s, _)| s).collect::<Vec<_>>(),
    });
    m.results = json!({
        "accuracy": accuracy,
        "confusion_rf": reports["random-forest"].confusion,
        "spearman_pa": reports["random-forest"].spearman_pa,
        "pca_explained": pca.explained,
        "dataset_fingerprint": ds.fingerprint(),
        "dataset_warnings": ds.warnings,
    });
    m.write(&root.join("manifest.json"), &out.files)?;
    Ok(ReproSummary { accuracy, pca_explained: pca.explained.clone(), outputs: out.files })
}
