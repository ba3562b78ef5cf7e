use std::fs::File;
use std::io::{BufWriter, Cursor, Read, Write};
use std::path::Path;

use serde_json::json;

use super::config::Config;
use super::manifest::{manifest_path_for, RunManifest};
use super::repro::{self, filters_json, ReproOptions};
use super::{AnalyzeArgs, Cli, Command, DatasetArgs, EvalArgs, Format, PcaArgs, ReproArgs, SynthArgs, TrainArgs};
use crate::error::{Error, Result};
use crate::metrics::{analyze_records, MetricRecord, FEATURE_VARIANTS};
use crate::ml::{build_dataset, evaluate, train, Dataset, ModelKind, ModelSpec, Pca, TrainedModel};
use crate::signal::{read_wav, read_wav_from, write_wav};
use crate::stimuli::{jittered_spec, synth, StimulusParams};

pub(super) fn dispatch(cli: Cli, command_line: Vec<String>) -> Result<()> {
    let config = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    match cli.command {
        Command::Synth(a) => cmd_synth(a, command_line),
        Command::Analyze(a) => cmd_analyze(a, &config, command_line),
        Command::Dataset(a) => cmd_dataset(a, &config, command_line),
        Command::Train(a) => cmd_train(a, &config, command_line),
        Command::Eval(a) => cmd_eval(a, command_line),
        Command::Pca(a) => cmd_pca(a, command_line),
        Command::Repro(a) => cmd_repro(a, &config, command_line),
    }
}

fn not_applicable(flag: &str, what: impl std::fmt::Display) -> Error {
    Error::param(format!("--{flag} does not apply to {what}"))
}

pub(super) fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

fn cmd_synth(a: SynthArgs, command_line: Vec<String>) -> Result<()> {
    let mut spec = jittered_spec(a.class, a.seed, a.index);
    if let Some(d) = a.duration {
        spec.duration_s = d;
    }
    if let Some(sr) = a.sample_rate {
        spec.sample_rate = sr;
    }
    let class = spec.class();
    let boom = [("f0", a.f0.is_some()), ("harmonics", a.harmonics.is_some()), ("rolloff-db", a.rolloff_db.is_some()),
        ("mod-freq", a.mod_freq.is_some()), ("mod-depth", a.mod_depth.is_some())];
    let whistle = [("tone-freq", a.tone_freq.is_some()), ("tone-level", a.tone_level.is_some()), ("noise-level", a.noise_level.is_some())];
    let road = [("cutoff", a.cutoff.is_some()), ("level", a.level.is_some())];
    match &mut spec.params {
        StimulusParams::EngineBoom(p) => {
            if let Some((flag, _)) = whistle.iter().chain(&road).find(|f| f.1) {
                return Err(not_applicable(flag, class));
            }
            p.f0 = a.f0.unwrap_or(p.f0);
            p.n_harmonics = a.harmonics.unwrap_or(p.n_harmonics);
            p.harmonic_rolloff_db = a.rolloff_db.unwrap_or(p.harmonic_rolloff_db);
            p.mod_freq = a.mod_freq.unwrap_or(p.mod_freq);
            p.mod_depth = a.mod_depth.unwrap_or(p.mod_depth);
        }
        StimulusParams::WindWhistle(p) => {
            if let Some((flag, _)) = boom.iter().chain(&road).find(|f| f.1) {
                return Err(not_applicable(flag, class));
            }
            p.tone_freq = a.tone_freq.unwrap_or(p.tone_freq);
            p.tone_level_dbfs = a.tone_level.unwrap_or(p.tone_level_dbfs);
            p.noise_level_dbfs = a.noise_level.unwrap_or(p.noise_level_dbfs);
        }
        StimulusParams::RoadNoise(p) => {
            if let Some((flag, _)) = boom.iter().chain(&whistle).find(|f| f.1) {
                return Err(not_applicable(flag, class));
            }
            p.cutoff = a.cutoff.unwrap_or(p.cutoff);
            p.level_dbfs = a.level.unwrap_or(p.level_dbfs);
        }
    }
    let signal = synth(&spec)?;
    write_wav(&signal, &a.output)?;
    let sidecar = a.output.with_extension("json");
    write_json(&sidecar, &spec)?;
    let mut m = RunManifest::new(command_line);
    m.seeds.insert("base_seed".into(), a.seed);
    m.seeds.insert("item_seed".into(), spec.seed);
    m.parameters = json!({ "index": a.index, "stimulus": spec, "filters": filters_json() });
    m.write(&manifest_path_for(&a.output), &[a.output.clone(), sidecar])?;
    println!("wrote {} ({class}, seed {}, {:.3} s at {} Hz)", a.output.display(), spec.seed, signal.duration_s(), spec.sample_rate);
    Ok(())
}

fn render_records(records: &[MetricRecord], format: Format) -> Result<Vec<u8>> {
    match format {
        Format::Json => {
            let mut out = serde_json::to_vec_pretty(records)?;
            out.push(b'\n');
            Ok(out)
        }
        Format::Csv => {
            let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
            for r in records {
                w.serialize(r)?;
            }
            w.into_inner().map_err(|e| Error::Io(e.into_error()))
        }
    }
}

fn cmd_analyze(a: AnalyzeArgs, config: &Config, command_line: Vec<String>) -> Result<()> {
    let read = if a.input == "-" {
        let mut buf = Vec::new();
        std::io::stdin().read_to_end(&mut buf)?;
        read_wav_from(Cursor::new(buf))
    } else {
        read_wav(&a.input)
    };
    let signal = read.map_err(|e| Error::param(format!("cannot read '{}': {e}", a.input)))?;
    let outcomes = analyze_records(&signal, &config.analysis);
    let mut records = Vec::with_capacity(outcomes.len());
    let mut failed = Vec::new();
    for o in outcomes {
        match o.result {
            Ok(r) => {
                if r.value.is_none() {
                    eprintln!("{}: undefined, every block is below the -70 LUFS absolute gate", o.metric);
                }
                records.push(r)
            }
            Err(e) => {
                eprintln!("{}: {e}", o.metric);
                failed.push(o.metric);
            }
        }
    }
    if !failed.is_empty() {
        return Err(Error::Degenerate { metric: "analyze", reason: format!("undefined metrics: {}", failed.join(", ")) });
    }
    let bytes = render_records(&records, a.format)?;
    match &a.output {
        Some(path) => {
            std::fs::write(path, &bytes)?;
            let mut m = RunManifest::new(command_line);
            m.parameters = json!({ "analysis": config.analysis, "filters": filters_json(), "params_hash": config.analysis.params_hash() });
            m.write(&manifest_path_for(path), std::slice::from_ref(path))?;
        }
        None => std::io::stdout().write_all(&bytes)?,
    }
    Ok(())
}

fn cmd_dataset(a: DatasetArgs, config: &Config, command_line: Vec<String>) -> Result<()> {
    let mut dc = config.dataset;
    dc.n_per_class = a.n.unwrap_or(dc.n_per_class);
    dc.base_seed = a.seed.unwrap_or(dc.base_seed);
    dc.train_fraction = a.train_fraction.unwrap_or(dc.train_fraction);
    let ds = build_dataset(&dc, &config.analysis)?;
    for w in &ds.warnings {
        eprintln!("warning: {w}");
    }
    let sidecar = ds.write(&a.output)?;
    let mut m = RunManifest::new(command_line);
    m.seeds.insert("base_seed".into(), dc.base_seed);
    m.parameters = json!({
        "dataset": dc,
        "analysis": config.analysis,
        "filters": filters_json(),
        "feature_variants": FEATURE_VARIANTS,
    });
    m.results = json!({
        "rows": ds.len(),
        "train_rows": ds.split.train.len(),
        "test_rows": ds.split.test.len(),
        "fingerprint": ds.fingerprint(),
        "warnings": ds.warnings,
    });
    m.write(&manifest_path_for(&a.output), &[a.output.clone(), sidecar])?;
    println!(
        "dataset: {} rows ({} train / {} test) -> {}",
        ds.len(),
        ds.split.train.len(),
        ds.split.test.len(),
        a.output.display()
    );
    Ok(())
}

fn cmd_train(a: TrainArgs, config: &Config, command_line: Vec<String>) -> Result<()> {
    let kind: ModelKind = a.kind.parse()?;
    let forest_flags = [("trees", a.trees.is_some()), ("max-features", a.max_features.is_some())];
    let svm_flags = [("epochs", a.epochs.is_some()), ("lambda", a.lambda.is_some())];
    let logreg_flags =
        [("learning-rate", a.learning_rate.is_some()), ("iterations", a.iterations.is_some()), ("l2", a.l2.is_some())];
    let reject = |flags: &[(&str, bool)]| match flags.iter().find(|f| f.1) {
        Some((flag, _)) => Err(not_applicable(flag, kind)),
        None => Ok(()),
    };
    let spec = match kind {
        ModelKind::Logreg => {
            reject(&forest_flags)?;
            reject(&svm_flags)?;
            reject(&[("seed", a.seed.is_some())])?;
            let mut p = config.logreg;
            p.learning_rate = a.learning_rate.unwrap_or(p.learning_rate);
            p.iterations = a.iterations.unwrap_or(p.iterations);
            p.l2 = a.l2.unwrap_or(p.l2);
            ModelSpec::Logreg(p)
        }
        ModelKind::RandomForest => {
            reject(&svm_flags)?;
            reject(&logreg_flags)?;
            let mut p = config.forest;
            p.n_trees = a.trees.unwrap_or(p.n_trees);
            p.seed = a.seed.unwrap_or(p.seed);
            if a.max_features.is_some() {
                p.max_features = a.max_features;
            }
            ModelSpec::RandomForest(p)
        }
        ModelKind::Svm => {
            reject(&forest_flags)?;
            reject(&logreg_flags)?;
            let mut p = config.svm;
            p.epochs = a.epochs.unwrap_or(p.epochs);
            p.lambda = a.lambda.unwrap_or(p.lambda);
            p.seed = a.seed.unwrap_or(p.seed);
            ModelSpec::Svm(p)
        }
    };
    let ds = Dataset::read(&a.dataset)?;
    let model = train(&ds, &spec)?;
    model.write(&a.output)?;
    let (x, y) = ds.train_matrix();
    let hits = x.iter().zip(&y).filter(|(r, &c)| model.predict(*r) == c).count();
    let train_accuracy = hits as f64 / y.len() as f64;
    let mut m = RunManifest::new(command_line);
    m.seeds.insert("dataset_seed".into(), ds.config.base_seed);
    if let Some(s) = spec.training_seed() {
        m.seeds.insert("training_seed".into(), s);
    }
    m.parameters = json!({ "model": spec, "dataset_fingerprint": model.dataset_fingerprint });
    m.results = json!({ "train_accuracy": train_accuracy });
    m.write(&manifest_path_for(&a.output), std::slice::from_ref(&a.output))?;
    println!("trained {kind} on {} rows -> {} (train accuracy {train_accuracy:.2})", y.len(), a.output.display());
    Ok(())
}

fn cmd_eval(a: EvalArgs, command_line: Vec<String>) -> Result<()> {
    let model = TrainedModel::read(&a.model)?;
    let ds = Dataset::read(&a.dataset)?;
    let report = evaluate(&model, &ds)?;
    write_json(&a.output, &report)?;
    repro::write_confusion_csv(&a.confusion, &report)?;
    let mut m = RunManifest::new(command_line);
    m.seeds.insert("dataset_seed".into(), ds.config.base_seed);
    if let Some(s) = model.training_seed {
        m.seeds.insert("training_seed".into(), s);
    }
    m.parameters = json!({ "model": model.kind_name(), "dataset_fingerprint": model.dataset_fingerprint });
    m.results = serde_json::to_value(&report)?;
    m.write(&manifest_path_for(&a.output), &[a.output.clone(), a.confusion.clone()])?;
    println!("accuracy: {:.2}", report.accuracy);
    match report.spearman_pa {
        Some(rho) => println!("spearman_pa: {rho:.3}"),
        None => println!("spearman_pa: undefined"),
    }
    Ok(())
}

fn cmd_pca(a: PcaArgs, command_line: Vec<String>) -> Result<()> {
    let ds = Dataset::read(&a.dataset)?;
    let (x, _) = ds.train_matrix();
    let pca = Pca::fit(&x, a.k)?;
    repro::write_pca_scatter(&a.output, &ds, &pca)?;
    let sidecar = a.output.with_extension("json");
    write_json(&sidecar, &pca)?;
    let mut m = RunManifest::new(command_line);
    m.seeds.insert("dataset_seed".into(), ds.config.base_seed);
    m.parameters = json!({ "k": a.k, "dataset_fingerprint": ds.fingerprint() });
    m.results = json!({ "explained": pca.explained, "surplus_components": pca.surplus_components() });
    m.write(&manifest_path_for(&a.output), &[a.output.clone(), sidecar])?;
    let shown: Vec<String> = pca.explained.iter().map(|e| format!("{e:.3}")).collect();
    println!("explained variance: [{}] (total {:.3})", shown.join(", "), pca.explained.iter().sum::<f64>());
    for i in pca.surplus_components() {
        eprintln!("warning: component {} carries no variance", i + 1);
    }
    Ok(())
}

fn cmd_repro(a: ReproArgs, config: &Config, command_line: Vec<String>) -> Result<()> {
    let mut opts = ReproOptions::from_config(config, a.out_dir.clone());
    opts.dataset.n_per_class = a.n.unwrap_or(opts.dataset.n_per_class);
    opts.dataset.base_seed = a.seed.unwrap_or(opts.dataset.base_seed);
    opts.forest.n_trees = a.trees.unwrap_or(opts.forest.n_trees);
    let summary = repro::repro(&opts, command_line)?;
    for (model, acc) in &summary.accuracy {
        println!("{model}: accuracy {acc:.2}");
    }
    println!("wrote {} files to {}", summary.outputs.len() + 1, a.out_dir.display());
    Ok(())
}

