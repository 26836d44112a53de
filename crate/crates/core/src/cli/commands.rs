use super::config::{BoosterParams, PipelineConfig};
use super::files::{
    format_feature_csv, format_plot_csv, format_report_csv, format_report_text, format_timing_csv,
    parse_feature_csv, read_text, write_text, FeatureRow, ReportRow,
};
use super::CliError;
use crate::boosting::{adaboost_train, gbdt_train, Algorithm, BoostEnsemble, FeatureMatrix};
use crate::dcae::{build_dcae, encode_features, load_model, save_model, train_dcae, DcaeModel};
use crate::metrics::{accumulate, compute_metrics, format_hms, time_block};
use crate::preprocess::SIGNAL_LEN;
use crate::signal_io::{
    build_cache, load_labels, parse_csv_record, parse_mat_record, read_cache, write_cache,
    DatasetCache, Manifest, RawRecord, Split,
};
use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum FeatureSource {
    /// Autoencoder bottleneck features from the feature file.
    Dcae,
    /// The normalized signals themselves.
    Raw,
}

impl FeatureSource {
    fn name(self) -> &'static str {
        match self {
            FeatureSource::Dcae => "dcae",
            FeatureSource::Raw => "raw",
        }
    }
}

/// Report row name: `gbdt-leaf` on raw signals, `d-gbdt-leaf` on features.
pub fn row_name(algo: Algorithm, source: FeatureSource) -> String {
    match source {
        FeatureSource::Raw => algo.name().to_string(),
        FeatureSource::Dcae => format!("d-{}", algo.name()),
    }
}

pub fn model_path(cfg: &PipelineConfig) -> PathBuf {
    cfg.output_dir.join("dcae.model")
}

pub fn features_path(cfg: &PipelineConfig) -> PathBuf {
    cfg.output_dir
        .join(format!("features-{}.csv", cfg.dcae.feature_mode))
}

pub fn ensemble_path(cfg: &PipelineConfig, name: &str) -> PathBuf {
    cfg.output_dir.join(format!("ensemble-{name}.json"))
}

fn ttt_path(cfg: &PipelineConfig, name: &str) -> PathBuf {
    cfg.output_dir.join(format!("{name}.ttt"))
}

fn ids_path(cfg: &PipelineConfig, name: &str) -> PathBuf {
    cfg.output_dir.join(format!("train-ids-{name}.txt"))
}

fn write_ids<'a>(path: &Path, ids: impl Iterator<Item = &'a str>) -> Result<(), CliError> {
    let mut text = String::new();
    for id in ids {
        writeln!(text, "{id}").unwrap();
    }
    write_text(path, &text)
}

fn parse_record_file(path: &Path, id: &str) -> Result<RawRecord, String> {
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase);
    match ext.as_deref() {
        Some("mat") => {
            let bytes = std::fs::read(path).map_err(|e| e.to_string())?;
            parse_mat_record(&bytes, id).map_err(|e| e.to_string())
        }
        Some("csv") => {
            let text = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
            parse_csv_record(&text, id).map_err(|e| e.to_string())
        }
        _ => Err("unsupported extension".into()),
    }
}

fn summarize(m: &Manifest) -> String {
    let mut s = String::from("class counts:");
    for (tag, n) in &m.class_counts {
        write!(s, " {tag}={n}").unwrap();
    }
    let pc: Vec<String> = m.positive_class.iter().map(|t| t.to_string()).collect();
    write!(
        s,
        "\npositive class: {}\ntrain: {} ({} positive)\ntest: {} ({} positive)",
        pc.join(","),
        m.train.total(),
        m.train.positive,
        m.test.total(),
        m.test.positive
    )
    .unwrap();
    s
}

/// Parse every `.mat`/`.csv` file in the records directory (id = file
/// stem) and write the cache. Files that fail to parse are reported and
/// left out; the command then fails with a parse error after caching the
/// rest.
pub fn cmd_convert(cfg: &PipelineConfig) -> Result<Manifest, CliError> {
    let labels_text = std::fs::read_to_string(&cfg.labels_file).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => {
            CliError::MissingInput(format!("labels file not found: {}", cfg.labels_file.display()))
        }
        _ => CliError::io(&cfg.labels_file, e),
    })?;
    let labels = load_labels(&labels_text)
        .and_then(|l| l.with_positive_class(cfg.positive_class.iter().copied()))
        .map_err(|e| CliError::Parse(format!("{}: {e}", cfg.labels_file.display())))?;

    let entries = std::fs::read_dir(&cfg.records_dir).map_err(|e| CliError::io(&cfg.records_dir, e))?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.extension()
                .and_then(|e| e.to_str())
                .is_some_and(|e| e.eq_ignore_ascii_case("mat") || e.eq_ignore_ascii_case("csv"))
        })
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(CliError::MissingInput(format!(
            "no .mat or .csv records in {}",
            cfg.records_dir.display()
        )));
    }

    let mut records = Vec::with_capacity(paths.len());
    let mut failures = Vec::new();
    for path in &paths {
        let id = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
        match parse_record_file(path, id) {
            Ok(r) => records.push(r),
            Err(e) => {
                eprintln!("error: {}: {e}", path.display());
                failures.push(path.file_name().unwrap().to_string_lossy().into_owned());
            }
        }
    }
    let cache = build_cache(records, &labels, cfg.split_seed)?;
    if let Some(dir) = cfg.cache_path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    write_cache(&cache, &cfg.cache_path)?;
    println!("cached {} records in {}", cache.records.len(), cfg.cache_path.display());
    println!("{}", summarize(&cache.manifest));
    if !failures.is_empty() {
        return Err(CliError::Parse(format!(
            "{} file(s) could not be parsed: {}",
            failures.len(),
            failures.join(", ")
        )));
    }
    Ok(cache.manifest)
}

fn load_cache(cfg: &PipelineConfig) -> Result<DatasetCache, CliError> {
    if !cfg.cache_path.exists() {
        return Err(CliError::MissingInput(format!(
            "cache not found: {}",
            cfg.cache_path.display()
        )));
    }
    Ok(read_cache(&cfg.cache_path)?)
}

/// Train the autoencoder on the training split. Returns training seconds.
pub fn cmd_train_dcae(cfg: &PipelineConfig) -> Result<f64, CliError> {
    let cache = load_cache(cfg)?;
    let train: Vec<_> = cache.split(Split::Train).collect();
    let signals: Vec<Vec<f64>> = train.iter().map(|r| r.signal.to_f64()).collect();
    let mut model = build_dcae(cfg.dcae.seed);
    let (losses, elapsed) = time_block("dcae training", || {
        train_dcae(&mut model, &signals, &cfg.dcae.optimizer(), cfg.dcae.seed)
    });
    let losses = losses?;
    let seconds = elapsed.as_secs_f64();

    save_model(&model, &model_path(cfg)).map_err(CliError::from)?;
    let mut log = String::from("epoch,mean_mse\n");
    for l in &losses {
        writeln!(log, "{},{}", l.epoch, l.mean_mse).unwrap();
    }
    write_text(&cfg.output_dir.join("dcae_loss.csv"), &log)?;
    write_text(&ttt_path(cfg, "dcae"), &format!("{seconds}\n"))?;
    write_ids(&ids_path(cfg, "dcae"), train.iter().map(|r| r.id.as_str()))?;
    println!("trained autoencoder on {} signals", signals.len());
    if let Some(last) = losses.last() {
        println!("final epoch {} mean mse {:.6}", last.epoch, last.mean_mse);
    }
    let held_out: Vec<Vec<f64>> = cache.split(Split::Test).map(|r| r.signal.to_f64()).collect();
    if !held_out.is_empty() {
        let err = model.reconstruction_error(&held_out)?;
        write_text(&cfg.output_dir.join("dcae_heldout_mse.txt"), &format!("{err}\n"))?;
        println!("held-out reconstruction mse {err:.6}");
    }
    println!("TTT dcae {}", format_hms(seconds));
    Ok(seconds)
}

fn load_dcae(cfg: &PipelineConfig) -> Result<DcaeModel, CliError> {
    let path = model_path(cfg);
    if !path.exists() {
        return Err(CliError::MissingInput(format!("model file not found: {}", path.display())));
    }
    Ok(load_model(&path)?)
}

pub fn cmd_extract_features(cfg: &PipelineConfig) -> Result<(), CliError> {
    let cache = load_cache(cfg)?;
    let model = load_dcae(cfg)?;
    if model.input_length() != SIGNAL_LEN {
        return Err(CliError::Shape(format!(
            "model expects input shape ({}, 1) but cached signals have shape ({SIGNAL_LEN}, 1)",
            model.input_length()
        )));
    }
    let mode = cfg.dcae.feature_mode;
    let rows = cache
        .records
        .iter()
        .map(|r| {
            Ok(FeatureRow {
                id: r.id.clone(),
                positive: r.positive,
                values: encode_features(&model, &r.signal.to_f64(), mode)?,
            })
        })
        .collect::<Result<Vec<_>, crate::dcae::DcaeError>>()?;
    let path = features_path(cfg);
    write_text(&path, &format_feature_csv(&rows))?;
    println!(
        "wrote {} rows x {} {mode} features to {}",
        rows.len(),
        model.feature_len(mode),
        path.display()
    );
    Ok(())
}

/// Feature rows in cache order, with their split.
fn load_inputs(cfg: &PipelineConfig, source: FeatureSource) -> Result<Vec<(FeatureRow, Split)>, CliError> {
    let cache = load_cache(cfg)?;
    let rows = match source {
        FeatureSource::Raw => cache
            .records
            .iter()
            .map(|r| FeatureRow {
                id: r.id.clone(),
                positive: r.positive,
                values: r.signal.to_f64(),
            })
            .collect(),
        FeatureSource::Dcae => {
            let path = features_path(cfg);
            let parsed = parse_feature_csv(&read_text(&path, "feature file")?)?;
            if parsed.len() != cache.records.len() {
                return Err(CliError::Shape(format!(
                    "feature file has {} rows, cache has {} records",
                    parsed.len(),
                    cache.records.len()
                )));
            }
            let mut by_id: HashMap<String, FeatureRow> =
                parsed.into_iter().map(|r| (r.id.clone(), r)).collect();
            cache
                .records
                .iter()
                .map(|r| {
                    let row = by_id.remove(&r.id).ok_or_else(|| {
                        CliError::Shape(format!("record {} missing from the feature file", r.id))
                    })?;
                    if row.positive != r.positive {
                        return Err(CliError::Shape(format!(
                            "record {}: feature-file label disagrees with the cache",
                            r.id
                        )));
                    }
                    Ok(row)
                })
                .collect::<Result<Vec<_>, _>>()?
        }
    };
    Ok(rows.into_iter().zip(cache.records.iter().map(|r| r.split)).collect())
}

fn split_rows(inputs: &[(FeatureRow, Split)], split: Split) -> Vec<&FeatureRow> {
    inputs.iter().filter(|(_, s)| *s == split).map(|(r, _)| r).collect()
}

fn matrix(rows: &[&FeatureRow]) -> Result<FeatureMatrix, CliError> {
    Ok(FeatureMatrix::from_rows(rows.iter().map(|r| r.values.clone()).collect())?)
}

/// Fit one ensemble on the training split. Returns training seconds.
pub fn cmd_train_booster(
    cfg: &PipelineConfig,
    algo: Algorithm,
    source: FeatureSource,
) -> Result<f64, CliError> {
    let name = row_name(algo, source);
    if !cfg.boosters.is_configured(algo) {
        log::warn!("no configuration section for {algo}; using defaults");
    }
    let inputs = load_inputs(cfg, source)?;
    let train = split_rows(&inputs, Split::Train);
    let x = matrix(&train)?;
    let y: Vec<bool> = train.iter().map(|r| r.positive).collect();
    let (ensemble, elapsed) = time_block(&format!("{name} training"), || {
        match cfg.boosters.params(algo) {
            BoosterParams::AdaBoost(p) => adaboost_train(&x, &y, &p).map(BoostEnsemble::Adaboost),
            BoosterParams::Gbdt(p) => gbdt_train(&x, &y, &p).map(BoostEnsemble::Gbdt),
        }
    });
    let ensemble = ensemble?;
    let seconds = elapsed.as_secs_f64();
    let path = ensemble_path(cfg, &name);
    write_text(&path, &ensemble.to_json()?)?;
    write_text(&ttt_path(cfg, &name), &format!("{seconds}\n"))?;
    write_ids(&ids_path(cfg, &name), train.iter().map(|r| r.id.as_str()))?;
    println!("trained {name} on {} x {} -> {}", x.rows(), x.cols(), path.display());
    println!("TTT {name} {}", format_hms(seconds));
    Ok(seconds)
}

/// Score a trained ensemble on the test split.
pub fn cmd_evaluate(
    cfg: &PipelineConfig,
    algo: Algorithm,
    source: FeatureSource,
) -> Result<ReportRow, CliError> {
    let name = row_name(algo, source);
    let path = ensemble_path(cfg, &name);
    let ensemble = BoostEnsemble::from_json(&read_text(&path, "ensemble file")?)?;
    let inputs = load_inputs(cfg, source)?;
    let test = split_rows(&inputs, Split::Test);
    let truths: Vec<bool> = test.iter().map(|r| r.positive).collect();
    let predicted: Vec<bool> = if test.is_empty() {
        Vec::new()
    } else {
        ensemble
            .predict(&matrix(&test)?)?
            .into_iter()
            .map(|p| p.positive)
            .collect()
    };
    let cm = accumulate(&predicted, &truths).map_err(|e| CliError::Shape(e.to_string()))?;
    let mut metrics = compute_metrics(&cm).map_err(|e| CliError::Degenerate(e.to_string()))?;
    metrics.total_training_time_s = std::fs::read_to_string(ttt_path(cfg, &name))
        .ok()
        .and_then(|s| s.trim().parse().ok());
    let row = ReportRow {
        model: name.clone(),
        input: source.name().to_string(),
        metrics,
    };
    let rows = std::slice::from_ref(&row);
    write_text(&cfg.output_dir.join(format!("eval-{name}.csv")), &format_report_csv(rows))?;
    print!("{}", format_report_text(rows, None));
    Ok(row)
}

/// Every stage, then raw-signal and feature-fed rows for each configured
/// algorithm.
pub fn cmd_run_all(cfg: &PipelineConfig) -> Result<Vec<ReportRow>, CliError> {
    cmd_convert(cfg)?;
    let dcae_seconds = cmd_train_dcae(cfg)?;
    cmd_extract_features(cfg)?;
    let mut rows = Vec::new();
    for source in [FeatureSource::Raw, FeatureSource::Dcae] {
        for algo in Algorithm::ALL {
            if !cfg.boosters.is_configured(algo) {
                eprintln!("warning: skipping {}: no {algo} section in the config", row_name(algo, source));
                continue;
            }
            cmd_train_booster(cfg, algo, source)?;
            rows.push(cmd_evaluate(cfg, algo, source)?);
        }
    }
    let out = &cfg.output_dir;
    write_text(&out.join("report.csv"), &format_report_csv(&rows))?;
    write_text(&out.join("report_plot.csv"), &format_plot_csv(&rows))?;
    write_text(&out.join("timing.csv"), &format_timing_csv(&rows, Some(dcae_seconds)))?;
    let text = format_report_text(&rows, Some(dcae_seconds));
    write_text(&out.join("report.txt"), &text)?;
    println!("\n{text}");
    Ok(rows)
}
