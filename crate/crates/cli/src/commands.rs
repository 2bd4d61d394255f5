use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use juicespec_core::dataset::{parse_dataset_csv, write_dataset_csv};
use juicespec_core::evaluate::{format_report, ReportFormat};
use juicespec_core::importance::{importance_csv, importance_curves, topk_csv};
use juicespec_core::synth::generate_synthetic_dataset;
use juicespec_core::{
    run_experiment, CvScheme, Dataset, FeatureSpec, ModelKind, ModelSpec, ResultTable, SynthConfig, Target,
};
use serde::Serialize;

use crate::args::{Command, EvaluateArgs, RankArgs, ReportArgs, SynthArgs, ValidateArgs};
use crate::output::{io_error, read_input, sha256_hex, write_atomic, write_json, InputRecord, RunManifest};
use crate::{usage, CliError};

pub fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Synth(a) => synth(a),
        Command::Validate(a) => validate(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Rank(a) => rank(a),
        Command::Report(a) => report(a),
    }
}

/// Expands `all` or a comma-separated list of names, in canonical order.
fn parse_choice<T>(flag: &str, value: &str, all: &[T]) -> Result<Vec<T>, CliError>
where
    T: Copy + Ord + std::str::FromStr<Err = String>,
{
    if value == "all" {
        return Ok(all.to_vec());
    }
    let picked = value
        .split(',')
        .map(|name| name.trim().parse().map_err(|e| usage(format!("{flag}: {e}"))))
        .collect::<Result<BTreeSet<T>, _>>()?;
    Ok(picked.into_iter().collect())
}

fn parse_window(value: Option<&str>) -> Result<Option<(u32, u32)>, CliError> {
    let Some(text) = value else { return Ok(None) };
    let bad = || usage(format!("--window: expected LO:HI in nm, got `{text}`"));
    let (lo, hi) = text.split_once(':').ok_or_else(bad)?;
    Ok(Some((
        lo.trim().parse().map_err(|_| bad())?,
        hi.trim().parse().map_err(|_| bad())?,
    )))
}

/// Applies a `key=value` file on top of the default hyperparameters. Blank
/// lines and lines starting with `#` are ignored.
fn load_model_spec(path: Option<&Path>) -> Result<ModelSpec, CliError> {
    let mut spec = ModelSpec::new(ModelKind::Svm);
    let Some(path) = path else { return Ok(spec) };
    let text = fs::read_to_string(path).map_err(|e| usage(format!("--config {}: {e}", path.display())))?;
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| usage(format!("--config {}:{}: expected key=value", path.display(), n + 1)))?;
        spec.set(key.trim(), value)
            .map_err(|e| usage(format!("--config {}:{}: {e}", path.display(), n + 1)))?;
    }
    Ok(spec)
}

fn load_dataset(path: &Path) -> Result<(Dataset, InputRecord), CliError> {
    let bytes = read_input(path)?;
    let dataset =
        parse_dataset_csv(bytes.as_slice()).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    let input = InputRecord {
        path: path.display().to_string(),
        sha256: sha256_hex(&bytes),
    };
    Ok((dataset, input))
}

fn feature_spec(dataset: &Dataset, target: Target, window: Option<(u32, u32)>) -> Result<FeatureSpec, CliError> {
    let spec = FeatureSpec::for_target(target).with_window(window);
    spec.validate(dataset.grid())
        .map_err(|e| usage(format!("--window: {e}")))?;
    Ok(spec)
}

fn flag(command: &mut String, name: &str, value: impl std::fmt::Display) {
    command.push_str(&format!(" --{name} {value}"));
}

fn synth(a: SynthArgs) -> Result<(), CliError> {
    let config = SynthConfig {
        n_juices: a.juices,
        replicates_per_juice: a.replicates,
        n_regions: a.regions,
        n_vineyards: a.vineyards,
        noise_sd: a.noise,
        seed: a.seed,
        ..SynthConfig::default()
    };
    let dataset = generate_synthetic_dataset(&config).map_err(|e| usage(e.to_string()))?;
    write_atomic(&a.out, &write_dataset_csv(&dataset))?;
    println!("wrote {} samples to {}", dataset.len(), a.out.display());
    Ok(())
}

fn validate(a: ValidateArgs) -> Result<(), CliError> {
    let (dataset, input) = load_dataset(&a.data)?;
    let samples = dataset.samples();
    let distinct = |f: fn(&juicespec_core::Sample) -> &str| {
        samples
            .iter()
            .map(f)
            .filter(|v| !v.is_empty())
            .collect::<BTreeSet<_>>()
            .len()
    };
    let grid = dataset.grid();
    println!("file: {} (sha256 {})", input.path, input.sha256);
    println!("samples: {}", dataset.len());
    println!("juices: {}", distinct(|s| &s.metadata.juice_id));
    println!("regions: {}", distinct(|s| &s.metadata.region));
    println!("vineyards: {}", distinct(|s| &s.metadata.vineyard));
    println!(
        "grid: {}-{} nm, step {} nm, {} points",
        grid.start_nm(),
        grid.end_nm(),
        grid.step_nm(),
        grid.len()
    );
    for target in Target::ALL.into_iter().filter(|t| t.is_regression()) {
        let present = samples.iter().filter(|s| target.label(s).is_some()).count();
        println!("{}: {present}/{} labelled", target.name(), dataset.len());
    }
    let chemistry = samples
        .iter()
        .filter(|s| s.metadata.tss.is_some() && s.metadata.ph.is_some() && s.metadata.ta.is_some())
        .count();
    println!("chemistry: {chemistry}/{} complete", dataset.len());
    println!("valid");
    Ok(())
}

#[derive(Serialize)]
struct EvaluateRun<'a> {
    task: Target,
    model: ModelKind,
    cv: CvScheme,
    features: &'a FeatureSpec,
    hyperparameters: &'a ModelSpec,
}

fn evaluate(a: EvaluateArgs) -> Result<(), CliError> {
    let tasks = parse_choice("--task", &a.task, &Target::ALL)?;
    let models = parse_choice("--model", &a.model, &ModelKind::ALL)?;
    let schemes = parse_choice("--cv", &a.cv, &[CvScheme::Lojo, CvScheme::Loso])?;
    let window = parse_window(a.window.as_deref())?;
    let base = load_model_spec(a.config.as_deref())?;
    let (dataset, input) = load_dataset(&a.data)?;

    let mut command = String::from("juicespec evaluate");
    flag(&mut command, "data", a.data.display());
    flag(&mut command, "task", &a.task);
    flag(&mut command, "model", &a.model);
    flag(&mut command, "cv", &a.cv);
    flag(&mut command, "seed", a.seed);
    if let Some(w) = &a.window {
        flag(&mut command, "window", w);
    }
    if let Some(c) = &a.config {
        flag(&mut command, "config", c.display());
    }

    for &task in &tasks {
        let features = feature_spec(&dataset, task, window)?;
        for &cv in &schemes {
            for &model in &models {
                let spec = base.with_kind(model);
                let table = run_experiment(&dataset, &features, &spec, cv, a.seed)?;
                let mut dir = a.out.clone();
                if tasks.len() > 1 {
                    dir.push(task.name());
                }
                if schemes.len() > 1 {
                    dir.push(cv.name());
                }
                if models.len() > 1 {
                    dir.push(model.name());
                }
                write_atomic(&dir.join("metrics.json"), table.metrics_json().as_bytes())?;
                write_atomic(&dir.join("predictions.csv"), table.predictions_csv().as_bytes())?;
                let run = EvaluateRun {
                    task,
                    model,
                    cv,
                    features: &features,
                    hyperparameters: &spec,
                };
                write_json(
                    &dir.join("manifest.json"),
                    &RunManifest::new(command.clone(), a.seed, input.clone(), run),
                )?;
                let summary: Vec<String> = table.metrics.iter().map(|(k, v)| format!("{k}={v:.3}")).collect();
                println!("{task} {cv} {model}: {}", summary.join(" "));
            }
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct RankRun<'a> {
    tasks: Vec<Target>,
    top: usize,
    window: Option<(u32, u32)>,
    hyperparameters: &'a ModelSpec,
}

fn rank(a: RankArgs) -> Result<(), CliError> {
    let tasks = parse_choice("--task", &a.task, &Target::ALL)?;
    let window = parse_window(a.window.as_deref())?;
    let spec = load_model_spec(a.config.as_deref())?;
    if a.top == 0 {
        return Err(usage("--top must be at least 1"));
    }
    let (dataset, input) = load_dataset(&a.data)?;

    let mut curves = Vec::new();
    for &task in &tasks {
        let features = feature_spec(&dataset, task, window)?;
        curves.extend(importance_curves(&dataset, &features, &spec, a.seed)?);
    }
    let topk = topk_csv(&curves, a.top).map_err(|e| usage(format!("--top: {e}")))?;
    write_atomic(&a.out.join("importance.csv"), importance_csv(&curves).as_bytes())?;
    write_atomic(&a.out.join("topk.csv"), topk.as_bytes())?;

    let mut command = String::from("juicespec rank");
    flag(&mut command, "data", a.data.display());
    flag(&mut command, "task", &a.task);
    flag(&mut command, "top", a.top);
    flag(&mut command, "seed", a.seed);
    if let Some(w) = &a.window {
        flag(&mut command, "window", w);
    }
    if let Some(c) = &a.config {
        flag(&mut command, "config", c.display());
    }
    let run = RankRun {
        tasks,
        top: a.top,
        window,
        hyperparameters: &spec,
    };
    write_json(
        &a.out.join("manifest.json"),
        &RunManifest::new(command, a.seed, input, run),
    )?;
    print!("{topk}");
    Ok(())
}

fn find_results(dir: &Path, found: &mut Vec<PathBuf>) -> Result<(), CliError> {
    let mut entries: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| io_error(dir, e))?
        .map(|e| e.map(|e| e.path()).map_err(|err| io_error(dir, err)))
        .collect::<Result<_, _>>()?;
    entries.sort();
    for path in entries {
        if path.is_dir() {
            find_results(&path, found)?;
        } else if path.file_name().is_some_and(|n| n == "metrics.json") {
            found.push(path);
        }
    }
    Ok(())
}

fn report(a: ReportArgs) -> Result<(), CliError> {
    let format: ReportFormat = a.format.parse().map_err(|e| usage(format!("--format: {e}")))?;
    let mut paths = Vec::new();
    find_results(&a.data, &mut paths)?;
    if paths.is_empty() {
        return Err(CliError::Data(format!(
            "no metrics.json found under {}",
            a.data.display()
        )));
    }
    let mut tables: Vec<ResultTable> = Vec::with_capacity(paths.len());
    for metrics in paths {
        let predictions = metrics.with_file_name("predictions.csv");
        let read = |p: &Path| fs::read_to_string(p).map_err(|e| io_error(p, e));
        let table = ResultTable::from_stored(&read(&metrics)?, &read(&predictions)?)
            .map_err(|e| CliError::Data(format!("{}: {e}", metrics.display())))?;
        tables.push(table);
    }
    let (regression, classification): (Vec<ResultTable>, Vec<ResultTable>) =
        tables.into_iter().partition(|t| t.task.is_regression());
    let mut sections = Vec::new();
    for group in [regression, classification] {
        if !group.is_empty() {
            sections.push(format_report(&group, format).map_err(|e| CliError::Data(e.to_string()))?);
        }
    }
    let text = sections.join("\n");
    match &a.out {
        Some(path) => write_atomic(path, text.as_bytes()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
