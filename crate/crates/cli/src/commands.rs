use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use comic::codelength::{score_pair, PairReport, TrainConfig};
use comic::data::{
    fetch_tuebingen as fetch, generate_benchmark, load_pair_directory, load_pair_file, write_labels_csv, write_meta,
    write_pair_file, Family, GeneratorSpec, LoadOptions, GENERATOR_VERSION,
};
use comic::eval::run_benchmark;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::{OutputFormat, RunConfig};
use crate::CliError;

fn io_err(path: &Path, source: std::io::Error) -> CliError {
    comic::Error::Io {
        path: path.to_path_buf(),
        source,
    }
    .into()
}

fn require_out<'a>(out: Option<&'a Path>, command: &str) -> Result<&'a Path, CliError> {
    out.ok_or_else(|| CliError::usage(format!("{command} requires --out <DIR>")))
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("serializable output")
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| io_err(path, e)),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|e| io_err(Path::new("<stdout>"), e))
        }
    }
}

#[derive(Serialize)]
struct ManifestFile {
    name: String,
    sha256: String,
}

#[derive(Serialize)]
struct Manifest {
    generator_version: &'static str,
    family: Family,
    n_pairs: usize,
    n_samples: usize,
    seed: u64,
    files: Vec<ManifestFile>,
}

pub fn generate(
    family: Family,
    n_pairs: usize,
    n_samples: usize,
    cfg: &RunConfig,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let dir = require_out(out, "generate")?;
    let spec = GeneratorSpec {
        family,
        n_pairs,
        n_samples,
        seed: cfg.train.seed,
    };
    spec.validate()?;
    let pairs = generate_benchmark(&spec)?;
    create_dir(dir)?;

    let mut names = Vec::with_capacity(pairs.len() + 2);
    for p in &pairs {
        let name = format!("pair{}.txt", p.id);
        write_pair_file(dir.join(&name), p)?;
        names.push(name);
    }
    write_meta(dir.join("pairmeta.txt"), &pairs)?;
    names.push("pairmeta.txt".to_string());
    write_labels_csv(dir.join("labels.csv"), &pairs)?;
    names.push("labels.csv".to_string());

    let mut files = Vec::with_capacity(names.len());
    for name in names {
        let path = dir.join(&name);
        let bytes = fs::read(&path).map_err(|e| io_err(&path, e))?;
        files.push(ManifestFile {
            name,
            sha256: hex(&Sha256::digest(&bytes)),
        });
    }
    let manifest = Manifest {
        generator_version: GENERATOR_VERSION,
        family,
        n_pairs,
        n_samples,
        seed: spec.seed,
        files,
    };
    let text = to_json(&manifest) + "\n";
    let manifest_path = dir.join("manifest.json");
    fs::write(&manifest_path, &text).map_err(|e| io_err(&manifest_path, e))?;
    emit(&text, None)
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Serialize)]
struct ScoreOutput<'a> {
    id: &'a str,
    input: String,
    delta_xy: f64,
    delta_yx: f64,
    final_delta: f64,
    decision: &'static str,
    confidence: f64,
    l_marginal_x: f64,
    l_cond_y_given_x: f64,
    l_marginal_y: f64,
    l_cond_x_given_y: f64,
    seed: u64,
    config: &'a TrainConfig,
}

impl<'a> ScoreOutput<'a> {
    fn new(id: &'a str, input: &Path, report: &PairReport, config: &'a TrainConfig) -> Self {
        Self {
            id,
            input: input.display().to_string(),
            delta_xy: report.forward.delta,
            delta_yx: report.backward.delta,
            final_delta: report.final_delta,
            decision: report.decision.as_str(),
            confidence: report.confidence,
            l_marginal_x: report.forward.l_marginal_cause,
            l_cond_y_given_x: report.forward.l_conditional_effect,
            l_marginal_y: report.backward.l_marginal_cause,
            l_cond_x_given_y: report.backward.l_conditional_effect,
            seed: config.seed,
            config,
        }
    }

    fn to_csv(&self) -> String {
        let c = self.config;
        format!(
            "id,delta_xy,delta_yx,final_delta,decision,confidence,l_marginal_x,l_cond_y_given_x,l_marginal_y,\
             l_cond_x_given_y,seed,hidden_width,map_epochs,vi_epochs,warmup_epochs,lr_max,lr_min,mc_eval_samples\n\
             {},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            self.id,
            self.delta_xy,
            self.delta_yx,
            self.final_delta,
            self.decision,
            self.confidence,
            self.l_marginal_x,
            self.l_cond_y_given_x,
            self.l_marginal_y,
            self.l_cond_x_given_y,
            self.seed,
            c.hidden_width,
            c.map_epochs,
            c.vi_epochs,
            c.warmup_epochs,
            c.lr_max,
            c.lr_min,
            c.mc_eval_samples,
        )
    }
}

pub fn score(pair_path: &Path, cfg: &RunConfig, out: Option<&Path>) -> Result<(), CliError> {
    let options = LoadOptions {
        skip_header: cfg.skip_header,
        ..LoadOptions::default()
    };
    let pair = load_pair_file(pair_path, &options)?;
    let report = score_pair(&pair, &cfg.train)?;
    let output = ScoreOutput::new(&pair.id, pair_path, &report, &cfg.train);
    let text = match cfg.format {
        OutputFormat::Json => to_json(&output) + "\n",
        OutputFormat::Csv => output.to_csv(),
    };
    emit(&text, out)
}

#[derive(Serialize)]
struct BenchmarkOutput<'a> {
    results_csv: PathBuf,
    summary_json: PathBuf,
    parallelism: usize,
    aggregates: &'a comic::eval::Aggregates,
    weighting: &'a str,
    total_runtime_secs: f64,
    config: &'a TrainConfig,
}

pub fn benchmark(dir: &Path, meta: Option<&Path>, cfg: &RunConfig, out: Option<&Path>) -> Result<(), CliError> {
    let meta_path = meta.map(Path::to_path_buf).unwrap_or_else(|| dir.join("pairmeta.txt"));
    if !meta_path.exists() {
        let empty = fs::read_dir(dir).map_err(|e| io_err(dir, e))?.next().is_none();
        if empty {
            return Err(CliError::usage(format!("dataset directory {} is empty", dir.display())));
        }
    }
    let pairs = load_pair_directory(dir, &meta_path, cfg.skip_header)?;
    if pairs.is_empty() {
        return Err(CliError::usage(format!("no scorable pairs listed in {}", meta_path.display())));
    }

    let result = run_benchmark(&pairs, &cfg.train, cfg.parallelism)?;

    let out_dir = out.unwrap_or(Path::new("."));
    create_dir(out_dir)?;
    let csv_path = out_dir.join("results.csv");
    let mut csv_bytes = Vec::new();
    result.write_csv(&mut csv_bytes)?;
    fs::write(&csv_path, &csv_bytes).map_err(|e| io_err(&csv_path, e))?;
    let summary_path = out_dir.join("summary.json");
    fs::write(&summary_path, result.to_json()? + "\n").map_err(|e| io_err(&summary_path, e))?;

    let text = match cfg.format {
        OutputFormat::Csv => String::from_utf8(csv_bytes).expect("csv output is utf-8"),
        OutputFormat::Json => {
            to_json(&BenchmarkOutput {
                results_csv: csv_path,
                summary_json: summary_path,
                parallelism: cfg.parallelism,
                aggregates: &result.aggregates,
                weighting: &result.weighting,
                total_runtime_secs: result.total_runtime_secs,
                config: &result.config,
            }) + "\n"
        }
    };
    emit(&text, None)?;

    if result.aggregates.scored == 0 {
        return Err(CliError::Failed(format!("all {} pairs failed", result.aggregates.failed)));
    }
    Ok(())
}

#[derive(Serialize)]
struct FetchFailure<'a> {
    file: &'a str,
    reason: &'a str,
}

pub fn fetch_tuebingen(url: &str, out: Option<&Path>) -> Result<(), CliError> {
    let dir = require_out(out, "fetch-tuebingen")?;
    create_dir(dir)?;
    let summary = fetch(url, dir)?;
    let failed: Vec<FetchFailure> = summary
        .failed
        .iter()
        .map(|(file, reason)| FetchFailure { file, reason })
        .collect();
    let body = serde_json::json!({
        "written": summary.written,
        "skipped": summary.skipped,
        "failed": failed,
    });
    emit(&(to_json(&body) + "\n"), None)?;
    if !summary.failed.is_empty() {
        return Err(CliError::Failed(format!("{} files could not be fetched", summary.failed.len())));
    }
    Ok(())
}
