//! Flat `key = value` run configuration, overridable from the command line.

use std::fs;
use std::path::Path;

use comic::codelength::TrainConfig;

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub train: TrainConfig,
    pub parallelism: usize,
    pub format: OutputFormat,
    pub skip_header: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            train: TrainConfig::default(),
            parallelism: 1,
            format: OutputFormat::Json,
            skip_header: false,
        }
    }
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str, line: usize) -> Result<T, CliError> {
    value
        .parse()
        .map_err(|_| CliError::usage(format!("config line {line}: invalid value {value:?} for {key}")))
}

impl RunConfig {
    /// Applies `key = value` lines on top of `self`. Blank lines and `#`
    /// comments are ignored; unknown keys are rejected.
    pub fn apply_text(&mut self, text: &str) -> Result<(), CliError> {
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::usage(format!("config line {line_no}: expected key = value")))?;
            let (key, value) = (key.trim(), value.trim());
            let t = &mut self.train;
            match key {
                "seed" => t.seed = parse_value(key, value, line_no)?,
                "hidden_width" => t.hidden_width = parse_value(key, value, line_no)?,
                "vi_epochs" => t.vi_epochs = parse_value(key, value, line_no)?,
                "warmup_epochs" => t.warmup_epochs = parse_value(key, value, line_no)?,
                "map_epochs" => t.map_epochs = parse_value(key, value, line_no)?,
                "lr_max" => t.lr_max = parse_value(key, value, line_no)?,
                "lr_min" => t.lr_min = parse_value(key, value, line_no)?,
                "mc_eval" | "mc_eval_samples" => t.mc_eval_samples = parse_value(key, value, line_no)?,
                "parallelism" => self.parallelism = parse_value(key, value, line_no)?,
                "skip_header" => self.skip_header = parse_value(key, value, line_no)?,
                "format" => {
                    self.format = match value {
                        "csv" => OutputFormat::Csv,
                        "json" => OutputFormat::Json,
                        _ => return Err(CliError::usage(format!("config line {line_no}: unknown format {value:?}"))),
                    }
                }
                other => return Err(CliError::usage(format!("config line {line_no}: unknown key {other:?}"))),
            }
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<(), CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::from(comic::Error::Io {
            path: path.to_path_buf(),
            source: e,
        }))?;
        self.apply_text(&text)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.parallelism == 0 {
            return Err(CliError::usage("parallelism must be at least 1"));
        }
        self.train.validate()?;
        Ok(())
    }
}
