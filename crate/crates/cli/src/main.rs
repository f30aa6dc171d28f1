//! `comic` command-line interface.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use comic::data::{Family, TUEBINGEN_URL};

use config::{OutputFormat, RunConfig};

#[derive(Parser, Debug)]
#[command(name = "comic", version, about = "Causal direction of two variables by variational codelength comparison")]
struct Cli {
    #[command(flatten)]
    opts: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct GlobalOpts {
    /// Master seed; overrides the config file and $COMIC_SEED (default 0).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Hidden layer width.
    #[arg(long, global = true)]
    hidden_width: Option<usize>,
    /// Variational epochs.
    #[arg(long, global = true)]
    vi_epochs: Option<usize>,
    /// MAP pretraining epochs.
    #[arg(long, global = true)]
    map_epochs: Option<usize>,
    /// KL warm-up epochs within the variational phase.
    #[arg(long, global = true)]
    warmup_epochs: Option<usize>,
    /// Initial learning rate of the cosine schedule.
    #[arg(long, global = true)]
    lr_max: Option<f64>,
    /// Final learning rate of the cosine schedule.
    #[arg(long, global = true)]
    lr_min: Option<f64>,
    /// Monte Carlo samples for the final codelength estimate.
    #[arg(long, global = true)]
    mc_eval: Option<usize>,
    /// Worker threads for benchmark scoring.
    #[arg(long, global = true)]
    parallelism: Option<usize>,
    /// Output format for stdout.
    #[arg(long, global = true, value_enum)]
    format: Option<OutputFormat>,
    /// Treat the first line of pair files as a header.
    #[arg(long, global = true)]
    skip_header: bool,
    /// Output directory (generate, benchmark, fetch-tuebingen) or file (score).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Flat `key = value` configuration file; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a synthetic benchmark in the pair/meta convention.
    Generate {
        #[arg(long)]
        family: Family,
        #[arg(long, default_value_t = 20)]
        n_pairs: usize,
        #[arg(long, default_value_t = 500)]
        n_samples: usize,
    },
    /// Score one two-column pair file.
    Score { pair: PathBuf },
    /// Score every pair listed in a dataset directory's meta file.
    Benchmark {
        dir: PathBuf,
        /// Defaults to `<dir>/pairmeta.txt`.
        #[arg(long)]
        meta: Option<PathBuf>,
    },
    /// Download the Tübingen cause-effect pairs.
    FetchTuebingen {
        #[arg(long, default_value = TUEBINGEN_URL)]
        url: String,
    },
}

/// Failure surfaced to the shell.
#[derive(Debug)]
pub enum CliError {
    Core(comic::Error),
    Usage(String),
    /// The command ran but produced no usable result.
    Failed(String),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Core(e) => e.kind(),
            CliError::Usage(_) => "argument",
            CliError::Failed(_) => "failed",
        }
    }

    fn exit_code(&self) -> u8 {
        match self.kind() {
            "failed" => 1,
            "argument" => 2,
            "parse" => 3,
            "io" => 4,
            "numeric" => 5,
            "degenerate_variable" => 6,
            "network" => 7,
            _ => 1,
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Core(e) => e.to_string(),
            CliError::Usage(m) | CliError::Failed(m) => m.clone(),
        }
    }
}

impl From<comic::Error> for CliError {
    fn from(e: comic::Error) -> Self {
        CliError::Core(e)
    }
}

impl GlobalOpts {
    fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut cfg = RunConfig::default();
        if let Ok(raw) = std::env::var("COMIC_SEED") {
            cfg.train.seed = raw
                .trim()
                .parse()
                .map_err(|_| CliError::usage(format!("COMIC_SEED is not an unsigned integer: {raw:?}")))?;
        }
        if let Some(path) = &self.config {
            cfg.apply_file(path)?;
        }
        let t = &mut cfg.train;
        if let Some(v) = self.seed {
            t.seed = v;
        }
        if let Some(v) = self.hidden_width {
            t.hidden_width = v;
        }
        if let Some(v) = self.vi_epochs {
            t.vi_epochs = v;
        }
        if let Some(v) = self.map_epochs {
            t.map_epochs = v;
        }
        if let Some(v) = self.warmup_epochs {
            t.warmup_epochs = v;
        }
        if let Some(v) = self.lr_max {
            t.lr_max = v;
        }
        if let Some(v) = self.lr_min {
            t.lr_min = v;
        }
        if let Some(v) = self.mc_eval {
            t.mc_eval_samples = v;
        }
        if let Some(v) = self.parallelism {
            cfg.parallelism = v;
        }
        if let Some(v) = self.format {
            cfg.format = v;
        }
        cfg.skip_header |= self.skip_header;
        cfg.validate()?;
        Ok(cfg)
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = cli.opts.resolve()?;
    let out = cli.opts.out.as_deref();
    match cli.command {
        Command::Generate {
            family,
            n_pairs,
            n_samples,
        } => commands::generate(family, n_pairs, n_samples, &cfg, out),
        Command::Score { pair } => commands::score(&pair, &cfg, out),
        Command::Benchmark { dir, meta } => commands::benchmark(&dir, meta.as_deref(), &cfg, out),
        Command::FetchTuebingen { url } => commands::fetch_tuebingen(&url, out),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::error!("{}", e.message());
            let body = serde_json::json!({
                "error": { "kind": e.kind(), "message": e.message(), "exit_code": e.exit_code() }
            });
            println!("{body}");
            ExitCode::from(e.exit_code())
        }
    }
}
