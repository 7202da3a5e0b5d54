use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use suturemap::config::PipelineConfig;
use suturemap::decode::Connectivity;

mod commands;

#[derive(Parser, Debug)]
#[command(name = "suturemap", version, about = "Landmark heatmap encoding, decoding and evaluation")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Args, Debug)]
struct GlobalArgs {
    /// Pipeline config (TOML); flags below override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Worker threads; 0 uses every core.
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,

    /// Seed for split and synth.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Match radius in px.
    #[arg(long, global = true)]
    radius: Option<f64>,

    /// Gaussian kernel sigma in px.
    #[arg(long, global = true)]
    sigma: Option<f64>,

    /// Component connectivity, 4 or 8.
    #[arg(long, global = true, value_parser = parse_connectivity)]
    connectivity: Option<Connectivity>,

    /// Write colour overlays of decoded frames here.
    #[arg(long, global = true)]
    overlay_dir: Option<PathBuf>,

    /// Print the effective config as TOML and exit.
    #[arg(long, global = true)]
    dump_config: bool,
}

fn parse_connectivity(s: &str) -> std::result::Result<Connectivity, String> {
    match s {
        "4" => Ok(Connectivity::Four),
        "8" => Ok(Connectivity::Eight),
        _ => Err(format!("expected 4 or 8, got {s}")),
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Render one 8-bit PNG heatmap per labelled frame.
    Encode {
        /// Label JSON file.
        labels: PathBuf,
        /// Output directory for `<frame_id>.png` and `manifest.json`.
        out_dir: PathBuf,
    },
    /// Decode a directory of PNG heatmaps into a label file.
    Decode {
        heatmap_dir: PathBuf,
        /// Output label JSON file.
        out: PathBuf,
        /// Ground truth used to colour overlays (TP green, FP red, FN yellow).
        #[arg(long)]
        gt: Option<PathBuf>,
    },
    /// Score predictions against ground truth, per fold.
    Evaluate {
        pred: PathBuf,
        gt: PathBuf,
        /// Fold manifest from `split`; without it all frames form one fold.
        #[arg(long)]
        folds: Option<PathBuf>,
        /// Also write fold metrics as comma-separated text.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Print the mean ± std table of a fold metrics file.
    Aggregate {
        /// Rows of `fold,precision,sensitivity,f1`.
        metrics: PathBuf,
    },
    /// Assign surgeries to k folds and print frame counts.
    Split {
        labels: PathBuf,
        #[arg(short, long)]
        k: usize,
        /// Fold manifest output.
        out: PathBuf,
    },
    /// Run seeded synthetic trials and write one row per trial.
    Synth(commands::SynthArgs),
}

impl GlobalArgs {
    fn effective_config(&self) -> Result<PipelineConfig> {
        let mut cfg = match &self.config {
            Some(path) => PipelineConfig::load(path)
                .with_context(|| format!("loading config {}", path.display()))?,
            None => PipelineConfig::default(),
        };
        if let Some(r) = self.radius {
            cfg.radius = r;
        }
        if let Some(s) = self.sigma {
            cfg.sigma = s;
        }
        if let Some(c) = self.connectivity {
            cfg.connectivity = c;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn run(cli: Cli) -> Result<bool> {
    let g = &cli.global;
    let cfg = g.effective_config()?;
    if g.dump_config {
        print!("{}", cfg.to_commented_toml());
        return Ok(true);
    }
    let Some(command) = cli.command else {
        anyhow::bail!("no subcommand given; see --help");
    };
    let pool = rayon::ThreadPoolBuilder::new().num_threads(g.jobs).build()?;
    let overlay = g.overlay_dir.as_deref();
    pool.install(|| match command {
        Command::Encode { labels, out_dir } => commands::encode(&labels, &out_dir, &cfg),
        Command::Decode { heatmap_dir, out, gt } => {
            commands::decode(&heatmap_dir, &out, gt.as_deref(), overlay, &cfg)
        }
        Command::Evaluate { pred, gt, folds, csv } => {
            commands::evaluate(&pred, &gt, folds.as_deref(), csv.as_deref(), &cfg)
        }
        Command::Aggregate { metrics } => commands::aggregate(&metrics),
        Command::Split { labels, k, out } => commands::split(&labels, k, g.seed, &out),
        Command::Synth(args) => commands::synth(&args, g.seed, &cfg),
    })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
