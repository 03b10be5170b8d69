use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use confab::pipeline::{TheoryOptions, ZipfOptions};
use confab::{AppError, AppResult, Pipeline, RunConfig};
use confab_core::refdata::ParamAxis;

#[derive(Parser, Debug)]
#[command(
    name = "confab",
    version,
    about = "Measure and model citation confabulation in language-model output"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// JSON run configuration; relative dataset and fixture paths resolve against its directory.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Dataset JSON (models, topics, raw generations, relevance labels).
    #[arg(long, global = true)]
    dataset: Option<PathBuf>,
    /// Fixture cache directory.
    #[arg(long, global = true, value_name = "DIR")]
    fixtures: Option<PathBuf>,
    /// Serve OpenAlex requests from the fixture cache only.
    #[arg(long, global = true, conflicts_with = "live")]
    offline: bool,
    /// Query OpenAlex and record responses into the fixture cache.
    #[arg(long, global = true)]
    live: bool,
    /// Maximum requests per second in live mode.
    #[arg(long, global = true, value_name = "N")]
    rate_limit: Option<f64>,
    /// Contact address sent with live requests (falls back to OPENALEX_MAILTO).
    #[arg(long, global = true)]
    mailto: Option<String>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output bundle directory.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Relevance weight of a PARTIAL label.
    #[arg(long, global = true)]
    partial_weight: Option<f64>,
    #[arg(long, global = true, value_enum)]
    param_axis: Option<Axis>,
    /// Bootstrap resamples.
    #[arg(long, global = true)]
    resamples: Option<usize>,
    /// Report cluster-robust sigmoid standard errors (clustered by model).
    #[arg(long, global = true)]
    cluster_robust: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Axis {
    Total,
    Active,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Split and parse raw generations; write references and accounting.
    Ingest,
    /// Match references against OpenAlex and classify fields.
    Verify,
    /// Per-reference quality and model×topic cells.
    Score,
    /// Sigmoid and log-linear fits with plot data and the partial-weight sweep.
    Fit {
        /// Cells file to fit instead of the bundle's cells.csv.
        #[arg(long)]
        cells: Option<PathBuf>,
        /// Fit quality against size per model instead (published table unless --models is given).
        #[arg(long)]
        per_model: bool,
        /// Model table CSV for --per-model.
        #[arg(long, requires = "per_model")]
        models: Option<PathBuf>,
    },
    /// Zipf exponent of a concept-frequency file with a `count` column.
    Zipf {
        #[arg(long)]
        input: PathBuf,
        /// Rolling-window width in ranks.
        #[arg(long, default_value_t = 50)]
        window: usize,
        /// Lower cutoff for the MLE; defaults to the smallest count.
        #[arg(long)]
        x_min: Option<f64>,
    },
    /// Reference slopes, extrapolation, interference floor and simulator sweeps.
    Theory {
        /// Use the fitted sigmoid from fit.json.
        #[arg(long)]
        from_fit: bool,
        /// Observed per-decade slope for the efficiency table.
        #[arg(long)]
        observed_slope: Option<f64>,
        /// Simulator inventory size M.
        #[arg(long, default_value_t = 10_000)]
        inventory: u64,
    },
    /// Citation counts of verified references against model size.
    Citetail,
    /// Quality matrix, sweep table and text summary from existing artifacts.
    Report,
    /// verify, score, fit, theory, citetail and report in sequence.
    Run,
    /// Write a synthetic dataset, fixture cache and config into DIR.
    Demo {
        dir: PathBuf,
        #[arg(long, default_value_t = 7)]
        demo_seed: u64,
    },
}

fn resolve(base: &Path, p: PathBuf) -> PathBuf {
    if p.is_relative() {
        base.join(p)
    } else {
        p
    }
}

fn build_config(g: &Global) -> AppResult<RunConfig> {
    let mut cfg = match &g.config {
        Some(path) => {
            let mut c = RunConfig::load(path)?;
            let base = path.parent().unwrap_or(Path::new(""));
            c.dataset = c.dataset.map(|d| resolve(base, d));
            c.fixtures = resolve(base, c.fixtures);
            c
        }
        None => RunConfig::default(),
    };
    if let Some(d) = &g.dataset {
        cfg.dataset = Some(d.clone());
    }
    if let Some(f) = &g.fixtures {
        cfg.fixtures = f.clone();
    }
    if g.offline {
        cfg.offline = true;
    }
    if g.live {
        cfg.offline = false;
    }
    if let Some(r) = g.rate_limit {
        cfg.rate_limit = r;
    }
    if let Some(m) = &g.mailto {
        cfg.mailto = Some(m.clone());
    }
    if let Some(s) = g.seed {
        cfg.seed = s;
    }
    if let Some(o) = &g.out {
        cfg.out_dir = o.clone();
    }
    if let Some(w) = g.partial_weight {
        cfg.partial_weight = w;
    }
    if let Some(a) = g.param_axis {
        cfg.param_axis = match a {
            Axis::Total => ParamAxis::Total,
            Axis::Active => ParamAxis::Active,
        };
    }
    if let Some(r) = g.resamples {
        cfg.resamples = r;
    }
    if g.cluster_robust {
        cfg.cluster_robust = true;
    }
    Ok(cfg)
}

fn run(cli: Cli) -> AppResult<()> {
    if let Command::Demo { dir, demo_seed } = &cli.command {
        let files = confab::demo::generate(dir, *demo_seed)?;
        println!(
            "wrote {} ({} fixtures) and {}",
            files.dataset.display(),
            files.n_fixtures,
            files.config.display()
        );
        return Ok(());
    }
    let p = Pipeline::new(build_config(&cli.global)?)?;
    match cli.command {
        Command::Ingest => {
            let ing = p.ingest()?;
            println!(
                "{} references, {} parse failures",
                ing.references.len(),
                ing.failures.len()
            );
        }
        Command::Verify => {
            let (_, records) = p.verify()?;
            println!("verified {} references", records.len());
        }
        Command::Score => {
            let cells = p.score()?;
            println!("{} cells", cells.len());
        }
        Command::Fit {
            cells,
            per_model,
            models,
        } => {
            if per_model {
                p.fit_per_model(models.as_deref())?;
            } else {
                p.fit(cells.as_deref())?;
            }
        }
        Command::Zipf { input, window, x_min } => p.zipf(&ZipfOptions { input, window, x_min })?,
        Command::Theory {
            from_fit,
            observed_slope,
            inventory,
        } => p.theory(&TheoryOptions {
            from_fit,
            observed_slope,
            inventory,
            ..TheoryOptions::default()
        })?,
        Command::Citetail => {
            let g = p.citetail()?;
            println!("{} models, slope {}", g.models.len(), g.slope());
        }
        Command::Report => p.report()?,
        Command::Run => p.run_all()?,
        Command::Demo { .. } => unreachable!(),
    }
    println!("output: {}", p.bundle().dir().display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(AppError::exit_code(&e) as u8)
        }
    }
}
