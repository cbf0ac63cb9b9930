use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use steelprop::dataset::Property;
use steelprop::evalstat::Family;
use steelprop::pipeline::{
    cmd_augment, cmd_compare, cmd_report, cmd_synth, cmd_train, cmd_validate, read_to_string, ExperimentConfig,
    ExperimentManifest, PipelineError, Workspace,
};

/// Regression workbench for steel alloy mechanical properties.
#[derive(Debug, Parser)]
#[command(name = "steelprop", version)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// Experiment configuration (TOML). Defaults apply to missing keys.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Re-run with the configuration recorded in a manifest and check that
    /// every output reproduces byte for byte.
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,
    /// Property to work on (default: all configured properties).
    #[arg(long, global = true, value_parser = parse_property)]
    property: Option<Property>,
    /// Overrides the base seed (for `synth`, the generator seed).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads. Results do not depend on this.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Output directory (overrides `output_dir`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic record-level dataset at the configured path.
    Synth {
        /// Number of records (overrides `synth.n_records`).
        #[arg(long)]
        records: Option<usize>,
    },
    /// Parse and check the dataset.
    Validate,
    /// Expand composition ranges into train/validation and test samples.
    Augment,
    /// Fit model families with k-fold cross-validation.
    Train {
        /// Family to train (default: all four).
        #[arg(long, value_parser = parse_family)]
        family: Option<Family>,
    },
    /// Compare family reports with the Friedman test.
    Compare {
        /// Report CSVs; defaults to every family report of the property.
        reports: Vec<PathBuf>,
        /// Significance level (overrides `alpha`).
        #[arg(long)]
        alpha: Option<f64>,
    },
    /// Draw prediction scatter plots and a summary.
    Report,
    /// Configuration helpers.
    Config {
        #[command(subcommand)]
        action: ConfigAction,
    },
}

#[derive(Debug, Subcommand)]
enum ConfigAction {
    /// Print the default configuration.
    Init,
}

fn parse_property(s: &str) -> Result<Property, String> {
    s.parse().map_err(|e: steelprop::dataset::DataError| e.to_string())
}

fn parse_family(s: &str) -> Result<Family, String> {
    s.parse()
}

fn load_config(g: &GlobalArgs) -> Result<(ExperimentConfig, Option<ExperimentManifest>), PipelineError> {
    let (mut cfg, expected) = match &g.manifest {
        Some(path) => {
            let m = ExperimentManifest::from_json(&read_to_string(path)?)?;
            (m.config.clone(), Some(m))
        }
        None => match &g.config {
            Some(path) => (ExperimentConfig::from_toml(&read_to_string(path)?)?, None),
            None => (ExperimentConfig::default(), None),
        },
    };
    if expected.is_some() && g.config.is_some() {
        eprintln!("note: --manifest given; ignoring --config");
    }
    if let Some(seed) = g.seed {
        cfg.seed = seed;
    }
    Ok((cfg, expected))
}

fn run(cli: Cli) -> Result<(), PipelineError> {
    if let Command::Config { action: ConfigAction::Init } = cli.command {
        print!("{}", ExperimentConfig::default().to_toml());
        return Ok(());
    }
    let g = &cli.global;
    let (mut cfg, expected) = load_config(g)?;
    if let Command::Synth { records } = &cli.command {
        if let Some(seed) = g.seed {
            cfg.synth.truth.seed = seed;
        }
        if let Some(n) = records {
            cfg.synth.n_records = *n;
        }
    }
    let properties: Vec<Property> = match g.property {
        Some(p) => vec![p],
        None => cfg.properties.clone(),
    };
    let out_dir = g.out.clone().unwrap_or_else(|| cfg.output_dir.clone());
    let jobs = g.jobs.unwrap_or(cfg.jobs);
    let mut ws = Workspace::open(cfg, out_dir, jobs, expected)?;

    match cli.command {
        Command::Synth { .. } => {
            let n = cmd_synth(&mut ws)?;
            println!("wrote {n} records to {}", ws.config.dataset.display());
        }
        Command::Validate => {
            let s = cmd_validate(&mut ws)?;
            println!("{}: {} valid records", ws.config.dataset.display(), s.records);
            for (r, n) in s.ranged_histogram.iter().enumerate().filter(|(_, n)| **n > 0) {
                println!("  {n} records with {r} ranged elements");
            }
            println!("  augmentation will give {} train/validation samples", s.expected_train_val);
        }
        Command::Augment => {
            for s in cmd_augment(&mut ws, &properties)? {
                println!("{}: {} train/validation samples, {} test samples", s.property, s.train_val, s.test);
            }
        }
        Command::Train { family } => {
            let families = family.map_or_else(|| Family::ALL.to_vec(), |f| vec![f]);
            for o in cmd_train(&mut ws, &properties, &families)? {
                let failed = o.outcomes.iter().filter(|x| x.is_none()).count();
                println!(
                    "{} {} [{}]: mean test R² {:.5}, mean EQM {:.5}{}",
                    o.property,
                    o.family,
                    o.report.variant,
                    o.report.mean_r2,
                    o.report.mean_eqm,
                    if failed > 0 { format!(" ({failed} folds failed)") } else { String::new() }
                );
            }
        }
        Command::Compare { reports, alpha } => {
            let alpha = alpha.unwrap_or(ws.config.alpha);
            let targets = if reports.is_empty() { properties } else { vec![property_of(&reports[0], g)?] };
            for p in targets {
                let cmp = cmd_compare(&mut ws, p, &reports, alpha)?;
                print!("{}", cmp.summary());
            }
        }
        Command::Report => {
            for path in cmd_report(&mut ws, &properties)? {
                println!("wrote {}", path.display());
            }
        }
        Command::Config { .. } => unreachable!("handled above"),
    }
    Ok(())
}

/// Property of explicitly listed reports: `--property`, else the first report's.
fn property_of(first: &std::path::Path, g: &GlobalArgs) -> Result<Property, PipelineError> {
    if let Some(p) = g.property {
        return Ok(p);
    }
    let report = steelprop::evalstat::EvalReport::from_csv(&read_to_string(first)?)
        .map_err(|e| PipelineError::InvalidInput(format!("{}: {e}", first.display())))?;
    Ok(report.property)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
