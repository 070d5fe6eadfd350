use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use e2e_ilc::cli::{
    parse_config, prepare_output_dir, resolve_document, write_json, write_results, CliError,
    ConfigFile, Experiment,
};
use e2e_ilc::runner::{case_study_config, CASE_STUDY_FULL_SAMPLES, CASE_STUDY_SAMPLES};
use e2e_ilc::sweep::superadditivity_sweep;

/// Two-player (input + trajectory) iterative learning control laboratory.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize gains and write analysis.json only.
    Synthesize(RunArgs),
    /// Run an experiment from a config file.
    Run(RunArgs),
    /// Game analysis of a config, or a seeded superadditivity sweep.
    Game(GameArgs),
    /// Run the desktop-printer case study.
    Casestudy(CaseArgs),
}

#[derive(Args)]
struct Common {
    /// Output directory, created if absent.
    #[arg(long)]
    out: PathBuf,
    /// Write into a non-empty output directory.
    #[arg(long)]
    force: bool,
    /// Override the horizon `N + 1`.
    #[arg(long, value_name = "N1")]
    samples: Option<usize>,
    /// Dotted config override, e.g. `weights.q=100`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Write every trial to signals.csv.
    #[arg(long)]
    all_trials: bool,
}

impl Common {
    fn overrides(&self) -> Vec<String> {
        let mut all = Vec::new();
        if let Some(n) = self.samples {
            all.push(format!("horizon_samples={n}"));
        }
        all.extend(self.overrides.iter().cloned());
        all
    }
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct CaseArgs {
    /// Full 4501-sample horizon.
    #[arg(long)]
    full: bool,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct GameArgs {
    #[arg(long, conflicts_with = "seed")]
    config: Option<PathBuf>,
    /// Seed of the random-instance sweep (used when no config is given).
    #[arg(long)]
    seed: Option<u64>,
    /// Qualifying instances in the sweep.
    #[arg(long, default_value_t = 20)]
    instances: usize,
    /// Trials per instance in the sweep.
    #[arg(long, default_value_t = 30)]
    trials: usize,
    #[command(flatten)]
    common: Common,
}

fn run_and_write(exp: &Experiment, common: &Common) -> Result<(), CliError> {
    let results = exp.run()?;
    prepare_output_dir(&common.out, common.force)?;
    for p in write_results(&common.out, &results, common.all_trials)? {
        println!("wrote {}", p.display());
    }
    let a = &results.analysis;
    println!(
        "convergence_norm={:.6} theorem1_margin={:.6e} grand_below_input_only={}",
        a.convergence_norm,
        a.theorem1_margin,
        a.grand_below_input_only
            .map_or_else(|| "n/a".to_string(), |b| b.to_string())
    );
    Ok(())
}

fn synthesize(exp: &Experiment, common: &Common) -> Result<(), CliError> {
    let report = exp.synthesize()?;
    prepare_output_dir(&common.out, common.force)?;
    let path = common.out.join("analysis.json");
    write_json(&path, &report)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn sweep(seed: u64, args: &GameArgs) -> Result<bool, CliError> {
    let report = superadditivity_sweep(seed, args.instances, args.trials)?;
    prepare_output_dir(&args.common.out, args.common.force)?;
    let path = args.common.out.join("sweep.json");
    write_json(&path, &report)?;
    println!("wrote {}", path.display());
    let bad: Vec<usize> = report.counterexamples().map(|i| i.index).collect();
    println!(
        "{} instances from {} draws, {} with superadditivity violations",
        report.instances.len(),
        report.draws,
        bad.len()
    );
    Ok(bad.is_empty())
}

fn load(config: &Path, common: &Common) -> Result<Experiment, CliError> {
    parse_config(config, &common.overrides())
}

fn execute(cli: Cli) -> Result<bool, CliError> {
    match cli.command {
        Command::Synthesize(a) => synthesize(&load(&a.config, &a.common)?, &a.common).map(|_| true),
        Command::Run(a) => run_and_write(&load(&a.config, &a.common)?, &a.common).map(|_| true),
        Command::Game(a) => match (&a.config, a.seed) {
            (Some(cfg), _) => run_and_write(&load(cfg, &a.common)?, &a.common).map(|_| true),
            (None, Some(seed)) => sweep(seed, &a),
            (None, None) => Err(CliError::Ilc(e2e_ilc::IlcError::Config(
                "game needs --config or --seed".into(),
            ))),
        },
        Command::Casestudy(a) => {
            let n = if a.full {
                CASE_STUDY_FULL_SAMPLES
            } else {
                CASE_STUDY_SAMPLES
            };
            let doc = ConfigFile::from_experiment(&case_study_config(n));
            let exp = resolve_document(&doc, &a.common.overrides())?;
            run_and_write(&exp, &a.common).map(|_| true)
        }
    }
}

fn configure_threads() {
    let Ok(raw) = std::env::var("ILC_E2E_THREADS") else {
        return;
    };
    match raw.trim().parse::<usize>() {
        Ok(n) if n > 0 => {
            if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                eprintln!("warning: ILC_E2E_THREADS ignored: {e}");
            }
        }
        _ => eprintln!("warning: ILC_E2E_THREADS={raw} is not a positive integer"),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    configure_threads();
    match execute(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
