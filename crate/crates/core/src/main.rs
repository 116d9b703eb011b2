use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use raptor::harness::{run_experiment, write_outputs, Algorithm, ScenarioConfig, PRESETS};
use raptor::targets::{synthetic_loh_records, write_loh_csv, SYNTHETIC_SEED};

#[derive(Parser)]
#[command(
    name = "raptor",
    version,
    about = "Regional adaptive Metropolis experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a preset or a key=value config file.
    Run(RunArgs),
    /// List the built-in presets with their settings.
    Presets,
    /// Write a synthetic LOH data set as CSV.
    GenLoh {
        #[arg(long, default_value_t = SYNTHETIC_SEED)]
        seed: u64,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(clap::Args)]
struct RunArgs {
    /// Preset name or path to a config file.
    scenario: String,
    /// Algorithms to run (repeatable or comma-separated).
    #[arg(long = "algorithm", value_delimiter = ',')]
    algorithms: Vec<Algorithm>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    replications: Option<usize>,
    #[arg(long)]
    iters: Option<usize>,
    #[arg(long)]
    burnin: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    chains: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Use the long replication counts and run lengths.
    #[arg(long)]
    full_scale: bool,
    /// Write per-chain traces for replicate 0.
    #[arg(long)]
    traces: bool,
}

fn load(args: &RunArgs) -> raptor::Result<ScenarioConfig> {
    let mut cfg = match ScenarioConfig::preset(&args.scenario) {
        Some(c) => c,
        None => ScenarioConfig::parse(&std::fs::read_to_string(&args.scenario)?)?,
    };
    if args.full_scale {
        cfg.full_scale();
    }
    if !args.algorithms.is_empty() {
        cfg.algorithms = args.algorithms.clone();
    }
    macro_rules! apply {
        ($($arg:ident => $field:ident),*) => {$(
            if let Some(v) = args.$arg.clone() {
                cfg.$field = v;
            }
        )*};
    }
    apply!(seed => seed, replications => replications, iters => iterations, burnin => burn_in,
        alpha => alpha, chains => chains, out => out_dir);
    cfg.traces |= args.traces;
    cfg.validate()?;
    Ok(cfg)
}

fn run(args: RunArgs) -> raptor::Result<()> {
    let cfg = load(&args)?;
    let dir = cfg.out_dir.clone();
    eprintln!(
        "{}: {} chains x {} iterations, {} replicates, algorithms {:?}",
        cfg.name, cfg.chains, cfg.iterations, cfg.replications, cfg.algorithms
    );
    let res = run_experiment(cfg)?;
    for a in &res.aggregates {
        let mse = a.mse_sum().map_or("-".into(), |m| format!("{m:.5}"));
        let dn = a.dn_bar.map_or("-".into(), |v| format!("{v:.3e}"));
        println!(
            "{:<7} AR {:.4}  MSE(sum) {mse}  Dbar {dn}",
            a.algorithm.name(),
            a.ar
        );
    }
    for p in write_outputs(&res, &dir)? {
        eprintln!("wrote {}", p.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run(args),
        Command::Presets => {
            let mut out = std::io::stdout().lock();
            PRESETS
                .iter()
                .try_for_each(|name| {
                    writeln!(
                        out,
                        "## {name}\n{}",
                        ScenarioConfig::preset(name)
                            .expect("listed preset")
                            .render()
                    )
                })
                .map_err(Into::into)
        }
        Command::GenLoh { seed, out } => {
            let recs = synthetic_loh_records(seed);
            match out {
                Some(p) => std::fs::File::create(p)
                    .map_err(Into::into)
                    .and_then(|f| write_loh_csv(f, &recs)),
                None => write_loh_csv(std::io::stdout().lock(), &recs),
            }
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
