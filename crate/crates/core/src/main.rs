use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ljq_core::cli::{self, AnalyzeOptions};
use ljq_core::config::{parse_estimators, RunConfig};
use ljq_core::{Error, Result};

#[derive(Parser)]
#[command(
    name = "ljq",
    version,
    about = "Quantum corrections for Lennard-Jones fluids by Metropolis Monte Carlo"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Equilibrate, then store trajectory, field records and a manifest.
    Simulate(ConfigArgs),
    /// Reduce a stored run into report.csv, report.json and records.txt.
    Analyze(AnalyzeArgs),
    /// Run the oracle suite and print residuals against tolerances.
    Verify,
    /// Simulate and analyse a list of ascending densities.
    Sweep {
        /// Comma-separated densities, e.g. 0.1,0.2,0.3
        #[arg(long, value_delimiter = ',', required = true)]
        densities: Vec<f64>,
        #[command(flatten)]
        config: ConfigArgs,
    },
}

/// Each flag overrides the key of the same name in the config file.
#[derive(Args, Default)]
struct ConfigArgs {
    /// `key = value` configuration file
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    element: Option<String>,
    #[arg(long)]
    sigma: Option<String>,
    #[arg(long = "r_min")]
    r_min: Option<String>,
    #[arg(long = "eps_over_kb")]
    eps_over_kb: Option<String>,
    #[arg(long)]
    mass: Option<String>,
    #[arg(long = "hbar_star")]
    hbar_star: Option<String>,
    #[arg(long = "t_star")]
    t_star: Option<String>,
    #[arg(long = "rho_star")]
    rho_star: Option<String>,
    #[arg(long = "n_particles")]
    n_particles: Option<String>,
    #[arg(long = "r_cut")]
    r_cut: Option<String>,
    #[arg(long = "step_length")]
    step_length: Option<String>,
    #[arg(long = "cycles_equil")]
    cycles_equil: Option<String>,
    #[arg(long = "cycles_prod")]
    cycles_prod: Option<String>,
    #[arg(long = "snapshot_interval")]
    snapshot_interval: Option<String>,
    #[arg(long = "tune_interval")]
    tune_interval: Option<String>,
    #[arg(long = "max_equil_extensions")]
    max_equil_extensions: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long = "momentum_replicas")]
    momentum_replicas: Option<String>,
    #[arg(long)]
    estimators: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    sign: Option<String>,
    #[arg(long = "n_blocks")]
    n_blocks: Option<String>,
    #[arg(long)]
    output: Option<String>,
}

impl ConfigArgs {
    fn build(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => cli::load_config(p)?,
            None => RunConfig::default(),
        };
        let pairs = [
            ("element", &self.element),
            ("sigma", &self.sigma),
            ("r_min", &self.r_min),
            ("eps_over_kb", &self.eps_over_kb),
            ("mass", &self.mass),
            ("hbar_star", &self.hbar_star),
            ("t_star", &self.t_star),
            ("rho_star", &self.rho_star),
            ("n_particles", &self.n_particles),
            ("r_cut", &self.r_cut),
            ("step_length", &self.step_length),
            ("cycles_equil", &self.cycles_equil),
            ("cycles_prod", &self.cycles_prod),
            ("snapshot_interval", &self.snapshot_interval),
            ("tune_interval", &self.tune_interval),
            ("max_equil_extensions", &self.max_equil_extensions),
            ("seed", &self.seed),
            ("momentum_replicas", &self.momentum_replicas),
            ("estimators", &self.estimators),
            ("sign", &self.sign),
            ("n_blocks", &self.n_blocks),
            ("output", &self.output),
        ];
        for (k, v) in pairs {
            if let Some(v) = v {
                cfg.set(k, v)?;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Run directory written by `simulate`
    #[arg(long)]
    dir: PathBuf,
    /// Reuse the stored configurations for another element
    #[arg(long)]
    element: Option<String>,
    #[arg(long = "hbar_star")]
    hbar_star: Option<f64>,
    #[arg(long)]
    estimators: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    sign: Option<f64>,
    #[arg(long = "n_blocks")]
    n_blocks: Option<usize>,
    /// Directory for the reports (defaults to --dir)
    #[arg(long = "report_dir")]
    report_dir: Option<PathBuf>,
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(args) => {
            let cfg = args.build()?;
            let out = cli::simulate(&cfg)?;
            let m = &out.manifest;
            println!(
                "run {} complete: {} snapshots, acceptance {:.3}, lambda_star {:.4}, output {}",
                m.run_id,
                m.snapshots,
                m.acceptance_rate,
                m.lambda_star,
                cfg.output.display()
            );
        }
        Command::Analyze(a) => {
            let opts = AnalyzeOptions {
                element: a.element,
                hbar_star: a.hbar_star,
                estimators: a.estimators.as_deref().map(parse_estimators).transpose()?,
                sign: a.sign,
                n_blocks: a.n_blocks,
                report_dir: a.report_dir,
            };
            let row = cli::analyze(&a.dir, &opts)?;
            print!("{}", ljq_core::analysis::to_csv(std::slice::from_ref(&row)));
        }
        Command::Verify => {
            let report = cli::verify()?;
            print!("{}", report.render());
            println!("quartic slope {:.3}", report.quartic_slope);
            report.into_result()?;
        }
        Command::Sweep { densities, config } => {
            let cfg = config.build()?;
            let rows = cli::sweep(&cfg, &densities)?;
            print!("{}", ljq_core::analysis::to_csv(&rows));
        }
    }
    Ok(())
}

fn report(e: &Error) -> String {
    let msg = e.to_string().replace('\n', " ");
    format!("error: kind={} message={msg}", e.kind())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", report(&e));
            ExitCode::FAILURE
        }
    }
}
