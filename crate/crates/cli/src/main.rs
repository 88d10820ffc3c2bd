//! `symcap`: outage experiments for the symmetric capacity of fading
//! multiple-access channels.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use symcap_cli::params::{BoundArg, ConventionArg, Job, ModeArg, Overrides, PrecoderArg};
use symcap_cli::validate::{self, Suite};
use symcap_cli::{execute, exit_code, replay, resolve, RunOutcome};

#[derive(Parser, Debug)]
#[command(
    name = "symcap",
    version,
    about = "Symmetric-capacity outage experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Regenerate the data behind one figure (1 to 10).
    Fig {
        id: u8,
        #[command(flatten)]
        common: Common,
    },
    /// Evaluate a closed-form bound at one point.
    Bound {
        which: BoundArg,
        #[command(flatten)]
        common: Common,
    },
    /// Conditional outage CDF, or outage against SNR when --snr-db-list is given.
    Simulate {
        #[command(flatten)]
        common: Common,
    },
    /// Integer-forcing outage CDF for single-antenna users.
    IfSim {
        #[command(flatten)]
        common: Common,
    },
    /// Run acceptance checks and print one line per criterion.
    Validate {
        #[arg(value_enum, default_value = "all")]
        suite: Suite,
        /// Replace every criterion's trial count.
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Re-run a job from its manifest.
    Replay {
        manifest: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

#[derive(Args, Debug)]
struct Common {
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Number of users; some figures accept a list.
    #[arg(long, value_delimiter = ',')]
    users: Option<Vec<usize>>,
    #[arg(long)]
    nr: Option<usize>,
    #[arg(long)]
    nt: Option<usize>,
    /// Sum capacity C in bits.
    #[arg(long)]
    sum_cap: Option<f64>,
    /// Target rate in bits, interpreted by --rate-convention.
    #[arg(long)]
    rate: Option<f64>,
    /// Subset size for `bound subset` and `bound mimo-subset`.
    #[arg(long)]
    subset: Option<usize>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    snr_db_list: Option<Vec<f64>>,
    /// Capacities swept by the fraction and mean-rate figures.
    #[arg(long, value_delimiter = ',')]
    cap_grid: Option<Vec<f64>>,
    #[arg(long)]
    rate_points: Option<usize>,
    #[arg(long)]
    outage_level: Option<f64>,
    #[arg(long, value_enum)]
    precoder: Option<PrecoderArg>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    #[arg(long, value_enum)]
    rate_convention: Option<ConventionArg>,
}

impl Common {
    fn overrides(&self) -> Overrides {
        Overrides {
            trials: self.trials,
            seed: self.seed,
            users: self.users.clone(),
            nr: self.nr,
            nt: self.nt,
            sum_cap: self.sum_cap,
            rate: self.rate,
            subset: self.subset,
            snr_db_list: self.snr_db_list.clone(),
            cap_grid: self.cap_grid.clone(),
            rate_points: self.rate_points,
            outage_level: self.outage_level,
            precoder: self.precoder,
            mode: self.mode,
            rate_convention: self.rate_convention,
        }
    }
}

fn run_job(job: Job, common: &Common) -> anyhow::Result<RunOutcome> {
    let params = resolve(&job, &common.overrides())?;
    execute(job, params, &common.out)
}

fn report(outcome: &RunOutcome) {
    if let Some(summary) = &outcome.summary {
        println!("{summary}");
    }
    if let Some(csv) = &outcome.csv {
        eprintln!("wrote {}", csv.display());
    }
    eprintln!("wrote {}", outcome.manifest.display());
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    let outcome = match cli.command {
        Command::Fig { id, common } => run_job(Job::Fig { id }, &common)?,
        Command::Bound { which, common } => run_job(Job::Bound { which }, &common)?,
        Command::Simulate { common } => run_job(Job::Simulate, &common)?,
        Command::IfSim { common } => run_job(Job::IfSim, &common)?,
        Command::Replay { manifest, out } => replay(&manifest, &out)?,
        Command::Validate {
            suite,
            trials,
            seed,
        } => {
            let opts = validate::Options { trials, seed };
            let mut all_passed = true;
            for &n in suite.criteria() {
                let r = validate::run_criterion(n, &opts)?;
                println!("{}", r.line());
                all_passed &= r.passed();
            }
            return Ok(all_passed);
        }
    };
    report(&outcome);
    Ok(true)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
