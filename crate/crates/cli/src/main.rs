//! `dcqo`: counterdiabatic Ising optimization from the command line.
//!
//! Subcommands: `solve` (full pipeline to a run report), `benchmark`
//! (depth-matched method comparison over random instances), `profile`
//! (CD weight table), `transpile` (trapped-ion native rewrite), `spectrum`
//! (brute-force oracle dump), and `compare` (report table).

mod commands;
mod config;

use clap::{Args, Parser, Subcommand};
use commands::BenchmarkArgs;
use config::{ExperimentConfig, Method, ProblemSource};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "dcqo", version, about = "Digitized-counterdiabatic optimization for Ising spin glasses")]
struct Cli {
    /// Worker threads for batch runs and kernels (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

/// Problem-source flags shared by solve/profile/spectrum.
#[derive(Args, Clone, Default)]
struct ProblemArgs {
    /// Price CSV (`date,<ticker>,...`) for the portfolio pipeline.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Objective weight on expected returns.
    #[arg(long)]
    theta1: Option<f64>,
    /// Objective weight on covariance risk.
    #[arg(long)]
    theta2: Option<f64>,
    /// Objective weight on the budget penalty.
    #[arg(long)]
    theta3: Option<f64>,
    /// Budget (number of assets to pick); defaults to n/2.
    #[arg(long)]
    budget: Option<usize>,
    /// Generate a random spin glass with this many spins.
    #[arg(long)]
    random_n: Option<usize>,
    /// Seed for the random instance.
    #[arg(long)]
    instance_seed: Option<u64>,
    /// Spin-glass JSON document ({n, h, J, offset}).
    #[arg(long)]
    spin_glass: Option<PathBuf>,
}

impl ProblemArgs {
    fn to_source(&self) -> Result<ProblemSource, String> {
        let theta = match (self.theta1, self.theta2, self.theta3) {
            (None, None, None) => None,
            (t1, t2, t3) => {
                let d = config::DEFAULT_THETA;
                Some((t1.unwrap_or(d.0), t2.unwrap_or(d.1), t3.unwrap_or(d.2)))
            }
        };
        Ok(ProblemSource {
            csv: self.csv.clone(),
            theta,
            budget: self.budget,
            random_n: self.random_n,
            instance_seed: self.instance_seed,
            spin_glass: self.spin_glass.clone(),
        })
    }
}

#[derive(Args, Clone, Default)]
struct RunArgs {
    /// JSON config file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    method: Option<Method>,
    /// Total evolution time T.
    #[arg(long)]
    total_time: Option<f64>,
    /// Trotter step size.
    #[arg(long)]
    dt: Option<f64>,
    /// Ansatz layers p (variational methods).
    #[arg(long)]
    layers: Option<usize>,
    /// Gate-angle cutoff for pruning (CD-only).
    #[arg(long)]
    cutoff: Option<f64>,
    /// Keep the k most CD-dominant steps (CD-only).
    #[arg(long)]
    keep_steps: Option<usize>,
    /// Keep steps with |weight| >= fraction * max (CD-only).
    #[arg(long)]
    weight_fraction: Option<f64>,
    /// Measurement shots.
    #[arg(long)]
    shots: Option<u32>,
    /// Sampling seed.
    #[arg(long)]
    sample_seed: Option<u64>,
    /// Variational initial-parameter seed.
    #[arg(long)]
    init_seed: Option<u64>,
    /// Optimizer evaluation budget.
    #[arg(long)]
    max_iter: Option<usize>,
    /// Independent optimizer starts (variational methods).
    #[arg(long)]
    restarts: Option<usize>,
    /// Report E_avg over the feasible (Hamming-weight-B) set.
    #[arg(long)]
    feasible_avg: bool,
    /// Also emit the trapped-ion native circuit.
    #[arg(long)]
    emit_native: bool,
    /// Output directory (default: $DCQO_OUT_DIR or ./out).
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Output filename prefix (default: method name).
    #[arg(long)]
    prefix: Option<String>,
}

impl RunArgs {
    fn into_config(self, problem: &ProblemArgs) -> Result<ExperimentConfig, String> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::from_file(path)?,
            None => ExperimentConfig::default(),
        };
        let overrides = ExperimentConfig {
            problem: problem.to_source()?,
            method: self.method,
            total_time: self.total_time,
            dt: self.dt,
            layers: self.layers,
            cutoff: self.cutoff,
            keep_steps: self.keep_steps,
            weight_fraction: self.weight_fraction,
            shots: self.shots,
            sample_seed: self.sample_seed,
            init_seed: self.init_seed,
            max_iter: self.max_iter,
            restarts: self.restarts,
            feasible_avg: if self.feasible_avg { Some(true) } else { None },
            emit_native: if self.emit_native { Some(true) } else { None },
            out_dir: self.out_dir,
            prefix: self.prefix,
        };
        cfg.overlay(&overrides);
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run the full pipeline and write a report.
    Solve {
        #[command(flatten)]
        problem: ProblemArgs,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Depth-matched comparison (without-CD / with-CD / CD-only) over a
    /// batch of random instances.
    Benchmark {
        /// Number of random instances.
        #[arg(long, default_value_t = 100)]
        instances: usize,
        /// Smallest instance size.
        #[arg(long, default_value_t = 6)]
        n_min: usize,
        /// Largest instance size.
        #[arg(long, default_value_t = 10)]
        n_max: usize,
        /// Base seed; instance k uses seed + k.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Trotter step size.
        #[arg(long, default_value_t = 0.1)]
        dt: f64,
        /// Steps for the bare adiabatic arm.
        #[arg(long, default_value_t = 12)]
        steps_nocd: usize,
        /// Steps for the CD-assisted arm.
        #[arg(long, default_value_t = 4)]
        steps_cd: usize,
        /// Steps for the CD-only arm.
        #[arg(long, default_value_t = 6)]
        steps_cdonly: usize,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Tabulate λ, λ̇, α₁, and the CD weight per Trotter step.
    Profile {
        #[command(flatten)]
        problem: ProblemArgs,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Rewrite a circuit file (text or JSON) into native gates.
    Transpile {
        /// Input circuit (`.txt` line format or `.json`).
        #[arg(long)]
        circuit: PathBuf,
        /// Output path (default: input with `.native.txt`).
        #[arg(long)]
        output: Option<PathBuf>,
        /// Check unitary equivalence (small registers only).
        #[arg(long)]
        verify: bool,
    },
    /// Brute-force spectrum dump (exact oracle).
    Spectrum {
        #[command(flatten)]
        problem: ProblemArgs,
        #[command(flatten)]
        run: RunArgs,
        /// Feasible-set budget for the conditional average.
        #[arg(long)]
        spectrum_budget: Option<usize>,
    },
    /// Print a comparison table from run-report JSON files.
    Compare {
        /// Report paths.
        reports: Vec<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();

    #[cfg(feature = "parallel")]
    if let Some(jobs) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
            eprintln!("warning: could not set thread pool size: {e}");
        }
    }
    #[cfg(not(feature = "parallel"))]
    if cli.jobs.is_some() {
        eprintln!("warning: built without the `parallel` feature; --jobs ignored");
    }

    let result = match cli.command {
        Command::Solve { problem, run } => run
            .into_config(&problem)
            .and_then(|cfg| commands::cmd_solve(&cfg))
            .map(|_| ()),
        Command::Benchmark {
            instances,
            n_min,
            n_max,
            seed,
            dt,
            steps_nocd,
            steps_cd,
            steps_cdonly,
            out_dir,
        } => {
            let out_dir = out_dir.unwrap_or_else(|| {
                std::env::var_os("DCQO_OUT_DIR")
                    .map(PathBuf::from)
                    .unwrap_or_else(|| PathBuf::from("out"))
            });
            commands::cmd_benchmark(&BenchmarkArgs {
                instances,
                n_min,
                n_max,
                seed,
                dt,
                steps_nocd,
                steps_cd,
                steps_cdonly,
                out_dir,
            })
            .map(|_| ())
        }
        Command::Profile { problem, run } => run
            .into_config(&problem)
            .and_then(|cfg| commands::cmd_profile(&cfg))
            .map(|_| ()),
        Command::Transpile {
            circuit,
            output,
            verify,
        } => commands::cmd_transpile(&circuit, output.as_deref(), verify).map(|_| ()),
        Command::Spectrum {
            problem,
            run,
            spectrum_budget,
        } => run
            .into_config(&problem)
            .and_then(|cfg| commands::cmd_spectrum(&cfg, spectrum_budget))
            .map(|_| ()),
        Command::Compare { reports } => commands::cmd_compare(&reports),
    };

    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}
