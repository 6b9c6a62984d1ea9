use std::io;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{CommandFactory, Parser, Subcommand};

use bagcheck::bagging::{IterationCap, DEFAULT_Q};
use bagcheck::experiments::{
    exact_crossings, int_grid, real_grid, run_estimate, run_formulas, run_kurtosis_sweep,
    run_mse_gap_experiment, run_oracle, run_regression_experiment, write_csv, write_csv_file,
    CsvRow, KurtosisSweepConfig, MseGapConfig, RegressionConfig,
};
use bagcheck::{DistributionSpec, EnumerationLimit};

#[derive(Parser)]
#[command(
    name = "bagcheck",
    version,
    about = "Bagged variance estimation: experiments, formulas and exact checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Test MSE of bagged OLS and regression trees against the number of bags.
    Regression {
        /// Comma-separated bag counts.
        #[arg(long = "N", value_delimiter = ',', default_value = "1,2,4,8,16,32,64")]
        n_bags: Vec<u64>,
        /// Bag size; defaults to the training-set size.
        #[arg(long)]
        m: Option<usize>,
        /// Bag seeds per dataset.
        #[arg(long, default_value_t = 100)]
        trials: usize,
        /// Independent datasets per noise level.
        #[arg(long, default_value_t = 10)]
        datasets: usize,
        /// Comma-separated noise standard deviations.
        #[arg(long, value_delimiter = ',', default_value = "0.5,5")]
        noise: Vec<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo MSE gap of the bagged variance against exact and asymptotic values, m = n.
    MseGap {
        #[arg(long, value_parser = parse_dist, default_value = "gaussian:1")]
        dist: DistributionSpec,
        /// Sample sizes as start:end:step.
        #[arg(long = "n-grid", default_value = "10:100:10")]
        n_grid: String,
        #[arg(long = "N", default_value_t = 50)]
        n_bags: usize,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// MSE of bagged and plain variance over the two-point-pair family.
    KurtosisSweep {
        /// Values of p as start:end:step.
        #[arg(long = "p-grid", default_value = "0.02:0.98:0.02")]
        p_grid: String,
        #[arg(long, default_value_t = 0.125)]
        a: f64,
        #[arg(long, default_value_t = 10)]
        n: usize,
        #[arg(long = "N", default_value_t = 20)]
        n_bags: usize,
        #[arg(long, default_value_t = 100_000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Closed-form quantities for one distribution and (n, m, N).
    Formulas {
        #[arg(long, value_parser = parse_dist)]
        dist: DistributionSpec,
        #[arg(long)]
        n: usize,
        /// Bag size; defaults to n.
        #[arg(long)]
        m: Option<usize>,
        #[arg(long = "N", default_value_t = 1)]
        n_bags: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exhaustive enumeration over all bags next to the closed forms.
    Oracle {
        /// Comma-separated data values.
        #[arg(
            long,
            value_delimiter = ',',
            allow_hyphen_values = true,
            required = true
        )]
        data: Vec<f64>,
        #[arg(long)]
        m: usize,
        /// Also enumerate all sets of N bags.
        #[arg(long = "N")]
        n_bags: Option<usize>,
        #[arg(long = "max-states", default_value_t = 10_000_000)]
        max_states: u128,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Variance of a dataset with kurtosis-gated bagging.
    Estimate {
        /// Comma-separated data values.
        #[arg(
            long,
            value_delimiter = ',',
            allow_hyphen_values = true,
            required = true
        )]
        data: Vec<f64>,
        #[arg(long, default_value_t = DEFAULT_Q)]
        q: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Maximum number of bags; defaults to 50 n.
        #[arg(long = "max-N")]
        max_bags: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_dist(s: &str) -> Result<DistributionSpec, String> {
    let spec: DistributionSpec = s.parse().map_err(|e| {
        format!("{e} (expected gaussian:SIGMA, uniform:A:B, rademacher or twopoint:p=P:a=A)")
    })?;
    spec.validate().map_err(|e| format!("{e}"))?;
    Ok(spec)
}

fn emit<R: CsvRow>(out: Option<&Path>, rows: &[R]) -> Result<()> {
    match out {
        Some(path) => {
            write_csv_file(path, rows).with_context(|| format!("writing {}", path.display()))
        }
        None => write_csv(io::stdout().lock(), rows).context("writing to stdout"),
    }
}

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var("BAGCHECK_THREADS") {
        let threads: usize = v
            .parse()
            .with_context(|| format!("BAGCHECK_THREADS={v} is not a count"))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .context("configuring the thread pool")?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    configure_threads()?;
    match cli.command {
        Command::Regression {
            n_bags,
            m,
            trials,
            datasets,
            noise,
            seed,
            out,
        } => {
            let cfg = RegressionConfig {
                noise_levels: noise,
                bag_counts: n_bags,
                bag_size: m,
                bag_seeds: trials,
                datasets,
                seed,
                ..RegressionConfig::default()
            };
            emit(out.as_deref(), &run_regression_experiment(&cfg)?)
        }
        Command::MseGap {
            dist,
            n_grid,
            n_bags,
            trials,
            seed,
            out,
        } => {
            let cfg = MseGapConfig {
                distribution: dist,
                sizes: int_grid(&n_grid)?,
                iterations: n_bags,
                trials,
                seed,
            };
            emit(out.as_deref(), &run_mse_gap_experiment(&cfg)?)
        }
        Command::KurtosisSweep {
            p_grid,
            a,
            n,
            n_bags,
            trials,
            seed,
            out,
        } => {
            let cfg = KurtosisSweepConfig {
                p_grid: real_grid(&p_grid)?,
                a,
                n,
                iterations: n_bags,
                trials,
                seed,
            };
            let rows = run_kurtosis_sweep(&cfg)?;
            for root in exact_crossings(&cfg)? {
                eprintln!("exact MSE gap changes sign at p = {root:.6}");
            }
            emit(out.as_deref(), &rows)
        }
        Command::Formulas {
            dist,
            n,
            m,
            n_bags,
            out,
        } => {
            let row = run_formulas(&dist, n, m.unwrap_or(n), n_bags)?;
            emit(out.as_deref(), &[row])
        }
        Command::Oracle {
            data,
            m,
            n_bags,
            max_states,
            out,
        } => {
            let rows = run_oracle(&data, m, n_bags, EnumerationLimit { max_states })?;
            emit(out.as_deref(), &rows)?;
            if rows.iter().any(|r| !r.exact_match) {
                bail!("enumeration and closed form disagree");
            }
            Ok(())
        }
        Command::Estimate {
            data,
            q,
            seed,
            max_bags,
            out,
        } => {
            let cap = max_bags.map_or(IterationCap::default(), IterationCap::Absolute);
            emit(out.as_deref(), &[run_estimate(&data, q, seed, cap)?])
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            if !e.use_stderr() {
                return ExitCode::SUCCESS;
            }
            if !e.render().to_string().contains("Usage:") {
                eprintln!("\n{}", Cli::command().render_usage());
            }
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
