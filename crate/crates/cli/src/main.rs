use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use epiforecast_cli::config::{ConfigFile, Overrides, RunConfig};
use epiforecast_cli::{eval, fetch, forecast, risktree, Result};

/// Short-horizon case forecasting and CFR risk trees.
#[derive(Parser)]
#[command(name = "epiforecast", version)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Common {
    /// Flat `key = value` file; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory [default: out]
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Use bundled snapshots instead of the network.
    #[arg(long, global = true)]
    offline: bool,
    /// Forecast horizon in days [default: 10]
    #[arg(long, global = true)]
    horizon: Option<usize>,
    /// Minimum node size to attempt a split [default: max(5, ceil(n/10))]
    #[arg(long, global = true)]
    minsplit: Option<usize>,
    /// Cross-validation folds [default: 10]
    #[arg(long, global = true)]
    folds: Option<usize>,
    /// Fold-assignment seed [default: 1]
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write country series (and the CFR table) as CSV.
    Fetch {
        /// Dataset names; all bundled names when omitted.
        names: Vec<String>,
        /// Long-format source with location, date and new_cases columns.
        #[arg(long)]
        url: Option<String>,
    },
    /// Fit the hybrid model and forecast.
    Forecast {
        input: PathBuf,
        /// Fixed stage-1 order `p,d,q` instead of AIC selection.
        #[arg(long)]
        order: Option<String>,
        /// log1p | none | boxcox:<lambda> [default: log1p]
        #[arg(long)]
        transform: Option<String>,
        #[arg(long)]
        max_p: Option<usize>,
        #[arg(long)]
        max_q: Option<usize>,
    },
    /// Grow, prune and cross-validate a CFR regression tree.
    Risktree { input: PathBuf },
    /// RMSE and MAE of a forecast over the dates it shares with the observations.
    Eval {
        actual: PathBuf,
        forecast: PathBuf,
        /// Forecast column [default: hybrid, else cases, else the only one]
        #[arg(long)]
        column: Option<String>,
    },
}

fn run(cli: Cli) -> Result<()> {
    let file = match &cli.common.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    let c = &cli.common;
    let mut flags = Overrides {
        horizon: c.horizon,
        minsplit: c.minsplit,
        folds: c.folds,
        seed: c.seed,
        out: c.out.clone(),
        offline: c.offline,
        ..Default::default()
    };
    if let Cmd::Forecast { order, transform, max_p, max_q, .. } = &cli.cmd {
        flags.order = order.clone();
        flags.transform = transform.clone();
        flags.max_p = *max_p;
        flags.max_q = *max_q;
    }
    let cfg = RunConfig::resolve(&flags, &file)?;

    match &cli.cmd {
        Cmd::Fetch { names, url } => {
            for path in fetch::run(names, url.as_deref(), cfg.offline, &cfg.out)? {
                println!("wrote {}", path.display());
            }
        }
        Cmd::Forecast { input, .. } => {
            let r = forecast::run(input, &cfg)?;
            print!("{}", forecast::report(&r));
            for path in &r.files {
                println!("wrote {}", path.display());
            }
        }
        Cmd::Risktree { input } => {
            let r = risktree::run(input, &cfg)?;
            print!("{}", risktree::report(&r));
            for path in &r.files {
                println!("wrote {}", path.display());
            }
        }
        Cmd::Eval { actual, forecast, column } => {
            let (r, path) = eval::run(actual, forecast, column.as_deref(), &cfg.out)?;
            println!("{} dates ({} to {}), column `{}`", r.n, r.first_date, r.last_date, r.column);
            println!("RMSE {:.4}  MAE {:.4}", r.rmse, r.mae);
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
