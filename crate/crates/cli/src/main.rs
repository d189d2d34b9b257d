use std::path::PathBuf;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Parser, ValueEnum};
use routesim::runner::{
    parse_distance_grid, parse_float_list, parse_protocols, run_experiment, BackendKind,
    ExperimentConfig, Preset,
};
use routesim::AseFailedPolicy;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PresetArg {
    Paper,
    Desk,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum AseFailedArg {
    Accumulated,
    Excluded,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum BackendArg {
    Analytic,
    Mc,
}

/// Compare greedy forwarding, maximum progress and AODV routing in a finite
/// ad hoc network as a function of source-destination distance.
#[derive(Debug, Parser)]
#[command(name = "routesim", version)]
struct Args {
    /// Flat key-value configuration file (a previous run's manifest works too).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Scale preset applied on top of the configuration.
    #[arg(long, value_enum)]
    preset: Option<PresetArg>,
    /// Comma-separated subset of gf,mp,aodv.
    #[arg(long)]
    protocols: Option<String>,
    /// Source-destination distances as start:step:stop or a comma list.
    #[arg(long)]
    distances: Option<String>,
    /// Number of random topologies per distance.
    #[arg(long)]
    topologies: Option<usize>,
    /// Trials per topology.
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; 0 uses every core.
    #[arg(long)]
    workers: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Greedy-forwarding transmission ranges (start:step:stop or a comma list).
    #[arg(long)]
    rt: Option<String>,
    /// Write the first topology of each distance as CSV.
    #[arg(long)]
    dump_topology: bool,
    /// How failed trials enter the area spectral efficiency.
    #[arg(long, value_enum)]
    ase_failed: Option<AseFailedArg>,
    /// Link outage evaluator.
    #[arg(long, value_enum)]
    outage_backend: Option<BackendArg>,
    /// Samples per link for the Monte Carlo outage evaluator.
    #[arg(long)]
    n_mc: Option<usize>,
}

fn build_config(args: &Args) -> Result<ExperimentConfig> {
    let mut config = match &args.config {
        Some(path) => ExperimentConfig::from_file(path)
            .with_context(|| format!("reading configuration {}", path.display()))?,
        None => ExperimentConfig::default(),
    };
    if let Some(preset) = args.preset {
        config.apply_preset(match preset {
            PresetArg::Paper => Preset::Paper,
            PresetArg::Desk => Preset::Desk,
        });
    }
    if let Some(list) = &args.protocols {
        config.protocols = parse_protocols(list)?;
    }
    if let Some(grid) = &args.distances {
        config.distance_grid = parse_distance_grid(grid)?;
    }
    if let Some(rt) = &args.rt {
        config.r_t = parse_float_list(rt, "transmission ranges")?;
    }
    if let Some(n) = args.topologies {
        config.topologies = n;
    }
    if let Some(n) = args.trials {
        config.trials = n;
    }
    if let Some(seed) = args.seed {
        config.master_seed = seed;
    }
    if let Some(n) = args.workers {
        config.worker_count = n;
    }
    if let Some(out) = &args.out {
        config.output_directory = out.clone();
    }
    if args.dump_topology {
        config.dump_topology = true;
    }
    if let Some(policy) = args.ase_failed {
        config.ase_failed = match policy {
            AseFailedArg::Accumulated => AseFailedPolicy::Accumulated,
            AseFailedArg::Excluded => AseFailedPolicy::Excluded,
        };
    }
    if let Some(backend) = args.outage_backend {
        config.outage_backend = match backend {
            BackendArg::Analytic => BackendKind::Analytic,
            BackendArg::Mc => BackendKind::Mc,
        };
    }
    if let Some(n) = args.n_mc {
        config.n_mc = n;
    }
    config.validate()?;
    Ok(config)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.4}")).unwrap_or_else(|| "-".into())
}

fn main() -> Result<()> {
    let args = Args::parse();
    let config = build_config(&args)?;
    eprintln!(
        "running {} distances x {} topologies x {} trials -> {}",
        config.distance_grid.len(),
        config.topologies,
        config.trials,
        config.output_directory.display()
    );
    let started = Instant::now();
    let sweep = run_experiment(&config)?;
    eprintln!("finished in {:.1}s", started.elapsed().as_secs_f64());

    println!(
        "{:>8} {:>10} {:>8} {:>8} {:>8} {:>8} {:>9} {:>7} {:>8}",
        "distance", "protocol", "R", "req", "ack", "deliv", "D", "H", "ASE"
    );
    for row in &sweep.rows {
        let m = &row.metrics;
        println!(
            "{:>8.3} {:>10} {:>8.4} {:>8.4} {:>8} {:>8} {:>9} {:>7} {:>8.4}",
            row.distance,
            row.label,
            m.reliability.mean,
            m.request_reliability.mean,
            fmt_opt(m.ack_reliability.map(|e| e.mean)),
            fmt_opt(m.delivery_reliability.map(|e| e.mean)),
            fmt_opt(m.cond_delay.map(|e| e.mean)),
            fmt_opt(m.cond_hops.map(|e| e.mean)),
            m.ase.mean
        );
    }
    Ok(())
}
