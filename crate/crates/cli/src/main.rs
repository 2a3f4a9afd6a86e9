use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use sicascade::bounds::write_bound_reports;
use sicascade::estimator::replay_estimation;
use sicascade::experiment::{
    estimator_config, metadata, run_experiment, summarize, trial_artifacts, verify_bounds, ExperimentConfig, Summary,
};
use sicascade::io::{
    format_rounds, format_trajectory, parse_results_csv, parse_rounds, read_edge_list, write_edge_list,
    write_results_csv,
};

#[derive(Parser)]
#[command(name = "sicascade", version, about = "Cascade source estimation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a batch experiment and write one CSV row per trial.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Override the master seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        trials: Option<u64>,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Monte-Carlo check of the bounds in the config's [bounds] section.
    VerifyBounds {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Summary statistics of a results CSV.
    Summarize {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Dump one trial's graph, trajectory and observation rounds.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 0)]
        trial: u64,
        #[arg(long)]
        graph: Option<PathBuf>,
        #[arg(long)]
        trajectory: Option<PathBuf>,
        #[arg(long)]
        rounds: Option<PathBuf>,
    },
    /// Replay a round dump through the estimator.
    Estimate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        rounds: PathBuf,
    },
}

fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut config = ExperimentConfig::from_toml_str(&text).with_context(|| format!("in {}", path.display()))?;
    config.resolve_paths(path.parent().unwrap_or(Path::new(".")));
    Ok(config)
}

fn sidecar(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".meta.toml");
    PathBuf::from(name)
}

fn print_summary(s: &Summary) -> io::Result<()> {
    let mut o = io::stdout().lock();
    writeln!(o, "trials                 {}", s.trials)?;
    writeln!(o, "mean_stop_time         {:.4}", s.mean_stop_time)?;
    writeln!(o, "median_infected        {}", s.median_infected_at_stop)?;
    writeln!(o, "mean_dist_error        {:.4}", s.mean_dist_error)?;
    writeln!(o, "fallback_count         {}", s.fallback_count)?;
    writeln!(o, "contaminated_count     {}", s.contaminated_count)?;
    writeln!(o, "containment_count      {}", s.containment_count)
}

fn write_file(path: &Path, f: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<()> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    fs::write(path, buf).with_context(|| format!("writing {}", path.display()))
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Run { config, out, seed, trials, threads } => {
            let mut config = load_config(&config)?;
            if let Some(s) = seed {
                config.seed = s;
            }
            if let Some(t) = trials {
                config.trials = t;
            }
            if threads.is_some() {
                config.threads = threads;
            }
            let result = run_experiment(&config)?;
            write_file(&out, |b| Ok(write_results_csv(b, &result.rows)?))?;
            let meta = toml::to_string(&result.metadata).context("serializing metadata")?;
            fs::write(sidecar(&out), meta)?;
            print_summary(&result.summary)?;
        }
        Command::VerifyBounds { config, out, threads } => {
            let mut config = load_config(&config)?;
            if threads.is_some() {
                config.threads = threads;
            }
            let reports = verify_bounds(&config)?;
            write_file(&out, |b| Ok(write_bound_reports(b, &reports)?))?;
            let meta = toml::to_string(&metadata(&config)).context("serializing metadata")?;
            fs::write(sidecar(&out), meta)?;
            let failed = reports.iter().filter(|r| r.assertable && !r.pass).count();
            println!("{} reports, {} assertable, {failed} failed", reports.len(), reports.iter().filter(|r| r.assertable).count());
            if failed > 0 {
                bail!("{failed} assertable bound checks failed");
            }
        }
        Command::Summarize { input } => {
            let text = fs::read_to_string(&input).with_context(|| format!("reading {}", input.display()))?;
            let rows = parse_results_csv(&text)?;
            print_summary(&summarize(&rows)?)?;
        }
        Command::Simulate { config, trial, graph, trajectory, rounds } => {
            let config = load_config(&config)?;
            if trial >= config.trials {
                bail!("trial {trial} out of range for {} trials", config.trials);
            }
            let a = trial_artifacts(&config, trial)?;
            if let Some(p) = graph {
                write_file(&p, |b| Ok(write_edge_list(b, &a.graph)?))?;
            }
            if let Some(p) = trajectory {
                fs::write(&p, format_trajectory(&a.trajectory))?;
            }
            if let Some(p) = rounds {
                fs::write(&p, format_rounds(&a.run.rounds))?;
            }
            let r = &a.run.result;
            println!(
                "source {} estimate {} stop_time {} fallback {} dist_error {}",
                a.run.source, r.estimate, r.stop_time, r.fallback, a.run.dist_error
            );
        }
        Command::Estimate { config, graph, rounds } => {
            let config = load_config(&config)?;
            let g = read_edge_list(&fs::read_to_string(&graph).with_context(|| format!("reading {}", graph.display()))?)?;
            let rounds = parse_rounds(&fs::read_to_string(&rounds).with_context(|| format!("reading {}", rounds.display()))?)?;
            let est = estimator_config(&config, &g)?;
            let r = replay_estimation(&g, &est, rounds)?;
            println!(
                "estimate {} stop_time {} fallback {} spread_radius {} spread_size {}",
                r.estimate,
                r.stop_time,
                r.fallback,
                r.spread.radius,
                r.spread.vertices.len()
            );
        }
    }
    Ok(())
}
