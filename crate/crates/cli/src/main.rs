use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use doco_core::experiment::{
    load_preset, preset_description, run_experiment, write_outputs, ExperimentConfig, ExperimentResult, PRESETS,
};

const OUT_DIR_ENV: &str = "DOCO_OUT_DIR";

/// Delayed, correlated online convex optimization experiments.
#[derive(Parser)]
#[command(name = "doco", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write its CSVs and manifest.
    Run(RunArgs),
    /// Check a config without running it and print resolved parameters.
    Validate {
        /// Config file or preset name.
        config: String,
    },
    /// List the shipped presets.
    ListPresets,
    /// Write a gnuplot script plotting an experiment's curves.
    Gnuplot {
        /// Config file or preset name.
        config: String,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Config file or preset name.
    config: String,
    /// Base seed for trial seed derivation.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    /// Output directory; defaults to the config's, then $DOCO_OUT_DIR/<name>.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Worker threads for trials (all cores by default).
    #[arg(long)]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(args) => run(args),
        Command::Validate { config } => validate(&config),
        Command::ListPresets => {
            for (name, _) in PRESETS {
                println!("{name:<12} {}", preset_description(name).unwrap_or(""));
            }
            Ok(())
        }
        Command::Gnuplot { config, out_dir } => {
            let cfg = load(&config)?;
            let dir = output_dir(&cfg, out_dir);
            let path = write_gnuplot(&cfg, &dir)?;
            println!("{}", path.display());
            Ok(())
        }
    }
}

/// A path if one exists there, otherwise a preset name.
fn load(config: &str) -> Result<ExperimentConfig> {
    let path = Path::new(config);
    if path.exists() {
        return ExperimentConfig::from_file(path).with_context(|| format!("loading {config}"));
    }
    load_preset(config).with_context(|| format!("'{config}' is neither a file nor a preset"))
}

fn output_dir(cfg: &ExperimentConfig, flag: Option<PathBuf>) -> PathBuf {
    if let Some(dir) = flag.or_else(|| cfg.output_dir.clone()) {
        return dir;
    }
    let root = std::env::var_os(OUT_DIR_ENV).map_or_else(|| PathBuf::from("doco-out"), PathBuf::from);
    root.join(&cfg.name)
}

fn validate(config: &str) -> Result<()> {
    let cfg = load(config)?;
    let plan = cfg.plan()?;
    println!("OK {} ({:?}, {} trials, seed {})", cfg.name, cfg.kind, cfg.trials, cfg.seed);
    for p in &plan.points {
        println!(
            "  {}: horizon {}, learner {}, delays {:?}, {} checkpoints",
            p.label,
            p.game.horizon,
            p.game.learner.name(),
            p.game.delays,
            p.checkpoints.len()
        );
        for (k, v) in &p.resolved {
            println!("    {k} = {v}");
        }
    }
    Ok(())
}

fn run(args: RunArgs) -> Result<()> {
    let mut cfg = load(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(trials) = args.trials {
        cfg.trials = trials;
    }
    if args.threads == Some(0) {
        bail!("--threads must be >= 1");
    }
    let dir = output_dir(&cfg, args.out_dir);
    let result = run_experiment(&cfg, args.threads)?;
    let written = write_outputs(&cfg, &result, &dir)?;
    report(&result);
    println!("wrote {} files to {}", written.len(), dir.display());
    Ok(())
}

fn report(result: &ExperimentResult) {
    println!("{} ({:?}, {} trials)", result.name, result.kind, result.trials);
    for p in &result.points {
        let f = &p.final_point;
        let fit = p
            .fit
            .map_or(String::new(), |s| format!(", exponent {:.3} ± {:.3}", s.exponent, s.half_width));
        println!(
            "  {:<10} T={:<5} loss {:.3} ± {:.3}, regret {:.3} ± {:.3}{fit}",
            p.label, p.horizon, f.cum_loss_mean, f.cum_loss_stderr, f.regret_mean, f.regret_stderr
        );
    }
    let s = &result.summary;
    if let Some(fit) = s.horizon_fit {
        println!("  regret vs horizon exponent {:.3} ± {:.3}", fit.exponent, fit.half_width);
    }
    if let Some(r) = s.naive_over_learner {
        println!("  naive / learner cumulative loss {r:.4}");
    }
    if s.score_chain_violations > 0 || s.unconverged_comparators > 0 {
        println!(
            "  warnings: {} score-chain violations, {} unconverged comparators",
            s.score_chain_violations, s.unconverged_comparators
        );
    }
}

fn write_gnuplot(cfg: &ExperimentConfig, dir: &Path) -> Result<PathBuf> {
    let plan = cfg.plan()?;
    let mut script = String::from(
        "set datafile separator ','\nset key left top\nset xlabel 't'\nset ylabel 'cumulative loss'\n",
    );
    script.push_str(&format!("set terminal pngcairo size 800,500\nset output '{}.png'\n", cfg.name));
    let curves: Vec<String> = plan
        .points
        .iter()
        .map(|p| format!("'{}.csv' using 1:2:3 with yerrorlines title '{}'", p.label, p.label))
        .collect();
    script.push_str(&format!("plot {}\n", curves.join(", \\\n     ")));
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join("plot.gp");
    std::fs::write(&path, script).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}
