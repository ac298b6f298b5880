use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use frontburn_core::experiment::{run_experiment_with, worker_count, Assign, ExperimentConfig, RunOutput};
use frontburn_core::inequality::{fineq_selftest, FINEQ_CONSTANT, TOL_Q};
use frontburn_core::report::{self, emit_reports, fittable_slopes, fmt_num, read_sweep_file};

const DEFAULT_OUTPUT: &str = "frontburn-out";

#[derive(Parser)]
#[command(
    name = "frontburn",
    version,
    about = "Front propagation in coupled KPP layers with drift"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the sweep in a config file and write CSV reports.
    Run {
        config: PathBuf,
        #[command(flatten)]
        over: Overrides,
    },
    /// Run the sweep and check every bound; exits 1 if any check fails.
    CheckBounds {
        config: PathBuf,
        #[command(flatten)]
        over: Overrides,
    },
    /// Check the sharp functional inequality on the extremal profile and on
    /// random admissible profiles.
    FineqSelftest {
        #[arg(long, default_value_t = 1e-3)]
        dx: f64,
        #[arg(long, default_value_t = 1000)]
        seeds: u64,
        /// First seed of the random profiles.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Fit v_avg against A per coupling value in a sweep CSV.
    Fit {
        sweep: PathBuf,
        /// Write the fits here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Command-line versions of the config keys; each replaces the file value.
#[derive(Args, Default)]
struct Overrides {
    #[arg(long)]
    n_layers: Option<String>,
    #[arg(long)]
    drift_pattern: Option<String>,
    #[arg(long)]
    widths: Option<String>,
    #[arg(long = "sweep-A", alias = "sweep-a")]
    sweep_a: Option<String>,
    #[arg(long)]
    sweep_kappa: Option<String>,
    #[arg(long)]
    dx: Option<String>,
    #[arg(long)]
    dt: Option<String>,
    #[arg(long)]
    window: Option<String>,
    #[arg(long)]
    recenter_target: Option<String>,
    #[arg(long)]
    t_transient: Option<String>,
    #[arg(long)]
    t_end: Option<String>,
    #[arg(long)]
    tau: Option<String>,
    #[arg(long)]
    lambda: Option<String>,
    #[arg(long)]
    sample_every: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    c_two: Option<String>,
    #[arg(long)]
    c_multi: Option<String>,
    #[arg(long)]
    output_dir: Option<String>,
    #[arg(long)]
    write_traces: Option<String>,
    #[arg(long)]
    wall_time: Option<String>,
    /// Any config key, as `key=value`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Worker count; defaults to FRONTBURN_THREADS or the available cores.
    #[arg(long)]
    threads: Option<usize>,
}

impl Overrides {
    fn apply(&self, cfg: &mut ExperimentConfig) -> Result<()> {
        let named = [
            ("n_layers", &self.n_layers),
            ("drift_pattern", &self.drift_pattern),
            ("widths", &self.widths),
            ("sweep_A", &self.sweep_a),
            ("sweep_kappa", &self.sweep_kappa),
            ("dx", &self.dx),
            ("dt", &self.dt),
            ("window", &self.window),
            ("recenter_target", &self.recenter_target),
            ("t_transient", &self.t_transient),
            ("t_end", &self.t_end),
            ("tau", &self.tau),
            ("lambda", &self.lambda),
            ("sample_every", &self.sample_every),
            ("seed", &self.seed),
            ("c_two", &self.c_two),
            ("c_multi", &self.c_multi),
            ("output_dir", &self.output_dir),
            ("write_traces", &self.write_traces),
            ("wall_time", &self.wall_time),
        ];
        for (key, value) in named {
            if let Some(v) = value {
                cfg.set(key, v.trim(), Assign::Replace)
                    .map_err(anyhow::Error::msg)
                    .with_context(|| format!("--{}", key.replace('_', "-")))?;
            }
        }
        for kv in &self.set {
            let (k, v) = kv
                .split_once('=')
                .with_context(|| format!("--set expects key=value, got {kv:?}"))?;
            cfg.set(k.trim(), v.trim(), Assign::Replace)
                .map_err(anyhow::Error::msg)
                .context("--set")?;
        }
        Ok(())
    }
}

fn load(config: &Path, over: &Overrides) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::from_file(config)?;
    over.apply(&mut cfg)?;
    cfg.validate()?;
    Ok(cfg)
}

fn sweep(cfg: &ExperimentConfig, threads: Option<usize>) -> Result<Vec<RunOutput>> {
    let threads = threads.unwrap_or_else(worker_count);
    let points = cfg.points().len();
    eprintln!("running {points} sweep point(s) on {threads} worker(s)");
    let started = Instant::now();
    let runs = run_experiment_with(cfg, threads)?;
    eprintln!("finished in {:.1} s", started.elapsed().as_secs_f64());
    Ok(runs)
}

fn print_rows(runs: &[RunOutput]) {
    println!(
        "{:>8} {:>6} {:>14} {:>10} {:>12} {:>12} {:>9} {:>10}",
        "A", "kappa", "v_avg", "v_std", "two_layer", "multi_layer", "genbound", "max_clamp"
    );
    for r in runs {
        let row = &r.row;
        println!(
            "{:>8} {:>6} {:>14.8} {:>10.3e} {:>12.5e} {:>12.5e} {:>9} {:>10.2e}",
            fmt_num(row.a),
            fmt_num(row.kappa),
            row.v_avg,
            row.v_std,
            row.bound_two_layer,
            row.bound_multi_layer,
            if row.genbound_pass { "pass" } else { "FAIL" },
            r.stats.max_clamp
        );
    }
}

fn cmd_run(config: &Path, over: &Overrides) -> Result<bool> {
    let mut cfg = load(config, over)?;
    let dir = cfg
        .output_dir
        .get_or_insert_with(|| PathBuf::from(DEFAULT_OUTPUT))
        .clone();
    let runs = sweep(&cfg, over.threads)?;
    print_rows(&runs);
    let rows: Vec<_> = runs.iter().map(|r| r.row).collect();
    let fits = fittable_slopes(&rows);
    if !fits.is_empty() {
        println!();
        println!("{:>6} {:>12} {:>12} {:>10}", "kappa", "slope", "intercept", "r2");
        for (k, f) in &fits {
            println!(
                "{:>6} {:>12.6} {:>12.6} {:>10.6}",
                fmt_num(*k),
                f.slope,
                f.intercept,
                f.r2
            );
        }
    }
    let paths = emit_reports(&dir, &runs, cfg.write_traces)?;
    eprintln!(
        "wrote {}, {}, {} and {} trace(s)",
        paths.sweep.display(),
        paths.slopes.display(),
        paths.bounds.display(),
        paths.traces.len()
    );
    Ok(true)
}

fn cmd_check_bounds(config: &Path, over: &Overrides) -> Result<bool> {
    let cfg = load(config, over)?;
    let runs = sweep(&cfg, over.threads)?;
    let (mut total, mut passed) = (0usize, 0usize);
    for r in &runs {
        for b in &r.bounds {
            total += 1;
            passed += b.pass as usize;
            println!("A={:<6} kappa={:<5} {b}", fmt_num(r.row.a), fmt_num(r.row.kappa));
        }
    }
    println!("{passed} of {total} bound checks passed");
    if let Some(dir) = &cfg.output_dir {
        emit_reports(dir, &runs, cfg.write_traces)?;
    }
    Ok(passed == total)
}

fn cmd_fineq_selftest(dx: f64, seeds: u64, seed: u64) -> Result<bool> {
    if !(dx > 0.0 && dx < std::f64::consts::FRAC_PI_4) {
        bail!("--dx must lie in (0, pi/4), got {dx}");
    }
    let started = Instant::now();
    let r = fineq_selftest(dx, seeds, seed)?;
    let secs = started.elapsed().as_secs_f64();
    let verdict = |ok: bool| if ok { "PASS" } else { "FAIL" };
    println!("constant (pi/8)^2   = {FINEQ_CONSTANT:.12}");
    println!(
        "extremal profile    dirichlet = {:.9} reaction = {:.9} product = {:.12} error = {:.2e} {}",
        r.extremal.dirichlet,
        r.extremal.reaction,
        r.extremal.product,
        r.extremal_error,
        verdict(r.extremal_pass())
    );
    if seeds > 0 {
        println!(
            "random profiles     {seeds} seeds from {seed}, worst ratio {:.6} (seed {}), floor {:.6} {}",
            r.worst_ratio,
            r.worst_seed,
            1.0 - TOL_Q,
            verdict(r.random_pass())
        );
    }
    println!("elapsed             {secs:.2} s");
    Ok(r.pass())
}

fn cmd_fit(sweep: &Path, out: Option<&Path>) -> Result<bool> {
    let rows = read_sweep_file(sweep)?;
    let fits = fittable_slopes(&rows);
    if fits.is_empty() {
        bail!(
            "no coupling value in {} has three distinct A values",
            sweep.display()
        );
    }
    match out {
        Some(p) => {
            let f = std::fs::File::create(p).with_context(|| format!("creating {}", p.display()))?;
            report::write_slopes(f, &fits)?;
        }
        None => report::write_slopes(std::io::stdout().lock(), &fits)?,
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.cmd {
        Command::Run { config, over } => cmd_run(config, over),
        Command::CheckBounds { config, over } => cmd_check_bounds(config, over),
        Command::FineqSelftest { dx, seeds, seed } => cmd_fineq_selftest(*dx, *seeds, *seed),
        Command::Fit { sweep, out } => cmd_fit(sweep, out.as_deref()),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
