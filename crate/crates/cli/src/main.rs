use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, ValueEnum};

use mfc_lfc::config::{defaults_document, parse_config};
use mfc_lfc::metrics::MeanMetrics;
use mfc_lfc::report::{emit_per_run, emit_summary, emit_timeseries, SummaryRow};
use mfc_lfc::{run_monte_carlo, run_scenario, ControllerKind, Scenario};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ControllerArg {
    Mfc,
    Integrator,
    /// Run the integrator and MFC back to back.
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Emit {
    Timeseries,
    Summary,
    PerRun,
}

/// Run a load-frequency-control attack scenario.
#[derive(Debug, Parser)]
#[command(name = "simulate", version)]
struct Args {
    /// JSON scenario file.
    #[arg(long, required_unless_present = "print_defaults")]
    scenario: Option<PathBuf>,

    /// Override the scenario's controller.
    #[arg(long, value_enum)]
    controller: Option<ControllerArg>,

    /// Monte Carlo batch size (defaults to the scenario's `runs`).
    #[arg(long)]
    runs: Option<usize>,

    /// Base seed; run k uses seed + k.
    #[arg(long)]
    seed: Option<u64>,

    /// Simulated horizon in seconds.
    #[arg(long)]
    horizon: Option<f64>,

    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,

    /// Comma-separated outputs to write.
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [Emit::Timeseries, Emit::Summary])]
    emit: Vec<Emit>,

    /// Print the resolved default scenario and the shipped presets, then exit.
    #[arg(long)]
    print_defaults: bool,
}

fn load(args: &Args) -> Result<Scenario> {
    let path = args.scenario.as_deref().expect("clap enforces --scenario");
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut s = parse_config(&text).with_context(|| format!("in {}", path.display()))?;
    if let Some(seed) = args.seed {
        s.base_seed = seed;
    }
    if let Some(h) = args.horizon {
        s.horizon = h;
    }
    if let Some(n) = args.runs {
        s.runs = n;
    }
    s.validate().context("after applying command-line overrides")?;
    Ok(s)
}

fn controllers(args: &Args, s: &Scenario) -> Vec<ControllerKind> {
    match args.controller {
        None => vec![s.controller],
        Some(ControllerArg::Mfc) => vec![ControllerKind::Mfc],
        Some(ControllerArg::Integrator) => vec![ControllerKind::Integrator],
        Some(ControllerArg::Both) => vec![ControllerKind::Integrator, ControllerKind::Mfc],
    }
}

fn run_one(s: &Scenario, emit: &[Emit], out: &Path) -> Result<SummaryRow> {
    let tag = s.controller.as_str();
    let mean = if s.runs == 1 {
        let (report, ts) = run_scenario(s)?;
        if emit.contains(&Emit::Timeseries) {
            emit_timeseries(&ts, &out.join(format!("timeseries_{tag}.csv")))?;
        }
        if emit.contains(&Emit::PerRun) {
            emit_per_run(&[report], &out.join(format!("per_run_{tag}.csv")))?;
        }
        MeanMetrics::from(&report)
    } else {
        let mc = run_monte_carlo(s, s.runs)?;
        if emit.contains(&Emit::Timeseries) {
            // Representative realization: the first seed of the batch.
            let (_, ts) = run_scenario(s)?;
            emit_timeseries(&ts, &out.join(format!("timeseries_{tag}.csv")))?;
        }
        if emit.contains(&Emit::PerRun) {
            emit_per_run(&mc.runs, &out.join(format!("per_run_{tag}.csv")))?;
        }
        mc.mean
    };
    Ok(SummaryRow::new(s.controller, s.name.clone(), &mean))
}

fn main() -> Result<()> {
    let args = Args::parse();
    if args.print_defaults {
        println!("{}", defaults_document());
        return Ok(());
    }
    let base = load(&args)?;
    if args.emit.is_empty() {
        bail!("--emit needs at least one of timeseries, summary, per-run");
    }
    std::fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;

    let mut rows = Vec::new();
    for kind in controllers(&args, &base) {
        let s = base.clone().with_controller(kind);
        rows.push(run_one(&s, &args.emit, &args.out)?);
    }
    let table = if args.emit.contains(&Emit::Summary) {
        emit_summary(&rows, base.dt, &args.out)?
    } else {
        mfc_lfc::report::render_table(&rows)
    };
    print!("{table}");
    Ok(())
}
