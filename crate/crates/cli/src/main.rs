//! `mzisim`: sweeps, staged runs, fits and replay from the command line.

mod plot;

use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use mzisim_core::experiment::{
    analyze_stages, fit_report, read_records, read_sweep_csv, replay_rows, run_stages, run_sweep,
    stage_kinds, stage_report, write_sweep_csv, EventSink, ExperimentConfig, RecordWriter,
    StagePlan, SweepRow,
};
use mzisim_core::theory::{
    corpuscular_grouped, qt_fixed, qt_grouped, qt_ungrouped, CorpuscularParams,
};
use mzisim_core::Setting;

#[derive(Parser)]
#[command(
    name = "mzisim",
    version,
    about = "Event-by-event Mach-Zehnder simulator with a switched arm"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write closed-form prediction curves over the grid as CSV.
    Theory(Settings),
    /// Run one schedule over the phase grid.
    Sweep(Settings),
    /// Run the three-stage protocol.
    Stages(Settings),
    /// Fit a sweep or staged CSV file.
    Fit {
        csv: PathBuf,
        #[command(flatten)]
        settings: Settings,
    },
    /// Analyze an event-record file.
    Replay {
        records: PathBuf,
        /// Phase for events outside any annotated segment.
        #[arg(long, value_parser = parse_angle_arg, allow_hyphen_values = true)]
        phi0: Option<f64>,
        #[command(flatten)]
        settings: Settings,
    },
}

/// Flags mirror the config keys and override values from `--config`.
#[derive(Args, Default)]
struct Settings {
    /// Flat `key = value` config file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    grid_start: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    grid_stop: Option<String>,
    #[arg(long)]
    grid_points: Option<String>,
    /// Phase step `φ₁(−1) − φ₁(+1)`, e.g. `-pi/2`.
    #[arg(long, allow_hyphen_values = true)]
    delta: Option<String>,
    #[arg(long)]
    alpha: Option<String>,
    /// Photons per grid point (per stage).
    #[arg(long)]
    photons: Option<String>,
    /// `fixed:+1`, `fixed:-1`, `systematic:K` or `random:K`.
    #[arg(long)]
    schedule: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// `default` or `random:SEED`.
    #[arg(long)]
    init: Option<String>,
    /// Three comma-separated schedules.
    #[arg(long)]
    stages: Option<String>,
    /// Execution order, a permutation of `0,1,2`.
    #[arg(long)]
    stage_order: Option<String>,
    #[arg(long)]
    expected_e: Option<String>,
    #[arg(long)]
    verdict_visibility_tol: Option<String>,
    #[arg(long)]
    verdict_shift_tol: Option<String>,
    #[arg(long)]
    verdict_rate_tol: Option<String>,
    /// CSV destination; stdout when absent.
    #[arg(long, short)]
    output: Option<String>,
    /// Event-record destination.
    #[arg(long)]
    events: Option<String>,
    /// Plot destination.
    #[arg(long)]
    svg: Option<String>,
}

impl Settings {
    fn resolve(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .with_context(|| format!("reading {}", path.display()))?;
                ExperimentConfig::from_kv(&text)
                    .with_context(|| format!("in {}", path.display()))?
            }
            None => ExperimentConfig::default(),
        };
        let flags = [
            ("grid_start", &self.grid_start),
            ("grid_stop", &self.grid_stop),
            ("grid_points", &self.grid_points),
            ("delta", &self.delta),
            ("alpha", &self.alpha),
            ("photons", &self.photons),
            ("schedule", &self.schedule),
            ("seed", &self.seed),
            ("init", &self.init),
            ("stages", &self.stages),
            ("stage_order", &self.stage_order),
            ("expected_e", &self.expected_e),
            ("verdict_visibility_tol", &self.verdict_visibility_tol),
            ("verdict_shift_tol", &self.verdict_shift_tol),
            ("verdict_rate_tol", &self.verdict_rate_tol),
            ("output", &self.output),
            ("events", &self.events),
            ("svg", &self.svg),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                cfg.set(key, v).map_err(anyhow::Error::msg)?;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn parse_angle_arg(s: &str) -> Result<f64, String> {
    mzisim_core::experiment::parse_angle(s)
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Theory(settings) => theory(&settings.resolve()?),
        Command::Sweep(settings) => sweep(&settings.resolve()?),
        Command::Stages(settings) => stages(&settings.resolve()?),
        Command::Fit { csv, settings } => fit(&csv, &settings.resolve()?),
        Command::Replay {
            records,
            phi0,
            settings,
        } => replay(&records, phi0, &settings.resolve()?),
    }
}

/// Writes `body` to the CSV destination. Returns whether it went to stdout.
fn emit_csv(
    cfg: &ExperimentConfig,
    body: impl FnOnce(&mut dyn Write) -> io::Result<()>,
) -> Result<bool> {
    match &cfg.outputs.csv {
        Some(path) => {
            let mut out = BufWriter::new(
                File::create(path).with_context(|| format!("creating {}", path.display()))?,
            );
            body(&mut out)?;
            out.flush()?;
            Ok(false)
        }
        None => {
            let stdout = io::stdout();
            let mut out = stdout.lock();
            body(&mut out)?;
            out.flush()?;
            Ok(true)
        }
    }
}

/// Reports go to stdout unless the CSV already does.
fn emit_report(report: &str, csv_on_stdout: bool) -> Result<()> {
    if csv_on_stdout {
        eprint!("{report}");
    } else {
        print!("{report}");
    }
    Ok(())
}

fn write_outputs(cfg: &ExperimentConfig, rows: &[SweepRow]) -> Result<bool> {
    if let Some(path) = &cfg.outputs.svg {
        fs::write(path, plot::render(rows))
            .with_context(|| format!("writing {}", path.display()))?;
    }
    emit_csv(cfg, |out| write_sweep_csv(out, rows))
}

fn with_events<T>(
    cfg: &ExperimentConfig,
    run: impl FnOnce(Option<&mut dyn EventSink>) -> Result<T>,
) -> Result<T> {
    match &cfg.outputs.events {
        Some(path) => {
            let file =
                File::create(path).with_context(|| format!("creating {}", path.display()))?;
            let mut writer = RecordWriter::new(BufWriter::new(file))?;
            let result = run(Some(&mut writer))?;
            writer.into_inner().flush()?;
            Ok(result)
        }
        None => run(None),
    }
}

fn theory(cfg: &ExperimentConfig) -> Result<()> {
    let phases = cfg.phases();
    let e = cfg.reference_e(cfg.schedule).unwrap_or(0.0);
    let params = CorpuscularParams::new(e, cfg.delta)?;
    emit_csv(cfg, |out| {
        writeln!(out, "# mzi-theory v1 e={e} delta={}", cfg.delta)?;
        writeln!(
            out,
            "phi0,qt_fixed_plus,qt_fixed_minus,qt_grouped_plus,qt_grouped_minus,qt_ungrouped,corpuscular_plus,corpuscular_minus"
        )?;
        for phi0 in cfg.grid.phases() {
            writeln!(
                out,
                "{phi0},{},{},{},{},{},{},{}",
                qt_fixed(phi0, Setting::Plus, &phases),
                qt_fixed(phi0, Setting::Minus, &phases),
                qt_grouped(phi0, Setting::Plus, &phases),
                qt_grouped(phi0, Setting::Minus, &phases),
                qt_ungrouped(phi0, &phases),
                corpuscular_grouped(phi0, Setting::Plus, &params),
                corpuscular_grouped(phi0, Setting::Minus, &params),
            )?;
        }
        Ok(())
    })?;
    Ok(())
}

fn sweep(cfg: &ExperimentConfig) -> Result<()> {
    let rows = with_events(cfg, |sink| Ok(run_sweep(cfg, sink)?))?;
    let on_stdout = write_outputs(cfg, &rows)?;
    emit_report(&fit_report(&rows, cfg.delta), on_stdout)
}

fn stages(cfg: &ExperimentConfig) -> Result<()> {
    let mut cfg = cfg.clone();
    cfg.stages.get_or_insert_with(StagePlan::default);
    let run = with_events(&cfg, |sink| Ok(run_stages(&cfg, sink)?))?;
    let on_stdout = write_outputs(&cfg, &run.rows)?;
    emit_report(&stage_report(&run.fits, &run.report), on_stdout)
}

/// Fit report for plain sweeps, stage comparison for staged rows.
fn analyze(rows: &[SweepRow], cfg: &ExperimentConfig) -> Result<String> {
    if rows.is_empty() {
        bail!("no data rows");
    }
    if rows.iter().any(|r| r.stage.is_some()) {
        let kinds = stage_kinds(rows, cfg.stages.map(|p| p.stages))?;
        let (fits, report) = analyze_stages(rows, kinds, cfg)?;
        Ok(stage_report(&fits, &report))
    } else {
        Ok(fit_report(rows, cfg.delta))
    }
}

fn fit(path: &Path, cfg: &ExperimentConfig) -> Result<()> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let rows =
        read_sweep_csv(BufReader::new(file)).with_context(|| format!("in {}", path.display()))?;
    print!("{}", analyze(&rows, cfg)?);
    Ok(())
}

fn replay(path: &Path, phi0: Option<f64>, cfg: &ExperimentConfig) -> Result<()> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let segments = read_records(BufReader::new(file), phi0)
        .with_context(|| format!("in {}", path.display()))?;
    let skipped: u64 = segments.iter().map(|s| s.skipped).sum();
    if skipped > 0 {
        eprintln!("skipped {skipped} records without detection or herald");
    }
    let rows = replay_rows(&segments)?;
    let report = analyze(&rows, cfg)?;
    let on_stdout = if cfg.outputs.csv.is_some() || cfg.outputs.svg.is_some() {
        write_outputs(cfg, &rows)?
    } else {
        false
    };
    emit_report(&report, on_stdout)
}
