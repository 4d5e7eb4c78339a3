use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use efk_harness::config::KNOWN_KEYS;
use efk_harness::output::{list_snapshots, read_field, read_series, SERIES_FILE};
use efk_harness::{emit_plots, refinement_study, run, HarnessError, RecordSet, Result, RunConfig, Settings, StudyConfig};

/// Solver and study driver for the 2D periodic extended Fisher-Kolmogorov equation.
#[derive(Parser)]
#[command(name = "efk", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation and write series.csv, final.csv and snapshots.
    Run(Common),
    /// Run a refinement study and write study.csv.
    Study(Common),
    /// Render plots from the CSV files of earlier runs.
    Plot {
        #[command(flatten)]
        common: Common,
        /// Extra run directories to overlay, as label=dir.
        #[arg(long = "with", value_name = "LABEL=DIR")]
        with: Vec<String>,
    },
}

#[derive(Args)]
struct Common {
    /// Key-value configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a configuration key; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Output directory (overrides output.dir).
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    quiet: bool,
}

impl Common {
    fn settings(&self) -> Result<Settings> {
        let mut s = match &self.config {
            Some(p) => Settings::load(p)?,
            None => Settings::default(),
        };
        for a in &self.set {
            s.apply_override(a)?;
        }
        if let Some(dir) = &self.output {
            s.set("output.dir", &dir.to_string_lossy())?;
        }
        Ok(s)
    }

    fn output_dir(&self, cfg: &RunConfig) -> PathBuf {
        cfg.output_dir.clone().unwrap_or_else(|| PathBuf::from("out"))
    }
}

/// Rewrites `--grid.n_x 64` and `--grid.n_x=64` into `--set grid.n_x=64`.
fn expand_dotted_flags(args: impl Iterator<Item = String>) -> Vec<String> {
    let mut out = Vec::new();
    let mut it = args.peekable();
    while let Some(a) = it.next() {
        let Some(flag) = a.strip_prefix("--") else {
            out.push(a);
            continue;
        };
        let (key, inline) = match flag.split_once('=') {
            Some((k, v)) => (k, Some(v.to_string())),
            None => (flag, None),
        };
        if !KNOWN_KEYS.contains(&key) {
            out.push(a);
            continue;
        }
        let value = inline.or_else(|| it.next()).unwrap_or_default();
        out.push("--set".into());
        out.push(format!("{key}={value}"));
    }
    out
}

fn cmd_run(c: &Common) -> Result<()> {
    let mut cfg = RunConfig::from_settings(&c.settings()?)?;
    let dir = c.output_dir(&cfg);
    cfg.output_dir = Some(dir.clone());
    let out = run(&cfg)?;
    if !c.quiet {
        let last = out.records.last().expect("a run records at least t = 0");
        println!(
            "{} {} on {}x{}, {} steps: t = {}, max norm {:.6}, energy {:.6}, rank {}",
            cfg.method.name(),
            cfg.problem.kind.name(),
            cfg.n_x,
            cfg.n_y,
            cfg.steps,
            last.time,
            last.max_norm,
            last.energy,
            last.rank
        );
        println!("wrote {}", dir.display());
    }
    Ok(())
}

fn cmd_study(c: &Common) -> Result<()> {
    let s = c.settings()?;
    let base = RunConfig::from_settings(&s)?;
    let study = StudyConfig::from_settings(&s, base.method)?;
    let table = refinement_study(&study, &base)?;
    let path = c.output_dir(&base).join("study.csv");
    table.write(&path)?;
    if !c.quiet {
        println!("{}", table.header().join("\t"));
        for row in table.rows() {
            let mut line = format!("{}\t{}\t{}", row.level, row.steps, row.nodes);
            for (e, o) in row.cells {
                line.push_str(&format!("\t{e:.4e}\t{}", o.map(|o| format!("{o:.4}")).unwrap_or_default()));
            }
            println!("{line}");
        }
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn cmd_plot(c: &Common, with: &[String]) -> Result<()> {
    let cfg = RunConfig::from_settings(&c.settings()?)?;
    let dir = c.output_dir(&cfg);
    let mut dirs = vec![(cfg.method.name().to_string(), dir.clone())];
    for w in with {
        let (label, d) = w
            .split_once('=')
            .ok_or_else(|| HarnessError::config(format!("--with expects label=dir, got '{w}'")))?;
        dirs.push((label.to_string(), PathBuf::from(d)));
    }
    let series = dirs
        .iter()
        .map(|(_, d)| read_series(&d.join(SERIES_FILE)))
        .collect::<Result<Vec<_>>>()?;
    let sets: Vec<RecordSet> = dirs
        .iter()
        .zip(&series)
        .map(|((label, _), records)| RecordSet { label, records })
        .collect();
    let grid = cfg.problem.grid(cfg.n_x, cfg.n_y)?;
    let snapshots = list_snapshots(&dir)?
        .into_iter()
        .map(|(t, p)| Ok((t, read_field(&p, grid)?)))
        .collect::<Result<Vec<_>>>()?;
    let refs: Vec<(f64, &efk_core::Field)> = snapshots.iter().map(|(t, f)| (*t, f)).collect();
    let files = emit_plots(&sets, &refs, &dir)?;
    if !c.quiet {
        for f in files {
            println!("wrote {}", f.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse_from(expand_dotted_flags(std::env::args()));
    let result = match &cli.command {
        Command::Run(c) => cmd_run(c),
        Command::Study(c) => cmd_study(c),
        Command::Plot { common, with } => cmd_plot(common, with),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
