use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lzkz::harness::{
    default_grid, export, ingest_profile, read_record_json, run_sweep, window_rule,
    write_curves_csv, write_record_json, DeviceProfile, ExperimentRecord, ExportFormat, Mode,
    SweepConfig,
};
use lzkz::kzm::fit_ai;
use lzkz::lz::{anticrossing_state, chi_anticrossing, lz_probability, ode_oracle_at, QuenchParams};
use lzkz::readout::{mitigate, ShotResult};
use lzkz::{Error, Result};

#[derive(Parser)]
#[command(
    name = "lzkz",
    version,
    about = "Landau-Zener quench simulations and Kibble-Zurek fits"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact transition curve for one anneal time.
    Exact(Single),
    /// Trotterized circuit curve for one anneal time.
    Trotter(Single),
    /// Noisy curve for one anneal time (lindblad or shots).
    Noisy(Noisy),
    /// Full anneal-time sweep with plateau estimates and fit.
    Sweep(Sweep),
    /// Fit the freeze-out model to (t_a, p) data.
    Fit(FitArgs),
    /// Invert readout errors for one measured distribution.
    Mitigate(MitigateArgs),
    /// Compare the exact curves with the ODE integrator and emit a golden table.
    Oracle(OracleArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct Output {
    /// Directory for curves.csv and record.json; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args)]
struct Common {
    /// Layers per curve.
    #[arg(long, default_value_t = 50)]
    nt: usize,
    /// Accept anneal times beyond 2 with the long window.
    #[arg(long)]
    extend_window: bool,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct Single {
    #[arg(long)]
    ta: f64,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Noisy {
    #[arg(long)]
    ta: f64,
    #[arg(long)]
    profile: PathBuf,
    #[arg(long, default_value_t = 0)]
    qubit: usize,
    /// lindblad or shots.
    #[arg(long, default_value = "lindblad", value_parser = parse_mode)]
    mode: Mode,
    #[arg(long, default_value_t = 5000)]
    shots: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Clip mitigated values to [0, 1].
    #[arg(long)]
    clip: bool,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Sweep {
    /// Comma-separated anneal times; 40 log-spaced points in [0.05, 2] by default.
    #[arg(long, value_delimiter = ',')]
    ta_grid: Option<Vec<f64>>,
    /// analytic, trotter, lindblad or shots.
    #[arg(long, default_value = "analytic", value_parser = parse_mode)]
    mode: Mode,
    /// Device profile (JSON); needed by lindblad and shots.
    #[arg(long)]
    profile: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    qubit: usize,
    #[arg(long, default_value_t = 5000)]
    shots: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Clip mitigated values to [0, 1].
    #[arg(long)]
    clip: bool,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct FitArgs {
    /// A record.json, or a CSV with `t_a` and `p` columns.
    input: PathBuf,
}

#[derive(Args)]
struct MitigateArgs {
    #[arg(long)]
    profile: PathBuf,
    #[arg(long, default_value_t = 0)]
    qubit: usize,
    /// Measured frequency of |1⟩.
    #[arg(long, conflicts_with = "counts", required_unless_present = "counts")]
    p1: Option<f64>,
    /// Measured counts `n0,n1`.
    #[arg(long, value_delimiter = ',')]
    counts: Option<Vec<u64>>,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long, value_delimiter = ',', default_value = "0.1,0.5,1,2")]
    ta_grid: Vec<f64>,
    #[arg(long, default_value_t = 50)]
    nt: usize,
    /// Largest accepted |exact − ODE| before exiting with a numeric failure.
    #[arg(long, default_value_t = 1e-7)]
    tolerance: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_mode(s: &str) -> std::result::Result<Mode, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_validation() { 2 } else { 3 })
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Exact(s) => single(s, Mode::Analytic),
        Command::Trotter(s) => single(s, Mode::Trotter),
        Command::Noisy(n) => {
            if !n.mode.needs_profile() {
                return Err(Error::Precondition(format!(
                    "noisy takes lindblad or shots, not {}",
                    n.mode
                )));
            }
            let profile = ingest_profile(&n.profile)?;
            let config = SweepConfig {
                grid: vec![n.ta],
                steps: n.common.nt,
                shots: n.shots,
                mode: n.mode,
                seed: n.seed,
                extend_window: n.common.extend_window,
                qubit: n.qubit,
                clip_mitigated: n.clip,
            };
            emit(&run_sweep(&config, Some(&profile))?, &n.common.output)
        }
        Command::Sweep(s) => {
            let profile = s.profile.as_deref().map(ingest_profile).transpose()?;
            let config = SweepConfig {
                grid: s.ta_grid.unwrap_or_else(default_grid),
                steps: s.common.nt,
                shots: s.shots,
                mode: s.mode,
                seed: s.seed,
                extend_window: s.common.extend_window,
                qubit: s.qubit,
                clip_mitigated: s.clip,
            };
            emit(&run_sweep(&config, profile.as_ref())?, &s.common.output)
        }
        Command::Fit(f) => {
            let points = load_points(&f.input)?;
            let fit = fit_ai(&points)?;
            print_json(&serde_json::to_value(fit).map_err(|e| Error::Precondition(e.to_string()))?)
        }
        Command::Mitigate(m) => mitigate_cmd(&ingest_profile(&m.profile)?, &m),
        Command::Oracle(o) => oracle(&o),
    }
}

fn single(s: Single, mode: Mode) -> Result<()> {
    let config = SweepConfig {
        grid: vec![s.ta],
        steps: s.common.nt,
        mode,
        extend_window: s.common.extend_window,
        ..SweepConfig::default()
    };
    emit(&run_sweep(&config, None)?, &s.common.output)
}

fn stdout_error(e: io::Error) -> Error {
    Error::Io {
        path: "<stdout>".into(),
        source: e,
    }
}

fn emit(record: &ExperimentRecord, out: &Output) -> Result<()> {
    let format = match out.format {
        Format::Csv => ExportFormat::Csv,
        Format::Json => ExportFormat::Json,
    };
    match &out.out {
        Some(dir) => {
            for path in export(record, dir, format)? {
                println!("{}", path.display());
            }
            Ok(())
        }
        None => {
            let stdout = io::stdout().lock();
            match format {
                ExportFormat::Csv => write_curves_csv(record, stdout),
                ExportFormat::Json => write_record_json(record, stdout),
            }
        }
    }
}

fn print_json(value: &serde_json::Value) -> Result<()> {
    let text =
        serde_json::to_string_pretty(value).map_err(|e| Error::Precondition(e.to_string()))?;
    writeln!(io::stdout(), "{text}").map_err(stdout_error)
}

fn load_points(path: &Path) -> Result<Vec<(f64, f64)>> {
    let file = std::fs::File::open(path).map_err(|e| Error::Io {
        path: path.into(),
        source: e,
    })?;
    if path.extension().is_some_and(|e| e == "json") {
        let record = read_record_json(io::BufReader::new(file))?;
        return Ok(record
            .cells
            .iter()
            .map(|c| (c.t_a, c.estimate.mean))
            .collect());
    }
    let schema = |message: String| Error::Schema {
        path: path.display().to_string(),
        message,
    };
    let mut reader = csv::Reader::from_reader(file);
    let headers = reader.headers().map_err(|e| schema(e.to_string()))?.clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| schema(format!("missing column `{name}`")))
    };
    let (ti, pi) = (column("t_a")?, column("p")?);
    reader
        .records()
        .enumerate()
        .map(|(row, rec)| {
            let rec = rec.map_err(|e| schema(e.to_string()))?;
            let field = |i: usize| -> Result<f64> {
                rec.get(i)
                    .and_then(|v| v.trim().parse().ok())
                    .ok_or_else(|| schema(format!("row {}: column {i} is not a number", row + 1)))
            };
            Ok((field(ti)?, field(pi)?))
        })
        .collect()
}

fn mitigate_cmd(profile: &DeviceProfile, m: &MitigateArgs) -> Result<()> {
    let cal = profile.qubit(m.qubit)?.calibration()?;
    let noisy = match (&m.counts, m.p1) {
        (Some(c), _) => {
            if c.len() != 2 {
                return Err(Error::Precondition(format!(
                    "expected counts n0,n1, got {} values",
                    c.len()
                )));
            }
            let shots = c[0] + c[1];
            if shots == 0 {
                return Err(Error::Precondition("counts are both zero".into()));
            }
            ShotResult {
                n0: c[0],
                n1: c[1],
                shots,
                seed: 0,
            }
            .frequencies()
        }
        (None, Some(p1)) if (0.0..=1.0).contains(&p1) => [1.0 - p1, p1],
        (None, p1) => {
            return Err(Error::Precondition(format!(
                "p1 = {p1:?} is not a probability"
            )))
        }
    };
    let mitigated = mitigate(&noisy, &cal)?;
    print_json(&serde_json::json!({
        "measured": noisy,
        "mitigated": mitigated.p,
        "clipped": mitigated.clipped(),
        "outside_unit_interval": mitigated.outside_unit_interval,
    }))
}

fn oracle(o: &OracleArgs) -> Result<()> {
    if o.nt == 0 {
        return Err(Error::Precondition("need at least one layer".into()));
    }
    let sink: Box<dyn Write> = match &o.out {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(|e| Error::Io {
                path: dir.clone(),
                source: e,
            })?;
            let path = dir.join("oracle.csv");
            let file = std::fs::File::create(&path).map_err(|e| Error::Io { path, source: e })?;
            Box::new(file)
        }
        None => Box::new(io::stdout().lock()),
    };
    let mut w = csv::Writer::from_writer(sink);
    let csv_io = |e: csv::Error| Error::Precondition(e.to_string());
    w.write_record(["t_a", "t", "p_exact", "p_ode", "abs_diff"])
        .map_err(csv_io)?;
    let mut worst: f64 = 0.0;
    for &t_a in &o.ta_grid {
        let params = QuenchParams::with_anneal_time(t_a)?;
        let t_f = window_rule(t_a, true)?;
        let times: Vec<f64> = (0..=o.nt).map(|k| t_f * k as f64 / o.nt as f64).collect();
        let chi = chi_anticrossing(&params)?;
        let ode = ode_oracle_at(&params, 0.0, &anticrossing_state(), &times, 1e-12)?;
        for (t, s) in times.iter().zip(&ode) {
            let exact = lz_probability(*t, &params, &chi)?;
            let diff = (exact - s.p1()).abs();
            worst = worst.max(diff);
            w.write_record([t_a, *t, exact, s.p1(), diff].map(|v| format!("{v:?}")))
                .map_err(csv_io)?;
        }
    }
    w.flush().map_err(stdout_error)?;
    eprintln!("max |exact - ode| = {worst:e}");
    if worst > o.tolerance {
        return Err(Error::Convergence(format!(
            "exact and ODE curves differ by {worst:e} (tolerance {:e})",
            o.tolerance
        )));
    }
    Ok(())
}
