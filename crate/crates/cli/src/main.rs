use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use atomirror::eigen::bandgap;
use atomirror_cli::config::OptimizeRequest;
use atomirror_cli::output::write_atomic;
use atomirror_cli::reproduce::ReproduceError;
use atomirror_cli::{parse_config, reproduce, run_plan, Plan, RunError, RunOutput, ScenarioConfig};
use clap::{Parser, Subcommand};

/// Environment variable holding the worker-pool size.
const WORKERS_VAR: &str = "ATOMIRROR_WORKERS";

#[derive(Parser)]
#[command(name = "atomirror", version, about = "Single-photon reflection from atom arrays in a waveguide")]
struct Cli {
    /// Directory for CSV tables and the JSON envelope (overrides the config).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Every engine and analysis requested by the config.
    Run { config: PathBuf },
    /// Reflection spectra only.
    Spectrum { config: PathBuf },
    /// Eigenvalues of the effective Hamiltonian.
    Eigen { config: PathBuf },
    /// Infinite-chain band gap at propagation phase kd.
    Band {
        #[arg(long, allow_hyphen_values = true)]
        kd: f64,
    },
    /// High-reflectivity window.
    Window { config: PathBuf },
    /// Spacing that maximises the window of an N-atom chain.
    Optimize {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0.99)]
        threshold: f64,
    },
    /// Reflection zeros and their phase jumps.
    Zeros { config: PathBuf },
    /// Minimum reflectivity inside the lossless window under external loss.
    Dissipation { config: PathBuf },
    /// Data behind one figure panel.
    Reproduce {
        figure: String,
        /// Exit with status 4 unless every headline number matches.
        #[arg(long)]
        check: bool,
    },
}

enum Failure {
    Config(String),
    Numerical(String),
    Check(String),
    Io(anyhow::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Io(_) => 1,
            Failure::Config(_) => 2,
            Failure::Numerical(_) => 3,
            Failure::Check(_) => 4,
        }
    }
}

impl From<RunError> for Failure {
    fn from(e: RunError) -> Self {
        match e {
            RunError::Config(_) => Failure::Config(e.to_string()),
            RunError::Numerical(_) => Failure::Numerical(e.to_string()),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Io(e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match configure_workers().and_then(|_| execute(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Config(m) | Failure::Numerical(m) | Failure::Check(m) => eprintln!("error: {m}"),
                Failure::Io(e) => eprintln!("error: {e:#}"),
            }
            ExitCode::from(f.code())
        }
    }
}

fn configure_workers() -> Result<(), Failure> {
    let Ok(raw) = std::env::var(WORKERS_VAR) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::Config(format!("{WORKERS_VAR} must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Io(anyhow::anyhow!("worker pool: {e}")))
}

fn load(path: &Path) -> Result<ScenarioConfig, Failure> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(|e| Failure::Config(format!("{e:#}")))?;
    parse_config(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

fn execute(cli: Cli) -> Result<(), Failure> {
    let only = |f: fn(&mut Plan)| {
        let mut plan = Plan::NOTHING;
        f(&mut plan);
        plan
    };
    let (config, plan) = match cli.command {
        Command::Band { kd } => {
            let gap = bandgap(kd).map_err(|e| Failure::Numerical(e.to_string()))?;
            println!("{}", serde_json::to_string_pretty(&gap).expect("gap serialises"));
            return Ok(());
        }
        Command::Reproduce { figure, check } => return reproduce_figure(&figure, check, cli.out),
        Command::Optimize { n, threshold } => {
            let mut config = ScenarioConfig::uniform(n, 0.25);
            config.threshold = threshold;
            config.analysis.optimize = Some(OptimizeRequest { n_list: vec![n], ..Default::default() });
            config.output.stem = Some(format!("optimize_n{n}"));
            config.validate().map_err(|e| Failure::Config(e.to_string()))?;
            (config, only(|p| p.optimize = true))
        }
        Command::Run { config } => {
            let config = load(&config)?;
            let plan = Plan::from_config(&config);
            (config, plan)
        }
        Command::Spectrum { config } => (load(&config)?, only(|p| p.spectra = true)),
        Command::Eigen { config } => (load(&config)?, only(|p| p.eigen = true)),
        Command::Window { config } => (load(&config)?, only(|p| p.window = true)),
        Command::Zeros { config } => (load(&config)?, only(|p| p.zeros = true)),
        Command::Dissipation { config } => (load(&config)?, only(|p| p.dissipation = true)),
    };
    let out = run_plan(&config, plan)?;
    let dir = cli.out.or_else(|| config.output.dir.as_ref().map(PathBuf::from)).unwrap_or_else(|| PathBuf::from("."));
    let written = emit(&out, &dir, config.stem())?;
    for note in &out.envelope.notes {
        eprintln!("note: {note}");
    }
    println!("{}", written.display());
    Ok(())
}

fn reproduce_figure(id: &str, check: bool, out_dir: Option<PathBuf>) -> Result<(), Failure> {
    let out = reproduce(id).map_err(|e| match e {
        ReproduceError::UnknownFigure(_) => Failure::Config(e.to_string()),
        ReproduceError::Run(r) => r.into(),
    })?;
    let dir = out_dir.unwrap_or_else(|| PathBuf::from("."));
    let written = emit(&out, &dir, id)?;
    for c in &out.envelope.checks {
        println!("{} {}: {} (expected {})", if c.pass { "PASS" } else { "FAIL" }, c.name, c.value, c.expected);
    }
    println!("{}", written.display());
    if check && !out.envelope.checks_pass() {
        let failed = out.envelope.checks.iter().filter(|c| !c.pass).count();
        return Err(Failure::Check(format!("{id}: {failed} check(s) failed")));
    }
    Ok(())
}

/// Writes every table and the envelope; returns the envelope path.
fn emit(out: &RunOutput, dir: &Path, stem: &str) -> anyhow::Result<PathBuf> {
    for table in &out.tables {
        let path = dir.join(table.file_name());
        write_atomic(&path, table.to_csv().as_bytes()).with_context(|| format!("writing {}", path.display()))?;
    }
    let path = dir.join(format!("{stem}.json"));
    write_atomic(&path, out.envelope.to_json().as_bytes()).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}
