mod artifacts;
mod manifest;
mod pipelines;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use frontlab::config::{InitialKind, RunConfig};
use frontlab::simulator::Scheme;

use artifacts::Artifacts;
use manifest::{RunManifest, Status, Verdict};
use pipelines::{Ctx, Failure};

/// Pulled-front analysis pipelines. Each run writes its artifacts and a
/// `manifest.json` under `<out>/<command>-<config digest>`.
#[derive(Parser)]
#[command(name = "frontlab", version)]
struct Cli {
    /// Root directory for run outputs.
    #[arg(long, global = true, default_value = "runs")]
    out: PathBuf,
    /// Worker threads for parameter sweeps (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// More logging on stderr (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Linear spreading speed: pinched double root, hypotheses, oracle.
    Speed { config: PathBuf },
    /// Critical front profile and its tail asymptotics.
    Front { config: PathBuf },
    /// Weighted linearization: eigenvalue scan, resonance, transition.
    Spectrum { config: PathBuf },
    /// Approximate solution and its residual decay table.
    Approx { config: PathBuf },
    /// Invasion run with logarithmic shift fit.
    Simulate(SimulateArgs),
}

#[derive(Args)]
struct SimulateArgs {
    config: PathBuf,
    /// Run the linear model problem instead of the invasion.
    #[arg(long)]
    model_problem: bool,
    #[arg(long, num_args = 2, value_names = ["X0", "X1"], allow_negative_numbers = true)]
    domain: Option<Vec<f64>>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    t_final: Option<f64>,
    #[arg(long, value_enum)]
    scheme: Option<SchemeArg>,
    #[arg(long, value_enum)]
    initial: Option<InitialArg>,
    #[arg(long)]
    sample_every: Option<f64>,
    #[arg(long, num_args = 2, value_names = ["T0", "T1"])]
    fit_window: Option<Vec<f64>>,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum SchemeArg {
    ImexCnab2,
    ImexBdf2,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum InitialArg {
    Step,
    Front,
}

impl SimulateArgs {
    fn apply(&self, c: &mut RunConfig) {
        let s = &mut c.simulate;
        if let Some(d) = &self.domain {
            s.domain = (d[0], d[1]);
        }
        if let Some(n) = self.n {
            s.n = n;
        }
        if self.dt.is_some() {
            s.dt = self.dt;
        }
        if let Some(t) = self.t_final {
            s.t_final = t;
        }
        if let Some(k) = self.scheme {
            s.scheme = match k {
                SchemeArg::ImexCnab2 => Scheme::ImexCnAb2,
                SchemeArg::ImexBdf2 => Scheme::ImexBdf2,
            };
        }
        if let Some(k) = self.initial {
            s.initial = match k {
                InitialArg::Step => InitialKind::Step,
                InitialArg::Front => InitialKind::Front,
            };
        }
        if let Some(e) = self.sample_every {
            s.sample_every = e;
        }
        if let Some(w) = &self.fit_window {
            s.fit_window = Some((w[0], w[1]));
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let filter = tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| tracing_subscriber::EnvFilter::new(level));
    tracing_subscriber::fmt().with_env_filter(filter).with_writer(std::io::stderr).init();

    let jobs = cli.jobs.unwrap_or_else(rayon::current_num_threads).max(1);
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(Status::NumericalFailure.exit_code());
        }
    };
    pool.install(|| run(&cli, jobs))
}

fn run(cli: &Cli, jobs: usize) -> ExitCode {
    let (name, path) = match &cli.command {
        Command::Speed { config } => ("speed", config),
        Command::Front { config } => ("front", config),
        Command::Spectrum { config } => ("spectrum", config),
        Command::Approx { config } => ("approx", config),
        Command::Simulate(a) => (if a.model_problem { "model-problem" } else { "simulate" }, &a.config),
    };
    let mut config = match RunConfig::load(path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(Status::ConfigError.exit_code());
        }
    };
    if let Command::Simulate(a) = &cli.command {
        a.apply(&mut config);
    }
    let canonical = config.canonical();
    let digest = manifest::digest(&canonical);
    let dir = manifest::run_dir(&cli.out, name, &digest);
    let mut out = match Artifacts::create(dir.clone()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(Status::NumericalFailure.exit_code());
        }
    };
    let start = Instant::now();
    let outcome = execute(&cli.command, &config, &canonical, &mut out);
    let (checks, warnings, failure) = match outcome {
        (Ok(checks), w) => (checks, w, None),
        (Err(f), w) => (Vec::new(), w, Some(f)),
    };
    let status = match &failure {
        Some(Failure::Config(_)) => Status::ConfigError,
        Some(Failure::Numerical(_)) => Status::NumericalFailure,
        None if checks.iter().any(|c| c.verdict == Verdict::Fail) => Status::CheckFailed,
        None => Status::Pass,
    };
    for c in &checks {
        let tag = match c.verdict {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Skipped => "SKIP",
        };
        println!("{tag} {}: {}", c.name, c.detail);
    }
    if let Some(f) = &failure {
        eprintln!("error: {f}");
    }
    let m = RunManifest {
        command: name.to_string(),
        config_digest: digest,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        wall_time_s: start.elapsed().as_secs_f64(),
        jobs,
        outputs: out.files.clone(),
        checks,
        status,
        error: failure.map(|f| f.to_string()),
        warnings,
    };
    if let Err(e) = out.json("manifest.json", &m) {
        eprintln!("error: {e}");
        return ExitCode::from(Status::NumericalFailure.exit_code());
    }
    println!("{} ({})", dir.join("manifest.json").display(), serde_json::to_value(status).map(|v| v.to_string()).unwrap_or_default());
    ExitCode::from(status.exit_code())
}

fn execute(cmd: &Command, config: &RunConfig, canonical: &str, out: &mut Artifacts) -> (pipelines::Outcome, Vec<String>) {
    if let Err(e) = out.text("config.toml", canonical) {
        return (Err(e.into()), Vec::new());
    }
    let spec = match config.model.spec() {
        Ok(s) => s,
        Err(e) => return (Err(e.into()), Vec::new()),
    };
    let mut ctx = Ctx { config, spec, out, warnings: Vec::new() };
    let r = match cmd {
        Command::Speed { .. } => pipelines::speed(&mut ctx),
        Command::Front { .. } => pipelines::front(&mut ctx),
        Command::Spectrum { .. } => pipelines::spectrum(&mut ctx, config.seed),
        Command::Approx { .. } => pipelines::approx(&mut ctx),
        Command::Simulate(a) if a.model_problem => pipelines::model_problem(&mut ctx),
        Command::Simulate(_) => pipelines::simulate(&mut ctx),
    };
    (r, ctx.warnings)
}
