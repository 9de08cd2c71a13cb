use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use pg_cli::commands::{self, CliError};
use pg_cli::{Manifest, Report};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "pg", version, about = "Poisson geometry computations on a single chart")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Sampling seed.
    #[arg(long, global = true, env = "PG_SEED", default_value_t = 0)]
    seed: u64,
    /// Omit wall-clock time from the report.
    #[arg(long, global = true)]
    no_timestamp: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run the Jacobi, δ, Cartan and musical identity battery.
    Check { manifest: PathBuf },
    /// Integrate a contravariant geodesic.
    Geodesic {
        manifest: PathBuf,
        /// Initial point, comma separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        x0: Vec<f64>,
        /// Initial covector, comma separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        alpha0: Vec<f64>,
        /// Final time.
        #[arg(long = "T", default_value_t = 1.0)]
        t_end: f64,
        /// Trajectory CSV destination.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Parallel-transport a covector along a named cotangent path.
    Transport {
        manifest: PathBuf,
        #[arg(long)]
        path: String,
        /// Covector at the start of the path.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        beta0: Vec<f64>,
    },
    /// Linear holonomy of a named cotangent loop.
    Holonomy {
        manifest: PathBuf,
        #[arg(long)]
        path: String,
    },
    /// Secondary characteristic classes m_k.
    Classes {
        manifest: PathBuf,
        /// Degrees to compute, comma separated.
        #[arg(long, value_delimiter = ',', default_value = "1")]
        k: Vec<usize>,
    },
    /// Modular vector field and the comparison with the first class.
    Modular { manifest: PathBuf },
    /// Line integral of the modular vector field along a named path.
    Integral {
        manifest: PathBuf,
        #[arg(long)]
        path: String,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Check { .. } => "check",
            Command::Geodesic { .. } => "geodesic",
            Command::Transport { .. } => "transport",
            Command::Holonomy { .. } => "holonomy",
            Command::Classes { .. } => "classes",
            Command::Modular { .. } => "modular",
            Command::Integral { .. } => "integral",
        }
    }

    fn manifest(&self) -> &Path {
        match self {
            Command::Check { manifest }
            | Command::Geodesic { manifest, .. }
            | Command::Transport { manifest, .. }
            | Command::Holonomy { manifest, .. }
            | Command::Classes { manifest, .. }
            | Command::Modular { manifest }
            | Command::Integral { manifest, .. } => manifest,
        }
    }

    fn echo(&self) -> Value {
        let mut v = json!({ "manifest": self.manifest().display().to_string() });
        let extra = match self {
            Command::Geodesic { x0, alpha0, t_end, out, .. } => {
                json!({ "x0": x0, "alpha0": alpha0, "T": t_end, "out": out.as_ref().map(|p| p.display().to_string()) })
            }
            Command::Transport { path, beta0, .. } => json!({ "path": path, "beta0": beta0 }),
            Command::Holonomy { path, .. } | Command::Integral { path, .. } => json!({ "path": path }),
            Command::Classes { k, .. } => json!({ "k": k }),
            Command::Check { .. } | Command::Modular { .. } => json!({}),
        };
        if let (Value::Object(a), Value::Object(b)) = (&mut v, extra) {
            a.extend(b);
        }
        v
    }
}

fn run(cli: &Cli, man: &Manifest) -> commands::Outcome {
    let seed = cli.seed;
    match &cli.command {
        Command::Check { .. } => commands::check(man, seed),
        Command::Geodesic { x0, alpha0, t_end, out, .. } => commands::geodesic(man, x0, alpha0, *t_end, out.as_deref()),
        Command::Transport { path, beta0, .. } => commands::transport(man, path, beta0),
        Command::Holonomy { path, .. } => commands::holonomy(man, path, seed),
        Command::Classes { k, .. } => commands::classes(man, k, seed),
        Command::Modular { .. } => commands::modular(man, seed),
        Command::Integral { path, .. } => commands::integral(man, path, seed),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let man = match Manifest::load(cli.command.manifest()) {
        Ok(m) => m,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let records = match run(&cli, &man) {
        Ok(r) => r,
        Err(CliError::Input(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
        Err(CliError::Compute(msg)) => {
            eprintln!("error: {msg}");
            vec![pg_cli::Record::failed("computation", msg)]
        }
    };
    let report = Report { command: cli.command.name().into(), echo: cli.command.echo(), manifest_sha256: man.sha256.clone(), seed: cli.seed, records };
    let wall = (!cli.no_timestamp).then(|| start.elapsed().as_secs_f64());
    let text = serde_json::to_string_pretty(&report.to_json(wall)).expect("report serializes");
    // a closed stdout should not turn into a panic exit code
    let _ = writeln!(std::io::stdout().lock(), "{text}");
    if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
