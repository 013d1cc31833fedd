use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use tracestab::config::OUTPUT_DIR_ENV;
use tracestab::{execute, validate, CommandKind, Format, Params, RunConfig, RunError};

#[derive(Parser)]
#[command(name = "tracestab", version, about = "Sharp constants and stability checks for trace inequalities")]
struct Cli {
    /// JSON config mirroring the flags; explicit flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (default: $TRACESTAB_OUTPUT_DIR, then ".").
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Option<Cmd>,
}

#[derive(Subcommand)]
enum Cmd {
    /// λ_k for k ≤ K with a certificate for the tail, or the Watson integrals.
    Spectrum(Params),
    /// C(w)² and the stability constant C′.
    Constants(Params),
    /// Random profile sets against the stability and reverse inequalities.
    VerifyTrace(Params),
    /// Random trials of the finite-dimensional duality inequalities.
    DualitySweep(Params),
    /// Ratios of the σ-counterexample along decreasing δ.
    Counterexample(Params),
    /// Local-stability probe around the n = 1 transport extremiser.
    TransportProbe(Params),
    /// List precondition violations of a command without running it.
    Validate {
        #[arg(value_enum)]
        target: Option<CommandKind>,
        #[command(flatten)]
        params: Params,
    },
}

fn load(path: &Option<PathBuf>) -> Result<Params, String> {
    match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display()))?;
            Params::from_json(&text)
        }
        None => Ok(Params::default()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let base = match load(&cli.config) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let mut validate_only = false;
    let mut flags = match cli.command {
        None => Params::default(),
        Some(Cmd::Validate { target, params }) => {
            validate_only = true;
            Params { command: target, ..params }
        }
        Some(cmd) => {
            let (kind, params) = match cmd {
                Cmd::Spectrum(p) => (CommandKind::Spectrum, p),
                Cmd::Constants(p) => (CommandKind::Constants, p),
                Cmd::VerifyTrace(p) => (CommandKind::VerifyTrace, p),
                Cmd::DualitySweep(p) => (CommandKind::DualitySweep, p),
                Cmd::Counterexample(p) => (CommandKind::Counterexample, p),
                Cmd::TransportProbe(p) => (CommandKind::TransportProbe, p),
                Cmd::Validate { .. } => unreachable!(),
            };
            Params { command: Some(kind), ..params }
        }
    };
    flags.out = cli.out;
    flags.format = cli.format;
    let config = match RunConfig::resolve(base.overlay(&flags)) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if validate_only {
        let violations = validate(config.command, &config.params);
        for v in &violations {
            println!("{v}");
        }
        return if violations.is_empty() {
            println!("{}: configuration is valid", config.command.name());
            ExitCode::SUCCESS
        } else {
            ExitCode::from(2)
        };
    }
    let report = match execute(&config) {
        Ok(r) => r,
        Err(e @ RunError::Config(_)) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    for c in &report.checks {
        println!("{}", c.line());
    }
    match report.write(&config) {
        Ok(paths) => {
            for p in paths {
                println!("wrote {}", p.display());
            }
        }
        Err(e) => {
            eprintln!("error: writing reports to {} (set --out or {OUTPUT_DIR_ENV}): {e}", config.out.display());
            return ExitCode::from(1);
        }
    }
    if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
