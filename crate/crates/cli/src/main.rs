use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use clockmap::{configure_workers, read_manifest, replay, run_with_manifest, write_outputs, CliError, Exit, Verb};
use clockmap_core::io::ConfigLayer;

#[derive(Parser)]
#[command(name = "clockmap", version, about = "Deformed Z_d toric code and clock model engines")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the exact identity suite on tiny tori.
    Verify(RunArgs),
    /// Exact clock thermodynamics by enumeration.
    Exact(RunArgs),
    /// Metropolis chains, one per (L, T).
    Mc(RunArgs),
    /// Fidelity susceptibility and heat capacity over a beta grid.
    FidelityScan(RunArgs),
    /// String expectations (exact) or clock correlations (sampled).
    StringScan(RunArgs),
    /// Classify correlation decay over a temperature grid.
    Classify(RunArgs),
    /// Re-run a manifest and compare artifact hashes.
    Replay {
        manifest: PathBuf,
        /// Also write the regenerated artifacts here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    /// TOML config file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    d: Option<String>,
    /// Linear size, or a comma-separated list.
    #[arg(long = "L")]
    l: Option<String>,
    /// Temperature, or a comma-separated list.
    #[arg(long = "T")]
    t: Option<String>,
    #[arg(long)]
    beta: Option<String>,
    #[arg(long)]
    delta_beta: Option<String>,
    #[arg(long)]
    sweeps: Option<String>,
    #[arg(long)]
    therm: Option<String>,
    #[arg(long)]
    measure_every: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    rng: Option<String>,
    /// uniform or step
    #[arg(long)]
    proposal: Option<String>,
    /// cold or hot
    #[arg(long)]
    start: Option<String>,
    #[arg(long)]
    grid_start: Option<String>,
    #[arg(long)]
    grid_stop: Option<String>,
    #[arg(long)]
    grid_step: Option<String>,
    #[arg(long)]
    cap_memory: Option<String>,
    #[arg(long)]
    cap_enum: Option<String>,
}

impl RunArgs {
    fn layer(&self) -> Result<ConfigLayer, CliError> {
        let mut layer = match &self.config {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
                ConfigLayer::from_toml(&text)?
            }
            None => ConfigLayer::default(),
        };
        let flags = [
            ("d", &self.d),
            ("L", &self.l),
            ("T", &self.t),
            ("beta", &self.beta),
            ("delta_beta", &self.delta_beta),
            ("sweeps", &self.sweeps),
            ("therm", &self.therm),
            ("measure_every", &self.measure_every),
            ("seed", &self.seed),
            ("rng", &self.rng),
            ("proposal", &self.proposal),
            ("start", &self.start),
            ("grid.start", &self.grid_start),
            ("grid.stop", &self.grid_stop),
            ("grid.step", &self.grid_step),
            ("caps.memory", &self.cap_memory),
            ("caps.enum", &self.cap_enum),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                layer.set(key, v)?;
            }
        }
        Ok(layer)
    }
}

fn run(cli: Cli) -> Result<Exit, CliError> {
    configure_workers()?;
    let (verb, args) = match cli.command {
        Command::Verify(a) => (Verb::Verify, a),
        Command::Exact(a) => (Verb::Exact, a),
        Command::Mc(a) => (Verb::Mc, a),
        Command::FidelityScan(a) => (Verb::FidelityScan, a),
        Command::StringScan(a) => (Verb::StringScan, a),
        Command::Classify(a) => (Verb::Classify, a),
        Command::Replay { manifest, out } => {
            let m = read_manifest(&manifest)?;
            let r = replay(&m)?;
            if let Some(dir) = out {
                write_outputs(&dir, &r.output.artifacts, &m)?;
            }
            if r.matches() {
                println!("replay ok: payload {}", r.payload_hash);
                return Ok(Exit::Ok);
            }
            for line in &r.mismatches {
                eprintln!("mismatch: {line}");
            }
            eprintln!("payload {} != recorded {}", r.payload_hash, m.payload_hash);
            return Ok(Exit::Failure);
        }
    };
    let cfg = args.layer()?.resolve()?;
    let (out, manifest) = run_with_manifest(verb, &cfg)?;
    let path = write_outputs(&args.out, &out.artifacts, &manifest)?;
    println!("{}: {} ({} artifacts, manifest {})", verb.name(), out.summary, out.artifacts.len(), path.display());
    Ok(if out.pass { Exit::Ok } else { Exit::Failure })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { Exit::Usage } else { Exit::Ok };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("clockmap: {e}");
            ExitCode::from(e.exit() as u8)
        }
    }
}
