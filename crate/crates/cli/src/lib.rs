//! Command execution for the `clockmap` binary.
//!
//! Every verb maps a resolved configuration to a list of in-memory
//! artifacts. Writing them to disk, stamping the manifest and replaying a
//! manifest are separate steps so that tests can drive each one directly.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clockmap_core::bridge::{all_pairs, verify_partition_identity, verify_suite, Engines, IdentityReport, STRING_TOLERANCE};
use clockmap_core::clock_exact::ClockModel;
use clockmap_core::clock_mc::{estimate_correlation, run_chains, McConfig};
use clockmap_core::io::{
    curve_table, exact_table, push_corr, push_string, series_table, Artifact, CsvTable, ResolvedConfig, RunManifest,
    Schema, StringRow,
};
use clockmap_core::kitaev::Construction;
use clockmap_core::qudit::checked_dim;
use clockmap_core::scan::{classify_phases, scan_fidelity, DecayCriteria, McSettings};
use clockmap_core::{temperature_from_beta, Error};

pub const MANIFEST_NAME: &str = "manifest.json";
pub const WORKERS_ENV: &str = "CLOCKMAP_WORKERS";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verb {
    Verify,
    Exact,
    Mc,
    FidelityScan,
    StringScan,
    Classify,
}

impl Verb {
    pub const ALL: [Verb; 6] = [
        Verb::Verify,
        Verb::Exact,
        Verb::Mc,
        Verb::FidelityScan,
        Verb::StringScan,
        Verb::Classify,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Verb::Verify => "verify",
            Verb::Exact => "exact",
            Verb::Mc => "mc",
            Verb::FidelityScan => "fidelity-scan",
            Verb::StringScan => "string-scan",
            Verb::Classify => "classify",
        }
    }
}

impl FromStr for Verb {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        Verb::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| CliError::Usage(format!("unknown command '{s}'")))
    }
}

/// Process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exit {
    Ok = 0,
    /// An identity check or a classification failed.
    Failure = 1,
    Usage = 2,
    Cap = 3,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Cap(String),
    Failure(String),
    Io(String),
}

impl CliError {
    pub fn exit(&self) -> Exit {
        match self {
            CliError::Usage(_) | CliError::Io(_) => Exit::Usage,
            CliError::Cap(_) => Exit::Cap,
            CliError::Failure(_) => Exit::Failure,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Cap(m) => write!(f, "{m}"),
            CliError::Failure(m) => write!(f, "{m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::CapExceeded { .. } | Error::ScopeExceeded(_) => CliError::Cap(e.to_string()),
            Error::NoReport(_) | Error::ReweightingFailure { .. } => CliError::Failure(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

/// Result of one verb: its artifacts, the chain seeds it used, and whether
/// every check passed.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub verb: Verb,
    pub artifacts: Vec<Artifact>,
    pub seeds: Vec<u64>,
    pub pass: bool,
    pub summary: String,
}

fn json<T: serde::Serialize>(value: &T) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s.into_bytes()
}

fn csv(name: String, table: &CsvTable) -> Artifact {
    Artifact::new(name, table.to_csv())
}

fn require_temperatures(cfg: &ResolvedConfig) -> Result<Vec<f64>, CliError> {
    let t = cfg.temperatures()?;
    if t.is_empty() {
        return Err(Error::Config {
            key: "T".into(),
            msg: "required (give T, beta, or a grid)".into(),
        }
        .into());
    }
    Ok(t)
}

fn settings(cfg: &ResolvedConfig) -> McSettings {
    McSettings {
        sweeps: cfg.sweeps,
        therm: cfg.therm,
        measure_every: cfg.measure_every,
        seed: cfg.seed,
        proposal: cfg.proposal,
        start: cfg.start,
    }
}

/// Run one verb on a resolved configuration.
pub fn run_command(verb: Verb, cfg: &ResolvedConfig) -> Result<RunOutput, CliError> {
    match verb {
        Verb::Verify => verify(cfg),
        Verb::Exact => exact(cfg),
        Verb::Mc => mc(cfg),
        Verb::FidelityScan => fidelity_scan(cfg),
        Verb::StringScan => string_scan(cfg),
        Verb::Classify => classify(cfg),
    }
}

fn verify(cfg: &ResolvedConfig) -> Result<RunOutput, CliError> {
    let caps = cfg.caps();
    let mut reports: Vec<IdentityReport> = Vec::new();
    for &l in &cfg.l {
        reports.extend(verify_suite(cfg.d, l, caps)?);
        let temps = cfg.temperatures()?;
        if !temps.is_empty() {
            reports.extend(verify_partition_identity(cfg.d, l, &temps, Construction::VertexForm, caps)?);
        }
    }
    let failed = reports.iter().filter(|r| !r.pass).count();
    Ok(RunOutput {
        verb: Verb::Verify,
        summary: format!("{} checks, {} failed", reports.len(), failed),
        pass: failed == 0,
        artifacts: vec![Artifact::new("verify.json", json(&reports))],
        seeds: Vec::new(),
    })
}

fn exact(cfg: &ResolvedConfig) -> Result<RunOutput, CliError> {
    let temps = require_temperatures(cfg)?;
    let mut artifacts = Vec::new();
    for &l in &cfg.l {
        let dos = ClockModel::new(l, cfg.d)?.density_of_states(cfg.caps().enumeration)?;
        let rows: Vec<_> = temps.iter().map(|&t| dos.thermo(t)).collect();
        artifacts.push(csv(format!("exact_L{l}.csv"), &exact_table(&rows)));
    }
    Ok(RunOutput {
        verb: Verb::Exact,
        summary: format!("{} temperatures at L = {:?}", temps.len(), cfg.l),
        pass: true,
        artifacts,
        seeds: Vec::new(),
    })
}

fn mc(cfg: &ResolvedConfig) -> Result<RunOutput, CliError> {
    let temps = require_temperatures(cfg)?;
    let base = settings(cfg);
    let single = temps.len() == 1 && cfg.l.len() == 1;
    let mut cfgs = Vec::new();
    for &l in &cfg.l {
        for &t in &temps {
            let point = cfgs.len() as u64;
            let mut c = McConfig {
                correlations: l >= 4,
                ..base.chain(cfg.d, l, t, point)
            };
            if single {
                c.seed = cfg.seed;
            }
            cfgs.push(c);
        }
    }
    let mut artifacts = Vec::new();
    for (i, (c, run)) in cfgs.iter().zip(run_chains(&cfgs)).enumerate() {
        let run = run?;
        let stem = format!("series_L{}_{i}", c.l);
        artifacts.push(csv(format!("{stem}.csv"), &series_table(&run.series)));
        artifacts.push(Artifact::new(format!("{stem}.json"), json(&run.manifest)));
        if c.correlations && run.series.len() >= 2 {
            let mut t = CsvTable::new(Schema::Corr);
            if let Ok(points) = estimate_correlation(&run.series) {
                push_corr(&mut t, c.t, &points);
                artifacts.push(csv(format!("corr_L{}_{i}.csv", c.l), &t));
            }
        }
    }
    Ok(RunOutput {
        verb: Verb::Mc,
        summary: format!("{} chains", cfgs.len()),
        pass: true,
        artifacts,
        seeds: cfgs.iter().map(|c| c.seed).collect(),
    })
}

fn fidelity_scan(cfg: &ResolvedConfig) -> Result<RunOutput, CliError> {
    let betas = cfg.betas()?;
    if betas.is_empty() {
        return Err(Error::Config {
            key: "beta".into(),
            msg: "required (give beta, T, or a grid)".into(),
        }
        .into());
    }
    let mc = settings(cfg);
    let mut artifacts = Vec::new();
    let mut seeds = Vec::new();
    let mut summary = Vec::new();
    for &l in &cfg.l {
        let curve = scan_fidelity(cfg.d, l, &betas, cfg.delta_beta, &mc)?;
        seeds.extend(curve.points.iter().map(|p| p.seed));
        summary.push(format!(
            "L={l}: chi_F peak T={:?}, C_v peak T={:?}",
            curve.chi_peak_temperature(),
            curve.cv_peak_temperature()
        ));
        artifacts.push(csv(format!("curve_L{l}.csv"), &curve_table(&curve)));
        artifacts.push(Artifact::new(format!("curve_L{l}.json"), json(&curve)));
    }
    Ok(RunOutput {
        verb: Verb::FidelityScan,
        summary: summary.join("; "),
        pass: true,
        artifacts,
        seeds,
    })
}

/// Exact string expectations where the dense state fits under the memory
/// cap, Monte Carlo `C(r)` otherwise.
fn string_scan(cfg: &ResolvedConfig) -> Result<RunOutput, CliError> {
    let caps = cfg.caps();
    let betas = cfg.betas()?;
    if betas.is_empty() {
        return Err(Error::Config {
            key: "beta".into(),
            msg: "required (give beta, T, or a grid)".into(),
        }
        .into());
    }
    let mut artifacts = Vec::new();
    let mut seeds = Vec::new();
    let mut max_dev: f64 = 0.0;
    for (li, &l) in cfg.l.iter().enumerate() {
        if checked_dim(cfg.d, 2 * l * l, caps.memory).is_ok() {
            let eng = Engines::new(cfg.d, l, Construction::VertexForm, caps)?;
            let pairs: Vec<_> = all_pairs(&eng.lattice).into_iter().filter(|&(k, _)| k == 0).collect();
            let mut table = CsvTable::new(Schema::Strings);
            for &beta in &betas {
                let reports = eng.string_reports(beta, &pairs, caps)?;
                // two paths per pair, in pair order
                for (r, &(k, v)) in reports.iter().zip(pairs.iter().flat_map(|p| [p, p])) {
                    max_dev = max_dev.max(r.abs_dev);
                    push_string(
                        &mut table,
                        &StringRow {
                            beta,
                            k,
                            l: v,
                            path: r.params.path.clone().unwrap_or_default(),
                            string: r.left,
                            correlation: r.right,
                        },
                    );
                }
            }
            artifacts.push(csv(format!("strings_L{l}.csv"), &table));
        } else {
            let mc = settings(cfg);
            let cfgs: Vec<McConfig> = betas
                .iter()
                .enumerate()
                .map(|(i, &b)| McConfig {
                    correlations: true,
                    ..mc.chain(cfg.d, l, temperature_from_beta(b), (li * betas.len() + i) as u64)
                })
                .collect();
            let mut table = CsvTable::new(Schema::Corr);
            for (c, run) in cfgs.iter().zip(run_chains(&cfgs)) {
                let run = run?;
                push_corr(&mut table, c.t, &estimate_correlation(&run.series)?);
                seeds.push(c.seed);
            }
            artifacts.push(csv(format!("corr_L{l}.csv"), &table));
        }
    }
    Ok(RunOutput {
        verb: Verb::StringScan,
        summary: format!("{} tables, largest exact string deviation {max_dev:.3e}", artifacts.len()),
        pass: max_dev <= STRING_TOLERANCE,
        artifacts,
        seeds,
    })
}

fn classify(cfg: &ResolvedConfig) -> Result<RunOutput, CliError> {
    let temps = require_temperatures(cfg)?;
    let report = classify_phases(cfg.d, &cfg.l, &temps, &settings(cfg), &DecayCriteria::default())?;
    let mut artifacts = vec![Artifact::new("transition.json", json(&report))];
    let mut seeds = Vec::new();
    for (li, &l) in cfg.l.iter().enumerate() {
        let mut table = CsvTable::new(Schema::Corr);
        for tc in &report.temperatures {
            let s = &tc.per_size[li];
            push_corr(&mut table, tc.t, &s.correlations);
            seeds.push(s.seed);
        }
        artifacts.push(csv(format!("corr_L{l}.csv"), &table));
    }
    let labels = report.regime_labels();
    Ok(RunOutput {
        verb: Verb::Classify,
        summary: format!("regimes {labels:?}"),
        pass: true,
        artifacts,
        seeds,
    })
}

fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

/// Run a verb and stamp the manifest with start and end times.
pub fn run_with_manifest(verb: Verb, cfg: &ResolvedConfig) -> Result<(RunOutput, RunManifest), CliError> {
    let started = now();
    let out = run_command(verb, cfg)?;
    let mut manifest = RunManifest::new(verb.name(), cfg.clone(), out.seeds.clone(), &out.artifacts);
    manifest.started = started;
    manifest.finished = now();
    Ok((out, manifest))
}

/// Write the artifacts and their manifest into `dir`, one file each.
pub fn write_outputs(dir: &Path, artifacts: &[Artifact], manifest: &RunManifest) -> Result<PathBuf, CliError> {
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", dir.display()));
    std::fs::create_dir_all(dir).map_err(io)?;
    for a in artifacts {
        std::fs::write(dir.join(&a.name), &a.bytes).map_err(io)?;
    }
    let path = dir.join(MANIFEST_NAME);
    std::fs::write(&path, manifest.to_json()).map_err(io)?;
    Ok(path)
}

#[derive(Debug, Clone)]
pub struct ReplayOutcome {
    pub manifest: RunManifest,
    pub output: RunOutput,
    pub payload_hash: String,
    pub mismatches: Vec<String>,
}

impl ReplayOutcome {
    pub fn matches(&self) -> bool {
        self.mismatches.is_empty() && self.payload_hash == self.manifest.payload_hash
    }
}

/// Re-run the command recorded in a manifest and compare payload hashes.
pub fn replay(manifest: &RunManifest) -> Result<ReplayOutcome, CliError> {
    let verb: Verb = manifest.command.parse()?;
    if manifest.rng != manifest.config.rng {
        return Err(CliError::Usage(format!(
            "manifest rng '{}' disagrees with its config '{}'",
            manifest.rng, manifest.config.rng
        )));
    }
    let output = run_command(verb, &manifest.config)?;
    let payload_hash = clockmap_core::io::payload_hash(&output.artifacts);
    let mismatches = manifest.mismatches(&output.artifacts);
    Ok(ReplayOutcome {
        manifest: manifest.clone(),
        output,
        payload_hash,
        mismatches,
    })
}

pub fn read_manifest(path: &Path) -> Result<RunManifest, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    Ok(RunManifest::from_json(&text)?)
}

/// Size the global worker pool from `CLOCKMAP_WORKERS` when it is set.
pub fn configure_workers() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(WORKERS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("{WORKERS_ENV} must be a positive integer, got '{raw}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(format!("worker pool: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(text: &str) -> ResolvedConfig {
        ResolvedConfig::from_toml(text).unwrap()
    }

    #[test]
    fn verbs_parse() {
        for v in Verb::ALL {
            assert_eq!(v.name().parse::<Verb>().unwrap(), v);
        }
        assert_eq!("replay".parse::<Verb>().unwrap_err().exit(), Exit::Usage);
    }

    #[test]
    fn errors_map_to_exit_codes() {
        let cap = CliError::from(Error::CapExceeded {
            what: "x",
            needed: 2,
            cap: 1,
        });
        assert_eq!(cap.exit(), Exit::Cap);
        assert_eq!(CliError::from(Error::NoReport("x".into())).exit(), Exit::Failure);
        assert_eq!(CliError::from(Error::Config { key: "T".into(), msg: "x".into() }).exit(), Exit::Usage);
    }

    #[test]
    fn exact_needs_temperatures() {
        let e = run_command(Verb::Exact, &cfg("d = 2\nL = 2")).unwrap_err();
        assert_eq!(e.exit(), Exit::Usage);
        assert!(e.to_string().contains("`T`"));
    }

    #[test]
    fn mc_single_chain_uses_the_seed() {
        let out = run_command(Verb::Mc, &cfg("d = 3\nL = 4\nT = 1.0\nsweeps = 200\ntherm = 10\nseed = 77")).unwrap();
        assert_eq!(out.seeds, vec![77]);
        let names: Vec<&str> = out.artifacts.iter().map(|a| a.name.as_str()).collect();
        assert_eq!(names, ["series_L4_0.csv", "series_L4_0.json", "corr_L4_0.csv"]);
    }

    #[test]
    fn replay_reproduces_payloads() {
        let c = cfg("d = 3\nL = [3, 4]\nT = [0.8, 1.5]\nsweeps = 300\ntherm = 20\nseed = 5");
        let (_, manifest) = run_with_manifest(Verb::Mc, &c).unwrap();
        let r = replay(&manifest).unwrap();
        assert!(r.matches(), "{:?}", r.mismatches);
        let mut tampered = manifest.clone();
        tampered.config.seed = 6;
        assert!(!replay(&tampered).unwrap().matches());
    }
}
