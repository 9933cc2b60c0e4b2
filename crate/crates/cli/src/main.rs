//! `metroq`: batch runner writing CSV tables of Fisher-information bounds.
//!
//! Exit codes: 0 on success, 1 on an unexpected error, 2 on a configuration
//! error, 3 when a solver did not converge (the table is still written).

mod commands;
mod output;
mod params;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use metroq::error::MetroqError;
use sha2::{Digest, Sha256};

use output::Table;
use params::*;

const DEFAULT_SEED: u64 = 0x6d65_7472;

#[derive(Debug, Parser)]
#[command(name = "metroq", version, about = "Fisher-information bounds for imperfect quantum measurements")]
struct Cli {
    /// TOML file with a top-level `seed` and one section per subcommand.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output CSV path; standard output when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for randomised restarts.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    Gamma(GammaParams),
    NvFi(NvFiParams),
    Binning(BinningParams),
    Moments(MomentsParams),
    GhzSweep(GhzSweepParams),
    LocalSweep(LocalSweepParams),
    CeSweep(CeSweepParams),
    CovarianceAudit(CovarianceAuditParams),
    PhotonSweep(PhotonSweepParams),
}

/// Merges flags over the file section, validates, and returns the effective
/// parameters with the resolved TOML text they hash to.
fn resolve<P: Params>(name: &str, flags: P, file: Option<P>, seed: u64) -> Result<(P, String), ConfigError> {
    let merged = flags.layered_over(file.unwrap_or_default());
    merged.validate()?;
    let resolved = merged.resolved();
    let mut doc = toml::Table::new();
    doc.insert("seed".into(), toml::Value::Integer(seed as i64));
    let section = toml::Value::try_from(&resolved).map_err(|e| ConfigError(format!("cannot serialise parameters: {e}")))?;
    doc.insert(name.into(), section);
    let text = toml::to_string(&doc).map_err(|e| ConfigError(format!("cannot serialise parameters: {e}")))?;
    Ok((resolved, text))
}

fn sha256_hex(text: &str) -> String {
    Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

fn configure_pool() -> Result<(), ConfigError> {
    let Ok(raw) = std::env::var("METROQ_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| ConfigError(format!("METROQ_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| ConfigError(format!("cannot start worker pool: {e}")))
}

fn write_table(table: &Table, out: Option<&Path>, provenance: &str) -> Result<()> {
    match out {
        Some(path) => {
            let file = std::fs::File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
            let mut w = std::io::BufWriter::new(file);
            table.write(&mut w, provenance)?;
            w.flush()?;
        }
        None => table.write(std::io::stdout().lock(), provenance)?,
    }
    Ok(())
}

/// Runs the parsed command and returns the exit code.
fn run(cli: Cli) -> Result<ExitCode> {
    configure_pool()?;
    let file = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let seed = cli.seed.or(file.seed).unwrap_or(DEFAULT_SEED);

    let (name, text, table) = match cli.command {
        Command::Gamma(flags) => {
            let (p, text) = resolve("gamma", flags, file.gamma, seed)?;
            ("gamma", text, commands::gamma(&p, seed)?)
        }
        Command::NvFi(flags) => {
            let (p, text) = resolve("nv-fi", flags, file.nv_fi, seed)?;
            ("nv-fi", text, commands::nv_fi(&p)?)
        }
        Command::Binning(flags) => {
            let (p, text) = resolve("binning", flags, file.binning, seed)?;
            ("binning", text, commands::binning(&p)?)
        }
        Command::Moments(flags) => {
            let (p, text) = resolve("moments", flags, file.moments, seed)?;
            ("moments", text, commands::moments(&p)?)
        }
        Command::GhzSweep(flags) => {
            let (p, text) = resolve("ghz-sweep", flags, file.ghz_sweep, seed)?;
            ("ghz-sweep", text, commands::ghz_sweep(&p)?)
        }
        Command::LocalSweep(flags) => {
            let (p, text) = resolve("local-sweep", flags, file.local_sweep, seed)?;
            ("local-sweep", text, commands::local_sweep(&p, seed)?)
        }
        Command::CeSweep(flags) => {
            let (p, text) = resolve("ce-sweep", flags, file.ce_sweep, seed)?;
            ("ce-sweep", text, commands::ce_sweep(&p, seed)?)
        }
        Command::CovarianceAudit(flags) => {
            let (p, text) = resolve("covariance-audit", flags, file.covariance_audit, seed)?;
            ("covariance-audit", text, commands::covariance_audit(&p, seed)?)
        }
        Command::PhotonSweep(flags) => {
            let (p, text) = resolve("photon-sweep", flags, file.photon_sweep, seed)?;
            ("photon-sweep", text, commands::photon_sweep(&p)?)
        }
    };

    let provenance = format!(
        "metroq {} subcommand={name} seed={seed} config_sha256={}",
        env!("CARGO_PKG_VERSION"),
        sha256_hex(&text)
    );
    write_table(&table, cli.out.as_deref(), &provenance)?;
    if table.unconverged.is_empty() {
        Ok(ExitCode::SUCCESS)
    } else {
        for what in &table.unconverged {
            eprintln!("warning: not converged: {what}");
        }
        Ok(ExitCode::from(3))
    }
}

/// Configuration errors and invalid model parameters map to exit code 2.
fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<ConfigError>().is_some() {
        return 2;
    }
    match err.downcast_ref::<MetroqError>() {
        Some(
            MetroqError::InvalidParameter(_)
            | MetroqError::TailMass { .. }
            | MetroqError::CapExceeded { .. }
            | MetroqError::NotStochastic(_),
        ) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn hash_depends_on_resolved_values_only() {
        let explicit = GhzSweepParams { p: Some(0.95), ..Default::default() };
        let (_, a) = resolve("ghz-sweep", explicit, None, 1).unwrap();
        let (_, b) = resolve("ghz-sweep", GhzSweepParams::default(), None, 1).unwrap();
        let (_, c) = resolve("ghz-sweep", GhzSweepParams::default(), None, 2).unwrap();
        assert_eq!(sha256_hex(&a), sha256_hex(&b));
        assert_ne!(sha256_hex(&a), sha256_hex(&c));
    }
}
