//! Running an experiment and recording what it produced.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use anyhow::Context as _;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{ConfigError, Experiment, ExperimentConfig};
use crate::experiments::{run_experiment, Context, Outcome};

pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FileRecord {
    /// Relative to the output directory.
    pub path: PathBuf,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub experiment: Experiment,
    pub config: ExperimentConfig,
    pub code_version: String,
    pub started_at: String,
    pub finished_at: String,
    pub files: Vec<FileRecord>,
    pub passed: bool,
    /// Why the run failed: an error, or the names of the failed checks.
    pub failure: Option<String>,
    pub outcome: Option<Outcome>,
}

impl RunManifest {
    pub fn read(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn write(&self, dir: &Path) -> anyhow::Result<PathBuf> {
        let path = dir.join(MANIFEST_NAME);
        let mut w = BufWriter::new(File::create(&path)?);
        serde_json::to_writer_pretty(&mut w, self)?;
        w.write_all(b"\n")?;
        w.flush()?;
        Ok(path)
    }

    pub fn checksum(&self, name: &str) -> Option<&str> {
        self.files
            .iter()
            .find(|f| f.path == Path::new(name))
            .map(|f| f.sha256.as_str())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("cannot prepare output directory: {0:#}")]
    Output(anyhow::Error),
}

pub fn sha256_file(path: &Path) -> std::io::Result<(String, u64)> {
    let mut f = File::open(path)?;
    let mut hasher = Sha256::new();
    let mut buf = [0u8; 1 << 16];
    let mut total = 0u64;
    loop {
        let n = f.read(&mut buf)?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
        total += n as u64;
    }
    Ok((hex::encode(hasher.finalize()), total))
}

fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

/// Validates the config, runs the experiment with the configured number of
/// workers and writes `manifest.json` into the output directory.
///
/// Only config and output-directory problems are returned as errors; a
/// failing or crashing experiment still yields a manifest with the reason.
pub fn run(cfg: &ExperimentConfig) -> Result<RunManifest, RunError> {
    cfg.validate()?;
    let dir = cfg.output_dir.clone();
    let mut ctx = Context::new(&dir).map_err(RunError::Output)?;
    let started_at = now();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| RunError::Output(e.into()))?;
    let result = pool.install(|| run_experiment(cfg, &mut ctx));
    let mut files = Vec::new();
    let mut hash_error = None;
    for rel in ctx.files() {
        match sha256_file(&dir.join(rel)) {
            Ok((sha256, bytes)) => files.push(FileRecord {
                path: rel.clone(),
                sha256,
                bytes,
            }),
            Err(e) => hash_error = Some(format!("checksum of {}: {e}", rel.display())),
        }
    }
    let (passed, failure, outcome) = match result {
        Ok(o) if hash_error.is_none() => {
            let failed = o.failed_checks();
            let failure = if o.passed() {
                None
            } else if failed.is_empty() {
                Some("no checks were evaluated".to_string())
            } else {
                Some(format!("failed checks: {}", failed.join(", ")))
            };
            (o.passed(), failure, Some(o))
        }
        Ok(o) => (false, hash_error, Some(o)),
        Err(e) => (false, Some(format!("{e:#}")), None),
    };
    let manifest = RunManifest {
        experiment: cfg.experiment,
        config: cfg.clone(),
        code_version: env!("CARGO_PKG_VERSION").to_string(),
        started_at,
        finished_at: now(),
        files,
        passed,
        failure,
        outcome,
    };
    manifest.write(&dir).map_err(RunError::Output)?;
    Ok(manifest)
}
