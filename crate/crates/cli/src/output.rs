//! CSV files and run manifests.
//!
//! | file | columns |
//! |------|---------|
//! | `trajectory.csv` | iteration, mass_outside_owner, mass_outside_public, mass_outside_target, mean_dist_owner, mean_dist_public, satisfaction_owner, satisfaction_public, tv_to_predicted |
//! | `points.csv` | x, y, iteration, stage (owner_curated, generated, public_curated) |
//! | `kde.csv` | x, y, density |
//! | `distributions.csv` | iteration, label, mass |
//! | `verdicts.csv` | theorem, passed, config_digest, evidence |
//! | `utilities.csv` | scenario, agent, own_report, opponent_report, utility |

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Read};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use curation_core::checks::CheckVerdict;
use curation_core::diagnostics::{KdeGrid, TrajectoryRecord};
use curation_core::{StatePoint, StateSpace};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

pub const TRAJECTORY_FILE: &str = "trajectory.csv";
pub const POINTS_FILE: &str = "points.csv";
pub const KDE_FILE: &str = "kde.csv";
pub const DISTRIBUTIONS_FILE: &str = "distributions.csv";
pub const VERDICTS_FILE: &str = "verdicts.csv";
pub const UTILITIES_FILE: &str = "utilities.csv";
pub const MANIFEST_FILE: &str = "manifest.toml";

pub const POINTS_HEADER: [&str; 4] = ["x", "y", "iteration", "stage"];
pub const KDE_HEADER: [&str; 3] = ["x", "y", "density"];
pub const DISTRIBUTIONS_HEADER: [&str; 3] = ["iteration", "label", "mass"];
pub const VERDICTS_HEADER: [&str; 4] = ["theorem", "passed", "config_digest", "evidence"];
pub const UTILITIES_HEADER: [&str; 5] = ["scenario", "agent", "own_report", "opponent_report", "utility"];

pub struct CsvOut {
    path: PathBuf,
    writer: csv::Writer<BufWriter<File>>,
}

impl CsvOut {
    pub fn create(path: &Path, header: &[&str]) -> CliResult<Self> {
        let file = File::create(path).map_err(|e| CliError::io(path, e))?;
        let mut out = CsvOut { path: path.to_path_buf(), writer: csv::Writer::from_writer(BufWriter::new(file)) };
        out.writer.write_record(header).map_err(|e| out.err(e))?;
        Ok(out)
    }

    fn err(&self, source: csv::Error) -> CliError {
        CliError::Csv { path: self.path.clone(), source }
    }

    pub fn row<T: Serialize>(&mut self, row: T) -> CliResult<()> {
        self.writer.serialize(row).map_err(|e| self.err(e))
    }

    pub fn finish(mut self) -> CliResult<()> {
        self.writer.flush().map_err(|e| CliError::io(&self.path, e))
    }
}

pub fn write_trajectory(path: &Path, records: &[TrajectoryRecord]) -> CliResult<()> {
    let mut out = CsvOut::create(path, &TrajectoryRecord::HEADER)?;
    for r in records {
        let v = r.values();
        out.row((r.iteration, v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7]))?;
    }
    out.finish()
}

/// Appends one cloud to `points.csv`.
pub fn write_cloud(out: &mut CsvOut, points: &[StatePoint], iteration: usize, stage: &str) -> CliResult<()> {
    for p in points {
        let (c, _) = p.coords();
        out.row((c[0], c[1], iteration, stage))?;
    }
    Ok(())
}

pub fn write_kde(path: &Path, grid: &StateSpace, kde: &KdeGrid) -> CliResult<()> {
    let mut out = CsvOut::create(path, &KDE_HEADER)?;
    for (i, d) in kde.density.iter().enumerate() {
        let (c, _) = grid.point(i).coords();
        out.row((c[0], c[1], d))?;
    }
    out.finish()
}

pub fn write_verdicts(path: &Path, verdicts: &[CheckVerdict]) -> CliResult<()> {
    let mut out = CsvOut::create(path, &VERDICTS_HEADER)?;
    for v in verdicts {
        let evidence: Vec<String> = v.evidence.iter().map(|(k, x)| format!("{k}={x:e}")).collect();
        out.row((v.id.name(), v.passed, &v.config_digest, evidence.join(";")))?;
    }
    out.finish()
}

pub fn sha256_file(path: &Path) -> CliResult<String> {
    let mut file = File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut hasher = Sha256::new();
    let mut buf = [0u8; 1 << 16];
    loop {
        let n = file.read(&mut buf).map_err(|e| CliError::io(path, e))?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hex::encode(hasher.finalize()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedInfo {
    pub root: u64,
    /// How stage seeds derive from the root.
    pub scheme: String,
    pub stages: Vec<String>,
}

impl SeedInfo {
    pub fn new(root: u64, stages: Vec<String>) -> Self {
        SeedInfo { root, scheme: "splitmix64(root ^ fnv1a64(label))".into(), stages }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub version: String,
    pub command: String,
    pub duration_secs: f64,
    pub seeds: SeedInfo,
    /// Output file name to hex SHA-256.
    pub files: BTreeMap<String, String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config: Option<RunConfig>,
    /// Extra values, such as the KDE bandwidth.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub notes: BTreeMap<String, f64>,
}

impl RunManifest {
    pub fn new(command: &str, seeds: SeedInfo, config: Option<RunConfig>) -> Self {
        RunManifest {
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            duration_secs: 0.0,
            seeds,
            files: BTreeMap::new(),
            config,
            notes: BTreeMap::new(),
        }
    }

    /// Hashes each named file in `dir`.
    pub fn record_files(&mut self, dir: &Path, names: &[&str]) -> CliResult<()> {
        for name in names {
            self.files.insert((*name).into(), sha256_file(&dir.join(name))?);
        }
        Ok(())
    }

    pub fn write(&self, dir: &Path) -> CliResult<()> {
        let path = dir.join(MANIFEST_FILE);
        let text = toml::to_string(self).map_err(|e| CliError::Config(e.to_string()))?;
        std::fs::write(&path, text).map_err(|e| CliError::io(path, e))
    }

    pub fn load(dir: &Path) -> CliResult<Self> {
        let path = dir.join(MANIFEST_FILE);
        let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    /// Names of files whose current checksum differs from the recorded one.
    pub fn mismatches(&self, dir: &Path) -> CliResult<Vec<String>> {
        let mut bad = Vec::new();
        for (name, sum) in &self.files {
            if &sha256_file(&dir.join(name))? != sum {
                bad.push(name.clone());
            }
        }
        Ok(bad)
    }
}
