//! Subcommand implementations. Each writes into an output directory and
//! returns what it wrote; printing is left to the binary.

use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use curation_core::checks::{self, CheckVerdict, TheoremId};
use curation_core::diagnostics::{kde_grid, Bandwidth, DiagnosticContext, KdeGrid};
use curation_core::exact::{predicted_limit, ExactDynamics};
use curation_core::particle::run_particles_with;
use curation_core::scenario::{self, Scenario};
use curation_core::{DiscreteDistribution, StatePoint, StateSpace};

use crate::config::{Mode, RunConfig};
use crate::error::{CliError, CliResult};
use crate::output::{self, CsvOut, RunManifest, SeedInfo};

fn ensure_dir(dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

/// Executes a run and writes its CSVs and manifest into `out`.
pub fn cmd_run(cfg: &RunConfig, out: &Path) -> CliResult<RunManifest> {
    let started = Instant::now();
    ensure_dir(out)?;
    let mut manifest = match cfg.mode {
        Mode::Exact => run_exact(cfg, out)?,
        Mode::Particle => run_particle(cfg, out)?,
    };
    manifest.duration_secs = started.elapsed().as_secs_f64();
    manifest.write(out)?;
    Ok(manifest)
}

fn run_exact(cfg: &RunConfig, out: &Path) -> CliResult<RunManifest> {
    let exact = cfg.exact_config()?;
    let prediction = predicted_limit(&exact)?;
    let ctx = DiagnosticContext::new(&exact.space, &exact.owner, &exact.public, &prediction, exact.space.cell_size())?;
    let labels: Option<Vec<i64>> = match &exact.space {
        StateSpace::Alphabet(a) => Some(a.labels().to_vec()),
        StateSpace::Grid(_) => None,
    };
    let mut dist_out = match labels {
        Some(_) => Some(CsvOut::create(&out.join(output::DISTRIBUTIONS_FILE), &output::DISTRIBUTIONS_HEADER)?),
        None => None,
    };
    let mut records = Vec::with_capacity(exact.iterations);
    let mut failure: Option<CliError> = None;
    let final_dist = ExactDynamics::new(&exact)?.run_with(|t, p| {
        if failure.is_some() {
            return;
        }
        let mut step = || -> CliResult<()> {
            if t > 0 {
                records.push(ctx.exact_record(t, p)?);
            }
            if let (Some(w), Some(labels)) = (dist_out.as_mut(), labels.as_ref()) {
                for (label, mass) in labels.iter().zip(p.weights()) {
                    w.row((t, label, mass))?;
                }
            }
            Ok(())
        };
        if let Err(e) = step() {
            failure = Some(e);
        }
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    output::write_trajectory(&out.join(output::TRAJECTORY_FILE), &records)?;
    let mut files = vec![output::TRAJECTORY_FILE];
    if let Some(w) = dist_out {
        w.finish()?;
        files.push(output::DISTRIBUTIONS_FILE);
    }
    if exact.space.is_grid() && exact.space.dim() == 2 {
        let kde = distribution_density(&final_dist, &exact.space);
        output::write_kde(&out.join(output::KDE_FILE), &exact.space, &kde)?;
        files.push(output::KDE_FILE);
    }
    let stages = if exact.owner_pool == 2 && exact.public_pool == 2 {
        Vec::new()
    } else {
        vec!["exact/{t}/owner".into(), "exact/{t}/public".into()]
    };
    let mut manifest = RunManifest::new("run", SeedInfo::new(cfg.seed, stages), Some(cfg.clone()));
    manifest.notes.insert("target_states".into(), prediction.target.len() as f64);
    manifest.notes.insert("final_tv_to_predicted".into(), records.last().map_or(f64::NAN, |r| r.tv_to_predicted));
    manifest.record_files(out, &files)?;
    Ok(manifest)
}

/// Final exact distribution as a density on its own grid.
fn distribution_density(p: &DiscreteDistribution, space: &StateSpace) -> KdeGrid {
    let vol = space.cell_volume();
    KdeGrid { density: p.weights().iter().map(|m| m / vol).collect(), bandwidth: [0.0, 0.0] }
}

fn run_particle(cfg: &RunConfig, out: &Path) -> CliResult<RunManifest> {
    let pcfg = cfg.particle_config()?;
    let s = cfg.scenario()?;
    let mut points_out = if cfg.output.points {
        Some(CsvOut::create(&out.join(output::POINTS_FILE), &output::POINTS_HEADER)?)
    } else {
        None
    };
    let mut last_generated: Vec<StatePoint> = Vec::new();
    let mut failure: Option<CliError> = None;
    let run = run_particles_with(&pcfg, &s.owner, &s.public, |art, _| {
        if let (Some(w), None) = (points_out.as_mut(), failure.as_ref()) {
            let t = art.iteration;
            let res = output::write_cloud(w, &art.owner_curated, t, "owner_curated")
                .and_then(|_| output::write_cloud(w, &art.generated, t, "generated"))
                .and_then(|_| output::write_cloud(w, &art.public_curated, t, "public_curated"));
            if let Err(e) = res {
                failure = Some(e);
            }
        }
        if art.iteration == pcfg.iterations {
            last_generated = art.generated.clone();
        }
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    output::write_trajectory(&out.join(output::TRAJECTORY_FILE), &run.records)?;
    let mut files = vec![output::TRAJECTORY_FILE];
    if let Some(w) = points_out {
        w.finish()?;
        files.push(output::POINTS_FILE);
    }
    let kde_space = StateSpace::square(pcfg.bounds.0, pcfg.bounds.1, cfg.output.kde_resolution)?;
    let bandwidth = if cfg.output.kde_bandwidth > 0.0 { Bandwidth::Fixed(cfg.output.kde_bandwidth) } else { Bandwidth::Scott };
    let kde = kde_grid(&last_generated, &kde_space, bandwidth)?;
    output::write_kde(&out.join(output::KDE_FILE), &kde_space, &kde)?;
    files.push(output::KDE_FILE);

    let stages = ["init", "{t}/owner", "{t}/gmm", "{t}/generate", "{t}/public"]
        .iter()
        .map(|s| format!("particle/{s}"))
        .collect();
    let mut manifest = RunManifest::new("run", SeedInfo::new(cfg.seed, stages), Some(cfg.clone()));
    manifest.notes.insert("kde_bandwidth_x".into(), kde.bandwidth[0]);
    manifest.notes.insert("kde_bandwidth_y".into(), kde.bandwidth[1]);
    manifest.notes.insert("final_dataset_size".into(), run.dataset.len() as f64);
    manifest.record_files(out, &files)?;
    Ok(manifest)
}

/// Parses `all` or a list of ids.
pub fn parse_ids(args: &[String]) -> CliResult<Vec<TheoremId>> {
    if args.is_empty() || args.iter().any(|a| a.eq_ignore_ascii_case("all")) {
        return Ok(TheoremId::ALL.to_vec());
    }
    args.iter()
        .map(|a| TheoremId::parse(a).ok_or_else(|| CliError::Usage(format!("unknown check id '{a}'"))))
        .collect()
}

/// One check, on the default scenarios or on the configured one.
pub fn run_one_check(id: TheoremId, cfg: Option<&RunConfig>) -> CliResult<CheckVerdict> {
    let Some(cfg) = cfg else {
        return Ok(checks::run_check(id)?);
    };
    let exact = cfg.exact_config()?;
    let s = cfg.scenario()?;
    Ok(match id {
        TheoremId::T1 => checks::consensus_collapse_on(&[exact])?,
        TheoremId::C1 => checks::check_mode_collapse()?,
        TheoremId::T2 => checks::intersection_survival_on(&[exact])?,
        TheoremId::T3 => checks::owner_dominance_on(&[exact])?,
        TheoremId::T4 => checks::check_impossibility_demo(&s)?,
        TheoremId::T5 => {
            let o = checks::default_misreports(&s.owner)?;
            let p = checks::default_misreports(&s.public)?;
            checks::strategyproofness_on(&[(s, o, p)])?
        }
        TheoremId::T6 => {
            let control = scenario::perfect_words().exact_config().with_iterations(checks::LIMIT_HORIZON);
            checks::influence_parity_on(&[exact.with_iterations(checks::LIMIT_HORIZON)], &control)?
        }
        TheoremId::R1 => checks::support_containment_on(&[exact])?,
    })
}

/// Runs the selected checks and writes `verdicts.csv`. Returns the verdicts
/// even when some fail; the caller maps failures to the exit code.
pub fn cmd_check(ids: &[TheoremId], cfg: Option<&RunConfig>, out: &Path) -> CliResult<Vec<CheckVerdict>> {
    ensure_dir(out)?;
    let started = Instant::now();
    let verdicts = ids.iter().map(|&id| run_one_check(id, cfg)).collect::<CliResult<Vec<_>>>()?;
    output::write_verdicts(&out.join(output::VERDICTS_FILE), &verdicts)?;
    let mut manifest = RunManifest::new("check", SeedInfo::new(cfg.map_or(0, |c| c.seed), Vec::new()), cfg.cloned());
    manifest.record_files(out, &[output::VERDICTS_FILE])?;
    manifest.duration_secs = started.elapsed().as_secs_f64();
    manifest.write(out)?;
    Ok(verdicts)
}

pub fn verdict_summary(verdicts: &[CheckVerdict]) -> String {
    let mut s = String::new();
    for v in verdicts {
        s.push_str(&format!("{:<3} {}  {}\n", v.id.name(), if v.passed { "PASS" } else { "FAIL" }, checks::evidence_summary(v)));
    }
    let passed = verdicts.iter().filter(|v| v.passed).count();
    s.push_str(&format!("{passed}/{} checks passed\n", verdicts.len()));
    s
}

/// Misreport grid for `sweep`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub scenarios: Vec<String>,
    /// Center shifts along x.
    pub shifts: Vec<f64>,
    /// Radius multipliers.
    pub scalings: Vec<f64>,
    pub iterations: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            scenarios: vec!["perfect-2d".into(), "partial-2d".into(), "disjoint-2d".into()],
            shifts: vec![-1.0, -0.5, 0.5, 1.0],
            scalings: vec![0.5, 2.0],
            iterations: checks::LIMIT_HORIZON,
        }
    }
}

impl SweepConfig {
    pub fn parse(text: &str) -> CliResult<Self> {
        let cfg: SweepConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> CliResult<()> {
        if self.scenarios.is_empty() {
            return Err(CliError::Config("sweep needs at least one scenario".into()));
        }
        if self.iterations == 0 {
            return Err(CliError::Config("sweep iterations must be at least 1".into()));
        }
        if self.shifts.iter().any(|s| !s.is_finite()) || self.scalings.iter().any(|k| !(k.is_finite() && *k > 0.0)) {
            return Err(CliError::Config("shifts must be finite and scalings positive".into()));
        }
        for s in &self.scenarios {
            self.scenario(s)?;
        }
        Ok(())
    }

    fn scenario(&self, name: &str) -> CliResult<Scenario> {
        let s = scenario::preset(name).ok_or_else(|| CliError::Config(format!("unknown scenario '{name}'")))?;
        if !s.is_2d() {
            return Err(CliError::Config(format!("'{name}' has no circular rewards to misreport")));
        }
        Ok(s)
    }

    pub fn labels(&self) -> Vec<String> {
        let mut out = vec!["truthful".to_string()];
        out.extend(self.shifts.iter().map(|s| format!("shift-x:{s:+}")));
        out.extend(self.scalings.iter().map(|k| format!("radius-x{k}")));
        out
    }
}

/// Writes `utilities.csv` with one row per (agent, own report, opponent
/// report) for every scenario, and returns the matrices.
pub fn cmd_sweep(cfg: &SweepConfig, out: &Path) -> CliResult<Vec<(String, checks::UtilityMatrix)>> {
    cfg.validate()?;
    ensure_dir(out)?;
    let started = Instant::now();
    let labels = cfg.labels();
    let mut w = CsvOut::create(&out.join(output::UTILITIES_FILE), &output::UTILITIES_HEADER)?;
    let mut all = Vec::new();
    for name in &cfg.scenarios {
        let s = cfg.scenario(name)?;
        let o = checks::misreports(&s.owner, &cfg.shifts, &cfg.scalings)?;
        let p = checks::misreports(&s.public, &cfg.shifts, &cfg.scalings)?;
        let m = checks::utility_matrix(&s, &o, &p, cfg.iterations)?;
        for i in 0..o.len() {
            for j in 0..p.len() {
                w.row((name, "owner", &labels[i], &labels[j], m.owner(i, j)))?;
            }
        }
        for j in 0..p.len() {
            for i in 0..o.len() {
                w.row((name, "public", &labels[j], &labels[i], m.public(i, j)))?;
            }
        }
        all.push((name.clone(), m));
    }
    w.finish()?;
    let mut manifest = RunManifest::new("sweep", SeedInfo::new(0, Vec::new()), None);
    manifest.record_files(out, &[output::UTILITIES_FILE])?;
    manifest.duration_secs = started.elapsed().as_secs_f64();
    manifest.write(out)?;
    Ok(all)
}

/// Particle runs of the three disk scenarios and exact runs of the three
/// word scenarios, one subdirectory each, for the figure renderer.
pub fn cmd_export_figures(seed: u64, out: &Path) -> CliResult<Vec<String>> {
    ensure_dir(out)?;
    let mut written = Vec::new();
    for (name, mode) in [
        ("perfect-2d", Mode::Particle),
        ("partial-2d", Mode::Particle),
        ("disjoint-2d", Mode::Particle),
        ("perfect-words", Mode::Exact),
        ("partial-words", Mode::Exact),
        ("disjoint-words", Mode::Exact),
    ] {
        let mut cfg = RunConfig::preset(name)?;
        cfg.mode = mode;
        cfg.seed = seed;
        cmd_run(&cfg, &out.join(name))?;
        written.push(name.to_string());
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids() {
        assert_eq!(parse_ids(&["all".into()]).unwrap().len(), 8);
        assert_eq!(parse_ids(&["T6".into()]).unwrap(), vec![TheoremId::T6]);
        assert!(matches!(parse_ids(&["T9".into()]), Err(CliError::Usage(_))));
    }

    #[test]
    fn sweep_config_validation() {
        let d = SweepConfig::default();
        assert_eq!(d.labels().len(), 7);
        assert!(SweepConfig::parse("scenarios = [\"perfect-words\"]").is_err());
        assert!(SweepConfig::parse("scalings = [-1.0]").is_err());
        assert!(SweepConfig::parse("shifts = \"x\"").is_err());
        assert!(SweepConfig::parse("scenarios = [\"partial-2d\"]\nshifts = []\nscalings = []").is_ok());
    }

    #[test]
    fn words_exact_run_writes_distributions() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = RunConfig::preset("disjoint-words").unwrap();
        cfg.exact.iterations = 20;
        let m = cmd_run(&cfg, dir.path()).unwrap();
        assert!(m.files.contains_key(output::DISTRIBUTIONS_FILE));
        let text = std::fs::read_to_string(dir.path().join(output::DISTRIBUTIONS_FILE)).unwrap();
        assert_eq!(text.lines().count(), 1 + 21 * 8);
        let traj = std::fs::read_to_string(dir.path().join(output::TRAJECTORY_FILE)).unwrap();
        assert_eq!(traj.lines().count(), 21);
        assert!(RunManifest::load(dir.path()).unwrap().mismatches(dir.path()).unwrap().is_empty());
    }

    #[test]
    fn t4_on_perfect_config_is_a_precondition_error() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = RunConfig::preset("perfect-words").unwrap();
        let err = cmd_check(&[TheoremId::T4], Some(&cfg), dir.path()).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }
}
