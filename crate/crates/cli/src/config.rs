//! Run configuration files.
//!
//! A config is a TOML document with one table per module:
//!
//! ```toml
//! name = "partial-2d"
//! mode = "exact"          # or "particle"
//! seed = 0
//!
//! [space]
//! kind = "grid"           # or "alphabet" with integer lo/hi
//! lo = -5.0
//! hi = 5.0
//! resolution = 61
//!
//! [owner]
//! kind = "circular"       # "range" takes lo/hi labels, "tabular" takes values
//! center = [0.0, 0.0]
//! radius = 1.0
//! slope = 2.0
//!
//! [public]
//! kind = "circular"
//! center = [1.5, 0.0]
//! radius = 1.0
//! slope = 2.0
//!
//! [exact]
//! iterations = 200
//! owner_pool = 2
//! public_pool = 2
//! temperature = 1.0
//! order = "owner-first"   # or "public-first"
//! initial = "uniform"     # or "ramp"
//! mc_samples = 10000
//!
//! [particle]
//! iterations = 100
//! init_n = 1000
//! owner_select_n = 100
//! gen_n = 200
//! public_select_n = 50
//! owner_pool = 10
//! public_pool = 2
//! temperature = 0.5
//! window = 0              # 0 accumulates, W > 0 keeps the last W iterations
//! distance_scope = "appended"  # or "dataset"
//!
//! [gmm]
//! n_components = 5
//! max_iters = 200
//! tol = 1e-6
//! cov_floor = 1e-6
//!
//! [output]
//! kde_bandwidth = 0.0     # 0 uses Scott's rule
//! kde_resolution = 61
//! points = true
//! ```
//!
//! Every key has a default, so a file only needs the parts that differ from
//! the built-in values. Parsing then serializing a config is idempotent.

use std::path::Path;

use serde::{Deserialize, Serialize};

use curation_core::exact::ExactRunConfig;
use curation_core::gmm::EmConfig;
use curation_core::particle::{Accumulation, DistanceScope, ParticleRunConfig};
use curation_core::scenario::{self, Scenario};
use curation_core::{DiscreteDistribution, Order, RewardField, StateSpace};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    #[default]
    Exact,
    Particle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SpaceConfig {
    Grid { lo: f64, hi: f64, resolution: usize },
    Alphabet { lo: i64, hi: i64 },
}

impl Default for SpaceConfig {
    fn default() -> Self {
        SpaceConfig::Grid { lo: scenario::BOX_LO, hi: scenario::BOX_HI, resolution: scenario::GRID_RESOLUTION_2D }
    }
}

impl SpaceConfig {
    pub fn build(&self) -> CliResult<StateSpace> {
        Ok(match *self {
            SpaceConfig::Grid { lo, hi, resolution } => StateSpace::square(lo, hi, resolution)?,
            SpaceConfig::Alphabet { lo, hi } => StateSpace::alphabet_range(lo, hi)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RewardConfig {
    Circular {
        center: [f64; 2],
        radius: f64,
        #[serde(default = "default_slope")]
        slope: f64,
    },
    Range {
        lo: i64,
        hi: i64,
        #[serde(default = "default_slope")]
        slope: f64,
    },
    Tabular {
        values: Vec<f64>,
    },
}

fn default_slope() -> f64 {
    curation_core::reward::DEFAULT_SLOPE
}

impl RewardConfig {
    pub fn build(&self) -> CliResult<RewardField> {
        Ok(match self {
            RewardConfig::Circular { center, radius, slope } => RewardField::circular_with_slope(*center, *radius, *slope)?,
            RewardConfig::Range { lo, hi, slope } => RewardField::range_with_slope(*lo, *hi, *slope)?,
            RewardConfig::Tabular { values } => RewardField::tabular(values.clone())?,
        })
    }

    pub fn from_field(field: &RewardField) -> Self {
        match field {
            RewardField::Circular { center, radius, slope } => {
                RewardConfig::Circular { center: *center, radius: *radius, slope: *slope }
            }
            RewardField::Range { lo, hi, slope } => RewardConfig::Range { lo: *lo, hi: *hi, slope: *slope },
            RewardField::Tabular { values } => RewardConfig::Tabular { values: values.clone() },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum InitialConfig {
    #[default]
    Uniform,
    /// Weights proportional to 1, 2, ..., n in enumeration order.
    Ramp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum OrderConfig {
    #[default]
    OwnerFirst,
    PublicFirst,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExactSection {
    pub iterations: usize,
    pub owner_pool: usize,
    pub public_pool: usize,
    pub temperature: f64,
    pub order: OrderConfig,
    pub initial: InitialConfig,
    pub mc_samples: usize,
}

impl Default for ExactSection {
    fn default() -> Self {
        ExactSection {
            iterations: scenario::EXACT_ITERATIONS_GRID,
            owner_pool: 2,
            public_pool: 2,
            temperature: 1.0,
            order: OrderConfig::OwnerFirst,
            initial: InitialConfig::Uniform,
            mc_samples: 10_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum DistanceScopeConfig {
    #[default]
    Appended,
    Dataset,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParticleSection {
    pub iterations: usize,
    pub init_n: usize,
    pub owner_select_n: usize,
    pub gen_n: usize,
    pub public_select_n: usize,
    pub owner_pool: usize,
    pub public_pool: usize,
    pub temperature: f64,
    /// 0 accumulates every iteration; `W > 0` keeps the last `W`.
    pub window: usize,
    pub distance_scope: DistanceScopeConfig,
}

impl Default for ParticleSection {
    fn default() -> Self {
        let d = ParticleRunConfig::default();
        ParticleSection {
            iterations: d.iterations,
            init_n: d.init_n,
            owner_select_n: d.owner_select_n,
            gen_n: d.gen_n,
            public_select_n: d.public_select_n,
            owner_pool: d.owner_pool,
            public_pool: d.public_pool,
            temperature: d.temperature,
            window: 0,
            distance_scope: DistanceScopeConfig::Appended,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GmmSection {
    pub n_components: usize,
    pub max_iters: usize,
    pub tol: f64,
    pub cov_floor: f64,
}

impl Default for GmmSection {
    fn default() -> Self {
        let d = EmConfig::default();
        GmmSection { n_components: d.n_components, max_iters: d.max_iters, tol: d.tol, cov_floor: d.cov_floor }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    /// Fixed KDE bandwidth; 0 selects Scott's rule.
    pub kde_bandwidth: f64,
    /// Points per side of the KDE grid over the space's box.
    pub kde_resolution: usize,
    /// Write per-iteration point clouds in particle mode.
    pub points: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection { kde_bandwidth: 0.0, kde_resolution: scenario::GRID_RESOLUTION_2D, points: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub mode: Mode,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub space: SpaceConfig,
    pub owner: RewardConfig,
    pub public: RewardConfig,
    #[serde(default)]
    pub exact: ExactSection,
    #[serde(default)]
    pub particle: ParticleSection,
    #[serde(default)]
    pub gmm: GmmSection,
    #[serde(default)]
    pub output: OutputSection,
}

impl RunConfig {
    pub fn from_scenario(s: &Scenario) -> Self {
        let space = match &s.space {
            StateSpace::Grid(g) => {
                let (lo, hi) = g.bounds()[0];
                SpaceConfig::Grid { lo, hi, resolution: g.resolution() }
            }
            StateSpace::Alphabet(a) => {
                let labels = a.labels();
                SpaceConfig::Alphabet { lo: labels[0], hi: labels[labels.len() - 1] }
            }
        };
        RunConfig {
            name: s.name.clone(),
            mode: Mode::Exact,
            seed: 0,
            space,
            owner: RewardConfig::from_field(&s.owner),
            public: RewardConfig::from_field(&s.public),
            exact: ExactSection { iterations: s.exact_iterations, ..Default::default() },
            particle: ParticleSection::default(),
            gmm: GmmSection::default(),
            output: OutputSection::default(),
        }
    }

    pub fn preset(name: &str) -> CliResult<Self> {
        scenario::preset(name)
            .map(|s| Self::from_scenario(&s))
            .ok_or_else(|| CliError::Usage(format!("unknown scenario '{name}' (known: {})", scenario::PRESET_NAMES.join(", "))))
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.scenario()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn scenario(&self) -> CliResult<Scenario> {
        let space = self.space.build()?;
        let owner = self.owner.build()?;
        let public = self.public.build()?;
        owner.validate_for(&space)?;
        public.validate_for(&space)?;
        Ok(Scenario { name: self.name.clone(), space, owner, public, exact_iterations: self.exact.iterations })
    }

    pub fn exact_config(&self) -> CliResult<ExactRunConfig> {
        let s = self.scenario()?;
        let e = &self.exact;
        let initial = match e.initial {
            InitialConfig::Uniform => DiscreteDistribution::uniform(s.space.len()),
            InitialConfig::Ramp => curation_core::checks::ramp_initial(s.space.len()),
        };
        let mut cfg = ExactRunConfig::new(s.space, s.owner, s.public, e.iterations)
            .with_initial(initial)
            .with_order(match e.order {
                OrderConfig::OwnerFirst => Order::OwnerFirst,
                OrderConfig::PublicFirst => Order::PublicFirst,
            });
        cfg.owner_pool = e.owner_pool;
        cfg.public_pool = e.public_pool;
        cfg.temperature = e.temperature;
        cfg.mc_samples = e.mc_samples;
        cfg.seed = self.seed;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn particle_config(&self) -> CliResult<ParticleRunConfig> {
        let SpaceConfig::Grid { lo, hi, resolution } = self.space else {
            return Err(CliError::Usage("particle mode needs a grid space".into()));
        };
        let p = &self.particle;
        let cfg = ParticleRunConfig {
            init_n: p.init_n,
            bounds: (lo, hi),
            owner_select_n: p.owner_select_n,
            gen_n: p.gen_n,
            public_select_n: p.public_select_n,
            iterations: p.iterations,
            owner_pool: p.owner_pool,
            public_pool: p.public_pool,
            temperature: p.temperature,
            em: EmConfig {
                n_components: self.gmm.n_components,
                max_iters: self.gmm.max_iters,
                tol: self.gmm.tol,
                cov_floor: self.gmm.cov_floor,
                seed: 0,
            },
            accumulation: if p.window == 0 { Accumulation::Accumulate } else { Accumulation::Window(p.window) },
            distance_scope: match p.distance_scope {
                DistanceScopeConfig::Appended => DistanceScope::Appended,
                DistanceScopeConfig::Dataset => DistanceScope::Dataset,
            },
            analysis_resolution: resolution,
            seed: self.seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Applies `--iterations` to the section of the active mode.
    pub fn set_iterations(&mut self, iterations: usize) {
        match self.mode {
            Mode::Exact => self.exact.iterations = iterations,
            Mode::Particle => self.particle.iterations = iterations,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_round_trip() {
        for name in scenario::PRESET_NAMES {
            let cfg = RunConfig::preset(name).unwrap();
            let text = cfg.to_toml();
            let back = RunConfig::parse(&text).unwrap();
            assert_eq!(back, cfg);
            assert_eq!(back.to_toml(), text);
        }
    }

    #[test]
    fn minimal_file_uses_defaults() {
        let cfg = RunConfig::parse(
            r#"
            [owner]
            kind = "circular"
            center = [0.0, 0.0]
            radius = 1.0
            [public]
            kind = "circular"
            center = [3.0, 0.0]
            radius = 1.0
            "#,
        )
        .unwrap();
        assert_eq!(cfg.mode, Mode::Exact);
        assert_eq!(cfg.particle.owner_pool, 10);
        let s = cfg.scenario().unwrap();
        assert_eq!(s.space.len(), 61 * 61);
        assert_eq!(s.public, scenario::disjoint_2d().public);
    }

    #[test]
    fn bad_configs() {
        assert!(matches!(RunConfig::parse("mode = 3"), Err(CliError::Config(_))));
        let mut cfg = RunConfig::preset("perfect-words").unwrap();
        cfg.owner = RewardConfig::Range { lo: 0, hi: 20, slope: 2.0 };
        assert!(RunConfig::parse(&cfg.to_toml()).is_err());
        assert!(matches!(RunConfig::preset("nope"), Err(CliError::Usage(_))));
        assert!(RunConfig::preset("perfect-words").unwrap().particle_config().is_err());
    }

    #[test]
    fn preset_parameters() {
        let cfg = RunConfig::preset("partial-2d").unwrap();
        let p = cfg.particle_config().unwrap();
        assert_eq!((p.init_n, p.owner_select_n, p.gen_n, p.public_select_n, p.iterations), (1000, 100, 200, 50, 100));
        assert_eq!(p.temperature, 0.5);
        assert_eq!(cfg.public, RewardConfig::Circular { center: [1.5, 0.0], radius: 1.0, slope: 2.0 });
    }
}
