//! Sampled curation loop: Owner tournaments over the dataset, a Gaussian
//! mixture fitted to the Owner's picks, Public tournaments over the mixture's
//! samples, and the Public's picks appended to the dataset.

use alloc::format;
use alloc::vec::Vec;

use rand::Rng;

use crate::bt::{tournament_select, BtParams};
use crate::diagnostics::{DiagnosticContext, TrajectoryRecord};
use crate::exact::{predicted_limit, ExactRunConfig};
use crate::gmm::{self, EmConfig, GaussianMixture};
use crate::reward::RewardField;
use crate::seed::{derive_seed, stage_rng};
use crate::space::{StatePoint, StateSpace};
use crate::{Error, Result};

/// How public-curated points enter the dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Accumulation {
    #[default]
    Accumulate,
    /// Keep only points added during the last `W` iterations; the initial
    /// data ages out once `t >= W`.
    Window(usize),
}

/// Which points the mean-distance columns average over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DistanceScope {
    /// Points appended in the current iteration.
    #[default]
    Appended,
    /// The whole dataset after the update.
    Dataset,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParticleRunConfig {
    pub init_n: usize,
    /// Initial points are uniform over `[lo, hi]^2`.
    pub bounds: (f64, f64),
    pub owner_select_n: usize,
    pub gen_n: usize,
    pub public_select_n: usize,
    pub iterations: usize,
    pub owner_pool: usize,
    pub public_pool: usize,
    pub temperature: f64,
    pub em: EmConfig,
    pub accumulation: Accumulation,
    pub distance_scope: DistanceScope,
    /// Points per side of the grid that clouds are binned on for diagnostics.
    pub analysis_resolution: usize,
    pub seed: u64,
}

impl Default for ParticleRunConfig {
    fn default() -> Self {
        ParticleRunConfig {
            init_n: 1000,
            bounds: (-5.0, 5.0),
            owner_select_n: 100,
            gen_n: 200,
            public_select_n: 50,
            iterations: 100,
            owner_pool: 10,
            public_pool: 2,
            temperature: 0.5,
            em: EmConfig::default(),
            accumulation: Accumulation::Accumulate,
            distance_scope: DistanceScope::Appended,
            analysis_resolution: 61,
            seed: 0,
        }
    }
}

impl ParticleRunConfig {
    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("init_n", self.init_n),
            ("owner_select_n", self.owner_select_n),
            ("gen_n", self.gen_n),
            ("public_select_n", self.public_select_n),
            ("iterations", self.iterations),
        ];
        for (name, v) in counts {
            if v == 0 {
                return Err(Error::InvalidParameter(format!("{name} must be at least 1")));
            }
        }
        if let Accumulation::Window(0) = self.accumulation {
            return Err(Error::InvalidParameter("window must be at least 1".into()));
        }
        BtParams::new(self.owner_pool, self.temperature).validate()?;
        BtParams::new(self.public_pool, self.temperature).validate()?;
        self.em.validate()?;
        self.analysis_space().map(|_| ())
    }

    pub fn analysis_space(&self) -> Result<StateSpace> {
        StateSpace::square(self.bounds.0, self.bounds.1, self.analysis_resolution)
    }
}

/// The evolving dataset `D_t`, with the iteration each point was added in.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleDataset {
    points: Vec<StatePoint>,
    tags: Vec<usize>,
}

impl ParticleDataset {
    pub fn points(&self) -> &[StatePoint] {
        &self.points
    }

    pub fn tags(&self) -> &[usize] {
        &self.tags
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Number of points still present from the initial data.
    pub fn initial_count(&self) -> usize {
        self.tags.iter().take_while(|&&t| t == 0).count()
    }

    fn append(&mut self, points: &[StatePoint], iteration: usize) {
        self.points.extend_from_slice(points);
        self.tags.extend(core::iter::repeat_n(iteration, points.len()));
    }

    fn drop_older_than(&mut self, iteration: usize, window: usize) {
        let keep_from = self.tags.partition_point(|&t| iteration - t >= window);
        self.points.drain(..keep_from);
        self.tags.drain(..keep_from);
    }
}

/// Everything produced in one iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationArtifacts {
    pub iteration: usize,
    pub owner_curated: Vec<StatePoint>,
    pub mixture: GaussianMixture,
    pub generated: Vec<StatePoint>,
    /// Indices into `generated` of the Public's picks.
    pub public_picks: Vec<usize>,
    pub public_curated: Vec<StatePoint>,
}

/// `init_n` iid uniform points over the box, tagged 0.
pub fn init_dataset(cfg: &ParticleRunConfig) -> Result<ParticleDataset> {
    cfg.validate()?;
    let mut rng = stage_rng(cfg.seed, "particle/init");
    let (lo, hi) = cfg.bounds;
    let points: Vec<StatePoint> = (0..cfg.init_n)
        .map(|_| StatePoint::real2(rng.random_range(lo..=hi), rng.random_range(lo..=hi)))
        .collect();
    Ok(ParticleDataset { tags: alloc::vec![0; points.len()], points })
}

fn rewards_of(field: &RewardField, space: &StateSpace, points: &[StatePoint]) -> Vec<f64> {
    points.iter().map(|x| field.evaluate(space, x)).collect()
}

/// One pass of the loop, updating `data` in place.
pub fn iterate(
    data: &mut ParticleDataset,
    cfg: &ParticleRunConfig,
    owner: &RewardField,
    public: &RewardField,
    iteration: usize,
) -> Result<IterationArtifacts> {
    if data.is_empty() {
        return Err(Error::EmptyInput("particle dataset"));
    }
    let space = cfg.analysis_space()?;
    let stage = |name: &str| format!("particle/{iteration}/{name}");

    let owner_params = BtParams::new(cfg.owner_pool, cfg.temperature);
    let owner_rewards = rewards_of(owner, &space, &data.points);
    let picks = tournament_select(&owner_rewards, &owner_params, cfg.owner_select_n, &mut stage_rng(cfg.seed, &stage("owner")))?;
    let owner_curated: Vec<StatePoint> = picks.iter().map(|&i| data.points[i]).collect();

    let em = EmConfig { seed: derive_seed(cfg.seed, &stage("gmm")), ..cfg.em.clone() };
    let mixture = gmm::fit(&owner_curated, &em)?.mixture;
    let generated = gmm::sample_with(&mixture, cfg.gen_n, &mut stage_rng(cfg.seed, &stage("generate")));

    let public_params = BtParams::new(cfg.public_pool, cfg.temperature);
    let public_rewards = rewards_of(public, &space, &generated);
    let public_picks =
        tournament_select(&public_rewards, &public_params, cfg.public_select_n, &mut stage_rng(cfg.seed, &stage("public")))?;
    let public_curated: Vec<StatePoint> = public_picks.iter().map(|&i| generated[i]).collect();

    data.append(&public_curated, iteration);
    if let Accumulation::Window(w) = cfg.accumulation {
        data.drop_older_than(iteration, w);
    }
    Ok(IterationArtifacts { iteration, owner_curated, mixture, generated, public_picks, public_curated })
}

/// Diagnostics context for particle runs: the analysis grid with a uniform
/// start, matching the uniform initial dataset.
pub fn particle_context(cfg: &ParticleRunConfig, owner: &RewardField, public: &RewardField) -> Result<DiagnosticContext> {
    let space = cfg.analysis_space()?;
    let exact = ExactRunConfig::new(space.clone(), owner.clone(), public.clone(), 1);
    let prediction = predicted_limit(&exact)?;
    DiagnosticContext::new(&space, owner, public, &prediction, space.cell_size())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParticleRun {
    pub records: Vec<TrajectoryRecord>,
    pub dataset: ParticleDataset,
}

/// Runs `cfg.iterations` iterations, calling `observe` after each update.
pub fn run_particles_with(
    cfg: &ParticleRunConfig,
    owner: &RewardField,
    public: &RewardField,
    mut observe: impl FnMut(&IterationArtifacts, &ParticleDataset),
) -> Result<ParticleRun> {
    cfg.validate()?;
    let ctx = particle_context(cfg, owner, public)?;
    let mut data = init_dataset(cfg)?;
    let mut records = Vec::with_capacity(cfg.iterations);
    for t in 1..=cfg.iterations {
        let art = iterate(&mut data, cfg, owner, public, t)?;
        let distance_points = match cfg.distance_scope {
            DistanceScope::Appended => art.public_curated.as_slice(),
            DistanceScope::Dataset => data.points(),
        };
        records.push(ctx.cloud_record(t, &art.public_curated, distance_points)?);
        observe(&art, &data);
    }
    Ok(ParticleRun { records, dataset: data })
}

pub fn run_particles(cfg: &ParticleRunConfig, owner: &RewardField, public: &RewardField) -> Result<ParticleRun> {
    run_particles_with(cfg, owner, public, |_, _| {})
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(seed: u64) -> ParticleRunConfig {
        ParticleRunConfig { iterations: 3, seed, ..Default::default() }
    }

    fn disk(c: [f64; 2]) -> RewardField {
        RewardField::circular(c, 1.0).unwrap()
    }

    #[test]
    fn init_is_uniform_in_box_and_seeded() {
        let cfg = small(1);
        let d = init_dataset(&cfg).unwrap();
        assert_eq!(d.len(), 1000);
        assert!(d.points().iter().all(|p| {
            let (c, _) = p.coords();
            (-5.0..=5.0).contains(&c[0]) && (-5.0..=5.0).contains(&c[1])
        }));
        assert_eq!(d, init_dataset(&cfg).unwrap());
        let n = d.len() as f64;
        let mx = d.points().iter().map(|p| p.coords().0[0]).sum::<f64>() / n;
        let my = d.points().iter().map(|p| p.coords().0[1]).sum::<f64>() / n;
        assert!(mx.abs() < 0.3 && my.abs() < 0.3);
    }

    #[test]
    fn neutral_curation_grows_by_public_count() {
        let cfg = small(2);
        let flat = RewardField::circular([0.0, 0.0], 100.0).unwrap();
        let mut d = init_dataset(&cfg).unwrap();
        let art = iterate(&mut d, &cfg, &flat, &flat, 1).unwrap();
        assert_eq!(d.len(), 1050);
        assert_eq!(art.public_curated.len(), 50);
        assert_eq!(&d.points()[1000..], art.public_curated.as_slice());
    }

    #[test]
    fn window_mode_drops_initial_data() {
        let cfg = ParticleRunConfig { iterations: 4, accumulation: Accumulation::Window(2), seed: 3, ..Default::default() };
        let mut d = init_dataset(&cfg).unwrap();
        let (o, p) = (disk([0.0, 0.0]), disk([1.5, 0.0]));
        for t in 1..=4 {
            iterate(&mut d, &cfg, &o, &p, t).unwrap();
            if t >= 2 {
                assert_eq!(d.initial_count(), 0);
                assert_eq!(d.len(), 100);
                assert!(d.tags().iter().all(|&tag| t - tag < 2));
            }
        }
    }

    #[test]
    fn provenance_and_tags() {
        let cfg = small(4);
        let (o, p) = (disk([0.0, 0.0]), disk([3.0, 0.0]));
        let mut d = init_dataset(&cfg).unwrap();
        for t in 1..=3 {
            let art = iterate(&mut d, &cfg, &o, &p, t).unwrap();
            for (&i, x) in art.public_picks.iter().zip(&art.public_curated) {
                assert_eq!(art.generated[i], *x);
            }
            assert_eq!(art.generated.len(), 200);
            assert_eq!(art.owner_curated.len(), 100);
        }
        assert!(d.tags().windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn run_emits_one_record_per_iteration() {
        let cfg = ParticleRunConfig { iterations: 1, ..Default::default() };
        let run = run_particles(&cfg, &disk([0.0, 0.0]), &disk([0.0, 0.0])).unwrap();
        assert_eq!(run.records.len(), 1);
        assert_eq!(run.records[0].iteration, 1);
        assert!(run.records[0].in_range());
    }

    #[test]
    fn empty_dataset_errors() {
        let cfg = small(0);
        let mut d = ParticleDataset { points: Vec::new(), tags: Vec::new() };
        assert!(iterate(&mut d, &cfg, &disk([0.0, 0.0]), &disk([0.0, 0.0]), 1).is_err());
        let bad = ParticleRunConfig { gen_n: 0, ..Default::default() };
        assert!(bad.validate().is_err());
    }
}
