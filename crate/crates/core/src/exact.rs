//! Exact two-stage curation dynamics on a finite state space.
//!
//! One iteration tilts the current distribution by the first curator's BT
//! weight, takes the tilted distribution as the retrained model, and tilts
//! that by the second curator's weight.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;


use crate::bt::{self, BtParams, BtWeights, RewardLevels};
use crate::reward::{argmax_set, classify_regime, conditional_argmax, RegimeLabel, RewardField, DEFAULT_ARGMAX_EPS};
use crate::seed::derive_seed;
use crate::space::{Region, StateSpace};
use crate::{Error, Result};

const NORM_TOL: f64 = 1e-12;

/// Probability weights over an enumerated state space.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDistribution {
    weights: Vec<f64>,
}

impl DiscreteDistribution {
    /// Normalizes `weights`; rejects negative, non-finite or all-zero input.
    pub fn new(mut weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::EmptyInput("distribution weights"));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidParameter("weights must be finite and non-negative".into()));
        }
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(Error::DegenerateMass(total));
        }
        if (total - 1.0).abs() > NORM_TOL {
            weights.iter_mut().for_each(|w| *w /= total);
        }
        Ok(DiscreteDistribution { weights })
    }

    pub(crate) fn from_normalized(weights: Vec<f64>) -> Self {
        DiscreteDistribution { weights }
    }

    pub fn uniform(n: usize) -> Self {
        DiscreteDistribution { weights: vec![1.0 / n as f64; n] }
    }

    pub fn point_mass(n: usize, at: usize) -> Self {
        let mut weights = vec![0.0; n];
        weights[at] = 1.0;
        DiscreteDistribution { weights }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn mass(&self, region: &Region) -> f64 {
        region.iter().filter_map(|i| self.weights.get(i)).sum()
    }

    /// States carrying more than `threshold` mass.
    pub fn support(&self, threshold: f64) -> Region {
        Region::new(
            (0..self.len()).filter(|&i| self.weights[i] > threshold).collect(),
            self.len(),
        )
        .expect("indices in range")
    }

    /// This distribution conditioned on `region`.
    pub fn renormalized_on(&self, region: &Region) -> Result<Self> {
        if region.is_empty() {
            return Err(Error::EmptyRegion);
        }
        let mut w = vec![0.0; self.len()];
        for i in region.iter() {
            if i >= self.len() {
                return Err(Error::RegionIndex { index: i, len: self.len() });
            }
            w[i] = self.weights[i];
        }
        Self::new(w)
    }

    /// `E_p[f]` for per-state values `f`.
    pub fn expectation(&self, values: &[f64]) -> f64 {
        self.weights.iter().zip(values).map(|(p, v)| p * v).sum()
    }
}

/// Which curator acts first in each iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Order {
    #[default]
    OwnerFirst,
    PublicFirst,
}

impl Order {
    pub fn name(&self) -> &'static str {
        match self {
            Order::OwnerFirst => "owner-first",
            Order::PublicFirst => "public-first",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExactRunConfig {
    pub space: StateSpace,
    pub owner: RewardField,
    pub public: RewardField,
    /// Owner pool size K.
    pub owner_pool: usize,
    /// Public pool size M.
    pub public_pool: usize,
    pub temperature: f64,
    pub iterations: usize,
    pub initial: DiscreteDistribution,
    pub order: Order,
    /// Monte Carlo pools per weight evaluation when a pool size exceeds 2.
    pub mc_samples: usize,
    pub seed: u64,
    pub argmax_eps: f64,
}

impl ExactRunConfig {
    /// K = M = 2, tau = 1, uniform start, Owner first.
    pub fn new(space: StateSpace, owner: RewardField, public: RewardField, iterations: usize) -> Self {
        let n = space.len();
        ExactRunConfig {
            space,
            owner,
            public,
            owner_pool: 2,
            public_pool: 2,
            temperature: 1.0,
            iterations,
            initial: DiscreteDistribution::uniform(n),
            order: Order::OwnerFirst,
            mc_samples: 10_000,
            seed: 0,
            argmax_eps: DEFAULT_ARGMAX_EPS,
        }
    }

    pub fn with_order(mut self, order: Order) -> Self {
        self.order = order;
        self
    }

    pub fn with_initial(mut self, initial: DiscreteDistribution) -> Self {
        self.initial = initial;
        self
    }

    pub fn with_iterations(mut self, iterations: usize) -> Self {
        self.iterations = iterations;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.initial.len() != self.space.len() {
            return Err(Error::SupportMismatch { expected: self.space.len(), got: self.initial.len() });
        }
        self.owner.validate_for(&self.space)?;
        self.public.validate_for(&self.space)?;
        for pool in [self.owner_pool, self.public_pool] {
            BtParams { pool_size: pool, temperature: self.temperature, mc_samples: self.mc_samples, seed: 0 }
                .validate()?;
        }
        if !(self.argmax_eps >= 0.0) {
            return Err(Error::InvalidParameter(format!("argmax eps {} < 0", self.argmax_eps)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Agent {
    Owner,
    Public,
}

/// A validated run with per-agent reward levels precomputed.
#[derive(Debug, Clone)]
pub struct ExactDynamics<'a> {
    cfg: &'a ExactRunConfig,
    owner: RewardLevels,
    public: RewardLevels,
}

impl<'a> ExactDynamics<'a> {
    pub fn new(cfg: &'a ExactRunConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(ExactDynamics {
            cfg,
            owner: RewardLevels::from_field(&cfg.owner, &cfg.space),
            public: RewardLevels::from_field(&cfg.public, &cfg.space),
        })
    }

    fn weights(&self, p: &DiscreteDistribution, agent: Agent, iteration: usize) -> Result<BtWeights> {
        let (levels, pool, label) = match agent {
            Agent::Owner => (&self.owner, self.cfg.owner_pool, "owner"),
            Agent::Public => (&self.public, self.cfg.public_pool, "public"),
        };
        if pool == 2 {
            Ok(bt::pairwise_weights_on_support(p, levels, self.cfg.temperature))
        } else {
            let params = BtParams {
                pool_size: pool,
                temperature: self.cfg.temperature,
                mc_samples: self.cfg.mc_samples,
                seed: derive_seed(self.cfg.seed, &format!("exact/{iteration}/{label}")),
            };
            bt::mc_weights(p, levels, &params)
        }
    }

    /// One iteration; `iteration` only seeds Monte Carlo weights.
    pub fn step(&self, p: &DiscreteDistribution, iteration: usize) -> Result<DiscreteDistribution> {
        let (first, second) = match self.cfg.order {
            Order::OwnerFirst => (Agent::Owner, Agent::Public),
            Order::PublicFirst => (Agent::Public, Agent::Owner),
        };
        let curated = bt::tilt(p, &self.weights(p, first, iteration)?)?;
        // Retraining reproduces the curated distribution exactly.
        let model = curated;
        bt::tilt(&model, &self.weights(&model, second, iteration)?)
    }

    /// Iterates from the configured start, calling `observe(t, p_t)` for
    /// `t = 0..=T`, and returns `p_T`.
    pub fn run_with(&self, mut observe: impl FnMut(usize, &DiscreteDistribution)) -> Result<DiscreteDistribution> {
        let mut p = self.cfg.initial.clone();
        observe(0, &p);
        for t in 1..=self.cfg.iterations {
            p = self.step(&p, t)?;
            observe(t, &p);
        }
        Ok(p)
    }
}

/// A single iteration under `cfg`.
pub fn step(p: &DiscreteDistribution, cfg: &ExactRunConfig) -> Result<DiscreteDistribution> {
    ExactDynamics::new(cfg)?.step(p, 1)
}

/// Full trajectory `p_0, ..., p_T`.
pub fn run(cfg: &ExactRunConfig) -> Result<Vec<DiscreteDistribution>> {
    let dynamics = ExactDynamics::new(cfg)?;
    let mut out = Vec::with_capacity(cfg.iterations + 1);
    dynamics.run_with(|_, p| out.push(p.clone()))?;
    Ok(out)
}

/// Only `p_T`.
pub fn run_final(cfg: &ExactRunConfig) -> Result<DiscreteDistribution> {
    ExactDynamics::new(cfg)?.run_with(|_, _| {})
}

/// Maximizer sets and the predicted limit of a configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitPrediction {
    pub regime: RegimeLabel,
    pub owner_set: Region,
    pub public_set: Region,
    /// Support of the limit: `A_star`, `A_shared`, `A_{P|O}` or `A_{O|P}`.
    pub target: Region,
    pub limit: DiscreteDistribution,
}

pub fn predicted_limit(cfg: &ExactRunConfig) -> Result<LimitPrediction> {
    cfg.validate()?;
    let owner_set = argmax_set(&cfg.owner, &cfg.space, cfg.argmax_eps);
    let public_set = argmax_set(&cfg.public, &cfg.space, cfg.argmax_eps);
    let regime = classify_regime(&owner_set, &public_set)?;
    let target = match (regime, cfg.order) {
        (RegimeLabel::Perfect, _) => owner_set.clone(),
        (RegimeLabel::Partial, _) => owner_set.intersection(&public_set),
        (RegimeLabel::Disjoint, Order::OwnerFirst) => {
            conditional_argmax(&cfg.public, &owner_set, &cfg.space, cfg.argmax_eps)?
        }
        (RegimeLabel::Disjoint, Order::PublicFirst) => {
            conditional_argmax(&cfg.owner, &public_set, &cfg.space, cfg.argmax_eps)?
        }
    };
    let limit = cfg.initial.renormalized_on(&target)?;
    Ok(LimitPrediction { regime, owner_set, public_set, target, limit })
}
