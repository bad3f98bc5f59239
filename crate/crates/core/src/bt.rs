//! Bradley–Terry curation weights and tournament selection.
//!
//! The BT weight of a state `x` under distribution `p` is the expected K-way
//! score share of `x` against `K - 1` iid competitors from `p`:
//!
//! ```text
//! H(x) = E_{Y_1..Y_{K-1} ~ p} [ K e^{r(x)/tau} / (e^{r(x)/tau} + sum_j e^{r(Y_j)/tau}) ]
//! ```
//!
//! Multiplying `p` by `H` gives the distribution of tournament winners. For
//! `K = 2` the expectation is a finite sum and is computed exactly; larger
//! pools use seeded Monte Carlo.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::exact::DiscreteDistribution;
use crate::reward::RewardField;
use crate::seed::{rng_from_seed, SimRng};
use crate::space::StateSpace;
use crate::{Error, Result};

/// States whose tilted mass falls below this are flushed to zero.
pub const MASS_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BtParams {
    /// Pool size K (Owner) or M (Public).
    pub pool_size: usize,
    pub temperature: f64,
    /// Monte Carlo pools per weight evaluation when `pool_size > 2`.
    pub mc_samples: usize,
    pub seed: u64,
}

impl Default for BtParams {
    fn default() -> Self {
        BtParams { pool_size: 2, temperature: 1.0, mc_samples: 10_000, seed: 0 }
    }
}

impl BtParams {
    pub fn new(pool_size: usize, temperature: f64) -> Self {
        BtParams { pool_size, temperature, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.pool_size < 2 {
            return Err(Error::InvalidParameter(format!("pool size {} < 2", self.pool_size)));
        }
        if !(self.temperature > 0.0 && self.temperature.is_finite()) {
            return Err(Error::InvalidParameter(format!("temperature {} must be positive", self.temperature)));
        }
        if self.mc_samples == 0 {
            return Err(Error::InvalidParameter("mc_samples must be at least 1".into()));
        }
        Ok(())
    }
}

/// Per-state BT weights aligned with a distribution's support.
#[derive(Debug, Clone, PartialEq)]
pub struct BtWeights(pub Vec<f64>);

impl BtWeights {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `sum_x p(x) H(x)`; equals 1 for exact weights.
    pub fn expectation(&self, p: &DiscreteDistribution) -> f64 {
        p.weights().iter().zip(&self.0).map(|(a, b)| a * b).sum()
    }
}

/// States grouped by identical reward.
///
/// `H(x)` depends on `x` only through `r(x)`, so weights are computed once per
/// distinct reward level. On grids with circular rewards this turns the
/// quadratic pairwise sum over states into one over distance shells.
#[derive(Debug, Clone)]
pub struct RewardLevels {
    rewards: Vec<f64>,
    level_of: Vec<u32>,
    levels: Vec<f64>,
}

impl RewardLevels {
    pub fn new(rewards: &[f64]) -> Self {
        let mut levels: Vec<f64> = rewards.to_vec();
        levels.sort_by(|a, b| a.total_cmp(b));
        levels.dedup_by(|a, b| a.to_bits() == b.to_bits());
        let level_of = rewards
            .iter()
            .map(|r| levels.binary_search_by(|l| l.total_cmp(r)).expect("level present") as u32)
            .collect();
        RewardLevels { rewards: rewards.to_vec(), level_of, levels }
    }

    pub fn from_field(field: &RewardField, space: &StateSpace) -> Self {
        Self::new(&field.values_on(space))
    }

    pub fn rewards(&self) -> &[f64] {
        &self.rewards
    }

    pub fn num_levels(&self) -> usize {
        self.levels.len()
    }

    fn level_masses(&self, p: &[f64]) -> Vec<f64> {
        let mut m = vec![0.0; self.levels.len()];
        for (w, &l) in p.iter().zip(&self.level_of) {
            m[l as usize] += w;
        }
        m
    }

    /// Scaled exponentials `exp((r - shift) / tau)` per level, with `shift`
    /// the largest reward among levels that carry mass.
    fn scaled(&self, masses: &[f64], tau: f64) -> Vec<f64> {
        let shift = self
            .levels
            .iter()
            .zip(masses)
            .filter(|(_, &m)| m > 0.0)
            .map(|(&v, _)| v)
            .fold(f64::NEG_INFINITY, f64::max);
        self.levels.iter().map(|&v| ((v - shift) / tau).exp()).collect()
    }

    fn check_len(&self, p: &DiscreteDistribution) -> Result<()> {
        if p.len() != self.rewards.len() {
            return Err(Error::SupportMismatch { expected: self.rewards.len(), got: p.len() });
        }
        Ok(())
    }
}

/// Probability that a level with scaled weight `a` beats one with `b`,
/// falling back to the logistic form when both underflow.
#[inline]
fn win_prob(a: f64, b: f64, ra: f64, rb: f64, tau: f64) -> f64 {
    let s = a + b;
    if s > 0.0 && a.is_finite() && b.is_finite() {
        a / s
    } else {
        1.0 / (1.0 + ((rb - ra) / tau).exp())
    }
}

/// Exact `K = 2` weights per level. Only levels listed in `targets` are
/// filled; the rest stay zero.
fn pairwise_level_weights(levels: &RewardLevels, masses: &[f64], tau: f64, targets: &[usize]) -> Vec<f64> {
    let a = levels.scaled(masses, tau);
    let active: Vec<usize> = (0..masses.len()).filter(|&l| masses[l] > 0.0).collect();
    let mut h = vec![0.0; masses.len()];
    for &l in targets {
        let mut acc = 0.0;
        for &k in &active {
            acc += masses[k] * win_prob(a[l], a[k], levels.levels[l], levels.levels[k], tau);
        }
        h[l] = 2.0 * acc;
    }
    h
}

/// Exact pairwise weights for every state, given precomputed levels.
pub fn pairwise_weights(p: &DiscreteDistribution, levels: &RewardLevels, tau: f64) -> Result<BtWeights> {
    levels.check_len(p)?;
    let masses = levels.level_masses(p.weights());
    let all: Vec<usize> = (0..masses.len()).collect();
    let h = pairwise_level_weights(levels, &masses, tau, &all);
    Ok(BtWeights(levels.level_of.iter().map(|&l| h[l as usize]).collect()))
}

/// Pairwise weights only where `p` carries mass; zero elsewhere. Used by the
/// dynamics, where states with zero mass stay at zero after every tilt.
pub(crate) fn pairwise_weights_on_support(p: &DiscreteDistribution, levels: &RewardLevels, tau: f64) -> BtWeights {
    let masses = levels.level_masses(p.weights());
    let active: Vec<usize> = (0..masses.len()).filter(|&l| masses[l] > 0.0).collect();
    let h = pairwise_level_weights(levels, &masses, tau, &active);
    BtWeights(levels.level_of.iter().map(|&l| h[l as usize]).collect())
}

/// `H^p_{2,r}` computed exactly.
pub fn bt_weight_exact_pairwise(
    p: &DiscreteDistribution,
    field: &RewardField,
    space: &StateSpace,
    tau: f64,
) -> Result<BtWeights> {
    if !(tau > 0.0) {
        return Err(Error::InvalidParameter(format!("temperature {tau} must be positive")));
    }
    pairwise_weights(p, &RewardLevels::from_field(field, space), tau)
}

/// Cumulative weights for inverse-CDF sampling.
pub(crate) fn cumulative(weights: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    weights
        .iter()
        .map(|w| {
            acc += w;
            acc
        })
        .collect()
}

pub(crate) fn sample_cumulative(cdf: &[f64], rng: &mut SimRng) -> usize {
    let total = *cdf.last().expect("non-empty cdf");
    let u = rng.random::<f64>() * total;
    let i = cdf.partition_point(|&c| c <= u);
    if i < cdf.len() {
        return i;
    }
    // u rounded up to the total: fall back to the last state with mass.
    let mut j = cdf.len() - 1;
    while j > 0 && cdf[j] == cdf[j - 1] {
        j -= 1;
    }
    j
}

/// Monte Carlo weights for general K with common random pools across states.
pub fn mc_weights(p: &DiscreteDistribution, levels: &RewardLevels, params: &BtParams) -> Result<BtWeights> {
    params.validate()?;
    levels.check_len(p)?;
    let masses = levels.level_masses(p.weights());
    let a = levels.scaled(&masses, params.temperature);
    let k = params.pool_size;
    let cdf = cumulative(p.weights());
    let mut rng = rng_from_seed(params.seed);
    let mut pool_sums = Vec::with_capacity(params.mc_samples);
    for _ in 0..params.mc_samples {
        let s: f64 = (0..k - 1)
            .map(|_| a[levels.level_of[sample_cumulative(&cdf, &mut rng)] as usize])
            .sum();
        pool_sums.push(s);
    }
    let kf = k as f64;
    let per_level: Vec<f64> = a
        .iter()
        .map(|&ax| {
            let total: f64 = pool_sums
                .iter()
                .map(|&s| {
                    let d = ax + s;
                    if d > 0.0 {
                        kf * ax / d
                    } else {
                        1.0
                    }
                })
                .sum();
            total / params.mc_samples as f64
        })
        .collect();
    Ok(BtWeights(levels.level_of.iter().map(|&l| per_level[l as usize]).collect()))
}

/// `H^p_{K,r}` estimated from `params.mc_samples` seeded pools.
pub fn bt_weight_mc(
    p: &DiscreteDistribution,
    field: &RewardField,
    space: &StateSpace,
    params: &BtParams,
) -> Result<BtWeights> {
    mc_weights(p, &RewardLevels::from_field(field, space), params)
}

/// Pointwise product `p * H`, renormalized. Entries below [`MASS_FLOOR`] are
/// flushed to zero first.
pub fn tilt(p: &DiscreteDistribution, h: &BtWeights) -> Result<DiscreteDistribution> {
    if p.len() != h.len() {
        return Err(Error::SupportMismatch { expected: p.len(), got: h.len() });
    }
    let mut w: Vec<f64> = p
        .weights()
        .iter()
        .zip(h.as_slice())
        .map(|(a, b)| {
            let v = a * b;
            if v < MASS_FLOOR {
                0.0
            } else {
                v
            }
        })
        .collect();
    let total: f64 = w.iter().sum();
    if !(total >= MASS_FLOOR) || !total.is_finite() {
        return Err(Error::DegenerateMass(total));
    }
    w.iter_mut().for_each(|v| *v /= total);
    Ok(DiscreteDistribution::from_normalized(w))
}

/// Runs `n_select` independent tournaments over a pool source of
/// `rewards.len()` candidates: each draws `pool_size` members uniformly with
/// replacement and picks a winner with probability proportional to
/// `e^{r/tau}`. Returns the winners' indices into the source.
pub fn tournament_select(rewards: &[f64], params: &BtParams, n_select: usize, rng: &mut SimRng) -> Result<Vec<usize>> {
    params.validate()?;
    if rewards.is_empty() {
        return Err(Error::EmptyInput("tournament pool source"));
    }
    if n_select == 0 {
        return Err(Error::InvalidParameter("n_select must be at least 1".into()));
    }
    let k = params.pool_size;
    let mut pool = vec![0usize; k];
    let mut shares = vec![0.0; k];
    let mut winners = Vec::with_capacity(n_select);
    for _ in 0..n_select {
        for slot in pool.iter_mut() {
            *slot = rng.random_range(0..rewards.len());
        }
        let top = pool.iter().map(|&i| rewards[i]).fold(f64::NEG_INFINITY, f64::max);
        let mut acc = 0.0;
        for (s, &i) in shares.iter_mut().zip(&pool) {
            acc += ((rewards[i] - top) / params.temperature).exp();
            *s = acc;
        }
        let u = rng.random::<f64>() * acc;
        let pick = shares.partition_point(|&c| c <= u).min(k - 1);
        winners.push(pool[pick]);
    }
    Ok(winners)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::StatePoint;
    use rand::Rng;

    fn two_point() -> (DiscreteDistribution, RewardLevels) {
        (DiscreteDistribution::new(vec![0.5, 0.5]).unwrap(), RewardLevels::new(&[1.0, 0.0]))
    }

    #[test]
    fn constant_reward_gives_unit_weights() {
        let p = DiscreteDistribution::new(vec![0.1, 0.2, 0.7]).unwrap();
        let h = pairwise_weights(&p, &RewardLevels::new(&[0.4; 3]), 1.0).unwrap();
        assert!(h.as_slice().iter().all(|&v| (v - 1.0).abs() < 1e-15));
    }

    #[test]
    fn two_point_exact_weights() {
        let (p, levels) = two_point();
        let h = pairwise_weights(&p, &levels, 1.0).unwrap();
        let e = core::f64::consts::E;
        let oracle = 2.0 * (0.25 + 0.5 * e / (e + 1.0));
        assert!((h.0[0] - oracle).abs() < 1e-15);
        assert!((h.0[0] - 1.2311).abs() < 5e-5);
        assert!((h.0[1] - 0.7689).abs() < 5e-5);
        let t = tilt(&p, &h).unwrap();
        assert!((t.weights()[0] - oracle / 2.0).abs() < 1e-15);
        assert!((t.weights()[0] - 0.61555).abs() < 5e-5);
        assert!((t.weights()[1] - 0.38445).abs() < 5e-5);
    }

    #[test]
    fn tilt_identity_and_degenerate() {
        let p = DiscreteDistribution::new(vec![0.25, 0.75]).unwrap();
        assert_eq!(tilt(&p, &BtWeights(vec![1.0, 1.0])).unwrap(), p);
        assert!(matches!(tilt(&p, &BtWeights(vec![0.0, 0.0])), Err(Error::DegenerateMass(_))));
        assert!(tilt(&p, &BtWeights(vec![1.0])).is_err());
    }

    #[test]
    fn mc_point_mass_is_exactly_one() {
        let p = DiscreteDistribution::new(vec![0.0, 1.0, 0.0]).unwrap();
        let levels = RewardLevels::new(&[3.0, -1.0, 0.5]);
        let params = BtParams { pool_size: 5, mc_samples: 200, ..Default::default() };
        let h = mc_weights(&p, &levels, &params).unwrap();
        assert_eq!(h.0[1], 1.0);
    }

    #[test]
    fn mc_is_seeded() {
        let p = DiscreteDistribution::new(vec![0.3, 0.3, 0.4]).unwrap();
        let levels = RewardLevels::new(&[1.0, 0.0, -0.5]);
        let params = BtParams { pool_size: 4, mc_samples: 500, seed: 9, ..Default::default() };
        assert_eq!(mc_weights(&p, &levels, &params).unwrap(), mc_weights(&p, &levels, &params).unwrap());
    }

    #[test]
    fn invalid_params() {
        assert!(BtParams::new(1, 1.0).validate().is_err());
        assert!(BtParams::new(2, 0.0).validate().is_err());
        let mut p = BtParams::new(2, 1.0);
        p.mc_samples = 0;
        assert!(p.validate().is_err());
    }

    #[test]
    fn field_entry_points_agree_with_levels() {
        let s = StateSpace::alphabet_range(1, 8).unwrap();
        let f = RewardField::range(3, 4).unwrap();
        let p = DiscreteDistribution::uniform(8);
        let a = bt_weight_exact_pairwise(&p, &f, &s, 1.0).unwrap();
        let b = pairwise_weights(&p, &RewardLevels::from_field(&f, &s), 1.0).unwrap();
        assert_eq!(a, b);
        assert!((a.expectation(&p) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tournament_identical_candidates() {
        let mut rng = rng_from_seed(1);
        let params = BtParams::new(4, 0.5);
        let w = tournament_select(&[0.7], &params, 10, &mut rng).unwrap();
        assert_eq!(w, vec![0; 10]);
    }

    #[test]
    fn tournament_cold_limit_picks_pool_max() {
        let rewards = [0.0, 0.5, 2.0, -1.0, 1.0];
        let params = BtParams::new(3, 1e-6);
        // Replay the pool draws from the same stream to know each pool.
        let mut rng = rng_from_seed(5);
        let mut replay = rng_from_seed(5);
        let winners = tournament_select(&rewards, &params, 200, &mut rng).unwrap();
        for w in winners {
            let pool: Vec<usize> = (0..3).map(|_| replay.random_range(0..rewards.len())).collect();
            let _u: f64 = replay.random();
            let best = pool.iter().copied().max_by(|&a, &b| rewards[a].total_cmp(&rewards[b])).unwrap();
            assert_eq!(w, best);
        }
    }

    #[test]
    fn tournament_pairwise_win_rate() {
        // Two candidates, K = 2: the first wins a pool that contains both
        // with probability e/(1+e), and always wins a pool of itself.
        let rewards = [1.0, 0.0];
        let params = BtParams::new(2, 1.0);
        let mut rng = rng_from_seed(11);
        let n = 100_000;
        let winners = tournament_select(&rewards, &params, n, &mut rng).unwrap();
        let rate = winners.iter().filter(|&&w| w == 0).count() as f64 / n as f64;
        let e = core::f64::consts::E;
        let logistic = e / (1.0 + e);
        // Pool composition: both-same w.p. 1/2 each, mixed w.p. 1/2.
        let expected = 0.25 + 0.5 * logistic;
        assert!((rate - expected).abs() < 0.01, "rate {rate} vs {expected}");
        // Conditional on a mixed pool the oracle is the logistic itself.
        let mut rng = rng_from_seed(12);
        let mut replay = rng_from_seed(12);
        let winners = tournament_select(&rewards, &params, n, &mut rng).unwrap();
        let (mut mixed, mut first) = (0usize, 0usize);
        for w in winners {
            let a = replay.random_range(0..2usize);
            let b = replay.random_range(0..2usize);
            let _u: f64 = replay.random();
            if a != b {
                mixed += 1;
                first += usize::from(w == 0);
            }
        }
        let cond = first as f64 / mixed as f64;
        assert!((cond - logistic).abs() < 0.01, "conditional rate {cond}");
    }

    #[test]
    fn tournament_errors() {
        let mut rng = rng_from_seed(0);
        assert!(tournament_select(&[], &BtParams::new(2, 1.0), 3, &mut rng).is_err());
        assert!(tournament_select(&[1.0], &BtParams::new(2, 1.0), 0, &mut rng).is_err());
    }

    #[test]
    fn sample_cumulative_skips_zero_mass() {
        let cdf = cumulative(&[0.0, 0.5, 0.0, 0.5, 0.0]);
        let mut rng = rng_from_seed(3);
        for _ in 0..2000 {
            let i = sample_cumulative(&cdf, &mut rng);
            assert!(i == 1 || i == 3, "drew zero-mass state {i}");
        }
        let _ = StatePoint::Label(0);
    }
}
