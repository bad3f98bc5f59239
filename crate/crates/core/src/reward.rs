//! Agent reward fields, their maximizer sets, and alignment regimes.

use alloc::format;
use alloc::vec::Vec;


use crate::space::{point_distance, Region, StatePoint, StateSpace};
use crate::{Error, Result};

/// Reward at the top of a circular or range plateau.
pub const PLATEAU_REWARD: f64 = 1.0;
pub const DEFAULT_SLOPE: f64 = 2.0;
pub const DEFAULT_ARGMAX_EPS: f64 = 1e-9;

/// A reward `r: X -> R`.
///
/// `Circular` and `Range` share one shape: a flat top of value 1 over the
/// preferred region and a linear penalty `-slope * distance` outside it.
#[derive(Debug, Clone, PartialEq)]
pub enum RewardField {
    Circular { center: [f64; 2], radius: f64, slope: f64 },
    Range { lo: i64, hi: i64, slope: f64 },
    /// Per-state values in the enumeration order of the space they were
    /// built for.
    Tabular { values: Vec<f64> },
}

impl RewardField {
    pub fn circular(center: [f64; 2], radius: f64) -> Result<Self> {
        Self::circular_with_slope(center, radius, DEFAULT_SLOPE)
    }

    pub fn circular_with_slope(center: [f64; 2], radius: f64, slope: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidReward(format!("radius must be positive, got {radius}")));
        }
        if !center.iter().all(|c| c.is_finite()) || !slope.is_finite() || slope < 0.0 {
            return Err(Error::InvalidReward("non-finite center or negative slope".into()));
        }
        Ok(RewardField::Circular { center, radius, slope })
    }

    pub fn range(lo: i64, hi: i64) -> Result<Self> {
        Self::range_with_slope(lo, hi, DEFAULT_SLOPE)
    }

    pub fn range_with_slope(lo: i64, hi: i64, slope: f64) -> Result<Self> {
        if lo > hi {
            return Err(Error::InvalidReward(format!("range [{lo}, {hi}] is empty")));
        }
        if !slope.is_finite() || slope < 0.0 {
            return Err(Error::InvalidReward("negative or non-finite slope".into()));
        }
        Ok(RewardField::Range { lo, hi, slope })
    }

    pub fn tabular(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidReward("table must be non-empty and finite".into()));
        }
        Ok(RewardField::Tabular { values })
    }

    /// Checks the field against a space: range bounds inside the alphabet,
    /// table length equal to the support, circular fields on 2D grids.
    pub fn validate_for(&self, space: &StateSpace) -> Result<()> {
        match (self, space) {
            (RewardField::Circular { .. }, StateSpace::Grid(_)) if space.dim() == 2 => Ok(()),
            (RewardField::Range { lo, hi, .. }, StateSpace::Alphabet(a)) => {
                let labels = a.labels();
                if *lo >= labels[0] && *hi <= labels[labels.len() - 1] {
                    Ok(())
                } else {
                    Err(Error::InvalidReward(format!("range [{lo}, {hi}] outside the alphabet")))
                }
            }
            (RewardField::Tabular { values }, _) if values.len() == space.len() => Ok(()),
            (RewardField::Tabular { values }, _) => Err(Error::SupportMismatch {
                expected: space.len(),
                got: values.len(),
            }),
            _ => Err(Error::InvalidReward("reward kind does not match the state space".into())),
        }
    }

    /// Distance from `x` to the plateau (zero inside). Tabular fields have no
    /// geometric plateau and return `None`.
    pub fn plateau_distance(&self, x: &StatePoint) -> Option<f64> {
        match *self {
            RewardField::Circular { center, radius, .. } => {
                let (c, dim) = x.coords();
                let d = if dim == 2 {
                    point_distance(x, &StatePoint::real2(center[0], center[1])).ok()?
                } else {
                    (c[0] - center[0]).abs()
                };
                Some((d - radius).max(0.0))
            }
            RewardField::Range { lo, hi, .. } => {
                let v = x.coords().0[0];
                Some(if v < lo as f64 {
                    lo as f64 - v
                } else if v > hi as f64 {
                    v - hi as f64
                } else {
                    0.0
                })
            }
            RewardField::Tabular { .. } => None,
        }
    }

    /// Reward at `x`. The space is only consulted for tabular fields; a point
    /// that is not enumerated in it yields `-inf`.
    pub fn evaluate(&self, space: &StateSpace, x: &StatePoint) -> f64 {
        match self {
            RewardField::Tabular { values } => space
                .index_of(x)
                .and_then(|i| values.get(i).copied())
                .unwrap_or(f64::NEG_INFINITY),
            RewardField::Circular { slope, .. } | RewardField::Range { slope, .. } => {
                let gap = self.plateau_distance(x).unwrap_or(0.0);
                if gap <= 0.0 {
                    PLATEAU_REWARD
                } else {
                    -slope * gap
                }
            }
        }
    }

    /// Rewards of every enumerated state.
    pub fn values_on(&self, space: &StateSpace) -> Vec<f64> {
        match self {
            RewardField::Tabular { values } => values.clone(),
            _ => space.enumerate().iter().map(|x| self.evaluate(space, x)).collect(),
        }
    }

    /// Value that counts as "satisfied": the plateau top, or the table max.
    pub fn satisfaction_level(&self) -> f64 {
        match self {
            RewardField::Tabular { values } => values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            _ => PLATEAU_REWARD,
        }
    }

    /// Whether a point lies in the preferred region.
    pub fn is_satisfied(&self, space: &StateSpace, x: &StatePoint) -> bool {
        match self {
            RewardField::Tabular { .. } => {
                self.evaluate(space, x) >= self.satisfaction_level() - DEFAULT_ARGMAX_EPS
            }
            _ => self.plateau_distance(x).is_some_and(|d| d <= 0.0),
        }
    }

    /// Reference point used for "mean distance to the agent": the disk
    /// center, the range midpoint, or the first maximizer of a table.
    pub fn reference_point(&self, space: &StateSpace) -> StatePoint {
        match *self {
            RewardField::Circular { center, .. } => StatePoint::real2(center[0], center[1]),
            RewardField::Range { lo, hi, .. } => StatePoint::real1((lo + hi) as f64 / 2.0),
            RewardField::Tabular { .. } => {
                let a = argmax_set(self, space, DEFAULT_ARGMAX_EPS);
                space.point(a.indices()[0])
            }
        }
    }
}

/// Regime of the Owner/Public maximizer sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RegimeLabel {
    Perfect,
    Partial,
    Disjoint,
}

impl RegimeLabel {
    pub fn name(&self) -> &'static str {
        match self {
            RegimeLabel::Perfect => "perfect",
            RegimeLabel::Partial => "partial",
            RegimeLabel::Disjoint => "disjoint",
        }
    }
}

fn argmax_of_values(values: &[f64], candidates: impl Iterator<Item = usize> + Clone, eps: f64) -> Region {
    let best = candidates
        .clone()
        .map(|i| values[i])
        .fold(f64::NEG_INFINITY, f64::max);
    Region::from_sorted(candidates.filter(|&i| values[i] >= best - eps).collect())
}

/// `{x : r(x) >= max r - eps}` over the enumerated space.
pub fn argmax_set(field: &RewardField, space: &StateSpace, eps: f64) -> Region {
    let values = field.values_on(space);
    argmax_of_values(&values, 0..values.len(), eps)
}

/// Maximizers of `inner` restricted to `outer` (`A_{P|O}` with inner = r_P,
/// outer = A_O).
pub fn conditional_argmax(inner: &RewardField, outer: &Region, space: &StateSpace, eps: f64) -> Result<Region> {
    if outer.is_empty() {
        return Err(Error::EmptyRegion);
    }
    space.check_region(outer)?;
    let values = inner.values_on(space);
    Ok(argmax_of_values(&values, outer.iter(), eps))
}

pub fn classify_regime(owner: &Region, public: &Region) -> Result<RegimeLabel> {
    if owner.is_empty() || public.is_empty() {
        return Err(Error::EmptyRegion);
    }
    Ok(if owner == public {
        RegimeLabel::Perfect
    } else if owner.intersection(public).is_empty() {
        RegimeLabel::Disjoint
    } else {
        RegimeLabel::Partial
    })
}
