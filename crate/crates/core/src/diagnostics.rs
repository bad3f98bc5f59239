//! Trajectory measurements: region masses, exponential-decay fits,
//! satisfaction, mean distances, total variation and grid KDE.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;


use crate::exact::{DiscreteDistribution, LimitPrediction};
use crate::reward::RewardField;
use crate::space::{point_distance, Region, StatePoint, StateSpace};
use crate::{Error, Result};

/// Masses below this are treated as floating-point noise by decay fits.
pub const FIT_MASS_FLOOR: f64 = 1e-12;
/// Masses above this are pre-asymptotic and excluded from decay fits.
pub const FIT_MASS_CEILING: f64 = 0.5;
pub const KDE_FALLBACK_BANDWIDTH: f64 = 0.1;

/// One row of a trajectory CSV.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryRecord {
    pub iteration: usize,
    pub mass_outside_owner: f64,
    pub mass_outside_public: f64,
    pub mass_outside_target: f64,
    pub mean_dist_owner: f64,
    pub mean_dist_public: f64,
    pub satisfaction_owner: f64,
    pub satisfaction_public: f64,
    pub tv_to_predicted: f64,
}

impl TrajectoryRecord {
    pub const HEADER: [&'static str; 9] = [
        "iteration",
        "mass_outside_owner",
        "mass_outside_public",
        "mass_outside_target",
        "mean_dist_owner",
        "mean_dist_public",
        "satisfaction_owner",
        "satisfaction_public",
        "tv_to_predicted",
    ];

    /// Values after `iteration`, in header order.
    pub fn values(&self) -> [f64; 8] {
        [
            self.mass_outside_owner,
            self.mass_outside_public,
            self.mass_outside_target,
            self.mean_dist_owner,
            self.mean_dist_public,
            self.satisfaction_owner,
            self.satisfaction_public,
            self.tv_to_predicted,
        ]
    }

    pub fn in_range(&self) -> bool {
        let unit = |v: f64| (0.0..=1.0 + 1e-12).contains(&v);
        unit(self.mass_outside_owner)
            && unit(self.mass_outside_public)
            && unit(self.mass_outside_target)
            && unit(self.satisfaction_owner)
            && unit(self.satisfaction_public)
            && unit(self.tv_to_predicted)
            && self.mean_dist_owner >= 0.0
            && self.mean_dist_public >= 0.0
    }
}

/// Exact mass of `p` on `region`.
pub fn region_mass(p: &DiscreteDistribution, region: &Region) -> Result<f64> {
    if p.is_empty() {
        return Err(Error::EmptyInput("distribution"));
    }
    Ok(p.mass(region).clamp(0.0, 1.0))
}

/// Fraction of `points` inside the closed disk `|x - center| <= radius`.
pub fn cloud_mass_in_disk(points: &[StatePoint], center: [f64; 2], radius: f64) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::EmptyInput("point cloud"));
    }
    let c = StatePoint::real2(center[0], center[1]);
    let inside = points
        .iter()
        .filter(|x| point_distance(x, &c).is_ok_and(|d| d <= radius))
        .count();
    Ok(inside as f64 / points.len() as f64)
}

/// Fraction of `points` whose nearest enumerated state lies in `region`.
pub fn cloud_mass_in_region(points: &[StatePoint], space: &StateSpace, region: &Region) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::EmptyInput("point cloud"));
    }
    let inside = points
        .iter()
        .filter(|x| space.nearest_index(x).is_some_and(|i| region.contains(i)))
        .count();
    Ok(inside as f64 / points.len() as f64)
}

/// Histogram of `points` on the nearest enumerated states.
pub fn bin_points(points: &[StatePoint], space: &StateSpace) -> Result<DiscreteDistribution> {
    if points.is_empty() {
        return Err(Error::EmptyInput("point cloud"));
    }
    let mut w = vec![0.0; space.len()];
    for x in points {
        let i = space
            .nearest_index(x)
            .ok_or_else(|| Error::InvalidPoint(format!("{x:?} does not belong to the space")))?;
        w[i] += 1.0;
    }
    DiscreteDistribution::new(w)
}

/// Log-linear fit `ln m_t = ln C - c t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    pub rate: f64,
    pub log_intercept: f64,
    pub r_squared: f64,
    /// First and last iteration used.
    pub window: (usize, usize),
    pub points: usize,
}

impl DecayFit {
    pub fn is_decaying(&self) -> bool {
        self.rate > 0.0
    }
}

/// Least-squares decay fit over the asymptotic window: points from the
/// series maximum onward with mass in `[1e-12, 0.5]`.
///
/// A series with no variation in `ln m` reports `rate = 0` and `R^2 = 1`.
pub fn fit_exponential_decay(series: &[(usize, f64)]) -> Result<DecayFit> {
    let peak = series
        .iter()
        .enumerate()
        .fold(None::<(usize, f64)>, |best, (i, &(_, m))| match best {
            Some((_, bm)) if bm >= m => best,
            _ => Some((i, m)),
        })
        .map_or(0, |(i, _)| i);
    let pts: Vec<(f64, f64)> = series[peak.min(series.len())..]
        .iter()
        .filter(|(_, m)| (FIT_MASS_FLOOR..=FIT_MASS_CEILING).contains(m))
        .map(|&(t, m)| (t as f64, m.ln()))
        .collect();
    if pts.len() < 3 {
        return Err(Error::InsufficientFitPoints(pts.len()));
    }
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mt;
    let r_squared = if syy <= 1e-24 * (1.0 + my * my) {
        1.0
    } else {
        let ss_res: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    };
    let rate = if syy <= 1e-24 * (1.0 + my * my) { 0.0 } else { -slope };
    let first = pts[0].0 as usize;
    let last = pts[pts.len() - 1].0 as usize;
    Ok(DecayFit { rate, log_intercept: intercept, r_squared, window: (first, last), points: pts.len() })
}

/// Fraction of `points` in the field's preferred region.
pub fn satisfaction(points: &[StatePoint], field: &RewardField, space: &StateSpace) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::EmptyInput("point cloud"));
    }
    let hits = points.iter().filter(|x| field.is_satisfied(space, x)).count();
    Ok(hits as f64 / points.len() as f64)
}

/// Average distance from `points` to `reference`.
pub fn mean_distance(points: &[StatePoint], reference: &StatePoint) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::EmptyInput("point cloud"));
    }
    let mut total = 0.0;
    for x in points {
        total += coord_distance(x, reference)?;
    }
    Ok(total / points.len() as f64)
}

/// Distance on coordinates; labels count as their integer value.
fn coord_distance(a: &StatePoint, b: &StatePoint) -> Result<f64> {
    let (ca, da) = a.coords();
    let (cb, db) = b.coords();
    if da != db {
        return Err(Error::DimensionMismatch { left: da, right: db });
    }
    Ok((0..da).map(|d| (ca[d] - cb[d]).powi(2)).sum::<f64>().sqrt())
}

/// `E_p[d(x, reference)]` over the enumerated space.
pub fn expected_distance(p: &DiscreteDistribution, space: &StateSpace, reference: &StatePoint) -> Result<f64> {
    let mut total = 0.0;
    for (i, &w) in p.weights().iter().enumerate() {
        if w > 0.0 {
            total += w * coord_distance(&space.point(i), reference)?;
        }
    }
    Ok(total)
}

/// `0.5 * sum |p - q|`.
pub fn total_variation(p: &DiscreteDistribution, q: &DiscreteDistribution) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::SupportMismatch { expected: p.len(), got: q.len() });
    }
    let l1: f64 = p.weights().iter().zip(q.weights()).map(|(a, b)| (a - b).abs()).sum();
    Ok((0.5 * l1).min(1.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bandwidth {
    /// `h_d = n^{-1/(d+4)} * sigma_d` per dimension.
    Scott,
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct KdeGrid {
    /// Density at each enumerated grid point.
    pub density: Vec<f64>,
    /// Bandwidth per dimension actually used.
    pub bandwidth: [f64; 2],
}

impl KdeGrid {
    /// Midpoint-rule integral over `region`.
    pub fn integrate(&self, space: &StateSpace, region: &Region) -> f64 {
        region.iter().map(|i| self.density[i]).sum::<f64>() * space.cell_volume()
    }
}

fn std_dev(values: impl Iterator<Item = f64> + Clone, n: usize) -> f64 {
    let mean = values.clone().sum::<f64>() / n as f64;
    let var = values.map(|v| (v - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
    var.sqrt()
}

/// Gaussian product-kernel density evaluated on every point of a grid.
pub fn kde_grid(points: &[StatePoint], grid: &StateSpace, bandwidth: Bandwidth) -> Result<KdeGrid> {
    let StateSpace::Grid(g) = grid else {
        return Err(Error::InvalidSpace("KDE needs a grid space".into()));
    };
    if points.len() < 2 {
        return Err(Error::EmptyInput("KDE needs at least two points"));
    }
    let dim = grid.dim();
    if points.iter().any(|p| p.dim() != dim) {
        return Err(Error::DimensionMismatch { left: dim, right: points[0].dim() });
    }
    let n = points.len();
    let mut h = [1.0; 2];
    for (d, hd) in h.iter_mut().enumerate().take(dim) {
        *hd = match bandwidth {
            Bandwidth::Fixed(v) => v,
            Bandwidth::Scott => {
                let sigma = std_dev(points.iter().map(|p| p.coords().0[d]), n);
                let rule = (n as f64).powf(-1.0 / (dim as f64 + 4.0)) * sigma;
                if rule > 0.0 && rule.is_finite() {
                    rule
                } else {
                    KDE_FALLBACK_BANDWIDTH
                }
            }
        };
        if !(*hd > 0.0 && hd.is_finite()) {
            return Err(Error::InvalidParameter(format!("bandwidth {hd} must be positive")));
        }
    }
    let res = g.resolution();
    let axis: Vec<Vec<f64>> = (0..dim).map(|d| (0..res).map(|i| g.coordinate(d, i)).collect()).collect();
    let norm = 1.0 / (2.0 * core::f64::consts::PI).sqrt();
    let kernel = |d: usize, x: f64, out: &mut [f64]| {
        for (o, &gc) in out.iter_mut().zip(&axis[d]) {
            let z = (gc - x) / h[d];
            *o = norm * (-0.5 * z * z).exp() / h[d];
        }
    };
    let mut density = vec![0.0; grid.len()];
    let mut kx = vec![0.0; res];
    let mut ky = vec![0.0; res];
    for p in points {
        let (c, _) = p.coords();
        kernel(0, c[0], &mut kx);
        if dim == 1 {
            for (o, k) in density.iter_mut().zip(&kx) {
                *o += k;
            }
        } else {
            kernel(1, c[1], &mut ky);
            for (i, &a) in kx.iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                let row = &mut density[i * res..(i + 1) * res];
                for (o, &b) in row.iter_mut().zip(&ky) {
                    *o += a * b;
                }
            }
        }
    }
    density.iter_mut().for_each(|v| *v /= n as f64);
    Ok(KdeGrid { density, bandwidth: h })
}

/// Regions and reference points for turning a state of the dynamics into a
/// [`TrajectoryRecord`].
#[derive(Debug, Clone)]
pub struct DiagnosticContext {
    pub space: StateSpace,
    pub owner: RewardField,
    pub public: RewardField,
    pub eta: f64,
    pub owner_set: Region,
    pub public_set: Region,
    pub target: Region,
    pub owner_nbhd: Region,
    pub public_nbhd: Region,
    pub target_nbhd: Region,
    pub owner_ref: StatePoint,
    pub public_ref: StatePoint,
    pub predicted: DiscreteDistribution,
}

impl DiagnosticContext {
    /// `eta` sets the neighborhoods `B_eta(A_O)`, `B_eta(A_P)` and
    /// `B_eta(target)` whose complements are measured.
    pub fn new(
        space: &StateSpace,
        owner: &RewardField,
        public: &RewardField,
        prediction: &LimitPrediction,
        eta: f64,
    ) -> Result<Self> {
        Ok(DiagnosticContext {
            space: space.clone(),
            owner: owner.clone(),
            public: public.clone(),
            eta,
            owner_nbhd: space.neighborhood(&prediction.owner_set, eta)?,
            public_nbhd: space.neighborhood(&prediction.public_set, eta)?,
            target_nbhd: space.neighborhood(&prediction.target, eta)?,
            owner_set: prediction.owner_set.clone(),
            public_set: prediction.public_set.clone(),
            target: prediction.target.clone(),
            owner_ref: owner.reference_point(space),
            public_ref: public.reference_point(space),
            predicted: prediction.limit.clone(),
        })
    }

    /// Record for an exact-dynamics distribution.
    pub fn exact_record(&self, iteration: usize, p: &DiscreteDistribution) -> Result<TrajectoryRecord> {
        let outside = |nbhd: &Region| (1.0 - p.mass(nbhd)).clamp(0.0, 1.0);
        Ok(TrajectoryRecord {
            iteration,
            mass_outside_owner: outside(&self.owner_nbhd),
            mass_outside_public: outside(&self.public_nbhd),
            mass_outside_target: outside(&self.target_nbhd),
            mean_dist_owner: expected_distance(p, &self.space, &self.owner_ref)?,
            mean_dist_public: expected_distance(p, &self.space, &self.public_ref)?,
            satisfaction_owner: p.mass(&self.owner_set).clamp(0.0, 1.0),
            satisfaction_public: p.mass(&self.public_set).clamp(0.0, 1.0),
            tv_to_predicted: total_variation(p, &self.predicted)?,
        })
    }

    /// Record for a point cloud. Neighborhood masses and the TV distance use
    /// the cloud binned onto the nearest enumerated states; satisfaction and
    /// distances use exact coordinates. `distance_points` selects the set
    /// whose mean distances are reported.
    pub fn cloud_record(
        &self,
        iteration: usize,
        points: &[StatePoint],
        distance_points: &[StatePoint],
    ) -> Result<TrajectoryRecord> {
        let binned = bin_points(points, &self.space)?;
        let outside = |nbhd: &Region| (1.0 - binned.mass(nbhd)).clamp(0.0, 1.0);
        Ok(TrajectoryRecord {
            iteration,
            mass_outside_owner: outside(&self.owner_nbhd),
            mass_outside_public: outside(&self.public_nbhd),
            mass_outside_target: outside(&self.target_nbhd),
            mean_dist_owner: mean_distance(distance_points, &self.owner_ref)?,
            mean_dist_public: mean_distance(distance_points, &self.public_ref)?,
            satisfaction_owner: satisfaction(points, &self.owner, &self.space)?,
            satisfaction_public: satisfaction(points, &self.public, &self.space)?,
            tv_to_predicted: total_variation(&binned, &self.predicted)?,
        })
    }
}
