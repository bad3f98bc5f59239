//! Gaussian mixture generator: EM fitting with k-means++ seeding, sampling
//! and log-likelihood.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::bt::{cumulative, sample_cumulative};
use crate::seed::{rng_from_seed, SimRng};
use crate::space::StatePoint;
use crate::{Error, Result};

const LN_2PI: f64 = 1.837_877_066_409_345_5;

#[derive(Debug, Clone, PartialEq)]
pub struct EmConfig {
    pub n_components: usize,
    pub max_iters: usize,
    /// Stop when the relative log-likelihood improvement drops below this.
    pub tol: f64,
    /// Added to every covariance diagonal in each M-step.
    pub cov_floor: f64,
    pub seed: u64,
}

impl Default for EmConfig {
    fn default() -> Self {
        EmConfig { n_components: 5, max_iters: 200, tol: 1e-6, cov_floor: 1e-6, seed: 0 }
    }
}

impl EmConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_components == 0 {
            return Err(Error::InvalidParameter("n_components must be at least 1".into()));
        }
        if !(self.tol > 0.0) || !(self.cov_floor > 0.0) {
            return Err(Error::InvalidParameter("tol and cov_floor must be positive".into()));
        }
        Ok(())
    }
}

/// Mixture of full-covariance Gaussians in one or two dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMixture {
    dim: usize,
    weights: Vec<f64>,
    means: Vec<[f64; 2]>,
    /// Row-major `dim x dim`, stored in a fixed 2x2 block.
    covariances: Vec<[f64; 4]>,
}

impl GaussianMixture {
    pub fn new(dim: usize, weights: Vec<f64>, means: Vec<[f64; 2]>, covariances: Vec<[f64; 4]>) -> Result<Self> {
        if dim == 0 || dim > 2 {
            return Err(Error::InvalidParameter(format!("mixture dimension {dim} not in 1..=2")));
        }
        if weights.is_empty() || weights.len() != means.len() || weights.len() != covariances.len() {
            return Err(Error::InvalidParameter("component arrays disagree in length".into()));
        }
        let total: f64 = weights.iter().sum();
        if weights.iter().any(|w| *w < 0.0 || !w.is_finite()) || (total - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidParameter("weights must lie on the simplex".into()));
        }
        let m = GaussianMixture { dim, weights, means, covariances };
        for k in 0..m.n_components() {
            m.cholesky(k)?;
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_components(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn mean(&self, k: usize) -> &[f64] {
        &self.means[k][..self.dim]
    }

    /// Covariance of component `k` as a row-major `dim x dim` slice.
    pub fn covariance(&self, k: usize) -> Vec<f64> {
        let c = &self.covariances[k];
        if self.dim == 1 {
            vec![c[0]]
        } else {
            c.to_vec()
        }
    }

    /// Lower Cholesky factor packed as `[l00, 0, l10, l11]`.
    fn cholesky(&self, k: usize) -> Result<[f64; 4]> {
        let c = &self.covariances[k];
        let not_pd = || Error::InvalidParameter(format!("covariance {k} is not positive definite"));
        if !(c[0] > 0.0) {
            return Err(not_pd());
        }
        let l00 = c[0].sqrt();
        if self.dim == 1 {
            return Ok([l00, 0.0, 0.0, 0.0]);
        }
        if (c[1] - c[2]).abs() > 1e-12 * (1.0 + c[1].abs()) {
            return Err(Error::InvalidParameter(format!("covariance {k} is not symmetric")));
        }
        let l10 = c[2] / l00;
        let rest = c[3] - l10 * l10;
        if !(rest > 0.0) {
            return Err(not_pd());
        }
        Ok([l00, 0.0, l10, rest.sqrt()])
    }

    fn log_densities(&self) -> Vec<ComponentDensity> {
        (0..self.n_components())
            .map(|k| {
                let l = self.cholesky(k).expect("validated covariance");
                let log_det = if self.dim == 1 { l[0].ln() } else { l[0].ln() + l[3].ln() };
                ComponentDensity {
                    log_norm: self.weights[k].ln() - 0.5 * self.dim as f64 * LN_2PI - log_det,
                    chol: l,
                    mean: self.means[k],
                }
            })
            .collect()
    }
}

struct ComponentDensity {
    /// `ln w_k - d/2 ln 2pi - ln |L|`.
    log_norm: f64,
    chol: [f64; 4],
    mean: [f64; 2],
}

impl ComponentDensity {
    /// `ln w_k + ln N(x; mu_k, Sigma_k)`.
    fn log_weighted(&self, x: &[f64; 2], dim: usize) -> f64 {
        let l = &self.chol;
        let z0 = (x[0] - self.mean[0]) / l[0];
        let mut q = z0 * z0;
        if dim == 2 {
            let z1 = (x[1] - self.mean[1] - l[2] * z0) / l[3];
            q += z1 * z1;
        }
        self.log_norm - 0.5 * q
    }
}

fn log_sum_exp(values: &[f64]) -> f64 {
    let top = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return top;
    }
    top + values.iter().map(|v| (v - top).exp()).sum::<f64>().ln()
}

fn to_coords(points: &[StatePoint]) -> Result<(Vec<[f64; 2]>, usize)> {
    let dim = points.first().ok_or(Error::EmptyInput("points"))?.dim();
    let mut out = Vec::with_capacity(points.len());
    for p in points {
        let (c, d) = p.coords();
        if d != dim {
            return Err(Error::DimensionMismatch { left: dim, right: d });
        }
        if !p.is_finite() {
            return Err(Error::InvalidPoint("non-finite coordinate".into()));
        }
        out.push(c);
    }
    Ok((out, dim))
}

/// `sum_i ln sum_k w_k N(x_i; mu_k, Sigma_k)`.
pub fn log_likelihood(model: &GaussianMixture, points: &[StatePoint]) -> Result<f64> {
    let (xs, dim) = to_coords(points)?;
    if dim != model.dim {
        return Err(Error::DimensionMismatch { left: model.dim, right: dim });
    }
    let dens = model.log_densities();
    let mut buf = vec![0.0; dens.len()];
    Ok(xs
        .iter()
        .map(|x| {
            for (b, d) in buf.iter_mut().zip(&dens) {
                *b = d.log_weighted(x, dim);
            }
            log_sum_exp(&buf)
        })
        .sum())
}

/// Result of an EM fit.
#[derive(Debug, Clone, PartialEq)]
pub struct EmFit {
    pub mixture: GaussianMixture,
    /// Log-likelihood before each M-step, followed by that of `mixture`.
    pub log_likelihood_trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

fn sq_dist(a: &[f64; 2], b: &[f64; 2], dim: usize) -> f64 {
    (0..dim).map(|d| (a[d] - b[d]) * (a[d] - b[d])).sum()
}

/// k-means++ seeding: first center uniform, then proportional to squared
/// distance to the nearest chosen center.
fn kmeans_pp(xs: &[[f64; 2]], dim: usize, k: usize, rng: &mut SimRng) -> Vec<[f64; 2]> {
    let mut centers = vec![xs[rng.random_range(0..xs.len())]];
    let mut nearest: Vec<f64> = xs.iter().map(|x| sq_dist(x, &centers[0], dim)).collect();
    while centers.len() < k {
        let total: f64 = nearest.iter().sum();
        let next = if total > 0.0 {
            xs[sample_cumulative(&cumulative(&nearest), rng)]
        } else {
            xs[rng.random_range(0..xs.len())]
        };
        for (n, x) in nearest.iter_mut().zip(xs) {
            *n = n.min(sq_dist(x, &next, dim));
        }
        centers.push(next);
    }
    centers
}

fn sample_covariance(xs: &[[f64; 2]], dim: usize, floor: f64) -> [f64; 4] {
    let n = xs.len() as f64;
    let mut mean = [0.0; 2];
    for x in xs {
        for d in 0..dim {
            mean[d] += x[d] / n;
        }
    }
    let mut c = [0.0; 4];
    for x in xs {
        for a in 0..dim {
            for b in 0..dim {
                c[a * 2 + b] += (x[a] - mean[a]) * (x[b] - mean[b]) / n;
            }
        }
    }
    add_floor(&mut c, dim, floor);
    c
}

fn add_floor(c: &mut [f64; 4], dim: usize, floor: f64) {
    c[0] += floor;
    if dim == 2 {
        c[3] += floor;
        let off = 0.5 * (c[1] + c[2]);
        c[1] = off;
        c[2] = off;
    }
}

/// Fits a mixture by EM. Fewer distinct points than components is allowed:
/// duplicated components sit on the same points and the floor keeps their
/// covariances non-singular.
pub fn fit(points: &[StatePoint], cfg: &EmConfig) -> Result<EmFit> {
    cfg.validate()?;
    let (xs, dim) = to_coords(points)?;
    let k = cfg.n_components;
    let mut rng = rng_from_seed(cfg.seed);
    let centers = kmeans_pp(&xs, dim, k, &mut rng);
    let global = sample_covariance(&xs, dim, cfg.cov_floor);
    let mut model = GaussianMixture {
        dim,
        weights: vec![1.0 / k as f64; k],
        means: centers,
        covariances: vec![global; k],
    };

    let n = xs.len();
    let mut resp = vec![0.0; n * k];
    let mut buf = vec![0.0; k];
    let mut trace = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    while iterations < cfg.max_iters {
        // E-step.
        let dens = model.log_densities();
        let mut ll = 0.0;
        for (i, x) in xs.iter().enumerate() {
            for (b, d) in buf.iter_mut().zip(&dens) {
                *b = d.log_weighted(x, dim);
            }
            let norm = log_sum_exp(&buf);
            ll += norm;
            for j in 0..k {
                resp[i * k + j] = (buf[j] - norm).exp();
            }
        }
        if let Some(&prev) = trace.last() {
            let rel = (ll - prev) / f64::max(1e-300, f64::abs(prev));
            if rel.abs() < cfg.tol {
                trace.push(ll);
                converged = true;
                break;
            }
        }
        trace.push(ll);

        // M-step.
        for j in 0..k {
            let nk: f64 = (0..n).map(|i| resp[i * k + j]).sum();
            if !(nk > 1e-300) {
                model.weights[j] = 0.0;
                continue;
            }
            let mut mean = [0.0; 2];
            for (i, x) in xs.iter().enumerate() {
                for d in 0..dim {
                    mean[d] += resp[i * k + j] * x[d];
                }
            }
            for m in mean.iter_mut().take(dim) {
                *m /= nk;
            }
            let mut cov = [0.0; 4];
            for (i, x) in xs.iter().enumerate() {
                let r = resp[i * k + j];
                for a in 0..dim {
                    for b in 0..dim {
                        cov[a * 2 + b] += r * (x[a] - mean[a]) * (x[b] - mean[b]);
                    }
                }
            }
            for c in cov.iter_mut() {
                *c /= nk;
            }
            add_floor(&mut cov, dim, cfg.cov_floor);
            model.weights[j] = nk / n as f64;
            model.means[j] = mean;
            model.covariances[j] = cov;
        }
        let total: f64 = model.weights.iter().sum();
        model.weights.iter_mut().for_each(|w| *w /= total);
        iterations += 1;
    }
    if !converged {
        trace.push(log_likelihood_coords(&model, &xs));
    }
    Ok(EmFit { mixture: model, log_likelihood_trace: trace, iterations, converged })
}

fn log_likelihood_coords(model: &GaussianMixture, xs: &[[f64; 2]]) -> f64 {
    let dens = model.log_densities();
    let mut buf = vec![0.0; dens.len()];
    xs.iter()
        .map(|x| {
            for (b, d) in buf.iter_mut().zip(&dens) {
                *b = d.log_weighted(x, model.dim);
            }
            log_sum_exp(&buf)
        })
        .sum()
}

/// Component by weight, then `mu + L z` with `z` standard normal.
pub fn sample_with(model: &GaussianMixture, n: usize, rng: &mut SimRng) -> Vec<StatePoint> {
    let cdf = cumulative(&model.weights);
    let chols: Vec<[f64; 4]> = (0..model.n_components())
        .map(|k| model.cholesky(k).expect("validated covariance"))
        .collect();
    (0..n)
        .map(|_| {
            let k = sample_cumulative(&cdf, rng);
            let l = &chols[k];
            let mu = &model.means[k];
            let z0: f64 = rng.sample(StandardNormal);
            if model.dim == 1 {
                StatePoint::real1(mu[0] + l[0] * z0)
            } else {
                let z1: f64 = rng.sample(StandardNormal);
                StatePoint::real2(mu[0] + l[0] * z0, mu[1] + l[2] * z0 + l[3] * z1)
            }
        })
        .collect()
}

pub fn sample(model: &GaussianMixture, n: usize, seed: u64) -> Vec<StatePoint> {
    sample_with(model, n, &mut rng_from_seed(seed))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn std_normal() -> GaussianMixture {
        GaussianMixture::new(2, vec![1.0], vec![[0.0, 0.0]], vec![[1.0, 0.0, 0.0, 1.0]]).unwrap()
    }

    #[test]
    fn log_likelihood_at_origin() {
        let ll = log_likelihood(&std_normal(), &[StatePoint::real2(0.0, 0.0)]).unwrap();
        assert!((ll - (-1.8379)).abs() < 1e-4);
        assert!((ll + LN_2PI).abs() < 1e-12);
    }

    #[test]
    fn duplicate_point_doubles_contribution() {
        let m = std_normal();
        let x = StatePoint::real2(0.3, -1.2);
        let one = log_likelihood(&m, &[x]).unwrap();
        let two = log_likelihood(&m, &[x, x]).unwrap();
        assert!((two - 2.0 * one).abs() < 1e-12);
    }

    #[test]
    fn identical_points_collapse_to_floor() {
        let pts = vec![StatePoint::real2(0.7, -0.2); 20];
        let cfg = EmConfig { n_components: 3, ..Default::default() };
        let fit = fit(&pts, &cfg).unwrap();
        for k in 0..3 {
            let m = fit.mixture.mean(k);
            assert!((m[0] - 0.7).abs() < 1e-12 && (m[1] + 0.2).abs() < 1e-12);
            let c = fit.mixture.covariance(k);
            assert!((c[0] - 1e-6).abs() < 1e-15 && (c[3] - 1e-6).abs() < 1e-15);
            assert!(c[1].abs() < 1e-15);
        }
    }

    #[test]
    fn fewer_points_than_components() {
        let pts = vec![StatePoint::real2(0.0, 0.0), StatePoint::real2(1.0, 1.0)];
        let fit = fit(&pts, &EmConfig::default()).unwrap();
        assert_eq!(fit.mixture.n_components(), 5);
        assert!(fit.log_likelihood_trace.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn empty_input_and_bad_config() {
        assert!(fit(&[], &EmConfig::default()).is_err());
        let cfg = EmConfig { cov_floor: 0.0, ..Default::default() };
        assert!(fit(&[StatePoint::real2(0.0, 0.0)], &cfg).is_err());
        assert!(fit(&[StatePoint::real2(0.0, 0.0), StatePoint::real1(1.0)], &EmConfig::default()).is_err());
    }

    #[test]
    fn zero_weight_component_never_sampled() {
        let m = GaussianMixture::new(
            2,
            vec![1.0, 0.0],
            vec![[-3.0, 0.0], [3.0, 0.0]],
            vec![[0.01, 0.0, 0.0, 0.01]; 2],
        )
        .unwrap();
        assert!(sample(&m, 5000, 4).iter().all(|p| p.coords().0[0] < 0.0));
    }

    #[test]
    fn floor_covariance_samples_concentrate() {
        let m = GaussianMixture::new(2, vec![1.0], vec![[2.0, -1.0]], vec![[1e-6, 0.0, 0.0, 1e-6]]).unwrap();
        let xs = sample(&m, 2000, 8);
        let bound = 3.0 * 1e-6f64.sqrt();
        let n = xs.len() as f64;
        let sx = (xs.iter().map(|p| (p.coords().0[0] - 2.0).powi(2)).sum::<f64>() / n).sqrt();
        assert!(sx <= bound);
    }

    #[test]
    fn one_dimensional_fit() {
        let m = GaussianMixture::new(1, vec![1.0], vec![[4.0, 0.0]], vec![[0.25, 0.0, 0.0, 0.0]]).unwrap();
        let xs = sample(&m, 4000, 2);
        let fit = fit(&xs, &EmConfig { n_components: 1, ..Default::default() }).unwrap();
        assert!((fit.mixture.mean(0)[0] - 4.0).abs() < 0.05);
        assert!((fit.mixture.covariance(0)[0] - 0.25).abs() < 0.03);
    }

    #[test]
    fn rejects_bad_mixture() {
        assert!(GaussianMixture::new(2, vec![0.5], vec![[0.0; 2]], vec![[1.0, 0.0, 0.0, 1.0]]).is_err());
        assert!(GaussianMixture::new(2, vec![1.0], vec![[0.0; 2]], vec![[1.0, 2.0, 2.0, 1.0]]).is_err());
        assert!(GaussianMixture::new(3, vec![1.0], vec![[0.0; 2]], vec![[1.0, 0.0, 0.0, 1.0]]).is_err());
    }
}
