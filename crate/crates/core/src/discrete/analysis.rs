use nalgebra::{DMatrix, DVector, SVD};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::scalar::Real;

/// Additive Gaussian measurement noise of standard deviation `sigma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound = "T: Real")]
pub struct NoiseModel<T> {
    pub sigma: T,
    #[serde(default)]
    pub seed: u64,
}

impl<T: Real> NoiseModel<T> {
    pub fn new(sigma: T, seed: u64) -> Result<Self> {
        let n = Self { sigma, seed };
        n.validate()?;
        Ok(n)
    }

    pub fn noiseless() -> Self {
        Self {
            sigma: T::zero(),
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma >= T::zero()) || !self.sigma.is_finite() {
            return domain(format!("noise sigma {} must be finite and nonnegative", self.sigma));
        }
        Ok(())
    }

    /// `count` independent draws, reproducible from the seed.
    pub fn sample(&self, count: usize) -> Vec<T> {
        if self.sigma == T::zero() {
            return vec![T::zero(); count];
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let normal = Normal::new(0.0, self.sigma.as_f64()).expect("sigma validated");
        (0..count).map(|_| T::lit(normal.sample(&mut rng))).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct SvdReport<T> {
    pub rows: usize,
    pub cols: usize,
    /// Descending.
    pub singular_values: Vec<T>,
    /// `sigma_1 / sigma_min`; absent when `sigma_min` is exactly zero.
    pub condition_number: Option<T>,
    pub tau: T,
    /// `#{k : sigma_k >= tau sigma_1}`.
    pub rank: usize,
    /// `min(M, N) - rank`.
    pub null_dimension: usize,
}

fn sorted_svd<T: Real>(f: &DMatrix<T>) -> SVD<T, nalgebra::Dyn, nalgebra::Dyn> {
    // `SVD::new` returns the singular values in descending order
    SVD::new(f.clone(), true, true)
}

pub fn svd_conditioning<T: Real>(f: &DMatrix<T>, tau: T) -> Result<SvdReport<T>> {
    if !(tau > T::zero() && tau < T::one()) {
        return domain(format!("rank threshold tau = {tau} must lie in (0, 1)"));
    }
    if f.is_empty() {
        return domain("cannot analyze an empty matrix");
    }
    let sv: Vec<T> = sorted_svd(f).singular_values.iter().copied().collect();
    let s1 = sv[0];
    let smin = *sv.last().unwrap();
    let rank = sv.iter().filter(|&&s| s >= tau * s1).count();
    Ok(SvdReport {
        rows: f.nrows(),
        cols: f.ncols(),
        condition_number: (smin > T::zero()).then(|| s1 / smin),
        tau,
        rank,
        null_dimension: sv.len() - rank,
        singular_values: sv,
    })
}

/// Orthonormal basis (as columns) of the mass perturbations `v` with
/// `|F v|_2 <= sigma |v|`: the right singular vectors with `sigma_k <= sigma`,
/// plus the exact null space `N - M` directions when there are fewer
/// receivers than sources. Because `|F v|_inf <= |F v|_2`, every basis
/// vector changes each receiver by at most `sigma`.
pub fn approximate_null_space<T: Real>(f: &DMatrix<T>, noise: &NoiseModel<T>) -> Result<DMatrix<T>> {
    noise.validate()?;
    let (m, n) = f.shape();
    let padded = if m < n { f.clone().resize_vertically(n, T::zero()) } else { f.clone() };
    let svd = sorted_svd(&padded);
    let vt = svd.v_t.as_ref().expect("requested V");
    let structural = m.min(n);
    let picked: Vec<usize> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|&(k, &s)| k >= structural || s <= noise.sigma)
        .map(|(k, _)| k)
        .collect();
    Ok(DMatrix::from_fn(n, picked.len(), |i, j| vt[(picked[j], i)]))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct PointMassSolution<T> {
    pub masses: Vec<T>,
    /// `|F m - phi|_2` against the (noisy) data actually inverted.
    pub residual_norm: T,
    pub solution_norm: T,
    /// Singular components whose filter factor `s^2 / (s^2 + ridge)` is at
    /// least one half.
    pub effective_rank: usize,
    /// `|noise|_2` of the perturbation added to `phi`.
    pub noise_norm: T,
}

/// Tikhonov solution `argmin |F m - phi|^2 + ridge |m|^2`, through the SVD
/// filter `s / (s^2 + ridge)`. Noise drawn from `noise` is added to `phi`
/// first. With `ridge = 0` components below `s_1 eps max(M, N)` are dropped.
pub fn solve_point_masses<T: Real>(
    f: &DMatrix<T>,
    phi: &[T],
    noise: &NoiseModel<T>,
    ridge: T,
) -> Result<PointMassSolution<T>> {
    noise.validate()?;
    if phi.len() != f.nrows() {
        return Err(Error::Precondition(format!(
            "{} measurements for a matrix with {} rows",
            phi.len(),
            f.nrows()
        )));
    }
    if !(ridge >= T::zero()) || !ridge.is_finite() {
        return domain(format!("ridge {ridge} must be finite and nonnegative"));
    }
    let perturbation = noise.sample(phi.len());
    let data = DVector::from_iterator(phi.len(), phi.iter().zip(&perturbation).map(|(&p, &e)| p + e));
    let svd = sorted_svd(f);
    let u = svd.u.as_ref().expect("requested U");
    let vt = svd.v_t.as_ref().expect("requested V");
    let s1 = svd.singular_values[0];
    let cutoff = s1 * T::eps() * T::from_usize_lossy(f.nrows().max(f.ncols()));
    let mut m = DVector::zeros(f.ncols());
    let mut effective_rank = 0;
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if ridge == T::zero() && s <= cutoff {
            continue;
        }
        let denom = s * s + ridge;
        if denom == T::zero() {
            continue;
        }
        if s * s >= ridge {
            effective_rank += 1;
        }
        let c = u.column(k).dot(&data) * s / denom;
        m.axpy(c, &vt.row(k).transpose(), T::one());
    }
    let residual = f * &m - &data;
    Ok(PointMassSolution {
        residual_norm: residual.norm(),
        solution_norm: m.norm(),
        effective_rank,
        noise_norm: perturbation.iter().fold(T::zero(), |a, &e| a + e * e).sqrt(),
        masses: m.iter().copied().collect(),
    })
}
