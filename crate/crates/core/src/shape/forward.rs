use nalgebra::DMatrix;

use crate::error::{domain, Result};
use crate::forward::RadialProfile;
use crate::harmonics::{coefficient_count, CoefficientVector, HarmonicTable, SphereQuadrature};
use crate::scalar::Real;

/// Radial moment `mu_n(w) = int_0^w rho0(r) r^n dr`.
pub fn mu<T: Real>(profile: &RadialProfile<T>, n: u32, w: T) -> Result<T> {
    profile.moment(n, w)
}

/// Angular exactness used for band limit `L`: `2L` for the Galerkin
/// products, `L` more for the leading nonlinear term, plus `margin`.
pub fn shape_quadrature_degree(band_limit: usize, margin: usize) -> usize {
    3 * band_limit + margin
}

/// The nonlinear map from shape coefficients `S` to the mass moments
/// `f_lm[S] = int Y_lm mu_{l+2}(psi) dOmega`, with `psi = sum s_pq Y_pq`,
/// evaluated on a fixed sphere rule.
#[derive(Debug, Clone)]
pub struct ShapeForwardMap<T> {
    profile: RadialProfile<T>,
    band_limit: usize,
    table: HarmonicTable<T>,
}

impl<T: Real> ShapeForwardMap<T> {
    pub fn new(profile: &RadialProfile<T>, band_limit: usize, quadrature_margin: usize) -> Self {
        let quad = SphereQuadrature::new(shape_quadrature_degree(band_limit, quadrature_margin));
        Self {
            profile: profile.clone(),
            band_limit,
            table: HarmonicTable::new(band_limit, &quad),
        }
    }

    pub fn band_limit(&self) -> usize {
        self.band_limit
    }

    pub fn profile(&self) -> &RadialProfile<T> {
        &self.profile
    }

    pub fn quadrature_nodes(&self) -> usize {
        self.table.node_count()
    }

    /// `psi` at every quadrature node, checked to be positive and inside the
    /// profile's domain.
    pub fn psi_at_nodes(&self, shape: &CoefficientVector<T>) -> Result<Vec<T>> {
        let psi = self.table.synthesize_nodes(shape);
        let outer = self.profile.outer_radius();
        for &v in &psi {
            if !(v > T::zero()) {
                return domain(format!("shape function is nonpositive ({v}) at a quadrature node: body is not radially convex"));
            }
            if v > outer {
                return domain(format!("shape function reaches {v}, beyond the radial profile domain {outer}"));
            }
        }
        Ok(psi)
    }

    pub fn evaluate(&self, shape: &CoefficientVector<T>) -> Result<CoefficientVector<T>> {
        let psi = self.psi_at_nodes(shape)?;
        let lmax = self.band_limit;
        let mut out = vec![T::zero(); coefficient_count(lmax)];
        for (k, &p) in psi.iter().enumerate() {
            let w = self.table.weights()[k];
            let y = self.table.row(k);
            let mut idx = 0;
            for l in 0..=lmax {
                let mu = self.profile.moment(l as u32 + 2, p)? * w;
                for _ in 0..(2 * l + 1) {
                    out[idx] += mu * y[idx];
                    idx += 1;
                }
            }
        }
        Ok(CoefficientVector::from_values(lmax, out).expect("length matches"))
    }

    /// Galerkin matrix of the derivative at `shape`:
    /// `G[(lm),(pq)] = int Y_lm rho0(psi) psi^(l+2) Y_pq dOmega`.
    pub fn derivative(&self, shape: &CoefficientVector<T>) -> Result<DMatrix<T>> {
        let psi = self.psi_at_nodes(shape)?;
        self.check_continuity(&psi)?;
        let n = coefficient_count(self.band_limit);
        let mut g = DMatrix::zeros(n, n);
        let mut row_weight = vec![T::zero(); n];
        for (k, &p) in psi.iter().enumerate() {
            let w = self.table.weights()[k] * self.profile.value(p);
            let y = self.table.row(k);
            let mut idx = 0;
            let mut pl = p * p;
            for l in 0..=self.band_limit {
                for _ in 0..(2 * l + 1) {
                    row_weight[idx] = w * pl * y[idx];
                    idx += 1;
                }
                pl *= p;
            }
            for j in 0..n {
                let yj = y[j];
                for i in 0..n {
                    g[(i, j)] += row_weight[i] * yj;
                }
            }
        }
        Ok(g)
    }

    /// Rejects profiles that jump at a radius crossed by `psi`.
    pub fn check_continuity(&self, psi: &[T]) -> Result<()> {
        let (lo, hi) = psi
            .iter()
            .fold((T::max_value().unwrap(), T::zero()), |(a, b), &v| (a.min(v), b.max(v)));
        if let Some(r) = self.profile.discontinuities().into_iter().find(|&r| r >= lo && r <= hi) {
            return domain(format!(
                "radial density jumps at r = {r}, which the shape crosses (psi in [{lo}, {hi}])"
            ));
        }
        Ok(())
    }
}

/// `F[S]` truncated at band limit `L`, using the default quadrature margin.
pub fn shape_forward<T: Real>(
    shape: &CoefficientVector<T>,
    profile: &RadialProfile<T>,
    band_limit: usize,
) -> Result<CoefficientVector<T>> {
    ShapeForwardMap::new(profile, band_limit, super::DEFAULT_QUADRATURE_MARGIN)
        .evaluate(&shape.with_band_limit(band_limit))
}

/// Derivative matrix of `F` at `shape`, rows and columns in canonical order.
pub fn shape_forward_derivative<T: Real>(
    shape: &CoefficientVector<T>,
    profile: &RadialProfile<T>,
    band_limit: usize,
) -> Result<DMatrix<T>> {
    ShapeForwardMap::new(profile, band_limit, super::DEFAULT_QUADRATURE_MARGIN)
        .derivative(&shape.with_band_limit(band_limit))
}
