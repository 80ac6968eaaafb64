use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::harmonics::{eval_harmonic, Direction, HarmonicIndex};
use crate::scalar::{Point3, Real};

/// Compactly supported potential generator
/// `chi(r, Omega) = A (r/R)^l (1 - (r/R)^2)^k Y_lm(Omega)` for `r < R`, zero
/// outside.
///
/// The `(r/R)^l` factor keeps `chi` twice differentiable at the origin and
/// `k >= 3` makes `chi`, `chi'` and `chi''` vanish at `r = R`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound = "T: Real")]
pub struct ChiSpec<T> {
    pub amplitude: T,
    pub support_radius: T,
    pub smoothness: u32,
    pub l: i64,
    pub m: i64,
}

impl<T: Real> ChiSpec<T> {
    pub fn new(amplitude: T, support_radius: T, smoothness: u32, l: i64, m: i64) -> Result<Self> {
        let spec = Self {
            amplitude,
            support_radius,
            smoothness,
            l,
            m,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        HarmonicIndex::new(self.l, self.m)?;
        if self.smoothness < 3 {
            return domain(format!("smoothness k = {} must be at least 3", self.smoothness));
        }
        if !(self.support_radius > T::zero()) || !self.support_radius.is_finite() {
            return domain("chi support radius must be positive");
        }
        if !self.amplitude.is_finite() {
            return domain("chi amplitude must be finite");
        }
        Ok(())
    }

    pub fn index(&self) -> HarmonicIndex {
        HarmonicIndex { l: self.l, m: self.m }
    }

    /// Polynomial degree in `r` of the radial factor of the Laplacian.
    pub fn laplacian_radial_degree(&self) -> usize {
        self.l as usize + 2 * self.smoothness as usize - 2
    }

    /// Radial factor `f(r) = A s^l (1 - s^2)^k`, `s = r/R`.
    pub fn radial(&self, r: T) -> T {
        let s = r / self.support_radius;
        if s >= T::one() {
            return T::zero();
        }
        self.amplitude * s.powi(self.l as i32) * (T::one() - s * s).powi(self.smoothness as i32)
    }

    /// Radial factor of the Laplacian:
    /// `f'' + 2 f'/r - l(l+1) f / r^2`, which for this family reduces to
    /// `(2kA/R^2) s^l (1 - s^2)^(k-2) [2(k-1) s^2 - (2l+3)(1 - s^2)]`.
    pub fn laplacian_radial(&self, r: T) -> T {
        let s = r / self.support_radius;
        if s >= T::one() {
            return T::zero();
        }
        let k = T::from_usize_lossy(self.smoothness as usize);
        let l = T::from_usize_lossy(self.l as usize);
        let q = T::one() - s * s;
        let two = T::lit(2.0);
        let bracket = two * (k - T::one()) * s * s - (two * l + T::lit(3.0)) * q;
        two * k * self.amplitude / (self.support_radius * self.support_radius)
            * s.powi(self.l as i32)
            * q.powi(self.smoothness as i32 - 2)
            * bracket
    }

    fn angular(&self, x: &Point3<T>) -> T {
        let (_, dir) = Direction::from_cartesian(x);
        eval_harmonic(self.index(), &dir).expect("validated index")
    }
}

/// `chi` at a Cartesian point; exactly zero for `|x| >= R`.
pub fn chi_value<T: Real>(spec: &ChiSpec<T>, x: &Point3<T>) -> T {
    let r = crate::scalar::norm3(x);
    if r >= spec.support_radius {
        return T::zero();
    }
    spec.radial(r) * spec.angular(x)
}

/// Closed-form `laplacian(chi)` at a Cartesian point; exactly zero for
/// `|x| >= R` and finite at the origin.
pub fn laplacian_chi<T: Real>(spec: &ChiSpec<T>, x: &Point3<T>) -> T {
    let r = crate::scalar::norm3(x);
    if r >= spec.support_radius {
        return T::zero();
    }
    spec.laplacian_radial(r) * spec.angular(x)
}
