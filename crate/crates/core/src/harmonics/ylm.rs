use serde::{Deserialize, Serialize};

use super::{canonical_index, coefficient_count, HarmonicIndex};
use crate::error::{domain, Result};
use crate::scalar::{Point3, Real};

/// A point on the unit sphere: colatitude `theta` in `[0, pi]` and longitude
/// `phi` in `[0, 2pi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Direction<T> {
    pub theta: T,
    pub phi: T,
}

impl<T: Real> Direction<T> {
    pub fn new(theta: T, phi: T) -> Result<Self> {
        if !(theta >= T::zero() && theta <= T::pi()) {
            return domain(format!("colatitude {theta} outside [0, pi]"));
        }
        if !(phi >= T::zero() && phi < T::two_pi()) {
            return domain(format!("longitude {phi} outside [0, 2pi)"));
        }
        Ok(Self { theta, phi })
    }

    /// Direction of a nonzero vector together with its length. The zero
    /// vector maps to the north pole with length zero.
    pub fn from_cartesian(v: &Point3<T>) -> (T, Self) {
        let rho2 = v[0] * v[0] + v[1] * v[1];
        let r = (rho2 + v[2] * v[2]).sqrt();
        if r == T::zero() {
            return (
                r,
                Self {
                    theta: T::zero(),
                    phi: T::zero(),
                },
            );
        }
        let theta = rho2.sqrt().atan2(v[2]);
        let mut phi = v[1].atan2(v[0]);
        if phi < T::zero() {
            phi += T::two_pi();
        }
        if phi >= T::two_pi() {
            phi = T::zero();
        }
        (r, Self { theta, phi })
    }

    pub fn unit_vector(&self) -> Point3<T> {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        [st * cp, st * sp, ct]
    }
}

/// Evaluates every real orthonormal harmonic with `l <= lmax` at the
/// direction given by `(cos theta, sin theta, phi)`, writing them in
/// canonical order into `out`.
///
/// Normalization: `Y_l0 = sqrt((2l+1)/4pi) P_l(cos theta)`, and for `m > 0`
/// `Y_lm ~ sqrt(2) cos(m phi)`, `Y_l,-m ~ sqrt(2) sin(m phi)`, without the
/// Condon-Shortley phase, so `Y_11` is proportional to `+x`.
pub fn real_harmonics_into<T: Real>(lmax: usize, cos_t: T, sin_t: T, phi: T, out: &mut [T]) {
    assert!(out.len() >= coefficient_count(lmax));
    let sqrt2 = T::lit(std::f64::consts::SQRT_2);
    let mut p_mm = T::one() / (T::lit(4.0) * T::pi()).sqrt();
    for m in 0..=lmax {
        if m > 0 {
            let mf = T::from_usize_lossy(m);
            p_mm *= ((T::lit(2.0) * mf + T::one()) / (T::lit(2.0) * mf)).sqrt() * sin_t;
        }
        let (sin_mp, cos_mp) = if m == 0 {
            (T::zero(), T::one())
        } else {
            (T::from_usize_lossy(m) * phi).sin_cos()
        };
        let mut store = |l: usize, p: T| {
            if m == 0 {
                out[canonical_index(l, 0)] = p;
            } else {
                out[canonical_index(l, m as i64)] = sqrt2 * p * cos_mp;
                out[canonical_index(l, -(m as i64))] = sqrt2 * p * sin_mp;
            }
        };
        store(m, p_mm);
        if m == lmax {
            break;
        }
        let mf = T::from_usize_lossy(m);
        let mut p_prev = p_mm;
        let mut p_cur = (T::lit(2.0) * mf + T::lit(3.0)).sqrt() * cos_t * p_mm;
        store(m + 1, p_cur);
        for l in (m + 2)..=lmax {
            let lf = T::from_usize_lossy(l);
            let a = ((T::lit(4.0) * lf * lf - T::one()) / (lf * lf - mf * mf)).sqrt();
            let lm1 = lf - T::one();
            let b = ((lm1 * lm1 - mf * mf) / (T::lit(4.0) * lm1 * lm1 - T::one())).sqrt();
            let p_next = a * (cos_t * p_cur - b * p_prev);
            store(l, p_next);
            p_prev = p_cur;
            p_cur = p_next;
        }
    }
}

/// All harmonics with `l <= lmax` at `dir`, in canonical order.
pub fn eval_all<T: Real>(lmax: usize, dir: &Direction<T>) -> Vec<T> {
    let mut out = vec![T::zero(); coefficient_count(lmax)];
    let (s, c) = dir.theta.sin_cos();
    real_harmonics_into(lmax, c, s, dir.phi, &mut out);
    out
}

/// Single real orthonormal harmonic `Y_lm(dir)`.
pub fn eval_harmonic<T: Real>(idx: HarmonicIndex, dir: &Direction<T>) -> Result<T> {
    idx.validate()?;
    let l = idx.l as usize;
    Ok(eval_all(l, dir)[canonical_index(l, idx.m)])
}

/// Harmonics evaluated along a Cartesian vector (its length is ignored).
pub(crate) fn harmonics_at_vector<T: Real>(lmax: usize, v: &Point3<T>, out: &mut [T]) -> T {
    let rho = (v[0] * v[0] + v[1] * v[1]).sqrt();
    let r = (rho * rho + v[2] * v[2]).sqrt();
    if r == T::zero() {
        real_harmonics_into(lmax, T::one(), T::zero(), T::zero(), out);
        return r;
    }
    let phi = v[1].atan2(v[0]);
    real_harmonics_into(lmax, v[2] / r, rho / r, phi, out);
    r
}
