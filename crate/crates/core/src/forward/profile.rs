use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::scalar::Real;

/// Piecewise-polynomial, nonnegative radial density `rho0(r)` on
/// `[0, r_K]`, zero beyond `r_K`.
///
/// `coefficients[i]` holds the polynomial on `[r_i, r_{i+1})` in ascending
/// powers of the absolute radius `r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawProfile<T>", into = "RawProfile<T>", bound = "T: Real")]
pub struct RadialProfile<T> {
    breakpoints: Vec<T>,
    coefficients: Vec<Vec<T>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound = "T: Real")]
struct RawProfile<T> {
    breakpoints: Vec<T>,
    coefficients: Vec<Vec<T>>,
}

impl<T: Real> TryFrom<RawProfile<T>> for RadialProfile<T> {
    type Error = Error;
    fn try_from(raw: RawProfile<T>) -> Result<Self> {
        Self::new(raw.breakpoints, raw.coefficients)
    }
}

impl<T: Real> From<RadialProfile<T>> for RawProfile<T> {
    fn from(p: RadialProfile<T>) -> Self {
        Self {
            breakpoints: p.breakpoints,
            coefficients: p.coefficients,
        }
    }
}

const NONNEGATIVITY_SAMPLES: usize = 64;

impl<T: Real> RadialProfile<T> {
    pub fn new(breakpoints: Vec<T>, coefficients: Vec<Vec<T>>) -> Result<Self> {
        if breakpoints.len() < 2 {
            return domain("radial profile needs at least two breakpoints");
        }
        if breakpoints[0] != T::zero() {
            return domain("radial profile must start at r = 0");
        }
        if breakpoints.windows(2).any(|w| !(w[0] < w[1])) {
            return domain("profile breakpoints must be strictly increasing");
        }
        if coefficients.len() != breakpoints.len() - 1 {
            return domain(format!(
                "{} breakpoints need {} polynomial pieces, got {}",
                breakpoints.len(),
                breakpoints.len() - 1,
                coefficients.len()
            ));
        }
        if coefficients.iter().flatten().any(|c| !c.is_finite()) {
            return domain("profile coefficients must be finite");
        }
        let p = Self {
            breakpoints,
            coefficients,
        };
        p.check_nonnegative()?;
        Ok(p)
    }

    /// `rho0(r) = density` on `[0, outer_radius]`.
    pub fn constant(density: T, outer_radius: T) -> Result<Self> {
        Self::new(vec![T::zero(), outer_radius], vec![vec![density]])
    }

    /// Continuous piecewise-linear profile through `(breakpoints[i], values[i])`.
    pub fn piecewise_linear(breakpoints: Vec<T>, values: Vec<T>) -> Result<Self> {
        if values.len() != breakpoints.len() {
            return domain("piecewise-linear profile needs one value per breakpoint");
        }
        let coefficients = breakpoints
            .windows(2)
            .zip(values.windows(2))
            .map(|(r, v)| {
                let slope = (v[1] - v[0]) / (r[1] - r[0]);
                vec![v[0] - slope * r[0], slope]
            })
            .collect();
        Self::new(breakpoints, coefficients)
    }

    fn check_nonnegative(&self) -> Result<()> {
        let scale = self.max_abs_sample().max(T::eps().powi(3));
        let tol = T::lit(1e-12) * scale;
        for (i, w) in self.breakpoints.windows(2).enumerate() {
            for k in 0..=NONNEGATIVITY_SAMPLES {
                let t = T::from_usize_lossy(k) / T::from_usize_lossy(NONNEGATIVITY_SAMPLES);
                let r = w[0] + (w[1] - w[0]) * t;
                let v = eval_poly(&self.coefficients[i], r);
                if v < -tol {
                    return domain(format!("radial density is negative ({v}) at r = {r}"));
                }
            }
        }
        Ok(())
    }

    fn max_abs_sample(&self) -> T {
        let mut m = T::zero();
        for (i, w) in self.breakpoints.windows(2).enumerate() {
            for r in [w[0], w[1], (w[0] + w[1]) * T::lit(0.5)] {
                m = m.max(eval_poly(&self.coefficients[i], r).abs());
            }
        }
        m
    }

    pub fn breakpoints(&self) -> &[T] {
        &self.breakpoints
    }

    pub fn coefficients(&self) -> &[Vec<T>] {
        &self.coefficients
    }

    pub fn outer_radius(&self) -> T {
        *self.breakpoints.last().unwrap()
    }

    fn piece_of(&self, r: T) -> usize {
        let k = self.breakpoints.len() - 1;
        // index of the last breakpoint <= r, clamped to a valid piece
        let pos = self.breakpoints.partition_point(|&b| b <= r);
        pos.saturating_sub(1).min(k - 1)
    }

    /// `rho0(r)`; zero for `r > r_K` and for negative `r`.
    pub fn value(&self, r: T) -> T {
        if r < T::zero() || r > self.outer_radius() {
            return T::zero();
        }
        eval_poly(&self.coefficients[self.piece_of(r)], r)
    }

    /// One-sided limits of `rho0` at an interior breakpoint `r_i`.
    fn jump_at(&self, i: usize) -> T {
        let r = self.breakpoints[i];
        eval_poly(&self.coefficients[i], r) - eval_poly(&self.coefficients[i - 1], r)
    }

    /// Interior breakpoints where `rho0` jumps.
    pub fn discontinuities(&self) -> Vec<T> {
        let tol = T::lit(1e-12) * self.max_abs_sample().max(T::eps().powi(3));
        (1..self.breakpoints.len() - 1)
            .filter(|&i| self.jump_at(i).abs() > tol)
            .map(|i| self.breakpoints[i])
            .collect()
    }

    /// Radial moment `mu_n(w) = int_0^w rho0(r) r^n dr`, in closed form.
    pub fn moment(&self, n: u32, w: T) -> Result<T> {
        if !(w >= T::zero()) {
            return domain(format!("moment upper limit {w} is negative"));
        }
        if w > self.outer_radius() {
            return domain(format!(
                "moment upper limit {w} beyond profile domain {}",
                self.outer_radius()
            ));
        }
        let mut total = T::zero();
        for (i, seg) in self.breakpoints.windows(2).enumerate() {
            if seg[0] >= w {
                break;
            }
            let hi = seg[1].min(w);
            for (k, &c) in self.coefficients[i].iter().enumerate() {
                let p = n as i32 + k as i32 + 1;
                total += c * (hi.powi(p) - seg[0].powi(p)) / T::from_usize_lossy(p as usize);
            }
        }
        Ok(total)
    }

    /// Total mass `4 pi mu_2(r_K)` of the spherically symmetric distribution.
    pub fn total_mass(&self) -> T {
        T::lit(4.0) * T::pi() * self.moment(2, self.outer_radius()).expect("within domain")
    }

    /// The polynomial pieces that intersect `[a, b]`, clipped to it.
    pub(crate) fn segments_within(&self, a: T, b: T) -> impl Iterator<Item = (T, T)> + '_ {
        self.breakpoints.windows(2).filter_map(move |seg| {
            let lo = seg[0].max(a);
            let hi = seg[1].min(b);
            (lo < hi).then_some((lo, hi))
        })
    }

    /// Highest polynomial degree over all pieces.
    pub fn max_degree(&self) -> usize {
        self.coefficients
            .iter()
            .map(|c| c.len().saturating_sub(1))
            .max()
            .unwrap_or(0)
    }

    /// Same profile with every coefficient multiplied by `s > 0`.
    pub fn scaled(&self, s: T) -> Result<Self> {
        Self::new(
            self.breakpoints.clone(),
            self.coefficients
                .iter()
                .map(|c| c.iter().map(|&v| v * s).collect())
                .collect(),
        )
    }
}

fn eval_poly<T: Real>(c: &[T], r: T) -> T {
    c.iter().rev().fold(T::zero(), |acc, &a| acc * r + a)
}
