use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::scalar::{norm3, sub3, Point3, Real};

/// Point-mass sources inside the ball of radius `radius` and receivers
/// strictly outside it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound = "T: Real")]
pub struct PointLattice<T> {
    pub sources: Vec<Point3<T>>,
    pub receivers: Vec<Point3<T>>,
    pub radius: T,
    /// Volume represented by each source, for regular grids.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cell_volume: Option<T>,
}

fn check_distinct<T: Real>(points: &[Point3<T>], what: &str) -> Result<()> {
    let mut sorted: Vec<&Point3<T>> = points.iter().collect();
    sorted.sort_by(|a, b| {
        a.iter()
            .zip(b.iter())
            .map(|(x, y)| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
        return domain(format!("{what} repeat the point {:?}", w[0]));
    }
    Ok(())
}

impl<T: Real> PointLattice<T> {
    pub fn new(sources: Vec<Point3<T>>, receivers: Vec<Point3<T>>, radius: T) -> Result<Self> {
        let lattice = Self {
            sources,
            receivers,
            radius,
            cell_volume: None,
        };
        lattice.validate()?;
        Ok(lattice)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.radius > T::zero()) || !self.radius.is_finite() {
            return domain(format!("lattice radius {} must be positive", self.radius));
        }
        if self.sources.is_empty() || self.receivers.is_empty() {
            return domain("lattice needs at least one source and one receiver");
        }
        for p in self.sources.iter().chain(&self.receivers) {
            if p.iter().any(|v| !v.is_finite()) {
                return domain(format!("non-finite lattice point {p:?}"));
            }
        }
        if let Some(p) = self.sources.iter().find(|p| norm3(p) > self.radius) {
            return domain(format!("source {p:?} lies outside the radius {}", self.radius));
        }
        if let Some(p) = self.receivers.iter().find(|p| norm3(p) <= self.radius) {
            return domain(format!("receiver {p:?} is not outside the radius {}", self.radius));
        }
        check_distinct(&self.sources, "sources")?;
        check_distinct(&self.receivers, "receivers")?;
        if let Some(v) = self.cell_volume {
            if !(v > T::zero()) {
                return domain("cell volume must be positive");
            }
        }
        Ok(())
    }

    pub fn source_count(&self) -> usize {
        self.sources.len()
    }

    pub fn receiver_count(&self) -> usize {
        self.receivers.len()
    }

    /// `n^3` sources at the cell centers of the unit cube about the origin,
    /// and `n^2` receivers on the matching grid of the plane `z = 2R`, with
    /// `R = sqrt(3)/2` (the cube's circumradius).
    pub fn slab(n: usize) -> Result<Self> {
        if n == 0 {
            return domain("slab refinement must be at least 1");
        }
        let radius = T::lit(0.75).sqrt();
        let axis = cell_centers::<T>(n, T::one());
        let mut sources = Vec::with_capacity(n * n * n);
        for &x in &axis {
            for &y in &axis {
                for &z in &axis {
                    sources.push([x, y, z]);
                }
            }
        }
        let height = T::lit(2.0) * radius;
        let receivers = axis
            .iter()
            .flat_map(|&x| axis.iter().map(move |&y| [x, y, height]))
            .collect();
        let mut lattice = Self::new(sources, receivers, radius)?;
        lattice.cell_volume = Some(T::one() / T::from_usize_lossy(n * n * n));
        Ok(lattice)
    }

    /// Cell centers of the cubic grid of spacing `h` that fall inside the
    /// ball of radius `radius`, with `receivers` points spread over the
    /// sphere of radius `receiver_radius`.
    pub fn ball_grid(radius: T, h: T, receivers: usize, receiver_radius: T) -> Result<Self> {
        if !(h > T::zero()) || !(radius > T::zero()) {
            return domain("grid spacing and radius must be positive");
        }
        let cells = (radius / h).ceil().to_usize().unwrap_or(0);
        let mut sources = Vec::new();
        let coord = |i: usize| (T::from_usize_lossy(i) + T::lit(0.5)) * h - T::from_usize_lossy(cells) * h;
        for i in 0..2 * cells {
            for j in 0..2 * cells {
                for k in 0..2 * cells {
                    let p = [coord(i), coord(j), coord(k)];
                    if norm3(&p) <= radius {
                        sources.push(p);
                    }
                }
            }
        }
        let mut lattice = Self::new(sources, fibonacci_sphere(receivers, receiver_radius), radius)?;
        lattice.cell_volume = Some(h * h * h);
        Ok(lattice)
    }

    /// `sources` points uniform in the ball of radius `radius` and
    /// `receivers` points uniform in the shell `1.25 R <= r <= 2 R`, drawn
    /// from a seeded generator. A candidate closer than `0.05 R` to an
    /// accepted point of the same kind is redrawn.
    pub fn random(sources: usize, receivers: usize, radius: T, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sep = T::lit(0.05) * radius;
        let s = draw_separated(&mut rng, sources, sep, |rng| {
            let u = random_direction::<T>(rng);
            let r = T::lit(rng.random::<f64>().cbrt()) * radius;
            [u[0] * r, u[1] * r, u[2] * r]
        })?;
        let r = draw_separated(&mut rng, receivers, sep, |rng| {
            let u = random_direction::<T>(rng);
            let r = radius * T::lit(1.25 + 0.75 * rng.random::<f64>());
            [u[0] * r, u[1] * r, u[2] * r]
        })?;
        Self::new(s, r, radius)
    }

    /// The same lattice with receiver `index` listed twice, which makes the
    /// forward matrix rank deficient. Skips validation on purpose.
    pub fn with_duplicated_receiver(&self, index: usize) -> Result<Self> {
        let p = *self
            .receivers
            .get(index)
            .ok_or_else(|| crate::Error::Domain(format!("no receiver {index}")))?;
        let mut out = self.clone();
        out.receivers.push(p);
        Ok(out)
    }
}

fn cell_centers<T: Real>(n: usize, side: T) -> Vec<T> {
    let nn = T::from_usize_lossy(n);
    (0..n)
        .map(|i| side * ((T::from_usize_lossy(i) + T::lit(0.5)) / nn - T::lit(0.5)))
        .collect()
}

fn random_direction<T: Real>(rng: &mut ChaCha8Rng) -> Point3<T> {
    let z: f64 = rng.random_range(-1.0..=1.0);
    let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let s = (1.0 - z * z).max(0.0).sqrt();
    [T::lit(s * phi.cos()), T::lit(s * phi.sin()), T::lit(z)]
}

fn draw_separated<T: Real>(
    rng: &mut ChaCha8Rng,
    count: usize,
    sep: T,
    mut draw: impl FnMut(&mut ChaCha8Rng) -> Point3<T>,
) -> Result<Vec<Point3<T>>> {
    let mut out: Vec<Point3<T>> = Vec::with_capacity(count);
    let mut attempts = 0usize;
    while out.len() < count {
        attempts += 1;
        if attempts > 10_000 * (count + 1) {
            return domain(format!("could not place {count} points with separation {sep}"));
        }
        let p = draw(rng);
        if out.iter().all(|q| norm3(&sub3(&p, q)) >= sep) {
            out.push(p);
        }
    }
    Ok(out)
}

/// `n` nearly uniform points on the sphere of radius `radius` (golden-angle
/// spiral).
pub fn fibonacci_sphere<T: Real>(n: usize, radius: T) -> Vec<Point3<T>> {
    let golden = T::pi() * (T::lit(3.0) - T::lit(5.0).sqrt());
    let nn = T::from_usize_lossy(n);
    (0..n)
        .map(|i| {
            let fi = T::from_usize_lossy(i);
            let z = T::one() - (T::lit(2.0) * fi + T::one()) / nn;
            let s = (T::one() - z * z).max(T::zero()).sqrt();
            let (sp, cp) = (golden * fi).sin_cos();
            [radius * s * cp, radius * s * sp, radius * z]
        })
        .collect()
}
