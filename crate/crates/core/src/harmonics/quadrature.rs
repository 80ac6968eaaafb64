use serde::{Deserialize, Serialize};

use super::Direction;
use crate::scalar::Real;

/// Gauss-Legendre nodes and weights on `[-1, 1]` with `n` points, exact for
/// polynomials of degree `2n - 1`. Nodes are returned in ascending order.
pub fn gauss_legendre<T: Real>(n: usize) -> (Vec<T>, Vec<T>) {
    assert!(n > 0, "Gauss-Legendre rule needs at least one node");
    let mut nodes = vec![T::zero(); n];
    let mut weights = vec![T::zero(); n];
    let nf = n as f64;
    let tol = T::eps() * T::lit(4.0);
    // symmetric: compute the nonnegative half, mirror the rest
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess for the i-th largest root
        let guess = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut x = T::lit(guess);
        let mut dp = T::one();
        for _ in 0..100 {
            let (p, d) = legendre_and_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= tol {
                break;
            }
        }
        let (_, d) = legendre_and_derivative(n, x);
        dp = if d.is_finite() { d } else { dp };
        let w = T::lit(2.0) / ((T::one() - x * x) * dp * dp);
        nodes[n - 1 - i] = x;
        nodes[i] = -x;
        weights[n - 1 - i] = w;
        weights[i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = T::zero();
    }
    (nodes, weights)
}

fn legendre_and_derivative<T: Real>(n: usize, x: T) -> (T, T) {
    let mut p0 = T::one();
    let mut p1 = x;
    for k in 2..=n {
        let kf = T::from_usize_lossy(k);
        let p2 = ((T::lit(2.0) * kf - T::one()) * x * p1 - (kf - T::one()) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (T::one(), T::zero());
    }
    let nf = T::from_usize_lossy(n);
    let d = nf * (x * p1 - p0) / (x * x - T::one());
    (p1, d)
}

/// Product rule on the unit sphere: Gauss-Legendre in `cos theta` times the
/// uniform trapezoid rule in `phi`.
///
/// Integrates every spherical polynomial of total degree up to
/// `exactness_degree` exactly. Nodes are stored with theta as the outer loop.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct SphereQuadrature<T> {
    nodes: Vec<Direction<T>>,
    cos_theta: Vec<T>,
    weights: Vec<T>,
    exactness_degree: usize,
    n_theta: usize,
    n_phi: usize,
}

impl<T: Real> SphereQuadrature<T> {
    pub fn new(exactness_degree: usize) -> Self {
        let n_theta = exactness_degree / 2 + 1;
        let n_phi = exactness_degree + 1;
        let (x, w) = gauss_legendre::<T>(n_theta);
        let dphi = T::two_pi() / T::from_usize_lossy(n_phi);
        let mut nodes = Vec::with_capacity(n_theta * n_phi);
        let mut cos_theta = Vec::with_capacity(n_theta * n_phi);
        let mut weights = Vec::with_capacity(n_theta * n_phi);
        // descending cos theta, i.e. ascending theta from the north pole
        for i in (0..n_theta).rev() {
            let theta = x[i].acos();
            for j in 0..n_phi {
                nodes.push(Direction {
                    theta,
                    phi: dphi * T::from_usize_lossy(j),
                });
                cos_theta.push(x[i]);
                weights.push(w[i] * dphi);
            }
        }
        Self {
            nodes,
            cos_theta,
            weights,
            exactness_degree,
            n_theta,
            n_phi,
        }
    }

    pub fn nodes(&self) -> &[Direction<T>] {
        &self.nodes
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// `cos theta` of each node, exact from the Legendre root finder.
    pub fn cos_theta(&self) -> &[T] {
        &self.cos_theta
    }

    pub fn exactness_degree(&self) -> usize {
        self.exactness_degree
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn grid_shape(&self) -> (usize, usize) {
        (self.n_theta, self.n_phi)
    }

    /// Sum of `w_k f(node_k)` in node order.
    pub fn integrate(&self, mut f: impl FnMut(&Direction<T>) -> T) -> T {
        self.nodes
            .iter()
            .zip(&self.weights)
            .fold(T::zero(), |acc, (d, &w)| acc + w * f(d))
    }

    /// Unit vectors of the nodes.
    pub fn unit_vectors(&self) -> Vec<[T; 3]> {
        self.nodes
            .iter()
            .zip(&self.cos_theta)
            .map(|(d, &c)| {
                let s = (T::one() - c * c).max(T::zero()).sqrt();
                let (sp, cp) = d.phi.sin_cos();
                [s * cp, s * sp, c]
            })
            .collect()
    }
}

/// Quadrature on a solid ball of radius `support_radius`: a sphere rule for
/// the angles and a Gauss-Legendre rule for the radius.
///
/// The radial rule is kept on the reference interval `[0, 1]` so that density
/// models can map it onto each of their own polynomial pieces.
#[derive(Debug, Clone)]
pub struct BallQuadrature<T> {
    pub sphere: SphereQuadrature<T>,
    radial_nodes: Vec<T>,
    radial_weights: Vec<T>,
    pub support_radius: T,
}

impl<T: Real> BallQuadrature<T> {
    pub fn new(angular_degree: usize, radial_points: usize, support_radius: T) -> Self {
        let (x, w) = gauss_legendre::<T>(radial_points);
        let half = T::lit(0.5);
        Self {
            sphere: SphereQuadrature::new(angular_degree),
            radial_nodes: x.iter().map(|&xi| half * (xi + T::one())).collect(),
            radial_weights: w.iter().map(|&wi| half * wi).collect(),
            support_radius,
        }
    }

    /// Same rule with angular degree and radial point count doubled.
    pub fn refined(&self) -> Self {
        Self::new(
            2 * self.sphere.exactness_degree() + 1,
            2 * self.radial_nodes.len(),
            self.support_radius,
        )
    }

    pub fn radial_points(&self) -> usize {
        self.radial_nodes.len()
    }

    /// Radial polynomial degree integrated exactly (including the `r^2`
    /// volume factor).
    pub fn radial_exactness(&self) -> usize {
        2 * self.radial_nodes.len() - 1
    }

    /// Radial nodes on `[a, b]` paired with weights that include the `r^2`
    /// volume element.
    pub fn radial_rule(&self, a: T, b: T) -> impl Iterator<Item = (T, T)> + '_ {
        let len = b - a;
        self.radial_nodes
            .iter()
            .zip(&self.radial_weights)
            .map(move |(&x, &w)| {
                let r = a + len * x;
                (r, w * len * r * r)
            })
    }

    /// `sum over nodes` of the volume element, which must equal the ball
    /// volume.
    pub fn volume(&self) -> T {
        let radial: T = self
            .radial_rule(T::zero(), self.support_radius)
            .fold(T::zero(), |acc, (_, w)| acc + w);
        let angular = self.sphere.weights().iter().fold(T::zero(), |acc, &w| acc + w);
        radial * angular
    }
}
