use super::{coefficient_count, real_harmonics_into, CoefficientVector, Direction, SphereQuadrature};
use crate::scalar::Real;

/// Harmonic values `Y_lm(node)` for every node of a sphere rule, stored
/// node-major. Building the table once lets repeated analysis/synthesis
/// (e.g. inside a Newton loop) skip the Legendre recurrences.
#[derive(Debug, Clone)]
pub struct HarmonicTable<T> {
    band_limit: usize,
    stride: usize,
    values: Vec<T>,
    weights: Vec<T>,
}

impl<T: Real> HarmonicTable<T> {
    pub fn new(band_limit: usize, quad: &SphereQuadrature<T>) -> Self {
        let stride = coefficient_count(band_limit);
        let mut values = vec![T::zero(); stride * quad.len()];
        for ((node, &c), row) in quad
            .nodes()
            .iter()
            .zip(quad.cos_theta())
            .zip(values.chunks_mut(stride))
        {
            let s = (T::one() - c * c).max(T::zero()).sqrt();
            real_harmonics_into(band_limit, c, s, node.phi, row);
        }
        Self {
            band_limit,
            stride,
            values,
            weights: quad.weights().to_vec(),
        }
    }

    pub fn band_limit(&self) -> usize {
        self.band_limit
    }

    pub fn node_count(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// All harmonics at node `k`.
    pub fn row(&self, k: usize) -> &[T] {
        &self.values[k * self.stride..(k + 1) * self.stride]
    }

    /// `sum_lm c_lm Y_lm` at every node. Coefficients above the table's band
    /// limit are ignored.
    pub fn synthesize_nodes(&self, c: &CoefficientVector<T>) -> Vec<T> {
        let n = coefficient_count(c.band_limit().min(self.band_limit));
        let cv = &c.values()[..n];
        (0..self.node_count())
            .map(|k| {
                self.row(k)[..n]
                    .iter()
                    .zip(cv)
                    .fold(T::zero(), |acc, (&y, &a)| acc + y * a)
            })
            .collect()
    }

    /// Projection of node samples onto the harmonics up to `band_limit`,
    /// accumulated sequentially in node order.
    pub fn analyze_nodes(&self, samples: &[T], band_limit: usize) -> CoefficientVector<T> {
        assert!(band_limit <= self.band_limit, "table band limit too small");
        assert_eq!(samples.len(), self.node_count());
        let n = coefficient_count(band_limit);
        let mut out = vec![T::zero(); n];
        for (k, (&f, &w)) in samples.iter().zip(&self.weights).enumerate() {
            let wf = w * f;
            for (o, &y) in out.iter_mut().zip(&self.row(k)[..n]) {
                *o += wf * y;
            }
        }
        CoefficientVector::from_values(band_limit, out).expect("length matches band limit")
    }
}

/// Coefficients `int Y_lm f dOmega` for `l <= band_limit`, evaluated with
/// `quad`. The rule must be exact to degree `L + band limit of f`; anything
/// beyond that aliases and is the caller's responsibility.
pub fn analyze<T: Real>(
    f: impl Fn(&Direction<T>) -> T,
    band_limit: usize,
    quad: &SphereQuadrature<T>,
) -> CoefficientVector<T> {
    let table = HarmonicTable::new(band_limit, quad);
    let samples: Vec<T> = quad.nodes().iter().map(f).collect();
    table.analyze_nodes(&samples, band_limit)
}

/// Pointwise sum `sum_lm c_lm Y_lm(dir)`.
pub fn synthesize<T: Real>(c: &CoefficientVector<T>, dir: &Direction<T>) -> T {
    let y = super::eval_all(c.band_limit(), dir);
    c.values()
        .iter()
        .zip(&y)
        .fold(T::zero(), |acc, (&a, &b)| acc + a * b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harmonics::{canonical_index, eval_harmonic, HarmonicIndex};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use std::f64::consts::PI;

    #[test]
    fn orthonormality_up_to_degree_eight() {
        let quad = SphereQuadrature::<f64>::new(16);
        let table = HarmonicTable::new(8, &quad);
        let n = coefficient_count(8);
        for i in 0..n {
            for j in 0..n {
                let g: f64 = (0..table.node_count())
                    .map(|k| table.weights()[k] * table.row(k)[i] * table.row(k)[j])
                    .sum();
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((g - expect).abs() < 1e-11, "({i},{j}) -> {g}");
            }
        }
    }

    #[test]
    fn y21_normalized() {
        let quad = SphereQuadrature::<f64>::new(4);
        let idx = HarmonicIndex::new(2, 1).unwrap();
        let v = quad.integrate(|d| eval_harmonic(idx, d).unwrap().powi(2));
        assert_abs_diff_eq!(v, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn y32_integrates_to_zero_and_y10_to_one() {
        let quad = SphereQuadrature::<f64>::new(3);
        let y32 = HarmonicIndex::new(3, 2).unwrap();
        assert_abs_diff_eq!(quad.integrate(|d| eval_harmonic(y32, d).unwrap()), 0.0, epsilon = 1e-12);
        let quad = SphereQuadrature::<f64>::new(2);
        let y10 = HarmonicIndex::new(1, 0).unwrap();
        assert_abs_diff_eq!(
            quad.integrate(|d| eval_harmonic(y10, d).unwrap().powi(2)),
            1.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn analyze_constant() {
        let quad = SphereQuadrature::<f64>::new(10);
        let c = analyze(|_| 2.5, 4, &quad);
        assert_abs_diff_eq!(c.get(0, 0), 2.5 * (4.0 * PI).sqrt(), epsilon = 1e-12);
        for v in &c.values()[1..] {
            assert_abs_diff_eq!(*v, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn analyze_reproduces_basis_function() {
        let quad = SphereQuadrature::<f64>::new(8);
        let idx = HarmonicIndex::new(2, -1).unwrap();
        let c = analyze(|d| eval_harmonic(idx, d).unwrap(), 4, &quad);
        for (i, v) in c.values().iter().enumerate() {
            let expect = if i == canonical_index(2, -1) { 1.0 } else { 0.0 };
            assert_abs_diff_eq!(*v, expect, epsilon = 1e-12);
        }
    }

    #[test]
    fn synthesize_zero_and_sphere() {
        let d = Direction::new(1.0, 2.0).unwrap();
        assert_eq!(synthesize(&CoefficientVector::<f64>::zeros(5), &d), 0.0);
        let s = CoefficientVector::sphere(5, 0.75);
        assert_abs_diff_eq!(synthesize(&s, &d), 0.75, epsilon = 1e-15);
    }

    #[test]
    fn roundtrip_at_nodes() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let l = 9;
        let values: Vec<f64> = (0..coefficient_count(l)).map(|_| rng.random_range(-1.0..1.0)).collect();
        let c = CoefficientVector::from_values(l, values).unwrap();
        let quad = SphereQuadrature::<f64>::new(2 * l);
        let back = analyze(|d| synthesize(&c, d), l, &quad);
        for (a, b) in back.values().iter().zip(c.values()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-11);
        }
        let table = HarmonicTable::new(l, &quad);
        for (k, node) in quad.nodes().iter().enumerate() {
            let direct = synthesize(&back, node);
            assert_abs_diff_eq!(direct, table.synthesize_nodes(&c)[k], epsilon = 1e-11);
        }
    }

    proptest! {
        #[test]
        fn analyze_is_linear(alpha in -3.0f64..3.0, beta in -3.0f64..3.0, a in 0.0f64..6.0, b in 0.0f64..6.0) {
            let quad = SphereQuadrature::<f64>::new(14);
            let f = |d: &Direction<f64>| (a * d.theta).cos() * d.phi.sin();
            let g = |d: &Direction<f64>| (d.theta * b).sin() + d.phi.cos().powi(2);
            let lhs = analyze(|d| alpha * f(d) + beta * g(d), 5, &quad);
            let rhs = analyze(f, 5, &quad).scaled(alpha).axpy(beta, &analyze(g, 5, &quad));
            for (x, y) in lhs.values().iter().zip(rhs.values()) {
                prop_assert!((x - y).abs() <= 1e-12 * (1.0 + x.abs()));
            }
        }
    }
}
