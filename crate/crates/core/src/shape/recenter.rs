use crate::error::{domain, Result};
use crate::forward::{DensityModel, ForwardEvaluator, GravityConstant};
use crate::harmonics::ylm::harmonics_at_vector;
use crate::harmonics::{
    canonical_index, coefficient_count, BallQuadrature, CoefficientVector, HarmonicTable, SphereQuadrature,
};
use crate::scalar::{scale3, sub3, Point3, Real};

fn check_mass<T: Real>(total: T, scale: T) -> Result<()> {
    if !(total.abs() > T::lit(1e-12) * scale) {
        return domain(format!(
            "total mass {total} is (near) zero; the center of mass is undefined"
        ));
    }
    Ok(())
}

/// Center of mass `int rho r / int rho` of a model, discretized by `quad`.
pub fn center_of_mass<T: Real>(model: &DensityModel<T>, quad: &BallQuadrature<T>) -> Result<Point3<T>> {
    let elements = model.mass_elements(quad)?;
    let mut total = T::zero();
    let mut abs = T::zero();
    let mut first = [T::zero(); 3];
    for e in &elements {
        total += e.mass;
        abs += e.mass.abs();
        for i in 0..3 {
            first[i] += e.mass * e.position[i];
        }
    }
    check_mass(total, abs)?;
    Ok(scale3(&first, T::one() / total))
}

/// The model translated so that its center of mass sits at the origin,
/// together with the translation `t` that was removed.
pub fn recenter_model<T: Real>(
    model: &DensityModel<T>,
    quad: &BallQuadrature<T>,
) -> Result<(DensityModel<T>, Point3<T>)> {
    let t = center_of_mass(model, quad)?;
    let shifted = DensityModel::Shifted {
        offset: sub3(&[T::zero(); 3], &t),
        model: Box::new(model.clone()),
    };
    Ok((shifted, t))
}

/// Center of mass read off exterior multipoles:
/// `t = sqrt(3) (d_11, d_1-1, d_10) / d_00`.
pub fn center_of_mass_from_multipoles<T: Real>(d: &CoefficientVector<T>) -> Result<Point3<T>> {
    if d.band_limit() < 1 {
        return domain("center of mass needs multipoles up to degree 1");
    }
    let d00 = d.get(0, 0);
    check_mass(d00, d.norm())?;
    let s = T::lit(3.0).sqrt() / d00;
    Ok([d.get(1, 1) * s, d.get(1, -1) * s, d.get(1, 0) * s])
}

/// Translation matrix `c[(lm),(l'm')] = int R_lm(u - t) Y_l'm'(u) dOmega`,
/// with `R_lm(x) = |x|^l Y_lm(x/|x|)` the regular solid harmonics. Because
/// `R_lm(x - t)` is a harmonic polynomial of degree `l`, it equals
/// `sum c[(lm),(l'm')] R_l'm'(x)` exactly, and `c` vanishes for `l' > l`.
fn translation_matrix<T: Real>(band_limit: usize, t: &Point3<T>) -> Vec<Vec<T>> {
    let n = coefficient_count(band_limit);
    let quad = SphereQuadrature::new(2 * band_limit);
    let table = HarmonicTable::new(band_limit, &quad);
    let mut c = vec![vec![T::zero(); n]; n];
    let mut y = vec![T::zero(); n];
    for (k, u) in quad.unit_vectors().iter().enumerate() {
        let w = table.weights()[k];
        let yu = table.row(k);
        let x = sub3(u, t);
        let r = harmonics_at_vector(band_limit, &x, &mut y);
        let mut rl = w;
        for l in 0..=band_limit {
            for m in -(l as i64)..=(l as i64) {
                let i = canonical_index(l, m);
                let ri = rl * y[i];
                for (cij, &yj) in c[i].iter_mut().zip(&yu[..coefficient_count(l)]) {
                    *cij += ri * yj;
                }
            }
            rl *= r;
        }
    }
    c
}

/// Exterior multipoles of the same body seen from its center of mass,
/// together with the translation `t` (the old center of mass). The result
/// has `d_1m = 0` up to roundoff, and does not depend on `G`.
pub fn recenter_multipoles<T: Real>(d: &CoefficientVector<T>) -> Result<(CoefficientVector<T>, Point3<T>)> {
    let t = center_of_mass_from_multipoles(d)?;
    let lmax = d.band_limit();
    let c = translation_matrix(lmax, &t);
    // work with q_lm proportional to the mass moments: q = (2l+1) d
    let weight = |l: i64| T::from_usize_lossy(2 * l as usize + 1);
    let q: Vec<T> = d.iter().map(|(idx, v)| v * weight(idx.l)).collect();
    let mut out = CoefficientVector::zeros(lmax);
    for (i, (idx, _)) in d.iter().enumerate() {
        let s = c[i].iter().zip(&q).fold(T::zero(), |acc, (&a, &b)| acc + a * b);
        out.values_mut()[i] = s / weight(idx.l);
    }
    Ok((out, t))
}

/// Multipoles of `model` about its own center of mass.
pub fn centered_multipoles<T: Real>(
    model: &DensityModel<T>,
    gravity: GravityConstant<T>,
    band_limit: usize,
    quad: &BallQuadrature<T>,
) -> Result<(CoefficientVector<T>, Point3<T>)> {
    let (shifted, t) = recenter_model(model, quad)?;
    let d = ForwardEvaluator::new(&shifted, gravity, quad)?.multipoles(band_limit);
    Ok((d, t))
}
