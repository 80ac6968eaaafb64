use approx::assert_relative_eq;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::error::Error;
use crate::forward::{multipoles, DensityModel, GravityConstant, PointMass, RadialProfile};
use crate::harmonics::{BallQuadrature, CoefficientVector};

const SQRT_4PI: f64 = 3.544_907_701_811_032;

fn constant(c: f64) -> RadialProfile<f64> {
    RadialProfile::constant(c, 2.0).unwrap()
}

fn profiles() -> Vec<RadialProfile<f64>> {
    vec![
        constant(1.0),
        RadialProfile::new(vec![0.0, 2.0], vec![vec![2.0, -0.75]]).unwrap(),
        RadialProfile::piecewise_linear(vec![0.0, 0.6, 1.4, 2.0], vec![3.0, 2.2, 1.0, 0.5]).unwrap(),
    ]
}

fn true_shape() -> CoefficientVector<f64> {
    let mut s = CoefficientVector::sphere(8, 1.0);
    s.set(2, 0, 0.05);
    s.set(3, 1, 0.02);
    s
}

fn opts(l: usize) -> NewtonOptions<f64> {
    NewtonOptions {
        band_limit: l,
        ..Default::default()
    }
}

#[test]
fn mu_closed_forms() {
    let p = constant(3.0);
    assert_eq!(mu(&p, 4, 0.0).unwrap(), 0.0);
    assert_relative_eq!(mu(&p, 4, 1.5).unwrap(), 3.0 * 1.5f64.powi(5) / 5.0, max_relative = 1e-14);
    assert!(mu(&p, 2, -0.1).is_err());
    assert!(mu(&p, 2, 2.1).is_err());
}

#[test]
fn sphere_targets() {
    let a0 = 0.8;
    let f = shape_forward(&CoefficientVector::sphere(6, a0), &constant(2.5), 6).unwrap();
    assert_relative_eq!(f.get(0, 0), SQRT_4PI * 2.5 * a0.powi(3) / 3.0, max_relative = 1e-13);
    for (idx, v) in f.iter().skip(1) {
        assert!(v.abs() < 1e-12, "{idx:?} = {v}");
    }
}

#[test]
fn targets_match_carved_body_multipoles() {
    let g = GravityConstant::new(1.3).unwrap();
    let quad = BallQuadrature::new(72, 8, 2.0);
    for profile in profiles() {
        let shape = true_shape();
        let model = DensityModel::CarvedRadialBody {
            profile: profile.clone(),
            shape: shape.clone(),
        };
        let d = multipoles(&model, g, 8, &quad).unwrap();
        let from_shape = targets_to_multipoles(&shape_forward(&shape, &profile, 8).unwrap(), g);
        let err = d.sub(&from_shape).norm() / d.norm();
        assert!(err < 1e-9, "relative mismatch {err:e}");
    }
}

#[test]
fn derivative_is_diagonal_at_sphere() {
    let l = 10;
    for profile in profiles() {
        let a0 = 0.9;
        let g = shape_forward_derivative(&CoefficientVector::sphere(l, a0), &profile, l).unwrap();
        let rho = profile.value(a0);
        for (i, idx) in crate::harmonics::HarmonicIndex::all(l).enumerate() {
            let expect = rho * a0.powi(idx.l as i32 + 2);
            assert_relative_eq!(g[(i, i)], expect, max_relative = 1e-12);
            for j in 0..g.ncols() {
                if j != i {
                    assert!(g[(i, j)].abs() <= 1e-12 * g[(i, i)], "({i},{j}) = {:e}", g[(i, j)]);
                }
            }
        }
    }
}

#[test]
fn derivative_matches_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let l = 6;
    for profile in profiles() {
        let map = ShapeForwardMap::new(&profile, l, DEFAULT_QUADRATURE_MARGIN);
        let mut s0 = CoefficientVector::sphere(l, 1.0);
        let mut ds = CoefficientVector::zeros(l);
        for k in 1..s0.len() {
            s0.values_mut()[k] = rng.random_range(-0.01..0.01);
            ds.values_mut()[k] = rng.random_range(-1.0..1.0);
        }
        let jac = map.derivative(&s0).unwrap();
        let lin = &jac * nalgebra::DVector::from_column_slice(ds.values());
        let h = 1e-5;
        let fp = map.evaluate(&s0.axpy(h, &ds)).unwrap();
        let fm = map.evaluate(&s0.axpy(-h, &ds)).unwrap();
        let fd = fp.sub(&fm).scaled(0.5 / h);
        let diff = fd.values().iter().zip(lin.iter()).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        assert!(diff <= 1e-7 * lin.norm(), "fd error {diff:e} vs {:e}", lin.norm());
    }
}

#[test]
fn derivative_is_linear() {
    let l = 5;
    let mut shape = CoefficientVector::sphere(l, 1.1);
    shape.set(2, -1, 0.03);
    let g = shape_forward_derivative(&shape, &profiles()[2], l).unwrap();
    let u = nalgebra::DVector::from_fn(g.ncols(), |i, _| (i as f64 * 0.37).sin());
    let v = nalgebra::DVector::from_fn(g.ncols(), |i, _| (i as f64 * 1.3).cos());
    let lhs = &g * (&u * 2.5 - &v * 0.75);
    let rhs = (&g * &u) * 2.5 - (&g * &v) * 0.75;
    assert!((lhs - rhs).amax() < 1e-13);
}

#[test]
fn nonpositive_shape_rejected() {
    let mut s = CoefficientVector::sphere(2, 0.1);
    s.set(1, 0, 0.5);
    assert!(matches!(shape_forward(&s, &constant(1.0), 2), Err(Error::Domain(_))));
}

#[test]
fn jump_crossed_by_shape_rejected() {
    let p = RadialProfile::new(vec![0.0, 1.0, 2.0], vec![vec![2.0], vec![1.0]]).unwrap();
    let mut s = CoefficientVector::sphere(3, 1.0);
    s.set(2, 0, 0.05);
    assert!(matches!(shape_forward_derivative(&s, &p, 3), Err(Error::Domain(_))));
    assert!(shape_forward_derivative(&CoefficientVector::sphere(3, 1.5), &p, 3).is_ok());
}

#[test]
fn seed_radius_bisection() {
    let p = profiles()[2].clone();
    let a = 1.234;
    let target = mu(&p, 2, a).unwrap();
    assert_relative_eq!(sphere_radius_for_monopole(&p, target).unwrap(), a, max_relative = 1e-13);
    let top = mu(&p, 2, 2.0).unwrap();
    assert!(matches!(sphere_radius_for_monopole(&p, top * 1.01), Err(Error::Precondition(_))));
    assert!(matches!(sphere_radius_for_monopole(&p, -1.0), Err(Error::Precondition(_))));
}

#[test]
fn sphere_data_converge_immediately() {
    let g = GravityConstant::default();
    let a0 = 1.3;
    let f = shape_forward(&CoefficientVector::sphere(6, a0), &profiles()[1], 6).unwrap();
    let res = invert_shape(&targets_to_multipoles(&f, g), &profiles()[1], &opts(6)).unwrap();
    assert!(res.converged);
    assert_eq!(res.iterations, 1);
    assert_relative_eq!(res.shape.get(0, 0), SQRT_4PI * a0, max_relative = 1e-12);
    for (_, v) in res.shape.iter().skip(1) {
        assert!(v.abs() < 1e-10);
    }
}

#[test]
fn roundtrip_recovers_shape() {
    let g = GravityConstant::new(0.7).unwrap();
    let profile = constant(1.0);
    let truth = true_shape();
    let d = targets_to_multipoles(&shape_forward(&truth, &profile, 8).unwrap(), g);
    let o = NewtonOptions {
        gravity: g,
        ..opts(8)
    };
    let res = invert_shape(&d, &profile, &o).unwrap();
    assert!(res.converged, "{:?}", res.diagnostics);
    assert!(res.iterations <= 15);
    for w in res.residual_history.windows(2) {
        assert!(w[1] < w[0]);
    }
    let err = res.shape.sub(&truth).values().iter().fold(0.0f64, |a, v| a.max(v.abs()));
    assert!(err <= 1e-8, "max coefficient error {err:e}");
}

#[test]
fn iterates_are_recorded() {
    let truth = true_shape();
    let d = targets_to_multipoles(&shape_forward(&truth, &constant(1.0), 8).unwrap(), GravityConstant::default());
    let res = invert_shape(
        &d,
        &constant(1.0),
        &NewtonOptions {
            record_iterates: true,
            ..opts(8)
        },
    )
    .unwrap();
    assert_eq!(res.iterates.len(), res.residual_history.len());
    let json = serde_json::to_string(&res).unwrap();
    let back: InversionResult<f64> = serde_json::from_str(&json).unwrap();
    assert_eq!(back.shape, res.shape);
}

#[test]
fn iteration_limit_reports_nonconvergence() {
    let d = targets_to_multipoles(&shape_forward(&true_shape(), &constant(1.0), 8).unwrap(), GravityConstant::default());
    let res = invert_shape(
        &d,
        &constant(1.0),
        &NewtonOptions {
            max_iterations: 1,
            ..opts(8)
        },
    )
    .unwrap();
    assert!(!res.converged);
    assert!(res.final_residual > 1e-10);
    assert!(res.diagnostics.unwrap().contains("iteration limit"));
}

#[test]
fn recovered_shape_independent_of_quadrature() {
    let profile = profiles()[1].clone();
    let truth = true_shape();
    let d = targets_to_multipoles(
        &ShapeForwardMap::new(&profile, 8, 64).evaluate(&truth).unwrap(),
        GravityConstant::default(),
    );
    let base = invert_shape(&d, &profile, &opts(8)).unwrap();
    let doubled = invert_shape(
        &d,
        &profile,
        &NewtonOptions {
            quadrature_margin: shape_quadrature_degree(8, DEFAULT_QUADRATURE_MARGIN) + DEFAULT_QUADRATURE_MARGIN,
            ..opts(8)
        },
    )
    .unwrap();
    assert!(base.converged && doubled.converged);
    let diff = base.shape.sub(&doubled.shape).values().iter().fold(0.0f64, |a, v| a.max(v.abs()));
    assert!(diff <= 1e-8, "{diff:e}");
}

#[test]
fn scaling_density_scales_targets_and_keeps_shape() {
    let profile = profiles()[2].clone();
    let lambda = 3.7;
    let scaled = profile.scaled(lambda).unwrap();
    let truth = true_shape();
    let f = shape_forward(&truth, &profile, 8).unwrap();
    let fs = shape_forward(&truth, &scaled, 8).unwrap();
    assert!(fs.sub(&f.scaled(lambda)).norm() <= 1e-10 * fs.norm());

    let g = GravityConstant::default();
    let a = invert_shape(&targets_to_multipoles(&f, g), &profile, &opts(8)).unwrap();
    let b = invert_shape(&targets_to_multipoles(&fs, g), &scaled, &opts(8)).unwrap();
    let diff = a.shape.sub(&b.shape).values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    assert!(diff <= 1e-10, "{diff:e}");
}

#[test]
fn nearby_shapes_have_separated_targets() {
    // smallest diagonal entry of the derivative at the unit sphere is 1 for
    // rho0 = 1; the witness allows half of it to be lost off the sphere
    let margin = 0.5;
    let l = 4;
    let map = ShapeForwardMap::new(&constant(1.0), l, DEFAULT_QUADRATURE_MARGIN);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let random_shape = |rng: &mut ChaCha8Rng| {
        let mut s = CoefficientVector::sphere(l, 1.0);
        let mut dv = vec![0.0; s.len()];
        for v in dv.iter_mut() {
            *v = rng.random_range(-1.0..1.0);
        }
        let n = dv.iter().map(|v| v * v).sum::<f64>().sqrt();
        let radius = rng.random_range(0.0..0.1);
        for (k, v) in dv.iter().enumerate() {
            s.values_mut()[k] += v / n * radius;
        }
        s
    };
    for _ in 0..50 {
        let s1 = random_shape(&mut rng);
        let s2 = random_shape(&mut rng);
        let df = map.evaluate(&s1).unwrap().sub(&map.evaluate(&s2).unwrap()).norm();
        let ds = s1.sub(&s2).norm();
        assert!(df >= (1.0 - margin) * ds, "{df:e} < {:e}", (1.0 - margin) * ds);
    }
}

#[test]
fn uncentered_data_rejected() {
    let g = GravityConstant::default();
    let model = DensityModel::Shifted {
        offset: [0.2, 0.0, 0.0],
        model: Box::new(DensityModel::CarvedRadialBody {
            profile: constant(1.0),
            shape: true_shape(),
        }),
    };
    let d = multipoles(&model, g, 8, &BallQuadrature::new(48, 8, 2.0)).unwrap();
    let err = invert_shape(&d, &constant(1.0), &opts(8)).unwrap_err();
    assert!(matches!(err, Error::Precondition(ref m) if m.contains("recenter")), "{err}");
}

#[test]
fn low_band_data_rejected() {
    let d = CoefficientVector::sphere(4, -1.0);
    assert!(matches!(invert_shape(&d, &constant(1.0), &opts(6)), Err(Error::Precondition(_))));
}

fn points(ms: &[(f64, [f64; 3])]) -> DensityModel<f64> {
    DensityModel::PointMassSet {
        masses: ms.iter().map(|&(mass, position)| PointMass { mass, position }).collect(),
    }
}

#[test]
fn center_of_mass_examples() {
    let quad = BallQuadrature::new(8, 4, 1.0);
    let t = center_of_mass(&points(&[(1.0, [0.2, 0.0, 0.0])]), &quad).unwrap();
    assert_eq!(t, [0.2, 0.0, 0.0]);
    let t = center_of_mass(&points(&[(1.0, [1.0, 0.0, 0.0]), (1.0, [-1.0, 0.0, 0.0])]), &quad).unwrap();
    assert_eq!(t, [0.0; 3]);
    let zero = points(&[(1.0, [1.0, 0.0, 0.0]), (-1.0, [-1.0, 0.0, 0.0])]);
    assert!(matches!(center_of_mass(&zero, &quad), Err(Error::Domain(_))));
}

#[test]
fn recentered_models_have_no_dipole() {
    let g = GravityConstant::default();
    let quad = BallQuadrature::new(40, 8, 2.0);
    let models = vec![
        points(&[(1.0, [0.3, -0.1, 0.2]), (2.0, [-0.2, 0.4, 0.1]), (0.5, [0.0, 0.0, -0.6])]),
        DensityModel::CarvedRadialBody {
            profile: profiles()[2].clone(),
            shape: true_shape(),
        },
        DensityModel::Shifted {
            offset: [0.1, -0.2, 0.05],
            model: Box::new(DensityModel::UniformBall {
                density: 2.0,
                radius: 0.7,
            }),
        },
    ];
    for model in models {
        let (d, _) = centered_multipoles(&model, g, 6, &quad).unwrap();
        for m in -1..=1 {
            assert!(d.get(1, m).abs() <= 1e-10 * d.get(0, 0).abs(), "d_1{m} = {:e}", d.get(1, m));
        }
    }
}

#[test]
fn recentering_multipoles_matches_shifted_model() {
    let g = GravityConstant::new(2.0).unwrap();
    let quad = BallQuadrature::new(48, 8, 2.0);
    let body = DensityModel::CarvedRadialBody {
        profile: profiles()[1].clone(),
        shape: true_shape(),
    };
    let (centered, t0) = centered_multipoles(&body, g, 8, &quad).unwrap();
    let offset = [0.15, 0.1, -0.2];
    let moved = DensityModel::Shifted {
        offset,
        model: Box::new(body),
    };
    let d = multipoles(&moved, g, 8, &quad).unwrap();
    let (recentered, t) = recenter_multipoles(&d).unwrap();
    for i in 0..3 {
        assert!((t[i] - (t0[i] + offset[i])).abs() < 1e-12);
    }
    let err = recentered.sub(&centered).norm() / centered.norm();
    assert!(err < 1e-12, "{err:e}");
    let f = multipoles_to_targets(&recentered, g);
    for m in -1..=1 {
        assert!(f.get(1, m).abs() <= 1e-10 * f.get(0, 0), "f_1{m} = {:e}", f.get(1, m));
    }
}

#[test]
fn recentered_data_invert() {
    let g = GravityConstant::default();
    let profile = constant(1.0);
    let truth = true_shape();
    let f = shape_forward(&truth, &profile, 8).unwrap();
    let d = targets_to_multipoles(&f, g);
    let (dc, _) = recenter_multipoles(&d).unwrap();
    let res = invert_shape(&dc, &profile, &opts(8)).unwrap();
    assert!(res.converged);
    assert!(res.shape.get(1, 1).abs() < 1e-2 * res.shape.get(0, 0));
}

#[test]
fn psi_grid_layout() {
    let csv = psi_grid_csv(&CoefficientVector::sphere(2, 1.5), 3, 4);
    let lines: Vec<_> = csv.lines().collect();
    assert_eq!(lines[0], "theta,phi,psi");
    assert_eq!(lines.len(), 13);
    let psi: f64 = lines[5].split(',').nth(2).unwrap().parse().unwrap();
    assert_relative_eq!(psi, 1.5, max_relative = 1e-14);
}
