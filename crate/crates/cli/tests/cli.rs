use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use gravikern::forward::{DensityModel, ForwardEvaluator, GravityConstant};
use gravikern::harmonics::{BallQuadrature, CoefficientVector};
use gravikern::shape::{shape_forward, targets_to_multipoles};
use gravikern::RadialProfileF64;
use serde_json::{json, Value};
use tempfile::TempDir;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_gravikern"));
    c.env_remove("GRAVIKERN_THREADS");
    c
}

fn run_cfg(dir: &Path, sub: &str, config: &Value, extra: &[&str]) -> Output {
    let path = dir.join(format!("{sub}.json"));
    fs::write(&path, serde_json::to_string_pretty(config).unwrap()).unwrap();
    bin().arg(sub).arg("--config").arg(&path).args(extra).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn csv_column(path: &Path, name: &str) -> Vec<f64> {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let k = header.iter().position(|h| *h == name).unwrap();
    lines.map(|l| l.split(',').nth(k).unwrap().parse().unwrap()).collect()
}

fn receivers(dir: &Path) -> PathBuf {
    let mut s = String::from("x,y,z\n");
    for (i, r) in [1.5, 2.0, 3.0, 4.5, 7.0].iter().enumerate() {
        let t = 0.4 + i as f64;
        s.push_str(&format!("{},{},{}\n", r * t.sin() * t.cos(), r * t.sin() * t.sin(), r * t.cos()));
    }
    let p = dir.join("receivers.csv");
    fs::write(&p, s).unwrap();
    p
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn help_on_every_subcommand() {
    for sub in ["forward", "kernel-verify", "invert-shape", "svd-analyze", "probe-kernel-discrete"] {
        let o = bin().args([sub, "--help"]).output().unwrap();
        assert_eq!(code(&o), 0, "{sub}");
        assert!(String::from_utf8_lossy(&o.stdout).contains("--config"));
    }
    assert_eq!(code(&bin().arg("--help").output().unwrap()), 0);
}

#[test]
fn argument_errors_exit_1() {
    assert_eq!(code(&bin().arg("frobnicate").output().unwrap()), 1);
    assert_eq!(code(&bin().arg("forward").output().unwrap()), 1);
    let o = bin().args(["forward", "--config", "x.json", "--threads", "0"]).output().unwrap();
    assert_eq!(code(&o), 1);
    let o = bin().env("GRAVIKERN_THREADS", "zero").args(["forward", "--config", "x.json"]).output().unwrap();
    assert_eq!(code(&o), 1);
}

#[test]
fn config_errors_exit_1() {
    let dir = TempDir::new().unwrap();
    let p = dir.path().join("bad.json");
    fs::write(&p, "{\"schema_version\": 1,").unwrap();
    let o = bin().args(["forward", "--config"]).arg(&p).output().unwrap();
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("bad.json"));

    let o = run_cfg(dir.path(), "forward", &json!({"schema_version": 1, "gravty": 1}), &[]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("gravty"));
    let o = run_cfg(dir.path(), "forward", &json!({"schema_version": 7}), &[]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("schema_version"));
    let o = run_cfg(dir.path(), "forward", &json!({"schema_version": 1}), &[]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("forward"));
    let missing = bin().args(["forward", "--config", "/nonexistent/cfg.json"]).output().unwrap();
    assert_eq!(code(&missing), 1);
}

fn ball_forward(dir: &Path) -> Value {
    let r = receivers(dir);
    json!({
        "schema_version": 1,
        "gravity": 2.0,
        "forward": {
            "density": {"type": "uniform_ball", "density": 1.5, "radius": 1.0},
            "receivers": r.file_name().unwrap().to_str().unwrap(),
            "output": "out/ball.csv"
        }
    })
}

#[test]
fn forward_uniform_ball_matches_point_mass() {
    let dir = TempDir::new().unwrap();
    let o = run_cfg(dir.path(), "forward", &ball_forward(dir.path()), &[]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let out = dir.path().join("out/ball.csv");
    let header = fs::read_to_string(&out).unwrap().lines().next().unwrap().to_string();
    assert_eq!(header, "x,y,z,phi,Txx,Tyy,Tzz,Txy,Txz,Tyz,Mplus,Mcross,V");
    let mass = 1.5 * 4.0 / 3.0 * std::f64::consts::PI;
    let (x, y, z) = (csv_column(&out, "x"), csv_column(&out, "y"), csv_column(&out, "z"));
    for (i, phi) in csv_column(&out, "phi").iter().enumerate() {
        let r = (x[i] * x[i] + y[i] * y[i] + z[i] * z[i]).sqrt();
        let expect = -2.0 * mass / r;
        assert!((phi - expect).abs() <= 1e-10 * expect.abs(), "{phi} vs {expect}");
    }
    for v in csv_column(&out, "V") {
        assert!(v.abs() < 1e-10);
    }
}

#[test]
fn forward_kernel_bump_is_invisible() {
    let dir = TempDir::new().unwrap();
    let r = receivers(dir.path());
    let chi = json!({"amplitude": 1.0, "support_radius": 1.0, "smoothness": 3, "l": 2, "m": 1});
    let model = json!({"type": "laplacian_bump", "chi": chi});
    fs::write(dir.path().join("bump.json"), model.to_string()).unwrap();
    let cfg = json!({
        "schema_version": 1,
        "quadrature": {"angular_degree": 64, "radial_points": 32},
        "forward": {"density_file": "bump.json", "receivers": r, "output": "bump.csv", "observables": ["potential"]}
    });
    let o = run_cfg(dir.path(), "forward", &cfg, &[]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let out = dir.path().join("bump.csv");
    let model: DensityModel<f64> = serde_json::from_value(model).unwrap();
    let abs = ForwardEvaluator::new(&model, GravityConstant::default(), &BallQuadrature::new(64, 32, 1.0))
        .unwrap()
        .absolute();
    let (x, y, z) = (csv_column(&out, "x"), csv_column(&out, "y"), csv_column(&out, "z"));
    for (i, phi) in csv_column(&out, "phi").iter().enumerate() {
        let scale = abs.potential(&[x[i], y[i], z[i]]).unwrap().abs();
        assert!(phi.abs() <= 1e-8 * scale, "{phi:e} vs scale {scale:e}");
    }
}

#[test]
fn forward_interior_receiver_exit_2() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("inside.csv"), "x,y,z\n3,0,0\n0.25,0.5,0\n").unwrap();
    let mut cfg = ball_forward(dir.path());
    cfg["forward"]["receivers"] = json!("inside.csv");
    let o = run_cfg(dir.path(), "forward", &cfg, &[]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("(0.25, 0.5, 0)"), "{}", stderr(&o));
}

#[test]
fn forward_output_is_deterministic_across_thread_counts() {
    let dir = TempDir::new().unwrap();
    let cfg = ball_forward(dir.path());
    assert_eq!(code(&run_cfg(dir.path(), "forward", &cfg, &["--threads", "1"])), 0);
    let a = fs::read(dir.path().join("out/ball.csv")).unwrap();
    assert_eq!(code(&run_cfg(dir.path(), "forward", &cfg, &["--threads", "4"])), 0);
    let b = fs::read(dir.path().join("out/ball.csv")).unwrap();
    let path = dir.path().join("forward.json");
    let o = bin().env("GRAVIKERN_THREADS", "3").args(["forward", "--config"]).arg(&path).output().unwrap();
    assert_eq!(code(&o), 0);
    let c = fs::read(dir.path().join("out/ball.csv")).unwrap();
    assert_eq!(a, b);
    assert_eq!(a, c);
}

fn verify_cfg(block: Value) -> Value {
    json!({"schema_version": 1, "kernel_verify": block})
}

#[test]
fn kernel_verify_exit_codes() {
    let dir = TempDir::new().unwrap();
    let chi = json!({"amplitude": 2.0, "support_radius": 1.0, "smoothness": 4, "l": 2, "m": 0});
    let o = run_cfg(
        dir.path(),
        "kernel-verify",
        &verify_cfg(json!({"chi": chi, "observable": "potential", "surface_radius": 1.5, "report": "t1.json"})),
        &[],
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let report = read_json(&dir.path().join("t1.json"));
    assert_eq!(report["pass"], json!(true));

    let ball = json!({"type": "uniform_ball", "density": 1.0, "radius": 1.0});
    let o = run_cfg(
        dir.path(),
        "kernel-verify",
        &verify_cfg(json!({"density": ball, "observable": "gradient_v", "surface_radius": 2.0, "report": "ball.json"})),
        &[],
    );
    assert_eq!(code(&o), 3);
    assert_eq!(read_json(&dir.path().join("ball.json"))["pass"], json!(false));

    let profile = json!({"breakpoints": [0.0, 1.0], "coefficients": [[1.0, -0.5]]});
    let o = run_cfg(
        dir.path(),
        "kernel-verify",
        &verify_cfg(json!({"chi": chi, "profile": profile, "observable": "gradient_v", "surface_radius": 2.0, "report": "t6.json"})),
        &[],
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));

    let o = run_cfg(
        dir.path(),
        "kernel-verify",
        &verify_cfg(json!({"chi": chi, "observable": "potential", "surface_radius": 0.5, "report": "x.json"})),
        &[],
    );
    assert_eq!(code(&o), 2);
    let o = run_cfg(
        dir.path(),
        "kernel-verify",
        &verify_cfg(json!({"observable": "potential", "surface_radius": 2.0, "report": "x.json"})),
        &[],
    );
    assert_eq!(code(&o), 1);
}

fn write_shape_data(dir: &Path, shape: &CoefficientVector<f64>, name: &str) {
    let profile = RadialProfileF64::constant(1.0, 2.0).unwrap();
    let f = shape_forward(shape, &profile, 8).unwrap();
    let d = targets_to_multipoles(&f, GravityConstant::default());
    fs::write(dir.join(name), d.to_csv()).unwrap();
}

fn true_shape() -> CoefficientVector<f64> {
    let mut s = CoefficientVector::sphere(8, 1.0);
    s.set(2, 0, 0.05);
    s.set(3, 1, 0.02);
    s
}

fn invert_cfg(data: &str, extra: Value) -> Value {
    let mut block = json!({
        "data": data,
        "profile": {"breakpoints": [0.0, 2.0], "coefficients": [[1.0]]},
        "band_limit": 8,
        "result": "inv/result.json",
        "shape": "inv/shape.csv",
        "grid": "inv/grid.csv",
        "grid_size": [6, 12]
    });
    for (k, v) in extra.as_object().unwrap() {
        block[k] = v.clone();
    }
    json!({"schema_version": 1, "invert_shape": block})
}

#[test]
fn invert_shape_roundtrip() {
    let dir = TempDir::new().unwrap();
    let truth = true_shape();
    write_shape_data(dir.path(), &truth, "d.csv");
    let o = run_cfg(dir.path(), "invert-shape", &invert_cfg("d.csv", json!({"iterate_dir": "inv/iter"})), &[]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let shape = CoefficientVector::<f64>::from_csv(&fs::read_to_string(dir.path().join("inv/shape.csv")).unwrap()).unwrap();
    let err = shape.sub(&truth).values().iter().fold(0.0f64, |a, v| a.max(v.abs()));
    assert!(err <= 1e-8, "{err:e}");
    let result = read_json(&dir.path().join("inv/result.json"));
    assert_eq!(result["converged"], json!(true));
    assert!(result["iterations"].as_u64().unwrap() <= 15);
    let grid = fs::read_to_string(dir.path().join("inv/grid.csv")).unwrap();
    assert_eq!(grid.lines().count(), 1 + 6 * 12);
    assert!(dir.path().join("inv/iter/iterate_000.csv").exists());
}

#[test]
fn invert_shape_sphere_one_iteration() {
    let dir = TempDir::new().unwrap();
    write_shape_data(dir.path(), &CoefficientVector::sphere(8, 0.9), "s.csv");
    let o = run_cfg(dir.path(), "invert-shape", &invert_cfg("s.csv", json!({})), &[]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(read_json(&dir.path().join("inv/result.json"))["iterations"], json!(1));
}

#[test]
fn invert_shape_uncentered_and_nonconvergent() {
    let dir = TempDir::new().unwrap();
    let model = DensityModel::Shifted {
        offset: [0.0, 0.3, 0.0],
        model: Box::new(DensityModel::CarvedRadialBody {
            profile: RadialProfileF64::constant(1.0, 2.0).unwrap(),
            shape: true_shape(),
        }),
    };
    let d = ForwardEvaluator::new(&model, GravityConstant::default(), &BallQuadrature::new(48, 8, 2.0))
        .unwrap()
        .multipoles(8);
    fs::write(dir.path().join("u.json"), d.to_json()).unwrap();
    let o = run_cfg(dir.path(), "invert-shape", &invert_cfg("u.json", json!({})), &[]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("recenter"), "{}", stderr(&o));
    let o = run_cfg(dir.path(), "invert-shape", &invert_cfg("u.json", json!({"recenter": true})), &[]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));

    write_shape_data(dir.path(), &true_shape(), "d.csv");
    let o = run_cfg(dir.path(), "invert-shape", &invert_cfg("d.csv", json!({"max_iterations": 1})), &[]);
    assert_eq!(code(&o), 4);
    assert_eq!(read_json(&dir.path().join("inv/result.json"))["converged"], json!(false));
}

fn svd_cfg(lattices: Value, extra: Value) -> Value {
    let mut block = json!({"lattices": lattices, "output_dir": "svd"});
    for (k, v) in extra.as_object().unwrap() {
        block[k] = v.clone();
    }
    json!({"schema_version": 1, "seed": 5, "svd_analyze": block})
}

#[test]
fn svd_analyze_slab_sweep() {
    let dir = TempDir::new().unwrap();
    let lattices = json!([{"name": "n2", "slab": 2}, {"name": "n3", "slab": 3}, {"name": "n4", "slab": 4}]);
    let o = run_cfg(dir.path(), "svd-analyze", &svd_cfg(lattices, json!({"write_matrix": "binary"})), &[]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let conds: Vec<f64> = ["n2", "n3", "n4"]
        .iter()
        .map(|n| read_json(&dir.path().join(format!("svd/{n}.svd.json")))["svd"]["condition_number"].as_f64().unwrap())
        .collect();
    assert!(conds[0] < conds[1] && conds[1] < conds[2], "{conds:?}");
    let sigma = fs::read_to_string(dir.path().join("svd/n3.sigma.csv")).unwrap();
    assert!(sigma.starts_with("index,sigma\n1,"));
    assert_eq!(sigma.lines().count(), 10);
    let bytes = fs::read(dir.path().join("svd/n2.matrix.bin")).unwrap();
    assert_eq!(&bytes[..8], b"GKFMAT01");
}

#[test]
fn svd_analyze_null_dimensions() {
    let dir = TempDir::new().unwrap();
    let lattices = json!([
        {"name": "generic", "random": {"sources": 8, "receivers": 8, "radius": 1.0}},
        {"name": "dup", "random": {"sources": 6, "receivers": 5, "radius": 1.0, "seed": 2}, "duplicate_receiver": 0}
    ]);
    let cfg = svd_cfg(lattices, json!({"write_null_basis": true, "write_matrix": "csv"}));
    let o = run_cfg(dir.path(), "svd-analyze", &cfg, &[]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let generic = read_json(&dir.path().join("svd/generic.svd.json"));
    assert_eq!(generic["approximate_null_dimension"], json!(0));
    let dup = read_json(&dir.path().join("svd/dup.svd.json"));
    let sv: Vec<f64> = dup["svd"]["singular_values"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    assert!(sv.last().unwrap() <= &(1e-13 * sv[0]));
    assert!(fs::read_to_string(dir.path().join("svd/dup.null.csv")).unwrap().starts_with("source"));

    let first = fs::read(dir.path().join("svd/generic.svd.json")).unwrap();
    assert_eq!(code(&run_cfg(dir.path(), "svd-analyze", &cfg, &["--threads", "2"])), 0);
    assert_eq!(first, fs::read(dir.path().join("svd/generic.svd.json")).unwrap());
}

#[test]
fn svd_analyze_rejects_coincident_points() {
    let dir = TempDir::new().unwrap();
    let points = json!({"sources": [[0.0, 0.0, 0.0], [0.0, 0.0, 0.0]], "receivers": [[0.0, 0.0, 2.0]], "radius": 1.0});
    let o = run_cfg(dir.path(), "svd-analyze", &svd_cfg(json!([{"name": "bad", "points": points}]), json!({})), &[]);
    assert_eq!(code(&o), 2);
    let o = run_cfg(dir.path(), "svd-analyze", &svd_cfg(json!([{"name": "../x", "slab": 2}]), json!({})), &[]);
    assert_eq!(code(&o), 1);
}

#[test]
fn probe_kernel_discrete_report() {
    let dir = TempDir::new().unwrap();
    let cfg = json!({
        "schema_version": 1,
        "probe_kernel_discrete": {
            "chi": {"amplitude": 1.0, "support_radius": 1.0, "smoothness": 3, "l": 2, "m": 0},
            "spacings": [0.3333333333333333, 0.25],
            "output": "probe.json"
        }
    });
    let o = run_cfg(dir.path(), "probe-kernel-discrete", &cfg, &[]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let out = read_json(&dir.path().join("probe.json"));
    let reports = out["reports"].as_array().unwrap();
    assert_eq!(reports.len(), 2);
    for r in reports {
        assert!(r["null_analysis"]["energy_fraction"].as_f64().unwrap() >= 0.9);
        assert_eq!(r["null_analysis"]["exact_null_dimension"], json!(0));
    }
    assert!(reports[1]["ratio"].as_f64().unwrap() < reports[0]["ratio"].as_f64().unwrap());
}
