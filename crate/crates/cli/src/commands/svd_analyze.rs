use std::fmt::Write as _;
use std::path::PathBuf;

use gravikern::discrete::{
    approximate_null_space, build_forward_matrix, matrix_to_bytes, svd_conditioning, NoiseModel, PointLattice,
    SvdReport,
};
use gravikern::forward::GravityConstant;
use serde::Serialize;

use crate::config::{LatticeEntry, Loaded, MatrixFormat, MAX_DENSE_POINTS};
use crate::error::{CliError, CliResult};

#[derive(Serialize)]
struct LatticeReport<'a> {
    lattice: &'a str,
    sources: usize,
    receivers: usize,
    gravity: f64,
    svd: SvdReport<f64>,
    noise_sigma: f64,
    approximate_null_dimension: usize,
}

fn build_lattice(cfg: &Loaded, entry: &LatticeEntry) -> CliResult<PointLattice<f64>> {
    let given = [
        entry.slab.is_some(),
        entry.random.is_some(),
        entry.points.is_some(),
        entry.file.is_some(),
    ];
    if given.iter().filter(|&&g| g).count() != 1 {
        return Err(CliError::Input(format!(
            "lattice `{}` needs exactly one of `slab`, `random`, `points`, `file`",
            entry.name
        )));
    }
    let lattice = if let Some(n) = entry.slab {
        PointLattice::slab(n)?
    } else if let Some(r) = &entry.random {
        PointLattice::random(r.sources, r.receivers, r.radius, r.seed.unwrap_or(cfg.config.seed))?
    } else if let Some(p) = &entry.points {
        p.validate()?;
        p.clone()
    } else {
        let p: PointLattice<f64> = cfg.read_json(entry.file.as_ref().unwrap())?;
        p.validate()?;
        p
    };
    let lattice = match entry.duplicate_receiver {
        Some(i) => lattice.with_duplicated_receiver(i)?,
        None => lattice,
    };
    if lattice.source_count() > MAX_DENSE_POINTS || lattice.receiver_count() > MAX_DENSE_POINTS {
        return Err(CliError::Precondition(format!(
            "lattice `{}` has {} sources and {} receivers; dense analysis is capped at {MAX_DENSE_POINTS}",
            entry.name,
            lattice.source_count(),
            lattice.receiver_count()
        )));
    }
    Ok(lattice)
}

fn valid_name(name: &str) -> bool {
    !name.is_empty() && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-' || c == '.')
        && !name.starts_with('.')
}

pub fn run(cfg: &Loaded) -> CliResult<()> {
    let block = cfg.block(&cfg.config.svd_analyze, "svd_analyze")?;
    if block.lattices.is_empty() {
        return Err(CliError::Input("svd_analyze needs at least one lattice".into()));
    }
    let gravity = GravityConstant::new(cfg.config.gravity)?;
    let noise = NoiseModel::new(block.noise_sigma, cfg.config.seed)?;
    let mut names = std::collections::BTreeSet::new();
    for entry in &block.lattices {
        if !valid_name(&entry.name) || !names.insert(entry.name.as_str()) {
            return Err(CliError::Input(format!(
                "lattice name `{}` must be unique and use only letters, digits, '_', '-', '.'",
                entry.name
            )));
        }
    }
    for entry in &block.lattices {
        let lattice = build_lattice(cfg, entry)?;
        let fm = build_forward_matrix(&lattice, gravity)?;
        let svd = svd_conditioning(&fm.matrix, block.tau)?;
        let basis = approximate_null_space(&fm.matrix, &noise)?;
        let out = |suffix: &str| -> PathBuf { block.output_dir.join(format!("{}.{suffix}", entry.name)) };

        let mut sigma_csv = String::from("index,sigma\n");
        for (k, s) in svd.singular_values.iter().enumerate() {
            let _ = writeln!(sigma_csv, "{},{:e}", k + 1, s);
        }
        cfg.write(&out("sigma.csv"), sigma_csv)?;

        if block.write_null_basis {
            let mut csv = String::from("source");
            for k in 0..basis.ncols() {
                let _ = write!(csv, ",v{k}");
            }
            csv.push('\n');
            for i in 0..basis.nrows() {
                let _ = write!(csv, "{i}");
                for k in 0..basis.ncols() {
                    let _ = write!(csv, ",{:e}", basis[(i, k)]);
                }
                csv.push('\n');
            }
            cfg.write(&out("null.csv"), csv)?;
        }
        match block.write_matrix {
            Some(MatrixFormat::Csv) => {
                cfg.write(&out("matrix.csv"), fm.to_csv())?;
            }
            Some(MatrixFormat::Binary) => {
                cfg.write(&out("matrix.bin"), matrix_to_bytes(&fm.matrix))?;
            }
            None => {}
        }
        let report = LatticeReport {
            lattice: &entry.name,
            sources: lattice.source_count(),
            receivers: lattice.receiver_count(),
            gravity: gravity.value(),
            svd,
            noise_sigma: block.noise_sigma,
            approximate_null_dimension: basis.ncols(),
        };
        cfg.write_json(&out("svd.json"), &report)?;
    }
    Ok(())
}
