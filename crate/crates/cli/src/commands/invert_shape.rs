use std::path::Path;

use gravikern::forward::{GravityConstant, RadialProfile};
use gravikern::harmonics::CoefficientVector;
use gravikern::shape::{invert_shape, psi_grid_csv, recenter_multipoles, NewtonOptions};
use gravikern::Error;

use crate::config::Loaded;
use crate::error::{CliError, CliResult};

fn read_coefficients(cfg: &Loaded, p: &Path) -> CliResult<CoefficientVector<f64>> {
    let text = cfg.read_text(p)?;
    let parsed = if p.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
        CoefficientVector::from_csv(&text)
    } else {
        CoefficientVector::from_json(&text)
    };
    parsed.map_err(|e| CliError::Input(format!("{}: {e}", cfg.resolve(p).display())))
}

pub fn run(cfg: &Loaded) -> CliResult<()> {
    let block = cfg.block(&cfg.config.invert_shape, "invert_shape")?;
    let profile: RadialProfile<f64> = match (&block.profile, &block.profile_file) {
        (Some(p), None) => p.clone(),
        (None, Some(f)) => cfg.read_json(f)?,
        _ => return Err(CliError::Input("give exactly one of `profile` or `profile_file`".into())),
    };
    let mut data = read_coefficients(cfg, &block.data)?;
    if block.recenter {
        let (centered, t) = recenter_multipoles(&data)?;
        log::info!("recentered data by ({:e}, {:e}, {:e})", t[0], t[1], t[2]);
        data = centered;
    }
    let defaults = NewtonOptions::<f64>::default();
    let opts = NewtonOptions {
        max_iterations: block.max_iterations.unwrap_or(defaults.max_iterations),
        residual_tolerance: block.residual_tolerance.unwrap_or(defaults.residual_tolerance),
        damping: block.damping.unwrap_or(defaults.damping),
        max_halvings: block.max_halvings.unwrap_or(defaults.max_halvings),
        band_limit: block.band_limit,
        quadrature_margin: block.quadrature_margin.unwrap_or(defaults.quadrature_margin),
        gravity: GravityConstant::new(cfg.config.gravity)?,
        centering_tolerance: block.centering_tolerance.unwrap_or(defaults.centering_tolerance),
        record_iterates: block.iterate_dir.is_some(),
    };
    let result = match invert_shape(&data, &profile, &opts) {
        Ok(r) => r,
        Err(Error::Precondition(msg)) if msg.contains("recenter") => {
            return Err(CliError::Precondition(format!(
                "{msg}; set \"recenter\": true in the invert_shape block to translate the data to the center of mass"
            )))
        }
        Err(e) => return Err(e.into()),
    };
    let [n_theta, n_phi] = block.grid_size;
    if n_theta == 0 || n_phi == 0 {
        return Err(CliError::Input("grid_size entries must be positive".into()));
    }
    cfg.write_json(&block.result, &result)?;
    cfg.write(&block.shape, result.shape.to_csv())?;
    cfg.write(&block.grid, psi_grid_csv(&result.shape, n_theta, n_phi))?;
    if let Some(dir) = &block.iterate_dir {
        for (k, s) in result.iterates.iter().enumerate() {
            cfg.write(&dir.join(format!("iterate_{k:03}.csv")), psi_grid_csv(s, n_theta, n_phi))?;
        }
    }
    if result.converged {
        Ok(())
    } else {
        Err(CliError::NonConvergence(format!(
            "Newton iteration did not converge after {} iterations (residual {:e}): {}",
            result.iterations,
            result.final_residual,
            result.diagnostics.as_deref().unwrap_or("no diagnostics")
        )))
    }
}
