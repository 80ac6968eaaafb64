use gravikern::forward::GravityConstant;
use gravikern::kernel::{make_gradient_kernel_density, make_potential_kernel_density, verify_kernel, VerifySettings};

use crate::config::Loaded;
use crate::error::{CliError, CliResult};

pub fn run(cfg: &Loaded) -> CliResult<()> {
    let block = cfg.block(&cfg.config.kernel_verify, "kernel_verify")?;
    let given = cfg.density(&block.density, &block.density_file)?;
    let model = match (given, &block.chi, &block.profile) {
        (Some(m), None, None) => m,
        (None, Some(chi), None) => {
            chi.validate()?;
            make_potential_kernel_density(chi)
        }
        (None, Some(chi), Some(profile)) => {
            chi.validate()?;
            make_gradient_kernel_density(profile, chi)
        }
        (None, None, Some(_)) => return Err(CliError::Input("`profile` needs a `chi` to go with it".into())),
        (None, None, None) => {
            return Err(CliError::Input(
                "kernel_verify needs one of `density`, `density_file` or `chi`".into(),
            ))
        }
        (Some(_), _, _) => {
            return Err(CliError::Input(
                "give either a density or `chi`/`profile`, not both".into(),
            ))
        }
    };
    let settings = VerifySettings {
        gravity: GravityConstant::new(cfg.config.gravity)?,
        angular_degree: block.angular_degree,
        radial_points: block.radial_points,
        sample_degree: block.sample_degree,
    };
    let report = verify_kernel(&model, block.observable, block.surface_radius, block.tolerance, &settings)?;
    cfg.write_json(&block.report, &report)?;
    if report.pass {
        Ok(())
    } else {
        Err(CliError::Verification(format!(
            "observable is not null: max |value| {:e} > {:e} x scale {:e} (ratio {:e})",
            report.max_abs, report.tolerance, report.scale, report.ratio
        )))
    }
}
