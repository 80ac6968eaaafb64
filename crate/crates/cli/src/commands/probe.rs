use gravikern::discrete::{kernel_discretization_probe, KernelProbeReport, PointLattice};
use gravikern::forward::GravityConstant;
use serde::Serialize;

use crate::config::{Loaded, MAX_DENSE_POINTS};
use crate::error::{CliError, CliResult};

#[derive(Serialize)]
struct ProbeOutput {
    gravity: f64,
    lattice_radius: f64,
    receiver_radius: f64,
    reports: Vec<KernelProbeReport<f64>>,
}

pub fn run(cfg: &Loaded) -> CliResult<()> {
    let block = cfg.block(&cfg.config.probe_kernel_discrete, "probe_kernel_discrete")?;
    block.chi.validate()?;
    if block.spacings.is_empty() {
        return Err(CliError::Input("`spacings` must not be empty".into()));
    }
    let gravity = GravityConstant::new(cfg.config.gravity)?;
    let radius = block.lattice_radius.unwrap_or(block.chi.support_radius);
    let receiver_radius = block.receiver_radius.unwrap_or(1.5 * radius);
    let mut reports = Vec::with_capacity(block.spacings.len());
    for &h in &block.spacings {
        let sources = PointLattice::<f64>::ball_grid(radius, h, 1, receiver_radius)?.source_count();
        let receivers = block.receivers.unwrap_or(sources);
        if block.analyze_null && (sources > MAX_DENSE_POINTS || receivers > MAX_DENSE_POINTS) {
            return Err(CliError::Precondition(format!(
                "spacing {h} gives {sources} sources and {receivers} receivers; null-space analysis is capped at {MAX_DENSE_POINTS} (set \"analyze_null\": false)"
            )));
        }
        let lattice = PointLattice::ball_grid(radius, h, receivers, receiver_radius)?;
        reports.push(kernel_discretization_probe(&block.chi, &lattice, gravity, block.analyze_null)?);
    }
    cfg.write_json(
        &block.output,
        &ProbeOutput {
            gravity: gravity.value(),
            lattice_radius: radius,
            receiver_radius,
            reports,
        },
    )?;
    Ok(())
}
