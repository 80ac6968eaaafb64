//! Experiment configuration files. See `docs/formats.md`.

use std::fs;
use std::path::{Path, PathBuf};

use gravikern::discrete::PointLattice;
use gravikern::forward::{DensityModel, RadialProfile};
use gravikern::kernel::{ChiSpec, ObservableKind};
use serde::Deserialize;

use crate::error::{CliError, CliResult};

pub const SCHEMA_VERSION: u32 = 1;

/// Largest source or receiver count accepted for dense matrix work.
pub const MAX_DENSE_POINTS: usize = 4096;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    #[serde(default = "one")]
    pub gravity: f64,
    #[serde(default)]
    pub quadrature: QuadratureSettings,
    #[serde(default)]
    pub seed: u64,
    pub forward: Option<ForwardBlock>,
    pub kernel_verify: Option<KernelVerifyBlock>,
    pub invert_shape: Option<InvertShapeBlock>,
    pub svd_analyze: Option<SvdAnalyzeBlock>,
    pub probe_kernel_discrete: Option<ProbeBlock>,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureSettings {
    pub angular_degree: usize,
    pub radial_points: usize,
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        Self {
            angular_degree: 48,
            radial_points: 24,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    Potential,
    Gradient,
}

fn both_observables() -> Vec<Observable> {
    vec![Observable::Potential, Observable::Gradient]
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForwardBlock {
    pub density: Option<DensityModel<f64>>,
    pub density_file: Option<PathBuf>,
    pub receivers: PathBuf,
    pub output: PathBuf,
    #[serde(default = "both_observables")]
    pub observables: Vec<Observable>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelVerifyBlock {
    pub density: Option<DensityModel<f64>>,
    pub density_file: Option<PathBuf>,
    /// Builds `laplacian(chi)`, plus the spherical `profile` when given.
    pub chi: Option<ChiSpec<f64>>,
    pub profile: Option<RadialProfile<f64>>,
    pub observable: ObservableKind,
    pub surface_radius: f64,
    #[serde(default = "default_verify_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_verify_angular")]
    pub angular_degree: usize,
    #[serde(default = "default_verify_radial")]
    pub radial_points: usize,
    #[serde(default = "default_verify_sample")]
    pub sample_degree: usize,
    pub report: PathBuf,
}

fn default_verify_tolerance() -> f64 {
    1e-8
}
fn default_verify_angular() -> usize {
    64
}
fn default_verify_radial() -> usize {
    32
}
fn default_verify_sample() -> usize {
    24
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InvertShapeBlock {
    /// Multipole coefficients, CSV (`.csv`) or JSON (anything else).
    pub data: PathBuf,
    pub profile: Option<RadialProfile<f64>>,
    pub profile_file: Option<PathBuf>,
    pub band_limit: usize,
    /// Translate the data to the center of mass before inverting.
    #[serde(default)]
    pub recenter: bool,
    pub max_iterations: Option<usize>,
    pub residual_tolerance: Option<f64>,
    pub damping: Option<f64>,
    pub max_halvings: Option<usize>,
    pub quadrature_margin: Option<usize>,
    pub centering_tolerance: Option<f64>,
    pub result: PathBuf,
    pub shape: PathBuf,
    pub grid: PathBuf,
    #[serde(default = "default_grid")]
    pub grid_size: [usize; 2],
    /// Directory for one `theta,phi,psi` grid per iterate.
    pub iterate_dir: Option<PathBuf>,
}

fn default_grid() -> [usize; 2] {
    [90, 180]
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomLattice {
    pub sources: usize,
    pub receivers: usize,
    pub radius: f64,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeEntry {
    pub name: String,
    pub slab: Option<usize>,
    pub random: Option<RandomLattice>,
    pub points: Option<PointLattice<f64>>,
    pub file: Option<PathBuf>,
    /// Append a copy of this receiver, making the matrix rank deficient.
    pub duplicate_receiver: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatrixFormat {
    Csv,
    Binary,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SvdAnalyzeBlock {
    pub lattices: Vec<LatticeEntry>,
    #[serde(default = "default_tau")]
    pub tau: f64,
    #[serde(default)]
    pub noise_sigma: f64,
    #[serde(default)]
    pub write_null_basis: bool,
    pub write_matrix: Option<MatrixFormat>,
    pub output_dir: PathBuf,
}

fn default_tau() -> f64 {
    1e-10
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeBlock {
    pub chi: ChiSpec<f64>,
    pub spacings: Vec<f64>,
    /// Radius of the source ball; defaults to the support radius of `chi`.
    pub lattice_radius: Option<f64>,
    /// Receiver count; defaults to the source count of each lattice.
    pub receivers: Option<usize>,
    /// Defaults to 1.5 times the lattice radius.
    pub receiver_radius: Option<f64>,
    #[serde(default = "yes")]
    pub analyze_null: bool,
    pub output: PathBuf,
}

fn yes() -> bool {
    true
}

/// A parsed configuration plus the directory its relative paths refer to.
pub struct Loaded {
    pub config: ExperimentConfig,
    pub base: PathBuf,
}

impl Loaded {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("cannot read config {}: {e}", path.display())))?;
        let config = parse(&text).map_err(|e| CliError::Input(format!("config {}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(Self { config, base })
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base.join(p)
        }
    }

    pub fn read_text(&self, p: &Path) -> CliResult<String> {
        let path = self.resolve(p);
        fs::read_to_string(&path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))
    }

    pub fn read_json<T: serde::de::DeserializeOwned>(&self, p: &Path) -> CliResult<T> {
        let text = self.read_text(p)?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Input(format!("{}: {e}", self.resolve(p).display())))
    }

    pub fn write(&self, p: &Path, contents: impl AsRef<[u8]>) -> CliResult<PathBuf> {
        let path = self.resolve(p);
        if let Some(dir) = path.parent() {
            if !dir.as_os_str().is_empty() {
                fs::create_dir_all(dir)
                    .map_err(|e| CliError::Input(format!("cannot create {}: {e}", dir.display())))?;
            }
        }
        fs::write(&path, contents).map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))?;
        log::info!("wrote {}", path.display());
        Ok(path)
    }

    pub fn write_json<T: serde::Serialize>(&self, p: &Path, value: &T) -> CliResult<PathBuf> {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Input(e.to_string()))?;
        text.push('\n');
        self.write(p, text)
    }

    /// The block for a subcommand, or an input error naming it.
    pub fn block<'a, T>(&'a self, block: &'a Option<T>, name: &str) -> CliResult<&'a T> {
        block
            .as_ref()
            .ok_or_else(|| CliError::Input(format!("config has no `{name}` block")))
    }

    /// A density given inline or by file; exactly one of the two.
    pub fn density(
        &self,
        inline: &Option<DensityModel<f64>>,
        file: &Option<PathBuf>,
    ) -> CliResult<Option<DensityModel<f64>>> {
        match (inline, file) {
            (Some(_), Some(_)) => Err(CliError::Input("give either `density` or `density_file`, not both".into())),
            (Some(m), None) => Ok(Some(m.clone())),
            (None, Some(p)) => self.read_json(p).map(Some),
            (None, None) => Ok(None),
        }
    }
}

pub fn parse(text: &str) -> Result<ExperimentConfig, String> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| e.to_string())?;
    match value.get("schema_version").and_then(serde_json::Value::as_u64) {
        Some(v) if v == SCHEMA_VERSION as u64 => {}
        Some(v) => return Err(format!("unsupported schema_version {v} (expected {SCHEMA_VERSION})")),
        None => return Err("missing integer field `schema_version`".into()),
    }
    let config: ExperimentConfig = serde_json::from_value(value).map_err(|e| e.to_string())?;
    debug_assert_eq!(config.schema_version, SCHEMA_VERSION);
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config() {
        let c = parse(r#"{"schema_version": 1}"#).unwrap();
        assert_eq!(c.gravity, 1.0);
        assert_eq!(c.quadrature.angular_degree, 48);
        assert!(c.forward.is_none());
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(parse(r#"{"schema_version": 1, "gravty": 2}"#).unwrap_err().contains("gravty"));
        let nested = r#"{"schema_version": 1, "quadrature": {"angular_degree": 4, "radial_points": 2, "x": 1}}"#;
        assert!(parse(nested).is_err());
    }

    #[test]
    fn schema_version_checked() {
        assert!(parse(r#"{"schema_version": 2}"#).unwrap_err().contains("schema_version"));
        assert!(parse(r#"{"gravity": 1}"#).unwrap_err().contains("schema_version"));
        assert!(parse("[1]").is_err());
    }

    #[test]
    fn forward_block_defaults() {
        let c = parse(
            r#"{"schema_version": 1, "forward": {"density": {"type": "uniform_ball", "density": 1, "radius": 1},
                "receivers": "r.csv", "output": "o.csv"}}"#,
        )
        .unwrap();
        assert_eq!(c.forward.unwrap().observables, both_observables());
    }
}
