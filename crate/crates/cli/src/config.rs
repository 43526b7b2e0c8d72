use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use wgl_core::field::{Boundary, Grid};
use wgl_core::surfaces::Surface;

use crate::CliError;

/// Surface name plus its numeric parameters, e.g.
/// `{"name": "gaussian_bump", "A": 0.5}`. A bare string is a name with
/// default parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "SurfaceInput")]
pub struct SurfaceSpec {
    pub name: String,
    #[serde(flatten)]
    pub params: BTreeMap<String, f64>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum SurfaceInput {
    Name(String),
    Full {
        name: String,
        #[serde(flatten)]
        params: BTreeMap<String, f64>,
    },
}

impl From<SurfaceInput> for SurfaceSpec {
    fn from(s: SurfaceInput) -> Self {
        match s {
            SurfaceInput::Name(name) => Self { name, params: BTreeMap::new() },
            SurfaceInput::Full { name, params } => Self { name, params },
        }
    }
}

/// Either an explicit lattice, a square window `[lo, hi]²`, or the periodic
/// torus `[0, 2π)²` with `n` points per side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    Explicit {
        nx: usize,
        ny: usize,
        h: f64,
        x0: f64,
        y0: f64,
        #[serde(default)]
        boundary: Boundary,
    },
    Window {
        lo: f64,
        hi: f64,
        h: f64,
    },
    Torus {
        torus: usize,
    },
}

impl GridSpec {
    pub fn build(&self) -> Result<Grid<f64>, CliError> {
        let g = match *self {
            GridSpec::Explicit { nx, ny, h, x0, y0, boundary } => Grid::new(nx, ny, h, x0, y0, boundary),
            GridSpec::Window { lo, hi, h } => Grid::square(lo, hi, h),
            GridSpec::Torus { torus } => Grid::periodic_torus(torus),
        };
        g.map_err(|e| CliError::Config(e.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SchemeName {
    Explicit,
    #[default]
    Stabilized,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowOptions {
    #[serde(default)]
    pub scheme: SchemeName,
    /// Initial timestep. Defaults to `c_cfl·h⁴` for the explicit scheme and
    /// `1` for the stabilized one.
    #[serde(default)]
    pub tau: Option<f64>,
    #[serde(default = "default_c_cfl")]
    pub c_cfl: f64,
    #[serde(default = "default_max_steps")]
    pub max_steps: usize,
    #[serde(default = "default_grad_tol")]
    pub grad_tol: f64,
    /// Write a WGL1 checkpoint every this many steps; `0` disables.
    #[serde(default)]
    pub checkpoint_every: usize,
    /// Zero the initial data on the clamped margin before flowing.
    #[serde(default = "yes")]
    pub zero_margin: bool,
}

impl Default for FlowOptions {
    fn default() -> Self {
        Self {
            scheme: SchemeName::default(),
            tau: None,
            c_cfl: default_c_cfl(),
            max_steps: default_max_steps(),
            grad_tol: default_grad_tol(),
            checkpoint_every: 0,
            zero_margin: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyOptions {
    /// Grids in the refinement study, each with half the spacing of the last.
    #[serde(default = "default_levels")]
    pub levels: usize,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_min_order")]
    pub min_order: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { levels: default_levels(), epsilon: default_epsilon(), min_order: default_min_order() }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TestHooks {
    /// Perturb the divergence residual before it is compared, so that
    /// `verify` must fail.
    #[serde(default)]
    pub corrupt_div_residual: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub surface: SurfaceSpec,
    pub grid: GridSpec,
    /// Seed for `trig` surfaces that do not set their own.
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_radii")]
    pub radii: Vec<f64>,
    #[serde(default = "default_sigmas")]
    pub sigmas: Vec<f64>,
    #[serde(default)]
    pub flow: FlowOptions,
    #[serde(default)]
    pub verify: VerifyOptions,
    #[serde(default)]
    pub output_dir: Option<String>,
    #[serde(default)]
    pub test_hooks: TestHooks,
}

fn yes() -> bool {
    true
}
fn default_c_cfl() -> f64 {
    wgl_core::willmore::DEFAULT_C_CFL
}
fn default_max_steps() -> usize {
    1000
}
fn default_grad_tol() -> f64 {
    1e-6
}
fn default_levels() -> usize {
    3
}
fn default_epsilon() -> f64 {
    1e-4
}
fn default_min_order() -> f64 {
    1.9
}
fn default_radii() -> Vec<f64> {
    vec![1.0, 2.0, 4.0]
}
fn default_sigmas() -> Vec<f64> {
    vec![8.0, 16.0, 32.0, 64.0]
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("bad config: {e}")))
    }

    pub fn surface(&self) -> Result<Surface, CliError> {
        let mut params = self.surface.params.clone();
        if self.surface.name == "trig" {
            params.entry("seed".into()).or_insert(self.seed as f64);
        }
        Surface::from_params(&self.surface.name, &params).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Hex SHA-256 of the canonical JSON form (defaults filled in, keys sorted).
    pub fn hash(&self) -> String {
        let value = serde_json::to_value(self).expect("config serializes");
        let canonical = serde_json::to_string(&value).expect("value serializes");
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let c = RunConfig::parse(r#"{"surface": {"name": "plane"}, "grid": {"lo": -1, "hi": 1, "h": 0.125}}"#).unwrap();
        assert_eq!(c.radii, vec![1.0, 2.0, 4.0]);
        assert_eq!(c.flow.scheme, SchemeName::Stabilized);
        assert_eq!(c.grid.build().unwrap().nx, 17);
        assert!(matches!(c.surface().unwrap(), Surface::Plane { .. }));
    }

    #[test]
    fn bare_surface_name_is_accepted() {
        let c = RunConfig::parse(r#"{"surface": "paraboloid", "grid": {"lo": -1, "hi": 1, "h": 0.25}}"#).unwrap();
        assert_eq!(c.surface.name, "paraboloid");
        assert!(c.surface.params.is_empty());
    }

    #[test]
    fn hash_ignores_key_order_and_tracks_values() {
        let a = RunConfig::parse(r#"{"grid": {"torus": 16}, "surface": {"amplitude": 0.1, "name": "trig"}}"#).unwrap();
        let b = RunConfig::parse(r#"{"surface": {"name": "trig", "amplitude": 0.1}, "grid": {"torus": 16}}"#).unwrap();
        let c = RunConfig::parse(r#"{"surface": {"name": "trig", "amplitude": 0.2}, "grid": {"torus": 16}}"#).unwrap();
        assert_eq!(a.hash(), b.hash());
        assert_ne!(a.hash(), c.hash());
        assert_eq!(a.hash().len(), 64);
    }

    #[test]
    fn round_trips_through_json() {
        let c = RunConfig::parse(
            r#"{"surface": {"name": "gaussian_bump", "A": 0.5}, "grid": {"nx": 9, "ny": 9, "h": 0.5, "x0": -2, "y0": -2, "boundary": "one_sided"}, "flow": {"scheme": "explicit", "max_steps": 3}}"#,
        )
        .unwrap();
        let back = RunConfig::parse(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn unknown_fields_and_surfaces_are_config_errors() {
        assert!(RunConfig::parse(r#"{"surface": {"name": "plane"}, "grid": {"torus": 8}, "bogus": 1}"#).is_err());
        let c = RunConfig::parse(r#"{"surface": {"name": "klein_bottle"}, "grid": {"torus": 8}}"#).unwrap();
        let err = c.surface().unwrap_err();
        assert!(err.to_string().contains("unknown surface"), "{err}");
    }
}
